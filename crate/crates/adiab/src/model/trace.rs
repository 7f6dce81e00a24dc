use nalgebra::DVector;
use num_complex::Complex64 as C64;

use crate::model::schedule::HamiltonianSchedule;
use crate::spectral::EigenFrame;

/// Sampled record of one evolution: states, gauge-chained eigenframes, band
/// amplitudes `c_n(t)`, instantaneous transition probabilities `P_n(t)`, and
/// the running accumulation `int_0^t P_n dt'` per band.
#[derive(Debug, Clone)]
pub struct EvolutionTrace {
    pub schedule: HamiltonianSchedule,
    pub times: Vec<f64>,
    pub states: Vec<DVector<C64>>,
    pub frames: Vec<EigenFrame>,
    pub amplitudes: Vec<DVector<C64>>,
    pub itp: Vec<DVector<C64>>,
    pub ita_running: Vec<DVector<C64>>,
    /// Left-continuous hold flag: true where the instantaneous speed is zero.
    pub on_hold: Vec<bool>,
    /// Integration step actually used.
    pub dt: f64,
    /// Worst deviation of the state norm from 1 over the run.
    pub norm_drift: f64,
}

impl EvolutionTrace {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.schedule.dim()
    }

    pub fn population(&self, sample: usize, band: usize) -> f64 {
        self.amplitudes[sample][band].norm_sqr()
    }

    /// |c_band(t)|^2 for every sample.
    pub fn populations(&self, band: usize) -> Vec<f64> {
        self.amplitudes.iter().map(|c| c[band].norm_sqr()).collect()
    }

    pub fn final_populations(&self) -> Vec<f64> {
        let c = self.amplitudes.last().expect("non-empty trace");
        (0..c.len()).map(|n| c[n].norm_sqr()).collect()
    }

    /// Band with the largest final population.
    pub fn final_band(&self) -> usize {
        let pops = self.final_populations();
        pops.iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .map(|(i, _)| i)
            .unwrap()
    }

    pub fn ita_final(&self) -> &DVector<C64> {
        self.ita_running.last().expect("non-empty trace")
    }
}
