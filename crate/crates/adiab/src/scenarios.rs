//! Canned two-level runs at desk scale: the avoided-crossing sweep in three
//! flavors, the constant-gap waveguide sweep with and without pauses, and the
//! waveguide-intensity view of the same evolutions, plus Bloch-sphere export.

use crate::error::{AdiabError, Result};
use crate::model::{
    build_lz_schedule, build_waveguide_schedule, EvolutionTrace, HamiltonianSchedule, StateVector,
};
use crate::pdm::{synthesize, PdmConfig, PdmMode, PdmResult};
use crate::propagator::{evolve, StepPolicy};
use crate::transition::{report, TransitionReport};

/// Sweep coupling for the avoided-crossing scenarios. Chosen so the initial
/// basis state overlaps the upper band by ~0.987 at lambda = -1.5.
pub const LZ_COUPLING: f64 = 0.5;
pub const LZ_LAMBDA_START: f64 = -1.5;
pub const LZ_LAMBDA_END: f64 = 1.5;
pub const LZ_SPEED: f64 = 0.2;
/// The slow uniform control runs at a fifth of the sweep speed.
pub const LZ_STRETCH_FACTOR: f64 = 5.0;

/// Waveguide effective parameters: half mode splitting (1/mm), structural
/// period (mm), and period count.
pub const WG_DELTA_BETA: f64 = 0.0713;
pub const WG_PERIOD: f64 = 1.33;
pub const WG_PERIODS: u32 = 201;
/// Common propagation constant; population-irrelevant (global phase).
pub const WG_BETA0: f64 = 0.0;

/// Hold length in half cycles for the counter variants.
pub const FIG1_PAUSE_MULTIPLE: u32 = 5;
pub const FIG2_PAUSE_MULTIPLE: u32 = 1;

pub const ITA_THRESHOLD: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Fig1Variant {
    /// Uniform sweep at the reference speed; stays in the upper band.
    Adiabatic,
    /// Pause-synthesized schedule on the same path; switches bands while
    /// moving strictly slower on average.
    Counter,
    /// Uniform sweep at a fifth of the speed; the slow control.
    Stretched,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Fig2Variant {
    Adiabatic,
    Counter,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Fig3Variant {
    Adiabatic,
    Counter,
    /// Uniform sweep stretched to the counter schedule's total length.
    LongAdiabatic,
}

/// One scenario run: trace, diagnostics, and the synthesis result when the
/// variant uses pauses.
#[derive(Debug, Clone)]
pub struct ScenarioRun {
    pub trace: EvolutionTrace,
    pub report: TransitionReport,
    pub pdm: Option<PdmResult>,
}

fn finish(trace: EvolutionTrace, pdm: Option<PdmResult>) -> Result<ScenarioRun> {
    let report = report(&trace, ITA_THRESHOLD)?;
    Ok(ScenarioRun { trace, report, pdm })
}

pub fn lz_base_schedule() -> Result<HamiltonianSchedule> {
    build_lz_schedule(LZ_COUPLING, LZ_LAMBDA_START, LZ_LAMBDA_END, LZ_SPEED)
}

pub fn waveguide_base_schedule() -> Result<HamiltonianSchedule> {
    build_waveguide_schedule(WG_BETA0, WG_DELTA_BETA, WG_PERIODS, WG_PERIOD)
}

/// Initial state for every scenario: the second basis state, which is the
/// upper band (exactly for the waveguide at lambda = 0, to ~0.987 overlap
/// for the sweep at lambda = -1.5).
pub fn scenario_initial_state() -> StateVector {
    StateVector::basis(2, 1).expect("two-level basis state")
}

pub fn scenario_fig1(variant: Fig1Variant) -> Result<ScenarioRun> {
    let policy = StepPolicy::default();
    let psi0 = scenario_initial_state();
    match variant {
        Fig1Variant::Adiabatic => {
            let trace = evolve(&lz_base_schedule()?, &psi0, &policy)?;
            finish(trace, None)
        }
        Fig1Variant::Counter => {
            let cfg = PdmConfig::new(PdmMode::Accumulate, 0)
                .with_pause_multiple(FIG1_PAUSE_MULTIPLE);
            let res = synthesize(&lz_base_schedule()?, &psi0, &cfg, &policy)?;
            finish(res.trace.clone(), Some(res))
        }
        Fig1Variant::Stretched => {
            let schedule = build_lz_schedule(
                LZ_COUPLING,
                LZ_LAMBDA_START,
                LZ_LAMBDA_END,
                LZ_SPEED / LZ_STRETCH_FACTOR,
            )?;
            let trace = evolve(&schedule, &psi0, &policy)?;
            finish(trace, None)
        }
    }
}

pub fn scenario_fig2(variant: Fig2Variant) -> Result<ScenarioRun> {
    let policy = StepPolicy::default();
    let psi0 = scenario_initial_state();
    match variant {
        Fig2Variant::Adiabatic => {
            let trace = evolve(&waveguide_base_schedule()?, &psi0, &policy)?;
            finish(trace, None)
        }
        Fig2Variant::Counter => {
            let cfg = PdmConfig::new(PdmMode::Accumulate, 0)
                .with_pause_multiple(FIG2_PAUSE_MULTIPLE);
            let res = synthesize(&waveguide_base_schedule()?, &psi0, &cfg, &policy)?;
            finish(res.trace.clone(), Some(res))
        }
    }
}

/// Waveguide-intensity view of a two-level trace: `I_k = |<k|psi>|^2` in the
/// uncoupled (computational) basis.
#[derive(Debug, Clone)]
pub struct IntensityTrace {
    pub z: Vec<f64>,
    pub i1: Vec<f64>,
    pub i2: Vec<f64>,
}

pub fn intensity(trace: &EvolutionTrace) -> Result<IntensityTrace> {
    if trace.dim() != 2 {
        return Err(AdiabError::InvalidArgument(
            "intensity view needs a two-level trace".into(),
        ));
    }
    let z = trace.times.clone();
    let i1 = trace.states.iter().map(|s| s[0].norm_sqr()).collect();
    let i2 = trace.states.iter().map(|s| s[1].norm_sqr()).collect();
    Ok(IntensityTrace { z, i1, i2 })
}

#[derive(Debug, Clone)]
pub struct Fig3Run {
    pub intensity: IntensityTrace,
    pub run: ScenarioRun,
}

pub fn scenario_fig3(variant: Fig3Variant) -> Result<Fig3Run> {
    let run = match variant {
        Fig3Variant::Adiabatic => scenario_fig2(Fig2Variant::Adiabatic)?,
        Fig3Variant::Counter => scenario_fig2(Fig2Variant::Counter)?,
        Fig3Variant::LongAdiabatic => {
            // stretch the uniform sweep to the counter schedule's length
            let counter = scenario_fig2(Fig2Variant::Counter)?;
            let total = counter.trace.schedule.duration();
            let path = crate::model::ParameterPath::single_ramp(
                0.0,
                std::f64::consts::PI / total,
                total,
            )?;
            let schedule = waveguide_base_schedule()?.with_path(path);
            let trace = evolve(&schedule, &scenario_initial_state(), &StepPolicy::default())?;
            finish(trace, None)?
        }
    };
    Ok(Fig3Run {
        intensity: intensity(&run.trace)?,
        run,
    })
}

/// Point on (or inside) the Bloch sphere. Convention: the first basis state
/// is the north pole, the second the south pole.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlochPoint {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

/// Per-sample Bloch coordinates of a two-level trace:
/// `x = 2 Re(psi0* psi1)`, `y = 2 Im(psi0* psi1)`, `z = |psi0|^2 - |psi1|^2`.
pub fn bloch(trace: &EvolutionTrace) -> Result<Vec<BlochPoint>> {
    if trace.dim() != 2 {
        return Err(AdiabError::InvalidArgument(
            "Bloch projection needs a two-level trace".into(),
        ));
    }
    Ok(trace
        .states
        .iter()
        .map(|s| {
            let cross = s[0].conj() * s[1];
            BlochPoint {
                x: 2.0 * cross.re,
                y: 2.0 * cross.im,
                z: s[0].norm_sqr() - s[1].norm_sqr(),
            }
        })
        .collect())
}
