use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{AdiabError, Result};
use crate::model::operator::{HermitianOperator, PauliCoeffs};
use crate::model::path::ParameterPath;

/// Map from the control parameter to a Hamiltonian.
///
/// `LinearSweepLz` is the avoided-crossing sweep `H = v*sx + lambda*sz`.
/// `AngleSweep` keeps the gap fixed while the field direction rotates:
/// `H = beta0*I + db*sin(lambda)*sx - db*cos(lambda)*sz`, the coupled-mode
/// form of two waveguides with modulated detuning and coupling.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Family {
    LinearSweepLz { v: f64 },
    AngleSweep { beta0: f64, delta_beta: f64 },
}

impl Family {
    pub fn dim(&self) -> usize {
        2
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            Family::LinearSweepLz { v } => {
                if v == 0.0 || !v.is_finite() {
                    return Err(AdiabError::InvalidArgument(
                        "family.v must be nonzero and finite".into(),
                    ));
                }
            }
            Family::AngleSweep { beta0, delta_beta } => {
                if !(delta_beta > 0.0) || !delta_beta.is_finite() {
                    return Err(AdiabError::InvalidArgument(
                        "family.delta_beta must be > 0".into(),
                    ));
                }
                if !beta0.is_finite() {
                    return Err(AdiabError::InvalidArgument(
                        "family.beta0 must be finite".into(),
                    ));
                }
            }
        }
        Ok(())
    }

    pub fn hamiltonian(&self, lambda: f64) -> HermitianOperator {
        match *self {
            Family::LinearSweepLz { v } => HermitianOperator::from_pauli(PauliCoeffs {
                a0: 0.0,
                ax: v,
                ay: 0.0,
                az: lambda,
            }),
            Family::AngleSweep { beta0, delta_beta } => {
                HermitianOperator::from_pauli(PauliCoeffs {
                    a0: beta0,
                    ax: delta_beta * lambda.sin(),
                    ay: 0.0,
                    az: -delta_beta * lambda.cos(),
                })
            }
        }
    }

    /// dH/dlambda at the given lambda.
    pub fn dh_dlambda(&self, lambda: f64) -> HermitianOperator {
        match *self {
            Family::LinearSweepLz { .. } => HermitianOperator::from_pauli(PauliCoeffs {
                a0: 0.0,
                ax: 0.0,
                ay: 0.0,
                az: 1.0,
            }),
            Family::AngleSweep { delta_beta, .. } => HermitianOperator::from_pauli(PauliCoeffs {
                a0: 0.0,
                ax: delta_beta * lambda.cos(),
                ay: 0.0,
                az: delta_beta * lambda.sin(),
            }),
        }
    }

    /// Analytic level gap `E+ - E-`.
    pub fn gap(&self, lambda: f64) -> f64 {
        match *self {
            Family::LinearSweepLz { v } => 2.0 * (v * v + lambda * lambda).sqrt(),
            Family::AngleSweep { delta_beta, .. } => 2.0 * delta_beta,
        }
    }
}

/// A parameter path together with the Hamiltonian family it drives.
#[derive(Debug, Clone, PartialEq)]
pub struct HamiltonianSchedule {
    path: ParameterPath,
    family: Family,
}

impl HamiltonianSchedule {
    pub fn new(path: ParameterPath, family: Family) -> Result<Self> {
        family.validate()?;
        Ok(Self { path, family })
    }

    pub fn path(&self) -> &ParameterPath {
        &self.path
    }

    pub fn family(&self) -> &Family {
        &self.family
    }

    pub fn dim(&self) -> usize {
        self.family.dim()
    }

    pub fn duration(&self) -> f64 {
        self.path.duration()
    }

    pub fn hamiltonian_at(&self, t: f64) -> Result<HermitianOperator> {
        let (lambda, _) = self.path.eval(t)?;
        Ok(self.family.hamiltonian(lambda))
    }

    /// dH/dt at `t`, left-continuous at joins; exactly zero inside holds.
    pub fn dh_dt_at(&self, t: f64) -> Result<HermitianOperator> {
        let (lambda, speed) = self.path.eval(t)?;
        if speed == 0.0 {
            return Ok(HermitianOperator::zero(self.dim()));
        }
        Ok(self.family.dh_dlambda(lambda).scaled(speed))
    }

    /// Largest gap over the traversed lambda range.
    pub fn max_gap(&self) -> f64 {
        match self.family {
            Family::LinearSweepLz { v } => {
                let (lo, hi) = self.path.lambda_range();
                let lmax = lo.abs().max(hi.abs());
                2.0 * (v * v + lmax * lmax).sqrt()
            }
            Family::AngleSweep { delta_beta, .. } => 2.0 * delta_beta,
        }
    }

    /// Default integration step: 1e-3 of the shortest characteristic period
    /// `2*pi/gap`, never longer than the schedule itself.
    pub fn default_dt(&self) -> f64 {
        (1e-3 * 2.0 * PI / self.max_gap()).min(self.duration())
    }

    pub fn with_path(&self, path: ParameterPath) -> Self {
        Self {
            path,
            family: self.family,
        }
    }
}

/// Single-ramp avoided-crossing sweep from `lambda_start` to `lambda_end` at
/// the given positive speed.
pub fn build_lz_schedule(
    v: f64,
    lambda_start: f64,
    lambda_end: f64,
    speed: f64,
) -> Result<HamiltonianSchedule> {
    if !(speed > 0.0) || !speed.is_finite() {
        return Err(AdiabError::InvalidArgument(format!(
            "speed must be > 0, got {speed}"
        )));
    }
    if lambda_end == lambda_start {
        return Err(AdiabError::InvalidArgument(
            "lambda_end must differ from lambda_start (zero sweep)".into(),
        ));
    }
    let span = lambda_end - lambda_start;
    let duration = span.abs() / speed;
    let slope = speed * span.signum();
    let path = ParameterPath::single_ramp(lambda_start, slope, duration)?;
    HamiltonianSchedule::new(path, Family::LinearSweepLz { v })
}

/// Angle sweep 0 -> pi over `periods` structural periods of length
/// `period_len`; lambda advances uniformly with propagation distance.
pub fn build_waveguide_schedule(
    beta0: f64,
    delta_beta: f64,
    periods: u32,
    period_len: f64,
) -> Result<HamiltonianSchedule> {
    if periods < 1 {
        return Err(AdiabError::InvalidArgument("periods must be >= 1".into()));
    }
    if !(period_len > 0.0) || !period_len.is_finite() {
        return Err(AdiabError::InvalidArgument(format!(
            "period_len must be > 0, got {period_len}"
        )));
    }
    let length = periods as f64 * period_len;
    let path = ParameterPath::single_ramp(0.0, PI / length, length)?;
    HamiltonianSchedule::new(path, Family::AngleSweep { beta0, delta_beta })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lz_builder_matches_sweep() {
        let s = build_lz_schedule(0.5, -1.5, 1.5, 0.2).unwrap();
        assert!((s.duration() - 15.0).abs() < 1e-12);
        let (l, v) = s.path().eval(7.5).unwrap();
        assert!(l.abs() < 1e-12);
        assert_eq!(v, 0.2);
        // the stretched control: same range at 0.04 takes five times longer
        let slow = build_lz_schedule(0.5, -1.5, 1.5, 0.04).unwrap();
        assert!((slow.duration() - 75.0).abs() < 1e-9);
    }

    #[test]
    fn lz_builder_rejects_degenerate() {
        assert!(build_lz_schedule(1.0, 0.0, 0.0, 0.2).is_err());
        assert!(build_lz_schedule(1.0, -1.0, 1.0, 0.0).is_err());
        assert!(build_lz_schedule(1.0, -1.0, 1.0, -0.2).is_err());
        assert!(build_lz_schedule(0.0, -1.0, 1.0, 0.2).is_err());
    }

    #[test]
    fn waveguide_builder_geometry() {
        let s = build_waveguide_schedule(0.0, 0.0713, 201, 1.33).unwrap();
        let total = 201.0 * 1.33;
        assert!((s.duration() - total).abs() < 1e-9);
        let (_, slope) = s.path().eval(1.0).unwrap();
        assert!((slope - PI / total).abs() < 1e-15);
        assert!((s.path().eval(total).unwrap().0 - PI).abs() < 1e-12);
        assert!(build_waveguide_schedule(0.0, -0.1, 201, 1.33).is_err());
        assert!(build_waveguide_schedule(0.0, 0.0713, 0, 1.33).is_err());
        assert!(build_waveguide_schedule(0.0, 0.0713, 201, 0.0).is_err());
    }

    #[test]
    fn angle_sweep_is_diagonal_at_zero() {
        let s = build_waveguide_schedule(0.0, 0.0713, 201, 1.33).unwrap();
        let h = s.hamiltonian_at(0.0).unwrap();
        let e = h.entries();
        assert!(e[(0, 1)].norm() < 1e-15);
        assert!((e[(0, 0)].re + 0.0713).abs() < 1e-15);
        assert!((e[(1, 1)].re - 0.0713).abs() < 1e-15);
    }

    #[test]
    fn dh_dt_zero_inside_hold() {
        let base = build_lz_schedule(0.5, -1.5, 1.5, 0.2).unwrap();
        let path = base.path().insert_hold(3.0, 2.0).unwrap();
        let s = base.with_path(path);
        assert!(s.dh_dt_at(4.0).unwrap().is_zero());
        assert!(!s.dh_dt_at(2.0).unwrap().is_zero());
    }
}
