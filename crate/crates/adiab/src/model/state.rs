use nalgebra::DVector;
use num_complex::Complex64 as C64;

use crate::error::{AdiabError, Result};

/// Normalized pure state on an N-level system.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    amps: DVector<C64>,
}

impl StateVector {
    /// Requires the amplitudes to be normalized already (within 1e-10).
    pub fn new(amps: DVector<C64>) -> Result<Self> {
        if amps.len() < 2 {
            return Err(AdiabError::InvalidArgument(
                "state must have dim >= 2".into(),
            ));
        }
        let norm = amps.norm();
        if (norm - 1.0).abs() > 1e-10 {
            return Err(AdiabError::InvalidArgument(format!(
                "state norm is {norm}, expected 1 within 1e-10"
            )));
        }
        Ok(Self { amps })
    }

    /// Normalizes the given amplitudes; errors on the zero vector.
    pub fn normalized(amps: DVector<C64>) -> Result<Self> {
        let norm = amps.norm();
        if norm == 0.0 || !norm.is_finite() {
            return Err(AdiabError::InvalidArgument(
                "cannot normalize a zero or non-finite vector".into(),
            ));
        }
        Self::new(amps.map(|z| z / norm))
    }

    /// Computational basis state |k>.
    pub fn basis(dim: usize, k: usize) -> Result<Self> {
        if dim < 2 || k >= dim {
            return Err(AdiabError::InvalidArgument(format!(
                "basis index {k} out of range for dim {dim}"
            )));
        }
        let mut amps = DVector::zeros(dim);
        amps[k] = C64::new(1.0, 0.0);
        Self::new(amps)
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amps(&self) -> &DVector<C64> {
        &self.amps
    }
}
