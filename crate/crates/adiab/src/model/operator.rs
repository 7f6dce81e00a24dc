use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

use crate::error::{AdiabError, Result};

/// Pauli decomposition of a 2x2 Hermitian operator:
/// `H = a0*I + ax*sx + ay*sy + az*sz`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PauliCoeffs {
    pub a0: f64,
    pub ax: f64,
    pub ay: f64,
    pub az: f64,
}

impl PauliCoeffs {
    /// Length of the traceless part, `|(ax, ay, az)|`.
    pub fn field_norm(&self) -> f64 {
        (self.ax * self.ax + self.ay * self.ay + self.az * self.az).sqrt()
    }
}

/// Dense complex Hermitian operator on an N-level system (N >= 2).
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianOperator {
    entries: DMatrix<C64>,
}

impl HermitianOperator {
    /// Builds from a dense matrix, checking Hermiticity entrywise to
    /// `1e-12 * max(1, max|entry|)`.
    pub fn new(entries: DMatrix<C64>) -> Result<Self> {
        let (r, c) = entries.shape();
        if r != c || r < 2 {
            return Err(AdiabError::InvalidArgument(format!(
                "operator must be square with dim >= 2, got {r}x{c}"
            )));
        }
        let scale = entries
            .iter()
            .fold(0.0_f64, |m, z| m.max(z.norm()))
            .max(1.0);
        let tol = 1e-12 * scale;
        for i in 0..r {
            for j in i..c {
                let d = (entries[(i, j)] - entries[(j, i)].conj()).norm();
                if d > tol {
                    return Err(AdiabError::InvalidArgument(format!(
                        "entries[{i}][{j}] deviates from conj(entries[{j}][{i}]) by {d:.3e}"
                    )));
                }
            }
        }
        Ok(Self { entries })
    }

    pub fn from_pauli(p: PauliCoeffs) -> Self {
        let PauliCoeffs { a0, ax, ay, az } = p;
        let entries = DMatrix::from_row_slice(
            2,
            2,
            &[
                C64::new(a0 + az, 0.0),
                C64::new(ax, -ay),
                C64::new(ax, ay),
                C64::new(a0 - az, 0.0),
            ],
        );
        Self { entries }
    }

    pub fn zero(dim: usize) -> Self {
        Self {
            entries: DMatrix::zeros(dim, dim),
        }
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn entries(&self) -> &DMatrix<C64> {
        &self.entries
    }

    /// Pauli coefficients; only defined for dim = 2.
    pub fn pauli(&self) -> Option<PauliCoeffs> {
        if self.dim() != 2 {
            return None;
        }
        let h = &self.entries;
        Some(PauliCoeffs {
            a0: 0.5 * (h[(0, 0)].re + h[(1, 1)].re),
            az: 0.5 * (h[(0, 0)].re - h[(1, 1)].re),
            ax: 0.5 * (h[(0, 1)].re + h[(1, 0)].re),
            ay: 0.5 * (h[(1, 0)].im - h[(0, 1)].im),
        })
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.entries.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self {
            entries: self.entries.map(|z| z * s),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(|z| z.re == 0.0 && z.im == 0.0)
    }
}
