//! Instantaneous eigensystems with ascending ordering and a parallel-transport
//! gauge chain. Two-level operators go through a closed form; larger systems
//! fall back to a dense Hermitian solver.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;

use crate::error::{AdiabError, Result};
use crate::model::HermitianOperator;

/// Relative tolerance below which adjacent levels count as degenerate.
pub const DEGENERACY_RTOL: f64 = 1e-9;

/// Instantaneous eigensystem at one time: energies ascending, eigenvectors as
/// orthonormal columns. The gauge (per-column phase) is arbitrary until fixed
/// against a neighboring frame.
#[derive(Debug, Clone)]
pub struct EigenFrame {
    pub energies: DVector<f64>,
    pub vectors: DMatrix<C64>,
}

impl EigenFrame {
    pub fn dim(&self) -> usize {
        self.energies.len()
    }

    /// Smallest gap between adjacent levels.
    pub fn min_gap(&self) -> f64 {
        (1..self.dim())
            .map(|n| self.energies[n] - self.energies[n - 1])
            .fold(f64::INFINITY, f64::min)
    }
}

fn check_gaps(energies: &DVector<f64>, norm: f64) -> Result<()> {
    let tol = DEGENERACY_RTOL * norm.max(f64::MIN_POSITIVE);
    for n in 1..energies.len() {
        let gap = energies[n] - energies[n - 1];
        if gap <= tol {
            return Err(AdiabError::DegenerateSpectrum { gap, tol });
        }
    }
    Ok(())
}

/// Closed-form eigensystem of a 2x2 Hermitian operator from its Pauli
/// coefficients. The branch keeps the large component in the denominator, so
/// it is stable everywhere away from degeneracy.
fn eigensystem_two_level(h: &HermitianOperator) -> Result<EigenFrame> {
    let p = h.pauli().expect("two-level operator");
    let r = p.field_norm();
    let energies = DVector::from_vec(vec![p.a0 - r, p.a0 + r]);
    check_gaps(&energies, h.frobenius_norm())?;

    let off = C64::new(p.ax, p.ay); // lower-left entry ax + i*ay
    let (up0, up1) = if p.az >= 0.0 {
        (C64::new(p.az + r, 0.0), off)
    } else {
        (off.conj(), C64::new(r - p.az, 0.0))
    };
    let n = (up0.norm_sqr() + up1.norm_sqr()).sqrt();
    let up0 = up0 / n;
    let up1 = up1 / n;
    // orthogonal complement is the lower eigenvector
    let vectors = DMatrix::from_column_slice(2, 2, &[-up1.conj(), up0.conj(), up0, up1]);
    Ok(EigenFrame { energies, vectors })
}

/// Dense Hermitian eigensolver, any dimension, sorted ascending. Used as the
/// general path for N > 2 and as a cross-check for the closed form.
pub fn eigensystem_general(h: &HermitianOperator) -> Result<EigenFrame> {
    let se = h.entries().clone().symmetric_eigen();
    let dim = h.dim();
    let mut order: Vec<usize> = (0..dim).collect();
    order.sort_by(|&a, &b| se.eigenvalues[a].total_cmp(&se.eigenvalues[b]));
    let energies = DVector::from_iterator(dim, order.iter().map(|&k| se.eigenvalues[k]));
    let mut vectors = DMatrix::zeros(dim, dim);
    for (dst, &src) in order.iter().enumerate() {
        vectors.set_column(dst, &se.eigenvectors.column(src));
    }
    check_gaps(&energies, h.frobenius_norm())?;
    Ok(EigenFrame { energies, vectors })
}

/// Instantaneous eigensystem with ascending energies.
///
/// Errors with `DegenerateSpectrum` when adjacent levels collide; the whole
/// pipeline assumes gapped spectra and fails loudly instead of tracking
/// crossings.
pub fn eigensystem(h: &HermitianOperator) -> Result<EigenFrame> {
    if h.dim() == 2 {
        eigensystem_two_level(h)
    } else {
        eigensystem_general(h)
    }
}

/// Rotates each column of `cur` by a unit phase so that `<prev_n|cur_n>` is
/// real and non-negative (parallel transport). Energies are untouched.
///
/// Errors with `StepTooLarge` when any band overlap falls to 0.5 or below,
/// which signals that the frames are too far apart to chain.
pub fn fix_gauge(prev: &EigenFrame, mut cur: EigenFrame) -> Result<EigenFrame> {
    assert_eq!(prev.dim(), cur.dim(), "frame dimensions must match");
    for n in 0..cur.dim() {
        let s: C64 = prev.vectors.column(n).dotc(&cur.vectors.column(n));
        let mag = s.norm();
        if mag <= 0.5 {
            return Err(AdiabError::StepTooLarge {
                band: n,
                overlap: mag,
            });
        }
        let phase = s.conj() / mag;
        if phase != C64::new(1.0, 0.0) {
            let col = cur.vectors.column(n) * phase;
            cur.vectors.set_column(n, &col);
        }
    }
    Ok(cur)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Family, PauliCoeffs};

    fn lz(v: f64, lambda: f64) -> HermitianOperator {
        Family::LinearSweepLz { v }.hamiltonian(lambda)
    }

    fn fidelity(a: nalgebra::DVectorView<C64>, b: nalgebra::DVectorView<C64>) -> f64 {
        a.dotc(&b).norm()
    }

    #[test]
    fn symmetric_off_diagonal_case() {
        let f = eigensystem(&lz(1.0, 0.0)).unwrap();
        assert!((f.energies[0] + 1.0).abs() < 1e-14);
        assert!((f.energies[1] - 1.0).abs() < 1e-14);
        let s = 0.5_f64.sqrt();
        // upper band is (1, 1)/sqrt(2) up to phase
        let up = f.vectors.column(1);
        assert!((up[0].norm() - s).abs() < 1e-14);
        assert!((up[1].norm() - s).abs() < 1e-14);
        assert!((up[0] / up[1] - C64::new(1.0, 0.0)).norm() < 1e-14);
        let lo = f.vectors.column(0);
        assert!((lo[0] / lo[1] + C64::new(1.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn lz_closed_form_values() {
        // E+ = sqrt(v^2 + lambda^2), upper vector parallel to (lambda+E+, v)
        let f = eigensystem(&lz(0.5, -1.5)).unwrap();
        let e = 2.5_f64.sqrt();
        assert!((f.energies[1] - e).abs() < 1e-14);
        assert!((f.energies[0] + e).abs() < 1e-14);
        let up = f.vectors.column(1);
        let expected = (-1.5 + e, 0.5);
        let norm = (expected.0 * expected.0 + expected.1 * expected.1).sqrt();
        assert!((up[0].norm() - expected.0.abs() / norm).abs() < 1e-12);
        assert!((up[1].norm() - expected.1 / norm).abs() < 1e-12);
    }

    #[test]
    fn angle_sweep_at_quarter_turn() {
        let f = eigensystem(
            &Family::AngleSweep {
                beta0: 0.0,
                delta_beta: 0.0713,
            }
            .hamiltonian(std::f64::consts::FRAC_PI_2),
        )
        .unwrap();
        assert!((f.energies[1] - 0.0713).abs() < 1e-15);
        assert!((f.energies[0] + 0.0713).abs() < 1e-15);
        let up = f.vectors.column(1);
        assert!((up[0] / up[1] - C64::new(1.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn closed_form_matches_general_solver() {
        // includes sy components and both az signs
        let cases = [
            PauliCoeffs { a0: 0.0, ax: 0.5, ay: 0.0, az: -1.5 },
            PauliCoeffs { a0: 0.3, ax: 0.1, ay: -0.4, az: 0.9 },
            PauliCoeffs { a0: -2.0, ax: 0.0, ay: 0.7, az: -0.2 },
            PauliCoeffs { a0: 17.0, ax: 0.0713, ay: 0.0, az: -1e-4 },
        ];
        for p in cases {
            let h = HermitianOperator::from_pauli(p);
            let a = eigensystem(&h).unwrap();
            let b = eigensystem_general(&h).unwrap();
            for n in 0..2 {
                assert!((a.energies[n] - b.energies[n]).abs() < 1e-10 * (1.0 + p.a0.abs()));
                let fid = fidelity(a.vectors.column(n), b.vectors.column(n));
                assert!(fid >= 1.0 - 1e-10, "band {n} fidelity {fid}");
            }
        }
    }

    #[test]
    fn orthonormal_columns() {
        let h = HermitianOperator::from_pauli(PauliCoeffs {
            a0: 0.1,
            ax: 0.3,
            ay: 0.2,
            az: -0.8,
        });
        let f = eigensystem(&h).unwrap();
        let gram = f.vectors.adjoint() * &f.vectors;
        for i in 0..2 {
            for j in 0..2 {
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!((gram[(i, j)] - C64::new(expect, 0.0)).norm() <= 1e-10);
            }
        }
    }

    #[test]
    fn degenerate_spectrum_rejected() {
        let h = HermitianOperator::from_pauli(PauliCoeffs {
            a0: 1.0,
            ax: 0.0,
            ay: 0.0,
            az: 0.0,
        });
        assert!(matches!(
            eigensystem(&h),
            Err(AdiabError::DegenerateSpectrum { .. })
        ));
    }

    #[test]
    fn gauge_fix_identity_and_phase_removal() {
        let f = eigensystem(&lz(0.5, 0.3)).unwrap();
        let fixed = fix_gauge(&f, f.clone()).unwrap();
        assert_eq!(fixed.vectors, f.vectors);

        let mut rotated = f.clone();
        let phase = C64::from_polar(1.0, 1.234);
        let col = rotated.vectors.column(1) * phase;
        rotated.vectors.set_column(1, &col);
        let fixed = fix_gauge(&f, rotated).unwrap();
        for n in 0..2 {
            let s = f.vectors.column(n).dotc(&fixed.vectors.column(n));
            assert!(s.im.abs() < 1e-14 && s.re > 0.0);
        }
    }

    #[test]
    fn gauge_fix_idempotent_exactly() {
        let a = eigensystem(&lz(0.5, 0.3)).unwrap();
        let b = eigensystem(&lz(0.5, 0.3001)).unwrap();
        let once = fix_gauge(&a, b.clone()).unwrap();
        let twice = fix_gauge(&a, once.clone()).unwrap();
        assert_eq!(once.vectors, twice.vectors);
    }

    #[test]
    fn gauge_fix_rejects_distant_frames() {
        // lambda sign flip swaps the dominant components
        let a = eigensystem(&lz(0.1, -1.5)).unwrap();
        let b = eigensystem(&lz(0.1, 1.5)).unwrap();
        assert!(matches!(
            fix_gauge(&a, b),
            Err(AdiabError::StepTooLarge { .. })
        ));
    }

    #[test]
    fn parallel_transport_kills_diagonal_connection() {
        // after gauge fixing, <n(l)|n(l+dl)> is real, so the finite-difference
        // diagonal connection is O(dl) instead of O(1) phase noise
        let dl = 1e-3;
        for lambda in [-1.5, -0.4, 0.0, 0.9] {
            let a = eigensystem(&lz(0.5, lambda)).unwrap();
            let b = fix_gauge(&a, eigensystem(&lz(0.5, lambda + dl)).unwrap()).unwrap();
            for n in 0..2 {
                let d = (b.vectors.column(n) - a.vectors.column(n)) / C64::new(dl, 0.0);
                let diag = a.vectors.column(n).dotc(&d);
                let m = 1 - n;
                let cross = a.vectors.column(m).dotc(&d);
                // transported diagonal is -|rot|^2 dl / 2 with |rot| = |cross|,
                // one order of dl below the cross term
                assert!(cross.norm() > 1e-3);
                assert!(
                    diag.norm() <= 0.75 * cross.norm() * dl + 1e-12,
                    "lambda {lambda} band {n}: diag {} cross {}",
                    diag.norm(),
                    cross.norm()
                );
            }
        }
    }
}
