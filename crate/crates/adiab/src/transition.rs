//! Band-transition diagnostics: cross connections between instantaneous
//! eigenstates, the per-band instantaneous transition probability
//! `P_n = 2i sum_{m != n} c_m c_n^* A_nm`, its accumulated integral, and the
//! classic `|A_nm / (E_n - E_m)|` slowness ratio.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;

use crate::error::{AdiabError, Result};
use crate::model::{EvolutionTrace, HamiltonianSchedule, HermitianOperator, Segment};
use crate::spectral::{eigensystem, EigenFrame};

/// Cross connection between bands, `A[n][m] = i <n|d/dt m>` for n != m, zero
/// on the diagonal (the parallel-transport gauge makes that the exact value).
#[derive(Debug, Clone)]
pub struct ConnectionMatrix {
    pub a: DMatrix<C64>,
}

impl ConnectionMatrix {
    pub fn zero(dim: usize) -> Self {
        Self {
            a: DMatrix::zeros(dim, dim),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.a.iter().all(|z| z.re == 0.0 && z.im == 0.0)
    }
}

/// Connection from the operator identity `<n|d/dt m> = <n|dH/dt|m>/(E_m - E_n)`,
/// which avoids differencing eigenvectors. A zero `dh_dt` (inside a hold)
/// yields an exactly zero matrix.
pub fn connection(frame: &EigenFrame, dh_dt: &HermitianOperator) -> Result<ConnectionMatrix> {
    let dim = frame.dim();
    if dh_dt.is_zero() {
        return Ok(ConnectionMatrix::zero(dim));
    }
    let m = frame.vectors.adjoint() * dh_dt.entries() * &frame.vectors;
    let escale = frame
        .energies
        .iter()
        .fold(0.0_f64, |acc, e| acc.max(e.abs()))
        .max(f64::MIN_POSITIVE);
    let mut a = DMatrix::zeros(dim, dim);
    for n in 0..dim {
        for mm in 0..dim {
            if n == mm {
                continue;
            }
            let de = frame.energies[mm] - frame.energies[n];
            if de.abs() <= 1e-12 * escale {
                return Err(AdiabError::DegenerateSpectrum {
                    gap: de.abs(),
                    tol: 1e-12 * escale,
                });
            }
            a[(n, mm)] = C64::i() * m[(n, mm)] / de;
        }
    }
    Ok(ConnectionMatrix { a })
}

/// Instantaneous transition probability per band.
pub fn itp(c: &DVector<C64>, a: &ConnectionMatrix) -> DVector<C64> {
    let dim = c.len();
    let two_i = C64::new(0.0, 2.0);
    DVector::from_iterator(
        dim,
        (0..dim).map(|n| {
            let mut s = C64::new(0.0, 0.0);
            for m in 0..dim {
                if m != n {
                    s += c[m] * c[n].conj() * a.a[(n, m)];
                }
            }
            two_i * s
        }),
    )
}

/// Accumulated transition per band with the adiabaticity verdict.
#[derive(Debug, Clone)]
pub struct ItaReport {
    pub ita: DVector<C64>,
    pub threshold: f64,
    pub max_abs_re: f64,
    pub adiabatic: bool,
}

/// Trapezoidal integral of `P_n` over the whole trace. The verdict is
/// adiabatic iff `max_n |Re(ita_n)|` stays at or below `threshold`.
pub fn ita(trace: &EvolutionTrace, threshold: f64) -> Result<ItaReport> {
    if trace.len() < 2 {
        return Err(AdiabError::InvalidArgument(
            "ita needs at least 2 samples".into(),
        ));
    }
    let dim = trace.dim();
    let mut acc: DVector<C64> = DVector::zeros(dim);
    for i in 1..trace.len() {
        let dt = trace.times[i] - trace.times[i - 1];
        let half = C64::new(0.5 * dt, 0.0);
        acc += (&trace.itp[i] + &trace.itp[i - 1]) * half;
    }
    let max_abs_re = (0..dim).fold(0.0_f64, |m, n| m.max(acc[n].re.abs()));
    Ok(ItaReport {
        ita: acc,
        threshold,
        max_abs_re,
        adiabatic: max_abs_re <= threshold,
    })
}

/// Three-point derivative on a possibly uneven stencil; exact for quadratics.
fn three_point_derivative(t0: f64, f0: f64, t1: f64, f1: f64, t2: f64, f2: f64) -> f64 {
    let h0 = t1 - t0;
    let h1 = t2 - t1;
    -f0 * h1 / (h0 * (h0 + h1)) + f1 * (h1 - h0) / (h0 * h1) + f2 * h0 / (h1 * (h0 + h1))
}

/// Master closure check: max over interior samples and bands of
/// `|d|c_n|^2/dt - Re(P_n)|`, the two sides of the transition identity.
///
/// Stencils that straddle a segment join are skipped: `d^2|c|^2/dt^2` jumps
/// there, so a central difference across the join measures the kink rather
/// than the identity.
pub fn eq1_residual(trace: &EvolutionTrace) -> Result<f64> {
    if trace.len() < 3 {
        return Err(AdiabError::InvalidArgument(
            "eq1_residual needs at least 3 samples".into(),
        ));
    }
    let boundaries = trace.schedule.path().boundaries();
    let dim = trace.dim();
    let mut worst = 0.0_f64;
    for i in 1..trace.len() - 1 {
        let (t0, t1, t2) = (trace.times[i - 1], trace.times[i], trace.times[i + 1]);
        let straddles = boundaries.iter().any(|&b| b > t0 && b < t2);
        if straddles {
            continue;
        }
        for n in 0..dim {
            let d = three_point_derivative(
                t0,
                trace.population(i - 1, n),
                t1,
                trace.population(i, n),
                t2,
                trace.population(i + 1, n),
            );
            worst = worst.max((d - trace.itp[i][n].re).abs());
        }
    }
    Ok(worst)
}

/// Per-pair maxima of the slowness ratio `|A_nm| / |E_n - E_m|` over a
/// schedule, and report container for one run.
#[derive(Debug, Clone)]
pub struct CriterionReport {
    pub per_pair: DMatrix<f64>,
    pub max: f64,
}

/// Grid resolution for the criterion sweep.
const CRITERION_GRID: usize = 20_000;

/// Traditional slowness ratio, maximized over the schedule.
///
/// The ratio is a pure function of the path position and the local ramp
/// speed, so it is evaluated on a lambda grid anchored to the traversed
/// range rather than on integration samples. Two schedules covering the same
/// lambda intervals at the same ramp speeds therefore report identical
/// maxima no matter how their time grids differ; holds contribute nothing.
pub fn traditional_criterion(schedule: &HamiltonianSchedule) -> Result<CriterionReport> {
    let dim = schedule.dim();
    let path = schedule.path();
    let (lo, hi) = path.lambda_range();
    if !(hi > lo) {
        return Err(AdiabError::InvalidArgument(
            "criterion needs a nonzero lambda range".into(),
        ));
    }
    let dl = (hi - lo) / CRITERION_GRID as f64;
    let mut per_pair: DMatrix<f64> = DMatrix::zeros(dim, dim);

    let boundaries = path.boundaries();
    for (i, seg) in path.segments().iter().enumerate() {
        let Segment::Ramp { slope, .. } = *seg else {
            continue;
        };
        let la = schedule.path().eval(boundaries[i].max(0.0))?.0;
        let lb = la + slope * seg.duration();
        let (a, b) = if la <= lb { (la, lb) } else { (lb, la) };
        let klo = ((a - lo) / dl - 1e-9).ceil().max(0.0) as usize;
        let khi = (((b - lo) / dl + 1e-9).floor() as usize).min(CRITERION_GRID);
        for k in klo..=khi {
            let lambda = lo + k as f64 * dl;
            let frame = eigensystem(&schedule.family().hamiltonian(lambda))?;
            let dh = schedule.family().dh_dlambda(lambda).scaled(slope.abs());
            let a_mat = connection(&frame, &dh)?;
            for n in 0..dim {
                for m in 0..dim {
                    if n == m {
                        continue;
                    }
                    let de = (frame.energies[n] - frame.energies[m]).abs();
                    let ratio = a_mat.a[(n, m)].norm() / de;
                    if ratio > per_pair[(n, m)] {
                        per_pair[(n, m)] = ratio;
                    }
                }
            }
        }
    }
    let max = per_pair.iter().fold(0.0_f64, |m, &v| m.max(v));
    Ok(CriterionReport { per_pair, max })
}

/// One-stop diagnostics bundle for a finished trace.
#[derive(Debug, Clone)]
pub struct TransitionReport {
    pub ita: ItaReport,
    pub criterion: CriterionReport,
    pub eq1_residual: f64,
}

pub fn report(trace: &EvolutionTrace, ita_threshold: f64) -> Result<TransitionReport> {
    Ok(TransitionReport {
        ita: ita(trace, ita_threshold)?,
        criterion: traditional_criterion(&trace.schedule)?,
        eq1_residual: eq1_residual(trace)?,
    })
}
