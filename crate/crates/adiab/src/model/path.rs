use serde::{Deserialize, Serialize};

use crate::error::{AdiabError, Result};

/// One piece of a piecewise-linear control path: either the parameter moves
/// at a constant rate, or it is frozen.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Segment {
    Ramp { slope: f64, duration: f64 },
    Hold { duration: f64 },
}

impl Segment {
    pub fn duration(&self) -> f64 {
        match *self {
            Segment::Ramp { duration, .. } | Segment::Hold { duration } => duration,
        }
    }

    pub fn slope(&self) -> f64 {
        match *self {
            Segment::Ramp { slope, .. } => slope,
            Segment::Hold { .. } => 0.0,
        }
    }

    pub fn is_hold(&self) -> bool {
        matches!(self, Segment::Hold { .. })
    }
}

/// Piecewise-linear control parameter `lambda(t)`, starting from `lambda0`
/// at t = 0. Continuous by construction; the instantaneous speed is the
/// segment slope on ramps and exactly zero on holds.
///
/// Evaluation is left-continuous at segment joins: the join instant belongs
/// to the segment that ends there (t = 0 belongs to the first segment).
#[derive(Debug, Clone, PartialEq)]
pub struct ParameterPath {
    lambda0: f64,
    segments: Vec<Segment>,
    /// Cumulative start times; starts[i] is where segments[i] begins,
    /// starts[len] is the total duration.
    starts: Vec<f64>,
    /// lambda at each segment start (and at the end).
    lambdas: Vec<f64>,
}

impl ParameterPath {
    pub fn new(lambda0: f64, segments: Vec<Segment>) -> Result<Self> {
        if segments.is_empty() {
            return Err(AdiabError::InvalidArgument(
                "path must contain at least one segment".into(),
            ));
        }
        for (i, s) in segments.iter().enumerate() {
            let d = s.duration();
            if !(d > 0.0) || !d.is_finite() {
                return Err(AdiabError::InvalidArgument(format!(
                    "segment {i} duration must be positive and finite, got {d}"
                )));
            }
            if !s.slope().is_finite() {
                return Err(AdiabError::InvalidArgument(format!(
                    "segment {i} slope must be finite"
                )));
            }
        }
        if !lambda0.is_finite() {
            return Err(AdiabError::InvalidArgument("lambda0 must be finite".into()));
        }
        let mut starts = Vec::with_capacity(segments.len() + 1);
        let mut lambdas = Vec::with_capacity(segments.len() + 1);
        let mut t = 0.0;
        let mut l = lambda0;
        for s in &segments {
            starts.push(t);
            lambdas.push(l);
            t += s.duration();
            l += s.slope() * s.duration();
        }
        starts.push(t);
        lambdas.push(l);
        Ok(Self {
            lambda0,
            segments,
            starts,
            lambdas,
        })
    }

    pub fn single_ramp(lambda0: f64, slope: f64, duration: f64) -> Result<Self> {
        Self::new(lambda0, vec![Segment::Ramp { slope, duration }])
    }

    pub fn lambda0(&self) -> f64 {
        self.lambda0
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    /// Segment start times plus the final time, in order.
    pub fn boundaries(&self) -> &[f64] {
        &self.starts
    }

    pub fn duration(&self) -> f64 {
        *self.starts.last().unwrap()
    }

    pub fn lambda_end(&self) -> f64 {
        *self.lambdas.last().unwrap()
    }

    pub fn has_holds(&self) -> bool {
        self.segments.iter().any(|s| s.is_hold())
    }

    /// Index of the segment owning time `t` under left-continuity.
    fn segment_index(&self, t: f64) -> Result<usize> {
        let total = self.duration();
        let tol = 1e-9 * total.max(1.0);
        if t < -tol || t > total + tol {
            return Err(AdiabError::OutOfRange {
                t,
                lo: 0.0,
                hi: total,
            });
        }
        let t = t.clamp(0.0, total);
        if t <= self.starts[0] {
            return Ok(0);
        }
        // partition_point: first segment whose start is >= t, then step back
        let idx = self.starts[..self.segments.len()].partition_point(|&s| s < t);
        Ok(idx.saturating_sub(1).min(self.segments.len() - 1))
    }

    /// Returns `(lambda(t), lambda'(t))`.
    pub fn eval(&self, t: f64) -> Result<(f64, f64)> {
        let i = self.segment_index(t)?;
        let t = t.clamp(0.0, self.duration());
        let s = &self.segments[i];
        let lambda = self.lambdas[i] + s.slope() * (t - self.starts[i]);
        Ok((lambda, s.slope()))
    }

    /// Largest instantaneous |slope| over all ramps.
    pub fn max_speed(&self) -> f64 {
        self.segments
            .iter()
            .fold(0.0_f64, |m, s| m.max(s.slope().abs()))
    }

    /// Net parameter change divided by total duration.
    pub fn average_speed(&self) -> f64 {
        (self.lambda_end() - self.lambda0) / self.duration()
    }

    /// Smallest and largest lambda value traversed (extrema sit at joins
    /// because the path is piecewise linear).
    pub fn lambda_range(&self) -> (f64, f64) {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for &l in &self.lambdas {
            lo = lo.min(l);
            hi = hi.max(l);
        }
        (lo, hi)
    }

    /// Returns a new path with a hold of length `duration` inserted at time
    /// `t` (the remainder of the path is pushed back). `t` must not fall
    /// strictly inside an existing hold.
    pub fn insert_hold(&self, t: f64, duration: f64) -> Result<Self> {
        if !(duration > 0.0) || !duration.is_finite() {
            return Err(AdiabError::InvalidArgument(format!(
                "hold duration must be positive, got {duration}"
            )));
        }
        let i = self.segment_index(t)?;
        let t = t.clamp(0.0, self.duration());
        let mut segments = Vec::with_capacity(self.segments.len() + 2);
        segments.extend_from_slice(&self.segments[..i]);
        let seg = self.segments[i];
        let offset = t - self.starts[i];
        if offset == 0.0 || t == self.starts[i + 1] {
            // exactly on a boundary: no split needed
            if offset == 0.0 {
                segments.push(Segment::Hold { duration });
                segments.push(seg);
            } else {
                segments.push(seg);
                segments.push(Segment::Hold { duration });
            }
        } else {
            let Segment::Ramp { slope, .. } = seg else {
                return Err(AdiabError::InvalidArgument(format!(
                    "cannot insert a hold inside an existing hold (t = {t})"
                )));
            };
            let tail = self.starts[i + 1] - t;
            segments.push(Segment::Ramp {
                slope,
                duration: offset,
            });
            segments.push(Segment::Hold { duration });
            segments.push(Segment::Ramp {
                slope,
                duration: tail,
            });
        }
        segments.extend_from_slice(&self.segments[i + 1..]);
        Self::new(self.lambda0, segments)
    }
}
