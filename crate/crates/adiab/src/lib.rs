//! Time-dependent two-level (generalizable to N-level) Hamiltonian evolution
//! with instantaneous-transition diagnostics and pause-schedule synthesis.
//!
//! The crate is organized around one pipeline:
//!
//! - [`model`] holds the shared data types: Hermitian operators, piecewise
//!   linear control paths (ramps and holds), the Hamiltonian families they
//!   drive, states, and evolution traces.
//! - [`spectral`] computes instantaneous eigensystems with deterministic
//!   ordering and chains their gauges by parallel transport.
//! - [`propagator`] integrates the time-ordered evolution with exact
//!   midpoint-step exponentials, clipped at segment joins.
//! - [`transition`] derives the cross connections, the per-band instantaneous
//!   transition probability `P_n`, its accumulation, the closure residual of
//!   `d|c_n|^2/dt = Re(P_n)`, and the classic slowness ratio.
//! - [`pdm`] synthesizes pause schedules that keep `Re(P_target)`
//!   single-signed at fixed path and bounded instantaneous speed.
//! - [`scenarios`] bundles the canned sweep/waveguide runs and the
//!   Bloch/intensity projections.

pub mod error;
pub mod model;
pub mod pdm;
pub mod propagator;
pub mod scenarios;
pub mod spectral;
pub mod transition;

pub use error::{AdiabError, Result};
