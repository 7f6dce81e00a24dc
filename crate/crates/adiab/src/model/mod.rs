//! Shared data model: operators, control paths, schedules, states, traces.

mod operator;
mod path;
mod schedule;
mod state;
mod trace;

pub use operator::{HermitianOperator, PauliCoeffs};
pub use path::{ParameterPath, Segment};
pub use schedule::{build_lz_schedule, build_waveguide_schedule, Family, HamiltonianSchedule};
pub use state::StateVector;
pub use trace::EvolutionTrace;
