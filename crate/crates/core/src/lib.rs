//! Matter-wave bright soliton meeting a dissipative electron beam.
//!
//! The condensate obeys the attractive 1D Gross–Pitaevskii equation with an
//! imaginary beam potential `-iγΓ(x, t)`. Frequent position measurement by
//! the beam suppresses transport into it, so a strong enough beam with a
//! sharp edge reflects the soliton almost losslessly.
//!
//! * [`grid`]: periodic grid and unitary FFT pair
//! * [`physics`]: constants, the soliton, beam profiles
//! * [`propagator`]: Strang split-step integrator
//! * [`observables`]: norms, reflected fraction, COM, sech fits
//! * [`experiments`]: scenarios, sweeps and figure presets
//! * [`io`]: config parsing and dataset output

pub mod error;
pub mod exec;
pub mod experiments;
pub mod grid;
pub mod io;
pub mod observables;
pub mod physics;
pub mod propagator;

pub use error::{Error, Result};
pub use exec::Exec;
pub use grid::SpatialGrid;
pub use observables::{RunSummary, SechFit};
pub use physics::{analytic_soliton, init_soliton, BeamShape, BeamSpec, PhysicalConstants, SolitonSpec, WaveField};
pub use propagator::{ObservableSchedule, Propagator, Side, StopReason, StopRule, TimeParams, Trajectory};
