//! Steady-state photon statistics of a driven two-level emitter in a lossy
//! cavity whose radiative channels share a continuum.

pub mod analytic;
pub mod error;
pub mod figures;
pub mod lindblad;
pub mod observables;
pub mod params;
pub mod sweep;
pub mod verify;
pub mod wavefunction;

pub use error::{Error, Result};
pub use observables::{Observable, ObservableSet, SolverKind};
pub use params::{DerivedQuantities, DriveKind, SystemParams};
