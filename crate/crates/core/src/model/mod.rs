//! The reduced six-variable phase space and the dynamics on it.

mod equations;
mod lab;
mod regime;
mod state;

use thiserror::Error;

pub use equations::{
    energy, eom_averaged, eom_averaged_full, eom_full, eom_linearized, hamiltonian,
    hamiltonian_averaged, normal_mode_frequencies, two_mode_frequency, vector_field, Model,
    NormalModes,
};
pub use lab::{from_pendulum, lab_hamiltonian, to_pendulum, LabState};
pub use regime::{
    classify_regime, FockStatus, Regime, RegimeIndicators, Validity, VALIDITY_THRESHOLD,
};
pub use state::{wrap_phase, PendulumState};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("state outside the physical domain: {0:?}")]
    OutOfBounds(PendulumState),
    #[error("mode population is not positive: {0:?}")]
    DegeneratePopulation([f64; 4]),
    #[error("populations sum to {0}, not 1")]
    Unnormalized(f64),
    #[error("lowest normal-mode frequency squared is negative ({0:e})")]
    NegativeSquare(f64),
    #[error("z2 = {0} outside [-1, 1]")]
    InvalidZ2(f64),
}
