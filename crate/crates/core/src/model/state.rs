use serde::{Deserialize, Serialize};

use super::ModelError;

/// The six canonical variables of the three coupled pendula.
///
/// Serialized as the JSON array `[z0, theta0, z1, theta1, z2, theta2]`, which
/// is also the component order used by the vector fields.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(from = "[f64; 6]", into = "[f64; 6]")]
pub struct PendulumState {
    pub z0: f64,
    pub theta0: f64,
    pub z1: f64,
    pub theta1: f64,
    pub z2: f64,
    pub theta2: f64,
}

impl From<[f64; 6]> for PendulumState {
    fn from(a: [f64; 6]) -> Self {
        Self {
            z0: a[0],
            theta0: a[1],
            z1: a[2],
            theta1: a[3],
            z2: a[4],
            theta2: a[5],
        }
    }
}

impl From<PendulumState> for [f64; 6] {
    fn from(s: PendulumState) -> Self {
        s.to_array()
    }
}

impl PendulumState {
    pub fn new(z0: f64, theta0: f64, z1: f64, theta1: f64, z2: f64, theta2: f64) -> Self {
        Self {
            z0,
            theta0,
            z1,
            theta1,
            z2,
            theta2,
        }
    }

    pub fn to_array(&self) -> [f64; 6] {
        [self.z0, self.theta0, self.z1, self.theta1, self.z2, self.theta2]
    }

    pub fn z(&self, level: usize) -> f64 {
        [self.z0, self.z1][level]
    }

    pub fn theta(&self, level: usize) -> f64 {
        [self.theta0, self.theta1][level]
    }

    /// Smallest distance to any of the bounds `|z2| < 1`,
    /// `|z_ℓ| < [1 ± z2]/2`. Negative outside the physical domain.
    pub fn boundary_margin(&self) -> f64 {
        let m0 = 0.5 * (1.0 + self.z2) - self.z0.abs();
        let m1 = 0.5 * (1.0 - self.z2) - self.z1.abs();
        m0.min(m1).min(1.0 - self.z2.abs())
    }

    pub fn check_bounds(&self) -> Result<(), ModelError> {
        if self.to_array().iter().any(|x| !x.is_finite()) {
            return Err(ModelError::OutOfBounds(*self));
        }
        if self.boundary_margin() > 0.0 {
            Ok(())
        } else {
            Err(ModelError::OutOfBounds(*self))
        }
    }

    /// Copy with θ0 and θ1 wrapped to (−π, π]. θ2 is left unwrapped.
    pub fn wrapped(&self) -> Self {
        Self {
            theta0: wrap_phase(self.theta0),
            theta1: wrap_phase(self.theta1),
            ..*self
        }
    }
}

/// Wraps an angle to (−π, π].
pub fn wrap_phase(theta: f64) -> f64 {
    use std::f64::consts::{PI, TAU};
    let r = theta.rem_euclid(TAU);
    if r > PI {
        r - TAU
    } else {
        r
    }
}
