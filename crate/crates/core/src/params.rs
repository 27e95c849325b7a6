//! Coefficients of the four-mode Hamiltonian.

use serde::{Deserialize, Serialize};

/// The seven model coefficients plus the level gap, in recoil units.
///
/// Interaction energies are stored premultiplied by the atom number
/// (`nu0 = N U0`, ...), which is all the semiclassical Hamiltonian depends on.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelParams {
    pub e0: f64,
    pub e1: f64,
    pub j0: f64,
    pub j1: f64,
    pub nu0: f64,
    pub nu1: f64,
    pub nu01: f64,
    pub delta_e: f64,
}

impl ModelParams {
    /// Builds a parameter set with `delta_e = e1 - e0`.
    pub fn new(e0: f64, e1: f64, j0: f64, j1: f64, nu0: f64, nu1: f64, nu01: f64) -> Self {
        Self {
            e0,
            e1,
            j0,
            j1,
            nu0,
            nu1,
            nu01,
            delta_e: e1 - e0,
        }
    }

    pub fn chi0(&self) -> f64 {
        self.nu0 / (2.0 * self.j0)
    }

    pub fn chi1(&self) -> f64 {
        self.nu1 / (2.0 * self.j1)
    }

    pub fn chi01(&self) -> f64 {
        self.nu01 / self.delta_e
    }

    /// The same parameters with the inter-level coupling switched off, which
    /// turns the averaged dynamics into two independent two-mode models.
    pub fn decoupled(&self) -> Self {
        Self { nu01: 0.0, ..*self }
    }

    pub fn j(&self, level: usize) -> f64 {
        [self.j0, self.j1][level]
    }

    pub fn nu(&self, level: usize) -> f64 {
        [self.nu0, self.nu1][level]
    }

    /// Checks the structural requirements the dynamics rely on.
    pub fn check(&self) -> Result<(), String> {
        let fields = [
            self.e0, self.e1, self.j0, self.j1, self.nu0, self.nu1, self.nu01, self.delta_e,
        ];
        if fields.iter().any(|x| !x.is_finite()) {
            return Err("all coefficients must be finite".into());
        }
        if !(self.j0 > 0.0 && self.j1 > 0.0) {
            return Err("hopping energies must be positive".into());
        }
        if !(self.delta_e > 0.0) {
            return Err("delta_e must be positive".into());
        }
        if self.nu0 < 0.0 || self.nu1 < 0.0 || self.nu01 < 0.0 {
            return Err("interaction energies must be non-negative".into());
        }
        Ok(())
    }
}

/// The γ-independent part of the coefficients for one potential.
///
/// Energies and hoppings do not depend on the interaction strength and the
/// interaction energies are linear in it, so a sweep over γ only needs these.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoefficientIntegrals {
    pub e0: f64,
    pub e1: f64,
    pub j0: f64,
    pub j1: f64,
    pub u0_per_gamma: f64,
    pub u1_per_gamma: f64,
    pub u01_per_gamma: f64,
}

impl CoefficientIntegrals {
    pub fn with_gamma(&self, gamma: f64) -> ModelParams {
        ModelParams::new(
            self.e0,
            self.e1,
            self.j0,
            self.j1,
            gamma * self.u0_per_gamma,
            gamma * self.u1_per_gamma,
            gamma * self.u01_per_gamma,
        )
    }
}
