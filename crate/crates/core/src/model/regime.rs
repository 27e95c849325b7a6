//! Dimensionless interaction ratios and the regime they select.

use serde::{Deserialize, Serialize};

use crate::params::ModelParams;

/// Ratios above this count as "much smaller than one" failing.
pub const VALIDITY_THRESHOLD: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Regime {
    Rabi,
    Mixed,
    Josephson,
    Fock,
    Invalid,
}

impl Regime {
    pub fn as_str(&self) -> &'static str {
        match self {
            Regime::Rabi => "rabi",
            Regime::Mixed => "mixed",
            Regime::Josephson => "josephson",
            Regime::Fock => "fock",
            Regime::Invalid => "invalid",
        }
    }
}

impl std::fmt::Display for Regime {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// How well the four-mode truncation is justified.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Validity {
    /// `J_ℓ/ΔE ≤ 0.1` and `χ01 ≤ 0.1`.
    Validated,
    /// `0.1 < χ01 ≤ 1`.
    Marginal,
    Invalid,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FockStatus {
    Yes,
    No,
    Undetermined,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegimeIndicators {
    pub chi0: f64,
    pub chi1: f64,
    pub chi01: f64,
    pub regime: Regime,
    pub validity: Validity,
    pub fock: FockStatus,
    /// Largest of `J0/ΔE`, `J1/ΔE`.
    pub hopping_ratio: f64,
    /// `Some(false)` when the barrier lies below the excited level.
    pub barrier_above_e1: Option<bool>,
    /// `χ1 < χ0`, expected whenever `J1 > J0` and `U1 ≈ 3U0/4`.
    pub chi_ordered: bool,
}

/// Classifies `p`. The barrier height `v0` enables the `V0 ≥ E1` check and
/// the atom number enables the Fock label.
pub fn classify_regime(p: &ModelParams, v0: Option<f64>, n_atoms: Option<f64>) -> RegimeIndicators {
    let (chi0, chi1, chi01) = (p.chi0(), p.chi1(), p.chi01());
    let hopping_ratio = p.j0.max(p.j1) / p.delta_e;
    let barrier_above_e1 = v0.map(|v| v >= p.e1);

    let invalid = !(hopping_ratio <= VALIDITY_THRESHOLD)
        || !(chi01 <= 1.0)
        || barrier_above_e1 == Some(false);
    let validity = if invalid {
        Validity::Invalid
    } else if chi01 > VALIDITY_THRESHOLD {
        Validity::Marginal
    } else {
        Validity::Validated
    };

    let fock = match n_atoms {
        Some(n) if chi0.min(chi1) > n * n => FockStatus::Yes,
        Some(_) => FockStatus::No,
        None => FockStatus::Undetermined,
    };

    let regime = if invalid {
        Regime::Invalid
    } else if fock == FockStatus::Yes {
        Regime::Fock
    } else {
        match (chi0 > 1.0, chi1 > 1.0) {
            (false, false) => Regime::Rabi,
            (true, true) => Regime::Josephson,
            _ => Regime::Mixed,
        }
    };

    RegimeIndicators {
        chi0,
        chi1,
        chi01,
        regime,
        validity,
        fock,
        hopping_ratio,
        barrier_above_e1,
        chi_ordered: chi1 < chi0,
    }
}
