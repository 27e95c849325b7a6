//! Mode populations and phases, and the change of variables to the pendulum
//! coordinates.
//!
//! With rows `(1,1,1,1)`, `(1,-1,0,0)`, `(0,0,1,-1)`, `(1,1,-1,-1)` for the
//! matrix `M` acting on `(L0, R0, L1, R1)`, the populations map to
//! `(1, z0, z1, z2) = M n` and the phases to `(θ_N, θ0, θ1, θ2) = -M φ`.

use serde::{Deserialize, Serialize};

use super::{ModelError, PendulumState};
use crate::params::ModelParams;

const M: [[f64; 4]; 4] = [
    [1.0, 1.0, 1.0, 1.0],
    [1.0, -1.0, 0.0, 0.0],
    [0.0, 0.0, 1.0, -1.0],
    [1.0, 1.0, -1.0, -1.0],
];
/// Squared row norms of `M`; `M⁻¹ = Mᵀ diag(1/ROW_NORM_SQ)`.
const ROW_NORM_SQ: [f64; 4] = [4.0, 2.0, 2.0, 4.0];

/// Populations as fractions of N and phases of the four modes, ordered
/// `L0, R0, L1, R1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LabState {
    pub n_l0: f64,
    pub n_r0: f64,
    pub n_l1: f64,
    pub n_r1: f64,
    pub phi_l0: f64,
    pub phi_r0: f64,
    pub phi_l1: f64,
    pub phi_r1: f64,
}

impl LabState {
    pub fn populations(&self) -> [f64; 4] {
        [self.n_l0, self.n_r0, self.n_l1, self.n_r1]
    }

    pub fn phases(&self) -> [f64; 4] {
        [self.phi_l0, self.phi_r0, self.phi_l1, self.phi_r1]
    }

    pub fn from_arrays(n: [f64; 4], phi: [f64; 4]) -> Self {
        Self {
            n_l0: n[0],
            n_r0: n[1],
            n_l1: n[2],
            n_r1: n[3],
            phi_l0: phi[0],
            phi_r0: phi[1],
            phi_l1: phi[2],
            phi_r1: phi[3],
        }
    }
}

fn apply(m: &[[f64; 4]; 4], x: &[f64; 4]) -> [f64; 4] {
    std::array::from_fn(|i| (0..4).map(|k| m[i][k] * x[k]).sum())
}

fn apply_inverse(y: &[f64; 4]) -> [f64; 4] {
    std::array::from_fn(|k| (0..4).map(|i| M[i][k] * y[i] / ROW_NORM_SQ[i]).sum())
}

/// Returns the pendulum state and the total phase `θ_N = -Σφ`.
pub fn to_pendulum(lab: &LabState) -> Result<(PendulumState, f64), ModelError> {
    let n = lab.populations();
    if n.iter().any(|&x| !(x > 0.0)) {
        return Err(ModelError::DegeneratePopulation(n));
    }
    let total: f64 = n.iter().sum();
    if (total - 1.0).abs() > 1e-12 {
        return Err(ModelError::Unnormalized(total));
    }
    let z = apply(&M, &n);
    let phi = lab.phases();
    let t = apply(&M, &phi).map(|x| -x);
    Ok((PendulumState::new(z[1], t[1], z[2], t[2], z[3], t[3]), t[0]))
}

pub fn from_pendulum(s: &PendulumState, total_phase: f64) -> LabState {
    let n = apply_inverse(&[1.0, s.z0, s.z1, s.z2]);
    let phi = apply_inverse(&[total_phase, s.theta0, s.theta1, s.theta2]).map(|x| -x);
    LabState::from_arrays(n, phi)
}

/// `2H/N - E0 - E1` evaluated from the mode Hamiltonian in the populations
/// and phases, with `N U` products taken from `p`.
pub fn lab_hamiltonian(lab: &LabState, p: &ModelParams) -> f64 {
    let n = lab.populations();
    let phi = lab.phases();
    let e = [p.e0, p.e1];
    let mut h = 0.0;
    for level in 0..2 {
        let other = 1 - level;
        for well in 0..2 {
            let k = 2 * level + well;
            let mirror = 2 * level + (1 - well);
            let cross = 2 * other + well;
            h += (e[level] + p.nu(level) * n[k]) * n[k];
            h -= p.j(level) * (n[k] * n[mirror]).sqrt() * (phi[k] - phi[mirror]).cos();
            h += p.nu01 * (2.0 + (2.0 * (phi[k] - phi[cross])).cos()) * n[k] * n[cross];
        }
    }
    2.0 * h - p.e0 - p.e1
}
