//! Renormalized Hamiltonian `H' = 2H/N - E0 - E1` and its equations of
//! motion, `ż_i = -∂H'/∂θ_i`, `θ̇_i = ∂H'/∂z_i`.

use serde::{Deserialize, Serialize};

use super::{ModelError, PendulumState};
use crate::params::ModelParams;

/// Which dynamical system to evolve.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Model {
    /// All three pendula, including the fast (z2, θ2) terms.
    #[default]
    Full,
    /// θ2-averaged equations: z2 frozen, θ2 advanced by its averaged rate.
    Averaged,
    /// Averaged equations with the inter-level coupling removed.
    TwoMode,
}

/// `(1 ± z2)` for level 0 / 1.
fn level_width(level: usize, z2: f64) -> f64 {
    if level == 0 {
        1.0 + z2
    } else {
        1.0 - z2
    }
}

/// `(1 ± z2)² - 4 z_ℓ²`, the radicand of the non-rigid pendulum length.
fn radicand(level: usize, z: f64, z2: f64) -> f64 {
    let a = level_width(level, z2);
    a * a - 4.0 * z * z
}

fn root(s: &PendulumState, level: usize, strict: bool) -> Result<f64, ModelError> {
    let r = radicand(level, s.z(level), s.z2);
    if r > 0.0 || (!strict && r == 0.0) {
        Ok(r.sqrt())
    } else {
        Err(ModelError::OutOfBounds(*s))
    }
}

/// The seven-term renormalized Hamiltonian.
pub fn hamiltonian(s: &PendulumState, p: &ModelParams) -> Result<f64, ModelError> {
    let r0 = root(s, 0, false)?;
    let r1 = root(s, 1, false)?;
    let (a0, a1) = (1.0 + s.z2, 1.0 - s.z2);
    let d = s.theta0 - s.theta1;
    let coupling_p = s.z0 + s.z1 - s.z2 * (s.z0 - s.z1);
    let coupling_q = 1.0 - s.z2 * s.z2 + 4.0 * s.z0 * s.z1;
    Ok(-p.j0 * r0 * s.theta0.cos() + 0.25 * p.nu0 * (a0 * a0 + 4.0 * s.z0 * s.z0)
        - p.j1 * r1 * s.theta1.cos()
        + 0.25 * p.nu1 * (a1 * a1 + 4.0 * s.z1 * s.z1)
        - p.nu01 * coupling_p * s.theta2.sin() * d.sin()
        + 0.5 * p.nu01 * coupling_q * (2.0 + s.theta2.cos() * d.cos())
        - p.delta_e * s.z2)
}

/// Time derivatives `[ż0, θ̇0, ż1, θ̇1, ż2, θ̇2]` of the full system.
pub fn eom_full(s: &PendulumState, p: &ModelParams) -> Result<[f64; 6], ModelError> {
    let r0 = root(s, 0, true)?;
    let r1 = root(s, 1, true)?;
    let (a0, a1) = (1.0 + s.z2, 1.0 - s.z2);
    let d = s.theta0 - s.theta1;
    let (sin_d, cos_d) = d.sin_cos();
    let (sin2, cos2) = s.theta2.sin_cos();
    let coupling_p = s.z0 + s.z1 - s.z2 * (s.z0 - s.z1);
    let coupling_q = 1.0 - s.z2 * s.z2 + 4.0 * s.z0 * s.z1;
    let bracket = 2.0 + cos2 * cos_d;

    // -∂/∂θ0 of the two coupling terms; ż1 gets the opposite sign.
    let exchange = p.nu01 * (coupling_p * sin2 * cos_d + 0.5 * coupling_q * cos2 * sin_d);

    let z0_dot = -p.j0 * r0 * s.theta0.sin() + exchange;
    let z1_dot = -p.j1 * r1 * s.theta1.sin() - exchange;
    let z2_dot = p.nu01 * (coupling_p * cos2 * sin_d + 0.5 * coupling_q * sin2 * cos_d);

    let th0_dot = 2.0 * s.z0 * (p.nu0 + 2.0 * p.j0 * s.theta0.cos() / r0)
        + p.nu01 * (2.0 * s.z1 * bracket - a1 * sin2 * sin_d);
    let th1_dot = 2.0 * s.z1 * (p.nu1 + 2.0 * p.j1 * s.theta1.cos() / r1)
        + p.nu01 * (2.0 * s.z0 * bracket - a0 * sin2 * sin_d);
    let th2_dot = -p.delta_e - p.j0 * a0 * s.theta0.cos() / r0 + p.j1 * a1 * s.theta1.cos() / r1
        + 0.5 * p.nu0 * a0
        - 0.5 * p.nu1 * a1
        - p.nu01 * (s.z2 * bracket + (s.z1 - s.z0) * sin2 * sin_d);

    Ok([z0_dot, th0_dot, z1_dot, th1_dot, z2_dot, th2_dot])
}

/// Hamiltonian of the θ2-averaged system (the sin θ2 and cos θ2 terms drop).
pub fn hamiltonian_averaged(s: &PendulumState, p: &ModelParams) -> Result<f64, ModelError> {
    let r0 = root(s, 0, false)?;
    let r1 = root(s, 1, false)?;
    let (a0, a1) = (1.0 + s.z2, 1.0 - s.z2);
    Ok(-p.j0 * r0 * s.theta0.cos() + 0.25 * p.nu0 * (a0 * a0 + 4.0 * s.z0 * s.z0)
        - p.j1 * r1 * s.theta1.cos()
        + 0.25 * p.nu1 * (a1 * a1 + 4.0 * s.z1 * s.z1)
        + p.nu01 * (1.0 - s.z2 * s.z2 + 4.0 * s.z0 * s.z1)
        - p.delta_e * s.z2)
}

/// Averaged equations for `[z0, θ0, z1, θ1]` at fixed `z2`.
pub fn eom_averaged(x: &[f64; 4], z2: f64, p: &ModelParams) -> Result<[f64; 4], ModelError> {
    let s = PendulumState::new(x[0], x[1], x[2], x[3], z2, 0.0);
    let r0 = root(&s, 0, true)?;
    let r1 = root(&s, 1, true)?;
    Ok([
        -p.j0 * s.theta0.sin() * r0,
        2.0 * s.z0 * (p.nu0 + 2.0 * p.j0 * s.theta0.cos() / r0) + 4.0 * p.nu01 * s.z1,
        -p.j1 * s.theta1.sin() * r1,
        2.0 * s.z1 * (p.nu1 + 2.0 * p.j1 * s.theta1.cos() / r1) + 4.0 * p.nu01 * s.z0,
    ])
}

/// The averaged system as a six-component field: `ż2 = 0` and θ2 advances
/// at `∂H_avg/∂z2`.
pub fn eom_averaged_full(s: &PendulumState, p: &ModelParams) -> Result<[f64; 6], ModelError> {
    let f = eom_averaged(&[s.z0, s.theta0, s.z1, s.theta1], s.z2, p)?;
    let r0 = root(s, 0, true)?;
    let r1 = root(s, 1, true)?;
    let (a0, a1) = (1.0 + s.z2, 1.0 - s.z2);
    let th2_dot = -p.delta_e - p.j0 * a0 * s.theta0.cos() / r0 + p.j1 * a1 * s.theta1.cos() / r1
        + 0.5 * p.nu0 * a0
        - 0.5 * p.nu1 * a1
        - 2.0 * p.nu01 * s.z2;
    Ok([f[0], f[1], f[2], f[3], 0.0, th2_dot])
}

/// Linearization of the averaged equations about `z_ℓ = θ_ℓ = 0`.
pub fn eom_linearized(x: &[f64; 4], z2: f64, p: &ModelParams) -> [f64; 4] {
    let (a0, a1) = (1.0 + z2, 1.0 - z2);
    [
        -p.j0 * a0 * x[1],
        (2.0 * p.nu0 + 4.0 * p.j0 / a0) * x[0] + 4.0 * p.nu01 * x[2],
        -p.j1 * a1 * x[3],
        (2.0 * p.nu1 + 4.0 * p.j1 / a1) * x[2] + 4.0 * p.nu01 * x[0],
    ]
}

pub fn vector_field(model: Model, s: &PendulumState, p: &ModelParams) -> Result<[f64; 6], ModelError> {
    match model {
        Model::Full => eom_full(s, p),
        Model::Averaged => eom_averaged_full(s, p),
        Model::TwoMode => eom_averaged_full(s, &p.decoupled()),
    }
}

/// The conserved quantity of `model`.
pub fn energy(model: Model, s: &PendulumState, p: &ModelParams) -> Result<f64, ModelError> {
    match model {
        Model::Full => hamiltonian(s, p),
        Model::Averaged => hamiltonian_averaged(s, p),
        Model::TwoMode => hamiltonian_averaged(s, &p.decoupled()),
    }
}

/// Small-oscillation frequencies about `z_ℓ = θ_ℓ = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormalModes {
    pub omega_minus: f64,
    pub omega0: f64,
    pub omega1: f64,
    pub omega_plus: f64,
}

/// Uncoupled two-mode frequency `ω_ℓ² = J_ℓ(2 NU_ℓ (1 ± z2) + 4 J_ℓ)`.
pub fn two_mode_frequency(p: &ModelParams, level: usize, z2: f64) -> f64 {
    let j = p.j(level);
    (j * (2.0 * p.nu(level) * level_width(level, z2) + 4.0 * j)).sqrt()
}

/// Normal modes of the linearized averaged equations. The coupled pair is the
/// eigenvalues of `[[ω0², 4NU01 J0 (1+z2)], [4NU01 J1 (1-z2), ω1²]]`.
pub fn normal_mode_frequencies(p: &ModelParams, z2: f64) -> Result<NormalModes, ModelError> {
    if !(z2.abs() <= 1.0) {
        return Err(ModelError::InvalidZ2(z2));
    }
    let w0 = two_mode_frequency(p, 0, z2);
    let w1 = two_mode_frequency(p, 1, z2);
    let (s0, s1) = (w0 * w0, w1 * w1);
    let coupling = 64.0 * (1.0 - z2 * z2) * p.j0 * p.j1 * p.nu01 * p.nu01;
    let radical = ((s0 - s1).powi(2) + coupling).sqrt();
    let plus_sq = 0.5 * (s0 + s1 + radical);
    // ω₋² from the determinant, which avoids cancellation for weak coupling.
    let det = s0 * s1 - 0.25 * coupling;
    if det < 0.0 {
        return Err(ModelError::NegativeSquare(det / plus_sq));
    }
    let minus_sq = if plus_sq > 0.0 { det / plus_sq } else { 0.0 };
    Ok(NormalModes {
        omega_minus: minus_sq.sqrt(),
        omega0: w0,
        omega1: w1,
        omega_plus: plus_sq.sqrt(),
    })
}
