#![allow(dead_code)]

use dwell4::dynamics::{integrate, IntegratorConfig, Trajectory};
use dwell4::eigensolver::{integrals_for, PotentialSpec};
use dwell4::model::{Model, PendulumState};
use dwell4::ModelParams;

/// The three marked points of the regime map, as `(V0, gamma)`.
pub const A: (f64, f64) = (3.75, 2.5e-5);
pub const B: (f64, f64) = (5.0, 2.5e-3);
pub const C: (f64, f64) = (8.75, 2.5e-2);

pub fn params_at((v0, gamma): (f64, f64)) -> ModelParams {
    integrals_for(&PotentialSpec::new(v0)).unwrap().with_gamma(gamma)
}

pub fn run(p: &ModelParams, s: PendulumState, t_end: f64, sample: f64, model: Model) -> Trajectory {
    let cfg = IntegratorConfig {
        t_end: Some(t_end),
        sample_interval: Some(sample),
        model,
        ..Default::default()
    };
    integrate(&s, p, &cfg).unwrap()
}

pub fn state(z0: f64, z1: f64, z2: f64) -> PendulumState {
    PendulumState::new(z0, 0.0, z1, 0.0, z2, 0.0)
}

/// Least-squares slope of `y` against `t`.
pub fn slope(t: &[f64], y: &[f64]) -> f64 {
    let n = t.len() as f64;
    let (mt, my) = (t.iter().sum::<f64>() / n, y.iter().sum::<f64>() / n);
    let sxy: f64 = t.iter().zip(y).map(|(a, b)| (a - mt) * (b - my)).sum();
    let sxx: f64 = t.iter().map(|a| (a - mt).powi(2)).sum();
    sxy / sxx
}

/// Small-amplitude initial state exciting one normal mode of the linearized
/// averaged system, with `z` on the given level.
pub fn normal_mode_state(p: &ModelParams, z2: f64, omega: f64, level: usize, amplitude: f64) -> PendulumState {
    let a = [1.0 + z2, 1.0 - z2];
    let other = 1 - level;
    let w2 = |l: usize| p.j(l) * a[l] * (2.0 * p.nu(l) + 4.0 * p.j(l) / a[l]);
    // (w_o^2 - w^2) z_o + J_o a_o 4 nu01 z_l = 0
    let z_other = p.j(other) * a[other] * 4.0 * p.nu01 * amplitude / (omega * omega - w2(other));
    let mut z = [0.0; 2];
    z[level] = amplitude;
    z[other] = z_other;
    PendulumState::new(z[0], 0.0, z[1], 0.0, z2, 0.0)
}
