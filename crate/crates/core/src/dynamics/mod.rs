//! Time integration of the pendulum equations with an energy audit, and the
//! diagnostics extracted from trajectories.

mod analysis;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{self, normal_mode_frequencies, Model, ModelError, PendulumState};
use crate::ode::{Dopri5, Dopri5Options, ErrorScale, GaussLegendre8, OdeError};
use crate::params::ModelParams;

pub use analysis::{
    convex_hull_area, detect_self_trapping, estimate_frequency, estimate_frequency_series,
    phase_portrait, poincare_section, TRAPPING_THRESHOLD,
    Direction, FrequencyEstimate, PortraitCurve, Section, SelfTrappingReport, Variable,
};

/// Distance to a population bound at which integration stops.
pub const BOUNDARY_MARGIN: f64 = 1e-9;
/// Number of slow periods covered when `t_end` is not given.
pub const DEFAULT_SLOW_PERIODS: f64 = 50.0;
const DEFAULT_SAMPLES: f64 = 5000.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DynamicsError {
    #[error("invalid integrator configuration: {0}")]
    InvalidConfig(String),
    #[error("invalid initial state: {0}")]
    InvalidInitial(#[from] ModelError),
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("only {found} mean crossings, need at least {needed}")]
    InsufficientOscillations { found: usize, needed: usize },
    #[error("trajectory has {found} section crossings, need at least {needed}")]
    NoCrossings { found: usize, needed: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    /// Adaptive Dormand-Prince 5(4).
    #[default]
    Dopri5,
    /// Fixed-step implicit Gauss-Legendre, order eight.
    GaussLegendre8,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct IntegratorConfig {
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// Defaults to one radian of the fastest linear motion.
    pub max_step: Option<f64>,
    /// Defaults to fifty periods of the slowest normal mode.
    pub t_end: Option<f64>,
    /// Defaults to `t_end / 5000`.
    pub sample_interval: Option<f64>,
    pub model: Model,
    pub method: Method,
    /// Step of the fixed-step method; defaults to `0.05 / max(ΔE, ω+)`.
    pub fixed_step: Option<f64>,
    /// Largest relative energy drift accepted for a `Completed` run.
    pub energy_audit_bound: f64,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        Self {
            rel_tol: 1e-10,
            abs_tol: 1e-12,
            max_step: None,
            t_end: None,
            sample_interval: None,
            model: Model::Full,
            method: Method::Dopri5,
            fixed_step: None,
            energy_audit_bound: 1e-8,
        }
    }
}

/// All step and time settings resolved to numbers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResolvedConfig {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_step: f64,
    pub initial_step: f64,
    pub t_end: f64,
    pub sample_interval: f64,
    pub model: Model,
    pub method: Method,
    pub fixed_step: f64,
    pub energy_audit_bound: f64,
}

/// Fastest linear frequency: the θ2 rotation rate or the upper normal mode.
fn fast_rate(p: &ModelParams, z2: f64) -> f64 {
    let plus = normal_mode_frequencies(p, z2)
        .map(|m| m.omega_plus)
        .unwrap_or_else(|_| {
            model::two_mode_frequency(p, 0, z2).max(model::two_mode_frequency(p, 1, z2))
        });
    p.delta_e.max(plus)
}

/// Slowest linear frequency about `z_ℓ = θ_ℓ = 0`.
pub fn slow_frequency(p: &ModelParams, z2: f64) -> f64 {
    match normal_mode_frequencies(p, z2) {
        Ok(m) if m.omega_minus > 0.0 => m.omega_minus,
        _ => model::two_mode_frequency(p, 0, z2).min(model::two_mode_frequency(p, 1, z2)),
    }
}

impl IntegratorConfig {
    pub fn resolve(&self, p: &ModelParams, initial: &PendulumState) -> Result<ResolvedConfig, DynamicsError> {
        let bad = |m: &str| Err(DynamicsError::InvalidConfig(m.to_string()));
        if !(self.rel_tol > 0.0 && self.abs_tol > 0.0) {
            return bad("tolerances must be positive");
        }
        if !(self.energy_audit_bound > 0.0) {
            return bad("energy_audit_bound must be positive");
        }
        let z2 = initial.z2.clamp(-0.999, 0.999);
        let fast = fast_rate(p, z2);
        let max_step = self.max_step.unwrap_or(1.0 / fast);
        let t_end = match self.t_end {
            Some(t) => t,
            None => DEFAULT_SLOW_PERIODS * std::f64::consts::TAU / slow_frequency(p, z2),
        };
        let sample_interval = self.sample_interval.unwrap_or(t_end / DEFAULT_SAMPLES);
        let fixed_step = self.fixed_step.unwrap_or(0.05 / fast);
        for (name, v) in [
            ("max_step", max_step),
            ("t_end", t_end),
            ("sample_interval", sample_interval),
            ("fixed_step", fixed_step),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return bad(&format!("{name} must be positive and finite, got {v}"));
            }
        }
        if sample_interval > t_end {
            return bad("sample_interval must not exceed t_end");
        }
        Ok(ResolvedConfig {
            rel_tol: self.rel_tol,
            abs_tol: self.abs_tol,
            max_step,
            initial_step: max_step.min(0.01 / fast),
            t_end,
            sample_interval,
            model: self.model,
            method: self.method,
            fixed_step,
            energy_audit_bound: self.energy_audit_bound,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Termination {
    Completed,
    /// A population imbalance came within [`BOUNDARY_MARGIN`] of its bound.
    BoundaryHit,
    /// The step-size controller or the implicit solver gave up.
    StepFailure,
    /// Ran to `t_end` but the energy drift exceeded the audit bound.
    EnergyDrift,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<PendulumState>,
    /// Conserved energy of the integrated model at each sample.
    pub energy: Vec<f64>,
    pub termination: Termination,
    /// `max |E(t) - E(0)| / max(|E(0)|, 1e-3)` over the samples.
    pub max_energy_drift: f64,
    pub config: ResolvedConfig,
    pub accepted_steps: u64,
    pub rejected_steps: u64,
    pub failure: Option<String>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn series(&self, v: Variable) -> Vec<f64> {
        self.states.iter().map(|s| v.get(s)).collect()
    }

    pub fn last(&self) -> &PendulumState {
        self.states.last().expect("trajectory has the initial sample")
    }
}

/// Every variable is an imbalance in [-1, 1] or an angle, so errors are
/// measured against a fixed magnitude rather than the current value.
const ERROR_MAGNITUDE: f64 = 0.01;

fn scales() -> [ErrorScale; 6] {
    [ErrorScale::Fixed(ERROR_MAGNITUDE); 6]
}

pub fn integrate(
    initial: &PendulumState,
    p: &ModelParams,
    cfg: &IntegratorConfig,
) -> Result<Trajectory, DynamicsError> {
    p.check().map_err(DynamicsError::InvalidParams)?;
    initial.check_bounds()?;
    let rc = cfg.resolve(p, initial)?;
    let field = |y: &[f64; 6]| model::vector_field(rc.model, &PendulumState::from(*y), p).ok();
    field(&initial.to_array()).ok_or(ModelError::OutOfBounds(*initial))?;
    let energy_of = |s: &PendulumState| model::energy(rc.model, s, p).unwrap_or(f64::NAN);

    let e0 = energy_of(initial);
    let mut traj = Trajectory {
        times: vec![0.0],
        states: vec![*initial],
        energy: vec![e0],
        termination: Termination::Completed,
        max_energy_drift: 0.0,
        config: rc,
        accepted_steps: 0,
        rejected_steps: 0,
        failure: None,
    };
    let n_samples = (rc.t_end / rc.sample_interval).floor() as usize;
    let mut targets: Vec<f64> = (1..=n_samples).map(|k| k as f64 * rc.sample_interval).collect();
    if targets.last().is_none_or(|&t| rc.t_end - t > 1e-9 * rc.sample_interval) {
        targets.push(rc.t_end);
    }

    let mut t = 0.0;
    let mut y = initial.to_array();
    let record = |traj: &mut Trajectory, t: f64, y: &[f64; 6]| {
        let s = PendulumState::from(*y);
        traj.times.push(t);
        traj.states.push(s);
        traj.energy.push(energy_of(&s));
    };

    match rc.method {
        Method::Dopri5 => {
            let mut stepper = Dopri5::new(
                Dopri5Options {
                    rtol: rc.rel_tol,
                    atol: rc.abs_tol,
                    max_step: rc.max_step,
                    initial_step: rc.initial_step,
                },
                scales(),
            );
            for &target in &targets {
                let r = stepper.advance_to(&field, &mut t, &mut y, target, &mut |_, ys| {
                    PendulumState::from(*ys).boundary_margin() >= BOUNDARY_MARGIN
                });
                match r {
                    Ok(true) => record(&mut traj, t, &y),
                    Ok(false) => {
                        record(&mut traj, t, &y);
                        traj.termination = Termination::BoundaryHit;
                        break;
                    }
                    Err(e) => {
                        traj.termination = Termination::StepFailure;
                        traj.failure = Some(e.to_string());
                        break;
                    }
                }
            }
            traj.accepted_steps = stepper.stats.accepted;
            traj.rejected_steps = stepper.stats.rejected;
        }
        Method::GaussLegendre8 => {
            let gl = GaussLegendre8::new();
            'samples: for &target in &targets {
                let n = ((target - t) / rc.fixed_step).ceil().max(1.0) as usize;
                let h = (target - t) / n as f64;
                for _ in 0..n {
                    match gl.step(&field, &y, h) {
                        Ok(next) => y = next,
                        Err(e) => {
                            let e = match e {
                                OdeError::StageNotConverged(_) => OdeError::StageNotConverged(t),
                                _ => OdeError::FieldUndefined(t),
                            };
                            traj.termination = Termination::StepFailure;
                            traj.failure = Some(e.to_string());
                            break 'samples;
                        }
                    }
                    t += h;
                    traj.accepted_steps += 1;
                    if PendulumState::from(y).boundary_margin() < BOUNDARY_MARGIN {
                        record(&mut traj, t, &y);
                        traj.termination = Termination::BoundaryHit;
                        break 'samples;
                    }
                }
                t = target;
                record(&mut traj, t, &y);
            }
        }
    }

    let scale = e0.abs().max(1e-3);
    traj.max_energy_drift = traj
        .energy
        .iter()
        .map(|e| (e - e0).abs() / scale)
        .fold(0.0, |m, d| if d.is_nan() { f64::INFINITY } else { m.max(d) });
    if traj.termination == Termination::Completed && traj.max_energy_drift > rc.energy_audit_bound {
        traj.termination = Termination::EnergyDrift;
    }
    Ok(traj)
}
