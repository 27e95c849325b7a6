use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{integrate, DynamicsError, IntegratorConfig, Termination, Trajectory};
use crate::model::{wrap_phase, PendulumState};
use crate::params::ModelParams;

/// Selects one of the six canonical variables.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Variable {
    Z0,
    Theta0,
    Z1,
    Theta1,
    Z2,
    Theta2,
}

impl Variable {
    pub const ALL: [Variable; 6] = [
        Variable::Z0,
        Variable::Theta0,
        Variable::Z1,
        Variable::Theta1,
        Variable::Z2,
        Variable::Theta2,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn get(self, s: &PendulumState) -> f64 {
        s.to_array()[self.index()]
    }

    pub fn is_phase(self) -> bool {
        matches!(self, Variable::Theta0 | Variable::Theta1 | Variable::Theta2)
    }

    pub fn name(self) -> &'static str {
        ["z0", "theta0", "z1", "theta1", "z2", "theta2"][self.index()]
    }
}

impl FromStr for Variable {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Variable::ALL
            .into_iter()
            .find(|v| v.name() == s)
            .ok_or_else(|| format!("unknown variable `{s}` (expected z0, theta0, z1, theta1, z2 or theta2)"))
    }
}

impl std::fmt::Display for Variable {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrequencyEstimate {
    /// Angular frequency `2π / T`.
    pub frequency: f64,
    /// Standard deviation of the per-period angular frequencies.
    pub uncertainty: f64,
    pub crossings: usize,
}

/// Linear-interpolated times at which `x` crosses `level`, split into upward
/// and downward crossings.
fn crossings(t: &[f64], x: &[f64], level: f64) -> (Vec<f64>, Vec<f64>) {
    let mut up = Vec::new();
    let mut down = Vec::new();
    for i in 1..x.len() {
        let (a, b) = (x[i - 1] - level, x[i] - level);
        if (a < 0.0 && b >= 0.0) || (a > 0.0 && b <= 0.0) {
            let tc = t[i - 1] + (t[i] - t[i - 1]) * a / (a - b);
            if a < 0.0 {
                up.push(tc);
            } else {
                down.push(tc);
            }
        }
    }
    (up, down)
}

/// Time average by the trapezoidal rule.
fn time_mean(t: &[f64], x: &[f64]) -> f64 {
    if t.len() < 2 {
        return x.first().copied().unwrap_or(0.0);
    }
    let integral: f64 = (1..t.len()).map(|i| 0.5 * (x[i] + x[i - 1]) * (t[i] - t[i - 1])).sum();
    integral / (t[t.len() - 1] - t[0])
}

/// Oscillation frequency of `v` from the spacing of its mean crossings.
pub fn estimate_frequency(traj: &Trajectory, v: Variable) -> Result<FrequencyEstimate, DynamicsError> {
    estimate_frequency_series(&traj.times, &traj.series(v))
}

pub fn estimate_frequency_series(t: &[f64], x: &[f64]) -> Result<FrequencyEstimate, DynamicsError> {
    const NEEDED: usize = 5;
    let mean = time_mean(t, x);
    let (up, down) = crossings(t, x, mean);
    let found = up.len() + down.len();
    if found < NEEDED || up.len() < 2 {
        return Err(DynamicsError::InsufficientOscillations { found, needed: NEEDED });
    }
    let period = (up[up.len() - 1] - up[0]) / (up.len() - 1) as f64;
    let per_period: Vec<f64> = up
        .windows(2)
        .chain(down.windows(2))
        .map(|w| std::f64::consts::TAU / (w[1] - w[0]))
        .collect();
    let m = per_period.iter().sum::<f64>() / per_period.len() as f64;
    let var = per_period.iter().map(|w| (w - m).powi(2)).sum::<f64>() / per_period.len() as f64;
    Ok(FrequencyEstimate {
        frequency: std::f64::consts::TAU / period,
        uncertainty: var.sqrt(),
        crossings: found,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SelfTrappingReport {
    pub trapped: bool,
    pub time_mean: f64,
    pub min: f64,
    pub max: f64,
}

/// Threshold on `|time_mean|` above which a sign-definite signal counts as
/// self-trapped.
pub const TRAPPING_THRESHOLD: f64 = 0.05;

pub fn detect_self_trapping(traj: &Trajectory, v: Variable) -> SelfTrappingReport {
    let x = traj.series(v);
    let min = x.iter().copied().fold(f64::INFINITY, f64::min);
    let max = x.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let time_mean = time_mean(&traj.times, &x);
    let one_sign = min > 0.0 || max < 0.0;
    SelfTrappingReport {
        trapped: one_sign && time_mean.abs() > TRAPPING_THRESHOLD,
        time_mean,
        min,
        max,
    }
}

/// One portrait orbit; phases θ0 and θ1 are wrapped to (−π, π].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PortraitCurve {
    pub initial: PendulumState,
    pub trajectory: Option<Trajectory>,
    pub error: Option<String>,
}

impl PortraitCurve {
    pub fn points(&self, plane: (Variable, Variable)) -> Vec<(f64, f64)> {
        self.trajectory
            .as_ref()
            .map(|tr| tr.states.iter().map(|s| (plane.0.get(s), plane.1.get(s))).collect())
            .unwrap_or_default()
    }

    pub fn termination(&self) -> Option<Termination> {
        self.trajectory.as_ref().map(|t| t.termination)
    }
}

/// Integrates every initial condition in parallel. Failures are recorded
/// per orbit rather than aborting the portrait.
pub fn phase_portrait(
    initials: &[PendulumState],
    p: &ModelParams,
    cfg: &IntegratorConfig,
) -> Vec<PortraitCurve> {
    initials
        .par_iter()
        .map(|s| match integrate(s, p, cfg) {
            Ok(mut tr) => {
                for st in &mut tr.states {
                    *st = st.wrapped();
                }
                PortraitCurve {
                    initial: *s,
                    trajectory: Some(tr),
                    error: None,
                }
            }
            Err(e) => PortraitCurve {
                initial: *s,
                trajectory: None,
                error: Some(e.to_string()),
            },
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Up,
    Down,
    Both,
}

/// The hypersurface `variable = value`; for phases the value is taken
/// modulo 2π.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Section {
    pub variable: Variable,
    pub value: f64,
    pub direction: Direction,
}

/// Crossings of `section`, linearly interpolated and projected on `plane`.
pub fn poincare_section(
    traj: &Trajectory,
    section: &Section,
    plane: (Variable, Variable),
) -> Result<Vec<(f64, f64)>, DynamicsError> {
    const NEEDED: usize = 10;
    let signed: Vec<f64> = traj
        .states
        .iter()
        .map(|s| {
            let d = section.variable.get(s) - section.value;
            if section.variable.is_phase() {
                wrap_phase(d)
            } else {
                d
            }
        })
        .collect();
    let mut out = Vec::new();
    for i in 1..signed.len() {
        let (a, b) = (signed[i - 1], signed[i]);
        // A phase jumping across ±π is a wrap, not a crossing.
        if section.variable.is_phase() && (b - a).abs() > std::f64::consts::PI {
            continue;
        }
        let upward = a < 0.0 && b >= 0.0;
        let downward = a > 0.0 && b <= 0.0;
        let wanted = match section.direction {
            Direction::Up => upward,
            Direction::Down => downward,
            Direction::Both => upward || downward,
        };
        if !wanted {
            continue;
        }
        let w = a / (a - b);
        let (s0, s1) = (traj.states[i - 1].to_array(), traj.states[i].to_array());
        let lerp = |v: Variable| {
            let (x0, mut x1) = (s0[v.index()], s1[v.index()]);
            if v.is_phase() {
                x1 = x0 + wrap_phase(x1 - x0);
            }
            let x = x0 + w * (x1 - x0);
            if v.is_phase() && v != Variable::Theta2 {
                wrap_phase(x)
            } else {
                x
            }
        };
        out.push((lerp(plane.0), lerp(plane.1)));
    }
    if out.len() < NEEDED {
        return Err(DynamicsError::NoCrossings {
            found: out.len(),
            needed: NEEDED,
        });
    }
    Ok(out)
}

/// Area of the convex hull (Andrew's monotone chain); a crude measure of how
/// much of the plane a section fills.
pub fn convex_hull_area(points: &[(f64, f64)]) -> f64 {
    let mut pts: Vec<(f64, f64)> = points.to_vec();
    pts.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    pts.dedup();
    if pts.len() < 3 {
        return 0.0;
    }
    let cross = |o: (f64, f64), a: (f64, f64), b: (f64, f64)| {
        (a.0 - o.0) * (b.1 - o.1) - (a.1 - o.1) * (b.0 - o.0)
    };
    let mut hull: Vec<(f64, f64)> = Vec::with_capacity(2 * pts.len());
    for pass in 0..2 {
        let start = hull.len();
        let iter: Box<dyn Iterator<Item = &(f64, f64)>> = if pass == 0 {
            Box::new(pts.iter())
        } else {
            Box::new(pts.iter().rev())
        };
        for &p in iter {
            while hull.len() >= start + 2 && cross(hull[hull.len() - 2], hull[hull.len() - 1], p) <= 0.0 {
                hull.pop();
            }
            hull.push(p);
        }
        hull.pop();
    }
    let n = hull.len();
    0.5 * (0..n)
        .map(|i| {
            let (a, b) = (hull[i], hull[(i + 1) % n]);
            a.0 * b.1 - b.0 * a.1
        })
        .sum::<f64>()
        .abs()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::ResolvedConfig;
    use crate::model::Model;
    use crate::dynamics::Method;

    fn synthetic(times: Vec<f64>, f: impl Fn(f64) -> PendulumState) -> Trajectory {
        let states: Vec<PendulumState> = times.iter().map(|&t| f(t)).collect();
        Trajectory {
            energy: vec![0.0; times.len()],
            times,
            states,
            termination: Termination::Completed,
            max_energy_drift: 0.0,
            config: ResolvedConfig {
                rel_tol: 1e-10,
                abs_tol: 1e-12,
                max_step: 1.0,
                initial_step: 1.0,
                t_end: 1.0,
                sample_interval: 1.0,
                model: Model::Full,
                method: Method::Dopri5,
                fixed_step: 1.0,
                energy_audit_bound: 1e-8,
            },
            accepted_steps: 0,
            rejected_steps: 0,
            failure: None,
        }
    }

    fn grid(n: usize, dt: f64) -> Vec<f64> {
        (0..n).map(|i| i as f64 * dt).collect()
    }

    #[test]
    fn sinusoid_frequency() {
        let period = 3.7;
        let w = std::f64::consts::TAU / period;
        let tr = synthetic(grid(4000, 0.01), |t| {
            PendulumState::new(0.2 * (w * t + 0.3).sin(), 0.0, 0.0, 0.0, 0.0, 0.0)
        });
        let est = estimate_frequency(&tr, Variable::Z0).unwrap();
        assert!((est.frequency - w).abs() < 1e-6 * w, "{}", est.frequency);
        assert!(est.uncertainty < 1e-6);
    }

    #[test]
    fn too_few_crossings() {
        let tr = synthetic(grid(100, 0.01), |t| PendulumState::new(0.1 * t.sin(), 0.0, 0.0, 0.0, 0.0, 0.0));
        assert!(matches!(
            estimate_frequency(&tr, Variable::Z0),
            Err(DynamicsError::InsufficientOscillations { .. })
        ));
    }

    #[test]
    fn trapping_requires_sign_definite_offset() {
        let trapped = synthetic(grid(1000, 0.01), |t| {
            PendulumState::new(0.3 + 0.1 * (5.0 * t).sin(), 0.0, 0.0, 0.0, 0.0, 0.0)
        });
        assert!(detect_self_trapping(&trapped, Variable::Z0).trapped);
        let tunneling = synthetic(grid(1000, 0.01), |t| {
            PendulumState::new(0.05 + 0.1 * (5.0 * t).sin(), 0.0, 0.0, 0.0, 0.0, 0.0)
        });
        assert!(!detect_self_trapping(&tunneling, Variable::Z0).trapped);
        let zero = synthetic(grid(10, 0.1), |_| PendulumState::default());
        let r = detect_self_trapping(&zero, Variable::Z1);
        assert!(!r.trapped);
        assert_eq!(r.time_mean, 0.0);
    }

    #[test]
    fn periodic_orbit_section_is_a_point() {
        let w = 1.3;
        let tr = synthetic(grid(20000, 0.01), |t| {
            PendulumState::new(0.2 * (w * t).sin(), 0.0, 0.1 * (w * t).cos(), 0.0, 0.0, 0.0)
        });
        let sec = Section {
            variable: Variable::Z0,
            value: 0.0,
            direction: Direction::Up,
        };
        let pts = poincare_section(&tr, &sec, (Variable::Z1, Variable::Z0)).unwrap();
        for p in &pts {
            assert!((p.0 - pts[0].0).abs() < 1e-5);
        }
    }

    #[test]
    fn quasi_periodic_section_fills_a_curve() {
        // Two incommensurate frequencies: sampling the second oscillator at
        // the period of the first traces its circle in angular order.
        let (w1, w2) = (1.0, 2f64.sqrt());
        let tr = synthetic(grid(200_000, 0.005), |t| {
            PendulumState::new(0.2 * (w1 * t).sin(), 0.0, 0.1 * (w2 * t).cos(), -0.1 * (w2 * t).sin(), 0.0, 0.0)
        });
        let sec = Section {
            variable: Variable::Z0,
            value: 0.0,
            direction: Direction::Up,
        };
        let pts = poincare_section(&tr, &sec, (Variable::Z1, Variable::Theta1)).unwrap();
        assert!(pts.len() > 100);
        let mut angles: Vec<f64> = pts.iter().map(|p| p.1.atan2(p.0)).collect();
        let radii: Vec<f64> = pts.iter().map(|p| p.0.hypot(p.1)).collect();
        assert!(radii.iter().all(|r| (r - 0.1).abs() < 1e-4));
        // Successive points advance by a fixed rotation angle 2π w2/w1.
        let step = wrap_phase(std::f64::consts::TAU * w2 / w1);
        for w in angles.windows(2) {
            assert!((wrap_phase(w[0] - w[1]) - step).abs() < 1e-3);
        }
        angles.sort_by(f64::total_cmp);
        let largest_gap = angles.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max);
        assert!(largest_gap < 0.2);
    }

    #[test]
    fn phase_section_handles_wrapping() {
        let tr = synthetic(grid(10000, 0.01), |t| {
            PendulumState::new(0.1 * (0.3 * t).sin(), 0.0, 0.0, 0.0, 0.0, 2.0 * t)
        });
        let sec = Section {
            variable: Variable::Theta2,
            value: 0.0,
            direction: Direction::Up,
        };
        let pts = poincare_section(&tr, &sec, (Variable::Z0, Variable::Theta2)).unwrap();
        // θ2 = 2t passes a multiple of 2π every π time units.
        assert_eq!(pts.len(), 31);
        for p in &pts {
            assert!(wrap_phase(p.1).abs() < 1e-9);
        }
    }

    #[test]
    fn hull_area_of_square_with_interior_points() {
        let pts = [(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0), (0.5, 0.5), (0.2, 0.7)];
        assert!((convex_hull_area(&pts) - 1.0).abs() < 1e-15);
        assert_eq!(convex_hull_area(&pts[..2]), 0.0);
    }

    #[test]
    fn variable_names_round_trip() {
        for v in Variable::ALL {
            assert_eq!(v.name().parse::<Variable>().unwrap(), v);
        }
        assert!("z3".parse::<Variable>().is_err());
    }
}
