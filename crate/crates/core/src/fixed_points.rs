//! Stationary points of the pendulum equations: the eight symmetric fixed
//! points of the full system, the pitchfork branches of the ground pendulum,
//! and the effective fixed points of the excited pendulum with `z0` frozen.

use nalgebra::{DMatrix, Schur};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{eom_averaged, eom_full, PendulumState};
use crate::params::ModelParams;

/// Finite-difference step of the Jacobian.
pub const JACOBIAN_STEP: f64 = 1e-7;
/// Largest field magnitude accepted at a putative fixed point.
pub const RESIDUAL_TOLERANCE: f64 = 1e-8;
const SCHUR_MAX_ITERATIONS: usize = 10_000;
/// Default number of bracketing intervals of the effective-fixed-point scan.
pub const DEFAULT_SCAN_INTERVALS: usize = 2000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FixedPointError {
    #[error("branch {branch:?} has a vanishing denominator")]
    DegenerateDenominator { branch: [u8; 3] },
    #[error("field residual {residual:e} exceeds {RESIDUAL_TOLERANCE:e}; not a fixed point")]
    NotAFixedPoint { residual: f64 },
    #[error("chi1 (1 - z2) = {0} is below 1; no critical imbalance")]
    NoCriticalPoint(f64),
    #[error("vector field undefined at the point")]
    OutsideDomain,
    #[error("Jacobian eigenvalues did not converge")]
    NoConvergence,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Stability {
    /// All eigenvalues on the imaginary axis and nonzero.
    Center,
    /// Some eigenvalue has real part above `1e-6`.
    Unstable,
    /// Neither: near-zero eigenvalues or an indeterminate real part.
    Mixed,
}

impl Stability {
    pub fn as_str(&self) -> &'static str {
        match self {
            Stability::Center => "center",
            Stability::Unstable => "unstable",
            Stability::Mixed => "mixed",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilityReport {
    /// Eigenvalues as `[re, im]`, sorted by real then imaginary part.
    pub eigenvalues: Vec<[f64; 2]>,
    pub stability: Stability,
    pub residual: f64,
}

/// Which vector field a Jacobian is taken of.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum JacobianModel {
    /// The six-dimensional full equations.
    Full,
    /// The four-dimensional `(z0, θ0, z1, θ1)` averaged equations at the
    /// point's `z2`.
    AveragedSubsystem,
}

fn label(eigenvalues: &[[f64; 2]]) -> Stability {
    let max_re = eigenvalues.iter().map(|e| e[0]).fold(f64::NEG_INFINITY, f64::max);
    if max_re > 1e-6 {
        Stability::Unstable
    } else if eigenvalues
        .iter()
        .all(|e| e[0].abs() < 1e-8 && e[0].hypot(e[1]) > 1e-8)
    {
        Stability::Center
    } else {
        Stability::Mixed
    }
}

/// Stability of a fixed point of a canonical field whose coordinates come in
/// `(z, θ)` pairs with `ż = -∂H/∂θ`, `θ̇ = ∂H/∂z`.
///
/// The Jacobian is taken by central differences, mapped back to the Hessian
/// of `H`, symmetrized and mapped forward again, so the spectrum keeps the
/// `λ ↦ -λ` symmetry exactly.
pub fn hamiltonian_stability<F>(f: F, x: &[f64]) -> Result<StabilityReport, FixedPointError>
where
    F: Fn(&[f64]) -> Option<Vec<f64>>,
{
    let n = x.len();
    assert!(n % 2 == 0, "canonical coordinates come in pairs");
    let f0 = f(x).ok_or(FixedPointError::OutsideDomain)?;
    let residual = f0.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if !(residual <= RESIDUAL_TOLERANCE) {
        return Err(FixedPointError::NotAFixedPoint { residual });
    }
    let mut jac = DMatrix::<f64>::zeros(n, n);
    for k in 0..n {
        let mut a = x.to_vec();
        let mut b = x.to_vec();
        a[k] += JACOBIAN_STEP;
        b[k] -= JACOBIAN_STEP;
        let fa = f(&a).ok_or(FixedPointError::OutsideDomain)?;
        let fb = f(&b).ok_or(FixedPointError::OutsideDomain)?;
        for i in 0..n {
            jac[(i, k)] = (fa[i] - fb[i]) / (2.0 * JACOBIAN_STEP);
        }
    }
    // Ω maps ∇H to the field; per pair Ω = [[0, -1], [1, 0]] and Ω⁻¹ = -Ω.
    let mut omega = DMatrix::<f64>::zeros(n, n);
    for p in 0..n / 2 {
        omega[(2 * p, 2 * p + 1)] = -1.0;
        omega[(2 * p + 1, 2 * p)] = 1.0;
    }
    let hess = -&omega * jac;
    let hess = 0.5 * (&hess + hess.transpose());
    let jac = &omega * hess;
    if !jac.iter().all(|v| v.is_finite()) {
        return Err(FixedPointError::OutsideDomain);
    }
    let schur = Schur::try_new(jac, f64::EPSILON, SCHUR_MAX_ITERATIONS).ok_or(FixedPointError::NoConvergence)?;
    let mut eigenvalues: Vec<[f64; 2]> = schur.complex_eigenvalues().iter().map(|c| [c.re, c.im]).collect();
    eigenvalues.sort_by(|a, b| a[0].total_cmp(&b[0]).then(a[1].total_cmp(&b[1])));
    Ok(StabilityReport {
        stability: label(&eigenvalues),
        eigenvalues,
        residual,
    })
}

pub fn jacobian_stability(
    point: &PendulumState,
    p: &ModelParams,
    model: JacobianModel,
) -> Result<StabilityReport, FixedPointError> {
    match model {
        JacobianModel::Full => hamiltonian_stability(
            |x| {
                let s = PendulumState::from(<[f64; 6]>::try_from(x).expect("six coordinates"));
                eom_full(&s, p).ok().map(|f| f.to_vec())
            },
            &point.to_array(),
        ),
        JacobianModel::AveragedSubsystem => hamiltonian_stability(
            |x| {
                let x4 = <[f64; 4]>::try_from(x).expect("four coordinates");
                eom_averaged(&x4, point.z2, p).ok().map(|f| f.to_vec())
            },
            &[point.z0, point.theta0, point.z1, point.theta1],
        ),
    }
}

/// One of the eight fixed points `z0 = z1 = 0`, `θ_i = k_i π`, `z2 = z2⁰`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FixedPointReport {
    pub branch: [u8; 3],
    pub z2_0: f64,
    pub location: PendulumState,
    /// `|z2⁰| ≤ 1`.
    pub exists: bool,
    /// Empty when the point does not exist or sits on `|z2| = 1`.
    pub jacobian_eigenvalues: Vec<[f64; 2]>,
    pub stability: Option<Stability>,
}

fn parity(k: u8) -> f64 {
    if k % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// `z2⁰` of branch `k`, from `θ̇2 = 0` at `z0 = z1 = 0`.
pub fn branch_z2(p: &ModelParams, k: [u8; 3]) -> Result<f64, FixedPointError> {
    let (s0, s1, s2) = (parity(k[0]), parity(k[1]), parity(k[2]));
    let num = 2.0 * p.delta_e + 2.0 * s0 * p.j0 - 2.0 * s1 * p.j1 + p.nu1 - p.nu0;
    let den = p.nu0 + p.nu1 - 2.0 * p.nu01 * (2.0 + s0 * s1 * s2);
    if den.abs() <= 1e-300 {
        return Err(FixedPointError::DegenerateDenominator { branch: k });
    }
    Ok(num / den)
}

pub fn analytic_fixed_points(p: &ModelParams) -> Result<Vec<FixedPointReport>, FixedPointError> {
    let pi = std::f64::consts::PI;
    let mut out = Vec::with_capacity(8);
    for k0 in 0..2u8 {
        for k1 in 0..2u8 {
            for k2 in 0..2u8 {
                let branch = [k0, k1, k2];
                let z2_0 = branch_z2(p, branch)?;
                let location =
                    PendulumState::new(0.0, k0 as f64 * pi, 0.0, k1 as f64 * pi, z2_0, k2 as f64 * pi);
                let exists = z2_0.abs() <= 1.0;
                let stab = if z2_0.abs() < 1.0 {
                    jacobian_stability(&location, p, JacobianModel::Full).ok()
                } else {
                    None
                };
                out.push(FixedPointReport {
                    branch,
                    z2_0,
                    location,
                    exists,
                    jacobian_eigenvalues: stab.as_ref().map(|s| s.eigenvalues.clone()).unwrap_or_default(),
                    stability: stab.map(|s| s.stability),
                });
            }
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Pitchfork {
    /// The radicand is non-negative, so the branches are real.
    pub exists: bool,
    /// The branches lie strictly inside `|z0| < (1 + z2)/2`.
    pub physical: bool,
    pub z0_plus: f64,
    pub z0_minus: f64,
}

/// The self-trapped fixed points `(±z0, θ0 = π)` of the averaged ground
/// pendulum at `z1 = 0`, present once `χ0 (1 + z2) ≥ 1`.
pub fn pitchfork_points(p: &ModelParams, z2: f64) -> Pitchfork {
    let a0 = 1.0 + z2;
    let radicand = 1.0 - (p.chi0() * a0).powi(-2);
    if radicand < 0.0 || !radicand.is_finite() {
        return Pitchfork {
            exists: false,
            physical: false,
            z0_plus: f64::NAN,
            z0_minus: f64::NAN,
        };
    }
    let z = 0.5 * a0 * radicand.sqrt();
    Pitchfork {
        exists: true,
        physical: z < 0.5 * a0,
        z0_plus: z,
        z0_minus: -z,
    }
}

/// `|z1ᶜ|`, the ordinate at which two `θ1 = π` effective fixed points merge.
pub fn critical_imbalance(p: &ModelParams, z2: f64) -> Result<f64, FixedPointError> {
    let b = 1.0 - z2;
    let x = p.chi1() * b;
    if !(x >= 1.0) {
        return Err(FixedPointError::NoCriticalPoint(x));
    }
    Ok(0.5 * b * (1.0 - x.powf(-2.0 / 3.0)).sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EffectiveStability {
    Stable,
    Unstable,
}

impl EffectiveStability {
    pub fn as_str(&self) -> &'static str {
        match self {
            EffectiveStability::Stable => "stable",
            EffectiveStability::Unstable => "unstable",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EffectiveFixedPoint {
    pub z0_frozen: f64,
    /// `0` or `π`.
    pub theta1_0: f64,
    pub z1_0: f64,
    pub stability: EffectiveStability,
}

/// `θ̇1` of the averaged equations at `θ1 ∈ {0, π}` (`cos θ1 = c`).
fn theta1_rate(p: &ModelParams, b: f64, c: f64, z0: f64, z1: f64) -> f64 {
    let r = (b * b - 4.0 * z1 * z1).sqrt();
    2.0 * z1 * (p.nu1 + 2.0 * p.j1 * c / r) + 4.0 * p.nu01 * z0
}

/// Roots of `θ̇1(z1)` on the two lines `θ1 = 0, π`, with `z0` held fixed.
pub fn effective_fixed_points(p: &ModelParams, z2: f64, z0_frozen: f64) -> Vec<EffectiveFixedPoint> {
    effective_fixed_points_with(p, z2, z0_frozen, DEFAULT_SCAN_INTERVALS)
}

/// [`effective_fixed_points`] with an explicit (even) number of scan
/// intervals; the midpoint `z1 = 0` is always a grid node.
pub fn effective_fixed_points_with(
    p: &ModelParams,
    z2: f64,
    z0_frozen: f64,
    intervals: usize,
) -> Vec<EffectiveFixedPoint> {
    let intervals = intervals.max(2).next_multiple_of(2);
    let b = 1.0 - z2;
    let half = 0.5 * b * (1.0 - 1e-12);
    let mut out = Vec::new();
    for (c, theta) in [(1.0, 0.0), (-1.0, std::f64::consts::PI)] {
        let f = |z1: f64| theta1_rate(p, b, c, z0_frozen, z1);
        let node = |i: usize| -half + 2.0 * half * i as f64 / intervals as f64;
        let mut roots = Vec::new();
        let mut prev = (node(0), f(node(0)));
        for i in 1..=intervals {
            let x = node(i);
            let fx = f(x);
            if fx == 0.0 {
                roots.push(x);
            } else if prev.1 != 0.0 && prev.1.signum() != fx.signum() {
                roots.push(bisect(&f, prev.0, x, prev.1));
            }
            prev = (x, fx);
        }
        for z1 in roots {
            let r = (b * b - 4.0 * z1 * z1).sqrt();
            let slope = 2.0 * p.nu1 + 4.0 * p.j1 * c * b * b / r.powi(3);
            // Linearization: δż1 = -J1 c r δθ1, δθ̇1 = slope δz1.
            let stability = if -p.j1 * c * r * slope < 0.0 {
                EffectiveStability::Stable
            } else {
                EffectiveStability::Unstable
            };
            out.push(EffectiveFixedPoint {
                z0_frozen,
                theta1_0: theta,
                z1_0: z1,
                stability,
            });
        }
    }
    out
}

fn bisect(f: &impl Fn(f64) -> f64, mut a: f64, mut b: f64, mut fa: f64) -> f64 {
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if m <= a.min(b) || m >= a.max(b) {
            break;
        }
        let fm = f(m);
        if fm == 0.0 {
            return m;
        }
        if fm.signum() == fa.signum() {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    if f(a).abs() < f(b).abs() {
        a
    } else {
        b
    }
}

/// Effective fixed points for every frozen `z0`, in input order.
pub fn scan_effective_fixed_points(p: &ModelParams, z2: f64, z0_values: &[f64]) -> Vec<EffectiveFixedPoint> {
    z0_values
        .par_iter()
        .map(|&z0| effective_fixed_points(p, z2, z0))
        .collect::<Vec<_>>()
        .into_iter()
        .flatten()
        .collect()
}
