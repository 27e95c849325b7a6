//! Single-particle spectrum of the Duffing double well and the localized
//! modes built from its two lowest doublets.
//!
//! Lengths are in units of the well separation and energies in recoil units,
//! so the Hamiltonian is `-(1/4π²) ∂_zz + V0 (1 - 4z²)²` with minima at
//! `z = ±1/2`.

mod band;
mod operator;
mod subspace;

use std::io::Write;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::params::{CoefficientIntegrals, ModelParams};
use operator::{compensated_sum, GridOperator, LeftEdge};

pub use operator::KINETIC_PREFACTOR;

pub const DEFAULT_HALFWIDTH: f64 = 1.5;
pub const DEFAULT_GRID_POINTS: usize = 2048;
/// Largest |ψ| tolerated on the outermost grid node.
pub const BOUNDARY_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EigenError {
    #[error("invalid potential: {0}")]
    InvalidSpec(String),
    #[error("domain too small: |psi{state}| = {value:e} at the boundary")]
    DomainTooSmall { state: usize, value: f64 },
    #[error("eigen-iteration did not converge in the {0} sector")]
    NotConverged(&'static str),
    #[error("eigenstates do not alternate in parity (state {0})")]
    ParityViolation(usize),
    #[error("negative splitting in doublet {level}: {splitting:e}")]
    NegativeSplitting { level: usize, splitting: f64 },
    #[error("negative interaction scale gamma = {0}")]
    NegativeGamma(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PotentialSpec {
    pub v0: f64,
    #[serde(default = "default_halfwidth")]
    pub domain_halfwidth: f64,
    #[serde(default = "default_grid_points")]
    pub grid_points: usize,
}

fn default_halfwidth() -> f64 {
    DEFAULT_HALFWIDTH
}

fn default_grid_points() -> usize {
    DEFAULT_GRID_POINTS
}

impl PotentialSpec {
    pub fn new(v0: f64) -> Self {
        Self {
            v0,
            domain_halfwidth: DEFAULT_HALFWIDTH,
            grid_points: DEFAULT_GRID_POINTS,
        }
    }

    pub fn validate(&self) -> Result<(), EigenError> {
        if !(self.v0 > 0.0 && self.v0.is_finite()) {
            return Err(EigenError::InvalidSpec(format!("v0 must be positive, got {}", self.v0)));
        }
        if !(self.domain_halfwidth >= 1.0 && self.domain_halfwidth.is_finite()) {
            return Err(EigenError::InvalidSpec(format!(
                "domain_halfwidth must be >= 1, got {}",
                self.domain_halfwidth
            )));
        }
        if self.grid_points < 64 || self.grid_points % 2 != 0 {
            return Err(EigenError::InvalidSpec(format!(
                "grid_points must be even and >= 64, got {}",
                self.grid_points
            )));
        }
        Ok(())
    }

    /// Node spacing; nodes sit at `-L + (i+1) dz` and avoid both the walls
    /// and `z = 0`.
    pub fn dz(&self) -> f64 {
        2.0 * self.domain_halfwidth / (self.grid_points + 1) as f64
    }

    pub fn grid(&self) -> Vec<f64> {
        let dz = self.dz();
        (0..self.grid_points)
            .map(|i| -self.domain_halfwidth + (i + 1) as f64 * dz)
            .collect()
    }

    pub fn potential(&self, z: f64) -> f64 {
        let s = 1.0 - 4.0 * z * z;
        self.v0 * s * s
    }

    /// Canonical cache key for the γ-independent integrals.
    pub fn cache_key(&self) -> String {
        format!(
            "v0={};n={};L={}",
            self.v0, self.grid_points, self.domain_halfwidth
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EigenSolution {
    pub spec: PotentialSpec,
    /// Lowest four eigenvalues, ascending.
    pub energies: Vec<f64>,
    /// Eigenfunctions on `grid`, normalized to `Σ ψ² dz = 1`.
    pub wavefunctions: Vec<Vec<f64>>,
    pub grid: Vec<f64>,
    pub dz: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LocalizedModes {
    pub psi_l0: Vec<f64>,
    pub psi_r0: Vec<f64>,
    pub psi_l1: Vec<f64>,
    pub psi_r1: Vec<f64>,
}

impl LocalizedModes {
    pub fn left(&self, level: usize) -> &[f64] {
        [&self.psi_l0, &self.psi_l1][level]
    }

    pub fn right(&self, level: usize) -> &[f64] {
        [&self.psi_r0, &self.psi_r1][level]
    }
}

pub fn solve_spectrum(spec: &PotentialSpec) -> Result<EigenSolution, EigenError> {
    spec.validate()?;
    let grid = spec.grid();
    let dz = spec.dz();
    let half = spec.grid_points / 2;
    let half_potential: Vec<f64> = grid[half..].iter().map(|&z| spec.potential(z)).collect();

    let mut sectors = Vec::with_capacity(2);
    for (edge, name, sign) in [
        (LeftEdge::MirrorEven, "even", 1.0),
        (LeftEdge::MirrorOdd, "odd", -1.0),
    ] {
        let op = GridOperator::new(edge, dz, half_potential.clone());
        let pairs =
            subspace::lowest_eigenpairs(&op.matrix(), 2).ok_or(EigenError::NotConverged(name))?;
        let states: Vec<(f64, Vec<f64>)> = pairs
            .into_iter()
            .map(|p| {
                let energy = op.rayleigh_quotient(&p.vector);
                (energy, mirror(&p.vector, sign, dz))
            })
            .collect();
        sectors.push(states);
    }

    let mut energies = Vec::with_capacity(4);
    let mut wavefunctions = Vec::with_capacity(4);
    let (even, odd) = (&sectors[0], &sectors[1]);
    for level in 0..2 {
        for (e, psi) in [&even[level], &odd[level]] {
            energies.push(*e);
            wavefunctions.push(orient(psi, half));
        }
    }

    for (state, psi) in wavefunctions.iter().enumerate() {
        let value = psi[0].abs().max(psi[psi.len() - 1].abs());
        if value > BOUNDARY_TOLERANCE {
            return Err(EigenError::DomainTooSmall { state, value });
        }
    }

    Ok(EigenSolution {
        spec: *spec,
        energies,
        wavefunctions,
        grid,
        dz,
    })
}

/// Full-grid function from its right half, scaled so `Σ ψ² dz = 1` when the
/// half vector has unit Euclidean norm.
fn mirror(right: &[f64], sign: f64, dz: f64) -> Vec<f64> {
    let scale = 1.0 / (2.0 * dz).sqrt();
    right
        .iter()
        .rev()
        .map(|x| sign * x * scale)
        .chain(right.iter().map(|x| x * scale))
        .collect()
}

/// Flips the sign so the largest-magnitude value on `z < 0` is positive.
fn orient(psi: &[f64], half: usize) -> Vec<f64> {
    let peak = psi[..half]
        .iter()
        .copied()
        .max_by(|a, b| a.abs().total_cmp(&b.abs()))
        .unwrap_or(0.0);
    if peak < 0.0 {
        psi.iter().map(|x| -x).collect()
    } else {
        psi.to_vec()
    }
}

fn parity_defect(psi: &[f64], sign: f64) -> f64 {
    let n = psi.len();
    let scale = psi.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    (0..n / 2)
        .map(|i| (psi[i] - sign * psi[n - 1 - i]).abs())
        .fold(0.0, f64::max)
        / scale
}

pub fn build_localized_modes(sol: &EigenSolution) -> Result<LocalizedModes, EigenError> {
    if sol.wavefunctions.len() < 4 {
        return Err(EigenError::ParityViolation(sol.wavefunctions.len()));
    }
    for (k, psi) in sol.wavefunctions.iter().take(4).enumerate() {
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        if parity_defect(psi, sign) > 1e-8 {
            return Err(EigenError::ParityViolation(k));
        }
    }
    let half = sol.grid.len() / 2;
    let mut out = Vec::with_capacity(4);
    for level in 0..2 {
        let even = &sol.wavefunctions[2 * level];
        let odd = &sol.wavefunctions[2 * level + 1];
        let left_overlap = compensated_sum(even[..half].iter().zip(&odd[..half]).map(|(a, b)| a * b));
        let s = if left_overlap >= 0.0 { 1.0 } else { -1.0 };
        let r2 = std::f64::consts::FRAC_1_SQRT_2;
        let left: Vec<f64> = even.iter().zip(odd).map(|(e, o)| r2 * (e + s * o)).collect();
        let right: Vec<f64> = left.iter().rev().copied().collect();
        out.push((left, right));
    }
    let (l1, r1) = out.pop().unwrap();
    let (l0, r0) = out.pop().unwrap();
    Ok(LocalizedModes {
        psi_l0: l0,
        psi_r0: r0,
        psi_l1: l1,
        psi_r1: r1,
    })
}

fn quad(dz: f64, values: impl Iterator<Item = f64>) -> f64 {
    dz * compensated_sum(values)
}

/// `∫ a b dz` on the solver grid.
pub fn overlap(sol: &EigenSolution, a: &[f64], b: &[f64]) -> f64 {
    quad(sol.dz, a.iter().zip(b).map(|(x, y)| x * y))
}

/// The γ-independent coefficient integrals; interactions come from the
/// left-well modes.
pub fn coefficient_integrals(
    sol: &EigenSolution,
    modes: &LocalizedModes,
) -> Result<CoefficientIntegrals, EigenError> {
    integrals_from(sol, modes.left(0), modes.left(1))
}

/// As [`coefficient_integrals`], evaluating the interaction integrals on the
/// right-well modes instead.
pub fn coefficient_integrals_right(
    sol: &EigenSolution,
    modes: &LocalizedModes,
) -> Result<CoefficientIntegrals, EigenError> {
    integrals_from(sol, modes.right(0), modes.right(1))
}

fn integrals_from(
    sol: &EigenSolution,
    psi0: &[f64],
    psi1: &[f64],
) -> Result<CoefficientIntegrals, EigenError> {
    let e = &sol.energies;
    let mut j = [0.0; 2];
    for level in 0..2 {
        let splitting = e[2 * level + 1] - e[2 * level];
        if splitting < 0.0 {
            return Err(EigenError::NegativeSplitting { level, splitting });
        }
        j[level] = 0.5 * splitting;
    }
    let dz = sol.dz;
    Ok(CoefficientIntegrals {
        e0: 0.5 * (e[0] + e[1]),
        e1: 0.5 * (e[2] + e[3]),
        j0: j[0],
        j1: j[1],
        u0_per_gamma: quad(dz, psi0.iter().map(|x| x.powi(4))),
        u1_per_gamma: quad(dz, psi1.iter().map(|x| x.powi(4))),
        u01_per_gamma: quad(dz, psi0.iter().zip(psi1).map(|(a, b)| a * a * b * b)),
    })
}

pub fn compute_model_params(
    sol: &EigenSolution,
    modes: &LocalizedModes,
    gamma: f64,
) -> Result<ModelParams, EigenError> {
    if gamma < 0.0 {
        return Err(EigenError::NegativeGamma(gamma));
    }
    Ok(coefficient_integrals(sol, modes)?.with_gamma(gamma))
}

/// Spectrum, modes and integrals in one call.
pub fn integrals_for(spec: &PotentialSpec) -> Result<CoefficientIntegrals, EigenError> {
    let sol = solve_spectrum(spec)?;
    let modes = build_localized_modes(&sol)?;
    coefficient_integrals(&sol, &modes)
}

/// Hopping energy from the tunneling matrix element `-⟨L|H|R⟩`, evaluated with
/// the same discrete Hamiltonian the spectrum was solved with.
pub fn hopping_integral(sol: &EigenSolution, modes: &LocalizedModes, level: usize) -> f64 {
    let potential = sol.grid.iter().map(|&z| sol.spec.potential(z)).collect();
    let op = GridOperator::new(LeftEdge::Dirichlet, sol.dz, potential);
    -sol.dz * op.bilinear(modes.left(level), modes.right(level))
}

/// Writes `z,psi0,psi1,psi2,psi3` rows.
pub fn write_wavefunctions_csv(sol: &EigenSolution, mut out: impl Write) -> std::io::Result<()> {
    writeln!(out, "z,psi0,psi1,psi2,psi3")?;
    for (i, z) in sol.grid.iter().enumerate() {
        write!(out, "{z:e}")?;
        for psi in sol.wavefunctions.iter().take(4) {
            write!(out, ",{:e}", psi[i])?;
        }
        writeln!(out)?;
    }
    Ok(())
}
