//! Discrete single-particle Hamiltonian on a uniform grid.
//!
//! The kinetic term is `c (K + K²/12 + K³/90)` where `K = DᵀD` is the
//! (positive) three-point second-difference matrix and `c = 1/(4π² Δz²)`.
//! In the interior this is the sixth-order central stencil for `-∂²/4π²`;
//! at the boundaries it stays symmetric positive definite. Writing it through
//! `D` lets every quadratic form be evaluated as a sum of squares.

use std::f64::consts::PI;

use super::band::SymBand;

/// Recoil-unit kinetic prefactor: `H/E_r = -(1/4π²) ∂_zz + V(z)/E_r`.
pub const KINETIC_PREFACTOR: f64 = 1.0 / (4.0 * PI * PI);

/// Condition imposed on the left edge of the (half or full) grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LeftEdge {
    /// Zero beyond the first node.
    Dirichlet,
    /// The grid is the right half of a mirror-symmetric grid; the missing
    /// node across the mirror carries `+u[0]`.
    MirrorEven,
    /// As above with `-u[0]` across the mirror.
    MirrorOdd,
}

#[derive(Debug, Clone)]
pub struct GridOperator {
    edge: LeftEdge,
    c: f64,
    potential: Vec<f64>,
}

impl GridOperator {
    pub fn new(edge: LeftEdge, dz: f64, potential: Vec<f64>) -> Self {
        Self {
            edge,
            c: KINETIC_PREFACTOR / (dz * dz),
            potential,
        }
    }

    pub fn dim(&self) -> usize {
        self.potential.len()
    }

    fn k_diagonal(&self) -> Vec<f64> {
        let mut d = vec![2.0; self.dim()];
        d[0] = match self.edge {
            LeftEdge::Dirichlet => 2.0,
            LeftEdge::MirrorEven => 1.0,
            LeftEdge::MirrorOdd => 3.0,
        };
        d
    }

    pub fn matrix(&self) -> SymBand {
        let n = self.dim();
        let k = SymBand::tridiagonal(self.k_diagonal(), vec![-1.0; n - 1]);
        let k2 = k.mul_commuting(&k);
        let k3 = k2.mul_commuting(&k);
        let mut t = k.add_scaled(&k2, 1.0 / 12.0).add_scaled(&k3, 1.0 / 90.0);
        t.scale(self.c);
        t.add_diagonal(&self.potential);
        t
    }

    /// First differences `D u`, including the boundary rows.
    fn diff(&self, u: &[f64]) -> Vec<f64> {
        let n = u.len();
        let mut out = Vec::with_capacity(n + 1);
        match self.edge {
            LeftEdge::Dirichlet => out.push(u[0]),
            LeftEdge::MirrorEven => {}
            LeftEdge::MirrorOdd => out.push(std::f64::consts::SQRT_2 * u[0]),
        }
        out.extend(u.windows(2).map(|w| w[1] - w[0]));
        out.push(-u[n - 1]);
        out
    }

    /// `K u = DᵀD u` via the tridiagonal form.
    fn second_diff(&self, u: &[f64]) -> Vec<f64> {
        let n = u.len();
        let d0 = self.k_diagonal()[0];
        (0..n)
            .map(|i| {
                let d = if i == 0 { d0 } else { 2.0 };
                let mut v = d * u[i];
                if i > 0 {
                    v -= u[i - 1];
                }
                if i + 1 < n {
                    v -= u[i + 1];
                }
                v
            })
            .collect()
    }

    /// `aᵀ H b`, evaluated without forming `H b`.
    pub fn bilinear(&self, a: &[f64], b: &[f64]) -> f64 {
        let (ka, kb) = (self.second_diff(a), self.second_diff(b));
        let kinetic = dot(&self.diff(a), &self.diff(b))
            + dot(&ka, &kb) / 12.0
            + dot(&self.diff(&ka), &self.diff(&kb)) / 90.0;
        let potential = compensated_sum(
            self.potential
                .iter()
                .zip(a.iter().zip(b))
                .map(|(v, (x, y))| v * x * y),
        );
        self.c * kinetic + potential
    }

    pub fn rayleigh_quotient(&self, u: &[f64]) -> f64 {
        self.bilinear(u, u) / dot(u, u)
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    compensated_sum(a.iter().zip(b).map(|(x, y)| x * y))
}

/// Neumaier summation.
pub(crate) fn compensated_sum(values: impl Iterator<Item = f64>) -> f64 {
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}
