//! Classification of the `(V0, γ)` plane and the curves separating regimes.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cache::CoefficientCache;
use crate::eigensolver::{PotentialSpec, DEFAULT_GRID_POINTS, DEFAULT_HALFWIDTH};
use crate::fixed_points::branch_z2;
use crate::model::{classify_regime, Regime, RegimeIndicators, Validity};
use crate::params::{CoefficientIntegrals, ModelParams};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RegimeMapError {
    #[error("invalid sweep grid: {0}")]
    InvalidGrid(String),
}

/// An inclusive axis of `count` samples.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Axis {
    pub min: f64,
    pub max: f64,
    pub count: usize,
    #[serde(default)]
    pub log: bool,
}

impl Axis {
    pub fn values(&self) -> Vec<f64> {
        let n = self.count;
        (0..n)
            .map(|i| {
                let f = if n == 1 { 0.0 } else { i as f64 / (n - 1) as f64 };
                if i == 0 {
                    self.min
                } else if i + 1 == n {
                    self.max
                } else if self.log {
                    (self.min.ln() + f * (self.max.ln() - self.min.ln())).exp()
                } else {
                    self.min + f * (self.max - self.min)
                }
            })
            .collect()
    }

    fn validate(&self, name: &str) -> Result<(), RegimeMapError> {
        if self.count < 2 {
            return Err(RegimeMapError::InvalidGrid(format!("{name}: count must be at least 2")));
        }
        if !(self.min > 0.0 && self.max > self.min && self.max.is_finite()) {
            return Err(RegimeMapError::InvalidGrid(format!(
                "{name}: need 0 < min < max, got [{}, {}]",
                self.min, self.max
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepGrid {
    pub v0: Axis,
    pub gamma: Axis,
    pub domain_halfwidth: f64,
    pub grid_points: usize,
}

impl Default for SweepGrid {
    fn default() -> Self {
        Self {
            v0: Axis {
                min: 3.0,
                max: 12.0,
                count: 60,
                log: false,
            },
            gamma: Axis {
                min: 1e-6,
                max: 1e-1,
                count: 60,
                log: true,
            },
            domain_halfwidth: DEFAULT_HALFWIDTH,
            grid_points: DEFAULT_GRID_POINTS,
        }
    }
}

impl SweepGrid {
    pub fn validate(&self) -> Result<(), RegimeMapError> {
        self.v0.validate("v0")?;
        self.gamma.validate("gamma")
    }

    pub fn spec(&self, v0: f64) -> PotentialSpec {
        PotentialSpec {
            v0,
            domain_halfwidth: self.domain_halfwidth,
            grid_points: self.grid_points,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegimeCell {
    pub v0: f64,
    pub gamma: f64,
    pub params: Option<ModelParams>,
    pub indicators: Option<RegimeIndicators>,
    pub regime: Regime,
    /// The four-mode description is justified (not `Validity::Invalid`).
    pub valid: bool,
    /// Some of the eight symmetric fixed points has `|z2⁰| ≤ 1`.
    pub z2_0_exists: bool,
    pub error: Option<String>,
}

impl RegimeCell {
    pub fn evaluate(v0: f64, gamma: f64, integrals: &CoefficientIntegrals) -> Self {
        let p = integrals.with_gamma(gamma);
        let ind = classify_regime(&p, Some(v0), None);
        Self {
            v0,
            gamma,
            params: Some(p),
            indicators: Some(ind),
            regime: ind.regime,
            valid: ind.validity != Validity::Invalid,
            z2_0_exists: z2_fixed_point_exists(&p),
            error: None,
        }
    }

    fn failed(v0: f64, gamma: f64, error: String) -> Self {
        Self {
            v0,
            gamma,
            params: None,
            indicators: None,
            regime: Regime::Invalid,
            valid: false,
            z2_0_exists: false,
            error: Some(error),
        }
    }
}

pub fn z2_fixed_point_exists(p: &ModelParams) -> bool {
    (0..8u8).any(|k| matches!(branch_z2(p, [k >> 2, (k >> 1) & 1, k & 1]), Ok(z) if z.abs() <= 1.0))
}

/// One column of the sweep: the integrals at a barrier height, or the reason
/// they could not be computed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Column {
    pub v0: f64,
    pub integrals: Result<CoefficientIntegrals, String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegimeMap {
    pub grid: SweepGrid,
    pub columns: Vec<Column>,
    pub gammas: Vec<f64>,
    /// Row-major with `v0` outer: `cells[i * gammas.len() + j]`.
    pub cells: Vec<RegimeCell>,
}

impl RegimeMap {
    pub fn cell(&self, i_v0: usize, i_gamma: usize) -> &RegimeCell {
        &self.cells[i_v0 * self.gammas.len() + i_gamma]
    }

    /// The cell nearest to `(v0, gamma)`, measuring `γ` on a log scale.
    pub fn nearest(&self, v0: f64, gamma: f64) -> &RegimeCell {
        self.cells
            .iter()
            .min_by(|a, b| {
                let d = |c: &RegimeCell| {
                    ((c.v0 - v0) / (self.grid.v0.max - self.grid.v0.min)).powi(2)
                        + ((c.gamma / gamma).ln() / (self.grid.gamma.max / self.grid.gamma.min).ln()).powi(2)
                };
                d(a).total_cmp(&d(b))
            })
            .expect("a validated grid has cells")
    }
}

/// Evaluates every cell. The eigenproblem is solved once per `v0` column
/// (through `cache`); solver failures mark the whole column invalid.
pub fn sweep(grid: &SweepGrid, cache: &CoefficientCache) -> Result<RegimeMap, RegimeMapError> {
    grid.validate()?;
    let gammas = grid.gamma.values();
    let columns: Vec<Column> = grid
        .v0
        .values()
        .into_par_iter()
        .map(|v0| Column {
            v0,
            integrals: cache.get_or_compute(&grid.spec(v0)).map_err(|e| e.to_string()),
        })
        .collect();
    let cells = columns
        .iter()
        .flat_map(|col| {
            gammas.iter().map(move |&g| match &col.integrals {
                Ok(c) => RegimeCell::evaluate(col.v0, g, c),
                Err(e) => RegimeCell::failed(col.v0, g, e.clone()),
            })
        })
        .collect();
    Ok(RegimeMap {
        grid: *grid,
        columns,
        gammas,
        cells,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CurveKind {
    Chi0,
    Chi1,
    Chi01,
    /// `V0 = E1`, a vertical line.
    BarrierAtE1,
    /// Onset of `|z2⁰| ≤ 1` for some symmetric fixed point.
    Z2Existence,
}

/// A boundary as `(v0, gamma)` vertices. Columns where the curve leaves the
/// `γ` window are listed in `missing`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Curve {
    pub kind: CurveKind,
    /// Level of the χ curves; `None` for the others.
    pub level: Option<f64>,
    pub points: Vec<(f64, f64)>,
    pub missing: Vec<f64>,
}

/// `γ` at which `chi` reaches `level`. Exact: every χ is linear in `γ`.
fn chi_gamma(c: &CoefficientIntegrals, kind: CurveKind, level: f64) -> f64 {
    let unit = c.with_gamma(1.0);
    let per_gamma = match kind {
        CurveKind::Chi0 => unit.chi0(),
        CurveKind::Chi1 => unit.chi1(),
        _ => unit.chi01(),
    };
    level / per_gamma
}

/// Smallest `γ` in the window at which a `|z2⁰| ≤ 1` fixed point appears.
fn existence_gamma(c: &CoefficientIntegrals, lo: f64, hi: f64) -> Option<f64> {
    let exists = |g: f64| z2_fixed_point_exists(&c.with_gamma(g));
    if exists(lo) {
        return Some(lo);
    }
    const SCAN: usize = 400;
    let mut a = lo;
    for i in 1..=SCAN {
        let b = (lo.ln() + (hi.ln() - lo.ln()) * i as f64 / SCAN as f64).exp();
        if exists(b) {
            let (mut x, mut y) = (a, b);
            while y - x > 1e-13 * y {
                let m = (x * y).sqrt();
                if exists(m) {
                    y = m;
                } else {
                    x = m;
                }
            }
            return Some(y);
        }
        a = b;
    }
    None
}

pub fn boundary_curves(map: &RegimeMap) -> Vec<Curve> {
    let (lo, hi) = (map.grid.gamma.min, map.grid.gamma.max);
    let ok: Vec<(f64, &CoefficientIntegrals)> = map
        .columns
        .iter()
        .filter_map(|c| c.integrals.as_ref().ok().map(|i| (c.v0, i)))
        .collect();
    let mut curves = Vec::new();
    for level in [1.0, 0.1] {
        for kind in [CurveKind::Chi0, CurveKind::Chi1, CurveKind::Chi01] {
            let mut curve = Curve {
                kind,
                level: Some(level),
                points: Vec::new(),
                missing: Vec::new(),
            };
            for &(v0, c) in &ok {
                let g = chi_gamma(c, kind, level);
                if (lo..=hi).contains(&g) {
                    curve.points.push((v0, g));
                } else {
                    curve.missing.push(v0);
                }
            }
            curves.push(curve);
        }
    }

    let mut barrier = Curve {
        kind: CurveKind::BarrierAtE1,
        level: None,
        points: Vec::new(),
        missing: Vec::new(),
    };
    for w in ok.windows(2) {
        let (fa, fb) = (w[0].0 - w[0].1.e1, w[1].0 - w[1].1.e1);
        if fa.signum() != fb.signum() {
            let v = w[0].0 + (w[1].0 - w[0].0) * fa / (fa - fb);
            barrier.points.push((v, lo));
            barrier.points.push((v, hi));
        }
    }
    curves.push(barrier);

    let mut existence = Curve {
        kind: CurveKind::Z2Existence,
        level: None,
        points: Vec::new(),
        missing: Vec::new(),
    };
    for &(v0, c) in &ok {
        match existence_gamma(c, lo, hi) {
            Some(g) => existence.points.push((v0, g)),
            None => existence.missing.push(v0),
        }
    }
    curves.push(existence);
    curves
}
