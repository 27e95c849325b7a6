use std::path::Path;

use anyhow::{bail, Context};
use serde::{Deserialize, Serialize};

use dwell4::dynamics::{IntegratorConfig, Section, Variable};
use dwell4::eigensolver::PotentialSpec;
use dwell4::model::PendulumState;
use dwell4::regime_map::SweepGrid;
use dwell4::ModelParams;

/// `start:end:step` sample list, both ends inclusive.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScanRange {
    pub start: f64,
    pub end: f64,
    pub step: f64,
}

impl ScanRange {
    pub fn values(&self) -> anyhow::Result<Vec<f64>> {
        if !(self.step > 0.0 && self.start.is_finite() && self.end.is_finite()) {
            bail!("scan step must be positive, got {}", self.step);
        }
        if self.end < self.start {
            bail!("empty scan range {}:{}", self.start, self.end);
        }
        let n = ((self.end - self.start) / self.step + 1e-9).floor() as usize + 1;
        Ok((0..n).map(|k| self.start + k as f64 * self.step).collect())
    }
}

impl std::str::FromStr for ScanRange {
    type Err = anyhow::Error;

    fn from_str(s: &str) -> anyhow::Result<Self> {
        let parts = parse_list(s, ':')?;
        let [start, end, step] = parts[..] else {
            bail!("expected start:end:step, got `{s}`");
        };
        Ok(Self { start, end, step })
    }
}

pub fn parse_list(s: &str, sep: char) -> anyhow::Result<Vec<f64>> {
    s.split(sep)
        .map(|x| x.trim().parse::<f64>().with_context(|| format!("bad number `{x}` in `{s}`")))
        .collect()
}

pub fn parse_state(s: &str) -> anyhow::Result<PendulumState> {
    let v = parse_list(s, ',')?;
    let a: [f64; 6] = v
        .try_into()
        .map_err(|_| anyhow::anyhow!("a state needs six comma-separated numbers: z0,theta0,z1,theta1,z2,theta2"))?;
    Ok(PendulumState::from(a))
}

pub fn parse_plane(s: &str) -> anyhow::Result<(Variable, Variable)> {
    let (a, b) = s
        .split_once(',')
        .with_context(|| format!("a plane is two variables like `z1,theta1`, got `{s}`"))?;
    Ok((
        a.trim().parse().map_err(anyhow::Error::msg)?,
        b.trim().parse().map_err(anyhow::Error::msg)?,
    ))
}

/// Contents of a `--config` file. Every command reads the blocks it needs
/// and ignores the rest; unknown keys are rejected.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub potential: Option<PotentialSpec>,
    pub gamma: Option<f64>,
    /// Explicit coefficients, instead of `potential` + `gamma`.
    pub params: Option<ModelParams>,
    pub n_atoms: Option<f64>,
    pub integrator: IntegratorConfig,
    pub initial: Option<PendulumState>,
    pub initial_conditions: Vec<PendulumState>,
    pub plane: Option<(Variable, Variable)>,
    pub section: Option<Section>,
    pub z2: Option<f64>,
    pub scan_z0: Option<ScanRange>,
    pub scan_intervals: Option<usize>,
    pub sweep: Option<SweepGrid>,
    /// Recorded for provenance; no current command draws random numbers.
    pub seed: Option<u64>,
}

impl RunConfig {
    pub fn load(path: Option<&Path>) -> anyhow::Result<Self> {
        let Some(path) = path else {
            return Ok(Self::default());
        };
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
    }

    /// Folds the potential flags into the `potential` block.
    pub fn apply_potential(
        &mut self,
        v0: Option<f64>,
        gamma: Option<f64>,
        grid_points: Option<usize>,
        domain_halfwidth: Option<f64>,
    ) {
        if let Some(v0) = v0 {
            match &mut self.potential {
                Some(p) => p.v0 = v0,
                None => self.potential = Some(PotentialSpec::new(v0)),
            }
        }
        if let Some(p) = &mut self.potential {
            if let Some(n) = grid_points {
                p.grid_points = n;
            }
            if let Some(l) = domain_halfwidth {
                p.domain_halfwidth = l;
            }
        }
        if gamma.is_some() {
            self.gamma = gamma;
        }
        if v0.is_some() || gamma.is_some() {
            self.params = None;
        }
    }
}
