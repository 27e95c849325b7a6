//! CSV and manifest writers. Numbers are written with `{:e}`, the shortest
//! scientific form that parses back to the same `f64`.

use std::io::{self, Write};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::dynamics::Trajectory;
use crate::fixed_points::{EffectiveFixedPoint, FixedPointReport};
use crate::regime_map::RegimeMap;

pub const TRAJECTORY_HEADER: &str = "t,z0,theta0,z1,theta1,z2,theta2,energy";
pub const FIXED_POINT_HEADER: &str = "k0,k1,k2,z2_0,exists,stability";
pub const EFFECTIVE_HEADER: &str = "z0_frozen,theta1_0,z1_0,stability";
pub const MAP_HEADER: &str = "v0,gamma,chi0,chi1,chi01,regime,valid,z2_0_exists";

pub fn write_trajectory_csv(traj: &Trajectory, mut out: impl Write) -> io::Result<()> {
    writeln!(out, "{TRAJECTORY_HEADER}")?;
    for ((t, s), e) in traj.times.iter().zip(&traj.states).zip(&traj.energy) {
        write!(out, "{t:e}")?;
        for x in s.to_array() {
            write!(out, ",{x:e}")?;
        }
        writeln!(out, ",{e:e}")?;
    }
    Ok(())
}

pub fn write_fixed_points_csv(points: &[FixedPointReport], mut out: impl Write) -> io::Result<()> {
    writeln!(out, "{FIXED_POINT_HEADER}")?;
    for p in points {
        writeln!(
            out,
            "{},{},{},{:e},{},{}",
            p.branch[0],
            p.branch[1],
            p.branch[2],
            p.z2_0,
            p.exists,
            p.stability.map_or("none", |s| s.as_str())
        )?;
    }
    Ok(())
}

pub fn write_effective_csv(points: &[EffectiveFixedPoint], mut out: impl Write) -> io::Result<()> {
    writeln!(out, "{EFFECTIVE_HEADER}")?;
    for p in points {
        writeln!(
            out,
            "{:e},{:e},{:e},{}",
            p.z0_frozen,
            p.theta1_0,
            p.z1_0,
            p.stability.as_str()
        )?;
    }
    Ok(())
}

pub fn write_map_csv(map: &RegimeMap, mut out: impl Write) -> io::Result<()> {
    writeln!(out, "{MAP_HEADER}")?;
    for c in &map.cells {
        let (chi0, chi1, chi01) = c
            .indicators
            .map_or((f64::NAN, f64::NAN, f64::NAN), |i| (i.chi0, i.chi1, i.chi01));
        writeln!(
            out,
            "{:e},{:e},{chi0:e},{chi1:e},{chi01:e},{},{},{}",
            c.v0, c.gamma, c.regime, c.valid, c.z2_0_exists
        )?;
    }
    Ok(())
}

/// Points of a section or portrait plane as two columns.
pub fn write_points_csv(header: (&str, &str), points: &[(f64, f64)], mut out: impl Write) -> io::Result<()> {
    writeln!(out, "{},{}", header.0, header.1)?;
    for (x, y) in points {
        writeln!(out, "{x:e},{y:e}")?;
    }
    Ok(())
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Provenance record written next to every output file. It carries no
/// timestamps, so identical runs produce identical manifests.
#[derive(Debug, Clone, Serialize)]
pub struct Manifest<C: Serialize> {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: String,
    /// SHA-256 of the canonical JSON of `config`.
    pub config_hash: String,
    pub config: C,
    /// Run results worth keeping next to the data (termination, counts).
    pub summary: serde_json::Value,
    pub outputs: Vec<OutputFile>,
}

#[derive(Debug, Clone, Serialize)]
pub struct OutputFile {
    pub path: String,
    pub sha256: String,
}

impl<C: Serialize> Manifest<C> {
    pub fn new(command: &str, config: C) -> serde_json::Result<Self> {
        let canonical = serde_json::to_vec(&config)?;
        Ok(Self {
            tool: env!("CARGO_PKG_NAME"),
            version: env!("CARGO_PKG_VERSION"),
            command: command.to_string(),
            config_hash: sha256_hex(&canonical),
            config,
            summary: serde_json::Value::Null,
            outputs: Vec::new(),
        })
    }

    pub fn record(&mut self, path: impl Into<String>, contents: &[u8]) {
        self.outputs.push(OutputFile {
            path: path.into(),
            sha256: sha256_hex(contents),
        });
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{integrate, IntegratorConfig};
    use crate::model::PendulumState;
    use crate::params::ModelParams;

    #[test]
    fn trajectory_csv_round_trips_values() {
        let p = ModelParams::new(1.0, 3.0, 0.01, 0.05, 0.08, 0.06, 0.004);
        let cfg = IntegratorConfig {
            t_end: Some(1.0),
            sample_interval: Some(0.25),
            ..Default::default()
        };
        let tr = integrate(&PendulumState::new(0.1, 0.2, 0.0, 0.0, 0.0, 0.0), &p, &cfg).unwrap();
        let mut buf = Vec::new();
        write_trajectory_csv(&tr, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some(TRAJECTORY_HEADER));
        let rows: Vec<Vec<f64>> = lines
            .map(|l| l.split(',').map(|x| x.parse().unwrap()).collect())
            .collect();
        assert_eq!(rows.len(), tr.len());
        assert_eq!(rows[2][0], tr.times[2]);
        assert_eq!(rows[3][1], tr.states[3].z0);
        assert_eq!(rows[4][7], tr.energy[4]);
    }

    #[test]
    fn manifest_hash_depends_only_on_config() {
        let a = Manifest::new("x", serde_json::json!({"v0": 5.0})).unwrap();
        let b = Manifest::new("y", serde_json::json!({"v0": 5.0})).unwrap();
        let c = Manifest::new("x", serde_json::json!({"v0": 5.5})).unwrap();
        assert_eq!(a.config_hash, b.config_hash);
        assert_ne!(a.config_hash, c.config_hash);
        assert_eq!(a.config_hash.len(), 64);
    }
}
