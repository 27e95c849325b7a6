use std::path::Path;

use anyhow::{anyhow, Context};
use serde::Serialize;

use dwell4::cache::CoefficientCache;
use dwell4::dynamics::{
    convex_hull_area, integrate, phase_portrait, poincare_section, Direction, Section, Termination,
    Variable,
};
use dwell4::eigensolver::{solve_spectrum, write_wavefunctions_csv, EigenError, PotentialSpec};
use dwell4::fixed_points::{
    analytic_fixed_points, critical_imbalance, effective_fixed_points_with, pitchfork_points,
    DEFAULT_SCAN_INTERVALS,
};
use dwell4::model::{classify_regime, PendulumState};
use dwell4::output::{self, Manifest};
use dwell4::regime_map::{boundary_curves, sweep, Axis};
use dwell4::{CoefficientIntegrals, ModelParams};
use rayon::prelude::*;

use crate::config::{parse_list, parse_plane, parse_state, RunConfig, ScanRange};
use crate::{Cli, CmdResult, Command, Failure, IntegratorArgs, PotentialArgs, Tag};

/// Largest domain tried when the default one clips the excited doublet.
const MAX_HALFWIDTH: f64 = 4.0;

struct Session {
    cache: CoefficientCache,
}

pub fn run(cli: Cli) -> CmdResult {
    let cache = if cli.no_cache {
        CoefficientCache::in_memory()
    } else {
        match CoefficientCache::default_path().map(CoefficientCache::open) {
            Some(Ok(c)) => c,
            Some(Err(e)) => {
                eprintln!("warning: {e}; continuing without the cache");
                CoefficientCache::in_memory()
            }
            None => CoefficientCache::in_memory(),
        }
    };
    let ctx = Session { cache };
    let result = match cli.command {
        Command::Coefficients {
            potential,
            n_atoms,
            out,
            wavefunctions,
        } => coefficients(&ctx, potential, n_atoms, out.as_deref(), wavefunctions.as_deref()),
        Command::Simulate {
            potential,
            integrator,
            initial,
            out_dir,
        } => simulate(&ctx, potential, integrator, initial, &out_dir),
        Command::FixedPoints {
            potential,
            z2,
            scan_z0,
            scan_intervals,
            out_dir,
        } => fixed_points(&ctx, potential, z2, scan_z0, scan_intervals, &out_dir),
        Command::RegimeMap {
            config,
            v0_range,
            gamma_range,
            grid_points,
            domain_halfwidth,
            out_dir,
        } => regime_map(&ctx, config.as_deref(), v0_range, gamma_range, grid_points, domain_halfwidth, &out_dir),
        Command::Portrait {
            potential,
            integrator,
            z0,
            z2,
            plane,
            out_dir,
        } => portrait(&ctx, potential, integrator, z0, z2, plane, &out_dir),
        Command::Poincare {
            potential,
            integrator,
            initial,
            section_variable,
            section_value,
            direction,
            plane,
            out_dir,
        } => poincare(
            &ctx,
            potential,
            integrator,
            initial,
            (section_variable, section_value, direction),
            plane,
            &out_dir,
        ),
    };
    if let Err(e) = ctx.cache.flush() {
        eprintln!("warning: {e}");
    }
    result
}

fn load(args: &PotentialArgs) -> CmdResult<RunConfig> {
    let mut cfg = RunConfig::load(args.config.as_deref()).config()?;
    cfg.apply_potential(args.v0, args.gamma, args.grid_points, args.domain_halfwidth);
    Ok(cfg)
}

fn apply_integrator(cfg: &mut RunConfig, a: &IntegratorArgs) {
    let i = &mut cfg.integrator;
    if let Some(m) = a.model {
        i.model = m;
    }
    if let Some(m) = a.method {
        i.method = m;
    }
    if a.t_end.is_some() {
        i.t_end = a.t_end;
    }
    if a.sample_interval.is_some() {
        i.sample_interval = a.sample_interval;
    }
    if let Some(x) = a.rel_tol {
        i.rel_tol = x;
    }
    if let Some(x) = a.abs_tol {
        i.abs_tol = x;
    }
    if a.max_step.is_some() {
        i.max_step = a.max_step;
    }
}

/// Integrals for `spec`, widening the domain while the excited doublet does
/// not fit. Returns the spec actually used.
fn integrals(ctx: &Session, spec: PotentialSpec) -> CmdResult<(PotentialSpec, CoefficientIntegrals)> {
    spec.validate().config()?;
    let mut spec = spec;
    loop {
        match ctx.cache.get_or_compute(&spec) {
            Ok(c) => return Ok((spec, c)),
            Err(EigenError::DomainTooSmall { .. }) if spec.domain_halfwidth + 0.5 <= MAX_HALFWIDTH => {
                spec.domain_halfwidth += 0.5;
            }
            Err(e) => return Err(e).numerical(),
        }
    }
}

/// Coefficients from the config: explicit `params`, or `potential` + `gamma`.
fn resolve_params(ctx: &Session, cfg: &mut RunConfig) -> CmdResult<ModelParams> {
    match (cfg.potential, cfg.gamma, cfg.params) {
        (Some(spec), Some(gamma), _) => {
            if !(gamma >= 0.0 && gamma.is_finite()) {
                return Err(Failure::Config(anyhow!("gamma must be non-negative, got {gamma}")));
            }
            let (used, c) = integrals(ctx, spec)?;
            cfg.potential = Some(used);
            Ok(c.with_gamma(gamma))
        }
        (None, None, Some(p)) => {
            p.check().map_err(|e| Failure::Config(anyhow!("params: {e}")))?;
            Ok(p)
        }
        _ => Err(Failure::Config(anyhow!(
            "give --v0 and --gamma (or `potential` and `gamma` in the config), or explicit `params`"
        ))),
    }
}

fn write_out(dir: &Path, name: &str, bytes: &[u8], manifest: &mut Manifest<serde_json::Value>) -> CmdResult {
    std::fs::create_dir_all(dir)
        .with_context(|| format!("creating {}", dir.display()))
        .config()?;
    let path = dir.join(name);
    std::fs::write(&path, bytes)
        .with_context(|| format!("writing {}", path.display()))
        .config()?;
    manifest.record(name, bytes);
    Ok(())
}

fn write_manifest(dir: &Path, name: &str, manifest: &Manifest<serde_json::Value>) -> CmdResult {
    let mut text = serde_json::to_vec_pretty(manifest).config()?;
    text.push(b'\n');
    let path = dir.join(name);
    std::fs::write(&path, text)
        .with_context(|| format!("writing {}", path.display()))
        .config()
}

fn manifest(command: &str, cfg: &RunConfig, params: &ModelParams) -> CmdResult<Manifest<serde_json::Value>> {
    Manifest::new(command, serde_json::json!({ "run": cfg, "params": params })).config()
}

fn csv<F>(f: F) -> Vec<u8>
where
    F: FnOnce(&mut Vec<u8>) -> std::io::Result<()>,
{
    let mut buf = Vec::new();
    f(&mut buf).expect("writing to memory cannot fail");
    buf
}

#[derive(Serialize)]
struct CoefficientReport {
    potential: PotentialSpec,
    gamma: f64,
    params: ModelParams,
    indicators: dwell4::model::RegimeIndicators,
    version: &'static str,
}

fn coefficients(
    ctx: &Session,
    args: PotentialArgs,
    n_atoms: Option<f64>,
    out: Option<&Path>,
    wavefunctions: Option<&Path>,
) -> CmdResult {
    let mut cfg = load(&args)?;
    let n_atoms = n_atoms.or(cfg.n_atoms);
    let (Some(spec), Some(gamma)) = (cfg.potential, cfg.gamma) else {
        return Err(Failure::Config(anyhow!("coefficients needs --v0 and --gamma")));
    };
    let p = resolve_params(ctx, &mut cfg)?;
    let used = cfg.potential.unwrap_or(spec);
    let report = CoefficientReport {
        potential: used,
        gamma,
        params: p,
        indicators: classify_regime(&p, Some(used.v0), n_atoms),
        version: env!("CARGO_PKG_VERSION"),
    };
    let mut text = serde_json::to_string_pretty(&report).config()?;
    text.push('\n');
    match out {
        Some(path) => std::fs::write(path, text)
            .with_context(|| format!("writing {}", path.display()))
            .config()?,
        None => print!("{text}"),
    }
    if let Some(path) = wavefunctions {
        let sol = solve_spectrum(&used).numerical()?;
        let bytes = csv(|b| write_wavefunctions_csv(&sol, b));
        std::fs::write(path, bytes)
            .with_context(|| format!("writing {}", path.display()))
            .config()?;
    }
    Ok(())
}

fn initial_state(flag: Option<String>, cfg: &RunConfig) -> CmdResult<PendulumState> {
    match flag {
        Some(s) => parse_state(&s).config(),
        None => cfg
            .initial
            .ok_or_else(|| Failure::Config(anyhow!("no initial state: pass --initial or set `initial`"))),
    }
}

fn simulate(
    ctx: &Session,
    args: PotentialArgs,
    ia: IntegratorArgs,
    initial: Option<String>,
    out_dir: &Path,
) -> CmdResult {
    let mut cfg = load(&args)?;
    apply_integrator(&mut cfg, &ia);
    cfg.initial = Some(initial_state(initial, &cfg)?);
    let p = resolve_params(ctx, &mut cfg)?;
    let s0 = cfg.initial.expect("set above");
    let tr = integrate(&s0, &p, &cfg.integrator).config()?;

    let mut m = manifest("simulate", &cfg, &p)?;
    m.summary = serde_json::json!({
        "termination": tr.termination,
        "max_energy_drift": tr.max_energy_drift,
        "samples": tr.len(),
        "accepted_steps": tr.accepted_steps,
        "rejected_steps": tr.rejected_steps,
        "resolved_integrator": tr.config,
        "failure": tr.failure,
    });
    write_out(out_dir, "trajectory.csv", &csv(|b| output::write_trajectory_csv(&tr, b)), &mut m)?;
    write_manifest(out_dir, "trajectory.manifest.json", &m)?;
    match tr.termination {
        Termination::Completed | Termination::BoundaryHit => Ok(()),
        Termination::StepFailure => Err(Failure::Numerical(anyhow!(
            "integration failed: {}",
            tr.failure.unwrap_or_default()
        ))),
        Termination::EnergyDrift => Err(Failure::Numerical(anyhow!(
            "energy drift {:e} exceeds the audit bound {:e}",
            tr.max_energy_drift,
            tr.config.energy_audit_bound
        ))),
    }
}

fn fixed_points(
    ctx: &Session,
    args: PotentialArgs,
    z2: Option<f64>,
    scan: Option<String>,
    intervals: Option<usize>,
    out_dir: &Path,
) -> CmdResult {
    let mut cfg = load(&args)?;
    if z2.is_some() {
        cfg.z2 = z2;
    }
    if let Some(s) = scan {
        cfg.scan_z0 = Some(s.parse::<ScanRange>().config()?);
    }
    if intervals.is_some() {
        cfg.scan_intervals = intervals;
    }
    let z0_values = match cfg.scan_z0 {
        Some(r) => r.values().config()?,
        None => vec![0.0],
    };
    let z2 = cfg.z2.unwrap_or(0.0);
    if !(z2.abs() < 1.0) {
        return Err(Failure::Config(anyhow!("z2 must lie in (-1, 1), got {z2}")));
    }
    let bound = 0.5 * (1.0 + z2);
    if let Some(z) = z0_values.iter().find(|z| z.abs() >= bound) {
        return Err(Failure::Config(anyhow!("frozen z0 = {z} is outside |z0| < {bound}")));
    }
    let intervals = cfg.scan_intervals.unwrap_or(DEFAULT_SCAN_INTERVALS);
    let p = resolve_params(ctx, &mut cfg)?;

    let analytic = analytic_fixed_points(&p).numerical()?;
    let effective: Vec<_> = z0_values
        .par_iter()
        .map(|&z0| effective_fixed_points_with(&p, z2, z0, intervals))
        .collect();
    let root_counts: Vec<(f64, usize)> = z0_values.iter().zip(&effective).map(|(z, r)| (*z, r.len())).collect();
    let effective: Vec<_> = effective.into_iter().flatten().collect();

    let mut m = manifest("fixed-points", &cfg, &p)?;
    let details = serde_json::json!({
        "z2": z2,
        "analytic": analytic,
        "pitchfork": pitchfork_points(&p, z2),
        "critical_imbalance": critical_imbalance(&p, z2).ok(),
        "root_counts": root_counts,
    });
    m.summary = serde_json::json!({ "root_counts": root_counts });
    write_out(out_dir, "fixed_points.csv", &csv(|b| output::write_fixed_points_csv(&analytic, b)), &mut m)?;
    write_out(out_dir, "effective.csv", &csv(|b| output::write_effective_csv(&effective, b)), &mut m)?;
    let mut text = serde_json::to_vec_pretty(&details).config()?;
    text.push(b'\n');
    write_out(out_dir, "fixed_points.json", &text, &mut m)?;
    write_manifest(out_dir, "fixed_points.manifest.json", &m)
}

fn parse_axis(s: &str, log: bool) -> CmdResult<Axis> {
    let v = parse_list(s, ':').config()?;
    let [min, max, count] = v[..] else {
        return Err(Failure::Config(anyhow!("expected min:max:count, got `{s}`")));
    };
    if !(count >= 0.0 && count.fract() == 0.0) {
        return Err(Failure::Config(anyhow!("count must be a whole number, got {count}")));
    }
    Ok(Axis {
        min,
        max,
        count: count as usize,
        log,
    })
}

fn regime_map(
    ctx: &Session,
    config: Option<&Path>,
    v0_range: Option<String>,
    gamma_range: Option<String>,
    grid_points: Option<usize>,
    domain_halfwidth: Option<f64>,
    out_dir: &Path,
) -> CmdResult {
    let mut cfg = RunConfig::load(config).config()?;
    let mut grid = cfg.sweep.unwrap_or_default();
    if let Some(s) = v0_range {
        grid.v0 = parse_axis(&s, false)?;
    }
    if let Some(s) = gamma_range {
        grid.gamma = parse_axis(&s, true)?;
    }
    if let Some(n) = grid_points {
        grid.grid_points = n;
    }
    if let Some(l) = domain_halfwidth {
        grid.domain_halfwidth = l;
    }
    grid.spec(grid.v0.min).validate().config()?;
    cfg.sweep = Some(grid);

    let map = sweep(&grid, &ctx.cache).config()?;
    let curves = boundary_curves(&map);
    let failed: Vec<_> = map
        .columns
        .iter()
        .filter_map(|c| c.integrals.as_ref().err().map(|e| (c.v0, e.clone())))
        .collect();
    let mut m = Manifest::new("regime-map", serde_json::json!({ "run": cfg })).config()?;
    m.summary = serde_json::json!({ "cells": map.cells.len(), "failed_columns": failed });
    write_out(out_dir, "regime_map.csv", &csv(|b| output::write_map_csv(&map, b)), &mut m)?;
    let mut text = serde_json::to_vec_pretty(&curves).config()?;
    text.push(b'\n');
    write_out(out_dir, "boundaries.json", &text, &mut m)?;
    write_manifest(out_dir, "regime_map.manifest.json", &m)
}

fn plane_of(flag: Option<String>, cfg: &RunConfig) -> CmdResult<(Variable, Variable)> {
    match flag {
        Some(s) => parse_plane(&s).config(),
        None => Ok(cfg.plane.unwrap_or((Variable::Z1, Variable::Theta1))),
    }
}

/// Starting points on the two lines `θ1 = 0, π` of the `(z1, θ1)` plane.
fn default_portrait_grid(z0: f64, z2: f64) -> Vec<PendulumState> {
    let half = 0.5 * (1.0 - z2);
    let mut out = Vec::new();
    for theta1 in [0.0, std::f64::consts::PI] {
        for k in 0..10 {
            let z1 = half * (-0.9 + 0.2 * k as f64);
            out.push(PendulumState::new(z0, 0.0, z1, theta1, z2, 0.0));
        }
    }
    out
}

#[allow(clippy::too_many_arguments)]
fn portrait(
    ctx: &Session,
    args: PotentialArgs,
    ia: IntegratorArgs,
    z0: Option<f64>,
    z2: Option<f64>,
    plane: Option<String>,
    out_dir: &Path,
) -> CmdResult {
    let mut cfg = load(&args)?;
    apply_integrator(&mut cfg, &ia);
    if z2.is_some() {
        cfg.z2 = z2;
    }
    let plane = plane_of(plane, &cfg)?;
    cfg.plane = Some(plane);
    if cfg.initial_conditions.is_empty() || z0.is_some() {
        cfg.initial_conditions = default_portrait_grid(z0.unwrap_or(0.0), cfg.z2.unwrap_or(0.0));
    }
    for s in &cfg.initial_conditions {
        s.check_bounds().config()?;
    }
    let p = resolve_params(ctx, &mut cfg)?;
    let curves = phase_portrait(&cfg.initial_conditions, &p, &cfg.integrator);

    let mut m = manifest("portrait", &cfg, &p)?;
    let mut status = Vec::new();
    for (i, c) in curves.iter().enumerate() {
        let name = format!("portrait_{i:03}.csv");
        if let Some(tr) = &c.trajectory {
            write_out(out_dir, &name, &csv(|b| output::write_trajectory_csv(tr, b)), &mut m)?;
        }
        status.push(serde_json::json!({
            "file": c.trajectory.as_ref().map(|_| name),
            "initial": c.initial,
            "termination": c.termination(),
            "error": c.error,
        }));
    }
    m.summary = serde_json::json!({ "plane": [plane.0, plane.1], "curves": status });
    write_manifest(out_dir, "portrait.manifest.json", &m)
}

fn poincare(
    ctx: &Session,
    args: PotentialArgs,
    ia: IntegratorArgs,
    initial: Option<String>,
    section: (Option<Variable>, Option<f64>, Option<Direction>),
    plane: Option<String>,
    out_dir: &Path,
) -> CmdResult {
    let mut cfg = load(&args)?;
    apply_integrator(&mut cfg, &ia);
    cfg.initial = Some(initial_state(initial, &cfg)?);
    let base = cfg.section.unwrap_or(Section {
        variable: Variable::Theta2,
        value: 0.0,
        direction: Direction::Both,
    });
    let sec = Section {
        variable: section.0.unwrap_or(base.variable),
        value: section.1.unwrap_or(base.value),
        direction: section.2.unwrap_or(base.direction),
    };
    cfg.section = Some(sec);
    let plane = plane_of(plane, &cfg)?;
    cfg.plane = Some(plane);
    let p = resolve_params(ctx, &mut cfg)?;
    let tr = integrate(&cfg.initial.expect("set above"), &p, &cfg.integrator).config()?;
    let points = poincare_section(&tr, &sec, plane).numerical()?;

    let mut m = manifest("poincare", &cfg, &p)?;
    m.summary = serde_json::json!({
        "termination": tr.termination,
        "max_energy_drift": tr.max_energy_drift,
        "crossings": points.len(),
        "hull_area": convex_hull_area(&points),
    });
    let header = (plane.0.name(), plane.1.name());
    write_out(out_dir, "section.csv", &csv(|b| output::write_points_csv(header, &points, b)), &mut m)?;
    write_manifest(out_dir, "section.manifest.json", &m)
}
