//! End-to-end acceptance checks. Each criterion prints one PASS/FAIL line;
//! the binary exits non-zero if any criterion fails.

mod common;

use std::f64::consts::{PI, TAU};
use std::process::Command;
use std::time::Instant;

use common::*;
use dwell4::dynamics::{detect_self_trapping, estimate_frequency, slow_frequency, Termination, Variable};
use dwell4::eigensolver::{integrals_for, PotentialSpec};
use dwell4::fixed_points::{
    analytic_fixed_points, critical_imbalance, effective_fixed_points, pitchfork_points,
    EffectiveStability, Stability,
};
use dwell4::model::{
    classify_regime, eom_full, hamiltonian, normal_mode_frequencies, Model, PendulumState, Regime,
};
use dwell4::ModelParams;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

fn ensure(ok: bool, msg: impl Into<String>) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn coefficient_reproduction() -> Outcome {
    let quoted = [
        ("A", A, [1.3e-2, 6.6e-6, 2.1e-4]),
        ("B", B, [3.9, 4.5e-2, 6.2e-4]),
        ("C", C, [600.0, 4.3, 5.6e-3]),
    ];
    let mut misses = Vec::new();
    let mut slowest = 0.0f64;
    for (name, pt, want) in quoted {
        let start = Instant::now();
        let p = params_at(pt);
        slowest = slowest.max(start.elapsed().as_secs_f64());
        let got = [p.chi0(), p.chi1(), p.chi01()];
        for ((label, g), w) in ["chi0", "chi1", "chi01"].iter().zip(got).zip(want) {
            if rel(g, w) > 0.2 {
                misses.push(format!("{name}.{label} = {g:.3e} vs {w:.1e}"));
            }
        }
    }
    ensure(slowest < 10.0, format!("slowest point took {slowest:.1} s"))?;
    ensure(misses.is_empty(), misses.join(", "))?;
    Ok(format!("all nine ratios within 20%, slowest point {slowest:.2} s"))
}

fn gradient_consistency() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let de = rng.random_range(0.5..3.0);
        let j0 = rng.random_range(1e-3..0.2);
        let nu0 = rng.random_range(1e-3..1.0);
        let p = ModelParams::new(
            1.0,
            1.0 + de,
            j0,
            j0 * rng.random_range(1.0..5.0),
            nu0,
            nu0 * rng.random_range(0.5..1.0),
            de * rng.random_range(1e-3..0.3),
        );
        let z2: f64 = rng.random_range(-0.9..0.9);
        let h0 = 0.5 * (1.0 + z2) - 0.02;
        let h1 = 0.5 * (1.0 - z2) - 0.02;
        let s = PendulumState::new(
            rng.random_range(-h0..h0),
            rng.random_range(-PI..PI),
            rng.random_range(-h1..h1),
            rng.random_range(-PI..PI),
            z2,
            rng.random_range(-PI..PI),
        );
        let f = eom_full(&s, &p).unwrap();
        let x = s.to_array();
        let h = 1e-6;
        let partial = |i: usize| {
            let (mut a, mut b) = (x, x);
            a[i] += h;
            b[i] -= h;
            (hamiltonian(&PendulumState::from(a), &p).unwrap() - hamiltonian(&PendulumState::from(b), &p).unwrap())
                / (2.0 * h)
        };
        let scale = f.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        for level in 0..3 {
            let (zi, ti) = (2 * level, 2 * level + 1);
            worst = worst.max((f[zi] + partial(ti)).abs() / scale);
            worst = worst.max((f[ti] - partial(zi)).abs() / scale);
        }
    }
    let secs = start.elapsed().as_secs_f64();
    ensure(worst < 1e-6, format!("worst relative error {worst:.2e}"))?;
    ensure(secs < 5.0, format!("took {secs:.1} s"))?;
    Ok(format!("worst relative error {worst:.2e} over 1000 states in {secs:.2} s"))
}

fn conservation() -> Outcome {
    let start = Instant::now();
    let mut notes = Vec::new();
    let mut problems = Vec::new();
    for (name, pt) in [("A", A), ("B", B), ("C", C)] {
        let p = params_at(pt);
        let s0 = PendulumState::new(0.1, 0.0, 0.05, 0.0, 0.0, 0.0);

        let t_fast = 1000.0 * TAU / p.delta_e;
        let tr = run(&p, s0, t_fast, t_fast / 5000.0, Model::Full);
        let drift = tr.max_energy_drift;
        if tr.termination != Termination::Completed || drift >= 1e-8 {
            problems.push(format!("{name}: drift {drift:.2e} ({:?})", tr.termination));
        }

        let t_slow = 20.0 * TAU / slow_frequency(&p, 0.0);
        let tr = run(&p, s0, t_slow, t_slow / 20000.0, Model::Full);
        let dz2 = tr.series(Variable::Z2).iter().fold(0.0f64, |m, z| m.max((z - s0.z2).abs()));
        if dz2 >= 1e-2 {
            problems.push(format!("{name}: z2 wandered by {dz2:.2e} (chi01 = {:.2e})", p.chi01()));
        }
        let k = slope(&tr.times, &tr.series(Variable::Theta2));
        if rel(k.abs(), p.delta_e) >= 0.05 {
            problems.push(format!("{name}: theta2 slope {k:.4} vs delta_e {:.4}", p.delta_e));
        }

        let tr = run(&p.decoupled(), s0, t_fast, t_fast / 1000.0, Model::Full);
        if !tr.states.iter().all(|s| s.z2 == s0.z2) {
            problems.push(format!("{name}: z2 moved with nu01 = 0"));
        }
        notes.push(format!("{name} drift {drift:.1e} dz2 {dz2:.1e}"));
    }
    let secs = start.elapsed().as_secs_f64();
    if secs >= 60.0 {
        problems.push(format!("took {secs:.1} s"));
    }
    ensure(problems.is_empty(), problems.join(", "))?;
    Ok(format!("{} in {secs:.1} s", notes.join(", ")))
}

fn fixed_point_suite() -> Outcome {
    for (name, pt) in [("A", A), ("B", B), ("C", C)] {
        let reports = analytic_fixed_points(&params_at(pt)).map_err(|e| e.to_string())?;
        ensure(
            reports.iter().all(|r| !r.exists && r.z2_0.abs() > 1.0),
            format!("{name}: a symmetric fixed point exists"),
        )?;
    }

    let syn = ModelParams::new(0.0, 1.0, 0.01, 0.02, 4.0, 4.0, 1.5);
    let reports = analytic_fixed_points(&syn).map_err(|e| e.to_string())?;
    let centre = reports
        .iter()
        .find(|r| r.exists && r.stability == Some(Stability::Center))
        .ok_or("no existing centre branch for the synthetic set")?;
    let tr = run(&syn, centre.location, 100.0, 0.5, Model::Full);
    let x0 = centre.location.to_array();
    let dev = tr
        .states
        .iter()
        .flat_map(|s| {
            let x = s.to_array();
            [0, 1, 2, 3, 4].map(|i| (x[i] - x0[i]).abs())
        })
        .fold(0.0f64, f64::max);
    ensure(dev < 1e-6, format!("branch {:?} drifted by {dev:.2e}", centre.branch))?;

    let integrals = integrals_for(&PotentialSpec::new(B.0)).map_err(|e| e.to_string())?;
    let (mut lo, mut hi) = (1e-6, 1e-1);
    ensure(
        !pitchfork_points(&integrals.with_gamma(lo), 0.0).exists && pitchfork_points(&integrals.with_gamma(hi), 0.0).exists,
        "pitchfork bracket does not straddle the coalescence",
    )?;
    for _ in 0..200 {
        let mid = (lo * hi).sqrt();
        if pitchfork_points(&integrals.with_gamma(mid), 0.0).exists {
            hi = mid;
        } else {
            lo = mid;
        }
        if hi / lo - 1.0 < 1e-12 {
            break;
        }
    }
    let chi0 = integrals.with_gamma(hi).chi0();
    ensure((chi0 - 1.0).abs() < 1e-6, format!("coalescence at chi0 = {chi0}"))?;
    Ok(format!(
        "A-C have no symmetric points, branch {:?} held to {dev:.1e}, coalescence at chi0 - 1 = {:.1e}",
        centre.branch,
        chi0 - 1.0
    ))
}

fn effective_topology() -> Outcome {
    let p = params_at(C);
    let at0 = effective_fixed_points(&p, 0.0, 0.0);
    ensure(at0.len() == 4, format!("{} roots at z0 = 0", at0.len()))?;

    let z0s: Vec<f64> = (0..=450).map(|k| k as f64 * 1e-3).collect();
    let counts: Vec<usize> = z0s.iter().map(|&z| effective_fixed_points(&p, 0.0, z).len()).collect();
    ensure(
        counts.windows(2).all(|w| w[1] <= w[0]) && counts[counts.len() - 1] == 2,
        "root count is not a monotone 4 -> 2 drop",
    )?;
    let k = counts.iter().position(|&c| c == 2).ok_or("no drop to 2")?;
    // The merge ordinate is where the unstable and outer θ1 = π roots meet.
    let last4 = effective_fixed_points(&p, 0.0, z0s[k - 1]);
    let pi_roots: Vec<f64> = last4.iter().filter(|r| r.theta1_0 != 0.0).map(|r| r.z1_0).collect();
    let merge = pi_roots
        .iter()
        .filter(|z| **z < 0.0)
        .copied()
        .fold((f64::MAX, f64::MIN), |(a, b), z| (a.min(z), b.max(z)));
    let ordinate = 0.5 * (merge.0 + merge.1);
    let zc = critical_imbalance(&p, 0.0).map_err(|e| e.to_string())?;
    let closed_form = 0.5 * (1.0 - (1.0 / p.chi1()).powf(2.0 / 3.0)).sqrt();
    ensure(
        (ordinate.abs() - zc).abs() < 1e-3 && (zc - closed_form).abs() < 1e-12,
        format!("merge at {ordinate:.4}, closed form {zc:.4}"),
    )?;

    for &z0 in &[0.05, 0.1, 0.2, -0.1] {
        let stable0 = effective_fixed_points(&p, 0.0, z0)
            .into_iter()
            .find(|r| r.theta1_0 == 0.0 && r.stability == EffectiveStability::Stable)
            .ok_or("no stable theta1 = 0 root")?;
        ensure(
            stable0.z1_0.signum() == -z0.signum(),
            format!("sign law fails at z0 = {z0}: z1 = {}", stable0.z1_0),
        )?;
    }
    Ok(format!("4 -> 2 at z0 = {:.3}, merge {:.4} vs closed form {zc:.4}", z0s[k], ordinate.abs()))
}

fn phenomenology() -> Outcome {
    let p = params_at(B);
    let t_end = 5.0 * TAU / slow_frequency(&p, 0.0);
    let small = run(&p, state(0.05, 0.0, 0.0), t_end, t_end / 5000.0, Model::Full);
    let large = run(&p, state(0.45, 0.0, 0.0), t_end, t_end / 5000.0, Model::Full);
    for tr in [&small, &large] {
        ensure(tr.termination == Termination::Completed, format!("B run ended {:?}", tr.termination))?;
    }
    let (s, l) = (detect_self_trapping(&small, Variable::Z0), detect_self_trapping(&large, Variable::Z0));
    ensure(!s.trapped, format!("z0(0) = 0.05 trapped, mean {:.3}", s.time_mean))?;
    ensure(l.trapped, format!("z0(0) = 0.45 not trapped, mean {:.3}", l.time_mean))?;

    let c = params_at(C);
    let mut counts = Vec::new();
    let mut lower_island = Vec::new();
    for z0 in [0.0, 0.1, 0.2] {
        counts.push(effective_fixed_points(&c, 0.0, z0).len());
        let start = PendulumState::new(z0, 0.0, -0.486, PI, 0.0, 0.0);
        let tr = run(&c, start, 2000.0, 0.5, Model::Full);
        lower_island.push(detect_self_trapping(&tr, Variable::Z1).trapped);
    }
    ensure(counts == [4, 4, 2], format!("root counts {counts:?}"))?;
    ensure(
        lower_island == [true, true, false],
        format!("lower theta1 = pi island trapped: {lower_island:?}"),
    )?;
    Ok(format!(
        "B means {:.3} / {:.3}, C root counts {counts:?}, lower island {lower_island:?}",
        s.time_mean, l.time_mean
    ))
}

fn frequency_physics() -> Outcome {
    let mut worst = 0.0f64;
    for pt in [A, B] {
        let p = params_at(pt);
        for z2 in [0.0, 0.6] {
            let m = normal_mode_frequencies(&p, z2).map_err(|e| e.to_string())?;
            for (level, omega) in [(0, m.omega_minus), (1, m.omega_plus)] {
                let s = normal_mode_state(&p, z2, omega, level, 1e-3);
                let t_end = 30.0 * TAU / omega;
                let tr = run(&p, s, t_end, t_end / 20000.0, Model::Full);
                let v = [Variable::Z0, Variable::Z1][level];
                let f = estimate_frequency(&tr, v).map_err(|e| e.to_string())?;
                worst = worst.max(rel(f.frequency, omega));
            }
        }
    }
    ensure(worst < 0.02, format!("worst normal-mode mismatch {worst:.2e}"))?;

    // Parameter sets from the eigensolver across the swept window, keeping
    // those the classifier accepts.
    let columns: Vec<(f64, _)> = (0..=30)
        .map(|k| {
            let v0 = 3.0 + 0.3 * k as f64;
            (v0, integrals_for(&PotentialSpec::new(v0)).unwrap())
        })
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let (mut tested, mut unstable) = (0, 0);
    while tested < 1000 {
        let (v0, integrals) = &columns[rng.random_range(0..columns.len())];
        let p = integrals.with_gamma(10f64.powf(rng.random_range(-6.0..-1.0)));
        if classify_regime(&p, Some(*v0), None).regime == Regime::Invalid {
            continue;
        }
        let z2 = rng.random_range(-0.95..0.95);
        let Ok(m) = normal_mode_frequencies(&p, z2) else {
            unstable += 1;
            continue;
        };
        tested += 1;
        ensure(
            m.omega_minus < m.omega0 && m.omega0 < m.omega1 && m.omega1 < m.omega_plus,
            format!("ordering fails at V0 = {v0}, gamma = {:.2e}, z2 = {z2:.3}: {m:?}", p.nu0 / integrals.u0_per_gamma),
        )?;
    }

    let p = params_at(B);
    let s = state(0.1, 0.0, 0.6);
    let t_end = 10.0 * TAU / slow_frequency(&p, 0.6);
    let four = run(&p, s, t_end, t_end / 20000.0, Model::Full);
    let two = run(&p, s, t_end, t_end / 20000.0, Model::TwoMode);
    let f4 = estimate_frequency(&four, Variable::Z0).map_err(|e| e.to_string())?.frequency;
    let f2 = estimate_frequency(&two, Variable::Z0).map_err(|e| e.to_string())?.frequency;
    ensure(f4 < f2, format!("four-mode {f4:.6} not below two-mode {f2:.6}"))?;
    Ok(format!(
        "worst mismatch {worst:.1e}, ordering holds on 1000 sets ({unstable} skipped with no real lowest mode), B shift {:.2e}",
        f4 - f2
    ))
}

fn deep_well_limits() -> Outcome {
    let v0 = 20.0;
    let p = integrals_for(&PotentialSpec::new(v0)).map_err(|e| e.to_string())?.with_gamma(1.0);
    let ratio = p.nu1 / p.nu0;
    let harmonic = 4.0 / PI * v0.sqrt();
    ensure(rel(ratio, 0.75) < 0.05, format!("U1/U0 = {ratio:.4}"))?;
    ensure(p.j1 > p.j0, "J1 <= J0")?;
    ensure(rel(p.delta_e, harmonic) < 0.1, format!("delta_e {:.4} vs {harmonic:.4}", p.delta_e))?;
    Ok(format!("U1/U0 = {ratio:.4}, delta_e = {:.4} vs {harmonic:.4}", p.delta_e))
}

fn determinism() -> Outcome {
    let bin = env!("CARGO_BIN_EXE_dwell4");
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let cache = dir.path().join("cache.json");
    let runs: [&[&str]; 4] = [
        &["simulate", "--v0", "5", "--gamma", "2.5e-3", "--initial", "0.1,0,0,0,0.6,0", "--t-end", "500"],
        &["fixed-points", "--v0", "8.75", "--gamma", "2.5e-2", "--z2", "0", "--scan-z0", "0:0.3:0.05"],
        &["regime-map", "--v0-range", "4:8:3", "--gamma-range", "1e-4:1e-2:4", "--grid-points", "512"],
        &["portrait", "--v0", "5", "--gamma", "2.5e-3", "--t-end", "300", "--z0", "0.1"],
    ];
    let mut files = 0;
    for args in runs {
        let mut outputs = Vec::new();
        for rep in 0..2 {
            let out = dir.path().join(format!("{}-{rep}", args[0]));
            let status = Command::new(bin)
                .args(args)
                .arg("--out-dir")
                .arg(&out)
                .env("DWELL4_CACHE", &cache)
                .output()
                .map_err(|e| e.to_string())?;
            ensure(status.status.success(), format!("{} failed: {}", args[0], String::from_utf8_lossy(&status.stderr)))?;
            let mut names: Vec<_> = std::fs::read_dir(&out)
                .map_err(|e| e.to_string())?
                .map(|e| e.unwrap().file_name())
                .collect();
            names.sort();
            let contents: Vec<_> = names.iter().map(|n| (n.clone(), std::fs::read(out.join(n)).unwrap())).collect();
            outputs.push(contents);
        }
        ensure(outputs[0] == outputs[1], format!("{} outputs differ between runs", args[0]))?;
        files += outputs[0].len();
    }
    Ok(format!("{files} files byte-identical across repeated runs"))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 9] = [
        ("coefficient reproduction", coefficient_reproduction),
        ("gradient consistency", gradient_consistency),
        ("conservation", conservation),
        ("fixed points", fixed_point_suite),
        ("effective fixed-point topology", effective_topology),
        ("self-trapping and portraits", phenomenology),
        ("frequencies", frequency_physics),
        ("deep-well limits", deep_well_limits),
        ("determinism", determinism),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let outcome = std::panic::catch_unwind(check).unwrap_or_else(|_| Err("panicked".into()));
        match outcome {
            Ok(detail) => println!("PASS {}. {name}: {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL {}. {name}: {detail}", i + 1);
            }
        }
    }
    println!("{} of {} acceptance criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
