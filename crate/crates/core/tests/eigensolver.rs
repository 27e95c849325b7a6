use dwell4::eigensolver::{
    build_localized_modes, coefficient_integrals, coefficient_integrals_right,
    compute_model_params, hopping_integral, integrals_for, solve_spectrum, PotentialSpec,
};

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

#[test]
fn harmonic_level_spacing_at_moderate_barrier() {
    let c = integrals_for(&PotentialSpec::new(8.75)).unwrap();
    let harmonic = 4.0 / std::f64::consts::PI * 8.75f64.sqrt();
    assert!(rel(c.e1 - c.e0, harmonic) < 0.1, "{} vs {harmonic}", c.e1 - c.e0);
}

#[test]
fn ground_doublet_tunnels_slower_than_excited() {
    let c = integrals_for(&PotentialSpec::new(3.75)).unwrap();
    assert!(c.j0 < c.j1);
}

#[test]
fn ground_state_even_first_excited_odd() {
    for v0 in [0.8, 3.0, 12.0] {
        let sol = solve_spectrum(&PotentialSpec::new(v0)).unwrap();
        let n = sol.grid.len();
        let (g, x) = (&sol.wavefunctions[0], &sol.wavefunctions[1]);
        for i in 0..n / 2 {
            assert!((g[i] - g[n - 1 - i]).abs() < 1e-12);
            assert!((x[i] + x[n - 1 - i]).abs() < 1e-12);
        }
    }
}

#[test]
fn deep_ground_mode_is_localized() {
    let sol = solve_spectrum(&PotentialSpec::new(12.0)).unwrap();
    let m = build_localized_modes(&sol).unwrap();
    let half = sol.grid.len() / 2;
    let w: f64 = sol.dz * m.psi_l0[..half].iter().map(|x| x * x).sum::<f64>();
    assert!(w > 0.99, "{w}");
}

/// Prototype values from an independent three-point-stencil solver on a
/// 2048-point grid; the two discretizations agree to well under 1%.
#[test]
fn chi_values_match_independent_solver() {
    let cases = [
        (3.75, 2.5e-5, [0.01305, 2.08e-4, 1.32e-5]),
        (5.0, 2.5e-3, [3.912, 0.0450, 1.25e-3]),
        (8.75, 2.5e-2, [596.4, 4.294, 0.01119]),
    ];
    for (v0, gamma, expect) in cases {
        let sol = solve_spectrum(&PotentialSpec::new(v0)).unwrap();
        let m = build_localized_modes(&sol).unwrap();
        let p = compute_model_params(&sol, &m, gamma).unwrap();
        let got = [p.chi0(), p.chi1(), p.chi01()];
        for (g, e) in got.iter().zip(expect) {
            assert!(rel(*g, e) < 0.01, "v0 = {v0}: {got:?} vs {expect:?}");
        }
    }
}

#[test]
fn hopping_from_splitting_equals_tunneling_integral() {
    for v0 in [3.0, 5.0, 8.75, 12.0, 16.0, 20.0] {
        let sol = solve_spectrum(&PotentialSpec::new(v0)).unwrap();
        let m = build_localized_modes(&sol).unwrap();
        let c = coefficient_integrals(&sol, &m).unwrap();
        for (level, j) in [(0, c.j0), (1, c.j1)] {
            let integral = hopping_integral(&sol, &m, level);
            assert!(rel(integral, j) < 1e-8, "v0 = {v0}, level {level}: {integral:e} vs {j:e}");
        }
    }
}

#[test]
fn doubling_the_grid_changes_coefficients_below_one_ppm() {
    for v0 in [3.75, 5.0, 8.75] {
        let coarse = integrals_for(&PotentialSpec::new(v0)).unwrap();
        let mut spec = PotentialSpec::new(v0);
        spec.grid_points *= 2;
        let fine = integrals_for(&spec).unwrap();
        let pairs = [
            (coarse.e0, fine.e0),
            (coarse.e1, fine.e1),
            (coarse.j0, fine.j0),
            (coarse.j1, fine.j1),
            (coarse.u0_per_gamma, fine.u0_per_gamma),
            (coarse.u1_per_gamma, fine.u1_per_gamma),
            (coarse.u01_per_gamma, fine.u01_per_gamma),
        ];
        for (k, (a, b)) in pairs.iter().enumerate() {
            assert!(rel(*a, *b) < 1e-6, "v0 = {v0}, field {k}: {a:e} vs {b:e}");
        }
    }
}

#[test]
fn left_and_right_modes_give_identical_coefficients() {
    let sol = solve_spectrum(&PotentialSpec::new(5.0)).unwrap();
    let m = build_localized_modes(&sol).unwrap();
    let l = coefficient_integrals(&sol, &m).unwrap();
    let r = coefficient_integrals_right(&sol, &m).unwrap();
    for (a, b) in [
        (l.u0_per_gamma, r.u0_per_gamma),
        (l.u1_per_gamma, r.u1_per_gamma),
        (l.u01_per_gamma, r.u01_per_gamma),
    ] {
        assert!(rel(a, b) < 1e-10);
    }
}

#[test]
fn hoppings_decrease_with_barrier_height() {
    let hops: Vec<(f64, f64)> = (0..=17)
        .map(|k| {
            let c = integrals_for(&PotentialSpec::new(3.0 + k as f64)).unwrap();
            (c.j0, c.j1)
        })
        .collect();
    for w in hops.windows(2) {
        assert!(w[1].0 < w[0].0 && w[1].1 < w[0].1, "{w:?}");
    }
}

#[test]
fn deep_well_interaction_ratio() {
    let c = integrals_for(&PotentialSpec::new(20.0)).unwrap();
    assert!(rel(c.u1_per_gamma / c.u0_per_gamma, 0.75) < 0.05);
    assert!(c.j1 > c.j0);
}

#[test]
fn zero_gamma_has_no_interactions() {
    let sol = solve_spectrum(&PotentialSpec::new(5.0)).unwrap();
    let m = build_localized_modes(&sol).unwrap();
    let p = compute_model_params(&sol, &m, 0.0).unwrap();
    assert_eq!((p.nu0, p.nu1, p.nu01), (0.0, 0.0, 0.0));
    assert!(p.j0 > 0.0 && p.j1 > 0.0);
    assert!(compute_model_params(&sol, &m, -1.0).is_err());
}
