use dwell4::model::{
    classify_regime, eom_averaged, eom_full, eom_linearized, from_pendulum, hamiltonian,
    lab_hamiltonian, normal_mode_frequencies, to_pendulum, PendulumState, Regime,
};
use dwell4::ModelParams;
use proptest::prelude::*;

fn point_b() -> ModelParams {
    ModelParams::new(2.5455, 4.9966, 9.12e-4, 0.05355, 7.135e-3, 4.82e-3, 3.06e-3)
}

fn params_strategy() -> impl Strategy<Value = ModelParams> {
    (
        0.5f64..3.0,
        1e-3f64..0.2,
        1.0f64..5.0,
        1e-3f64..1.0,
        0.5f64..1.0,
        1e-3f64..0.3,
    )
        .prop_map(|(de, j0, jr, nu0, ur, c01)| {
            ModelParams::new(1.0, 1.0 + de, j0, j0 * jr, nu0, nu0 * ur, c01 * de)
        })
}

/// Interior states at least `margin` away from every bound.
fn state_strategy(margin: f64) -> impl Strategy<Value = PendulumState> {
    (
        -0.9f64..0.9,
        -1.0f64..1.0,
        -1.0f64..1.0,
        -10.0f64..10.0,
        -10.0f64..10.0,
        -10.0f64..10.0,
    )
        .prop_map(move |(z2, u0, u1, t0, t1, t2)| {
            let h0 = 0.5 * (1.0 + z2) - margin;
            let h1 = 0.5 * (1.0 - z2) - margin;
            PendulumState::new(u0 * h0, t0, u1 * h1, t1, z2, t2)
        })
}

fn fd_field(s: &PendulumState, p: &ModelParams, h: f64) -> [f64; 6] {
    let x = s.to_array();
    let partial = |i: usize| {
        let mut a = x;
        let mut b = x;
        a[i] += h;
        b[i] -= h;
        let ha = hamiltonian(&PendulumState::from(a), p).unwrap();
        let hb = hamiltonian(&PendulumState::from(b), p).unwrap();
        (ha - hb) / (2.0 * h)
    };
    [
        -partial(1),
        partial(0),
        -partial(3),
        partial(2),
        -partial(5),
        partial(4),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn equations_of_motion_are_the_hamiltonian_gradient(
        p in params_strategy(),
        s in state_strategy(0.02),
    ) {
        let f = eom_full(&s, &p).unwrap();
        let g = fd_field(&s, &p, 1e-6);
        let scale = f.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        for i in 0..6 {
            let err = (f[i] - g[i]).abs() / f[i].abs().max(1e-3 * scale);
            prop_assert!(err < 1e-6, "component {}: {} vs {}", i, f[i], g[i]);
        }
    }

    #[test]
    fn symmetric_subspace_is_invariant(p in params_strategy(), z2 in -0.95f64..0.95, t2 in -10.0f64..10.0) {
        let f = eom_full(&PendulumState::new(0.0, 0.0, 0.0, 0.0, z2, t2), &p).unwrap();
        prop_assert_eq!(f[0], 0.0);
        prop_assert_eq!(f[1], 0.0);
        prop_assert_eq!(f[2], 0.0);
        prop_assert_eq!(f[3], 0.0);
    }

    #[test]
    fn without_coupling_levels_decouple(p in params_strategy(), s in state_strategy(0.01), z1b in -0.3f64..0.3, t1b in -3.0f64..3.0) {
        let p = p.decoupled();
        let f = eom_full(&s, &p).unwrap();
        prop_assert_eq!(f[4], 0.0);
        let mut other = s;
        other.z1 = z1b * (1.0 - s.z2);
        other.theta1 = t1b;
        let g = eom_full(&other, &p).unwrap();
        prop_assert_eq!(f[0], g[0]);
        prop_assert_eq!(f[1], g[1]);
    }

    #[test]
    fn lab_and_pendulum_hamiltonians_agree(p in params_strategy(), s in state_strategy(1e-3), tn in -5.0f64..5.0) {
        let lab = from_pendulum(&s, tn);
        let direct = hamiltonian(&s, &p).unwrap();
        let via_lab = lab_hamiltonian(&lab, &p);
        prop_assert!((direct - via_lab).abs() < 1e-12 * direct.abs().max(1.0), "{} vs {}", direct, via_lab);
    }

    #[test]
    fn lab_round_trip(s in state_strategy(1e-3), tn in -5.0f64..5.0) {
        let lab = from_pendulum(&s, tn);
        prop_assert!(lab.populations().iter().all(|&n| n > 0.0));
        prop_assert!((lab.populations().iter().sum::<f64>() - 1.0).abs() < 1e-12);
        let (back, tn2) = to_pendulum(&lab).unwrap();
        for (a, b) in back.to_array().iter().zip(s.to_array()) {
            prop_assert!((a - b).abs() < 1e-12);
        }
        prop_assert!((tn - tn2).abs() < 1e-12);
        let lab2 = from_pendulum(&back, tn2);
        for (a, b) in lab2.phases().iter().zip(lab.phases()) {
            prop_assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn normal_modes_are_ordered(p in params_strategy(), z2 in -0.99f64..0.99) {
        // Label levels so that the ground pendulum is the slower one.
        let m = match normal_mode_frequencies(&p, z2) {
            Ok(m) => m,
            Err(_) => return Ok(()),
        };
        prop_assume!(m.omega0 < m.omega1);
        prop_assert!(m.omega_minus < m.omega0);
        prop_assert!(m.omega0 < m.omega1);
        prop_assert!(m.omega1 < m.omega_plus);
    }

    #[test]
    fn tunneling_rate_vanishes_at_the_bound(p in params_strategy(), z2 in -0.9f64..0.9, th in 0.1f64..3.0) {
        for k in 1..6 {
            let gap = 10f64.powi(-2 * k);
            let z0 = 0.5 * (1.0 + z2) - gap;
            let f = eom_averaged(&[z0, th, 0.0, 0.0], z2, &p).unwrap();
            prop_assert!(f[0].abs() <= p.j0 * 2.0 * (gap * (1.0 + z2)).sqrt() * 1.0001);
        }
    }
}

#[test]
fn linearization_error_is_higher_order() {
    let p = point_b();
    let z2 = 0.3;
    let dir = [0.4, -0.7, 0.2, 0.5];
    let err = |scale: f64| {
        let x = dir.map(|d| d * scale);
        let a = eom_averaged(&x, z2, &p).unwrap();
        let l = eom_linearized(&x, z2, &p);
        a.iter().zip(&l).map(|(u, v)| (u - v).abs()).fold(0.0, f64::max)
    };
    let mut prev = err(0.08);
    for k in 1..5 {
        let e = err(0.08 / 2f64.powi(k));
        assert!(prev / e > 3.9, "ratio {}", prev / e);
        prev = e;
    }
}

#[test]
fn quoted_point_b_is_mixed() {
    let r = classify_regime(&point_b(), Some(5.0), None);
    assert_eq!(r.regime, Regime::Mixed);
}
