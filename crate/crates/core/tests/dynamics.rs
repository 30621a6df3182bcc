use std::collections::BTreeMap;

use firstint::catalog::instantiate;
use firstint::dynamics::{
    integrate, integrate_batch, monitor_fi, DynamicsError, IntegrateOptions, Method, State, Termination,
};
use firstint::expr::Expr;
use firstint::geometry::{Connection, SystemDef};
use firstint::par::Exec;
use proptest::prelude::*;

fn harmonic() -> SystemDef {
    SystemDef::new(
        "harmonic",
        Connection::flat(vec!["x".into(), "y".into()]),
        vec![Expr::var("x"), Expr::var("y")],
    )
    .unwrap()
}

fn rk4(h: f64) -> IntegrateOptions {
    IntegrateOptions {
        method: Method::Rk4 { h },
        ..Default::default()
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    // Halving h cuts the global error by about 2⁴.
    #[test]
    fn rk4_is_fourth_order(x0 in -1.0f64..1.0, v0 in -1.0f64..1.0) {
        let sys = harmonic();
        let s0 = State::new(0.0, vec![x0, 0.3], vec![v0, -0.2]);
        let t_end: f64 = 2.0;
        let exact = [x0 * t_end.cos() + v0 * t_end.sin(), v0 * t_end.cos() - x0 * t_end.sin()];
        let err = |h: f64| {
            let s = integrate(&sys, &s0, t_end, &rk4(h)).unwrap().last().clone();
            (s.q[0] - exact[0]).hypot(s.v[0] - exact[1])
        };
        let (e1, e2) = (err(0.1), err(0.05));
        prop_assume!(e2 > 1e-13);
        let order = (e1 / e2).log2();
        prop_assert!((3.6..4.4).contains(&order), "observed order {order}");
    }
}

#[test]
fn drift_shrinks_with_tolerance() {
    let e = instantiate("evans-e3", &BTreeMap::new()).unwrap();
    let r = e.system.reference.clone().unwrap();
    let s0 = State::from_flat(&r.ic, 3).unwrap();
    let i1 = &e.integral("I1").unwrap().expr;
    let drift = |rtol: f64| {
        let opts = IntegrateOptions {
            method: Method::Rk45 {
                rtol,
                atol: rtol * 1e-2,
            },
            h_max: Some(r.t_end),
            ..Default::default()
        };
        let tr = integrate(&e.system, &s0, r.t_end, &opts).unwrap();
        monitor_fi(&tr, "I1", i1, &e.system).unwrap().max_rel_drift
    };
    let (loose, tight) = (drift(1e-6), drift(1e-8));
    assert!(tight < loose, "{tight} !< {loose}");
}

#[test]
fn batch_matches_single_runs_in_both_modes() {
    let sys = harmonic();
    let ics: Vec<State> = (0..6)
        .map(|k| State::new(0.0, vec![0.1 * k as f64, 1.0], vec![0.0, 0.2]))
        .collect();
    let opts = IntegrateOptions::default();
    let par = integrate_batch(&sys, &ics, 3.0, &opts, Exec::Parallel).unwrap();
    let seq = integrate_batch(&sys, &ics, 3.0, &opts, Exec::Sequential).unwrap();
    for ((p, s), ic) in par.iter().zip(&seq).zip(&ics) {
        let single = integrate(&sys, ic, 3.0, &opts).unwrap();
        assert_eq!(p.as_ref().unwrap(), &single);
        assert_eq!(s.as_ref().unwrap(), &single);
    }
}

#[test]
fn dense_output() {
    let sys = harmonic();
    let s0 = State::new(0.0, vec![1.0, 0.0], vec![0.0, 1.0]);
    let tr = integrate(&sys, &s0, 0.5, &IntegrateOptions::default()).unwrap();
    assert!(tr.states.len() >= 200);
    assert!(tr.states.windows(2).all(|w| w[1].t > w[0].t));
    assert_eq!(tr.last().t, 0.5);
}

#[test]
fn rejects_bad_requests() {
    let sys = harmonic();
    let s0 = State::new(1.0, vec![1.0, 0.0], vec![0.0, 1.0]);
    assert!(integrate(&sys, &s0, 0.5, &IntegrateOptions::default()).is_err());
    let bad = IntegrateOptions {
        method: Method::Rk45 {
            rtol: -1.0,
            atol: 1e-12,
        },
        ..Default::default()
    };
    assert!(integrate(&sys, &s0, 2.0, &bad).is_err());
    assert!(State::from_flat(&[1.0, 2.0, 3.0], 2).is_err());
}

// From (u, w, u̇, ẇ) = (1, 0.1, 0.3, −0.2) with β = 0.5 the velocities blow up
// at t ≈ 1.154; the integrator must report it rather than return garbage.
#[test]
fn beta_blow_up_is_reported() {
    let e = instantiate("beta-system", &BTreeMap::new()).unwrap();
    let s0 = State::from_flat(&[1.0, 0.1, 0.3, -0.2], 2).unwrap();
    match integrate(&e.system, &s0, 5.0, &IntegrateOptions::default()) {
        Err(DynamicsError::StepUnderflow { t, .. }) => assert!((t - 1.1538).abs() < 1e-3, "{t}"),
        Ok(tr) => assert!(matches!(tr.termination, Termination::Singular { t, .. } if t < 1.2)),
        Err(other) => panic!("{other}"),
    }
}

#[test]
fn gravel_branches() {
    for (k1, tol) in [(0.0, 1e-6), (0.01, 1e-5)] {
        let e = instantiate("gravel-cubic", &[("k1".to_string(), k1)].into()).unwrap();
        let r = e.system.reference.clone().unwrap();
        let tr = integrate(
            &e.system,
            &State::from_flat(&r.ic, 2).unwrap(),
            5.0,
            &IntegrateOptions::default(),
        )
        .unwrap();
        assert!(tr.completed());
        assert!(tr.states.iter().all(|s| s.q[0] > 0.9));
        let d = monitor_fi(&tr, "I3", &e.integral("I3").unwrap().expr, &e.system).unwrap();
        assert!(d.max_rel_drift <= tol, "k1 = {k1}: {}", d.max_rel_drift);
    }
}
