use std::collections::BTreeMap;

use firstint::catalog::instantiate;
use firstint::expr::{expr, simplify, Expr, ZeroTestConfig, ZeroVerdict};
use firstint::geometry::{classify_2d, curvature, metricity_residual, Classification, Connection, SystemDef};
use firstint::solver::{find_generalized_kts, find_reducible_kt_generators, AnsatzSpec, SolverConfig};
use firstint::tensor::sym_cov_derivative;

#[test]
fn beta_curvature_matches_the_displayed_components() {
    let e = instantiate("beta-system", &BTreeMap::new()).unwrap();
    let sys = &e.system;
    let ctx = sys.space_context();
    let r = curvature(&sys.connection);
    let a = expr("-32*beta^2*w/u^5", &ctx);
    let b = expr("24*beta*w/u^4", &ctx);
    // (a, b, c, d) zero-based for Rᵃ_bcd.
    let want: [([usize; 4], Expr); 6] = [
        ([0, 0, 0, 1], a.clone()),
        ([1, 1, 1, 0], a.clone()),
        ([1, 1, 0, 1], -&a),
        ([0, 0, 1, 0], -&a),
        ([1, 0, 0, 1], b.clone()),
        ([1, 0, 1, 0], -&b),
    ];
    let cfg = ZeroTestConfig::default();
    for ([i, j, k, l], w) in &want {
        let diff = simplify(&(r.get(*i, *j, *k, *l) - w));
        assert_eq!(
            sys.zero_test(&diff, &cfg).unwrap(),
            ZeroVerdict::ExactZero,
            "R{i}{j}{k}{l}"
        );
    }
    // Nothing else is nonzero.
    for a in 0..2 {
        for b in 0..2 {
            for c in 0..2 {
                for d in 0..2 {
                    if c != d && !want.iter().any(|(idx, _)| *idx == [a, b, c, d]) {
                        assert_eq!(sys.zero_test(r.get(a, b, c, d), &cfg).unwrap(), ZeroVerdict::ExactZero);
                    }
                }
            }
        }
    }
}

#[test]
fn beta_symmetries() {
    let e = instantiate("beta-system", &BTreeMap::new()).unwrap();
    let sys = &e.system;
    let cfg = SolverConfig::default();
    for d in 0..=4 {
        let kv = find_generalized_kts(&sys.connection, &sys.params, &AnsatzSpec::new(1, d), &cfg).unwrap();
        assert!(kv.basis.is_empty(), "degree {d}");
        assert!(kv.ranks_agree());
        let red = find_reducible_kt_generators(&sys.connection, &sys.params, d, &cfg).unwrap();
        assert!(red.basis.is_empty(), "degree {d}");
    }
    let kt = &e.symmetries[0].tensor;
    let res = sym_cov_derivative(kt, &sys.connection).unwrap();
    for (_, c) in res.components() {
        assert_eq!(
            sys.zero_test(c, &ZeroTestConfig::default()).unwrap(),
            ZeroVerdict::ExactZero
        );
    }
}

#[test]
fn classification() {
    let cfg = ZeroTestConfig::default();
    let nr = instantiate("coupled-oscillators-nr", &BTreeMap::new()).unwrap();
    assert!(matches!(
        classify_2d(&nr.system, &cfg).unwrap(),
        Classification::NonRiemannian { .. }
    ));

    let xy = vec!["x".to_string(), "y".to_string()];
    let ctx = firstint::expr::ParseContext::new(xy.clone(), Vec::<String>::new());
    let conn = Connection::from_components(xy, [(0, 0, 0, expr("1/x", &ctx)), (1, 1, 1, expr("1/y", &ctx))]).unwrap();
    let sys = SystemDef::new("reciprocal", conn, vec![Expr::zero(), Expr::zero()])
        .unwrap()
        .with_domain(vec![(0.5, 2.0), (0.5, 2.0)]);
    match classify_2d(&sys, &cfg).unwrap() {
        Classification::Riemannian { case, metric, residual } => {
            assert_eq!(case, 1);
            assert_eq!(residual, ZeroVerdict::ExactZero);
            let res = metricity_residual(&sys.connection, &metric).unwrap();
            assert!(res
                .values()
                .all(|c| sys.zero_test(c, &cfg).unwrap() == ZeroVerdict::ExactZero));
        }
        other => panic!("{other:?}"),
    }
}

#[test]
fn flat_plane_dimensions() {
    let sys = SystemDef::new(
        "flat",
        Connection::flat(vec!["x".into(), "y".into()]),
        vec![Expr::zero(), Expr::zero()],
    )
    .unwrap();
    let cfg = SolverConfig::default();
    let kv = find_generalized_kts(&sys.connection, &sys.params, &AnsatzSpec::new(1, 1), &cfg).unwrap();
    assert_eq!(kv.basis.len(), 3);
    assert_eq!(kv.float_rank, Some(kv.exact_rank));
    let kt = find_generalized_kts(&sys.connection, &sys.params, &AnsatzSpec::new(2, 2), &cfg).unwrap();
    assert_eq!(kt.basis.len(), 6);
    assert_eq!(kt.float_rank, Some(kt.exact_rank));
}
