//! Acceptance criteria, one PASS/FAIL line each.
//!
//! Criteria 1 and 2 cannot be met as stated: their initial data run into a
//! singularity (1) and a finite-time blow-up (2) long before the end of the
//! span. They are printed as FAIL; what is asserted instead is that the run
//! stops where it should and that the integral is conserved up to there.
//! Any other failure makes the target fail.

mod common;

use std::collections::BTreeMap;
use std::process::ExitCode;
use std::time::Instant;

use firstint::catalog::{instantiate, CatalogEntry};
use firstint::conditions::{
    absorb_lower_order, build_integral1, check_complete_form, check_conserved, check_integral1,
    poly_candidate_from_integral, split_parity, Candidate, Parity, PolyTimeCandidate,
};
use firstint::dynamics::{integrate, monitor_fi, DynamicsError, IntegrateOptions, Method, State, Termination};
use firstint::expr::{expr, simplify, Expr, ParseContext, ZeroTestConfig, ZeroVerdict};
use firstint::geometry::{classify_2d, curvature, metricity_residual, Classification, Connection, SystemDef};
use firstint::solver::{find_generalized_kts, find_reducible_kt_generators, AnsatzSpec, SolverConfig};
use firstint::tensor::sym_cov_derivative;
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::{firstint, json, Fixtures};

/// Outcome of one criterion.
struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: impl Into<String>) -> Verdict {
    Verdict {
        pass,
        detail: detail.into(),
    }
}

type Check = fn() -> Result<Verdict, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn entry(name: &str, params: &[(&str, f64)]) -> CatalogEntry {
    let p: BTreeMap<String, f64> = params.iter().map(|(k, v)| (k.to_string(), *v)).collect();
    instantiate(name, &p).unwrap()
}

fn rk45(rtol: f64) -> IntegrateOptions {
    IntegrateOptions {
        method: Method::Rk45 { rtol, atol: 1e-12 },
        ..Default::default()
    }
}

/// Where an integration from `ic` stops before `t_end`, if it does.
fn stop_time(sys: &SystemDef, ic: &[f64], t_end: f64) -> Result<Option<f64>, String> {
    let s0 = State::from_flat(ic, sys.dim()).map_err(|e| e.to_string())?;
    match integrate(sys, &s0, t_end, &rk45(1e-10)) {
        Ok(tr) => Ok(match tr.termination {
            Termination::Completed => None,
            Termination::Singular { t, .. } => Some(t),
        }),
        Err(DynamicsError::StepUnderflow { t, .. }) => Ok(Some(t)),
        Err(e) => Err(e.to_string()),
    }
}

fn drift(sys: &SystemDef, ic: &[f64], t_end: f64, name: &str, i: &Expr) -> Result<f64, String> {
    let s0 = State::from_flat(ic, sys.dim()).map_err(|e| e.to_string())?;
    let tr = integrate(sys, &s0, t_end, &rk45(1e-10)).map_err(|e| e.to_string())?;
    ensure(tr.completed(), || {
        format!("{name}: stopped early: {:?}", tr.termination)
    })?;
    Ok(monitor_fi(&tr, name, i, sys).map_err(|e| e.to_string())?.max_rel_drift)
}

fn exact(sys: &SystemDef, e: &Expr) -> bool {
    sys.zero_test(&simplify(e), &ZeroTestConfig::default()).unwrap() == ZeroVerdict::ExactZero
}

fn criterion_1() -> Result<Verdict, String> {
    let e = entry("coupled-oscillators-nr", &[("k", 2.0), ("p", 1.0)]);
    let i1 = &e.integral("I1").unwrap().expr;
    let oracle = check_conserved(i1, &e.system, &ZeroTestConfig::default()).map_err(|e| e.to_string())?;
    ensure(oracle == ZeroVerdict::ExactZero, || format!("oracle: {oracle:?}"))?;
    let ic = [1.0, 0.5, 0.1, -0.2];
    let stop = stop_time(&e.system, &ic, 10.0)?;
    let Some(t_stop) = stop else {
        return Ok(verdict(true, "trajectory unexpectedly completed"));
    };
    ensure(t_stop < 1.0, || format!("stopped at t = {t_stop}"))?;
    let d = drift(&e.system, &ic, 0.85, "I1", i1)?;
    ensure(d <= 1e-8, || format!("drift on [0, 0.85] = {d:e}"))?;
    let r = e.system.reference.clone().unwrap();
    let d_ref = drift(&e.system, &r.ic, r.t_end, "I1", i1)?;
    ensure(d_ref <= 1e-8, || format!("reference drift {d_ref:e}"))?;
    Ok(verdict(
        false,
        format!(
            "span [0,10] unreachable: ky+px -> 0 at t = {t_stop:.4}; oracle ExactZero; \
             drift {d:.1e} on [0,0.85], {d_ref:.1e} from the catalog reference data"
        ),
    ))
}

fn criterion_2() -> Result<Verdict, String> {
    let e = entry("beta-system", &[("beta", 0.5)]);
    let fi = e.integral("I").unwrap();
    let Candidate::Poly(c) = &fi.candidate else {
        return Err("expected a polynomial candidate".into());
    };
    let report = check_integral1(c, &e.system, &ZeroTestConfig::default()).map_err(|e| e.to_string())?;
    ensure(report.passes(), || {
        format!(
            "failing rows: {:?}",
            report.failing().map(|r| &r.id).collect::<Vec<_>>()
        )
    })?;
    let ic = [1.0, 0.1, 0.3, -0.2];
    let Some(t_stop) = stop_time(&e.system, &ic, 5.0)? else {
        return Ok(verdict(true, "trajectory unexpectedly completed"));
    };
    ensure((t_stop - 1.1538).abs() < 1e-2, || format!("stopped at t = {t_stop}"))?;
    let d = drift(&e.system, &ic, 1.0, "I", &fi.expr)?;
    ensure(d <= 1e-8, || format!("drift on [0, 1] = {d:e}"))?;
    let r = e.system.reference.clone().unwrap();
    let d_ref = drift(&e.system, &r.ic, r.t_end, "I", &fi.expr)?;
    ensure(d_ref <= 1e-8, || format!("reference drift {d_ref:e}"))?;
    Ok(verdict(
        false,
        format!(
            "span [0,5] unreachable: velocities blow up at t = {t_stop:.4}; all {} polynomial-chain rows pass; \
             drift {d:.1e} on [0,1], {d_ref:.1e} from the catalog reference data",
            report.rows.len()
        ),
    ))
}

fn criterion_3() -> Result<Verdict, String> {
    let e = entry("beta-system", &[]);
    let sys = &e.system;
    let ctx = sys.space_context();
    let r = curvature(&sys.connection);
    let a = expr("-32*beta^2*w/u^5", &ctx);
    let b = expr("24*beta*w/u^4", &ctx);
    let want = [
        ([0, 0, 0, 1], a.clone()),
        ([1, 1, 1, 0], a.clone()),
        ([1, 1, 0, 1], -&a),
        ([0, 0, 1, 0], -&a),
        ([1, 0, 0, 1], b.clone()),
        ([1, 0, 1, 0], -&b),
    ];
    for ([i, j, k, l], w) in &want {
        ensure(exact(sys, &(r.get(*i, *j, *k, *l) - w)), || format!("R[{i}{j}{k}{l}]"))?;
    }
    for (idx, c) in r.nonzero() {
        let listed = want.iter().any(|(w, _)| *w == idx);
        ensure(listed || exact(sys, c), || format!("unexpected component {idx:?}"))?;
    }
    let cfg = SolverConfig::default();
    for d in 0..=4 {
        let kv = find_generalized_kts(&sys.connection, &sys.params, &AnsatzSpec::new(1, d), &cfg)
            .map_err(|e| e.to_string())?;
        ensure(kv.basis.is_empty(), || format!("KV at degree {d}"))?;
        let red = find_reducible_kt_generators(&sys.connection, &sys.params, d, &cfg).map_err(|e| e.to_string())?;
        ensure(red.basis.is_empty(), || format!("reducible generator at degree {d}"))?;
    }
    let kt = sym_cov_derivative(&e.symmetries[0].tensor, &sys.connection).map_err(|e| e.to_string())?;
    ensure(kt.components().all(|(_, c)| exact(sys, c)), || {
        "exponential KT residual".into()
    })?;
    Ok(verdict(
        true,
        "curvature identities exact; no KVs or reducible generators up to degree 4; KT exact",
    ))
}

fn criterion_4() -> Result<Verdict, String> {
    let e = entry("evans-e3", &[("lambda", 1.0), ("k", 0.3), ("c1", 0.2), ("c2", 0.5)]);
    let cfg = ZeroTestConfig {
        samples: 64,
        ..Default::default()
    };
    let r = e.system.reference.clone().unwrap();
    ensure(r.ic[1] != 0.0 && r.ic[2] != 0.0, || {
        "initial data on y = 0 or z = 0".into()
    })?;
    let mut parts = Vec::new();
    for fi in &e.integrals {
        let v = check_conserved(&fi.expr, &e.system, &cfg).map_err(|e| e.to_string())?;
        ensure(v.is_zero(), || format!("{} oracle {v:?}", fi.name))?;
        let d = drift(&e.system, &r.ic, r.t_end, &fi.name, &fi.expr)?;
        ensure(d <= 1e-8, || format!("{} drift {d:e}", fi.name))?;
        parts.push(format!("{} {:?} {d:.1e}", fi.name, v));
    }
    ensure(parts.len() == 5, || "expected five integrals".into())?;
    Ok(verdict(true, parts.join("; ")))
}

fn criterion_5() -> Result<Verdict, String> {
    let mut parts = Vec::new();
    for (k1, tol) in [(0.0, 1e-6), (0.01, 1e-5)] {
        let e = entry("gravel-cubic", &[("c1", 1.0), ("k1", k1), ("k2", 0.0), ("k3", 0.0)]);
        let r = e.system.reference.clone().unwrap();
        let s0 = State::from_flat(&r.ic, 2).unwrap();
        let tr = integrate(&e.system, &s0, 5.0, &rk45(1e-10)).map_err(|e| e.to_string())?;
        ensure(tr.completed(), || format!("k1 = {k1}: stopped early"))?;
        if k1 == 0.0 {
            // The tracked branch is F = c1 x²/9 exactly.
            let mut tracker = e.system.implicit.as_ref().unwrap().tracker();
            for s in &tr.states {
                let f = tracker.values(&s.q)?[0];
                let want = s.q[0] * s.q[0] / 9.0;
                ensure((f - want).abs() <= 1e-12 * want.max(1.0), || {
                    format!("F = {f} at x = {}", s.q[0])
                })?;
            }
        }
        let d = monitor_fi(&tr, "I3", &e.integral("I3").unwrap().expr, &e.system)
            .map_err(|e| e.to_string())?
            .max_rel_drift;
        ensure(d <= tol, || format!("k1 = {k1}: drift {d:e}"))?;
        parts.push(format!("k1={k1}: I3 drift {d:.1e} <= {tol:e}"));
    }
    Ok(verdict(true, parts.join("; ")))
}

fn criterion_6() -> Result<Verdict, String> {
    let cfg = ZeroTestConfig::default();
    let nr = entry("coupled-oscillators-nr", &[]);
    let c = classify_2d(&nr.system, &cfg).map_err(|e| e.to_string())?;
    ensure(matches!(c, Classification::NonRiemannian { .. }), || {
        format!("nr: {}", c.label())
    })?;

    let xy = vec!["x".to_string(), "y".to_string()];
    let ctx = ParseContext::new(xy.clone(), Vec::<String>::new());
    let conn = Connection::from_components(xy, [(0, 0, 0, expr("1/x", &ctx)), (1, 1, 1, expr("1/y", &ctx))]).unwrap();
    let sys = SystemDef::new("reciprocal", conn, vec![Expr::zero(), Expr::zero()])
        .unwrap()
        .with_domain(vec![(0.5, 2.0), (0.5, 2.0)]);
    match classify_2d(&sys, &cfg).map_err(|e| e.to_string())? {
        Classification::Riemannian {
            case: 1,
            metric,
            residual,
        } => {
            ensure(residual == ZeroVerdict::ExactZero, || format!("{residual:?}"))?;
            let res = metricity_residual(&sys.connection, &metric).map_err(|e| e.to_string())?;
            ensure(res.values().all(|c| exact(&sys, c)), || "metricity residual".into())?;
        }
        other => return Err(format!("reciprocal: {}", other.label())),
    }
    Ok(verdict(true, "NonRiemannian / Riemannian case 1 with exact metricity"))
}

fn criterion_7() -> Result<Verdict, String> {
    let conn = Connection::flat(vec!["x".into(), "y".into()]);
    let cfg = SolverConfig::default();
    let mut parts = Vec::new();
    for (order, degree, want) in [(1, 1, 3), (2, 2, 6)] {
        let b = find_generalized_kts(&conn, &BTreeMap::new(), &AnsatzSpec::new(order, degree), &cfg)
            .map_err(|e| e.to_string())?;
        ensure(b.basis.len() == want, || {
            format!("order {order}: dimension {}", b.basis.len())
        })?;
        ensure(b.float_rank == Some(b.exact_rank), || {
            format!("ranks {} vs {:?}", b.exact_rank, b.float_rank)
        })?;
        parts.push(format!(
            "order {order}: dim {want}, exact rank {0} = float rank {0}",
            b.exact_rank
        ));
    }
    Ok(verdict(true, parts.join("; ")))
}

/// Known integrals of uniform gravity `Q = (0, 1)`, with their velocity and
/// time degrees.
const GRAVITY: [(&str, usize, usize); 5] = [
    ("x_dot", 1, 0),
    ("y_dot + t", 1, 0),
    ("x - t*x_dot", 1, 1),
    ("y - t*y_dot - t^2/2", 1, 1),
    ("y_dot^2/2 + y", 2, 0),
];

fn criterion_8() -> Result<Verdict, String> {
    let sys = SystemDef::new(
        "gravity",
        Connection::flat(vec!["x".into(), "y".into()]),
        vec![Expr::zero(), Expr::one()],
    )
    .unwrap();
    let cfg = ZeroTestConfig::default();
    let ctx = sys.phase_context();
    let passes = |c: &PolyTimeCandidate| check_integral1(c, &sys, &cfg).map(|r| r.passes()).unwrap_or(false);
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut absorbed = 0;
    for case in 0..20 {
        // A random combination of single integrals and products of two.
        let (mut m, mut n) = (1, 0);
        let mut terms = Vec::new();
        for _ in 0..rng.random_range(1..=3) {
            let coef = [-3, -2, -1, 1, 2, 3][rng.random_range(0..6)];
            let i = rng.random_range(0..5);
            let (mut e, mut mi, mut ni) = (expr(GRAVITY[i].0, &ctx), GRAVITY[i].1, GRAVITY[i].2);
            if rng.random_bool(0.5) {
                let j = rng.random_range(0..5);
                e = &e * &expr(GRAVITY[j].0, &ctx);
                mi += GRAVITY[j].1;
                ni += GRAVITY[j].2 + 1;
            }
            m = m.max(mi);
            n = n.max(ni);
            terms.push(Expr::int(coef) * e);
        }
        let i = simplify(&Expr::sum(terms));
        let c = poly_candidate_from_integral(&i, &sys, m, n).map_err(|e| e.to_string())?;
        ensure(passes(&c), || format!("case {case}: candidate of {i} fails"))?;
        let built = build_integral1(&c, &sys).map_err(|e| e.to_string())?;
        ensure(
            sys.zero_test(&simplify(&(&built - &i)), &cfg).unwrap().is_zero(),
            || format!("case {case}: rebuild"),
        )?;
        ensure(passes(&c.pad_order()), || format!("case {case}: order padding"))?;
        ensure(passes(&c.pad_degree()), || format!("case {case}: degree padding"))?;
        let (h1, h2) = split_parity(&c);
        ensure(passes(&h1) && passes(&h2), || format!("case {case}: parity halves"))?;
        if m > 1 {
            let p = Parity::of(m, n + 1);
            let half = if p == Parity::One { &h1 } else { &h2 };
            let a = absorb_lower_order(half, &sys).map_err(|e| e.to_string())?;
            let ok = check_complete_form(&a, p, &sys, &cfg)
                .map_err(|e| e.to_string())?
                .passes();
            ensure(ok, || {
                format!("case {case}: absorbed candidate fails its complete form")
            })?;
            absorbed += 1;
        }
    }
    Ok(verdict(
        true,
        format!("20 random candidates: padding, parity halves pass; {absorbed} absorbed forms pass"),
    ))
}

fn criterion_9() -> Result<Verdict, String> {
    let f = Fixtures::new();
    let r = firstint(&["verify-fi", "--system", &f.arg("harmonic.toml"), "--fi", "P=x_dot"]);
    ensure(r.code == 1, || format!("harmonic x_dot: exit {} {}", r.code, r.stderr))?;
    let v = json(&r);
    let p = v["integrals"]
        .as_array()
        .unwrap()
        .iter()
        .find(|i| i["name"] == "P")
        .cloned()
        .unwrap();
    ensure(p["within_tolerance"] == false, || "x_dot reported conserved".into())?;

    let r = firstint(&[
        "check-conditions",
        "--system",
        "beta-system",
        "--candidate",
        &f.arg("identity.toml"),
    ]);
    ensure(r.code == 1, || format!("identity KT: exit {} {}", r.code, r.stderr))?;
    let v = json(&r);
    let row = v["rows"]
        .as_array()
        .unwrap()
        .iter()
        .find(|r| r["id"] == "kt[N=0]")
        .cloned()
        .unwrap();
    ensure(
        row["verdict"] == "NonZero" && row["witness"]["point"].is_object(),
        || format!("{row}"),
    )?;

    // Direct check: the identity fails Killing's equation on the β connection.
    let e = entry("beta-system", &[]);
    let mut id = PolyTimeCandidate::zero(2, 2, 0);
    let eye =
        firstint::tensor::SymTensorField::from_components(2, 2, [(vec![0, 0], Expr::one()), (vec![1, 1], Expr::one())])
            .unwrap();
    id.set_tensor(0, eye).map_err(|e| e.to_string())?;
    ensure(
        !check_integral1(&id, &e.system, &ZeroTestConfig::default())
            .unwrap()
            .passes(),
        || "library".into(),
    )?;
    Ok(verdict(
        true,
        format!(
            "x_dot absolute drift {:.2}, exit 1; identity fails kt[N=0] at {}, exit 1",
            p["max_abs_drift"].as_f64().unwrap(),
            row["witness"]["point"]
        ),
    ))
}

fn main() -> ExitCode {
    let checks: [(u32, Check); 9] = [
        (1, criterion_1),
        (2, criterion_2),
        (3, criterion_3),
        (4, criterion_4),
        (5, criterion_5),
        (6, criterion_6),
        (7, criterion_7),
        (8, criterion_8),
        (9, criterion_9),
    ];
    // Criteria whose stated form is known not to hold; see the module docs.
    const KNOWN_FAILING: [u32; 2] = [1, 2];
    let mut ok = true;
    for (n, check) in checks {
        let start = Instant::now();
        let (line, good) = match check() {
            Ok(v) => {
                let expected = v.pass != KNOWN_FAILING.contains(&n);
                (
                    format!("{} — {}", if v.pass { "PASS" } else { "FAIL" }, v.detail),
                    expected,
                )
            }
            Err(e) => (format!("FAIL — {e}"), false),
        };
        println!("criterion {n}: {line} [{:.1}s]", start.elapsed().as_secs_f64());
        ok &= good;
    }
    if ok {
        ExitCode::SUCCESS
    } else {
        println!("acceptance: unexpected result (see above)");
        ExitCode::FAILURE
    }
}
