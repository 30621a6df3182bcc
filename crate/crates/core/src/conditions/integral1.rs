//! Polynomial-in-time integrals: condition chain and assembled expression.
//!
//! Guards such as "only when `m > 1`" remove a term from a row; they never
//! substitute zero for a tensor that does not exist.

use super::{lin, num, run_rows, scalar, ConditionReport, ConditionsError, PolyTimeCandidate, RowSpec};
use crate::expr::{simplify, Expr, ZeroTestConfig};
use crate::geometry::{SystemDef, TIME};
use crate::tensor::{sym_cov_derivative, SymTensorField};

pub(crate) fn validate(c: &PolyTimeCandidate, sys: &SystemDef) -> Result<(), ConditionsError> {
    if c.m == 0 {
        return Err(ConditionsError::Shape("order m must be at least 1".into()));
    }
    if c.tensors.len() != c.n + 1 || c.tensors.iter().any(|row| row.len() != c.m) {
        return Err(ConditionsError::Shape("tensor table does not match (m, n)".into()));
    }
    for (big_n, row) in c.tensors.iter().enumerate() {
        for (k, t) in row.iter().enumerate() {
            if t.order() != k + 1 || t.dim() != sys.dim() {
                return Err(ConditionsError::Shape(format!(
                    "L_({big_n}) slot {} holds a dim-{} rank-{} field",
                    k + 1,
                    t.dim(),
                    t.order()
                )));
            }
        }
    }
    Ok(())
}

/// The rows of the polynomial-in-time condition chain.
pub(crate) fn rows<'a>(c: &'a PolyTimeCandidate, sys: &'a SystemDef) -> Vec<RowSpec<'a>> {
    let (m, n) = (c.m, c.n);
    let conn = &sys.connection;
    let q = &sys.forces;
    let d = sys.dim();
    let mut out = Vec::new();

    for big_n in 0..=n {
        out.push(RowSpec::new(
            format!("kt[N={big_n}]"),
            format!("L_({big_n}) of rank {m} is a Killing tensor"),
            move || Ok(sym_cov_derivative(&c.tensor(big_n, m), conn)?),
        ));
    }
    if n > 0 && m > 1 {
        for k in 1..=n {
            out.push(RowSpec::new(
                format!("recursion[k={k}]"),
                format!(
                    "L_({k}) of rank {m} = -(1/{k}) sym. cov. derivative of L_({}) of rank {}",
                    k - 1,
                    m - 1
                ),
                move || {
                    let dl = sym_cov_derivative(&c.tensor(k - 1, m - 1), conn)?;
                    lin(&[(Expr::one(), &c.tensor(k, m)), (Expr::ratio(1, k as i64), &dl)])
                },
            ));
        }
    }
    if m > 1 {
        out.push(RowSpec::new(
            "kt-lower",
            format!("L_({n}) of rank {} is a Killing tensor", m - 1),
            move || Ok(sym_cov_derivative(&c.tensor(n, m - 1), conn)?),
        ));
    }
    out.push(RowSpec::new("s0", format!("L_({n})a Q^a = s0"), move || {
        Ok(scalar(d, c.tensor(n, 1).contract(q).at(&[]) - &c.s0))
    }));
    if let (1, true, Some(s1)) = (m, n > 0, &c.s1) {
        out.push(RowSpec::new("s1", format!("L_({})a Q^a = s1", n - 1), move || {
            Ok(scalar(d, c.tensor(n - 1, 1).contract(q).at(&[]) - s1))
        }));
    }
    out.push(RowSpec::new("gradient[G]", "G,i = 2 L_(0)ij Q^j - L_(1)i", move || {
        let dg = sym_cov_derivative(&SymTensorField::scalar(d, c.g.clone()), conn)?;
        let mut terms = vec![(Expr::one(), dg)];
        if m > 1 {
            terms.push((num(-2), c.tensor(0, 2).contract(q)));
        }
        if n > 0 {
            terms.push((Expr::one(), c.tensor(1, 1)));
        }
        lin(&terms.iter().map(|(e, t)| (e.clone(), t)).collect::<Vec<_>>())
    }));
    for k in 1..=n {
        out.push(RowSpec::new(
            format!("gradient[k={k}]"),
            format!(
                "(L_({})c Q^c),i = 2{k} L_({k})ij Q^j - {k}({k}+1) L_({})i",
                k - 1,
                k + 1
            ),
            move || {
                let lq = SymTensorField::scalar(d, c.tensor(k - 1, 1).contract(q).at(&[]).clone());
                let mut terms = vec![(Expr::one(), sym_cov_derivative(&lq, conn)?)];
                if m > 1 {
                    terms.push((num(-2 * k as i64), c.tensor(k, 2).contract(q)));
                }
                if k < n {
                    terms.push((num((k * (k + 1)) as i64), c.tensor(k + 1, 1)));
                }
                lin(&terms.iter().map(|(e, t)| (e.clone(), t)).collect::<Vec<_>>())
            },
        ));
    }
    if m > 2 {
        for k in 0..=n {
            for r in 2..m {
                out.push(RowSpec::new(
                    format!("chain[k={k},r={r}]"),
                    format!(
                        "sym. cov. derivative of L_({k}) of rank {} = {} L_({k}) of rank {} Q - {} L_({}) of rank {r}",
                        r - 1,
                        r + 1,
                        r + 1,
                        k + 1,
                        k + 1
                    ),
                    move || {
                        let mut terms = vec![
                            (Expr::one(), sym_cov_derivative(&c.tensor(k, r - 1), conn)?),
                            (num(-(r as i64 + 1)), c.tensor(k, r + 1).contract(q)),
                        ];
                        if k < n {
                            terms.push((num(k as i64 + 1), c.tensor(k + 1, r)));
                        }
                        lin(&terms.iter().map(|(e, t)| (e.clone(), t)).collect::<Vec<_>>())
                    },
                ));
            }
        }
    }
    out
}

/// Checks every condition of the polynomial-in-time chain.
pub fn check_integral1(
    c: &PolyTimeCandidate,
    sys: &SystemDef,
    cfg: &ZeroTestConfig,
) -> Result<ConditionReport, ConditionsError> {
    validate(c, sys)?;
    Ok(run_rows(rows(c, sys), sys, cfg))
}

pub(crate) fn velocities(sys: &SystemDef) -> Vec<Expr> {
    sys.velocity_names().iter().map(|v| Expr::var(v)).collect()
}

/// `I = Σ_{r,N} tᴺ L_(N)(q̇,…,q̇) + s0 tⁿ⁺¹/(n+1) + Σ_{N=1..n} (L_(N−1)·Q) tᴺ/N + G`.
pub fn build_integral1(c: &PolyTimeCandidate, sys: &SystemDef) -> Result<Expr, ConditionsError> {
    validate(c, sys)?;
    let v = velocities(sys);
    let t = Expr::var(TIME);
    let mut terms = Vec::new();
    for big_n in 0..=c.n {
        for r in 1..=c.m {
            let part = c.tensor(big_n, r).contract_all(&v);
            if !part.is_zero() {
                terms.push(t.pow_int(big_n as i64) * part);
            }
        }
    }
    let n1 = c.n as i64 + 1;
    terms.push(&c.s0 * t.pow_int(n1) / Expr::int(n1));
    for big_n in 1..=c.n {
        let lq = c.tensor(big_n - 1, 1).contract(&sys.forces).at(&[]).clone();
        terms.push(lq * t.pow_int(big_n as i64) / Expr::int(big_n as i64));
    }
    terms.push(c.g.clone());
    Ok(simplify(&Expr::sum(terms)))
}
