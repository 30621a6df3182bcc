//! Exponential-in-time integrals `I = (e^{λt}/λ)(λ Σ L(q̇,…,q̇) + L_c Qᶜ)`.

use super::integral1::velocities;
use super::{lin, num, run_rows, scalar, ConditionReport, ConditionsError, ExpTimeCandidate, RowSpec};
use crate::expr::{simplify, Expr, ZeroTestConfig};
use crate::geometry::{SystemDef, TIME};
use crate::tensor::{sym_cov_derivative, SymTensorField};

/// λ with parameters bound; must be a nonzero number.
pub(crate) fn rate(c: &ExpTimeCandidate, sys: &SystemDef) -> Result<f64, ConditionsError> {
    let bound = simplify(&c.lambda.bind_params(&sys.params));
    match bound.as_number() {
        Some(v) if v.to_f64() != 0.0 && v.to_f64().is_finite() => Ok(v.to_f64()),
        _ => Err(ConditionsError::BadRate(c.lambda.to_string())),
    }
}

fn validate(c: &ExpTimeCandidate, sys: &SystemDef) -> Result<(), ConditionsError> {
    if c.m == 0 {
        return Err(ConditionsError::Shape("order m must be at least 1".into()));
    }
    if c.tensors.len() != c.m
        || c.tensors
            .iter()
            .enumerate()
            .any(|(k, t)| t.order() != k + 1 || t.dim() != sys.dim())
    {
        return Err(ConditionsError::Shape("tensor list does not match m".into()));
    }
    rate(c, sys).map(|_| ())
}

/// Checks the exponential-in-time condition chain.
pub fn check_integral2(
    c: &ExpTimeCandidate,
    sys: &SystemDef,
    cfg: &ZeroTestConfig,
) -> Result<ConditionReport, ConditionsError> {
    validate(c, sys)?;
    let (m, lam) = (c.m, &c.lambda);
    let conn = &sys.connection;
    let q = &sys.forces;
    let d = sys.dim();
    let mut rows = vec![RowSpec::new(
        "kt",
        format!("L of rank {m} is a Killing tensor"),
        move || Ok(sym_cov_derivative(&c.tensor(m), conn)?),
    )];
    if m > 1 {
        rows.push(RowSpec::new(
            "recursion",
            format!("L of rank {m} = -(1/λ) sym. cov. derivative of L of rank {}", m - 1),
            move || {
                let dl = sym_cov_derivative(&c.tensor(m - 1), conn)?;
                lin(&[(Expr::one(), &c.tensor(m)), (Expr::one() / lam, &dl)])
            },
        ));
    }
    rows.push(RowSpec::new(
        "gradient",
        "(L_c Q^c),i = 2λ L_ij Q^j - λ² L_i",
        move || {
            let lq = scalar(d, c.tensor(1).contract(q).at(&[]).clone());
            let mut terms: Vec<(Expr, SymTensorField)> = vec![(Expr::one(), sym_cov_derivative(&lq, conn)?)];
            if m > 1 {
                terms.push((num(-2) * lam, c.tensor(2).contract(q)));
            }
            terms.push((lam.pow_int(2), c.tensor(1)));
            lin(&terms.iter().map(|(e, t)| (e.clone(), t)).collect::<Vec<_>>())
        },
    ));
    if m > 2 {
        for r in 2..m {
            rows.push(RowSpec::new(
                format!("chain[r={r}]"),
                format!(
                    "sym. cov. derivative of L of rank {} = {} L of rank {} Q - λ L of rank {r}",
                    r - 1,
                    r + 1,
                    r + 1
                ),
                move || {
                    let terms = [
                        (Expr::one(), sym_cov_derivative(&c.tensor(r - 1), conn)?),
                        (num(-(r as i64 + 1)), c.tensor(r + 1).contract(q)),
                        (lam.clone(), c.tensor(r)),
                    ];
                    lin(&terms.iter().map(|(e, t)| (e.clone(), t)).collect::<Vec<_>>())
                },
            ));
        }
    }
    Ok(run_rows(rows, sys, cfg))
}

/// The assembled exponential-in-time integral.
pub fn build_integral2(c: &ExpTimeCandidate, sys: &SystemDef) -> Result<Expr, ConditionsError> {
    validate(c, sys)?;
    let v = velocities(sys);
    let lam = &c.lambda;
    let poly = Expr::sum((1..=c.m).map(|r| c.tensor(r).contract_all(&v)).collect::<Vec<_>>());
    let lq = c.tensor(1).contract(&sys.forces).at(&[]).clone();
    let pre = (lam * Expr::var(TIME)).exp() / lam;
    Ok(simplify(&(pre * (lam * poly + lq))))
}
