//! The general system for an integral `I = Σ_r M_r(t, q)(q̇,…,q̇)` with
//! arbitrary time dependence.

use super::{lin, num, run_rows, ConditionReport, ConditionsError, RowSpec};
use crate::expr::{diff, ZeroTestConfig};
use crate::geometry::{SystemDef, TIME};
use crate::tensor::{sym_cov_derivative, SymTensorField};

fn dt(t: &SymTensorField) -> SymTensorField {
    t.map(|e| diff(e, TIME))
}

/// `coeffs[r]` is `M_r`, of rank `r`, for `r = 0..=m`.
///
/// Rows: `M_m` is a Killing tensor; `∂ₜM_m + sym∇M_{m−1} = 0`;
/// `∂ₜM_r + sym∇M_{r−1} − (r+1) M_{r+1}·Q = 0` for `0 < r < m`;
/// `∂ₜM_0 − M_1·Q = 0`.
pub fn check_fi_pde_system(
    coeffs: &[SymTensorField],
    sys: &SystemDef,
    cfg: &ZeroTestConfig,
) -> Result<ConditionReport, ConditionsError> {
    if coeffs.len() < 2 {
        return Err(ConditionsError::Shape("need M_0 and at least M_1".into()));
    }
    if let Some((r, t)) = coeffs
        .iter()
        .enumerate()
        .find(|(r, t)| t.order() != *r || t.dim() != sys.dim())
    {
        return Err(ConditionsError::Shape(format!(
            "M_{r} has rank {} in dimension {}",
            t.order(),
            t.dim()
        )));
    }
    let m = coeffs.len() - 1;
    let conn = &sys.connection;
    let q = &sys.forces;
    let mut rows = vec![RowSpec::new(
        "pde[kt]",
        format!("M_{m} is a Killing tensor"),
        move || Ok(sym_cov_derivative(&coeffs[m], conn)?),
    )];
    for r in (1..=m).rev() {
        rows.push(RowSpec::new(
            format!("pde[r={r}]"),
            format!(
                "d/dt M_{r} + sym. cov. derivative of M_{} - {} M_{} Q = 0",
                r - 1,
                r + 1,
                r + 1
            ),
            move || {
                let mut terms = vec![
                    (num(1), dt(&coeffs[r])),
                    (num(1), sym_cov_derivative(&coeffs[r - 1], conn)?),
                ];
                if r < m {
                    terms.push((num(-(r as i64 + 1)), coeffs[r + 1].contract(q)));
                }
                lin(&terms.iter().map(|(e, t)| (e.clone(), t)).collect::<Vec<_>>())
            },
        ));
    }
    rows.push(RowSpec::new("pde[r=0]", "d/dt M_0 - M_1 Q = 0", move || {
        lin(&[(num(1), &dt(&coeffs[0])), (num(-1), &coeffs[1].contract(q))])
    }));
    Ok(run_rows(rows, sys, cfg))
}
