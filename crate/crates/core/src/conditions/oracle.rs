//! Direct time differentiation along the equations of motion, independent
//! of any condition chain.

use std::collections::BTreeMap;

use super::ConditionsError;
use crate::expr::{diff, eval, simplify, Expr, ZeroTestConfig, ZeroVerdict};
use crate::geometry::{SystemDef, TIME};

/// `dI/dt = ∂ₜI + q̇ᵃ ∂_a I − (Γᵃ_bc q̇ᵇq̇ᶜ + Qᵃ) ∂I/∂q̇ᵃ`.
pub fn total_derivative_oracle(i: &Expr, sys: &SystemDef) -> Expr {
    let d = sys.dim();
    let vel: Vec<Expr> = sys.velocity_names().iter().map(|v| Expr::var(v)).collect();
    let mut terms = vec![diff(i, TIME)];
    for a in 0..d {
        terms.push(sys.diff_coord(i, a) * &vel[a]);
        let di = diff(i, &sys.velocity_names()[a]);
        if di.is_zero() {
            continue;
        }
        let mut acc = vec![sys.forces[a].clone()];
        for b in 0..d {
            for c in 0..d {
                let g = sys.connection.get(a, b, c);
                if !g.is_zero() {
                    acc.push(g * &vel[b] * &vel[c]);
                }
            }
        }
        terms.push(-(di * Expr::sum(acc)));
    }
    simplify(&Expr::sum(terms))
}

/// Zero test of the total time derivative of `i`.
pub fn check_conserved(i: &Expr, sys: &SystemDef, cfg: &ZeroTestConfig) -> Result<ZeroVerdict, ConditionsError> {
    Ok(sys.zero_test(&total_derivative_oracle(i, sys), cfg)?)
}

fn binding(sys: &SystemDef, q: &[f64]) -> Result<BTreeMap<String, f64>, ConditionsError> {
    let mut b = sys.params.clone();
    b.extend(sys.coords().iter().cloned().zip(q.iter().copied()));
    if let Some(imp) = &sys.implicit {
        let vals = imp.values(q).map_err(ConditionsError::Eval)?;
        b.extend(imp.symbols().into_iter().zip(vals));
    }
    Ok(b)
}

/// Recovers `φ(to) − φ(from)` for a gradient field `grad = ∇φ` by Simpson
/// quadrature along axis-parallel segments (first coordinate first).
///
/// The mixed-partial condition `∂_b g_a = ∂_a g_b` is checked first.
pub fn integrate_gradient(
    grad: &[Expr],
    sys: &SystemDef,
    cfg: &ZeroTestConfig,
    from: &[f64],
    to: &[f64],
) -> Result<f64, ConditionsError> {
    let d = sys.dim();
    if grad.len() != d || from.len() != d || to.len() != d {
        return Err(ConditionsError::Shape(
            "gradient and endpoints must match the dimension".into(),
        ));
    }
    for a in 0..d {
        for b in a + 1..d {
            let curl = simplify(&(sys.diff_coord(&grad[a], b) - sys.diff_coord(&grad[b], a)));
            if let ZeroVerdict::NonZero { .. } = sys.zero_test(&curl, cfg)? {
                return Err(ConditionsError::NotIntegrable(format!("g_{a},{b} != g_{b},{a}")));
            }
        }
    }
    const PANELS: usize = 200;
    let mut point = from.to_vec();
    let mut total = 0.0;
    for a in 0..d {
        let (lo, hi) = (from[a], to[a]);
        let h = (hi - lo) / PANELS as f64;
        if h == 0.0 {
            continue;
        }
        let mut s = 0.0;
        for k in 0..=PANELS {
            point[a] = lo + k as f64 * h;
            let w = if k == 0 || k == PANELS {
                1.0
            } else if k % 2 == 1 {
                4.0
            } else {
                2.0
            };
            let v = eval(&grad[a], &binding(sys, &point)?).map_err(|e| ConditionsError::Eval(e.to_string()))?;
            s += w * v;
        }
        total += s * h / 3.0;
        point[a] = hi;
    }
    Ok(total)
}
