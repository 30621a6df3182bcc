//! Reading candidate data back off an assembled integral by collecting
//! powers of the velocities (and of `t`).

use super::{ConditionsError, ExpTimeCandidate, PolyTimeCandidate};
use crate::expr::{diff, simplify, Expr};
use crate::geometry::{SystemDef, TIME};
use crate::tensor::SymTensorField;

fn factorial(n: usize) -> i64 {
    (1..=n as i64).product()
}

/// Coefficient fields of ranks `0..=m` of an expression polynomial in the
/// velocities: `T_{i₁…i_r} = (1/r!) ∂ʳI/∂q̇ⁱ¹⋯∂q̇ⁱʳ` at `q̇ = 0`.
pub fn velocity_tensors(i: &Expr, sys: &SystemDef, m: usize) -> Vec<SymTensorField> {
    let vel = sys.velocity_names();
    let zero: Vec<(&str, Expr)> = vel.iter().map(|v| (v.as_str(), Expr::zero())).collect();
    (0..=m)
        .map(|r| {
            SymTensorField::from_fn(sys.dim(), r, |idx| {
                let mut e = i.clone();
                for &k in idx {
                    e = diff(&e, &vel[k]);
                }
                simplify(&(e.substitute(&zero) / Expr::int(factorial(r))))
            })
        })
        .collect()
}

/// Polynomial-in-time candidate of order `m`, degree `n` read off `i`.
/// `G` is the velocity-free, time-free part; `s0 = L_(n)a Qᵃ`.
pub fn poly_candidate_from_integral(
    i: &Expr,
    sys: &SystemDef,
    m: usize,
    n: usize,
) -> Result<PolyTimeCandidate, ConditionsError> {
    if m == 0 {
        return Err(ConditionsError::Shape("order m must be at least 1".into()));
    }
    let mut c = PolyTimeCandidate::zero(sys.dim(), m, n);
    let mut dt = i.clone();
    for big_n in 0..=n {
        if big_n > 0 {
            dt = diff(&dt, TIME);
        }
        let coeff = simplify(&(dt.substitute(&[(TIME, Expr::zero())]) / Expr::int(factorial(big_n))));
        let fields = velocity_tensors(&coeff, sys, m);
        if big_n == 0 {
            c.g = fields[0].at(&[]).clone();
        }
        for f in fields.into_iter().skip(1) {
            c.set_tensor(big_n, f)?;
        }
    }
    c.s0 = simplify(c.tensor(n, 1).contract(&sys.forces).at(&[]));
    Ok(c)
}

/// Exponential candidate of order `m`: the tensors of `e^{−λt} I`.
pub fn exp_candidate_from_integral(
    i: &Expr,
    sys: &SystemDef,
    m: usize,
    lambda: &Expr,
) -> Result<ExpTimeCandidate, ConditionsError> {
    if m == 0 {
        return Err(ConditionsError::Shape("order m must be at least 1".into()));
    }
    let stripped = simplify(&(i * (-(lambda * Expr::var(TIME))).exp()));
    let mut c = ExpTimeCandidate::zero(sys.dim(), m, lambda.clone());
    for f in velocity_tensors(&stripped, sys, m).into_iter().skip(1) {
        c.set_tensor(f)?;
    }
    Ok(c)
}
