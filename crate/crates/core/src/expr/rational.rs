//! Conversion of expressions to exact rational normal form.

use std::collections::BTreeMap;
use std::str::FromStr;
use std::sync::Arc;

use num::{BigInt, BigRational, One, Signed, ToPrimitive, Zero};

use super::{simplify, Expr, Node, Number, Polynomial, RationalFunction};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum NonRationalError {
    #[error("non-rational content `{0}`")]
    Transcendental(String),
    #[error("fractional power `{0}`")]
    FractionalPower(String),
    #[error("symbol `{0}` is not one of the declared variables")]
    UnknownSymbol(String),
    #[error("division by zero in `{0}`")]
    DivisionByZero(String),
}

/// Exact rational equal to the shortest decimal that round-trips to `v`
/// (so `0.1` becomes 1/10, not the binary expansion).
pub fn rational_from_f64(v: f64) -> BigRational {
    if v == 0.0 || !v.is_finite() {
        return BigRational::zero();
    }
    let s = format!("{v:e}");
    let (mant, exp) = s.split_once('e').expect("LowerExp output has an exponent");
    let exp: i64 = exp.parse().expect("integer exponent");
    let negative = mant.starts_with('-');
    let mant = mant.trim_start_matches('-');
    let (int, frac) = mant.split_once('.').unwrap_or((mant, ""));
    let digits = BigInt::from_str(&format!("{int}{frac}")).expect("decimal digits");
    let shift = exp - frac.len() as i64;
    let ten = BigInt::from(10);
    let mut r = if shift >= 0 {
        BigRational::from_integer(digits * num::pow(ten, shift as usize))
    } else {
        BigRational::new(digits, num::pow(ten, (-shift) as usize))
    };
    if negative {
        r = -r;
    }
    r
}

/// Rational normal form of `e` over `vars`. Parameters are treated like
/// variables when listed; anything else unlisted is an error.
pub fn to_rational(e: &Expr, vars: &[&str]) -> Result<RationalFunction, NonRationalError> {
    let vars: Arc<Vec<String>> = Arc::new(vars.iter().map(|s| s.to_string()).collect());
    convert(&simplify(e), &vars, &BTreeMap::new())
}

/// Numerator/denominator pair of the rational normal form.
pub fn to_polynomial(e: &Expr, vars: &[&str]) -> Result<(Polynomial, Polynomial), NonRationalError> {
    let r = to_rational(e, vars)?;
    Ok((r.numerator().clone(), r.denominator()))
}

/// Converts a canonical tree. `atoms` maps opaque subtrees (function calls,
/// and `b^(1/r)` for fractional powers) to variable indices.
pub(crate) fn convert(
    e: &Expr,
    vars: &Arc<Vec<String>>,
    atoms: &BTreeMap<Expr, usize>,
) -> Result<RationalFunction, NonRationalError> {
    if let Some(&i) = atoms.get(e) {
        return Ok(RationalFunction::from_poly(Polynomial::var(vars.clone(), i)));
    }
    match e.node() {
        Node::Num(n) => Ok(RationalFunction::constant(
            vars.clone(),
            match n {
                Number::Rational(r) => r.clone(),
                Number::Float(f) => rational_from_f64(*f),
            },
        )),
        Node::Var(v) | Node::Param(v) => match vars.iter().position(|w| w == &**v) {
            Some(i) => Ok(RationalFunction::from_poly(Polynomial::var(vars.clone(), i))),
            None => Err(NonRationalError::UnknownSymbol(v.to_string())),
        },
        Node::Neg(a) => Ok(convert(a, vars, atoms)?.neg()),
        Node::Add(ts) => {
            let mut acc = RationalFunction::zero(vars.clone());
            for t in ts {
                acc = acc.add(&convert(t, vars, atoms)?);
            }
            Ok(acc)
        }
        Node::Sub(a, b) => Ok(convert(a, vars, atoms)?.sub(&convert(b, vars, atoms)?)),
        Node::Mul(fs) => {
            let mut acc = RationalFunction::constant(vars.clone(), BigRational::one());
            for f in fs {
                acc = acc.mul(&convert(f, vars, atoms)?);
                if acc.is_zero() {
                    break;
                }
            }
            Ok(acc)
        }
        Node::Div(a, b) => convert(a, vars, atoms)?
            .div(&convert(b, vars, atoms)?)
            .ok_or_else(|| NonRationalError::DivisionByZero(e.to_string())),
        Node::Pow(b, q) => {
            if q.is_integer() {
                let n = q
                    .to_integer()
                    .to_i64()
                    .ok_or_else(|| NonRationalError::FractionalPower(e.to_string()))?;
                return convert(b, vars, atoms)?
                    .powi(n)
                    .ok_or_else(|| NonRationalError::DivisionByZero(e.to_string()));
            }
            let root = b.pow_rational(BigRational::new(BigInt::one(), q.denom().clone()));
            match atoms.get(&root) {
                Some(&i) => {
                    let n = q
                        .numer()
                        .to_i64()
                        .ok_or_else(|| NonRationalError::FractionalPower(e.to_string()))?;
                    RationalFunction::from_poly(Polynomial::var(vars.clone(), i))
                        .powi(n)
                        .ok_or_else(|| NonRationalError::DivisionByZero(e.to_string()))
                }
                None => Err(NonRationalError::FractionalPower(e.to_string())),
            }
        }
        Node::Func(..) => Err(NonRationalError::Transcendental(e.to_string())),
    }
}

/// Collects the opaque subtrees of a canonical tree in a deterministic order:
/// function calls, and `b^(1/r)` roots for every fractional power `b^(p/r)`.
pub(crate) fn collect_atoms(e: &Expr, out: &mut Vec<Expr>) {
    match e.node() {
        Node::Func(..) => {
            if !out.contains(e) {
                out.push(e.clone());
            }
        }
        Node::Pow(b, q) if !q.is_integer() => {
            collect_atoms(b, out);
            let root = b.pow_rational(BigRational::new(BigInt::one(), q.denom().clone()));
            if !out.contains(&root) {
                out.push(root);
            }
        }
        _ => {
            for c in e.children() {
                collect_atoms(c, out);
            }
        }
    }
}

/// True when `q` is a positive integer below a small bound (used for root
/// reduction orders).
pub(crate) fn small_positive(q: &BigInt) -> Option<u32> {
    (q.is_positive()).then(|| q.to_u32()).flatten().filter(|&n| n <= 16)
}
