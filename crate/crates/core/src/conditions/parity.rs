//! Parity halves of a polynomial-in-time integral, absorption of the
//! lower-order top tensor, and the complete-form checker.
//!
//! Every row of the polynomial chain only couples terms `L_(N)` of rank `r`
//! with the same parity of `r + N` (with `G` counted as `r = N = 0`), so a
//! candidate splits into an even half (parity 1) and an odd half (parity 2),
//! each an integral on its own.

use std::fmt;

use super::integral1::{rows as chain_rows, validate};
use super::{run_rows, ConditionReport, ConditionsError, PolyTimeCandidate, RowSpec};
use crate::expr::{simplify, Expr, ZeroTestConfig};
use crate::geometry::SystemDef;
use crate::tensor::{sym_cov_derivative, SymTensorField};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Parity {
    /// Odd rank with odd time power, even rank with even time power, and `G`.
    One,
    /// The complementary terms.
    Two,
}

impl Parity {
    pub fn from_flag(flag: u8) -> Result<Self, ConditionsError> {
        match flag {
            1 => Ok(Parity::One),
            2 => Ok(Parity::Two),
            _ => Err(ConditionsError::Shape(format!(
                "parity flag must be 1 or 2, got {flag}"
            ))),
        }
    }

    /// Class of the term `tᴺ L_(N)` of rank `r`.
    pub fn of(r: usize, big_n: usize) -> Self {
        if (r + big_n) % 2 == 0 {
            Parity::One
        } else {
            Parity::Two
        }
    }
}

impl fmt::Display for Parity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Parity::One => "1",
            Parity::Two => "2",
        })
    }
}

fn restrict(c: &PolyTimeCandidate, p: Parity) -> PolyTimeCandidate {
    let mut h = c.clone();
    for (big_n, row) in h.tensors.iter_mut().enumerate() {
        for (k, t) in row.iter_mut().enumerate() {
            if Parity::of(k + 1, big_n) != p {
                *t = SymTensorField::zero(t.dim(), t.order());
            }
        }
    }
    if p != Parity::One {
        h.g = Expr::zero();
    }
    // s0 belongs with L_(n) of rank 1, s1 with L_(n−1) of rank 1.
    if Parity::of(1, c.n) != p {
        h.s0 = Expr::zero();
    }
    if c.n == 0 || Parity::of(1, c.n - 1) != p {
        h.s1 = c.s1.as_ref().map(|_| Expr::zero());
    }
    h
}

/// Splits a candidate into its two parity halves `(half 1, half 2)`; both
/// keep the original `m` and `n`.
pub fn split_parity(c: &PolyTimeCandidate) -> (PolyTimeCandidate, PolyTimeCandidate) {
    (restrict(c, Parity::One), restrict(c, Parity::Two))
}

/// Raises the time degree by one so that the order-`(m−1)` tensor at the top
/// degree need no longer be a Killing tensor:
/// `L_(n+1)` of rank `m` is `−1/(n+1)` times the symmetrized covariant
/// derivative of `L_(n)` of rank `m−1`; every other new tensor is zero and
/// the top constant becomes `L_(n+1)a Qᵃ`.
///
/// When `L_(n)` of rank `m−1` already is a Killing tensor the added term
/// vanishes and only the degree changes.
pub fn absorb_lower_order(c: &PolyTimeCandidate, sys: &SystemDef) -> Result<PolyTimeCandidate, ConditionsError> {
    validate(c, sys)?;
    if c.m < 2 {
        return Err(ConditionsError::Shape("absorption needs m > 1".into()));
    }
    let n = c.n;
    let mut out = c.pad_degree();
    let dl = sym_cov_derivative(&c.tensor(n, c.m - 1), &sys.connection)?;
    out.set_tensor(n + 1, dl.scale(&Expr::ratio(-1, n as i64 + 1)))?;
    out.s0 = simplify(out.tensor(n + 1, 1).contract(&sys.forces).at(&[]));
    Ok(out)
}

/// Checks a candidate against the complete form of the given parity.
///
/// The top tensor `L_(n)` of rank `m` must belong to the parity class
/// (`m + n` even for parity 1, odd for parity 2); every term outside the class
/// must vanish, and the remaining terms must satisfy the polynomial chain at
/// degree `n`. The top constant is `s0` (for odd `m` and parity 1 this is the
/// constant multiplying `t^{2ℓ+2}`).
pub fn check_complete_form(
    c: &PolyTimeCandidate,
    parity: Parity,
    sys: &SystemDef,
    cfg: &ZeroTestConfig,
) -> Result<ConditionReport, ConditionsError> {
    validate(c, sys)?;
    if c.m < 2 {
        return Err(ConditionsError::Shape("complete forms need m > 1".into()));
    }
    if Parity::of(c.m, c.n) != parity {
        return Err(ConditionsError::Shape(format!(
            "order {} and degree {} do not fit a parity-{parity} complete form",
            c.m, c.n
        )));
    }
    let d = sys.dim();
    let mut rows: Vec<RowSpec<'_>> = Vec::new();
    for big_n in 0..=c.n {
        for r in 1..=c.m {
            if Parity::of(r, big_n) != parity {
                rows.push(RowSpec::new(
                    format!("parity[N={big_n},r={r}]"),
                    format!("L_({big_n}) of rank {r} is outside parity class {parity}"),
                    move || Ok(c.tensor(big_n, r)),
                ));
            }
        }
    }
    if parity == Parity::Two {
        rows.push(RowSpec::new("parity[G]", "G is outside parity class 2", move || {
            Ok(SymTensorField::scalar(d, c.g.clone()))
        }));
    }
    rows.extend(chain_rows(c, sys));
    Ok(run_rows(rows, sys, cfg))
}
