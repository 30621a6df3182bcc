//! First-integral candidates, their condition chains, and the
//! total-derivative oracle.
//!
//! A polynomial-in-time candidate of order `m` and time degree `n` carries
//! tensors `L_(N)` of every rank `1..=m` for `N = 0..=n`, a scalar `G(q)`
//! and the constant `s0 = L_(n)a Qᵃ` (plus an optional `s1` for `m = 1`).
//! An exponential candidate carries a rate `λ` and tensors `L` of ranks
//! `1..=m`. Every condition is evaluated as a residual field and decided by
//! the zero test; nothing is solved for.

mod collect;
mod integral1;
mod integral2;
pub mod io;
mod oracle;
mod parity;
mod pde;

use std::collections::BTreeMap;

use serde::Serialize;

use crate::expr::{simplify, Expr, ZeroTestConfig, ZeroTestError, ZeroVerdict};
use crate::geometry::SystemDef;
use crate::tensor::{SymTensorField, TensorError};

pub use collect::{exp_candidate_from_integral, poly_candidate_from_integral, velocity_tensors};
pub use integral1::{build_integral1, check_integral1};
pub use integral2::{build_integral2, check_integral2};
pub use oracle::{check_conserved, integrate_gradient, total_derivative_oracle};
pub use parity::{absorb_lower_order, check_complete_form, split_parity, Parity};
pub use pde::check_fi_pde_system;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ConditionsError {
    #[error("invalid candidate: {0}")]
    Shape(String),
    #[error("rate λ must be a nonzero number after binding parameters, got `{0}`")]
    BadRate(String),
    #[error("gradient field is not integrable: {0}")]
    NotIntegrable(String),
    #[error("evaluation failed: {0}")]
    Eval(String),
    #[error("{0}")]
    Tensor(#[from] TensorError),
    #[error("{0}")]
    Zero(#[from] ZeroTestError),
}

/// Polynomial-in-time candidate.
#[derive(Clone, Debug, PartialEq)]
pub struct PolyTimeCandidate {
    pub m: usize,
    pub n: usize,
    /// `tensors[N][r - 1]` is `L_(N)` of rank `r`.
    pub tensors: Vec<Vec<SymTensorField>>,
    pub g: Expr,
    pub s0: Expr,
    pub s1: Option<Expr>,
}

impl PolyTimeCandidate {
    /// All tensors zero, `G = 0`, `s0 = 0`.
    pub fn zero(dim: usize, m: usize, n: usize) -> Self {
        PolyTimeCandidate {
            m,
            n,
            tensors: (0..=n)
                .map(|_| (1..=m).map(|r| SymTensorField::zero(dim, r)).collect())
                .collect(),
            g: Expr::zero(),
            s0: Expr::zero(),
            s1: None,
        }
    }

    pub fn dim(&self) -> usize {
        self.tensors[0][0].dim()
    }

    /// `L_(N)` of rank `r`; rank 0 or out-of-range `N`/`r` give a zero field.
    pub fn tensor(&self, big_n: usize, r: usize) -> SymTensorField {
        if r == 0 || r > self.m || big_n > self.n {
            return SymTensorField::zero(self.dim(), r);
        }
        self.tensors[big_n][r - 1].clone()
    }

    pub fn set_tensor(&mut self, big_n: usize, field: SymTensorField) -> Result<(), ConditionsError> {
        let r = field.order();
        if r == 0 || r > self.m || big_n > self.n || field.dim() != self.dim() {
            return Err(ConditionsError::Shape(format!(
                "no slot for L_({big_n}) of rank {r} in an (m = {}, n = {}) candidate",
                self.m, self.n
            )));
        }
        self.tensors[big_n][r - 1] = field;
        Ok(())
    }

    /// Same data at order `m + 1` (zero top-rank tensors).
    pub fn pad_order(&self) -> Self {
        let d = self.dim();
        let mut c = self.clone();
        c.m += 1;
        for row in c.tensors.iter_mut() {
            row.push(SymTensorField::zero(d, c.m));
        }
        c
    }

    /// Same data at degree `n + 1` (zero `L_(n+1)`). The top constant moves
    /// with the top degree, so `s0` becomes `L_(n+1)a Qᵃ = 0`.
    pub fn pad_degree(&self) -> Self {
        let d = self.dim();
        let mut c = self.clone();
        c.n += 1;
        c.tensors.push((1..=c.m).map(|r| SymTensorField::zero(d, r)).collect());
        c.s1 = None;
        c.s0 = Expr::zero();
        c
    }

    pub fn is_zero(&self) -> bool {
        self.g.is_zero() && self.s0.is_zero() && self.tensors.iter().flatten().all(|t| t.is_zero())
    }
}

/// Exponential-in-time candidate.
#[derive(Clone, Debug, PartialEq)]
pub struct ExpTimeCandidate {
    pub m: usize,
    pub lambda: Expr,
    /// `tensors[r - 1]` has rank `r`.
    pub tensors: Vec<SymTensorField>,
}

impl ExpTimeCandidate {
    pub fn zero(dim: usize, m: usize, lambda: Expr) -> Self {
        ExpTimeCandidate {
            m,
            lambda,
            tensors: (1..=m).map(|r| SymTensorField::zero(dim, r)).collect(),
        }
    }

    pub fn dim(&self) -> usize {
        self.tensors[0].dim()
    }

    pub fn tensor(&self, r: usize) -> SymTensorField {
        if r == 0 || r > self.m {
            return SymTensorField::zero(self.dim(), r);
        }
        self.tensors[r - 1].clone()
    }

    pub fn set_tensor(&mut self, field: SymTensorField) -> Result<(), ConditionsError> {
        let r = field.order();
        if r == 0 || r > self.m || field.dim() != self.dim() {
            return Err(ConditionsError::Shape(format!(
                "no slot for rank {r} at order {}",
                self.m
            )));
        }
        self.tensors[r - 1] = field;
        Ok(())
    }
}

/// Either kind of candidate, as read from a file.
#[derive(Clone, Debug, PartialEq)]
pub enum Candidate {
    Poly(PolyTimeCandidate),
    Exp(ExpTimeCandidate),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Verdict {
    ExactZero,
    ProbablyZero,
    NonZero,
    Indeterminate,
}

impl Verdict {
    pub fn passes(self) -> bool {
        matches!(self, Verdict::ExactZero | Verdict::ProbablyZero)
    }
}

/// Where a residual failed.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Witness {
    /// Zero-based component multi-index of the residual field.
    pub component: Vec<usize>,
    pub point: BTreeMap<String, f64>,
    pub value: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConditionRow {
    pub id: String,
    pub anchor: String,
    pub verdict: Verdict,
    pub witness: Option<Witness>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConditionReport {
    pub rows: Vec<ConditionRow>,
}

impl ConditionReport {
    pub fn passes(&self) -> bool {
        self.rows.iter().all(|r| r.verdict.passes())
    }

    pub fn row(&self, id: &str) -> Option<&ConditionRow> {
        self.rows.iter().find(|r| r.id == id)
    }

    pub fn failing(&self) -> impl Iterator<Item = &ConditionRow> {
        self.rows.iter().filter(|r| !r.verdict.passes())
    }

    /// Versioned JSON document.
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "schema": 1,
            "overall": if self.passes() { "pass" } else { "fail" },
            "rows": self.rows,
        })
    }
}

/// A residual to be decided: every component must vanish.
pub(crate) struct RowSpec<'a> {
    pub id: String,
    pub anchor: String,
    pub residual: Box<dyn Fn() -> Result<SymTensorField, ConditionsError> + Send + Sync + 'a>,
}

impl<'a> RowSpec<'a> {
    pub fn new(
        id: impl Into<String>,
        anchor: impl Into<String>,
        residual: impl Fn() -> Result<SymTensorField, ConditionsError> + Send + Sync + 'a,
    ) -> Self {
        RowSpec {
            id: id.into(),
            anchor: anchor.into(),
            residual: Box::new(residual),
        }
    }
}

/// Evaluates rows (in parallel when enabled).
pub(crate) fn run_rows(rows: Vec<RowSpec<'_>>, sys: &SystemDef, cfg: &ZeroTestConfig) -> ConditionReport {
    let evaluated = cfg.exec.map(&rows, |spec| {
        let mut row = ConditionRow {
            id: spec.id.clone(),
            anchor: spec.anchor.clone(),
            verdict: Verdict::ExactZero,
            witness: None,
            note: None,
        };
        let field = match (spec.residual)() {
            Ok(f) => f,
            Err(e) => {
                row.verdict = Verdict::Indeterminate;
                row.note = Some(e.to_string());
                return row;
            }
        };
        for (idx, e) in field.components() {
            match sys.zero_test(e, cfg) {
                Ok(ZeroVerdict::ExactZero) => {}
                Ok(ZeroVerdict::ProbablyZero) => row.verdict = Verdict::ProbablyZero,
                Ok(ZeroVerdict::NonZero { witness, value }) => {
                    row.verdict = Verdict::NonZero;
                    row.witness = Some(Witness {
                        component: idx.clone(),
                        point: witness.into_iter().collect(),
                        value,
                    });
                    return row;
                }
                Err(err) => {
                    row.verdict = Verdict::Indeterminate;
                    row.note = Some(err.to_string());
                    return row;
                }
            }
        }
        row
    });
    ConditionReport { rows: evaluated }
}

// Small field helpers shared by the checkers.

pub(crate) fn lin(terms: &[(Expr, &SymTensorField)]) -> Result<SymTensorField, ConditionsError> {
    let (_, first) = terms[0];
    let mut acc = SymTensorField::zero(first.dim(), first.order());
    for (c, t) in terms {
        if t.order() != acc.order() {
            return Err(ConditionsError::Shape(format!(
                "rank mismatch {} vs {}",
                t.order(),
                acc.order()
            )));
        }
        acc = acc.add(&t.scale(c))?;
    }
    Ok(acc)
}

pub(crate) fn num(n: i64) -> Expr {
    Expr::int(n)
}

pub(crate) fn scalar(dim: usize, e: Expr) -> SymTensorField {
    SymTensorField::scalar(dim, simplify(&e))
}
