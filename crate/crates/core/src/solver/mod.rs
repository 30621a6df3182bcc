//! Polynomial-ansatz search for generalized Killing vectors and tensors.
//!
//! Each unknown is the coefficient of one monomial in one tensor component.
//! The defining condition is linear in the unknowns, so it is evaluated on
//! every basis column separately, brought to a common denominator, and the
//! monomial coefficients of the numerators become the rows of an exact
//! linear system whose nullspace is the answer.

pub mod linalg;

use std::collections::BTreeMap;
use std::sync::Arc;

use num::{BigInt, BigRational};

use crate::expr::{simplify, to_rational, Expr, NonRationalError, Polynomial, RationalFunction};
use crate::geometry::Connection;
use crate::par::Exec;
use crate::tensor::{multi_indices, sym_cov_derivative, SymTensorField, TensorError};
use linalg::{float_rank, nullspace, rank, LinearSystem, SparseRow};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SolverError {
    #[error("connection is not rational ({0}); use the condition checker instead")]
    NonRational(#[from] NonRationalError),
    #[error("ansatz too large: {what} = {value} exceeds the cap {cap}")]
    SizeCap {
        what: &'static str,
        value: usize,
        cap: usize,
    },
    #[error("order must be at least 1")]
    ZeroOrder,
    #[error("{0}")]
    Tensor(#[from] TensorError),
}

/// Polynomial ansatz: tensor order `m`, maximum total degree `d`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AnsatzSpec {
    pub order: usize,
    pub degree: u32,
}

impl AnsatzSpec {
    pub fn new(order: usize, degree: u32) -> Self {
        AnsatzSpec { order, degree }
    }

    /// `C(D+m−1, m) · C(D+d, d)`.
    pub fn unknowns(&self, dim: usize) -> usize {
        multi_indices(dim, self.order).len() * monomials(dim, self.degree).len()
    }
}

#[derive(Clone, Copy, Debug)]
pub struct SolverConfig {
    pub max_degree: u32,
    pub max_unknowns: usize,
    /// Relative singular-value threshold for the floating rank check.
    pub svd_threshold: f64,
    /// Skip the floating check above this many columns.
    pub svd_max_cols: usize,
    pub exec: Exec,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            max_degree: 6,
            max_unknowns: 20_000,
            svd_threshold: 1e-8,
            svd_max_cols: 2_000,
            exec: Exec::default(),
        }
    }
}

/// A nullspace basis mapped back to tensor fields, with rank diagnostics.
#[derive(Clone, Debug)]
pub struct KtBasis {
    pub basis: Vec<SymTensorField>,
    pub unknowns: usize,
    pub equations: usize,
    pub exact_rank: usize,
    /// `None` when the system was too large for the dense SVD.
    pub float_rank: Option<usize>,
}

impl KtBasis {
    pub fn ranks_agree(&self) -> bool {
        self.float_rank.is_none_or(|r| r == self.exact_rank)
    }
}

/// Exponent vectors of total degree ≤ `d` in `n` variables, graded order.
pub fn monomials(n: usize, d: u32) -> Vec<Vec<u32>> {
    fn rec(n: usize, left: u32, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if cur.len() == n {
            out.push(cur.clone());
            return;
        }
        for e in 0..=left {
            cur.push(e);
            rec(n, left - e, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(n, d, &mut Vec::new(), &mut out);
    out.sort_by_key(|m| (m.iter().sum::<u32>(), std::cmp::Reverse(m.clone())));
    out
}

fn monomial_expr(coords: &[String], m: &[u32]) -> Expr {
    simplify(&Expr::product(
        coords
            .iter()
            .zip(m)
            .filter(|(_, &e)| e > 0)
            .map(|(c, &e)| Expr::var(c).pow_int(e as i64))
            .collect::<Vec<_>>(),
    ))
}

/// Columns: one unit field per (component, monomial).
struct Ansatz {
    labels: Vec<String>,
    fields: Vec<SymTensorField>,
}

fn ansatz(coords: &[String], order: usize, degree: u32) -> Ansatz {
    let dim = coords.len();
    let monos = monomials(dim, degree);
    let mut out = Ansatz {
        labels: Vec::new(),
        fields: Vec::new(),
    };
    for idx in multi_indices(dim, order) {
        for m in &monos {
            let mono = monomial_expr(coords, m);
            out.labels.push(format!("{idx:?}*{mono}"));
            out.fields
                .push(SymTensorField::from_components(dim, order, [(idx.clone(), mono)]).expect("valid index"));
        }
    }
    out
}

/// Builds the exact linear system for a residual that is linear in the field.
fn assemble<F>(
    conn: &Connection,
    columns: &[SymTensorField],
    labels: Vec<String>,
    residual: F,
    exec: Exec,
) -> Result<LinearSystem, SolverError>
where
    F: Fn(&SymTensorField) -> Result<SymTensorField, SolverError> + Sync + Send,
{
    let names: Vec<&str> = conn.coords().iter().map(|s| s.as_str()).collect();
    let per_col: Vec<Result<Vec<(Vec<usize>, RationalFunction)>, SolverError>> = exec.map(columns, |col| {
        let r = residual(col)?;
        r.components()
            .filter(|(_, e)| !e.is_zero())
            .map(|(idx, e)| Ok((idx.clone(), to_rational(e, &names)?)))
            .collect()
    });
    let per_col: Vec<Vec<(Vec<usize>, RationalFunction)>> = per_col.into_iter().collect::<Result<_, _>>()?;

    let vars: Arc<Vec<String>> = Arc::new(conn.coords().to_vec());
    let mut lcm: BTreeMap<Polynomial, u32> = BTreeMap::new();
    for entries in &per_col {
        for (_, rf) in entries {
            for (f, &e) in rf.denominator_factors() {
                let slot = lcm.entry(f.clone()).or_insert(0);
                *slot = (*slot).max(e);
            }
        }
    }
    let common = lcm
        .iter()
        .fold(Polynomial::one(vars), |acc, (f, &e)| acc.mul(&f.pow(e)));
    let common = RationalFunction::from_poly(common);

    let mut rows: BTreeMap<(Vec<usize>, Vec<u32>), SparseRow> = BTreeMap::new();
    for (col, entries) in per_col.iter().enumerate() {
        for (idx, rf) in entries {
            let cleared = rf.mul(&common);
            debug_assert!(cleared.is_polynomial(), "factored denominators are canonical");
            for (mono, c) in cleared.numerator().terms() {
                rows.entry((idx.clone(), mono.clone()))
                    .or_default()
                    .insert(col, c.clone());
            }
        }
    }
    let mut sys = LinearSystem::new(labels);
    for ((idx, mono), row) in rows {
        sys.push(format!("{idx:?}:{mono:?}"), row);
    }
    Ok(sys)
}

fn bound_connection(conn: &Connection, params: &BTreeMap<String, f64>) -> Connection {
    conn.map(|e| simplify(&e.bind_params(params)))
}

fn check_caps(dim: usize, spec: &AnsatzSpec, cfg: &SolverConfig) -> Result<(), SolverError> {
    if spec.order == 0 {
        return Err(SolverError::ZeroOrder);
    }
    if spec.degree > cfg.max_degree {
        return Err(SolverError::SizeCap {
            what: "degree",
            value: spec.degree as usize,
            cap: cfg.max_degree as usize,
        });
    }
    let n = spec.unknowns(dim);
    if n > cfg.max_unknowns {
        return Err(SolverError::SizeCap {
            what: "unknowns",
            value: n,
            cap: cfg.max_unknowns,
        });
    }
    Ok(())
}

fn combine(fields: &[SymTensorField], coeffs: &[BigInt]) -> SymTensorField {
    let mut out = SymTensorField::zero(fields[0].dim(), fields[0].order());
    let mut sums: BTreeMap<Vec<usize>, Vec<Expr>> = BTreeMap::new();
    for (f, c) in fields.iter().zip(coeffs) {
        if num::Zero::is_zero(c) {
            continue;
        }
        for (idx, e) in f.components() {
            if !e.is_zero() {
                sums.entry(idx.clone())
                    .or_default()
                    .push(Expr::rational(BigRational::from_integer(c.clone())) * e);
            }
        }
    }
    for (idx, terms) in sums {
        out.set(&idx, simplify(&Expr::sum(terms))).expect("valid index");
    }
    out
}

fn float_check(sys: &LinearSystem, cfg: &SolverConfig) -> Option<usize> {
    (sys.cols() <= cfg.svd_max_cols).then(|| float_rank(sys, cfg.svd_threshold))
}

/// Generalized Killing tensors `L_{(i₁…i_m|i_{m+1})} = 0` with polynomial
/// components of degree ≤ `spec.degree`.
pub fn find_generalized_kts(
    conn: &Connection,
    params: &BTreeMap<String, f64>,
    spec: &AnsatzSpec,
    cfg: &SolverConfig,
) -> Result<KtBasis, SolverError> {
    check_caps(conn.dim(), spec, cfg)?;
    let conn = bound_connection(conn, params);
    let cols = ansatz(conn.coords(), spec.order, spec.degree);
    let sys = assemble(
        &conn,
        &cols.fields,
        cols.labels.clone(),
        |f| Ok(sym_cov_derivative(f, &conn)?),
        cfg.exec,
    )?;
    let basis = nullspace(&sys).iter().map(|v| combine(&cols.fields, v)).collect();
    Ok(KtBasis {
        basis,
        unknowns: sys.cols(),
        equations: sys.rows.len(),
        exact_rank: rank(&sys),
        float_rank: float_check(&sys, cfg),
    })
}

/// Vectors `B` of degree ≤ `degree` whose symmetrized covariant derivative
/// `B_{(a|b)}` is a generalized Killing tensor, modulo Killing vectors.
pub fn find_reducible_kt_generators(
    conn: &Connection,
    params: &BTreeMap<String, f64>,
    degree: u32,
    cfg: &SolverConfig,
) -> Result<KtBasis, SolverError> {
    let spec = AnsatzSpec::new(1, degree);
    check_caps(conn.dim(), &spec, cfg)?;
    let conn = bound_connection(conn, params);
    let cols = ansatz(conn.coords(), 1, degree);
    let kv_sys = assemble(
        &conn,
        &cols.fields,
        cols.labels.clone(),
        |f| Ok(sym_cov_derivative(f, &conn)?),
        cfg.exec,
    )?;
    let gen_sys = assemble(
        &conn,
        &cols.fields,
        cols.labels.clone(),
        |f| Ok(sym_cov_derivative(&sym_cov_derivative(f, &conn)?, &conn)?),
        cfg.exec,
    )?;
    // Quotient: keep generator vectors that enlarge the span of the KVs.
    let mut span = LinearSystem::new(cols.labels.clone());
    let as_row = |v: &Vec<BigInt>| -> SparseRow {
        v.iter()
            .enumerate()
            .filter(|(_, c)| !num::Zero::is_zero(*c))
            .map(|(i, c)| (i, BigRational::from_integer(c.clone())))
            .collect()
    };
    for v in nullspace(&kv_sys) {
        span.push("kv".into(), as_row(&v));
    }
    let mut have = rank(&span);
    let mut basis = Vec::new();
    for v in nullspace(&gen_sys) {
        span.push("gen".into(), as_row(&v));
        let r = rank(&span);
        if r > have {
            have = r;
            basis.push(combine(&cols.fields, &v));
        }
    }
    Ok(KtBasis {
        basis,
        unknowns: gen_sys.cols(),
        equations: gen_sys.rows.len(),
        exact_rank: rank(&gen_sys),
        float_rank: float_check(&gen_sys, cfg),
    })
}
