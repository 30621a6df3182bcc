//! Exact sparse linear algebra over the rationals, with a floating-point
//! rank for cross-checking.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use num::{BigInt, BigRational, Integer, One, ToPrimitive, Zero};

/// A sparse row: column index → nonzero entry.
pub type SparseRow = BTreeMap<usize, BigRational>;

/// Homogeneous system `A x = 0` with labelled rows and columns.
#[derive(Clone, Debug, Default)]
pub struct LinearSystem {
    pub col_labels: Vec<String>,
    pub row_labels: Vec<String>,
    pub rows: Vec<SparseRow>,
}

impl LinearSystem {
    pub fn new(col_labels: Vec<String>) -> Self {
        LinearSystem {
            col_labels,
            row_labels: Vec::new(),
            rows: Vec::new(),
        }
    }

    /// Builds a system from a dense integer matrix.
    pub fn from_dense(rows: &[Vec<i64>]) -> Self {
        let cols = rows.first().map_or(0, |r| r.len());
        let mut sys = LinearSystem::new((0..cols).map(|c| format!("c{c}")).collect());
        for (i, r) in rows.iter().enumerate() {
            let row = r
                .iter()
                .enumerate()
                .filter(|(_, v)| **v != 0)
                .map(|(c, v)| (c, BigRational::from_integer((*v).into())))
                .collect();
            sys.push(format!("r{i}"), row);
        }
        sys
    }

    pub fn cols(&self) -> usize {
        self.col_labels.len()
    }

    /// Adds a row, dropping zero entries and empty rows.
    pub fn push(&mut self, label: String, mut row: SparseRow) {
        row.retain(|_, v| !v.is_zero());
        if !row.is_empty() {
            self.row_labels.push(label);
            self.rows.push(row);
        }
    }
}

fn to_integer_row(row: &SparseRow) -> BTreeMap<usize, BigInt> {
    let lcm = row.values().fold(BigInt::one(), |acc, v| acc.lcm(v.denom()));
    let mut out: BTreeMap<usize, BigInt> = row
        .iter()
        .map(|(&c, v)| (c, (v * BigRational::from_integer(lcm.clone())).to_integer()))
        .collect();
    reduce_content(&mut out);
    out
}

fn reduce_content(row: &mut BTreeMap<usize, BigInt>) {
    let g = row.values().fold(BigInt::zero(), |acc, v| acc.gcd(v));
    if !g.is_zero() && !g.is_one() {
        for v in row.values_mut() {
            *v /= &g;
        }
    }
}

/// Fraction-free reduction to reduced row-echelon form. Returns
/// `(pivot column, row)` pairs.
fn echelon(sys: &LinearSystem) -> Vec<(usize, BTreeMap<usize, BigInt>)> {
    let mut pending: Vec<BTreeMap<usize, BigInt>> = sys.rows.iter().map(to_integer_row).collect();
    let mut pivots: Vec<(usize, BTreeMap<usize, BigInt>)> = Vec::new();
    for col in 0..sys.cols() {
        // Sparsest row with an entry in this column becomes the pivot.
        let Some(pos) = pending
            .iter()
            .enumerate()
            .filter(|(_, r)| r.contains_key(&col))
            .min_by_key(|(_, r)| r.len())
            .map(|(i, _)| i)
        else {
            continue;
        };
        let p = pending.swap_remove(pos);
        let pv = p[&col].clone();
        let eliminate = |r: &mut BTreeMap<usize, BigInt>| {
            let Some(rv) = r.get(&col).cloned() else { return };
            let g = pv.gcd(&rv);
            let a = &pv / &g;
            let b = &rv / &g;
            for v in r.values_mut() {
                *v *= &a;
            }
            for (c, v) in &p {
                let e = r.entry(*c).or_insert_with(BigInt::zero);
                *e -= &b * v;
            }
            r.retain(|_, v| !v.is_zero());
            reduce_content(r);
        };
        for r in pending.iter_mut() {
            eliminate(r);
        }
        pending.retain(|r| !r.is_empty());
        for (_, r) in pivots.iter_mut() {
            eliminate(r);
        }
        pivots.push((col, p));
    }
    pivots
}

/// Exact rank.
pub fn rank(sys: &LinearSystem) -> usize {
    echelon(sys).len()
}

/// Nullspace basis of `A x = 0`: integer vectors with content 1, one per
/// free column, in column order.
pub fn nullspace(sys: &LinearSystem) -> Vec<Vec<BigInt>> {
    let pivots = echelon(sys);
    let pivot_cols: BTreeMap<usize, usize> = pivots.iter().enumerate().map(|(i, (c, _))| (*c, i)).collect();
    let mut basis = Vec::new();
    for free in 0..sys.cols() {
        if pivot_cols.contains_key(&free) {
            continue;
        }
        let mut x: Vec<BigRational> = vec![BigRational::zero(); sys.cols()];
        x[free] = BigRational::one();
        for (pc, row) in &pivots {
            if let Some(v) = row.get(&free) {
                x[*pc] = -BigRational::new(v.clone(), row[pc].clone());
            }
        }
        let lcm = x.iter().fold(BigInt::one(), |acc, v| acc.lcm(v.denom()));
        let mut ints: Vec<BigInt> = x
            .iter()
            .map(|v| (v * BigRational::from_integer(lcm.clone())).to_integer())
            .collect();
        let g = ints.iter().fold(BigInt::zero(), |acc, v| acc.gcd(v));
        if !g.is_one() {
            ints.iter_mut().for_each(|v| *v /= &g);
        }
        basis.push(ints);
    }
    basis
}

/// Numerical rank from singular values `σ > threshold · σ_max`, after
/// scaling every row to unit max-norm.
pub fn float_rank(sys: &LinearSystem, threshold: f64) -> usize {
    let (r, c) = (sys.rows.len(), sys.cols());
    if r == 0 || c == 0 {
        return 0;
    }
    let mut m = DMatrix::<f64>::zeros(r, c);
    for (i, row) in sys.rows.iter().enumerate() {
        let vals: Vec<(usize, f64)> = row.iter().map(|(&j, v)| (j, v.to_f64().unwrap_or(f64::NAN))).collect();
        let scale = vals.iter().map(|(_, v)| v.abs()).fold(0.0, f64::max);
        for (j, v) in vals {
            m[(i, j)] = v / scale;
        }
    }
    let sv = m.singular_values();
    let max = sv.iter().cloned().fold(0.0, f64::max);
    if max == 0.0 {
        return 0;
    }
    sv.iter().filter(|s| **s > threshold * max).count()
}

/// Whether `x` satisfies every row exactly.
pub fn satisfies(sys: &LinearSystem, x: &[BigInt]) -> bool {
    sys.rows.iter().all(|row| {
        row.iter()
            .fold(BigRational::zero(), |acc, (&c, v)| {
                acc + v * BigRational::from_integer(x[c].clone())
            })
            .is_zero()
    })
}
