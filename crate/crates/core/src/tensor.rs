//! Totally symmetric covariant tensor fields.
//!
//! Components are stored once per sorted multi-index (`i₁ ≤ … ≤ i_r`,
//! zero-based). Reads with any permutation of the indices return the stored
//! component.

use std::collections::BTreeMap;

use crate::expr::{diff_chain, simplify, Expr};
use crate::geometry::Connection;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum TensorError {
    #[error("expected {expected} indices, got {got}")]
    Arity { expected: usize, got: usize },
    #[error("index {index} out of range for dimension {dim}")]
    IndexOutOfRange { index: usize, dim: usize },
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),
}

/// All sorted multi-indices of length `order` over `0..dim`.
pub fn multi_indices(dim: usize, order: usize) -> Vec<Vec<usize>> {
    fn rec(dim: usize, left: usize, start: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if left == 0 {
            out.push(cur.clone());
            return;
        }
        for i in start..dim {
            cur.push(i);
            rec(dim, left - 1, i, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(dim, order, 0, &mut Vec::with_capacity(order), &mut out);
    out
}

/// Number of distinct orderings of a sorted multi-index.
pub fn multiplicity(idx: &[usize]) -> u64 {
    let mut m = factorial(idx.len());
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j < idx.len() && idx[j] == idx[i] {
            j += 1;
        }
        m /= factorial(j - i);
        i = j;
    }
    m
}

fn factorial(n: usize) -> u64 {
    (1..=n as u64).product()
}

/// All permutations of `0..n` (Heap's algorithm order is irrelevant here).
fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for pos in 0..=p.len() {
            let mut q = p.clone();
            q.insert(pos, n - 1);
            out.push(q);
        }
    }
    out
}

#[derive(Clone, Debug, PartialEq)]
pub struct SymTensorField {
    dim: usize,
    order: usize,
    comps: BTreeMap<Vec<usize>, Expr>,
}

impl SymTensorField {
    pub fn zero(dim: usize, order: usize) -> Self {
        let comps = multi_indices(dim, order)
            .into_iter()
            .map(|i| (i, Expr::zero()))
            .collect();
        SymTensorField { dim, order, comps }
    }

    pub fn scalar(dim: usize, e: Expr) -> Self {
        let mut t = Self::zero(dim, 0);
        t.comps.insert(vec![], e);
        t
    }

    /// Field whose components are produced by `f` on each sorted index.
    pub fn from_fn(dim: usize, order: usize, f: impl Fn(&[usize]) -> Expr) -> Self {
        let comps = multi_indices(dim, order)
            .into_iter()
            .map(|i| {
                let e = f(&i);
                (i, e)
            })
            .collect();
        SymTensorField { dim, order, comps }
    }

    /// Builds a field from listed components (any index order); unlisted
    /// components are zero.
    pub fn from_components<I>(dim: usize, order: usize, entries: I) -> Result<Self, TensorError>
    where
        I: IntoIterator<Item = (Vec<usize>, Expr)>,
    {
        let mut t = Self::zero(dim, order);
        for (idx, e) in entries {
            t.set(&idx, e)?;
        }
        Ok(t)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn order(&self) -> usize {
        self.order
    }

    fn key(&self, indices: &[usize]) -> Result<Vec<usize>, TensorError> {
        if indices.len() != self.order {
            return Err(TensorError::Arity {
                expected: self.order,
                got: indices.len(),
            });
        }
        if let Some(&bad) = indices.iter().find(|&&i| i >= self.dim) {
            return Err(TensorError::IndexOutOfRange {
                index: bad,
                dim: self.dim,
            });
        }
        let mut k = indices.to_vec();
        k.sort_unstable();
        Ok(k)
    }

    pub fn get(&self, indices: &[usize]) -> Result<&Expr, TensorError> {
        let k = self.key(indices)?;
        Ok(&self.comps[&k])
    }

    /// Component lookup for indices already known to be valid.
    pub fn at(&self, indices: &[usize]) -> &Expr {
        let mut k = indices.to_vec();
        k.sort_unstable();
        &self.comps[&k]
    }

    pub fn set(&mut self, indices: &[usize], e: Expr) -> Result<(), TensorError> {
        let k = self.key(indices)?;
        self.comps.insert(k, e);
        Ok(())
    }

    pub fn components(&self) -> impl Iterator<Item = (&Vec<usize>, &Expr)> {
        self.comps.iter()
    }

    pub fn len(&self) -> usize {
        self.comps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.comps.is_empty()
    }

    /// True when every stored component is literally zero.
    pub fn is_zero(&self) -> bool {
        self.comps.values().all(|e| e.is_zero())
    }

    pub fn map(&self, f: impl Fn(&Expr) -> Expr) -> Self {
        SymTensorField {
            dim: self.dim,
            order: self.order,
            comps: self.comps.iter().map(|(k, e)| (k.clone(), f(e))).collect(),
        }
    }

    pub fn simplified(&self) -> Self {
        self.map(simplify)
    }

    fn zip(&self, other: &Self, f: impl Fn(&Expr, &Expr) -> Expr) -> Result<Self, TensorError> {
        if self.dim != other.dim || self.order != other.order {
            return Err(TensorError::DimensionMismatch(self.dim, other.dim));
        }
        Ok(SymTensorField {
            dim: self.dim,
            order: self.order,
            comps: self
                .comps
                .iter()
                .map(|(k, a)| (k.clone(), f(a, &other.comps[k])))
                .collect(),
        })
    }

    pub fn add(&self, other: &Self) -> Result<Self, TensorError> {
        self.zip(other, |a, b| simplify(&(a + b)))
    }

    pub fn sub(&self, other: &Self) -> Result<Self, TensorError> {
        self.zip(other, |a, b| simplify(&(a - b)))
    }

    pub fn scale(&self, c: &Expr) -> Self {
        self.map(|e| simplify(&(c * e)))
    }

    /// `T_{i₁…i_{r−1} c} Qᶜ`, an order-(r−1) field. Order must be positive.
    pub fn contract(&self, q: &[Expr]) -> Self {
        assert!(self.order > 0, "cannot contract a scalar");
        SymTensorField::from_fn(self.dim, self.order - 1, |idx| {
            let mut full = idx.to_vec();
            full.push(0);
            let terms = (0..self.dim).map(|c| {
                *full.last_mut().unwrap() = c;
                self.at(&full) * &q[c]
            });
            simplify(&Expr::sum(terms.collect::<Vec<_>>()))
        })
    }

    /// Full contraction `T_{i₁…i_r} vⁱ¹ ⋯ vⁱʳ`.
    pub fn contract_all(&self, v: &[Expr]) -> Expr {
        let terms: Vec<Expr> = self
            .comps
            .iter()
            .filter(|(_, e)| !e.is_zero())
            .map(|(idx, e)| {
                let mut f = vec![Expr::int(multiplicity(idx) as i64), e.clone()];
                f.extend(idx.iter().map(|&i| v[i].clone()));
                Expr::product(f)
            })
            .collect();
        simplify(&Expr::sum(terms))
    }
}

/// Symmetrization `(1/r!) Σ_σ A(σ(i))` of an arbitrary order-r array.
pub fn symmetrize(dim: usize, order: usize, a: impl Fn(&[usize]) -> Expr) -> SymTensorField {
    let perms = permutations(order);
    let weight = Expr::ratio(1, perms.len() as i64);
    SymTensorField::from_fn(dim, order, |idx| {
        let terms: Vec<Expr> = perms
            .iter()
            .map(|p| {
                let permuted: Vec<usize> = p.iter().map(|&k| idx[k]).collect();
                a(&permuted)
            })
            .collect();
        simplify(&(&weight * Expr::sum(terms)))
    })
}

/// One component `T_{idx|c}` of the covariant derivative.
fn cov_component(t: &SymTensorField, conn: &Connection, idx: &[usize], c: usize) -> Expr {
    let coord = &conn.coords()[c];
    let mut terms = vec![diff_chain(t.at(idx), coord, conn.chain())];
    let mut sub = idx.to_vec();
    for s in 0..idx.len() {
        for d in 0..t.dim {
            let g = conn.get(d, idx[s], c);
            if g.is_zero() {
                continue;
            }
            sub[s] = d;
            let comp = t.at(&sub);
            if !comp.is_zero() {
                terms.push(-(g * comp));
            }
        }
        sub[s] = idx[s];
    }
    Expr::sum(terms)
}

/// `T_{i₁…i_r|c} = T_{i₁…i_r,c} − Σ_s Γᵈ_{i_s c} T_{i₁…d…i_r}` for every sorted
/// `(i₁…i_r)` and every `c`.
pub fn cov_derivative(
    t: &SymTensorField,
    conn: &Connection,
) -> Result<BTreeMap<(Vec<usize>, usize), Expr>, TensorError> {
    if t.dim != conn.dim() {
        return Err(TensorError::DimensionMismatch(t.dim, conn.dim()));
    }
    let mut out = BTreeMap::new();
    for idx in t.comps.keys() {
        for c in 0..t.dim {
            out.insert((idx.clone(), c), simplify(&cov_component(t, conn, idx, c)));
        }
    }
    Ok(out)
}

/// `T_{(i₁…i_r|i_{r+1})}`, the symmetrized covariant derivative.
pub fn sym_cov_derivative(t: &SymTensorField, conn: &Connection) -> Result<SymTensorField, TensorError> {
    if t.dim != conn.dim() {
        return Err(TensorError::DimensionMismatch(t.dim, conn.dim()));
    }
    let r1 = t.order + 1;
    // T is already symmetric in its first r slots, so the full average over
    // (r+1)! permutations reduces to an average over the derivative slot.
    Ok(SymTensorField::from_fn(t.dim, r1, |idx| {
        let mut terms = Vec::with_capacity(r1);
        for k in 0..r1 {
            let mut rest = idx.to_vec();
            let c = rest.remove(k);
            terms.push(cov_component(t, conn, &rest, c));
        }
        simplify(&(Expr::ratio(1, r1 as i64) * Expr::sum(terms)))
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::{parse, ParseContext};

    fn ctx() -> ParseContext {
        ParseContext::new(["x", "y"], ["a", "b"])
    }

    fn e(t: &str) -> Expr {
        simplify(&parse(t, &ctx()).unwrap())
    }

    fn flat() -> Connection {
        Connection::flat(vec!["x".into(), "y".into()])
    }

    #[test]
    fn storage_and_access() {
        let mut c = SymTensorField::zero(2, 2);
        assert_eq!(c.len(), 3);
        c.set(&[1, 0], e("a")).unwrap();
        assert_eq!(c.get(&[0, 1]).unwrap(), &e("a"));
        assert_eq!(c.get(&[1, 0]).unwrap(), &e("a"));
        assert_eq!(c.get(&[0, 1, 1]), Err(TensorError::Arity { expected: 2, got: 3 }));
        assert!(matches!(c.get(&[0, 2]), Err(TensorError::IndexOutOfRange { .. })));
        let s = SymTensorField::scalar(2, e("x"));
        assert_eq!(s.get(&[]).unwrap(), &e("x"));
        assert_eq!(SymTensorField::zero(3, 4).len(), 15);
    }

    #[test]
    fn symmetrize_examples() {
        let t = symmetrize(2, 2, |i| match i {
            [0, 1] => e("a"),
            [1, 0] => e("b"),
            _ => Expr::zero(),
        });
        assert_eq!(t.get(&[0, 1]).unwrap(), &e("(a+b)/2"));
        let anti = symmetrize(2, 2, |i| match i {
            [0, 1] => e("x"),
            [1, 0] => e("-x"),
            _ => Expr::zero(),
        });
        assert!(anti.is_zero());
        let sym = SymTensorField::from_components(2, 3, [(vec![0, 0, 1], e("x*y")), (vec![1, 1, 1], e("a"))]).unwrap();
        assert_eq!(symmetrize(2, 3, |i| sym.at(i).clone()), sym);
    }

    #[test]
    fn flat_derivatives_are_partials() {
        let g = SymTensorField::scalar(2, e("x^2*y"));
        let grad = sym_cov_derivative(&g, &flat()).unwrap();
        assert_eq!(grad.at(&[0]), &e("2*x*y"));
        assert_eq!(grad.at(&[1]), &e("x^2"));
        let kv = SymTensorField::from_components(2, 1, [(vec![0], e("-y")), (vec![1], e("x"))]).unwrap();
        assert!(sym_cov_derivative(&kv, &flat()).unwrap().is_zero());
        let cst = SymTensorField::from_fn(2, 2, |_| e("a"));
        assert!(sym_cov_derivative(&cst, &flat()).unwrap().is_zero());
        let cov = cov_derivative(&kv, &flat()).unwrap();
        assert_eq!(cov[&(vec![0], 1)], Expr::int(-1));
        assert_eq!(cov.len(), 4);
    }

    #[test]
    fn contractions() {
        let t = SymTensorField::from_components(2, 2, [(vec![0, 1], e("a")), (vec![0, 0], e("b"))]).unwrap();
        let v = [e("x"), e("y")];
        assert_eq!(t.contract_all(&v), e("2*a*x*y + b*x^2"));
        let c = t.contract(&v);
        assert_eq!(c.at(&[0]), &e("b*x + a*y"));
        assert_eq!(c.at(&[1]), &e("a*x"));
        assert_eq!(multiplicity(&[0, 0, 1]), 3);
    }
}
