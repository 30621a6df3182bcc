//! Deciding whether an expression vanishes identically.
//!
//! First an exact pass: the expression is brought to rational normal form,
//! with transcendental subtrees and fractional-power roots treated as fresh
//! indeterminates (roots of polynomials reduced by `s^r = b`). A zero
//! numerator proves the identity. Otherwise the expression is sampled at
//! quasi-random points of a box.

use std::collections::BTreeMap;
use std::sync::Arc;

use num::One;
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::rational::{collect_atoms, convert, small_positive};
use super::{simplify, Compiled, Expr, Node, Number, Polynomial};
use crate::par::Exec;

/// Computes auxiliary symbol values from a point of the sampling box.
pub type DeriveFn = Arc<dyn Fn(&[f64]) -> Result<Vec<f64>, String> + Send + Sync>;

/// Where and how to sample.
#[derive(Clone)]
pub struct SampleDomain {
    /// Variable name with its closed interval.
    pub vars: Vec<(String, f64, f64)>,
    /// Numeric parameter values, substituted before testing.
    pub params: BTreeMap<String, f64>,
    /// Auxiliary symbols computed from each sample point.
    pub derived: Vec<String>,
    pub derive: Option<DeriveFn>,
}

impl std::fmt::Debug for SampleDomain {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SampleDomain")
            .field("vars", &self.vars)
            .field("params", &self.params)
            .field("derived", &self.derived)
            .finish()
    }
}

impl SampleDomain {
    pub fn new(vars: Vec<(String, f64, f64)>) -> Self {
        SampleDomain {
            vars,
            params: BTreeMap::new(),
            derived: Vec::new(),
            derive: None,
        }
    }

    pub fn with_params(mut self, params: BTreeMap<String, f64>) -> Self {
        self.params = params;
        self
    }

    pub fn with_derived(mut self, names: Vec<String>, f: DeriveFn) -> Self {
        self.derived = names;
        self.derive = Some(f);
        self
    }

    fn slot_names(&self) -> Vec<&str> {
        self.vars
            .iter()
            .map(|(n, _, _)| n.as_str())
            .chain(self.derived.iter().map(|s| s.as_str()))
            .collect()
    }
}

#[derive(Clone, Copy, Debug)]
pub struct ZeroTestConfig {
    pub samples: usize,
    pub rel_tol: f64,
    pub seed: u64,
    pub exec: Exec,
}

impl Default for ZeroTestConfig {
    fn default() -> Self {
        ZeroTestConfig {
            samples: 64,
            rel_tol: 1e-10,
            seed: 0x5eed,
            exec: Exec::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum ZeroVerdict {
    ExactZero,
    ProbablyZero,
    NonZero { witness: Vec<(String, f64)>, value: f64 },
}

impl ZeroVerdict {
    pub fn is_zero(&self) -> bool {
        !matches!(self, ZeroVerdict::NonZero { .. })
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ZeroTestError {
    #[error("every sample point was singular (last failure: {last_error})")]
    Indeterminate { attempts: usize, last_error: String },
    #[error("symbol `{0}` has no sampling range or value")]
    Unbound(String),
}

const PRIMES: [u32; 24] = [
    2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61, 67, 71, 73, 79, 83, 89,
];

fn radical_inverse(mut i: u64, base: u32) -> f64 {
    let b = base as u64;
    let mut f = 1.0;
    let mut r = 0.0;
    while i > 0 {
        f /= base as f64;
        r += f * (i % b) as f64;
        i /= b;
    }
    r
}

/// Point `i` of a shifted Halton sequence in `[0,1)^dim`.
pub(crate) fn halton(i: u64, shift: &[f64]) -> Vec<f64> {
    shift
        .iter()
        .enumerate()
        .map(|(d, s)| (radical_inverse(i + 1, PRIMES[d % PRIMES.len()]) + s).fract())
        .collect()
}

pub(crate) fn shifts(seed: u64, dim: usize) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..dim).map(|_| rng.random::<f64>()).collect()
}

fn has_float(e: &Expr) -> bool {
    let mut found = false;
    e.walk(&mut |n| {
        if let Node::Num(Number::Float(_)) = n.node() {
            found = true;
        }
    });
    found
}

enum Exact {
    Zero,
    NonZero { certain: bool },
}

fn exact_pass(e: &Expr, domain: &SampleDomain) -> Result<Exact, ZeroTestError> {
    let mut atoms = Vec::new();
    collect_atoms(e, &mut atoms);
    let mut names: Vec<String> = domain.vars.iter().map(|v| v.0.clone()).collect();
    names.extend(domain.derived.iter().cloned());
    let base = names.len();
    names.extend((0..atoms.len()).map(|i| format!("#{i}")));
    let vars = Arc::new(names);
    let table: BTreeMap<Expr, usize> = atoms.iter().enumerate().map(|(i, a)| (a.clone(), base + i)).collect();
    let r = match convert(e, &vars, &table) {
        Ok(r) => r,
        Err(super::NonRationalError::UnknownSymbol(s)) => return Err(ZeroTestError::Unbound(s)),
        Err(_) => return Ok(Exact::NonZero { certain: false }),
    };
    let mut num = r.numerator().clone();
    // Reduce s^r -> b for roots s = b^(1/r) of polynomial b.
    for (i, a) in atoms.iter().enumerate() {
        if let Node::Pow(b, q) = a.node() {
            let Some(order) = small_positive(q.denom()) else {
                continue;
            };
            if !q.numer().is_one() {
                continue;
            }
            let Ok(bp) = convert(b, &vars, &table) else { continue };
            if !bp.is_polynomial() {
                continue;
            }
            num = reduce_root(&num, base + i, order, bp.numerator());
        }
    }
    if num.is_zero() {
        return Ok(Exact::Zero);
    }
    let certain = atoms.is_empty() && domain.derived.is_empty() && !has_float(e);
    Ok(Exact::NonZero { certain })
}

fn reduce_root(p: &Polynomial, s: usize, order: u32, b: &Polynomial) -> Polynomial {
    let vars = p.vars().clone();
    let mut out = p.clone();
    loop {
        let mut changed = false;
        let mut next = Polynomial::zero(vars.clone());
        for (m, c) in out.terms() {
            if m[s] >= order {
                let mut m2 = m.clone();
                m2[s] -= order;
                let t = Polynomial::monomial(vars.clone(), m2, c.clone()).mul(b);
                next = next.add(&t);
                changed = true;
            } else {
                next = next.add(&Polynomial::monomial(vars.clone(), m.clone(), c.clone()));
            }
        }
        out = next;
        if !changed {
            return out;
        }
    }
}

struct Sampler {
    total: Compiled,
    terms: Vec<Compiled>,
}

impl Sampler {
    /// Value and local magnitude scale (sum of absolute top-level terms).
    fn at(&self, values: &[f64]) -> Result<(f64, f64), String> {
        let v = self.total.eval(values).map_err(|e| e.to_string())?;
        let mut scale = 0.0;
        for t in &self.terms {
            scale += t.eval(values).map_err(|e| e.to_string())?.abs();
        }
        if !v.is_finite() || !scale.is_finite() {
            return Err("non-finite value".into());
        }
        Ok((v, scale.max(v.abs())))
    }
}

/// Decides whether `e` vanishes identically on `domain`.
pub fn is_identically_zero(
    e: &Expr,
    domain: &SampleDomain,
    cfg: &ZeroTestConfig,
) -> Result<ZeroVerdict, ZeroTestError> {
    let e = simplify(&e.bind_params(&domain.params));
    if e.is_zero() {
        return Ok(ZeroVerdict::ExactZero);
    }
    let certain = match exact_pass(&e, domain)? {
        Exact::Zero => return Ok(ZeroVerdict::ExactZero),
        Exact::NonZero { certain } => certain,
    };

    let slots = domain.slot_names();
    let compile = |x: &Expr| {
        Compiled::new(x, &slots).map_err(|err| match err.kind {
            super::EvalErrorKind::Unbound(s) => ZeroTestError::Unbound(s),
            _ => ZeroTestError::Unbound(err.subtree),
        })
    };
    let sampler = Sampler {
        total: compile(&e)?,
        terms: match e.node() {
            Node::Add(ts) => ts.iter().map(&compile).collect::<Result<_, _>>()?,
            _ => Vec::new(),
        },
    };

    let dim = domain.vars.len();
    let shift = shifts(cfg.seed, dim);
    let n = cfg.samples.max(1);
    let mut valid: Vec<(Vec<f64>, f64, f64)> = Vec::new();
    let mut last_error = String::from("no samples");
    let mut attempts = 0usize;
    for batch in 0..4u64 {
        let start = batch * n as u64;
        let results = cfg.exec.map_range(n, |k| {
            let u = halton(start + k as u64, &shift);
            let mut point: Vec<f64> = domain
                .vars
                .iter()
                .zip(&u)
                .map(|((_, lo, hi), t)| lo + t * (hi - lo))
                .collect();
            if let Some(derive) = &domain.derive {
                let extra = derive(&point)?;
                point.extend(extra);
            }
            let (v, s) = sampler.at(&point)?;
            Ok::<_, String>((point, v, s))
        });
        attempts += n;
        for r in results {
            match r {
                Ok(sample) => {
                    if valid.len() < n {
                        valid.push(sample);
                    }
                }
                Err(e) => last_error = e,
            }
        }
        if valid.len() >= n {
            break;
        }
    }
    if valid.is_empty() {
        return Err(ZeroTestError::Indeterminate { attempts, last_error });
    }
    let witness = |p: &Vec<f64>, v: f64| ZeroVerdict::NonZero {
        witness: slots.iter().map(|s| s.to_string()).zip(p.iter().copied()).collect(),
        value: v,
    };
    for (p, v, s) in &valid {
        if v.abs() > cfg.rel_tol * (1.0 + s) {
            return Ok(witness(p, *v));
        }
    }
    if certain {
        let (p, v, _) = valid.iter().max_by(|a, b| a.1.abs().total_cmp(&b.1.abs())).unwrap();
        return Ok(witness(p, *v));
    }
    Ok(ZeroVerdict::ProbablyZero)
}

#[cfg(test)]
mod tests {
    use super::super::{diff, parse, ParseContext};
    use super::*;

    fn ctx() -> ParseContext {
        ParseContext::new(["x", "y", "z"], ["k", "p"])
    }

    fn box2() -> SampleDomain {
        SampleDomain::new(vec![("x".into(), 0.5, 2.0), ("y".into(), 0.5, 2.0)])
    }

    fn verdict(t: &str, d: &SampleDomain) -> ZeroVerdict {
        let e = parse(t, &ctx()).unwrap();
        is_identically_zero(&e, d, &ZeroTestConfig::default()).unwrap()
    }

    #[test]
    fn exact_cases() {
        assert_eq!(verdict("x - x", &box2()), ZeroVerdict::ExactZero);
        let g11 = parse("1/x", &ctx()).unwrap();
        let g22 = parse("1/y", &ctx()).unwrap();
        let crit = diff(&g11, "y") - diff(&g22, "x");
        assert_eq!(
            is_identically_zero(&crit, &box2(), &ZeroTestConfig::default()).unwrap(),
            ZeroVerdict::ExactZero
        );
        assert_eq!(
            verdict("sqrt(x^2+y^2)^3 - (x^2+y^2)*sqrt(x^2+y^2)", &box2()),
            ZeroVerdict::ExactZero
        );
        assert_eq!(
            verdict("exp(x)*exp(-x)*x - x*exp(x)/exp(x)", &box2()),
            ZeroVerdict::ExactZero
        );
    }

    #[test]
    fn nonzero_gets_a_witness() {
        let params: BTreeMap<String, f64> = [("k".to_string(), 2.0), ("p".to_string(), 1.0)].into();
        let d = box2().with_params(params);
        let g11 = parse("p/(k*y+p*x)", &ctx()).unwrap();
        let g22 = parse("p/(p*y-k*x)", &ctx()).unwrap();
        let crit = diff(&g11, "y") - diff(&g22, "x");
        let dd = SampleDomain::new(vec![("x".into(), 0.2, 0.45), ("y".into(), 1.0, 2.0)]).with_params(d.params.clone());
        match is_identically_zero(&crit, &dd, &ZeroTestConfig::default()).unwrap() {
            ZeroVerdict::NonZero { witness, value } => {
                assert_eq!(witness.len(), 2);
                assert!(value.abs() > 0.0);
            }
            v => panic!("{v:?}"),
        }
    }

    #[test]
    fn transcendental_identity_is_probably_zero() {
        let v = verdict("sin(x)^2 + cos(x)^2 - 1", &box2());
        assert_eq!(v, ZeroVerdict::ProbablyZero);
        assert!(matches!(verdict("sin(x) - x", &box2()), ZeroVerdict::NonZero { .. }));
    }

    #[test]
    fn singular_everywhere_is_indeterminate() {
        let e = parse("ln(-x^2 - 1)", &ctx()).unwrap();
        let r = is_identically_zero(&e, &box2(), &ZeroTestConfig::default());
        assert!(matches!(r, Err(ZeroTestError::Indeterminate { .. })), "{r:?}");
        let e = parse("z", &ctx()).unwrap();
        assert!(matches!(
            is_identically_zero(&e, &box2(), &ZeroTestConfig::default()),
            Err(ZeroTestError::Unbound(_))
        ));
    }

    #[test]
    fn sequential_and_parallel_agree() {
        let e = parse("sin(x*y) - x*y + (x*y)^3/6", &ctx()).unwrap();
        let mut cfg = ZeroTestConfig::default();
        let a = is_identically_zero(&e, &box2(), &cfg).unwrap();
        cfg.exec = Exec::Sequential;
        let b = is_identically_zero(&e, &box2(), &cfg).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn derived_symbols_are_sampled() {
        // F = x^2 on the sampled curve; F - x^2 is zero only through the hook.
        let ctx = ParseContext::new(["x", "F"], Vec::<String>::new());
        let e = parse("F - x^2", &ctx).unwrap();
        let d = SampleDomain::new(vec![("x".into(), 0.0, 1.0)])
            .with_derived(vec!["F".into()], Arc::new(|p: &[f64]| Ok(vec![p[0] * p[0]])));
        assert_eq!(
            is_identically_zero(&e, &d, &ZeroTestConfig::default()).unwrap(),
            ZeroVerdict::ProbablyZero
        );
    }
}
