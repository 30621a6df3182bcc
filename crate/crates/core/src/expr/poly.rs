//! Sparse multivariate polynomials and rational functions with exact
//! rational coefficients.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use num::{BigInt, BigRational, Integer, One, Signed, ToPrimitive, Zero};

use super::{simplify, Expr};

/// Exponent vector, one entry per declared variable.
pub type Monomial = Vec<u32>;

/// Polynomial over a declared variable list. Monomials compare
/// lexicographically with the first variable most significant.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Polynomial {
    vars: Arc<Vec<String>>,
    terms: BTreeMap<Monomial, BigRational>,
}

impl fmt::Debug for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Polynomial({})", self.to_expr())
    }
}

impl fmt::Display for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_expr())
    }
}

impl Polynomial {
    pub fn zero(vars: Arc<Vec<String>>) -> Self {
        Polynomial {
            vars,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(vars: Arc<Vec<String>>, c: BigRational) -> Self {
        let mut p = Self::zero(vars);
        if !c.is_zero() {
            let n = p.vars.len();
            p.terms.insert(vec![0; n], c);
        }
        p
    }

    pub fn one(vars: Arc<Vec<String>>) -> Self {
        Self::constant(vars, BigRational::one())
    }

    /// The variable with index `i`.
    pub fn var(vars: Arc<Vec<String>>, i: usize) -> Self {
        let mut m = vec![0; vars.len()];
        m[i] = 1;
        Self::monomial(vars, m, BigRational::one())
    }

    pub fn monomial(vars: Arc<Vec<String>>, m: Monomial, c: BigRational) -> Self {
        let mut p = Self::zero(vars);
        if !c.is_zero() {
            p.terms.insert(m, c);
        }
        p
    }

    pub fn vars(&self) -> &Arc<Vec<String>> {
        &self.vars
    }

    pub fn terms(&self) -> &BTreeMap<Monomial, BigRational> {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// The constant value, if the polynomial has no variable dependence.
    pub fn as_constant(&self) -> Option<BigRational> {
        match self.terms.len() {
            0 => Some(BigRational::zero()),
            1 => {
                let (m, c) = self.terms.iter().next().unwrap();
                m.iter().all(|&e| e == 0).then(|| c.clone())
            }
            _ => None,
        }
    }

    pub fn coeff(&self, m: &[u32]) -> BigRational {
        self.terms.get(m).cloned().unwrap_or_else(BigRational::zero)
    }

    /// Total degree (0 for the zero polynomial).
    pub fn total_degree(&self) -> u32 {
        self.terms.keys().map(|m| m.iter().sum()).max().unwrap_or(0)
    }

    pub fn degree_in(&self, i: usize) -> u32 {
        self.terms.keys().map(|m| m[i]).max().unwrap_or(0)
    }

    fn leading(&self) -> Option<(&Monomial, &BigRational)> {
        self.terms.iter().next_back()
    }

    fn add_term(&mut self, m: Monomial, c: BigRational) {
        if c.is_zero() {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.terms.entry(m) {
            Entry::Vacant(v) => {
                v.insert(c);
            }
            Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    pub fn add(&self, other: &Polynomial) -> Polynomial {
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), c.clone());
        }
        out
    }

    pub fn sub(&self, other: &Polynomial) -> Polynomial {
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), -c);
        }
        out
    }

    pub fn neg(&self) -> Polynomial {
        self.scale(&-BigRational::one())
    }

    pub fn scale(&self, c: &BigRational) -> Polynomial {
        if c.is_zero() {
            return Self::zero(self.vars.clone());
        }
        Polynomial {
            vars: self.vars.clone(),
            terms: self.terms.iter().map(|(m, a)| (m.clone(), a * c)).collect(),
        }
    }

    pub fn mul(&self, other: &Polynomial) -> Polynomial {
        let mut out = Self::zero(self.vars.clone());
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
                let m: Monomial = ma.iter().zip(mb).map(|(a, b)| a + b).collect();
                out.add_term(m, ca * cb);
            }
        }
        out
    }

    pub fn pow(&self, n: u32) -> Polynomial {
        let mut acc = Self::one(self.vars.clone());
        let mut base = self.clone();
        let mut n = n;
        while n > 0 {
            if n & 1 == 1 {
                acc = acc.mul(&base);
            }
            n >>= 1;
            if n > 0 {
                base = base.mul(&base);
            }
        }
        acc
    }

    /// ∂/∂(variable i).
    pub fn derivative(&self, i: usize) -> Polynomial {
        let mut out = Self::zero(self.vars.clone());
        for (m, c) in &self.terms {
            if m[i] == 0 {
                continue;
            }
            let mut m2 = m.clone();
            m2[i] -= 1;
            out.add_term(m2, c * BigRational::from_integer(BigInt::from(m[i])));
        }
        out
    }

    /// Exact quotient `self / d`, or `None` if `d` does not divide `self`.
    pub fn div_exact(&self, d: &Polynomial) -> Option<Polynomial> {
        let (dm, dc) = d.leading()?;
        let (dm, dc) = (dm.clone(), dc.clone());
        let mut rem = self.clone();
        let mut q = Self::zero(self.vars.clone());
        while let Some((rm, rc)) = rem.leading() {
            if rm.iter().zip(&dm).any(|(a, b)| a < b) {
                return None;
            }
            let m: Monomial = rm.iter().zip(&dm).map(|(a, b)| a - b).collect();
            let c = rc / &dc;
            let t = Self::monomial(self.vars.clone(), m.clone(), c.clone());
            rem = rem.sub(&d.mul(&t));
            q.add_term(m, c);
        }
        Some(q)
    }

    /// Positive rational content: gcd of numerators over lcm of denominators,
    /// signed so that the primitive part has a positive leading coefficient.
    pub fn content(&self) -> BigRational {
        let mut g = BigInt::zero();
        let mut l = BigInt::one();
        for c in self.terms.values() {
            g = g.gcd(c.numer());
            l = l.lcm(c.denom());
        }
        if g.is_zero() {
            return BigRational::one();
        }
        let mut c = BigRational::new(g, l);
        if self.leading().is_some_and(|(_, lc)| lc.is_negative()) {
            c = -c;
        }
        c
    }

    /// `self / content()`: integer coefficients with gcd 1, positive leading term.
    pub fn primitive(&self) -> Polynomial {
        self.scale(&self.content().recip())
    }

    /// Largest monomial dividing every term.
    pub fn monomial_gcd(&self) -> Monomial {
        let n = self.vars.len();
        let mut g: Option<Monomial> = None;
        for m in self.terms.keys() {
            g = Some(match g {
                None => m.clone(),
                Some(g) => g.iter().zip(m).map(|(a, b)| *a.min(b)).collect(),
            });
        }
        g.unwrap_or_else(|| vec![0; n])
    }

    pub fn eval_f64(&self, point: &[f64]) -> f64 {
        self.terms
            .iter()
            .map(|(m, c)| {
                let mut v = c.to_f64().unwrap_or(f64::NAN);
                for (x, &e) in point.iter().zip(m) {
                    if e > 0 {
                        v *= x.powi(e as i32);
                    }
                }
                v
            })
            .sum()
    }

    /// Re-expresses the polynomial over a larger variable list that contains
    /// every current variable.
    pub fn lift(&self, vars: &Arc<Vec<String>>) -> Polynomial {
        if Arc::ptr_eq(vars, &self.vars) || **vars == *self.vars {
            return Polynomial {
                vars: vars.clone(),
                terms: self.terms.clone(),
            };
        }
        let map: Vec<usize> = self
            .vars
            .iter()
            .map(|v| {
                vars.iter()
                    .position(|w| w == v)
                    .expect("variable missing from lift target")
            })
            .collect();
        let mut out = Self::zero(vars.clone());
        for (m, c) in &self.terms {
            let mut m2 = vec![0; vars.len()];
            for (i, &e) in m.iter().enumerate() {
                m2[map[i]] = e;
            }
            out.add_term(m2, c.clone());
        }
        out
    }

    pub fn to_expr(&self) -> Expr {
        let terms = self.terms.iter().rev().map(|(m, c)| {
            let mut f = vec![Expr::rational(c.clone())];
            for (i, &e) in m.iter().enumerate() {
                if e > 0 {
                    f.push(Expr::var(&self.vars[i]).pow_int(e as i64));
                }
            }
            Expr::product(f)
        });
        simplify(&Expr::sum(terms))
    }
}

/// Quotient of polynomials with the denominator kept as a product of
/// primitive factors. Zero iff the numerator is zero.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RationalFunction {
    num: Polynomial,
    den: BTreeMap<Polynomial, u32>,
}

impl RationalFunction {
    pub fn from_poly(p: Polynomial) -> Self {
        RationalFunction {
            num: p,
            den: BTreeMap::new(),
        }
    }

    pub fn zero(vars: Arc<Vec<String>>) -> Self {
        Self::from_poly(Polynomial::zero(vars))
    }

    pub fn constant(vars: Arc<Vec<String>>, c: BigRational) -> Self {
        Self::from_poly(Polynomial::constant(vars, c))
    }

    pub fn numerator(&self) -> &Polynomial {
        &self.num
    }

    pub fn denominator_factors(&self) -> &BTreeMap<Polynomial, u32> {
        &self.den
    }

    /// The denominator multiplied out.
    pub fn denominator(&self) -> Polynomial {
        self.den
            .iter()
            .fold(Polynomial::one(self.num.vars.clone()), |acc, (f, &e)| {
                acc.mul(&f.pow(e))
            })
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn is_polynomial(&self) -> bool {
        self.den.is_empty()
    }

    fn vars(&self) -> &Arc<Vec<String>> {
        &self.num.vars
    }

    fn cancel(mut self) -> Self {
        if self.num.is_zero() {
            self.den.clear();
            return self;
        }
        let keys: Vec<Polynomial> = self.den.keys().cloned().collect();
        for f in keys {
            loop {
                let e = self.den[&f];
                if e == 0 {
                    break;
                }
                match self.num.div_exact(&f) {
                    Some(q) => {
                        self.num = q;
                        *self.den.get_mut(&f).unwrap() -= 1;
                    }
                    None => break,
                }
            }
            if self.den[&f] == 0 {
                self.den.remove(&f);
            }
        }
        self
    }

    /// Inserts polynomial `p` (nonzero) into a factored denominator, splitting
    /// off monomial and already-known factors. Returns the constant left over.
    fn push_factor(den: &mut BTreeMap<Polynomial, u32>, p: &Polynomial, mult: u32) -> BigRational {
        let vars = p.vars.clone();
        let content = p.content();
        let mut p = p.scale(&content.recip());
        let g = p.monomial_gcd();
        if g.iter().any(|&e| e > 0) {
            for (i, &e) in g.iter().enumerate() {
                if e > 0 {
                    *den.entry(Polynomial::var(vars.clone(), i)).or_insert(0) += e * mult;
                }
            }
            let mono = Polynomial::monomial(vars.clone(), g, BigRational::one());
            p = p.div_exact(&mono).expect("monomial gcd divides");
        }
        let known: Vec<Polynomial> = den.keys().cloned().collect();
        for f in known {
            while p.as_constant().is_none() && f.total_degree() <= p.total_degree() {
                match p.div_exact(&f) {
                    Some(q) => {
                        *den.get_mut(&f).unwrap() += mult;
                        p = q;
                    }
                    None => break,
                }
            }
        }
        let mut leftover = content.pow(mult as i32);
        match p.as_constant() {
            Some(c) => leftover *= c.pow(mult as i32),
            None => {
                let c = p.content();
                let p = p.scale(&c.recip());
                leftover *= c.pow(mult as i32);
                *den.entry(p).or_insert(0) += mult;
            }
        }
        leftover
    }

    pub fn neg(&self) -> Self {
        RationalFunction {
            num: self.num.neg(),
            den: self.den.clone(),
        }
    }

    pub fn scale(&self, c: &BigRational) -> Self {
        RationalFunction {
            num: self.num.scale(c),
            den: self.den.clone(),
        }
        .cancel()
    }

    pub fn mul(&self, other: &Self) -> Self {
        if self.is_zero() || other.is_zero() {
            return Self::zero(self.vars().clone());
        }
        let mut den = self.den.clone();
        for (f, e) in &other.den {
            *den.entry(f.clone()).or_insert(0) += e;
        }
        RationalFunction {
            num: self.num.mul(&other.num),
            den,
        }
        .cancel()
    }

    pub fn add(&self, other: &Self) -> Self {
        if self.is_zero() {
            return other.clone();
        }
        if other.is_zero() {
            return self.clone();
        }
        let mut lcm = self.den.clone();
        for (f, &e) in &other.den {
            let slot = lcm.entry(f.clone()).or_insert(0);
            *slot = (*slot).max(e);
        }
        let lift = |r: &Self| {
            let mut p = r.num.clone();
            for (f, &e) in &lcm {
                let have = r.den.get(f).copied().unwrap_or(0);
                if e > have {
                    p = p.mul(&f.pow(e - have));
                }
            }
            p
        };
        RationalFunction {
            num: lift(self).add(&lift(other)),
            den: lcm.clone(),
        }
        .cancel()
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    /// Multiplicative inverse; `None` for zero.
    pub fn recip(&self) -> Option<Self> {
        if self.is_zero() {
            return None;
        }
        let mut den = BTreeMap::new();
        let c = Self::push_factor(&mut den, &self.num, 1);
        let num = self.denominator().scale(&c.recip());
        Some(RationalFunction { num, den }.cancel())
    }

    pub fn div(&self, other: &Self) -> Option<Self> {
        Some(self.mul(&other.recip()?))
    }

    pub fn powi(&self, n: i64) -> Option<Self> {
        let base = if n < 0 { self.recip()? } else { self.clone() };
        let k = n.unsigned_abs() as u32;
        let mut den = base.den.clone();
        den.values_mut().for_each(|e| *e *= k);
        Some(
            RationalFunction {
                num: base.num.pow(k),
                den,
            }
            .cancel(),
        )
    }

    /// ∂/∂(variable i) via the quotient rule on the factored denominator.
    pub fn derivative(&self, i: usize) -> Self {
        if self.is_zero() {
            return self.clone();
        }
        // d(N / Π f^e) = (N' Π f - N Σ e f' Π_{g≠f} g) / Π f^(e+1)
        let vars = self.vars().clone();
        let mut out_num = self.num.derivative(i);
        let all: Vec<(&Polynomial, u32)> = self.den.iter().map(|(f, e)| (f, *e)).collect();
        let mut den = self.den.clone();
        let mut touched = Vec::new();
        for (f, _) in &all {
            let df = f.derivative(i);
            if !df.is_zero() {
                touched.push((*f).clone());
            }
        }
        if touched.is_empty() {
            return RationalFunction { num: out_num, den }.cancel();
        }
        let prod_touched = touched.iter().fold(Polynomial::one(vars.clone()), |acc, f| acc.mul(f));
        out_num = out_num.mul(&prod_touched);
        for f in &touched {
            let e = self.den[f];
            let mut others = Polynomial::one(vars.clone());
            for g in &touched {
                if g != f {
                    others = others.mul(g);
                }
            }
            let term = self
                .num
                .mul(&f.derivative(i))
                .mul(&others)
                .scale(&BigRational::from_integer(BigInt::from(e)));
            out_num = out_num.sub(&term);
            *den.get_mut(f).unwrap() += 1;
        }
        RationalFunction { num: out_num, den }.cancel()
    }

    pub fn eval_f64(&self, point: &[f64]) -> f64 {
        let mut v = self.num.eval_f64(point);
        for (f, &e) in &self.den {
            v /= f.eval_f64(point).powi(e as i32);
        }
        v
    }

    pub fn lift(&self, vars: &Arc<Vec<String>>) -> Self {
        RationalFunction {
            num: self.num.lift(vars),
            den: self.den.iter().map(|(f, e)| (f.lift(vars), *e)).collect(),
        }
    }

    pub fn to_expr(&self) -> Expr {
        let mut f = vec![self.num.to_expr()];
        for (p, &e) in &self.den {
            f.push(p.to_expr().pow_int(-(e as i64)));
        }
        simplify(&Expr::product(f))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn vars() -> Arc<Vec<String>> {
        Arc::new(vec!["x".to_string(), "y".to_string()])
    }

    fn x() -> Polynomial {
        Polynomial::var(vars(), 0)
    }

    fn y() -> Polynomial {
        Polynomial::var(vars(), 1)
    }

    fn c(n: i64) -> Polynomial {
        Polynomial::constant(vars(), BigRational::from_integer(n.into()))
    }

    #[test]
    fn arithmetic_is_exact() {
        let p = x().add(&y());
        let q = x().sub(&y());
        let prod = p.mul(&q);
        assert_eq!(prod, x().pow(2).sub(&y().pow(2)));
        assert_eq!(prod.div_exact(&p), Some(q.clone()));
        assert_eq!(prod.add(&prod.neg()), c(0));
        assert!(prod.terms().values().all(|c| !c.is_zero()));
        assert_eq!(x().pow(2).add(&c(1)).div_exact(&x()), None);
    }

    #[test]
    fn content_and_primitive_part() {
        let p = x().scale(&BigRational::new((-4).into(), 6.into())).add(&c(2));
        let prim = p.primitive();
        assert_eq!(prim, x().sub(&c(3)));
    }

    #[test]
    fn rational_function_cancellation() {
        let a = RationalFunction::from_poly(x().pow(2).sub(&y().pow(2)));
        let b = RationalFunction::from_poly(x().sub(&y()));
        let q = a.div(&b).unwrap();
        assert!(q.is_polynomial());
        assert_eq!(q.numerator(), &x().add(&y()));

        let inv_x = RationalFunction::from_poly(x()).recip().unwrap();
        let s = inv_x.add(&inv_x.neg());
        assert!(s.is_zero());
        let t = inv_x.mul(&RationalFunction::from_poly(x().mul(&y())));
        assert_eq!(t, RationalFunction::from_poly(y()));
    }

    #[test]
    fn quotient_rule_matches_finite_difference() {
        let r = RationalFunction::from_poly(x().mul(&y()).add(&c(3)))
            .div(&RationalFunction::from_poly(x().pow(2).add(&y()).mul(&x())))
            .unwrap();
        let d = r.derivative(0);
        let (px, py) = (1.3, 0.7);
        let h = 1e-6;
        let fd = (r.eval_f64(&[px + h, py]) - r.eval_f64(&[px - h, py])) / (2.0 * h);
        assert!((fd - d.eval_f64(&[px, py])).abs() < 1e-6);
    }
}
