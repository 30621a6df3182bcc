//! Symbolic expressions over named coordinates and parameters.
//!
//! An [`Expr`] is an immutable, reference-counted tree. Trees produced by
//! [`parse`] keep the shape of the source text; [`simplify`] rewrites them into
//! a canonical form (flattened sums and products, collected terms, exact
//! rational constants) that the differentiator, printer and rational
//! normal-form code all rely on.

mod diff;
mod eval;
mod parse;
mod poly;
mod print;
mod rational;
mod simplify;
mod zero;

use std::cmp::Ordering;
use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

use num::{BigInt, BigRational, One, Signed, ToPrimitive, Zero};

pub use diff::{diff, diff_chain, ChainRule};
pub use eval::{eval, Compiled, EvalError, EvalErrorKind};
pub use parse::{parse, ParseContext, ParseError};
pub use poly::{Monomial, Polynomial, RationalFunction};
pub use rational::{rational_from_f64, to_polynomial, to_rational, NonRationalError};
pub use simplify::simplify;
pub use zero::{is_identically_zero, DeriveFn, SampleDomain, ZeroTestConfig, ZeroTestError, ZeroVerdict};

/// Numeric literal: exact rational or IEEE double.
#[derive(Clone, Debug)]
pub enum Number {
    Rational(BigRational),
    Float(f64),
}

impl Number {
    pub fn int(n: i64) -> Self {
        Number::Rational(BigRational::from_integer(BigInt::from(n)))
    }

    pub fn ratio(n: i64, d: i64) -> Self {
        Number::Rational(BigRational::new(BigInt::from(n), BigInt::from(d)))
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            Number::Rational(r) => r.to_f64().unwrap_or(f64::NAN),
            Number::Float(f) => *f,
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Number::Rational(r) => r.is_zero(),
            Number::Float(f) => *f == 0.0,
        }
    }

    pub fn is_one(&self) -> bool {
        match self {
            Number::Rational(r) => r.is_one(),
            Number::Float(f) => *f == 1.0,
        }
    }

    pub fn is_negative(&self) -> bool {
        match self {
            Number::Rational(r) => r.is_negative(),
            Number::Float(f) => *f < 0.0,
        }
    }

    pub fn as_rational(&self) -> Option<&BigRational> {
        match self {
            Number::Rational(r) => Some(r),
            Number::Float(_) => None,
        }
    }

    pub fn add(&self, other: &Number) -> Number {
        match (self, other) {
            (Number::Rational(a), Number::Rational(b)) => Number::Rational(a + b),
            _ => Number::Float(self.to_f64() + other.to_f64()),
        }
    }

    pub fn mul(&self, other: &Number) -> Number {
        match (self, other) {
            (Number::Rational(a), Number::Rational(b)) => Number::Rational(a * b),
            _ => Number::Float(self.to_f64() * other.to_f64()),
        }
    }

    pub fn neg(&self) -> Number {
        match self {
            Number::Rational(r) => Number::Rational(-r),
            Number::Float(f) => Number::Float(-f),
        }
    }

    /// Integer or rational power. Returns `None` when the result is not
    /// representable exactly (or would divide by zero).
    pub fn pow(&self, exp: &BigRational) -> Option<Number> {
        match self {
            Number::Rational(r) => {
                if !exp.is_integer() {
                    return None;
                }
                let n = exp.to_integer().to_i32()?;
                if r.is_zero() && n < 0 {
                    return None;
                }
                Some(Number::Rational(num::pow::Pow::pow(r, n)))
            }
            Number::Float(f) => {
                let e = exp.to_f64()?;
                if *f == 0.0 && e < 0.0 {
                    return None;
                }
                if *f < 0.0 && !exp.is_integer() {
                    return None;
                }
                Some(Number::Float(f.powf(e)))
            }
        }
    }

    fn cmp_total(&self, other: &Number) -> Ordering {
        match (self, other) {
            (Number::Rational(a), Number::Rational(b)) => a.cmp(b),
            (Number::Float(a), Number::Float(b)) => a.total_cmp(b),
            (Number::Rational(_), Number::Float(_)) => Ordering::Less,
            (Number::Float(_), Number::Rational(_)) => Ordering::Greater,
        }
    }
}

impl PartialEq for Number {
    fn eq(&self, other: &Self) -> bool {
        self.cmp_total(other) == Ordering::Equal
    }
}

impl Eq for Number {}

/// Elementary functions available in the grammar.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Func {
    Exp,
    Ln,
    Sqrt,
    Sin,
    Cos,
}

impl Func {
    pub fn name(self) -> &'static str {
        match self {
            Func::Exp => "exp",
            Func::Ln => "ln",
            Func::Sqrt => "sqrt",
            Func::Sin => "sin",
            Func::Cos => "cos",
        }
    }

    pub fn from_name(name: &str) -> Option<Func> {
        Some(match name {
            "exp" => Func::Exp,
            "ln" => Func::Ln,
            "sqrt" => Func::Sqrt,
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            _ => return None,
        })
    }
}

/// One node of an expression tree.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Node {
    Num(Number),
    /// A coordinate, velocity, the time symbol, or an auxiliary variable.
    Var(Arc<str>),
    /// A named constant bound to a number at evaluation time.
    Param(Arc<str>),
    Neg(Expr),
    Add(Vec<Expr>),
    Sub(Expr, Expr),
    Mul(Vec<Expr>),
    Div(Expr, Expr),
    Pow(Expr, BigRational),
    Func(Func, Expr),
}

/// Shared handle to an immutable expression tree.
#[derive(Clone, PartialEq, Eq)]
pub struct Expr(Arc<Node>);

impl Expr {
    pub fn new(node: Node) -> Self {
        Expr(Arc::new(node))
    }

    pub fn node(&self) -> &Node {
        &self.0
    }

    pub fn num(n: Number) -> Self {
        Expr::new(Node::Num(n))
    }

    pub fn int(n: i64) -> Self {
        Expr::num(Number::int(n))
    }

    pub fn ratio(n: i64, d: i64) -> Self {
        Expr::num(Number::ratio(n, d))
    }

    pub fn rational(r: BigRational) -> Self {
        Expr::num(Number::Rational(r))
    }

    pub fn float(f: f64) -> Self {
        Expr::num(Number::Float(f))
    }

    pub fn zero() -> Self {
        Expr::int(0)
    }

    pub fn one() -> Self {
        Expr::int(1)
    }

    pub fn var(name: &str) -> Self {
        Expr::new(Node::Var(Arc::from(name)))
    }

    pub fn param(name: &str) -> Self {
        Expr::new(Node::Param(Arc::from(name)))
    }

    pub fn pow_int(&self, n: i64) -> Self {
        Expr::new(Node::Pow(self.clone(), BigRational::from_integer(BigInt::from(n))))
    }

    pub fn pow_rational(&self, q: BigRational) -> Self {
        Expr::new(Node::Pow(self.clone(), q))
    }

    pub fn apply(f: Func, arg: Expr) -> Self {
        Expr::new(Node::Func(f, arg))
    }

    pub fn exp(&self) -> Self {
        Expr::apply(Func::Exp, self.clone())
    }

    pub fn ln(&self) -> Self {
        Expr::apply(Func::Ln, self.clone())
    }

    pub fn sqrt(&self) -> Self {
        Expr::apply(Func::Sqrt, self.clone())
    }

    /// Sum of the given terms (not simplified).
    pub fn sum<I: IntoIterator<Item = Expr>>(terms: I) -> Self {
        let terms: Vec<Expr> = terms.into_iter().collect();
        match terms.len() {
            0 => Expr::zero(),
            1 => terms.into_iter().next().unwrap(),
            _ => Expr::new(Node::Add(terms)),
        }
    }

    /// Product of the given factors (not simplified).
    pub fn product<I: IntoIterator<Item = Expr>>(factors: I) -> Self {
        let factors: Vec<Expr> = factors.into_iter().collect();
        match factors.len() {
            0 => Expr::one(),
            1 => factors.into_iter().next().unwrap(),
            _ => Expr::new(Node::Mul(factors)),
        }
    }

    pub fn as_number(&self) -> Option<&Number> {
        match self.node() {
            Node::Num(n) => Some(n),
            _ => None,
        }
    }

    /// True when the expression is literally the number zero.
    pub fn is_zero(&self) -> bool {
        matches!(self.as_number(), Some(n) if n.is_zero())
    }

    pub fn is_one(&self) -> bool {
        matches!(self.as_number(), Some(n) if n.is_one())
    }

    /// Direct children of this node.
    pub fn children(&self) -> Vec<&Expr> {
        match self.node() {
            Node::Num(_) | Node::Var(_) | Node::Param(_) => vec![],
            Node::Neg(a) | Node::Pow(a, _) | Node::Func(_, a) => vec![a],
            Node::Sub(a, b) | Node::Div(a, b) => vec![a, b],
            Node::Add(v) | Node::Mul(v) => v.iter().collect(),
        }
    }

    /// Names of all variables occurring in the tree.
    pub fn variables(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.walk(&mut |e| {
            if let Node::Var(v) = e.node() {
                out.insert(v.to_string());
            }
        });
        out
    }

    /// Names of all parameters occurring in the tree.
    pub fn parameters(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.walk(&mut |e| {
            if let Node::Param(v) = e.node() {
                out.insert(v.to_string());
            }
        });
        out
    }

    pub fn walk(&self, f: &mut dyn FnMut(&Expr)) {
        f(self);
        for c in self.children() {
            c.walk(f);
        }
    }

    /// Rebuilds the tree bottom-up, replacing every node for which `f`
    /// returns `Some`.
    pub fn map(&self, f: &dyn Fn(&Expr) -> Option<Expr>) -> Expr {
        if let Some(r) = f(self) {
            return r;
        }
        match self.node() {
            Node::Num(_) | Node::Var(_) | Node::Param(_) => self.clone(),
            Node::Neg(a) => Expr::new(Node::Neg(a.map(f))),
            Node::Add(v) => Expr::new(Node::Add(v.iter().map(|c| c.map(f)).collect())),
            Node::Mul(v) => Expr::new(Node::Mul(v.iter().map(|c| c.map(f)).collect())),
            Node::Sub(a, b) => Expr::new(Node::Sub(a.map(f), b.map(f))),
            Node::Div(a, b) => Expr::new(Node::Div(a.map(f), b.map(f))),
            Node::Pow(a, q) => Expr::new(Node::Pow(a.map(f), q.clone())),
            Node::Func(g, a) => Expr::new(Node::Func(*g, a.map(f))),
        }
    }

    /// Replaces variables or parameters by expressions. Names not in the
    /// table are left alone.
    pub fn substitute(&self, table: &[(&str, Expr)]) -> Expr {
        self.map(&|e| match e.node() {
            Node::Var(v) | Node::Param(v) => table.iter().find(|(n, _)| *n == &**v).map(|(_, r)| r.clone()),
            _ => None,
        })
    }

    /// Replaces parameters by their exact numeric values.
    pub fn bind_params(&self, params: &std::collections::BTreeMap<String, f64>) -> Expr {
        self.map(&|e| match e.node() {
            Node::Param(p) => params.get(&**p).map(|v| Expr::rational(rational_from_f64(*v))),
            _ => None,
        })
    }

    /// Number of nodes in the tree.
    pub fn size(&self) -> usize {
        let mut n = 0;
        self.walk(&mut |_| n += 1);
        n
    }

    fn tag(&self) -> u8 {
        match self.node() {
            Node::Num(_) => 0,
            Node::Param(_) => 1,
            Node::Var(_) => 2,
            Node::Pow(..) => 3,
            Node::Func(..) => 4,
            Node::Mul(_) => 5,
            Node::Add(_) => 6,
            Node::Neg(_) => 7,
            Node::Sub(..) => 8,
            Node::Div(..) => 9,
        }
    }
}

impl Ord for Expr {
    fn cmp(&self, other: &Self) -> Ordering {
        if Arc::ptr_eq(&self.0, &other.0) {
            return Ordering::Equal;
        }
        let t = self.tag().cmp(&other.tag());
        if t != Ordering::Equal {
            return t;
        }
        match (self.node(), other.node()) {
            (Node::Num(a), Node::Num(b)) => a.cmp_total(b),
            (Node::Var(a), Node::Var(b)) | (Node::Param(a), Node::Param(b)) => a.cmp(b),
            (Node::Neg(a), Node::Neg(b)) => a.cmp(b),
            (Node::Pow(a, p), Node::Pow(b, q)) => a.cmp(b).then_with(|| p.cmp(q)),
            (Node::Func(f, a), Node::Func(g, b)) => f.cmp(g).then_with(|| a.cmp(b)),
            (Node::Add(a), Node::Add(b)) | (Node::Mul(a), Node::Mul(b)) => a.len().cmp(&b.len()).then_with(|| a.cmp(b)),
            (Node::Sub(a, c), Node::Sub(b, d)) | (Node::Div(a, c), Node::Div(b, d)) => a.cmp(b).then_with(|| c.cmp(d)),
            _ => unreachable!("tags are equal"),
        }
    }
}

impl PartialOrd for Expr {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Debug for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Expr({self})")
    }
}

macro_rules! binop {
    ($trait:ident, $method:ident, $build:expr) => {
        impl std::ops::$trait<Expr> for Expr {
            type Output = Expr;
            fn $method(self, rhs: Expr) -> Expr {
                $build(self, rhs)
            }
        }
        impl std::ops::$trait<&Expr> for &Expr {
            type Output = Expr;
            fn $method(self, rhs: &Expr) -> Expr {
                $build(self.clone(), rhs.clone())
            }
        }
        impl std::ops::$trait<Expr> for &Expr {
            type Output = Expr;
            fn $method(self, rhs: Expr) -> Expr {
                $build(self.clone(), rhs)
            }
        }
        impl std::ops::$trait<&Expr> for Expr {
            type Output = Expr;
            fn $method(self, rhs: &Expr) -> Expr {
                $build(self, rhs.clone())
            }
        }
    };
}

binop!(Add, add, |a, b| Expr::new(Node::Add(vec![a, b])));
binop!(Sub, sub, |a, b| Expr::new(Node::Sub(a, b)));
binop!(Mul, mul, |a, b| Expr::new(Node::Mul(vec![a, b])));
binop!(Div, div, |a, b| Expr::new(Node::Div(a, b)));

impl std::ops::Neg for Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        Expr::new(Node::Neg(self))
    }
}

impl std::ops::Neg for &Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        Expr::new(Node::Neg(self.clone()))
    }
}

impl From<i64> for Expr {
    fn from(n: i64) -> Self {
        Expr::int(n)
    }
}

/// Parses and simplifies an expression in one step; panics on malformed
/// input. Intended for built-in tables whose text is fixed at compile time.
pub fn expr(text: &str, ctx: &ParseContext) -> Expr {
    match parse(text, ctx) {
        Ok(e) => simplify(&e),
        Err(err) => panic!("built-in expression {text:?} failed to parse: {err}"),
    }
}
