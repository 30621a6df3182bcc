//! Canonical-form rewriting.
//!
//! Canonical trees contain only `Num`, `Var`, `Param`, `Add`, `Mul`, `Pow`
//! and `Func` (never `Sqrt`, which becomes a power of 1/2). Sums and products
//! are flat, sorted, and have like terms/factors collected; a numeric
//! coefficient, if any, is the first child of a product.

use std::collections::BTreeMap;

use num::{BigRational, One, Signed, Zero};

use super::{Expr, Func, Node, Number};

/// Rewrites `e` into canonical form. Idempotent.
pub fn simplify(e: &Expr) -> Expr {
    match e.node() {
        Node::Num(_) | Node::Var(_) | Node::Param(_) => e.clone(),
        Node::Neg(a) => mul(vec![Expr::int(-1), simplify(a)]),
        Node::Add(v) => add(v.iter().map(simplify).collect()),
        Node::Sub(a, b) => add(vec![simplify(a), mul(vec![Expr::int(-1), simplify(b)])]),
        Node::Mul(v) => mul(v.iter().map(simplify).collect()),
        Node::Div(a, b) => mul(vec![simplify(a), pow(simplify(b), -BigRational::one())]),
        Node::Pow(a, q) => pow(simplify(a), q.clone()),
        Node::Func(f, a) => func(*f, simplify(a)),
    }
}

/// Splits a canonical term into numeric coefficient and remaining factor.
pub(crate) fn split_coeff(e: &Expr) -> (Number, Expr) {
    match e.node() {
        Node::Num(n) => (n.clone(), Expr::one()),
        Node::Mul(v) => match v[0].node() {
            Node::Num(n) => {
                let rest = v[1..].to_vec();
                let rest = if rest.len() == 1 {
                    rest.into_iter().next().unwrap()
                } else {
                    Expr::new(Node::Mul(rest))
                };
                (n.clone(), rest)
            }
            _ => (Number::int(1), e.clone()),
        },
        _ => (Number::int(1), e.clone()),
    }
}

fn add(terms: Vec<Expr>) -> Expr {
    let mut constant = Number::int(0);
    let mut collected: BTreeMap<Expr, Number> = BTreeMap::new();
    let mut push = |t: &Expr, constant: &mut Number| {
        let (c, rest) = split_coeff(t);
        if rest.is_one() {
            *constant = constant.add(&c);
        } else {
            let slot = collected.entry(rest).or_insert(Number::int(0));
            *slot = slot.add(&c);
        }
    };
    for t in &terms {
        match t.node() {
            Node::Add(inner) => inner.iter().for_each(|s| push(s, &mut constant)),
            _ => push(t, &mut constant),
        }
    }
    let mut out = Vec::with_capacity(collected.len() + 1);
    if !constant.is_zero() {
        out.push(Expr::num(constant));
    }
    for (rest, c) in collected {
        if c.is_zero() {
            continue;
        }
        out.push(scale(c, rest));
    }
    out.sort();
    match out.len() {
        0 => Expr::zero(),
        1 => out.pop().unwrap(),
        _ => Expr::new(Node::Add(out)),
    }
}

/// `c * rest` for canonical `rest`, without re-collecting.
fn scale(c: Number, rest: Expr) -> Expr {
    if c.is_one() {
        return rest;
    }
    let mut factors = vec![Expr::num(c)];
    match rest.node() {
        Node::Mul(v) => factors.extend(v.iter().cloned()),
        _ => factors.push(rest),
    }
    Expr::new(Node::Mul(factors))
}

fn mul(factors: Vec<Expr>) -> Expr {
    let mut coeff = Number::int(1);
    let mut powers: BTreeMap<Expr, BigRational> = BTreeMap::new();
    // Exponentials merge into a single exp of the summed arguments.
    let mut exp_args: Vec<Expr> = Vec::new();
    let mut push = |f: &Expr, coeff: &mut Number| match f.node() {
        Node::Num(n) => *coeff = coeff.mul(n),
        Node::Func(Func::Exp, a) => exp_args.push(a.clone()),
        Node::Pow(b, q) if q.is_integer() && matches!(b.node(), Node::Func(Func::Exp, _)) => {
            if let Node::Func(_, a) = b.node() {
                exp_args.push(mul(vec![Expr::rational(q.clone()), a.clone()]));
            }
        }
        Node::Pow(b, q) => {
            let slot = powers.entry(b.clone()).or_insert_with(BigRational::zero);
            *slot += q;
        }
        _ => {
            let slot = powers.entry(f.clone()).or_insert_with(BigRational::zero);
            *slot += BigRational::one();
        }
    };
    for f in &factors {
        match f.node() {
            Node::Mul(inner) => inner.iter().for_each(|g| push(g, &mut coeff)),
            _ => push(f, &mut coeff),
        }
    }
    if coeff.is_zero() {
        return Expr::num(coeff);
    }
    if !exp_args.is_empty() {
        let e = func(Func::Exp, add(exp_args));
        match e.node() {
            Node::Num(n) => coeff = coeff.mul(n),
            _ => *powers.entry(e).or_insert_with(BigRational::zero) += BigRational::one(),
        }
    }
    let mut out = Vec::with_capacity(powers.len() + 1);
    let mut extra = Vec::new();
    for (base, q) in powers {
        if q.is_zero() {
            continue;
        }
        let p = pow(base, q);
        match p.node() {
            Node::Num(n) => coeff = coeff.mul(n),
            // Folding (b^q) may expose a product (integer power of a product).
            Node::Mul(_) => extra.push(p),
            _ => out.push(p),
        }
    }
    if !extra.is_empty() {
        let mut all = out;
        all.push(Expr::num(coeff));
        all.extend(extra);
        return mul(all);
    }
    out.sort();
    if out.is_empty() {
        return Expr::num(coeff);
    }
    if coeff.is_one() {
        if out.len() == 1 {
            return out.pop().unwrap();
        }
        return Expr::new(Node::Mul(out));
    }
    let mut v = vec![Expr::num(coeff)];
    v.extend(out);
    Expr::new(Node::Mul(v))
}

fn pow(base: Expr, q: BigRational) -> Expr {
    if q.is_zero() {
        return Expr::one();
    }
    if q.is_one() {
        return base;
    }
    match base.node() {
        Node::Num(n) => {
            if n.is_one() {
                return Expr::one();
            }
            if let Some(r) = n.pow(&q) {
                return Expr::num(r);
            }
            Expr::new(Node::Pow(base, q))
        }
        Node::Pow(b, p) if q.is_integer() || (p.is_integer() && p.abs().is_one() && q.is_positive()) => {
            // (b^p)^q = b^(pq) holds for integer q; for p = ±1 it is trivial.
            pow(b.clone(), p * &q)
        }
        Node::Func(Func::Exp, a) if q.is_integer() => func(Func::Exp, mul(vec![Expr::rational(q), a.clone()])),
        Node::Mul(v) if q.is_integer() => mul(v.iter().map(|f| pow(f.clone(), q.clone())).collect()),
        _ => Expr::new(Node::Pow(base, q)),
    }
}

fn func(f: Func, a: Expr) -> Expr {
    if f == Func::Sqrt {
        return pow(a, BigRational::new(1.into(), 2.into()));
    }
    if let Some(n) = a.as_number() {
        match (f, n) {
            (Func::Exp, n) if n.is_zero() => return Expr::one(),
            (Func::Ln, n) if n.is_one() => return Expr::zero(),
            (Func::Sin, n) if n.is_zero() => return Expr::zero(),
            (Func::Cos, n) if n.is_zero() => return Expr::one(),
            (_, Number::Float(x)) => {
                let v = match f {
                    Func::Exp => x.exp(),
                    Func::Ln => x.ln(),
                    Func::Sin => x.sin(),
                    Func::Cos => x.cos(),
                    Func::Sqrt => unreachable!(),
                };
                if v.is_finite() {
                    return Expr::float(v);
                }
            }
            _ => {}
        }
    }
    Expr::apply(f, a)
}
