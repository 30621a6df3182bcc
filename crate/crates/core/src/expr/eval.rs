//! Floating-point evaluation: a direct tree walker and a compiled stack
//! program for hot loops (sampling, integration).

use std::collections::BTreeMap;
use std::fmt;

use num::ToPrimitive;

use super::{Expr, Func, Node};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum EvalErrorKind {
    Unbound(String),
    DivisionByZero,
    Domain,
}

/// Evaluation failure together with the subtree where it happened.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EvalError {
    pub kind: EvalErrorKind,
    pub subtree: String,
}

impl fmt::Display for EvalError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            EvalErrorKind::Unbound(n) => write!(f, "unbound symbol `{n}`"),
            EvalErrorKind::DivisionByZero => write!(f, "division by zero in `{}`", self.subtree),
            EvalErrorKind::Domain => write!(f, "domain error in `{}`", self.subtree),
        }
    }
}

impl std::error::Error for EvalError {}

fn err(kind: EvalErrorKind, e: &Expr) -> EvalError {
    EvalError {
        kind,
        subtree: e.to_string(),
    }
}

/// Evaluates `e` with every free symbol looked up in `binding`.
pub fn eval(e: &Expr, binding: &BTreeMap<String, f64>) -> Result<f64, EvalError> {
    Ok(match e.node() {
        Node::Num(n) => n.to_f64(),
        Node::Var(v) | Node::Param(v) => *binding.get(&**v).ok_or_else(|| EvalError {
            kind: EvalErrorKind::Unbound(v.to_string()),
            subtree: v.to_string(),
        })?,
        Node::Neg(a) => -eval(a, binding)?,
        Node::Add(v) => {
            let mut s = 0.0;
            for t in v {
                s += eval(t, binding)?;
            }
            s
        }
        Node::Sub(a, b) => eval(a, binding)? - eval(b, binding)?,
        Node::Mul(v) => {
            let mut s = 1.0;
            for t in v {
                s *= eval(t, binding)?;
            }
            s
        }
        Node::Div(a, b) => {
            let den = eval(b, binding)?;
            if den == 0.0 {
                return Err(err(EvalErrorKind::DivisionByZero, e));
            }
            eval(a, binding)? / den
        }
        Node::Pow(a, q) => {
            let b = eval(a, binding)?;
            apply_pow(
                b,
                q.is_integer().then(|| q.to_integer().to_i32()).flatten(),
                q.to_f64().unwrap_or(f64::NAN),
            )
            .map_err(|k| err(k, e))?
        }
        Node::Func(f, a) => apply_func(*f, eval(a, binding)?).map_err(|k| err(k, e))?,
    })
}

fn apply_pow(b: f64, int: Option<i32>, q: f64) -> Result<f64, EvalErrorKind> {
    if let Some(n) = int {
        if b == 0.0 && n < 0 {
            return Err(EvalErrorKind::DivisionByZero);
        }
        return Ok(b.powi(n));
    }
    if b == 0.0 && q < 0.0 {
        return Err(EvalErrorKind::DivisionByZero);
    }
    if b < 0.0 {
        return Err(EvalErrorKind::Domain);
    }
    Ok(b.powf(q))
}

fn apply_func(f: Func, x: f64) -> Result<f64, EvalErrorKind> {
    Ok(match f {
        Func::Exp => x.exp(),
        Func::Ln => {
            if x <= 0.0 {
                return Err(EvalErrorKind::Domain);
            }
            x.ln()
        }
        Func::Sqrt => {
            if x < 0.0 {
                return Err(EvalErrorKind::Domain);
            }
            x.sqrt()
        }
        Func::Sin => x.sin(),
        Func::Cos => x.cos(),
    })
}

#[derive(Debug, Clone)]
enum Op {
    Const(f64),
    Load(usize),
    Neg,
    Add(usize),
    Sub,
    Mul(usize),
    Div(usize),
    Pow(Option<i32>, f64, usize),
    Func(Func, usize),
}

/// An expression compiled against a fixed slot layout. Cheap to evaluate and
/// shareable across threads.
#[derive(Debug, Clone)]
pub struct Compiled {
    ops: Vec<Op>,
    sites: Vec<Expr>,
    depth: usize,
}

impl Compiled {
    /// Compiles `e`; every variable or parameter must name one of `slots`.
    pub fn new(e: &Expr, slots: &[&str]) -> Result<Self, EvalError> {
        let mut c = Compiled {
            ops: Vec::new(),
            sites: Vec::new(),
            depth: 0,
        };
        let mut depth = 0usize;
        c.emit(e, slots, &mut depth)?;
        Ok(c)
    }

    fn push(&mut self, op: Op, depth: &mut usize, pops: usize) {
        self.ops.push(op);
        *depth = *depth + 1 - pops;
        self.depth = self.depth.max(*depth);
    }

    fn emit(&mut self, e: &Expr, slots: &[&str], depth: &mut usize) -> Result<(), EvalError> {
        match e.node() {
            Node::Num(n) => self.push(Op::Const(n.to_f64()), depth, 0),
            Node::Var(v) | Node::Param(v) => {
                let i = slots.iter().position(|s| *s == &**v).ok_or_else(|| EvalError {
                    kind: EvalErrorKind::Unbound(v.to_string()),
                    subtree: v.to_string(),
                })?;
                self.push(Op::Load(i), depth, 0);
            }
            Node::Neg(a) => {
                self.emit(a, slots, depth)?;
                self.push(Op::Neg, depth, 1);
            }
            Node::Add(v) | Node::Mul(v) => {
                for t in v {
                    self.emit(t, slots, depth)?;
                }
                let op = if matches!(e.node(), Node::Add(_)) {
                    Op::Add(v.len())
                } else {
                    Op::Mul(v.len())
                };
                self.push(op, depth, v.len());
            }
            Node::Sub(a, b) => {
                self.emit(a, slots, depth)?;
                self.emit(b, slots, depth)?;
                self.push(Op::Sub, depth, 2);
            }
            Node::Div(a, b) => {
                self.emit(a, slots, depth)?;
                self.emit(b, slots, depth)?;
                self.sites.push(e.clone());
                self.push(Op::Div(self.sites.len() - 1), depth, 2);
            }
            Node::Pow(a, q) => {
                self.emit(a, slots, depth)?;
                self.sites.push(e.clone());
                let int = q.is_integer().then(|| q.to_integer().to_i32()).flatten();
                self.push(
                    Op::Pow(int, q.to_f64().unwrap_or(f64::NAN), self.sites.len() - 1),
                    depth,
                    1,
                );
            }
            Node::Func(f, a) => {
                self.emit(a, slots, depth)?;
                self.sites.push(e.clone());
                self.push(Op::Func(*f, self.sites.len() - 1), depth, 1);
            }
        }
        Ok(())
    }

    /// Evaluates with slot values in the order given at compile time.
    pub fn eval(&self, values: &[f64]) -> Result<f64, EvalError> {
        let mut stack: Vec<f64> = Vec::with_capacity(self.depth);
        for op in &self.ops {
            match op {
                Op::Const(c) => stack.push(*c),
                Op::Load(i) => stack.push(values[*i]),
                Op::Neg => {
                    let a = stack.pop().unwrap();
                    stack.push(-a);
                }
                Op::Add(n) => {
                    let at = stack.len() - n;
                    let s = stack[at..].iter().sum();
                    stack.truncate(at);
                    stack.push(s);
                }
                Op::Mul(n) => {
                    let at = stack.len() - n;
                    let s = stack[at..].iter().product();
                    stack.truncate(at);
                    stack.push(s);
                }
                Op::Sub => {
                    let b = stack.pop().unwrap();
                    let a = stack.pop().unwrap();
                    stack.push(a - b);
                }
                Op::Div(site) => {
                    let b = stack.pop().unwrap();
                    let a = stack.pop().unwrap();
                    if b == 0.0 {
                        return Err(err(EvalErrorKind::DivisionByZero, &self.sites[*site]));
                    }
                    stack.push(a / b);
                }
                Op::Pow(int, q, site) => {
                    let b = stack.pop().unwrap();
                    let v = apply_pow(b, *int, *q).map_err(|k| err(k, &self.sites[*site]))?;
                    stack.push(v);
                }
                Op::Func(f, site) => {
                    let a = stack.pop().unwrap();
                    let v = apply_func(*f, a).map_err(|k| err(k, &self.sites[*site]))?;
                    stack.push(v);
                }
            }
        }
        Ok(stack.pop().unwrap_or(0.0))
    }
}

#[cfg(test)]
mod tests {
    use super::super::{parse, simplify, ParseContext};
    use super::*;

    fn bind(pairs: &[(&str, f64)]) -> BTreeMap<String, f64> {
        pairs.iter().map(|(k, v)| (k.to_string(), *v)).collect()
    }

    fn ctx() -> ParseContext {
        ParseContext::new(["u", "w", "x", "y"], ["b", "k", "p"])
    }

    #[test]
    fn examples() {
        let e = parse("p/(k*y+p*x)", &ctx()).unwrap();
        let b = bind(&[("k", 1.0), ("p", 1.0), ("x", 1.0), ("y", 1.0)]);
        assert_eq!(eval(&e, &b).unwrap(), 0.5);

        let e = parse("1/u^2", &ctx()).unwrap();
        let r = eval(&e, &bind(&[("u", 0.0)]));
        assert_eq!(r.unwrap_err().kind, EvalErrorKind::DivisionByZero);

        let e = parse("exp(12*b*w/u^2)", &ctx()).unwrap();
        assert_eq!(eval(&e, &bind(&[("b", 1.0), ("w", 0.0), ("u", 2.0)])).unwrap(), 1.0);
    }

    #[test]
    fn errors_name_the_subtree() {
        let e = parse("x + ln(y)", &ctx()).unwrap();
        let r = eval(&e, &bind(&[("x", 1.0), ("y", -1.0)])).unwrap_err();
        assert_eq!(r.kind, EvalErrorKind::Domain);
        assert_eq!(r.subtree, "ln(y)");
        let r = eval(&e, &bind(&[("x", 1.0)])).unwrap_err();
        assert_eq!(r.kind, EvalErrorKind::Unbound("y".into()));
        let r = eval(&parse("sqrt(x)", &ctx()).unwrap(), &bind(&[("x", -1.0)])).unwrap_err();
        assert_eq!(r.kind, EvalErrorKind::Domain);
    }

    #[test]
    fn compiled_agrees_with_tree_walk() {
        let e = parse("k*x/(y^2*sqrt(x^2+y^2)) - exp(-x)*cos(y) + (x-y)^3", &ctx()).unwrap();
        for e in [e.clone(), simplify(&e)] {
            let c = Compiled::new(&e, &["x", "y", "k"]).unwrap();
            for (x, y) in [(0.5, 1.0), (2.0, -3.0)] {
                let a = c.eval(&[x, y, 0.3]).unwrap();
                let b = eval(&e, &bind(&[("x", x), ("y", y), ("k", 0.3)])).unwrap();
                assert!((a - b).abs() <= 1e-12 * (1.0 + b.abs()));
            }
            assert!(c.eval(&[1.0, 0.0, 0.3]).is_err());
        }
        assert!(Compiled::new(&e, &["x"]).is_err());
    }
}
