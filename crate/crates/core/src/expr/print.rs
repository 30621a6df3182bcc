//! Printing in the same grammar the parser accepts.

use std::fmt::{self, Write};

use num::{BigRational, One, Signed};

use super::{Expr, Node, Number};

const SUM: u8 = 0;
const PRODUCT: u8 = 1;
const UNARY: u8 = 2;
const BASE: u8 = 3;

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut s = String::new();
        write_expr(&mut s, self, SUM);
        f.write_str(&s)
    }
}

impl fmt::Display for Number {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Number::Rational(r) => write!(f, "{r}"),
            Number::Float(x) => write!(f, "{x:?}"),
        }
    }
}

fn write_number(out: &mut String, n: &Number, prec: u8) {
    let negative = n.is_negative();
    let compound = match n {
        Number::Rational(r) => !r.is_integer(),
        Number::Float(_) => false,
    };
    let paren = (negative && prec >= PRODUCT) || (compound && prec >= PRODUCT);
    if paren {
        out.push('(');
    }
    let _ = write!(out, "{n}");
    if paren {
        out.push(')');
    }
}

/// The term with its leading sign flipped, if it prints with a leading minus.
fn negated(e: &Expr) -> Option<Expr> {
    match e.node() {
        Node::Num(n) if n.is_negative() => Some(Expr::num(n.neg())),
        Node::Neg(a) => Some(a.clone()),
        Node::Mul(v) => match v[0].node() {
            Node::Num(n) if n.is_negative() => {
                let c = n.neg();
                let mut rest: Vec<Expr> = v[1..].to_vec();
                if !c.is_one() {
                    rest.insert(0, Expr::num(c));
                }
                Some(Expr::product(rest))
            }
            _ => None,
        },
        _ => None,
    }
}

fn write_expr(out: &mut String, e: &Expr, prec: u8) {
    match e.node() {
        Node::Num(n) => write_number(out, n, prec),
        Node::Var(v) | Node::Param(v) => out.push_str(v),
        Node::Func(func, a) => {
            out.push_str(func.name());
            out.push('(');
            write_expr(out, a, SUM);
            out.push(')');
        }
        Node::Neg(a) => {
            let paren = prec >= PRODUCT;
            if paren {
                out.push('(');
            }
            out.push('-');
            write_expr(out, a, UNARY);
            if paren {
                out.push(')');
            }
        }
        Node::Add(terms) => {
            let paren = prec >= PRODUCT;
            if paren {
                out.push('(');
            }
            for (i, t) in terms.iter().enumerate() {
                match (i, negated(t)) {
                    (0, _) => write_expr(out, t, SUM),
                    (_, Some(pos)) => {
                        out.push_str(" - ");
                        write_expr(out, &pos, PRODUCT);
                    }
                    (_, None) => {
                        out.push_str(" + ");
                        write_expr(out, t, PRODUCT);
                    }
                }
            }
            if paren {
                out.push(')');
            }
        }
        Node::Sub(a, b) => {
            let paren = prec >= PRODUCT;
            if paren {
                out.push('(');
            }
            write_expr(out, a, SUM);
            out.push_str(" - ");
            write_expr(out, b, PRODUCT);
            if paren {
                out.push(')');
            }
        }
        Node::Div(a, b) => {
            let paren = prec >= UNARY;
            if paren {
                out.push('(');
            }
            write_expr(out, a, PRODUCT);
            out.push('/');
            write_expr(out, b, UNARY);
            if paren {
                out.push(')');
            }
        }
        Node::Mul(factors) => write_product(out, factors, prec),
        Node::Pow(b, q) => {
            if q.is_negative() && prec < BASE {
                // Print reciprocals as divisions for readability.
                write_product(out, std::slice::from_ref(e), prec);
                return;
            }
            write_power(out, b, q);
        }
    }
}

fn write_power(out: &mut String, b: &Expr, q: &BigRational) {
    if matches!(b.node(), Node::Pow(..)) {
        out.push('(');
        write_expr(out, b, BASE);
        out.push(')');
    } else {
        write_expr(out, b, BASE);
    }
    out.push('^');
    if q.is_integer() && q.is_positive() {
        let _ = write!(out, "{q}");
    } else {
        let _ = write!(out, "({q})");
    }
}

fn write_product(out: &mut String, factors: &[Expr], prec: u8) {
    let mut coeff: Option<Number> = None;
    let mut rest = factors;
    if let Some(Node::Num(n)) = factors.first().map(|f| f.node()) {
        if factors.len() > 1 {
            coeff = Some(n.clone());
            rest = &factors[1..];
        }
    }
    let negative = coeff.as_ref().is_some_and(|c| c.is_negative());
    let coeff = coeff.map(|c| if negative { c.neg() } else { c });

    let mut num: Vec<String> = Vec::new();
    let mut den: Vec<String> = Vec::new();
    match &coeff {
        Some(Number::Rational(r)) => {
            if !r.numer().is_one() {
                num.push(r.numer().to_string());
            }
            if !r.denom().is_one() {
                den.push(r.denom().to_string());
            }
        }
        Some(n @ Number::Float(_)) => {
            if !n.is_one() {
                num.push(n.to_string());
            }
        }
        None => {}
    }
    for f in rest {
        let mut s = String::new();
        match f.node() {
            Node::Pow(b, q) if q.is_negative() => {
                let q = -q;
                if q.is_one() {
                    write_expr(&mut s, b, UNARY);
                } else {
                    write_power(&mut s, b, &q);
                }
                den.push(s);
            }
            _ => {
                write_expr(&mut s, f, UNARY);
                num.push(s);
            }
        }
    }

    let pieces = num.len().max(1) + den.len();
    let paren = (negative && prec >= PRODUCT) || (pieces > 1 && prec >= UNARY);
    if paren {
        out.push('(');
    }
    if negative {
        out.push('-');
    }
    if num.is_empty() {
        out.push('1');
    } else {
        out.push_str(&num.join("*"));
    }
    match den.len() {
        0 => {}
        1 => {
            out.push('/');
            out.push_str(&den[0]);
        }
        _ => {
            out.push_str("/(");
            out.push_str(&den.join("*"));
            out.push(')');
        }
    }
    if paren {
        out.push(')');
    }
}

#[cfg(test)]
mod tests {
    use super::super::{parse, simplify, ParseContext};

    fn ctx() -> ParseContext {
        ParseContext::new(["u", "w", "x", "y"], ["b", "k", "p"])
    }

    fn roundtrip(t: &str) -> String {
        let e = simplify(&parse(t, &ctx()).unwrap());
        let printed = e.to_string();
        let back = simplify(&parse(&printed, &ctx()).unwrap());
        assert_eq!(back, e, "{t} -> {printed}");
        printed
    }

    #[test]
    fn readable_output() {
        assert_eq!(roundtrip("-8*b*w/u^3"), "-8*b*w/u^3");
        assert_eq!(roundtrip("k*x - p*y"), "k*x - p*y");
        assert_eq!(roundtrip("x/2"), "x/2");
        assert_eq!(roundtrip("3/4"), "3/4");
    }

    #[test]
    fn round_trips() {
        for t in [
            "exp(12*b*w/u^2)*(u*w + 1/(12*b))",
            "-(x^2)^(1/2) + (-2)^3*x^(-3/2)",
            "0.25*x - 1e-30*y + 2.0",
            "1/(x*y) - 1/x + (p*(y^2-x^2) - 2*k*x*y)^(-1)",
            "sin(x)^2 + cos(-x)",
            "-(3/7)/x",
        ] {
            roundtrip(t);
        }
    }

    #[test]
    fn raw_trees_print_parseably() {
        let e = parse("-(x - y)/(u*-w) - -x", &ctx()).unwrap();
        let back = parse(&e.to_string(), &ctx()).unwrap();
        assert_eq!(simplify(&back), simplify(&e));
    }
}
