//! Exact partial differentiation.

use std::collections::BTreeMap;

use num::{BigRational, One};

use super::{simplify, Expr, Func, Node};

/// Derivatives of auxiliary symbols that depend implicitly on variables,
/// e.g. `F(x)` with `dF/dx = Fp`. Keys are `(symbol, variable)`.
#[derive(Clone, Debug, Default)]
pub struct ChainRule {
    pub derivs: BTreeMap<(String, String), Expr>,
}

impl ChainRule {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with(mut self, symbol: &str, var: &str, d: Expr) -> Self {
        self.derivs.insert((symbol.to_string(), var.to_string()), d);
        self
    }

    pub fn is_empty(&self) -> bool {
        self.derivs.is_empty()
    }
}

/// ∂e/∂v, simplified. Parameters and other variables differentiate to zero.
pub fn diff(e: &Expr, v: &str) -> Expr {
    simplify(&d(e, v, None))
}

/// ∂e/∂v where auxiliary symbols follow `rules`.
pub fn diff_chain(e: &Expr, v: &str, rules: &ChainRule) -> Expr {
    simplify(&d(e, v, Some(rules)))
}

fn d(e: &Expr, v: &str, rules: Option<&ChainRule>) -> Expr {
    match e.node() {
        Node::Num(_) | Node::Param(_) => Expr::zero(),
        Node::Var(name) => {
            if &**name == v {
                Expr::one()
            } else if let Some(r) = rules.and_then(|r| r.derivs.get(&(name.to_string(), v.to_string()))) {
                r.clone()
            } else {
                Expr::zero()
            }
        }
        Node::Neg(a) => -d(a, v, rules),
        Node::Add(terms) => Expr::sum(terms.iter().map(|t| d(t, v, rules))),
        Node::Sub(a, b) => d(a, v, rules) - d(b, v, rules),
        Node::Mul(fs) => Expr::sum((0..fs.len()).map(|i| {
            let mut parts: Vec<Expr> = fs.clone();
            parts[i] = d(&fs[i], v, rules);
            Expr::product(parts)
        })),
        Node::Div(a, b) => (d(a, v, rules) * b - a * d(b, v, rules)) / b.pow_int(2),
        Node::Pow(a, q) => {
            let qm1 = q - BigRational::one();
            Expr::rational(q.clone()) * a.pow_rational(qm1) * d(a, v, rules)
        }
        Node::Func(f, a) => {
            let da = d(a, v, rules);
            let outer = match f {
                Func::Exp => e.clone(),
                Func::Ln => a.pow_int(-1),
                Func::Sqrt => Expr::ratio(1, 2) * a.pow_rational(BigRational::new((-1).into(), 2.into())),
                Func::Sin => Expr::apply(Func::Cos, a.clone()),
                Func::Cos => -Expr::apply(Func::Sin, a.clone()),
            };
            outer * da
        }
    }
}

#[cfg(test)]
mod tests {
    use super::super::{eval, parse, ParseContext};
    use super::*;

    fn ctx() -> ParseContext {
        ParseContext::new(["u", "w", "x", "y"], ["b", "k", "p"])
    }

    fn s(t: &str) -> Expr {
        simplify(&parse(t, &ctx()).unwrap())
    }

    #[test]
    fn basic_rules() {
        assert_eq!(diff(&s("k*x - p*y"), "x"), s("k"));
        assert_eq!(diff(&s("exp(12*b*w/u^2)"), "u"), s("-24*b*w*u^(-3)*exp(12*b*w/u^2)"));
        assert_eq!(diff(&s("ln(x)"), "x"), s("1/x"));
        assert_eq!(diff(&s("sin(x)"), "x"), s("cos(x)"));
        assert_eq!(diff(&s("b"), "x"), Expr::zero());
    }

    #[test]
    fn chain_rule_for_auxiliary_symbols() {
        let ctx = ParseContext::new(["x", "F", "Fp"], Vec::<String>::new());
        let e = simplify(&parse("x*F^2", &ctx).unwrap());
        let rules = ChainRule::new().with("F", "x", Expr::var("Fp"));
        let got = diff_chain(&e, "x", &rules);
        let want = simplify(&parse("F^2 + 2*x*F*Fp", &ctx).unwrap());
        assert_eq!(got, want);
    }

    #[test]
    fn matches_central_differences() {
        let e = s("k*x/(y^2*sqrt(x^2+y^2))");
        let dy = diff(&e, "y");
        let mut b: BTreeMap<String, f64> = [("k".to_string(), 0.7)].into_iter().collect();
        for (x, y) in [(0.3, 1.1), (1.5, -0.8), (-2.0, 0.4)] {
            b.insert("x".into(), x);
            b.insert("y".into(), y);
            let h = 1e-5;
            let mut bp = b.clone();
            bp.insert("y".into(), y + h);
            let mut bm = b.clone();
            bm.insert("y".into(), y - h);
            let fd = (eval(&e, &bp).unwrap() - eval(&e, &bm).unwrap()) / (2.0 * h);
            let an = eval(&dy, &b).unwrap();
            assert!((fd - an).abs() <= 1e-6 * (1.0 + an.abs()), "{fd} vs {an}");
        }
    }
}
