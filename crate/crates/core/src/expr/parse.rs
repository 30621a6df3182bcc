//! Recursive-descent parser for the expression grammar.
//!
//! ```text
//! sum     := product (('+' | '-') product)*
//! product := unary (('*' | '/') unary)*
//! unary   := '-' unary | power
//! power   := atom ('^' unary)?          // right-associative
//! atom    := number | ident | ident '(' sum ')' | '(' sum ')'
//! ```

use std::collections::BTreeSet;
use std::str::FromStr;

use num::{BigInt, BigRational};

use super::{rational_from_f64, simplify, Expr, Func, Node, Number};

/// Names that may appear in an expression.
#[derive(Clone, Debug, Default)]
pub struct ParseContext {
    pub vars: BTreeSet<String>,
    pub params: BTreeSet<String>,
}

impl ParseContext {
    pub fn new<V, P>(vars: V, params: P) -> Self
    where
        V: IntoIterator,
        V::Item: Into<String>,
        P: IntoIterator,
        P::Item: Into<String>,
    {
        ParseContext {
            vars: vars.into_iter().map(Into::into).collect(),
            params: params.into_iter().map(Into::into).collect(),
        }
    }

    pub fn with_var(mut self, name: &str) -> Self {
        self.vars.insert(name.to_string());
        self
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ParseError {
    #[error("syntax error at position {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
    #[error("unknown identifier `{name}` at position {pos}")]
    UnknownIdentifier { pos: usize, name: String },
    #[error("malformed exponent at position {pos}: {msg}")]
    MalformedExponent { pos: usize, msg: String },
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(Number),
    Ident(String),
    Op(char),
    End,
}

struct Lexer<'a> {
    src: &'a [u8],
    pos: usize,
}

impl<'a> Lexer<'a> {
    fn next(&mut self) -> Result<(usize, Tok), ParseError> {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
        let start = self.pos;
        let Some(&c) = self.src.get(self.pos) else {
            return Ok((start, Tok::End));
        };
        if c.is_ascii_digit() || c == b'.' {
            return self.number(start).map(|t| (start, t));
        }
        if c.is_ascii_alphabetic() || c == b'_' {
            while self.pos < self.src.len()
                && (self.src[self.pos].is_ascii_alphanumeric() || self.src[self.pos] == b'_')
            {
                self.pos += 1;
            }
            let s = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
            return Ok((start, Tok::Ident(s.to_string())));
        }
        if b"+-*/^()".contains(&c) {
            self.pos += 1;
            return Ok((start, Tok::Op(c as char)));
        }
        Err(ParseError::Syntax {
            pos: start,
            msg: format!("unexpected character `{}`", c as char),
        })
    }

    fn number(&mut self, start: usize) -> Result<Tok, ParseError> {
        let digits = |l: &mut Self| {
            while l.pos < l.src.len() && l.src[l.pos].is_ascii_digit() {
                l.pos += 1;
            }
        };
        digits(self);
        let mut float = false;
        if self.src.get(self.pos) == Some(&b'.') {
            float = true;
            self.pos += 1;
            digits(self);
        }
        if matches!(self.src.get(self.pos), Some(b'e') | Some(b'E')) {
            let save = self.pos;
            self.pos += 1;
            if matches!(self.src.get(self.pos), Some(b'+') | Some(b'-')) {
                self.pos += 1;
            }
            if self.src.get(self.pos).is_some_and(|c| c.is_ascii_digit()) {
                float = true;
                digits(self);
            } else {
                self.pos = save;
            }
        }
        let text = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
        if float {
            f64::from_str(text)
                .map(|f| Tok::Num(Number::Float(f)))
                .map_err(|_| ParseError::Syntax {
                    pos: start,
                    msg: format!("bad number `{text}`"),
                })
        } else {
            let n = BigInt::from_str(text).map_err(|_| ParseError::Syntax {
                pos: start,
                msg: format!("bad number `{text}`"),
            })?;
            Ok(Tok::Num(Number::Rational(BigRational::from_integer(n))))
        }
    }
}

struct Parser<'a> {
    lex: Lexer<'a>,
    tok: Tok,
    pos: usize,
    ctx: &'a ParseContext,
}

impl<'a> Parser<'a> {
    fn bump(&mut self) -> Result<(), ParseError> {
        let (p, t) = self.lex.next()?;
        self.pos = p;
        self.tok = t;
        Ok(())
    }

    fn expect(&mut self, c: char) -> Result<(), ParseError> {
        if self.tok == Tok::Op(c) {
            self.bump()
        } else {
            Err(self.unexpected(&format!("expected `{c}`")))
        }
    }

    fn unexpected(&self, what: &str) -> ParseError {
        let found = match &self.tok {
            Tok::End => "end of input".to_string(),
            Tok::Num(_) => "number".to_string(),
            Tok::Ident(s) => format!("`{s}`"),
            Tok::Op(c) => format!("`{c}`"),
        };
        ParseError::Syntax {
            pos: self.pos,
            msg: format!("{what}, found {found}"),
        }
    }

    fn sum(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.product()?;
        loop {
            match self.tok {
                Tok::Op('+') => {
                    self.bump()?;
                    lhs = lhs + self.product()?;
                }
                Tok::Op('-') => {
                    self.bump()?;
                    lhs = lhs - self.product()?;
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn product(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.unary()?;
        loop {
            match self.tok {
                Tok::Op('*') => {
                    self.bump()?;
                    lhs = lhs * self.unary()?;
                }
                Tok::Op('/') => {
                    self.bump()?;
                    lhs = lhs / self.unary()?;
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        if self.tok == Tok::Op('-') {
            self.bump()?;
            return Ok(-self.unary()?);
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr, ParseError> {
        let base = self.atom()?;
        if self.tok != Tok::Op('^') {
            return Ok(base);
        }
        self.bump()?;
        let pos = self.pos;
        let exp = simplify(&self.unary()?);
        let q = match exp.as_number() {
            Some(Number::Rational(q)) => q.clone(),
            Some(Number::Float(f)) if f.is_finite() => rational_from_f64(*f),
            _ => {
                return Err(ParseError::MalformedExponent {
                    pos,
                    msg: format!("exponent `{exp}` is not a numeric constant"),
                })
            }
        };
        Ok(base.pow_rational(q))
    }

    fn atom(&mut self) -> Result<Expr, ParseError> {
        match self.tok.clone() {
            Tok::Num(n) => {
                self.bump()?;
                Ok(Expr::num(n))
            }
            Tok::Op('(') => {
                self.bump()?;
                let e = self.sum()?;
                self.expect(')')?;
                Ok(e)
            }
            Tok::Ident(name) => {
                let pos = self.pos;
                self.bump()?;
                if let Some(f) = Func::from_name(&name) {
                    if self.tok == Tok::Op('(') {
                        self.bump()?;
                        let arg = self.sum()?;
                        self.expect(')')?;
                        return Ok(Expr::apply(f, arg));
                    }
                }
                if self.ctx.vars.contains(&name) {
                    Ok(Expr::new(Node::Var(name.as_str().into())))
                } else if self.ctx.params.contains(&name) {
                    Ok(Expr::new(Node::Param(name.as_str().into())))
                } else {
                    Err(ParseError::UnknownIdentifier { pos, name })
                }
            }
            _ => Err(self.unexpected("expected an operand")),
        }
    }
}

/// Parses `text` into an expression tree, resolving identifiers against
/// `ctx`. The tree mirrors the source; call [`simplify`] for canonical form.
pub fn parse(text: &str, ctx: &ParseContext) -> Result<Expr, ParseError> {
    let mut p = Parser {
        lex: Lexer {
            src: text.as_bytes(),
            pos: 0,
        },
        tok: Tok::End,
        pos: 0,
        ctx,
    };
    p.bump()?;
    let e = p.sum()?;
    if p.tok != Tok::End {
        return Err(p.unexpected("expected end of input"));
    }
    Ok(e)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ctx() -> ParseContext {
        ParseContext::new(["u", "w", "x", "y"], ["b", "k", "p"])
    }

    #[test]
    fn parses_connection_component() {
        let e = parse("-8*b*w/u^3", &ctx()).unwrap();
        let want = Expr::int(-8) * Expr::param("b") * Expr::var("w") * Expr::var("u").pow_int(-3);
        assert_eq!(simplify(&e), simplify(&want));
    }

    #[test]
    fn keeps_source_shape_for_difference() {
        let e = parse("k*x - p*y", &ctx()).unwrap();
        match e.node() {
            Node::Sub(a, b) => {
                assert!(matches!(a.node(), Node::Mul(v) if v.len() == 2));
                assert!(matches!(b.node(), Node::Mul(v) if v.len() == 2));
            }
            other => panic!("unexpected {other:?}"),
        }
        assert_eq!(parse("0", &ctx()).unwrap(), Expr::int(0));
    }

    #[test]
    fn power_is_right_associative() {
        let e = simplify(&parse("x^2^3", &ctx()).unwrap());
        assert_eq!(e, simplify(&Expr::var("x").pow_int(8)));
        let e = simplify(&parse("-x^2", &ctx()).unwrap());
        assert_eq!(e, simplify(&-(Expr::var("x").pow_int(2))));
    }

    #[test]
    fn literal_kinds() {
        assert_eq!(parse("3/4", &ctx()).map(|e| simplify(&e)).unwrap(), Expr::ratio(3, 4));
        assert!(matches!(
            parse("0.25", &ctx()).unwrap().as_number(),
            Some(Number::Float(f)) if *f == 0.25
        ));
        assert!(matches!(
            parse("1e-3", &ctx()).unwrap().as_number(),
            Some(Number::Float(f)) if *f == 1e-3
        ));
    }

    #[test]
    fn errors_are_reported_with_positions() {
        assert_eq!(
            parse("x + q", &ctx()),
            Err(ParseError::UnknownIdentifier {
                pos: 4,
                name: "q".into()
            })
        );
        assert!(matches!(parse("x +", &ctx()), Err(ParseError::Syntax { pos: 3, .. })));
        assert!(matches!(parse("(x", &ctx()), Err(ParseError::Syntax { .. })));
        assert!(matches!(parse("x $ y", &ctx()), Err(ParseError::Syntax { pos: 2, .. })));
        assert!(matches!(
            parse("x^y", &ctx()),
            Err(ParseError::MalformedExponent { pos: 2, .. })
        ));
    }

    #[test]
    fn functions_and_rational_exponents() {
        let e = parse("exp(12*b*w/u^2) + sqrt(x^2+y^2) + x^(1/2)", &ctx()).unwrap();
        assert_eq!(e.variables().len(), 4);
        assert!(parse("exp", &ctx()).is_err());
    }
}
