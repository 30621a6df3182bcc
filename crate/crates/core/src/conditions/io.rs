//! Candidate files (TOML). Indices are one-based; only one ordering of each
//! symmetric component needs to be given, omitted components are zero.
//!
//! ```toml
//! [candidate]
//! kind = "poly"        # or "exp" with `lambda = "..."` instead of `n`
//! m = 2
//! n = 0
//!
//! [tensor.0.2]         # [tensor.N.r]; exponential candidates use N = 0
//! "1,2" = "exp(12*beta*w/u^2)/2"
//!
//! [scalar]
//! G = "exp(12*beta*w/u^2)/(12*beta)"
//! s0 = "0"
//! ```

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{Candidate, ExpTimeCandidate, PolyTimeCandidate};
use crate::expr::{parse, rational_from_f64, simplify, Expr, ParseContext, ParseError};
use crate::geometry::SystemDef;
use crate::tensor::SymTensorField;

#[derive(Debug, thiserror::Error)]
pub enum CandidateFileError {
    #[error("reading {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed candidate file: {0}")]
    Toml(String),
    #[error("in {field}: {source}")]
    Expr {
        field: String,
        #[source]
        source: ParseError,
    },
    #[error("invalid candidate file: {0}")]
    Invalid(String),
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(untagged)]
enum Rate {
    Number(f64),
    Text(String),
}

#[derive(Debug, Serialize, Deserialize)]
struct Header {
    kind: String,
    m: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    n: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    lambda: Option<Rate>,
}

type Components = BTreeMap<String, String>;

#[derive(Debug, Serialize, Deserialize)]
struct CandidateFile {
    candidate: Header,
    #[serde(default)]
    tensor: BTreeMap<String, BTreeMap<String, Components>>,
    #[serde(default)]
    scalar: BTreeMap<String, String>,
}

fn invalid(msg: impl Into<String>) -> CandidateFileError {
    CandidateFileError::Invalid(msg.into())
}

fn expr_in(text: &str, ctx: &ParseContext, field: &str) -> Result<Expr, CandidateFileError> {
    parse(text, ctx)
        .map(|e| simplify(&e))
        .map_err(|source| CandidateFileError::Expr {
            field: field.to_string(),
            source,
        })
}

fn read_field(
    comps: &Components,
    dim: usize,
    order: usize,
    ctx: &ParseContext,
    table: &str,
) -> Result<SymTensorField, CandidateFileError> {
    let mut f = SymTensorField::zero(dim, order);
    let mut seen: BTreeMap<Vec<usize>, String> = BTreeMap::new();
    for (key, text) in comps {
        let idx: Vec<usize> = key
            .split(',')
            .map(|s| s.trim().parse::<usize>())
            .collect::<Result<_, _>>()
            .map_err(|_| invalid(format!("{table}: bad index key `{key}`")))?;
        if idx.len() != order || idx.iter().any(|&i| i == 0 || i > dim) {
            return Err(invalid(format!(
                "{table}: key `{key}` needs {order} indices in 1..={dim}"
            )));
        }
        let mut sorted: Vec<usize> = idx.iter().map(|i| i - 1).collect();
        sorted.sort_unstable();
        if let Some(prev) = seen.insert(sorted.clone(), key.clone()) {
            return Err(invalid(format!(
                "{table}: `{prev}` and `{key}` name the same component"
            )));
        }
        let e = expr_in(text, ctx, &format!("{table} \"{key}\""))?;
        f.set(&sorted, e).expect("indices checked");
    }
    Ok(f)
}

fn check_scalars(file: &CandidateFile, allowed: &[&str]) -> Result<(), CandidateFileError> {
    match file.scalar.keys().find(|k| !allowed.contains(&k.as_str())) {
        Some(k) => Err(invalid(format!("unknown scalar `{k}` (expected one of {allowed:?})"))),
        None => Ok(()),
    }
}

/// Parses a candidate whose expressions live over `sys`'s coordinates.
pub fn parse_candidate(text: &str, sys: &SystemDef) -> Result<Candidate, CandidateFileError> {
    let file: CandidateFile = toml::from_str(text).map_err(|e| CandidateFileError::Toml(e.to_string()))?;
    let ctx = sys.space_context();
    let d = sys.dim();
    let m = file.candidate.m;
    if m == 0 {
        return Err(invalid("m must be at least 1"));
    }
    let slots = |max_n: usize| -> Result<Vec<(usize, usize, &Components)>, CandidateFileError> {
        let mut out = Vec::new();
        for (nk, by_rank) in &file.tensor {
            let big_n: usize = nk
                .parse()
                .map_err(|_| invalid(format!("tensor table `{nk}` is not a degree")))?;
            if big_n > max_n {
                return Err(invalid(format!("tensor.{nk}: degree exceeds {max_n}")));
            }
            for (rk, comps) in by_rank {
                let r: usize = rk.parse().map_err(|_| invalid(format!("tensor.{nk}.{rk}: bad rank")))?;
                if r == 0 || r > m {
                    return Err(invalid(format!("tensor.{nk}.{rk}: rank must be in 1..={m}")));
                }
                out.push((big_n, r, comps));
            }
        }
        Ok(out)
    };
    match file.candidate.kind.as_str() {
        "poly" => {
            let n = file.candidate.n.ok_or_else(|| invalid("poly candidate needs `n`"))?;
            if file.candidate.lambda.is_some() {
                return Err(invalid("poly candidate takes no `lambda`"));
            }
            check_scalars(&file, &["G", "s0", "s1"])?;
            let mut c = PolyTimeCandidate::zero(d, m, n);
            for (big_n, r, comps) in slots(n)? {
                let f = read_field(comps, d, r, &ctx, &format!("tensor.{big_n}.{r}"))?;
                c.set_tensor(big_n, f).map_err(|e| invalid(e.to_string()))?;
            }
            if let Some(g) = file.scalar.get("G") {
                c.g = expr_in(g, &ctx, "scalar G")?;
            }
            if let Some(s) = file.scalar.get("s0") {
                c.s0 = expr_in(s, &ctx, "scalar s0")?;
            }
            if let Some(s) = file.scalar.get("s1") {
                c.s1 = Some(expr_in(s, &ctx, "scalar s1")?);
            }
            Ok(Candidate::Poly(c))
        }
        "exp" => {
            let lambda = match &file.candidate.lambda {
                Some(Rate::Number(v)) => Expr::rational(rational_from_f64(*v)),
                Some(Rate::Text(s)) => expr_in(s, &ctx, "candidate.lambda")?,
                None => return Err(invalid("exp candidate needs `lambda`")),
            };
            check_scalars(&file, &[])?;
            let mut c = ExpTimeCandidate::zero(d, m, simplify(&lambda));
            for (_, r, comps) in slots(0)? {
                let f = read_field(comps, d, r, &ctx, &format!("tensor.0.{r}"))?;
                c.set_tensor(f).map_err(|e| invalid(e.to_string()))?;
            }
            Ok(Candidate::Exp(c))
        }
        other => Err(invalid(format!(
            "unknown candidate kind `{other}` (expected poly or exp)"
        ))),
    }
}

/// Reads a candidate file from disk.
pub fn load_candidate(path: &Path, sys: &SystemDef) -> Result<Candidate, CandidateFileError> {
    let text = std::fs::read_to_string(path).map_err(|source| CandidateFileError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_candidate(&text, sys)
}

fn write_field(f: &SymTensorField) -> Components {
    f.components()
        .filter(|(_, e)| !e.is_zero())
        .map(|(idx, e)| {
            let key: Vec<String> = idx.iter().map(|i| (i + 1).to_string()).collect();
            (key.join(","), e.to_string())
        })
        .collect()
}

/// Serializes a candidate (inverse of [`parse_candidate`]).
pub fn candidate_to_toml(c: &Candidate) -> String {
    let mut tensor: BTreeMap<String, BTreeMap<String, Components>> = BTreeMap::new();
    let mut scalar = BTreeMap::new();
    let header = match c {
        Candidate::Poly(p) => {
            for (big_n, row) in p.tensors.iter().enumerate() {
                for t in row.iter().filter(|t| !t.is_zero()) {
                    tensor
                        .entry(big_n.to_string())
                        .or_default()
                        .insert(t.order().to_string(), write_field(t));
                }
            }
            scalar.insert("G".to_string(), p.g.to_string());
            scalar.insert("s0".to_string(), p.s0.to_string());
            if let Some(s1) = &p.s1 {
                scalar.insert("s1".to_string(), s1.to_string());
            }
            Header {
                kind: "poly".into(),
                m: p.m,
                n: Some(p.n),
                lambda: None,
            }
        }
        Candidate::Exp(e) => {
            for t in e.tensors.iter().filter(|t| !t.is_zero()) {
                tensor
                    .entry("0".into())
                    .or_default()
                    .insert(t.order().to_string(), write_field(t));
            }
            Header {
                kind: "exp".into(),
                m: e.m,
                n: None,
                lambda: Some(Rate::Text(e.lambda.to_string())),
            }
        }
    };
    toml::to_string(&CandidateFile {
        candidate: header,
        tensor,
        scalar,
    })
    .expect("candidate serializes")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Connection;

    fn plane() -> SystemDef {
        let conn = Connection::flat(vec!["x".into(), "y".into()]);
        SystemDef::new("plane", conn, vec![Expr::var("x"), Expr::var("y")])
            .unwrap()
            .with_params([("w".to_string(), 2.0)].into())
    }

    const POLY: &str = r#"
[candidate]
kind = "poly"
m = 2
n = 1

[tensor.0.2]
"1,1" = "1"
"2,1" = "x*y"

[tensor.1.1]
"2" = "w*x"

[scalar]
G = "x^2"
s0 = "0"
"#;

    #[test]
    fn poly_round_trip() {
        let sys = plane();
        let c = parse_candidate(POLY, &sys).unwrap();
        let Candidate::Poly(p) = &c else { panic!() };
        assert_eq!(p.tensor(0, 2).at(&[1, 0]).to_string(), "x*y");
        assert_eq!(p.tensor(1, 1).at(&[1]).to_string(), "w*x");
        assert_eq!(parse_candidate(&candidate_to_toml(&c), &sys).unwrap(), c);
    }

    #[test]
    fn exp_round_trip() {
        let sys = plane();
        let text = "[candidate]\nkind = \"exp\"\nm = 1\nlambda = 2.0\n[tensor.0.1]\n\"1\" = \"y\"\n";
        let c = parse_candidate(text, &sys).unwrap();
        let Candidate::Exp(e) = &c else { panic!() };
        assert_eq!(e.lambda.to_string(), "2");
        assert_eq!(parse_candidate(&candidate_to_toml(&c), &sys).unwrap(), c);
    }

    #[test]
    fn rejects_bad_files() {
        let sys = plane();
        let dup = POLY.replace("\"2,1\"", "\"1,1\"");
        assert!(parse_candidate(&dup, &sys).is_err());
        let dup2 = POLY.replace("\"2,1\" = \"x*y\"", "\"2,1\" = \"x*y\"\n\"1,2\" = \"1\"");
        assert!(matches!(
            parse_candidate(&dup2, &sys),
            Err(CandidateFileError::Invalid(_))
        ));
        let rank = POLY.replace("[tensor.1.1]", "[tensor.1.3]");
        assert!(matches!(
            parse_candidate(&rank, &sys),
            Err(CandidateFileError::Invalid(_))
        ));
        let unknown = POLY.replace("x^2", "z^2");
        assert!(matches!(
            parse_candidate(&unknown, &sys),
            Err(CandidateFileError::Expr { .. })
        ));
        assert!(matches!(
            parse_candidate("[candidate", &sys),
            Err(CandidateFileError::Toml(_))
        ));
    }
}
