//! System-definition files (TOML). Indices are one-based in files.
//!
//! ```toml
//! [system]
//! name = "harmonic"
//! dim = 2
//! coords = ["x", "y"]
//!
//! [params]
//! w = 1.0
//!
//! [connection]        # "a,b,c" = Γᵃ_bc with b ≤ c; omitted entries are 0
//! [forces]
//! "1" = "w^2*x"
//! "2" = "w^2*y"
//!
//! [domain]
//! x = [-1.0, 1.0]
//! y = [-1.0, 1.0]
//!
//! [singular]
//! expressions = []
//!
//! [integrals]         # expressions in t, coordinates and `<coord>_dot`
//! E = "(x_dot^2 + y_dot^2)/2 + w^2*(x^2 + y^2)/2"
//!
//! [reference]
//! ic = [1.0, 0.0, 0.0, 1.0]
//! t_end = 6.283185307179586
//! ```

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{Connection, NamedIntegral, Reference, SystemDef};
use crate::expr::{parse, simplify, Expr, ParseContext, ParseError};

#[derive(Debug, thiserror::Error)]
pub enum SystemFileError {
    #[error("reading {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed system file: {0}")]
    Toml(String),
    #[error("in {field}: {source}")]
    Expr {
        field: String,
        #[source]
        source: ParseError,
    },
    #[error("invalid system file: {0}")]
    Invalid(String),
}

#[derive(Debug, Serialize, Deserialize)]
struct SystemSection {
    name: String,
    dim: usize,
    coords: Vec<String>,
}

#[derive(Debug, Serialize, Deserialize, Default)]
struct SingularSection {
    #[serde(default)]
    expressions: Vec<String>,
}

#[derive(Debug, Serialize, Deserialize)]
struct SamplingSection {
    velocity: [f64; 2],
    time: [f64; 2],
}

#[derive(Debug, Serialize, Deserialize)]
struct ImplicitSection {
    kind: String,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(untagged)]
enum IntegralEntry {
    Plain(String),
    Full {
        expr: String,
        #[serde(default = "yes")]
        conserved: bool,
    },
}

fn yes() -> bool {
    true
}

#[derive(Debug, Serialize, Deserialize)]
struct ReferenceSection {
    ic: Vec<f64>,
    t_end: f64,
}

#[derive(Debug, Serialize, Deserialize)]
struct SystemFile {
    system: SystemSection,
    #[serde(default)]
    params: BTreeMap<String, f64>,
    #[serde(default)]
    connection: BTreeMap<String, String>,
    #[serde(default)]
    forces: BTreeMap<String, String>,
    #[serde(default)]
    domain: BTreeMap<String, [f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    singular: Option<SingularSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    sampling: Option<SamplingSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    implicit: Option<ImplicitSection>,
    #[serde(default)]
    integrals: BTreeMap<String, IntegralEntry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    reference: Option<ReferenceSection>,
}

fn indices(key: &str, count: usize, dim: usize) -> Result<Vec<usize>, SystemFileError> {
    let parts: Result<Vec<usize>, _> = key.split(',').map(|s| s.trim().parse::<usize>()).collect();
    let bad = || {
        SystemFileError::Invalid(format!(
            "index key `{key}`: expected {count} comma-separated indices in 1..={dim}"
        ))
    };
    let parts = parts.map_err(|_| bad())?;
    if parts.len() != count || parts.iter().any(|&i| i == 0 || i > dim) {
        return Err(bad());
    }
    Ok(parts.into_iter().map(|i| i - 1).collect())
}

fn expr_in(text: &str, ctx: &ParseContext, field: &str) -> Result<Expr, SystemFileError> {
    parse(text, ctx)
        .map(|e| simplify(&e))
        .map_err(|source| SystemFileError::Expr {
            field: field.to_string(),
            source,
        })
}

/// Parses a system file from a string.
pub fn parse_system(text: &str) -> Result<SystemDef, SystemFileError> {
    let file: SystemFile = toml::from_str(text).map_err(|e| SystemFileError::Toml(e.to_string()))?;
    let d = file.system.dim;
    if d == 0 || file.system.coords.len() != d {
        return Err(SystemFileError::Invalid(format!(
            "dim = {d} but {} coordinates given",
            file.system.coords.len()
        )));
    }
    let coords = file.system.coords.clone();
    let implicit = match &file.implicit {
        Some(sec) => {
            Some(crate::catalog::implicit_from_kind(&sec.kind, &file.params).map_err(SystemFileError::Invalid)?)
        }
        None => None,
    };
    let mut space = ParseContext::new(coords.iter().cloned(), file.params.keys().cloned());
    if let Some(imp) = &implicit {
        for s in imp.symbols() {
            space = space.with_var(&s);
        }
    }

    let mut conn = Connection::flat(coords.clone());
    for (key, text) in &file.connection {
        let idx = indices(key, 3, d)?;
        let e = expr_in(text, &space, &format!("connection \"{key}\""))?;
        conn.set(idx[0], idx[1], idx[2], e).expect("indices checked");
    }
    let mut forces = vec![Expr::zero(); d];
    for (key, text) in &file.forces {
        let idx = indices(key, 1, d)?;
        forces[idx[0]] = expr_in(text, &space, &format!("forces \"{key}\""))?;
    }
    let mut sys =
        SystemDef::new(&file.system.name, conn, forces).map_err(|e| SystemFileError::Invalid(e.to_string()))?;
    sys.params = file.params.clone();
    if let Some(imp) = implicit {
        sys = sys.with_implicit(imp);
    }
    let mut domain = Vec::with_capacity(d);
    for c in &coords {
        let [lo, hi] = file.domain.get(c).copied().unwrap_or([-1.0, 1.0]);
        domain.push((lo, hi));
    }
    if let Some(extra) = file.domain.keys().find(|k| !coords.contains(k)) {
        return Err(SystemFileError::Invalid(format!(
            "domain given for unknown coordinate `{extra}`"
        )));
    }
    sys.domain = domain;
    if let Some(s) = &file.sampling {
        sys.velocity_box = (s.velocity[0], s.velocity[1]);
        sys.time_box = (s.time[0], s.time[1]);
    }
    for (i, text) in file.singular.unwrap_or_default().expressions.iter().enumerate() {
        sys.singular.push(expr_in(text, &space, &format!("singular[{i}]"))?);
    }
    let phase = sys.phase_context();
    for (name, entry) in &file.integrals {
        let (text, conserved) = match entry {
            IntegralEntry::Plain(t) => (t.as_str(), true),
            IntegralEntry::Full { expr, conserved } => (expr.as_str(), *conserved),
        };
        sys.integrals.push(NamedIntegral {
            name: name.clone(),
            expr: expr_in(text, &phase, &format!("integrals.{name}"))?,
            conserved,
        });
    }
    sys.reference = file.reference.map(|r| Reference {
        ic: r.ic,
        t_end: r.t_end,
    });
    sys.validate().map_err(|e| SystemFileError::Invalid(e.to_string()))?;
    Ok(sys)
}

/// Reads a system file from disk.
pub fn load_system(path: &Path) -> Result<SystemDef, SystemFileError> {
    let text = std::fs::read_to_string(path).map_err(|source| SystemFileError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_system(&text)
}

/// Serializes a system to the file format (inverse of [`parse_system`]).
pub fn system_to_toml(sys: &SystemDef) -> String {
    let d = sys.dim();
    let connection = sys
        .connection
        .components()
        .into_iter()
        .filter(|(_, _, _, e)| !e.is_zero())
        .map(|(a, b, c, e)| (format!("{},{},{}", a + 1, b + 1, c + 1), e.to_string()))
        .collect();
    let forces = (0..d)
        .filter(|&i| !sys.forces[i].is_zero())
        .map(|i| (format!("{}", i + 1), sys.forces[i].to_string()))
        .collect();
    let domain = sys
        .coords()
        .iter()
        .zip(&sys.domain)
        .map(|(c, (lo, hi))| (c.clone(), [*lo, *hi]))
        .collect();
    let file = SystemFile {
        system: SystemSection {
            name: sys.name.clone(),
            dim: d,
            coords: sys.coords().to_vec(),
        },
        params: sys.params.clone(),
        connection,
        forces,
        domain,
        singular: Some(SingularSection {
            expressions: sys.singular.iter().map(|e| e.to_string()).collect(),
        }),
        sampling: Some(SamplingSection {
            velocity: [sys.velocity_box.0, sys.velocity_box.1],
            time: [sys.time_box.0, sys.time_box.1],
        }),
        implicit: sys.implicit.as_ref().map(|i| ImplicitSection {
            kind: i.kind().to_string(),
        }),
        integrals: sys
            .integrals
            .iter()
            .map(|i| {
                let entry = if i.conserved {
                    IntegralEntry::Plain(i.expr.to_string())
                } else {
                    IntegralEntry::Full {
                        expr: i.expr.to_string(),
                        conserved: false,
                    }
                };
                (i.name.clone(), entry)
            })
            .collect(),
        reference: sys.reference.as_ref().map(|r| ReferenceSection {
            ic: r.ic.clone(),
            t_end: r.t_end,
        }),
    };
    toml::to_string(&file).expect("system file serializes")
}

#[cfg(test)]
mod tests {
    use super::*;

    const HARMONIC: &str = r#"
[system]
name = "harmonic"
dim = 2
coords = ["x", "y"]

[params]
w = 2.0

[connection]
"1,1,2" = "x*y"

[forces]
"1" = "w^2*x"
"2" = "w^2*y"

[domain]
x = [-1.0, 1.0]

[integrals]
E = "(x_dot^2 + y_dot^2)/2 + w^2*(x^2 + y^2)/2"
vx = { expr = "x_dot", conserved = false }

[reference]
ic = [1.0, 0.0, 0.0, 1.0]
t_end = 2.0
"#;

    #[test]
    fn parses_and_round_trips() {
        let sys = parse_system(HARMONIC).unwrap();
        assert_eq!(sys.dim(), 2);
        assert_eq!(sys.connection.get(0, 1, 0).to_string(), "x*y");
        assert_eq!(sys.params["w"], 2.0);
        assert_eq!(sys.integrals.len(), 2);
        assert!(!sys.integrals[1].conserved);
        let again = parse_system(&system_to_toml(&sys)).unwrap();
        assert_eq!(again.forces, sys.forces);
        assert_eq!(again.integrals, sys.integrals);
        assert_eq!(again.reference, sys.reference);
        assert_eq!(again.domain, sys.domain);
    }

    #[test]
    fn errors_are_reported() {
        let bad_index = HARMONIC.replace("\"1,1,2\"", "\"1,3,2\"");
        assert!(matches!(parse_system(&bad_index), Err(SystemFileError::Invalid(_))));
        let unknown = HARMONIC.replace("x*y", "x*z");
        assert!(matches!(parse_system(&unknown), Err(SystemFileError::Expr { .. })));
        assert!(matches!(parse_system("[system"), Err(SystemFileError::Toml(_))));
    }
}
