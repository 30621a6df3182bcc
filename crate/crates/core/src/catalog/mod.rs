//! Built-in example systems with their known first integrals and
//! symmetry tensors.
//!
//! | name | coordinates | parameters |
//! |------|-------------|------------|
//! | `coupled-oscillators-nr` | `x, y` | `k, p` |
//! | `coupled-oscillators-family` | `x, y` | `k, p, s0` (with `F₁ = 1`) |
//! | `beta-system` | `u, w` | `beta` |
//! | `evans-e3` | `x, y, z` | `lambda, k, c1, c2` |
//! | `gravel-cubic` | `x, y` | `c1, k1, k2, k3` |

pub mod gravel;

use std::collections::BTreeMap;
use std::sync::Arc;

pub use gravel::{gravel_F, gravel_phi, Branch, GravelError, GravelImplicit, GravelQuartic, GRAVEL_KIND};

use crate::conditions::{exp_candidate_from_integral, poly_candidate_from_integral, Candidate};
use crate::expr::{diff, expr, simplify, Expr, ParseContext};
use crate::geometry::{oscillator_family_builder, Connection, ImplicitFunctions, NamedIntegral, Reference, SystemDef};
use crate::tensor::SymTensorField;

pub const CATALOG: [&str; 5] = [
    "coupled-oscillators-nr",
    "coupled-oscillators-family",
    "beta-system",
    "evans-e3",
    "gravel-cubic",
];

/// Entry names.
pub fn list_catalog() -> Vec<&'static str> {
    CATALOG.to_vec()
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CatalogError {
    #[error("unknown catalog entry `{0}` (known: {known})", known = CATALOG.join(", "))]
    Unknown(String),
    #[error("parameter error: {0}")]
    Param(String),
    #[error("building entry failed: {0}")]
    Build(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FiKind {
    Poly,
    Exp,
}

#[derive(Clone, Debug)]
pub struct CatalogIntegral {
    pub name: String,
    pub kind: FiKind,
    /// Expression in `t`, coordinates and velocities.
    pub expr: Expr,
    pub conserved: bool,
    pub anchor: String,
    /// The same integral as condition-checker input.
    pub candidate: Candidate,
}

#[derive(Clone, Debug)]
pub struct Symmetry {
    pub name: String,
    /// A generalized Killing vector or tensor.
    pub tensor: SymTensorField,
    pub anchor: String,
}

#[derive(Clone, Debug)]
pub struct CatalogEntry {
    pub name: String,
    /// Bound system; its `integrals` and `reference` are filled in.
    pub system: SystemDef,
    pub integrals: Vec<CatalogIntegral>,
    pub symmetries: Vec<Symmetry>,
}

impl CatalogEntry {
    pub fn integral(&self, name: &str) -> Option<&CatalogIntegral> {
        self.integrals.iter().find(|i| i.name == name)
    }
}

/// Default parameter values of an entry.
pub fn default_params(name: &str) -> Result<BTreeMap<String, f64>, CatalogError> {
    let pairs: &[(&str, f64)] = match name {
        "coupled-oscillators-nr" => &[("k", 2.0), ("p", 1.0)],
        "coupled-oscillators-family" => &[("k", 2.0), ("p", 1.0), ("s0", 0.2)],
        "beta-system" => &[("beta", 0.5)],
        "evans-e3" => &[("lambda", 1.0), ("k", 0.3), ("c1", 0.2), ("c2", 0.5)],
        "gravel-cubic" => &[("c1", 1.0), ("k1", 0.0), ("k2", 0.0), ("k3", 0.0)],
        other => return Err(CatalogError::Unknown(other.to_string())),
    };
    Ok(pairs.iter().map(|(k, v)| (k.to_string(), *v)).collect())
}

/// Builds an entry, overriding any subset of its default parameters.
pub fn instantiate(name: &str, overrides: &BTreeMap<String, f64>) -> Result<CatalogEntry, CatalogError> {
    let mut params = default_params(name)?;
    for (k, v) in overrides {
        if !params.contains_key(k) {
            return Err(CatalogError::Param(format!(
                "`{name}` has no parameter `{k}` (expected {:?})",
                params.keys().collect::<Vec<_>>()
            )));
        }
        if !v.is_finite() {
            return Err(CatalogError::Param(format!("`{k}` = {v}")));
        }
        params.insert(k.clone(), *v);
    }
    let nonzero = |keys: &[&str]| -> Result<(), CatalogError> {
        match keys.iter().find(|k| params[**k] == 0.0) {
            Some(k) => Err(CatalogError::Param(format!("`{k}` must be nonzero"))),
            None => Ok(()),
        }
    };
    match name {
        "coupled-oscillators-nr" => {
            nonzero(&["k", "p"])?;
            oscillators_nr(params)
        }
        "coupled-oscillators-family" => {
            nonzero(&["k", "p"])?;
            oscillator_family(params)
        }
        "beta-system" => {
            nonzero(&["beta"])?;
            beta_system(params)
        }
        "evans-e3" => {
            nonzero(&["lambda"])?;
            evans(params)
        }
        "gravel-cubic" => {
            nonzero(&["c1"])?;
            gravel_cubic(params)
        }
        other => Err(CatalogError::Unknown(other.to_string())),
    }
}

/// Implicit-function provider for a system-file `[implicit] kind`.
pub fn implicit_from_kind(kind: &str, params: &BTreeMap<String, f64>) -> Result<Arc<dyn ImplicitFunctions>, String> {
    match kind {
        GRAVEL_KIND => {
            let q = GravelQuartic::new(params).map_err(|e| e.to_string())?;
            Ok(Arc::new(GravelImplicit(Arc::new(q))))
        }
        other => Err(format!("unknown implicit kind `{other}` (known: {GRAVEL_KIND})")),
    }
}

fn build_err(e: impl std::fmt::Display) -> CatalogError {
    CatalogError::Build(e.to_string())
}

fn coords(names: &[&str]) -> Vec<String> {
    names.iter().map(|s| s.to_string()).collect()
}

struct Fi<'a> {
    name: &'a str,
    text: &'a str,
    anchor: &'a str,
    shape: Shape,
}

enum Shape {
    Poly {
        m: usize,
        n: usize,
    },
    /// Rate given by parameter name.
    Exp {
        m: usize,
        lambda: &'static str,
    },
}

fn attach(sys: &mut SystemDef, fis: &[Fi<'_>]) -> Result<Vec<CatalogIntegral>, CatalogError> {
    let ctx = sys.phase_context();
    let mut out = Vec::new();
    for fi in fis {
        let e = crate::expr::parse(fi.text, &ctx)
            .map(|e| simplify(&e))
            .map_err(build_err)?;
        let (kind, candidate) = match fi.shape {
            Shape::Poly { m, n } => (
                FiKind::Poly,
                Candidate::Poly(poly_candidate_from_integral(&e, sys, m, n).map_err(build_err)?),
            ),
            Shape::Exp { m, lambda } => (
                FiKind::Exp,
                Candidate::Exp(exp_candidate_from_integral(&e, sys, m, &Expr::param(lambda)).map_err(build_err)?),
            ),
        };
        sys.integrals.push(NamedIntegral {
            name: fi.name.to_string(),
            expr: e.clone(),
            conserved: true,
        });
        out.push(CatalogIntegral {
            name: fi.name.to_string(),
            kind,
            expr: e,
            conserved: true,
            anchor: fi.anchor.to_string(),
            candidate,
        });
    }
    Ok(out)
}

fn field(dim: usize, order: usize, ctx: &ParseContext, entries: &[(&[usize], &str)]) -> SymTensorField {
    SymTensorField::from_components(dim, order, entries.iter().map(|(i, s)| (i.to_vec(), expr(s, ctx))))
        .expect("static indices")
}

fn oscillators_nr(params: BTreeMap<String, f64>) -> Result<CatalogEntry, CatalogError> {
    let ctx = ParseContext::new(["x", "y"], ["k", "p"]);
    let conn = Connection::from_components(
        coords(&["x", "y"]),
        [
            (0, 0, 0, expr("p/(k*y + p*x)", &ctx)),
            (1, 1, 1, expr("p/(p*y - k*x)", &ctx)),
        ],
    )
    .map_err(build_err)?;
    let forces = vec![expr("k*x - p*y", &ctx), expr("k*y + p*x", &ctx)];
    let mut sys = SystemDef::new("coupled-oscillators-nr", conn, forces)
        .map_err(build_err)?
        .with_params(params)
        .with_domain(vec![(0.6, 1.5), (0.1, 1.0)])
        .with_singular(vec![expr("k*y + p*x", &ctx), expr("p*y - k*x", &ctx)]);
    sys.reference = Some(Reference {
        // Trajectories reach a singular line within t ≈ 2 from most starts.
        ic: vec![0.6, 0.7, 0.5, 1.0],
        t_end: 1.5,
    });
    let integrals = attach(
        &mut sys,
        &[Fi {
            name: "I1",
            text: "(k*y + p*x)*x_dot + (p*y - k*x)*y_dot",
            anchor: "autonomous LFI of the non-Riemannian coupled oscillators",
            shape: Shape::Poly { m: 1, n: 0 },
        }],
    )?;
    let symmetries = vec![Symmetry {
        name: "L".into(),
        tensor: field(2, 1, &ctx, &[(&[0], "k*y + p*x"), (&[1], "p*y - k*x")]),
        anchor: "generalized Killing vector with F1 = 1, s0 = 0".into(),
    }];
    Ok(CatalogEntry {
        name: sys.name.clone(),
        system: sys,
        integrals,
        symmetries,
    })
}

fn oscillator_family(params: BTreeMap<String, f64>) -> Result<CatalogEntry, CatalogError> {
    let fam = oscillator_family_builder(&Expr::one(), params["s0"], params["k"], params["p"]).map_err(build_err)?;
    let mut sys = fam.system.with_domain(vec![(1.0, 1.5), (0.2, 1.0)]);
    sys.reference = Some(Reference {
        ic: vec![1.0, 1.0, 0.2, 1.0],
        t_end: 1.2,
    });
    let text = format!("({})*x_dot + ({})*y_dot + s0*t", fam.kv[0], fam.kv[1]);
    let integrals = attach(
        &mut sys,
        &[Fi {
            name: "I",
            text: &text,
            anchor: "time-dependent LFI of the coupled-oscillator family, F1 = 1",
            shape: Shape::Poly { m: 1, n: 0 },
        }],
    )?;
    let tensor = SymTensorField::from_components(2, 1, [(vec![0], fam.kv[0].clone()), (vec![1], fam.kv[1].clone())])
        .map_err(build_err)?;
    Ok(CatalogEntry {
        name: sys.name.clone(),
        system: sys,
        integrals,
        symmetries: vec![Symmetry {
            name: "L".into(),
            tensor,
            anchor: "generalized Killing vector of the family".into(),
        }],
    })
}

fn beta_system(params: BTreeMap<String, f64>) -> Result<CatalogEntry, CatalogError> {
    let ctx = ParseContext::new(["u", "w"], ["beta"]);
    let g1 = expr("-8*beta*w/u^3", &ctx);
    let g2 = expr("4*beta/u^2", &ctx);
    let conn = Connection::from_components(
        coords(&["u", "w"]),
        [
            (0, 0, 0, g1.clone()),
            (1, 0, 1, g1),
            (0, 0, 1, g2.clone()),
            (1, 1, 1, g2),
        ],
    )
    .map_err(build_err)?;
    let forces = vec![expr("1/u^2", &ctx), expr("-2*w/u^3", &ctx)];
    let mut sys = SystemDef::new("beta-system", conn, forces)
        .map_err(build_err)?
        .with_params(params)
        .with_domain(vec![(0.5, 2.0), (-1.0, 1.0)])
        .with_singular(vec![Expr::var("u")]);
    sys.reference = Some(Reference {
        // Starting at u = 1, w = 0.1, u̇ = 0.3, ẇ = −0.2 the velocities blow up near t ≈ 1.15.
        ic: vec![2.0, -0.1, 0.3, 0.1],
        t_end: 5.0,
    });
    let integrals = attach(
        &mut sys,
        &[Fi {
            name: "I",
            text: "exp(12*beta*w/u^2)*(u_dot*w_dot + 1/(12*beta))",
            anchor: "the unique QFI of the non-Riemannian system",
            shape: Shape::Poly { m: 2, n: 0 },
        }],
    )?;
    Ok(CatalogEntry {
        name: sys.name.clone(),
        system: sys,
        integrals,
        symmetries: vec![Symmetry {
            name: "C".into(),
            tensor: field(2, 2, &ctx, &[(&[0, 1], "exp(12*beta*w/u^2)")]),
            anchor: "exponential generalized Killing tensor".into(),
        }],
    })
}

const EVANS_V: &str = "-lambda^2*(x^2 + y^2)/2 + k*x/(y^2*sqrt(x^2 + y^2)) + c1/y^2 - lambda^2*z^2/8 + c2/z^2";

/// The superintegrable potential of the `evans-e3` entry.
pub fn evans_potential() -> Expr {
    expr(
        EVANS_V,
        &ParseContext::new(["x", "y", "z"], ["lambda", "k", "c1", "c2"]),
    )
}

fn evans(params: BTreeMap<String, f64>) -> Result<CatalogEntry, CatalogError> {
    let ctx = ParseContext::new(["x", "y", "z"], ["lambda", "k", "c1", "c2"]);
    let v = evans_potential();
    let forces = ["x", "y", "z"].iter().map(|c| diff(&v, c)).collect();
    let mut sys = SystemDef::new("evans-e3", Connection::flat(coords(&["x", "y", "z"])), forces)
        .map_err(build_err)?
        .with_params(params)
        .with_domain(vec![(0.5, 1.5), (0.5, 1.5), (0.5, 1.5)])
        .with_singular(vec![Expr::var("y"), Expr::var("z")]);
    sys.reference = Some(Reference {
        ic: vec![1.0, 0.8, 1.0, 0.1, -0.1, 0.2],
        t_end: 2.0,
    });
    let i1 = format!("(x_dot^2 + y_dot^2 + z_dot^2)/2 + {EVANS_V}");
    let integrals = attach(
        &mut sys,
        &[
            Fi {
                name: "I1",
                text: &i1,
                anchor: "Hamiltonian",
                shape: Shape::Poly { m: 2, n: 0 },
            },
            Fi {
                name: "I2",
                text: "(x*y_dot - y*x_dot)^2/2 + (k*sqrt(x^2 + y^2) + c1*x)*x/y^2",
                anchor: "angular-momentum QFI",
                shape: Shape::Poly { m: 2, n: 0 },
            },
            Fi {
                name: "I3",
                text: "z_dot^2/2 - lambda^2*z^2/8 + c2/z^2",
                anchor: "z-sector energy",
                shape: Shape::Poly { m: 2, n: 0 },
            },
            Fi {
                name: "I4",
                text: "exp(lambda*t)*((x*y_dot - y*x_dot)*(y_dot - lambda*y) + 2*c1*x/y^2 \
                       + k*(y^2 + 2*x^2)/(y^2*sqrt(x^2 + y^2)))",
                anchor: "time-dependent QFI (angular sector)",
                shape: Shape::Exp { m: 2, lambda: "lambda" },
            },
            Fi {
                name: "I5",
                text: "exp(lambda*t)*((z_dot - lambda*z/2)^2 + 2*c2/z^2)",
                anchor: "time-dependent QFI (z sector)",
                shape: Shape::Exp { m: 2, lambda: "lambda" },
            },
        ],
    )?;
    let symmetries = vec![
        Symmetry {
            name: "metric".into(),
            tensor: field(3, 2, &ctx, &[(&[0, 0], "1"), (&[1, 1], "1"), (&[2, 2], "1")]),
            anchor: "Euclidean metric".into(),
        },
        Symmetry {
            name: "M3^2".into(),
            tensor: field(3, 2, &ctx, &[(&[0, 0], "y^2"), (&[0, 1], "-x*y"), (&[1, 1], "x^2")]),
            anchor: "square of the third angular-momentum component".into(),
        },
    ];
    Ok(CatalogEntry {
        name: sys.name.clone(),
        system: sys,
        integrals,
        symmetries,
    })
}

fn gravel_cubic(params: BTreeMap<String, f64>) -> Result<CatalogEntry, CatalogError> {
    let imp = implicit_from_kind(GRAVEL_KIND, &params).map_err(CatalogError::Param)?;
    let ctx = ParseContext::new(["x", "y"], ["c1", "k1", "k2", "k3"]);
    let forces = vec![Expr::var("Fp"), expr("2*c1*y", &ctx)];
    let mut sys = SystemDef::new("gravel-cubic", Connection::flat(coords(&["x", "y"])), forces)
        .map_err(build_err)?
        .with_params(params)
        .with_implicit(imp)
        .with_domain(vec![(0.3, 2.5), (-1.0, 1.0)])
        .with_singular(vec![Expr::var("x")]);
    sys.reference = Some(Reference {
        // x stays above 1 until t ≈ 5, clear of the fold of the small branch when k1 = 0.01.
        ic: vec![1.0, 0.5, 1.2, 0.1],
        t_end: 5.0,
    });
    let integrals = attach(
        &mut sys,
        &[
            Fi {
                name: "I1",
                text: "x_dot^2/2 + F",
                anchor: "x-sector energy",
                shape: Shape::Poly { m: 2, n: 0 },
            },
            Fi {
                name: "I2",
                text: "y_dot^2/2 + c1*y^2",
                anchor: "y-sector energy",
                shape: Shape::Poly { m: 2, n: 0 },
            },
            Fi {
                name: "I3",
                text: "(x*y_dot - y*x_dot)*x_dot^2 - (3*y*F - c1*x^2*y + k3*y)*x_dot \
                       + Fp/(2*c1)*(3*F - c1*x^2 + k3)*y_dot",
                anchor: "autonomous CFI",
                shape: Shape::Poly { m: 3, n: 0 },
            },
        ],
    )?;
    let kt = field(2, 3, &ctx, &[(&[0, 0, 0], "-y"), (&[0, 0, 1], "x/3")]);
    Ok(CatalogEntry {
        name: sys.name.clone(),
        system: sys,
        integrals,
        symmetries: vec![Symmetry {
            name: "L3".into(),
            tensor: kt,
            anchor: "cubic Killing tensor of the plane".into(),
        }],
    })
}
