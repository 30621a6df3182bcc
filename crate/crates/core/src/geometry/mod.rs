//! Connections, dynamical-system definitions, curvature and metricity.

mod classify;
mod family;
pub mod io;

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use crate::expr::{
    diff_chain, is_identically_zero, simplify, ChainRule, Expr, ParseContext, SampleDomain, ZeroTestConfig,
    ZeroTestError, ZeroVerdict,
};
use crate::tensor::{cov_derivative, SymTensorField, TensorError};

pub use classify::{classify_2d, Classification};
pub use family::{oscillator_family_builder, OscillatorFamily};

/// Name of the time variable in integral expressions.
pub const TIME: &str = "t";

/// Velocity variable for coordinate `q`: `q_dot`.
pub fn velocity_name(coord: &str) -> String {
    format!("{coord}_dot")
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum GeometryError {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },
    #[error("index out of range in Γ^{0}_{1}{2}")]
    Index(usize, usize, usize),
    #[error("classification needs D = 2, got {0}")]
    NotTwoDimensional(usize),
    #[error("connection component Γ^{a}_{b}{c} = {expr} is not identically zero")]
    UnsupportedComponent { a: usize, b: usize, c: usize, expr: String },
    #[error("{0}")]
    Zero(#[from] ZeroTestError),
    #[error("{0}")]
    Tensor(#[from] TensorError),
    #[error("{0}")]
    Invalid(String),
}

/// Symmetric connection `Γᵃ_bc` over named coordinates (zero-based indices).
#[derive(Clone, Debug)]
pub struct Connection {
    coords: Vec<String>,
    // Full D×D×D storage kept symmetric in the lower pair.
    comps: Vec<Expr>,
    chain: ChainRule,
}

impl Connection {
    pub fn flat(coords: Vec<String>) -> Self {
        let d = coords.len();
        Connection {
            coords,
            comps: vec![Expr::zero(); d * d * d],
            chain: ChainRule::new(),
        }
    }

    /// Connection from `(a, b, c, Γᵃ_bc)` entries; the mirrored `(a, c, b)`
    /// entry is set as well.
    pub fn from_components<I>(coords: Vec<String>, entries: I) -> Result<Self, GeometryError>
    where
        I: IntoIterator<Item = (usize, usize, usize, Expr)>,
    {
        let mut c = Self::flat(coords);
        for (a, b, cc, e) in entries {
            c.set(a, b, cc, e)?;
        }
        Ok(c)
    }

    /// Auxiliary symbols that depend on the coordinates (see [`ChainRule`]).
    pub fn with_chain(mut self, chain: ChainRule) -> Self {
        self.chain = chain;
        self
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self) -> &[String] {
        &self.coords
    }

    pub fn chain(&self) -> &ChainRule {
        &self.chain
    }

    fn slot(&self, a: usize, b: usize, c: usize) -> usize {
        let d = self.dim();
        (a * d + b) * d + c
    }

    pub fn set(&mut self, a: usize, b: usize, c: usize, e: Expr) -> Result<(), GeometryError> {
        let d = self.dim();
        if a >= d || b >= d || c >= d {
            return Err(GeometryError::Index(a, b, c));
        }
        let e = simplify(&e);
        let (i, j) = (self.slot(a, b, c), self.slot(a, c, b));
        self.comps[i] = e.clone();
        self.comps[j] = e;
        Ok(())
    }

    /// `Γᵃ_bc`. Panics on out-of-range indices.
    pub fn get(&self, a: usize, b: usize, c: usize) -> &Expr {
        &self.comps[self.slot(a, b, c)]
    }

    /// Stored components with `b ≤ c`, including zeros.
    pub fn components(&self) -> Vec<(usize, usize, usize, &Expr)> {
        let d = self.dim();
        let mut out = Vec::new();
        for a in 0..d {
            for b in 0..d {
                for c in b..d {
                    out.push((a, b, c, self.get(a, b, c)));
                }
            }
        }
        out
    }

    pub fn is_flat(&self) -> bool {
        self.comps.iter().all(|e| e.is_zero())
    }

    pub fn map(&self, f: impl Fn(&Expr) -> Expr) -> Self {
        Connection {
            coords: self.coords.clone(),
            comps: self.comps.iter().map(f).collect(),
            chain: self.chain.clone(),
        }
    }
}

/// Extra coordinate-dependent functions that are only known numerically,
/// such as a root of an algebraic condition.
pub trait ImplicitFunctions: Send + Sync + fmt::Debug {
    /// Identifier used in system files.
    fn kind(&self) -> &str;
    /// Symbol names, in the order values are produced.
    fn symbols(&self) -> Vec<String>;
    /// Derivatives of the symbols with respect to the coordinates.
    fn chain_rule(&self) -> ChainRule;
    /// Values at `q` on the default branch (stateless; for sampling).
    fn values(&self, q: &[f64]) -> Result<Vec<f64>, String>;
    /// A stateful evaluator that follows one branch along a path.
    fn tracker(&self) -> Box<dyn ImplicitTracker>;
}

/// Branch-following evaluator owned by a single trajectory.
pub trait ImplicitTracker: Send {
    fn values(&mut self, q: &[f64]) -> Result<Vec<f64>, String>;
}

/// A first integral attached to a system.
#[derive(Clone, Debug, PartialEq)]
pub struct NamedIntegral {
    pub name: String,
    pub expr: Expr,
    pub conserved: bool,
}

/// Reference initial data `(q, q̇)` and time span.
#[derive(Clone, Debug, PartialEq)]
pub struct Reference {
    pub ic: Vec<f64>,
    pub t_end: f64,
}

/// A dynamical system `q̈ᵃ = −Γᵃ_bc q̇ᵇ q̇ᶜ − Qᵃ` with everything needed to
/// sample, integrate and check it.
#[derive(Clone)]
pub struct SystemDef {
    pub name: String,
    pub connection: Connection,
    pub forces: Vec<Expr>,
    pub params: BTreeMap<String, f64>,
    pub singular: Vec<Expr>,
    /// Coordinate box, one interval per coordinate.
    pub domain: Vec<(f64, f64)>,
    pub velocity_box: (f64, f64),
    pub time_box: (f64, f64),
    pub implicit: Option<Arc<dyn ImplicitFunctions>>,
    pub integrals: Vec<NamedIntegral>,
    pub reference: Option<Reference>,
}

impl fmt::Debug for SystemDef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SystemDef")
            .field("name", &self.name)
            .field("coords", &self.connection.coords)
            .field("params", &self.params)
            .field("forces", &self.forces.iter().map(|e| e.to_string()).collect::<Vec<_>>())
            .field("implicit", &self.implicit.as_ref().map(|i| i.kind().to_string()))
            .finish()
    }
}

impl SystemDef {
    /// A system with unit-box domain and no integrals.
    pub fn new(name: &str, connection: Connection, forces: Vec<Expr>) -> Result<Self, GeometryError> {
        let d = connection.dim();
        if forces.len() != d {
            return Err(GeometryError::Dimension {
                expected: d,
                got: forces.len(),
            });
        }
        Ok(SystemDef {
            name: name.to_string(),
            connection,
            forces: forces.iter().map(simplify).collect(),
            params: BTreeMap::new(),
            singular: Vec::new(),
            domain: vec![(-1.0, 1.0); d],
            velocity_box: (-1.0, 1.0),
            time_box: (0.0, 1.0),
            implicit: None,
            integrals: Vec::new(),
            reference: None,
        })
    }

    pub fn with_params(mut self, params: BTreeMap<String, f64>) -> Self {
        self.params = params;
        self
    }

    pub fn with_domain(mut self, domain: Vec<(f64, f64)>) -> Self {
        self.domain = domain;
        self
    }

    pub fn with_singular(mut self, singular: Vec<Expr>) -> Self {
        self.singular = singular.iter().map(simplify).collect();
        self
    }

    pub fn with_implicit(mut self, implicit: Arc<dyn ImplicitFunctions>) -> Self {
        self.connection = self.connection.clone().with_chain(implicit.chain_rule());
        self.implicit = Some(implicit);
        self
    }

    pub fn dim(&self) -> usize {
        self.connection.dim()
    }

    pub fn coords(&self) -> &[String] {
        self.connection.coords()
    }

    pub fn velocity_names(&self) -> Vec<String> {
        self.coords().iter().map(|c| velocity_name(c)).collect()
    }

    pub fn implicit_symbols(&self) -> Vec<String> {
        self.implicit.as_ref().map(|i| i.symbols()).unwrap_or_default()
    }

    pub fn chain(&self) -> &ChainRule {
        self.connection.chain()
    }

    /// Context for expressions over coordinates (and implicit symbols).
    pub fn space_context(&self) -> ParseContext {
        let vars: Vec<String> = self.coords().iter().cloned().chain(self.implicit_symbols()).collect();
        ParseContext::new(vars, self.params.keys().cloned())
    }

    /// Context for expressions over `(t, q, q̇)`.
    pub fn phase_context(&self) -> ParseContext {
        let mut ctx = self.space_context().with_var(TIME);
        for v in self.velocity_names() {
            ctx = ctx.with_var(&v);
        }
        ctx
    }

    /// Sampling box over coordinates, velocities and time, with the implicit
    /// symbols derived from the coordinates.
    pub fn sample_domain(&self) -> SampleDomain {
        let mut vars: Vec<(String, f64, f64)> = self
            .coords()
            .iter()
            .zip(&self.domain)
            .map(|(c, (lo, hi))| (c.clone(), *lo, *hi))
            .collect();
        let (vlo, vhi) = self.velocity_box;
        vars.extend(self.velocity_names().into_iter().map(|v| (v, vlo, vhi)));
        vars.push((TIME.to_string(), self.time_box.0, self.time_box.1));
        let dom = SampleDomain::new(vars).with_params(self.params.clone());
        match &self.implicit {
            Some(imp) => {
                let imp = imp.clone();
                let d = self.dim();
                dom.with_derived(imp.symbols(), Arc::new(move |p: &[f64]| imp.values(&p[..d])))
            }
            None => dom,
        }
    }

    /// Zero test of `e` over this system's sampling box.
    pub fn zero_test(&self, e: &Expr, cfg: &ZeroTestConfig) -> Result<ZeroVerdict, ZeroTestError> {
        is_identically_zero(e, &self.sample_domain(), cfg)
    }

    /// `∂e/∂(coordinate i)` honouring implicit-function chain rules.
    pub fn diff_coord(&self, e: &Expr, i: usize) -> Expr {
        diff_chain(e, &self.coords()[i], self.chain())
    }

    /// Checks that expressions only use declared symbols and shapes agree.
    pub fn validate(&self) -> Result<(), GeometryError> {
        let d = self.dim();
        for (what, n) in [("forces", self.forces.len()), ("domain", self.domain.len())] {
            if n != d {
                return Err(GeometryError::Invalid(format!("{what}: expected {d} entries, got {n}")));
            }
        }
        let space = self.space_context();
        let phase = self.phase_context();
        let check = |e: &Expr, ctx: &ParseContext, what: &str| -> Result<(), GeometryError> {
            for v in e.variables() {
                if !ctx.vars.contains(&v) {
                    return Err(GeometryError::Invalid(format!("{what}: unknown variable `{v}`")));
                }
            }
            for p in e.parameters() {
                if !ctx.params.contains(&p) {
                    return Err(GeometryError::Invalid(format!("{what}: unbound parameter `{p}`")));
                }
            }
            Ok(())
        };
        for (a, b, c, e) in self.connection.components() {
            check(e, &space, &format!("connection {},{},{}", a + 1, b + 1, c + 1))?;
        }
        for (i, e) in self.forces.iter().enumerate() {
            check(e, &space, &format!("force {}", i + 1))?;
        }
        for e in &self.singular {
            check(e, &space, "singular")?;
        }
        for i in &self.integrals {
            check(&i.expr, &phase, &format!("integral {}", i.name))?;
        }
        if let Some(r) = &self.reference {
            if r.ic.len() != 2 * d {
                return Err(GeometryError::Invalid(format!(
                    "reference ic: expected {} numbers, got {}",
                    2 * d,
                    r.ic.len()
                )));
            }
        }
        for (lo, hi) in &self.domain {
            if !(lo < hi) {
                return Err(GeometryError::Invalid(format!("domain interval [{lo}, {hi}] is empty")));
            }
        }
        Ok(())
    }
}

/// `Rᵃ_bcd`, full storage.
#[derive(Clone, Debug, PartialEq)]
pub struct CurvatureField {
    dim: usize,
    comps: Vec<Expr>,
}

impl CurvatureField {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, a: usize, b: usize, c: usize, d: usize) -> &Expr {
        let n = self.dim;
        &self.comps[((a * n + b) * n + c) * n + d]
    }

    /// Components that are not literally zero, with `c < d`.
    pub fn nonzero(&self) -> Vec<([usize; 4], &Expr)> {
        let n = self.dim;
        let mut out = Vec::new();
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    for d in c + 1..n {
                        let e = self.get(a, b, c, d);
                        if !e.is_zero() {
                            out.push(([a, b, c, d], e));
                        }
                    }
                }
            }
        }
        out
    }
}

/// `Rᵃ_bcd = Γᵃ_bd,c − Γᵃ_bc,d + Γᵃ_sc Γˢ_bd − Γᵃ_sd Γˢ_bc`.
pub fn curvature(conn: &Connection) -> CurvatureField {
    let n = conn.dim();
    let dc = |e: &Expr, i: usize| diff_chain(e, &conn.coords()[i], conn.chain());
    let mut comps = Vec::with_capacity(n.pow(4));
    for a in 0..n {
        for b in 0..n {
            for c in 0..n {
                for d in 0..n {
                    let mut terms = vec![dc(conn.get(a, b, d), c), -dc(conn.get(a, b, c), d)];
                    for s in 0..n {
                        terms.push(conn.get(a, s, c) * conn.get(s, b, d));
                        terms.push(-(conn.get(a, s, d) * conn.get(s, b, c)));
                    }
                    comps.push(simplify(&Expr::sum(terms)));
                }
            }
        }
    }
    CurvatureField { dim: n, comps }
}

/// A symmetric order-2 field with its determinant.
#[derive(Clone, Debug, PartialEq)]
pub struct MetricField {
    pub gamma: SymTensorField,
    pub det: Expr,
}

impl MetricField {
    pub fn new(gamma: SymTensorField) -> Result<Self, GeometryError> {
        if gamma.order() != 2 {
            return Err(GeometryError::Invalid(format!(
                "metric must have order 2, got {}",
                gamma.order()
            )));
        }
        let n = gamma.dim();
        let rows: Vec<usize> = (0..n).collect();
        let det = simplify(&determinant(&gamma, &rows, &rows));
        Ok(MetricField { gamma, det })
    }

    /// Nondegeneracy: the determinant does not vanish identically.
    pub fn nondegenerate(&self, sys: &SystemDef, cfg: &ZeroTestConfig) -> Result<bool, ZeroTestError> {
        Ok(!sys.zero_test(&self.det, cfg)?.is_zero())
    }
}

/// Cofactor expansion along the first row (dimensions here are tiny).
fn determinant(g: &SymTensorField, rows: &[usize], cols: &[usize]) -> Expr {
    if rows.len() == 1 {
        return g.at(&[rows[0], cols[0]]).clone();
    }
    let r0 = rows[0];
    let rest: Vec<usize> = rows[1..].to_vec();
    let terms = cols.iter().enumerate().map(|(j, &c)| {
        let minor: Vec<usize> = cols.iter().copied().filter(|&k| k != c).collect();
        let sign = if j % 2 == 0 { Expr::one() } else { Expr::int(-1) };
        Expr::product([sign, g.at(&[r0, c]).clone(), determinant(g, &rest, &minor)])
    });
    Expr::sum(terms.collect::<Vec<_>>())
}

/// `γ_{ab|c}` for every `a ≤ b` and `c`.
pub fn metricity_residual(
    conn: &Connection,
    metric: &MetricField,
) -> Result<BTreeMap<(Vec<usize>, usize), Expr>, GeometryError> {
    Ok(cov_derivative(&metric.gamma, conn)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse;

    fn xy() -> Vec<String> {
        vec!["x".into(), "y".into()]
    }

    fn e(t: &str) -> Expr {
        simplify(&parse(t, &ParseContext::new(["x", "y"], ["k", "p"])).unwrap())
    }

    #[test]
    fn connection_is_symmetric() {
        let c = Connection::from_components(xy(), [(0, 0, 1, e("x"))]).unwrap();
        assert_eq!(c.get(0, 1, 0), &e("x"));
        assert!(c.get(1, 0, 1).is_zero());
        assert_eq!(c.components().len(), 6);
        assert!(Connection::from_components(xy(), [(2, 0, 0, e("x"))]).is_err());
    }

    #[test]
    fn flat_curvature_and_metricity() {
        let c = Connection::flat(xy());
        assert!(curvature(&c).nonzero().is_empty());
        let id = MetricField::new(
            SymTensorField::from_components(2, 2, [(vec![0, 0], Expr::one()), (vec![1, 1], Expr::one())]).unwrap(),
        )
        .unwrap();
        assert_eq!(id.det, Expr::one());
        let res = metricity_residual(&c, &id).unwrap();
        assert_eq!(res.len(), 6);
        assert!(res.values().all(|r| r.is_zero()));
    }

    #[test]
    fn curvature_is_antisymmetric() {
        let c = Connection::from_components(
            xy(),
            [
                (0, 0, 0, e("p/(k*y+p*x)")),
                (1, 1, 1, e("p/(p*y-k*x)")),
                (0, 0, 1, e("x*y")),
            ],
        )
        .unwrap();
        let r = curvature(&c);
        for a in 0..2 {
            for b in 0..2 {
                for cc in 0..2 {
                    for d in 0..2 {
                        assert!(simplify(&(r.get(a, b, cc, d) + r.get(a, b, d, cc))).is_zero());
                    }
                }
            }
        }
    }

    #[test]
    fn phase_context_names() {
        let s = SystemDef::new("s", Connection::flat(xy()), vec![e("x"), e("y")]).unwrap();
        let ctx = s.phase_context();
        assert!(ctx.vars.contains("x_dot") && ctx.vars.contains("t"));
        assert_eq!(s.sample_domain().vars.len(), 5);
        s.validate().unwrap();
    }
}
