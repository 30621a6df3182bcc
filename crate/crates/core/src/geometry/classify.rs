//! Two-dimensional connections with only `Γ¹₁₁` and `Γ²₂₂`: does a metric
//! with zero metricity exist, and if so, which one?
//!
//! Integrability requires `Γ¹₁₁,y = Γ²₂₂,x`. When it holds, `ln F` with
//! `(ln F),x = Γ¹₁₁`, `(ln F),y = Γ²₂₂` exists locally and `γ = F·offdiag`
//! has zero metricity. `ln F` is recovered exactly with a logarithmic
//! ansatz `Σ cⱼ ln fⱼ + P`, where the `fⱼ` are the denominator factors of
//! the connection and `P` is a polynomial.

use std::collections::BTreeMap;
use std::sync::Arc;

use num::{BigRational, Zero};

use super::{metricity_residual, GeometryError, MetricField, SystemDef};
use crate::expr::{
    diff, simplify, to_rational, Compiled, Expr, Polynomial, RationalFunction, ZeroTestConfig, ZeroVerdict,
};
use crate::solver::linalg::{nullspace, LinearSystem, SparseRow};
use crate::tensor::SymTensorField;

#[derive(Clone, Debug)]
pub enum Classification {
    /// A metric from one of the four constructions, with the combined
    /// verdict of its metricity residuals.
    Riemannian {
        case: u8,
        metric: MetricField,
        residual: ZeroVerdict,
    },
    /// `Γ¹₁₁,y − Γ²₂₂,x` is nonzero at `witness`.
    NonRiemannian {
        criterion: Expr,
        witness: Vec<(String, f64)>,
        value: f64,
    },
    Indeterminate {
        reason: String,
    },
}

impl Classification {
    pub fn label(&self) -> &'static str {
        match self {
            Classification::Riemannian { .. } => "Riemannian",
            Classification::NonRiemannian { .. } => "NonRiemannian",
            Classification::Indeterminate { .. } => "Indeterminate",
        }
    }
}

/// Exact potential `Φ = Σ cⱼ ln fⱼ + P` with `∂ᵢΦ = gᵢ`, if one exists.
struct LogPotential {
    logs: Vec<(Polynomial, BigRational)>,
    poly: Polynomial,
}

impl LogPotential {
    /// `exp(Φ)`.
    fn exp(&self) -> Expr {
        let mut f: Vec<Expr> = self
            .logs
            .iter()
            .map(|(p, c)| p.to_expr().pow_rational(c.clone()))
            .collect();
        if !self.poly.is_zero() {
            f.push(self.poly.to_expr().exp());
        }
        simplify(&Expr::product(f))
    }
}

fn monomials(n: usize, max_deg: u32) -> Vec<Vec<u32>> {
    fn rec(n: usize, left: u32, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if cur.len() == n {
            out.push(cur.clone());
            return;
        }
        for e in 0..=left {
            cur.push(e);
            rec(n, left - e, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(n, max_deg, &mut Vec::new(), &mut out);
    out.retain(|m| m.iter().any(|&e| e > 0));
    out
}

fn log_potential(g: &[RationalFunction]) -> Option<LogPotential> {
    let vars = g[0].numerator().vars().clone();
    let n = vars.len();
    let mut factors: Vec<Polynomial> = Vec::new();
    for gi in g {
        for f in gi.denominator_factors().keys() {
            if f.as_constant().is_none() && !factors.contains(f) {
                factors.push(f.clone());
            }
        }
    }
    let excess = g
        .iter()
        .filter(|gi| !gi.is_zero())
        .map(|gi| gi.numerator().total_degree() as i64 - gi.denominator().total_degree() as i64)
        .max()
        .unwrap_or(-1);
    let pdeg = (excess + 1).clamp(0, 6) as u32;
    let monos = monomials(n, pdeg);
    let ncols = 1 + factors.len() + monos.len();
    let mut sys = LinearSystem::new((0..ncols).map(|c| format!("u{c}")).collect());
    for (i, gi) in g.iter().enumerate() {
        let mut basis: Vec<RationalFunction> = vec![gi.clone()];
        for f in &factors {
            let df = RationalFunction::from_poly(f.derivative(i).neg());
            basis.push(df.div(&RationalFunction::from_poly(f.clone()))?);
        }
        for m in &monos {
            let p = Polynomial::monomial(vars.clone(), m.clone(), BigRational::from_integer(1.into()));
            basis.push(RationalFunction::from_poly(p.derivative(i).neg()));
        }
        let mut lcm: BTreeMap<Polynomial, u32> = BTreeMap::new();
        for b in &basis {
            for (f, &e) in b.denominator_factors() {
                let slot = lcm.entry(f.clone()).or_insert(0);
                *slot = (*slot).max(e);
            }
        }
        let common = lcm
            .iter()
            .fold(Polynomial::one(vars.clone()), |acc, (f, &e)| acc.mul(&f.pow(e)));
        let common = RationalFunction::from_poly(common);
        let mut rows: BTreeMap<Vec<u32>, SparseRow> = BTreeMap::new();
        for (col, b) in basis.iter().enumerate() {
            let cleared = b.mul(&common);
            if !cleared.is_polynomial() {
                return None;
            }
            for (mono, c) in cleared.numerator().terms() {
                rows.entry(mono.clone()).or_default().insert(col, c.clone());
            }
        }
        for (mono, row) in rows {
            sys.push(format!("d{i}:{mono:?}"), row);
        }
    }
    let sol = nullspace(&sys).into_iter().find(|v| !v[0].is_zero())?;
    let x0 = BigRational::from_integer(sol[0].clone());
    let val = |k: usize| BigRational::from_integer(sol[k].clone()) / &x0;
    let logs = factors
        .iter()
        .enumerate()
        .map(|(j, f)| (f.clone(), val(1 + j)))
        .filter(|(_, c)| !c.is_zero())
        .collect();
    let mut poly = Polynomial::zero(vars.clone());
    for (k, m) in monos.iter().enumerate() {
        let c = val(1 + factors.len() + k);
        poly = poly.add(&Polynomial::monomial(vars.clone(), m.clone(), c));
    }
    Some(LogPotential { logs, poly })
}

fn offdiag(f: Expr) -> SymTensorField {
    SymTensorField::from_components(2, 2, [(vec![0, 1], f)]).expect("valid indices")
}

/// Verifies a metric against the connection: every residual zero and the
/// determinant not identically zero.
fn verify(sys: &SystemDef, metric: &MetricField, cfg: &ZeroTestConfig) -> Result<Option<ZeroVerdict>, GeometryError> {
    let mut worst = ZeroVerdict::ExactZero;
    for r in metricity_residual(&sys.connection, metric)?.values() {
        match sys.zero_test(r, cfg)? {
            ZeroVerdict::ExactZero => {}
            ZeroVerdict::ProbablyZero => worst = ZeroVerdict::ProbablyZero,
            ZeroVerdict::NonZero { .. } => return Ok(None),
        }
    }
    if !metric.nondegenerate(sys, cfg)? {
        return Ok(None);
    }
    Ok(Some(worst))
}

/// Classifies a 2d connection whose only nonzero components are `Γ¹₁₁`
/// and `Γ²₂₂`.
///
/// A flat connection gets the identity metric (case 4 with `f = h = 1`,
/// `c₀ = 0`). Otherwise the `F·offdiag` construction (case 1) is tried
/// first, then the separable diagonal/mixed constructions (cases 4, 2, 3).
pub fn classify_2d(sys: &SystemDef, cfg: &ZeroTestConfig) -> Result<Classification, GeometryError> {
    if sys.dim() != 2 {
        return Err(GeometryError::NotTwoDimensional(sys.dim()));
    }
    let conn = &sys.connection;
    for (a, b, c, e) in conn.components() {
        if (a, b, c) == (0, 0, 0) || (a, b, c) == (1, 1, 1) {
            continue;
        }
        if !sys.zero_test(e, cfg)?.is_zero() {
            return Err(GeometryError::UnsupportedComponent {
                a: a + 1,
                b: b + 1,
                c: c + 1,
                expr: e.to_string(),
            });
        }
    }
    let (x, y) = (sys.coords()[0].clone(), sys.coords()[1].clone());
    let g1 = conn.get(0, 0, 0).clone();
    let g2 = conn.get(1, 1, 1).clone();
    let criterion = simplify(&(sys.diff_coord(&g1, 1) - sys.diff_coord(&g2, 0)));
    if let ZeroVerdict::NonZero { witness, value } = sys.zero_test(&criterion, cfg)? {
        let witness = witness.into_iter().filter(|(n, _)| *n == x || *n == y).collect();
        return Ok(Classification::NonRiemannian {
            criterion,
            witness,
            value,
        });
    }

    if sys.zero_test(&g1, cfg)?.is_zero() && sys.zero_test(&g2, cfg)?.is_zero() {
        let metric = MetricField::new(SymTensorField::from_components(
            2,
            2,
            [(vec![0, 0], Expr::one()), (vec![1, 1], Expr::one())],
        )?)?;
        if let Some(residual) = verify(sys, &metric, cfg)? {
            return Ok(Classification::Riemannian {
                case: 4,
                metric,
                residual,
            });
        }
    }

    let names = [x.as_str(), y.as_str()];
    let rational = |e: &Expr| to_rational(&e.bind_params(&sys.params), &names).ok();
    let (r1, r2) = match (rational(&g1), rational(&g2)) {
        (Some(a), Some(b)) => (a, b),
        _ => {
            return Ok(Classification::Indeterminate {
                reason: format!(
                    "integrability holds but the connection is not rational; {}",
                    quadrature_diagnostic(sys, &g1, &g2)
                ),
            })
        }
    };

    if let Some(pot) = log_potential(&[r1.clone(), r2.clone()]) {
        let metric = MetricField::new(offdiag(pot.exp()))?;
        if let Some(residual) = verify(sys, &metric, cfg)? {
            return Ok(Classification::Riemannian {
                case: 1,
                metric,
                residual,
            });
        }
    }

    let separable = sys.zero_test(&diff(&g1, &y), cfg)?.is_zero() && sys.zero_test(&diff(&g2, &x), cfg)?.is_zero();
    if separable {
        let zero = RationalFunction::zero(r1.numerator().vars().clone());
        let two = BigRational::from_integer(2.into());
        let along_x = |g: &RationalFunction| log_potential(&[g.clone(), zero.clone()]).map(|p| p.exp());
        let along_y = |g: &RationalFunction| log_potential(&[zero.clone(), g.clone()]).map(|p| p.exp());
        let candidates: [(u8, Option<(Expr, Expr)>); 3] = [
            (4, along_x(&r1.scale(&two)).zip(along_y(&r2.scale(&two)))),
            (2, along_x(&r1.scale(&two)).zip(along_y(&r2))),
            (3, along_x(&r1).zip(along_y(&r2.scale(&two)))),
        ];
        for (case, fh) in candidates {
            let Some((f, h)) = fh else { continue };
            let entries = match case {
                4 => vec![(vec![0, 0], f), (vec![1, 1], h)],
                2 => vec![(vec![0, 0], f.clone()), (vec![0, 1], h * f.sqrt())],
                _ => vec![(vec![0, 1], f * h.sqrt()), (vec![1, 1], h)],
            };
            let metric = MetricField::new(SymTensorField::from_components(2, 2, entries)?.simplified())?;
            if let Some(residual) = verify(sys, &metric, cfg)? {
                return Ok(Classification::Riemannian { case, metric, residual });
            }
        }
    }

    Ok(Classification::Indeterminate {
        reason: format!(
            "integrability holds but ln F has no closed form in the logarithmic ansatz; {}",
            quadrature_diagnostic(sys, &g1, &g2)
        ),
    })
}

/// Integrates `d ln F = Γ¹₁₁ dx + Γ²₂₂ dy` from the box centre to a corner
/// along both axis-parallel paths and reports the discrepancy.
fn quadrature_diagnostic(sys: &SystemDef, g1: &Expr, g2: &Expr) -> String {
    let names: Vec<&str> = sys.coords().iter().map(|s| s.as_str()).collect();
    let compile = |e: &Expr| Compiled::new(&simplify(&e.bind_params(&sys.params)), &names).ok();
    let (Some(c1), Some(c2)) = (compile(g1), compile(g2)) else {
        return "quadrature unavailable (connection not numerically evaluable)".into();
    };
    let c1 = Arc::new(c1);
    let c2 = Arc::new(c2);
    let (x0, y0) = (
        0.5 * (sys.domain[0].0 + sys.domain[0].1),
        0.5 * (sys.domain[1].0 + sys.domain[1].1),
    );
    let (x1, y1) = (
        x0 + 0.25 * (sys.domain[0].1 - sys.domain[0].0),
        y0 + 0.25 * (sys.domain[1].1 - sys.domain[1].0),
    );
    // Composite Simpson on 64 panels.
    let simpson = |f: &dyn Fn(f64) -> Option<f64>, a: f64, b: f64| -> Option<f64> {
        let n = 64;
        let h = (b - a) / n as f64;
        let mut s = f(a)? + f(b)?;
        for i in 1..n {
            let w = if i % 2 == 1 { 4.0 } else { 2.0 };
            s += w * f(a + i as f64 * h)?;
        }
        Some(s * h / 3.0)
    };
    let gx = |yv: f64| {
        let c = c1.clone();
        move |xv: f64| c.eval(&[xv, yv]).ok()
    };
    let gy = |xv: f64| {
        let c = c2.clone();
        move |yv: f64| c.eval(&[xv, yv]).ok()
    };
    let path_a = simpson(&gx(y0), x0, x1)
        .zip(simpson(&gy(x1), y0, y1))
        .map(|(a, b)| a + b);
    let path_b = simpson(&gy(x0), y0, y1)
        .zip(simpson(&gx(y1), x0, x1))
        .map(|(a, b)| a + b);
    match (path_a, path_b) {
        (Some(a), Some(b)) => format!(
            "quadrature of ln F from ({x0}, {y0}) to ({x1}, {y1}): {a:.12} vs {b:.12} (discrepancy {:.3e})",
            (a - b).abs()
        ),
        _ => "quadrature hit a singular point".into(),
    }
}
