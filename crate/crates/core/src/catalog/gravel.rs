//! The implicit function `F(x)` of the separable cubic-integral potential
//! `V = c₁y² + F(x)`, defined as a real root of a quartic `Φ(x, F) = 0`.
//!
//! Exposed to expressions as the symbols `F` and `Fp = F′`; the chain rule
//! closes with `F″ = −(Φ_xx + 2Φ_xF F′ + Φ_FF F′²)/Φ_F`, so every derivative
//! stays a rational function of `x`, `F` and `Fp`.

use std::collections::BTreeMap;
use std::sync::Arc;

use nalgebra::DMatrix;

use crate::expr::{diff, expr, simplify, to_polynomial, ChainRule, Expr, ParseContext};
use crate::geometry::{ImplicitFunctions, ImplicitTracker};

pub const GRAVEL_KIND: &str = "gravel-quartic";
pub const GRAVEL_PARAMS: [&str; 4] = ["c1", "k1", "k2", "k3"];

const PHI: &str = "k2*x^2 + 4*k1^2 + (9*F - c1*x^2)*(F - c1*x^2)^3 - 4*k1*(F - c1*x^2)*(3*F + c1*x^2) \
    + 4*k3*(3*F - c1*x^2)*(F - c1*x^2)^2 + 4*k3^2*(F - c1*x^2)^2 - (8*k1*k3/3)*(3*F - c1*x^2)";

/// `Φ(x, F)` with symbolic parameters `c1, k1, k2, k3`.
pub fn gravel_phi() -> Expr {
    expr(PHI, &ParseContext::new(["x", "F"], GRAVEL_PARAMS))
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum GravelError {
    #[error("missing or invalid parameter: {0}")]
    Param(String),
    #[error("no real root of the quartic at x = {x}")]
    NoRealRoot { x: f64 },
    #[error("branch collision at x = {x}: F = {f}, dPhi/dF = {dphi:e} (roots {roots:?})")]
    BranchCollision { x: f64, f: f64, dphi: f64, roots: Vec<f64> },
    #[error(
        "branch lost between x = {from} and x = {x}: expected F ≈ {expected}, nearest root {found} (roots {roots:?})"
    )]
    BranchLost {
        from: f64,
        x: f64,
        expected: f64,
        found: f64,
        roots: Vec<f64>,
    },
    #[error("root index {index} out of range ({count} real roots at x = {x})")]
    Index { index: usize, count: usize, x: f64 },
}

/// Which real root to take.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Branch {
    NearestTo(f64),
    /// Position in the ascending list of real roots.
    Index(usize),
}

/// Numeric quartic with bound parameters.
#[derive(Debug, Clone)]
pub struct GravelQuartic {
    params: BTreeMap<String, f64>,
    c1: f64,
    /// `(power of x, power of F, coefficient)`.
    terms: Vec<(i32, usize, f64)>,
    fpp: Expr,
}

impl GravelQuartic {
    pub fn new(params: &BTreeMap<String, f64>) -> Result<Self, GravelError> {
        let mut bound = BTreeMap::new();
        for p in GRAVEL_PARAMS {
            let v = *params
                .get(p)
                .ok_or_else(|| GravelError::Param(format!("`{p}` is required")))?;
            if !v.is_finite() {
                return Err(GravelError::Param(format!("`{p}` = {v}")));
            }
            bound.insert(p.to_string(), v);
        }
        let c1 = bound["c1"];
        if c1 == 0.0 {
            return Err(GravelError::Param("c1 must be nonzero".into()));
        }
        let phi = gravel_phi();
        let (num, _) = to_polynomial(&simplify(&phi.bind_params(&bound)), &["x", "F"]).expect("quartic is polynomial");
        let terms = num
            .terms()
            .iter()
            .map(|(m, c)| {
                (
                    m[0] as i32,
                    m[1] as usize,
                    num::ToPrimitive::to_f64(c).unwrap_or(f64::NAN),
                )
            })
            .collect();
        let (fx, ff) = (diff(&phi, "x"), diff(&phi, "F"));
        let fp = Expr::var("Fp");
        let fpp =
            simplify(&(-(diff(&fx, "x") + Expr::int(2) * diff(&fx, "F") * &fp + diff(&ff, "F") * fp.pow_int(2)) / ff));
        Ok(GravelQuartic {
            params: bound,
            c1,
            terms,
            fpp,
        })
    }

    pub fn params(&self) -> &BTreeMap<String, f64> {
        &self.params
    }

    /// The default seed `c₁x²/9`.
    pub fn seed(&self, x: f64) -> f64 {
        self.c1 * x * x / 9.0
    }

    /// Coefficients `a₀…a₄` of `Φ` as a polynomial in `F`.
    pub fn coefficients(&self, x: f64) -> [f64; 5] {
        let mut a = [0.0; 5];
        for &(ex, ef, c) in &self.terms {
            a[ef] += c * x.powi(ex);
        }
        a
    }

    /// `(Φ, Φ_F, Φ_x)` at `(x, F)`.
    pub fn eval(&self, x: f64, f: f64) -> (f64, f64, f64) {
        let (mut p, mut pf, mut px) = (0.0, 0.0, 0.0);
        for &(ex, ef, c) in &self.terms {
            let xf = x.powi(ex);
            let ff = f.powi(ef as i32);
            p += c * xf * ff;
            if ef > 0 {
                pf += c * ef as f64 * xf * f.powi(ef as i32 - 1);
            }
            if ex > 0 {
                px += c * ex as f64 * x.powi(ex - 1) * ff;
            }
        }
        (p, pf, px)
    }

    fn polish(&self, x: f64, mut f: f64) -> f64 {
        for _ in 0..60 {
            let (p, pf, _) = self.eval(x, f);
            if pf == 0.0 {
                break;
            }
            let step = p / pf;
            f -= step;
            if step.abs() <= 4.0 * f64::EPSILON * f.abs().max(1e-300) {
                break;
            }
        }
        f
    }

    /// Real roots in ascending order, Newton-polished.
    pub fn real_roots(&self, x: f64) -> Vec<f64> {
        let a = self.coefficients(x);
        let Some(deg) = (1..=4).rev().find(|&k| a[k] != 0.0) else {
            return Vec::new();
        };
        let mut comp = DMatrix::<f64>::zeros(deg, deg);
        for i in 1..deg {
            comp[(i, i - 1)] = 1.0;
        }
        for i in 0..deg {
            comp[(i, deg - 1)] = -a[i] / a[deg];
        }
        let mut roots: Vec<f64> = comp
            .complex_eigenvalues()
            .iter()
            .filter(|z| z.im.abs() <= 1e-6 * (1.0 + z.re.abs()))
            .map(|z| self.polish(x, z.re))
            .filter(|r| r.is_finite())
            .collect();
        roots.sort_by(f64::total_cmp);
        roots.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * (1.0 + b.abs()));
        roots
    }

    /// `(F, F′)` on the chosen branch.
    pub fn solve(&self, x: f64, branch: Branch) -> Result<(f64, f64), GravelError> {
        let roots = self.real_roots(x);
        if roots.is_empty() {
            return Err(GravelError::NoRealRoot { x });
        }
        let f = match branch {
            Branch::NearestTo(s) => *roots
                .iter()
                .min_by(|a, b| (*a - s).abs().total_cmp(&(*b - s).abs()))
                .unwrap(),
            Branch::Index(i) => *roots.get(i).ok_or(GravelError::Index {
                index: i,
                count: roots.len(),
                x,
            })?,
        };
        let (_, pf, px) = self.eval(x, f);
        let a = self.coefficients(x);
        let scale: f64 = (1..5).map(|j| j as f64 * a[j].abs() * f.abs().powi(j as i32 - 1)).sum();
        if pf.abs() <= 1e-9 * scale.max(f64::MIN_POSITIVE) {
            return Err(GravelError::BranchCollision { x, f, dphi: pf, roots });
        }
        Ok((f, -px / pf))
    }
}

/// `(F, F′)` at `x` for parameters `c1, k1, k2, k3`.
#[allow(non_snake_case)]
pub fn gravel_F(x: f64, params: &BTreeMap<String, f64>, branch: Branch) -> Result<(f64, f64), GravelError> {
    GravelQuartic::new(params)?.solve(x, branch)
}

/// Implicit-function provider over a first coordinate named `x`.
#[derive(Debug, Clone)]
pub struct GravelImplicit(pub Arc<GravelQuartic>);

impl ImplicitFunctions for GravelImplicit {
    fn kind(&self) -> &str {
        GRAVEL_KIND
    }

    fn symbols(&self) -> Vec<String> {
        vec!["F".into(), "Fp".into()]
    }

    fn chain_rule(&self) -> ChainRule {
        ChainRule::new()
            .with("F", "x", Expr::var("Fp"))
            .with("Fp", "x", self.0.fpp.clone())
    }

    fn values(&self, q: &[f64]) -> Result<Vec<f64>, String> {
        let x = q[0];
        let (f, fp) = self
            .0
            .solve(x, Branch::NearestTo(self.0.seed(x)))
            .map_err(|e| e.to_string())?;
        Ok(vec![f, fp])
    }

    fn tracker(&self) -> Box<dyn ImplicitTracker> {
        Box::new(GravelTracker {
            quartic: self.0.clone(),
            last: None,
        })
    }
}

/// Follows one root by nearest-root continuation. A step whose nearest root
/// lies far from the first-order prediction means the branch ended (a fold)
/// and is reported instead of silently switching branches.
pub struct GravelTracker {
    quartic: Arc<GravelQuartic>,
    /// `(x, F, F′)` of the last accepted point.
    last: Option<(f64, f64, f64)>,
}

impl ImplicitTracker for GravelTracker {
    fn values(&mut self, q: &[f64]) -> Result<Vec<f64>, String> {
        let x = q[0];
        let Some((x0, f0, fp0)) = self.last else {
            let (f, fp) = self
                .quartic
                .solve(x, Branch::NearestTo(self.quartic.seed(x)))
                .map_err(|e| e.to_string())?;
            self.last = Some((x, f, fp));
            return Ok(vec![f, fp]);
        };
        let dx = x - x0;
        let expected = f0 + fp0 * dx;
        let (f, fp) = self
            .quartic
            .solve(x, Branch::NearestTo(expected))
            .map_err(|e| e.to_string())?;
        if (f - expected).abs() > dx.abs() * (1.0 + fp0.abs()) + 1e-9 * (1.0 + f.abs()) {
            return Err(GravelError::BranchLost {
                from: x0,
                x,
                expected,
                found: f,
                roots: self.quartic.real_roots(x),
            }
            .to_string());
        }
        self.last = Some((x, f, fp));
        Ok(vec![f, fp])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::eval;

    fn params(c1: f64, k1: f64, k2: f64, k3: f64) -> BTreeMap<String, f64> {
        GRAVEL_PARAMS
            .iter()
            .map(|s| s.to_string())
            .zip([c1, k1, k2, k3])
            .collect()
    }

    #[test]
    fn unperturbed_roots() {
        let q = GravelQuartic::new(&params(1.0, 0.0, 0.0, 0.0)).unwrap();
        for x in [0.3, 1.0, 2.5] {
            let (f, fp) = q.solve(x, Branch::NearestTo(q.seed(x))).unwrap();
            assert!((f - x * x / 9.0).abs() < 1e-12, "{f}");
            assert!((fp - 2.0 * x / 9.0).abs() < 1e-10, "{fp}");
            // c₁x² is the other (triple) root.
            let (p, _, _) = q.eval(x, x * x);
            assert!(p.abs() < 1e-9);
        }
    }

    #[test]
    fn origin_values() {
        // Φ(0, F) = 4k₁² + 9F⁴ − 12k₁F² + 12k₃F³ + 4k₃²F² − 8k₁k₃F.
        let (k1, k3) = (0.3, -0.7);
        let q = GravelQuartic::new(&params(2.0, k1, 5.0, k3)).unwrap();
        for f in [-1.0f64, 0.2, 1.5] {
            let want =
                4.0 * k1 * k1 + 9.0 * f.powi(4) - 12.0 * k1 * f * f + 12.0 * k3 * f.powi(3) + 4.0 * k3 * k3 * f * f
                    - 8.0 * k1 * k3 * f;
            assert!((q.eval(0.0, f).0 - want).abs() < 1e-12);
        }
    }

    #[test]
    fn reduces_when_k3_vanishes() {
        let short = expr(
            "k2*x^2 + 4*k1^2 + (9*F - c1*x^2)*(F - c1*x^2)^3 - 4*k1*(F - c1*x^2)*(3*F + c1*x^2)",
            &ParseContext::new(["x", "F"], GRAVEL_PARAMS),
        );
        let p = params(1.3, 0.4, -0.2, 0.0);
        let mut b = p.clone();
        b.insert("x".into(), 0.7);
        b.insert("F".into(), 0.11);
        let full = eval(&gravel_phi(), &b).unwrap();
        assert!((full - eval(&short, &b).unwrap()).abs() < 1e-14);
    }

    #[test]
    fn tracker_is_continuous() {
        for k1 in [0.0, 0.01] {
            let imp = GravelImplicit(Arc::new(GravelQuartic::new(&params(1.0, k1, 0.0, 0.0)).unwrap()));
            let mut tr = imp.tracker();
            let mut prev: Option<(f64, f64)> = None;
            let mut x = 2.4;
            while x > 0.7 {
                let v = tr.values(&[x, 0.0]).unwrap();
                if let Some((f, fp)) = prev {
                    // Newton continued from the first-order prediction lands on the same root.
                    let next = imp.0.polish(x, f - fp * 0.01);
                    assert!((v[0] - next).abs() <= 1e-12 * (1.0 + next.abs()), "k1 = {k1}, x = {x}");
                }
                prev = Some((v[0], v[1]));
                x -= 0.01;
            }
        }
    }

    #[test]
    fn tracker_reports_the_fold() {
        // With k1 = 0.01 the small branch ends between x = 0.55 and 0.6.
        let imp = GravelImplicit(Arc::new(GravelQuartic::new(&params(1.0, 0.01, 0.0, 0.0)).unwrap()));
        let mut tr = imp.tracker();
        let mut x = 1.0;
        let err = loop {
            match tr.values(&[x, 0.0]) {
                Ok(_) => x -= 0.005,
                Err(e) => break e,
            }
            assert!(x > 0.5, "fold not detected");
        };
        assert!(x > 0.55 && x < 0.6, "{x}: {err}");
    }

    #[test]
    fn missing_parameter() {
        let mut p = params(1.0, 0.0, 0.0, 0.0);
        p.remove("k2");
        assert!(matches!(GravelQuartic::new(&p), Err(GravelError::Param(_))));
        assert!(GravelQuartic::new(&params(0.0, 0.0, 0.0, 0.0)).is_err());
    }
}
