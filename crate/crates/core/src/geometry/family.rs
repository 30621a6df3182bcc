//! The two-parameter family of coupled oscillators with forces
//! `Q = (kx − py, ky + px)` and a generalized Killing vector built from an
//! arbitrary function `F₁` of `A = p(y² − x²) − 2kxy`.

use std::collections::BTreeMap;

use super::{Connection, GeometryError, SystemDef};
use crate::expr::{diff, simplify, Expr, ZeroTestConfig};

/// Output of [`oscillator_family_builder`].
#[derive(Clone, Debug)]
pub struct OscillatorFamily {
    /// Killing-vector components `(L₁, L₂)`.
    pub kv: [Expr; 2],
    pub system: SystemDef,
    /// Whether `(ln|L₁/L₂|),xy` was found nonzero on samples.
    pub non_riemannian: bool,
}

/// Builds `L₁, L₂`, the connection `Γ¹₁₁ = L₁,x/L₁`, `Γ²₂₂ = L₂,y/L₂`, and
/// the system over coordinates `x, y`.
///
/// `f1` is an expression in the single variable `A`; `k`, `p` are numeric.
pub fn oscillator_family_builder(f1: &Expr, s0: f64, k: f64, p: f64) -> Result<OscillatorFamily, GeometryError> {
    if k == 0.0 || p == 0.0 {
        return Err(GeometryError::Invalid("k and p must be nonzero".into()));
    }
    if let Some(v) = f1.variables().into_iter().find(|v| v != "A") {
        return Err(GeometryError::Invalid(format!("F1 may only depend on A, found `{v}`")));
    }
    let (x, y) = (Expr::var("x"), Expr::var("y"));
    let (kk, pp, s) = (Expr::param("k"), Expr::param("p"), Expr::param("s0"));
    let a = &pp * (y.pow_int(2) - x.pow_int(2)) - Expr::int(2) * &kk * &x * &y;
    let f = f1.substitute(&[("A", a.clone())]);
    let l2 = simplify(&((&pp * &y - &kk * &x) * &f - &s * &x / &a));
    let l1 = simplify(
        &((&kk * &y + &pp * &x) * &f
            + &s * &x * (&kk * &y + &pp * &x) / ((&kk * &x - &pp * &y) * &a)
            + &s / (&kk * &x - &pp * &y)),
    );
    let g1 = simplify(&(diff(&l1, "x") / &l1));
    let g2 = simplify(&(diff(&l2, "y") / &l2));
    let conn = Connection::from_components(vec!["x".into(), "y".into()], [(0, 0, 0, g1), (1, 1, 1, g2)])?;
    let forces = vec![&kk * &x - &pp * &y, &kk * &y + &pp * &x];
    let params: BTreeMap<String, f64> = [("k".to_string(), k), ("p".to_string(), p), ("s0".to_string(), s0)].into();
    let system = SystemDef::new("coupled-oscillators-family", conn, forces)?
        .with_params(params)
        .with_domain(vec![(0.5, 1.5), (0.2, 1.2)])
        .with_singular(vec![l1.clone(), l2.clone(), a]);
    let cfg = ZeroTestConfig::default();
    for (name, l) in [("L1", &l1), ("L2", &l2)] {
        if system.zero_test(l, &cfg)?.is_zero() {
            return Err(GeometryError::Invalid(format!("{name} vanishes identically")));
        }
    }
    // ln|L₁/L₂| mixed partial.
    let ratio = simplify(&(diff(&l1, "x") / &l1 - diff(&l2, "x") / &l2));
    let mixed = diff(&ratio, "y");
    let non_riemannian = !system.zero_test(&mixed, &cfg)?.is_zero();
    Ok(OscillatorFamily {
        kv: [l1, l2],
        system,
        non_riemannian,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::eval;
    use crate::tensor::{sym_cov_derivative, SymTensorField};

    #[test]
    fn constant_f1_gives_linear_kv() {
        let fam = oscillator_family_builder(&Expr::one(), 0.0, 1.0, 1.0).unwrap();
        let mut b: BTreeMap<String, f64> = fam.system.params.clone();
        b.insert("x".into(), 1.0);
        b.insert("y".into(), 0.0);
        assert_eq!(eval(&fam.kv[0], &b).unwrap(), 1.0);
        assert_eq!(eval(&fam.kv[1], &b).unwrap(), -1.0);
        assert!(fam.non_riemannian);
    }

    #[test]
    fn kv_condition_and_constant_contraction() {
        let f1 = crate::expr::expr("1 + A^2", &crate::expr::ParseContext::new(["A"], [""; 0]));
        let fam = oscillator_family_builder(&f1, 0.2, 2.0, 1.0).unwrap();
        let sys = &fam.system;
        let cfg = ZeroTestConfig::default();
        let l = SymTensorField::from_components(2, 1, [(vec![0], fam.kv[0].clone()), (vec![1], fam.kv[1].clone())])
            .unwrap();
        for (_, r) in sym_cov_derivative(&l, &sys.connection).unwrap().components() {
            assert!(sys.zero_test(r, &cfg).unwrap().is_zero(), "{r}");
        }
        let lq = l.contract(&sys.forces);
        let res = simplify(&(lq.at(&[]) - Expr::param("s0")));
        assert!(sys.zero_test(&res, &cfg).unwrap().is_zero());
    }
}
