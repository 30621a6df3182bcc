//! Numerical integration of `q̈ᵃ = −Γᵃ_bc q̇ᵇq̇ᶜ − Qᵃ` and first-integral drift.

use std::fmt;
use std::sync::Arc;

use crate::expr::{simplify, Compiled, Expr};
use crate::geometry::{ImplicitFunctions, ImplicitTracker, SystemDef, TIME};
use crate::par::Exec;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum DynamicsError {
    #[error("expression cannot be compiled: {0}")]
    Compile(String),
    #[error("initial state must have {expected} entries, got {got}")]
    Dimension { expected: usize, got: usize },
    #[error("invalid integration request: {0}")]
    Invalid(String),
    #[error("step size underflow at t = {t} (h = {h:e})")]
    StepUnderflow { t: f64, h: f64 },
    #[error("step limit of {0} reached")]
    StepLimit(usize),
    #[error("non-finite state at t = {t}: {detail}")]
    NonFinite { t: f64, detail: String },
    #[error("implicit function failed at t = {t}: {detail}")]
    Implicit { t: f64, detail: String },
    #[error("state is singular: {0}")]
    Singular(String),
}

#[derive(Clone, Debug, PartialEq)]
pub struct State {
    pub t: f64,
    pub q: Vec<f64>,
    pub v: Vec<f64>,
}

impl State {
    pub fn new(t: f64, q: Vec<f64>, v: Vec<f64>) -> Self {
        State { t, q, v }
    }

    /// From a flat `[q…, v…]` list at `t = 0`.
    pub fn from_flat(ic: &[f64], dim: usize) -> Result<Self, DynamicsError> {
        if ic.len() != 2 * dim {
            return Err(DynamicsError::Dimension {
                expected: 2 * dim,
                got: ic.len(),
            });
        }
        Ok(State::new(0.0, ic[..dim].to_vec(), ic[dim..].to_vec()))
    }

    fn is_finite(&self) -> bool {
        self.t.is_finite() && self.q.iter().chain(&self.v).all(|x| x.is_finite())
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Method {
    /// Classical fourth-order Runge–Kutta with a fixed step.
    Rk4 { h: f64 },
    /// Dormand–Prince 5(4) with error control.
    Rk45 { rtol: f64, atol: f64 },
}

impl Default for Method {
    fn default() -> Self {
        Method::Rk45 {
            rtol: 1e-10,
            atol: 1e-12,
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Method::Rk4 { h } => write!(f, "rk4(h={h})"),
            Method::Rk45 { rtol, atol } => write!(f, "rk45(rtol={rtol:e}, atol={atol:e})"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IntegrateOptions {
    pub method: Method,
    /// Stop when any declared singular expression drops below this in magnitude.
    pub singular_margin: f64,
    /// Largest adaptive step; defaults to a 200th of the span.
    pub h_max: Option<f64>,
    pub max_steps: usize,
}

impl Default for IntegrateOptions {
    fn default() -> Self {
        IntegrateOptions {
            method: Method::default(),
            singular_margin: 1e-6,
            h_max: None,
            max_steps: 5_000_000,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct StepStats {
    pub accepted: usize,
    pub rejected: usize,
    pub rhs_evals: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Termination {
    Completed,
    /// Stopped before `t_end` near a singular locus.
    Singular {
        t: f64,
        locus: String,
    },
}

#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    pub states: Vec<State>,
    pub method: Method,
    pub stats: StepStats,
    pub termination: Termination,
    pub t_end: f64,
}

impl Trajectory {
    pub fn last(&self) -> &State {
        self.states.last().expect("trajectory holds the initial state")
    }

    pub fn completed(&self) -> bool {
        self.termination == Termination::Completed
    }
}

/// Compiled right-hand side with the implicit symbols appended to the slots.
pub struct CompiledSystem {
    dim: usize,
    /// `(a, b, c, weight, Γᵃ_bc)` for `b ≤ c`, weight 2 off the diagonal.
    gamma: Vec<(usize, usize, usize, f64, Compiled)>,
    forces: Vec<Compiled>,
    singular: Vec<(String, Compiled)>,
    implicit: Option<Arc<dyn ImplicitFunctions>>,
    slots: Vec<String>,
}

fn compile(e: &Expr, sys: &SystemDef, slots: &[String]) -> Result<Compiled, DynamicsError> {
    let bound = simplify(&e.bind_params(&sys.params));
    let names: Vec<&str> = slots.iter().map(|s| s.as_str()).collect();
    Compiled::new(&bound, &names).map_err(|err| DynamicsError::Compile(format!("`{e}`: {err}")))
}

impl CompiledSystem {
    pub fn new(sys: &SystemDef) -> Result<Self, DynamicsError> {
        let slots: Vec<String> = sys.coords().iter().cloned().chain(sys.implicit_symbols()).collect();
        let gamma = sys
            .connection
            .components()
            .into_iter()
            .filter(|(_, _, _, e)| !e.is_zero())
            .map(|(a, b, c, e)| Ok((a, b, c, if b == c { 1.0 } else { 2.0 }, compile(e, sys, &slots)?)))
            .collect::<Result<_, DynamicsError>>()?;
        let forces = sys
            .forces
            .iter()
            .map(|f| compile(f, sys, &slots))
            .collect::<Result<_, _>>()?;
        let singular = sys
            .singular
            .iter()
            .map(|s| Ok((s.to_string(), compile(s, sys, &slots)?)))
            .collect::<Result<_, DynamicsError>>()?;
        Ok(CompiledSystem {
            dim: sys.dim(),
            gamma,
            forces,
            singular,
            implicit: sys.implicit.clone(),
            slots,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Slot names: coordinates followed by implicit symbols.
    pub fn slots(&self) -> &[String] {
        &self.slots
    }

    pub fn tracker(&self) -> Option<Box<dyn ImplicitTracker>> {
        self.implicit.as_ref().map(|i| i.tracker())
    }

    /// Values of the declared singular expressions (NaN where undefined).
    pub fn singular_values(&self, point: &[f64]) -> Vec<f64> {
        self.singular
            .iter()
            .map(|(_, c)| c.eval(point).unwrap_or(f64::NAN))
            .collect()
    }

    /// First declared singular expression closer to zero than `margin`, or
    /// whose sign differs from `signs` (a locus jumped over within a step).
    pub fn near_singular(&self, point: &[f64], margin: f64, signs: Option<&[f64]>) -> Option<String> {
        let vals = self.singular_values(point);
        vals.iter().enumerate().find_map(|(k, v)| {
            let crossed = signs.is_some_and(|s| s[k] * v < 0.0);
            if v.is_finite() && v.abs() >= margin && !crossed {
                None
            } else {
                Some(self.singular[k].0.clone())
            }
        })
    }

    /// Accelerations at a slot point (coordinates plus implicit values).
    pub fn accel(&self, point: &[f64], v: &[f64]) -> Result<Vec<f64>, String> {
        let mut acc = Vec::with_capacity(self.dim);
        for f in &self.forces {
            acc.push(-f.eval(point).map_err(|e| e.to_string())?);
        }
        for (a, b, c, w, g) in &self.gamma {
            acc[*a] -= w * g.eval(point).map_err(|e| e.to_string())? * v[*b] * v[*c];
        }
        Ok(acc)
    }
}

/// One-off evaluation of `q̈` at a state.
pub fn rhs(sys: &SystemDef, s: &State) -> Result<Vec<f64>, DynamicsError> {
    let cs = CompiledSystem::new(sys)?;
    if s.q.len() != cs.dim || s.v.len() != cs.dim {
        return Err(DynamicsError::Dimension {
            expected: cs.dim,
            got: s.q.len(),
        });
    }
    let mut point = s.q.clone();
    if let Some(mut tr) = cs.tracker() {
        point.extend(
            tr.values(&s.q)
                .map_err(|detail| DynamicsError::Implicit { t: s.t, detail })?,
        );
    }
    if let Some(locus) = cs.near_singular(&point, 0.0, None) {
        return Err(DynamicsError::Singular(locus));
    }
    cs.accel(&point, &s.v).map_err(DynamicsError::Singular)
}

enum StageError {
    Singular(String),
    Fatal(DynamicsError),
}

struct Field<'a> {
    cs: &'a CompiledSystem,
    tracker: Option<Box<dyn ImplicitTracker>>,
    margin: f64,
    signs: Option<Vec<f64>>,
    evals: usize,
}

impl Field<'_> {
    /// `d/dt (q, v)` packed as one vector.
    fn eval(&mut self, t: f64, y: &[f64]) -> Result<Vec<f64>, StageError> {
        self.evals += 1;
        let d = self.cs.dim;
        let (q, v) = y.split_at(d);
        let mut point = q.to_vec();
        if let Some(tr) = self.tracker.as_mut() {
            let vals = tr
                .values(q)
                .map_err(|detail| StageError::Fatal(DynamicsError::Implicit { t, detail }))?;
            point.extend(vals);
        }
        let signs = self
            .signs
            .get_or_insert_with(|| self.cs.singular_values(&point).iter().map(|v| v.signum()).collect());
        if let Some(locus) = self.cs.near_singular(&point, self.margin, Some(signs)) {
            return Err(StageError::Singular(locus));
        }
        let a = self.cs.accel(&point, v).map_err(StageError::Singular)?;
        if a.iter().any(|x| !x.is_finite()) {
            return Err(StageError::Fatal(DynamicsError::NonFinite {
                t,
                detail: "acceleration".into(),
            }));
        }
        let mut out = v.to_vec();
        out.extend(a);
        Ok(out)
    }
}

fn axpy(y: &[f64], h: f64, terms: &[(f64, &[f64])]) -> Vec<f64> {
    let mut out = y.to_vec();
    for (c, k) in terms {
        if *c != 0.0 {
            for (o, ki) in out.iter_mut().zip(k.iter()) {
                *o += h * c * ki;
            }
        }
    }
    out
}

// Dormand–Prince 5(4) tableau.
const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
const B: [f64; 7] = [
    35.0 / 384.0,
    0.0,
    500.0 / 1113.0,
    125.0 / 192.0,
    -2187.0 / 6784.0,
    11.0 / 84.0,
    0.0,
];
const B_LOW: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

fn dp_step(
    f: &mut Field<'_>,
    t: f64,
    y: &[f64],
    k1: &[f64],
    h: f64,
) -> Result<(Vec<f64>, Vec<f64>, f64, Vec<f64>), StageError> {
    let mut ks: Vec<Vec<f64>> = vec![k1.to_vec()];
    for s in 1..7 {
        let terms: Vec<(f64, &[f64])> = (0..s).map(|j| (A[s][j], ks[j].as_slice())).collect();
        let ys = axpy(y, h, &terms);
        ks.push(f.eval(t + C[s] * h, &ys)?);
    }
    let hi: Vec<(f64, &[f64])> = (0..7).map(|j| (B[j], ks[j].as_slice())).collect();
    let y5 = axpy(y, h, &hi);
    let err: Vec<f64> = (0..y.len())
        .map(|i| h * (0..7).map(|j| (B[j] - B_LOW[j]) * ks[j][i]).sum::<f64>())
        .collect();
    // FSAL: the last stage was evaluated at (t + h, y5).
    let k_next = ks.pop().unwrap();
    Ok((y5, k_next, h, err))
}

fn rk4_step(f: &mut Field<'_>, t: f64, y: &[f64], h: f64) -> Result<Vec<f64>, StageError> {
    let k1 = f.eval(t, y)?;
    let k2 = f.eval(t + h / 2.0, &axpy(y, h, &[(0.5, &k1)]))?;
    let k3 = f.eval(t + h / 2.0, &axpy(y, h, &[(0.5, &k2)]))?;
    let k4 = f.eval(t + h, &axpy(y, h, &[(1.0, &k3)]))?;
    Ok(axpy(
        y,
        h,
        &[(1.0 / 6.0, &k1), (1.0 / 3.0, &k2), (1.0 / 3.0, &k3), (1.0 / 6.0, &k4)],
    ))
}

fn unpack(t: f64, y: &[f64], d: usize) -> State {
    State::new(t, y[..d].to_vec(), y[d..].to_vec())
}

/// Integrates from `s0` to `t_end`. Every accepted step is recorded.
pub fn integrate(
    sys: &SystemDef,
    s0: &State,
    t_end: f64,
    opts: &IntegrateOptions,
) -> Result<Trajectory, DynamicsError> {
    let cs = CompiledSystem::new(sys)?;
    integrate_compiled(&cs, s0, t_end, opts)
}

/// As [`integrate`], reusing a compiled system.
pub fn integrate_compiled(
    cs: &CompiledSystem,
    s0: &State,
    t_end: f64,
    opts: &IntegrateOptions,
) -> Result<Trajectory, DynamicsError> {
    let d = cs.dim;
    if s0.q.len() != d || s0.v.len() != d {
        return Err(DynamicsError::Dimension {
            expected: d,
            got: s0.q.len(),
        });
    }
    if !s0.is_finite() {
        return Err(DynamicsError::NonFinite {
            t: s0.t,
            detail: "initial state".into(),
        });
    }
    let span = t_end - s0.t;
    if !(span > 0.0) {
        return Err(DynamicsError::Invalid(format!(
            "t_end = {t_end} must exceed t0 = {}",
            s0.t
        )));
    }
    let mut f = Field {
        cs,
        tracker: cs.tracker(),
        margin: opts.singular_margin,
        signs: None,
        evals: 0,
    };
    let mut traj = Trajectory {
        states: vec![s0.clone()],
        method: opts.method,
        stats: StepStats::default(),
        termination: Termination::Completed,
        t_end,
    };
    let mut y: Vec<f64> = s0.q.iter().chain(&s0.v).copied().collect();
    let mut t = s0.t;
    let singular_stop = |traj: &mut Trajectory, t: f64, locus: String| {
        traj.termination = Termination::Singular { t, locus };
    };

    match opts.method {
        Method::Rk4 { h } => {
            if !(h > 0.0) {
                return Err(DynamicsError::Invalid("step must be positive".into()));
            }
            let steps = (span / h).ceil() as usize;
            if steps > opts.max_steps {
                return Err(DynamicsError::StepLimit(opts.max_steps));
            }
            for k in 0..steps {
                let h_k = if k + 1 == steps { t_end - t } else { h };
                match rk4_step(&mut f, t, &y, h_k) {
                    Ok(next) => {
                        y = next;
                        t = if k + 1 == steps {
                            t_end
                        } else {
                            s0.t + (k + 1) as f64 * h
                        };
                        traj.stats.accepted += 1;
                        traj.states.push(unpack(t, &y, d));
                    }
                    Err(StageError::Singular(locus)) => {
                        singular_stop(&mut traj, t, locus);
                        break;
                    }
                    Err(StageError::Fatal(e)) => return Err(e),
                }
            }
        }
        Method::Rk45 { rtol, atol } => {
            if !(rtol > 0.0 && atol > 0.0) {
                return Err(DynamicsError::Invalid("tolerances must be positive".into()));
            }
            let h_max = opts.h_max.unwrap_or(span / 200.0);
            let mut h = (h_max / 10.0).min(span);
            let mut k1 = match f.eval(t, &y) {
                Ok(k) => k,
                Err(StageError::Singular(locus)) => {
                    singular_stop(&mut traj, t, locus);
                    traj.stats.rhs_evals = f.evals;
                    return Ok(traj);
                }
                Err(StageError::Fatal(e)) => return Err(e),
            };
            while t < t_end {
                if traj.stats.accepted + traj.stats.rejected >= opts.max_steps {
                    return Err(DynamicsError::StepLimit(opts.max_steps));
                }
                let last = t + h >= t_end;
                let h_try = if last { t_end - t } else { h };
                match dp_step(&mut f, t, &y, &k1, h_try) {
                    Ok((y5, k_next, _, err)) => {
                        let norm = (err
                            .iter()
                            .zip(y.iter().zip(&y5))
                            .map(|(e, (a, b))| {
                                let sc = atol + rtol * a.abs().max(b.abs());
                                (e / sc).powi(2)
                            })
                            .sum::<f64>()
                            / err.len() as f64)
                            .sqrt();
                        if !norm.is_finite() {
                            traj.stats.rejected += 1;
                            h = h_try / 4.0;
                        } else if norm <= 1.0 {
                            t = if last { t_end } else { t + h_try };
                            y = y5;
                            k1 = k_next;
                            traj.stats.accepted += 1;
                            traj.states.push(unpack(t, &y, d));
                            let grow = if norm == 0.0 {
                                5.0
                            } else {
                                (0.9 * norm.powf(-0.2)).clamp(0.2, 5.0)
                            };
                            h = (h_try * grow).min(h_max);
                        } else {
                            traj.stats.rejected += 1;
                            h = h_try * (0.9 * norm.powf(-0.2)).clamp(0.1, 1.0);
                        }
                    }
                    Err(StageError::Singular(locus)) => {
                        // Shrink towards the locus before giving up.
                        traj.stats.rejected += 1;
                        h = h_try / 4.0;
                        if h < 1e-12 * span {
                            singular_stop(&mut traj, t, locus);
                            break;
                        }
                    }
                    Err(StageError::Fatal(e)) => return Err(e),
                }
                if t < t_end && h < 1e-14 * t.abs().max(span) {
                    return Err(DynamicsError::StepUnderflow { t, h });
                }
            }
        }
    }
    traj.stats.rhs_evals = f.evals;
    if let Some(s) = traj.states.iter().find(|s| !s.is_finite()) {
        return Err(DynamicsError::NonFinite {
            t: s.t,
            detail: "state".into(),
        });
    }
    Ok(traj)
}

/// Integrates many initial states, fanned out over `exec`.
pub fn integrate_batch(
    sys: &SystemDef,
    ics: &[State],
    t_end: f64,
    opts: &IntegrateOptions,
    exec: Exec,
) -> Result<Vec<Result<Trajectory, DynamicsError>>, DynamicsError> {
    let cs = CompiledSystem::new(sys)?;
    Ok(exec.map(ics, |s| integrate_compiled(&cs, s, t_end, opts)))
}

/// Values of a first integral along a trajectory.
#[derive(Clone, Debug, PartialEq)]
pub struct DriftSeries {
    pub name: String,
    pub t: Vec<f64>,
    pub values: Vec<f64>,
    pub max_abs_drift: f64,
    pub max_rel_drift: f64,
}

impl DriftSeries {
    pub fn initial(&self) -> f64 {
        self.values[0]
    }
}

/// Evaluates `i` (an expression in `t`, coordinates and `<coord>_dot`) at every
/// trajectory sample.
pub fn monitor_fi(traj: &Trajectory, name: &str, i: &Expr, sys: &SystemDef) -> Result<DriftSeries, DynamicsError> {
    let mut slots: Vec<String> = vec![TIME.to_string()];
    slots.extend(sys.coords().iter().cloned());
    slots.extend(sys.velocity_names());
    slots.extend(sys.implicit_symbols());
    let c = compile(i, sys, &slots)?;
    let mut tracker = sys.implicit.as_ref().map(|imp| imp.tracker());
    let mut values = Vec::with_capacity(traj.states.len());
    for s in &traj.states {
        let mut point = vec![s.t];
        point.extend(&s.q);
        point.extend(&s.v);
        if let Some(tr) = tracker.as_mut() {
            point.extend(
                tr.values(&s.q)
                    .map_err(|detail| DynamicsError::Implicit { t: s.t, detail })?,
            );
        }
        let v = c
            .eval(&point)
            .map_err(|e| DynamicsError::Singular(format!("{name} at t = {}: {e}", s.t)))?;
        if !v.is_finite() {
            return Err(DynamicsError::NonFinite {
                t: s.t,
                detail: format!("{name} = {v}"),
            });
        }
        values.push(v);
    }
    let i0 = values[0];
    let scale = i0.abs().max(1e-30);
    let max_abs = values.iter().map(|v| (v - i0).abs()).fold(0.0, f64::max);
    Ok(DriftSeries {
        name: name.to_string(),
        t: traj.states.iter().map(|s| s.t).collect(),
        values,
        max_abs_drift: max_abs,
        max_rel_drift: max_abs / scale,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::{expr, ParseContext};
    use crate::geometry::Connection;

    fn harmonic() -> SystemDef {
        let conn = Connection::flat(vec!["x".into(), "y".into()]);
        SystemDef::new("harmonic", conn, vec![Expr::var("x"), Expr::var("y")]).unwrap()
    }

    #[test]
    fn harmonic_accelerations() {
        let a = rhs(&harmonic(), &State::new(0.0, vec![1.0, 2.0], vec![0.0, 0.0])).unwrap();
        assert_eq!(a, vec![-1.0, -2.0]);
    }

    #[test]
    fn off_diagonal_connection_terms_count_twice() {
        let ctx = ParseContext::new(["x", "y"], [""; 0]);
        let conn = Connection::from_components(vec!["x".into(), "y".into()], [(0, 0, 1, expr("x", &ctx))]).unwrap();
        let sys = SystemDef::new("c", conn, vec![Expr::zero(), Expr::zero()]).unwrap();
        let a = rhs(&sys, &State::new(0.0, vec![3.0, 0.0], vec![1.0, 2.0])).unwrap();
        assert_eq!(a, vec![-12.0, 0.0]);
    }

    #[test]
    fn harmonic_period() {
        let s0 = State::new(0.0, vec![1.0, 0.0], vec![0.0, 1.0]);
        let tr = integrate(&harmonic(), &s0, std::f64::consts::TAU, &IntegrateOptions::default()).unwrap();
        let end = tr.last();
        assert!(tr.completed());
        assert!(tr.states.len() >= 200);
        for (a, b) in end.q.iter().chain(&end.v).zip(s0.q.iter().chain(&s0.v)) {
            assert!((a - b).abs() < 1e-6, "{a} vs {b}");
        }
    }

    #[test]
    fn singular_locus_stops_early() {
        let conn = Connection::flat(vec!["x".into()]);
        let sys = SystemDef::new("line", conn, vec![Expr::zero()])
            .unwrap()
            .with_domain(vec![(0.5, 2.0)])
            .with_singular(vec![Expr::var("x")]);
        let tr = integrate(
            &sys,
            &State::new(0.0, vec![1.0], vec![-1.0]),
            3.0,
            &IntegrateOptions::default(),
        )
        .unwrap();
        let Termination::Singular { t, .. } = tr.termination else {
            panic!("{:?}", tr.termination)
        };
        assert!((t - 1.0).abs() < 1e-3, "{t}");
    }

    #[test]
    fn energy_drift_is_small() {
        let sys = harmonic();
        let e = expr("(x_dot^2 + y_dot^2 + x^2 + y^2)/2", &sys.phase_context());
        let tr = integrate(
            &sys,
            &State::new(0.0, vec![1.0, 0.5], vec![0.2, -0.3]),
            10.0,
            &IntegrateOptions::default(),
        )
        .unwrap();
        let d = monitor_fi(&tr, "E", &e, &sys).unwrap();
        assert!(d.max_rel_drift < 1e-9, "{}", d.max_rel_drift);
        let vx = expr("x_dot", &sys.phase_context());
        assert!(monitor_fi(&tr, "vx", &vx, &sys).unwrap().max_rel_drift > 0.5);
    }
}
