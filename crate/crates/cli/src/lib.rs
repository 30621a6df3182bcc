//! `firstint` command line: browse the catalog, check candidate first
//! integrals against the condition chains, verify conservation numerically,
//! and run the geometric searches.
//!
//! Exit codes: 0 pass, 1 verification failure, 2 input error, 3 numeric failure.

use std::collections::BTreeMap;
use std::fmt;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use firstint::catalog::{self, implicit_from_kind};
use firstint::conditions::io::load_candidate;
use firstint::conditions::{
    build_integral1, build_integral2, check_complete_form, check_conserved, check_integral1, check_integral2,
    Candidate, ConditionReport, ConditionsError, Parity,
};
use firstint::dynamics::{
    integrate, monitor_fi, DynamicsError, IntegrateOptions, Method, State, Termination, Trajectory,
};
use firstint::expr::{parse, ZeroTestConfig, ZeroTestError, ZeroVerdict};
use firstint::geometry::io::{load_system, system_to_toml};
use firstint::geometry::{classify_2d, curvature, Classification, GeometryError, NamedIntegral, SystemDef};
use firstint::par::Exec;
use firstint::solver::{find_generalized_kts, find_reducible_kt_generators, AnsatzSpec, SolverConfig, SolverError};
use firstint::tensor::SymTensorField;

pub const EXIT_PASS: u8 = 0;
pub const EXIT_FAIL: u8 = 1;
pub const EXIT_INPUT: u8 = 2;
pub const EXIT_NUMERIC: u8 = 3;

/// Relative paths that do not exist in the working directory are looked up here.
pub const CONFIG_DIR_ENV: &str = "FIRSTINT_CONFIG_DIR";

/// Marks an error as a numeric failure (exit 3); anything else is an input error.
#[derive(Debug)]
pub struct NumericFailure(pub String);

impl fmt::Display for NumericFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "numeric failure: {}", self.0)
    }
}

impl std::error::Error for NumericFailure {}

pub fn exit_code(e: &anyhow::Error) -> u8 {
    if e.chain().any(|c| c.is::<NumericFailure>()) {
        EXIT_NUMERIC
    } else {
        EXIT_INPUT
    }
}

fn numeric(e: impl fmt::Display) -> anyhow::Error {
    anyhow::Error::new(NumericFailure(e.to_string()))
}

fn zero_err(e: ZeroTestError) -> anyhow::Error {
    numeric(e)
}

fn cond_err(e: ConditionsError) -> anyhow::Error {
    match e {
        ConditionsError::Eval(_) | ConditionsError::Zero(_) => numeric(e),
        other => anyhow!(other),
    }
}

fn dyn_err(e: DynamicsError) -> anyhow::Error {
    match e {
        DynamicsError::Compile(_) | DynamicsError::Dimension { .. } | DynamicsError::Invalid(_) => {
            anyhow!(e)
        }
        other => numeric(other),
    }
}

fn geo_err(e: GeometryError) -> anyhow::Error {
    match e {
        GeometryError::Zero(z) => numeric(z),
        other => anyhow!(other),
    }
}

fn solver_err(e: SolverError) -> anyhow::Error {
    anyhow!(e)
}

#[derive(Parser, Debug)]
#[command(
    name = "firstint",
    version,
    about = "First integrals of autonomous dynamical systems"
)]
pub struct Cli {
    /// Seed for the sampling zero tests.
    #[arg(long, global = true, default_value_t = 0x5eed)]
    pub seed: u64,
    /// Write the primary output here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Output format; CSV for `simulate`, JSON elsewhere by default.
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Run the data-parallel loops on the calling thread.
    #[arg(long, global = true)]
    pub sequential: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Args, Debug, Clone)]
pub struct SystemArgs {
    /// Catalog name or system file.
    #[arg(long)]
    pub system: String,
    /// Parameter override `name=value` (repeatable).
    #[arg(long = "param", value_parser = parse_assignment::<f64>)]
    pub params: Vec<(String, f64)>,
}

#[derive(Args, Debug, Clone)]
pub struct RunArgs {
    /// Initial data `q1,..,qD,v1,..,vD`; defaults to the system's reference.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub ic: Option<Vec<f64>>,
    #[arg(long)]
    pub t_end: Option<f64>,
    #[arg(long, default_value_t = 1e-10)]
    pub rtol: f64,
    #[arg(long, default_value_t = 1e-12)]
    pub atol: f64,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// List the built-in systems.
    List,
    /// Print a system in file form.
    Show(SystemArgs),
    /// Check a candidate against its condition chain.
    CheckConditions {
        #[command(flatten)]
        sys: SystemArgs,
        #[arg(long)]
        candidate: PathBuf,
        /// Check against the complete form of this parity (1 or 2).
        #[arg(long)]
        complete_form: Option<u8>,
    },
    /// Integrate and monitor the drift of every first integral.
    VerifyFi {
        #[command(flatten)]
        sys: SystemArgs,
        #[command(flatten)]
        run: RunArgs,
        /// Extra integral `name=expr`, expected to be conserved (repeatable).
        #[arg(long = "fi", value_parser = parse_assignment::<String>)]
        fis: Vec<(String, String)>,
        /// Largest accepted relative drift; 1e-8, or 1e-6 with implicit functions.
        #[arg(long)]
        drift_tol: Option<f64>,
        /// Also write the trajectory CSV here.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Integrate and write the trajectory as CSV.
    Simulate {
        #[command(flatten)]
        sys: SystemArgs,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Decide whether a 2-D connection is metric.
    Classify(SystemArgs),
    /// Polynomial generalized Killing vectors/tensors.
    FindKt {
        #[command(flatten)]
        sys: SystemArgs,
        #[arg(long, default_value_t = 2)]
        order: usize,
        #[arg(long, default_value_t = 2)]
        degree: u32,
        /// Search for reducible-tensor generators instead (order is ignored).
        #[arg(long)]
        reducible: bool,
    },
    /// Nonzero curvature components.
    Curvature(SystemArgs),
}

fn parse_assignment<T: std::str::FromStr>(s: &str) -> Result<(String, T), String>
where
    T::Err: fmt::Display,
{
    let (k, v) = s
        .split_once('=')
        .ok_or_else(|| format!("expected name=value, got `{s}`"))?;
    let k = k.trim();
    if k.is_empty() {
        return Err(format!("empty name in `{s}`"));
    }
    let v = v.trim().parse::<T>().map_err(|e| format!("`{v}`: {e}"))?;
    Ok((k.to_string(), v))
}

/// Resolves `path` against the working directory, then the config directory.
pub fn resolve_path(path: &Path) -> PathBuf {
    if path.is_relative() && !path.exists() {
        if let Some(dir) = std::env::var_os(CONFIG_DIR_ENV) {
            let p = Path::new(&dir).join(path);
            if p.exists() {
                return p;
            }
        }
    }
    path.to_path_buf()
}

/// A catalog entry by name, else a system file.
pub fn load(args: &SystemArgs) -> Result<SystemDef> {
    let overrides: BTreeMap<String, f64> = args.params.iter().cloned().collect();
    if overrides.len() != args.params.len() {
        bail!("a parameter was given twice");
    }
    if catalog::list_catalog().contains(&args.system.as_str()) {
        let e = catalog::instantiate(&args.system, &overrides)?;
        return Ok(e.system);
    }
    let path = resolve_path(Path::new(&args.system));
    if !path.exists() {
        bail!(
            "`{}` is neither a catalog entry ({}) nor an existing file",
            args.system,
            catalog::list_catalog().join(", ")
        );
    }
    let mut sys = load_system(&path)?;
    for (k, v) in overrides {
        match sys.params.get_mut(&k) {
            Some(slot) => *slot = v,
            None => bail!("system `{}` has no parameter `{k}`", sys.name),
        }
    }
    if let Some(imp) = &sys.implicit {
        let rebuilt = implicit_from_kind(imp.kind(), &sys.params).map_err(|e| anyhow!(e))?;
        sys = sys.with_implicit(rebuilt);
    }
    sys.validate()?;
    Ok(sys)
}

/// Output of a command: the text to write and the exit code.
pub struct Outcome {
    pub text: String,
    pub code: u8,
}

impl Outcome {
    fn json(v: &Value, pass: bool) -> Self {
        Outcome {
            text: format!("{}\n", serde_json::to_string_pretty(v).expect("JSON values serialize")),
            code: if pass { EXIT_PASS } else { EXIT_FAIL },
        }
    }
}

/// Parses `args` (including the program name) and runs; returns the exit code.
pub fn main_with<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_INPUT } else { EXIT_PASS });
        }
    };
    match run(&cli).and_then(|o| emit(&cli, &o).map(|_| o.code)) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn emit(cli: &Cli, o: &Outcome) -> Result<()> {
    match &cli.out {
        Some(p) => std::fs::write(p, &o.text).with_context(|| format!("writing {}", p.display())),
        None => {
            std::io::stdout().write_all(o.text.as_bytes())?;
            Ok(())
        }
    }
}

fn zero_cfg(cli: &Cli) -> ZeroTestConfig {
    ZeroTestConfig {
        seed: cli.seed,
        exec: exec(cli),
        ..Default::default()
    }
}

fn exec(cli: &Cli) -> Exec {
    if cli.sequential {
        Exec::Sequential
    } else {
        Exec::Parallel
    }
}

pub fn run(cli: &Cli) -> Result<Outcome> {
    match &cli.command {
        Command::List => cmd_list(cli),
        Command::Show(s) => Ok(Outcome {
            text: system_to_toml(&load(s)?),
            code: EXIT_PASS,
        }),
        Command::CheckConditions {
            sys,
            candidate,
            complete_form,
        } => cmd_check_conditions(cli, sys, candidate, *complete_form),
        Command::VerifyFi {
            sys,
            run,
            fis,
            drift_tol,
            csv,
        } => cmd_verify_fi(cli, sys, run, fis, *drift_tol, csv.as_deref()),
        Command::Simulate { sys, run } => cmd_simulate(cli, sys, run),
        Command::Classify(s) => cmd_classify(cli, s),
        Command::FindKt {
            sys,
            order,
            degree,
            reducible,
        } => cmd_find_kt(cli, sys, *order, *degree, *reducible),
        Command::Curvature(s) => cmd_curvature(cli, s),
    }
}

fn csv_line(fields: impl IntoIterator<Item = String>) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(fields.into_iter()).expect("writing to memory");
    String::from_utf8(w.into_inner().expect("writing to memory")).expect("fields are UTF-8")
}

fn cmd_list(cli: &Cli) -> Result<Outcome> {
    let mut rows = Vec::new();
    for name in catalog::list_catalog() {
        let e = catalog::instantiate(name, &BTreeMap::new())?;
        rows.push(json!({
            "name": name,
            "dim": e.system.dim(),
            "params": e.system.params,
            "integrals": e.integrals.iter().map(|i| &i.name).collect::<Vec<_>>(),
        }));
    }
    Ok(match cli.format.unwrap_or(Format::Json) {
        Format::Json => Outcome::json(&json!({ "schema": 1, "systems": rows }), true),
        Format::Csv => {
            let mut text = csv_line(["name", "dim", "integrals"].map(String::from));
            for r in &rows {
                let ints: Vec<&str> = r["integrals"]
                    .as_array()
                    .unwrap()
                    .iter()
                    .filter_map(Value::as_str)
                    .collect();
                text += &csv_line([
                    r["name"].as_str().unwrap().to_string(),
                    r["dim"].to_string(),
                    ints.join(" "),
                ]);
            }
            Outcome { text, code: EXIT_PASS }
        }
    })
}

fn report_outcome(cli: &Cli, report: &ConditionReport, extra: Value) -> Outcome {
    match cli.format.unwrap_or(Format::Json) {
        Format::Json => {
            let mut v = report.to_json();
            if let (Some(obj), Value::Object(more)) = (v.as_object_mut(), extra) {
                obj.extend(more);
            }
            Outcome::json(&v, report.passes())
        }
        Format::Csv => {
            let mut text = csv_line(["id", "verdict", "component", "point", "value", "anchor"].map(String::from));
            for r in &report.rows {
                let (comp, point, value) = match &r.witness {
                    Some(w) => (
                        w.component
                            .iter()
                            .map(|i| (i + 1).to_string())
                            .collect::<Vec<_>>()
                            .join(" "),
                        w.point
                            .iter()
                            .map(|(k, v)| format!("{k}={v}"))
                            .collect::<Vec<_>>()
                            .join(" "),
                        w.value.to_string(),
                    ),
                    None => Default::default(),
                };
                text += &csv_line([
                    r.id.clone(),
                    format!("{:?}", r.verdict),
                    comp,
                    point,
                    value,
                    r.anchor.clone(),
                ]);
            }
            Outcome {
                text,
                code: if report.passes() { EXIT_PASS } else { EXIT_FAIL },
            }
        }
    }
}

fn cmd_check_conditions(cli: &Cli, s: &SystemArgs, candidate: &Path, complete: Option<u8>) -> Result<Outcome> {
    let sys = load(s)?;
    let cand = load_candidate(&resolve_path(candidate), &sys)?;
    let cfg = zero_cfg(cli);
    let (report, built) = match (&cand, complete) {
        (Candidate::Poly(c), None) => (check_integral1(c, &sys, &cfg), build_integral1(c, &sys)),
        (Candidate::Poly(c), Some(flag)) => {
            let parity = Parity::from_flag(flag)?;
            (check_complete_form(c, parity, &sys, &cfg), build_integral1(c, &sys))
        }
        (Candidate::Exp(c), None) => (check_integral2(c, &sys, &cfg), build_integral2(c, &sys)),
        (Candidate::Exp(_), Some(_)) => {
            bail!("complete forms apply to polynomial-in-time candidates only")
        }
    };
    let report = report.map_err(cond_err)?;
    let mut extra = json!({ "system": sys.name });
    // The assembled integral, independently tested for conservation when the
    // chain passes (a failing chain need not give a well-formed integral).
    if let Ok(i) = built {
        extra["integral"] = json!(i.to_string());
        if report.passes() {
            let v = check_conserved(&i, &sys, &cfg).map_err(cond_err)?;
            extra["oracle"] = json!(verdict_label(&v));
        }
    }
    Ok(report_outcome(cli, &report, extra))
}

fn verdict_label(v: &ZeroVerdict) -> &'static str {
    match v {
        ZeroVerdict::ExactZero => "ExactZero",
        ZeroVerdict::ProbablyZero => "ProbablyZero",
        ZeroVerdict::NonZero { .. } => "NonZero",
    }
}

fn integrate_run(sys: &SystemDef, run: &RunArgs) -> Result<Trajectory> {
    let (ic, t_ref) = match (&run.ic, &sys.reference) {
        (Some(ic), r) => (ic.clone(), r.as_ref().map(|r| r.t_end)),
        (None, Some(r)) => (r.ic.clone(), Some(r.t_end)),
        (None, None) => bail!("system `{}` has no reference initial data; pass --ic", sys.name),
    };
    let t_end = run
        .t_end
        .or(t_ref)
        .ok_or_else(|| anyhow!("no --t-end and no reference time span"))?;
    let s0 = State::from_flat(&ic, sys.dim()).map_err(dyn_err)?;
    let opts = IntegrateOptions {
        method: Method::Rk45 {
            rtol: run.rtol,
            atol: run.atol,
        },
        ..Default::default()
    };
    let tr = integrate(sys, &s0, t_end, &opts).map_err(dyn_err)?;
    if let Termination::Singular { t, locus } = &tr.termination {
        if *t < 0.1 * t_end {
            return Err(numeric(format!(
                "trajectory reached the singular locus {locus} at t = {t}"
            )));
        }
    }
    Ok(tr)
}

fn trajectory_csv(sys: &SystemDef, tr: &Trajectory, columns: &[(String, Vec<f64>)]) -> String {
    let d = sys.dim();
    let mut header = vec!["t".to_string()];
    header.extend((1..=d).map(|i| format!("q{i}")));
    header.extend((1..=d).map(|i| format!("v{i}")));
    header.extend(columns.iter().map(|(n, _)| n.clone()));
    let mut text = csv_line(header);
    for (k, s) in tr.states.iter().enumerate() {
        let mut row = vec![fmt_f(s.t)];
        row.extend(s.q.iter().chain(&s.v).map(|x| fmt_f(*x)));
        row.extend(columns.iter().map(|(_, v)| fmt_f(v[k])));
        text += &csv_line(row);
    }
    text
}

fn fmt_f(x: f64) -> String {
    format!("{x:?}")
}

fn termination_json(tr: &Trajectory) -> Value {
    match &tr.termination {
        Termination::Completed => json!({ "status": "completed" }),
        Termination::Singular { t, locus } => {
            json!({ "status": "singular", "t": t, "locus": locus })
        }
    }
}

fn cmd_verify_fi(
    cli: &Cli,
    s: &SystemArgs,
    run: &RunArgs,
    extra: &[(String, String)],
    drift_tol: Option<f64>,
    csv: Option<&Path>,
) -> Result<Outcome> {
    let sys = load(s)?;
    let mut fis: Vec<NamedIntegral> = sys.integrals.clone();
    let ctx = sys.phase_context();
    for (name, text) in extra {
        if fis.iter().any(|f| &f.name == name) {
            bail!("integral `{name}` is already defined");
        }
        let expr = parse(text, &ctx).with_context(|| format!("in --fi {name}"))?;
        fis.push(NamedIntegral {
            name: name.clone(),
            expr,
            conserved: true,
        });
    }
    if fis.is_empty() {
        bail!("system `{}` has no integrals to verify; pass --fi", sys.name);
    }
    let tol = drift_tol.unwrap_or(if sys.implicit.is_some() { 1e-6 } else { 1e-8 });
    let tr = integrate_run(&sys, run)?;
    let mut rows = Vec::new();
    let mut columns = Vec::new();
    let mut pass = tr.completed();
    for fi in &fis {
        let d = monitor_fi(&tr, &fi.name, &fi.expr, &sys).map_err(dyn_err)?;
        let within = d.max_rel_drift <= tol;
        if fi.conserved && !within {
            pass = false;
        }
        rows.push(json!({
            "name": fi.name,
            "expr": fi.expr.to_string(),
            "expected_conserved": fi.conserved,
            "initial": d.initial(),
            "max_abs_drift": d.max_abs_drift,
            "max_rel_drift": d.max_rel_drift,
            "within_tolerance": within,
        }));
        columns.push((fi.name.clone(), d.values));
    }
    let last = tr.last();
    let summary = json!({
        "schema": 1,
        "system": sys.name,
        "params": sys.params,
        "method": tr.method.to_string(),
        "t_end": tr.t_end,
        "t_reached": last.t,
        "samples": tr.states.len(),
        "termination": termination_json(&tr),
        "drift_tolerance": tol,
        "integrals": rows,
        "overall": if pass { "pass" } else { "fail" },
    });
    let table = trajectory_csv(&sys, &tr, &columns);
    if let Some(p) = csv {
        std::fs::write(p, &table).with_context(|| format!("writing {}", p.display()))?;
    }
    Ok(match cli.format.unwrap_or(Format::Json) {
        Format::Json => Outcome::json(&summary, pass),
        Format::Csv => {
            eprintln!("{}", serde_json::to_string(&summary)?);
            Outcome {
                text: table,
                code: if pass { EXIT_PASS } else { EXIT_FAIL },
            }
        }
    })
}

fn cmd_simulate(cli: &Cli, s: &SystemArgs, run: &RunArgs) -> Result<Outcome> {
    let sys = load(s)?;
    let tr = integrate_run(&sys, run)?;
    let mut columns = Vec::new();
    for fi in &sys.integrals {
        columns.push((
            fi.name.clone(),
            monitor_fi(&tr, &fi.name, &fi.expr, &sys).map_err(dyn_err)?.values,
        ));
    }
    Ok(match cli.format.unwrap_or(Format::Csv) {
        Format::Csv => Outcome {
            text: trajectory_csv(&sys, &tr, &columns),
            code: EXIT_PASS,
        },
        Format::Json => {
            let states: Vec<Value> = tr.states.iter().map(|s| json!([s.t, s.q, s.v])).collect();
            let ints: BTreeMap<&str, &Vec<f64>> = columns.iter().map(|(n, v)| (n.as_str(), v)).collect();
            let v = json!({
                "schema": 1,
                "system": sys.name,
                "method": tr.method.to_string(),
                "termination": termination_json(&tr),
                "states": states,
                "integrals": ints,
            });
            Outcome::json(&v, true)
        }
    })
}

fn cmd_classify(cli: &Cli, s: &SystemArgs) -> Result<Outcome> {
    let sys = load(s)?;
    let c = classify_2d(&sys, &zero_cfg(cli)).map_err(geo_err)?;
    let detail = match &c {
        Classification::Riemannian { case, metric, residual } => json!({
            "case": case,
            "metric": tensor_json(&metric.gamma),
            "metricity_residual": verdict_label(residual),
        }),
        Classification::NonRiemannian {
            criterion,
            witness,
            value,
        } => json!({
            "criterion": criterion.to_string(),
            "witness": witness.iter().cloned().collect::<BTreeMap<_, _>>(),
            "value": value,
        }),
        Classification::Indeterminate { reason } => json!({ "reason": reason }),
    };
    // Indeterminate is not a verdict either way.
    let pass = !matches!(c, Classification::Indeterminate { .. });
    Ok(match cli.format.unwrap_or(Format::Json) {
        Format::Json => Outcome::json(
            &json!({ "schema": 1, "system": sys.name, "classification": c.label(), "detail": detail }),
            pass,
        ),
        Format::Csv => Outcome {
            text: csv_line(["classification", "detail"].map(String::from))
                + &csv_line([c.label().to_string(), detail.to_string()]),
            code: if pass { EXIT_PASS } else { EXIT_FAIL },
        },
    })
}

/// Components keyed by one-based index lists, e.g. `"1,2"`; zeros omitted.
fn tensor_json(t: &SymTensorField) -> BTreeMap<String, String> {
    t.components()
        .filter(|(_, e)| !e.is_zero())
        .map(|(idx, e)| (one_based(idx), e.to_string()))
        .collect()
}

fn one_based(idx: &[usize]) -> String {
    idx.iter().map(|i| (i + 1).to_string()).collect::<Vec<_>>().join(",")
}

fn cmd_find_kt(cli: &Cli, s: &SystemArgs, order: usize, degree: u32, reducible: bool) -> Result<Outcome> {
    let sys = load(s)?;
    let cfg = SolverConfig {
        exec: exec(cli),
        ..Default::default()
    };
    let (kind, basis) = if reducible {
        let b = find_reducible_kt_generators(&sys.connection, &sys.params, degree, &cfg).map_err(solver_err)?;
        ("reducible KT generators", b)
    } else {
        let kind = if order == 1 {
            "generalized Killing vectors"
        } else {
            "generalized Killing tensors"
        };
        let b = find_generalized_kts(&sys.connection, &sys.params, &AnsatzSpec::new(order, degree), &cfg)
            .map_err(solver_err)?;
        (kind, b)
    };
    let message = if basis.basis.is_empty() {
        format!("no {kind} of polynomial degree <= {degree}")
    } else {
        format!("{} {kind} of polynomial degree <= {degree}", basis.basis.len())
    };
    let fields: Vec<BTreeMap<String, String>> = basis.basis.iter().map(tensor_json).collect();
    Ok(match cli.format.unwrap_or(Format::Json) {
        Format::Json => Outcome::json(
            &json!({
                "schema": 1,
                "system": sys.name,
                "order": if reducible { 1 } else { order },
                "degree": degree,
                "reducible": reducible,
                "dimension": basis.basis.len(),
                "unknowns": basis.unknowns,
                "equations": basis.equations,
                "exact_rank": basis.exact_rank,
                "float_rank": basis.float_rank,
                "basis": fields,
                "message": message,
            }),
            true,
        ),
        Format::Csv => {
            let mut text = csv_line(["basis", "component", "expr"].map(String::from));
            for (k, f) in fields.iter().enumerate() {
                for (idx, e) in f {
                    text += &csv_line([(k + 1).to_string(), idx.clone(), e.clone()]);
                }
            }
            eprintln!("{message}");
            Outcome { text, code: EXIT_PASS }
        }
    })
}

fn cmd_curvature(cli: &Cli, s: &SystemArgs) -> Result<Outcome> {
    let sys = load(s)?;
    let cfg = zero_cfg(cli);
    let r = curvature(&sys.connection);
    // Drop components that vanish on the domain even if not syntactically zero.
    let mut comps = BTreeMap::new();
    for (idx, e) in r.nonzero() {
        if !sys.zero_test(e, &cfg).map_err(zero_err)?.is_zero() {
            comps.insert(one_based(&idx), e.to_string());
        }
    }
    let message = if comps.is_empty() {
        "all components zero".to_string()
    } else {
        format!("{} independent nonzero components (c < d)", comps.len())
    };
    Ok(match cli.format.unwrap_or(Format::Json) {
        Format::Json => Outcome::json(
            &json!({ "schema": 1, "system": sys.name, "components": comps, "message": message }),
            true,
        ),
        Format::Csv => {
            let mut text = csv_line(["a,b,c,d", "expr"].map(String::from));
            for (k, v) in &comps {
                text += &csv_line([k.clone(), v.clone()]);
            }
            eprintln!("{message}");
            Outcome { text, code: EXIT_PASS }
        }
    })
}
