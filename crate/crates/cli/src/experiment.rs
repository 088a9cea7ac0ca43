//! Config-driven runs: resolve a function and its constants, run one task,
//! and emit `trace.csv`, `certificate.json` and `meta.json`.

use std::cell::RefCell;
use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use sqcflow_core::estimate::{
    empirical_modulus, estimate_kappa, estimate_lipschitz_sublevel, reference_minimizer,
};
use sqcflow_core::flows::{
    certify_first_order, certify_first_order_values, certify_second_order, default_dt, integrate_first_order,
    integrate_second_order,
};
use sqcflow_core::solvers::{
    certify_gd_contraction, certify_gd_values, certify_hb_energy, gradient_descent, hb_energy_factor, heavy_ball,
    DEFAULT_MAX_ITERS, DEFAULT_STOP_GRAD_TOL,
};
use sqcflow_core::verify::{check_implication_ladder, check_property, derive_pl_modulus, Property, Witness};
use sqcflow_core::{
    Certificate64, DomainSpec, Entry64, Error as CoreError, FlowConfig, GdConfig, HbConfig, Integrator,
    LipschitzScope, LyapunovParams, Oracle64, Point64, SampleBudget, StepRule, Trajectory64,
};

use crate::bench;
use crate::error::{CliError, CliResult, ExitStatus};
use crate::functions;
use crate::table::Table;

pub const DEFAULT_SEED: u64 = 42;
pub const SEED_ENV: &str = "SQCFLOW_SEED";
/// Triples used when the modulus has to be estimated.
pub const MODULUS_SAMPLES: usize = 100_000;
/// Pairs used when `L₀` has to be estimated.
pub const LIPSCHITZ_SAMPLES: usize = 2000;
pub const DEFAULT_PAIRS: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Task {
    Verify,
    Flow,
    Gd,
    Hb,
    Estimate,
    Bench,
}

/// JSON experiment description. Command-line flags override its fields.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub function: String,
    pub task: Task,
    #[serde(default)]
    pub task_params: BTreeMap<String, Value>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

impl ExperimentConfig {
    pub fn new(function: impl Into<String>, task: Task) -> Self {
        Self { function: function.into(), task, task_params: BTreeMap::new(), output_dir: None, seed: None }
    }

    pub fn param(mut self, key: &str, value: impl Into<Value>) -> Self {
        self.task_params.insert(key.to_owned(), value.into());
        self
    }

    pub fn with_output_dir(mut self, dir: impl Into<PathBuf>) -> Self {
        self.output_dir = Some(dir.into());
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = Some(seed);
        self
    }

    pub fn from_file(path: &Path) -> CliResult<Self> {
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::usage(format!("cannot read config {}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| CliError::usage(format!("invalid config {}: {e}", path.display())))
    }
}

/// Explicit seed, else `SQCFLOW_SEED`, else 42.
pub fn resolve_seed(explicit: Option<u64>) -> CliResult<u64> {
    if let Some(s) = explicit {
        return Ok(s);
    }
    match std::env::var(SEED_ENV) {
        Ok(v) => v.trim().parse().map_err(|_| CliError::usage(format!("{SEED_ENV}={v} is not an unsigned integer"))),
        Err(_) => Ok(DEFAULT_SEED),
    }
}

/// Everything a run produced.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub status: ExitStatus,
    pub certificate: Value,
    pub trace: Option<Table>,
    pub summary: Option<Table>,
    pub meta: Value,
}

impl Outcome {
    /// Writes the artifacts into `dir`, creating it if needed.
    pub fn write(&self, dir: &Path) -> CliResult<()> {
        fs::create_dir_all(dir)?;
        if let Some(t) = &self.trace {
            t.write_csv(&dir.join("trace.csv"))?;
        }
        if let Some(t) = &self.summary {
            t.write_csv(&dir.join("summary.csv"))?;
        }
        fs::write(dir.join("certificate.json"), pretty(&self.certificate)? + "\n")?;
        fs::write(dir.join("meta.json"), pretty(&self.meta)? + "\n")?;
        Ok(())
    }
}

pub fn pretty(v: &Value) -> CliResult<String> {
    Ok(serde_json::to_string_pretty(v)?)
}

/// Task parameters with typed accessors. Every key read is remembered so
/// leftovers can be rejected, and resolved defaults are recorded for `meta.json`.
pub struct TaskParams {
    map: BTreeMap<String, Value>,
    used: RefCell<BTreeSet<String>>,
    resolved: RefCell<BTreeMap<String, Value>>,
}

impl TaskParams {
    pub fn new(map: BTreeMap<String, Value>) -> Self {
        Self { map, used: RefCell::default(), resolved: RefCell::default() }
    }

    fn raw(&self, key: &str) -> Option<&Value> {
        self.used.borrow_mut().insert(key.to_owned());
        self.map.get(key).filter(|v| !v.is_null())
    }

    fn record(&self, key: &str, v: impl Serialize) {
        if let Ok(v) = serde_json::to_value(v) {
            self.resolved.borrow_mut().insert(key.to_owned(), v);
        }
    }

    fn bad(key: &str, v: &Value, what: &str) -> CliError {
        CliError::usage(format!("task parameter {key}={v} is not {what}"))
    }

    pub fn f64(&self, key: &str) -> CliResult<Option<f64>> {
        let out = match self.raw(key) {
            None => None,
            Some(Value::Number(n)) => n.as_f64(),
            Some(Value::String(s)) => Some(s.trim().parse().map_err(|_| Self::bad(key, &json!(s), "a number"))?),
            Some(v) => return Err(Self::bad(key, v, "a number")),
        };
        if let Some(x) = out {
            if !x.is_finite() {
                return Err(CliError::usage(format!("task parameter {key} must be finite")));
            }
            self.record(key, x);
        }
        Ok(out)
    }

    pub fn f64_or(&self, key: &str, default: f64) -> CliResult<f64> {
        let v = self.f64(key)?.unwrap_or(default);
        self.record(key, v);
        Ok(v)
    }

    pub fn usize(&self, key: &str) -> CliResult<Option<usize>> {
        let out = match self.raw(key) {
            None => None,
            Some(Value::Number(n)) => Some(n.as_u64().ok_or_else(|| Self::bad(key, &json!(n), "an unsigned integer"))?),
            Some(Value::String(s)) => {
                Some(s.trim().parse().map_err(|_| Self::bad(key, &json!(s), "an unsigned integer"))?)
            }
            Some(v) => return Err(Self::bad(key, v, "an unsigned integer")),
        };
        let out = out.map(|n| n as usize);
        if let Some(n) = out {
            self.record(key, n);
        }
        Ok(out)
    }

    pub fn usize_or(&self, key: &str, default: usize) -> CliResult<usize> {
        let v = self.usize(key)?.unwrap_or(default);
        self.record(key, v);
        Ok(v)
    }

    pub fn bool_or(&self, key: &str, default: bool) -> CliResult<bool> {
        let v = match self.raw(key) {
            None => default,
            Some(Value::Bool(b)) => *b,
            Some(Value::String(s)) if s == "true" => true,
            Some(Value::String(s)) if s == "false" => false,
            Some(v) => return Err(Self::bad(key, v, "a boolean")),
        };
        self.record(key, v);
        Ok(v)
    }

    pub fn str(&self, key: &str) -> CliResult<Option<String>> {
        let out = match self.raw(key) {
            None => None,
            Some(Value::String(s)) => Some(s.clone()),
            Some(v) => return Err(Self::bad(key, v, "a string")),
        };
        if let Some(s) = &out {
            self.record(key, s);
        }
        Ok(out)
    }

    pub fn list(&self, key: &str) -> CliResult<Option<Vec<f64>>> {
        let out = match self.raw(key) {
            None => None,
            Some(Value::Array(items)) => Some(
                items
                    .iter()
                    .map(|v| v.as_f64().ok_or_else(|| Self::bad(key, v, "a list of numbers")))
                    .collect::<CliResult<Vec<f64>>>()?,
            ),
            Some(Value::Number(n)) => Some(vec![n.as_f64().unwrap_or(f64::NAN)]),
            Some(Value::String(s)) => Some(functions::parse_list(s, if s.contains(';') { ';' } else { ',' })?),
            Some(v) => return Err(Self::bad(key, v, "a list of numbers")),
        };
        if let Some(v) = &out {
            self.record(key, v);
        }
        Ok(out)
    }

    pub fn point(&self, key: &str, dim: usize) -> CliResult<Option<Point64>> {
        let Some(coords) = self.list(key)? else {
            return Ok(None);
        };
        if coords.len() != dim {
            return Err(CliError::usage(format!("{key} has {} coordinates, the function has dimension {dim}", coords.len())));
        }
        Ok(Some(Point64::new(coords)?))
    }

    /// Rejects parameters that no accessor asked for.
    pub fn finish(&self) -> CliResult<()> {
        let used = self.used.borrow();
        let unknown: Vec<&String> = self.map.keys().filter(|k| !used.contains(*k)).collect();
        if unknown.is_empty() {
            Ok(())
        } else {
            Err(CliError::usage(format!("unknown task parameter(s): {unknown:?}")))
        }
    }

    pub fn resolved(&self) -> BTreeMap<String, Value> {
        self.resolved.borrow().clone()
    }
}

#[derive(Debug, Clone, Serialize)]
struct ConstantRecord {
    value: Value,
    source: &'static str,
}

/// A resolved function plus the constants and provenance notes of one run.
pub struct Context {
    pub entry: Entry64,
    pub seed: u64,
    constants: BTreeMap<String, ConstantRecord>,
    notes: Vec<String>,
}

impl Context {
    pub fn new(entry: Entry64, seed: u64) -> Self {
        Self { entry, seed, constants: BTreeMap::new(), notes: Vec::new() }
    }

    fn set(&mut self, name: &str, value: impl Serialize, source: &'static str) {
        let value = serde_json::to_value(value).unwrap_or(Value::Null);
        self.constants.insert(name.to_owned(), ConstantRecord { value, source });
    }

    fn note(&mut self, note: impl Into<String>) {
        let note = note.into();
        if !self.notes.contains(&note) {
            self.notes.push(note);
        }
    }

    /// Modulus: user value, else catalog, else the deflated empirical estimate.
    pub fn gamma(&mut self, user: Option<f64>) -> CliResult<f64> {
        if let Some(g) = user {
            self.set("gamma", g, "user");
            return Ok(g);
        }
        if let Some(g) = self.entry.gamma() {
            self.set("gamma", g, "catalog");
            return Ok(g);
        }
        let region = DomainSpec::from_kind(self.entry.oracle.sampling_region().clone());
        let est = empirical_modulus(&self.entry.oracle, &region, MODULUS_SAMPLES, self.seed)?;
        if !(est.safety_adjusted_value > 0.0) {
            return Err(CliError::usage(format!(
                "{}: sampled modulus is 0; pass gamma explicitly",
                self.entry.name
            )));
        }
        self.set("gamma", est.safety_adjusted_value, "estimated");
        self.note("gamma is an empirical estimate (sampled minimum times 0.95)");
        Ok(est.safety_adjusted_value)
    }

    /// Gradient Lipschitz constant: user value, else catalog, else the
    /// inflated estimate on the sublevel set of `x0`.
    pub fn lipschitz(&mut self, user: Option<f64>, x0: &Point64) -> CliResult<(f64, &'static str)> {
        if let Some(l) = user {
            self.set("L", l, "user");
            return Ok((l, "user"));
        }
        if let Some(l) = self.entry.lipschitz() {
            self.set("L", l, "catalog");
            return Ok((l, "catalog"));
        }
        let est = estimate_lipschitz_sublevel(&self.entry.oracle, x0, LIPSCHITZ_SAMPLES, self.seed)?;
        self.set("L", est.safety_adjusted_value, "estimated");
        self.note("L is an empirical sublevel-set estimate L0 (sampled maximum times 1.1)");
        Ok((est.safety_adjusted_value, "estimated"))
    }

    /// The oracle with a minimizer attached, found by a reference run when
    /// the catalog does not know it.
    pub fn oracle_with_minimizer(&mut self, x0: &Point64) -> CliResult<Oracle64> {
        if let Some(x) = self.entry.oracle.known_minimizer().cloned() {
            self.set("x_bar", &x, "catalog");
            return Ok(self.entry.oracle.clone());
        }
        let x = reference_minimizer(&self.entry.oracle, x0)?;
        self.set("x_bar", &x, "reference");
        self.note("reference-based: x_bar is the best iterate of a long gradient-descent run");
        Ok(self.entry.oracle.clone().with_minimizer(x)?)
    }

    fn annotate(&self, certs: &mut [Certificate64]) {
        for c in certs {
            c.notes.extend(self.notes.iter().cloned());
        }
    }
}

/// Default starting point: half the upper corner of the sampling box.
pub fn default_x0(entry: &Entry64) -> Point64 {
    let (_, hi) = entry.oracle.sampling_region().bounding_box().expect("sampling regions are bounded");
    let x = hi.scale(0.5);
    if entry.oracle.domain.contains(&x) {
        x
    } else {
        hi.scale(0.25)
    }
}

fn start_point(params: &TaskParams, entry: &Entry64) -> CliResult<Point64> {
    let x0 = match params.point("x0", entry.oracle.dim())? {
        Some(x) => x,
        None => default_x0(entry),
    };
    params.record("x0", &x0);
    if !entry.oracle.domain.contains(&x0) {
        return Err(CliError::usage(format!("x0 = {x0} is outside the domain of {}", entry.name)));
    }
    Ok(x0)
}

fn fmt_real(x: f64) -> String {
    format!("{x:.16e}")
}

/// Long-format trace: index column, coordinates, velocity, `h`, `grad_norm`
/// and every diagnostic.
pub fn trajectory_table(traj: &Trajectory64, index: &str) -> Table {
    let dim = traj.first().map_or(0, |s| s.state.dim());
    let has_velocity = traj.first().is_some_and(|s| s.velocity.is_some());
    let diag = traj.diagnostic_names();
    let mut header = vec![index.to_owned()];
    header.extend((1..=dim).map(|i| format!("x{i}")));
    if has_velocity {
        header.extend((1..=dim).map(|i| format!("v{i}")));
    }
    header.extend(["h".to_owned(), "grad_norm".to_owned()]);
    header.extend(diag.iter().cloned());
    let discrete = index == "k";
    let rows = traj
        .samples
        .iter()
        .map(|s| {
            let mut row = vec![if discrete { format!("{}", s.time as u64) } else { fmt_real(s.time) }];
            row.extend(s.state.as_slice().iter().map(|&x| fmt_real(x)));
            if let Some(v) = &s.velocity {
                row.extend(v.as_slice().iter().map(|&x| fmt_real(x)));
            }
            row.push(fmt_real(s.value));
            row.push(fmt_real(s.grad_norm));
            row.extend(diag.iter().map(|d| s.diagnostic(d).map(fmt_real).unwrap_or_default()));
            row
        })
        .collect();
    Table { header, rows }
}

fn witness_table(witnesses: &[Witness<f64>], dim: usize) -> Table {
    let mut header: Vec<String> = ["index", "lambda", "lhs", "rhs", "margin"].map(String::from).to_vec();
    header.extend((1..=dim).map(|i| format!("x{i}")));
    header.extend((1..=dim).map(|i| format!("y{i}")));
    let rows = witnesses
        .iter()
        .enumerate()
        .map(|(i, w)| {
            let mut row = vec![i.to_string(), w.lambda.map(fmt_real).unwrap_or_default()];
            row.extend([w.lhs, w.rhs, w.margin].map(fmt_real));
            row.extend(w.x.as_slice().iter().chain(w.y.as_slice()).map(|&x| fmt_real(x)));
            row
        })
        .collect();
    Table { header, rows }
}

fn certificates_outcome(certs: Vec<Certificate64>) -> (ExitStatus, Value) {
    let ok = certs.iter().all(|c| c.satisfied);
    let status = if ok { ExitStatus::Pass } else { ExitStatus::CertificateFailure };
    (status, serde_json::to_value(certs).unwrap_or(Value::Null))
}

struct TaskOutput {
    status: ExitStatus,
    certificate: Value,
    trace: Option<Table>,
    summary: Option<Table>,
}

fn property_from_name(name: &str, modulus: f64) -> CliResult<Property<f64>> {
    Ok(match name {
        "strong_quasiconvexity" => Property::StrongQuasiconvexity(modulus),
        "quasiconvexity" => Property::StrongQuasiconvexity(0.0),
        "gradient_characterization" => Property::GradientCharacterization(modulus),
        "new_monotonicity" => Property::NewMonotonicity(modulus),
        "quasimonotonicity" => Property::NewMonotonicity(0.0),
        "new_monotonicity_non_strict" => Property::NewMonotonicityNonStrict(modulus),
        "strong_pseudomonotonicity" => Property::StrongPseudomonotonicity(modulus),
        "pseudomonotonicity" => Property::StrongPseudomonotonicity(0.0),
        "pl" => Property::Pl(modulus),
        "quasi_strong_convexity" => Property::QuasiStrongConvexity(modulus),
        "sharp_quasiconvexity" => Property::SharpQuasiconvexity(modulus),
        "strong_convexity" => Property::StrongConvexity(modulus),
        "convexity" => Property::StrongConvexity(0.0),
        "strong_monotonicity" => Property::StrongMonotonicity(modulus),
        "monotonicity" => Property::StrongMonotonicity(0.0),
        other => return Err(CliError::usage(format!("unknown property '{other}'"))),
    })
}

/// Property names accepted by `verify`.
pub const PROPERTIES: &[&str] = &[
    "strong_quasiconvexity",
    "quasiconvexity",
    "gradient_characterization",
    "new_monotonicity",
    "quasimonotonicity",
    "new_monotonicity_non_strict",
    "strong_pseudomonotonicity",
    "pseudomonotonicity",
    "pl",
    "quasi_strong_convexity",
    "sharp_quasiconvexity",
    "strong_convexity",
    "convexity",
    "strong_monotonicity",
    "monotonicity",
    "ladder",
];

fn run_verify(ctx: &mut Context, params: &TaskParams) -> CliResult<TaskOutput> {
    let property = params.str("property")?.unwrap_or_else(|| "strong_quasiconvexity".to_owned());
    params.record("property", &property);
    if !PROPERTIES.contains(&property.as_str()) {
        return Err(CliError::usage(format!("unknown property '{property}' (expected one of {PROPERTIES:?})")));
    }
    let user = match (params.f64("gamma")?, params.f64("mu")?) {
        (Some(_), Some(_)) => return Err(CliError::usage("give gamma or mu, not both")),
        (g, m) => g.or(m),
    };
    let user_l = params.f64("L")?;
    let pairs = params.usize_or("pairs", DEFAULT_PAIRS)?;
    let lambdas = params.usize_or("lambdas", 4)?;
    let needs_point = matches!(property.as_str(), "pl" | "quasi_strong_convexity");
    let x0 = if needs_point { Some(start_point(params, &ctx.entry)?) } else { None };
    params.finish()?;
    let budget = SampleBudget::new(pairs, lambdas, ctx.seed)?;
    let dim = ctx.entry.oracle.dim();

    if property == "ladder" {
        let gamma = ctx.gamma(user)?;
        let ladder = check_implication_ladder(&ctx.entry.oracle, gamma, &budget)?;
        let status = if ladder.sound() { ExitStatus::Pass } else { ExitStatus::CertificateFailure };
        let witnesses: Vec<Witness<f64>> = ladder.reports.iter().flat_map(|r| r.violations.iter().cloned()).collect();
        return Ok(TaskOutput {
            status,
            certificate: serde_json::to_value(&ladder)?,
            trace: Some(witness_table(&witnesses, dim)),
            summary: None,
        });
    }

    let modulus = match (property.as_str(), user) {
        ("quasiconvexity" | "quasimonotonicity" | "pseudomonotonicity" | "convexity" | "monotonicity", _) => 0.0,
        (_, Some(m)) => {
            ctx.set("modulus", m, "user");
            m
        }
        ("pl", None) => {
            let gamma = ctx.gamma(None)?;
            let (l, _) = ctx.lipschitz(user_l, x0.as_ref().unwrap())?;
            let mu = derive_pl_modulus(gamma, l);
            ctx.set("mu", mu, "derived");
            mu
        }
        ("strong_pseudomonotonicity", None) => 0.5 * ctx.gamma(None)?,
        (_, None) => ctx.gamma(None)?,
    };
    let oracle = match &x0 {
        Some(x) => ctx.oracle_with_minimizer(x)?,
        None => ctx.entry.oracle.clone(),
    };
    let report = check_property(&oracle, property_from_name(&property, modulus)?, &budget)?;
    let status = if report.all_hold() { ExitStatus::Pass } else { ExitStatus::CertificateFailure };
    Ok(TaskOutput {
        status,
        certificate: serde_json::to_value(&report)?,
        trace: Some(witness_table(&report.violations, dim)),
        summary: None,
    })
}

fn run_flow(ctx: &mut Context, params: &TaskParams) -> CliResult<TaskOutput> {
    let dim = ctx.entry.oracle.dim();
    let order = params.usize_or("order", 1)?;
    if !matches!(order, 1 | 2) {
        return Err(CliError::usage(format!("order must be 1 or 2, got {order}")));
    }
    let x0 = start_point(params, &ctx.entry)?;
    let alpha = params.f64_or("alpha", 3.0)?;
    let v0 = params.point("v0", dim)?.unwrap_or_else(|| Point64::zeros(dim));
    let t_end = params.f64_or("t_end", 10.0)?;
    let dt = params.f64("dt")?;
    let integrator = match params.str("integrator")?.as_deref().unwrap_or("rk4") {
        "rk4" => Integrator::Rk4,
        "euler" | "explicit_euler" => Integrator::ExplicitEuler,
        other => return Err(CliError::usage(format!("unknown integrator '{other}' (rk4|euler)"))),
    };
    let record_every = params.usize_or("record_every", 1)?;
    let user_gamma = params.f64("gamma")?;
    let user_l = params.f64("L")?;
    let user_kappa = params.f64("kappa")?;
    params.finish()?;

    let gamma = ctx.gamma(user_gamma)?;
    let (l, _) = ctx.lipschitz(user_l, &x0)?;
    let oracle = ctx.oracle_with_minimizer(&x0)?;
    let x_bar = oracle.known_minimizer().cloned().expect("attached above");
    let dt = dt.unwrap_or_else(|| default_dt(Some(l)));
    params.record("dt", dt);
    let mut certs = Vec::new();
    let traj = if order == 1 {
        let cfg = FlowConfig::first_order(x0, t_end, dt).with_integrator(integrator).with_record_every(record_every);
        let traj = integrate_first_order(&oracle, &cfg)?;
        certs.push(certify_first_order(&traj, gamma, &x_bar)?);
        certs.push(certify_first_order_values(&traj, gamma, l, &x_bar, LipschitzScope::Sublevel)?);
        traj
    } else {
        let kappa = match user_kappa {
            Some(k) => {
                ctx.set("kappa", k, "user");
                k
            }
            None => {
                ctx.set("kappa", gamma / l, "derived");
                gamma / l
            }
        };
        let lyap = LyapunovParams::new(gamma, kappa, alpha)?;
        ctx.set("lambda", lyap.lambda, "derived");
        let cfg = FlowConfig::second_order(x0, v0, alpha, t_end, dt)
            .with_integrator(integrator)
            .with_record_every(record_every);
        let traj = integrate_second_order(&oracle, &cfg, Some(lyap))?;
        certs.push(certify_second_order(&traj, &lyap)?);
        traj
    };
    ctx.annotate(&mut certs);
    let (status, certificate) = certificates_outcome(certs);
    Ok(TaskOutput { status, certificate, trace: Some(trajectory_table(&traj, "t")), summary: None })
}

fn run_gd(ctx: &mut Context, params: &TaskParams) -> CliResult<TaskOutput> {
    let x0 = start_point(params, &ctx.entry)?;
    let beta = params.f64("beta")?;
    let betas = params.list("betas")?;
    let optimal = params.bool_or("optimal", beta.is_none() && betas.is_none())?;
    let max_iters = params.usize_or("max_iters", DEFAULT_MAX_ITERS)?;
    let tol = params.f64_or("stop_grad_tol", DEFAULT_STOP_GRAD_TOL)?;
    let user_gamma = params.f64("gamma")?;
    let user_l = match (params.f64("L0")?, params.f64("L")?) {
        (Some(_), Some(_)) => return Err(CliError::usage("give L0 or L, not both")),
        (a, b) => a.or(b),
    };
    params.finish()?;
    let given = [beta.is_some(), betas.is_some(), optimal].iter().filter(|&&b| b).count();
    if given != 1 {
        return Err(CliError::usage("choose exactly one of beta, betas, optimal"));
    }

    let gamma = ctx.gamma(user_gamma)?;
    let (l0, _) = ctx.lipschitz(user_l, &x0)?;
    let rule = match (beta, betas) {
        (Some(b), _) => StepRule::Constant(b),
        (_, Some(bs)) => StepRule::Sequence(bs),
        _ => StepRule::OptimalStar { gamma, l0 },
    };
    rule.validate()?;
    let (_, hi) = rule.bounds();
    let window = (gamma / (l0 * l0)).min(2.0 / l0);
    if !(hi < window) {
        return Err(CoreError::ParameterWindowViolation(format!(
            "largest step {hi} is not below min(gamma/L0^2, 2/L0) = {window}"
        ))
        .into());
    }
    let oracle = ctx.oracle_with_minimizer(&x0)?;
    let cfg = GdConfig::new(x0, rule).with_max_iters(max_iters).with_stop_grad_tol(tol);
    let traj = gradient_descent(&oracle, &cfg)?;
    let mut certs = vec![certify_gd_contraction(&traj, gamma, l0)?, certify_gd_values(&traj, gamma, l0)?];
    ctx.annotate(&mut certs);
    let (status, certificate) = certificates_outcome(certs);
    Ok(TaskOutput { status, certificate, trace: Some(trajectory_table(&traj, "k")), summary: None })
}

fn run_hb(ctx: &mut Context, params: &TaskParams) -> CliResult<TaskOutput> {
    let dim = ctx.entry.oracle.dim();
    let x0 = start_point(params, &ctx.entry)?;
    let x_prev = params.point("x_prev", dim)?.unwrap_or_else(|| x0.clone());
    let theta = params.f64("theta")?.ok_or_else(|| CliError::usage("hb needs theta"))?;
    let beta = params.f64("beta")?.ok_or_else(|| CliError::usage("hb needs beta"))?;
    let max_iters = params.usize_or("max_iters", DEFAULT_MAX_ITERS)?;
    let tol = params.f64_or("stop_grad_tol", DEFAULT_STOP_GRAD_TOL)?;
    let user_gamma = params.f64("gamma")?;
    let user_l = params.f64("L")?;
    params.finish()?;

    let gamma = ctx.gamma(user_gamma)?;
    let (l, source) = ctx.lipschitz(user_l, &x0)?;
    if source == "estimated" {
        ctx.note("the energy rate assumes a global Lipschitz constant; the sublevel estimate L0 stands in for it");
    }
    let (rho, sigma, factor) = hb_energy_factor(gamma, l, theta, beta)?;
    ctx.set("rho", rho, "derived");
    ctx.set("sigma", sigma, "derived");
    ctx.set("factor", factor, "derived");
    let oracle = ctx.oracle_with_minimizer(&x0)?;
    let cfg = HbConfig::new(x0, theta, beta).with_x_prev(x_prev).with_max_iters(max_iters).with_stop_grad_tol(tol);
    let traj = heavy_ball(&oracle, &cfg)?;
    let mut certs = vec![certify_hb_energy(&traj, gamma, l, theta, beta)?];
    ctx.annotate(&mut certs);
    let (status, certificate) = certificates_outcome(certs);
    Ok(TaskOutput { status, certificate, trace: Some(trajectory_table(&traj, "k")), summary: None })
}

fn run_estimate(ctx: &mut Context, params: &TaskParams) -> CliResult<TaskOutput> {
    let constant = params.str("constant")?.ok_or_else(|| CliError::usage("estimate needs constant (L0|gamma|kappa|minimizer)"))?;
    let default_samples = match constant.as_str() {
        "gamma" => MODULUS_SAMPLES,
        _ => LIPSCHITZ_SAMPLES,
    };
    let samples = params.usize_or("samples", default_samples)?;
    let x0 = start_point(params, &ctx.entry)?;
    let t_end = if constant == "kappa" { Some(params.f64_or("t_end", 10.0)?) } else { None };
    params.finish()?;
    let oracle = &ctx.entry.oracle;
    let (certificate, row) = match constant.as_str() {
        "L0" | "L" => {
            let e = estimate_lipschitz_sublevel(oracle, &x0, samples, ctx.seed)?;
            (serde_json::to_value(e)?, [e.value, e.safety_adjusted_value, e.samples as f64])
        }
        "gamma" => {
            let region = DomainSpec::from_kind(oracle.sampling_region().clone());
            let e = empirical_modulus(oracle, &region, samples, ctx.seed)?;
            (serde_json::to_value(e)?, [e.value, e.safety_adjusted_value, e.samples as f64])
        }
        "kappa" => {
            let with_min = ctx.oracle_with_minimizer(&x0)?;
            let x_bar = with_min.known_minimizer().cloned().expect("attached above");
            let dt = default_dt(ctx.entry.lipschitz());
            let traj = integrate_first_order(&with_min, &FlowConfig::first_order(x0, t_end.unwrap(), dt))?;
            let e = estimate_kappa(&with_min, &traj, &x_bar)?;
            (serde_json::to_value(e)?, [e.value, e.safety_adjusted_value, e.samples as f64])
        }
        "minimizer" => {
            let x = reference_minimizer(oracle, &x0)?;
            let h = oracle.value(&x)?;
            let g = oracle.grad(&x)?.norm();
            let mut header: Vec<String> = (1..=x.dim()).map(|i| format!("x{i}")).collect();
            header.extend(["h".to_owned(), "grad_norm".to_owned()]);
            let mut row: Vec<String> = x.as_slice().iter().map(|&v| fmt_real(v)).collect();
            row.extend([fmt_real(h), fmt_real(g)]);
            let cert = json!({ "value": x, "h_value": h, "grad_norm": g });
            return Ok(TaskOutput {
                status: ExitStatus::Pass,
                certificate: cert,
                trace: Some(Table { header, rows: vec![row] }),
                summary: None,
            });
        }
        other => return Err(CliError::usage(format!("unknown constant '{other}' (L0|gamma|kappa|minimizer)"))),
    };
    let table = Table {
        header: ["constant", "value", "safety_adjusted_value", "samples"].map(String::from).to_vec(),
        rows: vec![vec![constant.clone(), fmt_real(row[0]), fmt_real(row[1]), format!("{}", row[2] as u64)]],
    };
    Ok(TaskOutput { status: ExitStatus::Pass, certificate, trace: Some(table), summary: None })
}

fn run_bench(ctx: &mut Context, params: &TaskParams, output_dir: Option<&Path>) -> CliResult<TaskOutput> {
    let suite = params.str("suite")?;
    if let Some(suite) = suite {
        params.finish()?;
        let scratch = output_dir.map(Path::to_path_buf).unwrap_or_else(std::env::temp_dir);
        let summary = bench::run_suite(&suite, &scratch, ctx.seed)?;
        let status = if summary.all_pass() { ExitStatus::Pass } else { ExitStatus::CertificateFailure };
        return Ok(TaskOutput {
            status,
            certificate: serde_json::to_value(&summary.rows)?,
            trace: None,
            summary: Some(summary.table()),
        });
    }
    let points = params.usize_or("points", 8)?;
    let x0 = start_point(params, &ctx.entry)?;
    let max_iters = params.usize_or("max_iters", 20_000)?;
    let user_gamma = params.f64("gamma")?;
    let user_l = params.f64("L0")?;
    params.finish()?;
    if points == 0 {
        return Err(CliError::usage("points must be >= 1"));
    }
    let gamma = ctx.gamma(user_gamma)?;
    let (l0, _) = ctx.lipschitz(user_l, &x0)?;
    let oracle = ctx.oracle_with_minimizer(&x0)?;
    let grid = bench::beta_grid(&oracle, &x0, gamma, l0, points, max_iters)?;
    let status = if grid.all_pass() { ExitStatus::Pass } else { ExitStatus::CertificateFailure };
    Ok(TaskOutput { status, certificate: serde_json::to_value(&grid.rows)?, trace: None, summary: Some(grid.table()) })
}

/// Runs one experiment and, when `output_dir` is set, writes its artifacts.
pub fn run_experiment(config: &ExperimentConfig) -> CliResult<Outcome> {
    let seed = resolve_seed(config.seed)?;
    let entry = functions::resolve(&config.function)?;
    let params = TaskParams::new(config.task_params.clone());
    let mut ctx = Context::new(entry, seed);
    let out = match config.task {
        Task::Verify => run_verify(&mut ctx, &params)?,
        Task::Flow => run_flow(&mut ctx, &params)?,
        Task::Gd => run_gd(&mut ctx, &params)?,
        Task::Hb => run_hb(&mut ctx, &params)?,
        Task::Estimate => run_estimate(&mut ctx, &params)?,
        Task::Bench => run_bench(&mut ctx, &params, config.output_dir.as_deref())?,
    };
    let meta = json!({
        "artifact": "sqcflow",
        "version": env!("CARGO_PKG_VERSION"),
        "config": {
            "function": config.function,
            "task": config.task,
            "task_params": params.resolved(),
            "seed": seed,
        },
        "function": ctx.entry.metadata(),
        "constants": ctx.constants,
        "notes": ctx.notes,
        "exit_code": out.status.code(),
    });
    let outcome = Outcome {
        status: out.status,
        certificate: out.certificate,
        trace: out.trace,
        summary: out.summary,
        meta,
    };
    if let Some(dir) = &config.output_dir {
        outcome.write(dir)?;
    }
    Ok(outcome)
}
