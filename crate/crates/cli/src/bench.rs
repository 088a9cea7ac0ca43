//! Fixed batteries: the acceptance criteria, the implication ladder over
//! the catalog, GD/heavy-ball rate tables and the β grid.

use std::path::Path;

use serde::Serialize;
use sqcflow_core::catalog;
use sqcflow_core::estimate::{empirical_modulus, estimate_lipschitz_sublevel};
use sqcflow_core::solvers::{certify_gd_contraction, certify_gd_values, certify_hb_energy, gradient_descent, heavy_ball};
use sqcflow_core::verify::{check_implication_ladder, Property};
use sqcflow_core::{DomainSpec, Entry64, GdConfig, HbConfig, Oracle64, Point64, SampleBudget, StepRule};

use crate::acceptance;
use crate::error::{CliError, CliResult};
use crate::experiment::{default_x0, LIPSCHITZ_SAMPLES, MODULUS_SAMPLES};
use crate::table::Table;

pub const SUITES: &[&str] = &["acceptance", "ladder", "rates"];
const LADDER_PAIRS: usize = 2000;
/// Ladder modulus for entries without a catalog one.
const FALLBACK_GAMMA: f64 = 0.1;

#[derive(Debug, Clone, Serialize)]
pub struct SummaryRow {
    pub suite: String,
    pub id: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct Summary {
    pub rows: Vec<SummaryRow>,
}

impl Summary {
    fn push(&mut self, suite: &str, id: impl Into<String>, passed: bool, detail: impl Into<String>) {
        self.rows.push(SummaryRow { suite: suite.to_owned(), id: id.into(), passed, detail: detail.into() });
    }

    pub fn all_pass(&self) -> bool {
        self.rows.iter().all(|r| r.passed)
    }

    pub fn table(&self) -> Table {
        Table {
            header: ["suite", "id", "result", "detail"].map(String::from).to_vec(),
            rows: self
                .rows
                .iter()
                .map(|r| {
                    vec![r.suite.clone(), r.id.clone(), if r.passed { "pass" } else { "fail" }.to_owned(), r.detail.clone()]
                })
                .collect(),
        }
    }
}

/// Runs a named suite. `scratch` receives intermediate run directories.
pub fn run_suite(name: &str, scratch: &Path, seed: u64) -> CliResult<Summary> {
    match name {
        "acceptance" => {
            let mut s = Summary::default();
            for r in acceptance::run_all(&scratch.join("acceptance-runs")) {
                s.push("acceptance", format!("criterion_{}", r.id), r.passed, format!("{}: {}", r.name, r.detail));
            }
            Ok(s)
        }
        "ladder" => ladder_suite(seed),
        "rates" => rates_suite(seed),
        other => Err(CliError::usage(format!("unknown suite '{other}' (expected one of {SUITES:?})"))),
    }
}

/// Every catalog entry at its default parameters.
pub fn catalog_entries() -> CliResult<Vec<Entry64>> {
    let mut v = catalog::modulus_entries::<f64>()?;
    v.push(catalog::sin_quadratic());
    v.push(catalog::pl_without_uniqueness());
    v.push(catalog::cubic());
    v.push(catalog::linear(Point64::from_f64(&[1.0])?)?);
    v.push(catalog::shifted_half_square(Point64::from_f64(&[1.0, 0.0])?)?);
    v.push(catalog::quadratic_fraction_example(1.0)?);
    Ok(v)
}

/// Catalog modulus, else the fixed [`FALLBACK_GAMMA`]. A sampled modulus is
/// positive even on entries that are not strongly quasiconvex, so feeding it
/// back would make the premises pass vacuously.
fn ladder_gamma(e: &Entry64) -> (f64, &'static str) {
    e.gamma().map_or((FALLBACK_GAMMA, "fallback"), |g| (g, "catalog"))
}

/// Catalog modulus, else the deflated sampled one, else [`FALLBACK_GAMMA`].
fn rate_gamma(e: &Entry64, seed: u64) -> CliResult<(f64, &'static str)> {
    if let Some(g) = e.gamma() {
        return Ok((g, "catalog"));
    }
    let region = DomainSpec::from_kind(e.oracle.sampling_region().clone());
    let g = empirical_modulus(&e.oracle, &region, MODULUS_SAMPLES, seed)?.safety_adjusted_value;
    Ok(if g > 0.0 { (g, "estimated") } else { (FALLBACK_GAMMA, "fallback") })
}

fn ladder_suite(seed: u64) -> CliResult<Summary> {
    let mut s = Summary::default();
    let budget = SampleBudget::pairs(LADDER_PAIRS, seed);
    for e in catalog_entries()? {
        let (gamma, source) = ladder_gamma(&e);
        let ladder = check_implication_ladder(&e.oracle, gamma, &budget)?;
        for i in &ladder.implications {
            s.push(
                "ladder",
                format!("{}: {} => {}", e.name, i.premise, i.conclusion),
                i.consistent,
                format!(
                    "gamma={gamma} ({source}); premise {}, conclusion {}",
                    if i.premise_holds { "holds" } else { "fails" },
                    if i.conclusion_holds { "holds" } else { "fails" }
                ),
            );
        }
        if e.name.starts_with("sqrt_norm") {
            let report = ladder.report("strong_monotonicity").expect("ladder runs strong monotonicity");
            let prop = Property::StrongMonotonicity(gamma);
            let mut valid = true;
            for w in &report.violations {
                let again = prop.evaluate(&e.oracle, &w.x, &w.y, w.lambda)?;
                valid &= again.is_some_and(|q| q.violated() && q.margin() == w.margin);
            }
            s.push(
                "ladder",
                format!("{}: strong_monotonicity refuted", e.name),
                !report.holds_on_samples && valid,
                format!("{} violations, witnesses re-evaluated: {}", report.violations_found, valid),
            );
        }
    }
    Ok(s)
}

fn rates_suite(seed: u64) -> CliResult<Summary> {
    let mut s = Summary::default();
    let entries = [
        catalog::half_square::<f64>(1)?,
        catalog::strongly_convex_quadratic(2, 1.0, 4.0)?,
        catalog::sin_quadratic(),
    ];
    for e in entries {
        let x0 = default_x0(&e);
        let (gamma, _) = rate_gamma(&e, seed)?;
        let l0 = match e.lipschitz() {
            Some(l) => l,
            None => estimate_lipschitz_sublevel(&e.oracle, &x0, LIPSCHITZ_SAMPLES, seed)?.safety_adjusted_value,
        };
        let gd = gradient_descent(&e.oracle, &GdConfig::new(x0.clone(), StepRule::OptimalStar { gamma, l0 }))?;
        for cert in [certify_gd_contraction(&gd, gamma, l0)?, certify_gd_values(&gd, gamma, l0)?] {
            s.push(
                "rates",
                format!("gd {:?}: {}", cert.kind, e.name),
                cert.satisfied,
                format!("empirical {:.6} vs theoretical {:.6}", cert.empirical_rate, cert.theoretical_rate),
            );
        }
        let theta = 0.5;
        let beta = 0.5 * (1.0 - theta * theta) / l0;
        let hb = heavy_ball(&e.oracle, &HbConfig::new(x0, theta, beta))?;
        let cert = certify_hb_energy(&hb, gamma, l0, theta, beta)?;
        s.push(
            "rates",
            format!("hb {:?}: {}", cert.kind, e.name),
            cert.satisfied,
            format!("empirical {:.6} vs theoretical {:.6}", cert.empirical_rate, cert.theoretical_rate),
        );
    }
    Ok(s)
}

#[derive(Debug, Clone, Serialize)]
pub struct GridRow {
    pub beta: f64,
    pub empirical_rate: f64,
    pub q_squared: f64,
    pub satisfied: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct Grid {
    pub rows: Vec<GridRow>,
}

impl Grid {
    pub fn all_pass(&self) -> bool {
        self.rows.iter().all(|r| r.satisfied)
    }

    pub fn table(&self) -> Table {
        Table {
            header: ["beta", "empirical_rate", "q_squared", "satisfied"].map(String::from).to_vec(),
            rows: self
                .rows
                .iter()
                .map(|r| {
                    vec![
                        format!("{:.16e}", r.beta),
                        format!("{:.16e}", r.empirical_rate),
                        format!("{:.16e}", r.q_squared),
                        r.satisfied.to_string(),
                    ]
                })
                .collect(),
        }
    }
}

/// Constant-step GD at `points` steps spread evenly inside the window
/// `]0, min{γ/L₀², 2/L₀}[`, each with its contraction certificate.
pub fn beta_grid(oracle: &Oracle64, x0: &Point64, gamma: f64, l0: f64, points: usize, max_iters: usize) -> CliResult<Grid> {
    let window = (gamma / (l0 * l0)).min(2.0 / l0);
    let mut rows = Vec::with_capacity(points);
    for i in 1..=points {
        let beta = window * i as f64 / (points + 1) as f64;
        let cfg = GdConfig::new(x0.clone(), StepRule::Constant(beta)).with_max_iters(max_iters);
        let traj = gradient_descent(oracle, &cfg)?;
        let cert = certify_gd_contraction(&traj, gamma, l0)?;
        rows.push(GridRow { beta, empirical_rate: cert.empirical_rate, q_squared: cert.theoretical_rate, satisfied: cert.satisfied });
    }
    Ok(Grid { rows })
}
