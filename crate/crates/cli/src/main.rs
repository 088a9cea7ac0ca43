use std::collections::BTreeMap;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::Value;
use sqcflow_cli::experiment::{pretty, resolve_seed};
use sqcflow_cli::functions;
use sqcflow_cli::{run_experiment, CliError, CliResult, ExitStatus, ExperimentConfig, Task};

/// Sampled verification and rate certificates for strongly quasiconvex functions.
#[derive(Parser)]
#[command(name = "sqcflow", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// List catalog functions with their constants.
    ListFunctions {
        #[arg(long)]
        json: bool,
    },
    /// Check a class property on sampled pairs.
    Verify {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        property: Option<String>,
        #[arg(long)]
        gamma: Option<f64>,
        #[arg(long)]
        pairs: Option<usize>,
    },
    /// Integrate a first- or second-order gradient flow and certify its rate.
    Flow {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        order: Option<usize>,
        #[arg(long)]
        t_end: Option<f64>,
        #[arg(long)]
        dt: Option<f64>,
        /// Start point, comma-separated.
        #[arg(long, allow_hyphen_values = true)]
        x0: Option<String>,
    },
    /// Gradient descent with a constant, listed or optimal step.
    Gd {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        beta: Option<f64>,
        #[arg(long)]
        optimal: bool,
        #[arg(long)]
        max_iters: Option<usize>,
        /// Start point, comma-separated.
        #[arg(long, allow_hyphen_values = true)]
        x0: Option<String>,
    },
    /// Heavy-ball iteration and its energy certificate.
    Hb {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        theta: Option<f64>,
        #[arg(long)]
        beta: Option<f64>,
        #[arg(long)]
        max_iters: Option<usize>,
        /// Start point, comma-separated.
        #[arg(long, allow_hyphen_values = true)]
        x0: Option<String>,
    },
    /// Estimate L0, gamma, kappa or a reference minimizer.
    Estimate {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        constant: Option<String>,
        #[arg(long)]
        samples: Option<usize>,
    },
    /// Run a benchmark suite (acceptance, ladder, rates) or a step-size grid.
    Bench {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        suite: Option<String>,
    },
    /// Run an experiment described by a JSON config; flags override its fields.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        function: Option<String>,
        #[arg(long)]
        output_dir: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        /// Task parameter override, `key=value`.
        #[arg(short = 'p', long = "param", value_name = "KEY=VALUE")]
        params: Vec<String>,
    },
}

#[derive(Args)]
struct Common {
    /// Function spec, e.g. `quadratic(dim=2, gamma=1, L=4)`.
    #[arg(short, long)]
    function: Option<String>,
    #[arg(long)]
    output_dir: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Task parameter, `key=value`; repeatable.
    #[arg(short = 'p', long = "param", value_name = "KEY=VALUE")]
    params: Vec<String>,
}

fn parse_params(raw: &[String]) -> CliResult<BTreeMap<String, Value>> {
    let mut out = BTreeMap::new();
    for item in raw {
        let (k, v) = item
            .split_once('=')
            .ok_or_else(|| CliError::usage(format!("parameter '{item}' is not key=value")))?;
        let value = serde_json::from_str(v).unwrap_or_else(|_| Value::String(v.to_owned()));
        out.insert(k.trim().to_owned(), value);
    }
    Ok(out)
}

fn build(task: Task, common: Common, default_fn: Option<&str>, typed: Vec<(&str, Option<Value>)>) -> CliResult<ExperimentConfig> {
    let function = common
        .function
        .or_else(|| default_fn.map(str::to_owned))
        .ok_or_else(|| CliError::usage("--function is required"))?;
    let mut cfg = ExperimentConfig::new(function, task);
    cfg.task_params = parse_params(&common.params)?;
    for (k, v) in typed {
        if let Some(v) = v {
            cfg.task_params.insert(k.to_owned(), v);
        }
    }
    cfg.output_dir = common.output_dir;
    cfg.seed = common.seed;
    Ok(cfg)
}

fn v<T: Into<Value>>(x: Option<T>) -> Option<Value> {
    x.map(Into::into)
}

fn list_functions(json: bool) -> CliResult<()> {
    let entries = functions::list()?;
    if json {
        let v: Vec<Value> = entries
            .iter()
            .map(|(syntax, meta)| serde_json::json!({ "syntax": syntax, "metadata": meta }))
            .collect();
        println!("{}", pretty(&Value::Array(v))?);
    } else {
        for (syntax, meta) in entries {
            let consts: Vec<String> = meta.constants.iter().map(|(k, v)| format!("{k}={v}")).collect();
            println!("{syntax:<40} dim={} {}", meta.dim, consts.join(" "));
        }
    }
    Ok(())
}

fn config_of(command: Command) -> CliResult<Option<ExperimentConfig>> {
    Ok(Some(match command {
        Command::ListFunctions { json } => {
            list_functions(json)?;
            return Ok(None);
        }
        Command::Verify { common, property, gamma, pairs } => build(
            Task::Verify,
            common,
            None,
            vec![("property", v(property)), ("gamma", v(gamma)), ("pairs", v(pairs))],
        )?,
        Command::Flow { common, order, t_end, dt, x0 } => build(
            Task::Flow,
            common,
            None,
            vec![("order", v(order)), ("t_end", v(t_end)), ("dt", v(dt)), ("x0", v(x0))],
        )?,
        Command::Gd { common, beta, optimal, max_iters, x0 } => build(
            Task::Gd,
            common,
            None,
            vec![("beta", v(beta)), ("optimal", optimal.then_some(Value::Bool(true))), ("max_iters", v(max_iters)), ("x0", v(x0))],
        )?,
        Command::Hb { common, theta, beta, max_iters, x0 } => build(
            Task::Hb,
            common,
            None,
            vec![("theta", v(theta)), ("beta", v(beta)), ("max_iters", v(max_iters)), ("x0", v(x0))],
        )?,
        Command::Estimate { common, constant, samples } => build(
            Task::Estimate,
            common,
            None,
            vec![("constant", v(constant)), ("samples", v(samples))],
        )?,
        Command::Bench { common, suite } => {
            let default_fn = suite.is_some().then_some("half_square(dim=1)");
            build(Task::Bench, common, default_fn, vec![("suite", v(suite))])?
        }
        Command::Run { config, function, output_dir, seed, params } => {
            let mut cfg = ExperimentConfig::from_file(&config)?;
            if let Some(f) = function {
                cfg.function = f;
            }
            cfg.task_params.extend(parse_params(&params)?);
            if output_dir.is_some() {
                cfg.output_dir = output_dir;
            }
            if seed.is_some() {
                cfg.seed = seed;
            }
            cfg
        }
    }))
}

fn run(cli: Cli) -> CliResult<ExitStatus> {
    let Some(mut cfg) = config_of(cli.command)? else {
        return Ok(ExitStatus::Pass);
    };
    cfg.seed = Some(resolve_seed(cfg.seed)?);
    let outcome = run_experiment(&cfg)?;
    let mut out = std::io::stdout().lock();
    if let Err(e) = writeln!(out, "{}", pretty(&outcome.certificate)?) {
        if e.kind() != std::io::ErrorKind::BrokenPipe {
            return Err(e.into());
        }
    }
    Ok(outcome.status)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let err = CliError::usage(e.to_string().trim().to_owned());
            eprintln!("{}", err.to_json());
            return ExitCode::from(ExitStatus::Usage.code() as u8);
        }
    };
    match run(cli) {
        Ok(status) => ExitCode::from(status.code() as u8),
        Err(e) => {
            eprintln!("{}", e.to_json());
            ExitCode::from(e.status().code() as u8)
        }
    }
}
