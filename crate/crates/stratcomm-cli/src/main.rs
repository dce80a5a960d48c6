use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde_json::json;
use stratcomm::rational::parse_rational;
use stratcomm_cli::commands::{self, require};
use stratcomm_cli::config::{self, Experiment, Overrides};
use stratcomm_cli::report::{emit, render_csv, render_json, Report};
use stratcomm_cli::suites::SuiteRegistry;
use stratcomm_cli::{CliError, CliResult};

#[derive(Parser, Debug)]
#[command(name = "stratcomm", version, about = "Exact experiments on decoding a strategic sender")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// JSON experiment configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output file; standard output when omitted.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Engine name, or a comma-separated list: sequence, type, auto.
    #[arg(long, global = true)]
    engine: Option<String>,
    #[arg(long, global = true)]
    n_min: Option<usize>,
    #[arg(long, global = true)]
    n_max: Option<usize>,
    /// Worker threads; results do not depend on it.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Largest sequence space walked exhaustively.
    #[arg(long, global = true)]
    cap: Option<u64>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Cycle structure of the utility and the rate-region classification.
    AnalyzeUtility,
    /// Evaluate the configured decoder family over a range of block lengths (CSV).
    Simulate,
    /// Four growing neighbour-class decoders at n = 1..10 (CSV).
    Example2,
    /// The rate-gap construction at n = 36 (JSON).
    Example3 {
        #[arg(long, default_value = "1/400")]
        delta: String,
    },
    /// Exhaustive minimum pessimistic error over all decoders (JSON).
    BruteForce,
    /// Run a verification suite by name, or `all`.
    Verify { suite: String },
}

impl Cli {
    fn overrides(&self) -> Overrides {
        Overrides {
            engine: self.engine.clone(),
            n_min: self.n_min,
            n_max: self.n_max,
            threads: self.threads,
            cap: self.cap,
            out: self.out.clone(),
        }
    }

    fn experiment(&self) -> CliResult<Option<Experiment>> {
        if !matches!(self.command, Command::AnalyzeUtility | Command::Simulate | Command::BruteForce) {
            return Ok(None);
        }
        let path = self.config.as_ref().ok_or_else(|| CliError::Config("this subcommand needs --config".into()))?;
        let text = fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        let mut cfg = config::parse(&text)?;
        self.overrides().apply(&mut cfg);
        Ok(Some(cfg.resolve()?))
    }
}

fn report_checks(report: &Report) {
    eprint!("{}", report.summary());
}

fn execute(cli: &Cli, exp: Option<Experiment>) -> CliResult<()> {
    let out = exp.as_ref().and_then(|e| e.config.out.clone()).or_else(|| cli.out.clone());
    let out = out.as_deref();
    match &cli.command {
        Command::AnalyzeUtility => {
            let v = commands::analyze_utility(&exp.expect("loaded"))?;
            emit(out, &render_json(&v)?)
        }
        Command::Simulate => {
            let exp = exp.expect("loaded");
            let rows = commands::simulate(&exp)?;
            emit(out, &render_csv(&[exp.echo()], &rows)?)
        }
        Command::BruteForce => {
            let v = commands::brute_force(&exp.expect("loaded"))?;
            emit(out, &render_json(&v)?)
        }
        Command::Example2 => {
            let engines = cli.engine.clone().unwrap_or_else(|| "sequence,type".into());
            let (cfg, rows) = commands::example2(&engines)?;
            emit(out, &render_csv(&[serde_json::to_string(&cfg)?], &rows)?)?;
            report_checks(&commands::example2_checks(&rows));
            Ok(())
        }
        Command::Example3 { delta } => {
            let delta = parse_rational(delta).map_err(|e| CliError::Config(format!("--delta: {e}")))?;
            let report = commands::example3(&delta)?;
            emit(out, &render_json(&report)?)?;
            report_checks(&report.report);
            require(&report.report)
        }
        Command::Verify { suite } => {
            let registry = SuiteRegistry::default();
            let suites = if suite == "all" { registry.iter().collect() } else { vec![registry.get(suite)?] };
            let reports = suites.iter().map(|s| s.run()).collect::<CliResult<Vec<_>>>()?;
            let all = Report::new(
                "verify",
                reports.iter().flat_map(|r| r.checks.iter().map(|c| stratcomm_cli::report::Check { name: format!("{}/{}", r.name, c.name), ..c.clone() })).collect(),
            );
            let body = json!({ "suites": reports, "passed": all.passed });
            emit(out, &render_json(&body)?)?;
            reports.iter().for_each(report_checks);
            require(&all)
        }
    }
}

fn run(cli: &Cli) -> CliResult<()> {
    let exp = cli.experiment()?;
    let threads = cli.threads.or_else(|| exp.as_ref().and_then(|e| e.config.threads));
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(t) = threads {
        if t == 0 {
            return Err(CliError::Config("--threads must be at least 1".into()));
        }
        builder = builder.num_threads(t);
    }
    let pool = builder.build().map_err(|e| CliError::Config(format!("thread pool: {e}")))?;
    pool.install(|| execute(cli, exp))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
