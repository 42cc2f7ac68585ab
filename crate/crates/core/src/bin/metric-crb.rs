use clap::{Args, Parser, Subcommand};
use metric_crb::cli::{
    run_bound, run_simulate, run_verify, CliError, Report, Scenario, Tolerances, VerifyOptions, BUNDLED, SUITES,
};
use std::path::PathBuf;
use std::process::ExitCode;

/// Quantum Cramér-Rao bounds for metric parameters probed by Gaussian
/// electromagnetic fields.
#[derive(Parser)]
#[command(name = "metric-crb", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute the bound for a scenario and check it against closed forms.
    Bound(RunArgs),
    /// Simulate the quadrature readout and compare with the bound.
    Simulate(RunArgs),
    /// Run a named verification suite.
    Verify {
        suite: String,
        #[command(flatten)]
        common: Common,
    },
    /// List bundled scenarios and verification suites.
    ListScenarios,
}

#[derive(Args)]
struct RunArgs {
    /// Scenario TOML, or a JSON report whose echoed scenario is rerun.
    #[arg(long, conflicts_with = "scenario", required_unless_present = "scenario")]
    config: Option<PathBuf>,
    /// Bundled scenario name.
    #[arg(long)]
    scenario: Option<String>,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct Common {
    /// Write the JSON report here.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Override the simulation seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Multiply every quadrature resolution.
    #[arg(long, default_value_t = 1.0)]
    resolution: f64,
    /// Override a named tolerance, as name=value (repeatable).
    #[arg(long = "tolerance", value_name = "NAME=VALUE")]
    tolerances: Vec<String>,
}

fn load(args: &RunArgs) -> Result<Scenario, CliError> {
    let mut s = match (&args.config, &args.scenario) {
        (Some(path), _) => Scenario::load(path)?,
        (None, Some(name)) => Scenario::bundled(name)?,
        (None, None) => return Err(CliError::Config("give --config PATH or --scenario NAME".into())),
    };
    let c = &args.common;
    if c.resolution != 1.0 {
        s.scale_resolution(c.resolution)?;
    }
    if let Some(seed) = c.seed {
        if let Some(sim) = s.simulation.as_mut() {
            sim.seed = seed;
        }
    }
    for t in &c.tolerances {
        let (k, v) = Tolerances::parse_override(t)?;
        s.tolerances.insert(k, v);
    }
    s.validate()?;
    Ok(s)
}

fn emit(report: &Report, out: Option<PathBuf>) -> Result<(), CliError> {
    print!("{}", report.summary());
    if let Some(path) = out {
        std::fs::write(&path, report.to_json()).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    }
    Ok(())
}

fn run(cli: Cli) -> Result<bool, CliError> {
    match cli.command {
        Command::Bound(args) => {
            let s = load(&args)?;
            let report = run_bound(&s)?;
            let out = args.common.out.clone().or_else(|| report_path(&s));
            emit(&report, out)?;
            Ok(report.passed())
        }
        Command::Simulate(args) => {
            let s = load(&args)?;
            let report = run_simulate(&s)?;
            let out = args.common.out.clone().or_else(|| report_path(&s));
            emit(&report, out)?;
            Ok(report.passed())
        }
        Command::Verify { suite, common } => {
            let mut tolerances = Tolerances::default();
            for t in &common.tolerances {
                let (k, v) = Tolerances::parse_override(t)?;
                tolerances.set(&k, v)?;
            }
            let opts = VerifyOptions { tolerances, seed: common.seed, resolution: common.resolution };
            let report = run_verify(&suite, &opts)?;
            emit(&report, common.out)?;
            Ok(report.passed())
        }
        Command::ListScenarios => {
            println!("scenarios:");
            for (name, text) in BUNDLED {
                let description = Scenario::parse(text).map(|s| s.description).unwrap_or_default();
                println!("  {name:<32} {description}");
            }
            println!("suites:");
            for (name, description) in SUITES {
                println!("  {name:<32} {description}");
            }
            Ok(true)
        }
    }
}

fn report_path(s: &Scenario) -> Option<PathBuf> {
    s.output.as_ref().and_then(|o| o.report.as_ref()).map(PathBuf::from)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
