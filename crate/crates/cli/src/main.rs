use std::path::PathBuf;
use std::process::ExitCode;

use chrono_reverse::battery::SuiteSize;
use chrono_reverse_cli::scenario::{load_tolerance_override, write_text};
use chrono_reverse_cli::{
    base_tolerances, generate_random_scenario, load_scenario, property_suite, run_command, CliError, CliResult,
    Command, Report, TOL_ENV,
};
use clap::{Args, Parser, Subcommand};

/// Time reversal of Markov chains and quantum channels.
///
/// Exit status: 0 all verdicts pass, 1 a verdict fails, 2 input error,
/// 3 numerical failure.
#[derive(Parser)]
#[command(name = "chrono-reverse", version)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Args)]
struct Common {
    /// Scenario JSON file.
    #[arg(long)]
    scenario: PathBuf,
    /// Seed for randomly drawn auxiliary inputs (overrides the scenario seed).
    #[arg(long)]
    seed: Option<u64>,
    /// JSON file with tolerance fields applied over the scenario's.
    #[arg(long)]
    tol_override: Option<PathBuf>,
    /// Also write the report to this file.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SuiteArgs {
    /// Optional scenario; only its seed and tolerances are used.
    #[arg(long)]
    scenario: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    tol_override: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Trials for the large batteries; medium and small ones scale with it.
    #[arg(long, default_value_t = 500)]
    trials: usize,
}

#[derive(Args)]
struct GenerateArgs {
    /// classical, channel, dual_flow or pathspace.
    #[arg(long)]
    kind: String,
    /// Dimension, 2 to 6.
    #[arg(long)]
    dim: usize,
    /// Number of steps, 1 to 8.
    #[arg(long)]
    steps: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Write the scenario here instead of standard output.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Reverse transition matrices of a classical flow.
    ReverseChain(Common),
    /// Reversal channels along a channel flow.
    ReverseChannel(Common),
    /// Space-time adjointness (classical or channel scenario).
    CheckAdjointness(Common),
    /// Relative-entropy monotonicity (classical or dual_flow scenario).
    HTheorem(Common),
    /// Umegaki and Belavkin-Staszewski entropies along a dual flow.
    Entropies(Common),
    /// Operator, trace and expectation Jensen gaps for the first channel.
    Jensen(Common),
    /// Path weights of a path-space scenario.
    PathWeights(Common),
    /// Path-divergence minimality against admixture perturbations.
    VerifyMaxEntropy(Common),
    /// Seeded randomized batteries of every module.
    PropertySuite(SuiteArgs),
    /// Write a seeded random scenario.
    Generate(GenerateArgs),
}

fn resolve_tolerances(
    base: chrono_reverse::Tolerances,
    path: Option<&PathBuf>,
) -> CliResult<chrono_reverse::Tolerances> {
    let tol = match path {
        Some(p) => load_tolerance_override(p)?.apply(base),
        None => base,
    };
    tol.validate().map_err(|e| CliError::schema("tolerances", e))?;
    Ok(tol)
}

fn emit(report: &Report, out: Option<&PathBuf>) -> CliResult<bool> {
    let text = report.render();
    print!("{text}");
    if let Some(p) = out {
        write_text(p, &text)?;
    }
    Ok(report.passed())
}

fn analysis(command: Command, args: &Common, env_base: chrono_reverse::Tolerances) -> CliResult<bool> {
    let scenario = load_scenario(&args.scenario, env_base)?;
    let tol = resolve_tolerances(scenario.tolerances_over(env_base), args.tol_override.as_ref())?;
    let model = scenario.model(&tol)?;
    let seed = args.seed.or(scenario.seed).unwrap_or(0);
    let report = run_command(command, &model, seed, &tol)?;
    emit(&report, args.out.as_ref())
}

fn run(cli: Cli) -> CliResult<bool> {
    let env_base = base_tolerances(std::env::var(TOL_ENV).ok().as_deref())?;
    let (command, args) = match cli.command {
        Cmd::ReverseChain(a) => (Command::ReverseChain, a),
        Cmd::ReverseChannel(a) => (Command::ReverseChannel, a),
        Cmd::CheckAdjointness(a) => (Command::CheckAdjointness, a),
        Cmd::HTheorem(a) => (Command::HTheorem, a),
        Cmd::Entropies(a) => (Command::Entropies, a),
        Cmd::Jensen(a) => (Command::Jensen, a),
        Cmd::PathWeights(a) => (Command::PathWeights, a),
        Cmd::VerifyMaxEntropy(a) => (Command::VerifyMaxEntropy, a),
        Cmd::PropertySuite(a) => {
            let scenario = a.scenario.as_ref().map(|p| load_scenario(p, env_base)).transpose()?;
            let base = scenario.as_ref().map_or(env_base, |s| s.tolerances_over(env_base));
            let tol = resolve_tolerances(base, a.tol_override.as_ref())?;
            let seed = a.seed.or(scenario.as_ref().and_then(|s| s.seed)).unwrap_or(0);
            if a.trials == 0 {
                return Err(CliError::Usage("--trials must be positive".into()));
            }
            let size = SuiteSize { large: a.trials, medium: (a.trials * 2).div_ceil(5), small: a.trials.div_ceil(25) };
            let summary = scenario.map_or(serde_json::Value::Null, |s| serde_json::json!({ "kind": s.kind().name() }));
            return emit(&property_suite(seed, size, &tol, summary), a.out.as_ref());
        }
        Cmd::Generate(a) => {
            let scenario = generate_random_scenario(&a.kind, a.dim, a.steps, a.seed)?;
            let text = scenario.to_json();
            match &a.out {
                Some(p) => write_text(p, &text)?,
                None => print!("{text}"),
            }
            return Ok(true);
        }
    };
    analysis(command, &args, env_base)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
