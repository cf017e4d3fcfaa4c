use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use multikink::profiles::multikink::Parity;
use multikink_cli::config::{self, Scenario, StabilityParams};
use multikink_cli::report::{emit_report, Artifacts};
use multikink_cli::scenarios::{run, Overrides};
use multikink_cli::{exit, CliError};

#[derive(Debug, Parser)]
#[command(name = "multikink", version, about = "Multi-kink numerical laboratory")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    global: Global,
}

#[derive(Debug, Args)]
struct Global {
    /// JSON scenario file; its kind must match the subcommand.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Directory for summaries and artifacts (one subdirectory per scenario).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Grid size override.
    #[arg(long, global = true)]
    grid: Option<usize>,
    #[arg(long, global = true)]
    dt: Option<f64>,
    #[arg(long, global = true)]
    horizon: Option<f64>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ParityArg {
    Even,
    Odd,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Closed-form soliton identities against quadrature.
    Identities,
    /// Commuting transform diagram, checked along numerical flows.
    Transforms,
    /// Solver translation, conservation and temporal order.
    Solver,
    /// Perturbed multi-kink runs with modulation tracking.
    Stability {
        #[arg(long, value_enum)]
        parity: ParityArg,
    },
    /// Energy expansion and interaction decay of the modulation decomposition.
    Modulation,
    /// Soliton collisions for a pure-power and a Gardner derived equation.
    Collision,
    /// Smallest eigenvalues of localized quadratic forms.
    Coercivity,
    /// Runs the scenario named in --config.
    Run,
    /// Prints the summaries found in --out.
    Report,
}

fn scenario_for(command: &Command, file: Option<Scenario>) -> Result<Scenario, CliError> {
    let default = match command {
        Command::Identities => Scenario::Identities(Default::default()),
        Command::Transforms => Scenario::TransformCheck(Default::default()),
        Command::Solver => Scenario::Solver(Default::default()),
        Command::Stability { parity: ParityArg::Even } => Scenario::EvenStability(StabilityParams::for_parity(Parity::Even)),
        Command::Stability { parity: ParityArg::Odd } => Scenario::OddStability(StabilityParams::for_parity(Parity::Odd)),
        Command::Modulation => Scenario::Modulation(Default::default()),
        Command::Collision => Scenario::Collision(Default::default()),
        Command::Coercivity => Scenario::Coercivity(Default::default()),
        Command::Run => return file.ok_or_else(|| CliError::Config("`run` needs --config".into())),
        Command::Report => unreachable!("handled separately"),
    };
    match file {
        None => Ok(default),
        Some(s) if s.kind() == default.kind() => Ok(s),
        Some(s) => Err(CliError::Config(format!(
            "scenario file is of kind `{}` but the subcommand runs `{}`",
            s.kind(),
            default.kind()
        ))),
    }
}

fn execute(cli: Cli) -> Result<bool, CliError> {
    let g = &cli.global;
    if let Command::Report = cli.command {
        let dir = g.out.as_ref().ok_or_else(|| CliError::Config("`report` needs --out".into()))?;
        let (text, ok) = emit_report(dir)?;
        print!("{text}");
        return Ok(ok);
    }
    let file = g.config.as_deref().map(config::load).transpose()?.map(|f| f.scenario);
    let mut scenario = scenario_for(&cli.command, file)?;
    Overrides { seed: g.seed, grid_n: g.grid, dt: g.dt, horizon: g.horizon }.apply(&mut scenario);
    let artifacts = Artifacts::new(g.out.as_ref().map(|d| d.join(scenario.kind())))?;
    let report = run(&scenario, &artifacts)?;
    print!("{}", report.render());
    Ok(report.passed())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let code = match execute(cli) {
        Ok(true) => exit::PASS,
        Ok(false) => exit::ACCEPTANCE,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    };
    ExitCode::from(code as u8)
}
