use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Parser, Subcommand};
use fpfn_cli::output::Table;
use fpfn_cli::verify::Verdict;
use fpfn_cli::{equilibrium, exit, invest, sweep, verify, welfare, ConfigError, ScenarioConfig};

#[derive(Parser)]
#[command(name = "duopoly", version, about = "Price competition between classifiers with different error rates")]
struct Cli {
    /// Scenario file (TOML).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory for CSV files; overrides `[run] out`.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Seed for random verification instances; overrides `[run] seed`.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Equilibrium prices, shares, revenues and welfare for the scenario.
    Equilibrium,
    /// Equilibria for zeta = 0, 0.01, ..., 1.
    SweepZeta,
    /// Optimal investment (split markets) or entry analysis (strict markets).
    Invest,
    /// Welfare at equilibrium and after small unilateral improvements.
    Welfare,
    /// Compare closed forms with the brute-force grid oracle.
    Verify,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(classify(&e))
        }
    }
}

fn classify(e: &anyhow::Error) -> u8 {
    if e.chain().any(|c| c.is::<fpfn_market::Error>()) {
        exit::SOLVER
    } else {
        exit::VALIDATION
    }
}

fn emit(table: &Table, dir: &std::path::Path, name: &str, summary: &str) -> Result<()> {
    print!("{summary}");
    let path = table.write(dir, name)?;
    println!("wrote        {}", path.display());
    Ok(())
}

fn run(cli: Cli) -> Result<u8> {
    let Some(path) = cli.config.as_deref() else {
        return Err(ConfigError {
            path: "<args>".into(),
            line: 0,
            message: "--config <path> is required".into(),
        }
        .into());
    };
    let mut cfg = ScenarioConfig::load(path)?;
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    let out = cli.out.or_else(|| cfg.out.clone()).unwrap_or_else(|| PathBuf::from("out"));

    match cli.command {
        Command::Equilibrium => {
            let r = equilibrium::run_scenario(&cfg)?;
            emit(&r.table(), &out, "equilibrium.csv", &r.summary())?;
        }
        Command::SweepZeta => {
            let s = sweep::sweep_zeta(&cfg).map_err(|e| match e.downcast::<fpfn_market::Error>() {
                Ok(e) => anyhow::Error::from(e),
                Err(e) => anyhow::Error::from(ConfigError {
                    path: path.display().to_string(),
                    line: 0,
                    message: e.to_string(),
                }),
            })?;
            if s.concavity.flagged_rows > 0 {
                eprintln!("warning: {} zeta values did not solve", s.concavity.flagged_rows);
            }
            emit(&s.table(), &out, "sweep_zeta.csv", &s.summary())?;
        }
        Command::Invest => {
            let r = invest::run_invest(&cfg)?;
            emit(&r.table(), &out, r.file_name(), &r.summary())?;
        }
        Command::Welfare => {
            let rows = welfare::run_welfare(&cfg)?;
            emit(&welfare::table(&rows), &out, "welfare.csv", &welfare::summary(&rows))?;
        }
        Command::Verify => {
            let r = verify::run_verify(&cfg)?;
            emit(&r.table(), &out, "verify.csv", &r.summary())?;
            if r.verdict() != Verdict::Pass {
                return Ok(exit::VERIFY_FAILED);
            }
        }
    }
    Ok(exit::OK)
}
