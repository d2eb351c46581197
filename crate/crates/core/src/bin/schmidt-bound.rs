use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};

use schmidt_bound::bounds::{
    analyze, AnalysisConfig, EngineChoice, SchmidtBoundReport, SideChoice,
};
use schmidt_bound::fixtures::{format_table, run_fixtures};
use schmidt_bound::io::{load_state, report_to_json, Timing};
use schmidt_bound::linalg::ToleranceConfig;
use schmidt_bound::mc::mc_theorem2;
use schmidt_bound::numeric::OptimizerConfig;
use schmidt_bound::state::schmidt_decomposition;
use schmidt_bound::Error;

#[derive(Parser)]
#[command(
    name = "schmidt-bound",
    version,
    about = "Schmidt-number lower bounds for bipartite mixed states"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Analyze a state file and write a report.
    Analyze {
        path: PathBuf,
        #[command(flatten)]
        opts: EngineOpts,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print the Schmidt rank and coefficients of a pure state.
    SchmidtRank { path: PathBuf },
    /// Compare random states against the generic prediction.
    #[command(name = "mc-theorem2")]
    McTheorem2 {
        #[arg(long)]
        m: usize,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        rank: usize,
        #[arg(long, default_value_t = 200)]
        samples: usize,
        #[command(flatten)]
        opts: EngineOpts,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the built-in fixtures and print expected against obtained.
    Examples {
        #[arg(long)]
        only: Option<String>,
        #[command(flatten)]
        opts: EngineOpts,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum EngineArg {
    Auto,
    Numeric,
    Symbolic,
}

#[derive(Clone, Copy, ValueEnum)]
enum SideArg {
    A,
    B,
    Both,
}

#[derive(Args)]
struct EngineOpts {
    #[arg(long, value_enum, default_value = "auto")]
    engine: EngineArg,
    #[arg(long, default_value_t = OptimizerConfig::default().num_starts)]
    starts: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = OptimizerConfig::default().witness_tol)]
    witness_tol: f64,
    #[arg(long, default_value_t = OptimizerConfig::default().evidence_tol)]
    evidence_tol: f64,
    #[arg(long, value_enum, default_value = "both")]
    side: SideArg,
}

impl EngineOpts {
    fn config(&self) -> AnalysisConfig {
        AnalysisConfig {
            engine: match self.engine {
                EngineArg::Auto => EngineChoice::Auto,
                EngineArg::Numeric => EngineChoice::Numeric,
                EngineArg::Symbolic => EngineChoice::Symbolic,
            },
            side: match self.side {
                SideArg::A => SideChoice::A,
                SideArg::B => SideChoice::B,
                SideArg::Both => SideChoice::Both,
            },
            optimizer: OptimizerConfig {
                num_starts: self.starts,
                seed: self.seed,
                witness_tol: self.witness_tol,
                evidence_tol: self.evidence_tol,
                ..OptimizerConfig::default()
            },
            tolerances: ToleranceConfig::default(),
        }
    }
}

fn emit(text: &str, out: Option<&Path>) -> Result<(), Error> {
    match out {
        Some(p) => std::fs::write(p, format!("{text}\n"))?,
        None => println!("{text}"),
    }
    Ok(())
}

fn summary(r: &SchmidtBoundReport) -> String {
    format!(
        "schmidt number >= {} (side {}, level {}, {:?}); entangled: {}; ppt: {} (min eigenvalue {:.3e})",
        r.schmidt_lower_bound,
        r.provenance.side.label(),
        r.provenance.level,
        r.certification,
        r.entangled,
        r.ppt.is_ppt,
        r.ppt.min_eigenvalue,
    )
}

fn run(cli: Cli) -> Result<ExitCode, Error> {
    match cli.command {
        Command::Analyze { path, opts, out } => {
            let cfg = opts.config();
            let start = Instant::now();
            let input = load_state(&path, &cfg.tolerances)?.into_analysis_input(&cfg.tolerances)?;
            let report = analyze(&input, &cfg)?;
            let timing = Timing {
                wall_seconds: start.elapsed().as_secs_f64(),
            };
            emit(&report_to_json(&report, Some(timing))?, out.as_deref())?;
            if out.is_some() {
                println!("{}", summary(&report));
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::SchmidtRank { path } => {
            let tol = ToleranceConfig::default();
            let v = load_state(&path, &tol)?.pure_state(&tol)?;
            let sd = schmidt_decomposition(&v, &tol);
            let coeffs: Vec<String> = sd.coefficients.iter().map(|c| format!("{c:.6}")).collect();
            println!("schmidt rank: {}", sd.rank());
            println!("coefficients: {}", coeffs.join(" "));
            Ok(ExitCode::SUCCESS)
        }
        Command::McTheorem2 {
            m,
            n,
            rank,
            samples,
            opts,
            out,
        } => {
            let cfg = opts.config();
            let start = Instant::now();
            let stats = mc_theorem2(m, n, rank, samples, opts.seed, &cfg)?;
            let timing = Timing {
                wall_seconds: start.elapsed().as_secs_f64(),
            };
            emit(&report_to_json(&stats, Some(timing))?, out.as_deref())?;
            if out.is_some() {
                println!(
                    "{samples} samples: predicted bound {}, fraction reaching it {:.3}, fraction reaching predicted levels {:.3}",
                    stats.prediction.bound, stats.fraction_bound_at_least_predicted, stats.fraction_level_at_least_predicted
                );
            }
            for f in stats.failures() {
                eprintln!(
                    "sample {} (seed {}): bound {} below prediction",
                    f.index, f.seed, f.bound
                );
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Examples { only, opts } => {
            let outcomes = run_fixtures(only.as_deref(), &opts.config())?;
            print!("{}", format_table(&outcomes));
            Ok(if outcomes.iter().all(|o| o.pass) {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            })
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
