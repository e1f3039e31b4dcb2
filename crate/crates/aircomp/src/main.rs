use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use aircomp::harness::{self, SweepConfig};
use aircomp::io::{self, CandidateJson, FeasibilityRow, InstanceFile, OrthogonalJson};
use aircomp_core::orthogonal::assign_and_solve;
use aircomp_core::{is_feasible, solve_two_sum, Error, Instance};
use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};
use serde::Serialize;

#[derive(Parser)]
#[command(name = "aircomp", version, about = "Robust Tx-Rx scaling for over-the-air computation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one instance and print the policy as JSON.
    Solve {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print the feasibility thresholds of a two-sum instance as CSV.
    Feas {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Feasible/infeasible counts per SNR.
    FeasSweep(SweepArgs),
    /// Frequencies of the optimal cardinality pair per SNR.
    CardHist(SweepArgs),
    /// Normalized average worst-case MSE per SNR.
    MseSweep(SweepArgs),
    /// Robust policy against all sensors at full power.
    Benchmark(SweepArgs),
}

#[derive(Args)]
struct SweepArgs {
    /// Total sensors; `--d2` defaults to `k − d1`.
    #[arg(long)]
    k: Option<usize>,
    /// Size of the first group, sensors `1..=d1`.
    #[arg(long)]
    d1: usize,
    /// Size of the second group.
    #[arg(long)]
    d2: Option<usize>,
    /// Comma-separated list, e.g. `-5,0,5`.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
    snr_db: Vec<f64>,
    #[arg(long, default_value_t = 7500)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1.0)]
    sigma_h2: f64,
    #[arg(long, default_value_t = 1.0)]
    sigma2: f64,
    /// Reuse each trial's channel draw across SNR points.
    #[arg(long)]
    paired: bool,
    /// CSV destination; stdout if omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write a gnuplot script for the CSV given by `--out`.
    #[arg(long, requires = "out")]
    gnuplot: Option<PathBuf>,
}

impl SweepArgs {
    fn config(&self) -> anyhow::Result<SweepConfig> {
        let d2 = match (self.k, self.d2) {
            (_, Some(d2)) => d2,
            (Some(k), None) => k.checked_sub(self.d1).context("--d1 exceeds --k")?,
            (None, None) => bail!("give --d2 or --k"),
        };
        let config = SweepConfig {
            k: self.k.unwrap_or(self.d1 + d2),
            d1: self.d1,
            d2,
            snr_db: self.snr_db.clone(),
            sigma2: self.sigma2,
            sigma_h2: self.sigma_h2,
            trials: self.trials,
            base_seed: self.seed,
            paired: self.paired,
        };
        config.validate()?;
        Ok(config)
    }
}

fn emit(out: Option<&PathBuf>, text: &str) -> anyhow::Result<()> {
    match out {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            std::io::stdout().write_all(text.as_bytes())?;
            Ok(())
        }
    }
}

fn read_instance(path: &PathBuf) -> anyhow::Result<Instance> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(InstanceFile::parse(&text)?.to_instance()?)
}

fn json<T: Serialize>(v: &T) -> anyhow::Result<String> {
    Ok(serde_json::to_string_pretty(v)? + "\n")
}

fn solve(instance: &Instance, out: Option<&PathBuf>) -> anyhow::Result<ExitCode> {
    let result = if instance.groups.count() == 2 {
        solve_two_sum(instance).map(|c| json(&CandidateJson::from(&c)))
    } else {
        let solver = |i: &Instance| solve_two_sum(i).map(|c| c.b);
        assign_and_solve(instance, &solver).map(|s| json(&OrthogonalJson::from(&s)))
    };
    match result {
        Ok(text) => {
            emit(out, &text?)?;
            Ok(ExitCode::SUCCESS)
        }
        Err(e @ (Error::Infeasible | Error::InfeasibleChain(_))) => {
            eprintln!("infeasible: {e}");
            Ok(ExitCode::from(2))
        }
        Err(e) => Err(e.into()),
    }
}

fn sweep<R: Serialize>(
    args: &SweepArgs,
    run: fn(&SweepConfig) -> Vec<R>,
    title: &str,
    ylabel: &str,
    y: usize,
) -> anyhow::Result<ExitCode> {
    let config = args.config()?;
    let rows = run(&config);
    emit(args.out.as_ref(), &io::csv_string(&rows)?)?;
    if let (Some(script), Some(csv)) = (&args.gnuplot, &args.out) {
        let title = format!("{title}, (|D1|,|D2|) = ({},{})", config.d1, config.d2);
        fs::write(script, io::gnuplot_script(&csv.display().to_string(), &title, ylabel, y))?;
    }
    Ok(ExitCode::SUCCESS)
}

fn run(cli: Cli) -> anyhow::Result<ExitCode> {
    match cli.command {
        Command::Solve { instance, out } => solve(&read_instance(&instance)?, out.as_ref()),
        Command::Feas { instance, out } => {
            let report = is_feasible(&read_instance(&instance)?)?;
            emit(out.as_ref(), &io::csv_string(&[FeasibilityRow::from(&report)])?)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::FeasSweep(a) => sweep(&a, harness::feasibility_sweep, "Feasible realizations", "count", 2),
        Command::CardHist(a) => sweep(&a, harness::cardinality_histogram, "Cardinality frequencies", "frequency", 5),
        Command::MseSweep(a) => sweep(&a, harness::mse_sweep, "Normalized average MSE", "E[MSE]/max|D_m|", 5),
        Command::Benchmark(a) => sweep(&a, harness::benchmark, "Relative gain over full power", "gain", 5),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
