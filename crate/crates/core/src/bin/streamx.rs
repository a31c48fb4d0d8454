use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use streamx::channel::{load_channel, summarize, DEFAULT_TOL};
use streamx::codec::{Simulator, StreamingConfig};
use streamx::experiments::{run_sweep, Schedule, SweepOptions};
use streamx::exponents::{auxiliary_channel, haroutunian_exponent, sphere_packing_exponent, RatePoint};
use streamx::oracle::{exact_feedforward_map_error, exact_streaming_error, TinyInstance};
use streamx::typicality::{sample_coverage, TypicalityParams};

#[derive(Parser)]
#[command(name = "streamx", version, about = "Streaming channel coding toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Capacity, capacity-achieving input, dispersion and output symmetry.
    Info {
        /// Builtin spec (bsc:p, bec:e, zchan:q, identity:k) or JSON file.
        #[arg(long)]
        channel: String,
        #[arg(long, default_value_t = DEFAULT_TOL)]
        tol: f64,
    },
    /// Sphere-packing or Haroutunian exponent at a rate, in bits.
    Exponent {
        #[arg(long)]
        channel: String,
        #[arg(long, value_enum)]
        kind: ExponentKind,
        #[arg(long)]
        rate: f64,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
    },
    /// Monte Carlo error rates of a streaming code; prints the summary CSV.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value_t = 10_000)]
        trials: u64,
        /// Write one JSON line per trial.
        #[arg(long)]
        records: Option<PathBuf>,
    },
    /// Exact error probabilities of a tiny instance by enumeration.
    Oracle {
        #[arg(long)]
        instance: PathBuf,
        /// Also compute the genie-aided MAP errors (full and windowed).
        #[arg(long)]
        map: bool,
    },
    /// Empirical coverage of the conditional typical set and the
    /// likelihood-ratio floor for a constant input sequence.
    Typicality {
        /// Channel generating the outputs.
        #[arg(long)]
        v: String,
        /// Reference channel of the likelihood-ratio floor.
        #[arg(long)]
        w: String,
        #[arg(long)]
        length: usize,
        /// Input symbol repeated over the whole sequence.
        #[arg(long, default_value_t = 0)]
        symbol: usize,
        #[arg(long, default_value_t = 0.1)]
        gamma1: f64,
        #[arg(long, default_value_t = 0.1)]
        gamma2: f64,
        #[arg(long, default_value_t = 10_000)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Resumable sweep over block lengths and delays, written as CSV.
    Sweep {
        #[arg(long)]
        schedule: PathBuf,
        #[arg(long)]
        resume: bool,
        /// Also write a .dat file with (n^(1-2t), -log2 eps) columns.
        #[arg(long)]
        gnuplot: bool,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum ExponentKind {
    Sp,
    Haroutunian,
    Aux,
}

fn print_json<T: Serialize>(value: &T) -> Result<()> {
    let mut out = std::io::stdout().lock();
    serde_json::to_writer_pretty(&mut out, value)?;
    writeln!(out)?;
    Ok(())
}

fn read_json<T: serde::de::DeserializeOwned>(path: &PathBuf) -> Result<T> {
    let text = std::fs::read_to_string(path).map_err(streamx::Error::from).with_context(|| format!("reading {}", path.display()))?;
    Ok(serde_json::from_str(&text).map_err(streamx::Error::from).with_context(|| format!("parsing {}", path.display()))?)
}

#[derive(Serialize)]
struct OracleReport {
    threshold: streamx::oracle::ExactErrors,
    #[serde(skip_serializing_if = "Option::is_none")]
    map_full: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    map_window: Option<Vec<f64>>,
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Info { channel, tol } => {
            let w = load_channel(&channel)?;
            print_json(&summarize(&w, tol)?)
        }
        Command::Exponent { channel, kind, rate, tol } => {
            let w = load_channel(&channel)?;
            let r = RatePoint::new(rate)?;
            let res = match kind {
                ExponentKind::Sp => sphere_packing_exponent(&w, r, tol)?,
                ExponentKind::Haroutunian => haroutunian_exponent(&w, r, tol)?,
                ExponentKind::Aux => auxiliary_channel(&w, r, tol)?,
            };
            print_json(&res)
        }
        Command::Simulate { config, trials, records } => {
            let cfg: StreamingConfig = read_json(&config)?;
            let sim = Simulator::new(cfg)?;
            let est = match records {
                Some(path) => {
                    let mut out = BufWriter::new(File::create(&path).map_err(streamx::Error::from)?);
                    let est = sim.estimate_errors(trials, Some(&mut out))?;
                    out.flush().map_err(streamx::Error::from)?;
                    est
                }
                None => sim.estimate_errors(trials, None)?,
            };
            est.write_csv(std::io::stdout().lock())?;
            eprintln!(
                "max over k: k = {}, eps_hat = {}, 95% CI [{}, {}]",
                est.max.k, est.max.eps_hat, est.max.ci.lo, est.max.ci.hi
            );
            Ok(())
        }
        Command::Oracle { instance, map } => {
            let inst: TinyInstance = read_json(&instance)?;
            let threshold = exact_streaming_error(&inst)?;
            let (mut map_full, mut map_window) = (None, None);
            if map {
                let s = inst.config().streams;
                map_full = Some((1..=s).map(|k| exact_feedforward_map_error(&inst, k, false)).collect::<Result<_, _>>()?);
                map_window = Some((1..=s).map(|k| exact_feedforward_map_error(&inst, k, true)).collect::<Result<_, _>>()?);
            }
            print_json(&OracleReport { threshold, map_full, map_window })
        }
        Command::Typicality { v, w, length, symbol, gamma1, gamma2, samples, seed } => {
            let v = load_channel(&v)?;
            let w = load_channel(&w)?;
            let params = TypicalityParams::new(gamma1, gamma2)?;
            let x = vec![symbol; length];
            print_json(&sample_coverage(&x, &v, &w, &params, samples, seed)?)
        }
        Command::Sweep { schedule, resume, gnuplot } => {
            let sched: Schedule = read_json(&schedule)?;
            if sched.outside_converse_range() {
                eprintln!("note: t = {} >= 1/3 lies outside the converse range", sched.t);
            }
            let report = run_sweep(&sched, SweepOptions { resume, gnuplot })?;
            eprintln!(
                "{} points computed, {} reused, {} failed; output {}",
                report.computed,
                report.skipped,
                report.failures.len(),
                sched.output.display()
            );
            for f in &report.failures {
                eprintln!("point n = {}, T = {} failed: {}", f.n, f.delay, f.message);
            }
            if let Some(code) = report.failures.iter().map(|f| f.code).max() {
                anyhow::bail!(streamx::Error::PointFailures { count: report.failures.len(), code });
            }
            Ok(())
        }
    }
}

fn configure_threads() -> Result<()> {
    if let Ok(v) = std::env::var("STREAMX_THREADS") {
        let n: usize = v.parse().with_context(|| format!("STREAMX_THREADS={v:?} is not a thread count"))?;
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    Ok(())
}

fn exit_code(err: &anyhow::Error) -> u8 {
    err.chain()
        .find_map(|e| e.downcast_ref::<streamx::Error>())
        .map(|e| e.exit_code() as u8)
        .unwrap_or(2)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match configure_threads().and_then(|_| run(cli)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
