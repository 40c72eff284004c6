use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use hpdecode::harness::{
    figure_data, haar_check, run_ensemble, sweep_rows, verify, write_table, FigureOverrides,
    ModelKind, OutputFormat, Row, SweepConfig, Tier, UTildeChoice, DEFAULT_SAMPLES, DEFAULT_SEED,
};
use hpdecode::Error;

/// Environment variable holding the worker thread count.
const THREADS_ENV: &str = "HPDECODE_THREADS";

#[derive(Parser)]
#[command(name = "hpdecode", version, about = "Hayden-Preskill decoding under noisy early radiation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Monte-Carlo ensemble over a grid of partitions and error probabilities.
    Sweep {
        #[arg(long, default_value_t = 6)]
        n: usize,
        /// Inclusive range such as `1-3`, or a single value.
        #[arg(long, default_value = "1", value_parser = parse_range)]
        na_range: (usize, usize),
        #[arg(long, default_value = "1", value_parser = parse_range)]
        nd_range: (usize, usize),
        #[arg(long, default_value = "ideal")]
        model: ModelKind,
        /// Comma-separated error probabilities.
        #[arg(long, default_value = "0", value_parser = parse_grid)]
        p_grid: PGrid,
        #[arg(long, default_value_t = DEFAULT_SAMPLES)]
        samples: usize,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        /// `independent`, or `perturbed:EPS` for the unitary factor of `U + EPS G`.
        #[arg(long, default_value = "independent", value_parser = parse_u_tilde)]
        u_tilde: UTildeChoice,
        #[command(flatten)]
        output: Output,
    },
    /// Analytic data behind one of the four figures.
    Figure {
        #[arg(long, value_parser = clap::value_parser!(u8).range(1..=4))]
        id: u8,
        #[arg(long)]
        n: Option<usize>,
        /// Message size for figures 2 and 4.
        #[arg(long)]
        na: Option<usize>,
        #[arg(long, value_parser = parse_grid)]
        p_grid: Option<PGrid>,
        #[command(flatten)]
        output: Output,
    },
    /// Cross-checks between the contraction engine, oracle and closed forms.
    Verify {
        #[arg(long, default_value = "fast")]
        tier: Tier,
    },
    /// Monte-Carlo moments of the Haar sampler.
    HaarCheck {
        #[arg(long, default_value_t = 4)]
        dim: usize,
        #[arg(long, default_value_t = 100_000)]
        samples: usize,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
    },
}

#[derive(clap::Args)]
struct Output {
    /// Output file; standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, default_value = "csv")]
    format: OutputFormat,
}

fn parse_range(s: &str) -> Result<(usize, usize), String> {
    let parse = |t: &str| t.trim().parse::<usize>().map_err(|e| format!("{t:?}: {e}"));
    match s.split_once('-') {
        Some((lo, hi)) => Ok((parse(lo)?, parse(hi)?)),
        None => parse(s).map(|v| (v, v)),
    }
}

/// Comma-separated list, kept as one clap value.
#[derive(Clone)]
struct PGrid(Vec<f64>);

fn parse_grid(s: &str) -> Result<PGrid, String> {
    s.split(',')
        .map(|t| t.trim().parse::<f64>().map_err(|e| format!("{t:?}: {e}")))
        .collect::<Result<_, _>>()
        .map(PGrid)
}

fn parse_u_tilde(s: &str) -> Result<UTildeChoice, String> {
    match s.split_once(':') {
        None if s == "independent" => Ok(UTildeChoice::Independent),
        Some(("perturbed", eps)) => eps
            .parse()
            .map(|epsilon| UTildeChoice::Perturbed { epsilon })
            .map_err(|e| format!("{eps:?}: {e}")),
        _ => Err(format!("expected `independent` or `perturbed:EPS`, got {s:?}")),
    }
}

fn emit(rows: &[Row], output: &Output) -> hpdecode::Result<()> {
    match &output.out {
        Some(path) => {
            let mut w = BufWriter::new(File::create(path)?);
            write_table(rows, output.format, &mut w)?;
            w.flush()?;
        }
        None => write_table(rows, output.format, io::stdout().lock())?,
    }
    Ok(())
}

fn print_json<T: serde::Serialize>(value: &T) -> hpdecode::Result<()> {
    let mut out = io::stdout().lock();
    serde_json::to_writer_pretty(&mut out, value)?;
    writeln!(out)?;
    Ok(())
}

fn init_threads() -> Result<(), String> {
    let Ok(raw) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let n: usize = raw
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| format!("{THREADS_ENV} must be a positive integer, got {raw:?}"))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| e.to_string())
}

/// Ok(true) on success, Ok(false) when a verification step failed.
fn run(cli: Cli) -> hpdecode::Result<bool> {
    match cli.command {
        Command::Sweep {
            n,
            na_range,
            nd_range,
            model,
            p_grid,
            samples,
            seed,
            u_tilde,
            output,
        } => {
            let cfg = SweepConfig {
                n,
                na_range,
                nd_range,
                model,
                p_grid: p_grid.0,
                samples,
                seed,
                u_tilde,
            };
            let points = run_ensemble(&cfg)?;
            emit(&sweep_rows(&cfg, &points), &output)?;
            Ok(true)
        }
        Command::Figure {
            id,
            n,
            na,
            p_grid,
            output,
        } => {
            let rows = figure_data(id, &FigureOverrides {
                n,
                n_a: na,
                p_grid: p_grid.map(|g| g.0),
            })?;
            emit(&rows, &output)?;
            Ok(true)
        }
        Command::Verify { tier } => {
            let report = verify(tier);
            print_json(&report)?;
            Ok(report.passed)
        }
        Command::HaarCheck { dim, samples, seed } => {
            let report = haar_check(dim, samples, seed)?;
            print_json(&report)?;
            Ok(report.passed)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(e) = init_threads() {
        eprintln!("hpdecode: {e}");
        return ExitCode::from(2);
    }
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(Error::Io(e)) if e.kind() == io::ErrorKind::BrokenPipe => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("hpdecode: {e}");
            match e {
                Error::Config(_) | Error::InvalidArgument(_) | Error::Io(_) | Error::Csv(_) => {
                    ExitCode::from(2)
                }
                _ => ExitCode::from(1),
            }
        }
    }
}
