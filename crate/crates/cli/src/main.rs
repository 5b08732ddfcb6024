use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use dyn_chamfer::harness::{
    self, desk_cloud, gaussian_clusters, measure_latency, summarize, Algorithm, DataFormat, DatasetSource,
    ExperimentConfig, LatencyConfig, Mode, PreparedData, RawPoints,
};
use dyn_chamfer::par::Execution;
use dyn_chamfer::verify::{self, Fault, VerifyOptions};
use dyn_chamfer::Error;

const EXIT_USAGE: u8 = 1;
const EXIT_DATA: u8 = 2;
const EXIT_PROPERTY: u8 = 3;

#[derive(Parser, Debug)]
#[command(name = "dyn-chamfer", version, about = "Dynamic Chamfer distance estimation experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Replay a sliding window and write per-report error and timing rows as CSV.
    Run(RunArgs),
    /// Run the randomized property suites.
    Verify(VerifyArgs),
    /// Measure mean update and query latency per algorithm.
    Bench(BenchArgs),
}

#[derive(Args, Debug)]
struct DataArgs {
    /// Point set A.
    #[arg(long)]
    a: Option<PathBuf>,
    /// Point set B, replayed as the window stream.
    #[arg(long)]
    b: Option<PathBuf>,
    #[arg(long, default_value = "csv")]
    format: DataFormat,
}

#[derive(Args, Debug)]
struct RunArgs {
    #[command(flatten)]
    data: DataArgs,
    #[arg(long, default_value_t = 100)]
    window: usize,
    #[arg(long, default_value_t = 150)]
    samples: usize,
    #[arg(long, default_value_t = 0.2)]
    eps: f64,
    #[arg(long, default_value_t = 0.0)]
    alpha: f64,
    /// Independent estimates per query; the median is reported. Must be odd.
    #[arg(long, default_value_t = 1)]
    boost: usize,
    /// Comma-separated seeds, one run each. CHAMFER_SEED overrides.
    #[arg(long, value_delimiter = ',', default_value = "1,2,3,4,5")]
    seeds: Vec<u64>,
    /// Append a far outlier to A before quantization.
    #[arg(long)]
    outlier: bool,
    /// `b`: slide over B only; `ab`: slide over an interleaving of A and B.
    #[arg(long, default_value = "b")]
    mode: Mode,
    /// Interleaving in ab mode as `A:B`, e.g. `6:1`. Defaults to the size ratio.
    #[arg(long, value_parser = parse_ratio)]
    ab_ratio: Option<(usize, usize)>,
    #[arg(long, value_delimiter = ',', default_value = "ours,uniform,benchmark")]
    algos: Vec<Algorithm>,
    /// Window updates between report rows (default window/4).
    #[arg(long)]
    report_every: Option<usize>,
    /// Stop after this many window updates.
    #[arg(long)]
    max_steps: Option<usize>,
    /// Grid extent, a power of two.
    #[arg(long, default_value_t = dyn_chamfer::geometry::DEFAULT_EXTENT)]
    extent: i64,
    /// Report the sample mean divided by 1 + eps/2.
    #[arg(long)]
    apply_shift: bool,
    /// Run seeds one after another instead of in parallel.
    #[arg(long)]
    sequential: bool,
    /// Output CSV path; standard output if absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    /// Reduced trial counts.
    #[arg(long)]
    quick: bool,
    #[arg(long, default_value_t = 0x5eed)]
    seed: u64,
    #[arg(long, hide = true)]
    inject_fault: Option<String>,
}

#[derive(Args, Debug)]
struct BenchArgs {
    #[command(flatten)]
    data: DataArgs,
    /// Window size; defaults to min(100, |B|).
    #[arg(long)]
    window: Option<usize>,
    /// Timed window updates; defaults to everything the stream allows, at most 1000.
    #[arg(long)]
    updates: Option<usize>,
    #[arg(long, default_value_t = 150)]
    samples: usize,
    #[arg(long, default_value_t = 0.2)]
    eps: f64,
    #[arg(long, default_value_t = 10)]
    queries: usize,
    #[arg(long, value_delimiter = ',', default_value = "ours,uniform,benchmark")]
    algos: Vec<Algorithm>,
    #[arg(long, value_delimiter = ',', default_value = "1")]
    seeds: Vec<u64>,
    /// Size of the synthetic A when no files are given.
    #[arg(long, default_value_t = 50_000)]
    size: usize,
    /// Dimension of the synthetic data: 3 gives a desk scan, anything else Gaussian clusters.
    #[arg(long, default_value_t = 3)]
    dim: usize,
    #[arg(long)]
    outlier: bool,
    /// CSV output path; printed after the table if absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn parse_ratio(s: &str) -> Result<(usize, usize), String> {
    let (a, b) = s.split_once(':').ok_or_else(|| format!("expected A:B, got {s:?}"))?;
    let a = a.trim().parse().map_err(|_| format!("bad ratio entry {a:?}"))?;
    let b = b.trim().parse().map_err(|_| format!("bad ratio entry {b:?}"))?;
    Ok((a, b))
}

/// A failure together with the exit code it maps to.
struct Failure(u8, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::InvalidParam(_) => EXIT_USAGE,
            _ => EXIT_DATA,
        };
        Failure(code, e.to_string())
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure(EXIT_DATA, e.to_string())
    }
}

fn seeds_from_env(flag: Vec<u64>) -> Result<Vec<u64>, Failure> {
    match std::env::var("CHAMFER_SEED") {
        Ok(v) => v
            .split(',')
            .map(|s| s.trim().parse::<u64>())
            .collect::<Result<Vec<_>, _>>()
            .map_err(|_| Failure(EXIT_USAGE, format!("CHAMFER_SEED={v:?} is not a list of integers"))),
        Err(_) => Ok(flag),
    }
}

fn open_out(path: &Option<PathBuf>) -> Result<Box<dyn Write>, Failure> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).map_err(|e| Failure(EXIT_DATA, format!("{}: {e}", p.display())))?,
        )),
        None => Box::new(io::stdout().lock()),
    })
}

fn load(data: &DataArgs) -> Result<Option<(RawPoints, RawPoints)>, Failure> {
    match (&data.a, &data.b) {
        (Some(a), Some(b)) => Ok(Some(DatasetSource { a: a.clone(), b: b.clone(), format: data.format }.load()?)),
        (None, None) => Ok(None),
        _ => Err(Failure(EXIT_USAGE, "--a and --b must be given together".into())),
    }
}

fn cmd_run(args: RunArgs) -> Result<(), Failure> {
    let (a, b) = load(&args.data)?.ok_or_else(|| Failure(EXIT_USAGE, "run needs --a and --b".into()))?;
    let cfg = ExperimentConfig {
        window: args.window,
        samples: args.samples,
        eps: args.eps,
        alpha: args.alpha,
        boost_reps: args.boost,
        seeds: seeds_from_env(args.seeds)?,
        report_every: args.report_every,
        outlier: args.outlier,
        mode: args.mode,
        ab_ratio: args.ab_ratio,
        algorithms: args.algos,
        extent: args.extent,
        oracle: Default::default(),
        apply_shift: args.apply_shift,
        max_steps: args.max_steps,
        exec: if args.sequential { Execution::Sequential } else { Execution::Parallel },
    };
    cfg.validate()?;
    let data = harness::prepare(&cfg, &a, &b)?;
    eprintln!(
        "|A|={} |B|={} d={} window={} seeds={:?}",
        data.a.len(),
        data.b.len(),
        data.dim,
        cfg.window,
        cfg.seeds
    );
    let rows = harness::run_sliding_window(&cfg, &data)?;
    harness::write_csv(&rows, open_out(&args.out)?)?;
    for s in summarize(&rows) {
        eprintln!(
            "{:<10} mean error {:.4}  max error {:.4}  update {:.0} ns  query {:.0} ns",
            s.algorithm.name(),
            s.mean_error,
            s.max_error,
            s.mean_update_ns,
            s.mean_query_ns
        );
    }
    Ok(())
}

fn cmd_verify(args: VerifyArgs) -> Result<(), Failure> {
    let fault = match args.inject_fault.as_deref() {
        None => None,
        Some("gamma") => Some(Fault::Gamma),
        Some(other) => return Err(Failure(EXIT_USAGE, format!("unknown fault {other:?}"))),
    };
    let seed = seeds_from_env(vec![args.seed])?.first().copied().unwrap_or(args.seed);
    let results = verify::run_all(&VerifyOptions { quick: args.quick, seed, fault, exec: Execution::Parallel });
    for r in &results {
        eprintln!("{r}");
    }
    let failed: Vec<&str> = results.iter().filter(|r| !r.passed).map(|r| r.name).collect();
    if failed.is_empty() {
        Ok(())
    } else {
        Err(Failure(EXIT_PROPERTY, format!("failed properties: {}", failed.join(", "))))
    }
}

fn cmd_bench(args: BenchArgs) -> Result<(), Failure> {
    let seeds = seeds_from_env(args.seeds)?;
    let probe = ExperimentConfig { outlier: args.outlier, ..Default::default() };
    let window = args.window.unwrap_or(100);
    let updates = args.updates.unwrap_or(1000);
    let data: PreparedData = match load(&args.data)? {
        Some((a, b)) => harness::prepare(&probe, &a, &b)?,
        None => {
            let n_b = window + updates;
            let (a, b) = if args.dim == 3 {
                (desk_cloud(args.size, 1), desk_cloud(n_b, 2))
            } else {
                (gaussian_clusters(args.size, args.dim, 16, 1), gaussian_clusters(n_b, args.dim, 16, 2))
            };
            harness::prepare(&probe, &a, &b)?
        }
    };
    let window = args.window.unwrap_or(window.min(data.b.len()));
    let updates = args.updates.unwrap_or_else(|| data.b.len().saturating_sub(window).min(1000));
    eprintln!("|A|={} |B stream|={} d={} window={window} updates={updates}", data.a.len(), data.b.len(), data.dim);

    let mut rows = Vec::new();
    for &alg in &args.algos {
        let mut acc = Vec::new();
        for &seed in &seeds {
            let cfg = LatencyConfig {
                window,
                updates,
                queries: args.queries,
                experiment: ExperimentConfig { samples: args.samples, eps: args.eps, ..probe.clone() },
                seed,
            };
            acc.push(measure_latency(alg, &data.a, &data.b, &cfg)?);
        }
        let n = acc.len() as f64;
        let mean = |f: fn(&harness::Latency) -> f64| acc.iter().map(f).sum::<f64>() / n;
        rows.push((alg, mean(|l| l.insert_ns), mean(|l| l.delete_ns), mean(|l| l.update_ns), mean(|l| l.query_ns)));
    }

    let mut table = io::stdout().lock();
    writeln!(table, "{:<10} {:>14} {:>14} {:>14} {:>14}", "algorithm", "insert_ns", "delete_ns", "update_ns", "query_ns")?;
    for (alg, i, d, u, q) in &rows {
        writeln!(table, "{:<10} {i:>14.0} {d:>14.0} {u:>14.0} {q:>14.0}", alg.name())?;
    }
    drop(table);
    if args.out.is_none() {
        println!();
    }
    let mut out = open_out(&args.out)?;
    writeln!(out, "algorithm,updates,insert_ns,delete_ns,update_ns,query_ns")?;
    for (alg, i, d, u, q) in &rows {
        writeln!(out, "{},{updates},{i:.1},{d:.1},{u:.1},{q:.1}", alg.name())?;
    }
    out.flush()?;
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(EXIT_USAGE) } else { ExitCode::SUCCESS };
        }
    };
    let result = match cli.command {
        Command::Run(a) => cmd_run(a),
        Command::Verify(a) => cmd_verify(a),
        Command::Bench(a) => cmd_bench(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure(code, msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(code)
        }
    }
}
