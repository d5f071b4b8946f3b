//! `sdlab`: run online algorithms, verify competitive bounds, tabulate
//! empirical ratios and time SD.
//!
//! Exit codes: 0 success, 1 bound violation, 2 usage or parse error,
//! 3 unknown algorithm.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use sdlab_core::harness::{self, Family, HarnessError, SweepConfig};
use sdlab_core::instance::{self, CapacityScheme, GeneratorConfig, Shape, WeightSpec};
use sdlab_core::online::{run_named, AlgorithmName};
use sdlab_core::rational::{format as exact, to_f64};

const EXIT_VIOLATION: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_UNKNOWN_ALG: u8 = 3;

#[derive(Parser)]
#[command(name = "sdlab", version, about = "Subtree-Decomposition lab for online transportation")]
struct Cli {
    /// Worker threads for sweeps (default: all cores).
    #[arg(long, global = true)]
    workers: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Serve an instance file with one algorithm and print the assignment.
    Run {
        #[arg(long)]
        instance: PathBuf,
        /// sd, greedy, permutation or bstar.
        #[arg(long)]
        alg: String,
        /// Print the trace as JSON.
        #[arg(long)]
        json: bool,
    },
    /// Run a bound-checking sweep and write CSV and JSON reports.
    VerifyBounds(VerifyArgs),
    /// Empirical worst and mean ratios on the doubling-weight path.
    RatioTable {
        /// Comma-separated algorithm names.
        #[arg(long, default_value = "sd,greedy")]
        alg: String,
        /// Comma-separated path sizes.
        #[arg(long, value_delimiter = ',', default_value = "2,3,4,5,6")]
        sizes: Vec<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Sample this many sequences when `m^m` exceeds it.
        #[arg(long, default_value_t = 50_000)]
        sample: usize,
        /// CSV output file (stdout if absent).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Time SD on uniform paths with every request at one end.
    Bench {
        #[arg(long, value_delimiter = ',', default_value = "1000,2000,4000")]
        sizes: Vec<usize>,
        #[arg(long, default_value_t = 5)]
        runs: usize,
        /// Largest n accepted.
        #[arg(long, default_value_t = 200_000)]
        max_n: usize,
    },
    /// Write a seeded random instance as JSON.
    Generate(GenerateArgs),
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long)]
    family: String,
    #[arg(long)]
    max_n: Option<usize>,
    #[arg(long)]
    max_k: Option<usize>,
    /// Random templates (random families) or random hybrids.
    #[arg(long)]
    cases: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output directory for reports and witnesses.
    #[arg(long, default_value = ".")]
    out: PathBuf,
    /// Leave the timestamp out of the JSON report.
    #[arg(long)]
    no_timestamp: bool,
    /// Lift the size guards on exhaustive families.
    #[arg(long)]
    unsafe_large: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum ShapeArg {
    RandomTree,
    Path,
    Star,
    RandomMetric,
}

#[derive(Args)]
struct GenerateArgs {
    #[arg(long, value_enum, default_value = "random-tree")]
    shape: ShapeArg,
    #[arg(long)]
    n: usize,
    /// Number of sites (default n).
    #[arg(long)]
    m: Option<usize>,
    /// Number of requests (default m).
    #[arg(long)]
    k: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Smallest weight exponent.
    #[arg(long, default_value_t = 0)]
    lo: u32,
    /// Largest weight exponent.
    #[arg(long, default_value_t = 2)]
    hi: u32,
    /// Random capacities summing to k instead of unit capacities.
    #[arg(long)]
    random_capacities: bool,
    /// Allow requests away from the sites.
    #[arg(long)]
    off_site: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

enum Failure {
    Usage(String),
    UnknownAlg(String),
    Violation,
}

impl From<HarnessError> for Failure {
    fn from(e: HarnessError) -> Self {
        Failure::Usage(e.to_string())
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Usage(e.to_string())
    }
}

fn parse_alg(name: &str) -> Result<AlgorithmName, Failure> {
    name.trim().parse().map_err(|_| Failure::UnknownAlg(name.to_string()))
}

fn write_out(path: Option<&Path>, bytes: &[u8]) -> Result<(), Failure> {
    match path {
        Some(p) => fs::write(p, bytes)?,
        None => io::stdout().write_all(bytes)?,
    }
    Ok(())
}

fn cmd_run(path: &Path, alg: &str, json: bool) -> Result<(), Failure> {
    let alg = parse_alg(alg)?;
    let text = fs::read_to_string(path).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
    let inst = instance::from_json(&text).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
    let trace = run_named(alg, &inst, false).map_err(|e| Failure::Usage(e.to_string()))?;
    if json {
        let steps: Vec<_> = trace
            .steps
            .iter()
            .map(|s| serde_json::json!({"request": s.request, "site": s.site, "cost": exact(&s.cost)}))
            .collect();
        let doc = serde_json::json!({"alg": alg.as_str(), "steps": steps, "total": exact(&trace.total)});
        println!("{}", serde_json::to_string_pretty(&doc).map_err(|e| Failure::Usage(e.to_string()))?);
    } else {
        println!("step\trequest\tsite\tcost");
        for (t, s) in trace.steps.iter().enumerate() {
            println!("{}\t{}\t{}\t{}", t + 1, s.request, s.site, exact(&s.cost));
        }
        println!("total {} ({})", exact(&trace.total), to_f64(&trace.total));
    }
    Ok(())
}

fn cmd_verify(args: &VerifyArgs) -> Result<(), Failure> {
    let family: Family = args.family.parse()?;
    let mut config = SweepConfig::new(family);
    config.seed = args.seed;
    config.unsafe_large = args.unsafe_large;
    config.max_n = args.max_n.unwrap_or(config.max_n);
    config.max_k = args.max_k.unwrap_or(config.max_k);
    config.cases = args.cases.unwrap_or(config.cases);
    let mut outcome = harness::run_sweep(&config)?;
    if !args.no_timestamp {
        outcome.report.stamp();
    }
    fs::create_dir_all(&args.out)?;
    let base = args.out.join(family.as_str());
    let mut csv = Vec::new();
    if family == Family::HybridLemmas {
        outcome.report.write_findings_csv(&mut csv)?;
    } else {
        outcome.report.write_rows_csv(&mut csv)?;
    }
    fs::write(base.with_extension("csv"), csv)?;
    let mut json = Vec::new();
    outcome.report.write_json(&mut json)?;
    fs::write(base.with_extension("json"), json)?;
    for (i, w) in outcome.witnesses.iter().enumerate() {
        fs::write(args.out.join(format!("{}-witness-{i}.json", family.as_str())), instance::to_json(w))?;
    }
    let s = &outcome.report.summary;
    println!("family {family}: {} templates, {} evaluations, {} violations", s.templates, s.sequences, s.violations);
    if let Some(r) = &s.max_ratio {
        println!("max ratio {} ({:.4}), max ratio/bound {:.4}", exact(r), to_f64(r), s.max_bound_usage.unwrap_or(0.0));
    }
    for (name, t) in &s.checks {
        println!("  {name}: {} evaluated, {} failed", t.evaluated, t.failed);
    }
    if outcome.passed() {
        Ok(())
    } else {
        Err(Failure::Violation)
    }
}

fn cmd_ratio_table(algs: &str, sizes: &[usize], seed: u64, sample: usize, out: Option<&Path>) -> Result<(), Failure> {
    let algs = algs.split(',').map(parse_alg).collect::<Result<Vec<_>, _>>()?;
    if sizes.iter().any(|&m| m == 0 || m > 12) {
        return Err(Failure::Usage("path sizes must lie in 1..=12".into()));
    }
    let rows = harness::ratio_table(&algs, sizes, seed, sample)?;
    let mut buf = Vec::new();
    harness::write_ratio_csv(&rows, &mut buf)?;
    write_out(out, &buf)
}

fn cmd_bench(sizes: &[usize], runs: usize, max_n: usize) -> Result<(), Failure> {
    if let Some(&n) = sizes.iter().find(|&&n| n == 0 || n > max_n) {
        return Err(Failure::Usage(format!("n = {n} outside 1..={max_n}")));
    }
    println!("n,runs,median_ns,min_ns,max_ns,per_request_ns");
    for &n in sizes {
        let r = harness::bench_sd(n, runs)?;
        println!("{},{},{},{},{},{:.1}", r.n, r.runs, r.median_ns, r.min_ns, r.max_ns, r.per_request_ns);
    }
    Ok(())
}

fn cmd_generate(a: &GenerateArgs) -> Result<(), Failure> {
    let m = a.m.unwrap_or(a.n);
    let config = GeneratorConfig {
        seed: a.seed,
        shape: match a.shape {
            ShapeArg::RandomTree => Shape::RandomTree,
            ShapeArg::Path => Shape::Path,
            ShapeArg::Star => Shape::Star,
            ShapeArg::RandomMetric => Shape::RandomMetric,
        },
        n: a.n,
        m,
        k: a.k.unwrap_or(m),
        weights: WeightSpec::Uniform { lo: a.lo, hi: a.hi },
        capacity: if a.random_capacities { CapacityScheme::Random } else { CapacityScheme::Unit },
        requests_on_sites: !a.off_site,
    };
    let inst = instance::generate(&config).map_err(|e| Failure::Usage(e.to_string()))?;
    let mut text = instance::to_json(&inst);
    text.push('\n');
    write_out(a.out.as_deref(), text.as_bytes())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(w) = cli.workers {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(w).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_USAGE);
        }
    }
    let result = match &cli.command {
        Command::Run { instance, alg, json } => cmd_run(instance, alg, *json),
        Command::VerifyBounds(args) => cmd_verify(args),
        Command::RatioTable { alg, sizes, seed, sample, out } => cmd_ratio_table(alg, sizes, *seed, *sample, out.as_deref()),
        Command::Bench { sizes, runs, max_n } => cmd_bench(sizes, *runs, *max_n),
        Command::Generate(args) => cmd_generate(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_USAGE)
        }
        Err(Failure::UnknownAlg(name)) => {
            eprintln!("error: unknown algorithm {name:?} (expected sd, greedy, permutation or bstar)");
            ExitCode::from(EXIT_UNKNOWN_ALG)
        }
        Err(Failure::Violation) => {
            eprintln!("bound violation; witnesses written next to the report");
            ExitCode::from(EXIT_VIOLATION)
        }
    }
}
