use std::fs;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};

use locpack::aptas::aptas_detailed;
use locpack::instances::{
    gen_random, gen_sylvester, gen_theorem1, gen_tightness, run_adversary, Generated, SizeLaw,
    DEFAULT_DENOMINATOR,
};
use locpack::io::{
    format_spans, read_instance, solve_cached, write_instance, write_packing, write_trace,
    write_trajectory, OracleCache, ORACLE_CACHE_ENV,
};
use locpack::metrics::colour_spans;
use locpack::oracle::OracleConfig;
use locpack::{run_algorithm, validate_packing, Algorithm, Error, Rational, RunOutput, RunParams};

mod bench;

#[derive(Parser)]
#[command(name = "locpack", version, about = "Locality-preserving bin packing experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a generated instance as JSON.
    Generate {
        #[command(subcommand)]
        family: Family,
        /// Output file (stdout when omitted).
        #[arg(short, long, global = true)]
        output: Option<PathBuf>,
    },
    /// Pack an instance and print the bin count and per-colour spans.
    Pack(PackArgs),
    /// Exact OPT and per-colour OPT as JSON.
    Oracle(OracleArgs),
    /// Run a manifest of instances × algorithms into a CSV report.
    Bench(BenchArgs),
    /// Feed the online adversary to an algorithm and record its trajectory.
    Adversary(AdversaryArgs),
}

#[derive(Subcommand)]
enum Family {
    Theorem1 {
        #[arg(long)]
        n: u32,
        #[arg(long)]
        epsilon: Rational,
    },
    Sylvester {
        #[arg(long)]
        m: u32,
        /// Items per colour; every l_i must divide it.
        #[arg(long)]
        n: u32,
        #[arg(long)]
        epsilon: Rational,
    },
    Tightness {
        #[arg(long)]
        j: u32,
        #[arg(long)]
        gamma: Rational,
        #[arg(long, default_value_t = 1)]
        pairs: u32,
    },
    Random {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        m: u32,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value = "1/100")]
        lo: Rational,
        #[arg(long, default_value = "1")]
        hi: Rational,
        /// Draw from this comma-separated set instead of a uniform range.
        #[arg(long, value_delimiter = ',')]
        sizes: Option<Vec<Rational>>,
        #[arg(long, default_value_t = DEFAULT_DENOMINATOR)]
        denominator: u128,
    },
}

#[derive(Args)]
struct AlgoArgs {
    /// One of nf, ff, ffd, bf, bbf, mnf, mff, level17, threshold, vl1eps, off17, aptas.
    #[arg(long)]
    algo: Algorithm,
    #[arg(long)]
    epsilon: Option<Rational>,
    #[arg(long)]
    beta: Option<Rational>,
    /// Open bins for bbf.
    #[arg(long, default_value_t = 2)]
    k: usize,
    /// Search-node budget; accepts forms such as 1e6.
    #[arg(long, value_parser = parse_budget)]
    budget: Option<u64>,
}

impl AlgoArgs {
    fn params(&self) -> RunParams {
        RunParams {
            epsilon: self.epsilon,
            beta: self.beta,
            k: self.k,
            budget: self.budget,
            ..RunParams::default()
        }
    }
}

#[derive(Args)]
struct PackArgs {
    #[command(flatten)]
    algo: AlgoArgs,
    #[arg(short, long)]
    input: PathBuf,
    /// Packing JSON.
    #[arg(short, long)]
    output: Option<PathBuf>,
    /// Placement trace, one JSON object per line (online algorithms).
    #[arg(long)]
    trace: Option<PathBuf>,
    /// Candidate summaries as JSON (aptas only).
    #[arg(long)]
    candidates: Option<PathBuf>,
    #[arg(long)]
    max_configurations: Option<usize>,
}

#[derive(Args)]
struct OracleArgs {
    #[arg(short, long)]
    input: PathBuf,
    #[arg(long)]
    beta: Option<Rational>,
    /// Largest instance the exact solver accepts.
    #[arg(long)]
    limit: Option<usize>,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct BenchArgs {
    #[arg(short, long)]
    manifest: PathBuf,
    /// CSV report (stdout when omitted).
    #[arg(short, long)]
    output: Option<PathBuf>,
    /// Worker threads; defaults to the number of CPUs.
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Args)]
struct AdversaryArgs {
    #[command(flatten)]
    algo: AlgoArgs,
    #[arg(long, default_value_t = 6)]
    n: usize,
    #[arg(long, default_value_t = 60)]
    rounds: usize,
    /// Trajectory CSV (stdout when omitted).
    #[arg(short, long)]
    output: Option<PathBuf>,
}

/// A packing that failed validation; maps to the precondition exit code.
#[derive(Debug, thiserror::Error)]
#[error("packing is invalid: {0}")]
struct InvalidPacking(String);

fn parse_budget(s: &str) -> Result<u64, String> {
    if let Ok(v) = s.parse::<u64>() {
        return Ok(v);
    }
    match s.parse::<f64>() {
        Ok(v) if v.is_finite() && v >= 0.0 && v.fract() == 0.0 && v <= u64::MAX as f64 => Ok(v as u64),
        _ => Err(format!("expected a non-negative whole number, got {s:?}")),
    }
}

fn output_writer(path: Option<&Path>) -> anyhow::Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            fs::File::create(p).with_context(|| format!("creating {}", p.display()))?,
        )),
        None => Box::new(io::stdout().lock()),
    })
}

fn oracle_cache() -> anyhow::Result<Option<OracleCache>> {
    OracleCache::from_env().with_context(|| format!("opening the cache named by {ORACLE_CACHE_ENV}"))
}

fn cmd_generate(family: Family, output: Option<PathBuf>) -> anyhow::Result<()> {
    let Generated { instance, meta } = match family {
        Family::Theorem1 { n, epsilon } => gen_theorem1(n, epsilon)?,
        Family::Sylvester { m, n, epsilon } => gen_sylvester(m, n, epsilon)?,
        Family::Tightness { j, gamma, pairs } => gen_tightness(j, gamma, pairs)?,
        Family::Random { n, m, seed, lo, hi, sizes, denominator } => {
            let law = match sizes {
                Some(set) => SizeLaw::Discrete(set),
                None => SizeLaw::Uniform { lo, hi },
            };
            gen_random(n, m, &law, seed, denominator)?
        }
    };
    for note in &meta.notes {
        eprintln!("note: {note}");
    }
    match output {
        Some(path) => {
            write_instance(&path, &instance, Some(&meta))?;
            eprintln!("wrote {} items to {}", instance.len(), path.display());
        }
        None => println!("{}", locpack::io::instance_to_json(&instance, Some(&meta))?),
    }
    Ok(())
}

fn cmd_pack(args: PackArgs) -> anyhow::Result<()> {
    let (instance, _) = read_instance(&args.input)
        .with_context(|| format!("reading {}", args.input.display()))?;
    let mut params = args.algo.params();
    if let Some(max) = args.max_configurations {
        params.aptas.max_configurations = max;
    }

    let result = if args.algo.algo == Algorithm::Aptas && args.candidates.is_some() {
        let eps = params
            .epsilon
            .ok_or_else(|| Error::InvalidParameter("aptas needs ε".into()))?;
        let mut config = params.aptas.clone();
        config.record_candidates = true;
        if let Some(b) = params.budget {
            config.max_nodes = b;
        }
        aptas_detailed(&instance, eps, params.beta, &config).map(|out| {
            let path = args.candidates.as_ref().expect("checked above");
            let json = serde_json::to_string_pretty(&out.trace).expect("summaries serialise");
            fs::write(path, json).map(|_| RunOutput { packing: out.packing, trace: None })
        })
    } else {
        run_algorithm(args.algo.algo, &instance, &params).map(Ok)
    };

    let output = match result {
        Ok(written) => written?,
        Err(Error::BudgetExceeded { what, limit, best_so_far }) => {
            if let (Some(best), Some(path)) = (best_so_far, &args.output) {
                write_packing(path, &best)?;
                eprintln!("best packing found before the budget ran out written to {}", path.display());
            }
            return Err(Error::budget(what, limit).into());
        }
        Err(e) => return Err(e.into()),
    };

    let report = validate_packing(&output.packing, &instance);
    if !report.is_valid() {
        return Err(InvalidPacking(report.to_string()).into());
    }
    if let Some(path) = &args.output {
        write_packing(path, &output.packing)?;
    }
    if let (Some(path), Some(trace)) = (&args.trace, &output.trace) {
        write_trace(BufWriter::new(fs::File::create(path)?), trace)?;
    }
    println!("algorithm: {}", output.packing.provenance.algorithm);
    println!("bins: {}", output.packing.total_bins());
    println!("spans: {}", format_spans(&colour_spans(&output.packing, instance.m)));
    Ok(())
}

fn cmd_oracle(args: OracleArgs) -> anyhow::Result<()> {
    let (instance, _) = read_instance(&args.input)
        .with_context(|| format!("reading {}", args.input.display()))?;
    let mut config = OracleConfig::default();
    if let Some(limit) = args.limit {
        config.limit_n = limit;
        config.beta_limit_n = limit;
    }
    let cache = oracle_cache()?;
    let result = solve_cached(cache.as_ref(), &instance, config, args.beta)?;
    let mut out = output_writer(args.output.as_deref())?;
    serde_json::to_writer_pretty(&mut out, &result)?;
    writeln!(out)?;
    Ok(())
}

fn cmd_adversary(args: AdversaryArgs) -> anyhow::Result<()> {
    let params = args.algo.params();
    let Some(mut alg) = args.algo.algo.online(&params)? else {
        bail!(Error::InvalidParameter(format!("{} is not an online algorithm", args.algo.algo)));
    };
    let run = run_adversary(alg.as_mut(), args.n, args.rounds)?;
    write_trajectory(output_writer(args.output.as_deref())?, &run.trajectory)?;
    if let Some(last) = run.trajectory.last() {
        eprintln!(
            "{}: {} rounds, {} bins, max span {}, colour stretch ≥ {}",
            run.algorithm, last.round, last.bins, last.max_span, last.colour_stretch_lb
        );
    }
    if let Some(why) = &run.stopped {
        eprintln!("stopped early: {why}");
    }
    Ok(())
}

fn exit_code(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if cause.is::<InvalidPacking>() {
            return 2;
        }
        if let Some(e) = cause.downcast_ref::<Error>() {
            return match e {
                Error::BudgetExceeded { .. } => 3,
                e if e.is_precondition() => 2,
                _ => 1,
            };
        }
    }
    1
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Generate { family, output } => cmd_generate(family, output),
        Command::Pack(args) => cmd_pack(args),
        Command::Oracle(args) => cmd_oracle(args),
        Command::Bench(args) => bench::cmd_bench(&args.manifest, args.output.as_deref(), args.threads),
        Command::Adversary(args) => cmd_adversary(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
