use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use clap::{Args, Parser, Subcommand, ValueEnum};
use ticc::decode::{map_oracle_with_budget, DEFAULT_ORACLE_BUDGET};
use ticc::encode::{random_info, unsatisfied_checks};
use ticc::seed::{self, tag};
use ticc::stopping::DEFAULT_NODE_BUDGET;
use ticc::sweep::SweepReport;
use ticc::{
    encode, find_staircase, lemma_bound, peel, sample_stopping_sets, search_min_stopping_set,
    sweep, CodePolicy, CodeSpec, ErasurePattern, Error, MapOutcome, Result, SearchConfig,
    SearchScope, SweepConfig, TannerGraph, Termination, VarId,
};

#[derive(Parser)]
#[command(
    name = "ticc",
    version,
    about = "LDPC convolutional codes on the erasure channel"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sample a code from the (n, k, w) ensemble.
    Sample {
        n: usize,
        k: usize,
        w: u32,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Output file; stdout if omitted.
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Print structural properties of a code.
    Inspect { spec: PathBuf },
    /// Monte Carlo sweep of the peeling decoder over an epsilon grid.
    Sweep(SweepArgs),
    /// Fit a floor slope to a sweep CSV.
    Floor {
        csv: PathBuf,
        /// Epsilon window `lo:hi`.
        #[arg(long, value_parser = parse_window)]
        window: (f64, f64),
    },
    /// Estimate the threshold of a sweep CSV at a bit-erasure level.
    Threshold {
        csv: PathBuf,
        #[arg(long, default_value_t = 1e-2)]
        level: f64,
    },
    /// Search for small stopping sets.
    Stopping(StoppingArgs),
    /// Check that every peeling success is also an exact decoding success.
    OracleCheck {
        spec: PathBuf,
        #[arg(long)]
        len: usize,
        #[arg(long)]
        eps: f64,
        #[arg(long, default_value_t = 100)]
        trials: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = DEFAULT_ORACLE_BUDGET)]
        budget: usize,
    },
    /// Encode random information bits and verify every check.
    #[command(hide = true)]
    Encode {
        spec: PathBuf,
        #[arg(long)]
        len: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Compute parity in the seeded zones instead of requiring zeros there.
        #[arg(long)]
        open: bool,
    },
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    k: usize,
    #[arg(long)]
    w: u32,
    #[arg(long, default_value_t = 10_000)]
    len: usize,
    /// Comma-separated erasure probabilities.
    #[arg(long, value_delimiter = ',', required = true)]
    eps: Vec<f64>,
    #[arg(long, default_value_t = 100)]
    trials: usize,
    #[arg(long)]
    fixed_code: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Worker threads; 0 picks one per core.
    #[arg(long, default_value_t = 0)]
    workers: usize,
    /// Write `-` in the seconds column.
    #[arg(long)]
    no_timing: bool,
    /// Stop after the row that crosses this many seconds.
    #[arg(long)]
    deadline: Option<f64>,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Scope {
    Interior,
    Boundary,
}

#[derive(Args)]
struct StoppingArgs {
    spec: PathBuf,
    #[arg(long)]
    len: usize,
    #[arg(long)]
    max_size: usize,
    #[arg(long, conflicts_with = "sample")]
    exact: bool,
    #[arg(long, requires = "eps")]
    sample: bool,
    #[arg(long)]
    eps: Option<f64>,
    #[arg(long, default_value_t = 1000)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = Scope::Boundary)]
    scope: Scope,
    #[arg(long, default_value_t = DEFAULT_NODE_BUDGET)]
    budget: u64,
    /// Append a CSV row to this file.
    #[arg(long)]
    csv: Option<PathBuf>,
}

fn parse_window(s: &str) -> std::result::Result<(f64, f64), String> {
    let (lo, hi) = s.split_once(':').ok_or("expected lo:hi")?;
    let lo: f64 = lo.trim().parse().map_err(|e| format!("{lo}: {e}"))?;
    let hi: f64 = hi.trim().parse().map_err(|e| format!("{hi}: {e}"))?;
    Ok((lo, hi))
}

fn read_spec(path: &Path) -> Result<CodeSpec> {
    fs::read_to_string(path)?.parse()
}

fn write_out(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => fs::write(p, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

fn fmt_set(graph: &TannerGraph, set: &[VarId]) -> String {
    const SHOWN: usize = 64;
    if set.len() > SHOWN {
        return format!("{} members, not listed", set.len());
    }
    set.iter()
        .map(|&v| {
            let x = graph.variable(v);
            format!("({},{})", x.stream, x.position)
        })
        .collect::<Vec<_>>()
        .join(" ")
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Sample {
            n,
            k,
            w,
            seed,
            output,
        } => {
            let spec = CodeSpec::sample(n, k, w, seed)?;
            write_out(output.as_deref(), &spec.to_string())
        }
        Command::Inspect { spec: path } => {
            let spec = read_spec(&path)?;
            let order = find_staircase(&spec)
                .map(|o| format!("{:?}", o.check_to_stream()))
                .unwrap_or_else(|| "none".into());
            println!("n: {}", spec.n());
            println!("k: {}", spec.k());
            println!("w: {}", spec.w());
            println!("hash: {}", spec.hash());
            println!("memory: {}", spec.memory());
            println!("constraint_length: {}", spec.constraint_length());
            println!("staircase: {order}");
            println!("distinct_vectors: {}", spec.has_distinct_vectors());
            println!("identical_rows: {:?}", spec.identical_rows());
            println!("lemma_bound: {}", lemma_bound(spec.n(), spec.k())?);
            Ok(())
        }
        Command::Sweep(a) => {
            let mut config = SweepConfig::new(a.n, a.k, a.w, a.eps);
            config.stream_len = a.len;
            config.trials = a.trials;
            config.master_seed = a.seed;
            config.workers = a.workers;
            config.timing = !a.no_timing;
            config.deadline = a.deadline.map(Duration::from_secs_f64);
            if let Some(path) = &a.fixed_code {
                config.policy = CodePolicy::Fixed(read_spec(path)?);
            }
            let report = sweep(&config)?;
            if report.truncated {
                eprintln!("deadline reached after {} rows", report.rows.len());
            }
            write_out(a.output.as_deref(), &report.to_csv())
        }
        Command::Floor { csv, window } => {
            let report = SweepReport::from_csv(&fs::read_to_string(csv)?)?;
            let fit = report.fit_floor_slope(window.0, window.1)?;
            println!("alpha: {:.6e}", fit.alpha);
            println!("d: {:.6}", fit.d);
            println!("r2: {:.6}", fit.r_squared);
            println!("points: {}", fit.points);
            println!("zero_rows_excluded: {}", fit.zero_excluded);
            Ok(())
        }
        Command::Threshold { csv, level } => {
            let report = SweepReport::from_csv(&fs::read_to_string(csv)?)?;
            let (t, sigma) = report.threshold_with_sigma(level)?;
            println!("level: {level:e}");
            println!("threshold: {t:.6}");
            println!("sigma: {sigma:.6}");
            Ok(())
        }
        Command::Stopping(a) => stopping(a),
        Command::OracleCheck {
            spec,
            len,
            eps,
            trials,
            seed,
            budget,
        } => {
            let spec = read_spec(&spec)?;
            let graph = TannerGraph::build(&spec, len)?;
            let (mut successes, mut unique, mut violations) = (0u64, 0u64, 0u64);
            for t in 0..trials {
                let p = ErasurePattern::erase(&graph, eps, seed::derive(seed, tag::CHANNEL, t))?;
                let peeled = peel(&graph, &p).success;
                let map = map_oracle_with_budget(&graph, &p, budget)? == MapOutcome::Unique;
                successes += u64::from(peeled);
                unique += u64::from(map);
                if peeled && !map {
                    violations += 1;
                    eprintln!("trial {t}: peeling succeeded but the erasures are ambiguous");
                }
            }
            println!("trials: {trials}");
            println!("peel_success: {successes}");
            println!("map_unique: {unique}");
            println!("violations: {violations}");
            if violations > 0 {
                return Err(Error::InvalidParameters(format!(
                    "{violations} peeling successes not confirmed by elimination"
                )));
            }
            Ok(())
        }
        Command::Encode {
            spec,
            len,
            seed,
            open,
        } => {
            let spec = read_spec(&spec)?;
            let order = find_staircase(&spec)
                .ok_or_else(|| Error::InvalidParameters("code has no staircase order".into()))?;
            let graph = TannerGraph::build(&spec, len)?;
            let info = random_info(&graph, seed::derive(seed, tag::INFO, 0));
            let termination = if open {
                Termination::Open
            } else {
                Termination::Seeded
            };
            let word = encode(&graph, &order, &info, termination)?;
            println!("weight: {}", word.iter().filter(|&&b| b == 1).count());
            println!("unsatisfied: {}", unsatisfied_checks(&graph, &word).len());
            Ok(())
        }
    }
}

fn stopping(a: StoppingArgs) -> Result<()> {
    let spec = read_spec(&a.spec)?;
    let graph = TannerGraph::build(&spec, a.len)?;
    let bound = lemma_bound(spec.n(), spec.k())?;
    println!("code_hash: {}", spec.hash());
    println!("lemma_bound: {bound}");
    let row = if a.sample {
        let eps = a.eps.expect("required by clap");
        let s = sample_stopping_sets(&graph, eps, a.trials, a.seed)?;
        println!("mode: sample");
        println!("trials: {}", a.trials);
        println!("nonempty: {}", s.sizes.len());
        match &s.smallest {
            Some(set) => {
                println!("min_size: {}", set.len());
                println!("found: {}", fmt_set(&graph, set));
            }
            None => println!("found: none"),
        }
        format!(
            "{},sample,{bound},-,{},{}",
            spec.hash(),
            s.min_size().map_or("-".to_string(), |m| m.to_string()),
            a.trials
        )
    } else {
        let scope = match a.scope {
            Scope::Interior => SearchScope::Interior,
            Scope::Boundary => SearchScope::InteriorAndBoundary,
        };
        let mut config = SearchConfig::new(a.max_size, scope);
        config.node_budget = a.budget;
        let r = search_min_stopping_set(&graph, &config)?;
        println!("mode: exact");
        println!("anchors: {}", r.anchors);
        println!("proved_bound: {}", r.size_bound_proved);
        match &r.found {
            Some(set) => println!("found: {}", fmt_set(&graph, set)),
            None => println!("found: none"),
        }
        println!("nodes_expanded: {}", r.nodes_expanded);
        format!(
            "{},exact,{bound},{},{},{}",
            spec.hash(),
            r.size_bound_proved,
            r.found
                .as_ref()
                .map_or("-".to_string(), |s| s.len().to_string()),
            r.nodes_expanded
        )
    };
    if let Some(path) = &a.csv {
        use std::io::Write;
        let fresh = !path.exists();
        let mut f = fs::OpenOptions::new()
            .create(true)
            .append(true)
            .open(path)?;
        if fresh {
            writeln!(f, "code_hash,mode,lemma_bound,proved_bound,found_size,work")?;
        }
        writeln!(f, "{row}")?;
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
