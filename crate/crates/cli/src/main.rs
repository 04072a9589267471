use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use qkcount::baselines::{afu_count, sv_count, AfuConfig};
use qkcount::exact::{fff_count, write_per_node_csv};
use qkcount::graph::{load_graph, write_edge_list, Graph};
use qkcount::harness::{
    generate_pa, graph_stats, read_manifest, run_benchmark, write_benchmark_csv, write_benchmark_table, Algorithm,
    BenchmarkPlan, Dataset, DatasetSource, MinSec,
};
use qkcount::kernel::{count_cliques, LocalGraph};
use qkcount::mrengine::{Engine, RunReport};
use qkcount::sampling::{concentration_check, estimate, SamplingConfig};

const CSV_COLUMNS: &str = "\
CSV output columns:
  count     algorithm,k,count,wall_ms,replication_factor
  estimate  seed,estimate,rounded,sampled_count,scale,relative_error,elapsed_ms
  bench     dataset,algorithm,k,params,workers,seed,result,relative_error,wall_ms,
            round_ms,emitted_pairs,max_group_size,error
  stats     nodes,edges,max_degree,max_high_degree,high_degree_bound,self_loops,duplicates
  --metrics-out  round,name,map_input_pairs,emitted_pairs,distinct_keys,max_group_size,
                 total_values,output_pairs,wall_ms,map_ms,shuffle_ms,reduce_ms,max_reduce_ms,workers

Exit status: 0 on success, 2 on invalid arguments, 1 on runtime failure.";

#[derive(Parser)]
#[command(
    name = "qkcount",
    version,
    about = "Exact and sampled k-clique counting on an in-process MapReduce engine"
)]
#[command(after_help = CSV_COLUMNS)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Count k-cliques exactly.
    Count(CountArgs),
    /// Estimate the k-clique count by sampling.
    Estimate(EstimateArgs),
    /// Write a preferential attachment graph as an edge list.
    GenPa(GenPaArgs),
    /// Run algorithms over the datasets of a manifest.
    Bench(BenchArgs),
    /// Print basic statistics of a graph.
    Stats(StatsArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Table,
}

#[derive(Args)]
struct EngineArgs {
    /// Worker threads.
    #[arg(long, default_value_t = 1)]
    workers: usize,
    /// Sort every shuffle so output order is reproducible.
    #[arg(long)]
    deterministic: bool,
    /// Write per-round engine metrics as CSV.
    #[arg(long)]
    metrics_out: Option<PathBuf>,
}

impl EngineArgs {
    fn engine(&self) -> qkcount::Result<Engine> {
        Ok(Engine::with_workers(self.workers, self.deterministic)?)
    }
}

#[derive(Clone, Copy, ValueEnum, PartialEq)]
enum CountAlgo {
    Fff,
    Sv,
    Afu,
    Kernel,
}

#[derive(Args)]
struct CountArgs {
    /// Edge list, optionally gzip-compressed.
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    k: usize,
    #[arg(long, value_enum, default_value_t = CountAlgo::Fff)]
    algo: CountAlgo,
    /// Generate length-2 paths in the second round's mappers (sv only).
    #[arg(long)]
    delayed_paths: bool,
    /// Bucket count (afu only). Pick b so that C(b+k-1, k) is near the number of reducers wanted.
    #[arg(long, default_value_t = 2)]
    buckets: u32,
    /// Write per-node clique incidence counts as CSV (fff only).
    #[arg(long)]
    per_node_out: Option<PathBuf>,
    /// Bucket hashing seed (afu only).
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = Format::Table)]
    format: Format,
    #[command(flatten)]
    engine: EngineArgs,
}

#[derive(Clone, Copy, ValueEnum)]
enum SampleMode {
    Plain,
    Color,
}

#[derive(Args)]
struct EstimateArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    k: usize,
    #[arg(long, value_enum)]
    mode: SampleMode,
    /// Wedge sampling probability (plain mode).
    #[arg(long = "p")]
    p: Option<f64>,
    /// Number of colors (color mode).
    #[arg(long)]
    colors: Option<u32>,
    /// First seed; repeated runs use consecutive seeds.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1)]
    repeat: u32,
    /// Exact count to report relative errors against.
    #[arg(long)]
    reference: Option<u64>,
    /// Print both sides of the concentration condition (constant taken as 1).
    #[arg(long)]
    check_concentration: bool,
    /// Target relative error for --check-concentration.
    #[arg(long, default_value_t = 0.1)]
    epsilon: f64,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
    #[command(flatten)]
    engine: EngineArgs,
}

#[derive(Args)]
struct GenPaArgs {
    /// Node count. The default is arbitrary.
    #[arg(long, default_value_t = 100_000)]
    n: usize,
    /// Edges added per arriving node. The default is arbitrary.
    #[arg(long, default_value_t = 5)]
    mu: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Destination; standard output when absent.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct BenchArgs {
    /// TOML manifest with [[dataset]] entries (name, path, optional reference table).
    #[arg(long, required_unless_present = "input")]
    manifest: Option<PathBuf>,
    /// A single edge list to benchmark instead of a manifest.
    #[arg(long, conflicts_with = "manifest")]
    input: Option<PathBuf>,
    /// Comma-separated: fff, sv, sv-delayed, kernel, afu:B, plain:P, cfff:C.
    #[arg(long, value_delimiter = ',', default_value = "fff")]
    algos: Vec<String>,
    #[arg(long, default_value_t = 3)]
    k_min: usize,
    #[arg(long, default_value_t = 5)]
    k_max: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = Format::Table)]
    format: Format,
    /// Destination; standard output when absent.
    #[arg(long)]
    output: Option<PathBuf>,
    #[command(flatten)]
    engine: EngineArgs,
}

#[derive(Args)]
struct StatsArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long, value_enum, default_value_t = Format::Table)]
    format: Format,
}

/// A failure caused by the invocation rather than the run.
#[derive(Debug)]
struct UsageError(String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

fn usage(msg: impl Into<String>) -> anyhow::Error {
    UsageError(msg.into()).into()
}

fn output(path: Option<&Path>) -> anyhow::Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).with_context(|| format!("creating {}", p.display()))?,
        )),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn write_metrics(path: Option<&Path>, report: &RunReport) -> anyhow::Result<()> {
    if let Some(p) = path {
        let f = File::create(p).with_context(|| format!("creating {}", p.display()))?;
        report.write_csv(f)?;
    }
    Ok(())
}

fn load(path: &Path) -> anyhow::Result<Graph> {
    let (g, _) = load_graph(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(g)
}

fn ms(d: std::time::Duration) -> f64 {
    d.as_secs_f64() * 1e3
}

fn count(args: CountArgs) -> anyhow::Result<()> {
    if args.algo != CountAlgo::Sv && args.delayed_paths {
        return Err(usage("--delayed-paths applies to --algo sv only"));
    }
    if args.algo != CountAlgo::Fff && args.per_node_out.is_some() {
        return Err(usage("--per-node-out applies to --algo fff only"));
    }
    if args.algo == CountAlgo::Sv && args.k != 3 {
        return Err(usage("--algo sv counts triangles only; use --k 3"));
    }
    let engine = args.engine.engine()?;
    let g = load(&args.input)?;
    let started = Instant::now();
    let (name, q, report, replication) = match args.algo {
        CountAlgo::Fff => {
            let r = fff_count(&g, args.k, &engine, args.per_node_out.is_some())?;
            if let (Some(path), Some(per_node)) = (&args.per_node_out, &r.per_node) {
                let f = File::create(path).with_context(|| format!("creating {}", path.display()))?;
                write_per_node_csv(per_node, BufWriter::new(f))?;
            }
            ("fff", r.count, r.run_report, None)
        }
        CountAlgo::Sv => {
            let r = sv_count(&g, &engine, args.delayed_paths)?;
            (
                if args.delayed_paths { "sv-delayed" } else { "sv" },
                r.count,
                r.run_report,
                None,
            )
        }
        CountAlgo::Afu => {
            let r = afu_count(
                &g,
                args.k,
                &engine,
                AfuConfig {
                    seed: args.seed,
                    ..AfuConfig::new(args.buckets)
                },
            )?;
            ("afu", r.counts.count, r.counts.run_report, Some(r.replication_factor))
        }
        CountAlgo::Kernel => {
            let q = count_cliques(&LocalGraph::from_graph(&g), args.k)?;
            ("kernel", q, RunReport::empty(1), None)
        }
    };
    let elapsed = started.elapsed();
    write_metrics(args.engine.metrics_out.as_deref(), &report)?;
    let mut out = output(None)?;
    match args.format {
        Format::Csv => {
            writeln!(out, "algorithm,k,count,wall_ms,replication_factor")?;
            let rep = replication.map(|r| format!("{r:.4}")).unwrap_or_default();
            writeln!(out, "{name},{},{q},{:.3},{rep}", args.k, ms(elapsed))?;
        }
        Format::Table => {
            writeln!(out, "q_{} = {q}", args.k)?;
            writeln!(out, "algorithm: {name}, time {}", MinSec(elapsed))?;
            if let Some(r) = replication {
                writeln!(out, "replication factor: {r:.4}")?;
            }
            for r in &report.rounds {
                writeln!(
                    out,
                    "  {:<8} emitted {:>12}  keys {:>10}  max group {:>8}  time {}",
                    r.name,
                    r.emitted_pairs,
                    r.distinct_keys,
                    r.max_group_size,
                    MinSec(r.wall_time)
                )?;
            }
        }
    }
    out.flush()?;
    Ok(())
}

fn sampling_config(args: &EstimateArgs, seed: u64) -> anyhow::Result<SamplingConfig> {
    Ok(match args.mode {
        SampleMode::Plain => {
            let p = args.p.ok_or_else(|| usage("--mode plain requires --p"))?;
            SamplingConfig::plain(p, seed)?
        }
        SampleMode::Color => {
            let c = args.colors.ok_or_else(|| usage("--mode color requires --colors"))?;
            SamplingConfig::color(c, seed)?
        }
    })
}

fn run_estimate(args: EstimateArgs) -> anyhow::Result<()> {
    if args.repeat == 0 {
        return Err(usage("--repeat must be at least 1"));
    }
    let first = sampling_config(&args, args.seed)?;
    let engine = args.engine.engine()?;
    let g = load(&args.input)?;
    let mut out = output(None)?;
    if args.check_concentration {
        match args.reference {
            Some(q) => {
                let c = concentration_check(g.m(), args.k, q as f64, args.epsilon, &first);
                writeln!(
                    out,
                    "# concentration (advisory, constant 1): lhs {:.6e} {} rhs {:.6e}",
                    c.lhs,
                    if c.holds() { ">" } else { "<=" },
                    c.rhs
                )?;
            }
            None => writeln!(out, "# concentration check needs --reference")?,
        }
    }
    if let Format::Csv = args.format {
        writeln!(
            out,
            "seed,estimate,rounded,sampled_count,scale,relative_error,elapsed_ms"
        )?;
    }
    let mut all = RunReport::empty(engine.workers());
    for i in 0..args.repeat as u64 {
        let seed = args.seed.wrapping_add(i);
        let started = Instant::now();
        let e = estimate(&g, args.k, sampling_config(&args, seed)?, &engine)?;
        let elapsed = started.elapsed();
        let rel = args.reference.map(|q| {
            if q == 0 {
                f64::NAN
            } else {
                (e.value - q as f64).abs() / q as f64
            }
        });
        match args.format {
            Format::Csv => writeln!(
                out,
                "{seed},{:.3},{},{},{},{},{:.3}",
                e.value,
                e.value.round() as u64,
                e.sampled_count,
                e.scale,
                rel.map(|r| format!("{r:.6}")).unwrap_or_default(),
                ms(elapsed)
            )?,
            Format::Table => {
                write!(
                    out,
                    "seed {seed}: q~_{} = {:.1} (~{})",
                    args.k,
                    e.value,
                    e.value.round() as u64
                )?;
                if let Some(r) = rel {
                    write!(out, ", relative error {:.4}%", 100.0 * r)?;
                }
                writeln!(out, ", time {}", MinSec(elapsed))?;
            }
        }
        all.extend(e.run_report);
    }
    write_metrics(args.engine.metrics_out.as_deref(), &all)?;
    out.flush()?;
    Ok(())
}

fn gen_pa(args: GenPaArgs) -> anyhow::Result<()> {
    let g = generate_pa(args.n, args.mu, args.seed)?;
    let mut out = output(args.output.as_deref())?;
    write_edge_list(&g, &mut out)?;
    out.flush()?;
    Ok(())
}

fn parse_algo(s: &str) -> anyhow::Result<Algorithm> {
    let (name, param) = match s.split_once(':') {
        Some((n, p)) => (n, Some(p)),
        None => (s, None),
    };
    let num = |what: &str| -> anyhow::Result<&str> { param.ok_or_else(|| usage(format!("{name} needs :{what}"))) };
    Ok(match name {
        "fff" => Algorithm::Fff,
        "sv" => Algorithm::Sv,
        "sv-delayed" => Algorithm::SvDelayed,
        "kernel" => Algorithm::Kernel,
        "afu" => Algorithm::Afu {
            buckets: num("B")?
                .parse()
                .map_err(|_| usage(format!("bad bucket count in {s}")))?,
        },
        "plain" => Algorithm::Plain {
            p: num("P")?
                .parse()
                .map_err(|_| usage(format!("bad probability in {s}")))?,
        },
        "cfff" => Algorithm::Color {
            c: num("C")?
                .parse()
                .map_err(|_| usage(format!("bad color count in {s}")))?,
        },
        _ => return Err(usage(format!("unknown algorithm {s:?}"))),
    })
}

fn bench(args: BenchArgs) -> anyhow::Result<()> {
    if args.k_min > args.k_max {
        return Err(usage("--k-min exceeds --k-max"));
    }
    let algorithms = args
        .algos
        .iter()
        .map(|s| parse_algo(s))
        .collect::<anyhow::Result<Vec<_>>>()?;
    let datasets = match (&args.manifest, &args.input) {
        (Some(m), _) => read_manifest(m)?,
        (None, Some(p)) => vec![Dataset {
            name: p
                .file_name()
                .map(|n| n.to_string_lossy().into_owned())
                .unwrap_or_default(),
            source: DatasetSource::Path(p.clone()),
            references: Default::default(),
        }],
        (None, None) => bail!(usage("--manifest or --input is required")),
    };
    let plan = BenchmarkPlan {
        datasets,
        algorithms,
        k_min: args.k_min,
        k_max: args.k_max,
        workers: args.engine.workers,
        deterministic: args.engine.deterministic,
        seed: args.seed,
    };
    let result = run_benchmark(&plan)?;
    let mut out = output(args.output.as_deref())?;
    match args.format {
        Format::Csv => write_benchmark_csv(&result, &mut out)?,
        Format::Table => write_benchmark_table(&result, &mut out)?,
    }
    out.flush()?;
    Ok(())
}

fn stats(args: StatsArgs) -> anyhow::Result<()> {
    let (g, ingest) = load_graph(&args.input).with_context(|| format!("reading {}", args.input.display()))?;
    let s = graph_stats(&g);
    let mut out = output(None)?;
    match args.format {
        Format::Csv => {
            writeln!(
                out,
                "nodes,edges,max_degree,max_high_degree,high_degree_bound,self_loops,duplicates"
            )?;
            writeln!(
                out,
                "{},{},{},{},{:.3},{},{}",
                s.nodes,
                s.edges,
                s.max_degree,
                s.max_high_degree,
                s.high_degree_bound,
                ingest.self_loops,
                ingest.duplicates
            )?;
        }
        Format::Table => {
            writeln!(out, "nodes            {}", s.nodes)?;
            writeln!(out, "edges            {}", s.edges)?;
            writeln!(out, "max degree       {}", s.max_degree)?;
            writeln!(
                out,
                "max high degree  {} (bound 2*sqrt(m) = {:.1})",
                s.max_high_degree, s.high_degree_bound
            )?;
            writeln!(
                out,
                "dropped          {} self-loops, {} duplicates",
                ingest.self_loops, ingest.duplicates
            )?;
        }
    }
    out.flush()?;
    Ok(())
}

fn exit_code(err: &anyhow::Error) -> u8 {
    if err.downcast_ref::<UsageError>().is_some() {
        return 2;
    }
    match err.downcast_ref::<qkcount::Error>() {
        Some(e) if e.is_argument_error() => 2,
        _ => 1,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Count(a) => count(a),
        Command::Estimate(a) => run_estimate(a),
        Command::GenPa(a) => gen_pa(a),
        Command::Bench(a) => bench(a),
        Command::Stats(a) => stats(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
