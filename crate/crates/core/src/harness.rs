//! Synthetic generators, graph statistics and the benchmark runner.

use std::collections::BTreeMap;
use std::fmt;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Deserialize;

use crate::baselines::{afu_count, sv_count, AfuConfig};
use crate::error::{Error, Result};
use crate::exact::fff_count;
use crate::graph::{load_graph, normalize, Edge, Graph};
use crate::kernel::{count_cliques, LocalGraph};
use crate::mrengine::{millis, Engine, RunReport};
use crate::sampling::{estimate, SamplingConfig};

/// Preferential attachment graph on nodes `0..n`.
///
/// Starts from a clique on `mu + 1` nodes; every later node links to `mu`
/// distinct earlier nodes picked with probability proportional to degree.
pub fn generate_pa(n: usize, mu: usize, seed: u64) -> Result<Graph> {
    if mu == 0 || n < mu + 1 {
        return Err(Error::invalid(format!(
            "preferential attachment needs mu >= 1 and n >= mu + 1 (n={n}, mu={mu})"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut edges = Vec::with_capacity(mu * (mu + 1) / 2 + (n - mu - 1) * mu);
    // each edge contributes both endpoints, so a uniform pick is degree-proportional
    let mut endpoints: Vec<u64> = Vec::with_capacity(2 * edges.capacity());
    for a in 0..=mu as u64 {
        for b in a + 1..=mu as u64 {
            edges.push(Edge::new(a, b));
            endpoints.extend([a, b]);
        }
    }
    let mut targets = Vec::with_capacity(mu);
    for v in mu as u64 + 1..n as u64 {
        targets.clear();
        while targets.len() < mu {
            let t = endpoints[rng.gen_range(0..endpoints.len())];
            if !targets.contains(&t) {
                targets.push(t);
            }
        }
        for &t in &targets {
            edges.push(Edge::new(t, v));
            endpoints.extend([t, v]);
        }
    }
    Ok(normalize(&edges))
}

/// Erdős–Rényi graph on nodes `0..n`, using geometric skips between edges.
pub fn generate_gnp(n: usize, p: f64, seed: u64) -> Result<Graph> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::invalid(format!("edge probability {p} outside [0, 1]")));
    }
    let mut edges = Vec::new();
    if p > 0.0 && n > 1 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let log_q = (1.0 - p).ln();
        let (mut v, mut w): (i64, i64) = (1, -1);
        while (v as usize) < n {
            let skip = if p >= 1.0 {
                0
            } else {
                ((1.0 - rng.gen::<f64>()).ln() / log_q).floor() as i64
            };
            w += 1 + skip;
            while w >= v && (v as usize) < n {
                w -= v;
                v += 1;
            }
            if (v as usize) < n {
                edges.push(Edge::new(w as u64, v as u64));
            }
        }
    }
    Ok(normalize(&edges))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GraphStats {
    pub nodes: usize,
    pub edges: usize,
    pub max_degree: u32,
    pub max_high_degree: usize,
    /// The `2·√m` ceiling on high-neighborhood size.
    pub high_degree_bound: f64,
}

pub fn graph_stats(g: &Graph) -> GraphStats {
    GraphStats {
        nodes: g.n(),
        edges: g.m(),
        max_degree: g.ranks().map(|r| g.degree(r)).max().unwrap_or(0),
        max_high_degree: g.max_high_degree(),
        high_degree_bound: 2.0 * (g.m() as f64).sqrt(),
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Algorithm {
    Fff,
    Sv,
    SvDelayed,
    Afu { buckets: u32 },
    Kernel,
    Plain { p: f64 },
    Color { c: u32 },
}

impl Algorithm {
    pub fn is_exact(&self) -> bool {
        !matches!(self, Algorithm::Plain { .. } | Algorithm::Color { .. })
    }

    pub fn name(&self) -> &'static str {
        match self {
            Algorithm::Fff => "fff",
            Algorithm::Sv => "sv",
            Algorithm::SvDelayed => "sv-delayed",
            Algorithm::Afu { .. } => "afu",
            Algorithm::Kernel => "kernel",
            Algorithm::Plain { .. } => "plain",
            Algorithm::Color { .. } => "cfff",
        }
    }

    fn params(&self) -> String {
        match self {
            Algorithm::Afu { buckets } => format!("b={buckets}"),
            Algorithm::Plain { p } => format!("p={p}"),
            Algorithm::Color { c } => format!("c={c}"),
            _ => String::new(),
        }
    }
}

#[derive(Clone, Debug)]
pub enum DatasetSource {
    Path(PathBuf),
    Graph(Graph),
}

#[derive(Clone, Debug)]
pub struct Dataset {
    pub name: String,
    pub source: DatasetSource,
    /// Known k-clique counts used for relative errors.
    pub references: BTreeMap<usize, u64>,
}

impl Dataset {
    pub fn in_memory(name: impl Into<String>, g: Graph) -> Self {
        Dataset {
            name: name.into(),
            source: DatasetSource::Graph(g),
            references: BTreeMap::new(),
        }
    }
}

#[derive(Clone, Debug)]
pub struct BenchmarkPlan {
    pub datasets: Vec<Dataset>,
    pub algorithms: Vec<Algorithm>,
    pub k_min: usize,
    pub k_max: usize,
    pub workers: usize,
    pub deterministic: bool,
    pub seed: u64,
}

#[derive(Deserialize)]
struct ManifestFile {
    #[serde(default)]
    dataset: Vec<ManifestEntry>,
}

#[derive(Deserialize)]
struct ManifestEntry {
    name: String,
    path: PathBuf,
    #[serde(default)]
    reference: BTreeMap<String, u64>,
}

/// Reads a TOML manifest of `[[dataset]]` tables with `name`, `path` and an
/// optional `reference` table mapping k to a known count. Relative paths are
/// resolved against the manifest's directory.
pub fn read_manifest(path: impl AsRef<Path>) -> Result<Vec<Dataset>> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)?;
    let parsed: ManifestFile =
        toml::from_str(&text).map_err(|e| Error::invalid(format!("manifest {}: {e}", path.display())))?;
    let base = path.parent().unwrap_or(Path::new("."));
    parsed
        .dataset
        .into_iter()
        .map(|entry| {
            let references = entry
                .reference
                .into_iter()
                .map(|(k, q)| {
                    k.parse::<usize>()
                        .map(|k| (k, q))
                        .map_err(|_| Error::invalid(format!("reference key {k:?} is not an integer")))
                })
                .collect::<Result<_>>()?;
            Ok(Dataset {
                name: entry.name,
                source: DatasetSource::Path(base.join(entry.path)),
                references,
            })
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct BenchmarkRow {
    pub dataset: String,
    pub algorithm: String,
    pub k: usize,
    pub params: String,
    pub workers: usize,
    pub seed: u64,
    /// Count or estimate.
    pub result: Option<f64>,
    pub relative_error: Option<f64>,
    pub wall_time: Duration,
    pub round_times: Vec<(String, Duration)>,
    pub emitted_pairs: u64,
    pub max_group_size: u64,
    pub error: Option<String>,
}

/// `q_{k+1} / q_k` for one dataset, from its exact counts.
#[derive(Clone, Debug, PartialEq)]
pub struct GrowthRatio {
    pub dataset: String,
    pub k: usize,
    pub ratio: f64,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct BenchmarkOutput {
    pub rows: Vec<BenchmarkRow>,
    pub ratios: Vec<GrowthRatio>,
}

fn run_one(g: &Graph, alg: Algorithm, k: usize, engine: &Engine, seed: u64) -> Result<(f64, RunReport)> {
    Ok(match alg {
        Algorithm::Fff => {
            let r = fff_count(g, k, engine, false)?;
            (r.count as f64, r.run_report)
        }
        Algorithm::Sv | Algorithm::SvDelayed => {
            if k != 3 {
                return Err(Error::invalid("sv counts triangles only (k = 3)"));
            }
            let r = sv_count(g, engine, alg == Algorithm::SvDelayed)?;
            (r.count as f64, r.run_report)
        }
        Algorithm::Afu { buckets } => {
            let r = afu_count(
                g,
                k,
                engine,
                AfuConfig {
                    seed,
                    ..AfuConfig::new(buckets)
                },
            )?;
            (r.counts.count as f64, r.counts.run_report)
        }
        Algorithm::Kernel => {
            let started = Instant::now();
            let q = count_cliques(&LocalGraph::from_graph(g), k)?;
            let mut report = RunReport::empty(1);
            report.total_wall_time = started.elapsed();
            (q as f64, report)
        }
        Algorithm::Plain { p } => {
            let e = estimate(g, k, SamplingConfig::plain(p, seed)?, engine)?;
            (e.value, e.run_report)
        }
        Algorithm::Color { c } => {
            let e = estimate(g, k, SamplingConfig::color(c, seed)?, engine)?;
            (e.value, e.run_report)
        }
    })
}

/// Runs every (dataset, k, algorithm) combination in order. Failures are
/// recorded in their row and the run continues.
pub fn run_benchmark(plan: &BenchmarkPlan) -> Result<BenchmarkOutput> {
    let engine = Engine::with_workers(plan.workers, plan.deterministic)?;
    let mut out = BenchmarkOutput::default();
    for dataset in &plan.datasets {
        let loaded;
        let graph: std::result::Result<&Graph, String> = match &dataset.source {
            DatasetSource::Graph(g) => Ok(g),
            DatasetSource::Path(p) => match load_graph(p) {
                Ok((g, _)) => {
                    loaded = g;
                    Ok(&loaded)
                }
                Err(e) => Err(format!("{}: {e}", p.display())),
            },
        };
        let first_row = out.rows.len();
        for k in plan.k_min..=plan.k_max {
            for &alg in &plan.algorithms {
                let mut row = BenchmarkRow {
                    dataset: dataset.name.clone(),
                    algorithm: alg.name().to_string(),
                    k,
                    params: alg.params(),
                    workers: plan.workers,
                    seed: plan.seed,
                    result: None,
                    relative_error: None,
                    wall_time: Duration::ZERO,
                    round_times: Vec::new(),
                    emitted_pairs: 0,
                    max_group_size: 0,
                    error: None,
                };
                let started = Instant::now();
                match graph
                    .as_ref()
                    .map_err(|e| e.clone())
                    .and_then(|g| run_one(g, alg, k, &engine, plan.seed).map_err(|e| e.to_string()))
                {
                    Ok((value, report)) => {
                        row.result = Some(value);
                        row.round_times = report.rounds.iter().map(|r| (r.name.clone(), r.wall_time)).collect();
                        row.emitted_pairs = report.rounds.iter().map(|r| r.emitted_pairs).sum();
                        row.max_group_size = report.rounds.iter().map(|r| r.max_group_size).max().unwrap_or(0);
                    }
                    Err(e) => row.error = Some(e),
                }
                row.wall_time = started.elapsed();
                out.rows.push(row);
            }
        }

        let rows = &mut out.rows[first_row..];
        let mut exact: BTreeMap<usize, f64> = dataset.references.iter().map(|(&k, &q)| (k, q as f64)).collect();
        for (row, alg) in rows.iter().zip(plan.algorithms.iter().cycle()) {
            if let (Some(v), true) = (row.result, alg.is_exact()) {
                exact.entry(row.k).or_insert(v);
            }
        }
        for row in rows.iter_mut() {
            if let (Some(v), Some(&q)) = (row.result, exact.get(&row.k)) {
                row.relative_error = Some(if q == 0.0 {
                    if v == 0.0 {
                        0.0
                    } else {
                        f64::INFINITY
                    }
                } else {
                    (v - q).abs() / q
                });
            }
        }
        for k in plan.k_min..plan.k_max {
            if let (Some(&a), Some(&b)) = (exact.get(&k), exact.get(&(k + 1))) {
                if a > 0.0 {
                    out.ratios.push(GrowthRatio {
                        dataset: dataset.name.clone(),
                        k,
                        ratio: b / a,
                    });
                }
            }
        }
    }
    Ok(out)
}

pub const BENCH_CSV_HEADER: [&str; 13] = [
    "dataset",
    "algorithm",
    "k",
    "params",
    "workers",
    "seed",
    "result",
    "relative_error",
    "wall_ms",
    "round_ms",
    "emitted_pairs",
    "max_group_size",
    "error",
];

pub fn write_benchmark_csv<W: Write>(output: &BenchmarkOutput, out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(BENCH_CSV_HEADER)?;
    for r in &output.rows {
        let rounds: Vec<String> = r
            .round_times
            .iter()
            .map(|(name, t)| format!("{name}={:.3}", millis(*t)))
            .collect();
        w.write_record([
            r.dataset.clone(),
            r.algorithm.clone(),
            r.k.to_string(),
            r.params.clone(),
            r.workers.to_string(),
            r.seed.to_string(),
            r.result.map(format_result).unwrap_or_default(),
            r.relative_error.map(|e| format!("{e:.6}")).unwrap_or_default(),
            format!("{:.3}", millis(r.wall_time)),
            rounds.join(";"),
            r.emitted_pairs.to_string(),
            r.max_group_size.to_string(),
            r.error.clone().unwrap_or_default(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

fn format_result(v: f64) -> String {
    if v.fract() == 0.0 && v.abs() < 1e15 {
        format!("{}", v as i64)
    } else {
        format!("{v:.3}")
    }
}

/// Minutes and seconds, e.g. `02:07.5`.
pub struct MinSec(pub Duration);

impl fmt::Display for MinSec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let secs = self.0.as_secs_f64();
        let minutes = (secs / 60.0).floor();
        write!(f, "{:02}:{:04.1}", minutes as u64, secs - minutes * 60.0)
    }
}

pub fn write_benchmark_table<W: Write>(output: &BenchmarkOutput, mut out: W) -> std::io::Result<()> {
    writeln!(
        out,
        "{:<16} {:<10} {:>2} {:<8} {:>20} {:>10} {:>9}",
        "dataset", "algorithm", "k", "params", "result", "rel.err", "time"
    )?;
    for r in &output.rows {
        let result = match (&r.result, &r.error) {
            (Some(v), _) => format_result(*v),
            (None, Some(_)) => "error".to_string(),
            _ => String::new(),
        };
        let err = r
            .relative_error
            .map(|e| format!("{:.4}%", 100.0 * e))
            .unwrap_or_default();
        writeln!(
            out,
            "{:<16} {:<10} {:>2} {:<8} {:>20} {:>10} {:>9}",
            r.dataset,
            r.algorithm,
            r.k,
            r.params,
            result,
            err,
            MinSec(r.wall_time).to_string()
        )?;
        if let Some(e) = &r.error {
            writeln!(out, "    {e}")?;
        }
    }
    if !output.ratios.is_empty() {
        writeln!(out)?;
        for g in &output.ratios {
            writeln!(out, "{:<16} q{}/q{} = {:.2}x", g.dataset, g.k + 1, g.k, g.ratio)?;
        }
    }
    Ok(())
}
