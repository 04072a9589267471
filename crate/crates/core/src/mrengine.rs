//! A small in-process MapReduce runtime.
//!
//! A round maps every input pair, shuffles the emissions into groups of equal
//! key, and reduces each group. Map tasks and reduce groups run on a rayon
//! pool of `workers` threads. Each round records [`RoundMetrics`], which is
//! where communication (emitted pairs) and reducer space (group sizes) are
//! measured.
//!
//! In deterministic mode the shuffle sorts all emissions by `(key, value)`,
//! so groups are reduced in ascending key order with sorted value lists and
//! the output is identical for any worker count. Otherwise emissions are hash
//! partitioned and only sorted by key inside each partition.

use std::collections::hash_map::DefaultHasher;
use std::fmt::Debug;
use std::hash::{Hash, Hasher};
use std::io::Write;
use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

pub type BoxError = Box<dyn std::error::Error + Send + Sync>;

#[derive(Debug, Error)]
pub enum EngineError {
    #[error("round {round:?}: map failed on key {key}: {source}")]
    Map {
        round: String,
        key: String,
        source: BoxError,
    },
    #[error("round {round:?}: reduce failed on key {key}: {source}")]
    Reduce {
        round: String,
        key: String,
        source: BoxError,
    },
    #[error("invalid engine configuration: {0}")]
    Config(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct EngineConfig {
    pub workers: usize,
    pub deterministic: bool,
}

impl Default for EngineConfig {
    fn default() -> Self {
        EngineConfig {
            workers: 1,
            deterministic: true,
        }
    }
}

/// Collects the pairs a map or reduce call emits.
#[derive(Debug)]
pub struct Emitter<K, V> {
    out: Vec<(K, V)>,
}

impl<K, V> Emitter<K, V> {
    fn new() -> Self {
        Emitter { out: Vec::new() }
    }

    #[inline]
    pub fn emit(&mut self, key: K, value: V) {
        self.out.push((key, value));
    }
}

/// All shuffled pairs sharing one key.
#[derive(Clone, Copy, Debug)]
pub struct Group<'a, K, V> {
    pairs: &'a [(K, V)],
}

impl<'a, K, V> Group<'a, K, V> {
    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn values(&self) -> impl ExactSizeIterator<Item = &'a V> + Clone + 'a {
        self.pairs.iter().map(|(_, v)| v)
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct RoundMetrics {
    pub name: String,
    pub map_input_pairs: u64,
    pub emitted_pairs: u64,
    pub distinct_keys: u64,
    /// Largest reducer input, the local-space proxy.
    pub max_group_size: u64,
    /// Values delivered to all reducers, the total-space proxy.
    pub total_values: u64,
    pub output_pairs: u64,
    pub wall_time: Duration,
    pub map_time: Duration,
    pub shuffle_time: Duration,
    pub reduce_time: Duration,
    pub max_reduce_time: Duration,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct RunReport {
    pub rounds: Vec<RoundMetrics>,
    pub total_wall_time: Duration,
    pub workers: usize,
}

#[derive(Serialize)]
struct MetricsRow<'a> {
    round: usize,
    name: &'a str,
    map_input_pairs: u64,
    emitted_pairs: u64,
    distinct_keys: u64,
    max_group_size: u64,
    total_values: u64,
    output_pairs: u64,
    wall_ms: f64,
    map_ms: f64,
    shuffle_ms: f64,
    reduce_ms: f64,
    max_reduce_ms: f64,
    workers: usize,
}

pub(crate) fn millis(d: Duration) -> f64 {
    d.as_secs_f64() * 1e3
}

impl RunReport {
    pub fn empty(workers: usize) -> Self {
        RunReport {
            rounds: Vec::new(),
            total_wall_time: Duration::ZERO,
            workers,
        }
    }

    pub fn round(&self, name: &str) -> Option<&RoundMetrics> {
        self.rounds.iter().find(|r| r.name == name)
    }

    /// Appends the rounds of `other`, as if it ran after `self`.
    pub fn extend(&mut self, other: RunReport) {
        self.total_wall_time += other.total_wall_time;
        self.workers = self.workers.max(other.workers);
        self.rounds.extend(other.rounds);
    }

    /// Header `round,name,map_input_pairs,emitted_pairs,distinct_keys,
    /// max_group_size,total_values,output_pairs,wall_ms,map_ms,shuffle_ms,
    /// reduce_ms,max_reduce_ms,workers`; one row per round.
    pub fn write_csv<W: Write>(&self, out: W) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        for (i, r) in self.rounds.iter().enumerate() {
            w.serialize(MetricsRow {
                round: i + 1,
                name: &r.name,
                map_input_pairs: r.map_input_pairs,
                emitted_pairs: r.emitted_pairs,
                distinct_keys: r.distinct_keys,
                max_group_size: r.max_group_size,
                total_values: r.total_values,
                output_pairs: r.output_pairs,
                wall_ms: millis(r.wall_time),
                map_ms: millis(r.map_time),
                shuffle_ms: millis(r.shuffle_time),
                reduce_ms: millis(r.reduce_time),
                max_reduce_ms: millis(r.max_reduce_time),
                workers: self.workers,
            })?;
        }
        w.flush()?;
        Ok(())
    }
}

pub struct Engine {
    config: EngineConfig,
    pool: rayon::ThreadPool,
}

impl Debug for Engine {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Engine").field("config", &self.config).finish()
    }
}

struct ReduceAcc<KO, VO> {
    out: Vec<(KO, VO)>,
    max_time: Duration,
}

impl Engine {
    pub fn new(config: EngineConfig) -> Result<Self, EngineError> {
        if config.workers == 0 {
            return Err(EngineError::Config("workers must be at least 1".into()));
        }
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(config.workers)
            .thread_name(|i| format!("mr-worker-{i}"))
            .build()
            .map_err(|e| EngineError::Config(e.to_string()))?;
        Ok(Engine { config, pool })
    }

    pub fn with_workers(workers: usize, deterministic: bool) -> Result<Self, EngineError> {
        Self::new(EngineConfig { workers, deterministic })
    }

    pub fn config(&self) -> EngineConfig {
        self.config
    }

    pub fn workers(&self) -> usize {
        self.config.workers
    }

    /// Runs one map → shuffle → reduce round.
    ///
    /// `map` and `reduce` may be called concurrently from any worker and in any
    /// order. The first failure aborts the round and reports the key of the
    /// call that failed.
    pub fn run_round<KI, VI, K, V, KO, VO, M, R>(
        &self,
        name: &str,
        input: &[(KI, VI)],
        map: M,
        reduce: R,
    ) -> Result<(Vec<(KO, VO)>, RoundMetrics), EngineError>
    where
        KI: Debug + Sync,
        VI: Sync,
        K: Ord + Hash + Debug + Send + Sync,
        V: Ord + Send + Sync,
        KO: Send,
        VO: Send,
        M: Fn(&KI, &VI, &mut Emitter<K, V>) -> Result<(), BoxError> + Sync,
        R: Fn(&K, Group<'_, K, V>, &mut Emitter<KO, VO>) -> Result<(), BoxError> + Sync,
    {
        let (map, reduce) = (&map, &reduce);
        self.pool.install(|| self.round_inner(name, input, map, reduce))
    }

    fn round_inner<KI, VI, K, V, KO, VO, M, R>(
        &self,
        name: &str,
        input: &[(KI, VI)],
        map: M,
        reduce: R,
    ) -> Result<(Vec<(KO, VO)>, RoundMetrics), EngineError>
    where
        KI: Debug + Sync,
        VI: Sync,
        K: Ord + Hash + Debug + Send + Sync,
        V: Ord + Send + Sync,
        KO: Send,
        VO: Send,
        M: Fn(&KI, &VI, &mut Emitter<K, V>) -> Result<(), BoxError> + Sync,
        R: Fn(&K, Group<'_, K, V>, &mut Emitter<KO, VO>) -> Result<(), BoxError> + Sync,
    {
        let started = Instant::now();
        let mut metrics = RoundMetrics {
            name: name.to_string(),
            map_input_pairs: input.len() as u64,
            ..Default::default()
        };

        // map
        let chunk = (input.len() / (self.config.workers * 16)).max(1);
        let mapped: Vec<Vec<(K, V)>> = input
            .par_chunks(chunk)
            .map(|pairs| {
                let mut em = Emitter::new();
                for (k, v) in pairs {
                    map(k, v, &mut em).map_err(|source| EngineError::Map {
                        round: name.to_string(),
                        key: format!("{k:?}"),
                        source,
                    })?;
                }
                Ok(em.out)
            })
            .collect::<Result<_, EngineError>>()?;
        metrics.emitted_pairs = mapped.iter().map(|v| v.len() as u64).sum();
        let map_done = Instant::now();
        metrics.map_time = map_done - started;

        // shuffle
        let partitions = if self.config.deterministic {
            let mut all: Vec<(K, V)> = Vec::with_capacity(metrics.emitted_pairs as usize);
            for part in mapped {
                all.extend(part);
            }
            all.par_sort_unstable();
            vec![all]
        } else {
            hash_partition(mapped, self.config.workers * 8)
        };
        let groups: Vec<&[(K, V)]> = partitions
            .par_iter()
            .map(|p| split_groups(p))
            .collect::<Vec<_>>()
            .into_iter()
            .flatten()
            .collect();
        metrics.distinct_keys = groups.len() as u64;
        metrics.total_values = groups.iter().map(|g| g.len() as u64).sum();
        metrics.max_group_size = groups.iter().map(|g| g.len() as u64).max().unwrap_or(0);
        let shuffle_done = Instant::now();
        metrics.shuffle_time = shuffle_done - map_done;

        // reduce
        let accs: Vec<ReduceAcc<KO, VO>> = groups
            .par_iter()
            .try_fold(
                || ReduceAcc {
                    out: Vec::new(),
                    max_time: Duration::ZERO,
                },
                |mut acc, pairs| {
                    let t = Instant::now();
                    let key = &pairs[0].0;
                    let mut em = Emitter {
                        out: std::mem::take(&mut acc.out),
                    };
                    reduce(key, Group { pairs }, &mut em).map_err(|source| EngineError::Reduce {
                        round: name.to_string(),
                        key: format!("{key:?}"),
                        source,
                    })?;
                    acc.out = em.out;
                    acc.max_time = acc.max_time.max(t.elapsed());
                    Ok::<_, EngineError>(acc)
                },
            )
            .collect::<Result<_, EngineError>>()?;
        let mut output = Vec::with_capacity(accs.iter().map(|a| a.out.len()).sum());
        for acc in accs {
            metrics.max_reduce_time = metrics.max_reduce_time.max(acc.max_time);
            output.extend(acc.out);
        }
        metrics.output_pairs = output.len() as u64;
        let done = Instant::now();
        metrics.reduce_time = done - shuffle_done;
        metrics.wall_time = done - started;
        Ok((output, metrics))
    }
}

fn hash_partition<K: Hash + Ord + Send + Sync, V: Send + Sync>(
    mapped: Vec<Vec<(K, V)>>,
    parts: usize,
) -> Vec<Vec<(K, V)>> {
    let scattered: Vec<Vec<Vec<(K, V)>>> = mapped
        .into_par_iter()
        .map(|chunk| {
            let mut buckets: Vec<Vec<(K, V)>> = (0..parts).map(|_| Vec::new()).collect();
            for (k, v) in chunk {
                let mut h = DefaultHasher::new();
                k.hash(&mut h);
                buckets[(h.finish() % parts as u64) as usize].push((k, v));
            }
            buckets
        })
        .collect();
    let mut partitions: Vec<Vec<(K, V)>> = (0..parts).map(|_| Vec::new()).collect();
    for chunk in scattered {
        for (p, bucket) in chunk.into_iter().enumerate() {
            partitions[p].extend(bucket);
        }
    }
    partitions
        .par_iter_mut()
        .for_each(|p| p.sort_unstable_by(|a, b| a.0.cmp(&b.0)));
    partitions
}

/// Splits a key-sorted slice into runs of equal key.
fn split_groups<K: Eq, V>(sorted: &[(K, V)]) -> Vec<&[(K, V)]> {
    let mut groups = Vec::new();
    let mut start = 0;
    for i in 1..=sorted.len() {
        if i == sorted.len() || sorted[i].0 != sorted[start].0 {
            if i > start {
                groups.push(&sorted[start..i]);
            }
            start = i;
        }
    }
    groups
}

/// Chains rounds whose key and value types may change from one to the next.
pub struct Pipeline<'e, K, V> {
    engine: &'e Engine,
    data: Vec<(K, V)>,
    report: RunReport,
    started: Instant,
}

impl<'e, K, V> Pipeline<'e, K, V>
where
    K: Debug + Sync,
    V: Sync,
{
    pub fn new(engine: &'e Engine, input: Vec<(K, V)>) -> Self {
        Pipeline {
            engine,
            data: input,
            report: RunReport::empty(engine.workers()),
            started: Instant::now(),
        }
    }

    pub fn round<K2, V2, KO, VO, M, R>(self, name: &str, map: M, reduce: R) -> Result<Pipeline<'e, KO, VO>, EngineError>
    where
        K2: Ord + Hash + Debug + Send + Sync,
        V2: Ord + Send + Sync,
        KO: Send,
        VO: Send,
        M: Fn(&K, &V, &mut Emitter<K2, V2>) -> Result<(), BoxError> + Sync,
        R: Fn(&K2, Group<'_, K2, V2>, &mut Emitter<KO, VO>) -> Result<(), BoxError> + Sync,
    {
        let (data, metrics) = self.engine.run_round(name, &self.data, map, reduce)?;
        let mut report = self.report;
        report.rounds.push(metrics);
        Ok(Pipeline {
            engine: self.engine,
            data,
            report,
            started: self.started,
        })
    }

    pub fn data(&self) -> &[(K, V)] {
        &self.data
    }

    pub fn finish(self) -> (Vec<(K, V)>, RunReport) {
        let mut report = self.report;
        report.total_wall_time = self.started.elapsed();
        (self.data, report)
    }
}
