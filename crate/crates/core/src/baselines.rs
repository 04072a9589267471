//! Competitor algorithms: two-round Node Iterator++ triangle counting and the
//! one-round multiway-join k-clique counter.

use crate::error::{Error, Result};
use crate::exact::{self, edge_input, join_marked, AllPairs, CliqueCountReport, Round2Value};
use crate::graph::{Graph, NodeId, Rank};
use crate::kernel::{self, CliqueVisitor, LocalGraph};
use crate::mix;
use crate::mrengine::{Emitter, Engine, Group, RunReport};

/// Node Iterator++ triangle count.
///
/// With `delayed_paths = false`, round-1 reducers emit every length-2 path
/// `⟨(x, y); u⟩` centered at `u` with `u ≺ x ≺ y`. With `delayed_paths = true`
/// they emit `Γ+(u)` and the paths are generated by round-2 mappers instead.
/// Either way round 2 joins paths against marked edges.
pub fn sv_count(g: &Graph, engine: &Engine, delayed_paths: bool) -> Result<CliqueCountReport> {
    let mut report = RunReport::empty(engine.workers());
    let started = std::time::Instant::now();
    let edges = edge_input(g);
    let count_marked = |_: &(Rank, Rank), group: Group<'_, (Rank, Rank), Round2Value>, em: &mut Emitter<(), u64>| {
        if let Some(owners) = join_marked(group.values()) {
            if !owners.is_empty() {
                em.emit((), owners.len() as u64);
            }
        }
        Ok::<(), crate::mrengine::BoxError>(())
    };

    let partials = if delayed_paths {
        let (survivors, m1) = exact::round1(engine, &edges, 3)?;
        report.rounds.push(rename(m1, "sv-1"));
        let input = exact::round2_input(survivors, &edges);
        let (out, m2) = engine.run_round(
            "sv-2",
            &input,
            |record, members, em| {
                exact::map2(record, members, &AllPairs, em);
                Ok(())
            },
            count_marked,
        )?;
        report.rounds.push(m2);
        out
    } else {
        let (wedges, m1) = engine.run_round(
            "sv-1",
            &edges,
            |&(u, v), _, em: &mut Emitter<Rank, Rank>| {
                if u < v {
                    em.emit(u, v);
                }
                Ok(())
            },
            |&u, group: Group<'_, Rank, Rank>, em: &mut Emitter<(Rank, Rank), Round2Value>| {
                let mut members: Vec<Rank> = group.values().copied().collect();
                members.sort_unstable();
                for (i, &x) in members.iter().enumerate() {
                    for &y in &members[i + 1..] {
                        em.emit((x, y), Round2Value::Owner(u));
                    }
                }
                Ok(())
            },
        )?;
        report.rounds.push(m1);
        let mut input = wedges;
        input.extend(edges.iter().map(|&(e, ())| (e, Round2Value::EdgeMarker)));
        let (out, m2) = engine.run_round(
            "sv-2",
            &input,
            |&(u, v), value, em| {
                match value {
                    Round2Value::EdgeMarker if u < v => em.emit((u, v), Round2Value::EdgeMarker),
                    Round2Value::EdgeMarker => {}
                    wedge => em.emit((u, v), *wedge),
                }
                Ok(())
            },
            count_marked,
        )?;
        report.rounds.push(m2);
        out
    };

    let mut count = 0u64;
    for ((), c) in partials {
        count = count.checked_add(c).ok_or(Error::Overflow)?;
    }
    report.total_wall_time = started.elapsed();
    Ok(CliqueCountReport {
        k: 3,
        count,
        per_node: None,
        run_report: report,
    })
}

fn rename(mut m: crate::mrengine::RoundMetrics, name: &str) -> crate::mrengine::RoundMetrics {
    m.name = name.to_string();
    m
}

/// Bucket of a node label, uniform over `[0, b)` for a given seed.
pub fn bucket_of(node: NodeId, b: u32, seed: u64) -> u32 {
    mix::below(mix::hash_words(mix::DOMAIN_BUCKET, seed, &[node.0]), b as u64) as u32
}

/// A reducer identity: a non-decreasing sequence of `k` buckets.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct BucketTuple {
    pub buckets: Vec<u16>,
}

impl BucketTuple {
    /// Occurrences of each bucket in the tuple.
    pub fn multiplicities(&self, b: u32) -> Vec<u8> {
        let mut counts = vec![0u8; b as usize];
        for &x in &self.buckets {
            counts[x as usize] += 1;
        }
        counts
    }

    /// True when `{i, j}` is a sub-multiset of the tuple.
    pub fn contains_pair(&self, i: u32, j: u32) -> bool {
        let ci = self.buckets.iter().filter(|&&x| x as u32 == i).count();
        if i == j {
            ci >= 2
        } else {
            ci >= 1 && self.buckets.iter().any(|&x| x as u32 == j)
        }
    }
}

/// All non-decreasing k-tuples over `[0, b)`, in lexicographic order.
pub fn bucket_tuples(b: u32, k: usize) -> Vec<BucketTuple> {
    fn rec(b: u16, k: usize, from: u16, cur: &mut Vec<u16>, out: &mut Vec<BucketTuple>) {
        if cur.len() == k {
            out.push(BucketTuple { buckets: cur.clone() });
            return;
        }
        for x in from..b {
            cur.push(x);
            rec(b, k, x, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(b as u16, k, 0, &mut Vec::with_capacity(k), &mut out);
    out
}

pub fn binomial(n: u64, r: u64) -> u128 {
    if r > n {
        return 0;
    }
    let r = r.min(n - r);
    let mut acc: u128 = 1;
    for i in 0..r {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc
}

/// Reducers that receive any one edge: `C(b + k − 3, k − 2)`.
pub fn afu_replication(b: u32, k: usize) -> u128 {
    binomial(b as u64 + k as u64 - 3, k as u64 - 2)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct AfuConfig {
    pub buckets: u32,
    pub seed: u64,
    /// Abort before running if the predicted number of emitted pairs
    /// exceeds this.
    pub max_emitted: u128,
}

impl AfuConfig {
    pub fn new(buckets: u32) -> Self {
        AfuConfig {
            buckets,
            seed: 0,
            max_emitted: 4_000_000_000,
        }
    }
}

#[derive(Clone, Debug)]
pub struct AfuReport {
    pub counts: CliqueCountReport,
    pub buckets: u32,
    /// Emitted pairs per input edge.
    pub replication_factor: f64,
}

struct BucketFilter<'a> {
    bucket: &'a [u16],
    target: &'a [u8],
    seen: Vec<u8>,
}

impl CliqueVisitor<Rank> for BucketFilter<'_> {
    fn admits(&mut self, partial: &[Rank]) -> bool {
        self.seen.iter_mut().for_each(|c| *c = 0);
        partial.iter().all(|r| {
            let x = self.bucket[r.index()] as usize;
            self.seen[x] += 1;
            self.seen[x] <= self.target[x]
        })
    }

    fn visit(&mut self, _: &[Rank]) {}
}

/// One-round multiway-join k-clique count over `b` buckets.
///
/// Each edge goes to every reducer whose bucket tuple contains its endpoint
/// buckets; a reducer counts only the cliques whose bucket multiset equals
/// its tuple, so every clique is counted exactly once.
pub fn afu_count(g: &Graph, k: usize, engine: &Engine, config: AfuConfig) -> Result<AfuReport> {
    exact::check_k(k)?;
    let b = config.buckets;
    if b == 0 || b > u16::MAX as u32 {
        return Err(Error::invalid(format!("bucket count {b} outside [1, {}]", u16::MAX)));
    }
    let predicted = g.m() as u128 * afu_replication(b, k);
    let reducers = binomial(b as u64 + k as u64 - 1, k as u64);
    if predicted > config.max_emitted || reducers > config.max_emitted {
        return Err(Error::Sizing {
            predicted: predicted.max(reducers),
            cap: config.max_emitted,
        });
    }

    let tuples = bucket_tuples(b, k);
    let targets: Vec<Vec<u8>> = tuples.iter().map(|t| t.multiplicities(b)).collect();
    // tuple ids containing each bucket pair (i <= j)
    let mut by_pair: Vec<Vec<u32>> = vec![Vec::new(); (b * b) as usize];
    for (id, t) in tuples.iter().enumerate() {
        for i in 0..b {
            for j in i..b {
                if t.contains_pair(i, j) {
                    by_pair[(i * b + j) as usize].push(id as u32);
                }
            }
        }
    }
    let bucket: Vec<u16> = g
        .ranks()
        .map(|r| bucket_of(g.label(r), b, config.seed) as u16)
        .collect();
    let input: Vec<((Rank, Rank), ())> = g.oriented_edges().map(|e| (e, ())).collect();

    let started = std::time::Instant::now();
    let (partials, metrics) = engine.run_round(
        "afu",
        &input,
        |&(u, v), _, em: &mut Emitter<u32, (Rank, Rank)>| {
            let (bu, bv) = (bucket[u.index()] as u32, bucket[v.index()] as u32);
            let (i, j) = if bu <= bv { (bu, bv) } else { (bv, bu) };
            for &t in &by_pair[(i * b + j) as usize] {
                em.emit(t, (u, v));
            }
            Ok(())
        },
        |&t, group: Group<'_, u32, (Rank, Rank)>, em: &mut Emitter<u32, u64>| {
            let local = LocalGraph::from_edges(group.values().copied());
            let mut filter = BucketFilter {
                bucket: &bucket,
                target: &targets[t as usize],
                seen: vec![0; b as usize],
            };
            let c = kernel::count_cliques_with(&local, k, &mut filter)?;
            em.emit(t, c);
            Ok(())
        },
    )?;
    let mut count = 0u64;
    for (_, c) in partials {
        count = count.checked_add(c).ok_or(Error::Overflow)?;
    }
    let replication_factor = if g.m() == 0 {
        0.0
    } else {
        metrics.emitted_pairs as f64 / g.m() as f64
    };
    let mut report = RunReport::empty(engine.workers());
    report.rounds.push(metrics);
    report.total_wall_time = started.elapsed();
    Ok(AfuReport {
        counts: CliqueCountReport {
            k,
            count,
            per_node: None,
            run_report: report,
        },
        buckets: b,
        replication_factor,
    })
}
