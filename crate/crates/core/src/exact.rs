//! Exact k-clique counting in three MapReduce rounds.
//!
//! 1. Map emits `⟨u; v⟩` for every edge with `u ≺ v`; reduce collects the
//!    high-neighborhood `Γ+(u)` and keeps it only if it has at least `k − 1`
//!    members.
//! 2. Map turns each surviving `Γ+(u)` into pairs `⟨(x, y); u⟩` for `x ≺ y`
//!    in `Γ+(u)`, and each genuine edge `(x, y)` into `⟨(x, y); $⟩`. A reducer
//!    whose group holds the `$` marker emits the owners that need that edge.
//! 3. Map routes each edge to its owners; the reducer for `u` rebuilds the
//!    subgraph induced by `Γ+(u)` and counts its `(k − 1)`-cliques. Every
//!    k-clique is counted once, by its ≺-smallest node.

use std::collections::BTreeMap;
use std::io::Write;

use crate::error::{Error, Result};
use crate::graph::{Graph, NodeId, Rank};
use crate::kernel::{self, LocalGraph};
use crate::mrengine::{BoxError, Emitter, Engine, Group, RoundMetrics, RunReport};

pub const MIN_K: usize = 3;
pub const MAX_K: usize = 16;

pub(crate) fn check_k(k: usize) -> Result<()> {
    if !(MIN_K..=MAX_K).contains(&k) {
        return Err(Error::invalid(format!("clique size k={k} outside [{MIN_K}, {MAX_K}]")));
    }
    Ok(())
}

/// Value of a round-2 pair: an owner that needs the edge, or the edge marker.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Round2Value {
    Owner(Rank),
    EdgeMarker,
}

/// Key of a round-2 input pair: either a high-neighborhood owner or an edge.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Round2Record {
    HighNeighborhood(Rank),
    Edge(Rank, Rank),
}

/// What a round-3 reducer emits under its owner or member key.
#[derive(Clone, Debug, PartialEq)]
pub enum Round3Output {
    /// `(k − 1)`-cliques found in the owner's high-neighborhood, and that
    /// count multiplied by the round's scale factor.
    Owned { count: u64, scaled: f64 },
    /// Cliques of this owner that also contain the keyed node.
    Incident(u64),
    /// One clique, owner first, members ascending.
    Clique(Vec<Rank>),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Round3Mode {
    Count,
    PerNode,
    List,
}

/// Decides which high-neighbor pairs round-2 mappers emit.
pub trait PairSelector: Sync {
    /// Calls `emit(x, y)` for the selected pairs of `members` (sorted
    /// ascending), always with `x < y`.
    fn select(&self, owner: Rank, members: &[Rank], emit: &mut dyn FnMut(Rank, Rank));

    /// Factor applied to each owner's clique count in round 3.
    fn scale(&self, k: usize) -> f64 {
        let _ = k;
        1.0
    }
}

/// Emits every pair.
#[derive(Clone, Copy, Debug, Default)]
pub struct AllPairs;

impl PairSelector for AllPairs {
    fn select(&self, _owner: Rank, members: &[Rank], emit: &mut dyn FnMut(Rank, Rank)) {
        for (i, &x) in members.iter().enumerate() {
            for &y in &members[i + 1..] {
                emit(x, y);
            }
        }
    }
}

#[derive(Clone, Debug)]
pub struct CliqueCountReport {
    pub k: usize,
    pub count: u64,
    /// Cliques containing each node; nodes in no clique are omitted.
    pub per_node: Option<BTreeMap<NodeId, u64>>,
    pub run_report: RunReport,
}

/// Raw result of a (possibly sampled) FFF run.
#[derive(Clone, Debug)]
pub struct FffOutput {
    pub count: u64,
    pub scaled: f64,
    pub per_node: Option<BTreeMap<NodeId, u64>>,
    pub cliques: Option<Vec<Vec<NodeId>>>,
    pub run_report: RunReport,
}

/// High-neighborhoods that survive the round-1 size filter.
pub type Survivors = Vec<(Rank, Vec<Rank>)>;

/// Each edge with the owners whose induced subgraph needs it.
pub type OwnerLists = Vec<((Rank, Rank), Vec<Rank>)>;

/// Round-1 input: every edge once per direction, `⟨(u, v); ∅⟩`.
pub fn edge_input(g: &Graph) -> Vec<((Rank, Rank), ())> {
    let mut input = Vec::with_capacity(2 * g.m());
    for (a, b) in g.oriented_edges() {
        input.push(((a, b), ()));
        input.push(((b, a), ()));
    }
    input
}

pub fn round1(engine: &Engine, edges: &[((Rank, Rank), ())], k: usize) -> Result<(Survivors, RoundMetrics)> {
    let threshold = k - 1;
    let (out, metrics) = engine.run_round(
        "fff-1",
        edges,
        |&(u, v), _, em: &mut Emitter<Rank, Rank>| {
            if u < v {
                em.emit(u, v);
            }
            Ok(())
        },
        |&u, group: Group<'_, Rank, Rank>, em| {
            if group.len() >= threshold {
                let mut members: Vec<Rank> = group.values().copied().collect();
                members.sort_unstable();
                em.emit(u, members);
            }
            Ok(())
        },
    )?;
    Ok((out, metrics))
}

/// Round-2 input: surviving high-neighborhoods plus the original edges.
pub fn round2_input(survivors: Survivors, edges: &[((Rank, Rank), ())]) -> Vec<(Round2Record, Vec<Rank>)> {
    let mut input = Vec::with_capacity(survivors.len() + edges.len());
    input.extend(
        survivors
            .into_iter()
            .map(|(u, members)| (Round2Record::HighNeighborhood(u), members)),
    );
    input.extend(edges.iter().map(|&((u, v), ())| (Round2Record::Edge(u, v), Vec::new())));
    input
}

/// The round-2 map: wedges from high-neighborhoods, markers from edges.
pub(crate) fn map2(
    record: &Round2Record,
    members: &[Rank],
    selector: &dyn PairSelector,
    em: &mut Emitter<(Rank, Rank), Round2Value>,
) {
    match *record {
        Round2Record::Edge(u, v) => {
            if u < v {
                em.emit((u, v), Round2Value::EdgeMarker);
            }
        }
        Round2Record::HighNeighborhood(u) => {
            selector.select(u, members, &mut |x, y| em.emit((x, y), Round2Value::Owner(u)));
        }
    }
}

/// Owners joined against the edge marker: `None` when the key is not an
/// edge of the graph.
pub fn join_marked<'a>(values: impl Iterator<Item = &'a Round2Value>) -> Option<Vec<Rank>> {
    let mut marked = false;
    let mut owners = Vec::new();
    for v in values {
        match *v {
            Round2Value::EdgeMarker => marked = true,
            Round2Value::Owner(u) => owners.push(u),
        }
    }
    marked.then_some(owners)
}

pub fn round2(
    engine: &Engine,
    input: &[(Round2Record, Vec<Rank>)],
    selector: &dyn PairSelector,
) -> Result<(OwnerLists, RoundMetrics)> {
    let (out, metrics) = engine.run_round(
        "fff-2",
        input,
        |record, members, em| {
            map2(record, members, selector, em);
            Ok(())
        },
        |&edge, group: Group<'_, (Rank, Rank), Round2Value>, em| {
            if let Some(mut owners) = join_marked(group.values()) {
                owners.sort_unstable();
                em.emit(edge, owners);
            }
            Ok(())
        },
    )?;
    Ok((out, metrics))
}

fn reduce3(
    owner: Rank,
    group: Group<'_, Rank, (Rank, Rank)>,
    k: usize,
    mode: Round3Mode,
    scale: f64,
    em: &mut Emitter<Rank, Round3Output>,
) -> std::result::Result<(), BoxError> {
    let local = LocalGraph::from_edges(group.values().copied());
    let count = match mode {
        Round3Mode::Count => kernel::count_cliques(&local, k - 1)?,
        Round3Mode::PerNode => {
            let mut counts: BTreeMap<Rank, u64> = BTreeMap::new();
            let n = kernel::count_cliques_with(&local, k - 1, &mut |c: &[Rank]| {
                for &v in c {
                    *counts.entry(v).or_insert(0) += 1;
                }
            })?;
            for (v, c) in counts {
                em.emit(v, Round3Output::Incident(c));
            }
            n
        }
        Round3Mode::List => {
            let mut found = Vec::new();
            let n = kernel::count_cliques_with(&local, k - 1, &mut |c: &[Rank]| {
                let mut clique = Vec::with_capacity(c.len() + 1);
                clique.push(owner);
                clique.extend_from_slice(c);
                found.push(clique);
            })?;
            for clique in found {
                em.emit(owner, Round3Output::Clique(clique));
            }
            n
        }
    };
    if count > 0 || mode == Round3Mode::Count {
        em.emit(
            owner,
            Round3Output::Owned {
                count,
                scaled: count as f64 * scale,
            },
        );
    }
    Ok(())
}

pub fn round3(
    engine: &Engine,
    input: &[((Rank, Rank), Vec<Rank>)],
    k: usize,
    mode: Round3Mode,
    scale: f64,
) -> Result<(Vec<(Rank, Round3Output)>, RoundMetrics)> {
    let (out, metrics) = engine.run_round(
        "fff-3",
        input,
        |&edge, owners: &Vec<Rank>, em: &mut Emitter<Rank, (Rank, Rank)>| {
            for &u in owners {
                em.emit(u, edge);
            }
            Ok(())
        },
        |&owner, group, em| reduce3(owner, group, k, mode, scale, em),
    )?;
    Ok((out, metrics))
}

/// Runs all three rounds with the given pair selector.
pub fn run_fff(
    g: &Graph,
    k: usize,
    engine: &Engine,
    selector: &dyn PairSelector,
    mode: Round3Mode,
) -> Result<FffOutput> {
    check_k(k)?;
    let mut report = RunReport::empty(engine.workers());
    let mut out = FffOutput {
        count: 0,
        scaled: 0.0,
        per_node: (mode == Round3Mode::PerNode).then(BTreeMap::new),
        cliques: (mode == Round3Mode::List).then(Vec::new),
        run_report: report.clone(),
    };
    if k > g.n() {
        return Ok(out);
    }
    let started = std::time::Instant::now();
    let edges = edge_input(g);
    let (survivors, m1) = round1(engine, &edges, k)?;
    report.rounds.push(m1);
    let input2 = round2_input(survivors, &edges);
    drop(edges);
    let (marked, m2) = round2(engine, &input2, selector)?;
    report.rounds.push(m2);
    drop(input2);
    let scale = selector.scale(k);
    let (partials, m3) = round3(engine, &marked, k, mode, scale)?;
    report.rounds.push(m3);
    drop(marked);

    let mut per_rank: BTreeMap<Rank, u64> = BTreeMap::new();
    for (key, value) in partials {
        match value {
            Round3Output::Owned { count, .. } => {
                out.count = out.count.checked_add(count).ok_or(Error::Overflow)?;
                if mode == Round3Mode::PerNode && count > 0 {
                    *per_rank.entry(key).or_insert(0) += count;
                }
            }
            Round3Output::Incident(c) => *per_rank.entry(key).or_insert(0) += c,
            Round3Output::Clique(c) => {
                if let Some(list) = out.cliques.as_mut() {
                    list.push(c.into_iter().map(|r| g.label(r)).collect());
                }
            }
        }
    }
    if let Some(per_node) = out.per_node.as_mut() {
        per_node.extend(per_rank.into_iter().map(|(r, c)| (g.label(r), c)));
    }
    out.scaled = out.count as f64 * scale;
    report.total_wall_time = started.elapsed();
    out.run_report = report;
    Ok(out)
}

/// Exact number of k-cliques, optionally with per-node incidence counts.
pub fn fff_count(g: &Graph, k: usize, engine: &Engine, per_node: bool) -> Result<CliqueCountReport> {
    let mode = if per_node {
        Round3Mode::PerNode
    } else {
        Round3Mode::Count
    };
    let out = run_fff(g, k, engine, &AllPairs, mode)?;
    Ok(CliqueCountReport {
        k,
        count: out.count,
        per_node: out.per_node,
        run_report: out.run_report,
    })
}

/// Every k-clique, each reported by its ≺-smallest node (listed first).
pub fn fff_list(g: &Graph, k: usize, engine: &Engine) -> Result<(Vec<Vec<NodeId>>, RunReport)> {
    let out = run_fff(g, k, engine, &AllPairs, Round3Mode::List)?;
    Ok((out.cliques.unwrap_or_default(), out.run_report))
}

/// Writes `node,count` rows.
pub fn write_per_node_csv<W: Write>(per_node: &BTreeMap<NodeId, u64>, out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["node", "count"])?;
    for (node, count) in per_node {
        w.write_record([node.to_string(), count.to_string()])?;
    }
    w.flush()?;
    Ok(())
}
