//! Undirected graphs in degree order.
//!
//! Nodes keep their external 64-bit labels. Internally every node is addressed
//! by its [`Rank`], the node's position in the total order that sorts nodes by
//! `(degree, label)`. Comparing two ranks is therefore the same as comparing
//! their [`OrderKey`]s, and every adjacency list sorted by rank is also sorted
//! by `OrderKey`, so the high-neighborhood of a node is a suffix of its list.

use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use flate2::read::MultiGzDecoder;

use crate::error::{Error, Result};

/// External node label, kept verbatim from the input.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NodeId(pub u64);

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

impl From<u64> for NodeId {
    fn from(v: u64) -> Self {
        NodeId(v)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Edge {
    pub u: NodeId,
    pub v: NodeId,
}

impl Edge {
    pub fn new(u: impl Into<NodeId>, v: impl Into<NodeId>) -> Self {
        Edge {
            u: u.into(),
            v: v.into(),
        }
    }
}

/// Sort key of the node order: degree first, label breaks ties.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct OrderKey {
    pub degree: u32,
    pub label: NodeId,
}

impl OrderKey {
    pub fn new(degree: u32, label: impl Into<NodeId>) -> Self {
        OrderKey {
            degree,
            label: label.into(),
        }
    }
}

/// Strict total order on nodes: `a` precedes `b` iff `(d(a), a) < (d(b), b)`.
pub fn precedes(a: OrderKey, b: OrderKey) -> bool {
    a < b
}

/// Position of a node in the degree order of its [`Graph`].
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Rank(pub u32);

impl Rank {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for Rank {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

/// Neighbors `x` of `owner` with `owner ≺ x`, sorted by `OrderKey`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HighNeighborhood {
    pub owner: NodeId,
    pub members: Vec<NodeId>,
}

/// Subgraph induced by a node's high-neighborhood.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InducedSubgraph {
    pub owner: NodeId,
    pub edges: Vec<Edge>,
}

/// What normalization discarded.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct IngestReport {
    pub input_edges: usize,
    pub self_loops: usize,
    pub duplicates: usize,
}

/// Normalized simple undirected graph. Immutable once built.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Graph {
    labels: Vec<NodeId>,
    degrees: Vec<u32>,
    offsets: Vec<usize>,
    neighbors: Vec<Rank>,
    /// Absolute index into `neighbors` where each node's high part begins.
    high_start: Vec<usize>,
    /// `(label, rank)` sorted by label, for lookups by external id.
    by_label: Vec<(NodeId, Rank)>,
}

impl Graph {
    /// Builds a graph from raw edges, dropping self-loops, merging duplicate
    /// and reversed edges, and discarding isolated nodes.
    pub fn from_edges(edges: &[Edge]) -> (Graph, IngestReport) {
        let mut report = IngestReport {
            input_edges: edges.len(),
            ..Default::default()
        };
        let mut pairs: Vec<(NodeId, NodeId)> = Vec::with_capacity(edges.len());
        for e in edges {
            if e.u == e.v {
                report.self_loops += 1;
                continue;
            }
            pairs.push(if e.u < e.v { (e.u, e.v) } else { (e.v, e.u) });
        }
        pairs.sort_unstable();
        let before = pairs.len();
        pairs.dedup();
        report.duplicates = before - pairs.len();

        let mut labels: Vec<NodeId> = pairs.iter().flat_map(|&(a, b)| [a, b]).collect();
        labels.sort_unstable();
        labels.dedup();
        assert!(labels.len() <= u32::MAX as usize, "graph has too many nodes");

        // Degrees indexed by label position.
        let label_pos = |x: NodeId| labels.binary_search(&x).expect("endpoint label present");
        let mut deg_by_label = vec![0u32; labels.len()];
        let mut endpoints: Vec<(usize, usize)> = Vec::with_capacity(pairs.len());
        for &(a, b) in &pairs {
            let (ia, ib) = (label_pos(a), label_pos(b));
            deg_by_label[ia] += 1;
            deg_by_label[ib] += 1;
            endpoints.push((ia, ib));
        }

        let mut order: Vec<usize> = (0..labels.len()).collect();
        order.sort_unstable_by_key(|&i| OrderKey {
            degree: deg_by_label[i],
            label: labels[i],
        });
        let mut rank_of_pos = vec![Rank(0); labels.len()];
        for (r, &i) in order.iter().enumerate() {
            rank_of_pos[i] = Rank(r as u32);
        }

        let n = labels.len();
        let ranked_labels: Vec<NodeId> = order.iter().map(|&i| labels[i]).collect();
        let degrees: Vec<u32> = order.iter().map(|&i| deg_by_label[i]).collect();
        let mut offsets = vec![0usize; n + 1];
        for r in 0..n {
            offsets[r + 1] = offsets[r] + degrees[r] as usize;
        }
        let mut fill = offsets[..n].to_vec();
        let mut neighbors = vec![Rank(0); offsets[n]];
        for &(ia, ib) in &endpoints {
            let (ra, rb) = (rank_of_pos[ia], rank_of_pos[ib]);
            neighbors[fill[ra.index()]] = rb;
            fill[ra.index()] += 1;
            neighbors[fill[rb.index()]] = ra;
            fill[rb.index()] += 1;
        }
        let mut high_start = Vec::with_capacity(n);
        for r in 0..n {
            let list = &mut neighbors[offsets[r]..offsets[r + 1]];
            list.sort_unstable();
            high_start.push(offsets[r] + list.partition_point(|&x| x.0 <= r as u32));
        }
        let by_label: Vec<(NodeId, Rank)> = labels.iter().copied().zip(rank_of_pos.iter().copied()).collect();

        let graph = Graph {
            labels: ranked_labels,
            degrees,
            offsets,
            neighbors,
            high_start,
            by_label,
        };
        (graph, report)
    }

    /// Number of nodes (all of degree ≥ 1).
    pub fn n(&self) -> usize {
        self.labels.len()
    }

    /// Number of undirected edges.
    pub fn m(&self) -> usize {
        self.neighbors.len() / 2
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn ranks(&self) -> impl DoubleEndedIterator<Item = Rank> + ExactSizeIterator {
        (0..self.n() as u32).map(Rank)
    }

    #[inline]
    pub fn label(&self, r: Rank) -> NodeId {
        self.labels[r.index()]
    }

    #[inline]
    pub fn degree(&self, r: Rank) -> u32 {
        self.degrees[r.index()]
    }

    pub fn order_key(&self, r: Rank) -> OrderKey {
        OrderKey {
            degree: self.degree(r),
            label: self.label(r),
        }
    }

    pub fn rank_of(&self, label: NodeId) -> Option<Rank> {
        self.by_label
            .binary_search_by_key(&label, |&(l, _)| l)
            .ok()
            .map(|i| self.by_label[i].1)
    }

    /// All neighbors of `r`, ascending in node order.
    #[inline]
    pub fn neighbors(&self, r: Rank) -> &[Rank] {
        &self.neighbors[self.offsets[r.index()]..self.offsets[r.index() + 1]]
    }

    /// Neighbors that follow `r` in node order.
    #[inline]
    pub fn high_neighbors(&self, r: Rank) -> &[Rank] {
        &self.neighbors[self.high_start[r.index()]..self.offsets[r.index() + 1]]
    }

    /// Neighbors that precede `r` in node order.
    #[inline]
    pub fn low_neighbors(&self, r: Rank) -> &[Rank] {
        &self.neighbors[self.offsets[r.index()]..self.high_start[r.index()]]
    }

    pub fn has_edge(&self, a: Rank, b: Rank) -> bool {
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        self.high_neighbors(lo).binary_search(&hi).is_ok()
    }

    pub fn high_neighborhood(&self, u: NodeId) -> Result<HighNeighborhood> {
        let r = self.rank_of(u).ok_or(Error::UnknownNode(u))?;
        Ok(HighNeighborhood {
            owner: u,
            members: self.high_neighbors(r).iter().map(|&x| self.label(x)).collect(),
        })
    }

    pub fn induced_high_subgraph(&self, u: NodeId) -> Result<InducedSubgraph> {
        let r = self.rank_of(u).ok_or(Error::UnknownNode(u))?;
        let members = self.high_neighbors(r);
        let mut edges = Vec::new();
        for (i, &x) in members.iter().enumerate() {
            for &y in &members[i + 1..] {
                if self.has_edge(x, y) {
                    edges.push(Edge {
                        u: self.label(x),
                        v: self.label(y),
                    });
                }
            }
        }
        Ok(InducedSubgraph { owner: u, edges })
    }

    /// Largest high-neighborhood size.
    pub fn max_high_degree(&self) -> usize {
        self.ranks().map(|r| self.high_neighbors(r).len()).max().unwrap_or(0)
    }

    /// Each undirected edge once, as `(lo, hi)` with `lo ≺ hi`.
    pub fn oriented_edges(&self) -> impl Iterator<Item = (Rank, Rank)> + '_ {
        self.ranks()
            .flat_map(move |r| self.high_neighbors(r).iter().map(move |&x| (r, x)))
    }

    /// Each undirected edge once, with external labels.
    pub fn edge_list(&self) -> Vec<Edge> {
        self.oriented_edges()
            .map(|(a, b)| Edge {
                u: self.label(a),
                v: self.label(b),
            })
            .collect()
    }
}

/// Normalizes a raw edge list; see [`Graph::from_edges`].
pub fn normalize(edges: &[Edge]) -> Graph {
    Graph::from_edges(edges).0
}

/// Parses SNAP-style edge-list text: `#` comment lines, blank lines, and data
/// lines holding exactly two integer labels separated by spaces or tabs.
pub fn parse_edge_list<R: BufRead>(mut reader: R) -> Result<Vec<Edge>> {
    let mut edges = Vec::new();
    let mut line = String::new();
    let mut lineno = 0usize;
    loop {
        line.clear();
        if reader.read_line(&mut line)? == 0 {
            break;
        }
        lineno += 1;
        let body = line.trim();
        if body.is_empty() || body.starts_with('#') {
            continue;
        }
        let mut tokens = body.split_ascii_whitespace();
        let mut next = |what: &str| -> Result<NodeId> {
            let tok = tokens.next().ok_or_else(|| Error::Parse {
                line: lineno,
                message: format!("missing {what} endpoint"),
            })?;
            tok.parse::<u64>().map(NodeId).map_err(|_| Error::Parse {
                line: lineno,
                message: format!("invalid node label {tok:?}"),
            })
        };
        let u = next("first")?;
        let v = next("second")?;
        if let Some(extra) = tokens.next() {
            return Err(Error::Parse {
                line: lineno,
                message: format!("expected two labels, found extra token {extra:?}"),
            });
        }
        edges.push(Edge { u, v });
    }
    Ok(edges)
}

/// Reads an edge-list file, transparently decompressing gzip input.
pub fn read_edge_list(path: impl AsRef<Path>) -> Result<Vec<Edge>> {
    let mut file = BufReader::with_capacity(1 << 20, File::open(path.as_ref())?);
    let gz = {
        let head = file.fill_buf()?;
        head.len() >= 2 && head[0] == 0x1f && head[1] == 0x8b
    };
    if gz {
        parse_edge_list(BufReader::with_capacity(1 << 20, MultiGzDecoder::new(file)))
    } else {
        parse_edge_list(file)
    }
}

/// Reads and normalizes a graph file.
pub fn load_graph(path: impl AsRef<Path>) -> Result<(Graph, IngestReport)> {
    let edges = read_edge_list(path)?;
    Ok(Graph::from_edges(&edges))
}

/// Writes a graph as a plain edge list, one `u\tv` line per undirected edge.
pub fn write_edge_list<W: std::io::Write>(g: &Graph, mut out: W) -> std::io::Result<()> {
    for e in g.edge_list() {
        writeln!(out, "{}\t{}", e.u, e.v)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn edges(list: &[(u64, u64)]) -> Vec<Edge> {
        list.iter().map(|&(a, b)| Edge::new(a, b)).collect()
    }

    fn complete(n: u64) -> Vec<Edge> {
        let mut out = Vec::new();
        for a in 1..=n {
            for b in a + 1..=n {
                out.push(Edge::new(a, b));
            }
        }
        out
    }

    #[test]
    fn parses_comments_and_tabs() {
        let got = parse_edge_list("# comment\n1\t2\n2\t1\n".as_bytes()).unwrap();
        assert_eq!(got, edges(&[(1, 2), (2, 1)]));
    }

    #[test]
    fn parses_empty_input() {
        assert!(parse_edge_list("".as_bytes()).unwrap().is_empty());
    }

    #[test]
    fn keeps_self_loops_until_normalize() {
        assert_eq!(parse_edge_list("3 3\n".as_bytes()).unwrap(), edges(&[(3, 3)]));
    }

    #[test]
    fn mixed_whitespace_and_no_trailing_newline() {
        let got = parse_edge_list("  10 \t  20\n#x\n\n30\t\t40".as_bytes()).unwrap();
        assert_eq!(got, edges(&[(10, 20), (30, 40)]));
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        let err = parse_edge_list("1 2\n# c\n1 x\n".as_bytes()).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 3, .. }), "{err}");
        let err = parse_edge_list("1\n".as_bytes()).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 1, .. }), "{err}");
        let err = parse_edge_list("1 2 3\n".as_bytes()).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 1, .. }), "{err}");
        let err = parse_edge_list("1 -2\n".as_bytes()).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 1, .. }), "{err}");
    }

    #[test]
    fn normalize_merges_and_drops() {
        let (g, report) = Graph::from_edges(&edges(&[(1, 2), (2, 1), (3, 3)]));
        assert_eq!((g.n(), g.m()), (2, 1));
        assert_eq!(
            report,
            IngestReport {
                input_edges: 3,
                self_loops: 1,
                duplicates: 1
            }
        );
    }

    #[test]
    fn normalize_complete_graph() {
        let g = normalize(&complete(4));
        assert_eq!((g.n(), g.m()), (4, 6));
        assert!(g.ranks().all(|r| g.degree(r) == 3));
    }

    #[test]
    fn empty_graph_is_valid() {
        let g = normalize(&[]);
        assert_eq!((g.n(), g.m()), (0, 0));
        assert_eq!(g.max_high_degree(), 0);
    }

    #[test]
    fn precedes_examples() {
        assert!(precedes(OrderKey::new(2, 9), OrderKey::new(4, 1)));
        assert!(precedes(OrderKey::new(3, 5), OrderKey::new(3, 7)));
        assert!(!precedes(OrderKey::new(3, 7), OrderKey::new(3, 7)));
    }

    #[test]
    fn star_high_neighborhoods() {
        // center 0, leaves 1..=5
        let g = normalize(&(1..=5).map(|l| Edge::new(0, l)).collect::<Vec<_>>());
        let leaf = g.high_neighborhood(NodeId(3)).unwrap();
        assert_eq!(leaf.members, vec![NodeId(0)]);
        assert!(g.high_neighborhood(NodeId(0)).unwrap().members.is_empty());
    }

    #[test]
    fn complete_graph_high_neighborhood_uses_labels() {
        let g = normalize(&complete(4));
        let h = g.high_neighborhood(NodeId(1)).unwrap();
        assert_eq!(h.members, vec![NodeId(2), NodeId(3), NodeId(4)]);
        assert!(matches!(
            g.high_neighborhood(NodeId(99)),
            Err(Error::UnknownNode(NodeId(99)))
        ));
    }

    #[test]
    fn induced_subgraph_of_k4() {
        let g = normalize(&complete(4));
        let s = g.induced_high_subgraph(NodeId(1)).unwrap();
        assert_eq!(s.edges, edges(&[(2, 3), (2, 4), (3, 4)]));
    }

    #[test]
    fn ranks_follow_order_keys() {
        let g = normalize(&edges(&[(10, 1), (10, 2), (10, 3), (2, 3), (7, 8)]));
        let keys: Vec<OrderKey> = g.ranks().map(|r| g.order_key(r)).collect();
        assert!(keys.windows(2).all(|w| precedes(w[0], w[1])));
        for r in g.ranks() {
            assert_eq!(g.rank_of(g.label(r)), Some(r));
            assert!(g.neighbors(r).windows(2).all(|w| w[0] < w[1]));
            assert!(g.high_neighbors(r).iter().all(|&x| r < x));
            assert!(g.low_neighbors(r).iter().all(|&x| x < r));
        }
    }

    #[test]
    fn gzip_files_are_detected() {
        use flate2::write::GzEncoder;
        use std::io::Write;
        let dir = std::env::temp_dir().join(format!("qkcount-gz-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let plain = dir.join("g.txt");
        let gz = dir.join("g.txt.gz");
        std::fs::write(&plain, "# x\n1 2\n2 3\n3 1\n").unwrap();
        let mut enc = GzEncoder::new(File::create(&gz).unwrap(), flate2::Compression::default());
        enc.write_all(b"# x\n1 2\n2 3\n3 1\n").unwrap();
        enc.finish().unwrap();
        assert_eq!(read_edge_list(&plain).unwrap(), read_edge_list(&gz).unwrap());
        std::fs::remove_dir_all(&dir).unwrap();
    }
}
