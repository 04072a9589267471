//! Sequential clique counting on small graphs.
//!
//! [`count_cliques`] orients every edge from the endpoint that comes first in
//! the graph's own degree order towards the later one, then grows cliques by
//! intersecting sorted out-neighbor lists, one level per added vertex. The
//! last level is counted by size instead of enumerated unless a visitor is
//! attached.
//!
//! [`brute_force_count`] checks every k-subset and exists as a test oracle.

use crate::error::{Error, Result};
use crate::graph::{Graph, Rank};

/// Largest clique size the kernel accepts.
pub const MAX_K: usize = 32;
/// Largest vertex count the brute-force oracle accepts.
pub const BRUTE_FORCE_MAX_VERTICES: usize = 24;

/// A small undirected graph over arbitrary ordered vertex labels.
///
/// Vertices are kept sorted ascending by label and adjacency is stored in
/// local indices, sorted ascending.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LocalGraph<V> {
    vertices: Vec<V>,
    offsets: Vec<u32>,
    adj: Vec<u32>,
}

impl<V: Ord + Copy> LocalGraph<V> {
    /// Builds the graph spanned by `edges`. Self-loops are dropped and
    /// repeated edges merged.
    pub fn from_edges<I: IntoIterator<Item = (V, V)>>(edges: I) -> Self {
        Self::with_vertices(Vec::new(), edges)
    }

    /// Like [`LocalGraph::from_edges`], but also keeps every vertex in
    /// `vertices` even if it has no incident edge.
    pub fn with_vertices<I: IntoIterator<Item = (V, V)>>(mut vertices: Vec<V>, edges: I) -> Self {
        let mut pairs: Vec<(V, V)> = edges
            .into_iter()
            .filter(|(a, b)| a != b)
            .map(|(a, b)| if a < b { (a, b) } else { (b, a) })
            .collect();
        pairs.sort_unstable();
        pairs.dedup();
        vertices.extend(pairs.iter().flat_map(|&(a, b)| [a, b]));
        vertices.sort_unstable();
        vertices.dedup();

        let idx = |x: V| vertices.binary_search(&x).expect("vertex present") as u32;
        let mut degree = vec![0u32; vertices.len()];
        let mut local: Vec<(u32, u32)> = Vec::with_capacity(pairs.len());
        for &(a, b) in &pairs {
            let (ia, ib) = (idx(a), idx(b));
            degree[ia as usize] += 1;
            degree[ib as usize] += 1;
            local.push((ia, ib));
        }
        let mut offsets = vec![0u32; vertices.len() + 1];
        for i in 0..vertices.len() {
            offsets[i + 1] = offsets[i] + degree[i];
        }
        let mut fill: Vec<u32> = offsets[..vertices.len()].to_vec();
        let mut adj = vec![0u32; offsets[vertices.len()] as usize];
        // `local` is sorted by (a, b), so pushing in this order leaves every
        // list ascending except the back-edges, which we sort below.
        for &(a, b) in &local {
            adj[fill[a as usize] as usize] = b;
            fill[a as usize] += 1;
            adj[fill[b as usize] as usize] = a;
            fill[b as usize] += 1;
        }
        for i in 0..vertices.len() {
            adj[offsets[i] as usize..offsets[i + 1] as usize].sort_unstable();
        }
        LocalGraph { vertices, offsets, adj }
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn edge_count(&self) -> usize {
        self.adj.len() / 2
    }

    pub fn vertices(&self) -> &[V] {
        &self.vertices
    }

    /// Neighbors of the vertex at local index `i`, as local indices.
    pub fn neighbors(&self, i: usize) -> &[u32] {
        &self.adj[self.offsets[i] as usize..self.offsets[i + 1] as usize]
    }

    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        self.neighbors(i).binary_search(&(j as u32)).is_ok()
    }

    pub fn degree(&self, i: usize) -> usize {
        (self.offsets[i + 1] - self.offsets[i]) as usize
    }
}

impl LocalGraph<Rank> {
    /// The whole graph as a local graph over ranks.
    pub fn from_graph(g: &Graph) -> Self {
        LocalGraph::with_vertices(g.ranks().collect(), g.oriented_edges())
    }
}

/// Observes cliques as the kernel finds them.
pub trait CliqueVisitor<V> {
    /// Called each time a vertex is appended to the partial clique (the new
    /// vertex is last; earlier ones are in discovery order, not sorted).
    /// Returning `false` prunes every clique extending `partial`.
    fn admits(&mut self, partial: &[V]) -> bool {
        let _ = partial;
        true
    }

    /// Called once per admitted clique, with its vertices sorted ascending.
    fn visit(&mut self, clique: &[V]);
}

impl<V, F: FnMut(&[V])> CliqueVisitor<V> for F {
    fn visit(&mut self, clique: &[V]) {
        self(clique)
    }
}

fn check_k(k: usize) -> Result<()> {
    if !(1..=MAX_K).contains(&k) {
        return Err(Error::invalid(format!("clique size k={k} outside [1, {MAX_K}]")));
    }
    Ok(())
}

/// Edges oriented along the local degree order, in position space.
struct Oriented<'g, V> {
    graph: &'g LocalGraph<V>,
    /// Local index of the vertex at each position.
    vertex_at: Vec<u32>,
    offsets: Vec<u32>,
    out: Vec<u32>,
}

impl<'g, V: Ord + Copy> Oriented<'g, V> {
    fn new(graph: &'g LocalGraph<V>) -> Self {
        let n = graph.vertex_count();
        let mut vertex_at: Vec<u32> = (0..n as u32).collect();
        vertex_at.sort_unstable_by_key(|&i| (graph.degree(i as usize), i));
        let mut pos = vec![0u32; n];
        for (p, &i) in vertex_at.iter().enumerate() {
            pos[i as usize] = p as u32;
        }
        let mut offsets = Vec::with_capacity(n + 1);
        let mut out = Vec::with_capacity(graph.edge_count());
        offsets.push(0);
        for (p, &i) in vertex_at.iter().enumerate() {
            let start = out.len();
            out.extend(
                graph
                    .neighbors(i as usize)
                    .iter()
                    .map(|&j| pos[j as usize])
                    .filter(|&q| q > p as u32),
            );
            out[start..].sort_unstable();
            offsets.push(out.len() as u32);
        }
        Oriented {
            graph,
            vertex_at,
            offsets,
            out,
        }
    }

    #[inline]
    fn out(&self, p: u32) -> &[u32] {
        &self.out[self.offsets[p as usize] as usize..self.offsets[p as usize + 1] as usize]
    }

    #[inline]
    fn label(&self, p: u32) -> V {
        self.graph.vertices[self.vertex_at[p as usize] as usize]
    }

    fn count(&self, k: usize) -> Result<u64> {
        let mut bufs: Vec<Vec<u32>> = (0..k).map(|_| Vec::new()).collect();
        let mut total = 0u64;
        for p in 0..self.vertex_at.len() as u32 {
            let cand = self.out(p);
            if cand.len() + 1 < k {
                continue;
            }
            let c = self.count_from(cand, k - 1, &mut bufs)?;
            total = total.checked_add(c).ok_or(Error::Overflow)?;
        }
        Ok(total)
    }

    /// Number of `need`-cliques inside the candidate set `cand`.
    fn count_from(&self, cand: &[u32], need: usize, bufs: &mut [Vec<u32>]) -> Result<u64> {
        if need == 1 {
            return Ok(cand.len() as u64);
        }
        let (buf, rest) = bufs.split_first_mut().expect("one buffer per level");
        let mut total = 0u64;
        for (i, &w) in cand.iter().enumerate() {
            if cand.len() - i < need {
                break;
            }
            intersect(&cand[i + 1..], self.out(w), buf);
            debug_assert!(buf.len() < cand.len(), "candidate set must shrink");
            if buf.len() + 1 < need {
                continue;
            }
            let c = if need == 2 {
                buf.len() as u64
            } else {
                self.count_from(buf, need - 1, rest)?
            };
            total = total.checked_add(c).ok_or(Error::Overflow)?;
        }
        Ok(total)
    }

    fn visit_all(&self, k: usize, visitor: &mut dyn CliqueVisitor<V>) -> Result<u64> {
        let mut bufs: Vec<Vec<u32>> = (0..k).map(|_| Vec::new()).collect();
        let mut stack: Vec<V> = Vec::with_capacity(k);
        let mut sorted: Vec<V> = Vec::with_capacity(k);
        let mut total = 0u64;
        for p in 0..self.vertex_at.len() as u32 {
            let cand = self.out(p);
            if cand.len() + 1 < k {
                continue;
            }
            stack.push(self.label(p));
            if visitor.admits(&stack) {
                if k == 1 {
                    visitor.visit(&stack);
                    total += 1;
                } else {
                    let c = self.visit_from(cand, k - 1, &mut bufs, &mut stack, &mut sorted, visitor)?;
                    total = total.checked_add(c).ok_or(Error::Overflow)?;
                }
            }
            stack.pop();
        }
        Ok(total)
    }

    fn visit_from(
        &self,
        cand: &[u32],
        need: usize,
        bufs: &mut [Vec<u32>],
        stack: &mut Vec<V>,
        sorted: &mut Vec<V>,
        visitor: &mut dyn CliqueVisitor<V>,
    ) -> Result<u64> {
        let (buf, rest) = bufs.split_first_mut().expect("one buffer per level");
        let mut total = 0u64;
        for (i, &w) in cand.iter().enumerate() {
            if cand.len() - i < need {
                break;
            }
            stack.push(self.label(w));
            if visitor.admits(stack) {
                if need == 1 {
                    sorted.clear();
                    sorted.extend_from_slice(stack);
                    sorted.sort_unstable();
                    visitor.visit(sorted);
                    total = total.checked_add(1).ok_or(Error::Overflow)?;
                } else {
                    intersect(&cand[i + 1..], self.out(w), buf);
                    debug_assert!(buf.len() < cand.len(), "candidate set must shrink");
                    if buf.len() + 1 >= need {
                        let c = self.visit_from(buf, need - 1, rest, stack, sorted, visitor)?;
                        total = total.checked_add(c).ok_or(Error::Overflow)?;
                    }
                }
            }
            stack.pop();
        }
        Ok(total)
    }
}

/// Sorted intersection of `a` and `b` into `out`.
fn intersect(a: &[u32], b: &[u32], out: &mut Vec<u32>) {
    out.clear();
    let (small, large) = if a.len() <= b.len() { (a, b) } else { (b, a) };
    if small.is_empty() {
        return;
    }
    if large.len() / small.len() >= 32 {
        let mut rest = large;
        for &x in small {
            match rest.binary_search(&x) {
                Ok(i) => {
                    out.push(x);
                    rest = &rest[i + 1..];
                }
                Err(i) => rest = &rest[i..],
            }
            if rest.is_empty() {
                break;
            }
        }
        return;
    }
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        let (x, y) = (a[i], b[j]);
        if x == y {
            out.push(x);
        }
        i += (x <= y) as usize;
        j += (x >= y) as usize;
    }
}

/// Exact number of k-cliques. `k = 1` gives the vertex count, `k = 2` the
/// edge count.
pub fn count_cliques<V: Ord + Copy>(g: &LocalGraph<V>, k: usize) -> Result<u64> {
    check_k(k)?;
    match k {
        _ if k > g.vertex_count() => Ok(0),
        1 => Ok(g.vertex_count() as u64),
        2 => Ok(g.edge_count() as u64),
        _ => Oriented::new(g).count(k),
    }
}

/// Counts k-cliques, reporting each admitted one to `visitor`. The return
/// value is the number of `visit` calls.
pub fn count_cliques_with<V: Ord + Copy>(
    g: &LocalGraph<V>,
    k: usize,
    visitor: &mut dyn CliqueVisitor<V>,
) -> Result<u64> {
    check_k(k)?;
    if k > g.vertex_count() {
        return Ok(0);
    }
    Oriented::new(g).visit_all(k, visitor)
}

/// Counts k-subsets of the vertex set that are pairwise adjacent, by trying
/// every subset.
pub fn brute_force_count<V: Ord + Copy>(g: &LocalGraph<V>, k: usize) -> Result<u64> {
    let mut n = 0u64;
    brute_force_each(g, k, |_| n += 1)?;
    Ok(n)
}

/// Every k-clique as a sorted vertex list, found by subset enumeration.
pub fn brute_force_list<V: Ord + Copy>(g: &LocalGraph<V>, k: usize) -> Result<Vec<Vec<V>>> {
    let mut all = Vec::new();
    brute_force_each(g, k, |c| all.push(c.to_vec()))?;
    Ok(all)
}

fn brute_force_each<V: Ord + Copy>(g: &LocalGraph<V>, k: usize, mut f: impl FnMut(&[V])) -> Result<()> {
    let n = g.vertex_count();
    if n > BRUTE_FORCE_MAX_VERTICES {
        return Err(Error::invalid(format!(
            "brute force limited to {BRUTE_FORCE_MAX_VERTICES} vertices, graph has {n}"
        )));
    }
    if k == 0 {
        return Err(Error::invalid("clique size must be at least 1"));
    }
    if k > n {
        return Ok(());
    }
    let adjacent: Vec<u32> = (0..n)
        .map(|i| g.neighbors(i).iter().fold(0u32, |m, &j| m | (1 << j)))
        .collect();
    let mut members = Vec::with_capacity(k);
    // Gosper's hack over all n-bit masks with k bits set.
    let mut mask: u32 = (1u32 << k) - 1;
    let limit: u64 = 1u64 << n;
    while (mask as u64) < limit {
        members.clear();
        members.extend((0..n).filter(|&i| mask & (1 << i) != 0));
        let is_clique = members
            .iter()
            .enumerate()
            .all(|(a, &i)| members[a + 1..].iter().all(|&j| adjacent[i] & (1 << j) != 0));
        if is_clique {
            let labels: Vec<V> = members.iter().map(|&i| g.vertices[i]).collect();
            f(&labels);
        }
        let c = mask & mask.wrapping_neg();
        let r = mask.wrapping_add(c);
        if r == 0 {
            break;
        }
        mask = (((r ^ mask) >> 2) / c) | r;
    }
    Ok(())
}
