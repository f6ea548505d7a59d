//! Mutable undirected weighted graphs and the cut measures used throughout
//! the crate: volume, cut weight, conductance and (for small instances) the
//! exhaustive k-way expansion.
//!
//! Vertices are dense `usize` ids handed out in arrival order. Parallel
//! insertions of the same pair accumulate weight. Self-loops are only created
//! through [`DynamicGraph::add_self_loop`] and count twice toward the degree
//! of their vertex, so that a contracted vertex carrying its cluster's
//! internal weight as a self-loop has the same volume as the cluster.

use indexmap::IndexMap;
use thiserror::Error;

pub type VertexId = usize;

/// Weights at or below this magnitude are treated as zero when adjusting.
const WEIGHT_EPS: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GraphError {
    #[error("edge ({u}, {v}) has non-positive weight {w}")]
    NonPositiveWeight { u: VertexId, v: VertexId, w: f64 },
    #[error("self-loop at vertex {0} requires add_self_loop")]
    SelfLoop(VertexId),
    #[error("vertex {0} appears in both sets")]
    OverlappingSets(VertexId),
    #[error("vertex {0} is not in the graph")]
    UnknownVertex(VertexId),
    #[error("exhaustive enumeration refused: n = {n} exceeds the guard of {limit}")]
    TooLarge { n: usize, limit: usize },
    #[error("invalid cluster count k = {k} for n = {n}")]
    InvalidK { k: usize, n: usize },
    #[error("not a partition: {0}")]
    NotAPartition(String),
}

#[derive(Clone, Debug, Default)]
pub struct DynamicGraph {
    adj: Vec<IndexMap<VertexId, f64>>,
    deg: Vec<f64>,
    total_volume: f64,
    edge_count: usize,
}

impl DynamicGraph {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_vertices(n: usize) -> Self {
        Self {
            adj: vec![IndexMap::new(); n],
            deg: vec![0.0; n],
            total_volume: 0.0,
            edge_count: 0,
        }
    }

    pub fn n(&self) -> usize {
        self.adj.len()
    }

    pub fn is_empty(&self) -> bool {
        self.adj.is_empty()
    }

    /// Number of distinct vertex pairs (self-loops included) with positive weight.
    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    pub fn total_volume(&self) -> f64 {
        self.total_volume
    }

    pub fn contains(&self, v: VertexId) -> bool {
        v < self.adj.len()
    }

    pub fn add_vertex(&mut self) -> VertexId {
        self.adj.push(IndexMap::new());
        self.deg.push(0.0);
        self.adj.len() - 1
    }

    /// Grows the vertex set so that `v` exists.
    pub fn ensure_vertex(&mut self, v: VertexId) {
        while self.adj.len() <= v {
            self.add_vertex();
        }
    }

    pub fn degree(&self, u: VertexId) -> f64 {
        self.deg[u]
    }

    pub fn degrees(&self) -> &[f64] {
        &self.deg
    }

    pub fn weight(&self, u: VertexId, v: VertexId) -> f64 {
        self.adj
            .get(u)
            .and_then(|m| m.get(&v))
            .copied()
            .unwrap_or(0.0)
    }

    /// Neighbors of `u` (including `u` itself if it carries a self-loop).
    pub fn neighbors(&self, u: VertexId) -> impl Iterator<Item = (VertexId, f64)> + '_ {
        self.adj[u].iter().map(|(&v, &w)| (v, w))
    }

    pub fn neighbor_count(&self, u: VertexId) -> usize {
        self.adj[u].len()
    }

    /// Every stored pair once, as `(u, v, w)` with `u <= v`.
    pub fn edges(&self) -> impl Iterator<Item = (VertexId, VertexId, f64)> + '_ {
        self.adj.iter().enumerate().flat_map(|(u, m)| {
            m.iter()
                .filter(move |(&v, _)| u <= v)
                .map(move |(&v, &w)| (u, v, w))
        })
    }

    /// Adds `w` to the weight of `{u, v}`, creating missing endpoints.
    pub fn add_edge(&mut self, u: VertexId, v: VertexId, w: f64) -> Result<(), GraphError> {
        if u == v {
            return Err(GraphError::SelfLoop(u));
        }
        if !(w > 0.0) || !w.is_finite() {
            return Err(GraphError::NonPositiveWeight { u, v, w });
        }
        self.ensure_vertex(u.max(v));
        self.bump(u, v, w);
        Ok(())
    }

    pub fn add_self_loop(&mut self, u: VertexId, w: f64) -> Result<(), GraphError> {
        if !(w > 0.0) || !w.is_finite() {
            return Err(GraphError::NonPositiveWeight { u, v: u, w });
        }
        self.ensure_vertex(u);
        self.bump(u, u, w);
        Ok(())
    }

    fn bump(&mut self, u: VertexId, v: VertexId, w: f64) {
        let slot = self.adj[u].entry(v).or_insert(0.0);
        if *slot == 0.0 {
            self.edge_count += 1;
        }
        *slot += w;
        if u != v {
            *self.adj[v].entry(u).or_insert(0.0) += w;
        }
        // a self-loop contributes twice to its vertex's degree
        self.deg[u] += w;
        self.deg[v] += w;
        self.total_volume += 2.0 * w;
    }

    /// Removes `{u, v}` entirely, returning its former weight.
    pub fn remove_edge(&mut self, u: VertexId, v: VertexId) -> Option<f64> {
        if !self.contains(u) || !self.contains(v) {
            return None;
        }
        let w = self.adj[u].swap_remove(&v)?;
        if u != v {
            self.adj[v].swap_remove(&u);
        }
        self.deg[u] -= w;
        self.deg[v] -= w;
        self.total_volume -= 2.0 * w;
        self.edge_count -= 1;
        self.snap_degree(u);
        self.snap_degree(v);
        Some(w)
    }

    /// Adds `delta` (possibly negative) to the weight of `{u, v}`; `u == v`
    /// addresses the self-loop. A result at or below zero removes the pair.
    /// Returns the amount by which a negative adjustment overshot zero.
    pub fn adjust_weight(&mut self, u: VertexId, v: VertexId, delta: f64) -> f64 {
        if delta > 0.0 {
            self.ensure_vertex(u.max(v));
            self.bump(u, v, delta);
            return 0.0;
        }
        let current = self.weight(u, v);
        let target = current + delta;
        if target > WEIGHT_EPS {
            let d = target - current;
            self.adj[u].insert(v, target);
            if u != v {
                self.adj[v].insert(u, target);
            }
            self.deg[u] += d;
            self.deg[v] += d;
            self.total_volume += 2.0 * d;
            0.0
        } else {
            self.remove_edge(u, v);
            (-target).max(0.0)
        }
    }

    fn snap_degree(&mut self, u: VertexId) {
        if self.adj[u].is_empty() {
            self.deg[u] = 0.0;
        }
    }

    pub fn volume<'a>(&self, set: impl IntoIterator<Item = &'a VertexId>) -> f64 {
        set.into_iter().map(|&u| self.deg[u]).sum()
    }

    /// Vertices reachable from `start`.
    pub fn component_of(&self, start: VertexId) -> Vec<VertexId> {
        let mut seen = vec![false; self.n()];
        let mut stack = vec![start];
        let mut out = Vec::new();
        seen[start] = true;
        while let Some(u) = stack.pop() {
            out.push(u);
            for (v, _) in self.neighbors(u) {
                if !seen[v] {
                    seen[v] = true;
                    stack.push(v);
                }
            }
        }
        out
    }

    /// Connected-component label per vertex and the number of components.
    pub fn components(&self) -> (Vec<usize>, usize) {
        let mut label = vec![usize::MAX; self.n()];
        let mut count = 0;
        for s in 0..self.n() {
            if label[s] != usize::MAX {
                continue;
            }
            for v in self.component_of(s) {
                label[v] = count;
            }
            count += 1;
        }
        (label, count)
    }

    pub fn is_connected(&self) -> bool {
        self.n() <= 1 || self.components().1 == 1
    }

    /// Subgraph induced on `keep`, with vertices renumbered in `keep` order.
    pub fn induced(&self, keep: &[VertexId]) -> DynamicGraph {
        let mut index = vec![usize::MAX; self.n()];
        for (i, &v) in keep.iter().enumerate() {
            index[v] = i;
        }
        let mut sub = DynamicGraph::with_vertices(keep.len());
        for (i, &u) in keep.iter().enumerate() {
            for (v, w) in self.neighbors(u) {
                let j = index[v];
                if j == usize::MAX || j < i {
                    continue;
                }
                if j == i {
                    sub.bump(i, i, w);
                } else {
                    sub.bump(i, j, w);
                }
            }
        }
        sub
    }
}

/// A set of vertices, stored sorted and deduplicated.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct VertexSet {
    members: Vec<VertexId>,
}

impl VertexSet {
    pub fn new(mut members: Vec<VertexId>) -> Self {
        members.sort_unstable();
        members.dedup();
        Self { members }
    }

    pub fn members(&self) -> &[VertexId] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn contains(&self, v: VertexId) -> bool {
        self.members.binary_search(&v).is_ok()
    }

    /// `V \ self` for a graph on `n` vertices.
    pub fn complement(&self, n: usize) -> VertexSet {
        let mut mask = vec![true; n];
        for &v in &self.members {
            if v < n {
                mask[v] = false;
            }
        }
        VertexSet {
            members: (0..n).filter(|&v| mask[v]).collect(),
        }
    }

    fn mask(&self, n: usize) -> Result<Vec<bool>, GraphError> {
        let mut mask = vec![false; n];
        for &v in &self.members {
            if v >= n {
                return Err(GraphError::UnknownVertex(v));
            }
            mask[v] = true;
        }
        Ok(mask)
    }
}

impl FromIterator<VertexId> for VertexSet {
    fn from_iter<I: IntoIterator<Item = VertexId>>(iter: I) -> Self {
        VertexSet::new(iter.into_iter().collect())
    }
}

/// Total weight of edges with one endpoint in `s` and the other in `t`.
pub fn cut_weight(g: &DynamicGraph, s: &VertexSet, t: &VertexSet) -> Result<f64, GraphError> {
    let in_s = s.mask(g.n())?;
    let in_t = t.mask(g.n())?;
    if let Some(&v) = t.members().iter().find(|&&v| in_s[v]) {
        return Err(GraphError::OverlappingSets(v));
    }
    // iterate the smaller side
    let (small, other) = if s.len() <= t.len() { (s, &in_t) } else { (t, &in_s) };
    let mut total = 0.0;
    for &u in small.members() {
        for (v, w) in g.neighbors(u) {
            if other[v] {
                total += w;
            }
        }
    }
    Ok(total)
}

/// Weight leaving `s`; cheaper than [`cut_weight`] against the complement.
pub fn boundary_weight(g: &DynamicGraph, s: &VertexSet) -> Result<f64, GraphError> {
    let in_s = s.mask(g.n())?;
    let mut total = 0.0;
    for &u in s.members() {
        for (v, w) in g.neighbors(u) {
            if !in_s[v] {
                total += w;
            }
        }
    }
    Ok(total)
}

/// `w(S, V∖S) / min{vol(S), vol(V∖S)}`, with the value 1 whenever the smaller
/// side has zero volume (in particular for `S = ∅` and `S = V`).
pub fn conductance(g: &DynamicGraph, s: &VertexSet) -> f64 {
    let Ok(cut) = boundary_weight(g, s) else {
        return 1.0;
    };
    let vol_s = g.volume(s.members());
    let vol_rest = g.total_volume() - vol_s;
    let denom = vol_s.min(vol_rest);
    if denom <= WEIGHT_EPS {
        1.0
    } else {
        cut / denom
    }
}

/// A partition of `0..n` into clusters, each listed in increasing vertex order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Partition {
    labels: Vec<usize>,
    clusters: Vec<Vec<VertexId>>,
}

impl Partition {
    /// Builds a partition from arbitrary per-vertex labels. Cluster indices are
    /// compacted in order of first appearance.
    pub fn from_labels(raw: &[usize]) -> Self {
        let mut remap: IndexMap<usize, usize> = IndexMap::new();
        let mut labels = Vec::with_capacity(raw.len());
        let mut clusters: Vec<Vec<VertexId>> = Vec::new();
        for (v, &l) in raw.iter().enumerate() {
            let next = remap.len();
            let c = *remap.entry(l).or_insert(next);
            if c == clusters.len() {
                clusters.push(Vec::new());
            }
            clusters[c].push(v);
            labels.push(c);
        }
        Partition { labels, clusters }
    }

    pub fn from_clusters(n: usize, clusters: Vec<Vec<VertexId>>) -> Result<Self, GraphError> {
        let mut labels = vec![usize::MAX; n];
        for (c, members) in clusters.iter().enumerate() {
            for &v in members {
                if v >= n {
                    return Err(GraphError::UnknownVertex(v));
                }
                if labels[v] != usize::MAX {
                    return Err(GraphError::NotAPartition(format!(
                        "vertex {v} appears in more than one cluster"
                    )));
                }
                labels[v] = c;
            }
        }
        if let Some(v) = labels.iter().position(|&l| l == usize::MAX) {
            return Err(GraphError::NotAPartition(format!("vertex {v} is not covered")));
        }
        let mut clusters = clusters;
        for c in clusters.iter_mut() {
            c.sort_unstable();
        }
        Ok(Partition { labels, clusters })
    }

    pub fn single(n: usize) -> Self {
        Partition::from_labels(&vec![0; n])
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn clusters(&self) -> &[Vec<VertexId>] {
        &self.clusters
    }

    pub fn label(&self, v: VertexId) -> usize {
        self.labels[v]
    }

    pub fn num_clusters(&self) -> usize {
        self.clusters.len()
    }

    pub fn n(&self) -> usize {
        self.labels.len()
    }

    /// Reorders clusters so that `vol_g(P_1) <= ... <= vol_g(P_k)`. Ties keep
    /// the order of the smallest member vertex.
    pub fn ordered_by_volume(self, g: &DynamicGraph) -> Self {
        let mut keyed: Vec<(f64, VertexId, Vec<VertexId>)> = self
            .clusters
            .into_iter()
            .map(|c| (g.volume(&c), c.first().copied().unwrap_or(usize::MAX), c))
            .collect();
        keyed.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        let mut labels = self.labels;
        let clusters: Vec<Vec<VertexId>> = keyed.into_iter().map(|(_, _, c)| c).collect();
        for (i, c) in clusters.iter().enumerate() {
            for &v in c {
                labels[v] = i;
            }
        }
        Partition { labels, clusters }
    }

    /// Conductance of every cluster in `g`.
    pub fn conductances(&self, g: &DynamicGraph) -> Vec<f64> {
        let n = g.n();
        let k = self.clusters.len();
        let mut cut = vec![0.0; k];
        let mut vol = vec![0.0; k];
        for u in 0..n.min(self.labels.len()) {
            let cu = self.labels[u];
            vol[cu] += g.degree(u);
            for (v, w) in g.neighbors(u) {
                if v < self.labels.len() && self.labels[v] != cu {
                    cut[cu] += w;
                }
            }
        }
        let total = g.total_volume();
        (0..k)
            .map(|c| {
                let denom = vol[c].min(total - vol[c]);
                if denom <= WEIGHT_EPS {
                    1.0
                } else {
                    cut[c] / denom
                }
            })
            .collect()
    }
}

/// Largest vertex count accepted by [`k_way_expansion_bruteforce`].
pub const BRUTEFORCE_MAX_N: usize = 14;

/// Exhaustive k-way expansion: the minimum over all partitions of `V` into
/// exactly `k` non-empty parts of the largest part conductance, together with
/// one minimising partition. Intended as a test oracle on tiny graphs.
pub fn k_way_expansion_bruteforce(
    g: &DynamicGraph,
    k: usize,
) -> Result<(f64, Partition), GraphError> {
    let n = g.n();
    if n > BRUTEFORCE_MAX_N {
        return Err(GraphError::TooLarge {
            n,
            limit: BRUTEFORCE_MAX_N,
        });
    }
    if k < 1 || k > n {
        return Err(GraphError::InvalidK { k, n });
    }
    let edges: Vec<(VertexId, VertexId, f64)> = g.edges().collect();
    let deg = g.degrees().to_vec();
    let total = g.total_volume();

    // restricted growth strings: a[0] = 0, a[i] <= 1 + max(a[..i])
    let mut a = vec![0usize; n];
    let mut best = f64::INFINITY;
    let mut best_labels = a.clone();
    let mut vol = vec![0.0; k];
    let mut cut = vec![0.0; k];
    loop {
        let used = a.iter().copied().max().unwrap_or(0) + 1;
        if used == k {
            vol.iter_mut().for_each(|x| *x = 0.0);
            cut.iter_mut().for_each(|x| *x = 0.0);
            for (u, &d) in deg.iter().enumerate() {
                vol[a[u]] += d;
            }
            for &(u, v, w) in &edges {
                if a[u] != a[v] {
                    cut[a[u]] += w;
                    cut[a[v]] += w;
                }
            }
            let worst = (0..k)
                .map(|c| {
                    let denom = vol[c].min(total - vol[c]);
                    if denom <= WEIGHT_EPS {
                        1.0
                    } else {
                        cut[c] / denom
                    }
                })
                .fold(0.0, f64::max);
            if worst < best {
                best = worst;
                best_labels.copy_from_slice(&a);
            }
        }
        // next restricted growth string with at most k blocks
        let mut i = n;
        loop {
            if i <= 1 {
                return Ok((best, Partition::from_labels(&best_labels)));
            }
            i -= 1;
            let prefix_max = a[..i].iter().copied().max().unwrap_or(0);
            if a[i] <= prefix_max && a[i] + 1 < k {
                a[i] += 1;
                for x in a[i + 1..].iter_mut() {
                    *x = 0;
                }
                break;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cycle4() -> DynamicGraph {
        let mut g = DynamicGraph::new();
        for (u, v) in [(0, 1), (1, 2), (2, 3), (3, 0)] {
            g.add_edge(u, v, 1.0).unwrap();
        }
        g
    }

    pub(crate) fn two_triangles() -> DynamicGraph {
        let mut g = DynamicGraph::new();
        for (u, v) in [(0, 1), (1, 2), (2, 0), (3, 4), (4, 5), (5, 3), (2, 3)] {
            g.add_edge(u, v, 1.0).unwrap();
        }
        g
    }

    #[test]
    fn first_edge_creates_both_endpoints() {
        let mut g = DynamicGraph::new();
        g.add_edge(0, 1, 1.0).unwrap();
        assert_eq!(g.n(), 2);
        assert_eq!(g.degree(0), 1.0);
        assert_eq!(g.degree(1), 1.0);
        assert_eq!(g.total_volume(), 2.0);
    }

    #[test]
    fn duplicate_insertion_accumulates() {
        let mut g = DynamicGraph::new();
        g.add_edge(0, 1, 1.0).unwrap();
        g.add_edge(0, 1, 1.0).unwrap();
        assert_eq!(g.weight(0, 1), 2.0);
        assert_eq!(g.weight(1, 0), 2.0);
        assert_eq!(g.degree(0), 2.0);
        assert_eq!(g.edge_count(), 1);
    }

    #[test]
    fn triangle_handshake() {
        let mut g = DynamicGraph::new();
        for (u, v) in [(0, 1), (1, 2), (2, 0)] {
            g.add_edge(u, v, 1.0).unwrap();
        }
        for u in 0..3 {
            assert_eq!(g.degree(u), 2.0);
        }
        assert_eq!(g.total_volume(), 6.0);
    }

    #[test]
    fn rejects_bad_weights_and_implicit_self_loops() {
        let mut g = DynamicGraph::new();
        assert!(matches!(
            g.add_edge(0, 1, 0.0),
            Err(GraphError::NonPositiveWeight { .. })
        ));
        assert!(matches!(
            g.add_edge(0, 1, -2.0),
            Err(GraphError::NonPositiveWeight { .. })
        ));
        assert_eq!(g.add_edge(3, 3, 1.0), Err(GraphError::SelfLoop(3)));
        assert_eq!(g.n(), 0);
    }

    #[test]
    fn self_loop_counts_twice() {
        let mut g = DynamicGraph::new();
        g.add_self_loop(0, 1.5).unwrap();
        g.add_edge(0, 1, 1.0).unwrap();
        assert_eq!(g.degree(0), 4.0);
        assert_eq!(g.total_volume(), 5.0);
        assert_eq!(g.edges().count(), 2);
    }

    #[test]
    fn adjust_weight_clamps_and_removes() {
        let mut g = DynamicGraph::new();
        g.add_edge(0, 1, 2.0).unwrap();
        assert_eq!(g.adjust_weight(0, 1, -0.5), 0.0);
        assert_eq!(g.weight(0, 1), 1.5);
        assert_eq!(g.degree(1), 1.5);
        let over = g.adjust_weight(0, 1, -2.0);
        assert!((over - 0.5).abs() < 1e-12);
        assert_eq!(g.weight(0, 1), 0.0);
        assert_eq!(g.edge_count(), 0);
        assert_eq!(g.total_volume(), 0.0);
    }

    #[test]
    fn cut_weight_examples() {
        let mut g = DynamicGraph::new();
        g.add_edge(0, 1, 1.0).unwrap();
        let a = VertexSet::new(vec![0]);
        let b = VertexSet::new(vec![1]);
        assert_eq!(cut_weight(&g, &a, &b).unwrap(), 1.0);

        let c = cycle4();
        let s = VertexSet::new(vec![0, 1]);
        assert_eq!(cut_weight(&c, &s, &s.complement(4)).unwrap(), 2.0);
        assert_eq!(
            cut_weight(&c, &s, &VertexSet::new(vec![1, 2])),
            Err(GraphError::OverlappingSets(1))
        );
    }

    #[test]
    fn conductance_examples() {
        let c = cycle4();
        assert_eq!(conductance(&c, &VertexSet::default()), 1.0);
        assert_eq!(conductance(&c, &VertexSet::new(vec![0, 1, 2, 3])), 1.0);
        assert_eq!(conductance(&c, &VertexSet::new(vec![0, 1])), 0.5);
        let mut e = DynamicGraph::new();
        e.add_edge(0, 1, 1.0).unwrap();
        assert_eq!(conductance(&e, &VertexSet::new(vec![0])), 1.0);
    }

    #[test]
    fn bruteforce_two_triangles() {
        let g = two_triangles();
        let (rho, p) = k_way_expansion_bruteforce(&g, 2).unwrap();
        assert!((rho - 1.0 / 7.0).abs() < 1e-12);
        assert_eq!(p.label(0), p.label(1));
        assert_eq!(p.label(0), p.label(2));
        assert_eq!(p.label(3), p.label(5));
        assert_ne!(p.label(0), p.label(3));
    }

    #[test]
    fn bruteforce_k4() {
        let mut g = DynamicGraph::new();
        for u in 0..4 {
            for v in u + 1..4 {
                g.add_edge(u, v, 1.0).unwrap();
            }
        }
        let (rho, p) = k_way_expansion_bruteforce(&g, 2).unwrap();
        assert!((rho - 4.0 / 6.0).abs() < 1e-12);
        assert!(p.clusters().iter().all(|c| c.len() == 2));
    }

    #[test]
    fn bruteforce_vanishing_bridge() {
        let mut g = two_triangles();
        g.remove_edge(2, 3);
        g.add_edge(2, 3, 1e-9).unwrap();
        let (rho, _) = k_way_expansion_bruteforce(&g, 2).unwrap();
        assert!(rho < 1e-9);
    }

    #[test]
    fn bruteforce_guard() {
        let mut g = DynamicGraph::new();
        for u in 0..15 {
            g.add_edge(u, u + 1, 1.0).unwrap();
        }
        assert!(matches!(
            k_way_expansion_bruteforce(&g, 2),
            Err(GraphError::TooLarge { .. })
        ));
        assert!(matches!(
            k_way_expansion_bruteforce(&cycle4(), 5),
            Err(GraphError::InvalidK { .. })
        ));
    }

    #[test]
    fn partition_ordering_and_validation() {
        let g = two_triangles();
        let mut g2 = g.clone();
        g2.add_edge(6, 5, 1.0).unwrap();
        let p = Partition::from_labels(&[1, 1, 1, 0, 0, 0, 0]).ordered_by_volume(&g2);
        let vols: Vec<f64> = p.clusters().iter().map(|c| g2.volume(c)).collect();
        assert!(vols[0] <= vols[1]);
        assert_eq!(p.clusters()[0], vec![0, 1, 2]);

        assert!(Partition::from_clusters(3, vec![vec![0, 1], vec![1, 2]]).is_err());
        assert!(Partition::from_clusters(3, vec![vec![0, 1]]).is_err());
        assert!(Partition::from_clusters(3, vec![vec![2, 0], vec![1]]).is_ok());
    }

    #[test]
    fn induced_subgraph_keeps_self_loops() {
        let mut g = two_triangles();
        g.add_self_loop(1, 2.0).unwrap();
        let sub = g.induced(&[0, 1, 2]);
        assert_eq!(sub.n(), 3);
        assert_eq!(sub.weight(1, 1), 2.0);
        assert_eq!(sub.degree(1), 6.0);
        assert_eq!(sub.degree(2), 2.0);
    }
}
