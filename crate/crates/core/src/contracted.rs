//! The contracted sketch graph: one super vertex per cluster of a reference
//! partition, carrying the cluster's internal weight as a self-loop and its
//! cuts as edges, plus singleton vertices for everything that arrived or
//! changed substantially since the sketch was built.
//!
//! Sketch node ids are `0..k` for the super vertices followed by one id per
//! singleton in the order singletons were created.

use indexmap::IndexSet;
use log::warn;
use thiserror::Error;

use crate::graph::{DynamicGraph, Partition, VertexId};

/// Negative overshoot below this magnitude is treated as rounding.
const CLAMP_EPS: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ContractError {
    #[error("partition covers {partition} vertices but the graph has {graph}")]
    SizeMismatch { partition: usize, graph: usize },
    #[error("edge ({0}, {1}) introduces two new vertices")]
    TwoNewVertices(VertexId, VertexId),
    #[error("graph grew by {0} vertices in a single insertion")]
    TooManyNewVertices(usize),
    #[error("vertex {0} is unknown to the contracted graph")]
    UnknownVertex(VertexId),
    #[error("labelling has {got} entries, sketch has {expected} nodes")]
    LabelLength { got: usize, expected: usize },
}

/// Where an original vertex currently lives in the sketch.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum VertexTag {
    /// Inside super vertex `i`.
    Member(usize),
    /// Pulled out of its super vertex; singleton at this slot.
    PulledOut(usize),
    /// Arrived after construction; singleton at this slot.
    New(usize),
}

impl VertexTag {
    pub fn is_contracted(self) -> bool {
        matches!(self, VertexTag::Member(_))
    }
}

/// Summary of one [`update_contracted`] call.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ContractUpdate {
    pub new_vertex: Option<VertexId>,
    pub pulled_out: Vec<VertexId>,
}

#[derive(Clone, Debug)]
pub struct ContractedGraph {
    k: usize,
    sketch: DynamicGraph,
    tags: Vec<VertexTag>,
    members: Vec<IndexSet<VertexId>>,
    singletons: Vec<VertexId>,
    degree_snapshot: Vec<f64>,
    // H at build time plus every unit edge routed between two contracted
    // vertices since; pull-outs subtract exactly what this ledger attributes
    // to the departing vertex
    basis: DynamicGraph,
    built_at: usize,
    built_from_gap_at: usize,
    clamp_events: usize,
    clamp_total: f64,
}

/// Contracts each cluster of `p` in `h` to one super vertex. Degree
/// snapshots are taken from `g`, the graph `h` sparsifies.
pub fn contract_graph(g: &DynamicGraph, h: &DynamicGraph, p: &Partition) -> Result<ContractedGraph, ContractError> {
    if p.n() != h.n() || g.n() != h.n() {
        return Err(ContractError::SizeMismatch {
            partition: p.n(),
            graph: h.n().max(g.n()),
        });
    }
    let k = p.num_clusters();
    let mut sketch = DynamicGraph::with_vertices(k);
    for (u, v, w) in h.edges() {
        let (cu, cv) = (p.label(u), p.label(v));
        if cu == cv {
            sketch.add_self_loop(cu, w).expect("positive weight");
        } else {
            sketch.add_edge(cu, cv, w).expect("positive weight");
        }
    }
    let members = p
        .clusters()
        .iter()
        .map(|c| c.iter().copied().collect::<IndexSet<_>>())
        .collect();
    Ok(ContractedGraph {
        k,
        sketch,
        tags: p.labels().iter().map(|&c| VertexTag::Member(c)).collect(),
        members,
        singletons: Vec::new(),
        degree_snapshot: g.degrees().to_vec(),
        basis: h.clone(),
        built_at: 0,
        built_from_gap_at: 0,
        clamp_events: 0,
        clamp_total: 0.0,
    })
}

/// Applies the insertion of one unit edge `{u, v}`; `g_next` must already
/// contain it.
pub fn update_contracted(
    g_next: &DynamicGraph,
    cg: &mut ContractedGraph,
    u: VertexId,
    v: VertexId,
) -> Result<ContractUpdate, ContractError> {
    cg.update(g_next, u, v)
}

impl ContractedGraph {
    /// Number of super vertices, including ones emptied by pull-outs.
    pub fn num_super(&self) -> usize {
        self.k
    }

    pub fn sketch(&self) -> &DynamicGraph {
        &self.sketch
    }

    pub fn tag(&self, v: VertexId) -> Option<VertexTag> {
        self.tags.get(v).copied()
    }

    pub fn tags(&self) -> &[VertexTag] {
        &self.tags
    }

    /// Current members `P_i^{(t)}` of super vertex `i`.
    pub fn members(&self, i: usize) -> impl Iterator<Item = VertexId> + '_ {
        self.members[i].iter().copied()
    }

    pub fn singletons(&self) -> &[VertexId] {
        &self.singletons
    }

    pub fn degree_snapshot(&self, v: VertexId) -> f64 {
        self.degree_snapshot[v]
    }

    pub fn built_at(&self) -> usize {
        self.built_at
    }

    pub fn built_from_gap_at(&self) -> usize {
        self.built_from_gap_at
    }

    pub fn set_times(&mut self, built_at: usize, built_from_gap_at: usize) {
        self.built_at = built_at;
        self.built_from_gap_at = built_from_gap_at;
    }

    /// Number of weight decrements that overshot zero and were clamped, and
    /// their total overshoot.
    pub fn clamp_stats(&self) -> (usize, f64) {
        (self.clamp_events, self.clamp_total)
    }

    /// Sketch node representing original vertex `v`.
    pub fn node_of(&self, v: VertexId) -> Option<usize> {
        self.tags.get(v).map(|&t| self.node(t))
    }

    fn node(&self, t: VertexTag) -> usize {
        match t {
            VertexTag::Member(i) => i,
            VertexTag::PulledOut(s) | VertexTag::New(s) => self.k + s,
        }
    }

    /// Original vertices represented by sketch node `x`.
    pub fn node_members(&self, x: usize) -> Vec<VertexId> {
        if x < self.k {
            self.members[x].iter().copied().collect()
        } else {
            vec![self.singletons[x - self.k]]
        }
    }

    fn decrement(&mut self, a: usize, b: usize, amount: f64) {
        if amount <= 0.0 {
            return;
        }
        let over = self.sketch.adjust_weight(a, b, -amount);
        if over > CLAMP_EPS {
            self.clamp_events += 1;
            self.clamp_total += over;
            warn!("contracted weight ({a}, {b}) clamped at zero, overshoot {over:.3e}");
        }
    }

    fn add(&mut self, a: usize, b: usize, amount: f64) {
        if amount > 0.0 {
            self.sketch.adjust_weight(a, b, amount);
        }
    }

    fn update(&mut self, g_next: &DynamicGraph, u: VertexId, v: VertexId) -> Result<ContractUpdate, ContractError> {
        let n_prev = self.tags.len();
        if u >= n_prev && v >= n_prev {
            return Err(ContractError::TwoNewVertices(u, v));
        }
        if g_next.n() > n_prev + 1 {
            return Err(ContractError::TooManyNewVertices(g_next.n() - n_prev));
        }
        let mut out = ContractUpdate::default();
        if let Some(x) = [u, v].into_iter().find(|&x| x >= n_prev) {
            let slot = self.singletons.len();
            self.singletons.push(x);
            self.sketch.add_vertex();
            self.tags.push(VertexTag::New(slot));
            self.degree_snapshot.push(g_next.degree(x));
            out.new_vertex = Some(x);
        }
        for (w, other) in [(u, v), (v, u)] {
            if w >= n_prev {
                continue;
            }
            if let VertexTag::Member(j) = self.tags[w] {
                if g_next.degree(w) > 2.0 * self.degree_snapshot[w] {
                    self.pull_out(g_next, w, j, other);
                    out.pulled_out.push(w);
                }
            }
        }
        self.route(u, v);
        Ok(out)
    }

    /// Moves `w` out of super vertex `j`. The incoming edge `{w, other}` is
    /// left out of the accounting here; [`Self::route`] adds it afterwards.
    fn pull_out(&mut self, g: &DynamicGraph, w: VertexId, j: usize, other: VertexId) {
        let slot = self.singletons.len();
        self.singletons.push(w);
        let node_w = self.sketch.add_vertex();
        self.members[j].swap_remove(&w);
        self.tags[w] = VertexTag::PulledOut(slot);

        let mut g_cut = vec![0.0; self.k];
        let mut to_singletons: Vec<(usize, f64)> = Vec::new();
        for (y, wg) in g.neighbors(w) {
            let wg = if y == other { wg - 1.0 } else { wg };
            if wg <= 0.0 || y == w {
                continue;
            }
            match self.tags[y] {
                VertexTag::Member(i) => g_cut[i] += wg,
                t => to_singletons.push((self.node(t), wg)),
            }
        }
        for (node_y, wg) in to_singletons {
            self.add(node_w, node_y, wg);
            self.decrement(j, node_y, wg);
        }
        for (i, &c) in g_cut.iter().enumerate() {
            self.add(node_w, i, c);
        }

        let mut basis_cut = vec![0.0; self.k];
        let basis_nbrs: Vec<(VertexId, f64)> = self.basis.neighbors(w).collect();
        for &(y, wb) in &basis_nbrs {
            if let VertexTag::Member(i) = self.tags[y] {
                basis_cut[i] += wb;
            }
        }
        for (i, &c) in basis_cut.iter().enumerate() {
            self.decrement(j, i, c);
        }
        for (y, _) in basis_nbrs {
            self.basis.remove_edge(w, y);
        }
        self.degree_snapshot[w] = g.degree(w);
    }

    fn route(&mut self, u: VertexId, v: VertexId) {
        let (tu, tv) = (self.tags[u], self.tags[v]);
        let (nu, nv) = (self.node(tu), self.node(tv));
        self.add(nu, nv, 1.0);
        if tu.is_contracted() && tv.is_contracted() {
            self.basis.add_edge(u, v, 1.0).expect("distinct endpoints");
        }
    }

    /// Sketch nodes that take part in queries: non-empty super vertices and
    /// singletons, restricted to those with positive degree.
    pub fn query_nodes(&self) -> Vec<usize> {
        (0..self.sketch.n())
            .filter(|&x| (x >= self.k || !self.members[x].is_empty()) && self.sketch.degree(x) > 0.0)
            .collect()
    }

    /// The sketch induced on [`Self::query_nodes`], with the node list
    /// mapping view indices back to sketch node ids.
    pub fn query_graph(&self) -> (DynamicGraph, Vec<usize>) {
        let nodes = self.query_nodes();
        (self.sketch.induced(&nodes), nodes)
    }

    /// Expands a labelling of sketch nodes (indexed by sketch node id) to a
    /// partition of the original vertices.
    pub fn expand_partition(&self, node_labels: &[usize]) -> Result<Partition, ContractError> {
        if node_labels.len() != self.sketch.n() {
            return Err(ContractError::LabelLength {
                got: node_labels.len(),
                expected: self.sketch.n(),
            });
        }
        let labels: Vec<usize> = self.tags.iter().map(|&t| node_labels[self.node(t)]).collect();
        Ok(Partition::from_labels(&labels))
    }

    /// Label of `v` under a labelling of sketch nodes.
    pub fn label_of(&self, v: VertexId, node_labels: &[usize]) -> Result<usize, ContractError> {
        let t = self.tags.get(v).ok_or(ContractError::UnknownVertex(v))?;
        node_labels
            .get(self.node(*t))
            .copied()
            .ok_or(ContractError::LabelLength {
                got: node_labels.len(),
                expected: self.sketch.n(),
            })
    }
}
