//! Cluster-preserving sparsification by degree-aware edge sampling, both
//! from scratch and maintained under edge insertions.
//!
//! An edge `{u, v}` is kept with probability `q = p_u + p_v − p_u·p_v`,
//! where `p_x = min(τ·ln n / deg(x), 1)`, and reweighted by `1/q`. The
//! dynamic variant remembers, per vertex, the value `sp*(x) = ln n / deg(x)`
//! last used for it and resamples every edge around `x` once the current
//! value leaves the window `[sp*(x)/2, 2·sp*(x)]`.

use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashMap};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::graph::{DynamicGraph, VertexId};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SparsifierError {
    #[error("edge ({0}, {1}) introduces two new vertices")]
    TwoNewVertices(VertexId, VertexId),
    #[error("graph grew by {0} vertices in a single insertion")]
    TooManyNewVertices(usize),
    #[error("edge ({0}, {1}) is not present in the updated graph")]
    MissingEdge(VertexId, VertexId),
    #[error("vertex {0} has zero degree")]
    IsolatedVertex(VertexId),
    #[error("sparsifier needs at least two vertices, got {0}")]
    TooSmall(usize),
    #[error("tau must be positive, got {0}")]
    BadTau(f64),
}

/// `(p_u, p_v, q)` for an edge between vertices of the given degrees in a
/// graph on `n` vertices.
pub fn edge_probability(deg_u: f64, deg_v: f64, n: usize, tau: f64) -> (f64, f64, f64) {
    let ln_n = (n as f64).ln();
    probability_from_params(ln_n / deg_u, ln_n / deg_v, tau)
}

/// `(p_u, p_v, q)` from per-endpoint values `x = ln n / deg`.
pub fn probability_from_params(x_u: f64, x_v: f64, tau: f64) -> (f64, f64, f64) {
    let p_u = (tau * x_u).min(1.0);
    let p_v = (tau * x_v).min(1.0);
    (p_u, p_v, p_u + p_v - p_u * p_v)
}

/// One Bernoulli(q) trial for `{u, v}` under the current degrees of `g`.
/// Returns whether the edge is kept and its weight multiplier `1/q` (0 when
/// dropped).
pub fn sample_edge<R: Rng + ?Sized>(
    u: VertexId,
    v: VertexId,
    g: &DynamicGraph,
    tau: f64,
    rng: &mut R,
) -> (bool, f64) {
    let (_, _, q) = edge_probability(g.degree(u), g.degree(v), g.n(), tau);
    coin(q, rng)
}

fn coin<R: Rng + ?Sized>(q: f64, rng: &mut R) -> (bool, f64) {
    if q >= 1.0 || rng.gen::<f64>() < q {
        (true, 1.0 / q.min(1.0))
    } else {
        (false, 0.0)
    }
}

/// Parameters in force when an edge currently in `H` was last sampled.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SampleRecord {
    /// `ln n / deg` used for the lower-numbered endpoint.
    pub param_u: f64,
    /// `ln n / deg` used for the higher-numbered endpoint.
    pub param_v: f64,
    pub q: f64,
    /// Set when `q` was clamped to 1, so the edge was kept unconditionally.
    pub forced: bool,
}

#[derive(Clone, Copy, Debug, PartialEq)]
struct HeapKey(f64);

impl Eq for HeapKey {}

impl PartialOrd for HeapKey {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for HeapKey {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.0.total_cmp(&other.0)
    }
}

/// What a single insertion did to the sparsifier.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct UpdateOutcome {
    pub new_vertex: Option<VertexId>,
    pub doubled: Vec<VertexId>,
    pub resampled: usize,
}

#[derive(Clone, Debug)]
pub struct SparsifierState {
    h: DynamicGraph,
    sp_star: Vec<f64>,
    tau: f64,
    rng: ChaCha8Rng,
    resample_counter: u64,
    records: HashMap<(VertexId, VertexId), SampleRecord>,
    // min-heap on ln n thresholds 2·sp*(x)·deg(x); entries are invalidated
    // by bumping the vertex version
    drift: BinaryHeap<Reverse<(HeapKey, VertexId, u32)>>,
    version: Vec<u32>,
}

fn ordered(u: VertexId, v: VertexId) -> (VertexId, VertexId) {
    if u <= v {
        (u, v)
    } else {
        (v, u)
    }
}

/// Samples every edge of `g` once under its current degrees.
pub fn static_sparsifier(g: &DynamicGraph, tau: f64, seed: u64) -> Result<SparsifierState, SparsifierError> {
    let n = g.n();
    if n < 2 {
        return Err(SparsifierError::TooSmall(n));
    }
    if !(tau > 0.0) {
        return Err(SparsifierError::BadTau(tau));
    }
    if let Some(u) = (0..n).find(|&u| !(g.degree(u) > 0.0)) {
        return Err(SparsifierError::IsolatedVertex(u));
    }
    let mut st = SparsifierState {
        h: DynamicGraph::with_vertices(n),
        sp_star: vec![0.0; n],
        tau,
        rng: ChaCha8Rng::seed_from_u64(seed),
        resample_counter: 0,
        records: HashMap::new(),
        drift: BinaryHeap::new(),
        version: vec![0; n],
    };
    let ln_n = (n as f64).ln();
    for u in 0..n {
        st.sp_star[u] = ln_n / g.degree(u);
    }
    let edges: Vec<(VertexId, VertexId, f64)> = g.edges().collect();
    for (u, v, w) in edges {
        if u == v {
            continue;
        }
        let xu = ln_n / g.degree(u);
        let xv = ln_n / g.degree(v);
        st.sample_pair(u, v, w, xu, xv);
    }
    for u in 0..n {
        st.push_drift(u, g.degree(u));
    }
    Ok(st)
}

/// Applies one insertion to `state`; `g_next` must already contain it.
pub fn update_sparsifier(
    state: &mut SparsifierState,
    g_next: &DynamicGraph,
    u: VertexId,
    v: VertexId,
) -> Result<UpdateOutcome, SparsifierError> {
    state.update(g_next, u, v, 1.0)
}

impl SparsifierState {
    pub fn h(&self) -> &DynamicGraph {
        &self.h
    }

    pub fn sp_star(&self) -> &[f64] {
        &self.sp_star
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn resample_counter(&self) -> u64 {
        self.resample_counter
    }

    pub fn record(&self, u: VertexId, v: VertexId) -> Option<&SampleRecord> {
        self.records.get(&ordered(u, v))
    }

    pub fn records(&self) -> impl Iterator<Item = (&(VertexId, VertexId), &SampleRecord)> {
        self.records.iter()
    }

    /// Samples the `w_G`-weighted pair under the given endpoint values and
    /// adds `w/q` to `H` if kept.
    fn sample_pair(&mut self, u: VertexId, v: VertexId, w: f64, xu: f64, xv: f64) {
        let (_, _, q) = probability_from_params(xu, xv, self.tau);
        let (kept, inv_q) = coin(q, &mut self.rng);
        self.resample_counter += 1;
        if kept {
            self.h.add_edge(u, v, w * inv_q).expect("positive weight on distinct endpoints");
            let (a, b) = ordered(u, v);
            let (pa, pb) = if a == u { (xu, xv) } else { (xv, xu) };
            self.records.insert(
                (a, b),
                SampleRecord {
                    param_u: pa,
                    param_v: pb,
                    q: q.min(1.0),
                    forced: q >= 1.0,
                },
            );
        }
    }

    fn push_drift(&mut self, x: VertexId, deg: f64) {
        self.version[x] = self.version[x].wrapping_add(1);
        let key = 2.0 * self.sp_star[x] * deg;
        self.drift.push(Reverse((HeapKey(key), x, self.version[x])));
    }

    fn compact_drift(&mut self, g: &DynamicGraph) {
        self.drift.clear();
        for x in 0..g.n() {
            self.push_drift(x, g.degree(x));
        }
    }

    fn outside_window(&self, x: VertexId, current: f64) -> bool {
        current > 2.0 * self.sp_star[x] || current < self.sp_star[x] / 2.0
    }

    /// Processes the insertion of `w` units on `{u, v}` into the graph that
    /// is now `g_next`. On error the state is left untouched.
    pub fn update(
        &mut self,
        g_next: &DynamicGraph,
        u: VertexId,
        v: VertexId,
        w: f64,
    ) -> Result<UpdateOutcome, SparsifierError> {
        let n_prev = self.h.n();
        let n = g_next.n();
        let u_new = u >= n_prev;
        let v_new = v >= n_prev;
        if u_new && v_new {
            return Err(SparsifierError::TwoNewVertices(u, v));
        }
        if n > n_prev + 1 {
            return Err(SparsifierError::TooManyNewVertices(n - n_prev));
        }
        if u == v || u >= n || v >= n || g_next.weight(u, v) <= 0.0 {
            return Err(SparsifierError::MissingEdge(u, v));
        }

        let mut out = UpdateOutcome::default();
        self.h.ensure_vertex(n - 1);
        self.sp_star.resize(n, 0.0);
        self.version.resize(n, 0);
        let ln_n = (n as f64).ln();
        let current = |x: VertexId| ln_n / g_next.degree(x);

        if let Some(x) = [u, v].into_iter().find(|&x| x >= n_prev) {
            self.sp_star[x] = current(x);
            out.new_vertex = Some(x);
        }

        // vertices whose value left the window: the endpoints are checked
        // directly, every other vertex can only drift upward through ln n
        let mut doubled: Vec<VertexId> = Vec::new();
        for x in [u, v] {
            if x < n_prev && self.outside_window(x, current(x)) {
                doubled.push(x);
            }
        }
        while let Some(&Reverse((HeapKey(key), x, ver))) = self.drift.peek() {
            if key >= ln_n {
                break;
            }
            self.drift.pop();
            if ver != self.version[x] || x == u || x == v {
                continue;
            }
            if self.outside_window(x, current(x)) {
                doubled.push(x);
            }
        }
        doubled.sort_unstable();
        doubled.dedup();

        if doubled.is_empty() {
            let (xu, xv) = if out.new_vertex.is_some() {
                (current(u), current(v))
            } else {
                (self.sp_star[u], self.sp_star[v])
            };
            self.sample_pair(u, v, w, xu, xv);
            out.resampled = 1;
        } else {
            let in_doubled = |x: VertexId| doubled.binary_search(&x).is_ok();
            let mut pairs: Vec<(VertexId, VertexId, f64)> = Vec::new();
            for &x in &doubled {
                let h_nbrs: Vec<VertexId> = self.h.neighbors(x).map(|(y, _)| y).collect();
                for y in h_nbrs {
                    self.h.remove_edge(x, y);
                    self.records.remove(&ordered(x, y));
                }
                for (y, wg) in g_next.neighbors(x) {
                    if y == x || (in_doubled(y) && y < x) {
                        continue;
                    }
                    pairs.push((x, y, wg));
                }
            }
            let incoming_covered = in_doubled(u) || in_doubled(v);
            for (x, y, wg) in pairs {
                self.sample_pair(x, y, wg, current(x), current(y));
                out.resampled += 1;
            }
            if !incoming_covered {
                let (xu, xv) = if out.new_vertex.is_some() {
                    (current(u), current(v))
                } else {
                    (self.sp_star[u], self.sp_star[v])
                };
                self.sample_pair(u, v, w, xu, xv);
                out.resampled += 1;
            }
            for &x in &doubled {
                self.sp_star[x] = current(x);
                self.push_drift(x, g_next.degree(x));
            }
        }
        for x in [u, v] {
            if !doubled.contains(&x) {
                self.push_drift(x, g_next.degree(x));
            }
        }
        if self.drift.len() > 4 * n + 64 {
            self.compact_drift(g_next);
        }
        out.doubled = doubled;
        Ok(out)
    }

    /// Vertices of `g` violating `sp*(x)/2 ≤ ln n / deg(x) ≤ 2·sp*(x)`.
    pub fn window_violations(&self, g: &DynamicGraph) -> Vec<VertexId> {
        let ln_n = (g.n() as f64).ln();
        (0..g.n())
            .filter(|&x| self.outside_window(x, ln_n / g.degree(x)))
            .collect()
    }

    /// Largest factor, over edges in `H` and their endpoints, between the
    /// value used when the edge was last sampled and the current `ln n / deg`.
    pub fn max_parameter_drift(&self, g: &DynamicGraph) -> f64 {
        let ln_n = (g.n() as f64).ln();
        let mut worst: f64 = 1.0;
        for (&(a, b), rec) in &self.records {
            for (x, used) in [(a, rec.param_u), (b, rec.param_v)] {
                let ideal = ln_n / g.degree(x);
                worst = worst.max(used / ideal).max(ideal / used);
            }
        }
        worst
    }
}
