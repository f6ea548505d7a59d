//! The end-to-end dynamic clustering state machine.
//!
//! After [`preprocess`] the state holds the graph, its sparsifier `H` and a
//! contracted sketch built from a clustering of `H`. Every insertion updates
//! all three. A query made within `⌈ln(n_r)^γ⌉` insertions of the last
//! sketch rebuild (time `r`, when the graph had `n_r` vertices) clusters the
//! sketch and expands the result; later queries recluster `H` and rebuild
//! the sketch from that partition.

use std::time::Instant;

use thiserror::Error;

use crate::contracted::{contract_graph, update_contracted, ContractError, ContractedGraph};
use crate::graph::{DynamicGraph, GraphError, Partition, VertexId};
use crate::sparsifier::{static_sparsifier, SparsifierError, SparsifierState};
use crate::spectral::{
    build_laplacian, eigen_gap_from_values, eigen_gap_select, embed, kmeans, smallest_eigenpairs, SpectralError,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PipelineError {
    #[error("edge ({0}, {1}) introduces two new vertices")]
    TwoNewVertices(VertexId, VertexId),
    #[error("vertex {got} skips ahead of the next free id {expected}")]
    NonContiguousVertex { got: VertexId, expected: VertexId },
    #[error("self-loop insertion at vertex {0}")]
    SelfLoop(VertexId),
    #[error("cluster count {ell} exceeds k_max = {k_max}")]
    TooManyClusters { ell: usize, k_max: usize },
    #[error("invalid cluster count {0}")]
    InvalidClusterCount(usize),
    #[error(transparent)]
    Spectral(#[from] SpectralError),
    #[error(transparent)]
    Sparsifier(#[from] SparsifierError),
    #[error(transparent)]
    Contract(#[from] ContractError),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

#[derive(Clone, Debug)]
pub struct PipelineConfig {
    pub tau: f64,
    pub gamma: f64,
    pub k_max: usize,
    pub tol: f64,
    pub seed: u64,
    /// Choose the slow-branch cluster count from an eigen-gap scan of `H`
    /// instead of the sketch.
    pub auto_scan_h: bool,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            tau: 3.0,
            gamma: 1.5,
            k_max: 64,
            tol: 1e-8,
            seed: 0,
            auto_scan_h: false,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ClusterCount {
    Fixed(usize),
    Auto,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Branch {
    Fast,
    Slow,
}

impl Branch {
    pub fn as_str(self) -> &'static str {
        match self {
            Branch::Fast => "fast",
            Branch::Slow => "slow",
        }
    }
}

#[derive(Clone, Debug)]
pub struct QueryResult {
    pub partition: Partition,
    pub branch: Branch,
    pub ell: usize,
    /// Number of nodes in the graph the eigensolver ran on.
    pub solve_dim: usize,
}

#[derive(Clone, Debug)]
pub struct PipelineState {
    cfg: PipelineConfig,
    t: usize,
    g: DynamicGraph,
    sp: SparsifierState,
    cg: ContractedGraph,
    r: usize,
    r_prime: usize,
    n_r: usize,
    event_log: Vec<(VertexId, VertexId)>,
    queries: u64,
    last_ell: usize,
}

/// Builds the sparsifier of `g1`, clusters it into `k` parts and contracts.
pub fn preprocess(g1: DynamicGraph, k: usize, cfg: PipelineConfig) -> Result<PipelineState, PipelineError> {
    if k == 0 || k > g1.n() {
        return Err(PipelineError::InvalidClusterCount(k));
    }
    if k > cfg.k_max {
        return Err(PipelineError::TooManyClusters { ell: k, k_max: cfg.k_max });
    }
    let sp = static_sparsifier(&g1, cfg.tau, cfg.seed)?;
    let p = cluster_with_fallback(sp.h(), &g1, k, cfg.seed, cfg.tol)?;
    let mut cg = contract_graph(&g1, sp.h(), &p)?;
    cg.set_times(1, 1);
    let n_r = g1.n();
    Ok(PipelineState {
        cfg,
        t: 1,
        g: g1,
        sp,
        cg,
        r: 1,
        r_prime: 1,
        n_r,
        event_log: Vec::new(),
        queries: 0,
        last_ell: k,
    })
}

/// Spectral clustering of `h` into `k` parts, tolerant of vertices isolated
/// in `h`: those are clustered afterwards by the plurality label of their
/// neighbours in `g`. The result is ordered by volume in `g`.
pub fn cluster_with_fallback(
    h: &DynamicGraph,
    g: &DynamicGraph,
    k: usize,
    seed: u64,
    tol: f64,
) -> Result<Partition, PipelineError> {
    let n = h.n();
    let active: Vec<VertexId> = (0..n).filter(|&u| h.degree(u) > 0.0).collect();
    let labels_active = if active.len() == n {
        cluster_labels(h, k, seed, tol)?
    } else {
        let sub = h.induced(&active);
        cluster_labels(&sub, k.min(active.len().max(1)), seed, tol)?
    };
    let mut labels = vec![usize::MAX; n];
    for (i, &u) in active.iter().enumerate() {
        labels[u] = labels_active[i];
    }
    fill_by_plurality(g, &mut labels);
    Ok(Partition::from_labels(&labels).ordered_by_volume(g))
}

fn cluster_labels(h: &DynamicGraph, k: usize, seed: u64, tol: f64) -> Result<Vec<usize>, PipelineError> {
    if h.n() == 0 {
        return Ok(Vec::new());
    }
    if k <= 1 {
        return Ok(vec![0; h.n()]);
    }
    let l = build_laplacian(h)?;
    let pairs = smallest_eigenpairs(&l, k, tol, seed)?;
    let emb = embed(h, &pairs, k)?;
    Ok(kmeans(&emb.points, k, seed)?.labels)
}

/// Assigns every `usize::MAX` entry the most common label among its
/// labelled `g`-neighbours (ties to the smaller label), repeating until
/// nothing changes; anything still unreachable joins label 0.
fn fill_by_plurality(g: &DynamicGraph, labels: &mut [usize]) {
    loop {
        let mut changed = false;
        for u in 0..labels.len() {
            if labels[u] != usize::MAX {
                continue;
            }
            let mut tally: Vec<(usize, f64)> = Vec::new();
            for (v, w) in g.neighbors(u) {
                let l = labels[v];
                if l == usize::MAX {
                    continue;
                }
                match tally.iter_mut().find(|(x, _)| *x == l) {
                    Some(e) => e.1 += w,
                    None => tally.push((l, w)),
                }
            }
            if let Some(&(l, _)) = tally
                .iter()
                .max_by(|a, b| a.1.total_cmp(&b.1).then(b.0.cmp(&a.0)))
            {
                labels[u] = l;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    for l in labels.iter_mut() {
        if *l == usize::MAX {
            *l = 0;
        }
    }
}

/// `⌈ln(n)^γ⌉`, the number of insertions the sketch stays usable for.
pub fn fast_window(n_r: usize, gamma: f64) -> usize {
    let ln = (n_r.max(1) as f64).ln();
    ln.max(0.0).powf(gamma).ceil() as usize
}

/// Whether a query at time `t` takes the fast branch.
pub fn is_fast(t: usize, r: usize, n_r: usize, gamma: f64) -> bool {
    t.saturating_sub(r) <= fast_window(n_r, gamma)
}

impl PipelineState {
    pub fn config(&self) -> &PipelineConfig {
        &self.cfg
    }

    pub fn t(&self) -> usize {
        self.t
    }

    pub fn r(&self) -> usize {
        self.r
    }

    pub fn r_prime(&self) -> usize {
        self.r_prime
    }

    pub fn n_r(&self) -> usize {
        self.n_r
    }

    pub fn graph(&self) -> &DynamicGraph {
        &self.g
    }

    pub fn sparsifier(&self) -> &SparsifierState {
        &self.sp
    }

    pub fn contracted(&self) -> &ContractedGraph {
        &self.cg
    }

    /// Cluster count used by the most recent query.
    pub fn last_ell(&self) -> usize {
        self.last_ell
    }

    pub fn event_log(&self) -> &[(VertexId, VertexId)] {
        &self.event_log
    }

    /// Whether a query now would take the fast branch.
    pub fn next_is_fast(&self) -> bool {
        is_fast(self.t, self.r, self.n_r, self.cfg.gamma)
    }

    /// Checks that `{u, v}` conforms to the insertion model.
    pub fn validate(&self, u: VertexId, v: VertexId) -> Result<(), PipelineError> {
        let n = self.g.n();
        if u == v {
            return Err(PipelineError::SelfLoop(u));
        }
        if u >= n && v >= n {
            return Err(PipelineError::TwoNewVertices(u, v));
        }
        let hi = u.max(v);
        if hi > n {
            return Err(PipelineError::NonContiguousVertex { got: hi, expected: n });
        }
        Ok(())
    }

    /// Inserts one unit edge. Rejected insertions leave the state unchanged.
    pub fn handle_update(&mut self, u: VertexId, v: VertexId) -> Result<(), PipelineError> {
        self.validate(u, v)?;
        self.g.add_edge(u, v, 1.0)?;
        self.sp.update(&self.g, u, v, 1.0)?;
        update_contracted(&self.g, &mut self.cg, u, v)?;
        self.t += 1;
        self.event_log.push((u, v));
        Ok(())
    }

    fn next_seed(&mut self) -> u64 {
        self.queries += 1;
        self.cfg.seed.wrapping_add(self.queries.wrapping_mul(0x9E37_79B9_7F4A_7C15))
    }

    pub fn query(&mut self, count: ClusterCount) -> Result<QueryResult, PipelineError> {
        if let ClusterCount::Fixed(ell) = count {
            if ell == 0 || ell > self.g.n() {
                return Err(PipelineError::InvalidClusterCount(ell));
            }
            if ell > self.cfg.k_max {
                return Err(PipelineError::TooManyClusters { ell, k_max: self.cfg.k_max });
            }
        }
        let seed = self.next_seed();
        if self.next_is_fast() {
            if let Some(res) = self.fast_query(count, seed)? {
                return Ok(res);
            }
        }
        self.slow_query(count, seed)
    }

    /// Eigenvalues of the current sketch view, padded with 1 so that every
    /// ℓ up to the view size has a successor value.
    fn sketch_gap_choice(&self, view: &DynamicGraph, seed: u64) -> Result<usize, PipelineError> {
        let m = view.n();
        if m <= 1 {
            return Ok(1);
        }
        let k_max = self.cfg.k_max.min(m);
        let count = (k_max + 1).min(m);
        let l = build_laplacian(view)?;
        let mut values = smallest_eigenpairs(&l, count, self.cfg.tol, seed)?.values;
        while values.len() < k_max + 1 {
            values.push(1.0);
        }
        Ok(eigen_gap_from_values(&values, k_max))
    }

    fn fast_query(&mut self, count: ClusterCount, seed: u64) -> Result<Option<QueryResult>, PipelineError> {
        let (view, nodes) = self.cg.query_graph();
        let m = view.n();
        let ell = match count {
            ClusterCount::Fixed(ell) => ell,
            ClusterCount::Auto => self.sketch_gap_choice(&view, seed)?,
        };
        if ell > m {
            return Ok(None);
        }
        let view_labels = cluster_labels(&view, ell, seed, self.cfg.tol)?;
        let mut node_labels = vec![usize::MAX; self.cg.sketch().n()];
        for (i, &x) in nodes.iter().enumerate() {
            node_labels[x] = view_labels[i];
        }
        // sketch nodes left out of the view: empty super vertices carry no
        // vertices; anything else takes a label of its own
        let mut spare = ell;
        for l in node_labels.iter_mut() {
            if *l == usize::MAX {
                *l = spare;
                spare += 1;
            }
        }
        let partition = self.cg.expand_partition(&node_labels)?.ordered_by_volume(&self.g);
        self.last_ell = ell;
        Ok(Some(QueryResult {
            partition,
            branch: Branch::Fast,
            ell,
            solve_dim: m,
        }))
    }

    fn slow_query(&mut self, count: ClusterCount, seed: u64) -> Result<QueryResult, PipelineError> {
        let ell = match count {
            ClusterCount::Fixed(ell) => ell,
            ClusterCount::Auto if self.cfg.auto_scan_h => {
                let h = self.sp.h();
                let active: Vec<VertexId> = (0..h.n()).filter(|&u| h.degree(u) > 0.0).collect();
                let sub = h.induced(&active);
                let k_max = self.cfg.k_max.min(sub.n().saturating_sub(1));
                if k_max < 2 {
                    1
                } else {
                    eigen_gap_select(&build_laplacian(&sub)?, k_max, self.cfg.tol, seed)?
                }
            }
            ClusterCount::Auto => {
                let (view, _) = self.cg.query_graph();
                self.sketch_gap_choice(&view, seed)?
            }
        };
        let partition = cluster_with_fallback(self.sp.h(), &self.g, ell, seed, self.cfg.tol)?;
        let mut cg = contract_graph(&self.g, self.sp.h(), &partition)?;
        cg.set_times(self.t, self.t);
        self.cg = cg;
        self.r = self.t;
        self.r_prime = self.t;
        self.n_r = self.g.n();
        self.event_log.clear();
        self.last_ell = ell;
        Ok(QueryResult {
            solve_dim: self.sp.h().n(),
            partition,
            branch: Branch::Slow,
            ell,
        })
    }

    /// Runs a query and reports its wall-clock duration in milliseconds.
    pub fn timed_query(&mut self, count: ClusterCount) -> Result<(QueryResult, f64), PipelineError> {
        let start = Instant::now();
        let res = self.query(count)?;
        Ok((res, start.elapsed().as_secs_f64() * 1e3))
    }
}
