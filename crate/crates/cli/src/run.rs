//! Stream replay in one of three modes: the dynamic pipeline, spectral
//! clustering of the full graph at every query, or spectral clustering of
//! the incrementally maintained sparsifier at every query.

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use dyncluster::bench::{ari, gap_report, max_phi};
use dyncluster::pipeline::{
    cluster_with_fallback, preprocess, ClusterCount, PipelineConfig, PipelineError, PipelineState,
};
use dyncluster::sparsifier::{static_sparsifier, SparsifierState};
use dyncluster::spectral::{
    build_laplacian, eigen_gap_select, smallest_eigenpairs, spectral_clustering_tol, EPS_FLOOR,
};
use dyncluster::{DynamicGraph, Partition, VertexId};
use log::info;

use crate::report::ReportRow;
use crate::stream::{QuerySpec, Record, StreamFile, TruthFile};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    Dynamic,
    StaticFull,
    StaticSparsifier,
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Dynamic => "dynamic",
            Mode::StaticFull => "static-full",
            Mode::StaticSparsifier => "static-sparsifier",
        }
    }
}

impl FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "dynamic" => Ok(Mode::Dynamic),
            "static-full" => Ok(Mode::StaticFull),
            "static-sparsifier" => Ok(Mode::StaticSparsifier),
            _ => Err(format!("unknown mode {s:?}")),
        }
    }
}

#[derive(Clone, Debug)]
pub struct RunConfig {
    pub mode: Mode,
    pub pipeline: PipelineConfig,
    /// Compute the gap-ratio columns (one extra eigensolve per query).
    pub gaps: bool,
}

/// A replay failure at stream record `record` (0-based, header excluded).
#[derive(Debug, Clone, PartialEq)]
pub struct RunError {
    pub record: usize,
    pub message: String,
}

impl fmt::Display for RunError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "record {} (line {}): {}",
            self.record,
            StreamFile::line_of(self.record),
            self.message
        )
    }
}

impl std::error::Error for RunError {}

enum Engine {
    Dynamic(Box<PipelineState>),
    Full(DynamicGraph),
    Sparsifier(DynamicGraph, Box<SparsifierState>),
}

impl Engine {
    fn graph(&self) -> &DynamicGraph {
        match self {
            Engine::Dynamic(st) => st.graph(),
            Engine::Full(g) | Engine::Sparsifier(g, _) => g,
        }
    }
}

fn check_insertion(g: &DynamicGraph, u: VertexId, v: VertexId) -> Result<(), PipelineError> {
    let n = g.n();
    if u == v {
        return Err(PipelineError::SelfLoop(u));
    }
    if u >= n && v >= n {
        return Err(PipelineError::TwoNewVertices(u, v));
    }
    if u.max(v) > n {
        return Err(PipelineError::NonContiguousVertex {
            got: u.max(v),
            expected: n,
        });
    }
    Ok(())
}

/// Eigen-gap choice of the cluster count on `g`, capped at `k_max`.
fn auto_count(g: &DynamicGraph, cfg: &PipelineConfig, seed: u64) -> Result<usize, PipelineError> {
    let active: Vec<VertexId> = (0..g.n()).filter(|&u| g.degree(u) > 0.0).collect();
    let sub = g.induced(&active);
    let k_max = cfg.k_max.min(sub.n().saturating_sub(1));
    if k_max < 2 {
        return Ok(1);
    }
    Ok(eigen_gap_select(&build_laplacian(&sub)?, k_max, cfg.tol, seed)?)
}

fn full_gap(g: &DynamicGraph, ell: usize, tol: f64, seed: u64) -> Result<Option<f64>, PipelineError> {
    if ell == 0 || ell + 1 > g.n() {
        return Ok(None);
    }
    let values = smallest_eigenpairs(&build_laplacian(g)?, ell + 1, tol, seed)?.values;
    Ok(Some(values[ell] / values[ell - 1].max(EPS_FLOOR)))
}

struct Replay<'a> {
    cfg: &'a RunConfig,
    engine: Option<Engine>,
    initial: DynamicGraph,
    insertions: usize,
    batch: usize,
    queries: u64,
    clock: Instant,
}

impl Replay<'_> {
    fn seed(&mut self) -> u64 {
        self.queries += 1;
        self.cfg
            .pipeline
            .seed
            .wrapping_add(self.queries.wrapping_mul(0x9E37_79B9_7F4A_7C15))
    }

    fn insert(&mut self, u: VertexId, v: VertexId) -> Result<(), PipelineError> {
        let Some(engine) = self.engine.as_mut() else {
            if u == v {
                return Err(PipelineError::SelfLoop(u));
            }
            self.initial.ensure_vertex(u.max(v));
            self.initial.add_edge(u, v, 1.0)?;
            return Ok(());
        };
        match engine {
            Engine::Dynamic(st) => st.handle_update(u, v)?,
            Engine::Full(g) => {
                check_insertion(g, u, v)?;
                g.add_edge(u, v, 1.0)?;
            }
            Engine::Sparsifier(g, sp) => {
                check_insertion(g, u, v)?;
                g.add_edge(u, v, 1.0)?;
                sp.update(g, u, v, 1.0)?;
            }
        }
        self.insertions += 1;
        if self.insertions.is_multiple_of(1000) {
            info!(
                "{} insertions, {:.1} ms since last mark",
                self.insertions,
                self.clock.elapsed().as_secs_f64() * 1e3
            );
            self.clock = Instant::now();
        }
        Ok(())
    }

    /// Answers a query: partition, branch label, cluster count and gaps.
    fn query(&mut self, spec: QuerySpec) -> Result<(Partition, &'static str, usize, Option<f64>, Option<f64>), PipelineError> {
        let cfg = self.cfg.pipeline.clone();
        let seed = self.seed();
        if self.engine.is_none() {
            let g1 = std::mem::take(&mut self.initial);
            let k = match spec {
                QuerySpec::Fixed(k) => k,
                QuerySpec::Auto => auto_count(&g1, &cfg, seed)?,
            };
            self.engine = Some(match self.cfg.mode {
                Mode::Dynamic => Engine::Dynamic(Box::new(preprocess(g1, k, cfg.clone())?)),
                Mode::StaticFull => Engine::Full(g1),
                Mode::StaticSparsifier => {
                    let sp = static_sparsifier(&g1, cfg.tau, cfg.seed)?;
                    Engine::Sparsifier(g1, Box::new(sp))
                }
            });
            if let Some(Engine::Dynamic(st)) = self.engine.as_mut() {
                // the sketch was just built from a k-way clustering of H;
                // clustering it again expands that partition
                let res = st.query(ClusterCount::Fixed(k))?;
                let gap = if self.cfg.gaps {
                    let st = &**st;
                    match gap_report(st.graph(), st.contracted(), k, cfg.tol, seed) {
                        Ok((f, c)) => (Some(f), Some(c)),
                        Err(_) => (full_gap(st.graph(), k, cfg.tol, seed)?, None),
                    }
                } else {
                    (None, None)
                };
                return Ok((res.partition, "slow", k, gap.0, gap.1));
            }
            return self.static_query(QuerySpec::Fixed(k), seed);
        }
        match self.engine.as_mut().expect("initialised above") {
            Engine::Dynamic(st) => {
                let before = self.cfg.gaps.then(|| st.contracted().clone());
                let count = match spec {
                    QuerySpec::Fixed(k) => ClusterCount::Fixed(k),
                    QuerySpec::Auto => ClusterCount::Auto,
                };
                let res = st.query(count)?;
                let (gf, gc) = match before {
                    Some(cg) => match gap_report(st.graph(), &cg, res.ell, cfg.tol, seed) {
                        Ok((f, c)) => (Some(f), Some(c)),
                        Err(_) => (full_gap(st.graph(), res.ell, cfg.tol, seed)?, None),
                    },
                    None => (None, None),
                };
                Ok((res.partition, res.branch.as_str(), res.ell, gf, gc))
            }
            _ => self.static_query(spec, seed),
        }
    }

    fn static_query(
        &mut self,
        spec: QuerySpec,
        seed: u64,
    ) -> Result<(Partition, &'static str, usize, Option<f64>, Option<f64>), PipelineError> {
        let cfg = &self.cfg.pipeline;
        let (partition, ell) = match self.engine.as_ref().expect("static engine") {
            Engine::Full(g) => {
                let ell = match spec {
                    QuerySpec::Fixed(k) => k,
                    QuerySpec::Auto => auto_count(g, cfg, seed)?,
                };
                validate_count(g, ell, cfg)?;
                (spectral_clustering_tol(g, ell, seed, cfg.tol)?, ell)
            }
            Engine::Sparsifier(g, sp) => {
                let ell = match spec {
                    QuerySpec::Fixed(k) => k,
                    QuerySpec::Auto => auto_count(sp.h(), cfg, seed)?,
                };
                validate_count(g, ell, cfg)?;
                (cluster_with_fallback(sp.h(), g, ell, seed, cfg.tol)?, ell)
            }
            Engine::Dynamic(_) => unreachable!("dynamic queries go through the pipeline"),
        };
        let gf = if self.cfg.gaps {
            full_gap(self.engine.as_ref().expect("static engine").graph(), ell, cfg.tol, seed)?
        } else {
            None
        };
        Ok((partition, "static", ell, gf, None))
    }
}

fn validate_count(g: &DynamicGraph, ell: usize, cfg: &PipelineConfig) -> Result<(), PipelineError> {
    if ell == 0 || ell > g.n() {
        return Err(PipelineError::InvalidClusterCount(ell));
    }
    if ell > cfg.k_max {
        return Err(PipelineError::TooManyClusters { ell, k_max: cfg.k_max });
    }
    Ok(())
}

/// Replays `stream`, handing each report row to `sink` as soon as it is
/// computed. Returns the number of rows.
pub fn run_stream<E: fmt::Display>(
    stream: &StreamFile,
    truth: Option<&TruthFile>,
    cfg: &RunConfig,
    mut sink: impl FnMut(&ReportRow) -> Result<(), E>,
) -> Result<usize, RunError> {
    let mut replay = Replay {
        cfg,
        engine: None,
        initial: DynamicGraph::new(),
        insertions: 0,
        batch: 0,
        queries: 0,
        clock: Instant::now(),
    };
    let mut rows = 0;
    for (i, rec) in stream.records.iter().enumerate() {
        let fail = |message: String| RunError { record: i, message };
        match *rec {
            Record::Comment(_) => {}
            Record::Batch => replay.batch += 1,
            Record::Edge(u, v) => replay.insert(u, v).map_err(|e| fail(e.to_string()))?,
            Record::Query(spec) => {
                let start = Instant::now();
                let (partition, branch, ell, gap_full, gap_contracted) =
                    replay.query(spec).map_err(|e| fail(e.to_string()))?;
                let wall_ms = start.elapsed().as_secs_f64() * 1e3;
                let g = replay.engine.as_ref().expect("initialised by the query").graph();
                let ari = match truth {
                    None => None,
                    Some(t) => {
                        let labels = t
                            .sections
                            .get(replay.batch)
                            .ok_or_else(|| fail(format!("no truth section for batch {}", replay.batch)))?;
                        if labels.len() != g.n() {
                            return Err(fail(format!(
                                "truth section {} has {} labels, graph has {} vertices",
                                replay.batch,
                                labels.len(),
                                g.n()
                            )));
                        }
                        Some(ari(partition.labels(), labels).map_err(|e| fail(e.to_string()))?)
                    }
                };
                let row = ReportRow {
                    t: replay.insertions + 1,
                    branch: branch.to_string(),
                    ell,
                    ari,
                    max_phi: max_phi(g, &partition),
                    wall_ms,
                    gap_full,
                    gap_contracted,
                };
                sink(&row).map_err(|e| fail(e.to_string()))?;
                rows += 1;
            }
        }
    }
    Ok(rows)
}
