use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{BenchError, LabeledStream};
use crate::graph::{DynamicGraph, VertexId};

/// A block model that gains one dense cluster of `n_new` fresh vertices per
/// batch.
#[derive(Clone, Debug, PartialEq)]
pub struct SbmIncreasingParams {
    pub k: usize,
    pub n_k: usize,
    pub p: f64,
    pub q: f64,
    pub n_new: usize,
    pub r1: f64,
    pub s: f64,
    pub batches: usize,
}

impl Default for SbmIncreasingParams {
    fn default() -> Self {
        SbmIncreasingParams {
            k: 4,
            n_k: 250,
            p: 0.1,
            q: 0.01,
            n_new: 40,
            r1: 0.95,
            s: 1e-5,
            batches: 10,
        }
    }
}

impl SbmIncreasingParams {
    pub fn validate(&self) -> Result<(), BenchError> {
        check(self.k >= 1 && self.n_k >= 2, "need k ≥ 1 blocks of at least 2 vertices")?;
        check(0.0 <= self.q && self.q < self.p && self.p <= 1.0, "need 0 ≤ q < p ≤ 1")?;
        check(0.0 < self.r1 && self.r1 <= 1.0, "need 0 < r1 ≤ 1")?;
        check((0.0..=1.0).contains(&self.s), "need 0 ≤ s ≤ 1")?;
        check(self.n_new >= 2 || self.batches == 0, "need n_new ≥ 2")
    }

    pub fn initial_size(&self) -> usize {
        self.k * self.n_k
    }
}

/// A block model with large and small clusters in which every batch merges a
/// fresh pair of small clusters.
#[derive(Clone, Debug, PartialEq)]
pub struct SbmDecreasingParams {
    pub large_count: usize,
    pub large_size: usize,
    pub small_count: usize,
    pub small_size: usize,
    pub p: f64,
    pub q: f64,
    pub r2: f64,
    pub s: f64,
    pub batches: usize,
}

impl Default for SbmDecreasingParams {
    fn default() -> Self {
        SbmDecreasingParams {
            large_count: 5,
            large_size: 500,
            small_count: 8,
            small_size: 50,
            p: 0.5,
            q: 0.0002,
            r2: 0.95,
            s: 1e-5,
            batches: 4,
        }
    }
}

impl SbmDecreasingParams {
    pub fn k(&self) -> usize {
        self.large_count + self.small_count
    }

    pub fn validate(&self) -> Result<(), BenchError> {
        check(self.k() >= 1, "need at least one block")?;
        check(
            (self.large_count == 0 || self.large_size >= 2) && (self.small_count == 0 || self.small_size >= 2),
            "blocks need at least 2 vertices",
        )?;
        check(0.0 <= self.q && self.q < self.p && self.p <= 1.0, "need 0 ≤ q < p ≤ 1")?;
        check(0.0 < self.r2 && self.r2 <= 1.0, "need 0 < r2 ≤ 1")?;
        check((0.0..=1.0).contains(&self.s), "need 0 ≤ s ≤ 1")
    }

    pub fn initial_size(&self) -> usize {
        self.large_count * self.large_size + self.small_count * self.small_size
    }
}

fn check(ok: bool, msg: &str) -> Result<(), BenchError> {
    if ok {
        Ok(())
    } else {
        Err(BenchError::InvalidParams(msg.to_string()))
    }
}

/// Indices of the successes among `count` Bernoulli(`p`) trials, drawn by
/// geometric skipping.
pub(crate) fn bernoulli_indices(count: u64, p: f64, rng: &mut ChaCha8Rng) -> Vec<u64> {
    if p <= 0.0 || count == 0 {
        return Vec::new();
    }
    if p >= 1.0 {
        return (0..count).collect();
    }
    let log_q = (1.0 - p).ln();
    let mut out = Vec::new();
    let mut i: u64 = 0;
    loop {
        let u: f64 = 1.0 - rng.gen::<f64>();
        let skip = (u.ln() / log_q).floor();
        if skip >= (count - i) as f64 {
            break;
        }
        i += skip as u64;
        out.push(i);
        i += 1;
        if i >= count {
            break;
        }
    }
    out
}

/// Decodes a row-major index into the strict upper triangle of an `m × m`
/// matrix as the pair `(i, j)` with `i < j`, counting pairs by `j`.
fn triangle_pair(idx: u64) -> (u64, u64) {
    let mut j = ((1.0 + (1.0 + 8.0 * idx as f64).sqrt()) / 2.0).floor() as u64;
    while j * (j - 1) / 2 > idx {
        j -= 1;
    }
    while (j + 1) * j / 2 <= idx {
        j += 1;
    }
    (idx - j * (j - 1) / 2, j)
}

fn pairs_within(m: usize) -> u64 {
    (m as u64) * (m as u64).saturating_sub(1) / 2
}

/// Samples each pair inside `block` with probability `p`.
fn sample_within(block: &[VertexId], p: f64, rng: &mut ChaCha8Rng) -> Vec<(VertexId, VertexId)> {
    bernoulli_indices(pairs_within(block.len()), p, rng)
        .into_iter()
        .map(|idx| {
            let (i, j) = triangle_pair(idx);
            (block[i as usize], block[j as usize])
        })
        .collect()
}

/// Samples each pair in `a × b` with probability `p`.
fn sample_between(a: &[VertexId], b: &[VertexId], p: f64, rng: &mut ChaCha8Rng) -> Vec<(VertexId, VertexId)> {
    let nb = b.len() as u64;
    bernoulli_indices(a.len() as u64 * nb, p, rng)
        .into_iter()
        .map(|idx| (a[(idx / nb) as usize], b[(idx % nb) as usize]))
        .collect()
}

/// Block model on consecutive blocks of the given sizes, made connected by
/// attaching isolated vertices to a random block mate and then bridging
/// stray components to the component of vertex 0.
fn block_model(sizes: &[usize], p: f64, q: f64, rng: &mut ChaCha8Rng) -> (DynamicGraph, Vec<usize>) {
    let mut blocks = Vec::with_capacity(sizes.len());
    let mut labels = Vec::new();
    for (b, &m) in sizes.iter().enumerate() {
        let start = labels.len();
        blocks.push((start..start + m).collect::<Vec<_>>());
        labels.extend(std::iter::repeat_n(b, m));
    }
    let mut g = DynamicGraph::with_vertices(labels.len());
    for (i, a) in blocks.iter().enumerate() {
        for (u, v) in sample_within(a, p, rng) {
            g.add_edge(u, v, 1.0).expect("distinct endpoints");
        }
        for b in &blocks[i + 1..] {
            for (u, v) in sample_between(a, b, q, rng) {
                g.add_edge(u, v, 1.0).expect("distinct endpoints");
            }
        }
    }
    for u in 0..g.n() {
        if g.degree(u) == 0.0 {
            let block = &blocks[labels[u]];
            let mate = loop {
                let c = block[rng.gen_range(0..block.len())];
                if c != u {
                    break c;
                }
            };
            g.add_edge(u, mate, 1.0).expect("distinct endpoints");
        }
    }
    bridge_components(&mut g, rng);
    (g, labels)
}

fn bridge_components(g: &mut DynamicGraph, rng: &mut ChaCha8Rng) {
    let (comp, count) = g.components();
    if count <= 1 {
        return;
    }
    let mut reps: Vec<Vec<VertexId>> = vec![Vec::new(); count];
    for (v, &c) in comp.iter().enumerate() {
        reps[c].push(v);
    }
    let root = comp[0];
    for (c, members) in reps.iter().enumerate() {
        if c == root {
            continue;
        }
        let u = members[rng.gen_range(0..members.len())];
        let v = reps[root][rng.gen_range(0..reps[root].len())];
        g.add_edge(u, v, 1.0).expect("distinct components");
    }
}

/// Noise edges over all pairs of the first `n` vertices.
fn noise(n: usize, s: f64, rng: &mut ChaCha8Rng) -> Vec<(VertexId, VertexId)> {
    bernoulli_indices(pairs_within(n), s, rng)
        .into_iter()
        .map(|idx| {
            let (i, j) = triangle_pair(idx);
            (i as usize, j as usize)
        })
        .collect()
}

/// Initial graph from the block model, then per batch a fresh cluster `Q` of
/// `n_new` vertices: pairs inside `Q` appear with probability `r1`, pairs
/// between `Q` and earlier vertices with probability `q`, and noise with
/// probability `s` over all pairs.
///
/// New vertices are introduced in id order, each through its edges to
/// lower ids, so every insertion has exactly one new endpoint. A new vertex
/// that drew no such edge is anchored to a random earlier member of `Q` (or
/// to a random existing vertex for the first member).
pub fn gen_sbm_increasing(params: &SbmIncreasingParams, seed: u64) -> Result<LabeledStream, BenchError> {
    params.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (initial, mut labels) = block_model(&vec![params.n_k; params.k], params.p, params.q, &mut rng);
    let mut truth = vec![labels.clone()];
    let mut batches = Vec::with_capacity(params.batches);
    for b in 0..params.batches {
        let base = labels.len();
        let mut batch = Vec::new();
        for i in 0..params.n_new {
            let v = base + i;
            let start = batch.len();
            for u in bernoulli_indices(base as u64, params.q, &mut rng) {
                batch.push((u as usize, v));
            }
            for u in bernoulli_indices(i as u64, params.r1, &mut rng) {
                batch.push((base + u as usize, v));
            }
            if batch.len() == start {
                let u = if i == 0 {
                    rng.gen_range(0..base)
                } else {
                    base + rng.gen_range(0..i)
                };
                batch.push((u, v));
            }
        }
        labels.extend(std::iter::repeat_n(params.k + b, params.n_new));
        batch.extend(noise(labels.len(), params.s, &mut rng));
        batches.push(batch);
        truth.push(labels.clone());
    }
    Ok(LabeledStream {
        initial,
        batches,
        truth,
    })
}

/// Initial graph from the block model with the large blocks first, then per
/// batch a fresh pair of small clusters joined by a random bipartite graph of
/// density `r2`, plus noise with probability `s`. The merged pair takes the
/// smaller of the two labels.
pub fn gen_sbm_decreasing(params: &SbmDecreasingParams, seed: u64) -> Result<LabeledStream, BenchError> {
    params.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut sizes = vec![params.large_size; params.large_count];
    sizes.extend(std::iter::repeat_n(params.small_size, params.small_count));
    let (initial, mut labels) = block_model(&sizes, params.p, params.q, &mut rng);
    let n = labels.len();
    let mut small: Vec<usize> = (params.large_count..params.k()).collect();
    small.shuffle(&mut rng);
    let block = |c: usize| -> Vec<VertexId> {
        let start = params.large_count * params.large_size + (c - params.large_count) * params.small_size;
        (start..start + params.small_size).collect()
    };
    let mut truth = vec![labels.clone()];
    let mut batches = Vec::with_capacity(params.batches);
    for b in 0..params.batches {
        if small.len() < 2 {
            return Err(BenchError::PairsExhausted { batch: b });
        }
        let i = small.pop().expect("checked length");
        let j = small.pop().expect("checked length");
        let (a, c) = (i.min(j), i.max(j));
        let mut batch = sample_between(&block(a), &block(c), params.r2, &mut rng);
        batch.extend(noise(n, params.s, &mut rng));
        for l in labels.iter_mut() {
            if *l == c {
                *l = a;
            }
        }
        batches.push(batch);
        truth.push(labels.clone());
    }
    Ok(LabeledStream {
        initial,
        batches,
        truth,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{conductance, VertexSet};
    use std::collections::HashSet;

    fn distinct(labels: &[usize]) -> usize {
        labels.iter().collect::<HashSet<_>>().len()
    }

    #[test]
    fn triangle_decoding_is_a_bijection() {
        let m = 37u64;
        let mut seen = HashSet::new();
        for idx in 0..pairs_within(m as usize) {
            let (i, j) = triangle_pair(idx);
            assert!(i < j && j < m);
            assert!(seen.insert((i, j)));
        }
    }

    #[test]
    fn bernoulli_extremes() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert!(bernoulli_indices(100, 0.0, &mut rng).is_empty());
        assert_eq!(bernoulli_indices(5, 1.0, &mut rng), vec![0, 1, 2, 3, 4]);
        let idx = bernoulli_indices(1000, 0.3, &mut rng);
        assert!(idx.windows(2).all(|w| w[0] < w[1]));
        assert!(idx.iter().all(|&i| i < 1000));
    }

    #[test]
    fn bernoulli_frequency_is_uniform() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let mut hits = vec![0u32; 10];
        let reps = 20_000;
        for _ in 0..reps {
            for i in bernoulli_indices(10, 0.2, &mut rng) {
                hits[i as usize] += 1;
            }
        }
        let sd = (reps as f64 * 0.2 * 0.8).sqrt();
        for h in hits {
            assert!((h as f64 - reps as f64 * 0.2).abs() < 4.0 * sd);
        }
    }

    #[test]
    fn full_density_increasing_batch_is_the_clique() {
        let params = SbmIncreasingParams {
            k: 2,
            n_k: 20,
            p: 0.5,
            q: 0.0,
            n_new: 6,
            r1: 1.0,
            s: 0.0,
            batches: 2,
        };
        let stream = gen_sbm_increasing(&params, 3).unwrap();
        for (b, batch) in stream.batches.iter().enumerate() {
            let base = 40 + 6 * b;
            // the first new vertex needs an anchor since q = 0
            let clique: HashSet<(usize, usize)> = batch
                .iter()
                .copied()
                .filter(|&(u, _)| u >= base)
                .collect();
            let expected: HashSet<(usize, usize)> =
                (base..base + 6).flat_map(|v| (base..v).map(move |u| (u, v))).collect();
            assert_eq!(clique, expected);
            assert_eq!(batch.len(), 15 + 1);
        }
    }

    #[test]
    fn increasing_inserts_one_new_vertex_at_a_time() {
        let stream = gen_sbm_increasing(&SbmIncreasingParams::default(), 5).unwrap();
        let mut n = stream.initial.n();
        for batch in &stream.batches {
            for &(u, v) in batch {
                let hi = u.max(v);
                assert!(u != v);
                assert!(hi <= n, "vertex {hi} skips ahead of {n}");
                if hi == n {
                    n += 1;
                }
            }
        }
        assert_eq!(n, 1000 + 400);
    }

    #[test]
    fn increasing_truth_adds_one_cluster_per_batch() {
        let stream = gen_sbm_increasing(&SbmIncreasingParams::default(), 1).unwrap();
        assert_eq!(stream.truth.len(), 11);
        for (b, t) in stream.truth.iter().enumerate() {
            assert_eq!(distinct(t), 4 + b);
            assert_eq!(t.len(), 1000 + 40 * b);
        }
    }

    #[test]
    fn increasing_batch_size_within_three_sigma() {
        let params = SbmIncreasingParams::default();
        let stream = gen_sbm_increasing(&params, 11).unwrap();
        for (b, batch) in stream.batches.iter().enumerate() {
            let base = (1000 + 40 * b) as f64;
            let nn = params.n_new as f64;
            let intra = nn * (nn - 1.0) / 2.0;
            let attach = nn * base;
            let total = base + nn;
            let noise = total * (total - 1.0) / 2.0;
            let mean = intra * params.r1 + attach * params.q + noise * params.s;
            let var = intra * params.r1 * (1.0 - params.r1)
                + attach * params.q * (1.0 - params.q)
                + noise * params.s * (1.0 - params.s);
            let got = batch.len() as f64;
            assert!((got - mean).abs() <= 3.0 * var.sqrt(), "batch {b}: {got} vs {mean}");
        }
    }

    #[test]
    fn block_counts_within_four_sigma() {
        let params = SbmIncreasingParams::default();
        for seed in 0..5 {
            let stream = gen_sbm_increasing(&params, seed).unwrap();
            let labels = &stream.truth[0];
            let mut counts = vec![vec![0.0f64; 4]; 4];
            for (u, v, w) in stream.initial.edges() {
                let (a, b) = (labels[u].min(labels[v]), labels[u].max(labels[v]));
                counts[a][b] += w;
            }
            for a in 0..4 {
                for b in a..4 {
                    let (trials, p) = if a == b {
                        (250.0 * 249.0 / 2.0, params.p)
                    } else {
                        (250.0 * 250.0, params.q)
                    };
                    let sd = (trials * p * (1.0 - p)).sqrt();
                    assert!((counts[a][b] - trials * p).abs() <= 4.0 * sd, "seed {seed} block ({a},{b})");
                }
            }
        }
    }

    #[test]
    fn generators_are_deterministic() {
        let a = gen_sbm_increasing(&SbmIncreasingParams::default(), 7).unwrap();
        let b = gen_sbm_increasing(&SbmIncreasingParams::default(), 7).unwrap();
        assert_eq!(a.batches, b.batches);
        assert_eq!(a.truth, b.truth);
        assert_eq!(a.initial.edges().collect::<Vec<_>>(), b.initial.edges().collect::<Vec<_>>());
        let c = gen_sbm_decreasing(&SbmDecreasingParams::default(), 7).unwrap();
        let d = gen_sbm_decreasing(&SbmDecreasingParams::default(), 7).unwrap();
        assert_eq!(c.batches, d.batches);
        assert_eq!(c.truth, d.truth);
    }

    #[test]
    fn initial_graphs_are_connected() {
        let sparse = SbmIncreasingParams {
            n_k: 30,
            p: 0.05,
            q: 0.001,
            ..SbmIncreasingParams::default()
        };
        for seed in 0..5 {
            let s = gen_sbm_increasing(&sparse, seed).unwrap();
            assert!(s.initial.is_connected());
            assert!((0..s.initial.n()).all(|u| s.initial.degree(u) > 0.0));
        }
    }

    #[test]
    fn decreasing_merges_down_to_fifteen() {
        let params = SbmDecreasingParams {
            large_count: 5,
            large_size: 30,
            small_count: 20,
            small_size: 8,
            batches: 10,
            ..SbmDecreasingParams::default()
        };
        let stream = gen_sbm_decreasing(&params, 2).unwrap();
        assert_eq!(distinct(&stream.truth[0]), 25);
        for (b, t) in stream.truth.iter().enumerate() {
            assert_eq!(distinct(t), 25 - b);
        }
        assert_eq!(distinct(stream.truth.last().unwrap()), 15);
    }

    #[test]
    fn decreasing_full_density_is_complete_bipartite() {
        let params = SbmDecreasingParams {
            large_count: 1,
            large_size: 20,
            small_count: 4,
            small_size: 5,
            r2: 1.0,
            s: 0.0,
            batches: 2,
            ..SbmDecreasingParams::default()
        };
        let stream = gen_sbm_decreasing(&params, 4).unwrap();
        for (b, batch) in stream.batches.iter().enumerate() {
            assert_eq!(batch.len(), 25);
            let before = &stream.truth[b];
            let (u0, v0) = batch[0];
            let (la, lb) = (before[u0], before[v0]);
            assert_ne!(la, lb);
            let got: HashSet<_> = batch.iter().copied().collect();
            let want: HashSet<_> = (0..before.len())
                .filter(|&u| before[u] == la)
                .flat_map(|u| (0..before.len()).filter(move |&v| before[v] == lb).map(move |v| (u, v)))
                .collect();
            assert_eq!(got, want);
        }
    }

    #[test]
    fn decreasing_pairs_exhausted() {
        let params = SbmDecreasingParams {
            small_count: 3,
            batches: 2,
            large_size: 20,
            small_size: 5,
            ..SbmDecreasingParams::default()
        };
        assert_eq!(
            gen_sbm_decreasing(&params, 0).unwrap_err(),
            BenchError::PairsExhausted { batch: 1 }
        );
    }

    #[test]
    fn decreasing_bookkeeping_and_cut_growth() {
        let params = SbmDecreasingParams {
            p: 0.1,
            q: 0.001,
            ..SbmDecreasingParams::default()
        };
        let stream = gen_sbm_decreasing(&params, 6).unwrap();
        for (b, t) in stream.truth.iter().enumerate() {
            assert_eq!(distinct(t), 13 - b);
        }
        for b in 0..params.batches {
            let before = &stream.truth[b];
            let (u0, v0) = stream.batches[b][0];
            let (la, lb) = (before[u0], before[v0]);
            let pair: Vec<usize> = (0..before.len()).filter(|&u| before[u] == la || before[u] == lb).collect();
            let side = VertexSet::new(pair.iter().copied().filter(|&u| before[u] == la).collect());
            let local = |g: &DynamicGraph| {
                let sub = g.induced(&pair);
                let s = VertexSet::new(side.members().iter().map(|&u| pair.binary_search(&u).unwrap()).collect());
                conductance(&sub, &s)
            };
            let pre = local(&stream.graph_after(b));
            let post = local(&stream.graph_after(b + 1));
            assert!(pre <= 0.1 * post, "batch {b}: {pre} vs {post}");
        }
    }

    #[test]
    fn invalid_params_rejected() {
        let bad = SbmIncreasingParams {
            q: 0.2,
            p: 0.1,
            ..SbmIncreasingParams::default()
        };
        assert!(matches!(gen_sbm_increasing(&bad, 0), Err(BenchError::InvalidParams(_))));
        let bad = SbmDecreasingParams {
            r2: 0.0,
            ..SbmDecreasingParams::default()
        };
        assert!(matches!(gen_sbm_decreasing(&bad, 0), Err(BenchError::InvalidParams(_))));
    }
}
