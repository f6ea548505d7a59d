use super::{build_laplacian, kmeans, smallest_eigenpairs, EigenPairs, LaplacianOperator, SpectralError};
use crate::graph::{DynamicGraph, Partition};

/// Floor applied to `λ_ℓ` in the gap ratio.
pub const EPS_FLOOR: f64 = 1e-12;

const DEFAULT_TOL: f64 = 1e-8;

/// Per-vertex points `F(u) = (f_1(u), …, f_k(u)) / √deg(u)`.
#[derive(Clone, Debug, PartialEq)]
pub struct Embedding {
    pub points: Vec<Vec<f64>>,
}

pub fn embed(g: &DynamicGraph, pairs: &EigenPairs, k: usize) -> Result<Embedding, SpectralError> {
    if pairs.len() < k {
        return Err(SpectralError::InvalidArgument(format!(
            "embedding needs {k} eigenvectors, have {}",
            pairs.len()
        )));
    }
    let mut points = Vec::with_capacity(g.n());
    for u in 0..g.n() {
        let d = g.degree(u);
        if !(d > 0.0) {
            return Err(SpectralError::IsolatedVertex(u));
        }
        let s = d.sqrt();
        points.push(pairs.vectors[..k].iter().map(|f| f[u] / s).collect());
    }
    Ok(Embedding { points })
}

/// Spectral clustering of `g` into (at most) `k` clusters, ordered by
/// nondecreasing volume.
pub fn spectral_clustering(g: &DynamicGraph, k: usize, seed: u64) -> Result<Partition, SpectralError> {
    spectral_clustering_tol(g, k, seed, DEFAULT_TOL)
}

pub fn spectral_clustering_tol(
    g: &DynamicGraph,
    k: usize,
    seed: u64,
    tol: f64,
) -> Result<Partition, SpectralError> {
    let n = g.n();
    if k == 0 || k > n {
        return Err(SpectralError::InvalidArgument(format!("k = {k} for n = {n}")));
    }
    if k == 1 {
        return Ok(Partition::single(n));
    }
    let l = build_laplacian(g)?;
    let pairs = smallest_eigenpairs(&l, k, tol, seed)?;
    let emb = embed(g, &pairs, k)?;
    let km = kmeans(&emb.points, k, seed)?;
    Ok(Partition::from_labels(&km.labels).ordered_by_volume(g))
}

/// The gap-maximising cluster count for a spectrum given in nondecreasing
/// order: `argmax_{2 ≤ ℓ ≤ k_max} λ_{ℓ+1} / max(λ_ℓ, EPS_FLOOR)`, first
/// maximiser on ties. Requires `values.len() > k_max`.
pub fn eigen_gap_from_values(values: &[f64], k_max: usize) -> usize {
    let mut best = 2;
    let mut best_ratio = f64::NEG_INFINITY;
    for ell in 2..=k_max {
        let ratio = values[ell] / values[ell - 1].max(EPS_FLOOR);
        if ratio > best_ratio {
            best_ratio = ratio;
            best = ell;
        }
    }
    best
}

pub fn eigen_gap_select(
    l: &LaplacianOperator,
    k_max: usize,
    tol: f64,
    seed: u64,
) -> Result<usize, SpectralError> {
    let n = l.n();
    if k_max < 2 || k_max + 1 > n {
        return Err(SpectralError::InvalidArgument(format!(
            "k_max = {k_max} must lie in [2, n-1] for n = {n}"
        )));
    }
    let pairs = smallest_eigenpairs(l, k_max + 1, tol, seed)?;
    Ok(eigen_gap_from_values(&pairs.values, k_max))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::k_way_expansion_bruteforce;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn cliques(sizes: &[usize], bridge: f64) -> DynamicGraph {
        let mut g = DynamicGraph::new();
        let mut start = 0;
        for (i, &s) in sizes.iter().enumerate() {
            for u in start..start + s {
                for v in u + 1..start + s {
                    g.add_edge(u, v, 1.0).unwrap();
                }
            }
            if i > 0 {
                g.add_edge(start - 1, start, bridge).unwrap();
            }
            start += s;
        }
        g
    }

    fn ari_naive(a: &[usize], b: &[usize]) -> f64 {
        // pair-counting agreement, enough for exact-recovery checks
        let n = a.len();
        let mut agree = 0usize;
        let mut total = 0usize;
        for i in 0..n {
            for j in i + 1..n {
                total += 1;
                if (a[i] == a[j]) == (b[i] == b[j]) {
                    agree += 1;
                }
            }
        }
        agree as f64 / total as f64
    }

    #[test]
    fn embed_matches_direct_computation() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let mut g = DynamicGraph::with_vertices(10);
        for u in 0..10 {
            g.add_edge(u, (u + 1) % 10, 1.0).unwrap();
            for v in u + 2..10 {
                if rng.gen::<f64>() < 0.3 {
                    g.add_edge(u, v, rng.gen::<f64>() + 0.1).unwrap();
                }
            }
        }
        let l = build_laplacian(&g).unwrap();
        let pairs = smallest_eigenpairs(&l, 3, 1e-10, 0).unwrap();
        let emb = embed(&g, &pairs, 3).unwrap();
        for u in 0..10 {
            for i in 0..3 {
                let expect = pairs.vectors[i][u] / g.degree(u).sqrt();
                assert_eq!(emb.points[u][i], expect);
            }
        }
    }

    #[test]
    fn embed_k1_constant() {
        let g = cliques(&[4, 5], 1.0);
        let l = build_laplacian(&g).unwrap();
        let pairs = smallest_eigenpairs(&l, 1, 1e-10, 0).unwrap();
        let emb = embed(&g, &pairs, 1).unwrap();
        for p in &emb.points {
            assert!((p[0] - emb.points[0][0]).abs() < 1e-8);
        }
    }

    #[test]
    fn embed_two_components_two_points() {
        let mut g = DynamicGraph::new();
        for (u, v) in [(0, 1), (1, 2), (2, 0), (3, 4), (4, 5), (5, 3)] {
            g.add_edge(u, v, 1.0).unwrap();
        }
        let l = build_laplacian(&g).unwrap();
        let pairs = smallest_eigenpairs(&l, 2, 1e-10, 0).unwrap();
        let emb = embed(&g, &pairs, 2).unwrap();
        let mut distinct: Vec<&Vec<f64>> = Vec::new();
        for p in &emb.points {
            if !distinct.iter().any(|q| q.iter().zip(p).all(|(a, b)| (a - b).abs() < 1e-8)) {
                distinct.push(p);
            }
        }
        assert_eq!(distinct.len(), 2);
    }

    #[test]
    fn two_triangles_recovered() {
        let g = cliques(&[3, 3], 1.0);
        let p = spectral_clustering(&g, 2, 0).unwrap();
        let (_, oracle) = k_way_expansion_bruteforce(&g, 2).unwrap();
        assert_eq!(ari_naive(p.labels(), oracle.labels()), 1.0);
    }

    #[test]
    fn k1_single_cluster() {
        let g = cliques(&[3, 4], 1.0);
        let p = spectral_clustering(&g, 1, 0).unwrap();
        assert_eq!(p.num_clusters(), 1);
        assert_eq!(p.clusters()[0].len(), 7);
    }

    #[test]
    fn output_ordered_by_volume() {
        let g = cliques(&[8, 3, 5], 0.01);
        let p = spectral_clustering(&g, 3, 2).unwrap();
        let vols: Vec<f64> = p.clusters().iter().map(|c| g.volume(c)).collect();
        assert!(vols.windows(2).all(|w| w[0] <= w[1]));
        assert_eq!(p.clusters()[0], vec![8, 9, 10]);
    }

    #[test]
    fn gap_select_three_cliques() {
        let g = cliques(&[5, 6, 7], 1e-6);
        let l = build_laplacian(&g).unwrap();
        assert_eq!(eigen_gap_select(&l, 8, 1e-10, 0).unwrap(), 3);
        assert_eq!(eigen_gap_select(&l, 2, 1e-10, 0).unwrap(), 2);
        assert!(eigen_gap_select(&l, 1, 1e-10, 0).is_err());
        assert!(eigen_gap_select(&l, 18, 1e-10, 0).is_err());
    }

    #[test]
    fn gap_ties_prefer_smaller() {
        let vals = [0.0, 0.1, 0.2, 0.4, 0.8];
        assert_eq!(eigen_gap_from_values(&vals, 3), 2);
        let vals = [0.0, 0.0, 0.0, 0.5, 0.6];
        assert_eq!(eigen_gap_from_values(&vals, 3), 3);
    }
}
