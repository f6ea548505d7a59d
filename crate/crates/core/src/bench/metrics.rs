use std::collections::HashMap;

use super::BenchError;
use crate::contracted::ContractedGraph;
use crate::graph::{DynamicGraph, Partition};
use crate::spectral::{build_laplacian, smallest_eigenpairs, SpectralError, EPS_FLOOR};

fn choose2(x: u64) -> f64 {
    (x as f64) * (x.saturating_sub(1) as f64) / 2.0
}

/// Adjusted Rand index (Hubert and Arabie) of two labelings of the same
/// points. Degenerate cases where the expected index equals the maximum
/// (at most one point, or both labelings trivial in the same way) score 1.
pub fn ari(a: &[usize], b: &[usize]) -> Result<f64, BenchError> {
    if a.len() != b.len() {
        return Err(BenchError::LengthMismatch(a.len(), b.len()));
    }
    let n = a.len() as u64;
    if n <= 1 {
        return Ok(1.0);
    }
    let mut table: HashMap<(usize, usize), u64> = HashMap::new();
    let mut rows: HashMap<usize, u64> = HashMap::new();
    let mut cols: HashMap<usize, u64> = HashMap::new();
    for (&x, &y) in a.iter().zip(b) {
        *table.entry((x, y)).or_default() += 1;
        *rows.entry(x).or_default() += 1;
        *cols.entry(y).or_default() += 1;
    }
    let index: f64 = table.values().map(|&c| choose2(c)).sum();
    let sum_a: f64 = rows.values().map(|&c| choose2(c)).sum();
    let sum_b: f64 = cols.values().map(|&c| choose2(c)).sum();
    let expected = sum_a * sum_b / choose2(n);
    let max = 0.5 * (sum_a + sum_b);
    let denom = max - expected;
    if denom == 0.0 {
        return Ok(1.0);
    }
    Ok((index - expected) / denom)
}

/// Largest conductance over the clusters of `p`.
pub fn max_phi(g: &DynamicGraph, p: &Partition) -> f64 {
    p.conductances(g).into_iter().fold(0.0, f64::max)
}

fn ratio(values: &[f64], ell: usize) -> f64 {
    values[ell] / values[ell - 1].max(EPS_FLOOR)
}

/// `λ_{ℓ+1} / λ_ℓ` of the normalized Laplacian of `g` and of the query view
/// of the contracted sketch.
pub fn gap_report(
    g: &DynamicGraph,
    cg: &ContractedGraph,
    ell: usize,
    tol: f64,
    seed: u64,
) -> Result<(f64, f64), BenchError> {
    let (view, _) = cg.query_graph();
    if ell == 0 || ell + 1 > g.n() || ell + 1 > view.n() {
        return Err(SpectralError::InvalidArgument(format!(
            "ell = {ell} needs ell + 1 ≤ {} and ≤ {}",
            g.n(),
            view.n()
        ))
        .into());
    }
    let full = smallest_eigenpairs(&build_laplacian(g)?, ell + 1, tol, seed)?;
    let sketch = smallest_eigenpairs(&build_laplacian(&view)?, ell + 1, tol, seed)?;
    Ok((ratio(&full.values, ell), ratio(&sketch.values, ell)))
}
