use nalgebra::DMatrix;

use super::SpectralError;
use crate::graph::DynamicGraph;

/// `x ↦ x − D^{-1/2} A D^{-1/2} x`, stored as a compressed row snapshot of
/// the normalized adjacency. A self-loop of weight `w` enters `A` as `2w` on
/// the diagonal, matching its contribution to the degree.
#[derive(Clone, Debug)]
pub struct LaplacianOperator {
    n: usize,
    offsets: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<f64>,
    sqrt_deg: Vec<f64>,
}

pub fn build_laplacian(g: &DynamicGraph) -> Result<LaplacianOperator, SpectralError> {
    let n = g.n();
    let mut sqrt_deg = Vec::with_capacity(n);
    for u in 0..n {
        let d = g.degree(u);
        if !(d > 0.0) {
            return Err(SpectralError::IsolatedVertex(u));
        }
        sqrt_deg.push(d.sqrt());
    }
    let mut offsets = Vec::with_capacity(n + 1);
    let mut cols = Vec::new();
    let mut vals = Vec::new();
    offsets.push(0);
    for u in 0..n {
        for (v, w) in g.neighbors(u) {
            let a = if u == v { 2.0 * w } else { w };
            cols.push(v);
            vals.push(a / (sqrt_deg[u] * sqrt_deg[v]));
        }
        offsets.push(cols.len());
    }
    Ok(LaplacianOperator {
        n,
        offsets,
        cols,
        vals,
        sqrt_deg,
    })
}

impl LaplacianOperator {
    pub fn n(&self) -> usize {
        self.n
    }

    /// `D^{1/2}·1`, the null vector on a connected graph.
    pub fn sqrt_degrees(&self) -> &[f64] {
        &self.sqrt_deg
    }

    /// `out = L x`.
    pub fn apply(&self, x: &[f64], out: &mut [f64]) {
        for u in 0..self.n {
            let mut acc = 0.0;
            for idx in self.offsets[u]..self.offsets[u + 1] {
                acc += self.vals[idx] * x[self.cols[idx]];
            }
            out[u] = x[u] - acc;
        }
    }

    /// `out = (2I − L) x = x + D^{-1/2} A D^{-1/2} x`.
    pub(crate) fn apply_shifted(&self, x: &[f64], out: &mut [f64]) {
        for u in 0..self.n {
            let mut acc = 0.0;
            for idx in self.offsets[u]..self.offsets[u + 1] {
                acc += self.vals[idx] * x[self.cols[idx]];
            }
            out[u] = x[u] + acc;
        }
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut m = DMatrix::<f64>::identity(self.n, self.n);
        for u in 0..self.n {
            for idx in self.offsets[u]..self.offsets[u + 1] {
                m[(u, self.cols[idx])] -= self.vals[idx];
            }
        }
        m
    }
}
