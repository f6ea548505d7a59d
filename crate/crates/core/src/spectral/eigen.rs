use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{LaplacianOperator, SpectralError};

/// Knobs for [`smallest_eigenpairs_with`].
#[derive(Clone, Debug)]
pub struct SolverConfig {
    pub tol: f64,
    pub seed: u64,
    /// Problems with `n` at or below this size are solved densely.
    pub dense_threshold: usize,
    /// Operator application budget; `None` means `10·count·√n + 300`.
    pub max_matvecs: Option<usize>,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            tol: 1e-8,
            seed: 0,
            dense_threshold: 64,
            max_matvecs: None,
        }
    }
}

/// The `count` smallest eigenpairs, values nondecreasing.
#[derive(Clone, Debug)]
pub struct EigenPairs {
    pub values: Vec<f64>,
    pub vectors: Vec<Vec<f64>>,
    pub residual_tol: f64,
}

impl EigenPairs {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

pub fn smallest_eigenpairs(
    l: &LaplacianOperator,
    count: usize,
    tol: f64,
    seed: u64,
) -> Result<EigenPairs, SpectralError> {
    smallest_eigenpairs_with(
        l,
        count,
        &SolverConfig {
            tol,
            seed,
            ..SolverConfig::default()
        },
    )
}

pub fn smallest_eigenpairs_with(
    l: &LaplacianOperator,
    count: usize,
    cfg: &SolverConfig,
) -> Result<EigenPairs, SpectralError> {
    let n = l.n();
    if count < 1 || count > n {
        return Err(SpectralError::InvalidArgument(format!(
            "requested {count} eigenpairs of a {n}-dimensional operator"
        )));
    }
    if !(cfg.tol > 0.0) {
        return Err(SpectralError::InvalidArgument(format!(
            "tolerance must be positive, got {}",
            cfg.tol
        )));
    }
    let block = block_size(count);
    if n <= cfg.dense_threshold || basis_cap(n, count, block) >= n {
        Ok(dense(l, count, cfg.tol))
    } else {
        Lanczos::new(l, count, cfg).run()
    }
}

fn block_size(count: usize) -> usize {
    count.clamp(1, 6)
}

fn basis_cap(n: usize, count: usize, block: usize) -> usize {
    (2 * count + 2 * block + 16).min(n)
}

fn dense(l: &LaplacianOperator, count: usize, tol: f64) -> EigenPairs {
    let eig = SymmetricEigen::new(l.to_dense());
    let mut order: Vec<usize> = (0..l.n()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]).then(a.cmp(&b)));
    let mut values = Vec::with_capacity(count);
    let mut vectors = Vec::with_capacity(count);
    for &i in order.iter().take(count) {
        values.push(eig.eigenvalues[i]);
        let mut v: Vec<f64> = eig.eigenvectors.column(i).iter().copied().collect();
        fix_sign(&mut v);
        vectors.push(v);
    }
    EigenPairs {
        values,
        vectors,
        residual_tol: tol,
    }
}

/// Flips `v` so its largest-magnitude entry is positive.
fn fix_sign(v: &mut [f64]) {
    let mut best = 0.0f64;
    let mut sign = 1.0;
    for &x in v.iter() {
        if x.abs() > best + 1e-12 {
            best = x.abs();
            sign = x.signum();
        }
    }
    if sign < 0.0 {
        v.iter_mut().for_each(|x| *x = -*x);
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Block Lanczos with full reorthogonalization and thick restart, run on
/// `M = 2I − L` so that the wanted pairs are the largest of `M`.
struct Lanczos<'a> {
    l: &'a LaplacianOperator,
    n: usize,
    count: usize,
    block: usize,
    cap: usize,
    keep: usize,
    tol: f64,
    budget: usize,
    rng: ChaCha8Rng,
    basis: Vec<Vec<f64>>,
    images: Vec<Vec<f64>>,
    proj: Vec<Vec<f64>>,
    matvecs: usize,
}

impl<'a> Lanczos<'a> {
    fn new(l: &'a LaplacianOperator, count: usize, cfg: &SolverConfig) -> Self {
        let n = l.n();
        let block = block_size(count);
        let cap = basis_cap(n, count, block);
        let budget = cfg
            .max_matvecs
            .unwrap_or(10 * count * (n as f64).sqrt().ceil() as usize + 300);
        Self {
            l,
            n,
            count,
            block,
            cap,
            keep: count + (cap - count) / 2,
            tol: cfg.tol,
            budget,
            rng: ChaCha8Rng::seed_from_u64(cfg.seed),
            basis: Vec::with_capacity(cap),
            images: Vec::with_capacity(cap),
            proj: Vec::with_capacity(cap),
            matvecs: 0,
        }
    }

    fn random_vector(&mut self) -> Vec<f64> {
        (0..self.n).map(|_| self.rng.gen::<f64>() - 0.5).collect()
    }

    fn shifted(&mut self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.n];
        self.l.apply_shifted(x, &mut y);
        self.matvecs += 1;
        y
    }

    /// Two passes of classical Gram-Schmidt against the basis, then
    /// normalization. Returns false if `x` lies (numerically) in the span.
    fn orthonormalize(&self, x: &mut [f64]) -> bool {
        let start = norm(x);
        if start == 0.0 {
            return false;
        }
        for _ in 0..2 {
            let coeffs: Vec<f64> = self.basis.iter().map(|q| dot(q, x)).collect();
            for (q, c) in self.basis.iter().zip(coeffs) {
                for (xi, qi) in x.iter_mut().zip(q) {
                    *xi -= c * qi;
                }
            }
        }
        let nrm = norm(x);
        if nrm <= 1e-10 * start {
            return false;
        }
        x.iter_mut().for_each(|v| *v /= nrm);
        true
    }

    fn push(&mut self, x: Vec<f64>) -> Vec<f64> {
        let mx = self.shifted(&x);
        let j = self.basis.len();
        let mut row = Vec::with_capacity(j + 1);
        for i in 0..j {
            row.push(dot(&self.basis[i], &mx));
        }
        row.push(dot(&x, &mx));
        self.basis.push(x);
        self.images.push(mx.clone());
        self.proj.push(row);
        mx
    }

    /// Adds up to `cap − len` vectors, starting with `seeds` and continuing
    /// with operator images of the newest block.
    fn expand(&mut self, mut seeds: Vec<Vec<f64>>) {
        while self.basis.len() < self.cap {
            let mut next = Vec::with_capacity(self.block);
            for mut x in seeds.drain(..) {
                if self.basis.len() >= self.cap {
                    break;
                }
                if !self.orthonormalize(&mut x) {
                    x = self.random_vector();
                    if !self.orthonormalize(&mut x) {
                        continue;
                    }
                }
                next.push(self.push(x));
            }
            if next.is_empty() {
                break;
            }
            seeds = next;
        }
    }

    fn run(mut self) -> Result<EigenPairs, SpectralError> {
        let mut seeds = Vec::with_capacity(self.block);
        seeds.push(self.l.sqrt_degrees().to_vec());
        while seeds.len() < self.block {
            seeds.push(self.random_vector());
        }
        let mut best_residual = f64::INFINITY;
        loop {
            self.expand(seeds);
            let m = self.basis.len();
            let t = DMatrix::from_fn(m, m, |i, j| {
                if i >= j {
                    self.proj[i][j]
                } else {
                    self.proj[j][i]
                }
            });
            let eig = SymmetricEigen::new(t);
            let mut order: Vec<usize> = (0..m).collect();
            order.sort_by(|&a, &b| {
                eig.eigenvalues[b]
                    .total_cmp(&eig.eigenvalues[a])
                    .then(a.cmp(&b))
            });
            let retained = self.keep.min(m);
            let mut ritz = Vec::with_capacity(retained);
            let mut ritz_images = Vec::with_capacity(retained);
            let mut thetas = Vec::with_capacity(retained);
            for &c in order.iter().take(retained) {
                let s = eig.eigenvectors.column(c);
                let mut y = vec![0.0; self.n];
                let mut my = vec![0.0; self.n];
                for (j, &coef) in s.iter().enumerate() {
                    if coef == 0.0 {
                        continue;
                    }
                    for ((yi, myi), (vi, wi)) in y
                        .iter_mut()
                        .zip(my.iter_mut())
                        .zip(self.basis[j].iter().zip(&self.images[j]))
                    {
                        *yi += coef * vi;
                        *myi += coef * wi;
                    }
                }
                thetas.push(eig.eigenvalues[c]);
                ritz.push(y);
                ritz_images.push(my);
            }
            let mut residuals: Vec<Vec<f64>> = Vec::with_capacity(retained);
            let mut unconverged = Vec::new();
            let mut worst = 0.0f64;
            for i in 0..retained {
                let r: Vec<f64> = ritz_images[i]
                    .iter()
                    .zip(&ritz[i])
                    .map(|(a, b)| a - thetas[i] * b)
                    .collect();
                if i < self.count {
                    let lambda = 2.0 - thetas[i];
                    let scaled = norm(&r) / lambda.max(1.0);
                    worst = worst.max(scaled);
                    if scaled > self.tol {
                        unconverged.push(i);
                    }
                }
                residuals.push(r);
            }
            if unconverged.is_empty() && self.confirm(&ritz[..self.count], &thetas) {
                let mut values = Vec::with_capacity(self.count);
                let mut vectors = Vec::with_capacity(self.count);
                for (mut y, theta) in ritz.into_iter().zip(thetas).take(self.count) {
                    fix_sign(&mut y);
                    values.push(2.0 - theta);
                    vectors.push(y);
                }
                return Ok(EigenPairs {
                    values,
                    vectors,
                    residual_tol: self.tol,
                });
            }
            best_residual = best_residual.min(worst);
            if self.matvecs >= self.budget || (m < self.cap && unconverged.is_empty()) {
                return Err(SpectralError::NoConvergence {
                    matvecs: self.matvecs,
                    best_residual,
                });
            }
            // thick restart on the leading Ritz vectors
            let mut extra: Vec<usize> = (self.count..retained).collect();
            let mut pick: Vec<usize> = unconverged.into_iter().chain(extra.drain(..)).collect();
            pick.truncate(self.block);
            seeds = pick.iter().map(|&i| residuals[i].clone()).collect();
            self.basis = ritz;
            self.images = ritz_images;
            self.proj = (0..retained)
                .map(|i| {
                    let mut row = vec![0.0; i + 1];
                    row[i] = thetas[i];
                    row
                })
                .collect();
        }
    }

    /// Recomputes residuals with fresh operator applications.
    fn confirm(&mut self, ritz: &[Vec<f64>], thetas: &[f64]) -> bool {
        ritz.iter().zip(thetas).all(|(y, &theta)| {
            let my = self.shifted(y);
            let r: f64 = my
                .iter()
                .zip(y)
                .map(|(a, b)| (a - theta * b).powi(2))
                .sum::<f64>()
                .sqrt();
            r <= self.tol * (2.0 - theta).max(1.0)
        })
    }
}
