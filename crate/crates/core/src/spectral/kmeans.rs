use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::SpectralError;

const MAX_ITER: usize = 100;
const REL_TOL: f64 = 1e-7;

#[derive(Clone, Debug)]
pub struct KMeansResult {
    pub labels: Vec<usize>,
    pub centroids: Vec<Vec<f64>>,
    pub objective: f64,
    /// Objective after seeding and after every Lloyd step.
    pub trace: Vec<f64>,
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// k-means++ seeding followed by Lloyd iterations. Assignment ties go to the
/// lowest centroid index; a centroid left without points is moved to the
/// point farthest from its current centroid.
pub fn kmeans(points: &[Vec<f64>], k: usize, seed: u64) -> Result<KMeansResult, SpectralError> {
    let n = points.len();
    if k == 0 || k > n {
        return Err(SpectralError::InvalidArgument(format!(
            "k = {k} with {n} points"
        )));
    }
    let dim = points[0].len();
    if points.iter().any(|p| p.len() != dim) {
        return Err(SpectralError::InvalidArgument(
            "points have differing dimensions".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut centroids = seed_plus_plus(points, k, &mut rng);
    let mut labels = vec![0usize; n];
    let mut dists = vec![0.0; n];
    let mut objective = assign(points, &centroids, &mut labels, &mut dists);
    let mut trace = vec![objective];

    for _ in 0..MAX_ITER {
        update_centroids(points, &labels, &dists, &mut centroids);
        let next = assign(points, &centroids, &mut labels, &mut dists);
        trace.push(next);
        let improvement = objective - next;
        let done = improvement <= REL_TOL * objective.max(f64::MIN_POSITIVE);
        objective = next;
        if done {
            break;
        }
    }
    Ok(KMeansResult {
        labels,
        centroids,
        objective,
        trace,
    })
}

/// Greedy k-means++: each new centroid is the best of `2 + ⌊ln k⌋` candidates
/// drawn with probability proportional to squared distance, judged by the
/// resulting potential.
fn seed_plus_plus(points: &[Vec<f64>], k: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
    let n = points.len();
    let trials = 2 + (k as f64).ln().floor() as usize;
    let mut centroids = Vec::with_capacity(k);
    let mut chosen = vec![false; n];
    let first = rng.gen_range(0..n);
    chosen[first] = true;
    centroids.push(points[first].clone());
    let mut d2: Vec<f64> = points.iter().map(|p| sq_dist(p, &points[first])).collect();
    while centroids.len() < k {
        let total: f64 = d2.iter().sum();
        let pick = if total > 0.0 {
            let mut best: Option<(f64, usize, Vec<f64>)> = None;
            for _ in 0..trials {
                let c = draw(&d2, total, rng);
                let next: Vec<f64> = points.iter().zip(&d2).map(|(p, &d)| d.min(sq_dist(p, &points[c]))).collect();
                let potential: f64 = next.iter().sum();
                if best.as_ref().is_none_or(|b| potential < b.0) {
                    best = Some((potential, c, next));
                }
            }
            let (_, c, next) = best.expect("at least two trials");
            d2 = next;
            c
        } else {
            // all remaining points coincide with a centroid: take any unused one
            let unused: Vec<usize> = (0..n).filter(|&i| !chosen[i]).collect();
            unused[rng.gen_range(0..unused.len())]
        };
        chosen[pick] = true;
        centroids.push(points[pick].clone());
    }
    centroids
}

/// Index drawn with probability proportional to `weights`.
fn draw(weights: &[f64], total: f64, rng: &mut ChaCha8Rng) -> usize {
    let mut target = rng.gen::<f64>() * total;
    for (i, &d) in weights.iter().enumerate() {
        if d <= 0.0 {
            continue;
        }
        if target < d {
            return i;
        }
        target -= d;
    }
    // rounding can run past the end; fall back to the last positive weight
    weights.iter().rposition(|&d| d > 0.0).unwrap_or(0)
}

fn assign(points: &[Vec<f64>], centroids: &[Vec<f64>], labels: &mut [usize], dists: &mut [f64]) -> f64 {
    let mut total = 0.0;
    for (i, p) in points.iter().enumerate() {
        let mut best = 0;
        let mut best_d = f64::INFINITY;
        for (c, cen) in centroids.iter().enumerate() {
            let d = sq_dist(p, cen);
            if d < best_d {
                best_d = d;
                best = c;
            }
        }
        labels[i] = best;
        dists[i] = best_d;
        total += best_d;
    }
    total
}

fn update_centroids(points: &[Vec<f64>], labels: &[usize], dists: &[f64], centroids: &mut [Vec<f64>]) {
    let k = centroids.len();
    let dim = centroids[0].len();
    let mut sums = vec![vec![0.0; dim]; k];
    let mut counts = vec![0usize; k];
    for (p, &l) in points.iter().zip(labels) {
        counts[l] += 1;
        for (s, x) in sums[l].iter_mut().zip(p) {
            *s += x;
        }
    }
    let mut taken: Vec<bool> = vec![false; points.len()];
    for c in 0..k {
        if counts[c] > 0 {
            for (dst, s) in centroids[c].iter_mut().zip(&sums[c]) {
                *dst = s / counts[c] as f64;
            }
        } else {
            let far = (0..points.len())
                .filter(|&i| !taken[i] && counts[labels[i]] > 1)
                .max_by(|&a, &b| dists[a].total_cmp(&dists[b]).then(b.cmp(&a)));
            if let Some(i) = far {
                taken[i] = true;
                centroids[c] = points[i].clone();
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::{prop_assert, prop_assert_eq, proptest};

    /// Minimum 2-means objective over all bipartitions.
    fn exhaustive_two_means(points: &[Vec<f64>]) -> (f64, Vec<usize>) {
        let n = points.len();
        let dim = points[0].len();
        let mut best = (f64::INFINITY, vec![]);
        for mask in 1u32..(1 << (n - 1)) {
            let labels: Vec<usize> = (0..n).map(|i| ((mask >> i) & 1) as usize).collect();
            let mut obj = 0.0;
            for side in 0..2 {
                let members: Vec<&Vec<f64>> =
                    points.iter().zip(&labels).filter(|(_, &l)| l == side).map(|(p, _)| p).collect();
                let mut mean = vec![0.0; dim];
                for p in &members {
                    for (m, x) in mean.iter_mut().zip(p.iter()) {
                        *m += x / members.len() as f64;
                    }
                }
                obj += members.iter().map(|p| sq_dist(p, &mean)).sum::<f64>();
            }
            if obj < best.0 {
                best = (obj, labels);
            }
        }
        best
    }

    fn same_partition(a: &[usize], b: &[usize]) -> bool {
        (0..a.len()).all(|i| (0..a.len()).all(|j| (a[i] == a[j]) == (b[i] == b[j])))
    }

    #[test]
    fn separated_clouds_match_exhaustive_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for trial in 0..20 {
            let mut pts = Vec::new();
            for i in 0..10 {
                let off = if i < 4 { 0.0 } else { 10.0 };
                pts.push(vec![off + rng.gen::<f64>(), rng.gen::<f64>()]);
            }
            let res = kmeans(&pts, 2, trial).unwrap();
            let (obj, labels) = exhaustive_two_means(&pts);
            assert!(same_partition(&res.labels, &labels));
            assert!((res.objective - obj).abs() < 1e-9);
        }
    }

    #[test]
    fn identical_points() {
        let pts = vec![vec![1.0, 2.0]; 6];
        let res = kmeans(&pts, 2, 0).unwrap();
        assert_eq!(res.objective, 0.0);
    }

    #[test]
    fn k_equals_n() {
        let pts: Vec<Vec<f64>> = (0..7).map(|i| vec![i as f64, (i * i) as f64]).collect();
        let res = kmeans(&pts, 7, 3).unwrap();
        assert_eq!(res.objective, 0.0);
        let mut seen = res.labels.clone();
        seen.sort();
        seen.dedup();
        assert_eq!(seen.len(), 7);
    }

    #[test]
    fn rejects_k_above_n() {
        assert!(kmeans(&[vec![0.0]], 2, 0).is_err());
        assert!(kmeans(&[vec![0.0]], 0, 0).is_err());
    }

    proptest! {
        #[test]
        fn deterministic_and_monotone(
            raw in proptest::collection::vec((-5.0f64..5.0, -5.0f64..5.0), 3..40),
            k in 1usize..5,
            seed in 0u64..1000,
        ) {
            let pts: Vec<Vec<f64>> = raw.iter().map(|&(x, y)| vec![x, y]).collect();
            let k = k.min(pts.len());
            let a = kmeans(&pts, k, seed).unwrap();
            let b = kmeans(&pts, k, seed).unwrap();
            prop_assert_eq!(&a.labels, &b.labels);
            for w in a.trace.windows(2) {
                prop_assert!(w[1] <= w[0] + 1e-9 * w[0].max(1.0));
            }
            prop_assert!(a.labels.iter().all(|&l| l < k));
        }
    }
}
