use std::collections::{HashMap, HashSet};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{BenchError, LabeledStream};
use crate::graph::{DynamicGraph, VertexId};

/// Largest point count accepted by [`knn_edges`].
pub const KNN_BRUTEFORCE_MAX: usize = 5000;

/// Which classes form the initial graph, which arrive later, and how the
/// later edges are cut into batches.
#[derive(Clone, Debug, PartialEq)]
pub struct KnnSchedule {
    pub initial_classes: Vec<usize>,
    pub held_out_classes: Vec<usize>,
    pub batches: usize,
    pub seed: u64,
}

impl KnnSchedule {
    /// Parses `key=value` lines; `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self, BenchError> {
        let mut sched = KnnSchedule {
            initial_classes: Vec::new(),
            held_out_classes: Vec::new(),
            batches: 10,
            seed: 0,
        };
        for (i, raw) in text.lines().enumerate() {
            let line = strip_comment(raw);
            if line.is_empty() {
                continue;
            }
            let err = |msg: String| BenchError::Parse { line: i + 1, msg };
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| err(format!("expected key=value, got {line:?}")))?;
            let value = value.trim();
            match key.trim() {
                "initial_classes" => sched.initial_classes = parse_list(value).map_err(err)?,
                "held_out_classes" => sched.held_out_classes = parse_list(value).map_err(err)?,
                "batches" => sched.batches = parse_num(value).map_err(err)?,
                "seed" => sched.seed = parse_num(value).map_err(err)?,
                other => return Err(err(format!("unknown key {other:?}"))),
            }
        }
        if sched.initial_classes.is_empty() {
            return Err(BenchError::InvalidParams("initial_classes is empty".into()));
        }
        if sched.initial_classes.iter().any(|c| sched.held_out_classes.contains(c)) {
            return Err(BenchError::InvalidParams(
                "a class is both initial and held out".into(),
            ));
        }
        Ok(sched)
    }
}

/// A kNN stream together with the original vertex id of every stream vertex.
#[derive(Clone, Debug)]
pub struct KnnStream {
    pub stream: LabeledStream,
    pub original_ids: Vec<usize>,
}

fn strip_comment(line: &str) -> &str {
    line.split('#').next().unwrap_or("").trim()
}

fn parse_num<T: std::str::FromStr>(s: &str) -> Result<T, String> {
    s.parse().map_err(|_| format!("not a non-negative integer: {s:?}"))
}

fn parse_list(s: &str) -> Result<Vec<usize>, String> {
    if s.is_empty() {
        return Ok(Vec::new());
    }
    s.split(',').map(|x| parse_num(x.trim())).collect()
}

fn parse_pairs(text: &str, what: &str) -> Result<Vec<(usize, usize, usize)>, BenchError> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = strip_comment(raw);
        if line.is_empty() {
            continue;
        }
        let err = |msg: String| BenchError::Parse { line: i + 1, msg };
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() != 2 {
            return Err(err(format!("expected two fields in {what} line, got {}", fields.len())));
        }
        let a = parse_num(fields[0]).map_err(err)?;
        let b = parse_num(fields[1]).map_err(err)?;
        out.push((a, b, i + 1));
    }
    Ok(out)
}

/// Builds a stream from a precomputed edge list (`u v` per line) and class
/// file (`vertex label` per line).
///
/// The initial graph holds the edges between vertices of the initial
/// classes. Edges between initial or held-out vertices that touch a
/// held-out vertex are shuffled and split into batches whose sizes differ by
/// at most one; edges touching other classes are dropped. Stream ids number
/// the initial graph's vertices in original order, then later vertices in
/// order of arrival. An edge whose endpoints would both be new is deferred
/// until one of them has arrived.
pub fn ingest_knn_stream(edges: &str, classes: &str, schedule: &KnnSchedule) -> Result<KnnStream, BenchError> {
    let mut class_of: HashMap<usize, usize> = HashMap::new();
    for (v, c, line) in parse_pairs(classes, "class")? {
        if class_of.insert(v, c).is_some() {
            return Err(BenchError::Parse {
                line,
                msg: format!("vertex {v} listed twice"),
            });
        }
    }
    let initial: HashSet<usize> = schedule.initial_classes.iter().copied().collect();
    let held: HashSet<usize> = schedule.held_out_classes.iter().copied().collect();

    let mut first = Vec::new();
    let mut later = Vec::new();
    for (u, v, line) in parse_pairs(edges, "edge")? {
        if u == v {
            return Err(BenchError::Parse {
                line,
                msg: format!("self-loop on {u}"),
            });
        }
        let class = |x: usize| {
            class_of.get(&x).copied().ok_or_else(|| BenchError::Parse {
                line,
                msg: format!("vertex {x} has no class"),
            })
        };
        let (cu, cv) = (class(u)?, class(v)?);
        match (initial.contains(&cu), initial.contains(&cv)) {
            (true, true) => first.push((u, v)),
            (iu, iv) if (iu || held.contains(&cu)) && (iv || held.contains(&cv)) => later.push((u, v)),
            _ => {}
        }
    }

    let mut original_ids: Vec<usize> = first.iter().flat_map(|&(u, v)| [u, v]).collect();
    original_ids.sort_unstable();
    original_ids.dedup();
    let mut id: HashMap<usize, VertexId> = original_ids.iter().enumerate().map(|(i, &x)| (x, i)).collect();
    let mut g = DynamicGraph::with_vertices(original_ids.len());
    for &(u, v) in &first {
        g.add_edge(id[&u], id[&v], 1.0).expect("distinct endpoints");
    }
    let n_initial = original_ids.len();

    let mut rng = ChaCha8Rng::seed_from_u64(schedule.seed);
    later.shuffle(&mut rng);
    let ordered = arrival_order(&later, &mut id, &mut original_ids)?;

    let batches = if ordered.is_empty() { 0 } else { schedule.batches.max(1) };
    let mut out = Vec::with_capacity(batches);
    let mut truth = vec![original_ids[..n_initial].iter().map(|x| class_of[x]).collect::<Vec<_>>()];
    let mut it = ordered.into_iter();
    let mut present = n_initial;
    for b in 0..batches {
        let size = out_len(b, batches, later.len());
        let batch: Vec<(VertexId, VertexId)> = it.by_ref().take(size).collect();
        for &(u, v) in &batch {
            present = present.max(u.max(v) + 1);
        }
        truth.push(original_ids[..present].iter().map(|x| class_of[x]).collect());
        out.push(batch);
    }
    Ok(KnnStream {
        stream: LabeledStream {
            initial: g,
            batches: out,
            truth,
        },
        original_ids,
    })
}

fn out_len(b: usize, batches: usize, total: usize) -> usize {
    total / batches + usize::from(b < total % batches)
}

/// Reorders `edges` so each has at most one unseen endpoint when emitted,
/// assigning stream ids to vertices as they first appear.
fn arrival_order(
    edges: &[(usize, usize)],
    id: &mut HashMap<usize, VertexId>,
    original_ids: &mut Vec<usize>,
) -> Result<Vec<(VertexId, VertexId)>, BenchError> {
    let mut pending: HashMap<usize, Vec<usize>> = HashMap::new();
    let mut done = vec![false; edges.len()];
    let mut out = Vec::with_capacity(edges.len());
    for start in 0..edges.len() {
        let mut stack = vec![start];
        while let Some(e) = stack.pop() {
            if done[e] {
                continue;
            }
            let (u, v) = edges[e];
            if !id.contains_key(&u) && !id.contains_key(&v) {
                pending.entry(u).or_default().push(e);
                pending.entry(v).or_default().push(e);
                continue;
            }
            done[e] = true;
            for x in [u, v] {
                if let std::collections::hash_map::Entry::Vacant(e) = id.entry(x) {
                    e.insert(original_ids.len());
                    original_ids.push(x);
                    if let Some(waiting) = pending.remove(&x) {
                        stack.extend(waiting.into_iter().rev());
                    }
                }
            }
            out.push((id[&u], id[&v]));
        }
    }
    let missing = done.iter().filter(|&&d| !d).count();
    if missing > 0 {
        return Err(BenchError::Unreachable(missing));
    }
    Ok(out)
}

/// Symmetric k-nearest-neighbour edges by exhaustive Euclidean search, as
/// sorted pairs `(u, v)` with `u < v`. Ties go to the lower index.
pub fn knn_edges(points: &[Vec<f64>], k: usize) -> Result<Vec<(usize, usize)>, BenchError> {
    let n = points.len();
    if n > KNN_BRUTEFORCE_MAX {
        return Err(BenchError::InvalidParams(format!(
            "{n} points exceeds the brute-force limit of {KNN_BRUTEFORCE_MAX}"
        )));
    }
    if k == 0 || k >= n {
        return Err(BenchError::InvalidParams(format!("k = {k} with {n} points")));
    }
    let mut edges = Vec::with_capacity(n * k);
    for (u, p) in points.iter().enumerate() {
        let mut dist: Vec<(f64, usize)> = points
            .iter()
            .enumerate()
            .filter(|&(v, _)| v != u)
            .map(|(v, x)| (p.iter().zip(x).map(|(a, b)| (a - b) * (a - b)).sum(), v))
            .collect();
        dist.select_nth_unstable_by(k - 1, |a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        for &(_, v) in &dist[..k] {
            edges.push((u.min(v), u.max(v)));
        }
    }
    edges.sort_unstable();
    edges.dedup();
    Ok(edges)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeMap;

    /// Four classes of five vertices; each class is a 5-cycle with one
    /// chord, and consecutive classes share an edge.
    fn toy() -> (String, String) {
        let mut edges = String::from("# toy kNN graph\n");
        let mut classes = String::new();
        for c in 0..4 {
            let base = 10 * c + 100;
            for i in 0..5 {
                edges += &format!("{} {}\n", base + i, base + (i + 1) % 5);
                classes += &format!("{} {}\n", base + i, c);
            }
            edges += &format!("{} {}\n", base, base + 2);
            if c > 0 {
                edges += &format!("{} {}\n", base - 10, base);
            }
        }
        (edges, classes)
    }

    fn schedule(text: &str) -> KnnSchedule {
        KnnSchedule::parse(text).unwrap()
    }

    fn multiset(pairs: impl Iterator<Item = (usize, usize)>) -> BTreeMap<(usize, usize), usize> {
        let mut m = BTreeMap::new();
        for (u, v) in pairs {
            *m.entry((u.min(v), u.max(v))).or_default() += 1;
        }
        m
    }

    #[test]
    fn everything_initial_gives_no_batches() {
        let (e, c) = toy();
        let s = ingest_knn_stream(&e, &c, &schedule("initial_classes=0,1,2,3\nbatches=10")).unwrap();
        assert!(s.stream.batches.is_empty());
        assert_eq!(s.stream.initial.n(), 20);
        assert_eq!(s.stream.truth.len(), 1);
    }

    #[test]
    fn held_out_class_splits_evenly() {
        let (e, c) = toy();
        let sched = schedule("initial_classes=0,1,2\nheld_out_classes=3\nbatches=4\nseed=9\n");
        let s = ingest_knn_stream(&e, &c, &sched).unwrap();
        let sizes: Vec<usize> = s.stream.batches.iter().map(Vec::len).collect();
        assert_eq!(sizes.iter().sum::<usize>(), 7);
        assert!(sizes.iter().max().unwrap() - sizes.iter().min().unwrap() <= 1);
        assert_eq!(s.stream.truth.len(), 5);
        assert_eq!(s.stream.truth.last().unwrap().len(), 20);
    }

    #[test]
    fn ten_batches_differ_by_at_most_one() {
        let (e, c) = toy();
        let sched = schedule("initial_classes=0,1,2\nheld_out_classes=3\nbatches=10");
        let s = ingest_knn_stream(&e, &c, &sched).unwrap();
        let sizes: Vec<usize> = s.stream.batches.iter().map(Vec::len).collect();
        assert_eq!(sizes.len(), 10);
        assert!(sizes.iter().max().unwrap() - sizes.iter().min().unwrap() <= 1);
    }

    #[test]
    fn round_trip_reproduces_edge_multiset() {
        let (e, c) = toy();
        for seed in 0..5 {
            let sched = schedule(&format!("initial_classes=0,2\nheld_out_classes=1,3\nbatches=3\nseed={seed}"));
            let s = ingest_knn_stream(&e, &c, &sched).unwrap();
            let ids = &s.original_ids;
            let initial = s.stream.initial.edges().map(|(u, v, _)| (ids[u], ids[v]));
            let later = s.stream.batches.iter().flatten().map(|&(u, v)| (ids[u], ids[v]));
            let got = multiset(initial.chain(later));
            let want = multiset(parse_pairs(&e, "edge").unwrap().into_iter().map(|(u, v, _)| (u, v)));
            assert_eq!(got, want);
        }
    }

    #[test]
    fn arrivals_are_contiguous_and_single() {
        let (e, c) = toy();
        let sched = schedule("initial_classes=1\nheld_out_classes=0,2,3\nbatches=5\nseed=3");
        let s = ingest_knn_stream(&e, &c, &sched).unwrap();
        let mut n = s.stream.initial.n();
        for &(u, v) in s.stream.batches.iter().flatten() {
            let hi = u.max(v);
            assert!(u.min(v) < n && hi <= n);
            if hi == n {
                n += 1;
            }
        }
        assert_eq!(n, 20);
        for (b, t) in s.stream.truth.iter().enumerate() {
            for (x, &label) in t.iter().enumerate() {
                assert_eq!(label, (s.original_ids[x] - 100) / 10, "batch {b}");
            }
        }
    }

    #[test]
    fn unreachable_component_is_an_error() {
        let edges = "0 1\n2 3\n";
        let classes = "0 0\n1 0\n2 1\n3 1\n";
        let err = ingest_knn_stream(edges, classes, &schedule("initial_classes=0\nheld_out_classes=1")).unwrap_err();
        assert_eq!(err, BenchError::Unreachable(1));
    }

    #[test]
    fn malformed_lines_report_line_numbers() {
        let (_, c) = toy();
        let sched = schedule("initial_classes=0");
        let err = ingest_knn_stream("100 101\n\n100 x\n", &c, &sched).unwrap_err();
        assert!(matches!(err, BenchError::Parse { line: 3, .. }));
        let err = ingest_knn_stream("100 101 102\n", &c, &sched).unwrap_err();
        assert!(matches!(err, BenchError::Parse { line: 1, .. }));
        let err = ingest_knn_stream("100 999\n", &c, &sched).unwrap_err();
        assert!(matches!(err, BenchError::Parse { line: 1, .. }));
        let err = KnnSchedule::parse("initial_classes=0\nbogus=1\n").unwrap_err();
        assert!(matches!(err, BenchError::Parse { line: 2, .. }));
        let err = KnnSchedule::parse("batches 3\n").unwrap_err();
        assert!(matches!(err, BenchError::Parse { line: 1, .. }));
    }

    #[test]
    fn knn_edges_on_a_line() {
        let pts: Vec<Vec<f64>> = [0.0, 1.0, 3.0, 7.0].iter().map(|&x| vec![x]).collect();
        assert_eq!(knn_edges(&pts, 1).unwrap(), vec![(0, 1), (1, 2), (2, 3)]);
        assert!(knn_edges(&pts, 4).is_err());
    }

    #[test]
    fn knn_edges_match_sorting_oracle() {
        let pts: Vec<Vec<f64>> = (0..40)
            .map(|i| vec![((i * 37) % 17) as f64 + 0.01 * i as f64, ((i * 11) % 13) as f64])
            .collect();
        let k = 3;
        let got = knn_edges(&pts, k).unwrap();
        let mut want = HashSet::new();
        for u in 0..pts.len() {
            let mut order: Vec<usize> = (0..pts.len()).filter(|&v| v != u).collect();
            let d = |v: usize| (pts[u][0] - pts[v][0]).powi(2) + (pts[u][1] - pts[v][1]).powi(2);
            order.sort_by(|&a, &b| d(a).total_cmp(&d(b)).then(a.cmp(&b)));
            for &v in &order[..k] {
                want.insert((u.min(v), u.max(v)));
            }
        }
        assert_eq!(got.into_iter().collect::<HashSet<_>>(), want);
    }
}
