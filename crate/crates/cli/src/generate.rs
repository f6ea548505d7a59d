//! Conversion of generated or ingested streams to stream and truth files.

use dyncluster::bench::{knn_edges, LabeledStream};

use crate::stream::{QuerySpec, Record, StreamFile, TruthFile};

/// The initial graph's edges, a `Q <k>` with the initial planted count, then
/// every batch followed by `B` and `Q auto`.
pub fn to_files(stream: &LabeledStream, comment: &str) -> (StreamFile, TruthFile) {
    let mut records = vec![Record::Comment(format!(" {comment}"))];
    records.extend(stream.initial.edges().map(|(u, v, _)| Record::Edge(u, v)));
    records.push(Record::Query(QuerySpec::Fixed(distinct(&stream.truth[0]))));
    for batch in &stream.batches {
        records.extend(batch.iter().map(|&(u, v)| Record::Edge(u, v)));
        records.push(Record::Batch);
        records.push(Record::Query(QuerySpec::Auto));
    }
    let n_hint = stream.truth.last().map_or(0, Vec::len);
    (
        StreamFile { n_hint, records },
        TruthFile {
            sections: stream.truth.clone(),
        },
    )
}

fn distinct(labels: &[usize]) -> usize {
    let mut l = labels.to_vec();
    l.sort_unstable();
    l.dedup();
    l.len()
}

/// Parses a numeric feature table: comma-separated rows, `#` comments, and
/// an optional non-numeric header line.
pub fn parse_features(text: &str) -> Result<Vec<Vec<f64>>, String> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let mut rows = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| e.to_string())?;
        let parsed: Result<Vec<f64>, _> = rec.iter().map(str::parse::<f64>).collect();
        match parsed {
            Ok(row) => rows.push(row),
            Err(_) if i == 0 => continue,
            Err(e) => {
                let line = rec.position().map_or(i + 1, |p| p.line() as usize);
                return Err(format!("line {line}: {e}"));
            }
        }
    }
    if let Some(first) = rows.first() {
        if let Some(bad) = rows.iter().position(|r| r.len() != first.len()) {
            return Err(format!("row {} has {} columns, expected {}", bad + 1, rows[bad].len(), first.len()));
        }
    }
    Ok(rows)
}

/// Edge file text (`u v` per line) of the symmetric kNN graph.
pub fn knn_edge_file(points: &[Vec<f64>], k: usize) -> Result<String, String> {
    let edges = knn_edges(points, k).map_err(|e| e.to_string())?;
    Ok(edges.iter().map(|(u, v)| format!("{u} {v}\n")).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use dyncluster::bench::{gen_sbm_decreasing, gen_sbm_increasing, SbmDecreasingParams, SbmIncreasingParams};

    #[test]
    fn increasing_stream_layout() {
        let s = gen_sbm_increasing(&SbmIncreasingParams::default(), 0).unwrap();
        let (file, truth) = to_files(&s, "sbm-inc");
        let count = |want: &Record| file.records.iter().filter(|r| *r == want).count();
        assert_eq!(count(&Record::Batch), 10);
        assert_eq!(count(&Record::Query(QuerySpec::Auto)), 10);
        assert_eq!(count(&Record::Query(QuerySpec::Fixed(4))), 1);
        for (i, r) in file.records.iter().enumerate() {
            if *r == Record::Batch {
                assert_eq!(file.records[i + 1], Record::Query(QuerySpec::Auto));
            }
        }
        assert_eq!(truth.sections.len(), 11);
        assert_eq!(file.n_hint, 1400);
        assert_eq!(StreamFile::parse(&file.serialize()).unwrap(), file);
    }

    #[test]
    fn same_seed_same_bytes() {
        let a = to_files(&gen_sbm_increasing(&SbmIncreasingParams::default(), 4).unwrap(), "x");
        let b = to_files(&gen_sbm_increasing(&SbmIncreasingParams::default(), 4).unwrap(), "x");
        assert_eq!(a.0.serialize(), b.0.serialize());
        assert_eq!(a.1.serialize(), b.1.serialize());
    }

    #[test]
    fn decreasing_truth_counts() {
        let p = SbmDecreasingParams::default();
        let (_, truth) = to_files(&gen_sbm_decreasing(&p, 1).unwrap(), "sbm-dec");
        let last = truth.sections.last().unwrap();
        assert_eq!(distinct(last), p.large_count + p.small_count - p.batches);
    }

    #[test]
    fn features_with_header_and_comments() {
        let rows = parse_features("x,y\n# note\n0, 1\n2,3.5\n").unwrap();
        assert_eq!(rows, vec![vec![0.0, 1.0], vec![2.0, 3.5]]);
        assert!(parse_features("0,1\n2,x\n").is_err());
        assert!(parse_features("0,1\n2\n").is_err());
        let edges = knn_edge_file(&rows, 1).unwrap();
        assert_eq!(edges, "0 1\n");
    }
}
