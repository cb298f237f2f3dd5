//! Weighted edge lists: `nameA<TAB>nameB<TAB>weight`, one edge per line.

use std::collections::HashMap;
use std::io::{BufRead, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::linalg::DenseMatrix;
use crate::mmsb::{GraphKind, WeightedGraph};

/// Weights above this are taken as a sign of a misread column.
pub const MAX_PLAUSIBLE_WEIGHT: f64 = 2.0;

#[derive(Clone, Debug)]
pub struct EdgeList {
    pub graph: WeightedGraph,
    /// Node names in index order (order of first appearance).
    pub names: Vec<String>,
    /// Number of weights in `(1, 2]` that were clamped to 1.
    pub clamped_weights: usize,
}

pub fn ingest_weighted_edgelist(path: impl AsRef<Path>) -> Result<EdgeList> {
    let file = std::fs::File::open(path)?;
    read_weighted_edgelist(std::io::BufReader::new(file))
}

/// Parses an edge list. Fields are split on tabs when the line has one and on
/// whitespace otherwise; blank lines and lines starting with `#` are skipped.
///
/// Duplicate pairs keep the largest weight, the matrix is symmetric, and a
/// node's self-weight is 1 unless a `name<TAB>name<TAB>w` line sets it.
pub fn read_weighted_edgelist<R: BufRead>(input: R) -> Result<EdgeList> {
    let mut index: HashMap<String, usize> = HashMap::new();
    let mut names: Vec<String> = Vec::new();
    let mut edges: HashMap<(usize, usize), f64> = HashMap::new();
    let mut clamped_weights = 0;

    let mut intern = |name: &str, names: &mut Vec<String>| -> usize {
        *index.entry(name.to_string()).or_insert_with(|| {
            names.push(name.to_string());
            names.len() - 1
        })
    };

    for (idx, line) in input.lines().enumerate() {
        let lineno = idx + 1;
        let line = line?;
        let line = line.trim_end_matches(['\r', '\n']);
        if line.trim().is_empty() || line.trim_start().starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = if line.contains('\t') {
            line.split('\t').map(str::trim).collect()
        } else {
            line.split_whitespace().collect()
        };
        if fields.len() != 3 || fields.iter().any(|f| f.is_empty()) {
            return Err(Error::parse(
                lineno,
                format!("expected 'nameA<TAB>nameB<TAB>weight', found {} fields", fields.len()),
            ));
        }
        let weight: f64 = fields[2]
            .parse()
            .map_err(|_| Error::parse(lineno, format!("weight '{}' is not a number", fields[2])))?;
        if !(0.0..=MAX_PLAUSIBLE_WEIGHT).contains(&weight) {
            return Err(Error::parse(
                lineno,
                format!("weight {weight} outside [0, {MAX_PLAUSIBLE_WEIGHT}]; wrong column?"),
            ));
        }
        let weight = if weight > 1.0 {
            clamped_weights += 1;
            1.0
        } else {
            weight
        };
        let a = intern(fields[0], &mut names);
        let b = intern(fields[1], &mut names);
        let key = (a.min(b), a.max(b));
        let entry = edges.entry(key).or_insert(weight);
        *entry = entry.max(weight);
    }

    if edges.is_empty() {
        return Err(Error::parse(0, "no edges"));
    }
    let n = names.len();
    let mut adj = DenseMatrix::identity(n);
    for (&(a, b), &w) in &edges {
        adj.set(a, b, w);
        adj.set(b, a, w);
    }
    Ok(EdgeList {
        graph: WeightedGraph::new(adj, GraphKind::Observed, 0)?,
        names,
        clamped_weights,
    })
}

/// Writes every node's self-weight first (fixing the node order on re-read),
/// then each nonzero upper-triangle entry. Weights use shortest round-trip
/// formatting.
pub fn write_weighted_edgelist<W: Write>(adj: &DenseMatrix, names: &[String], mut out: W) -> Result<()> {
    let n = adj.rows();
    if adj.cols() != n || names.len() != n {
        return Err(Error::invalid(format!(
            "adjacency is {}x{} but {} names were given",
            adj.rows(),
            adj.cols(),
            names.len()
        )));
    }
    if names.iter().any(|s| s.is_empty() || s.contains(['\t', '\n', '\r'])) {
        return Err(Error::invalid("node names must be non-empty without tabs or newlines"));
    }
    let mut line = String::new();
    for i in 0..n {
        line.clear();
        line.push_str(&format!("{}\t{}\t{}\n", names[i], names[i], adj.get(i, i)));
        out.write_all(line.as_bytes())?;
    }
    for i in 0..n {
        for j in i + 1..n {
            let w = adj.get(i, j);
            if w != 0.0 {
                line.clear();
                line.push_str(&format!("{}\t{}\t{}\n", names[i], names[j], w));
                out.write_all(line.as_bytes())?;
            }
        }
    }
    Ok(())
}

/// `v0, v1, …` names for generated graphs.
pub fn default_names(n: usize) -> Vec<String> {
    (0..n).map(|i| format!("v{i}")).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> Result<EdgeList> {
        read_weighted_edgelist(text.as_bytes())
    }

    #[test]
    fn basic_example() {
        let e = parse("a\tb\t0.5\nb\tc\t0.25\n").unwrap();
        assert_eq!(e.names, vec!["a", "b", "c"]);
        let adj = e.graph.adjacency();
        assert_eq!(adj.get(0, 1), 0.5);
        assert_eq!(adj.get(1, 0), 0.5);
        assert_eq!(adj.get(1, 2), 0.25);
        assert_eq!(adj.get(0, 2), 0.0);
        for i in 0..3 {
            assert_eq!(adj.get(i, i), 1.0);
        }
        assert_eq!(e.graph.kind(), GraphKind::Observed);
        // Whitespace-separated input is accepted too.
        let w = parse("a b 0.5\nb c 0.25\n").unwrap();
        assert_eq!(w.graph.adjacency(), adj);
    }

    #[test]
    fn duplicates_take_the_max() {
        let e = parse("x\ty\t0.3\ny\tx\t0.7\nx\ty\t0.1\n").unwrap();
        assert_eq!(e.graph.adjacency().get(0, 1), 0.7);
    }

    #[test]
    fn clamping_and_rejection() {
        let e = parse("a\tb\t1.5\n").unwrap();
        assert_eq!(e.graph.adjacency().get(0, 1), 1.0);
        assert_eq!(e.clamped_weights, 1);
        assert!(matches!(parse("a\tb\t0.1\na\tc\t2.5\n"), Err(Error::Parse { line: 2, .. })));
        assert!(matches!(parse("a\tb\t-0.1\n"), Err(Error::Parse { line: 1, .. })));
        assert!(matches!(parse("a\tb\tNaN\n"), Err(Error::Parse { line: 1, .. })));
        assert!(matches!(parse("a\tb\n"), Err(Error::Parse { line: 1, .. })));
        assert!(matches!(parse("# c\na\tb\tz\n"), Err(Error::Parse { line: 2, .. })));
    }

    #[test]
    fn empty_file() {
        for text in ["", "\n\n", "# only a comment\n"] {
            match parse(text) {
                Err(Error::Parse { line: 0, message }) => assert_eq!(message, "no edges"),
                other => panic!("unexpected {other:?}"),
            }
        }
    }

    #[test]
    fn explicit_self_weight() {
        let e = parse("a\ta\t0.4\na\tb\t0.2\n").unwrap();
        assert_eq!(e.graph.adjacency().get(0, 0), 0.4);
        assert_eq!(e.graph.adjacency().get(1, 1), 1.0);
    }

    #[test]
    fn write_then_read_round_trips() {
        let adj = DenseMatrix::from_rows(&[
            vec![1.0, 0.0, 0.125],
            vec![0.0, 1.0, 1.0 / 3.0],
            vec![0.125, 1.0 / 3.0, 1.0],
        ])
        .unwrap();
        let names = default_names(3);
        let mut buf = Vec::new();
        write_weighted_edgelist(&adj, &names, &mut buf).unwrap();
        let e = read_weighted_edgelist(&buf[..]).unwrap();
        assert_eq!(e.names, names);
        assert_eq!(e.graph.adjacency(), &adj);
        assert!(write_weighted_edgelist(&adj, &names[..2], Vec::new()).is_err());
    }
}
