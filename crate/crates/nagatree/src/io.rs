//! Text and JSON file formats.
//!
//! Metric files come in two forms. The matrix form is
//!
//! ```text
//! 3
//! a
//! b
//! c
//! 0 1 2
//! 1 0 1
//! 2 1 0
//! ```
//!
//! with entries written as integers, `p/q` or finite decimals. The JSON form
//! is `{"points": [...], "distances": [[...], ...]}` where entries are strings
//! in the same syntax or JSON numbers. Blank lines and lines starting with `#`
//! are ignored in every text format.

use std::collections::HashMap;
use std::path::Path;

use nagatree_core::tree::TreeEdge;
use nagatree_core::{parse_rational, MetricSpace, WeightedTree};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
}

pub fn read_file(path: &Path) -> Result<Vec<u8>> {
    std::fs::read(path).map_err(|e| Error::io(path, e))
}

pub fn write_file(path: &Path, contents: &str) -> Result<()> {
    std::fs::write(path, contents).map_err(|e| Error::io(path, e))
}

fn utf8<'a>(bytes: &'a [u8], source: &str) -> Result<&'a str> {
    std::str::from_utf8(bytes).map_err(|e| Error::format(source, 0, format!("not UTF-8: {e}")))
}

#[derive(Deserialize)]
#[serde(untagged)]
enum Entry {
    Text(String),
    Number(serde_json::Number),
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct MetricDoc {
    points: Vec<String>,
    distances: Vec<Vec<Entry>>,
}

#[derive(Serialize)]
struct MetricDocOut<'a> {
    points: &'a [String],
    distances: Vec<Vec<String>>,
}

/// Parses either metric form; JSON is recognised by a leading `{`.
pub fn parse_metric(bytes: &[u8], source: &str) -> Result<MetricSpace> {
    let text = utf8(bytes, source)?;
    if text.trim_start().starts_with('{') {
        let doc: MetricDoc = serde_json::from_str(text)?;
        let rows = doc
            .distances
            .iter()
            .map(|row| {
                row.iter()
                    .map(|e| match e {
                        Entry::Text(s) => parse_rational(s),
                        Entry::Number(n) => parse_rational(&n.to_string()),
                    })
                    .collect::<nagatree_core::Result<Vec<_>>>()
            })
            .collect::<nagatree_core::Result<Vec<_>>>()?;
        return Ok(MetricSpace::new(doc.points, rows)?);
    }
    let mut lines = content_lines(text);
    let (line, first) = lines
        .next()
        .ok_or_else(|| Error::format(source, 1, "empty metric file"))?;
    let n: usize = first.parse().map_err(|_| {
        Error::format(
            source,
            line,
            format!("expected point count, found {first:?}"),
        )
    })?;
    let mut labels = Vec::with_capacity(n);
    for _ in 0..n {
        let (_, l) = lines
            .next()
            .ok_or_else(|| Error::format(source, line, format!("expected {n} labels")))?;
        labels.push(l.to_string());
    }
    let mut rows = Vec::with_capacity(n);
    for _ in 0..n {
        let (_, l) = lines
            .next()
            .ok_or_else(|| Error::format(source, line, format!("expected {n} matrix rows")))?;
        rows.push(
            l.split_whitespace()
                .map(parse_rational)
                .collect::<nagatree_core::Result<Vec<_>>>()?,
        );
    }
    if let Some((line, _)) = lines.next() {
        return Err(Error::format(source, line, "trailing content after matrix"));
    }
    Ok(MetricSpace::new(labels, rows)?)
}

pub fn metric_to_matrix(x: &MetricSpace) -> String {
    let mut out = format!("{}\n", x.len());
    for l in x.labels() {
        out.push_str(l);
        out.push('\n');
    }
    for i in 0..x.len() {
        let row: Vec<String> = (0..x.len()).map(|j| x.dist(i, j).to_string()).collect();
        out.push_str(&row.join(" "));
        out.push('\n');
    }
    out
}

pub fn metric_to_json(x: &MetricSpace) -> String {
    let doc = MetricDocOut {
        points: x.labels(),
        distances: x
            .rows()
            .iter()
            .map(|r| r.iter().map(|v| v.to_string()).collect())
            .collect(),
    };
    let mut s = serde_json::to_string_pretty(&doc).expect("serializable");
    s.push('\n');
    s
}

#[derive(Serialize, Deserialize, Clone, Debug, PartialEq, Eq)]
pub struct EdgeDoc {
    pub u: String,
    pub v: String,
    pub w: String,
}

/// Tree file: vertex labels and edges with exact rational weights.
#[derive(Serialize, Deserialize, Clone, Debug, PartialEq, Eq)]
#[serde(deny_unknown_fields)]
pub struct TreeDoc {
    pub vertices: Vec<String>,
    pub edges: Vec<EdgeDoc>,
}

pub fn tree_to_json(x: &MetricSpace, t: &WeightedTree) -> String {
    let doc = TreeDoc {
        vertices: x.labels().to_vec(),
        edges: t
            .edges()
            .iter()
            .map(|e| EdgeDoc {
                u: x.label(e.u).into(),
                v: x.label(e.v).into(),
                w: e.weight.to_string(),
            })
            .collect(),
    };
    let mut s = serde_json::to_string_pretty(&doc).expect("serializable");
    s.push('\n');
    s
}

/// Loads a tree over the points of `x`; vertices may be listed in any order
/// but must be exactly the labels of `x`.
pub fn parse_tree(bytes: &[u8], source: &str, x: &MetricSpace) -> Result<WeightedTree> {
    let doc: TreeDoc = serde_json::from_str(utf8(bytes, source)?)?;
    if doc.vertices.len() != x.len() {
        return Err(Error::format(
            source,
            0,
            format!(
                "tree has {} vertices, metric has {} points",
                doc.vertices.len(),
                x.len()
            ),
        ));
    }
    let mut seen = vec![false; x.len()];
    for v in &doc.vertices {
        let i = x
            .index_of(v)
            .ok_or_else(|| nagatree_core::Error::UnknownLabel(v.clone()))?;
        if std::mem::replace(&mut seen[i], true) {
            return Err(nagatree_core::Error::DuplicateLabel(v.clone()).into());
        }
    }
    let index = |l: &str| {
        x.index_of(l)
            .ok_or_else(|| nagatree_core::Error::UnknownLabel(l.into()))
    };
    let edges = doc
        .edges
        .iter()
        .map(|e| {
            Ok(TreeEdge {
                u: index(&e.u)?,
                v: index(&e.v)?,
                weight: parse_rational(&e.w)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(WeightedTree::new(x.len(), edges)?)
}

/// One label per line, resolved against `x`.
pub fn parse_labels(bytes: &[u8], source: &str, x: &MetricSpace) -> Result<Vec<usize>> {
    let lookup: HashMap<&str, usize> = x
        .labels()
        .iter()
        .enumerate()
        .map(|(i, l)| (l.as_str(), i))
        .collect();
    content_lines(utf8(bytes, source)?)
        .map(|(_, l)| {
            lookup
                .get(l)
                .copied()
                .ok_or_else(|| nagatree_core::Error::UnknownLabel(l.into()).into())
        })
        .collect()
}

/// Whitespace-separated rows of floating-point values.
pub fn parse_values(bytes: &[u8], source: &str) -> Result<Vec<Vec<f64>>> {
    content_lines(utf8(bytes, source)?)
        .map(|(line, l)| {
            l.split_whitespace()
                .map(|t| {
                    t.parse::<f64>()
                        .map_err(|_| Error::format(source, line, format!("bad number {t:?}")))
                })
                .collect()
        })
        .collect()
}

/// Rows in the shortest form that parses back to the same `f64`.
pub fn values_to_text(rows: &[Vec<f64>]) -> String {
    let mut out = String::new();
    for row in rows {
        let cells: Vec<String> = row.iter().map(|v| format!("{v:?}")).collect();
        out.push_str(&cells.join(" "));
        out.push('\n');
    }
    out
}
