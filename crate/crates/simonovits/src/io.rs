//! Graph files, named graphs, JSON dumps and atomic output.
//!
//! A graph file is `n m` on the first line followed by `m` lines `u v`
//! with `0 <= u < v < n`.

use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::Path;

use serde::Serialize;
use simonovits_core::{CopyHypergraph, Graph};

#[derive(Debug, thiserror::Error)]
pub enum IoError {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("{0}")]
    Io(#[from] std::io::Error),
    #[error("unknown graph {0:?}: not a file and not a built-in name")]
    Unknown(String),
}

fn parse_err(line: usize, msg: impl Into<String>) -> IoError {
    IoError::Parse { line, msg: msg.into() }
}

fn two_numbers(line: usize, text: &str) -> Result<(usize, usize), IoError> {
    let mut it = text.split_whitespace();
    let a = it.next().ok_or_else(|| parse_err(line, "expected two integers"))?;
    let b = it.next().ok_or_else(|| parse_err(line, "expected two integers"))?;
    if it.next().is_some() {
        return Err(parse_err(line, "trailing tokens"));
    }
    let a = a.parse().map_err(|_| parse_err(line, format!("bad integer {a:?}")))?;
    let b = b.parse().map_err(|_| parse_err(line, format!("bad integer {b:?}")))?;
    Ok((a, b))
}

pub fn parse_graph(text: &str) -> Result<Graph, IoError> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim_end_matches('\r')));
    let (line, header) = lines.next().ok_or_else(|| parse_err(1, "empty file"))?;
    let (n, m) = two_numbers(line, header)?;
    let mut g = Graph::new(n);
    let mut seen = 0;
    for (line, text) in lines {
        if text.trim().is_empty() {
            continue;
        }
        let (u, v) = two_numbers(line, text)?;
        if u >= v || v >= n {
            return Err(parse_err(line, format!("edge {u} {v} needs u < v < {n}")));
        }
        if !g.add_edge(u, v) {
            return Err(parse_err(line, format!("duplicate edge {u} {v}")));
        }
        seen += 1;
    }
    if seen != m {
        return Err(parse_err(1, format!("header promises {m} edges, found {seen}")));
    }
    Ok(g)
}

pub fn format_graph(g: &Graph) -> String {
    let edges = g.edges();
    let mut out = format!("{} {}\n", g.n(), edges.len());
    for (u, v) in edges {
        let _ = writeln!(out, "{u} {v}");
    }
    out
}

/// A built-in name or a path to a graph file.
pub fn load_graph(spec: &str) -> Result<Graph, IoError> {
    let path = Path::new(spec);
    if path.is_file() {
        return parse_graph(&fs::read_to_string(path)?);
    }
    Graph::named(spec).ok_or_else(|| IoError::Unknown(spec.to_string()))
}

/// Writes `bytes` to a temporary file next to `path`, then renames it.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> std::io::Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    fs::create_dir_all(dir)?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}

pub fn to_json_pretty<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report types serialize");
    s.push('\n');
    s
}

#[derive(Serialize)]
struct HypergraphDump<'a> {
    n: usize,
    ground: usize,
    hyperedges: &'a [Vec<u32>],
}

/// Ground size and hyperedges as sorted pair-index lists.
pub fn hypergraph_json(h: &CopyHypergraph) -> String {
    to_json_pretty(&HypergraphDump {
        n: h.n(),
        ground: h.ground(),
        hyperedges: h.edges(),
    })
}
