//! Ground-truth graphs as whitespace- or comma-separated index pairs.
//!
//! Lines starting with `#` are comments, except `# n=<count>` which fixes the
//! node count. A first line that is not numeric is treated as a header.
//! Pairs are symmetrized and deduplicated; self-loops are dropped.

use std::fs;
use std::io::Write;
use std::path::Path;

use crate::{EdgeSet, Error, Result, SparseAdjacency};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct EdgeListStats {
    /// Pair lines read.
    pub entries: usize,
    /// Lines naming an edge already seen, in either direction.
    pub duplicates: usize,
    pub self_loops: usize,
}

pub fn load_ground_truth_graph(
    path: impl AsRef<Path>,
    n: Option<usize>,
) -> Result<(SparseAdjacency, EdgeListStats)> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_edge_list(&text, n, &path.display().to_string())
}

/// Parses edge-list text; `origin` labels parse errors.
///
/// The node count is `n` if given, else the `# n=` header, else one more
/// than the largest index.
pub fn parse_edge_list(
    text: &str,
    n: Option<usize>,
    origin: &str,
) -> Result<(SparseAdjacency, EdgeListStats)> {
    let parse_err = |line: usize, message: String| Error::Parse {
        path: origin.to_string(),
        line,
        message,
    };
    let mut header_n = None;
    let mut edges = EdgeSet::new();
    let mut stats = EdgeListStats::default();
    let mut seen_data = false;
    for (lineno, raw) in text.lines().enumerate() {
        let lineno = lineno + 1;
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(comment) = line.strip_prefix('#') {
            if let Some(v) = comment.trim().strip_prefix("n=") {
                let v = v
                    .trim()
                    .parse::<usize>()
                    .map_err(|_| parse_err(lineno, format!("bad node count '{}'", v.trim())))?;
                header_n = Some(v);
            }
            continue;
        }
        let fields: Vec<&str> = line
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|f| !f.is_empty())
            .collect();
        let parsed: Option<Vec<usize>> = fields.iter().map(|f| f.parse().ok()).collect();
        let pair = match parsed {
            Some(p) if p.len() == 2 => (p[0], p[1]),
            None if !seen_data => {
                seen_data = true;
                continue;
            }
            _ => {
                return Err(parse_err(
                    lineno,
                    format!("expected two node indices, got '{line}'"),
                ))
            }
        };
        seen_data = true;
        stats.entries += 1;
        if pair.0 == pair.1 {
            stats.self_loops += 1;
            continue;
        }
        if !edges.insert(pair.0, pair.1) {
            stats.duplicates += 1;
        }
    }
    if stats.self_loops > 0 {
        log::warn!("{origin}: dropped {} self-loops", stats.self_loops);
    }
    let max_plus_one = edges.max_index().map_or(0, |m| m + 1);
    let n = n.or(header_n).unwrap_or(max_plus_one);
    if max_plus_one > n {
        return Err(Error::IndexOutOfRange {
            index: max_plus_one - 1,
            n,
        });
    }
    Ok((SparseAdjacency::from_edge_set(n, &edges)?, stats))
}

/// Writes each undirected edge once as `i j`, after a `# n=` header.
pub fn save_edge_list(edges: &EdgeSet, n: usize, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut out = String::with_capacity(16 * edges.len() + 16);
    out.push_str(&format!("# n={n}\n"));
    for (i, j) in edges.iter() {
        out.push_str(&format!("{i} {j}\n"));
    }
    let mut file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    file.write_all(out.as_bytes())
        .map_err(|e| Error::io(path, e))
}
