//! The graph descriptor mini-language and the edge-list file format.
//!
//! ```text
//! complete:N   cycle:N   path:N   bipartite:N1,N2   star:N
//! grid:RxC:obc|pbc   torus:RxC   tri:RxC:obc|pbc   honey:RxC:obc|pbc
//! trsq:RxC:obc|pbc   prod(<desc>,<desc>)
//! ```

use std::str::FromStr;

use crate::error::{Error, Result};
use crate::graph::{Boundary, Family, Graph};

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        parse(s.trim()).map_err(|reason| Error::Descriptor {
            input: s.to_string(),
            reason,
        })
    }
}

fn parse(s: &str) -> std::result::Result<Family, String> {
    if let Some(inner) = s.strip_prefix("prod(") {
        let inner = inner
            .strip_suffix(')')
            .ok_or_else(|| "unterminated prod(...)".to_string())?;
        return parse_product(inner);
    }
    let (name, args) = s
        .split_once(':')
        .ok_or_else(|| format!("expected <family>:<params>, got `{s}`"))?;
    match name {
        "complete" => Ok(Family::Complete(count(args)?)),
        "cycle" => Ok(Family::Cycle(count(args)?)),
        "path" => Ok(Family::Path(count(args)?)),
        "star" => Ok(Family::Star(count(args)?)),
        "bipartite" => {
            let (a, b) = args
                .split_once(',')
                .ok_or_else(|| "bipartite needs N1,N2".to_string())?;
            Ok(Family::CompleteBipartite(count(a)?, count(b)?))
        }
        "torus" => {
            let (rows, cols) = dims(args)?;
            Ok(Family::Torus { rows, cols })
        }
        "grid" | "tri" | "honey" | "trsq" => {
            let (size, bc) = args
                .split_once(':')
                .ok_or_else(|| format!("{name} needs RxC:obc|pbc"))?;
            let (rows, cols) = dims(size)?;
            let boundary = match bc {
                "obc" => Boundary::Open,
                "pbc" => Boundary::Periodic,
                other => return Err(format!("unknown boundary condition `{other}`")),
            };
            Ok(match name {
                "grid" => Family::Grid { rows, cols, boundary },
                "tri" => Family::Triangular { rows, cols, boundary },
                "honey" => Family::Honeycomb { rows, cols, boundary },
                _ => Family::TruncatedSquare { rows, cols, boundary },
            })
        }
        other => Err(format!("unknown graph family `{other}`")),
    }
}

// Factors may contain commas themselves (`bipartite:2,3`), so try each
// top-level comma and take the first split where both halves parse.
fn parse_product(inner: &str) -> std::result::Result<Family, String> {
    let mut depth = 0usize;
    for (i, ch) in inner.char_indices() {
        match ch {
            '(' => depth += 1,
            ')' => depth = depth.saturating_sub(1),
            ',' if depth == 0 => {
                if let (Ok(a), Ok(b)) = (parse(&inner[..i]), parse(&inner[i + 1..])) {
                    return Ok(Family::Product(Box::new(a), Box::new(b)));
                }
            }
            _ => {}
        }
    }
    Err(format!("cannot split `{inner}` into two factor descriptors"))
}

fn count(s: &str) -> std::result::Result<usize, String> {
    s.trim()
        .parse()
        .map_err(|_| format!("`{s}` is not a non-negative integer"))
}

fn dims(s: &str) -> std::result::Result<(usize, usize), String> {
    let (r, c) = s
        .split_once('x')
        .ok_or_else(|| format!("expected RxC, got `{s}`"))?;
    Ok((count(r)?, count(c)?))
}

/// Parse an edge-list file: the first non-blank line holds `N`, every
/// following non-blank line one `u v` pair. Lines starting with `#` are
/// ignored.
pub fn parse_edge_list(text: &str) -> Result<Graph> {
    let bad = |line: usize, msg: String| Error::InvalidGraph(format!("edge list line {line}: {msg}"));
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
    let (lineno, first) = lines
        .next()
        .ok_or_else(|| Error::InvalidGraph("edge list is empty".into()))?;
    let order: usize = first
        .parse()
        .map_err(|_| bad(lineno, format!("expected vertex count, got `{first}`")))?;
    let mut edges = Vec::new();
    for (lineno, line) in lines {
        let mut it = line.split_whitespace();
        let mut vertex = || -> Result<usize> {
            let tok = it
                .next()
                .ok_or_else(|| bad(lineno, "expected `u v`".into()))?;
            tok.parse()
                .map_err(|_| bad(lineno, format!("`{tok}` is not a vertex index")))
        };
        let u = vertex()?;
        let v = vertex()?;
        if it.next().is_some() {
            return Err(bad(lineno, "trailing tokens after `u v`".into()));
        }
        edges.push((u, v));
    }
    Graph::from_edges(order, &edges)
}
