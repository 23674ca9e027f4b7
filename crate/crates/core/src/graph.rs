//! Simple undirected graphs, the named families used as thermometers, and
//! the degree statistics that enter the high-temperature formulas.

use std::collections::VecDeque;
use std::fmt;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Boundary condition of a lattice patch.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Boundary {
    Open,
    Periodic,
}

impl fmt::Display for Boundary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Boundary::Open => "obc",
            Boundary::Periodic => "pbc",
        })
    }
}

/// Provenance of a graph. The tag is set by the builders and never by
/// [`Graph::from_edges`], so a tagged graph always carries the canonical
/// labeling that the closed-form spectra assume.
///
/// `Display` writes the descriptor mini-language; `FromStr` parses it.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    Complete(usize),
    Cycle(usize),
    Path(usize),
    CompleteBipartite(usize, usize),
    Star(usize),
    Grid {
        rows: usize,
        cols: usize,
        boundary: Boundary,
    },
    Torus {
        rows: usize,
        cols: usize,
    },
    Triangular {
        rows: usize,
        cols: usize,
        boundary: Boundary,
    },
    Honeycomb {
        rows: usize,
        cols: usize,
        boundary: Boundary,
    },
    TruncatedSquare {
        rows: usize,
        cols: usize,
        boundary: Boundary,
    },
    Product(Box<Family>, Box<Family>),
    Custom,
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Family::Complete(n) => write!(f, "complete:{n}"),
            Family::Cycle(n) => write!(f, "cycle:{n}"),
            Family::Path(n) => write!(f, "path:{n}"),
            Family::CompleteBipartite(a, b) => write!(f, "bipartite:{a},{b}"),
            Family::Star(n) => write!(f, "star:{n}"),
            Family::Grid {
                rows,
                cols,
                boundary,
            } => write!(f, "grid:{rows}x{cols}:{boundary}"),
            Family::Torus { rows, cols } => write!(f, "torus:{rows}x{cols}"),
            Family::Triangular {
                rows,
                cols,
                boundary,
            } => write!(f, "tri:{rows}x{cols}:{boundary}"),
            Family::Honeycomb {
                rows,
                cols,
                boundary,
            } => write!(f, "honey:{rows}x{cols}:{boundary}"),
            Family::TruncatedSquare {
                rows,
                cols,
                boundary,
            } => write!(f, "trsq:{rows}x{cols}:{boundary}"),
            Family::Product(a, b) => write!(f, "prod({a},{b})"),
            Family::Custom => f.write_str("custom"),
        }
    }
}

impl Family {
    /// Build the graph this descriptor names.
    pub fn build(&self) -> Result<Graph> {
        match *self {
            Family::Complete(n) => Graph::complete(n),
            Family::Cycle(n) => Graph::cycle(n),
            Family::Path(n) => Graph::path(n),
            Family::CompleteBipartite(a, b) => Graph::complete_bipartite(a, b),
            Family::Star(n) => Graph::star(n),
            Family::Grid {
                rows,
                cols,
                boundary,
            } => Graph::grid(rows, cols, boundary),
            Family::Torus { rows, cols } => Graph::torus(rows, cols),
            Family::Triangular {
                rows,
                cols,
                boundary,
            } => Graph::triangular(rows, cols, boundary),
            Family::Honeycomb {
                rows,
                cols,
                boundary,
            } => Graph::honeycomb(rows, cols, boundary),
            Family::TruncatedSquare {
                rows,
                cols,
                boundary,
            } => Graph::truncated_square(rows, cols, boundary),
            Family::Product(ref a, ref b) => Ok(Graph::cartesian_product(&a.build()?, &b.build()?)),
            Family::Custom => Err(Error::InvalidArgument(
                "a custom graph has no builder; load it from an edge list".into(),
            )),
        }
    }
}

/// A labeled simple undirected graph on vertices `0..order`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    adjacency: Vec<Vec<usize>>,
    edge_count: usize,
    family: Family,
}

impl Graph {
    /// Build a custom graph from an edge list.
    ///
    /// Rejects self-loops, repeated edges (in either orientation) and
    /// out-of-range endpoints. Connectedness is not required here; the
    /// spectral and thermal layers check it.
    pub fn from_edges(order: usize, edges: &[(usize, usize)]) -> Result<Self> {
        Self::with_family(order, edges.iter().copied(), Family::Custom)
    }

    fn with_family<I>(order: usize, edges: I, family: Family) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        if order == 0 {
            return Err(Error::InvalidGraph("a graph needs at least one vertex".into()));
        }
        let mut adjacency = vec![Vec::new(); order];
        let mut edge_count = 0;
        for (u, v) in edges {
            if u >= order || v >= order {
                return Err(Error::InvalidGraph(format!(
                    "edge ({u}, {v}) references a vertex outside 0..{order}"
                )));
            }
            if u == v {
                return Err(Error::InvalidGraph(format!("self-loop at vertex {u}")));
            }
            adjacency[u].push(v);
            adjacency[v].push(u);
            edge_count += 1;
        }
        for (u, nbrs) in adjacency.iter_mut().enumerate() {
            nbrs.sort_unstable();
            if let Some(w) = nbrs.windows(2).find(|w| w[0] == w[1]) {
                return Err(Error::InvalidGraph(format!(
                    "duplicate edge ({u}, {})",
                    w[0]
                )));
            }
        }
        Ok(Graph {
            adjacency,
            edge_count,
            family,
        })
    }

    pub fn complete(n: usize) -> Result<Self> {
        require(n >= 2, "complete graph needs N >= 2")?;
        let edges = (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v)));
        Self::with_family(n, edges, Family::Complete(n))
    }

    pub fn cycle(n: usize) -> Result<Self> {
        require(n >= 3, "cycle graph needs N >= 3")?;
        let edges = (0..n).map(|u| (u, (u + 1) % n));
        Self::with_family(n, edges, Family::Cycle(n))
    }

    pub fn path(n: usize) -> Result<Self> {
        require(n >= 2, "path graph needs N >= 2")?;
        let edges = (0..n - 1).map(|u| (u, u + 1));
        Self::with_family(n, edges, Family::Path(n))
    }

    /// `K_{n1,n2}` with the first partite set on vertices `0..n1`.
    pub fn complete_bipartite(n1: usize, n2: usize) -> Result<Self> {
        require(n1 >= 1 && n2 >= 1, "complete bipartite graph needs N1, N2 >= 1")?;
        let edges = (0..n1).flat_map(|u| (n1..n1 + n2).map(move |v| (u, v)));
        Self::with_family(n1 + n2, edges, Family::CompleteBipartite(n1, n2))
    }

    /// Star `S_N = K_{1,N-1}`, hub at vertex 0.
    pub fn star(n: usize) -> Result<Self> {
        require(n >= 3, "star graph needs N >= 3")?;
        let edges = (1..n).map(|v| (0, v));
        Self::with_family(n, edges, Family::Star(n))
    }

    /// Square lattice patch. Open boundaries give `P_rows □ P_cols`,
    /// periodic ones `C_rows □ C_cols`. Vertex `(r, c)` is `r * cols + c`.
    pub fn grid(rows: usize, cols: usize, boundary: Boundary) -> Result<Self> {
        check_sides(rows, cols, boundary)?;
        let (a, b) = match boundary {
            Boundary::Open => (Graph::path(rows)?, Graph::path(cols)?),
            Boundary::Periodic => (Graph::cycle(rows)?, Graph::cycle(cols)?),
        };
        let mut g = Graph::cartesian_product(&a, &b);
        g.family = Family::Grid {
            rows,
            cols,
            boundary,
        };
        Ok(g)
    }

    /// Torus grid `C_rows □ C_cols`.
    pub fn torus(rows: usize, cols: usize) -> Result<Self> {
        check_sides(rows, cols, Boundary::Periodic)?;
        let mut g = Graph::cartesian_product(&Graph::cycle(rows)?, &Graph::cycle(cols)?);
        g.family = Family::Torus { rows, cols };
        Ok(g)
    }

    /// Triangular lattice: the square patch plus the `(r, c)–(r+1, c+1)`
    /// diagonal in every cell, so interior vertices have degree 6.
    pub fn triangular(rows: usize, cols: usize, boundary: Boundary) -> Result<Self> {
        check_sides(rows, cols, boundary)?;
        let mut edges = Vec::new();
        for r in 0..rows {
            for c in 0..cols {
                let here = r * cols + c;
                for (dr, dc) in [(0, 1), (1, 0), (1, 1)] {
                    if let Some(there) = lattice_step(rows, cols, r, c, dr, dc, boundary) {
                        edges.push((here, there));
                    }
                }
            }
        }
        Self::with_family(
            rows * cols,
            edges,
            Family::Triangular {
                rows,
                cols,
                boundary,
            },
        )
    }

    /// Honeycomb lattice in the brick-wall embedding on a `rows × cols`
    /// vertex array: every horizontal bond is present and the vertical bond
    /// below `(r, c)` exists when `r + c` is even. Interior degree 3.
    ///
    /// Periodic patches need an even number of rows so the vertical bonds
    /// close consistently across the seam.
    pub fn honeycomb(rows: usize, cols: usize, boundary: Boundary) -> Result<Self> {
        check_sides(rows, cols, boundary)?;
        if boundary == Boundary::Periodic && !rows.is_multiple_of(2) {
            return Err(Error::InvalidGraph(
                "periodic honeycomb patch needs an even number of rows".into(),
            ));
        }
        let mut edges = Vec::new();
        for r in 0..rows {
            for c in 0..cols {
                let here = r * cols + c;
                if let Some(there) = lattice_step(rows, cols, r, c, 0, 1, boundary) {
                    edges.push((here, there));
                }
                if (r + c) % 2 == 0 {
                    if let Some(there) = lattice_step(rows, cols, r, c, 1, 0, boundary) {
                        edges.push((here, there));
                    }
                }
            }
        }
        Self::with_family(
            rows * cols,
            edges,
            Family::Honeycomb {
                rows,
                cols,
                boundary,
            },
        )
    }

    /// Truncated square (4.8.8) lattice on `rows × cols` cells. Each cell is
    /// a square on vertices `4 * (r * cols + c) + {0: top, 1: right,
    /// 2: bottom, 3: left}`; neighbouring squares are joined right-to-left
    /// and bottom-to-top, which closes the octagons. Interior degree 3.
    pub fn truncated_square(rows: usize, cols: usize, boundary: Boundary) -> Result<Self> {
        check_sides(rows, cols, boundary)?;
        let cell = |r: usize, c: usize| 4 * (r * cols + c);
        let mut edges = Vec::new();
        for r in 0..rows {
            for c in 0..cols {
                let base = cell(r, c);
                for k in 0..4 {
                    edges.push((base + k, base + (k + 1) % 4));
                }
                if let Some(right) = lattice_step(rows, cols, r, c, 0, 1, boundary) {
                    edges.push((base + 1, 4 * right + 3));
                }
                if let Some(below) = lattice_step(rows, cols, r, c, 1, 0, boundary) {
                    edges.push((base + 2, 4 * below));
                }
            }
        }
        Self::with_family(
            4 * rows * cols,
            edges,
            Family::TruncatedSquare {
                rows,
                cols,
                boundary,
            },
        )
    }

    /// Cartesian product `g1 □ g2`: `(j, k)` is vertex `j * N2 + k`, and
    /// `(j, k) ~ (j', k')` iff `j = j'` and `k ~ k'`, or `j ~ j'` and `k = k'`.
    pub fn cartesian_product(g1: &Graph, g2: &Graph) -> Graph {
        let n2 = g2.order();
        let mut adjacency = vec![Vec::new(); g1.order() * n2];
        for j in 0..g1.order() {
            for k in 0..n2 {
                let nbrs = &mut adjacency[j * n2 + k];
                nbrs.extend(g1.neighbors(j).iter().map(|&jj| jj * n2 + k));
                nbrs.extend(g2.neighbors(k).iter().map(|&kk| j * n2 + kk));
                nbrs.sort_unstable();
            }
        }
        Graph {
            adjacency,
            edge_count: g1.edge_count * n2 + g2.edge_count * g1.order(),
            family: Family::Product(Box::new(g1.family.clone()), Box::new(g2.family.clone())),
        }
    }

    pub fn order(&self) -> usize {
        self.adjacency.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    pub fn family(&self) -> &Family {
        &self.family
    }

    pub fn descriptor(&self) -> String {
        self.family.to_string()
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adjacency[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adjacency[v].len()
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        u < self.order() && self.adjacency[u].binary_search(&v).is_ok()
    }

    /// Edges as `(u, v)` with `u < v`, in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.adjacency
            .iter()
            .enumerate()
            .flat_map(|(u, nbrs)| nbrs.iter().filter(move |&&v| v > u).map(move |&v| (u, v)))
    }

    pub fn adjacency_matrix(&self) -> DMatrix<f64> {
        let n = self.order();
        let mut a = DMatrix::zeros(n, n);
        for (u, v) in self.edges() {
            a[(u, v)] = 1.0;
            a[(v, u)] = 1.0;
        }
        a
    }

    /// `L = D - A`.
    pub fn laplacian(&self) -> DMatrix<f64> {
        let mut l = -self.adjacency_matrix();
        for v in 0..self.order() {
            l[(v, v)] = self.degree(v) as f64;
        }
        l
    }

    pub fn degree_stats(&self) -> DegreeStats {
        let degrees: Vec<usize> = (0..self.order()).map(|v| self.degree(v)).collect();
        let sum_deg = degrees.iter().map(|&d| d as u64).sum();
        let sum_deg_sq = degrees.iter().map(|&d| (d as u64) * (d as u64)).sum();
        DegreeStats {
            edges: self.edge_count as u64,
            degrees,
            sum_deg,
            sum_deg_sq,
        }
    }

    /// Breadth-first reachability from vertex 0.
    pub fn is_connected(&self) -> bool {
        let n = self.order();
        let mut seen = vec![false; n];
        let mut queue = VecDeque::from([0]);
        seen[0] = true;
        let mut reached = 1;
        while let Some(u) = queue.pop_front() {
            for &v in &self.adjacency[u] {
                if !seen[v] {
                    seen[v] = true;
                    reached += 1;
                    queue.push_back(v);
                }
            }
        }
        reached == n
    }

    /// True iff, under the current labeling, every adjacency row is the
    /// right cyclic shift of the row above it: `j ~ i` iff
    /// `(j - i) mod N ~ 0`.
    ///
    /// Only the given labeling is checked; a graph that becomes circulant
    /// after relabeling reports `false`.
    pub fn is_circulant_labeled(&self) -> bool {
        let n = self.order();
        let offsets = &self.adjacency[0];
        let mut shifted = Vec::with_capacity(offsets.len());
        (1..n).all(|i| {
            shifted.clear();
            shifted.extend(offsets.iter().map(|&s| (s + i) % n));
            shifted.sort_unstable();
            shifted == self.adjacency[i]
        })
    }

    pub fn is_regular(&self) -> bool {
        let d = self.degree(0);
        (1..self.order()).all(|v| self.degree(v) == d)
    }
}

/// Degree statistics of a graph: `M`, the degree sequence, `Σ d_k` and
/// `Σ d_k²`, all exact integers.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DegreeStats {
    pub edges: u64,
    pub degrees: Vec<usize>,
    pub sum_deg: u64,
    pub sum_deg_sq: u64,
}

impl DegreeStats {
    pub fn order(&self) -> usize {
        self.degrees.len()
    }

    /// `(4M²/N, M(2M/(N-1) + N - 2))`, the range `Σ d_k²` must lie in.
    pub fn sum_deg_sq_bounds(&self) -> (f64, f64) {
        let n = self.order() as f64;
        let m = self.edges as f64;
        let lower = 4.0 * m * m / n;
        let upper = if self.order() > 1 {
            m * (2.0 * m / (n - 1.0) + n - 2.0)
        } else {
            0.0
        };
        (lower, upper)
    }

    /// `N Σd² - 4M²`, the (non-negative) Cauchy–Schwarz gap scaled by `N`.
    /// Zero exactly for regular graphs.
    pub fn degree_spread(&self) -> u128 {
        let n = self.order() as u128;
        let m = self.edges as u128;
        n * self.sum_deg_sq as u128 - 4 * m * m
    }
}

fn require(cond: bool, msg: &str) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(Error::InvalidGraph(msg.into()))
    }
}

fn check_sides(rows: usize, cols: usize, boundary: Boundary) -> Result<()> {
    match boundary {
        Boundary::Open => require(rows >= 2 && cols >= 2, "lattice sides must be >= 2"),
        Boundary::Periodic => require(
            rows >= 3 && cols >= 3,
            "periodic lattice sides must be >= 3 to avoid repeated edges",
        ),
    }
}

/// Neighbour of `(r, c)` displaced by `(dr, dc)` as a flat index, wrapping
/// under periodic boundaries and returning `None` past an open edge.
fn lattice_step(
    rows: usize,
    cols: usize,
    r: usize,
    c: usize,
    dr: usize,
    dc: usize,
    boundary: Boundary,
) -> Option<usize> {
    let (nr, nc) = (r + dr, c + dc);
    match boundary {
        Boundary::Open => (nr < rows && nc < cols).then(|| nr * cols + nc),
        Boundary::Periodic => Some((nr % rows) * cols + nc % cols),
    }
}
