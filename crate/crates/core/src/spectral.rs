//! Laplacian spectra: closed forms for the named families, a dense
//! symmetric eigensolver for everything else, and degeneracy grouping.

use std::f64::consts::PI;

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{Boundary, Family, Graph};

/// Default degeneracy grouping tolerance, relative to `max(1, E_max)`.
pub const DEFAULT_GROUP_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Level {
    pub energy: f64,
    pub degeneracy: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SpectrumSource {
    Analytic,
    Numeric,
}

/// Ascending Laplacian eigenvalues grouped into degenerate levels, with the
/// eigenvectors in the vertex basis (column `k` belongs to eigenvalue `k`).
#[derive(Debug, Clone)]
pub struct Spectrum {
    eigenvalues: Vec<f64>,
    levels: Vec<Level>,
    level_of: Vec<usize>,
    eigenvectors: Option<DMatrix<Complex64>>,
    // vertex_weights[(j, n)] = Σ_{k in level n} |<j|e_k>|²
    vertex_weights: Option<DMatrix<f64>>,
    source: SpectrumSource,
}

impl Spectrum {
    /// Assemble a spectrum from unsorted eigenpairs.
    ///
    /// Eigenvalues are sorted ascending (columns follow), values within
    /// `group_tol * max(1, E_max)` of zero are set to exactly 0, and runs of
    /// consecutive values closer than that tolerance form one level whose
    /// energy is the run mean.
    pub fn from_parts(
        eigenvalues: Vec<f64>,
        eigenvectors: Option<DMatrix<Complex64>>,
        source: SpectrumSource,
        group_tol: f64,
    ) -> Result<Self> {
        if !(group_tol > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "group tolerance must be positive, got {group_tol}"
            )));
        }
        let n = eigenvalues.len();
        if n == 0 {
            return Err(Error::InvalidArgument("empty spectrum".into()));
        }
        if let Some(v) = &eigenvectors {
            if v.nrows() != n || v.ncols() != n {
                return Err(Error::InvalidArgument(format!(
                    "eigenvector matrix is {}x{}, expected {n}x{n}",
                    v.nrows(),
                    v.ncols()
                )));
            }
        }
        if eigenvalues.iter().any(|e| !e.is_finite()) {
            return Err(Error::InvalidArgument("non-finite eigenvalue".into()));
        }

        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| eigenvalues[a].total_cmp(&eigenvalues[b]));
        let mut sorted: Vec<f64> = order.iter().map(|&k| eigenvalues[k]).collect();
        let eigenvectors = eigenvectors.map(|v| v.select_columns(order.iter()));

        let emax = sorted[n - 1].abs();
        let tol = group_tol * emax.max(1.0);
        for e in sorted.iter_mut() {
            if e.abs() < tol {
                *e = 0.0;
            }
        }

        let mut levels: Vec<Level> = Vec::new();
        let mut level_of = Vec::with_capacity(n);
        let mut run_sum = 0.0;
        for k in 0..n {
            if k == 0 || sorted[k] - sorted[k - 1] > tol {
                if let Some(last) = levels.last_mut() {
                    last.energy = run_sum / last.degeneracy as f64;
                }
                levels.push(Level {
                    energy: 0.0,
                    degeneracy: 0,
                });
                run_sum = 0.0;
            }
            let last = levels.last_mut().unwrap();
            last.degeneracy += 1;
            run_sum += sorted[k];
            level_of.push(levels.len() - 1);
        }
        if let Some(last) = levels.last_mut() {
            last.energy = run_sum / last.degeneracy as f64;
        }
        if levels[0].energy.abs() < tol {
            levels[0].energy = 0.0;
        }

        let vertex_weights = eigenvectors.as_ref().map(|v| {
            let mut w = DMatrix::zeros(n, levels.len());
            for k in 0..n {
                let lvl = level_of[k];
                for j in 0..n {
                    w[(j, lvl)] += v[(j, k)].norm_sqr();
                }
            }
            w
        });

        Ok(Spectrum {
            eigenvalues: sorted,
            levels,
            level_of,
            eigenvectors,
            vertex_weights,
            source,
        })
    }

    /// A spectrum known only through its eigenvalues. Energy-measurement
    /// quantities work; position-measurement ones report
    /// [`Error::MissingEigenvectors`].
    pub fn from_eigenvalues(eigenvalues: Vec<f64>, group_tol: f64) -> Result<Self> {
        Self::from_parts(eigenvalues, None, SpectrumSource::Numeric, group_tol)
    }

    pub fn without_eigenvectors(&self) -> Self {
        Spectrum {
            eigenvectors: None,
            vertex_weights: None,
            ..self.clone()
        }
    }

    pub fn order(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn levels(&self) -> &[Level] {
        &self.levels
    }

    pub fn level_of(&self) -> &[usize] {
        &self.level_of
    }

    pub fn source(&self) -> SpectrumSource {
        self.source
    }

    pub fn eigenvectors(&self) -> Option<&DMatrix<Complex64>> {
        self.eigenvectors.as_ref()
    }

    pub fn max_energy(&self) -> f64 {
        self.levels.last().map_or(0.0, |l| l.energy)
    }

    /// `W[(j, n)] = Σ_{k ∈ level n} |⟨j|e_k⟩|²`, the diagonal of the level
    /// projector. Independent of the basis chosen inside a degenerate level.
    pub fn vertex_level_weights(&self) -> Result<&DMatrix<f64>> {
        self.vertex_weights.as_ref().ok_or(Error::MissingEigenvectors)
    }

    /// Orthogonal projector onto level `n` in the vertex basis.
    pub fn level_projector(&self, level: usize) -> Result<DMatrix<Complex64>> {
        let v = self.eigenvectors.as_ref().ok_or(Error::MissingEigenvectors)?;
        let cols: Vec<usize> = (0..self.order())
            .filter(|&k| self.level_of[k] == level)
            .collect();
        if cols.is_empty() {
            return Err(Error::InvalidArgument(format!("no level {level}")));
        }
        let block = v.select_columns(cols.iter());
        Ok(&block * block.adjoint())
    }

    /// `max |V†V - I|`, zero for orthonormal eigenvectors.
    pub fn orthonormality_defect(&self) -> Result<f64> {
        let v = self.eigenvectors.as_ref().ok_or(Error::MissingEigenvectors)?;
        let gram = v.adjoint() * v;
        let n = self.order();
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((gram[(i, j)] - Complex64::new(target, 0.0)).norm());
            }
        }
        Ok(worst)
    }
}

/// Closed-form spectrum for the families that have one: complete, cycle,
/// path, complete bipartite, star, and Cartesian products of those
/// (square grids and tori included).
///
/// Circulant families keep the complex Fourier vectors `ω^{kj}/√N`.
pub fn analytic_spectrum(g: &Graph, group_tol: f64) -> Result<Spectrum> {
    let (values, vectors) = analytic_pairs(g.family())?;
    debug_assert_eq!(values.len(), g.order());
    Spectrum::from_parts(values, Some(vectors), SpectrumSource::Analytic, group_tol)
}

/// Dense symmetric eigendecomposition of `L = D - A`.
pub fn numeric_spectrum(g: &Graph, group_tol: f64) -> Result<Spectrum> {
    if !g.is_connected() {
        return Err(Error::Disconnected);
    }
    let l = g.laplacian();
    let asym = (&l - l.transpose()).amax();
    if asym != 0.0 {
        return Err(Error::Eigen(format!("Laplacian is not symmetric (defect {asym:e})")));
    }
    let n = g.order();
    let eig = SymmetricEigen::try_new(l, f64::EPSILON, 1000 * n.max(10)).ok_or_else(|| {
        Error::Eigen(format!(
            "symmetric QR iteration did not converge for a {n}x{n} Laplacian ({})",
            g.descriptor()
        ))
    })?;
    let vectors = eig.eigenvectors.map(|x| Complex64::new(x, 0.0));
    Spectrum::from_parts(
        eig.eigenvalues.iter().copied().collect(),
        Some(vectors),
        SpectrumSource::Numeric,
        group_tol,
    )
}

/// Closed form when available, numeric otherwise.
pub fn spectrum(g: &Graph, group_tol: f64) -> Result<Spectrum> {
    if !g.is_connected() {
        return Err(Error::Disconnected);
    }
    match analytic_spectrum(g, group_tol) {
        Err(Error::UnsupportedFamily(_)) => numeric_spectrum(g, group_tol),
        other => other,
    }
}

/// Energy and degeneracy of the first excited level `(E_1, g_1)`.
pub fn algebraic_connectivity(s: &Spectrum) -> Result<(f64, usize)> {
    s.levels()
        .get(1)
        .map(|l| (l.energy, l.degeneracy))
        .ok_or_else(|| Error::InvalidArgument("spectrum has a single level (N = 1)".into()))
}

fn analytic_pairs(family: &Family) -> Result<(Vec<f64>, DMatrix<Complex64>)> {
    match *family {
        Family::Complete(n) => Ok(circulant_pairs(n, |k| if k == 0 { 0.0 } else { n as f64 })),
        Family::Cycle(n) => Ok(circulant_pairs(n, |k| cycle_energy(n, k))),
        Family::Path(n) => Ok(path_pairs(n)),
        Family::CompleteBipartite(a, b) => Ok(bipartite_pairs(a, b)),
        Family::Star(n) => Ok(bipartite_pairs(1, n - 1)),
        Family::Grid {
            rows,
            cols,
            boundary: Boundary::Open,
        } => product_pairs(&Family::Path(rows), &Family::Path(cols)),
        Family::Grid {
            rows,
            cols,
            boundary: Boundary::Periodic,
        }
        | Family::Torus { rows, cols } => product_pairs(&Family::Cycle(rows), &Family::Cycle(cols)),
        Family::Product(ref a, ref b) => product_pairs(a, b),
        ref other => Err(Error::UnsupportedFamily(other.to_string())),
    }
}

fn cycle_energy(n: usize, k: usize) -> f64 {
    2.0 * (1.0 - (2.0 * PI * k as f64 / n as f64).cos())
}

fn circulant_pairs(n: usize, energy: impl Fn(usize) -> f64) -> (Vec<f64>, DMatrix<Complex64>) {
    let norm = 1.0 / (n as f64).sqrt();
    let vectors = DMatrix::from_fn(n, n, |j, k| {
        // reduce k*j mod n before scaling to keep the phase exact
        let phase = 2.0 * PI * ((k * j) % n) as f64 / n as f64;
        Complex64::from_polar(norm, phase)
    });
    ((0..n).map(energy).collect(), vectors)
}

/// Path `P_N`: `E_k = 2[1 - cos(πk/N)]` with the normalized cosine vectors
/// `c_k cos(πk(2j+1)/(2N))`, `c_0 = 1/√N`, `c_k = √(2/N)`.
fn path_pairs(n: usize) -> (Vec<f64>, DMatrix<Complex64>) {
    let nf = n as f64;
    let values = (0..n)
        .map(|k| 2.0 * (1.0 - (PI * k as f64 / nf).cos()))
        .collect();
    let vectors = DMatrix::from_fn(n, n, |j, k| {
        let c = if k == 0 { (1.0 / nf).sqrt() } else { (2.0 / nf).sqrt() };
        let x = c * (PI * k as f64 * (2 * j + 1) as f64 / (2.0 * nf)).cos();
        Complex64::new(x, 0.0)
    });
    (values, vectors)
}

/// `K_{n1,n2}`, first partite set on `0..n1`. Vectors supported on one
/// partite set and summing to zero there have energy equal to the degree of
/// that set (the other set's size); they are built as Helmert contrasts.
fn bipartite_pairs(n1: usize, n2: usize) -> (Vec<f64>, DMatrix<Complex64>) {
    let n = n1 + n2;
    let mut values = Vec::with_capacity(n);
    let mut vectors = DMatrix::<Complex64>::zeros(n, n);
    let mut col = 0;

    let uniform = 1.0 / (n as f64).sqrt();
    for j in 0..n {
        vectors[(j, col)] = uniform.into();
    }
    values.push(0.0);
    col += 1;

    // contrasts on the second set, energy n1
    for m in 1..n2 {
        let s = 1.0 / ((m * (m + 1)) as f64).sqrt();
        for k in 0..m {
            vectors[(n1 + k, col)] = s.into();
        }
        vectors[(n1 + m, col)] = (-(m as f64) * s).into();
        values.push(n1 as f64);
        col += 1;
    }
    // contrasts on the first set, energy n2
    for m in 1..n1 {
        let s = 1.0 / ((m * (m + 1)) as f64).sqrt();
        for k in 0..m {
            vectors[(k, col)] = s.into();
        }
        vectors[(m, col)] = (-(m as f64) * s).into();
        values.push(n2 as f64);
        col += 1;
    }

    let (a, b) = (n1 as f64, n2 as f64);
    let nf = n as f64;
    let first = (b / a).sqrt() / nf.sqrt();
    let second = -(a / b).sqrt() / nf.sqrt();
    for j in 0..n {
        vectors[(j, col)] = (if j < n1 { first } else { second }).into();
    }
    values.push(nf);

    (values, vectors)
}

fn product_pairs(a: &Family, b: &Family) -> Result<(Vec<f64>, DMatrix<Complex64>)> {
    let (va, ea) = analytic_pairs(a)?;
    let (vb, eb) = analytic_pairs(b)?;
    let values = va
        .iter()
        .flat_map(|x| vb.iter().map(move |y| x + y))
        .collect();
    Ok((values, ea.kronecker(&eb)))
}

/// JSON export of a spectrum. Eigenvectors are optional because of their
/// size; when present they are row-major `[re, im]` pairs.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SpectrumExport {
    pub descriptor: Option<String>,
    pub source: SpectrumSource,
    pub order: usize,
    pub eigenvalues: Vec<f64>,
    pub levels: Vec<Level>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eigenvectors: Option<Vec<[f64; 2]>>,
}

impl SpectrumExport {
    pub fn new(s: &Spectrum, descriptor: Option<String>, include_eigenvectors: bool) -> Self {
        let eigenvectors = include_eigenvectors
            .then(|| s.eigenvectors())
            .flatten()
            .map(|v| {
                let n = v.nrows();
                (0..n)
                    .flat_map(|i| (0..n).map(move |j| [v[(i, j)].re, v[(i, j)].im]))
                    .collect()
            });
        SpectrumExport {
            descriptor,
            source: s.source(),
            order: s.order(),
            eigenvalues: s.eigenvalues().to_vec(),
            levels: s.levels().to_vec(),
            eigenvectors,
        }
    }
}
