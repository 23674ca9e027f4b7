//! Gibbs states of the walker Hamiltonian and their thermometric figures of
//! merit.
//!
//! Boltzmann sums are anchored on the ground level `E_0 = 0`, which carries
//! the largest weight, so no shift is needed; excited terms that underflow
//! at small `T` simply contribute zero. `T = 0` itself is never evaluated
//! directly; [`zero_temperature_limit`] supplies the limiting values.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{check_temperature, Error, Result};
use crate::graph::DegreeStats;
use crate::optimize::bisect;
use crate::spectral::{algebraic_connectivity, Spectrum};

// Differences of nearly equal sums below this many ulps of the larger term
// (per vertex) are indistinguishable from zero.
const CANCELLATION_ULPS: f64 = 4.0;

/// A spectrum at a fixed temperature, with the partition function and the
/// per-state Boltzmann factors cached.
#[derive(Debug, Clone)]
pub struct ThermalModel<'a> {
    spectrum: &'a Spectrum,
    temperature: f64,
    partition: f64,
    // e^{-E_n/T} / Z for a single state of level n
    state_weight: Vec<f64>,
}

impl<'a> ThermalModel<'a> {
    pub fn new(spectrum: &'a Spectrum, temperature: f64) -> Result<Self> {
        check_temperature(temperature)?;
        let factors: Vec<f64> = spectrum
            .levels()
            .iter()
            .map(|l| (-l.energy / temperature).exp())
            .collect();
        let partition: f64 = spectrum
            .levels()
            .iter()
            .zip(&factors)
            .map(|(l, f)| l.degeneracy as f64 * f)
            .sum();
        let state_weight = factors.iter().map(|f| f / partition).collect();
        Ok(ThermalModel {
            spectrum,
            temperature,
            partition,
            state_weight,
        })
    }

    pub fn spectrum(&self) -> &'a Spectrum {
        self.spectrum
    }

    pub fn temperature(&self) -> f64 {
        self.temperature
    }

    pub fn partition_function(&self) -> f64 {
        self.partition
    }

    /// Boltzmann weight of a single eigenstate in level `n`.
    pub fn state_weight(&self, level: usize) -> f64 {
        self.state_weight[level]
    }

    /// Level populations `g_n e^{-E_n/T} / Z`.
    pub fn populations(&self) -> Vec<f64> {
        self.spectrum
            .levels()
            .iter()
            .zip(&self.state_weight)
            .map(|(l, w)| l.degeneracy as f64 * w)
            .collect()
    }

    /// `⟨H^p⟩` for `p ∈ {1, 2}`.
    pub fn energy_moment(&self, p: u32) -> Result<f64> {
        if !(p == 1 || p == 2) {
            return Err(Error::InvalidArgument(format!(
                "energy moments are defined for p = 1, 2 (got {p})"
            )));
        }
        Ok(self
            .spectrum
            .levels()
            .iter()
            .zip(self.populations())
            .map(|(l, pop)| pop * l.energy.powi(p as i32))
            .sum())
    }

    pub fn mean_energy(&self) -> f64 {
        self.energy_moment(1).unwrap()
    }

    /// Energy variance `⟨H²⟩ - ⟨H⟩²`, accumulated in centred form.
    pub fn energy_variance(&self) -> f64 {
        let mean = self.mean_energy();
        self.spectrum
            .levels()
            .iter()
            .zip(self.populations())
            .map(|(l, pop)| pop * (l.energy - mean).powi(2))
            .sum()
    }

    /// Quantum Fisher information `Var(H) / T⁴`.
    pub fn qfi(&self) -> f64 {
        self.energy_variance() / self.temperature.powi(4)
    }

    /// `p(j|T) = Σ_k e^{-E_k/T}/Z |⟨j|e_k⟩|²` for every vertex.
    pub fn position_probabilities(&self) -> Result<Vec<f64>> {
        let w = self.spectrum.vertex_level_weights()?;
        Ok(self.project(w, |_, sw| sw))
    }

    /// `⟨Hρ_T⟩_j = Σ_k e^{-E_k/T} E_k / Z |⟨j|e_k⟩|²` for every vertex.
    pub fn energy_weighted_all(&self) -> Result<Vec<f64>> {
        let w = self.spectrum.vertex_level_weights()?;
        Ok(self.project(w, |e, sw| e * sw))
    }

    pub fn energy_weighted(&self, vertex: usize) -> Result<f64> {
        let order = self.spectrum.order();
        if vertex >= order {
            return Err(Error::VertexOutOfRange { vertex, order });
        }
        Ok(self.energy_weighted_all()?[vertex])
    }

    fn project(&self, w: &DMatrix<f64>, coef: impl Fn(f64, f64) -> f64) -> Vec<f64> {
        let c: Vec<f64> = self
            .spectrum
            .levels()
            .iter()
            .zip(&self.state_weight)
            .map(|(l, &sw)| coef(l.energy, sw))
            .collect();
        (0..w.nrows())
            .map(|j| (0..w.ncols()).map(|n| w[(j, n)] * c[n]).sum())
            .collect()
    }

    /// Fisher information of the vertex measurement,
    /// `(Σ_j ⟨Hρ_T⟩_j² / p(j|T) - ⟨H⟩²) / T⁴`.
    ///
    /// When the two sums agree to within rounding (circulant graphs, or any
    /// graph with `|⟨j|e_k⟩|²` independent of `k`) the result is exactly 0.
    pub fn fi_position(&self) -> Result<f64> {
        let p = self.position_probabilities()?;
        let h = self.energy_weighted_all()?;
        let mut sum = 0.0;
        for (j, (&pj, &hj)) in p.iter().zip(&h).enumerate() {
            if let Some(term) = ratio_term(j, hj * hj, pj, hj)? {
                sum += term;
            }
        }
        let mean = self.mean_energy();
        let raw = floor_cancellation(sum, mean * mean, p.len());
        Ok(raw / self.temperature.powi(4))
    }

    /// The same Fisher information from its definition
    /// `Σ_j (∂_T p(j|T))² / p(j|T)`, with the analytic derivative
    /// `∂_T p(j|T) = (⟨Hρ_T⟩_j - ⟨H⟩ p(j|T)) / T²`.
    pub fn fi_position_definitional(&self) -> Result<f64> {
        let p = self.position_probabilities()?;
        let h = self.energy_weighted_all()?;
        let mean = self.mean_energy();
        let t2 = self.temperature * self.temperature;
        let mut sum = 0.0;
        for (j, (&pj, &hj)) in p.iter().zip(&h).enumerate() {
            let dp = (hj - mean * pj) / t2;
            if let Some(term) = ratio_term(j, dp * dp, pj, hj)? {
                sum += term;
            }
        }
        Ok(sum)
    }

    /// `ρ_T = Σ_k e^{-E_k/T}/Z |e_k⟩⟨e_k|` in the vertex basis.
    pub fn gibbs_position_matrix(&self) -> Result<DMatrix<Complex64>> {
        let v = self
            .spectrum
            .eigenvectors()
            .ok_or(Error::MissingEigenvectors)?;
        let level_of = self.spectrum.level_of();
        let weights: Vec<f64> = level_of.iter().map(|&n| self.state_weight[n]).collect();
        if v.iter().all(|z| z.im == 0.0) {
            let re = v.map(|z| z.re);
            let mut scaled = re.clone();
            for (k, mut col) in scaled.column_iter_mut().enumerate() {
                col *= weights[k];
            }
            let rho = scaled * re.transpose();
            return Ok(rho.map(|x| Complex64::new(x, 0.0)));
        }
        let mut scaled = v.clone();
        for (k, mut col) in scaled.column_iter_mut().enumerate() {
            col *= Complex64::new(weights[k], 0.0);
        }
        Ok(scaled * v.adjoint())
    }

    /// Normalized l1 coherence of the Gibbs state in the vertex basis.
    pub fn coherence(&self) -> Result<f64> {
        coherence_l1_normalized(&self.gibbs_position_matrix()?)
    }
}

/// `num / p` with the vanishing-probability guard: a term with
/// `p < 1e-300` is dropped when `|⟨Hρ⟩_j| < 1e-150` and is an error
/// otherwise, since a connected graph never has an unreachable vertex.
fn ratio_term(vertex: usize, num: f64, p: f64, energy_weight: f64) -> Result<Option<f64>> {
    if p < 1e-300 {
        if energy_weight.abs() < 1e-150 {
            return Ok(None);
        }
        return Err(Error::DegeneratePosition(vertex));
    }
    Ok(Some(num / p))
}

fn floor_cancellation(a: f64, b: f64, terms: usize) -> f64 {
    let diff = a - b;
    let noise = CANCELLATION_ULPS * terms.max(1) as f64 * f64::EPSILON * a.abs().max(b.abs());
    if diff <= noise {
        0.0
    } else {
        diff
    }
}

/// Limiting values at `T → 0⁺`: the walker sits in the uniform ground
/// state, which is maximally coherent and carries no information.
#[derive(Debug, Clone)]
pub struct ZeroTemperatureLimit {
    pub qfi: f64,
    pub fi_position: f64,
    pub coherence: f64,
    pub gibbs_position_matrix: DMatrix<Complex64>,
}

pub fn zero_temperature_limit(order: usize) -> ZeroTemperatureLimit {
    let n = order.max(1);
    ZeroTemperatureLimit {
        qfi: 0.0,
        fi_position: 0.0,
        coherence: 1.0,
        gibbs_position_matrix: DMatrix::from_element(n, n, Complex64::new(1.0 / n as f64, 0.0)),
    }
}

/// Low-temperature QFI from the first excited level only:
/// `f_{g1}(E1/T) / E1²` with `f_g(x) = g x⁴ e^{-x} / (1 + g e^{-x})²`.
pub fn qfi_low_t(e1: f64, g1: usize, t: f64) -> f64 {
    let x = e1 / t;
    let g = g1 as f64;
    let q = (-x).exp();
    g * x.powi(4) * q / (1.0 + g * q).powi(2) / (e1 * e1)
}

/// The root `x > 4` of `e^x = g1 (x + 4)/(x - 4)`, the maximizer of
/// `f_{g1}`. Solved in log form `x - ln g1 - ln((x+4)/(x-4)) = 0`, whose
/// left side is strictly increasing for `x > 4`.
pub fn solve_xmax(g1: usize) -> Result<f64> {
    if g1 == 0 {
        return Err(Error::InvalidArgument("degeneracy g1 must be >= 1".into()));
    }
    let ln_g = (g1 as f64).ln();
    let h = |x: f64| x - ln_g - ((x + 4.0) / (x - 4.0)).ln();
    let lo = 4.0 + 1e-12;
    let mut hi = 4.0 + 60.0 + ln_g;
    while h(hi) <= 0.0 {
        hi *= 2.0;
    }
    bisect(h, lo, hi, 1e-12)
}

/// Low-temperature position FI keeping only the ground and first excited
/// levels, with `η_j = Σ_α |⟨j|e_{1,α}⟩|²` and `Z = 1 + g1 e^{-E1/T}`.
pub fn fi_low_t(s: &Spectrum, t: f64) -> Result<f64> {
    check_temperature(t)?;
    let (e1, g1) = algebraic_connectivity(s)?;
    let w = s.vertex_level_weights()?;
    let n = s.order() as f64;
    let q = (-e1 / t).exp();
    let g = g1 as f64;
    let z = 1.0 + g * q;
    let sum: f64 = (0..s.order())
        .map(|j| {
            let eta = w[(j, 1)];
            eta * eta / (1.0 / n + q * eta)
        })
        .sum();
    let bracket = floor_cancellation(sum, g * g / z, s.order());
    Ok(e1 * e1 * q * q / (z * t.powi(4)) * bracket)
}

/// High-temperature QFI `[Σd² + 2M(1 - 2M/N)] / (N T⁴)`.
pub fn qfi_high_t(stats: &DegreeStats, t: f64) -> f64 {
    let n = stats.order() as u128;
    let m = stats.edges as u128;
    // N Σd² + 2MN - 4M², exact in integers
    let num = n * stats.sum_deg_sq as u128 + 2 * m * n - 4 * m * m;
    num as f64 / ((n * n) as f64 * t.powi(4))
}

/// `(2M/(N T⁴), (M/T⁴)[1 - 2M(N-2)/(N²(N-1))])`.
pub fn qfi_high_t_bounds(n: usize, m: u64, t: f64) -> (f64, f64) {
    let nf = n as f64;
    let mf = m as f64;
    let t4 = t.powi(4);
    let lower = 2.0 * mf / (nf * t4);
    let upper = mf / t4 * (1.0 - 2.0 * mf * (nf - 2.0) / (nf * nf * (nf - 1.0)));
    (lower, upper)
}

/// High-temperature position FI `(N Σd² - 4M²) / (N² T⁴)`; zero for
/// regular graphs.
pub fn fi_high_t(stats: &DegreeStats, t: f64) -> f64 {
    let n = stats.order() as f64;
    stats.degree_spread() as f64 / (n * n * t.powi(4))
}

/// `λ_{N,M} = 2M / (Σd² - 4M²/N)`, `None` for regular graphs.
pub fn lambda_nm(stats: &DegreeStats) -> Option<f64> {
    let spread = stats.degree_spread();
    (spread > 0).then(|| 2.0 * stats.edges as f64 * stats.order() as f64 / spread as f64)
}

/// `lim_{T→∞} F_c/F_q = 1/(1 + λ_{N,M})`, defined as 0 for regular graphs.
pub fn ratio_limit(stats: &DegreeStats) -> f64 {
    let spread = stats.degree_spread() as f64;
    let two_mn = 2.0 * stats.edges as f64 * stats.order() as f64;
    spread / (spread + two_mn)
}

/// Exact QFI of the complete graph `K_N`:
/// `N²(N-1) e^{-N/T} / (T⁴ [1 + (N-1) e^{-N/T}]²)`.
pub fn qfi_complete(n: usize, t: f64) -> f64 {
    let nf = n as f64;
    let q = (-nf / t).exp();
    nf * nf * (nf - 1.0) * q / (t.powi(4) * (1.0 + (nf - 1.0) * q).powi(2))
}

/// Exact QFI of `K_{n1,n2}` from its four levels `0, n1, n2, n1+n2`. The
/// star (`n1 = 1` or `n2 = 1`) uses its three-level form.
///
/// Exponentials are combined before evaluation so that no intermediate
/// factor overflows at small `T`.
pub fn qfi_exact_bipartite(n1: usize, n2: usize, t: f64) -> f64 {
    if n1 == 1 || n2 == 1 {
        return qfi_exact_star(n1 + n2, t);
    }
    let (a, b) = (n1 as f64, n2 as f64);
    let n = a + b;
    let e = |x: f64| (-x / t).exp();
    let z = 1.0 + (b - 1.0) * e(a) + (a - 1.0) * e(b) + e(n);
    let poly = a.powi(3) * (b - 1.0) - b * b * (b - 2.0) + a * b * b * (b + 1.0)
        - a * a * (2.0 * b * b - b - 2.0);
    let bracket = a * a * ((a - 1.0) * e(a + 2.0 * b) + (b - 1.0) * e(a))
        + b * b * ((a - 1.0) * e(b) + (b - 1.0) * e(2.0 * a + b))
        + e(n) * poly;
    bracket / (z * z * t.powi(4))
}

/// Exact QFI of the star `S_N` (levels `0, 1, N` with degeneracies
/// `1, N-2, 1`).
pub fn qfi_exact_star(n: usize, t: f64) -> f64 {
    let nf = n as f64;
    let e = |x: f64| (-x / t).exp();
    let num = (nf - 2.0) * e(1.0) + (nf - 2.0) * (nf - 1.0).powi(2) * e(nf + 1.0) + nf * nf * e(nf);
    let z = 1.0 + (nf - 2.0) * e(1.0) + e(nf);
    num / (t.powi(4) * z * z)
}

/// `Σ_{j≠k} |ρ_jk| / (N - 1)`, in `[0, 1]` for density matrices.
pub fn coherence_l1_normalized(rho: &DMatrix<Complex64>) -> Result<f64> {
    let n = rho.nrows();
    if n != rho.ncols() {
        return Err(Error::InvalidArgument("density matrix must be square".into()));
    }
    if n < 2 {
        return Err(Error::InvalidArgument(
            "normalized coherence needs N >= 2".into(),
        ));
    }
    let trace: Complex64 = rho.diagonal().iter().sum();
    if (trace - Complex64::new(1.0, 0.0)).norm() > 1e-8 {
        return Err(Error::InvalidArgument(format!(
            "density matrix trace is {trace}, expected 1"
        )));
    }
    if (rho - rho.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max) > 1e-10 {
        return Err(Error::InvalidArgument("density matrix is not Hermitian".into()));
    }
    let mut total = 0.0;
    for j in 0..n {
        for k in 0..n {
            if j != k {
                total += rho[(j, k)].norm();
            }
        }
    }
    Ok(total / (n - 1) as f64)
}

/// Normalized coherence of the complete-graph Gibbs state,
/// `|1 - e^{-N/T}| / (1 + (N-1) e^{-N/T})`.
pub fn coherence_complete(n: usize, t: f64) -> f64 {
    let nf = n as f64;
    let q = (-nf / t).exp();
    (1.0 - q).abs() / (1.0 + (nf - 1.0) * q)
}

/// Both sides of `T⁴ F_q / (N-1) = [1 - C][1 + (N-1) C]` for `K_N`.
pub fn complete_graph_qfi_coherence_identity(n: usize, t: f64) -> (f64, f64) {
    let lhs = t.powi(4) * qfi_complete(n, t) / (n as f64 - 1.0);
    let c = coherence_complete(n, t);
    let rhs = (1.0 - c) * (1.0 + (n as f64 - 1.0) * c);
    (lhs, rhs)
}

/// Every thermometric figure of merit of one graph at one temperature.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FisherReport {
    #[serde(rename = "T")]
    pub temperature: f64,
    pub qfi: f64,
    pub fi_position: f64,
    pub qfi_low: f64,
    pub qfi_high: f64,
    pub fi_high: f64,
    pub qfi_high_bounds: (f64, f64),
    pub ratio_limit: f64,
    pub coherence_l1_normalized: f64,
}

impl FisherReport {
    pub const CSV_HEADER: &'static str =
        "T,qfi,fi,qfi_low,qfi_high,fi_high,bound_lo,bound_hi,ratio_limit,coherence";

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{},{}",
            self.temperature,
            self.qfi,
            self.fi_position,
            self.qfi_low,
            self.qfi_high,
            self.fi_high,
            self.qfi_high_bounds.0,
            self.qfi_high_bounds.1,
            self.ratio_limit,
            self.coherence_l1_normalized
        )
    }
}

pub fn fisher_report(stats: &DegreeStats, s: &Spectrum, t: f64) -> Result<FisherReport> {
    if stats.order() != s.order() {
        return Err(Error::InvalidArgument(format!(
            "degree statistics are for N = {}, spectrum for N = {}",
            stats.order(),
            s.order()
        )));
    }
    let model = ThermalModel::new(s, t)?;
    let (e1, g1) = algebraic_connectivity(s)?;
    Ok(FisherReport {
        temperature: t,
        qfi: model.qfi(),
        fi_position: model.fi_position()?,
        qfi_low: qfi_low_t(e1, g1, t),
        qfi_high: qfi_high_t(stats, t),
        fi_high: fi_high_t(stats, t),
        qfi_high_bounds: qfi_high_t_bounds(stats.order(), stats.edges, t),
        ratio_limit: ratio_limit(stats),
        coherence_l1_normalized: model.coherence()?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{Family, Graph};
    use crate::spectral::{analytic_spectrum, numeric_spectrum, spectrum, DEFAULT_GROUP_TOL};

    fn spec(d: &str) -> (Graph, Spectrum) {
        let g = d.parse::<Family>().unwrap().build().unwrap();
        let s = spectrum(&g, DEFAULT_GROUP_TOL).unwrap();
        (g, s)
    }

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs()
    }

    #[test]
    fn partition_function_and_populations() {
        let (_, s) = spec("complete:3");
        let m = ThermalModel::new(&s, 3.0).unwrap();
        assert!((m.partition_function() - (1.0 + 2.0 * (-1f64).exp())).abs() < 1e-15);
        let (_, s) = spec("complete:4");
        let pops = ThermalModel::new(&s, 1e9).unwrap().populations();
        assert!((pops[0] - 0.25).abs() < 1e-8 && (pops[1] - 0.75).abs() < 1e-8);
        let pops = ThermalModel::new(&s, 1e-3).unwrap().populations();
        assert_eq!(pops[0], 1.0);
        assert!(ThermalModel::new(&s, 0.0).is_err());
        assert!(ThermalModel::new(&s, -1.0).is_err());
        assert!(ThermalModel::new(&s, f64::NAN).is_err());
    }

    #[test]
    fn energy_moments() {
        let (_, s) = spec("complete:2");
        let m = ThermalModel::new(&s, 2.0).unwrap();
        let q = (-1f64).exp();
        assert!((m.energy_moment(1).unwrap() - 2.0 * q / (1.0 + q)).abs() < 1e-15);
        assert!(m.energy_moment(3).is_err());

        let (g, s) = spec("star:7");
        let st = g.degree_stats();
        let m = ThermalModel::new(&s, 1e12).unwrap();
        let n = g.order() as f64;
        assert!(rel(m.energy_moment(1).unwrap(), 2.0 * st.edges as f64 / n) < 1e-9);
        let e2 = (st.sum_deg_sq as f64 + 2.0 * st.edges as f64) / n;
        assert!(rel(m.energy_moment(2).unwrap(), e2) < 1e-9);
    }

    #[test]
    fn qfi_examples() {
        for n in [3, 5, 8] {
            let (_, s) = spec(&format!("complete:{n}"));
            for t in [0.3, 1.0, 7.0] {
                let m = ThermalModel::new(&s, t).unwrap();
                assert!(rel(m.qfi(), qfi_complete(n, t)) < 1e-12);
            }
        }
        let (_, s) = spec("path:3");
        assert_eq!(ThermalModel::new(&s, 1e-3).unwrap().qfi(), 0.0);
        // Hand oracle for P_3 at T = 1, levels {0, 1, 3}.
        let w = [1.0, (-1f64).exp(), (-3f64).exp()];
        let z: f64 = w.iter().sum();
        let e = [0.0, 1.0, 3.0];
        let m1: f64 = (0..3).map(|i| w[i] * e[i]).sum::<f64>() / z;
        let m2: f64 = (0..3).map(|i| w[i] * e[i] * e[i]).sum::<f64>() / z;
        let m = ThermalModel::new(&s, 1.0).unwrap();
        assert!(rel(m.qfi(), m2 - m1 * m1) < 1e-13);
    }

    #[test]
    fn position_probabilities_examples() {
        let (_, s) = spec("cycle:9");
        let p = ThermalModel::new(&s, 0.7).unwrap().position_probabilities().unwrap();
        assert!(p.iter().all(|x| (x - 1.0 / 9.0).abs() < 1e-14));

        let (_, s) = spec("star:4");
        let p = ThermalModel::new(&s, 1e-3).unwrap().position_probabilities().unwrap();
        assert!(p.iter().all(|x| (x - 0.25).abs() < 1e-12));

        let (_, s) = spec("path:2");
        let p = ThermalModel::new(&s, 0.9).unwrap().position_probabilities().unwrap();
        assert!((p[0] - 0.5).abs() < 1e-15 && (p[1] - 0.5).abs() < 1e-15);

        let bare = s.without_eigenvectors();
        let m = ThermalModel::new(&bare, 1.0).unwrap();
        assert!(matches!(m.position_probabilities(), Err(Error::MissingEigenvectors)));
        assert!(m.fi_position().is_err());
        assert!(m.qfi() > 0.0);
    }

    #[test]
    fn energy_weighted_examples() {
        let (_, s) = spec("cycle:6");
        let m = ThermalModel::new(&s, 1.3).unwrap();
        let h = m.mean_energy();
        for j in 0..6 {
            assert!((m.energy_weighted(j).unwrap() - h / 6.0).abs() < 1e-14);
        }
        assert!(matches!(m.energy_weighted(6), Err(Error::VertexOutOfRange { .. })));

        let (_, s) = spec("grid:3x4:obc");
        let m = ThermalModel::new(&s, 0.8).unwrap();
        let total: f64 = m.energy_weighted_all().unwrap().iter().sum();
        assert!(rel(total, m.mean_energy()) < 1e-12);

        let (_, s) = spec("path:2");
        let m = ThermalModel::new(&s, 1.0).unwrap();
        assert!((m.energy_weighted(0).unwrap() - m.energy_weighted(1).unwrap()).abs() < 1e-15);
    }

    #[test]
    fn null_fi_for_flat_eigenvector_weights() {
        for d in ["cycle:8", "complete:6", "torus:3x3", "bipartite:4,4"] {
            let (_, s) = spec(d);
            for t in [0.05, 0.5, 3.0, 40.0] {
                let fi = ThermalModel::new(&s, t).unwrap().fi_position().unwrap();
                assert_eq!(fi, 0.0, "{d} at T={t}");
            }
        }
    }

    #[test]
    fn fi_position_below_qfi_and_matches_definition() {
        for d in ["star:10", "path:6", "bipartite:2,5", "tri:3x3:obc", "honey:4x4:obc"] {
            let (_, s) = spec(d);
            for t in [0.2, 1.0, 10.0] {
                let m = ThermalModel::new(&s, t).unwrap();
                let fi = m.fi_position().unwrap();
                let fi_def = m.fi_position_definitional().unwrap();
                assert!(fi <= m.qfi() + 1e-10, "{d}");
                assert!(fi > 0.0);
                assert!(rel(fi, fi_def) < 1e-9, "{d} T={t}: {fi} vs {fi_def}");
            }
        }
    }

    #[test]
    fn star_ratio_approaches_limit() {
        // Oracle: evaluate F_c/F_q on an increasing T grid and watch it
        // approach 1/(1 + λ).
        let (g, s) = spec("star:10");
        let limit = ratio_limit(&g.degree_stats());
        let mut prev_gap = f64::INFINITY;
        for t in [10.0, 100.0, 1000.0, 10000.0] {
            let m = ThermalModel::new(&s, t).unwrap();
            let gap = (m.fi_position().unwrap() / m.qfi() - limit).abs();
            assert!(gap < prev_gap);
            prev_gap = gap;
        }
        assert!(prev_gap < 1e-3);
    }

    #[test]
    fn xmax_values() {
        // Independent oracle: plain bisection on e^x (x - 4) - g (x + 4).
        let oracle = |g: f64| {
            let f = |x: f64| x.exp() * (x - 4.0) - g * (x + 4.0);
            let (mut a, mut b) = (4.0 + 1e-9, 30.0);
            while b - a > 1e-12 {
                let c = 0.5 * (a + b);
                if f(c) < 0.0 {
                    a = c
                } else {
                    b = c
                }
            }
            0.5 * (a + b)
        };
        let x1 = solve_xmax(1).unwrap();
        assert!((x1 - 4.130_676_277_949_6).abs() < 1e-9);
        assert!((x1 - oracle(1.0)).abs() < 1e-9);
        let mut prev = x1;
        for g in 2..40 {
            let x = solve_xmax(g).unwrap();
            assert!((x - oracle(g as f64)).abs() < 1e-9);
            assert!(x > prev);
            prev = x;
        }
        // sublinear growth
        assert!(solve_xmax(1000).unwrap() < 1000.0 * x1 / 100.0);
        assert!(solve_xmax(0).is_err());
    }

    #[test]
    fn low_t_peak_is_at_e1_over_xmax() {
        for (e1, g1) in [(1.0, 1usize), (2.5, 3), (8.0, 7)] {
            let x = solve_xmax(g1).unwrap();
            let r = crate::golden_section_max(
                |u| qfi_low_t(e1, g1, u.exp()),
                (e1 / 20.0f64).ln(),
                (e1 * 2.0f64).ln(),
                1e-12,
            )
            .unwrap();
            assert!(rel(r.x.exp(), e1 / x) < 1e-6);
        }
        // x fixed, E1 doubled: value quartered
        assert!(rel(qfi_low_t(2.0, 3, 0.5), qfi_low_t(1.0, 3, 0.25) / 4.0) < 1e-14);
    }

    #[test]
    fn low_t_qfi_matches_complete_graph_exactly() {
        for n in [3usize, 9] {
            for t in [0.1, 1.0, 30.0] {
                let v = qfi_low_t(n as f64, n - 1, t);
                assert!(rel(v, qfi_complete(n, t)) < 1e-13);
            }
        }
        // star row of the low-temperature table column
        let n = 9.0;
        for t in [0.2f64, 0.7] {
            let q = (-1.0 / t).exp();
            let want = (n - 2.0) * q / (1.0 + (n - 2.0) * q).powi(2) / t.powi(4);
            assert!(rel(qfi_low_t(1.0, 7, t), want) < 1e-13);
        }
    }

    #[test]
    fn fi_low_t_examples() {
        let (_, s) = spec("cycle:7");
        assert_eq!(fi_low_t(&s, 0.3).unwrap(), 0.0);

        let (_, s) = spec("star:6");
        let t = 1.0 / 10.0;
        let exact = ThermalModel::new(&s, t).unwrap().fi_position().unwrap();
        assert!(rel(fi_low_t(&s, t).unwrap(), exact) < 0.1);

        let (_, s) = spec("path:4");
        let exact = ThermalModel::new(&s, 1e-3).unwrap().fi_position().unwrap();
        assert!(exact < 1e-100 && fi_low_t(&s, 1e-3).unwrap() < 1e-100);
    }

    #[test]
    fn high_t_closed_forms() {
        let t = 1.7f64;
        let t4 = t.powi(4);
        for n in [4usize, 9] {
            let st = Graph::complete(n).unwrap().degree_stats();
            assert!(rel(qfi_high_t(&st, t), (n - 1) as f64 / t4) < 1e-14);
            let (_, hi) = qfi_high_t_bounds(n, st.edges, t);
            assert!(rel(hi, qfi_high_t(&st, t)) < 1e-14);

            let st = Graph::cycle(n).unwrap().degree_stats();
            assert!(rel(qfi_high_t(&st, t), 2.0 / t4) < 1e-14);
            let (lo, _) = qfi_high_t_bounds(n, st.edges, t);
            assert!(rel(lo, qfi_high_t(&st, t)) < 1e-14);
            assert_eq!(fi_high_t(&st, t), 0.0);
            assert_eq!(ratio_limit(&st), 0.0);
            assert!(lambda_nm(&st).is_none());
        }
        for (a, b) in [(2usize, 3usize), (1, 7), (4, 9)] {
            let st = Graph::complete_bipartite(a, b).unwrap().degree_stats();
            let (af, bf) = (a as f64, b as f64);
            let want = af * bf * ((af - bf).powi(2) + 2.0 * (af + bf)) / (t4 * (af + bf).powi(2));
            assert!(rel(qfi_high_t(&st, t), want) < 1e-14);
            let lambda = 2.0 * (af + bf) / (bf - af).powi(2);
            assert!(rel(lambda_nm(&st).unwrap(), lambda) < 1e-14);
        }
        let st = Graph::complete_bipartite(5, 5).unwrap().degree_stats();
        let (lo, _) = qfi_high_t_bounds(10, st.edges, t);
        assert!(rel(lo, 10.0 / (2.0 * t4)) < 1e-14);

        for n in [5usize, 12] {
            let nf = n as f64;
            let st = Graph::star(n).unwrap().degree_stats();
            assert!(rel(fi_high_t(&st, t), (nf - 1.0) * (nf - 2.0).powi(2) / (nf * nf * t4)) < 1e-14);
            let want = 1.0 / (1.0 + 2.0 * nf / (nf - 2.0).powi(2));
            assert!(rel(ratio_limit(&st), want) < 1e-14);

            let st = Graph::path(n).unwrap().degree_stats();
            assert!(rel(fi_high_t(&st, t), 2.0 * (nf - 2.0) / (nf * nf * t4)) < 1e-14);
            let want = 1.0 / (1.0 + nf * (nf - 1.0) / (nf - 2.0));
            assert!(rel(ratio_limit(&st), want) < 1e-14);
        }
    }

    #[test]
    fn bipartite_closed_form_matches_spectrum() {
        for (a, b) in [(2usize, 3usize), (5, 5), (1, 9), (3, 2), (9, 1)] {
            let s = analytic_spectrum(&Graph::complete_bipartite(a, b).unwrap(), DEFAULT_GROUP_TOL)
                .unwrap();
            for t in [0.1, 1.0, 10.0] {
                let exact = ThermalModel::new(&s, t).unwrap().qfi();
                assert!(rel(qfi_exact_bipartite(a, b, t), exact) < 1e-10, "({a},{b}) T={t}");
            }
        }
        // N1 = 1 is the star form
        for t in [0.5, 2.0] {
            let s = spectrum(&Graph::star(8).unwrap(), DEFAULT_GROUP_TOL).unwrap();
            assert!(rel(qfi_exact_star(8, t), ThermalModel::new(&s, t).unwrap().qfi()) < 1e-12);
        }
        // high-T limit against the (N, Δ) table entry
        let (a, b) = (3.0, 8.0);
        let (n, d) = (a + b, b - a);
        let t: f64 = 1e4;
        let want = (n * n - d * d) * (d * d + 2.0 * n) / (4.0 * n * n);
        assert!(rel(t.powi(4) * qfi_exact_bipartite(3, 8, t), want) < 1e-3);
    }

    #[test]
    fn gibbs_matrix_limits() {
        let (_, s) = spec("path:5");
        let rho = ThermalModel::new(&s, 1e-3).unwrap().gibbs_position_matrix().unwrap();
        assert!(rho.iter().all(|z| (z.re - 0.2).abs() < 1e-12 && z.im == 0.0));
        let rho = ThermalModel::new(&s, 1e9).unwrap().gibbs_position_matrix().unwrap();
        for j in 0..5 {
            for k in 0..5 {
                let want = if j == k { 0.2 } else { 0.0 };
                assert!((rho[(j, k)].re - want).abs() < 1e-8);
            }
        }
        let (_, s) = spec("cycle:6");
        let m = ThermalModel::new(&s, 0.9).unwrap();
        let rho = m.gibbs_position_matrix().unwrap();
        assert!((rho.clone() - rho.adjoint()).camax() < 1e-14);
        let p = m.position_probabilities().unwrap();
        for j in 0..6 {
            assert!((rho[(j, j)].re - p[j]).abs() < 1e-14);
        }
        let lim = zero_temperature_limit(5);
        assert_eq!((lim.qfi, lim.fi_position, lim.coherence), (0.0, 0.0, 1.0));
        assert!(lim.gibbs_position_matrix.iter().all(|z| z.re == 0.2));
    }

    #[test]
    fn coherence_examples() {
        for n in [3usize, 6] {
            let (_, s) = spec(&format!("complete:{n}"));
            for t in [0.5, 2.0, 20.0] {
                let c = ThermalModel::new(&s, t).unwrap().coherence().unwrap();
                assert!((c - coherence_complete(n, t)).abs() < 1e-12);
            }
            let c = ThermalModel::new(&s, 1e-3).unwrap().coherence().unwrap();
            assert!((c - 1.0).abs() < 1e-12);
        }
        let diag = DMatrix::from_diagonal(&nalgebra::DVector::from_element(4, Complex64::new(0.25, 0.0)));
        assert_eq!(coherence_l1_normalized(&diag).unwrap(), 0.0);
        let one = DMatrix::from_element(1, 1, Complex64::new(1.0, 0.0));
        assert!(coherence_l1_normalized(&one).is_err());
        let bad = DMatrix::from_element(2, 2, Complex64::new(1.0, 0.0));
        assert!(coherence_l1_normalized(&bad).is_err());
    }

    #[test]
    fn coherence_identity() {
        let (l, r) = complete_graph_qfi_coherence_identity(5, 2.0);
        assert!((l - r).abs() < 1e-12);
        let (l, r) = complete_graph_qfi_coherence_identity(5, 1e7);
        assert!((l - 1.0).abs() < 1e-6 && (r - 1.0).abs() < 1e-6);
        let (l, r) = complete_graph_qfi_coherence_identity(5, 1e-2);
        assert!(l < 1e-100 && r < 1e-100);
    }

    #[test]
    fn cartesian_additivity() {
        let p3 = Graph::path(3).unwrap();
        let c4 = Graph::cycle(4).unwrap();
        let prod = Graph::cartesian_product(&p3, &c4);
        let s1 = numeric_spectrum(&p3, DEFAULT_GROUP_TOL).unwrap();
        let s2 = numeric_spectrum(&c4, DEFAULT_GROUP_TOL).unwrap();
        let s12 = numeric_spectrum(&prod, DEFAULT_GROUP_TOL).unwrap();
        for t in [0.5, 2.0, 20.0] {
            let (m1, m2, m12) = (
                ThermalModel::new(&s1, t).unwrap(),
                ThermalModel::new(&s2, t).unwrap(),
                ThermalModel::new(&s12, t).unwrap(),
            );
            assert!(rel(m12.qfi(), m1.qfi() + m2.qfi()) < 1e-9);
            let f = m1.fi_position().unwrap() + m2.fi_position().unwrap();
            assert!(rel(m12.fi_position().unwrap(), f) < 1e-9);
        }
    }

    #[test]
    fn report_invariants_and_csv() {
        let (g, s) = spec("star:8");
        let r = fisher_report(&g.degree_stats(), &s, 1.5).unwrap();
        assert!(0.0 <= r.fi_position && r.fi_position <= r.qfi);
        assert!(r.qfi_high_bounds.0 <= r.qfi_high && r.qfi_high <= r.qfi_high_bounds.1 * (1.0 + 1e-12));
        assert_eq!(r.csv_row().split(',').count(), FisherReport::CSV_HEADER.split(',').count());
        let json = serde_json::to_string(&r).unwrap();
        let back: FisherReport = serde_json::from_str(&json).unwrap();
        assert_eq!(back, r);
        let other = Graph::path(3).unwrap().degree_stats();
        assert!(fisher_report(&other, &s, 1.0).is_err());
    }
}
