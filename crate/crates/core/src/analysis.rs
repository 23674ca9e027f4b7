//! Temperature sweeps, peak location, and the comparison tables between
//! exact numerics and the asymptotic formulas.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{check_temperature, Error, Result};
use crate::graph::{Boundary, DegreeStats, Graph};
use crate::optimize::{bisect, golden_section_max};
use crate::spectral::{algebraic_connectivity, spectrum, Spectrum, DEFAULT_GROUP_TOL};
use crate::thermo::{
    fi_high_t, fisher_report, qfi_high_t, qfi_low_t, ratio_limit, FisherReport, ThermalModel,
};

pub const DEFAULT_POINTS: usize = 400;
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// `points` log-spaced temperatures from `lo` to `hi`, both included.
pub fn log_grid(lo: f64, hi: f64, points: usize) -> Result<Vec<f64>> {
    check_temperature(lo)?;
    check_temperature(hi)?;
    if !(lo < hi) || points < 2 {
        return Err(Error::InvalidArgument(format!(
            "need 0 < T_lo < T_hi and at least 2 points (got [{lo}, {hi}], {points})"
        )));
    }
    let (a, b) = (lo.ln(), hi.ln());
    let step = (b - a) / (points - 1) as f64;
    let mut grid: Vec<f64> = (0..points).map(|i| (a + step * i as f64).exp()).collect();
    grid[0] = lo;
    grid[points - 1] = hi;
    if grid.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::InvalidArgument(
            "temperature grid is not strictly increasing (range too narrow for the point count)"
                .into(),
        ));
    }
    Ok(grid)
}

/// `[1e-2 E_1, 1e3 E_max]`, wide enough to cover both asymptotic regimes.
pub fn default_range(s: &Spectrum) -> Result<(f64, f64)> {
    let (e1, _) = algebraic_connectivity(s)?;
    Ok((1e-2 * e1, 1e3 * s.max_energy()))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Peak {
    #[serde(rename = "T_max")]
    pub temperature: f64,
    pub qfi_max: f64,
}

/// Refine the grid maximum of the QFI by golden-section search in `ln T`
/// between the neighbouring grid points. Never returns less than the best
/// sampled value.
pub fn refine_peak(s: &Spectrum, temperatures: &[f64], qfi: &[f64]) -> Result<Peak> {
    if temperatures.is_empty() || temperatures.len() != qfi.len() {
        return Err(Error::InvalidArgument("empty or mismatched sweep".into()));
    }
    let (i, &best) = qfi
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .unwrap();
    let lo = temperatures[i.saturating_sub(1)];
    let hi = temperatures[(i + 1).min(temperatures.len() - 1)];
    let f = |u: f64| ThermalModel::new(s, u.exp()).map_or(f64::NEG_INFINITY, |m| m.qfi());
    let r = golden_section_max(f, lo.ln(), hi.ln(), 1e-10)?;
    Ok(if r.value >= best {
        Peak {
            temperature: r.x.exp(),
            qfi_max: r.value,
        }
    } else {
        Peak {
            temperature: temperatures[i],
            qfi_max: best,
        }
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepResult {
    pub descriptor: String,
    pub order: usize,
    pub edges: u64,
    pub temperatures: Vec<f64>,
    pub reports: Vec<FisherReport>,
    pub peak: Peak,
    /// `F_c / F_q` at each grid point (0 where the QFI underflows).
    pub ratio: Vec<f64>,
}

impl SweepResult {
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("# topotherm {VERSION}\n"));
        out.push_str(&format!("# graph: {}\n", self.descriptor));
        out.push_str(&format!("# N: {}, M: {}\n", self.order, self.edges));
        out.push_str(FisherReport::CSV_HEADER);
        out.push('\n');
        for r in &self.reports {
            out.push_str(&r.csv_row());
            out.push('\n');
        }
        out.push_str(&format!(
            "# peak: T_max={},qfi_max={}\n",
            self.peak.temperature, self.peak.qfi_max
        ));
        out
    }
}

/// Evaluate a [`FisherReport`] on a log grid and locate the QFI peak.
pub fn sweep(g: &Graph, s: &Spectrum, t_lo: f64, t_hi: f64, points: usize) -> Result<SweepResult> {
    let temperatures = log_grid(t_lo, t_hi, points)?;
    sweep_on(g, s, temperatures)
}

pub fn sweep_on(g: &Graph, s: &Spectrum, temperatures: Vec<f64>) -> Result<SweepResult> {
    let stats = g.degree_stats();
    let reports = temperatures
        .par_iter()
        .map(|&t| fisher_report(&stats, s, t))
        .collect::<Result<Vec<_>>>()?;
    let qfi: Vec<f64> = reports.iter().map(|r| r.qfi).collect();
    let peak = refine_peak(s, &temperatures, &qfi)?;
    let ratio = reports
        .iter()
        .map(|r| if r.qfi > 0.0 { r.fi_position / r.qfi } else { 0.0 })
        .collect();
    Ok(SweepResult {
        descriptor: g.descriptor(),
        order: g.order(),
        edges: stats.edges,
        temperatures,
        reports,
        peak,
        ratio,
    })
}

/// Location of the QFI peak by sweep-and-refine, without the position
/// measurement or coherence work a full [`sweep`] does.
pub fn qfi_peak(s: &Spectrum, t_lo: f64, t_hi: f64, points: usize) -> Result<Peak> {
    let temperatures = log_grid(t_lo, t_hi, points)?;
    let qfi = temperatures
        .par_iter()
        .map(|&t| ThermalModel::new(s, t).map(|m| m.qfi()))
        .collect::<Result<Vec<_>>>()?;
    refine_peak(s, &temperatures, &qfi)
}

/// Relative deviation `|a - b| / |b|`, falling back to `|a|` when `b = 0`.
pub fn relative_deviation(a: f64, b: f64) -> f64 {
    if b == 0.0 {
        a.abs()
    } else {
        (a - b).abs() / b.abs()
    }
}

/// Table families at fixed order `N`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TableFamily {
    Complete,
    Cycle,
    CompleteBipartite,
    Star,
    Path,
    Grid,
    Torus,
}

impl TableFamily {
    pub const ALL: [TableFamily; 7] = [
        TableFamily::Complete,
        TableFamily::Cycle,
        TableFamily::CompleteBipartite,
        TableFamily::Star,
        TableFamily::Path,
        TableFamily::Grid,
        TableFamily::Torus,
    ];

    pub fn label(self) -> &'static str {
        match self {
            TableFamily::Complete => "K_N",
            TableFamily::Cycle => "C_N",
            TableFamily::CompleteBipartite => "K_N1_N2",
            TableFamily::Star => "S_N",
            TableFamily::Path => "P_N",
            TableFamily::Grid => "G_sqrtN_sqrtN",
            TableFamily::Torus => "T_sqrtN_sqrtN",
        }
    }
}

/// Closed-form high-temperature entries `(T⁴F_q, T⁴F_c, F_c/F_q)` for the
/// table families, written in terms of `N`, `Δ = N2 - N1` and `√N`.
pub fn closed_form_high_t(family: TableFamily, n: usize, n1: usize) -> (f64, f64, f64) {
    let nf = n as f64;
    match family {
        TableFamily::Complete => (nf - 1.0, 0.0, 0.0),
        TableFamily::Cycle => (2.0, 0.0, 0.0),
        TableFamily::CompleteBipartite => {
            let d = nf - 2.0 * n1 as f64;
            let d2 = d * d;
            let base = (nf * nf - d2) / (4.0 * nf * nf);
            (base * (d2 + 2.0 * nf), base * d2, 1.0 / (1.0 + 2.0 * nf / d2))
        }
        TableFamily::Star => (
            (nf - 1.0) * (nf * (nf - 2.0) + 4.0) / (nf * nf),
            (nf - 1.0) * (nf - 2.0).powi(2) / (nf * nf),
            (nf - 2.0).powi(2) / (nf * (nf - 2.0) + 4.0),
        ),
        TableFamily::Path => (
            2.0 * (nf * nf - 2.0) / (nf * nf),
            2.0 * (nf - 2.0) / (nf * nf),
            (nf - 2.0) / (nf * nf - 2.0),
        ),
        TableFamily::Grid => {
            let r = nf.sqrt();
            (4.0 * (nf - 2.0) / nf, 4.0 * (r - 2.0) / nf, (r - 2.0) / (nf - 2.0))
        }
        TableFamily::Torus => (4.0, 0.0, 0.0),
    }
}

/// Closed-form `(E_1, g_1)` for the table families.
pub fn closed_form_gap(family: TableFamily, n: usize, n1: usize) -> (f64, usize) {
    use std::f64::consts::PI;
    let nf = n as f64;
    let r = nf.sqrt();
    match family {
        TableFamily::Complete => (nf, n - 1),
        TableFamily::Cycle => (4.0 * (PI / nf).sin().powi(2), 2),
        TableFamily::CompleteBipartite => {
            let small = n1.min(n - n1);
            (small as f64, n - small - 1)
        }
        TableFamily::Star => (1.0, n - 2),
        TableFamily::Path => (4.0 * (PI / (2.0 * nf)).sin().powi(2), 1),
        TableFamily::Grid => (4.0 * (PI / (2.0 * r)).sin().powi(2), 2),
        TableFamily::Torus => (4.0 * (PI / r).sin().powi(2), 4),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Table1Row {
    pub graph: String,
    pub descriptor: String,
    pub e1: f64,
    pub g1: usize,
    pub e1_closed: f64,
    pub g1_closed: usize,
    /// Closed-form `T⁴ F_q^high`, `T⁴ F_c^high`, ratio.
    pub qfi_high_closed: f64,
    pub fi_high_closed: f64,
    pub ratio_closed: f64,
    /// The same three from the graph's degree statistics.
    pub qfi_high_stats: f64,
    pub fi_high_stats: f64,
    pub ratio_stats: f64,
    /// Exact numerics at `T = 1e3 E_max`, scaled by `T⁴`.
    #[serde(rename = "T")]
    pub temperature: f64,
    pub qfi_numeric: f64,
    pub fi_numeric: f64,
    pub ratio_numeric: f64,
    pub dev_qfi: f64,
    pub dev_fi: f64,
    pub dev_ratio: f64,
}

impl Table1Row {
    pub const CSV_HEADER: &'static str = "graph,descriptor,e1,g1,qfi_high_closed,fi_high_closed,ratio_closed,qfi_high_stats,fi_high_stats,ratio_stats,T,qfi_numeric,fi_numeric,ratio_numeric,dev_qfi,dev_fi,dev_ratio";

    pub fn csv_row(&self) -> String {
        format!(
            "{},\"{}\",{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            self.graph,
            self.descriptor,
            self.e1,
            self.g1,
            self.qfi_high_closed,
            self.fi_high_closed,
            self.ratio_closed,
            self.qfi_high_stats,
            self.fi_high_stats,
            self.ratio_stats,
            self.temperature,
            self.qfi_numeric,
            self.fi_numeric,
            self.ratio_numeric,
            self.dev_qfi,
            self.dev_fi,
            self.dev_ratio
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Table1 {
    pub order: usize,
    pub n1: usize,
    pub rows: Vec<Table1Row>,
}

impl Table1 {
    pub fn to_csv(&self) -> String {
        let mut out = format!(
            "# topotherm {VERSION}\n# table1: N={}, N1={}, N2={}\n{}\n",
            self.order,
            self.n1,
            self.order - self.n1,
            Table1Row::CSV_HEADER
        );
        for r in &self.rows {
            out.push_str(&r.csv_row());
            out.push('\n');
        }
        out
    }
}

/// Regenerate the high-temperature comparison table at order `n`, with the
/// complete bipartite row at `K_{n1, n - n1}`. `n` must be a perfect square
/// (at least 9) for the lattice rows.
pub fn table1_report(n: usize, n1: usize) -> Result<Table1> {
    let side = (n as f64).sqrt().round() as usize;
    if side * side != n || side < 3 {
        return Err(Error::InvalidArgument(format!(
            "table order must be a perfect square >= 9 (got {n})"
        )));
    }
    if n1 == 0 || n1 >= n {
        return Err(Error::InvalidArgument(format!(
            "bipartite split needs 1 <= N1 < N (got N1 = {n1})"
        )));
    }
    let rows = TableFamily::ALL
        .par_iter()
        .map(|&family| {
            let g = match family {
                TableFamily::Complete => Graph::complete(n)?,
                TableFamily::Cycle => Graph::cycle(n)?,
                TableFamily::CompleteBipartite => Graph::complete_bipartite(n1, n - n1)?,
                TableFamily::Star => Graph::star(n)?,
                TableFamily::Path => Graph::path(n)?,
                TableFamily::Grid => Graph::grid(side, side, Boundary::Open)?,
                TableFamily::Torus => Graph::torus(side, side)?,
            };
            table_row(family, &g, n, n1)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Table1 { order: n, n1, rows })
}

fn table_row(family: TableFamily, g: &Graph, n: usize, n1: usize) -> Result<Table1Row> {
    let s = spectrum(g, DEFAULT_GROUP_TOL)?;
    let stats = g.degree_stats();
    let (e1, g1) = algebraic_connectivity(&s)?;
    let (e1_closed, g1_closed) = closed_form_gap(family, n, n1);
    let (qc, fc, rc) = closed_form_high_t(family, n, n1);
    let qs = qfi_high_t(&stats, 1.0);
    let fs = fi_high_t(&stats, 1.0);
    let rs = ratio_limit(&stats);
    let t = 1e3 * s.max_energy();
    let m = ThermalModel::new(&s, t)?;
    let t4 = t.powi(4);
    let qn = m.qfi() * t4;
    let fnum = m.fi_position()? * t4;
    let rn = if qn > 0.0 { fnum / qn } else { 0.0 };
    Ok(Table1Row {
        graph: family.label().to_string(),
        descriptor: g.descriptor(),
        e1,
        g1,
        e1_closed,
        g1_closed,
        qfi_high_closed: qc,
        fi_high_closed: fc,
        ratio_closed: rc,
        qfi_high_stats: qs,
        fi_high_stats: fs,
        ratio_stats: rs,
        temperature: t,
        qfi_numeric: qn,
        fi_numeric: fnum,
        ratio_numeric: rn,
        dev_qfi: relative_deviation(qn, qc),
        dev_fi: relative_deviation(fnum, fc),
        dev_ratio: relative_deviation(rn, rc),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ApproximationRow {
    #[serde(rename = "T")]
    pub temperature: f64,
    pub qfi: f64,
    pub qfi_low: f64,
    pub qfi_high: f64,
    pub rel_err_low: f64,
    pub rel_err_high: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ApproximationReport {
    pub descriptor: String,
    pub rows: Vec<ApproximationRow>,
    pub peak: Peak,
    /// Relative error of the low-temperature QFI at the refined peak.
    pub low_error_at_peak: f64,
    pub high_error_at_peak: f64,
}

/// How well the two asymptotic QFI forms track the exact QFI on a grid.
pub fn approximation_report(
    g: &Graph,
    s: &Spectrum,
    temperatures: &[f64],
) -> Result<ApproximationReport> {
    let stats: DegreeStats = g.degree_stats();
    let (e1, g1) = algebraic_connectivity(s)?;
    let rows = temperatures
        .iter()
        .map(|&t| {
            let qfi = ThermalModel::new(s, t)?.qfi();
            let low = qfi_low_t(e1, g1, t);
            let high = qfi_high_t(&stats, t);
            Ok(ApproximationRow {
                temperature: t,
                qfi,
                qfi_low: low,
                qfi_high: high,
                rel_err_low: relative_deviation(low, qfi),
                rel_err_high: relative_deviation(high, qfi),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let qfi: Vec<f64> = rows.iter().map(|r| r.qfi).collect();
    let peak = refine_peak(s, temperatures, &qfi)?;
    Ok(ApproximationReport {
        descriptor: g.descriptor(),
        low_error_at_peak: relative_deviation(qfi_low_t(e1, g1, peak.temperature), peak.qfi_max),
        high_error_at_peak: relative_deviation(qfi_high_t(&stats, peak.temperature), peak.qfi_max),
        rows,
        peak,
    })
}

/// Where the QFI peak sits relative to the loss of vertex-basis coherence.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoherenceWindow {
    pub peak: Peak,
    pub coherence_at_peak: f64,
    /// Temperature at which the normalized coherence falls to `1/e`.
    pub t_inv_e: f64,
    /// Temperatures bounding the region where the QFI exceeds half its peak.
    pub half_max: (f64, f64),
}

impl CoherenceWindow {
    /// The peak sits before the coherence has fallen to `1/e`.
    pub fn peak_within_coherence_drop(&self) -> bool {
        let inv_e = (-1.0f64).exp();
        self.coherence_at_peak > inv_e
            && self.coherence_at_peak < 1.0
            && self.peak.temperature < self.t_inv_e
    }
}

/// Locate the QFI peak, the half-maximum window around it and the
/// temperature where the normalized coherence drops to `1/e`.
///
/// Coherence is assumed to fall monotonically from 1 over the default
/// temperature range (true for Laplacian Gibbs states of the tested
/// families); an error is returned if no crossing is bracketed.
pub fn coherence_window(s: &Spectrum) -> Result<CoherenceWindow> {
    let (lo, hi) = default_range(s)?;
    let peak = qfi_peak(s, lo, hi, DEFAULT_POINTS)?;
    let qfi = |u: f64| ThermalModel::new(s, u.exp()).map_or(0.0, |m| m.qfi());
    let half = 0.5 * peak.qfi_max;
    let up = peak.temperature.ln();
    let left = bisect(|u| qfi(u) - half, lo.ln(), up, 1e-12)?;
    let right = bisect(|u| qfi(u) - half, up, hi.ln(), 1e-12)?;
    let coh = |u: f64| {
        ThermalModel::new(s, u.exp())
            .and_then(|m| m.coherence())
            .unwrap_or(f64::NAN)
    };
    let target = (-1.0f64).exp();
    let cross = bisect(|u| coh(u) - target, lo.ln(), hi.ln(), 1e-12)?;
    Ok(CoherenceWindow {
        peak,
        coherence_at_peak: coh(up),
        t_inv_e: cross.exp(),
        half_max: (left.exp(), right.exp()),
    })
}
