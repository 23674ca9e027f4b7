//! Monte Carlo check of the Cramér–Rao chain: sample energy-level or
//! vertex outcomes from a Gibbs state, recover `T` by maximum likelihood and
//! compare the spread of the estimates with `1/(M F)`.
//!
//! Randomness comes from ChaCha8 (`rand_chacha`). A sample drawn with seed
//! `s` uses stream 0; trial `i` of an experiment uses stream `i` of the same
//! seed, so every trial is reproducible on its own and the result does not
//! depend on how trials are scheduled across threads.

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{check_temperature, Error, Result};
use crate::optimize::golden_section_max;
use crate::spectral::Spectrum;
use crate::thermo::ThermalModel;

pub const RNG_ALGORITHM: &str = "ChaCha8Rng (rand_chacha 0.9), seed_from_u64(seed), stream = trial index";

/// Relative tolerance on `T̂` for the likelihood maximization.
pub const MLE_REL_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MeasurementKind {
    /// Projective energy measurement; outcomes are level indices.
    Energy,
    /// Vertex occupation; outcomes are vertex indices.
    Position,
}

impl std::str::FromStr for MeasurementKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "energy" => Ok(MeasurementKind::Energy),
            "position" => Ok(MeasurementKind::Position),
            other => Err(Error::InvalidArgument(format!(
                "unknown measurement `{other}` (expected energy or position)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutcomeSample {
    pub kind: MeasurementKind,
    /// `counts[x]` is how often outcome `x` occurred.
    pub counts: Vec<u64>,
    pub shots: u64,
    pub true_temperature: f64,
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EstimationTrial {
    pub estimate: f64,
    pub log_likelihood: f64,
    pub converged: bool,
    pub iterations: usize,
}

/// Outcome probabilities of a measurement as a function of `T`.
struct OutcomeModel<'a> {
    spectrum: &'a Spectrum,
    kind: MeasurementKind,
}

impl<'a> OutcomeModel<'a> {
    fn new(spectrum: &'a Spectrum, kind: MeasurementKind) -> Result<Self> {
        if kind == MeasurementKind::Position {
            spectrum.vertex_level_weights()?;
        }
        Ok(OutcomeModel { spectrum, kind })
    }

    fn outcomes(&self) -> usize {
        match self.kind {
            MeasurementKind::Energy => self.spectrum.levels().len(),
            MeasurementKind::Position => self.spectrum.order(),
        }
    }

    fn probabilities(&self, t: f64) -> Result<Vec<f64>> {
        let m = ThermalModel::new(self.spectrum, t)?;
        match self.kind {
            MeasurementKind::Energy => Ok(m.populations()),
            MeasurementKind::Position => m.position_probabilities(),
        }
    }

    fn log_likelihood(&self, counts: &[u64], t: f64) -> f64 {
        let p = match self.probabilities(t) {
            Ok(p) => p,
            Err(_) => return f64::NEG_INFINITY,
        };
        counts
            .iter()
            .zip(&p)
            .filter(|(&c, _)| c > 0)
            .map(|(&c, &px)| c as f64 * px.ln())
            .sum()
    }
}

fn draw(probabilities: &[f64], shots: u64, rng: &mut ChaCha8Rng) -> Result<Vec<u64>> {
    let dist = WeightedIndex::new(probabilities)
        .map_err(|e| Error::InvalidArgument(format!("outcome distribution: {e}")))?;
    let mut counts = vec![0u64; probabilities.len()];
    for _ in 0..shots {
        counts[dist.sample(rng)] += 1;
    }
    Ok(counts)
}

/// Draw `shots` i.i.d. outcomes from the Gibbs model.
pub fn sample_outcomes(
    model: &ThermalModel<'_>,
    kind: MeasurementKind,
    shots: u64,
    seed: u64,
) -> Result<OutcomeSample> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    sample_with_rng(model, kind, shots, seed, &mut rng)
}

fn sample_with_rng(
    model: &ThermalModel<'_>,
    kind: MeasurementKind,
    shots: u64,
    seed: u64,
    rng: &mut ChaCha8Rng,
) -> Result<OutcomeSample> {
    if shots == 0 {
        return Err(Error::InvalidArgument("need at least one shot".into()));
    }
    let outcome_model = OutcomeModel::new(model.spectrum(), kind)?;
    let p = outcome_model.probabilities(model.temperature())?;
    Ok(OutcomeSample {
        kind,
        counts: draw(&p, shots, rng)?,
        shots,
        true_temperature: model.temperature(),
        seed,
    })
}

/// Maximum-likelihood temperature over `bracket`.
///
/// The log-likelihood is maximized in `ln T` by golden-section search to
/// relative tolerance [`MLE_REL_TOL`]. Two outcomes are reported with
/// `converged = false` rather than as errors: a likelihood that is flat
/// across the bracket (a zero-information sample; the estimate is then the
/// geometric midpoint) and a maximum on the bracket edge (e.g. every shot in
/// the ground level; the estimate is that edge).
pub fn mle_temperature(
    sample: &OutcomeSample,
    spectrum: &Spectrum,
    bracket: (f64, f64),
) -> Result<EstimationTrial> {
    let (lo, hi) = bracket;
    if !(lo > 0.0 && lo < hi && hi.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "temperature bracket must satisfy 0 < lo < hi < inf (got [{lo}, {hi}])"
        )));
    }
    if sample.shots == 0 || sample.counts.iter().sum::<u64>() != sample.shots {
        return Err(Error::InvalidArgument("sample is empty or inconsistent".into()));
    }
    let model = OutcomeModel::new(spectrum, sample.kind)?;
    if sample.counts.len() != model.outcomes() {
        return Err(Error::InvalidArgument(format!(
            "sample has {} outcomes, model has {}",
            sample.counts.len(),
            model.outcomes()
        )));
    }

    let (ulo, uhi) = (lo.ln(), hi.ln());
    let ll = |u: f64| model.log_likelihood(&sample.counts, u.exp());

    // Flatness probe across the bracket.
    let probes: Vec<f64> = (0..9).map(|i| ll(ulo + (uhi - ulo) * i as f64 / 8.0)).collect();
    let top = probes.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let bottom = probes.iter().copied().fold(f64::INFINITY, f64::min);
    if top.is_finite() && top - bottom <= 1e-10 * (1.0 + top.abs()) {
        let mid = 0.5 * (ulo + uhi);
        return Ok(EstimationTrial {
            estimate: mid.exp(),
            log_likelihood: ll(mid),
            converged: false,
            iterations: 0,
        });
    }

    let r = golden_section_max(ll, ulo, uhi, MLE_REL_TOL)?;
    let edge_tol = 1e-6 * (uhi - ulo).max(1.0);
    for edge in [ulo, uhi] {
        if (r.x - edge).abs() < edge_tol {
            return Ok(EstimationTrial {
                estimate: edge.exp(),
                log_likelihood: ll(edge),
                converged: false,
                iterations: r.iterations,
            });
        }
    }
    Ok(EstimationTrial {
        estimate: r.x.exp(),
        log_likelihood: r.value,
        converged: true,
        iterations: r.iterations,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrbConfig {
    pub temperature: f64,
    pub kind: MeasurementKind,
    pub shots: u64,
    pub trials: usize,
    pub seed: u64,
    /// Defaults to `(T/10, 10 T)`.
    pub bracket: Option<(f64, f64)>,
    pub keep_estimates: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrbReport {
    pub descriptor: Option<String>,
    pub config: CrbConfig,
    pub rng: String,
    pub bracket: (f64, f64),
    pub converged_trials: usize,
    pub excluded_trials: usize,
    pub mean_estimate: Option<f64>,
    pub variance: Option<f64>,
    /// Fisher information of the measurement that was simulated.
    pub fisher: f64,
    pub qfi: f64,
    /// `1/(M F)` for the simulated measurement; `None` when `F = 0`.
    pub crb: Option<f64>,
    /// `1/(M F_q)`.
    pub quantum_crb: Option<f64>,
    /// `Var(T̂) M F`.
    pub efficiency: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub estimates: Option<Vec<Option<f64>>>,
}

/// Repeat sample-then-estimate `trials` times and compare the variance of
/// the converged estimates with the Cramér–Rao reference.
pub fn crb_experiment(
    spectrum: &Spectrum,
    descriptor: Option<String>,
    config: &CrbConfig,
) -> Result<CrbReport> {
    let t = config.temperature;
    check_temperature(t)?;
    if config.trials < 100 {
        return Err(Error::InvalidArgument(format!(
            "a CRB experiment needs at least 100 trials (got {})",
            config.trials
        )));
    }
    if config.shots == 0 {
        return Err(Error::InvalidArgument("need at least one shot".into()));
    }
    let bracket = config.bracket.unwrap_or((t / 10.0, t * 10.0));
    let model = ThermalModel::new(spectrum, t)?;
    let qfi = model.qfi();
    let fisher = match config.kind {
        MeasurementKind::Energy => qfi,
        MeasurementKind::Position => model.fi_position()?,
    };

    let outcomes: Vec<Result<EstimationTrial>> = (0..config.trials)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
            rng.set_stream(i as u64);
            let sample = sample_with_rng(&model, config.kind, config.shots, config.seed, &mut rng)?;
            mle_temperature(&sample, spectrum, bracket)
        })
        .collect();

    let mut estimates = Vec::with_capacity(config.trials);
    for o in outcomes {
        let trial = o?;
        estimates.push(trial.converged.then_some(trial.estimate));
    }
    let good: Vec<f64> = estimates.iter().flatten().copied().collect();
    let k = good.len();
    let mean = (k > 0).then(|| good.iter().sum::<f64>() / k as f64);
    let variance = (k > 1).then(|| {
        let m = mean.unwrap();
        good.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (k - 1) as f64
    });
    let shots = config.shots as f64;
    let inv = |f: f64| (f > 0.0).then(|| 1.0 / (shots * f));

    Ok(CrbReport {
        descriptor,
        config: config.clone(),
        rng: RNG_ALGORITHM.to_string(),
        bracket,
        converged_trials: k,
        excluded_trials: config.trials - k,
        mean_estimate: mean,
        variance,
        fisher,
        qfi,
        crb: inv(fisher),
        quantum_crb: inv(qfi),
        efficiency: variance.filter(|_| fisher > 0.0).map(|v| v * shots * fisher),
        estimates: config.keep_estimates.then_some(estimates),
    })
}
