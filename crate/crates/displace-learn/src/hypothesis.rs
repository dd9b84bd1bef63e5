//! Dealer/challenger process-discrimination game.
//!
//! A dealer prepares K n-mode displacement processes, each either three-peak
//! or Gaussian, and draws a peak location γ_k from an isotropic normal for
//! every process (Gaussians get a fictional one). The challenger measures N
//! Bell records per process, learns the γ_k values only afterwards, computes
//! the estimator at β = γ_k, and classifies by comparing a scalar statistic
//! of λ̃(γ_k) against a threshold. Classification never sees the hidden
//! types; only scoring does.
//!
//! The default statistic is Im λ̃(γ) — the three-peak signal at β = γ is
//! +2iε₀ — with |λ̃| available as an alternative reading.

use num_complex::Complex64;
use rand::seq::SliceRandom;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bounds::hoeffding_upper;
use crate::complex_vec::ComplexVec;
use crate::error::{Error, Result};
use crate::estimator::{estimate_char_fn, SlicePool};
use crate::measurement::{DriftModel, RecordBatch, SqueezingSpec};
use crate::process::{draw_gamma, ProcessSpec};
use crate::reconstruction::ComplexityEstimate;
use crate::seeding::{domain_rng, Domain};

/// Hidden family of a dealt process.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProcessLabel {
    ThreePeak,
    Gaussian,
}

/// Scalar reading of the complex estimator used for thresholding.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Statistic {
    #[default]
    Im,
    Abs,
}

impl Statistic {
    pub fn apply(self, lambda: Complex64) -> f64 {
        match self {
            Statistic::Im => lambda.im,
            Statistic::Abs => lambda.norm(),
        }
    }
}

/// Parameters of a hypothesis-testing game.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GameSpec {
    /// Processes per game (K).
    pub k_processes: usize,
    /// Modes per process.
    pub n: usize,
    /// Resolution constant κ; the γ distribution has 2σ_γ² = 0.99κ.
    pub kappa: f64,
    /// Peak width σ shared by both families.
    pub sigma: f64,
    /// Side-peak half-height ε₀ of the three-peak family.
    pub epsilon0: f64,
    /// Classification threshold λ₀.
    pub threshold: f64,
    /// Samples per process in fixed-N games.
    pub n_samples: usize,
    /// Half/half type split (true) or i.i.d. fair-coin types (false).
    pub balanced: bool,
    /// Thresholded reading of λ̃(γ).
    pub statistic: Statistic,
}

impl GameSpec {
    /// The standard game at `n` modes: K = 16, κ = 0.2, σ = 0.3, ε₀ = 0.25,
    /// λ₀ = 0.25, balanced dealing, Im statistic.
    pub fn standard(n: usize, n_samples: usize) -> Self {
        GameSpec {
            k_processes: 16,
            n,
            kappa: 0.2,
            sigma: 0.3,
            epsilon0: 0.25,
            threshold: 0.25,
            n_samples,
            balanced: true,
            statistic: Statistic::Im,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.k_processes < 2 {
            return Err(Error::invalid("a game needs at least two processes"));
        }
        if self.balanced && self.k_processes % 2 != 0 {
            return Err(Error::invalid("balanced dealing needs an even K"));
        }
        if self.n < 1 {
            return Err(Error::invalid("mode count must be at least 1"));
        }
        if !(self.kappa > 0.0 && self.sigma > 0.0) {
            return Err(Error::invalid("kappa and sigma must be positive"));
        }
        if !(self.epsilon0 > 0.0 && self.epsilon0 <= 0.25) {
            return Err(Error::invalid("epsilon0 must lie in (0, 0.25]"));
        }
        if !(self.threshold > 0.0 && self.threshold < 2.0 * self.epsilon0) {
            return Err(Error::invalid("threshold must lie in (0, 2·epsilon0)"));
        }
        Ok(())
    }

    /// Per-coordinate variance of the γ draw: σ_γ² = 0.99κ/2.
    pub fn sigma_gamma_sq(&self) -> f64 {
        0.99 * self.kappa / 2.0
    }

    /// Expected |γ|² of a dealt process: 2nσ_γ² = 0.99κn.
    pub fn expected_gamma_sq(&self) -> f64 {
        0.99 * self.kappa * self.n as f64
    }
}

/// A dealt game: K processes with hidden types and per-process γ vectors.
#[derive(Clone, Debug)]
pub struct GameInstance {
    specs: Vec<ProcessSpec>,
    types: Vec<ProcessLabel>,
    gammas: Vec<ComplexVec>,
}

impl GameInstance {
    pub fn k(&self) -> usize {
        self.specs.len()
    }

    pub fn spec(&self, m: usize) -> &ProcessSpec {
        &self.specs[m]
    }

    /// The γ assigned to process `m` (fictional for Gaussian processes);
    /// revealed to the challenger only after measurement.
    pub fn gamma(&self, m: usize) -> &ComplexVec {
        &self.gammas[m]
    }

    /// Hidden truth, for scoring only — the classification path must never
    /// call this.
    pub fn reveal_type(&self, m: usize) -> ProcessLabel {
        self.types[m]
    }

    pub fn reveal_types(&self) -> &[ProcessLabel] {
        &self.types
    }

    #[cfg(test)]
    pub(crate) fn from_parts(
        specs: Vec<ProcessSpec>,
        types: Vec<ProcessLabel>,
        gammas: Vec<ComplexVec>,
    ) -> Self {
        GameInstance {
            specs,
            types,
            gammas,
        }
    }
}

/// Deals a game: draws types (half/half when balanced, fair coins otherwise)
/// and one γ_k ~ q(γ) per process.
pub fn deal(spec: &GameSpec, master_seed: u64) -> Result<GameInstance> {
    spec.validate()?;
    let mut rng = domain_rng(master_seed, Domain::Deal, 0);
    let types: Vec<ProcessLabel> = if spec.balanced {
        let half = spec.k_processes / 2;
        let mut t: Vec<ProcessLabel> = std::iter::repeat_n(ProcessLabel::ThreePeak, half)
            .chain(std::iter::repeat_n(ProcessLabel::Gaussian, half))
            .collect();
        t.shuffle(&mut rng);
        t
    } else {
        (0..spec.k_processes)
            .map(|_| {
                if rng.random::<bool>() {
                    ProcessLabel::ThreePeak
                } else {
                    ProcessLabel::Gaussian
                }
            })
            .collect()
    };
    let mut specs = Vec::with_capacity(spec.k_processes);
    let mut gammas = Vec::with_capacity(spec.k_processes);
    for t in &types {
        let gamma = draw_gamma(spec.n, spec.sigma_gamma_sq(), &mut rng);
        let process = match t {
            ProcessLabel::ThreePeak => {
                ProcessSpec::three_peak(gamma.clone(), spec.sigma, spec.epsilon0)?
            }
            ProcessLabel::Gaussian => ProcessSpec::gaussian(spec.n, spec.sigma)?,
        };
        specs.push(process);
        gammas.push(gamma);
    }
    Ok(GameInstance {
        specs,
        types,
        gammas,
    })
}

/// Classifies one process from its records: three-peak iff
/// statistic(λ̃(γ)) > threshold. γ is the post-measurement revelation; the
/// hidden type plays no part here.
pub fn classify(
    records: &RecordBatch,
    gamma: &ComplexVec,
    r_eff: f64,
    threshold: f64,
    statistic: Statistic,
) -> Result<ProcessLabel> {
    let lambda = estimate_char_fn(records, gamma, r_eff)?;
    Ok(label_from_statistic(statistic.apply(lambda), threshold))
}

fn label_from_statistic(value: f64, threshold: f64) -> ProcessLabel {
    if value > threshold {
        ProcessLabel::ThreePeak
    } else {
        ProcessLabel::Gaussian
    }
}

/// Per-process measurement pools projected onto each process's γ, so the
/// estimator at β = γ is a b = 1 slice evaluation.
pub struct GamePools {
    pools: Vec<SlicePool>,
    /// Records per process available for resampling.
    pool_size: usize,
}

impl GamePools {
    /// Simulates `count` records per process under shared squeezing/drift.
    /// Per-process streams derive from (master seed, process index).
    pub fn simulate(
        instance: &GameInstance,
        squeezing: &SqueezingSpec,
        drift: &DriftModel,
        count: usize,
        master_seed: u64,
    ) -> Result<GamePools> {
        let pools = (0..instance.k())
            .map(|m| {
                let sub_seed: u64 = domain_rng(master_seed, Domain::Deal, 1 + m as u64).random();
                crate::reconstruction::simulate_slice_pool(
                    instance.spec(m),
                    squeezing,
                    drift,
                    instance.gamma(m),
                    count,
                    sub_seed,
                )
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(GamePools {
            pools,
            pool_size: count,
        })
    }

    /// Projects measured per-process record batches onto their γ directions.
    pub fn from_batches(batches: &[RecordBatch], instance: &GameInstance) -> Result<GamePools> {
        if batches.len() != instance.k() {
            return Err(Error::invalid("one record batch per process required"));
        }
        let identity = [[1.0, 0.0], [0.0, 1.0]];
        let pools = batches
            .iter()
            .zip(0..instance.k())
            .map(|(batch, m)| SlicePool::project(batch, instance.gamma(m), &identity))
            .collect::<Result<Vec<_>>>()?;
        let pool_size = pools.iter().map(SlicePool::len).min().unwrap_or(0);
        Ok(GamePools { pools, pool_size })
    }

    pub fn pool(&self, m: usize) -> &SlicePool {
        &self.pools[m]
    }

    pub fn len(&self) -> usize {
        self.pools.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pools.is_empty()
    }

    pub fn pool_size(&self) -> usize {
        self.pool_size
    }
}

/// One resampled statistic value for process `m`.
fn resample_statistic(
    pool: &SlicePool,
    n_samples: usize,
    r_eff: f64,
    statistic: Statistic,
    rng: &mut impl Rng,
) -> f64 {
    statistic.apply(pool.eval_at_resampled(1.0, r_eff, n_samples, rng))
}

/// Per-process scoring summary.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ProcessScore {
    /// Mean resampled statistic λ̄.
    pub stat_mean: f64,
    /// Standard deviation of the resampled statistic.
    pub stat_std: f64,
    /// CLT success probability (erf form), sign set by the true type.
    pub p: f64,
    /// Binomial uncertainty with the finite-pool factor, when defined.
    pub delta_p: Option<f64>,
    /// Fraction of the R classifications that were correct.
    pub raw_success: f64,
}

/// Game-level success summary.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GameScore {
    /// Average of the per-process CLT probabilities (P̄).
    pub p_bar: f64,
    /// Root-sum-square of per-process ΔP divided by K; None when N ≥ N_max.
    pub delta_p: Option<f64>,
    /// Raw correct-classification fraction over all processes × repeats.
    pub raw_success: f64,
    pub per_process: Vec<ProcessScore>,
}

/// Success probability of the game at resample size `n_samples`.
///
/// For each process, `repeats` resampled statistics give the mean λ̄ and
/// spread; the CLT probability of a correct guess is
/// ½ ± ½·erf((λ̄ − λ₀)/√(2·Var)) with the positive sign for three-peak truth.
/// ΔP is the binomial deviation √(P(1−P)/R) times the bootstrap factor
/// √(N/(N_max − N)), undefined (None) when N ≥ N_max. Raw counts saturate at
/// high squeezing, so the CLT form is the headline value; both are reported.
pub fn success_probability(
    instance: &GameInstance,
    pools: &GamePools,
    n_samples: usize,
    repeats: usize,
    spec: &GameSpec,
    r_eff: f64,
    master_seed: u64,
) -> Result<GameScore> {
    spec.validate()?;
    if pools.len() != instance.k() {
        return Err(Error::invalid("pool/instance size mismatch"));
    }
    if repeats < 2 {
        return Err(Error::invalid("repeats must be at least 2"));
    }
    if n_samples == 0 {
        return Err(Error::invalid("resample size must be at least 1"));
    }
    let pool_factor = if n_samples < pools.pool_size() {
        Some((n_samples as f64 / (pools.pool_size() - n_samples) as f64).sqrt())
    } else {
        None
    };
    let per_process: Vec<ProcessScore> = (0..instance.k())
        .into_par_iter()
        .map(|m| {
            let stats: Vec<f64> = (0..repeats)
                .map(|k| {
                    let mut rng =
                        domain_rng(master_seed, Domain::Resample, (m * repeats + k) as u64);
                    resample_statistic(pools.pool(m), n_samples, r_eff, spec.statistic, &mut rng)
                })
                .collect();
            let mean = stats.iter().sum::<f64>() / repeats as f64;
            let var =
                stats.iter().map(|s| (s - mean) * (s - mean)).sum::<f64>() / repeats as f64;
            let z = if var > 0.0 {
                (mean - spec.threshold) / (2.0 * var).sqrt()
            } else {
                (mean - spec.threshold).signum() * f64::INFINITY
            };
            let erf_z = libm::erf(z);
            let truth = instance.reveal_type(m);
            let p = match truth {
                ProcessLabel::ThreePeak => 0.5 + 0.5 * erf_z,
                ProcessLabel::Gaussian => 0.5 - 0.5 * erf_z,
            };
            let raw_success = stats
                .iter()
                .filter(|&&s| label_from_statistic(s, spec.threshold) == truth)
                .count() as f64
                / repeats as f64;
            ProcessScore {
                stat_mean: mean,
                stat_std: var.sqrt(),
                p,
                delta_p: pool_factor.map(|f| (p * (1.0 - p) / repeats as f64).sqrt() * f),
                raw_success,
            }
        })
        .collect();
    let k = instance.k() as f64;
    let p_bar = per_process.iter().map(|s| s.p).sum::<f64>() / k;
    let delta_p = per_process
        .iter()
        .map(|s| s.delta_p)
        .collect::<Option<Vec<f64>>>()
        .map(|dps| dps.iter().map(|d| d * d).sum::<f64>().sqrt() / k);
    let raw_success = per_process.iter().map(|s| s.raw_success).sum::<f64>() / k;
    Ok(GameScore {
        p_bar,
        delta_p,
        raw_success,
        per_process,
    })
}

/// Walk schedule of the game-complexity search; same recording semantics as
/// the reconstruction walk.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HypoWalk {
    pub repeats: usize,
    pub max_rounds: usize,
    pub keep_last: usize,
}

impl Default for HypoWalk {
    fn default() -> Self {
        HypoWalk {
            repeats: 25,
            max_rounds: 35,
            keep_last: 25,
        }
    }
}

impl HypoWalk {
    pub fn with_rounds(mut self, max_rounds: usize) -> Self {
        self.max_rounds = max_rounds;
        self
    }

    fn validate(&self) -> Result<()> {
        if self.repeats == 0 {
            return Err(Error::invalid("repeats must be at least 1"));
        }
        if self.max_rounds < 11 || self.keep_last == 0 || self.keep_last > self.max_rounds - 10 {
            return Err(Error::invalid(
                "walk needs max_rounds > 10 and keep_last ≤ max_rounds − 10",
            ));
        }
        Ok(())
    }
}

/// Samples-per-process needed to reach `p_target` game success.
///
/// The initial guess is the Hoeffding bound at the expected peak radius
/// |β₀|² = 0.99κn with error ε₀ and failure budget 1 − P_target; each round
/// scores K × repeats classifications at size N and multiplies N by e/3 when
/// the success fraction reaches the target and by e/2 otherwise.
pub fn sample_complexity_hypo(
    instance: &GameInstance,
    pools: &GamePools,
    spec: &GameSpec,
    walk: &HypoWalk,
    p_target: f64,
    r_eff: f64,
    master_seed: u64,
) -> Result<ComplexityEstimate> {
    spec.validate()?;
    walk.validate()?;
    if !(p_target > 0.0 && p_target < 1.0) {
        return Err(Error::invalid("P_target must lie in (0, 1)"));
    }
    if pools.len() != instance.k() {
        return Err(Error::invalid("pool/instance size mismatch"));
    }
    let mut n = hoeffding_upper(
        r_eff,
        spec.expected_gamma_sq(),
        spec.epsilon0,
        1.0 - p_target,
    )?
    .value;
    let mut recorded = Vec::new();
    let mut pool_exhausted = false;
    for round in 1..=walk.max_rounds {
        let n_samples = (n.round() as usize).max(1);
        pool_exhausted |= n_samples > pools.pool_size();
        let trials: Vec<(usize, usize)> = (0..instance.k())
            .flat_map(|m| (0..walk.repeats).map(move |k| (m, k)))
            .collect();
        let correct: usize = trials
            .par_iter()
            .map(|&(m, k)| {
                let stream = ((round * instance.k() + m) * walk.repeats + k) as u64;
                let mut rng = domain_rng(master_seed, Domain::Resample, stream);
                let stat =
                    resample_statistic(pools.pool(m), n_samples, r_eff, spec.statistic, &mut rng);
                usize::from(label_from_statistic(stat, spec.threshold) == instance.reveal_type(m))
            })
            .sum();
        let prob_now = correct as f64 / (instance.k() * walk.repeats) as f64;
        if prob_now >= p_target {
            n *= std::f64::consts::E / 3.0;
        } else {
            n *= std::f64::consts::E / 2.0;
        }
        if round > 10 {
            recorded.push(n);
        }
    }
    let trail: Vec<f64> = recorded
        .iter()
        .skip(recorded.len() - walk.keep_last)
        .copied()
        .collect();
    let mean_n = trail.iter().sum::<f64>() / trail.len() as f64;
    let std_n = (trail
        .iter()
        .map(|v| (v - mean_n) * (v - mean_n))
        .sum::<f64>()
        / trail.len() as f64)
        .sqrt();
    Ok(ComplexityEstimate {
        mean_n,
        std_n,
        trail,
        pool_exhausted,
    })
}
