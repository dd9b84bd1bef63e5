//! (ε,δ)-close reconstruction checking and Monte Carlo determination of the
//! reconstruction sample complexity.
//!
//! The sample-complexity search starts from the Hoeffding bound and walks N
//! multiplicatively: resample K subsets of size N from the measured pool,
//! score the fraction that reconstructs the slice ε-close, then shrink N by
//! e/3 when the success fraction reaches 1 − δ and grow it by e/2 otherwise.
//! Rounds after the tenth are recorded and the last `keep_last` of them form
//! the reported trail. The update constants and round structure are kept
//! exactly as printed in the source protocol; no adaptive refinement is
//! layered on top, to preserve comparability.
//!
//! Truth curves are evaluated from the closed-form characteristic function,
//! never from a high-N empirical run, so the oracle side carries no Monte
//! Carlo noise.

use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bounds::hoeffding_upper;
use crate::complex_vec::ComplexVec;
use crate::error::{Error, Result};
use crate::estimator::{BGrid, SlicePool};
use crate::measurement::{simulate_records_with, DriftModel, RecordBatch, SqueezingSpec};
use crate::process::ProcessSpec;
use crate::seeding::{domain_rng, Domain, SIM_CHUNK};

/// Rounds skipped before the walk is considered near its fixed point.
const RECORD_AFTER: usize = 10;

/// Tuning of the (ε,δ)-close reconstruction experiments.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReconSpec {
    /// Sup-norm accuracy ε of a successful reconstruction.
    pub epsilon: f64,
    /// Allowed failure probability δ.
    pub delta: f64,
    /// Slice extent: the peak sits at b = b_max along the peak direction.
    pub b_max: f64,
    /// Mesh size of the closeness grid in b.
    pub grid_step: f64,
    /// Resamples per round (K).
    pub repeats: usize,
    /// Multiplicative-walk rounds.
    pub max_rounds: usize,
    /// Trail length kept from the recorded rounds.
    pub keep_last: usize,
}

impl Default for ReconSpec {
    fn default() -> Self {
        ReconSpec {
            epsilon: 0.24,
            delta: 1.0 / 3.0,
            b_max: 0.3,
            grid_step: 0.01,
            repeats: 25,
            max_rounds: 35,
            keep_last: 25,
        }
    }
}

impl ReconSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            return Err(Error::invalid("epsilon must lie in (0, 1)"));
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(Error::invalid("delta must lie in (0, 1)"));
        }
        if !(self.b_max > 0.0 && self.grid_step > 0.0) {
            return Err(Error::invalid("b_max and grid_step must be positive"));
        }
        if self.repeats == 0 {
            return Err(Error::invalid("repeats must be at least 1"));
        }
        if self.max_rounds < RECORD_AFTER + 1 || self.keep_last == 0 {
            return Err(Error::invalid(
                "max_rounds must exceed the 10 warm-up rounds",
            ));
        }
        if self.keep_last > self.max_rounds - RECORD_AFTER {
            return Err(Error::invalid("keep_last must be at most max_rounds − 10"));
        }
        Ok(())
    }

    /// Longer walk with the same recording semantics, for runs whose initial
    /// guess sits far above the fixed point.
    pub fn with_rounds(mut self, max_rounds: usize) -> Self {
        self.max_rounds = max_rounds;
        self
    }

    pub fn grid(&self) -> Result<BGrid> {
        BGrid::to_radius(self.b_max, self.grid_step)
    }
}

/// Output of the multiplicative-walk complexity search.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComplexityEstimate {
    /// Mean sample count over the trail (N̄).
    pub mean_n: f64,
    /// Plain standard deviation of the trail; see [`complexity_uncertainty`]
    /// for the finite-pool corrected ΔN.
    pub std_n: f64,
    /// The last `keep_last` recorded per-round values.
    pub trail: Vec<f64>,
    /// Set when some round resampled more records than the pool holds;
    /// resampling with replacement proceeds regardless.
    pub pool_exhausted: bool,
}

/// Sup-norm closeness of an estimated curve to the truth on a shared grid:
/// true iff |curve_i − truth_i| < ε at every grid point (strict).
pub fn eps_close_check(
    curve: &[(f64, Complex64)],
    truth: &[Complex64],
    epsilon: f64,
) -> Result<bool> {
    if curve.len() != truth.len() {
        return Err(Error::invalid(format!(
            "curve has {} points, truth has {}",
            curve.len(),
            truth.len()
        )));
    }
    if curve.is_empty() {
        return Err(Error::invalid("empty closeness grid"));
    }
    Ok(curve
        .iter()
        .zip(truth)
        .all(|(&(_, est), &lam)| (est - lam).norm() < epsilon))
}

/// Finite-pool correction of the trail spread:
/// ΔN = √(N_max/(N_max − N̄)) · std(trail). Undefined when N̄ ≥ N_max.
pub fn complexity_uncertainty(trail: &[f64], n_max: usize) -> Result<f64> {
    if trail.is_empty() {
        return Err(Error::invalid("empty trail"));
    }
    let mean = trail.iter().sum::<f64>() / trail.len() as f64;
    if mean >= n_max as f64 {
        return Err(Error::invalid(
            "finite-pool correction undefined for N̄ ≥ N_max",
        ));
    }
    let std = population_std(trail, mean);
    Ok((n_max as f64 / (n_max as f64 - mean)).sqrt() * std)
}

fn population_std(values: &[f64], mean: f64) -> f64 {
    (values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / values.len() as f64).sqrt()
}

/// The slice direction pointing at the three-peak process's peak, scaled so
/// that b = b_max lands exactly on γ.
pub fn peak_direction(truth: &ProcessSpec, b_max: f64) -> Result<ComplexVec> {
    match truth {
        ProcessSpec::ThreePeak(s) => {
            if s.gamma().norm_sq() == 0.0 {
                return Err(Error::invalid("three-peak process with zero γ has no peak"));
            }
            Ok(s.gamma().scale(Complex64::new(1.0 / b_max, 0.0)))
        }
        _ => Err(Error::UnsupportedVariant(
            "peak direction requires a three-peak truth".into(),
        )),
    }
}

/// Exact truth curve λ(b·direction) on the given grid.
pub fn truth_on_slice(
    truth: &ProcessSpec,
    direction: &ComplexVec,
    grid: &BGrid,
) -> Result<Vec<Complex64>> {
    grid.values()
        .map(|b| truth.char_fn(&direction.scale(Complex64::new(b, 0.0))))
        .collect()
}

/// One resample's ε-closeness verdict: draws `n_samples` indices with
/// replacement and checks the reconstructed slice against the truth. The
/// grid endpoint carries the largest prefactor and fails earliest, so it is
/// checked before the full grid is evaluated.
fn resample_close(
    pool: &SlicePool,
    grid: &BGrid,
    truth: &[Complex64],
    epsilon: f64,
    r_eff: f64,
    n_samples: usize,
    rng: &mut rand_chacha::ChaCha8Rng,
) -> bool {
    if grid.len() > 1 {
        // cloning the generator replays the same index draws for the full pass
        let mut peek = rng.clone();
        let last = pool.eval_at_resampled(grid.last(), r_eff, n_samples, &mut peek);
        if (last - truth[truth.len() - 1]).norm() >= epsilon {
            return false;
        }
    }
    let curve = pool.eval_grid_resampled(grid, r_eff, n_samples, rng);
    eps_close_check(&curve, truth, epsilon).expect("grid lengths match")
}

/// Success fraction over `spec.repeats` resamples of size `n_samples`.
/// Resamples run concurrently on independent streams derived from
/// (`master_seed`, `stream_base` + k).
fn success_fraction(
    pool: &SlicePool,
    grid: &BGrid,
    truth: &[Complex64],
    spec: &ReconSpec,
    r_eff: f64,
    n_samples: usize,
    master_seed: u64,
    stream_base: u64,
) -> f64 {
    let successes: usize = (0..spec.repeats)
        .into_par_iter()
        .map(|k| {
            let mut rng = domain_rng(master_seed, Domain::Resample, stream_base + k as u64);
            usize::from(resample_close(
                pool, grid, truth, spec.epsilon, r_eff, n_samples, &mut rng,
            ))
        })
        .sum();
    successes as f64 / spec.repeats as f64
}

/// Fraction of `spec.repeats` resamples of size `n_samples` that reconstruct
/// the slice ε-close to `truth` (evaluated on `spec`'s grid).
pub fn slice_success_fraction(
    pool: &SlicePool,
    spec: &ReconSpec,
    truth: &[Complex64],
    r_eff: f64,
    n_samples: usize,
    master_seed: u64,
) -> Result<f64> {
    spec.validate()?;
    let grid = spec.grid()?;
    if truth.len() != grid.len() {
        return Err(Error::invalid("truth grid length mismatch"));
    }
    if n_samples == 0 {
        return Err(Error::invalid("resample size must be at least 1"));
    }
    Ok(success_fraction(
        pool, &grid, truth, spec, r_eff, n_samples, master_seed, 0,
    ))
}

/// Multiplicative-walk complexity search over a projected slice pool.
///
/// `truth` must be the exact characteristic function on `spec`'s grid for the
/// same direction the pool was projected on.
pub fn slice_complexity(
    pool: &SlicePool,
    spec: &ReconSpec,
    truth: &[Complex64],
    r_eff: f64,
    master_seed: u64,
) -> Result<ComplexityEstimate> {
    spec.validate()?;
    let grid = spec.grid()?;
    if truth.len() != grid.len() {
        return Err(Error::invalid("truth grid length mismatch"));
    }
    let beta0_sq = pool.dir_norm_sq() * spec.b_max * spec.b_max;
    let mut n = hoeffding_upper(r_eff, beta0_sq, spec.epsilon, spec.delta)?.value;
    let mut recorded: Vec<f64> = Vec::new();
    let mut pool_exhausted = false;
    for round in 1..=spec.max_rounds {
        let n_samples = (n.round() as usize).max(1);
        pool_exhausted |= n_samples > pool.len();
        let stream_base = (round * spec.repeats) as u64;
        let prob_now = success_fraction(
            pool,
            &grid,
            truth,
            spec,
            r_eff,
            n_samples,
            master_seed,
            stream_base,
        );
        if prob_now >= 1.0 - spec.delta {
            n *= std::f64::consts::E / 3.0;
        } else {
            n *= std::f64::consts::E / 2.0;
        }
        if round > RECORD_AFTER {
            recorded.push(n);
        }
    }
    let trail: Vec<f64> = recorded
        .iter()
        .skip(recorded.len() - spec.keep_last)
        .copied()
        .collect();
    let mean_n = trail.iter().sum::<f64>() / trail.len() as f64;
    let std_n = population_std(&trail, mean_n);
    Ok(ComplexityEstimate {
        mean_n,
        std_n,
        trail,
        pool_exhausted,
    })
}

/// Sample complexity of (ε,δ)-close reconstruction along the peak-direction
/// slice, from a pool of measured records.
pub fn sample_complexity_recon(
    records: &RecordBatch,
    spec: &ReconSpec,
    truth: &ProcessSpec,
    r_eff: f64,
    master_seed: u64,
) -> Result<ComplexityEstimate> {
    spec.validate()?;
    let direction = peak_direction(truth, spec.b_max)?;
    let pool = SlicePool::project(records, &direction, &[[1.0, 0.0], [0.0, 1.0]])?;
    let grid = spec.grid()?;
    let truth_curve = truth_on_slice(truth, &direction, &grid)?;
    slice_complexity(&pool, spec, &truth_curve, r_eff, master_seed)
}

/// Streams `count` simulated records through the slice projection without
/// materializing the batch. Chunking and streams match
/// [`crate::measurement::simulate_bell_batch`], so the pool is bit-identical
/// to projecting the equivalent batch.
pub fn simulate_slice_pool(
    process: &ProcessSpec,
    squeezing: &SqueezingSpec,
    drift: &DriftModel,
    direction: &ComplexVec,
    count: usize,
    master_seed: u64,
) -> Result<SlicePool> {
    if count == 0 {
        return Err(Error::invalid("record count must be at least 1"));
    }
    let chunks: Vec<(usize, usize)> = (0..count)
        .step_by(SIM_CHUNK)
        .map(|start| (start, (count - start).min(SIM_CHUNK)))
        .collect();
    let parts: Vec<Vec<f64>> = chunks
        .par_iter()
        .map(|&(start, len)| {
            let mut rng = domain_rng(master_seed, Domain::Simulate, (start / SIM_CHUNK) as u64);
            let batch =
                simulate_records_with(process, squeezing, drift, len, start as u64, &mut rng);
            let pool = SlicePool::project(&batch, direction, &[[1.0, 0.0], [0.0, 1.0]])
                .expect("chunk is non-empty");
            pool.unit_phases().to_vec()
        })
        .collect();
    let mut unit_phase = Vec::with_capacity(count);
    for part in parts {
        unit_phase.extend(part);
    }
    SlicePool::from_parts(unit_phase, direction.norm_sq())
}

/// One point of the direction sweep.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SweepPoint {
    pub overlap: f64,
    pub success: f64,
    pub stderr: f64,
}

/// Fresh directions sampled per overlap value in [`direction_sweep`].
pub const SWEEP_DIRECTIONS: usize = 4;

/// Builds a direction with prescribed real overlap ⟨d̂₀|d̂⟩ = c against the
/// peak direction, norm-matched to it. Overlap 0 requests a uniformly random
/// direction (whose overlap vanishes only as n grows).
fn overlap_direction(d0: &ComplexVec, overlap: f64, rng: &mut impl Rng) -> Result<ComplexVec> {
    use rand_distr::StandardNormal;
    if !(0.0..=1.0).contains(&overlap) {
        return Err(Error::invalid("overlap must lie in [0, 1]"));
    }
    let scale = d0.norm();
    let d0_hat = d0.normalized()?;
    if overlap == 1.0 {
        return Ok(d0.clone());
    }
    let raw: Vec<Complex64> = (0..d0.len())
        .map(|_| {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            Complex64::new(re, im)
        })
        .collect();
    let w = ComplexVec::new(raw)?;
    if overlap == 0.0 {
        return Ok(w.normalized()?.scale(Complex64::new(scale, 0.0)));
    }
    // remove the d̂₀ component, renormalize, then mix
    let proj = d0_hat.dagger_dot(&w)?;
    let w_perp = w.add(&d0_hat.scale(-proj))?.normalized()?;
    let mixed = d0_hat
        .scale(Complex64::new(overlap, 0.0))
        .add(&w_perp.scale(Complex64::new((1.0 - overlap * overlap).sqrt(), 0.0)))?;
    Ok(mixed.scale(Complex64::new(scale, 0.0)))
}

/// Success probability of (ε,δ)-close reconstruction along directions of
/// prescribed overlap with the peak direction, at fixed resample size.
///
/// For each overlap, [`SWEEP_DIRECTIONS`] fresh directions are drawn and the
/// success fraction is aggregated over directions × repeats; the standard
/// error is the binomial one.
pub fn direction_sweep(
    records: &RecordBatch,
    truth: &ProcessSpec,
    overlaps: &[f64],
    n_samples: usize,
    spec: &ReconSpec,
    r_eff: f64,
    master_seed: u64,
) -> Result<Vec<SweepPoint>> {
    spec.validate()?;
    if n_samples == 0 {
        return Err(Error::invalid("resample size must be at least 1"));
    }
    let d0 = peak_direction(truth, spec.b_max)?;
    let grid = spec.grid()?;
    let mut out = Vec::with_capacity(overlaps.len());
    for (oi, &overlap) in overlaps.iter().enumerate() {
        let mut successes = 0usize;
        let mut total = 0usize;
        for rep in 0..SWEEP_DIRECTIONS {
            let mut dir_rng = domain_rng(
                master_seed,
                Domain::Sweep,
                (oi * SWEEP_DIRECTIONS + rep) as u64,
            );
            let direction = overlap_direction(&d0, overlap, &mut dir_rng)?;
            let pool = SlicePool::project(records, &direction, &[[1.0, 0.0], [0.0, 1.0]])?;
            let truth_curve = truth_on_slice(truth, &direction, &grid)?;
            let sub_seed: u64 = dir_rng.random();
            let frac = success_fraction(
                &pool,
                &grid,
                &truth_curve,
                spec,
                r_eff,
                n_samples,
                sub_seed,
                0,
            );
            successes += (frac * spec.repeats as f64).round() as usize;
            total += spec.repeats;
        }
        let success = successes as f64 / total as f64;
        let stderr = (success * (1.0 - success) / total as f64).sqrt();
        out.push(SweepPoint {
            overlap,
            success,
            stderr,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn flat_curve(n: usize, value: Complex64) -> Vec<(f64, Complex64)> {
        (0..n).map(|i| (i as f64 * 0.01, value)).collect()
    }

    #[test]
    fn eps_close_check_boundary_is_strict() {
        let truth = vec![Complex64::ZERO; 3];
        let exact = flat_curve(3, Complex64::ZERO);
        assert!(eps_close_check(&exact, &truth, 0.24).unwrap());
        // one point deviating by exactly ε → false
        let mut boundary = exact.clone();
        boundary[1].1 = Complex64::new(0.24, 0.0);
        assert!(!eps_close_check(&boundary, &truth, 0.24).unwrap());
        let inside = flat_curve(3, Complex64::new(0.2399, 0.0));
        assert!(eps_close_check(&inside, &truth, 0.24).unwrap());
    }

    #[test]
    fn eps_close_check_rejects_mismatched_grids() {
        let truth = vec![Complex64::ZERO; 2];
        assert!(eps_close_check(&flat_curve(3, Complex64::ZERO), &truth, 0.1).is_err());
    }

    #[test]
    fn uncertainty_trivial_cases() {
        assert_eq!(
            complexity_uncertainty(&[50.0, 50.0, 50.0], 1000).unwrap(),
            0.0
        );
        // N_max → ∞ leaves the plain std
        let trail = [90.0, 100.0, 110.0];
        let plain = population_std(&trail, 100.0);
        assert_relative_eq!(
            complexity_uncertainty(&trail, usize::MAX).unwrap(),
            plain,
            max_relative = 1e-9
        );
    }

    #[test]
    fn uncertainty_hand_value() {
        // trail {90,100,110}, N_max = 200: √2 · √(200/3)
        let dn = complexity_uncertainty(&[90.0, 100.0, 110.0], 200).unwrap();
        assert_relative_eq!(dn, 11.5470053838, max_relative = 1e-9);
    }

    #[test]
    fn uncertainty_rejects_exhausted_pool() {
        assert!(complexity_uncertainty(&[300.0, 300.0], 200).is_err());
    }

    #[test]
    fn recon_spec_validation() {
        assert!(ReconSpec::default().validate().is_ok());
        assert!(ReconSpec {
            keep_last: 26,
            ..ReconSpec::default()
        }
        .validate()
        .is_err());
        assert!(ReconSpec {
            epsilon: 0.0,
            ..ReconSpec::default()
        }
        .validate()
        .is_err());
        assert!(ReconSpec::default().with_rounds(60).validate().is_ok());
    }

    #[test]
    fn peak_direction_hits_gamma_at_b_max() {
        let gamma = ComplexVec::constant(4, Complex64::new(0.3, 0.3));
        let truth = ProcessSpec::three_peak(gamma.clone(), 0.3, 0.25).unwrap();
        let d = peak_direction(&truth, 0.3).unwrap();
        let at_peak = d.scale(Complex64::new(0.3, 0.0));
        assert_relative_eq!(at_peak.dist_sq(&gamma).unwrap(), 0.0, epsilon = 1e-24);
        assert!(peak_direction(&ProcessSpec::gaussian(4, 0.3).unwrap(), 0.3).is_err());
    }

    #[test]
    fn streaming_pool_matches_batch_projection() {
        let process = ProcessSpec::gaussian(3, 0.3).unwrap();
        let squeezing = SqueezingSpec::ideal(2.26);
        let drift = DriftModel::identity();
        let direction = ComplexVec::constant(3, Complex64::new(1.0, 1.0));
        let streamed =
            simulate_slice_pool(&process, &squeezing, &drift, &direction, 10_000, 17).unwrap();
        let batch =
            crate::measurement::simulate_bell_batch(&process, &squeezing, &drift, 10_000, 17)
                .unwrap();
        let projected = SlicePool::project(&batch, &direction, &[[1.0, 0.0], [0.0, 1.0]]).unwrap();
        assert_eq!(streamed.unit_phases(), projected.unit_phases());
    }

    #[test]
    fn slice_complexity_is_seed_deterministic() {
        let gamma = ComplexVec::constant(2, Complex64::new(0.3, 0.3));
        let truth = ProcessSpec::three_peak(gamma, 0.3, 0.25).unwrap();
        let records = crate::measurement::simulate_bell_batch(
            &truth,
            &SqueezingSpec::ideal(4.78),
            &DriftModel::identity(),
            20_000,
            23,
        )
        .unwrap();
        let spec = ReconSpec {
            repeats: 10,
            max_rounds: 15,
            keep_last: 5,
            ..ReconSpec::default()
        };
        let r_eff = SqueezingSpec::ideal(4.78).effective_squeezing();
        let a = sample_complexity_recon(&records, &spec, &truth, r_eff, 99).unwrap();
        let b = sample_complexity_recon(&records, &spec, &truth, r_eff, 99).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.trail.len(), 5);
        assert!(a.mean_n > 0.0);
    }

    #[test]
    fn overlap_direction_has_prescribed_inner_product() {
        let d0 = ComplexVec::constant(8, Complex64::new(1.0, 1.0));
        let mut rng = domain_rng(5, Domain::Sweep, 0);
        for c in [0.4, 0.6, 0.95] {
            let d = overlap_direction(&d0, c, &mut rng).unwrap();
            assert_relative_eq!(d.norm(), d0.norm(), max_relative = 1e-12);
            let ip = d0
                .normalized()
                .unwrap()
                .dagger_dot(&d.normalized().unwrap())
                .unwrap();
            assert_relative_eq!(ip.re, c, max_relative = 1e-10);
            assert_relative_eq!(ip.im, 0.0, epsilon = 1e-10);
        }
        let d = overlap_direction(&d0, 1.0, &mut rng).unwrap();
        assert_eq!(d, d0);
    }
}
