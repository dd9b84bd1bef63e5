//! Unbiased characteristic-function estimation from Bell records.
//!
//! The plug-in estimator is
//!
//! ```text
//! λ̃(β) = (1/N) Σ_i exp(e^(−2·r_eff)·|β|²) · exp(ζ⁽ⁱ⁾†β − β†ζ⁽ⁱ⁾)
//! ```
//!
//! with the sum running over non-pilot records. Every summand has modulus
//! exactly exp(e^(−2·r_eff)·|β|²), which is what makes the estimator diverge
//! at large |β|² when N is too small.
//!
//! Drift correction maps β through the dual of the measured distortion (per
//! mode, on the (Re, Im) pair) in both the prefactor and the phase; with
//! A = I this reduces bit-identically to the plain estimator. The prefactor
//! exponent stays e^(−2·r_eff) in the corrected form — the identity-affine
//! reduction forces the factor of 2.
//!
//! Sums are accumulated in fixed-size chunks ([`crate::seeding::SUM_CHUNK`])
//! that are pairwise-reduced in index order, so results are reproducible
//! across thread counts.

use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;

use crate::complex_vec::ComplexVec;
use crate::error::{Error, Result};
use crate::measurement::RecordBatch;
use crate::seeding::SUM_CHUNK;

/// Pairwise reduction of per-chunk partial sums, in index order.
fn pairwise_sum(mut parts: Vec<Complex64>) -> Complex64 {
    if parts.is_empty() {
        return Complex64::ZERO;
    }
    while parts.len() > 1 {
        parts = parts
            .chunks(2)
            .map(|pair| pair.iter().sum())
            .collect();
    }
    parts[0]
}

/// Dual-space correction matrix for a record-space distortion A.
///
/// Bell phases pair records and dual points through the symplectic form
/// ω(ζ, β) = Im(ζ†β), and a 2×2 map satisfies ω(Aα, Aβ) = det(A)·ω(α, β).
/// The β-transform C that undoes ζ = Aα + ν is therefore C = A/det(A)
/// (ω(Aα, Cβ) = ω(α, β)), which coincides with A⁻¹ for the identity and for
/// isotropic scalings but differs for rotations and shears. The Monte Carlo
/// unbiasedness oracle fixes this choice.
pub fn dual_correction(affine: &[[f64; 2]; 2]) -> Result<[[f64; 2]; 2]> {
    let det = affine[0][0] * affine[1][1] - affine[0][1] * affine[1][0];
    if det == 0.0 || !det.is_finite() {
        return Err(Error::invalid("singular affine matrix"));
    }
    Ok([
        [affine[0][0] / det, affine[0][1] / det],
        [affine[1][0] / det, affine[1][1] / det],
    ])
}

/// Applies a 2×2 matrix to each mode's (Re, Im) pair of `beta`.
fn transform_beta(matrix: &[[f64; 2]; 2], beta: &ComplexVec) -> ComplexVec {
    let components = beta
        .iter()
        .map(|b| {
            Complex64::new(
                matrix[0][0] * b.re + matrix[0][1] * b.im,
                matrix[1][0] * b.re + matrix[1][1] * b.im,
            )
        })
        .collect();
    ComplexVec::new(components).expect("finite affine image")
}

fn is_identity(m: &[[f64; 2]; 2]) -> bool {
    *m == [[1.0, 0.0], [0.0, 1.0]]
}

/// Mean unit phasor (1/N) Σ exp(ζ⁽ⁱ⁾†β − β†ζ⁽ⁱ⁾) over non-pilot records.
fn mean_phasor(records: &RecordBatch, beta: &ComplexVec) -> Result<(Complex64, usize)> {
    if beta.len() != records.modes() {
        return Err(Error::invalid(format!(
            "beta has {} modes, records have {}",
            beta.len(),
            records.modes()
        )));
    }
    let data: Vec<usize> = (0..records.len())
        .filter(|&i| !records.pilot(i).is_pilot())
        .collect();
    if data.is_empty() {
        return Err(Error::invalid("no non-pilot records to estimate from"));
    }
    let parts: Vec<Complex64> = data
        .par_chunks(SUM_CHUNK)
        .map(|chunk| {
            chunk
                .iter()
                .map(|&i| {
                    // ζ†β − β†ζ = 2i·Im(ζ†β)
                    let phase: f64 = 2.0
                        * records
                            .zeta_row(i)
                            .iter()
                            .zip(beta.iter())
                            .map(|(z, b)| z.conj() * b)
                            .sum::<Complex64>()
                            .im;
                    Complex64::from_polar(1.0, phase)
                })
                .sum()
        })
        .collect();
    Ok((pairwise_sum(parts) / data.len() as f64, data.len()))
}

/// The unbiased estimator λ̃(β) at effective squeezing `r_eff`.
///
/// Pilot-tagged records are excluded; an empty record set is rejected.
pub fn estimate_char_fn(records: &RecordBatch, beta: &ComplexVec, r_eff: f64) -> Result<Complex64> {
    let (mean, _) = mean_phasor(records, beta)?;
    let prefactor = ((-2.0 * r_eff).exp() * beta.norm_sq()).exp();
    Ok(mean * prefactor)
}

/// Drift-corrected estimator: β is mapped through [`dual_correction`] of the
/// measured affine matrix in both the prefactor and the phase.
///
/// With `affine` exactly the identity this is bit-identical to
/// [`estimate_char_fn`]; a singular matrix is rejected.
pub fn estimate_char_fn_corrected(
    records: &RecordBatch,
    beta: &ComplexVec,
    r_eff: f64,
    affine: &[[f64; 2]; 2],
) -> Result<Complex64> {
    if is_identity(affine) {
        return estimate_char_fn(records, beta, r_eff);
    }
    let dual = dual_correction(affine)?;
    estimate_char_fn(records, &transform_beta(&dual, beta), r_eff)
}

/// Pilot-based estimate of the affine drift matrix.
///
/// Columns are the mean pilot_x and pilot_p outcomes (averaged over records
/// and modes) divided by the injected amplitude; undistorted noiseless pilots
/// give the identity.
pub fn estimate_affine(records: &RecordBatch, amplitude: f64) -> Result<[[f64; 2]; 2]> {
    if !(amplitude > 0.0 && amplitude.is_finite()) {
        return Err(Error::invalid("pilot amplitude must be positive"));
    }
    let mut sum_x = Complex64::ZERO;
    let mut sum_p = Complex64::ZERO;
    let mut count_x = 0usize;
    let mut count_p = 0usize;
    for i in 0..records.len() {
        let tag = records.pilot(i);
        if !tag.is_pilot() {
            continue;
        }
        let mode_mean: Complex64 =
            records.zeta_row(i).iter().sum::<Complex64>() / records.modes() as f64;
        match tag {
            crate::measurement::PilotTag::PilotX => {
                sum_x += mode_mean;
                count_x += 1;
            }
            crate::measurement::PilotTag::PilotP => {
                sum_p += mode_mean;
                count_p += 1;
            }
            crate::measurement::PilotTag::None => unreachable!(),
        }
    }
    if count_x == 0 || count_p == 0 {
        return Err(Error::invalid(
            "affine estimation needs at least one pilot_x and one pilot_p record",
        ));
    }
    let mx = sum_x / (count_x as f64 * amplitude);
    let mp = sum_p / (count_p as f64 * amplitude);
    Ok([[mx.re, mp.re], [mx.im, mp.im]])
}

/// Per-record slice projections for fast estimator evaluation along a ray
/// β(b) = b·direction.
///
/// ζ†β − β†ζ is linear in b, so one scalar per record (the phase at b = 1,
/// drift correction already folded in) supports the whole slice.
#[derive(Clone, Debug)]
pub struct SlicePool {
    /// 2·Im(ζ†d′) per data record, d′ the drift-corrected direction.
    unit_phase: Vec<f64>,
    /// |d′|², the prefactor scale.
    dir_norm_sq: f64,
}

impl SlicePool {
    /// Projects non-pilot records onto the (drift-corrected) direction.
    pub fn project(
        records: &RecordBatch,
        direction: &ComplexVec,
        affine: &[[f64; 2]; 2],
    ) -> Result<SlicePool> {
        if direction.len() != records.modes() {
            return Err(Error::invalid("direction mode count mismatch"));
        }
        if direction.norm_sq() == 0.0 {
            return Err(Error::invalid("slice direction must be nonzero"));
        }
        let dir = if is_identity(affine) {
            direction.clone()
        } else {
            transform_beta(&dual_correction(affine)?, direction)
        };
        let unit_phase: Vec<f64> = (0..records.len())
            .filter(|&i| !records.pilot(i).is_pilot())
            .map(|i| {
                2.0 * records
                    .zeta_row(i)
                    .iter()
                    .zip(dir.iter())
                    .map(|(z, d)| z.conj() * d)
                    .sum::<Complex64>()
                    .im
            })
            .collect();
        if unit_phase.is_empty() {
            return Err(Error::invalid("no non-pilot records to project"));
        }
        Ok(SlicePool {
            unit_phase,
            dir_norm_sq: dir.norm_sq(),
        })
    }

    /// Builds a pool directly from precomputed per-record phases.
    pub fn from_parts(unit_phase: Vec<f64>, dir_norm_sq: f64) -> Result<SlicePool> {
        if unit_phase.is_empty() {
            return Err(Error::invalid("empty slice pool"));
        }
        if !(dir_norm_sq > 0.0 && dir_norm_sq.is_finite()) {
            return Err(Error::invalid("direction norm must be positive"));
        }
        Ok(SlicePool {
            unit_phase,
            dir_norm_sq,
        })
    }

    pub fn len(&self) -> usize {
        self.unit_phase.len()
    }

    pub fn is_empty(&self) -> bool {
        self.unit_phase.is_empty()
    }

    pub fn dir_norm_sq(&self) -> f64 {
        self.dir_norm_sq
    }

    pub fn unit_phases(&self) -> &[f64] {
        &self.unit_phase
    }

    /// Estimator prefactor exp(e^(−2·r_eff)·|b·d′|²) at slice position b.
    pub fn prefactor(&self, b: f64, r_eff: f64) -> f64 {
        ((-2.0 * r_eff).exp() * self.dir_norm_sq * b * b).exp()
    }

    /// Evaluates λ̃ on a uniform b-grid for the records selected by `pick`
    /// (None means all records). One pass over the records; the phasor at
    /// successive grid points advances by a per-record complex rotation.
    pub fn eval_grid(
        &self,
        grid: &BGrid,
        r_eff: f64,
        pick: Option<&[usize]>,
    ) -> Vec<(f64, Complex64)> {
        let sums = match pick {
            Some(idx) => self.phasor_sums(grid, idx),
            None => {
                let all: Vec<usize> = (0..self.len()).collect();
                self.phasor_sums(grid, &all)
            }
        };
        let count = pick.map_or(self.len(), <[usize]>::len) as f64;
        grid.values()
            .zip(sums)
            .map(|(b, s)| (b, s / count * self.prefactor(b, r_eff)))
            .collect()
    }

    /// Unnormalized phasor sums Σ exp(i·b·u) for each grid point.
    fn phasor_sums(&self, grid: &BGrid, pick: &[usize]) -> Vec<Complex64> {
        let parts: Vec<Vec<Complex64>> = pick
            .par_chunks(SUM_CHUNK)
            .map(|chunk| {
                let mut acc = vec![Complex64::ZERO; grid.len()];
                for &i in chunk {
                    let u = self.unit_phase[i];
                    let mut z = Complex64::from_polar(1.0, grid.start * u);
                    let step = Complex64::from_polar(1.0, grid.step * u);
                    for a in acc.iter_mut() {
                        *a += z;
                        z *= step;
                    }
                }
                acc
            })
            .collect();
        // pairwise-reduce the chunk partials per grid point, in index order
        (0..grid.len())
            .map(|g| pairwise_sum(parts.iter().map(|p| p[g]).collect()))
            .collect()
    }

    /// λ̃ at a single slice position for the records selected by `pick`.
    pub fn eval_at(&self, b: f64, r_eff: f64, pick: &[usize]) -> Complex64 {
        let parts: Vec<Complex64> = pick
            .par_chunks(SUM_CHUNK)
            .map(|chunk| {
                chunk
                    .iter()
                    .map(|&i| Complex64::from_polar(1.0, b * self.unit_phase[i]))
                    .sum()
            })
            .collect();
        pairwise_sum(parts) / pick.len() as f64 * self.prefactor(b, r_eff)
    }

    /// λ̃ at one slice position over a with-replacement resample of size
    /// `n_samples`, drawing indices from `rng` on the fly. Same chunked
    /// pairwise reduction as the pick-based path, without materializing the
    /// index list.
    pub fn eval_at_resampled(
        &self,
        b: f64,
        r_eff: f64,
        n_samples: usize,
        rng: &mut impl Rng,
    ) -> Complex64 {
        let mut parts = Vec::with_capacity(n_samples.div_ceil(SUM_CHUNK));
        let mut remaining = n_samples;
        while remaining > 0 {
            let take = remaining.min(SUM_CHUNK);
            let mut acc = Complex64::ZERO;
            for _ in 0..take {
                let i = rng.random_range(0..self.len());
                acc += Complex64::from_polar(1.0, b * self.unit_phase[i]);
            }
            parts.push(acc);
            remaining -= take;
        }
        pairwise_sum(parts) / n_samples as f64 * self.prefactor(b, r_eff)
    }

    /// λ̃ on a uniform grid over a with-replacement resample of size
    /// `n_samples`, drawing indices from `rng` on the fly.
    pub fn eval_grid_resampled(
        &self,
        grid: &BGrid,
        r_eff: f64,
        n_samples: usize,
        rng: &mut impl Rng,
    ) -> Vec<(f64, Complex64)> {
        let chunks = n_samples.div_ceil(SUM_CHUNK);
        let mut parts: Vec<Vec<Complex64>> = Vec::with_capacity(chunks);
        let mut remaining = n_samples;
        while remaining > 0 {
            let take = remaining.min(SUM_CHUNK);
            let mut acc = vec![Complex64::ZERO; grid.len()];
            for _ in 0..take {
                let u = self.unit_phase[rng.random_range(0..self.len())];
                let mut z = Complex64::from_polar(1.0, grid.start * u);
                let step = Complex64::from_polar(1.0, grid.step * u);
                for a in acc.iter_mut() {
                    *a += z;
                    z *= step;
                }
            }
            parts.push(acc);
            remaining -= take;
        }
        let count = n_samples as f64;
        grid.values()
            .enumerate()
            .map(|(g, b)| {
                let sum = pairwise_sum(parts.iter().map(|p| p[g]).collect());
                (b, sum / count * self.prefactor(b, r_eff))
            })
            .collect()
    }
}

/// A uniform grid b = start, start+step, ..., with `count` points.
#[derive(Clone, Copy, Debug)]
pub struct BGrid {
    pub start: f64,
    pub step: f64,
    pub count: usize,
}

impl BGrid {
    /// Grid over [0, b_max] with the given step (b_max included).
    pub fn to_radius(b_max: f64, step: f64) -> Result<BGrid> {
        if !(b_max >= 0.0 && step > 0.0) {
            return Err(Error::invalid("grid needs b_max ≥ 0 and step > 0"));
        }
        Ok(BGrid {
            start: 0.0,
            step,
            count: (b_max / step).round() as usize + 1,
        })
    }

    pub fn len(&self) -> usize {
        self.count
    }

    pub fn is_empty(&self) -> bool {
        self.count == 0
    }

    pub fn values(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.count).map(move |i| self.start + self.step * i as f64)
    }

    pub fn last(&self) -> f64 {
        self.start + self.step * (self.count.saturating_sub(1)) as f64
    }
}

/// Evaluates the (drift-corrected) estimator at β = b·direction for each b.
///
/// Grid values must be nonnegative and ascending; the direction must be
/// nonzero. Output is one (b, λ̃) pair per grid value.
pub fn reconstruct_slice(
    records: &RecordBatch,
    direction: &ComplexVec,
    b_grid: &[f64],
    r_eff: f64,
    affine: &[[f64; 2]; 2],
) -> Result<Vec<(f64, Complex64)>> {
    if b_grid.is_empty() {
        return Err(Error::invalid("empty b grid"));
    }
    if b_grid.iter().any(|&b| b < 0.0 || !b.is_finite()) {
        return Err(Error::invalid("grid values must be nonnegative and finite"));
    }
    let pool = SlicePool::project(records, direction, affine)?;
    let pick: Vec<usize> = (0..pool.len()).collect();
    Ok(b_grid
        .iter()
        .map(|&b| (b, pool.eval_at(b, r_eff, &pick)))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measurement::{
        inject_pilots, simulate_bell_batch, BellRecord, DriftModel, PilotTag, SqueezingSpec,
    };
    use crate::process::ProcessSpec;
    use approx::assert_relative_eq;

    fn single_record(zeta: ComplexVec) -> RecordBatch {
        RecordBatch::from_records(vec![BellRecord {
            zeta,
            sample_index: 0,
            pilot: PilotTag::None,
        }])
        .unwrap()
    }

    #[test]
    fn single_zero_record_gives_pure_prefactor() {
        // N=1, ζ=0, r_eff=0, |β|²=1 → e
        let records = single_record(ComplexVec::zeros(1));
        let beta = ComplexVec::new(vec![Complex64::new(1.0, 0.0)]).unwrap();
        let lam = estimate_char_fn(&records, &beta, 0.0).unwrap();
        assert_relative_eq!(lam.re, std::f64::consts::E, max_relative = 1e-12);
        assert_eq!(lam.im, 0.0);
    }

    #[test]
    fn conjugate_symmetry_is_exact() {
        let process = ProcessSpec::gaussian(3, 0.3).unwrap();
        let records = simulate_bell_batch(
            &process,
            &SqueezingSpec::vacuum(),
            &DriftModel::identity(),
            500,
            11,
        )
        .unwrap();
        let beta = ComplexVec::new(vec![
            Complex64::new(0.2, -0.4),
            Complex64::new(-0.1, 0.3),
            Complex64::new(0.5, 0.05),
        ])
        .unwrap();
        let plus = estimate_char_fn(&records, &beta, 0.2).unwrap();
        let minus = estimate_char_fn(&records, &beta.neg(), 0.2).unwrap();
        assert_eq!(minus, plus.conj());
    }

    #[test]
    fn summand_modulus_is_the_prefactor() {
        let records = single_record(ComplexVec::new(vec![Complex64::new(1.3, -0.8)]).unwrap());
        let beta = ComplexVec::new(vec![Complex64::new(0.4, 0.9)]).unwrap();
        for r_eff in [0.0, 0.26, 0.55] {
            let lam = estimate_char_fn(&records, &beta, r_eff).unwrap();
            let bound = ((-2.0f64 * r_eff).exp() * beta.norm_sq()).exp();
            assert_relative_eq!(lam.norm(), bound, max_relative = 1e-12);
        }
    }

    #[test]
    fn corrected_with_identity_is_bit_identical() {
        let process = ProcessSpec::gaussian(2, 0.3).unwrap();
        let records = simulate_bell_batch(
            &process,
            &SqueezingSpec::ideal(4.78),
            &DriftModel::identity(),
            1000,
            3,
        )
        .unwrap();
        let beta = ComplexVec::new(vec![Complex64::new(0.3, 0.3), Complex64::new(-0.2, 0.6)])
            .unwrap();
        let plain = estimate_char_fn(&records, &beta, 0.55).unwrap();
        let corrected =
            estimate_char_fn_corrected(&records, &beta, 0.55, &[[1.0, 0.0], [0.0, 1.0]]).unwrap();
        assert_eq!(plain, corrected);
    }

    #[test]
    fn corrected_rejects_singular_affine() {
        let records = single_record(ComplexVec::zeros(1));
        let beta = ComplexVec::zeros(1);
        assert!(
            estimate_char_fn_corrected(&records, &beta, 0.0, &[[1.0, 1.0], [1.0, 1.0]]).is_err()
        );
    }

    #[test]
    fn noiseless_pilots_give_identity_affine() {
        let process = ProcessSpec::fixed(ComplexVec::zeros(2));
        let squeezing = SqueezingSpec::new(f64::INFINITY, 1.0).unwrap();
        let drift = DriftModel::identity();
        let data = simulate_bell_batch(&process, &squeezing, &drift, 40, 1).unwrap();
        let with_pilots = inject_pilots(&data, 2, 10.0, 1, &squeezing, &drift).unwrap();
        let affine = estimate_affine(&with_pilots, 10.0).unwrap();
        for (row, expect) in affine.iter().zip([[1.0, 0.0], [0.0, 1.0]]) {
            for (a, e) in row.iter().zip(expect) {
                assert_relative_eq!(a, &e, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn affine_estimation_requires_both_pilot_classes() {
        let records = single_record(ComplexVec::zeros(1));
        assert!(estimate_affine(&records, 10.0).is_err());
    }

    #[test]
    fn pilots_are_excluded_from_estimation() {
        let zeros = ProcessSpec::fixed(ComplexVec::zeros(1));
        let squeezing = SqueezingSpec::new(f64::INFINITY, 1.0).unwrap();
        let drift = DriftModel::identity();
        let data = simulate_bell_batch(&zeros, &squeezing, &drift, 10, 1).unwrap();
        let with_pilots = inject_pilots(&data, 2, 10.0, 1, &squeezing, &drift).unwrap();
        let beta = ComplexVec::new(vec![Complex64::new(0.0, 0.5)]).unwrap();
        // all data ζ = 0 → λ̃ = prefactor exactly, pilots would shift the phase
        let lam = estimate_char_fn(&with_pilots, &beta, 0.0).unwrap();
        assert_relative_eq!(lam.re, 0.25f64.exp(), max_relative = 1e-12);
        assert_relative_eq!(lam.im, 0.0, epsilon = 1e-12);
    }

    #[test]
    fn slice_matches_pointwise_estimator() {
        let process = ProcessSpec::gaussian(2, 0.3).unwrap();
        let records = simulate_bell_batch(
            &process,
            &SqueezingSpec::vacuum(),
            &DriftModel::identity(),
            2000,
            9,
        )
        .unwrap();
        let direction = ComplexVec::constant(2, Complex64::new(1.0, 1.0));
        let grid: Vec<f64> = (0..=30).map(|i| i as f64 * 0.01).collect();
        let slice = reconstruct_slice(
            &records,
            &direction,
            &grid,
            0.0,
            &[[1.0, 0.0], [0.0, 1.0]],
        )
        .unwrap();
        for &(b, lam) in &[slice[0], slice[15], slice[30]] {
            let beta = direction.scale(Complex64::new(b, 0.0));
            let point = estimate_char_fn(&records, &beta, 0.0).unwrap();
            assert_relative_eq!(lam.re, point.re, epsilon = 1e-9);
            assert_relative_eq!(lam.im, point.im, epsilon = 1e-9);
        }
    }

    #[test]
    fn slice_at_zero_is_plain_phase_average() {
        let process = ProcessSpec::gaussian(1, 0.3).unwrap();
        let records = simulate_bell_batch(
            &process,
            &SqueezingSpec::vacuum(),
            &DriftModel::identity(),
            100,
            2,
        )
        .unwrap();
        let direction = ComplexVec::constant(1, Complex64::new(1.0, 1.0));
        let slice = reconstruct_slice(
            &records,
            &direction,
            &[0.0],
            0.7,
            &[[1.0, 0.0], [0.0, 1.0]],
        )
        .unwrap();
        // b = 0: unit prefactor regardless of r_eff, mean of unit phasors at β=0 is 1
        assert_relative_eq!(slice[0].1.re, 1.0, max_relative = 1e-12);
        assert_relative_eq!(slice[0].1.im, 0.0, epsilon = 1e-12);
    }

    #[test]
    fn grid_eval_matches_eval_at() {
        let process = ProcessSpec::gaussian(1, 0.3).unwrap();
        let records = simulate_bell_batch(
            &process,
            &SqueezingSpec::ideal(2.26),
            &DriftModel::identity(),
            3000,
            4,
        )
        .unwrap();
        let direction = ComplexVec::constant(1, Complex64::new(1.0, 1.0));
        let pool = SlicePool::project(&records, &direction, &[[1.0, 0.0], [0.0, 1.0]]).unwrap();
        let grid = BGrid::to_radius(0.3, 0.01).unwrap();
        let evals = pool.eval_grid(&grid, 0.3, None);
        assert_eq!(evals.len(), 31);
        let pick: Vec<usize> = (0..pool.len()).collect();
        for &(b, lam) in &[evals[0], evals[10], evals[30]] {
            let single = pool.eval_at(b, 0.3, &pick);
            assert_relative_eq!(lam.re, single.re, epsilon = 1e-9);
            assert_relative_eq!(lam.im, single.im, epsilon = 1e-9);
        }
    }
}
