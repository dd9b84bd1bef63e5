//! Bell-measurement record simulation under squeezing, loss, and drift.
//!
//! The probe of each mode is one arm of a two-mode squeezed vacuum; Bell
//! outcomes are packaged as ζ = x + ip per mode. Losses fold into an
//! effective squeezing parameter r_eff, and the Bell noise is modeled at the
//! outcome level as additive complex Gaussian noise with per-quadrature
//! variance exp(−2·r_eff)/2 — the unique additive-Gaussian law for which the
//! characteristic-function estimator is unbiased. The unbiasedness oracle in
//! the test suite pins this law down.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::complex_vec::ComplexVec;
use crate::error::{Error, Result};
use crate::process::ProcessSpec;
use crate::seeding::{domain_rng, Domain, SIM_CHUNK};

/// Squeezing level (in dB of noise reduction) and transmissivity T_a of the
/// path between displacement and Bell measurement.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SqueezingSpec {
    squeezing_db: f64,
    transmissivity: f64,
}

impl SqueezingSpec {
    pub fn new(squeezing_db: f64, transmissivity: f64) -> Result<Self> {
        if squeezing_db < 0.0 || squeezing_db.is_nan() {
            return Err(Error::invalid("squeezing_db must be nonnegative"));
        }
        if !(transmissivity > 0.0 && transmissivity <= 1.0) {
            return Err(Error::invalid("transmissivity must lie in (0, 1]"));
        }
        Ok(SqueezingSpec {
            squeezing_db,
            transmissivity,
        })
    }

    /// Lossless squeezing of the given level.
    pub fn ideal(squeezing_db: f64) -> Self {
        SqueezingSpec::new(squeezing_db, 1.0).expect("valid ideal spec")
    }

    /// No squeezing, no loss: the heterodyne (entanglement-free) limit.
    pub fn vacuum() -> Self {
        SqueezingSpec::ideal(0.0)
    }

    pub fn squeezing_db(&self) -> f64 {
        self.squeezing_db
    }

    pub fn transmissivity(&self) -> f64 {
        self.transmissivity
    }

    /// exp(−2·r_eff) = 10^(−dB/10) + (1 − T_a)/T_a, computed without the
    /// log/exp round trip.
    pub fn noise_factor(&self) -> f64 {
        let e2r = 10f64.powf(-self.squeezing_db / 10.0);
        e2r + (1.0 - self.transmissivity) / self.transmissivity
    }

    /// Effective squeezing after loss: r_eff = −½ log(e^(−2r) + (1−T_a)/T_a).
    /// Always r_eff ≤ r, with equality iff T_a = 1.
    pub fn effective_squeezing(&self) -> f64 {
        -0.5 * self.noise_factor().ln()
    }
}

/// Standalone form of [`SqueezingSpec::effective_squeezing`].
pub fn effective_squeezing(squeezing: &SqueezingSpec) -> f64 {
    squeezing.effective_squeezing()
}

/// One global 2×2 distortion applied to every mode's (x, p) displacement
/// pair, plus a multiplier on the Bell noise.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DriftModel {
    /// Row-major 2×2 matrix; columns are the images of unit x / unit p.
    affine: [[f64; 2]; 2],
    /// Scales the Bell-noise variance; 1 is the calibrated level.
    noise_scale: f64,
}

impl DriftModel {
    pub fn new(affine: [[f64; 2]; 2], noise_scale: f64) -> Result<Self> {
        if !affine.iter().flatten().all(|x| x.is_finite()) {
            return Err(Error::invalid("affine entries must be finite"));
        }
        if det2(&affine).abs() <= 0.0 {
            return Err(Error::invalid("affine matrix must be invertible"));
        }
        if !(noise_scale >= 0.0 && noise_scale.is_finite()) {
            return Err(Error::invalid("noise_scale must be nonnegative"));
        }
        Ok(DriftModel {
            affine,
            noise_scale,
        })
    }

    pub fn identity() -> Self {
        DriftModel {
            affine: [[1.0, 0.0], [0.0, 1.0]],
            noise_scale: 1.0,
        }
    }

    /// Pure phase-space rotation by `theta` radians.
    pub fn rotation(theta: f64) -> Self {
        let (s, c) = theta.sin_cos();
        DriftModel {
            affine: [[c, -s], [s, c]],
            noise_scale: 1.0,
        }
    }

    pub fn affine(&self) -> &[[f64; 2]; 2] {
        &self.affine
    }

    pub fn noise_scale(&self) -> f64 {
        self.noise_scale
    }

    pub fn with_noise_scale(mut self, noise_scale: f64) -> Result<Self> {
        if !(noise_scale >= 0.0 && noise_scale.is_finite()) {
            return Err(Error::invalid("noise_scale must be nonnegative"));
        }
        self.noise_scale = noise_scale;
        Ok(self)
    }

    /// Applies the affine map to one mode's displacement (Re, Im) pair.
    pub fn apply(&self, a: Complex64) -> Complex64 {
        let a_mat = &self.affine;
        Complex64::new(
            a_mat[0][0] * a.re + a_mat[0][1] * a.im,
            a_mat[1][0] * a.re + a_mat[1][1] * a.im,
        )
    }
}

fn det2(m: &[[f64; 2]; 2]) -> f64 {
    m[0][0] * m[1][1] - m[0][1] * m[1][0]
}

/// Inverts a 2×2 matrix, rejecting singular input.
pub fn invert2(m: &[[f64; 2]; 2]) -> Result<[[f64; 2]; 2]> {
    let det = det2(m);
    if det == 0.0 || !det.is_finite() {
        return Err(Error::invalid("singular affine matrix"));
    }
    Ok([
        [m[1][1] / det, -m[0][1] / det],
        [-m[1][0] / det, m[0][0] / det],
    ])
}

/// Provenance tag of a record: ordinary data or an injected pilot.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PilotTag {
    None,
    PilotX,
    PilotP,
}

impl PilotTag {
    pub fn is_pilot(self) -> bool {
        self != PilotTag::None
    }

    pub fn as_str(self) -> &'static str {
        match self {
            PilotTag::None => "none",
            PilotTag::PilotX => "pilot_x",
            PilotTag::PilotP => "pilot_p",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "none" => Ok(PilotTag::None),
            "pilot_x" => Ok(PilotTag::PilotX),
            "pilot_p" => Ok(PilotTag::PilotP),
            other => Err(Error::invalid(format!("unknown pilot tag {other:?}"))),
        }
    }
}

/// One sample's n complex Bell outcomes plus provenance metadata.
#[derive(Clone, Debug, PartialEq)]
pub struct BellRecord {
    pub zeta: ComplexVec,
    pub sample_index: u64,
    pub pilot: PilotTag,
}

/// Column-compact storage for a batch of records sharing one mode count.
///
/// Outcomes are kept in a single row-major buffer so million-record pools
/// stay cache-friendly; [`BellRecord`] views are materialized on demand.
#[derive(Clone, Debug, PartialEq)]
pub struct RecordBatch {
    n: usize,
    zeta: Vec<Complex64>,
    pilot: Vec<PilotTag>,
    sample_index: Vec<u64>,
}

impl RecordBatch {
    pub fn with_capacity(n: usize, records: usize) -> Self {
        assert!(n >= 1, "mode count must be at least 1");
        RecordBatch {
            n,
            zeta: Vec::with_capacity(n * records),
            pilot: Vec::with_capacity(records),
            sample_index: Vec::with_capacity(records),
        }
    }

    pub fn from_records(records: Vec<BellRecord>) -> Result<Self> {
        let n = records
            .first()
            .map(|r| r.zeta.len())
            .ok_or_else(|| Error::invalid("empty record list"))?;
        let mut batch = RecordBatch::with_capacity(n, records.len());
        for r in records {
            batch.push(&r)?;
        }
        Ok(batch)
    }

    pub fn push(&mut self, record: &BellRecord) -> Result<()> {
        if record.zeta.len() != self.n {
            return Err(Error::invalid("record mode count mismatch"));
        }
        self.zeta.extend_from_slice(record.zeta.as_slice());
        self.pilot.push(record.pilot);
        self.sample_index.push(record.sample_index);
        Ok(())
    }

    fn push_raw(&mut self, zeta: &[Complex64], pilot: PilotTag, sample_index: u64) {
        debug_assert_eq!(zeta.len(), self.n);
        self.zeta.extend_from_slice(zeta);
        self.pilot.push(pilot);
        self.sample_index.push(sample_index);
    }

    pub fn len(&self) -> usize {
        self.pilot.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pilot.is_empty()
    }

    pub fn modes(&self) -> usize {
        self.n
    }

    pub fn zeta_row(&self, i: usize) -> &[Complex64] {
        &self.zeta[i * self.n..(i + 1) * self.n]
    }

    pub fn pilot(&self, i: usize) -> PilotTag {
        self.pilot[i]
    }

    pub fn sample_index(&self, i: usize) -> u64 {
        self.sample_index[i]
    }

    pub fn record(&self, i: usize) -> BellRecord {
        BellRecord {
            zeta: ComplexVec::new(self.zeta_row(i).to_vec()).expect("stored rows are valid"),
            sample_index: self.sample_index[i],
            pilot: self.pilot[i],
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = BellRecord> + '_ {
        (0..self.len()).map(|i| self.record(i))
    }

    pub fn pilot_count(&self) -> usize {
        self.pilot.iter().filter(|t| t.is_pilot()).count()
    }

    pub fn data_count(&self) -> usize {
        self.len() - self.pilot_count()
    }
}

/// Per-quadrature Bell noise standard deviation for a given configuration.
fn bell_noise_std(squeezing: &SqueezingSpec, drift: &DriftModel) -> f64 {
    (squeezing.noise_factor() / 2.0 * drift.noise_scale()).sqrt()
}

fn simulate_record<R: Rng + ?Sized>(
    process: &ProcessSpec,
    drift: &DriftModel,
    noise_std: f64,
    rng: &mut R,
) -> Vec<Complex64> {
    let alpha = process.sample_displacement(rng);
    displace_and_measure(alpha.as_slice(), drift, noise_std, rng)
}

/// Drift acts on the displacement first; Bell noise is added afterwards.
fn displace_and_measure<R: Rng + ?Sized>(
    alpha: &[Complex64],
    drift: &DriftModel,
    noise_std: f64,
    rng: &mut R,
) -> Vec<Complex64> {
    alpha
        .iter()
        .map(|&a| {
            let d = drift.apply(a);
            let nr: f64 = StandardNormal.sample(rng);
            let ni: f64 = StandardNormal.sample(rng);
            Complex64::new(d.re + nr * noise_std, d.im + ni * noise_std)
        })
        .collect()
}

/// Simulates `count` records from one explicit RNG stream, indexing them
/// from `base_index`. This is the single-stream building block behind
/// [`simulate_bell_batch`]; streaming consumers drive it chunk by chunk with
/// [`crate::seeding::domain_rng`] streams to reproduce the batch layout
/// without materializing it.
pub fn simulate_records_with<R: Rng + ?Sized>(
    process: &ProcessSpec,
    squeezing: &SqueezingSpec,
    drift: &DriftModel,
    count: usize,
    base_index: u64,
    rng: &mut R,
) -> RecordBatch {
    let n = process.modes();
    let noise_std = bell_noise_std(squeezing, drift);
    let mut batch = RecordBatch::with_capacity(n, count);
    for i in 0..count {
        let zeta = simulate_record(process, drift, noise_std, rng);
        batch.push_raw(&zeta, PilotTag::None, base_index + i as u64);
    }
    batch
}

/// Simulates `count` Bell records of the process under the given squeezing
/// and drift. Work is chunked with one RNG stream per chunk, so the output is
/// identical for a fixed master seed regardless of thread count; records are
/// ordered by sample index.
pub fn simulate_bell_batch(
    process: &ProcessSpec,
    squeezing: &SqueezingSpec,
    drift: &DriftModel,
    count: usize,
    master_seed: u64,
) -> Result<RecordBatch> {
    if count == 0 {
        return Err(Error::invalid("record count must be at least 1"));
    }
    let n = process.modes();
    let noise_std = bell_noise_std(squeezing, drift);
    let chunks: Vec<(usize, usize)> = (0..count)
        .step_by(SIM_CHUNK)
        .map(|start| (start, (count - start).min(SIM_CHUNK)))
        .collect();
    let parts: Vec<Vec<Complex64>> = chunks
        .par_iter()
        .map(|&(start, len)| {
            let mut rng = domain_rng(master_seed, Domain::Simulate, (start / SIM_CHUNK) as u64);
            let mut buf = Vec::with_capacity(len * n);
            for _ in 0..len {
                buf.extend(simulate_record(process, drift, noise_std, &mut rng));
            }
            buf
        })
        .collect();

    let mut batch = RecordBatch::with_capacity(n, count);
    let mut index = 0u64;
    for part in parts {
        for row in part.chunks_exact(n) {
            batch.push_raw(row, PilotTag::None, index);
            index += 1;
        }
    }
    Ok(batch)
}

/// Interleaves pilot records through the same drift and noise law.
///
/// One pilot occupies every `period`-th output position, alternating between
/// a (amplitude, 0) displacement on every mode (tagged pilot_x) and a
/// (0, amplitude) displacement (tagged pilot_p). Ordinary records keep their
/// values; indices are reassigned to stream order.
pub fn inject_pilots(
    records: &RecordBatch,
    period: usize,
    amplitude: f64,
    master_seed: u64,
    squeezing: &SqueezingSpec,
    drift: &DriftModel,
) -> Result<RecordBatch> {
    if period < 2 {
        return Err(Error::invalid("pilot period must be at least 2"));
    }
    if !(amplitude > 0.0 && amplitude.is_finite()) {
        return Err(Error::invalid("pilot amplitude must be positive"));
    }
    let n = records.modes();
    let noise_std = bell_noise_std(squeezing, drift);
    let total = records.len() + records.len().div_ceil(period - 1);
    let mut out = RecordBatch::with_capacity(n, total);
    let mut rng = domain_rng(master_seed, Domain::Pilot, 0);
    let mut data_i = 0usize;
    let mut pilot_ordinal = 0usize;
    let mut pos = 0u64;
    while data_i < records.len() {
        if pos as usize % period == 0 {
            let (tag, alpha) = if pilot_ordinal % 2 == 0 {
                (PilotTag::PilotX, Complex64::new(amplitude, 0.0))
            } else {
                (PilotTag::PilotP, Complex64::new(0.0, amplitude))
            };
            let zeta = displace_and_measure(&vec![alpha; n], drift, noise_std, &mut rng);
            out.push_raw(&zeta, tag, pos);
            pilot_ordinal += 1;
        } else {
            out.push_raw(records.zeta_row(data_i), records.pilot(data_i), pos);
            data_i += 1;
        }
        pos += 1;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn effective_squeezing_lossless_is_r() {
        for db in [0.0, 2.26, 4.78] {
            let s = SqueezingSpec::ideal(db);
            let r = -0.5 * 10f64.powf(-db / 10.0).ln();
            assert_relative_eq!(s.effective_squeezing(), r, max_relative = 1e-12);
        }
    }

    #[test]
    fn effective_squeezing_infinite_squeezing_loss_floor() {
        // e^{-2r} -> 0, so r_eff = -0.5 ln(0.25)
        let s = SqueezingSpec::new(f64::INFINITY, 0.8).unwrap();
        assert_relative_eq!(s.effective_squeezing(), -0.5 * 0.25f64.ln(), max_relative = 1e-12);
        assert_relative_eq!(s.effective_squeezing(), 0.6931471805599453, max_relative = 1e-10);
    }

    #[test]
    fn noise_factor_db_conversion() {
        let s = SqueezingSpec::ideal(4.78);
        assert_relative_eq!(s.noise_factor(), 0.33266, max_relative = 1e-4);
        assert_relative_eq!(
            (-2.0 * s.effective_squeezing()).exp(),
            10f64.powf(-0.478),
            max_relative = 1e-12
        );
    }

    #[test]
    fn squeezing_rejects_bad_transmissivity() {
        assert!(SqueezingSpec::new(3.0, 0.0).is_err());
        assert!(SqueezingSpec::new(3.0, -0.2).is_err());
        assert!(SqueezingSpec::new(3.0, 1.2).is_err());
        assert!(SqueezingSpec::new(-1.0, 0.9).is_err());
    }

    #[test]
    fn drift_rejects_singular_affine() {
        assert!(DriftModel::new([[1.0, 2.0], [2.0, 4.0]], 1.0).is_err());
        assert!(DriftModel::new([[f64::NAN, 0.0], [0.0, 1.0]], 1.0).is_err());
    }

    #[test]
    fn rotation_matrix_acts_as_expected() {
        let theta = 10f64.to_radians();
        let d = DriftModel::rotation(theta);
        let out = d.apply(Complex64::new(10.0, 0.0));
        assert_relative_eq!(out.re, 10.0 * theta.cos(), max_relative = 1e-12);
        assert_relative_eq!(out.im, 10.0 * theta.sin(), max_relative = 1e-12);
    }

    #[test]
    fn invert2_round_trips() {
        let m = [[1.1, 0.3], [-0.2, 0.9]];
        let inv = invert2(&m).unwrap();
        let prod = [
            [
                m[0][0] * inv[0][0] + m[0][1] * inv[1][0],
                m[0][0] * inv[0][1] + m[0][1] * inv[1][1],
            ],
            [
                m[1][0] * inv[0][0] + m[1][1] * inv[1][0],
                m[1][0] * inv[0][1] + m[1][1] * inv[1][1],
            ],
        ];
        assert_relative_eq!(prod[0][0], 1.0, epsilon = 1e-12);
        assert_relative_eq!(prod[1][1], 1.0, epsilon = 1e-12);
        assert_relative_eq!(prod[0][1], 0.0, epsilon = 1e-12);
        assert_relative_eq!(prod[1][0], 0.0, epsilon = 1e-12);
    }

    #[test]
    fn zero_noise_fixed_process_reproduces_alpha() {
        let alpha0 = ComplexVec::constant(3, Complex64::new(0.7, -0.2));
        let process = ProcessSpec::fixed(alpha0.clone());
        let squeezing = SqueezingSpec::new(f64::INFINITY, 1.0).unwrap();
        let batch = simulate_bell_batch(
            &process,
            &squeezing,
            &DriftModel::identity(),
            10,
            7,
        )
        .unwrap();
        for rec in batch.iter() {
            assert_eq!(rec.zeta, alpha0);
            assert_eq!(rec.pilot, PilotTag::None);
        }
    }

    #[test]
    fn batch_is_seed_deterministic_and_ordered() {
        let process = ProcessSpec::gaussian(2, 0.3).unwrap();
        let squeezing = SqueezingSpec::vacuum();
        let a = simulate_bell_batch(&process, &squeezing, &DriftModel::identity(), 100, 5).unwrap();
        let b = simulate_bell_batch(&process, &squeezing, &DriftModel::identity(), 100, 5).unwrap();
        let c = simulate_bell_batch(&process, &squeezing, &DriftModel::identity(), 100, 6).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert!((0..a.len()).all(|i| a.sample_index(i) == i as u64));
    }

    #[test]
    fn pilot_ratio_matches_period() {
        let process = ProcessSpec::gaussian(1, 0.3).unwrap();
        let squeezing = SqueezingSpec::vacuum();
        let drift = DriftModel::identity();
        let batch = simulate_bell_batch(&process, &squeezing, &drift, 99_800, 3).unwrap();
        let with_pilots = inject_pilots(&batch, 500, 10.0, 3, &squeezing, &drift).unwrap();
        let ratio = with_pilots.pilot_count() as f64 / with_pilots.len() as f64;
        assert_relative_eq!(ratio, 0.002, max_relative = 1e-2);
        assert_eq!(with_pilots.data_count(), batch.len());
    }

    #[test]
    fn noiseless_pilots_sit_at_their_displacement() {
        let process = ProcessSpec::fixed(ComplexVec::zeros(2));
        let squeezing = SqueezingSpec::new(f64::INFINITY, 1.0).unwrap();
        let drift = DriftModel::identity();
        let batch = simulate_bell_batch(&process, &squeezing, &drift, 20, 1).unwrap();
        let with_pilots = inject_pilots(&batch, 2, 10.0, 1, &squeezing, &drift).unwrap();
        for rec in with_pilots.iter() {
            match rec.pilot {
                PilotTag::PilotX => {
                    assert_eq!(rec.zeta, ComplexVec::constant(2, Complex64::new(10.0, 0.0)))
                }
                PilotTag::PilotP => {
                    assert_eq!(rec.zeta, ComplexVec::constant(2, Complex64::new(0.0, 10.0)))
                }
                PilotTag::None => assert_eq!(rec.zeta, ComplexVec::zeros(2)),
            }
        }
    }

    #[test]
    fn pilot_period_must_be_at_least_two() {
        let process = ProcessSpec::gaussian(1, 0.3).unwrap();
        let squeezing = SqueezingSpec::vacuum();
        let drift = DriftModel::identity();
        let batch = simulate_bell_batch(&process, &squeezing, &drift, 10, 1).unwrap();
        assert!(inject_pilots(&batch, 1, 10.0, 1, &squeezing, &drift).is_err());
    }
}
