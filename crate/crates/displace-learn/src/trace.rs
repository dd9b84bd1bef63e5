//! Time-domain layer: temporal mode functions, quadrature extraction from
//! homodyne traces, synthetic trace generation, delay estimation, and
//! modulator-crosstalk calibration.
//!
//! A temporal mode k is a sideband cosine under a Gaussian envelope,
//! truncated to a window of one mode duration around t = kτ; windows of
//! neighboring modes are disjoint, so the discretized mode functions are
//! exactly orthogonal. Quadratures are rectangle-rule integrals of the
//! homodyne trace weighted by the mode function; at the default 100 MS/s the
//! 3.8 MHz sideband is oversampled ~26×, so the mode function is sampled
//! directly rather than band-limited-resampled.

use num_complex::Complex64;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::seeding::{domain_rng, Domain};

/// Default digitizer rate; the source hardware's rate is not pinned, this is
/// an artifact default and stays configurable.
pub const DEFAULT_SAMPLE_RATE_HZ: f64 = 100e6;

/// Temporal mode function parameters.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModeFunctionSpec {
    /// Sideband frequency f_sb of the cosine carrier.
    pub sideband_hz: f64,
    /// Gaussian envelope bandwidth κ (rad/s).
    pub envelope_kappa_rad_s: f64,
    /// Mode duration τ; the window is |t − kτ| < τ/2.
    pub mode_duration_s: f64,
}

impl Default for ModeFunctionSpec {
    fn default() -> Self {
        ModeFunctionSpec {
            sideband_hz: 3.8e6,
            envelope_kappa_rad_s: 2.0 * std::f64::consts::PI * 1e6,
            mode_duration_s: 1e-6,
        }
    }
}

impl ModeFunctionSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.sideband_hz > 0.0 && self.envelope_kappa_rad_s > 0.0
            && self.mode_duration_s > 0.0)
        {
            return Err(Error::invalid("mode function parameters must be positive"));
        }
        if self.envelope_fwhm_s() >= self.mode_duration_s {
            return Err(Error::invalid(
                "envelope FWHM must fit inside the mode duration",
            ));
        }
        Ok(())
    }

    /// Full width at half maximum of the Gaussian envelope: 2√(2 ln 2)/κ.
    pub fn envelope_fwhm_s(&self) -> f64 {
        2.0 * (2.0 * std::f64::consts::LN_2).sqrt() / self.envelope_kappa_rad_s
    }
}

/// The truncated Gaussian-windowed cosine
/// f_k(t) = cos(2π·f_sb·(t − kτ))·exp(−½κ²(t − kτ)²) for |t − kτ| < τ/2,
/// exactly 0 outside the window.
pub fn mode_function(spec: &ModeFunctionSpec, k: usize, t: f64) -> f64 {
    let dt = t - k as f64 * spec.mode_duration_s;
    if dt.abs() >= spec.mode_duration_s / 2.0 {
        return 0.0;
    }
    let kappa_dt = spec.envelope_kappa_rad_s * dt;
    (2.0 * std::f64::consts::PI * spec.sideband_hz * dt).cos() * (-0.5 * kappa_dt * kappa_dt).exp()
}

/// A continuously sampled homodyne quadrature trace.
#[derive(Clone, Debug, PartialEq)]
pub struct TimeTrace {
    pub sample_rate_hz: f64,
    /// Homodyne voltage in arbitrary units before vacuum normalization.
    pub samples: Vec<f64>,
    /// Time of the first sample.
    pub t0_offset_s: f64,
}

impl TimeTrace {
    pub fn validate(&self, spec: &ModeFunctionSpec) -> Result<()> {
        if self.sample_rate_hz < 10.0 * spec.sideband_hz {
            return Err(Error::invalid(
                "sample rate must be at least 10× the sideband frequency",
            ));
        }
        if !self.samples.iter().all(|s| s.is_finite()) {
            return Err(Error::invalid("trace samples must be finite"));
        }
        Ok(())
    }

    pub fn duration_s(&self) -> f64 {
        self.samples.len() as f64 / self.sample_rate_hz
    }

    fn time_of(&self, i: usize) -> f64 {
        self.t0_offset_s + i as f64 / self.sample_rate_hz
    }
}

/// Sample-grid count of one mode window.
fn window_samples(spec: &ModeFunctionSpec, fs: f64) -> usize {
    (spec.mode_duration_s * fs).round() as usize
}

/// Sample index range of mode k's window on the grid starting at `t0`, or
/// None when the window does not fit in `len` samples. Synthesis and
/// extraction share this so matched-filter recovery is exact.
fn mode_window(
    spec: &ModeFunctionSpec,
    fs: f64,
    t0: f64,
    delay_s: f64,
    k: usize,
    len: usize,
) -> Option<std::ops::Range<usize>> {
    let tau = spec.mode_duration_s;
    let lo = k as f64 * tau + delay_s - tau / 2.0;
    // half-sample nudge so windows landing exactly on a sample stay aligned
    let start = ((lo - t0) * fs - 1e-6).ceil();
    if start < 0.0 {
        return None;
    }
    let i_lo = start as usize;
    let i_hi = i_lo + window_samples(spec, fs);
    (i_hi <= len).then_some(i_lo..i_hi)
}

/// Extracts one quadrature per complete mode window:
/// q_k = vacuum_scale·Δt·Σ f_k(t − delay)·q(t).
///
/// `vacuum_scale` calibrates units so a vacuum trace yields variance 1/2
/// (see [`calibrate_vacuum_scale`]); pass 1.0 for raw integrals. A trace
/// shorter than one full window yields an empty result.
pub fn extract_quadratures(
    trace: &TimeTrace,
    spec: &ModeFunctionSpec,
    delay_s: f64,
    vacuum_scale: f64,
) -> Result<Vec<f64>> {
    spec.validate()?;
    trace.validate(spec)?;
    if !(vacuum_scale > 0.0 && vacuum_scale.is_finite()) {
        return Err(Error::invalid("vacuum_scale must be positive"));
    }
    let fs = trace.sample_rate_hz;
    let dt = 1.0 / fs;
    let mut out = Vec::new();
    for k in 0.. {
        let Some(range) = mode_window(spec, fs, trace.t0_offset_s, delay_s, k, trace.samples.len())
        else {
            if k as f64 * spec.mode_duration_s + delay_s > trace.t0_offset_s + trace.duration_s() {
                break;
            }
            continue;
        };
        let mut acc = 0.0;
        for i in range {
            acc += mode_function(spec, k, trace.time_of(i) - delay_s) * trace.samples[i];
        }
        out.push(vacuum_scale * dt * acc);
    }
    Ok(out)
}

/// Vacuum normalization from a displacement-free trace segment: the factor
/// that maps the raw extraction variance to 1/2.
pub fn calibrate_vacuum_scale(
    trace: &TimeTrace,
    spec: &ModeFunctionSpec,
    delay_s: f64,
) -> Result<f64> {
    let raw = extract_quadratures(trace, spec, delay_s, 1.0)?;
    if raw.len() < 2 {
        return Err(Error::invalid(
            "vacuum calibration needs at least two mode windows",
        ));
    }
    let mean = raw.iter().sum::<f64>() / raw.len() as f64;
    let var = raw.iter().map(|q| (q - mean) * (q - mean)).sum::<f64>() / raw.len() as f64;
    if var <= 0.0 {
        return Err(Error::invalid("vacuum trace has zero variance"));
    }
    Ok((0.5 / var).sqrt())
}

/// Which quadrature channel a synthetic trace represents.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Quadrature {
    X,
    P,
}

/// Synthesizes a homodyne trace carrying the commanded per-mode
/// displacements: Σ_k w_k·f_k(t − delay) plus white Gaussian noise.
///
/// `crosstalk` mixes each commanded (x, p) pair before synthesis, modeling
/// modulator leakage between quadratures; `which` selects the quadrature
/// channel that reaches the detector. Waveforms are normalized per mode so
/// that raw extraction (vacuum_scale = 1) returns w_k exactly in the
/// noiseless case.
pub fn synth_trace(
    displacements: &[Complex64],
    which: Quadrature,
    spec: &ModeFunctionSpec,
    noise_std: f64,
    delay_s: f64,
    crosstalk: &[[f64; 2]; 2],
    sample_rate_hz: f64,
    master_seed: u64,
) -> Result<TimeTrace> {
    spec.validate()?;
    if displacements.is_empty() {
        return Err(Error::invalid("at least one mode required"));
    }
    if !(noise_std >= 0.0 && delay_s >= 0.0 && sample_rate_hz > 0.0) {
        return Err(Error::invalid(
            "noise_std and delay must be nonnegative, sample rate positive",
        ));
    }
    let fs = sample_rate_hz;
    let dt = 1.0 / fs;
    let tau = spec.mode_duration_s;
    let t0 = -tau / 2.0;
    let len = ((displacements.len() as f64 * tau + delay_s) * fs).ceil() as usize;
    let mut samples = vec![0.0f64; len];

    let mut rng = domain_rng(master_seed, Domain::Trace, 0);
    if noise_std > 0.0 {
        for s in samples.iter_mut() {
            let g: f64 = StandardNormal.sample(&mut rng);
            *s = g * noise_std;
        }
    }

    for (k, d) in displacements.iter().enumerate() {
        let mixed = [
            crosstalk[0][0] * d.re + crosstalk[0][1] * d.im,
            crosstalk[1][0] * d.re + crosstalk[1][1] * d.im,
        ];
        let w = match which {
            Quadrature::X => mixed[0],
            Quadrature::P => mixed[1],
        };
        let Some(range) = mode_window(spec, fs, t0, delay_s, k, len) else {
            continue;
        };
        // discrete waveform energy on this grid, for exact matched-filter recovery
        let mut energy = 0.0;
        for i in range.clone() {
            let f = mode_function(spec, k, t0 + i as f64 * dt - delay_s);
            energy += f * f;
        }
        if energy == 0.0 {
            continue;
        }
        let gain = w / (dt * energy);
        for i in range {
            samples[i] += gain * mode_function(spec, k, t0 + i as f64 * dt - delay_s);
        }
    }
    Ok(TimeTrace {
        sample_rate_hz: fs,
        samples,
        t0_offset_s: t0,
    })
}

/// Locates the electronic delay of a high-amplitude calibration mode: the
/// cross-correlation of the mode-0 waveform with the trace peaks at the
/// delay, quantized to the sample grid.
pub fn estimate_delay(trace: &TimeTrace, spec: &ModeFunctionSpec) -> Result<f64> {
    spec.validate()?;
    trace.validate(spec)?;
    let fs = trace.sample_rate_hz;
    let window = window_samples(spec, fs);
    if trace.samples.len() < window {
        return Err(Error::invalid("trace shorter than one mode window"));
    }
    let first = trace.samples[0];
    if trace.samples.iter().all(|&s| s == first) {
        return Err(Error::NoPeak("trace is flat".into()));
    }
    let template: Vec<f64> = (0..window)
        .map(|i| mode_function(spec, 0, trace.t0_offset_s + i as f64 / fs))
        .collect();
    let mut best_lag = 0usize;
    let mut best = f64::NEG_INFINITY;
    for lag in 0..=(trace.samples.len() - window) {
        let c: f64 = template
            .iter()
            .zip(&trace.samples[lag..lag + window])
            .map(|(f, s)| f * s)
            .sum();
        if c > best {
            best = c;
            best_lag = lag;
        }
    }
    if best <= 0.0 {
        return Err(Error::NoPeak("no positive correlation peak".into()));
    }
    Ok(best_lag as f64 / fs)
}

/// One calibration measurement: a known amplitude driven on one modulator
/// and the displacement observed on both quadratures.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct CrosstalkSample {
    pub drive: Quadrature,
    pub amplitude: f64,
    pub measured_x: f64,
    pub measured_p: f64,
}

/// Least-squares slopes of measured displacement versus commanded amplitude,
/// assembled into the crosstalk matrix (columns: response to a unit x drive
/// and a unit p drive). Applying the inverse to commanded displacements
/// undoes the crosstalk. Needs ≥ 2 distinct amplitudes per modulator.
pub fn calibrate_crosstalk(sweep: &[CrosstalkSample]) -> Result<[[f64; 2]; 2]> {
    let mut matrix = [[0.0f64; 2]; 2];
    for (col, drive) in [(0, Quadrature::X), (1, Quadrature::P)] {
        let points: Vec<&CrosstalkSample> =
            sweep.iter().filter(|s| s.drive == drive).collect();
        let mut amps: Vec<f64> = points.iter().map(|s| s.amplitude).collect();
        amps.sort_by(f64::total_cmp);
        amps.dedup();
        if amps.len() < 2 {
            return Err(Error::invalid(
                "crosstalk sweep needs at least two distinct amplitudes per modulator",
            ));
        }
        let m = points.len() as f64;
        let mean_a = points.iter().map(|s| s.amplitude).sum::<f64>() / m;
        let var_a = points
            .iter()
            .map(|s| (s.amplitude - mean_a) * (s.amplitude - mean_a))
            .sum::<f64>()
            / m;
        for (row, pick) in [(0, 0usize), (1, 1usize)] {
            let mean_y = points
                .iter()
                .map(|s| if pick == 0 { s.measured_x } else { s.measured_p })
                .sum::<f64>()
                / m;
            let cov = points
                .iter()
                .map(|s| {
                    let y = if pick == 0 { s.measured_x } else { s.measured_p };
                    (s.amplitude - mean_a) * (y - mean_y)
                })
                .sum::<f64>()
                / m;
            matrix[row][col] = cov / var_a;
        }
    }
    Ok(matrix)
}

/// Convenience: drives one modulator across `amplitudes` through a known
/// crosstalk matrix with additive measurement noise, producing a sweep for
/// [`calibrate_crosstalk`] tests and fixtures.
pub fn synth_crosstalk_sweep(
    crosstalk: &[[f64; 2]; 2],
    amplitudes: &[f64],
    noise_std: f64,
    master_seed: u64,
) -> Vec<CrosstalkSample> {
    let mut rng = domain_rng(master_seed, Domain::Trace, 1);
    let mut sweep = Vec::with_capacity(2 * amplitudes.len());
    for (drive, col) in [(Quadrature::X, 0usize), (Quadrature::P, 1usize)] {
        for &a in amplitudes {
            let mut x = crosstalk[0][col] * a;
            let mut p = crosstalk[1][col] * a;
            if noise_std > 0.0 {
                let gx: f64 = StandardNormal.sample(&mut rng);
                let gp: f64 = StandardNormal.sample(&mut rng);
                x += gx * noise_std;
                p += gp * noise_std;
            }
            sweep.push(CrosstalkSample {
                drive,
                amplitude: a,
                measured_x: x,
                measured_p: p,
            });
        }
    }
    sweep
}
