//! Random displacement process families: characteristic functions, densities,
//! and exact samplers.
//!
//! A process is represented classically by the pair (p, λ): the phase-space
//! density p(α) and its Fourier transform λ(β) = E[exp(α†β − β†α)]. Three
//! families are supported:
//!
//! * three-peak — central Gaussian peak in λ plus two imaginary side peaks of
//!   height 2ε₀ at ±γ; density p_γ(α) ∝ exp(−2σ²|α|²)(1 + 4ε₀ sin(2(γ_i·α_r − γ_r·α_i)))
//! * Gaussian — the γ → 0 limit, λ(β) = exp(−|β|²/2σ²)
//! * fixed — a deterministic displacement α₀ (delta density), used by
//!   calibration grids and pilot tooling

use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::complex_vec::ComplexVec;
use crate::error::{Error, Result};

/// Side peaks taller than 2·0.25 would make the density negative somewhere.
pub const MAX_EPSILON0: f64 = 0.25;

/// Three-peak family parameters: peak location γ, width σ, half-height ε₀.
#[derive(Clone, Debug, PartialEq)]
pub struct ThreePeakSpec {
    gamma: ComplexVec,
    sigma: f64,
    epsilon0: f64,
}

impl ThreePeakSpec {
    pub fn new(gamma: ComplexVec, sigma: f64, epsilon0: f64) -> Result<Self> {
        if !(sigma > 0.0 && sigma.is_finite()) {
            return Err(Error::invalid("three-peak sigma must be positive"));
        }
        if !(0.0..=MAX_EPSILON0).contains(&epsilon0) {
            return Err(Error::invalid(format!(
                "epsilon0 must lie in [0, {MAX_EPSILON0}] so the density stays nonnegative"
            )));
        }
        Ok(ThreePeakSpec {
            gamma,
            sigma,
            epsilon0,
        })
    }

    pub fn gamma(&self) -> &ComplexVec {
        &self.gamma
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn epsilon0(&self) -> f64 {
        self.epsilon0
    }
}

/// Gaussian family parameters.
#[derive(Clone, Debug, PartialEq)]
pub struct GaussianSpec {
    n: usize,
    sigma: f64,
}

impl GaussianSpec {
    pub fn new(n: usize, sigma: f64) -> Result<Self> {
        if n < 1 {
            return Err(Error::invalid("mode count must be at least 1"));
        }
        if !(sigma > 0.0 && sigma.is_finite()) {
            return Err(Error::invalid("gaussian sigma must be positive"));
        }
        Ok(GaussianSpec { n, sigma })
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }
}

/// Deterministic displacement by α₀ on every use.
#[derive(Clone, Debug, PartialEq)]
pub struct FixedSpec {
    alpha0: ComplexVec,
}

impl FixedSpec {
    pub fn new(alpha0: ComplexVec) -> Self {
        FixedSpec { alpha0 }
    }

    pub fn alpha0(&self) -> &ComplexVec {
        &self.alpha0
    }
}

/// Tagged description of a random displacement process.
#[derive(Clone, Debug, PartialEq)]
pub enum ProcessSpec {
    ThreePeak(ThreePeakSpec),
    Gaussian(GaussianSpec),
    Fixed(FixedSpec),
}

impl ProcessSpec {
    /// Convenience constructor for the three-peak family.
    pub fn three_peak(gamma: ComplexVec, sigma: f64, epsilon0: f64) -> Result<Self> {
        Ok(ProcessSpec::ThreePeak(ThreePeakSpec::new(
            gamma, sigma, epsilon0,
        )?))
    }

    pub fn gaussian(n: usize, sigma: f64) -> Result<Self> {
        Ok(ProcessSpec::Gaussian(GaussianSpec::new(n, sigma)?))
    }

    pub fn fixed(alpha0: ComplexVec) -> Self {
        ProcessSpec::Fixed(FixedSpec::new(alpha0))
    }

    /// Number of modes the process acts on.
    pub fn modes(&self) -> usize {
        match self {
            ProcessSpec::ThreePeak(s) => s.gamma.len(),
            ProcessSpec::Gaussian(s) => s.n,
            ProcessSpec::Fixed(s) => s.alpha0.len(),
        }
    }

    /// Exact characteristic function λ(β).
    ///
    /// Three-peak: exp(−|β|²/2σ²) + 2iε₀ exp(−|β−γ|²/2σ²) − 2iε₀ exp(−|β+γ|²/2σ²).
    /// Gaussian: exp(−|β|²/2σ²). Fixed: exp(α₀†β − β†α₀).
    pub fn char_fn(&self, beta: &ComplexVec) -> Result<Complex64> {
        if beta.len() != self.modes() {
            return Err(Error::invalid(format!(
                "beta has {} modes, process has {}",
                beta.len(),
                self.modes()
            )));
        }
        match self {
            ProcessSpec::ThreePeak(s) => {
                let two_sigma_sq = 2.0 * s.sigma * s.sigma;
                let central = (-beta.norm_sq() / two_sigma_sq).exp();
                let near = (-beta.dist_sq(&s.gamma)? / two_sigma_sq).exp();
                let far = (-beta.dist_sq(&s.gamma.neg())? / two_sigma_sq).exp();
                Ok(Complex64::new(central, 2.0 * s.epsilon0 * (near - far)))
            }
            ProcessSpec::Gaussian(s) => {
                let two_sigma_sq = 2.0 * s.sigma * s.sigma;
                Ok(Complex64::new((-beta.norm_sq() / two_sigma_sq).exp(), 0.0))
            }
            ProcessSpec::Fixed(s) => {
                // α₀†β − β†α₀ = 2i·Im(α₀†β)
                let phase = 2.0 * s.alpha0.dagger_dot(beta)?.im;
                Ok(Complex64::from_polar(1.0, phase))
            }
        }
    }

    /// Unnormalized density weight p(α) up to the family's constant.
    ///
    /// Three-peak: exp(−2σ²|α|²)(1 + 4ε₀ sin(2(γ_i·α_r − γ_r·α_i))) with the
    /// subscripts r and i denoting component-wise real and imaginary parts.
    /// Gaussian: exp(−2σ²|α|²). Fixed displacements have a delta density and
    /// are rejected.
    pub fn pdf_weight(&self, alpha: &ComplexVec) -> Result<f64> {
        if alpha.len() != self.modes() {
            return Err(Error::invalid(format!(
                "alpha has {} modes, process has {}",
                alpha.len(),
                self.modes()
            )));
        }
        match self {
            ProcessSpec::ThreePeak(s) => {
                let envelope = (-2.0 * s.sigma * s.sigma * alpha.norm_sq()).exp();
                Ok(envelope * (1.0 + 4.0 * s.epsilon0 * peak_modulation(&s.gamma, alpha).sin()))
            }
            ProcessSpec::Gaussian(s) => Ok((-2.0 * s.sigma * s.sigma * alpha.norm_sq()).exp()),
            ProcessSpec::Fixed(_) => Err(Error::UnsupportedVariant(
                "fixed displacements have a delta density".into(),
            )),
        }
    }

    /// Draws one displacement α distributed according to `pdf_weight`.
    ///
    /// Quadratures are proposed from the Gaussian envelope (per-quadrature
    /// variance 1/(4σ²)) and, for the three-peak family, accepted with
    /// probability (1 + 4ε₀ sin(·))/2. The acceptance rate is exactly 1/2
    /// because sin averages to zero under the envelope.
    pub fn sample_displacement<R: Rng + ?Sized>(&self, rng: &mut R) -> ComplexVec {
        match self {
            ProcessSpec::Fixed(s) => s.alpha0.clone(),
            ProcessSpec::Gaussian(s) => envelope_draw(s.n, s.sigma, rng),
            ProcessSpec::ThreePeak(s) => loop {
                let proposal = envelope_draw(s.gamma.len(), s.sigma, rng);
                let accept =
                    0.5 * (1.0 + 4.0 * s.epsilon0 * peak_modulation(&s.gamma, &proposal).sin());
                if rng.random::<f64>() < accept {
                    return proposal;
                }
            },
        }
    }
}

/// The sine argument of the three-peak density: 2(γ_i·α_r − γ_r·α_i).
fn peak_modulation(gamma: &ComplexVec, alpha: &ComplexVec) -> f64 {
    let dot: f64 = gamma
        .iter()
        .zip(alpha.iter())
        .map(|(g, a)| g.im * a.re - g.re * a.im)
        .sum();
    2.0 * dot
}

/// One draw from the envelope: every quadrature i.i.d. N(0, 1/(4σ²)).
fn envelope_draw<R: Rng + ?Sized>(n: usize, sigma: f64, rng: &mut R) -> ComplexVec {
    let std = 1.0 / (2.0 * sigma);
    let components = (0..n)
        .map(|_| {
            let re: f64 = StandardNormal.sample(rng);
            let im: f64 = StandardNormal.sample(rng);
            Complex64::new(re * std, im * std)
        })
        .collect();
    ComplexVec::new(components).expect("envelope draws are finite")
}

/// Draws γ with all 2n real coordinates i.i.d. N(0, σ_γ²), so E[|γ|²] = 2nσ_γ².
pub fn draw_gamma<R: Rng + ?Sized>(n: usize, sigma_gamma_sq: f64, rng: &mut R) -> ComplexVec {
    assert!(
        sigma_gamma_sq > 0.0 && sigma_gamma_sq.is_finite(),
        "sigma_gamma_sq must be positive"
    );
    let std = sigma_gamma_sq.sqrt();
    let components = (0..n)
        .map(|_| {
            let re: f64 = StandardNormal.sample(rng);
            let im: f64 = StandardNormal.sample(rng);
            Complex64::new(re * std, im * std)
        })
        .collect();
    ComplexVec::new(components).expect("gamma draws are finite")
}

/// Monte Carlo estimate of λ(β) from true displacement draws (no measurement
/// noise): (1/M) Σ exp(α†β − β†α). Used as the Fourier-consistency oracle.
pub fn empirical_char_fn(samples: &[ComplexVec], beta: &ComplexVec) -> Result<Complex64> {
    if samples.is_empty() {
        return Err(Error::invalid("empirical_char_fn needs at least one sample"));
    }
    let mut acc = Complex64::ZERO;
    for alpha in samples {
        let phase = 2.0 * alpha.dagger_dot(beta)?.im;
        acc += Complex64::from_polar(1.0, phase);
    }
    Ok(acc / samples.len() as f64)
}

// ---------------------------------------------------------------------------
// JSON wire format
// ---------------------------------------------------------------------------

/// Flat serde shadow for the tagged JSON object; unknown fields are rejected.
#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ProcessSpecRepr {
    kind: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    n: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    sigma: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    epsilon0: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    gamma: Option<ComplexVec>,
    #[serde(skip_serializing_if = "Option::is_none")]
    alpha0: Option<ComplexVec>,
}

impl Serialize for ProcessSpec {
    fn serialize<S: serde::Serializer>(&self, ser: S) -> std::result::Result<S::Ok, S::Error> {
        let repr = match self {
            ProcessSpec::ThreePeak(s) => ProcessSpecRepr {
                kind: "three_peak".into(),
                n: Some(s.gamma.len()),
                sigma: Some(s.sigma),
                epsilon0: Some(s.epsilon0),
                gamma: Some(s.gamma.clone()),
                alpha0: None,
            },
            ProcessSpec::Gaussian(s) => ProcessSpecRepr {
                kind: "gaussian".into(),
                n: Some(s.n),
                sigma: Some(s.sigma),
                epsilon0: None,
                gamma: None,
                alpha0: None,
            },
            ProcessSpec::Fixed(s) => ProcessSpecRepr {
                kind: "fixed".into(),
                n: Some(s.alpha0.len()),
                sigma: None,
                epsilon0: None,
                gamma: None,
                alpha0: Some(s.alpha0.clone()),
            },
        };
        repr.serialize(ser)
    }
}

impl<'de> Deserialize<'de> for ProcessSpec {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let repr = ProcessSpecRepr::deserialize(de)?;
        let check_n = |n: Option<usize>, len: usize| -> std::result::Result<(), D::Error> {
            match n {
                Some(n) if n != len => Err(D::Error::custom(format!(
                    "declared n={n} does not match vector length {len}"
                ))),
                _ => Ok(()),
            }
        };
        match repr.kind.as_str() {
            "three_peak" => {
                let gamma = repr
                    .gamma
                    .ok_or_else(|| D::Error::missing_field("gamma"))?;
                let sigma = repr
                    .sigma
                    .ok_or_else(|| D::Error::missing_field("sigma"))?;
                let epsilon0 = repr
                    .epsilon0
                    .ok_or_else(|| D::Error::missing_field("epsilon0"))?;
                check_n(repr.n, gamma.len())?;
                if repr.alpha0.is_some() {
                    return Err(D::Error::custom("three_peak does not take alpha0"));
                }
                ProcessSpec::three_peak(gamma, sigma, epsilon0).map_err(D::Error::custom)
            }
            "gaussian" => {
                let n = repr.n.ok_or_else(|| D::Error::missing_field("n"))?;
                let sigma = repr
                    .sigma
                    .ok_or_else(|| D::Error::missing_field("sigma"))?;
                if repr.gamma.is_some() || repr.alpha0.is_some() || repr.epsilon0.is_some() {
                    return Err(D::Error::custom("gaussian takes only n and sigma"));
                }
                ProcessSpec::gaussian(n, sigma).map_err(D::Error::custom)
            }
            "fixed" => {
                let alpha0 = repr
                    .alpha0
                    .ok_or_else(|| D::Error::missing_field("alpha0"))?;
                check_n(repr.n, alpha0.len())?;
                if repr.gamma.is_some() || repr.sigma.is_some() || repr.epsilon0.is_some() {
                    return Err(D::Error::custom("fixed takes only alpha0"));
                }
                Ok(ProcessSpec::fixed(alpha0))
            }
            other => Err(D::Error::custom(format!("unknown process kind {other:?}"))),
        }
    }
}
