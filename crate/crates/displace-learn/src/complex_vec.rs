//! Fixed-length complex amplitude vectors over the n-mode phase space.
//!
//! A [`ComplexVec`] holds one amplitude per mode (ħ = 1 convention) and is
//! used for displacements α, dual-space points β, and peak locations γ.
//! Inner products follow the physics convention a†b = Σ conj(a_j) b_j.

use num_complex::Complex64;
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// An n-component complex amplitude vector, n ≥ 1, all components finite.
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexVec(Vec<Complex64>);

impl ComplexVec {
    /// Wraps a component list, rejecting empty or non-finite input.
    pub fn new(components: Vec<Complex64>) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::invalid("ComplexVec needs at least one mode"));
        }
        if !components.iter().all(|c| c.re.is_finite() && c.im.is_finite()) {
            return Err(Error::invalid("ComplexVec components must be finite"));
        }
        Ok(ComplexVec(components))
    }

    /// The zero vector on `n` modes.
    pub fn zeros(n: usize) -> Self {
        assert!(n >= 1, "mode count must be at least 1");
        ComplexVec(vec![Complex64::ZERO; n])
    }

    /// `value` repeated on every mode, e.g. γ = (0.3+0.3i)·(1,...,1).
    pub fn constant(n: usize, value: Complex64) -> Self {
        assert!(n >= 1, "mode count must be at least 1");
        assert!(value.re.is_finite() && value.im.is_finite());
        ComplexVec(vec![value; n])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        false // length ≥ 1 by construction
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.0
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Complex64> {
        self.0.iter()
    }

    /// Squared Euclidean norm |v|² = Σ |v_j|².
    pub fn norm_sq(&self) -> f64 {
        self.0.iter().map(|c| c.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    /// Physics-convention inner product self†other = Σ conj(self_j)·other_j.
    pub fn dagger_dot(&self, other: &ComplexVec) -> Result<Complex64> {
        if self.len() != other.len() {
            return Err(Error::invalid(format!(
                "dimension mismatch: {} vs {} modes",
                self.len(),
                other.len()
            )));
        }
        Ok(self
            .0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    /// Scales every component by a complex factor.
    pub fn scale(&self, factor: Complex64) -> ComplexVec {
        ComplexVec(self.0.iter().map(|c| c * factor).collect())
    }

    /// Component-wise negation.
    pub fn neg(&self) -> ComplexVec {
        ComplexVec(self.0.iter().map(|c| -c).collect())
    }

    /// Component-wise sum; lengths must match.
    pub fn add(&self, other: &ComplexVec) -> Result<ComplexVec> {
        if self.len() != other.len() {
            return Err(Error::invalid("dimension mismatch in add"));
        }
        Ok(ComplexVec(
            self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect(),
        ))
    }

    /// Squared distance |self − other|².
    pub fn dist_sq(&self, other: &ComplexVec) -> Result<f64> {
        if self.len() != other.len() {
            return Err(Error::invalid("dimension mismatch in dist_sq"));
        }
        Ok(self
            .0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum())
    }

    /// Rescales to unit Euclidean norm; rejects the zero vector.
    pub fn normalized(&self) -> Result<ComplexVec> {
        let n = self.norm();
        if n == 0.0 {
            return Err(Error::invalid("cannot normalize the zero vector"));
        }
        Ok(ComplexVec(self.0.iter().map(|c| c / n).collect()))
    }
}

impl std::ops::Index<usize> for ComplexVec {
    type Output = Complex64;
    fn index(&self, i: usize) -> &Complex64 {
        &self.0[i]
    }
}

impl<'a> IntoIterator for &'a ComplexVec {
    type Item = &'a Complex64;
    type IntoIter = std::slice::Iter<'a, Complex64>;
    fn into_iter(self) -> Self::IntoIter {
        self.0.iter()
    }
}

// Wire format: [[re, im], ...], one pair per mode.
impl Serialize for ComplexVec {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let pairs: Vec<[f64; 2]> = self.0.iter().map(|c| [c.re, c.im]).collect();
        pairs.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for ComplexVec {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let pairs: Vec<[f64; 2]> = Vec::deserialize(deserializer)?;
        let components = pairs
            .into_iter()
            .map(|[re, im]| Complex64::new(re, im))
            .collect();
        ComplexVec::new(components).map_err(D::Error::custom)
    }
}
