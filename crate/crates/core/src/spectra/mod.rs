//! Spectra of the Euler equation linearized at ω*_{±p} = Γ, Γ̄.
//!
//! The linearization leaves every class Σ_k̂ = {k̂ + np} invariant, so the
//! operator splits into tridiagonal chains ([`ClassChain`]). Each chain has
//! a continuous-spectrum band i[−2|b|, 2|b|] and, when the class meets the
//! disk |k| ≤ |p|, possibly finitely many isolated eigenvalues, computed
//! here as zeros of a continued-fraction characteristic function and
//! checked against dense finite sections.

mod chain;
mod continued_fraction;
mod point;
pub mod roots;
mod truncation;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

pub use chain::{class_members, disk_intersection, ClassChain, Convention};
pub use continued_fraction::{cf_characteristic, cf_defect, cf_eigenvector, CharacteristicFunction, DEFAULT_DEPTH};
pub use point::{point_spectrum, PointSpectrumOptions};
pub use truncation::{
    dense_eigenvalues, truncated_eigenvalues, truncated_eigenvalues_with_cap, window_spectrum, Section, DEFAULT_MAX_DIM,
};

/// Below this modulus an eigenvalue is reported as zero.
pub const ZERO_THRESHOLD: f64 = 1e-10;

/// Relative size of a component treated as vanishing when classifying.
const AXIS_TOL: f64 = 1e-9;

/// Orbit type of an eigenvalue under λ ↦ −λ, λ ↦ λ̄.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EigenClass {
    RealPair,
    ImaginaryPair,
    Quadruple,
    Zero,
}

impl EigenClass {
    pub fn of(lambda: Complex64) -> Self {
        let m = lambda.norm();
        if m < ZERO_THRESHOLD {
            EigenClass::Zero
        } else if lambda.im.abs() <= AXIS_TOL * m {
            EigenClass::RealPair
        } else if lambda.re.abs() <= AXIS_TOL * m {
            EigenClass::ImaginaryPair
        } else {
            EigenClass::Quadruple
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Eigenpair {
    pub value: Complex64,
    pub class: EigenClass,
    /// ‖Mv − λv‖/‖v‖ for the associated (approximate) eigenvector.
    pub residual: f64,
}

impl Eigenpair {
    pub fn new(value: Complex64, residual: f64) -> Self {
        Eigenpair {
            value,
            class: EigenClass::of(value),
            residual,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Method {
    ContinuedFraction,
    /// Dense finite section of the given dimension.
    Truncation(usize),
}

impl Method {
    pub fn label(&self) -> String {
        match self {
            Method::ContinuedFraction => "continued-fraction".to_string(),
            Method::Truncation(d) => format!("truncation(dim={d})"),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SpectrumReport {
    pub band_halfwidth: f64,
    pub signed_b: f64,
    pub convention: Convention,
    pub method: Method,
    pub eigenvalues: Vec<Eigenpair>,
    /// Seeds (or orbit images) for which the root finder did not converge.
    pub unresolved: Vec<Complex64>,
}

impl SpectrumReport {
    pub fn new(chain: &ClassChain, method: Method, eigenvalues: Vec<Eigenpair>, unresolved: Vec<Complex64>) -> Self {
        SpectrumReport {
            band_halfwidth: chain.band_halfwidth(),
            signed_b: chain.signed_b(),
            convention: chain.convention,
            method,
            eigenvalues,
            unresolved,
        }
    }

    pub fn values(&self) -> Vec<Complex64> {
        self.eigenvalues.iter().map(|e| e.value).collect()
    }

    /// Eigenvalues farther than `gap` from the band segment.
    pub fn off_band(&self, gap: f64) -> Vec<Complex64> {
        self.eigenvalues
            .iter()
            .map(|e| e.value)
            .filter(|v| chain::band_distance(*v, self.band_halfwidth) > gap)
            .collect()
    }

    pub fn is_converged(&self) -> bool {
        self.unresolved.is_empty()
    }

    /// Largest distance from an image −λ, λ̄, −λ̄ of a reported eigenvalue to
    /// the nearest reported eigenvalue.
    pub fn symmetry_defect(&self) -> f64 {
        symmetry_defect(&self.values())
    }

    pub fn to_json_value(&self) -> serde_json::Value {
        let eigenvalues: Vec<_> = self
            .eigenvalues
            .iter()
            .map(|e| {
                serde_json::json!({
                    "re": e.value.re,
                    "im": e.value.im,
                    "class": e.class,
                    "residual": e.residual,
                })
            })
            .collect();
        let unresolved: Vec<_> = self
            .unresolved
            .iter()
            .map(|z| serde_json::json!({ "re": z.re, "im": z.im }))
            .collect();
        serde_json::json!({
            "band": self.band_halfwidth,
            "method": self.method.label(),
            "eigenvalues": eigenvalues,
            "convention": self.convention,
            "unresolved": unresolved,
        })
    }
}

/// See [`SpectrumReport::symmetry_defect`]. Zero for an empty set.
pub fn symmetry_defect(values: &[Complex64]) -> f64 {
    let nearest = |z: Complex64| values.iter().map(|w| (w - z).norm()).fold(f64::INFINITY, f64::min);
    values
        .iter()
        .flat_map(|v| [-v, v.conj(), -v.conj()])
        .map(nearest)
        .fold(0.0, f64::max)
}
