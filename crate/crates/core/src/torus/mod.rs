//! Pseudospectral fields on the 2π-periodic torus.
//!
//! Samples are stored row-major as `values[j * n + l]` at the node
//! (x, y) = (2πj/n, 2πl/n). Spectral coefficients use the same layout with
//! the x wavenumber on the outer index and the normalization
//! f = Σ ĉ_k e^{ik·X}.

mod darboux;
mod io;
mod lax;

use std::cell::RefCell;
use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rand::Rng;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};

pub use darboux::{
    cosine_example, darboux_transform, DarbouxFields, DarbouxReport, DarbouxTime, MASK_DELTA, PREMISE_TOL,
};
pub use io::{read_field, write_field, FieldFormat, FieldMeta};
pub use lax::{lax_residuals, LaxControl, LaxReport, STEADY_TOL};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FieldKind {
    Real,
    Complex,
}

impl FieldKind {
    fn join(self, other: FieldKind) -> FieldKind {
        if self == FieldKind::Real && other == FieldKind::Real {
            FieldKind::Real
        } else {
            FieldKind::Complex
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct GridField {
    n: usize,
    values: Vec<Complex64>,
    kind: FieldKind,
    zero_mean: bool,
}

fn check_grid(n: usize) -> Result<()> {
    if n < 16 || !n.is_power_of_two() {
        return Err(LabError::config(format!(
            "grid size must be a power of two ≥ 16, got {n}"
        )));
    }
    Ok(())
}

/// Node coordinate 2πi/n.
pub fn node(i: usize, n: usize) -> f64 {
    2.0 * PI * i as f64 / n as f64
}

/// Signed wavenumber of FFT bin `i`; the Nyquist bin maps to n/2.
pub fn wavenumber(i: usize, n: usize) -> i64 {
    if i <= n / 2 {
        i as i64
    } else {
        i as i64 - n as i64
    }
}

/// Largest |k₁|, |k₂| kept in a dealiased quadratic product.
pub fn dealias_limit(n: usize) -> i64 {
    (n / 3) as i64
}

/// Band limit for the inputs of a dealiased triple product.
pub fn triple_limit(n: usize) -> i64 {
    (n / 6) as i64
}

type PlanCache = RefCell<HashMap<(usize, bool), Arc<dyn Fft<f64>>>>;

thread_local! {
    static PLANS: PlanCache = RefCell::new(HashMap::new());
}

fn plan(n: usize, inverse: bool) -> Arc<dyn Fft<f64>> {
    PLANS.with(|cache| {
        cache
            .borrow_mut()
            .entry((n, inverse))
            .or_insert_with(|| {
                let mut planner = FftPlanner::new();
                if inverse {
                    planner.plan_fft_inverse(n)
                } else {
                    planner.plan_fft_forward(n)
                }
            })
            .clone()
    })
}

fn transpose(n: usize, a: &mut [Complex64]) {
    for i in 0..n {
        for j in i + 1..n {
            a.swap(i * n + j, j * n + i);
        }
    }
}

fn fft2(n: usize, data: &mut [Complex64], inverse: bool) {
    let p = plan(n, inverse);
    p.process(data);
    transpose(n, data);
    p.process(data);
    transpose(n, data);
}

/// Discrete Fourier coefficients of a [`GridField`].
#[derive(Clone, Debug, PartialEq)]
pub struct Spectrum {
    n: usize,
    coeffs: Vec<Complex64>,
}

impl Spectrum {
    pub fn n(&self) -> usize {
        self.n
    }

    /// Coefficient of e^{i(k₁x + k₂y)}; zero outside the resolved range.
    pub fn coefficient(&self, k1: i64, k2: i64) -> Complex64 {
        let n = self.n as i64;
        if k1.abs() > n / 2 || k2.abs() > n / 2 {
            return Complex64::new(0.0, 0.0);
        }
        let a = k1.rem_euclid(n) as usize;
        let b = k2.rem_euclid(n) as usize;
        self.coeffs[a * self.n + b]
    }

    pub fn iter(&self) -> impl Iterator<Item = (i64, i64, Complex64)> + '_ {
        let n = self.n;
        self.coeffs
            .iter()
            .enumerate()
            .map(move |(i, c)| (wavenumber(i / n, n), wavenumber(i % n, n), *c))
    }

    fn map(mut self, f: impl Fn(i64, i64, Complex64) -> Complex64) -> Self {
        let n = self.n;
        for (i, c) in self.coeffs.iter_mut().enumerate() {
            *c = f(wavenumber(i / n, n), wavenumber(i % n, n), *c);
        }
        self
    }

    /// Largest |k₁|, |k₂| over coefficients with modulus above `tol`.
    pub fn band(&self, tol: f64) -> i64 {
        self.iter()
            .filter(|(_, _, c)| c.norm() > tol)
            .map(|(a, b, _)| a.abs().max(b.abs()))
            .max()
            .unwrap_or(0)
    }
}

impl GridField {
    pub fn from_values(n: usize, values: Vec<Complex64>, kind: FieldKind) -> Result<Self> {
        check_grid(n)?;
        if values.len() != n * n {
            return Err(LabError::config(format!(
                "expected {} samples, got {}",
                n * n,
                values.len()
            )));
        }
        let mut f = GridField {
            n,
            values,
            kind,
            zero_mean: false,
        };
        if kind == FieldKind::Real {
            f.values.iter_mut().for_each(|v| v.im = 0.0);
        }
        Ok(f)
    }

    pub fn from_real(n: usize, values: Vec<f64>) -> Result<Self> {
        Self::from_values(
            n,
            values.into_iter().map(|v| Complex64::new(v, 0.0)).collect(),
            FieldKind::Real,
        )
    }

    /// Samples f(x, y) at the grid nodes.
    pub fn from_fn(n: usize, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        check_grid(n)?;
        let values = (0..n * n).map(|i| f(node(i / n, n), node(i % n, n))).collect();
        Self::from_real(n, values)
    }

    pub fn from_fn_complex(n: usize, f: impl Fn(f64, f64) -> Complex64) -> Result<Self> {
        check_grid(n)?;
        let values = (0..n * n).map(|i| f(node(i / n, n), node(i % n, n))).collect();
        Self::from_values(n, values, FieldKind::Complex)
    }

    pub fn constant(n: usize, c: f64) -> Result<Self> {
        Self::from_fn(n, |_, _| c)
    }

    pub fn from_spectrum(spec: Spectrum, kind: FieldKind) -> Self {
        let n = spec.n;
        let zero_mean = spec.coeffs[0].norm() == 0.0;
        let mut values = spec.coeffs;
        fft2(n, &mut values, true);
        if kind == FieldKind::Real {
            values.iter_mut().for_each(|v| v.im = 0.0);
        }
        GridField {
            n,
            values,
            kind,
            zero_mean,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn kind(&self) -> FieldKind {
        self.kind
    }

    /// Whether the field is tagged as having a vanishing (0,0) coefficient.
    pub fn is_zero_mean(&self) -> bool {
        self.zero_mean
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn real_values(&self) -> Vec<f64> {
        self.values.iter().map(|v| v.re).collect()
    }

    pub fn at(&self, j: usize, l: usize) -> Complex64 {
        self.values[j * self.n + l]
    }

    pub fn spectrum(&self) -> Spectrum {
        let mut coeffs = self.values.clone();
        fft2(self.n, &mut coeffs, false);
        let scale = 1.0 / (self.n * self.n) as f64;
        coeffs.iter_mut().for_each(|c| *c *= scale);
        Spectrum { n: self.n, coeffs }
    }

    fn spectral_map(&self, f: impl Fn(i64, i64, Complex64) -> Complex64) -> GridField {
        let mut out = GridField::from_spectrum(self.spectrum().map(f), self.kind);
        out.zero_mean = true;
        out
    }

    /// Zeroes every coefficient with |k₁| or |k₂| above `limit`.
    pub fn band_limited(&self, limit: i64) -> GridField {
        let zero_mean = self.zero_mean;
        let mut out = GridField::from_spectrum(
            self.spectrum().map(|a, b, c| {
                if a.abs() > limit || b.abs() > limit {
                    Complex64::new(0.0, 0.0)
                } else {
                    c
                }
            }),
            self.kind,
        );
        out.zero_mean = zero_mean || out.zero_mean;
        out
    }

    pub fn dealiased(&self) -> GridField {
        self.band_limited(dealias_limit(self.n))
    }

    fn derivative(&self, axis: usize) -> GridField {
        let half = (self.n / 2) as i64;
        self.spectral_map(|a, b, c| {
            let k = if axis == 0 { a } else { b };
            if k.abs() == half {
                Complex64::new(0.0, 0.0)
            } else {
                c * Complex64::new(0.0, k as f64)
            }
        })
    }

    pub fn dx(&self) -> GridField {
        self.derivative(0)
    }

    pub fn dy(&self) -> GridField {
        self.derivative(1)
    }

    pub fn mean(&self) -> Complex64 {
        self.values.iter().sum::<Complex64>() / (self.n * self.n) as f64
    }

    pub fn max_norm(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// Root-mean-square over the nodes.
    pub fn rms_norm(&self) -> f64 {
        (self.values.iter().map(|v| v.norm_sqr()).sum::<f64>() / (self.n * self.n) as f64).sqrt()
    }

    /// Largest |f| over nodes where `mask` is true; 0 for an empty mask.
    pub fn masked_max_norm(&self, mask: &[bool]) -> f64 {
        self.values
            .iter()
            .zip(mask)
            .filter(|(_, m)| **m)
            .map(|(v, _)| v.norm())
            .fold(0.0, f64::max)
    }

    fn zip_with(&self, other: &GridField, f: impl Fn(Complex64, Complex64) -> Complex64) -> Result<GridField> {
        same_grid(self, other)?;
        let values = self.values.iter().zip(&other.values).map(|(a, b)| f(*a, *b)).collect();
        Ok(GridField {
            n: self.n,
            values,
            kind: self.kind.join(other.kind),
            zero_mean: false,
        })
    }

    pub fn add(&self, other: &GridField) -> Result<GridField> {
        let mut out = self.zip_with(other, |a, b| a + b)?;
        out.zero_mean = self.zero_mean && other.zero_mean;
        Ok(out)
    }

    pub fn sub(&self, other: &GridField) -> Result<GridField> {
        let mut out = self.zip_with(other, |a, b| a - b)?;
        out.zero_mean = self.zero_mean && other.zero_mean;
        Ok(out)
    }

    /// Pointwise product (not dealiased).
    pub fn mul(&self, other: &GridField) -> Result<GridField> {
        self.zip_with(other, |a, b| a * b)
    }

    pub fn scale(&self, s: f64) -> GridField {
        GridField {
            values: self.values.iter().map(|v| v * s).collect(),
            ..self.clone()
        }
    }

    pub fn scale_complex(&self, s: Complex64) -> GridField {
        let kind = if s.im == 0.0 { self.kind } else { FieldKind::Complex };
        GridField {
            values: self.values.iter().map(|v| v * s).collect(),
            kind,
            ..self.clone()
        }
    }

    pub fn map(&self, f: impl Fn(Complex64) -> Complex64) -> GridField {
        let values = self.values.iter().map(|v| f(*v)).collect();
        GridField {
            n: self.n,
            values,
            kind: self.kind,
            zero_mean: false,
        }
    }

    pub fn to_complex(&self) -> GridField {
        GridField {
            kind: FieldKind::Complex,
            ..self.clone()
        }
    }
}

fn same_grid(f: &GridField, g: &GridField) -> Result<()> {
    if f.n != g.n {
        return Err(LabError::domain(format!("grid sizes differ: {} vs {}", f.n, g.n)));
    }
    Ok(())
}

/// {f, g} = f_x g_y − f_y g_x from dealiased inputs, truncated to the n/3
/// band.
pub fn bracket(f: &GridField, g: &GridField) -> Result<GridField> {
    same_grid(f, g)?;
    let (f, g) = (f.dealiased(), g.dealiased());
    let prod = f.dx().mul(&g.dy())?.sub(&f.dy().mul(&g.dx())?)?;
    let mut out = prod.dealiased();
    out.zero_mean = true;
    Ok(out)
}

/// Δf with multiplier −|k|².
pub fn laplacian(f: &GridField) -> GridField {
    let half = (f.n / 2) as i64;
    f.spectral_map(|a, b, c| {
        if a.abs() == half || b.abs() == half {
            Complex64::new(0.0, 0.0)
        } else {
            -c * (a * a + b * b) as f64
        }
    })
}

/// Δ⁻¹f with multiplier −|k|⁻² in the zero-mean gauge.
pub fn invert_laplacian(f: &GridField) -> Result<GridField> {
    let mean = f.mean();
    if mean.norm() > 1e-12 * (1.0 + f.max_norm()) {
        return Err(LabError::domain(format!(
            "cannot invert the Laplacian of a field with mean {mean}"
        )));
    }
    let half = (f.n / 2) as i64;
    Ok(f.spectral_map(|a, b, c| {
        if (a == 0 && b == 0) || a.abs() == half || b.abs() == half {
            Complex64::new(0.0, 0.0)
        } else {
            -c / (a * a + b * b) as f64
        }
    }))
}

/// (u, v) = (−Ψ_y, Ψ_x).
pub fn velocity(psi: &GridField) -> (GridField, GridField) {
    (psi.dy().scale(-1.0), psi.dx())
}

/// Max-norm of {f,{g,h}} + {g,{h,f}} + {h,{f,g}}. Inputs should be limited
/// to the n/6 band for the triple products to be alias-free.
pub fn jacobi_residual(f: &GridField, g: &GridField, h: &GridField) -> Result<f64> {
    let a = bracket(f, &bracket(g, h)?)?;
    let b = bracket(g, &bracket(h, f)?)?;
    let c = bracket(h, &bracket(f, g)?)?;
    Ok(a.add(&b)?.add(&c)?.max_norm())
}

/// Real zero-mean trigonometric polynomial with |k₁|, |k₂| ≤ `degree`,
/// coefficients uniform in the unit square (Hermitian-symmetrized), scaled
/// to unit max-norm so absolute residual tolerances are meaningful.
pub fn random_trig_polynomial<R: Rng + ?Sized>(n: usize, degree: i64, rng: &mut R) -> Result<GridField> {
    check_grid(n)?;
    if degree < 0 || degree >= (n / 2) as i64 {
        return Err(LabError::config(format!(
            "degree {degree} not resolved on an {n}-point grid"
        )));
    }
    let mut coeffs = vec![Complex64::new(0.0, 0.0); n * n];
    let idx = |a: i64, b: i64| a.rem_euclid(n as i64) as usize * n + b.rem_euclid(n as i64) as usize;
    for a in -degree..=degree {
        for b in -degree..=degree {
            // one representative per ±k pair
            if a > 0 || (a == 0 && b > 0) {
                let c = Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
                coeffs[idx(a, b)] = c;
                coeffs[idx(-a, -b)] = c.conj();
            }
        }
    }
    let f = GridField::from_spectrum(Spectrum { n, coeffs }, FieldKind::Real);
    let m = f.max_norm();
    Ok(if m > 0.0 { f.scale(1.0 / m) } else { f })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn bracket_of_cosines() {
        let n = 64;
        let f = GridField::from_fn(n, |x, _| x.cos()).unwrap();
        let g = GridField::from_fn(n, |_, y| y.cos()).unwrap();
        let want = GridField::from_fn(n, |x, y| x.sin() * y.sin()).unwrap();
        let got = bracket(&f, &g).unwrap();
        assert!(got.sub(&want).unwrap().max_norm() < 1e-12);
        assert_eq!(got.kind(), FieldKind::Real);
    }

    #[test]
    fn antisymmetry() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let f = random_trig_polynomial(32, 5, &mut rng).unwrap();
        let g = random_trig_polynomial(32, 5, &mut rng).unwrap();
        assert!(bracket(&f, &f).unwrap().max_norm() < 1e-14 * f.max_norm().powi(2) * 100.0);
        let s = bracket(&f, &g).unwrap().add(&bracket(&g, &f).unwrap()).unwrap();
        assert!(s.max_norm() < 1e-12);
    }

    #[test]
    fn laplacian_round_trip() {
        let f = GridField::from_fn(32, |x, y| (x + y).cos()).unwrap();
        let psi = invert_laplacian(&f).unwrap();
        assert!(psi.add(&f.scale(0.5)).unwrap().max_norm() < 1e-15);
        assert!(psi.is_zero_mean() && psi.mean().norm() < 1e-16);
        assert!(laplacian(&psi).sub(&f).unwrap().max_norm() < 1e-13);
        let bad = GridField::from_fn(32, |x, _| 1.0 + x.cos()).unwrap();
        assert!(matches!(invert_laplacian(&bad), Err(LabError::Domain(_))));
    }

    #[test]
    fn velocity_of_single_mode() {
        let psi = GridField::from_fn(32, |x, y| -0.5 * (x + y).cos()).unwrap();
        let (u, v) = velocity(&psi);
        let s = GridField::from_fn(32, |x, y| 0.5 * (x + y).sin()).unwrap();
        assert!(u.add(&s).unwrap().max_norm() < 1e-14);
        assert!(v.sub(&s).unwrap().max_norm() < 1e-14);
        let (u0, v0) = velocity(&GridField::constant(32, 3.0).unwrap());
        assert_eq!((u0.max_norm(), v0.max_norm()), (0.0, 0.0));
    }

    #[test]
    fn mismatched_grids() {
        let a = GridField::constant(16, 1.0).unwrap();
        let b = GridField::constant(32, 1.0).unwrap();
        assert!(matches!(bracket(&a, &b), Err(LabError::Domain(_))));
        assert!(matches!(GridField::constant(24, 1.0), Err(LabError::Config(_))));
    }

    #[test]
    fn random_polynomial_band() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let f = random_trig_polynomial(32, 4, &mut rng).unwrap();
        assert_eq!(f.spectrum().band(1e-14), 4);
        assert!(f.mean().norm() < 1e-15);
        assert!(f.values().iter().all(|v| v.im == 0.0));
        assert!((f.max_norm() - 1.0).abs() < 1e-15);
    }
}
