//! Finite sections of the chain operator, solved densely.
//!
//! This is the independent oracle for the continued-fraction route: no
//! recurrences, just the (hi−lo+1)-square tridiagonal matrix handed to a
//! Hessenberg/QR Schur decomposition.

use nalgebra::{DMatrix, Schur};
use num_complex::Complex64;

use super::chain::ClassChain;
use super::{Eigenpair, Method, SpectrumReport};
use crate::error::{LabError, Result};

/// Largest section dimension accepted by default.
pub const DEFAULT_MAX_DIM: usize = 4001;

const SCHUR_MAX_ITER: usize = 200_000;
const SCHUR_SHIFT: f64 = 0.618_033_988_749_895;
const INVERSE_ITERATIONS: usize = 3;

/// All eigenvalues of a real square matrix by Hessenberg reduction and
/// shifted QR (real Schur form).
pub fn dense_eigenvalues(m: DMatrix<f64>) -> Result<Vec<Complex64>> {
    let d = m.nrows();
    if d != m.ncols() {
        return Err(LabError::Config(format!("matrix is {}x{}, not square", d, m.ncols())));
    }
    // The deflation test is relative to the diagonal, which vanishes
    // identically for chain sections; a real shift gives it a scale.
    let scale = m.iter().fold(0.0f64, |a, x| a.max(x.abs())).max(f64::MIN_POSITIVE);
    let shift = SCHUR_SHIFT * scale;
    let shifted = m + DMatrix::<f64>::identity(d, d) * shift;
    let schur = Schur::try_new(shifted, f64::EPSILON, SCHUR_MAX_ITER)
        .ok_or_else(|| LabError::Evaluation("QR iteration did not converge".into()))?;
    Ok(schur.complex_eigenvalues().iter().map(|z| z - shift).collect())
}

/// Tridiagonal section of a chain over indices `lo..=hi`, after the gauge
/// that makes Γ real. Row/column `i` is index `lo + i`.
#[derive(Clone, Debug)]
pub struct Section {
    pub lo: i64,
    pub hi: i64,
    /// `sub[i]` couples row i to column i−1 (unused at i = 0).
    pub sub: Vec<f64>,
    /// `sup[i]` couples row i to column i+1 (unused at the last row).
    pub sup: Vec<f64>,
}

impl Section {
    pub fn new(chain: &ClassChain, lo: i64, hi: i64) -> Self {
        let sub = (lo..=hi)
            .map(|n| if n == lo { 0.0 } else { chain.gauged_sub(n) })
            .collect();
        let sup = (lo..=hi)
            .map(|n| if n == hi { 0.0 } else { chain.gauged_super(n) })
            .collect();
        Section { lo, hi, sub, sup }
    }

    pub fn dim(&self) -> usize {
        (self.hi - self.lo + 1) as usize
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let d = self.dim();
        let mut m = DMatrix::zeros(d, d);
        for i in 0..d {
            if i > 0 {
                m[(i, i - 1)] = self.sub[i];
            }
            if i + 1 < d {
                m[(i, i + 1)] = self.sup[i];
            }
        }
        m
    }

    pub fn apply(&self, v: &[Complex64]) -> Vec<Complex64> {
        let d = self.dim();
        (0..d)
            .map(|i| {
                let mut acc = Complex64::new(0.0, 0.0);
                if i > 0 {
                    acc += self.sub[i] * v[i - 1];
                }
                if i + 1 < d {
                    acc += self.sup[i] * v[i + 1];
                }
                acc
            })
            .collect()
    }

    /// All eigenvalues of the section.
    pub fn eigenvalues(&self, max_dim: usize) -> Result<Vec<Complex64>> {
        let d = self.dim();
        if d > max_dim {
            return Err(LabError::Resource(format!(
                "dense section of dimension {d} exceeds the cap {max_dim}"
            )));
        }
        if d == 1 {
            return Ok(vec![Complex64::new(0.0, 0.0)]);
        }
        dense_eigenvalues(self.to_dense())
    }

    /// ‖Mv − λv‖/‖v‖ for an inverse-iteration eigenvector at shift λ.
    pub fn defect(&self, lambda: Complex64) -> f64 {
        let v = self.inverse_iteration(lambda);
        let mv = self.apply(&v);
        let num: f64 = mv.iter().zip(&v).map(|(a, b)| (a - lambda * b).norm_sqr()).sum();
        let den: f64 = v.iter().map(|b| b.norm_sqr()).sum();
        (num / den).sqrt()
    }

    fn inverse_iteration(&self, lambda: Complex64) -> Vec<Complex64> {
        let d = self.dim();
        let mut v: Vec<Complex64> = (0..d)
            .map(|i| Complex64::new(1.0 + 0.25 * (i as f64).sin(), 0.1 * (i as f64).cos()))
            .collect();
        for _ in 0..INVERSE_ITERATIONS {
            solve_shifted(&self.sub, &self.sup, lambda, &mut v);
            let norm = v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
            if !norm.is_finite() || norm == 0.0 {
                break;
            }
            v.iter_mut().for_each(|x| *x /= norm);
        }
        v
    }
}

/// Solves (T − λI)x = b in place for tridiagonal T by Gaussian elimination
/// with partial pivoting. Exactly singular pivots are nudged to ε‖T‖.
fn solve_shifted(sub: &[f64], sup: &[f64], lambda: Complex64, b: &mut [Complex64]) {
    let n = b.len();
    if n == 0 {
        return;
    }
    let scale = sub
        .iter()
        .chain(sup)
        .fold(lambda.norm(), |m, x| m.max(x.abs()))
        .max(1.0);
    let tiny = f64::EPSILON * scale;
    let mut d: Vec<Complex64> = vec![-lambda; n];
    let dl: Vec<Complex64> = (1..n).map(|i| Complex64::new(sub[i], 0.0)).collect();
    let mut du: Vec<Complex64> = (0..n.saturating_sub(1)).map(|i| Complex64::new(sup[i], 0.0)).collect();
    let mut du2: Vec<Complex64> = vec![Complex64::new(0.0, 0.0); n.saturating_sub(2)];

    for i in 0..n - 1 {
        if d[i].norm() >= dl[i].norm() {
            if d[i].norm() == 0.0 {
                d[i] = Complex64::new(tiny, 0.0);
            }
            let f = dl[i] / d[i];
            d[i + 1] -= f * du[i];
            b[i + 1] -= f * b[i];
        } else {
            let f = d[i] / dl[i];
            d[i] = dl[i];
            let tmp = d[i + 1];
            d[i + 1] = du[i] - f * tmp;
            if i + 2 < n {
                du2[i] = du[i + 1];
                du[i + 1] = -f * du2[i];
            }
            du[i] = tmp;
            b.swap(i, i + 1);
            b[i + 1] -= f * b[i];
        }
    }
    if d[n - 1].norm() == 0.0 {
        d[n - 1] = Complex64::new(tiny, 0.0);
    }
    b[n - 1] /= d[n - 1];
    if n > 1 {
        b[n - 2] = (b[n - 2] - du[n - 2] * b[n - 1]) / d[n - 2];
    }
    for i in (0..n.saturating_sub(2)).rev() {
        b[i] = (b[i] - du[i] * b[i + 1] - du2[i] * b[i + 2]) / d[i];
    }
}

/// Eigenvalues of the section over `lo..=hi` with per-eigenvalue defects.
pub fn window_spectrum(chain: &ClassChain, lo: i64, hi: i64, max_dim: usize) -> Result<SpectrumReport> {
    if hi < lo {
        return Err(LabError::Config(format!("empty window [{lo}, {hi}]")));
    }
    let section = Section::new(chain, lo, hi);
    let values = section.eigenvalues(max_dim)?;
    let eigenvalues = values
        .into_iter()
        .map(|value| Eigenpair::new(value, section.defect(value)))
        .collect();
    Ok(SpectrumReport::new(
        chain,
        Method::Truncation(section.dim()),
        eigenvalues,
        Vec::new(),
    ))
}

/// All eigenvalues of the (2N+1)-square section over n ∈ [−N, N].
pub fn truncated_eigenvalues(chain: &ClassChain, n: usize) -> Result<SpectrumReport> {
    truncated_eigenvalues_with_cap(chain, n, DEFAULT_MAX_DIM)
}

pub fn truncated_eigenvalues_with_cap(chain: &ClassChain, n: usize, max_dim: usize) -> Result<SpectrumReport> {
    if n == 0 {
        return Err(LabError::Config("truncation half-width must be at least 1".into()));
    }
    if 2 * n + 1 > max_dim {
        return Err(LabError::Resource(format!(
            "truncation N = {n} gives dimension {} above the cap {max_dim}",
            2 * n + 1
        )));
    }
    let n = n as i64;
    window_spectrum(chain, -n, n, max_dim)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectra::chain::Convention;
    use crate::WaveVector;

    fn reference(g: f64) -> ClassChain {
        ClassChain::real(
            WaveVector::new(-3, -2).unwrap(),
            WaveVector::new(1, 1).unwrap(),
            g,
            Convention::PaperTable,
        )
    }

    #[test]
    fn tridiagonal_solver_matches_dense() {
        let s = Section::new(&reference(1.3), -4, 5);
        let lambda = Complex64::new(0.2, -0.7);
        let mut dense = s.to_dense().map(|x| Complex64::new(x, 0.0));
        for i in 0..s.dim() {
            dense[(i, i)] -= lambda;
        }
        let rhs: Vec<Complex64> = (0..s.dim()).map(|i| Complex64::new(i as f64, 1.0 - i as f64)).collect();
        let mut x = rhs.clone();
        solve_shifted(&s.sub, &s.sup, lambda, &mut x);
        let back = &dense * nalgebra::DVector::from_vec(x);
        for (a, b) in back.iter().zip(&rhs) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn four_mode_window_reproduces_quadruple() {
        let g = 1.7;
        let rep = window_spectrum(&reference(g), 1, 4, DEFAULT_MAX_DIM).unwrap();
        let base = (Complex64::new(1.0, 35f64.sqrt())).sqrt() * g / (2.0 * 10f64.sqrt());
        for want in [base, -base, base.conj(), -base.conj()] {
            assert!(
                rep.eigenvalues.iter().any(|e| (e.value - want).norm() < 1e-12),
                "{want}"
            );
        }
        assert!(rep.eigenvalues.iter().all(|e| e.residual < 1e-12));
    }

    #[test]
    fn size_cap_is_a_resource_error() {
        assert!(matches!(
            truncated_eigenvalues_with_cap(&reference(1.0), 100, 101),
            Err(LabError::Resource(_))
        ));
        assert!(matches!(
            truncated_eigenvalues(&reference(1.0), 0),
            Err(LabError::Config(_))
        ));
    }

    #[test]
    fn complex_gamma_only_rotates_the_gauge() {
        let r = truncated_eigenvalues(&reference(2.0), 20).unwrap();
        let mut c = reference(0.0);
        c.gamma = Complex64::from_polar(2.0, 0.9);
        let rc = truncated_eigenvalues(&c, 20).unwrap();
        for e in &r.eigenvalues {
            assert!(rc.eigenvalues.iter().any(|f| (f.value - e.value).norm() < 1e-12));
        }
    }
}
