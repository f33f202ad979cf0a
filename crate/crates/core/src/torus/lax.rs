use num_complex::Complex64;
use serde::Serialize;

use super::{bracket, invert_laplacian, GridField};
use crate::error::{LabError, Result};

/// Largest ‖{Ψ, Ω}‖ (max-norm) accepted as a steady base flow.
pub const STEADY_TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LaxControl {
    /// RK4 step for ∂_tφ = −{Ψ, φ}.
    pub dt: f64,
    /// Number of equally spaced sample times in [0, t1], ends included.
    pub samples: usize,
}

impl Default for LaxControl {
    fn default() -> Self {
        LaxControl { dt: 1e-2, samples: 11 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LaxReport {
    pub lambda: [f64; 2],
    /// ‖{Ψ, Ω}‖ of the base flow.
    pub steady_residual: f64,
    /// Max-norm of {{Ψ,Ω},φ} − {Ψ,{Ω,φ}} + {Ω,{Ψ,φ}} at t = 0.
    pub compatibility_residual: f64,
    pub times: Vec<f64>,
    /// m(t) = ‖Lφ − λφ‖/‖φ‖ (root-mean-square norms).
    pub defects: Vec<f64>,
}

impl LaxReport {
    pub fn initial_defect(&self) -> f64 {
        self.defects.first().copied().unwrap_or(0.0)
    }

    pub fn max_defect(&self) -> f64 {
        self.defects.iter().copied().fold(0.0, f64::max)
    }
}

fn defect(omega: &GridField, phi: &GridField, lambda: Complex64) -> Result<f64> {
    let l = bracket(omega, phi)?;
    let r = l.sub(&phi.scale_complex(lambda))?;
    let norm = phi.rms_norm();
    Ok(if norm == 0.0 { 0.0 } else { r.rms_norm() / norm })
}

/// Evolves φ by the second Lax equation on a steady Ω and reports the
/// eigen-defect of the first along the way.
pub fn lax_residuals(
    omega: &GridField,
    phi: &GridField,
    lambda: Complex64,
    t1: f64,
    control: LaxControl,
) -> Result<LaxReport> {
    if !(t1 >= 0.0 && t1.is_finite()) || !(control.dt > 0.0) || control.samples < 2 {
        return Err(LabError::config(format!("invalid Lax run: t1 = {t1}, {control:?}")));
    }
    let psi = invert_laplacian(omega)?;
    let steady = bracket(&psi, omega)?.max_norm();
    if steady > STEADY_TOL {
        return Err(LabError::Precondition(format!(
            "base flow is not steady: ‖{{Ψ,Ω}}‖ = {steady:e}"
        )));
    }
    let jac_lhs = bracket(&bracket(&psi, omega)?, phi)?;
    let jac_rhs = bracket(&psi, &bracket(omega, phi)?)?.sub(&bracket(omega, &bracket(&psi, phi)?)?)?;
    let compatibility = jac_lhs.sub(&jac_rhs)?.max_norm();

    let field = |f: &GridField| -> Result<GridField> { Ok(bracket(&psi, f)?.scale(-1.0)) };
    let mut phi = phi.dealiased();
    let mut t = 0.0;
    let mut times = Vec::with_capacity(control.samples);
    let mut defects = Vec::with_capacity(control.samples);
    for s in 0..control.samples {
        let target = t1 * s as f64 / (control.samples - 1) as f64;
        let span = target - t;
        if span > 0.0 {
            let steps = ((span / control.dt) - 1e-9).ceil().max(1.0) as usize;
            let h = span / steps as f64;
            for _ in 0..steps {
                let k1 = field(&phi)?;
                let k2 = field(&phi.add(&k1.scale(0.5 * h))?)?;
                let k3 = field(&phi.add(&k2.scale(0.5 * h))?)?;
                let k4 = field(&phi.add(&k3.scale(h))?)?;
                let inc = k1.add(&k2.scale(2.0))?.add(&k3.scale(2.0))?.add(&k4)?.scale(h / 6.0);
                phi = phi.add(&inc)?;
            }
        }
        t = target;
        times.push(t);
        defects.push(defect(omega, &phi, lambda)?);
    }
    Ok(LaxReport {
        lambda: [lambda.re, lambda.im],
        steady_residual: steady,
        compatibility_residual: compatibility,
        times,
        defects,
    })
}
