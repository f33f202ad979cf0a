//! Residual check of the gauge transform
//!
//!   p̃ = (1/Ω_x)[p_x − (∂_x ln f) p],  Ψ̃ = Ψ + F,  Ω̃ = Ω + ΔF.
//!
//! p̃ and its derivatives are formed pointwise by the quotient rule from
//! spectral derivatives of the smooth inputs, so nothing singular is ever
//! differentiated spectrally. Nodes where Ω_x or f nearly vanish are masked.

use num_complex::Complex64;
use serde::Serialize;

use super::{bracket, invert_laplacian, laplacian, GridField};
use crate::error::{LabError, Result};

/// Relative threshold δ of the singular-set mask.
pub const MASK_DELTA: f64 = 1e-6;

/// Largest {Ω, f}, {Ω, p} accepted as solving the λ = 0 system.
pub const PREMISE_TOL: f64 = 1e-10;

#[derive(Clone, Debug)]
pub struct DarbouxFields {
    pub f: GridField,
    pub p: GridField,
    pub omega: GridField,
    pub big_f: GridField,
}

#[derive(Clone, Debug)]
pub enum DarbouxTime {
    /// Ω steady: f_t = −{Ψ, f}, p_t = −{Ψ, p} by the second equation.
    Steady,
    /// Central difference of p̃ between two snapshots at t ∓ dt.
    Snapshots {
        dt: f64,
        before: Box<DarbouxFields>,
        after: Box<DarbouxFields>,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DarbouxReport {
    pub n: usize,
    /// Fraction of nodes excluded by the mask.
    pub mask_fraction: f64,
    pub reliable: bool,
    /// p̃ vanishes on the mask (e.g. p = f).
    pub degenerate: bool,
    pub premise_residual: f64,
    /// {Ω, ΔF}
    pub constraint_laplacian: f64,
    /// {Ω + ΔF, F}
    pub constraint_potential: f64,
    /// {Ω̃, p̃}
    pub transformed_l: f64,
    /// ∂_t p̃ + {Ψ̃, p̃}
    pub transformed_a: f64,
    pub ptilde_max: f64,
}

impl DarbouxReport {
    pub fn max_residual(&self) -> f64 {
        [
            self.constraint_laplacian,
            self.constraint_potential,
            self.transformed_l,
            self.transformed_a,
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }
}

struct Derivs {
    v: Vec<Complex64>,
    x: Vec<Complex64>,
    y: Vec<Complex64>,
    xx: Vec<Complex64>,
    xy: Vec<Complex64>,
}

fn derivs(f: &GridField) -> Derivs {
    let fx = f.dx();
    Derivs {
        v: f.values().to_vec(),
        x: fx.values().to_vec(),
        y: f.dy().values().to_vec(),
        xx: fx.dx().values().to_vec(),
        xy: fx.dy().values().to_vec(),
    }
}

/// p̃ and its x, y derivatives at node i.
fn gauge_at(p: &Derivs, f: &Derivs, om: &Derivs, i: usize) -> (Complex64, Complex64, Complex64) {
    let (pv, fv) = (p.v[i], f.v[i]);
    let num = p.x[i] - f.x[i] * pv / fv;
    let num_x = p.xx[i] - (f.xx[i] * pv + f.x[i] * p.x[i]) / fv + f.x[i] * f.x[i] * pv / (fv * fv);
    let num_y = p.xy[i] - (f.xy[i] * pv + f.x[i] * p.y[i]) / fv + f.x[i] * f.y[i] * pv / (fv * fv);
    let den = om.x[i];
    let den2 = den * den;
    (
        num / den,
        (num_x * den - num * om.xx[i]) / den2,
        (num_y * den - num * om.xy[i]) / den2,
    )
}

fn mask_of(omega: &GridField, f: &GridField) -> Vec<bool> {
    let ox = omega.dx();
    let (dox, df) = (MASK_DELTA * ox.max_norm(), MASK_DELTA * f.max_norm());
    ox.values()
        .iter()
        .zip(f.values())
        .map(|(a, b)| a.norm() > dox && b.norm() > df)
        .collect()
}

fn masked_max(values: impl Iterator<Item = Complex64>, mask: &[bool]) -> f64 {
    values
        .zip(mask)
        .filter(|(_, m)| **m)
        .map(|(v, _)| v.norm())
        .fold(0.0, f64::max)
}

fn gauge_values(fields: &DarbouxFields, mask: &[bool]) -> Vec<Complex64> {
    let (p, f, om) = (derivs(&fields.p), derivs(&fields.f), derivs(&fields.omega));
    (0..mask.len())
        .map(|i| {
            if mask[i] {
                gauge_at(&p, &f, &om, i).0
            } else {
                Complex64::new(0.0, 0.0)
            }
        })
        .collect()
}

pub fn darboux_transform(fields: &DarbouxFields, time: &DarbouxTime) -> Result<DarbouxReport> {
    let DarbouxFields { f, p, omega, big_f } = fields;
    let n = omega.n();
    for g in [f, p, big_f] {
        if g.n() != n {
            return Err(LabError::domain(format!("grid sizes differ: {} vs {n}", g.n())));
        }
    }
    let premise = bracket(omega, f)?.max_norm().max(bracket(omega, p)?.max_norm());
    if premise > PREMISE_TOL {
        return Err(LabError::Precondition(format!(
            "f or p does not solve {{Ω, ·}} = 0 (residual {premise:e})"
        )));
    }

    let mask = mask_of(omega, f);
    let kept = mask.iter().filter(|m| **m).count();
    let mask_fraction = 1.0 - kept as f64 / mask.len() as f64;

    let psi = invert_laplacian(omega)?;
    let lap_f = laplacian(big_f);
    let omega_t = omega.add(&lap_f)?;
    let psi_t = psi.add(big_f)?;
    let constraint_laplacian = bracket(omega, &lap_f)?.masked_max_norm(&mask);
    let constraint_potential = bracket(&omega_t, big_f)?.masked_max_norm(&mask);

    let (pd, fd, od) = (derivs(p), derivs(f), derivs(omega));
    let (otx, oty) = (omega_t.dx(), omega_t.dy());
    let (ptx, pty) = (psi_t.dx(), psi_t.dy());

    let dt_ptilde: Vec<Complex64> = match time {
        DarbouxTime::Steady => {
            let (psx, psy) = (psi.dx(), psi.dy());
            let advect =
                |g: &GridField| -> Result<GridField> { Ok(psx.mul(&g.dy())?.sub(&psy.mul(&g.dx())?)?.scale(-1.0)) };
            let (p_t, f_t) = (advect(p)?, advect(f)?);
            let (pxt, fxt) = (p_t.dx(), f_t.dx());
            (0..mask.len())
                .map(|i| {
                    if !mask[i] {
                        return Complex64::new(0.0, 0.0);
                    }
                    let (pv, fv) = (pd.v[i], fd.v[i]);
                    let (pt, ft) = (p_t.values()[i], f_t.values()[i]);
                    let num_t =
                        pxt.values()[i] - (fxt.values()[i] * pv + fd.x[i] * pt) / fv + fd.x[i] * ft * pv / (fv * fv);
                    num_t / od.x[i]
                })
                .collect()
        }
        DarbouxTime::Snapshots { dt, before, after } => {
            if !(*dt > 0.0) {
                return Err(LabError::config(format!("snapshot spacing must be positive, got {dt}")));
            }
            let plus = gauge_values(after, &mask);
            let minus = gauge_values(before, &mask);
            plus.iter().zip(&minus).map(|(a, b)| (a - b) / (2.0 * dt)).collect()
        }
    };

    let mut ptilde_max = 0.0f64;
    let mut res_l = Vec::with_capacity(mask.len());
    let mut res_a = Vec::with_capacity(mask.len());
    for i in 0..mask.len() {
        if !mask[i] {
            res_l.push(Complex64::new(0.0, 0.0));
            res_a.push(Complex64::new(0.0, 0.0));
            continue;
        }
        let (pt, pt_x, pt_y) = gauge_at(&pd, &fd, &od, i);
        ptilde_max = ptilde_max.max(pt.norm());
        res_l.push(otx.values()[i] * pt_y - oty.values()[i] * pt_x);
        res_a.push(dt_ptilde[i] + ptx.values()[i] * pt_y - pty.values()[i] * pt_x);
    }

    Ok(DarbouxReport {
        n,
        mask_fraction,
        reliable: mask_fraction <= 0.5,
        degenerate: ptilde_max <= 1e-10 * (1.0 + p.max_norm()),
        premise_residual: premise,
        constraint_laplacian,
        constraint_potential,
        transformed_l: masked_max(res_l.into_iter(), &mask),
        transformed_a: masked_max(res_a.into_iter(), &mask),
        ptilde_max,
    })
}

/// The shipped steady family: Ω = Γcos(x+y), f = Ω, p = Ω² (or p = f when
/// `degenerate`), F = εcos(x+y).
pub fn cosine_example(n: usize, gamma: f64, epsilon: f64, degenerate: bool) -> Result<DarbouxFields> {
    let omega = GridField::from_fn(n, |x, y| gamma * (x + y).cos())?;
    let p = if degenerate { omega.clone() } else { omega.mul(&omega)? };
    Ok(DarbouxFields {
        f: omega.clone(),
        p,
        omega,
        big_f: GridField::from_fn(n, |x, y| epsilon * (x + y).cos())?,
    })
}
