//! Closed-form orbits on the stable/unstable manifolds of ±ω*, written in
//! the polar variables ω₁ = r cos θ, ω₄ = r sin θ, ω₂ = ρ cos ϑ, ω₃ = ρ sin ϑ.
//!
//! These orbits leave ω* and arrive at −ω* (or the reverse), so strictly
//! they form heteroclinic pairs along the line of fixed points; the
//! customary name "homoclinic" is kept in the API.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::{five_mode_rhs, FiveModeState, A1, A2};
use crate::error::{LabError, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Branch {
    KappaPositive,
    KappaNegative,
}

impl Branch {
    pub fn sign(self) -> f64 {
        match self {
            Branch::KappaPositive => 1.0,
            Branch::KappaNegative => -1.0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HomoclinicParams {
    pub gamma: f64,
    pub tau0: f64,
    pub theta0: f64,
    pub branch: Branch,
}

impl HomoclinicParams {
    pub fn new(gamma: f64, tau0: f64, theta0: f64, branch: Branch) -> Self {
        HomoclinicParams {
            gamma,
            tau0,
            theta0,
            branch,
        }
    }

    /// κ = ±√(−A₁A₂)·√(1 + A₂/(4A₁)).
    pub fn kappa(&self) -> f64 {
        self.branch.sign() * (-A1 * A2).sqrt() * (1.0 + A2 / (4.0 * A1)).sqrt()
    }

    /// α = −A₁Γκ⁻¹√(A₂/(A₂−A₁)).
    pub fn alpha(&self) -> f64 {
        -A1 * self.gamma / self.kappa() * (A2 / (A2 - A1)).sqrt()
    }

    /// β = −A₂/(2κ).
    pub fn beta(&self) -> f64 {
        -A2 / (2.0 * self.kappa())
    }

    /// θ + ϑ, constant along the orbit.
    pub fn phase_sum(&self) -> f64 {
        let s = (0.5 * (A2 / -A1).sqrt()).asin();
        match self.branch {
            Branch::KappaPositive => -s,
            Branch::KappaNegative => PI + s,
        }
    }

    /// τ(t) = κΓt + τ₀.
    pub fn tau(&self, t: f64) -> f64 {
        self.kappa() * self.gamma * t + self.tau0
    }

    /// Inverse of [`Self::tau`]; requires Γ ≠ 0.
    pub fn time_of(&self, tau: f64) -> f64 {
        (tau - self.tau0) / (self.kappa() * self.gamma)
    }
}

/// ln cosh τ without overflow.
fn ln_cosh(tau: f64) -> f64 {
    let a = tau.abs();
    a + (-2.0 * a).exp().ln_1p() - std::f64::consts::LN_2
}

fn sech(tau: f64) -> f64 {
    let e = (-tau.abs()).exp();
    2.0 * e / (1.0 + e * e)
}

struct Pieces {
    s: f64,
    th: f64,
    r: f64,
    rho: f64,
    theta: f64,
    vartheta: f64,
    c: f64,
    beta: f64,
}

fn pieces(tau: f64, p: &HomoclinicParams) -> Pieces {
    let s = sech(tau);
    let beta = p.beta();
    let r = (A2 / (A2 - A1)).sqrt() * p.gamma * s;
    let theta = beta * ln_cosh(tau) + p.theta0;
    Pieces {
        s,
        th: tau.tanh(),
        r,
        rho: (-A1 / A2).sqrt() * r,
        theta,
        vartheta: p.phase_sum() - theta,
        c: p.alpha() * beta / (1.0 + beta * beta),
        beta,
    }
}

/// State on the orbit at parameter τ (any Γ, including 0).
pub fn homoclinic_state_at_tau(tau: f64, p: &HomoclinicParams) -> FiveModeState {
    let q = pieces(tau, p);
    let (st, ct) = q.theta.sin_cos();
    let (sv, cv) = q.vartheta.sin_cos();
    FiveModeState {
        w1: q.r * ct,
        w2: q.rho * cv,
        w3: q.rho * sv,
        w4: q.r * st,
        wp: p.gamma * q.th,
        w0: q.c * q.s * (st - ct / q.beta),
        w5: q.c * q.s * (ct + st / q.beta),
    }
}

/// State at time t, with τ = κΓt + τ₀.
pub fn homoclinic_state(t: f64, p: &HomoclinicParams) -> Result<FiveModeState> {
    if p.gamma == 0.0 || !p.gamma.is_finite() {
        return Err(LabError::Domain(format!("orbit undefined for Γ = {}", p.gamma)));
    }
    Ok(homoclinic_state_at_tau(p.tau(t), p))
}

/// d/dt of [`homoclinic_state_at_tau`], differentiated in closed form.
pub fn homoclinic_derivative(tau: f64, p: &HomoclinicParams) -> FiveModeState {
    let q = pieces(tau, p);
    let dtau = p.kappa() * p.gamma;
    let (st, ct) = q.theta.sin_cos();
    let (sv, cv) = q.vartheta.sin_cos();
    let dr = -q.r * q.th * dtau;
    let drho = -q.rho * q.th * dtau;
    let dtheta = q.beta * q.th * dtau;
    let ds = -q.s * q.th * dtau;
    FiveModeState {
        w1: dr * ct - q.r * st * dtheta,
        w2: drho * cv + q.rho * sv * dtheta,
        w3: drho * sv - q.rho * cv * dtheta,
        w4: dr * st + q.r * ct * dtheta,
        wp: p.gamma * q.s * q.s * dtau,
        w0: q.c * (ds * (st - ct / q.beta) + q.s * (ct + st / q.beta) * dtheta),
        w5: q.c * (ds * (ct + st / q.beta) + q.s * (ct / q.beta - st) * dtheta),
    }
}

/// Largest |d/dt(orbit) − five_mode_rhs(orbit)| per component over a grid.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct OrbitResidual {
    /// Ordered as [`FiveModeState::to_array`].
    pub per_component: [f64; 7],
    pub max: f64,
    pub samples: usize,
}

impl OrbitResidual {
    fn record(&mut self, a: &FiveModeState, b: &FiveModeState) {
        for (slot, (x, y)) in self.per_component.iter_mut().zip(a.to_array().iter().zip(b.to_array())) {
            *slot = slot.max((x - y).abs());
        }
        self.max = self.per_component.iter().copied().fold(0.0, f64::max);
        self.samples += 1;
    }
}

/// Compares the analytic time derivative of the orbit with the vector field
/// on `tau_grid`. For Γ = 0 the orbit is the origin and the residual is 0.
pub fn orbit_residual(p: &HomoclinicParams, tau_grid: &[f64]) -> OrbitResidual {
    let mut rep = OrbitResidual::default();
    for &tau in tau_grid {
        let state = homoclinic_state_at_tau(tau, p);
        rep.record(&homoclinic_derivative(tau, p), &five_mode_rhs(&state));
    }
    rep
}

/// Same comparison with a central difference in t (step `h`).
pub fn orbit_residual_fd(p: &HomoclinicParams, tau_grid: &[f64], h: f64) -> OrbitResidual {
    let mut rep = OrbitResidual::default();
    let dtau = p.kappa() * p.gamma;
    for &tau in tau_grid {
        let plus = homoclinic_state_at_tau(tau + dtau * h, p).to_array();
        let minus = homoclinic_state_at_tau(tau - dtau * h, p).to_array();
        let diff: Vec<f64> = plus.iter().zip(minus).map(|(a, b)| (a - b) / (2.0 * h)).collect();
        let state = homoclinic_state_at_tau(tau, p);
        rep.record(&FiveModeState::from_slice(&diff), &five_mode_rhs(&state));
    }
    rep
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::galerkin::invariants;

    fn grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
        (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
    }

    #[test]
    fn derived_constants() {
        let p = HomoclinicParams::new(1.0, 0.0, 0.0, Branch::KappaPositive);
        assert!((p.kappa() - (7.0f64 / 80.0).sqrt()).abs() < 1e-15);
        assert!((p.kappa() - 0.295804).abs() < 1e-6);
        assert!((p.beta() + 0.845154).abs() < 1e-6);
        assert!((p.phase_sum() + 0.645497224367903f64.asin()).abs() < 1e-15);
        let m = HomoclinicParams {
            branch: Branch::KappaNegative,
            ..p
        };
        assert!((m.kappa() + p.kappa()).abs() < 1e-15);
        assert!((m.beta() - 0.845154).abs() < 1e-6);
    }

    #[test]
    fn state_at_tau_zero() {
        let p = HomoclinicParams::new(2.0, 0.0, 0.3, Branch::KappaPositive);
        let s = homoclinic_state_at_tau(0.0, &p);
        assert_eq!(s.wp, 0.0);
        let r = s.w1.hypot(s.w4);
        assert!((r - (5.0f64 / 8.0).sqrt() * 2.0).abs() < 1e-14);
        assert!((s.w2.hypot(s.w3) - (0.6f64).sqrt() * r).abs() < 1e-14);
    }

    #[test]
    fn residual_small_on_both_branches() {
        let taus = grid(-10.0, 10.0, 2001);
        for branch in [Branch::KappaPositive, Branch::KappaNegative] {
            for theta0 in [0.0, 1.0, 2.5] {
                let p = HomoclinicParams::new(1.0, 0.0, theta0, branch);
                assert!(orbit_residual(&p, &taus).max < 1e-12);
                assert!(orbit_residual_fd(&p, &taus, 1e-6).max < 1e-5);
            }
        }
    }

    #[test]
    fn invariants_on_orbit() {
        let p = HomoclinicParams::new(1.3, 0.2, 1.0, Branch::KappaNegative);
        for tau in grid(-6.0, 6.0, 50) {
            let inv = invariants(&homoclinic_state_at_tau(tau, &p));
            assert!((inv.i - A2 * 1.69).abs() < 1e-12);
            assert!(inv.u.abs() < 1e-12);
            assert!((inv.j - 1.69).abs() < 1e-12);
        }
    }

    #[test]
    fn degenerate_gamma() {
        let p = HomoclinicParams::new(0.0, 0.0, 0.0, Branch::KappaPositive);
        assert!(matches!(homoclinic_state(0.0, &p), Err(LabError::Domain(_))));
        assert_eq!(orbit_residual(&p, &[-1.0, 0.0, 1.0]).max, 0.0);
    }

    #[test]
    fn stable_far_tail() {
        let p = HomoclinicParams::new(1.0, 0.0, 0.0, Branch::KappaPositive);
        let s = homoclinic_state_at_tau(800.0, &p);
        assert_eq!(s.wp, 1.0);
        assert!(s.w1.is_finite() && s.w1.abs() < 1e-300);
    }
}
