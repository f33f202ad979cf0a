//! Low-dimensional truncations around the fixed point ω_p = Γ, p = (1,1),
//! on the unstable class k̂ = (−3,−2).
//!
//! Modes are abbreviated ω_n = ω_{k̂+np}. The four-mode linear model keeps
//! n = 1..4; the five-mode nonlinear model adds ω_p, and ω₀, ω₅ are slaved
//! variables driven by the others.

mod homoclinic;
mod integrate;

use nalgebra::{DMatrix, Matrix4};
use num_complex::Complex64;
use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::lattice::{interaction_coefficient_exact, WaveVector};

pub use homoclinic::{
    homoclinic_derivative, homoclinic_state, homoclinic_state_at_tau, orbit_residual, orbit_residual_fd, Branch,
    HomoclinicParams, OrbitResidual,
};
pub use integrate::{integrate, write_trajectory_csv, IntegrationError, StepControl, Trajectory, DEFAULT_MAX_STEPS};

/// The exact coefficient table of the truncated models.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ModelConstants {
    pub a1: Ratio<i64>,
    pub a2: Ratio<i64>,
    pub a3: Ratio<i64>,
    pub a4: Ratio<i64>,
    pub a12: Ratio<i64>,
    pub a23: Ratio<i64>,
    pub a34: Ratio<i64>,
}

pub const CONSTANTS: ModelConstants = ModelConstants {
    a1: Ratio::new_raw(-3, 10),
    a2: Ratio::new_raw(1, 2),
    a3: Ratio::new_raw(1, 2),
    a4: Ratio::new_raw(-3, 10),
    a12: Ratio::new_raw(-4, 5),
    a23: Ratio::new_raw(0, 1),
    a34: Ratio::new_raw(4, 5),
};

pub const A1: f64 = -0.3;
pub const A2: f64 = 0.5;
pub const A12: f64 = -0.8;

impl ModelConstants {
    /// The same table rebuilt as 2·A(·,·) on the class of `khat` through
    /// `p`: A_n = 2A(p, k̂+np), A_{m,n} = 2A(k̂+mp, k̂+np).
    pub fn from_interaction(p: &WaveVector, khat: &WaveVector) -> Option<Self> {
        let k = |n: i64| khat.shifted(p, n);
        let two = |a: &WaveVector, b: &WaveVector| -> Option<Ratio<i64>> {
            let r = interaction_coefficient_exact(a, b)? * Ratio::from_integer(2);
            Some(Ratio::new(
                i64::try_from(*r.numer()).ok()?,
                i64::try_from(*r.denom()).ok()?,
            ))
        };
        Some(ModelConstants {
            a1: two(p, &k(1)?)?,
            a2: two(p, &k(2)?)?,
            a3: two(p, &k(3)?)?,
            a4: two(p, &k(4)?)?,
            a12: two(&k(1)?, &k(2)?)?,
            a23: two(&k(2)?, &k(3)?)?,
            a34: two(&k(3)?, &k(4)?)?,
        })
    }
}

/// State of the five-mode model plus the two slaved amplitudes.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct FiveModeState {
    pub w1: f64,
    pub w2: f64,
    pub w3: f64,
    pub w4: f64,
    pub wp: f64,
    #[serde(default)]
    pub w0: f64,
    #[serde(default)]
    pub w5: f64,
}

impl FiveModeState {
    pub const DIM: usize = 7;

    pub fn fixed_point(gamma: f64) -> Self {
        FiveModeState {
            wp: gamma,
            ..Default::default()
        }
    }

    /// Order: w1, w2, w3, w4, wp, w0, w5.
    pub fn to_array(&self) -> [f64; 7] {
        [self.w1, self.w2, self.w3, self.w4, self.wp, self.w0, self.w5]
    }

    pub fn from_slice(v: &[f64]) -> Self {
        FiveModeState {
            w1: v[0],
            w2: v[1],
            w3: v[2],
            w4: v[3],
            wp: v[4],
            w0: v[5],
            w5: v[6],
        }
    }

    pub fn max_abs_diff(&self, other: &FiveModeState) -> f64 {
        self.to_array()
            .iter()
            .zip(other.to_array())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

/// Γ times the four-mode linear truncation; rows are ω̇₁..ω̇₄.
pub fn four_mode_matrix(gamma: f64) -> Matrix4<f64> {
    Matrix4::new(
        0.0, -A2, 0.0, 0.0, //
        A1, 0.0, -A2, 0.0, //
        0.0, A2, 0.0, -A1, //
        0.0, 0.0, A2, 0.0,
    ) * gamma
}

/// Eigenvalues of [`four_mode_matrix`].
pub fn four_mode_eigenvalues(gamma: f64) -> crate::Result<Vec<Complex64>> {
    let m = four_mode_matrix(gamma);
    crate::spectra::dense_eigenvalues(DMatrix::from_iterator(4, 4, m.iter().copied()))
}

pub fn five_mode_rhs(s: &FiveModeState) -> FiveModeState {
    FiveModeState {
        w1: -A2 * s.wp * s.w2,
        w2: A1 * s.wp * s.w1 - A2 * s.wp * s.w3,
        w3: A2 * s.wp * s.w2 - A1 * s.wp * s.w4,
        w4: A2 * s.wp * s.w3,
        wp: A12 * (s.w3 * s.w4 - s.w1 * s.w2),
        w0: -A1 * s.wp * s.w1,
        w5: A1 * s.wp * s.w4,
    }
}

/// [`five_mode_rhs`] in the slice form used by [`integrate`].
pub fn five_mode_field(_t: f64, y: &[f64], dy: &mut [f64]) {
    let d = five_mode_rhs(&FiveModeState::from_slice(y)).to_array();
    dy.copy_from_slice(&d);
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Invariants {
    pub i: f64,
    pub u: f64,
    pub j: f64,
}

/// I = 2A₁₂(ω₁ω₃ + ω₂ω₄) + A₂ω_p², U = A₁(ω₁² + ω₄²) + A₂(ω₂² + ω₃²),
/// J = ω_p² + ω₁² + ω₂² + ω₃² + ω₄². The slaved ω₀, ω₅ do not enter.
pub fn invariants(s: &FiveModeState) -> Invariants {
    Invariants {
        i: 2.0 * A12 * (s.w1 * s.w3 + s.w2 * s.w4) + A2 * s.wp * s.wp,
        u: A1 * (s.w1 * s.w1 + s.w4 * s.w4) + A2 * (s.w2 * s.w2 + s.w3 * s.w3),
        j: s.wp * s.wp + s.w1 * s.w1 + s.w2 * s.w2 + s.w3 * s.w3 + s.w4 * s.w4,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn table_identities() {
        let c = CONSTANTS;
        assert_eq!(c.a12, c.a1 - c.a2);
        assert_eq!(c.a34, -c.a12);
        assert_eq!(c.a23, Ratio::from_integer(0));
        assert_eq!(c.a3, c.a2);
        assert_eq!(c.a4, c.a1);
        assert_eq!(A1, -3.0 / 10.0);
        assert_eq!(A12, A1 - A2);
    }

    #[test]
    fn fixed_point_is_stationary() {
        let r = five_mode_rhs(&FiveModeState::fixed_point(1.7));
        assert_eq!(r, FiveModeState::default());
    }

    #[test]
    fn invariants_at_fixed_points() {
        for g in [1.0, -2.5, 0.3] {
            let inv = invariants(&FiveModeState::fixed_point(g));
            assert_eq!((inv.i, inv.u, inv.j), (A2 * g * g, 0.0, g * g));
            let neg = invariants(&FiveModeState::fixed_point(-g));
            assert_eq!(inv, neg);
        }
    }

    #[test]
    fn slaved_modes_do_not_enter_invariants() {
        let a = FiveModeState {
            w1: 0.1,
            w2: -0.4,
            w3: 0.3,
            w4: 0.7,
            wp: 1.1,
            w0: 0.0,
            w5: 0.0,
        };
        let b = FiveModeState { w0: 5.0, w5: -3.0, ..a };
        assert_eq!(invariants(&a), invariants(&b));
    }
}
