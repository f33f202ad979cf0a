use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::lattice::{interaction_coefficient, WaveVector};

/// Normalization of the chain coefficients.
///
/// `Formula` uses A(·,·) as defined; `PaperTable` doubles every coefficient,
/// which is the normalization of the four/five-mode constants
/// (A₁ = −3/10, A₂ = 1/2, ...).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
pub enum Convention {
    #[serde(rename = "formula")]
    Formula,
    #[default]
    #[serde(rename = "paper-table")]
    PaperTable,
}

impl Convention {
    pub fn factor(self) -> f64 {
        match self {
            Convention::Formula => 1.0,
            Convention::PaperTable => 2.0,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Convention::Formula => "formula",
            Convention::PaperTable => "paper-table",
        }
    }
}

impl std::str::FromStr for Convention {
    type Err = crate::LabError;

    fn from_str(s: &str) -> crate::Result<Self> {
        match s {
            "formula" => Ok(Convention::Formula),
            "paper-table" => Ok(Convention::PaperTable),
            other => Err(crate::LabError::Config(format!("unknown convention `{other}`"))),
        }
    }
}

/// The invariant subsystem of the linearized equation along the class
/// Σ_k̂ = {k̂ + np}:
///
/// ω̇_n = α_n ω_{n−1} + β_n ω_{n+1},
/// α_n = c Γ A(p, k̂+(n−1)p),  β_n = c Γ̄ A(−p, k̂+(n+1)p).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ClassChain {
    pub khat: WaveVector,
    pub p: WaveVector,
    pub gamma: Complex64,
    pub convention: Convention,
}

impl ClassChain {
    pub fn new(khat: WaveVector, p: WaveVector, gamma: Complex64, convention: Convention) -> Self {
        ClassChain {
            khat,
            p,
            gamma,
            convention,
        }
    }

    pub fn real(khat: WaveVector, p: WaveVector, gamma: f64, convention: Convention) -> Self {
        Self::new(khat, p, Complex64::new(gamma, 0.0), convention)
    }

    /// k̂ + np, or `None` for the excluded index where it vanishes.
    pub fn member(&self, n: i64) -> Option<WaveVector> {
        self.khat.shifted(&self.p, n)
    }

    /// p₁k̂₂ − p₂k̂₁. Constant along the class.
    pub fn determinant(&self) -> i64 {
        self.p.cross(&self.khat)
    }

    pub fn is_parallel(&self) -> bool {
        self.determinant() == 0
    }

    /// c·A(p, k̂+np), zero at the excluded index.
    fn scaled_coefficient(&self, n: i64) -> f64 {
        self.member(n)
            .map_or(0.0, |k| self.convention.factor() * interaction_coefficient(&self.p, &k))
    }

    /// α_n, the coefficient of ω_{n−1} in the equation for ω̇_n.
    pub fn sub_coefficient(&self, n: i64) -> Complex64 {
        self.gamma * self.scaled_coefficient(n - 1)
    }

    /// β_n, the coefficient of ω_{n+1} in the equation for ω̇_n.
    pub fn super_coefficient(&self, n: i64) -> Complex64 {
        // A(−p, q) = −A(p, q).
        -self.gamma.conj() * self.scaled_coefficient(n + 1)
    }

    /// Real-valued α_n after the diagonal gauge ω_n ↦ e^{inφ}ω_n that maps
    /// Γ = |Γ|e^{iφ} to |Γ|. The spectrum is unchanged.
    pub(crate) fn gauged_sub(&self, n: i64) -> f64 {
        self.gamma.norm() * self.scaled_coefficient(n - 1)
    }

    pub(crate) fn gauged_super(&self, n: i64) -> f64 {
        -self.gamma.norm() * self.scaled_coefficient(n + 1)
    }

    /// Index nearest to the foot of the perpendicular from the origin onto
    /// the class line; members around it have the smallest |k|.
    pub fn center_index(&self) -> i64 {
        let num = -(self.khat.dot(&self.p)) as f64;
        (num / self.p.norm_sq() as f64).round() as i64
    }

    /// b = −½ c |Γ| |p|⁻² (p₁k̂₂ − p₂k̂₁).
    pub fn signed_b(&self) -> f64 {
        -0.5 * self.convention.factor() * self.gamma.norm() * self.determinant() as f64 / self.p.norm_sq() as f64
    }

    /// Half-width 2|b| of the continuous-spectrum segment i[−2|b|, 2|b|].
    pub fn band_halfwidth(&self) -> f64 {
        2.0 * self.signed_b().abs()
    }

    /// Distance from λ to the band segment on the imaginary axis.
    pub fn distance_to_band(&self, lambda: Complex64) -> f64 {
        band_distance(lambda, self.band_halfwidth())
    }

    /// Indices m whose member sits on the circle |k| = |p|. There the chain
    /// splits: both links touching m vanish and e_m spans a zero mode.
    pub fn break_indices(&self) -> Vec<i64> {
        if self.is_parallel() {
            return Vec::new();
        }
        let pp = self.p.norm_sq();
        circle_indices(self, pp, |v| v == pp)
    }

    /// Largest |coefficient| scale, c·|Γ|·|det|/|p|² (the band's |b|·2).
    pub fn coefficient_scale(&self) -> f64 {
        self.band_halfwidth().max(f64::MIN_POSITIVE)
    }
}

pub(crate) fn band_distance(lambda: Complex64, halfwidth: f64) -> f64 {
    let over = (lambda.im.abs() - halfwidth).max(0.0);
    lambda.re.hypot(over)
}

/// Integer n with `pred(|k̂+np|²)` among those where |k̂+np|² ≤ radius_sq.
fn circle_indices(chain: &ClassChain, radius_sq: i64, pred: impl Fn(i64) -> bool) -> Vec<i64> {
    // |k̂+np|² = n²|p|² + 2n(k̂·p) + |k̂|² ≤ R² on a real interval around the
    // vertex; scan it with a one-index margin and test exactly.
    let pp = chain.p.norm_sq() as f64;
    let kp = chain.khat.dot(&chain.p) as f64;
    let kk = chain.khat.norm_sq() as f64;
    let disc = kp * kp - pp * (kk - radius_sq as f64);
    if disc < 0.0 {
        return Vec::new();
    }
    let s = disc.sqrt();
    let lo = ((-kp - s) / pp).floor() as i64 - 1;
    let hi = ((-kp + s) / pp).ceil() as i64 + 1;
    (lo..=hi)
        .filter(|&n| {
            chain
                .member(n)
                .is_some_and(|k| k.norm_sq() <= radius_sq && pred(k.norm_sq()))
        })
        .collect()
}

/// Members k̂ + np for n in [n_min, n_max], skipping the origin.
pub fn class_members(khat: &WaveVector, p: &WaveVector, n_min: i64, n_max: i64) -> Vec<WaveVector> {
    (n_min..=n_max).filter_map(|n| khat.shifted(p, n)).collect()
}

/// Members of Σ_k̂ inside the closed disk |k| ≤ |p|, in increasing n.
pub fn disk_intersection(khat: &WaveVector, p: &WaveVector) -> Vec<WaveVector> {
    let chain = ClassChain::real(*khat, *p, 1.0, Convention::Formula);
    circle_indices(&chain, p.norm_sq(), |_| true)
        .into_iter()
        .filter_map(|n| chain.member(n))
        .collect()
}
