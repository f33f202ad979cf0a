//! Wave-vector arithmetic and the kinetic form of 2D Euler.
//!
//! With Ω = Σ ω_k e^{ik·X} over k ∈ Z²\{0}, the vorticity equation becomes
//! the quadratic system ω̇_k = Σ_{p+q=k} A(p,q) ω_p ω_q where
//! A(p,q) = ½(|q|⁻² − |p|⁻²)(p₁q₂ − p₂q₁). The sum runs over ordered pairs.

use std::collections::BTreeMap;
use std::fmt;

use num_complex::Complex64;
use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};

/// Largest admissible |k₁|, |k₂|; keeps |k|² and cross products inside i64.
pub const MAX_COMPONENT: i64 = 1 << 30;

/// A point of the punctured integer lattice Z²\{0}.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct WaveVector {
    k1: i64,
    k2: i64,
}

impl WaveVector {
    pub fn new(k1: i64, k2: i64) -> Result<Self> {
        if k1 == 0 && k2 == 0 {
            return Err(LabError::domain("the zero wave vector is not part of the lattice"));
        }
        if k1.abs() > MAX_COMPONENT || k2.abs() > MAX_COMPONENT {
            return Err(LabError::domain(format!(
                "wave vector ({k1},{k2}) exceeds |k_i| ≤ {MAX_COMPONENT}"
            )));
        }
        Ok(WaveVector { k1, k2 })
    }

    /// Like [`WaveVector::new`] but returns `None` for the origin.
    pub fn checked(k1: i64, k2: i64) -> Option<Self> {
        Self::new(k1, k2).ok()
    }

    pub fn k1(&self) -> i64 {
        self.k1
    }

    pub fn k2(&self) -> i64 {
        self.k2
    }

    pub fn components(&self) -> [i64; 2] {
        [self.k1, self.k2]
    }

    pub fn norm_sq(&self) -> i64 {
        self.k1 * self.k1 + self.k2 * self.k2
    }

    pub fn norm(&self) -> f64 {
        (self.norm_sq() as f64).sqrt()
    }

    /// p₁q₂ − p₂q₁.
    pub fn cross(&self, other: &WaveVector) -> i64 {
        self.k1 * other.k2 - self.k2 * other.k1
    }

    pub fn dot(&self, other: &WaveVector) -> i64 {
        self.k1 * other.k1 + self.k2 * other.k2
    }

    pub fn is_parallel(&self, other: &WaveVector) -> bool {
        self.cross(other) == 0
    }

    /// `self + n·step`, or `None` when that lands on the origin.
    pub fn shifted(&self, step: &WaveVector, n: i64) -> Option<WaveVector> {
        let k1 = n.checked_mul(step.k1)?.checked_add(self.k1)?;
        let k2 = n.checked_mul(step.k2)?.checked_add(self.k2)?;
        Self::checked(k1, k2)
    }

    pub fn try_add(&self, other: &WaveVector) -> Option<WaveVector> {
        self.shifted(other, 1)
    }

    pub fn try_sub(&self, other: &WaveVector) -> Option<WaveVector> {
        self.shifted(other, -1)
    }

    /// Half-lattice representative of {k, −k}: k₁ > 0, or k₁ = 0 and k₂ > 0.
    pub fn canonical(&self) -> WaveVector {
        if self.is_canonical() {
            *self
        } else {
            -*self
        }
    }

    pub fn is_canonical(&self) -> bool {
        self.k1 > 0 || (self.k1 == 0 && self.k2 > 0)
    }
}

impl std::ops::Neg for WaveVector {
    type Output = WaveVector;

    fn neg(self) -> WaveVector {
        WaveVector {
            k1: -self.k1,
            k2: -self.k2,
        }
    }
}

impl fmt::Display for WaveVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.k1, self.k2)
    }
}

impl std::str::FromStr for WaveVector {
    type Err = LabError;

    /// Parses `k1,k2` (optionally wrapped in parentheses).
    fn from_str(s: &str) -> Result<Self> {
        let trimmed = s.trim().trim_start_matches('(').trim_end_matches(')');
        let mut parts = trimmed.split(',').map(str::trim);
        let (Some(a), Some(b), None) = (parts.next(), parts.next(), parts.next()) else {
            return Err(LabError::config(format!("expected `k1,k2`, got `{s}`")));
        };
        let parse = |t: &str| {
            t.parse::<i64>()
                .map_err(|e| LabError::config(format!("bad lattice coordinate `{t}`: {e}")))
        };
        WaveVector::new(parse(a)?, parse(b)?)
    }
}

const EXACT_NORM_LIMIT: i64 = 1 << 53;

/// A(p,q) as an exact rational. Requires |p|², |q|² ≤ 2⁵³.
pub fn interaction_coefficient_exact(p: &WaveVector, q: &WaveVector) -> Option<Ratio<i128>> {
    let (np, nq) = (p.norm_sq(), q.norm_sq());
    if np > EXACT_NORM_LIMIT || nq > EXACT_NORM_LIMIT {
        return None;
    }
    let (np, nq) = (np as i128, nq as i128);
    let cross = p.cross(q) as i128;
    Some(Ratio::new((np - nq) * cross, 2 * np * nq))
}

/// The triad coefficient A(p,q) = ½(|q|⁻² − |p|⁻²)(p₁q₂ − p₂q₁).
///
/// Evaluated exactly in rational arithmetic and rounded once per numerator
/// and denominator; falls back to floating point for huge wave vectors.
pub fn interaction_coefficient(p: &WaveVector, q: &WaveVector) -> f64 {
    match interaction_coefficient_exact(p, q) {
        Some(r) => *r.numer() as f64 / *r.denom() as f64,
        None => {
            let (np, nq) = (p.norm_sq() as f64, q.norm_sq() as f64);
            0.5 * (1.0 / nq - 1.0 / np) * p.cross(q) as f64
        }
    }
}

/// Fallible variant on raw coordinates.
pub fn interaction_coefficient_of(p: [i64; 2], q: [i64; 2]) -> Result<f64> {
    let p = WaveVector::new(p[0], p[1])?;
    let q = WaveVector::new(q[0], q[1])?;
    Ok(interaction_coefficient(&p, &q))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Basis {
    #[serde(rename = "exp")]
    Exponential,
    #[serde(rename = "cos")]
    Cosine,
}

/// A finite set of Fourier amplitudes.
///
/// Exponential states store ω_k for a set closed under negation. Cosine
/// states store one real amplitude per canonical half-lattice vector, with
/// Ω = Σ c_k cos(k·X).
#[derive(Clone, Debug, PartialEq)]
pub struct ModeState {
    basis: Basis,
    modes: BTreeMap<WaveVector, Complex64>,
}

impl ModeState {
    /// Exponential state. The support must be closed under k ↦ −k.
    pub fn exponential(modes: impl IntoIterator<Item = (WaveVector, Complex64)>) -> Result<Self> {
        let modes: BTreeMap<_, _> = modes.into_iter().collect();
        if let Some(k) = modes.keys().find(|k| !modes.contains_key(&-**k)) {
            return Err(LabError::config(format!(
                "mode set is not symmetric: {k} present without {}",
                -*k
            )));
        }
        Ok(ModeState {
            basis: Basis::Exponential,
            modes,
        })
    }

    /// Exponential state built from half-lattice amplitudes, filling in
    /// ω_{−k} = conj(ω_k).
    pub fn exponential_from_half(modes: impl IntoIterator<Item = (WaveVector, Complex64)>) -> Result<Self> {
        let mut map = BTreeMap::new();
        for (k, w) in modes {
            let k_c = k.canonical();
            let w_c = if k_c == k { w } else { w.conj() };
            if map.insert(k_c, w_c).is_some() {
                return Err(LabError::config(format!("mode {k} given twice")));
            }
            map.insert(-k_c, w_c.conj());
        }
        Ok(ModeState {
            basis: Basis::Exponential,
            modes: map,
        })
    }

    /// Cosine state; keys are folded onto their canonical representative.
    pub fn cosine(modes: impl IntoIterator<Item = (WaveVector, f64)>) -> Result<Self> {
        let mut map = BTreeMap::new();
        for (k, c) in modes {
            if map.insert(k.canonical(), Complex64::new(c, 0.0)).is_some() {
                return Err(LabError::config(format!("cosine mode {k} given twice")));
            }
        }
        Ok(ModeState {
            basis: Basis::Cosine,
            modes: map,
        })
    }

    pub fn zeros(basis: Basis, support: impl IntoIterator<Item = WaveVector>) -> Result<Self> {
        match basis {
            Basis::Exponential => Self::exponential(support.into_iter().map(|k| (k, Complex64::new(0.0, 0.0)))),
            Basis::Cosine => Self::cosine(support.into_iter().map(|k| (k, 0.0))),
        }
    }

    pub fn basis(&self) -> Basis {
        self.basis
    }

    pub fn len(&self) -> usize {
        self.modes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.modes.is_empty()
    }

    pub fn get(&self, k: &WaveVector) -> Option<Complex64> {
        match self.basis {
            Basis::Exponential => self.modes.get(k).copied(),
            Basis::Cosine => self.modes.get(&k.canonical()).copied(),
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (&WaveVector, &Complex64)> {
        self.modes.iter()
    }

    pub fn mode_set(&self) -> impl Iterator<Item = &WaveVector> {
        self.modes.keys()
    }

    /// Overwrites an existing amplitude. Exponential states update the
    /// conjugate partner too.
    pub fn set(&mut self, k: WaveVector, value: Complex64) -> Result<()> {
        match self.basis {
            Basis::Exponential => {
                if !self.modes.contains_key(&k) {
                    return Err(LabError::config(format!("mode {k} not in support")));
                }
                self.modes.insert(-k, value.conj());
                self.modes.insert(k, value);
            }
            Basis::Cosine => {
                let kc = k.canonical();
                if !self.modes.contains_key(&kc) {
                    return Err(LabError::config(format!("mode {k} not in support")));
                }
                self.modes.insert(kc, Complex64::new(value.re, 0.0));
            }
        }
        Ok(())
    }

    pub fn scaled(&self, s: f64) -> ModeState {
        ModeState {
            basis: self.basis,
            modes: self.modes.iter().map(|(k, w)| (*k, w * s)).collect(),
        }
    }

    /// Whether ω_{−k} = conj(ω_k) holds to `tol` (absolute).
    pub fn is_reality_compliant(&self, tol: f64) -> bool {
        match self.basis {
            Basis::Cosine => self.modes.values().all(|w| w.im == 0.0),
            Basis::Exponential => self
                .modes
                .iter()
                .all(|(k, w)| self.modes.get(&-*k).is_some_and(|m| (m - w.conj()).norm() <= tol)),
        }
    }

    /// Cosine amplitudes c_k become ω_{±k} = c_k/2.
    pub fn to_exponential(&self) -> ModeState {
        match self.basis {
            Basis::Exponential => self.clone(),
            Basis::Cosine => {
                let mut modes = BTreeMap::new();
                for (k, c) in &self.modes {
                    modes.insert(*k, c * 0.5);
                    modes.insert(-*k, c * 0.5);
                }
                ModeState {
                    basis: Basis::Exponential,
                    modes,
                }
            }
        }
    }

    /// Inverse of [`ModeState::to_exponential`]: c_k = ω_k + ω_{−k} on the
    /// canonical representatives. Any odd (sine) part is discarded.
    pub fn to_cosine(&self) -> ModeState {
        match self.basis {
            Basis::Cosine => self.clone(),
            Basis::Exponential => {
                let modes = self
                    .modes
                    .iter()
                    .filter(|(k, _)| k.is_canonical())
                    .map(|(k, w)| {
                        let partner = self.modes.get(&-*k).copied().unwrap_or_default();
                        (*k, Complex64::new((w + partner).re, 0.0))
                    })
                    .collect();
                ModeState {
                    basis: Basis::Cosine,
                    modes,
                }
            }
        }
    }

    /// Flattens to (k, amplitude) pairs in canonical order.
    pub fn to_vec(&self) -> Vec<(WaveVector, Complex64)> {
        self.modes.iter().map(|(k, w)| (*k, *w)).collect()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&ModeStateJson::from(self))?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let raw: ModeStateJson = serde_json::from_str(s)?;
        raw.try_into()
    }
}

#[derive(Serialize, Deserialize)]
struct ModeJson {
    k: [i64; 2],
    re: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    im: Option<f64>,
}

#[derive(Serialize, Deserialize)]
struct ModeStateJson {
    basis: Basis,
    modes: Vec<ModeJson>,
}

impl From<&ModeState> for ModeStateJson {
    fn from(s: &ModeState) -> Self {
        let modes = s
            .modes
            .iter()
            .map(|(k, w)| ModeJson {
                k: k.components(),
                re: w.re,
                im: (s.basis == Basis::Exponential).then_some(w.im),
            })
            .collect();
        ModeStateJson { basis: s.basis, modes }
    }
}

impl TryFrom<ModeStateJson> for ModeState {
    type Error = LabError;

    fn try_from(raw: ModeStateJson) -> Result<Self> {
        let pairs = raw
            .modes
            .into_iter()
            .map(|m| {
                Ok((
                    WaveVector::new(m.k[0], m.k[1])?,
                    Complex64::new(m.re, m.im.unwrap_or(0.0)),
                ))
            })
            .collect::<Result<Vec<_>>>()?;
        match raw.basis {
            Basis::Exponential => ModeState::exponential(pairs),
            Basis::Cosine => {
                if pairs.iter().any(|(_, w)| w.im != 0.0) {
                    return Err(LabError::config("cosine modes carry no imaginary part"));
                }
                ModeState::cosine(pairs.into_iter().map(|(k, w)| (k, w.re)))
            }
        }
    }
}

/// Right-hand side of the kinetic system on the state's own mode set.
///
/// Every ordered pair (p, q) of stored modes with p + q = k contributes
/// A(p,q) ω_p ω_q to ω̇_k.
pub fn euler_rhs(state: &ModeState) -> Result<ModeState> {
    if state.basis != Basis::Exponential {
        return Err(LabError::domain("euler_rhs expects an exponential-basis state"));
    }
    // Constructors guarantee symmetry; re-check for states assembled by hand.
    if let Some(k) = state.modes.keys().find(|k| !state.modes.contains_key(&-**k)) {
        return Err(LabError::config(format!("mode set is not symmetric at {k}")));
    }
    // ω̇_{−k} = conj(ω̇_k) is imposed rather than recomputed, so the output
    // is reality-compliant to the bit.
    let mut out = BTreeMap::new();
    for k in state.modes.keys().filter(|k| k.is_canonical()) {
        let mut acc = Complex64::new(0.0, 0.0);
        for (p, wp) in &state.modes {
            let Some(q) = k.try_sub(p) else { continue };
            if let Some(wq) = state.modes.get(&q) {
                acc += interaction_coefficient(p, &q) * wp * wq;
            }
        }
        out.insert(*k, acc);
        out.insert(-*k, acc.conj());
    }
    Ok(ModeState {
        basis: Basis::Exponential,
        modes: out,
    })
}

/// Kinetic right-hand side for a cosine state, by conjugation with the
/// change of basis.
pub fn cosine_rhs(state: &ModeState) -> Result<ModeState> {
    if state.basis != Basis::Cosine {
        return Err(LabError::domain("cosine_rhs expects a cosine-basis state"));
    }
    Ok(euler_rhs(&state.to_exponential())?.to_cosine())
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuadraticFunctionals {
    pub energy: f64,
    pub enstrophy: f64,
}

/// Energy E = Σ |k|⁻²|ω_k|² and enstrophy Z = Σ |ω_k|² over the exponential
/// modes (cosine states are converted first).
pub fn quadratic_functionals(state: &ModeState) -> QuadraticFunctionals {
    let exp = state.to_exponential();
    let (mut energy, mut enstrophy) = (0.0, 0.0);
    for (k, w) in &exp.modes {
        let a = w.norm_sqr();
        enstrophy += a;
        energy += a / k.norm_sq() as f64;
    }
    QuadraticFunctionals { energy, enstrophy }
}

/// All lattice vectors with max(|k₁|, |k₂|) ≤ `radius`.
pub fn square_mode_set(radius: i64) -> Vec<WaveVector> {
    (-radius..=radius)
        .flat_map(|a| (-radius..=radius).filter_map(move |b| WaveVector::checked(a, b)))
        .collect()
}
