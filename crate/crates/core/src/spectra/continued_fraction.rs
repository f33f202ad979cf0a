//! Characteristic function of a chain by one-sided ratio continued
//! fractions.
//!
//! For an ℓ₂ eigenvector the ratios R_n = ω_{n+1}/ω_n (above the junction)
//! and L_n = ω_{n−1}/ω_n (below it) are the minimal solutions of
//!
//!   R_{n−1} = α_n / (λ − β_n R_n),   L_{n+1} = β_n / (λ − α_n L_n),
//!
//! which backward recurrence from R = 0 (resp. L = 0) far away computes
//! stably whenever λ is off the band. The equation at the junction j then
//! reads F(λ) = λ − α_j L_j − β_j R_j = 0.

use num_complex::Complex64;

use super::chain::ClassChain;
use crate::error::{LabError, Result};

pub const DEFAULT_DEPTH: usize = 400;

const MIN_DENOMINATOR: f64 = 1e-300;

fn checked_div(num: Complex64, den: Complex64, n: i64) -> Result<Complex64> {
    if den.norm() < MIN_DENOMINATOR {
        return Err(LabError::Evaluation(format!(
            "continued fraction hit a vanishing denominator at index {n}"
        )));
    }
    Ok(num / den)
}

/// F(λ) for one chain, junction and depth, with the coefficients over
/// `junction − depth ..= junction + depth` tabulated once.
#[derive(Clone, Debug)]
pub struct CharacteristicFunction {
    junction: i64,
    depth: i64,
    band_halfwidth: f64,
    alpha: Vec<Complex64>,
    beta: Vec<Complex64>,
}

impl CharacteristicFunction {
    pub fn new(chain: &ClassChain, depth: usize, junction: i64) -> Result<Self> {
        if depth == 0 {
            return Err(LabError::Config("continued-fraction depth must be at least 1".into()));
        }
        let d = depth as i64;
        let range = junction - d..=junction + d;
        Ok(CharacteristicFunction {
            junction,
            depth: d,
            band_halfwidth: chain.band_halfwidth(),
            alpha: range.clone().map(|n| chain.sub_coefficient(n)).collect(),
            beta: range.map(|n| chain.super_coefficient(n)).collect(),
        })
    }

    pub fn junction(&self) -> i64 {
        self.junction
    }

    fn idx(&self, n: i64) -> usize {
        (n - self.junction + self.depth) as usize
    }

    fn validate(&self, lambda: Complex64) -> Result<()> {
        if !(lambda.re.is_finite() && lambda.im.is_finite()) {
            return Err(LabError::Domain(format!("non-finite spectral parameter {lambda}")));
        }
        if lambda.re == 0.0 && lambda.im.abs() <= self.band_halfwidth {
            return Err(LabError::Domain(format!(
                "λ = {lambda} lies on the continuous-spectrum band"
            )));
        }
        Ok(())
    }

    /// R_n for n = j..j+depth−1 (index 0 is R_j).
    fn upper_ratios(&self, lambda: Complex64) -> Result<Vec<Complex64>> {
        let (j, d) = (self.junction, self.depth);
        let mut out = vec![Complex64::new(0.0, 0.0); d as usize];
        let mut r = Complex64::new(0.0, 0.0);
        for n in (j + 1..=j + d).rev() {
            let i = self.idx(n);
            r = checked_div(self.alpha[i], lambda - self.beta[i] * r, n)?;
            out[(n - 1 - j) as usize] = r;
        }
        Ok(out)
    }

    /// L_n for n = j, j−1, .., j−depth+1 (index 0 is L_j).
    fn lower_ratios(&self, lambda: Complex64) -> Result<Vec<Complex64>> {
        let (j, d) = (self.junction, self.depth);
        let mut out = vec![Complex64::new(0.0, 0.0); d as usize];
        let mut l = Complex64::new(0.0, 0.0);
        for n in j - d..j {
            let i = self.idx(n);
            l = checked_div(self.beta[i], lambda - self.alpha[i] * l, n)?;
            out[(j - (n + 1)) as usize] = l;
        }
        Ok(out)
    }

    pub fn eval(&self, lambda: Complex64) -> Result<Complex64> {
        self.validate(lambda)?;
        let (j, d) = (self.junction, self.depth);
        let mut r = Complex64::new(0.0, 0.0);
        for n in (j + 1..=j + d).rev() {
            let i = self.idx(n);
            r = checked_div(self.alpha[i], lambda - self.beta[i] * r, n)?;
        }
        let mut l = Complex64::new(0.0, 0.0);
        for n in j - d..j {
            let i = self.idx(n);
            l = checked_div(self.beta[i], lambda - self.alpha[i] * l, n)?;
        }
        let i = self.idx(j);
        Ok(lambda - self.alpha[i] * l - self.beta[i] * r)
    }

    /// Approximate eigenvector over `j − depth ..= j + depth`, with ω_j = 1.
    pub fn eigenvector(&self, lambda: Complex64) -> Result<Vec<(i64, Complex64)>> {
        self.validate(lambda)?;
        let j = self.junction;
        let above = self.upper_ratios(lambda)?;
        let below = self.lower_ratios(lambda)?;
        let mut out = Vec::with_capacity(2 * self.depth as usize + 1);
        let mut w = Complex64::new(1.0, 0.0);
        for (i, ratio) in below.iter().enumerate() {
            w *= ratio;
            out.push((j - 1 - i as i64, w));
        }
        out.reverse();
        out.push((j, Complex64::new(1.0, 0.0)));
        let mut w = Complex64::new(1.0, 0.0);
        for (i, ratio) in above.iter().enumerate() {
            w *= ratio;
            out.push((j + 1 + i as i64, w));
        }
        Ok(out)
    }

    /// ‖Mv − λv‖/‖v‖ for [`Self::eigenvector`], over the interior rows.
    pub fn defect(&self, lambda: Complex64) -> Result<f64> {
        let v = self.eigenvector(lambda)?;
        let mut num = 0.0;
        for w in v.windows(3) {
            let i = self.idx(w[1].0);
            let row = self.alpha[i] * w[0].1 + self.beta[i] * w[2].1 - lambda * w[1].1;
            num += row.norm_sqr();
        }
        let den: f64 = v.iter().map(|(_, x)| x.norm_sqr()).sum();
        Ok((num / den).sqrt())
    }
}

/// F(λ) = λ − α_j L_j − β_j R_j; zeros are ℓ₂ eigenvalues of the part of the
/// chain connected to the junction.
pub fn cf_characteristic(chain: &ClassChain, lambda: Complex64, depth: usize, junction: i64) -> Result<Complex64> {
    CharacteristicFunction::new(chain, depth, junction)?.eval(lambda)
}

pub fn cf_eigenvector(
    chain: &ClassChain,
    lambda: Complex64,
    depth: usize,
    junction: i64,
) -> Result<Vec<(i64, Complex64)>> {
    CharacteristicFunction::new(chain, depth, junction)?.eigenvector(lambda)
}

pub fn cf_defect(chain: &ClassChain, lambda: Complex64, depth: usize, junction: i64) -> Result<f64> {
    CharacteristicFunction::new(chain, depth, junction)?.defect(lambda)
}
