use num_complex::Complex64;

use super::chain::ClassChain;
use super::continued_fraction::{CharacteristicFunction, DEFAULT_DEPTH};
use super::roots::{polish, RootOptions, RootOutcome};
use super::truncation::{Section, DEFAULT_MAX_DIM};
use super::{Eigenpair, Method, SpectrumReport};
use crate::error::Result;

#[derive(Clone, Copy, Debug)]
pub struct PointSpectrumOptions {
    /// Roots are accepted once |F| ≤ tol·max(1, 2|b|).
    pub tol: f64,
    pub depth: usize,
    /// Preferred junction index; segments that do not contain it use the
    /// index nearest the class centre instead.
    pub junction: Option<i64>,
    /// Half-width of the finite section that provides seeds.
    pub seed_half_width: i64,
    /// Seeds closer than this to the band are discarded.
    pub seed_band_gap: f64,
    pub max_iter: usize,
    pub max_dim: usize,
}

impl Default for PointSpectrumOptions {
    fn default() -> Self {
        PointSpectrumOptions {
            tol: 1e-12,
            depth: DEFAULT_DEPTH,
            junction: Some(0),
            seed_half_width: 50,
            seed_band_gap: 1e-3,
            max_iter: 200,
            max_dim: DEFAULT_MAX_DIM,
        }
    }
}

/// Maximal index interval on which every link of the chain is non-zero.
#[derive(Clone, Copy, Debug)]
struct Segment {
    lo: Option<i64>,
    hi: Option<i64>,
}

impl Segment {
    fn contains(&self, n: i64) -> bool {
        self.lo.is_none_or(|lo| n >= lo) && self.hi.is_none_or(|hi| n <= hi)
    }

    fn clamp(&self, n: i64) -> i64 {
        let n = self.lo.map_or(n, |lo| n.max(lo));
        self.hi.map_or(n, |hi| n.min(hi))
    }
}

fn segments(breaks: &[i64]) -> Vec<Segment> {
    let mut out = Vec::new();
    let mut lo = None;
    for &m in breaks {
        if lo.is_none_or(|l| l < m) {
            out.push(Segment { lo, hi: Some(m - 1) });
        }
        lo = Some(m + 1);
    }
    out.push(Segment { lo, hi: None });
    out
}

/// Point spectrum of a chain by continued fractions.
///
/// The chain is split at indices with |k̂+mp| = |p|; each such index
/// carries an exact zero mode e_m. On every remaining segment, eigenvalues
/// of a finite section farther than `seed_band_gap` from the band seed a
/// Muller (then secant) search on F(λ). Every root's images under λ ↦ −λ
/// and λ ↦ λ̄ are polished as well; anything that fails to converge is
/// listed in `unresolved` rather than dropped.
///
/// A parallel class (k̂ ∥ p) is the zero operator with a degenerate band
/// and is reported with no isolated eigenvalues.
pub fn point_spectrum(chain: &ClassChain, opts: &PointSpectrumOptions) -> Result<SpectrumReport> {
    let mut found: Vec<Eigenpair> = Vec::new();
    let mut unresolved = Vec::new();
    if chain.is_parallel() || chain.gamma.norm() == 0.0 {
        return Ok(SpectrumReport::new(chain, Method::ContinuedFraction, found, unresolved));
    }

    let breaks = chain.break_indices();
    for _ in &breaks {
        // Column m vanishes: both β_{m−1} and α_{m+1} carry A(p, k_m) = 0.
        found.push(Eigenpair::new(Complex64::new(0.0, 0.0), 0.0));
    }

    let center = chain.center_index();
    let accept = opts.tol * chain.band_halfwidth().max(1.0);
    let root_opts = RootOptions {
        max_iter: opts.max_iter,
        tol: accept,
        ..RootOptions::default()
    };
    let same = |a: Complex64, b: Complex64| (a - b).norm() <= 1e-8 * (1.0 + a.norm());

    for seg in segments(&breaks) {
        let junction = opts
            .junction
            .filter(|j| seg.contains(*j))
            .unwrap_or_else(|| seg.clamp(center));
        let cf = CharacteristicFunction::new(chain, opts.depth, junction)?;

        let lo = seg.clamp(center - opts.seed_half_width);
        let hi = seg.clamp(center + opts.seed_half_width);
        let seeds: Vec<Complex64> = Section::new(chain, lo, hi)
            .eigenvalues(opts.max_dim)?
            .into_iter()
            .filter(|z| chain.distance_to_band(*z) > opts.seed_band_gap)
            .collect();

        let mut roots: Vec<Complex64> = Vec::new();
        let try_seed = |seed: Complex64, roots: &mut Vec<Complex64>, unresolved: &mut Vec<Complex64>| {
            if roots.iter().any(|r| same(*r, seed)) {
                return;
            }
            match polish(|z| cf.eval(z), seed, &root_opts) {
                RootOutcome::Converged { root, .. } if chain.distance_to_band(root) > 1e-8 => {
                    if !roots.iter().any(|r| same(*r, root)) {
                        roots.push(root);
                    }
                }
                _ => unresolved.push(seed),
            }
        };
        for seed in seeds {
            try_seed(seed, &mut roots, &mut unresolved);
        }
        let mut i = 0;
        while i < roots.len() {
            let r = roots[i];
            for image in [-r, r.conj(), -r.conj()] {
                try_seed(image, &mut roots, &mut unresolved);
            }
            i += 1;
        }
        for root in roots {
            let residual = cf.defect(root)?;
            found.push(Eigenpair::new(root, residual));
        }
    }

    found.sort_by(|a, b| {
        a.value
            .re
            .total_cmp(&b.value.re)
            .then(a.value.im.total_cmp(&b.value.im))
    });
    Ok(SpectrumReport::new(chain, Method::ContinuedFraction, found, unresolved))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectra::{Convention, EigenClass};
    use crate::WaveVector;

    fn wv(a: i64, b: i64) -> WaveVector {
        WaveVector::new(a, b).unwrap()
    }

    #[test]
    fn segment_split() {
        let s = segments(&[0]);
        assert_eq!(s.len(), 2);
        assert!(s[0].contains(-1) && !s[0].contains(0));
        assert!(s[1].contains(1) && !s[1].contains(0));
        assert_eq!(segments(&[]).len(), 1);
        assert_eq!(segments(&[2, 3]).len(), 2);
    }

    #[test]
    fn reference_quadruple() {
        let c = ClassChain::real(wv(-3, -2), wv(1, 1), 1.0, Convention::PaperTable);
        let rep = point_spectrum(&c, &PointSpectrumOptions::default()).unwrap();
        assert!(rep.unresolved.is_empty());
        assert_eq!(rep.eigenvalues.len(), 4);
        assert!(rep.eigenvalues.iter().all(|e| e.class == EigenClass::Quadruple));
        assert!(rep.symmetry_defect() < 1e-12);
        assert!(rep.eigenvalues.iter().all(|e| e.residual < 1e-10));
    }

    #[test]
    fn circle_class_has_single_zero_mode() {
        let c = ClassChain::real(wv(-1, 1), wv(1, 1), 1.0, Convention::Formula);
        let rep = point_spectrum(&c, &PointSpectrumOptions::default()).unwrap();
        assert_eq!(rep.eigenvalues.len(), 1);
        assert_eq!(rep.eigenvalues[0].class, EigenClass::Zero);
    }

    #[test]
    fn parallel_class_is_empty() {
        let c = ClassChain::real(wv(2, 2), wv(1, 1), 1.0, Convention::PaperTable);
        let rep = point_spectrum(&c, &PointSpectrumOptions::default()).unwrap();
        assert!(rep.eigenvalues.is_empty());
        assert_eq!(rep.band_halfwidth, 0.0);
    }
}
