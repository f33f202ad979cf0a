//! Complex root polishing: Muller's method with a secant fallback.

use num_complex::Complex64;

use crate::error::Result;

#[derive(Clone, Copy, Debug)]
pub struct RootOptions {
    pub max_iter: usize,
    /// Converged once |f| ≤ `tol`.
    pub tol: f64,
    /// Relative spacing of the auxiliary starting points around the seed.
    pub spread: f64,
}

impl Default for RootOptions {
    fn default() -> Self {
        RootOptions {
            max_iter: 200,
            tol: 1e-12,
            spread: 1e-4,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum RootOutcome {
    Converged {
        root: Complex64,
        residual: f64,
        iterations: usize,
    },
    Failed {
        last: Complex64,
        residual: f64,
    },
}

impl RootOutcome {
    pub fn root(&self) -> Option<Complex64> {
        match self {
            RootOutcome::Converged { root, .. } => Some(*root),
            RootOutcome::Failed { .. } => None,
        }
    }
}

/// Evaluates `f`, nudging the argument when the evaluation reports a
/// removable failure (e.g. a vanishing continued-fraction denominator).
fn eval<F>(f: &mut F, z: Complex64) -> Option<(Complex64, Complex64)>
where
    F: FnMut(Complex64) -> Result<Complex64>,
{
    let mut x = z;
    for k in 0..4 {
        if let Ok(v) = f(x) {
            if v.re.is_finite() && v.im.is_finite() {
                return Some((x, v));
            }
        }
        let h = 1e-10 * (1.0 + z.norm()) * (k + 1) as f64;
        x = z + Complex64::new(h, 0.7 * h);
    }
    None
}

/// Muller's method from three points around `seed`.
pub fn muller<F>(mut f: F, seed: Complex64, opts: &RootOptions) -> RootOutcome
where
    F: FnMut(Complex64) -> Result<Complex64>,
{
    let h = opts.spread * seed.norm().max(1e-3);
    let starts = [seed - h, seed + Complex64::new(0.0, h), seed];
    let mut pts = Vec::with_capacity(3);
    for s in starts {
        match eval(&mut f, s) {
            Some(p) => pts.push(p),
            None => {
                return RootOutcome::Failed {
                    last: seed,
                    residual: f64::INFINITY,
                }
            }
        }
    }
    let (mut x0, mut f0) = pts[0];
    let (mut x1, mut f1) = pts[1];
    let (mut x2, mut f2) = pts[2];
    if f2.norm() <= opts.tol {
        return RootOutcome::Converged {
            root: x2,
            residual: f2.norm(),
            iterations: 0,
        };
    }
    for it in 1..=opts.max_iter {
        let d10 = (f1 - f0) / (x1 - x0);
        let d21 = (f2 - f1) / (x2 - x1);
        let d210 = (d21 - d10) / (x2 - x0);
        let w = d21 + d210 * (x2 - x1);
        let disc = (w * w - 4.0 * f2 * d210).sqrt();
        let den = if (w + disc).norm() >= (w - disc).norm() {
            w + disc
        } else {
            w - disc
        };
        let step = if den.norm() == 0.0 || !den.re.is_finite() {
            Complex64::new(1e-6, 1e-6) * (1.0 + x2.norm())
        } else {
            2.0 * f2 / den
        };
        let Some((x3, f3)) = eval(&mut f, x2 - step) else {
            return RootOutcome::Failed {
                last: x2,
                residual: f2.norm(),
            };
        };
        (x0, f0, x1, f1, x2, f2) = (x1, f1, x2, f2, x3, f3);
        if f2.norm() <= opts.tol {
            return RootOutcome::Converged {
                root: x2,
                residual: f2.norm(),
                iterations: it,
            };
        }
        if x2 == x1 {
            break;
        }
    }
    RootOutcome::Failed {
        last: x2,
        residual: f2.norm(),
    }
}

/// Complex secant iteration from `seed` and a nearby point.
pub fn secant<F>(mut f: F, seed: Complex64, opts: &RootOptions) -> RootOutcome
where
    F: FnMut(Complex64) -> Result<Complex64>,
{
    let h = opts.spread * seed.norm().max(1e-3);
    let (Some((mut x0, mut f0)), Some((mut x1, mut f1))) =
        (eval(&mut f, seed + Complex64::new(h, h)), eval(&mut f, seed))
    else {
        return RootOutcome::Failed {
            last: seed,
            residual: f64::INFINITY,
        };
    };
    for it in 1..=opts.max_iter {
        if f1.norm() <= opts.tol {
            return RootOutcome::Converged {
                root: x1,
                residual: f1.norm(),
                iterations: it - 1,
            };
        }
        let df = f1 - f0;
        if df.norm() == 0.0 {
            break;
        }
        let x2 = x1 - f1 * (x1 - x0) / df;
        let Some((x2, f2)) = eval(&mut f, x2) else { break };
        (x0, f0, x1, f1) = (x1, f1, x2, f2);
    }
    if f1.norm() <= opts.tol {
        return RootOutcome::Converged {
            root: x1,
            residual: f1.norm(),
            iterations: opts.max_iter,
        };
    }
    RootOutcome::Failed {
        last: x1,
        residual: f1.norm(),
    }
}

/// Muller first; the secant method if Muller does not converge.
pub fn polish<F>(mut f: F, seed: Complex64, opts: &RootOptions) -> RootOutcome
where
    F: FnMut(Complex64) -> Result<Complex64>,
{
    match muller(&mut f, seed, opts) {
        ok @ RootOutcome::Converged { .. } => ok,
        RootOutcome::Failed { .. } => secant(&mut f, seed, opts),
    }
}
