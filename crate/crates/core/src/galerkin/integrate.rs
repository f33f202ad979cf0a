//! Explicit Runge-Kutta integration: classical RK4 on a uniform grid and
//! Dormand-Prince 5(4) with step-size control.

use std::fmt;
use std::io::Write;

use super::{invariants, FiveModeState};
use crate::error::{LabError, Result};

pub const DEFAULT_MAX_STEPS: usize = 5_000_000;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum StepControl {
    Fixed {
        dt: f64,
    },
    /// Local error per step kept below `tol` (scaled by max(1, |y|)).
    Adaptive {
        tol: f64,
    },
}

/// Samples (t, y) of an integration, one per accepted step including the
/// initial condition.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<Vec<f64>>,
}

impl Trajectory {
    fn push(&mut self, t: f64, y: &[f64]) {
        self.times.push(t);
        self.states.push(y.to_vec());
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn last(&self) -> Option<(f64, &[f64])> {
        Some((*self.times.last()?, self.states.last()?.as_slice()))
    }
}

#[derive(Debug)]
pub struct IntegrationError {
    pub t: f64,
    pub reason: String,
    pub partial: Trajectory,
}

impl fmt::Display for IntegrationError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "integration failed at t = {}: {} ({} samples kept)",
            self.t,
            self.reason,
            self.partial.len()
        )
    }
}

impl std::error::Error for IntegrationError {}

impl From<IntegrationError> for LabError {
    fn from(e: IntegrationError) -> Self {
        LabError::Integration(Box::new(e))
    }
}

/// Integrates y' = f(t, y) from `t0` to `t1` (either direction).
pub fn integrate<F>(mut rhs: F, ic: &[f64], t0: f64, t1: f64, control: StepControl) -> Result<Trajectory>
where
    F: FnMut(f64, &[f64], &mut [f64]),
{
    if !(t0.is_finite() && t1.is_finite()) || t0 == t1 {
        return Err(LabError::Config(format!("invalid time span [{t0}, {t1}]")));
    }
    match control {
        StepControl::Fixed { dt } if dt > 0.0 && dt.is_finite() => Ok(rk4(&mut rhs, ic, t0, t1, dt)),
        StepControl::Adaptive { tol } if tol > 0.0 && tol.is_finite() => {
            dopri5(&mut rhs, ic, t0, t1, tol, DEFAULT_MAX_STEPS).map_err(LabError::from)
        }
        other => Err(LabError::Config(format!("invalid step control {other:?}"))),
    }
}

fn axpy(out: &mut [f64], y: &[f64], h: f64, terms: &[(f64, &[f64])]) {
    for i in 0..y.len() {
        let mut acc = 0.0;
        for (c, k) in terms {
            acc += c * k[i];
        }
        out[i] = y[i] + h * acc;
    }
}

fn rk4<F>(rhs: &mut F, ic: &[f64], t0: f64, t1: f64, dt: f64) -> Trajectory
where
    F: FnMut(f64, &[f64], &mut [f64]),
{
    let span = t1 - t0;
    let steps = ((span.abs() / dt) - 1e-9).ceil().max(1.0) as usize;
    let h = span / steps as f64;
    let d = ic.len();
    let (mut k1, mut k2, mut k3, mut k4) = (vec![0.0; d], vec![0.0; d], vec![0.0; d], vec![0.0; d]);
    let mut tmp = vec![0.0; d];
    let mut y = ic.to_vec();
    let mut traj = Trajectory::default();
    traj.push(t0, &y);
    for s in 0..steps {
        let t = t0 + s as f64 * h;
        rhs(t, &y, &mut k1);
        axpy(&mut tmp, &y, 0.5 * h, &[(1.0, &k1)]);
        rhs(t + 0.5 * h, &tmp, &mut k2);
        axpy(&mut tmp, &y, 0.5 * h, &[(1.0, &k2)]);
        rhs(t + 0.5 * h, &tmp, &mut k3);
        axpy(&mut tmp, &y, h, &[(1.0, &k3)]);
        rhs(t + h, &tmp, &mut k4);
        for i in 0..d {
            y[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        let t_next = if s + 1 == steps { t1 } else { t0 + (s + 1) as f64 * h };
        traj.push(t_next, &y);
    }
    traj
}

// Dormand-Prince 5(4) tableau.
const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

fn dopri5<F>(
    rhs: &mut F,
    ic: &[f64],
    t0: f64,
    t1: f64,
    tol: f64,
    max_steps: usize,
) -> std::result::Result<Trajectory, IntegrationError>
where
    F: FnMut(f64, &[f64], &mut [f64]),
{
    let d = ic.len();
    let dir = (t1 - t0).signum();
    let [mut k1, mut k2, mut k3, mut k4, mut k5, mut k6, mut k7] = std::array::from_fn(|_| vec![0.0; d]);
    let mut tmp = vec![0.0; d];
    let mut y_new = vec![0.0; d];
    let mut y = ic.to_vec();
    let mut t = t0;
    let mut traj = Trajectory::default();
    traj.push(t, &y);

    rhs(t, &y, &mut k1);
    let norm = |v: &[f64]| v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let (d0, d1) = (norm(&y), norm(&k1));
    let h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-4 } else { 0.01 * d0 / d1 };
    let mut h = h0.min((t1 - t0).abs()) * dir;

    let mut steps = 0;
    while (t1 - t) * dir > 0.0 {
        if steps >= max_steps {
            return Err(IntegrationError {
                t,
                reason: format!("step budget of {max_steps} exhausted"),
                partial: traj,
            });
        }
        let last = (t + h - t1) * dir >= 0.0;
        if last {
            h = t1 - t;
        }
        axpy(&mut tmp, &y, h, &[(A21, &k1)]);
        rhs(t + C2 * h, &tmp, &mut k2);
        axpy(&mut tmp, &y, h, &[(A31, &k1), (A32, &k2)]);
        rhs(t + C3 * h, &tmp, &mut k3);
        axpy(&mut tmp, &y, h, &[(A41, &k1), (A42, &k2), (A43, &k3)]);
        rhs(t + C4 * h, &tmp, &mut k4);
        axpy(&mut tmp, &y, h, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]);
        rhs(t + C5 * h, &tmp, &mut k5);
        axpy(
            &mut tmp,
            &y,
            h,
            &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)],
        );
        rhs(t + h, &tmp, &mut k6);
        axpy(
            &mut y_new,
            &y,
            h,
            &[(B1, &k1), (B3, &k3), (B4, &k4), (B5, &k5), (B6, &k6)],
        );
        rhs(t + h, &y_new, &mut k7);

        let mut err = 0.0f64;
        for i in 0..d {
            let e = h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
            let sc = tol * 1f64.max(y[i].abs()).max(y_new[i].abs());
            err = err.max(e.abs() / sc);
        }
        if !err.is_finite() {
            err = 1e10;
        }
        let factor = if err == 0.0 {
            5.0
        } else {
            (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
        };
        if err <= 1.0 {
            t = if last { t1 } else { t + h };
            std::mem::swap(&mut y, &mut y_new);
            // first same as last
            std::mem::swap(&mut k1, &mut k7);
            traj.push(t, &y);
            steps += 1;
            h *= factor;
        } else {
            h *= factor.min(1.0);
        }
        if (t1 - t) * dir > 0.0 && h.abs() < 1e-14 * t.abs().max(1.0) {
            return Err(IntegrationError {
                t,
                reason: format!("step size underflow (h = {h:e})"),
                partial: traj,
            });
        }
    }
    Ok(traj)
}

/// One row per sample: t, the seven amplitudes and I, U, J, with 17
/// significant digits.
pub fn write_trajectory_csv<W: Write>(mut out: W, traj: &Trajectory) -> Result<()> {
    writeln!(out, "t,w1,w2,w3,w4,wp,w0,w5,I,U,J")?;
    for (t, y) in traj.times.iter().zip(&traj.states) {
        if y.len() != FiveModeState::DIM {
            return Err(LabError::Config(format!(
                "expected a five-mode state, got dimension {}",
                y.len()
            )));
        }
        let inv = invariants(&FiveModeState::from_slice(y));
        let mut row = format!("{t:.16e}");
        for v in y.iter().chain([inv.i, inv.u, inv.j].iter()) {
            row.push_str(&format!(",{v:.16e}"));
        }
        writeln!(out, "{row}")?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rk4_exponential_decay() {
        let tr = integrate(
            |_, y, dy| dy[0] = -y[0],
            &[1.0],
            0.0,
            1.0,
            StepControl::Fixed { dt: 1e-3 },
        )
        .unwrap();
        let (t, y) = tr.last().unwrap();
        assert_eq!(t, 1.0);
        assert!((y[0] - (-1f64).exp()).abs() < 1e-11);
        assert_eq!(tr.len(), 1001);
    }

    #[test]
    fn dopri_backward_and_forward() {
        let f = |_: f64, y: &[f64], dy: &mut [f64]| {
            dy[0] = y[1];
            dy[1] = -y[0];
        };
        let tr = integrate(f, &[1.0, 0.0], 0.0, 3.0, StepControl::Adaptive { tol: 1e-11 }).unwrap();
        let (t, y) = tr.last().unwrap();
        assert_eq!(t, 3.0);
        assert!((y[0] - 3f64.cos()).abs() < 1e-9);
        let back = integrate(f, y, 3.0, 0.0, StepControl::Adaptive { tol: 1e-11 }).unwrap();
        let (t, z) = back.last().unwrap();
        assert_eq!(t, 0.0);
        assert!((z[0] - 1.0).abs() < 1e-9 && z[1].abs() < 1e-9);
    }

    #[test]
    fn blow_up_reports_partial_trajectory() {
        // y' = y², y(0) = 1 explodes at t = 1.
        let res = integrate(
            |_, y, dy| dy[0] = y[0] * y[0],
            &[1.0],
            0.0,
            2.0,
            StepControl::Adaptive { tol: 1e-8 },
        );
        match res {
            Err(LabError::Integration(e)) => {
                assert!((e.t - 1.0).abs() < 1e-3, "{}", e);
                assert!(!e.partial.is_empty());
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn bad_controls_are_config_errors() {
        let f = |_: f64, _: &[f64], dy: &mut [f64]| dy[0] = 0.0;
        assert!(matches!(
            integrate(f, &[0.0], 0.0, 0.0, StepControl::Fixed { dt: 0.1 }),
            Err(LabError::Config(_))
        ));
        assert!(matches!(
            integrate(f, &[0.0], 0.0, 1.0, StepControl::Fixed { dt: -0.1 }),
            Err(LabError::Config(_))
        ));
        assert!(matches!(
            integrate(f, &[0.0], 0.0, 1.0, StepControl::Adaptive { tol: 0.0 }),
            Err(LabError::Config(_))
        ));
    }

    #[test]
    fn csv_layout() {
        let tr = Trajectory {
            times: vec![0.0],
            states: vec![FiveModeState::fixed_point(1.0).to_array().to_vec()],
        };
        let mut buf = Vec::new();
        write_trajectory_csv(&mut buf, &tr).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("t,w1,w2,w3,w4,wp,w0,w5,I,U,J"));
        let row: Vec<&str> = lines.next().unwrap().split(',').collect();
        assert_eq!(row.len(), 11);
        assert_eq!(row[5], "1.0000000000000000e0");
        assert_eq!(row[8].parse::<f64>().unwrap(), 0.5);
    }
}
