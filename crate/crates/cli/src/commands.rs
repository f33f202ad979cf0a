use std::fs;
use std::path::Path;

use euler_lab::galerkin::{
    five_mode_field, homoclinic_state_at_tau, integrate, invariants, orbit_residual, orbit_residual_fd,
    write_trajectory_csv, Branch, FiveModeState, HomoclinicParams, StepControl, Trajectory,
};
use euler_lab::spectra::{
    point_spectrum, truncated_eigenvalues_with_cap, ClassChain, Convention, PointSpectrumOptions, SpectrumReport,
};
use euler_lab::torus::{
    cosine_example, darboux_transform, jacobi_residual, lax_residuals, random_trig_polynomial, read_field,
    triple_limit, write_field, DarbouxFields, DarbouxTime, FieldFormat, GridField, LaxControl,
};
use euler_lab::{LabError, WaveVector};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::output::{emit, json_bytes};
use crate::{
    BranchArg, DarbouxArgs, Failure, FormatArg, HomoclinicArgs, IntegratorArg, JacobiArgs, LaxArgs, MethodArg, PhiArg,
    SimulateArgs, SolverArgs, SpectrumArgs, SweepArgs, EXIT_NONCONVERGENCE, EXIT_VERIFICATION,
};

type CmdResult = Result<u8, Failure>;

const THREADS_VAR: &str = "EULER_LAB_THREADS";

fn complex_json(z: Complex64) -> Value {
    json!({ "re": z.re, "im": z.im })
}

fn vector_json(k: &WaveVector) -> Value {
    json!([k.k1(), k.k2()])
}

fn solve(chain: &ClassChain, s: &SolverArgs) -> Result<SpectrumReport, Failure> {
    if !(s.tol > 0.0) || s.cf_depth == 0 {
        return Err(Failure::usage("--tol must be positive and --cf-depth at least 1"));
    }
    Ok(match s.method {
        MethodArg::Cf => {
            let opts = PointSpectrumOptions {
                tol: s.tol,
                depth: s.cf_depth,
                junction: Some(s.junction),
                max_dim: s.max_dim,
                ..PointSpectrumOptions::default()
            };
            point_spectrum(chain, &opts)?
        }
        MethodArg::Truncation => truncated_eigenvalues_with_cap(chain, s.truncation_n, s.max_dim)?,
    })
}

/// 2λ/|Γ| and the convention-free 2λ/(c|Γ|), or `None` at Γ = 0.
fn rescaled(chain: &ClassChain, lambda: Complex64) -> Option<(Complex64, Complex64)> {
    let g = chain.gamma.norm();
    (g > 0.0).then(|| (2.0 * lambda / g, 2.0 * lambda / (chain.convention.factor() * g)))
}

fn report_json(chain: &ClassChain, rep: &SpectrumReport) -> Value {
    let eigenvalues: Vec<Value> = rep
        .eigenvalues
        .iter()
        .map(|e| {
            let (scaled, normalized) = match rescaled(chain, e.value) {
                Some((a, b)) => (complex_json(a), complex_json(b)),
                None => (Value::Null, Value::Null),
            };
            json!({
                "re": e.value.re,
                "im": e.value.im,
                "class": e.class,
                "residual": e.residual,
                "two_lambda_over_gamma": scaled,
                "normalized": normalized,
            })
        })
        .collect();
    json!({
        "khat": vector_json(&chain.khat),
        "p": vector_json(&chain.p),
        "gamma": chain.gamma.re,
        "convention": chain.convention,
        "method": rep.method.label(),
        "band_halfwidth": rep.band_halfwidth,
        "signed_b": rep.signed_b,
        "eigenvalues": eigenvalues,
        "unresolved": rep.unresolved.iter().map(|z| complex_json(*z)).collect::<Vec<_>>(),
    })
}

fn report_csv(chain: &ClassChain, rep: &SpectrumReport) -> String {
    let mut s = String::from(
        "re,im,class,residual,two_lambda_over_gamma_re,two_lambda_over_gamma_im,normalized_re,normalized_im\n",
    );
    for e in &rep.eigenvalues {
        let class = serde_json::to_value(e.class)
            .ok()
            .and_then(|v| v.as_str().map(str::to_owned))
            .unwrap_or_default();
        let (a, b) = rescaled(chain, e.value)
            .unwrap_or((Complex64::new(f64::NAN, f64::NAN), Complex64::new(f64::NAN, f64::NAN)));
        s.push_str(&format!(
            "{:.16e},{:.16e},{class},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}\n",
            e.value.re, e.value.im, e.residual, a.re, a.im, b.re, b.im
        ));
    }
    s
}

fn summarize_spectrum(chain: &ClassChain, rep: &SpectrumReport) {
    eprintln!(
        "class {} along {}: band halfwidth 2|b| = {:.15e}",
        chain.khat, chain.p, rep.band_halfwidth
    );
    if rep.eigenvalues.is_empty() {
        eprintln!("no point spectrum off the band");
    }
    for e in &rep.eigenvalues {
        match rescaled(chain, e.value) {
            Some((a, b)) => eprintln!(
                "λ = {:+.14} {:+.14}i   2λ/|Γ| = {:+.14} {:+.14}i   2λ/(c|Γ|) = {:+.14} {:+.14}i",
                e.value.re, e.value.im, a.re, a.im, b.re, b.im
            ),
            None => eprintln!("λ = {:+.14} {:+.14}i", e.value.re, e.value.im),
        }
    }
    for z in &rep.unresolved {
        eprintln!("unresolved seed {:+.6e} {:+.6e}i", z.re, z.im);
    }
}

pub fn spectrum(a: &SpectrumArgs) -> CmdResult {
    if !a.gamma.is_finite() {
        return Err(Failure::usage("--gamma must be finite"));
    }
    let chain = ClassChain::real(a.khat, a.p, a.gamma, Convention::from(a.solver.convention));
    let rep = solve(&chain, &a.solver)?;
    let bytes = match a.format {
        FormatArg::Json => json_bytes(&report_json(&chain, &rep)),
        FormatArg::Csv => report_csv(&chain, &rep).into_bytes(),
    };
    emit(a.output.as_deref(), &bytes)?;
    summarize_spectrum(&chain, &rep);
    Ok(if rep.is_converged() { 0 } else { EXIT_NONCONVERGENCE })
}

/// The member of the class of `khat` closest to the origin (ties broken by
/// the smaller index), so every class has one representative.
fn class_representative(khat: &WaveVector, p: &WaveVector) -> WaveVector {
    let centre = (-(khat.dot(p)) as f64 / p.norm_sq() as f64).round() as i64;
    (centre - 1..=centre + 1)
        .filter_map(|n| khat.shifted(p, n))
        .min_by_key(|k| (k.norm_sq(), k.k1(), k.k2()))
        .unwrap_or(*khat)
}

fn sweep_classes(a: &SweepArgs) -> Result<Vec<WaveVector>, Failure> {
    let mut classes: Vec<WaveVector> = match a.radius {
        Some(r) if r.is_finite() && r >= 0.0 => {
            let m = r.floor() as i64;
            (-m..=m)
                .flat_map(|x| (-m..=m).map(move |y| (x, y)))
                .filter(|(x, y)| (x * x + y * y) as f64 <= r * r)
                .filter_map(|(x, y)| WaveVector::checked(x, y))
                .map(|k| class_representative(&k, &a.p))
                .collect()
        }
        Some(r) => {
            return Err(Failure::usage(format!(
                "--radius must be a non-negative number, got {r}"
            )))
        }
        None if a.khat.is_empty() => return Err(Failure::usage("give --radius or at least one --khat")),
        None => a.khat.clone(),
    };
    classes.sort();
    classes.dedup();
    Ok(classes)
}

fn thread_pool() -> Result<rayon::ThreadPool, Failure> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Ok(v) = std::env::var(THREADS_VAR) {
        let n: usize = v
            .trim()
            .parse()
            .ok()
            .filter(|n| *n > 0)
            .ok_or_else(|| Failure::usage(format!("{THREADS_VAR} must be a positive integer, got `{v}`")))?;
        builder = builder.num_threads(n);
    }
    builder
        .build()
        .map_err(|e| Failure::usage(format!("cannot start worker threads: {e}")))
}

pub fn sweep(a: &SweepArgs) -> CmdResult {
    if a.gamma.iter().any(|g| !g.is_finite()) {
        return Err(Failure::usage("--gamma values must be finite"));
    }
    let classes = sweep_classes(a)?;
    let jobs: Vec<(WaveVector, f64)> = classes
        .iter()
        .flat_map(|k| a.gamma.iter().map(move |g| (*k, *g)))
        .collect();
    let convention = Convention::from(a.solver.convention);
    let results: Vec<Result<(Value, bool), Failure>> = thread_pool()?.install(|| {
        jobs.par_iter()
            .map(|(khat, g)| {
                let chain = ClassChain::real(*khat, a.p, *g, convention);
                let rep = solve(&chain, &a.solver)?;
                Ok((report_json(&chain, &rep), rep.is_converged()))
            })
            .collect()
    });
    let mut entries = Vec::with_capacity(results.len());
    let mut converged = true;
    for r in results {
        let (v, ok) = r?;
        converged &= ok;
        entries.push(v);
    }
    let found = entries
        .iter()
        .filter(|v| v["eigenvalues"].as_array().is_some_and(|e| !e.is_empty()))
        .count();
    emit(
        a.output.as_deref(),
        &json_bytes(&json!({ "p": vector_json(&a.p), "jobs": entries })),
    )?;
    eprintln!(
        "{} jobs over {} classes; {found} with point spectrum",
        jobs.len(),
        classes.len()
    );
    Ok(if converged { 0 } else { EXIT_NONCONVERGENCE })
}

fn load_initial_state(path: &Path) -> Result<FiveModeState, Failure> {
    let text = fs::read_to_string(path).map_err(|e| Failure::usage(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Failure::usage(format!("bad initial state in {}: {e}", path.display())))
}

/// Largest |X(t) − X(0)| / |X(0)| over I, U, J (absolute where X(0) = 0),
/// and the largest absolute change.
fn invariant_drift(traj: &Trajectory) -> (f64, f64) {
    let Some(first) = traj.states.first() else {
        return (0.0, 0.0);
    };
    let x0 = invariants(&FiveModeState::from_slice(first));
    let mut rel = 0.0f64;
    let mut abs = 0.0f64;
    for y in &traj.states {
        let x = invariants(&FiveModeState::from_slice(y));
        for (a, b) in [(x.i, x0.i), (x.u, x0.u), (x.j, x0.j)] {
            let d = (a - b).abs();
            abs = abs.max(d);
            rel = rel.max(if b == 0.0 { d } else { d / b.abs() });
        }
    }
    (rel, abs)
}

fn trajectory_json(traj: &Trajectory) -> Value {
    let rows: Vec<Value> = traj
        .times
        .iter()
        .zip(&traj.states)
        .map(|(t, y)| {
            let s = FiveModeState::from_slice(y);
            let inv = invariants(&s);
            json!({ "t": t, "state": s, "invariants": { "i": inv.i, "u": inv.u, "j": inv.j } })
        })
        .collect();
    json!({ "samples": rows })
}

fn trajectory_bytes(traj: &Trajectory, format: FormatArg) -> Result<Vec<u8>, Failure> {
    Ok(match format {
        FormatArg::Csv => {
            let mut buf = Vec::new();
            write_trajectory_csv(&mut buf, traj)?;
            buf
        }
        FormatArg::Json => json_bytes(&trajectory_json(traj)),
    })
}

pub fn simulate(a: &SimulateArgs) -> CmdResult {
    let ic = match (&a.ic, a.fixed_point) {
        (Some(path), _) => load_initial_state(path)?,
        (None, Some(g)) => FiveModeState::fixed_point(g),
        (None, None) => return Err(Failure::usage("give --ic or --fixed-point")),
    };
    let control = match (a.integrator, a.dt, a.tol) {
        (None | Some(IntegratorArg::Rk4), Some(dt), None) => StepControl::Fixed { dt },
        (None | Some(IntegratorArg::Rk45), None, Some(tol)) => StepControl::Adaptive { tol },
        _ => return Err(Failure::usage("rk4 takes --dt and rk45 takes --tol")),
    };
    let (traj, failure) = match integrate(five_mode_field, &ic.to_array(), a.t0, a.t1, control) {
        Ok(t) => (t, None),
        Err(LabError::Integration(e)) => {
            let partial = e.partial.clone();
            (partial, Some(Failure::from(LabError::Integration(e))))
        }
        Err(e) => return Err(e.into()),
    };
    emit(a.output.as_deref(), &trajectory_bytes(&traj, a.format)?)?;
    let (rel, abs) = invariant_drift(&traj);
    eprintln!(
        "{} samples; invariant drift: relative {rel:.3e}, absolute {abs:.3e}",
        traj.len()
    );
    if let Some(f) = failure {
        eprintln!("error: {} (partial trajectory written)", f.message);
        return Ok(f.code);
    }
    match a.max_drift {
        Some(limit) if rel > limit => {
            eprintln!("invariant drift {rel:.3e} exceeds {limit:e}");
            Ok(EXIT_VERIFICATION)
        }
        _ => Ok(0),
    }
}

pub fn homoclinic(a: &HomoclinicArgs) -> CmdResult {
    if a.samples < 2 || !(a.tau_max > a.tau_min) || !a.gamma.is_finite() {
        return Err(Failure::usage(
            "need --samples ≥ 2, --tau-max > --tau-min and a finite --gamma",
        ));
    }
    let branch = match a.branch {
        BranchArg::Plus => Branch::KappaPositive,
        BranchArg::Minus => Branch::KappaNegative,
    };
    let params = HomoclinicParams::new(a.gamma, a.tau0, a.theta0, branch);
    let grid: Vec<f64> = (0..a.samples)
        .map(|i| a.tau_min + (a.tau_max - a.tau_min) * i as f64 / (a.samples - 1) as f64)
        .collect();
    let res = orbit_residual(&params, &grid);
    let fd = orbit_residual_fd(&params, &grid, 1e-6);
    let g2 = a.gamma * a.gamma;
    let level = grid
        .iter()
        .map(|tau| {
            let inv = invariants(&homoclinic_state_at_tau(*tau, &params));
            (inv.i - 0.5 * g2).abs().max(inv.u.abs()).max((inv.j - g2).abs())
        })
        .fold(0.0, f64::max);
    let report = json!({
        "orbit": "heteroclinic-pair",
        "wp_limits": { "tau_to_minus_infinity": -a.gamma, "tau_to_infinity": a.gamma },
        "params": params,
        "kappa": params.kappa(),
        "alpha": params.alpha(),
        "beta": params.beta(),
        "phase_sum": params.phase_sum(),
        "tau_range": [a.tau_min, a.tau_max],
        "residual": res,
        "finite_difference_residual": fd,
        "level_set_deviation": level,
    });
    if let Some(path) = &a.orbit_csv {
        if a.gamma == 0.0 {
            return Err(Failure::usage("the orbit has no time parametrization at Γ = 0"));
        }
        let traj = Trajectory {
            times: grid.iter().map(|tau| params.time_of(*tau)).collect(),
            states: grid
                .iter()
                .map(|tau| homoclinic_state_at_tau(*tau, &params).to_array().to_vec())
                .collect(),
        };
        emit(Some(path), &trajectory_bytes(&traj, FormatArg::Csv)?)?;
    }
    emit(a.output.as_deref(), &json_bytes(&report))?;
    eprintln!(
        "max residual {:.3e} over {} samples (finite differences {:.3e})",
        res.max, res.samples, fd.max
    );
    if a.check_residual && !(res.max <= a.threshold) {
        eprintln!("residual exceeds {:e}", a.threshold);
        return Ok(EXIT_VERIFICATION);
    }
    Ok(0)
}

const FIELD_NAMES: [&str; 4] = ["omega", "f", "p", "big_f"];

fn field_path(dir: &Path, name: &str, format: FieldFormat) -> std::path::PathBuf {
    dir.join(match format {
        FieldFormat::Csv => format!("{name}.csv"),
        FieldFormat::Binary => format!("{name}.bin"),
    })
}

fn read_fields(dir: &Path, format: FieldFormat) -> Result<DarbouxFields, Failure> {
    let [omega, f, p, big_f] = FIELD_NAMES.map(|n| read_field(&field_path(dir, n, format), format));
    Ok(DarbouxFields {
        omega: omega?,
        f: f?,
        p: p?,
        big_f: big_f?,
    })
}

fn write_fields(dir: &Path, fields: &DarbouxFields, format: FieldFormat) -> Result<(), Failure> {
    fs::create_dir_all(dir)?;
    for (name, field) in FIELD_NAMES
        .iter()
        .zip([&fields.omega, &fields.f, &fields.p, &fields.big_f])
    {
        write_field(&field_path(dir, name, format), field, format)?;
    }
    Ok(())
}

pub fn darboux(a: &DarbouxArgs) -> CmdResult {
    let format = FieldFormat::from(a.field_format);
    let fields = match &a.input_dir {
        Some(dir) => read_fields(dir, format)?,
        None => cosine_example(a.grid, a.gamma, a.epsilon, a.degenerate)?,
    };
    if let Some(dir) = &a.dump_fields {
        write_fields(dir, &fields, format)?;
    }
    let rep = darboux_transform(&fields, &DarbouxTime::Steady)?;
    let mut value = serde_json::to_value(&rep).map_err(LabError::from)?;
    value["max_residual"] = json!(rep.max_residual());
    value["threshold"] = json!(a.threshold);
    emit(a.output.as_deref(), &json_bytes(&value))?;
    eprintln!(
        "n = {}: max residual {:.3e}, mask {:.2}%{}",
        rep.n,
        rep.max_residual(),
        100.0 * rep.mask_fraction,
        if rep.degenerate { ", degenerate (p̃ ≡ 0)" } else { "" }
    );
    if !rep.reliable {
        eprintln!("mask covers more than half the grid; report unreliable");
        return Ok(EXIT_VERIFICATION);
    }
    Ok(if rep.max_residual() <= a.threshold {
        0
    } else {
        EXIT_VERIFICATION
    })
}

pub fn jacobi(a: &JacobiArgs) -> CmdResult {
    let limit = triple_limit(a.grid);
    if a.degree > limit {
        return Err(Failure::usage(format!(
            "--degree {} exceeds the alias-free limit {limit} for --grid {}",
            a.degree, a.grid
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(a.seed);
    let mut residuals = Vec::with_capacity(a.trials);
    for _ in 0..a.trials {
        let f = random_trig_polynomial(a.grid, a.degree, &mut rng)?;
        let g = random_trig_polynomial(a.grid, a.degree, &mut rng)?;
        let h = random_trig_polynomial(a.grid, a.degree, &mut rng)?;
        residuals.push(jacobi_residual(&f, &g, &h)?);
    }
    let max = residuals.iter().copied().fold(0.0, f64::max);
    let report = json!({
        "grid": a.grid,
        "degree": a.degree,
        "trials": a.trials,
        "seed": a.seed,
        "max_residual": max,
        "residuals": residuals,
    });
    emit(a.output.as_deref(), &json_bytes(&report))?;
    eprintln!("{} trials: max Jacobi residual {max:.3e}", a.trials);
    Ok(if max <= a.threshold { 0 } else { EXIT_VERIFICATION })
}

pub fn lax(a: &LaxArgs) -> CmdResult {
    let omega = GridField::from_fn(a.grid, |x, y| a.gamma * (x + y).cos())?;
    let phi = match a.phi {
        PhiArg::Square => omega.mul(&omega)?,
        PhiArg::Random => random_trig_polynomial(a.grid, a.degree, &mut ChaCha8Rng::seed_from_u64(a.seed))?,
    };
    let lambda = Complex64::new(a.lambda_re, a.lambda_im);
    let rep = lax_residuals(
        &omega,
        &phi,
        lambda,
        a.t1,
        LaxControl {
            dt: a.dt,
            samples: a.samples,
        },
    )?;
    emit(
        a.output.as_deref(),
        &json_bytes(&serde_json::to_value(&rep).map_err(LabError::from)?),
    )?;
    eprintln!(
        "compatibility {:.3e}; defect {:.3e} → max {:.3e}",
        rep.compatibility_residual,
        rep.initial_defect(),
        rep.max_defect()
    );
    let eigen_ok = a.phi != PhiArg::Square || lambda != Complex64::new(0.0, 0.0) || rep.max_defect() <= a.threshold;
    Ok(if rep.compatibility_residual <= a.threshold && eigen_ok {
        0
    } else {
        EXIT_VERIFICATION
    })
}
