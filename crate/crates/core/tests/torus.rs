use euler_lab::torus::{
    bracket, cosine_example, darboux_transform, invert_laplacian, jacobi_residual, laplacian, lax_residuals,
    random_trig_polynomial, read_field, triple_limit, velocity, write_field, DarbouxTime, FieldFormat, GridField,
    LaxControl,
};
use euler_lab::LabError;
use num_complex::Complex64;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[test]
fn jacobi_identity_on_random_triples() {
    let n = 128;
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    for _ in 0..50 {
        let f = random_trig_polynomial(n, 5, &mut rng).unwrap();
        let g = random_trig_polynomial(n, 5, &mut rng).unwrap();
        let h = random_trig_polynomial(n, 5, &mut rng).unwrap();
        let r = jacobi_residual(&f, &g, &h).unwrap();
        assert!(r < 1e-10, "{r:e}");
    }
}

#[test]
fn jacobi_identity_at_the_triple_band_edge() {
    // full n/6 band: same identity, measured against the size of one term
    let n = 64;
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let d = triple_limit(n);
    for _ in 0..5 {
        let f = random_trig_polynomial(n, d, &mut rng).unwrap();
        let g = random_trig_polynomial(n, d, &mut rng).unwrap();
        let h = random_trig_polynomial(n, d, &mut rng).unwrap();
        let term = bracket(&f, &bracket(&g, &h).unwrap()).unwrap().max_norm();
        assert!(jacobi_residual(&f, &g, &h).unwrap() < 1e-13 * term);
    }
}

#[test]
fn jacobi_with_a_repeated_argument() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let f = random_trig_polynomial(128, 5, &mut rng).unwrap();
    let h = random_trig_polynomial(128, 5, &mut rng).unwrap();
    assert!(jacobi_residual(&f, &f, &h).unwrap() < 1e-12);
}

#[test]
fn jacobi_is_trilinear() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let f = random_trig_polynomial(64, 3, &mut rng).unwrap();
    let g = random_trig_polynomial(64, 3, &mut rng).unwrap();
    // a deliberately non-zero residual: g is not band-limited for triple products
    let h = GridField::from_fn(64, |x, y| (15.0 * x + 14.0 * y).sin()).unwrap();
    let base = jacobi_residual(&f, &g, &h).unwrap();
    for s in [2.0, -0.5, 8.0] {
        let scaled = jacobi_residual(&f.scale(s), &g, &h).unwrap();
        assert!((scaled - s.abs() * base).abs() <= 1e-12 * (1.0 + scaled));
    }
}

#[test]
fn leibniz_rule() {
    let n = 64;
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..10 {
        let f = random_trig_polynomial(n, 4, &mut rng).unwrap();
        let g = random_trig_polynomial(n, 4, &mut rng).unwrap();
        let h = random_trig_polynomial(n, 4, &mut rng).unwrap();
        let lhs = bracket(&f.mul(&g).unwrap(), &h).unwrap();
        let rhs = f
            .mul(&bracket(&g, &h).unwrap())
            .unwrap()
            .add(&g.mul(&bracket(&f, &h).unwrap()).unwrap())
            .unwrap();
        assert!(lhs.sub(&rhs).unwrap().max_norm() < 1e-10);
    }
}

#[test]
fn single_mode_base_flows_are_steady() {
    for gamma in [0.5, 1.0, 3.0] {
        for (a, b) in [(1.0, 1.0), (2.0, -1.0), (0.0, 3.0)] {
            let omega = GridField::from_fn(64, |x, y| gamma * (a * x + b * y).cos()).unwrap();
            let psi = invert_laplacian(&omega).unwrap();
            assert!(bracket(&psi, &omega).unwrap().max_norm() < 1e-12);
        }
    }
}

#[test]
fn inverse_laplacian_of_the_base_mode() {
    let omega = GridField::from_fn(64, |x, y| (x + y).cos()).unwrap();
    let psi = invert_laplacian(&omega).unwrap();
    assert!(psi.add(&omega.scale(0.5)).unwrap().max_norm() < 1e-14);
    assert!(psi.mean().norm() < 1e-15);
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let f = random_trig_polynomial(64, 10, &mut rng).unwrap();
    assert!(laplacian(&invert_laplacian(&f).unwrap()).sub(&f).unwrap().max_norm() < 1e-13);
    let shifted = f.add(&GridField::constant(64, 1.0).unwrap()).unwrap();
    assert!(matches!(invert_laplacian(&shifted), Err(LabError::Domain(_))));
}

#[test]
fn velocity_is_divergence_free() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let psi = random_trig_polynomial(64, 12, &mut rng).unwrap();
    let (u, v) = velocity(&psi);
    assert!(u.dx().add(&v.dy()).unwrap().max_norm() < 1e-13);
    assert!(u.mean().norm() < 1e-15 && v.mean().norm() < 1e-15);
}

#[test]
fn lax_second_operator_is_half_the_first_on_the_base_mode() {
    let omega = GridField::from_fn(64, |x, y| 1.3 * (x + y).cos()).unwrap();
    let psi = invert_laplacian(&omega).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for _ in 0..5 {
        let phi = random_trig_polynomial(64, 8, &mut rng).unwrap();
        let a = bracket(&psi, &phi).unwrap();
        let l = bracket(&omega, &phi).unwrap();
        assert!(a.add(&l.scale(0.5)).unwrap().max_norm() < 1e-12);
    }
}

#[test]
fn lax_zero_mode_defect_stays_flat() {
    let omega = GridField::from_fn(64, |x, y| (x + y).cos()).unwrap();
    let phi = omega.mul(&omega).unwrap();
    assert!(bracket(&omega, &phi).unwrap().max_norm() < 1e-12);
    let rep = lax_residuals(&omega, &phi, Complex64::new(0.0, 0.0), 5.0, LaxControl::default()).unwrap();
    assert_eq!(rep.times.len(), 11);
    assert!(rep.max_defect() < 1e-10, "{:?}", rep.defects);
    assert!(rep.max_defect() <= 10.0 * rep.initial_defect().max(f64::MIN_POSITIVE) || rep.max_defect() < 1e-14);
}

#[test]
fn lax_compatibility_for_random_phi() {
    let omega = GridField::from_fn(128, |x, y| 0.8 * (x + y).cos()).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for _ in 0..5 {
        let phi = random_trig_polynomial(128, 10, &mut rng).unwrap();
        let rep = lax_residuals(
            &omega,
            &phi,
            Complex64::new(0.1, 0.2),
            0.0,
            LaxControl { dt: 0.01, samples: 2 },
        )
        .unwrap();
        assert!(rep.compatibility_residual < 1e-10);
        assert!(rep.steady_residual < 1e-12);
    }
}

#[test]
fn lax_requires_a_steady_base_flow() {
    let omega = GridField::from_fn(32, |x, y| x.cos() + (2.0 * y).cos()).unwrap();
    let phi = GridField::from_fn(32, |x, y| (x - y).sin()).unwrap();
    let r = lax_residuals(&omega, &phi, Complex64::new(0.0, 0.0), 1.0, LaxControl::default());
    assert!(matches!(r, Err(LabError::Precondition(_))));
}

#[test]
fn darboux_worked_example() {
    let fields = cosine_example(128, 1.0, 0.1, false).unwrap();
    let rep = darboux_transform(&fields, &DarbouxTime::Steady).unwrap();
    assert!(rep.constraint_laplacian < 1e-8);
    assert!(rep.constraint_potential < 1e-8);
    assert!(rep.transformed_l < 1e-8);
    assert!(rep.transformed_a < 1e-8);
    assert!(rep.mask_fraction < 0.05);
    assert!(rep.reliable && !rep.degenerate);
}

#[test]
fn darboux_identity_potential_shift() {
    for gamma in [0.5, 2.0] {
        let fields = cosine_example(128, gamma, 0.0, false).unwrap();
        let rep = darboux_transform(&fields, &DarbouxTime::Steady).unwrap();
        assert!(rep.max_residual() < 1e-8);
    }
}

#[test]
fn darboux_kernel_direction_is_flagged() {
    let fields = cosine_example(128, 1.0, 0.1, true).unwrap();
    let rep = darboux_transform(&fields, &DarbouxTime::Steady).unwrap();
    assert!(rep.degenerate);
    assert!(rep.ptilde_max < 1e-10);
    assert!(rep.max_residual() < 1e-8);
}

#[test]
fn field_files_round_trip() {
    let dir = std::env::temp_dir().join(format!("euler-lab-torus-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let f = random_trig_polynomial(16, 3, &mut rng).unwrap();
    for (name, format) in [("f.csv", FieldFormat::Csv), ("f.bin", FieldFormat::Binary)] {
        let path = dir.join(name);
        write_field(&path, &f, format).unwrap();
        let back = read_field(&path, format).unwrap();
        assert_eq!(back.values(), f.values());
        assert_eq!(back.kind(), f.kind());
    }
    std::fs::remove_dir_all(&dir).unwrap();
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn bracket_is_antisymmetric(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let f = random_trig_polynomial(32, 8, &mut rng).unwrap();
        let g = random_trig_polynomial(32, 8, &mut rng).unwrap();
        let fg = bracket(&f, &g).unwrap();
        let gf = bracket(&g, &f).unwrap();
        prop_assert!(fg.add(&gf).unwrap().max_norm() < 1e-14 * (1.0 + fg.max_norm()) * 10.0);
        prop_assert!(bracket(&f, &f).unwrap().max_norm() < 1e-14 * (1.0 + fg.max_norm()) * 10.0);
    }

    #[test]
    fn jacobi_identity_holds_for_any_seed(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let f = random_trig_polynomial(32, 4, &mut rng).unwrap();
        let g = random_trig_polynomial(32, 4, &mut rng).unwrap();
        let h = random_trig_polynomial(32, 4, &mut rng).unwrap();
        prop_assert!(jacobi_residual(&f, &g, &h).unwrap() < 1e-10);
    }
}
