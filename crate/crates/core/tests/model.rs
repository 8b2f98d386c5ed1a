mod common;

use common::*;
use nalgebra::{DMatrix, DVector};
use qbmor::bench::{burgers, burgers_case_generator, burgers_case_input, BurgersForm};
use qbmor::kron::{QuadMap, SparseMat};
use qbmor::model::*;
use qbmor::simulate::{integrate_driven, integrate_qb, output_error, InputFn, IntegratorConfig};

fn tight(t_end: f64) -> IntegratorConfig {
    IntegratorConfig {
        abs_tol: 1e-12,
        rel_tol: 1e-10,
        t_end,
        max_step: f64::INFINITY,
        output_grid: 50,
    }
}

fn max_diff(a: &SparseMat, b: &SparseMat) -> f64 {
    (a.to_dense() - b.to_dense()).amax()
}

fn quad_diff(a: &QuadMap, b: &QuadMap) -> f64 {
    (flat(a) - flat(b)).amax()
}

/// u(t) = C_z exp(A_z t) z0 and its derivative.
fn linear_generator_input(t: &SignalGenerator) -> InputFn {
    let (az, cz, z0) = (t.az.to_dense(), t.cz.to_dense(), t.z0.clone());
    let (az2, cz2, z02) = (az.clone(), cz.clone(), z0.clone());
    InputFn::new(move |s| &cz * (&az * s).exp() * &z0).with_derivative(move |s| &cz2 * &az2 * (&az2 * s).exp() * &z02)
}

#[test]
fn commuting_diagram_random() {
    let mut r = rng(101);
    let mut worst = 0.0f64;
    for trial in 0..50 {
        let n = 3 + trial % 6;
        let p = 1 + trial % 2;
        let q = 1 + trial % 3;
        let s = rand_qb(&mut r, n, p, trial % 2 == 0, trial % 3 == 0);
        let t = if trial % 4 == 0 {
            rand_quadratic_generator(&mut r, q, p)
        } else {
            rand_linear_generator(&mut r, q, p)
        };
        let red = 1 + trial % n.min(4);
        let v = rand_mat(&mut r, n, red, 1.0).qr().q();
        let left = assemble_driven_extended(&galerkin_project(&s, &v).unwrap(), &t).unwrap();
        let right = assemble_driven_extended(&s, &t).unwrap().project(&v).unwrap();
        let d = max_diff(&left.e, &right.e)
            .max(max_diff(&left.a, &right.a))
            .max(quad_diff(&left.g, &right.g))
            .max((&left.b - &right.b).amax());
        assert_eq!(left.n_x, right.n_x);
        worst = worst.max(d);
    }
    assert!(worst <= 1e-12, "largest block difference {worst:e}");
}

#[test]
fn driven_dimension_and_plain_variant() {
    let mut r = rng(7);
    let s = rand_qb(&mut r, 4, 1, false, false);
    let t = rand_linear_generator(&mut r, 3, 1);
    let d = assemble_driven(&s, &t).unwrap();
    assert_eq!(d.dim(), 7);
    let x = DVector::from_fn(7, |i, _| i as f64);
    assert_eq!(d.px(&x), DVector::from_vec(vec![0.0, 1.0, 2.0, 3.0]));
    let ext = assemble_driven_extended(&s, &t).unwrap();
    assert_eq!(flat(&d.g), flat(&ext.g));
    assert_eq!(d.a.to_dense(), ext.a.to_dense());

    let s_ext = rand_qb(&mut r, 4, 1, false, true);
    assert!(assemble_driven(&s_ext, &t).is_err());
}

#[test]
fn driven_simulation_matches_cosimulation() {
    let mut r = rng(11);
    for (trial, extended) in [(0, false), (1, false), (2, true)] {
        let s = rand_qb(&mut r, 3, 1, trial == 1, extended);
        let t = rand_linear_generator(&mut r, 2, 1);
        let d = assemble_driven_extended(&s, &t).unwrap();
        let cfg = tight(1.0);
        let driven = integrate_driven(&d, &SparseMat::identity(3), &cfg).unwrap();
        let u = linear_generator_input(&t);
        let direct = integrate_qb(&s, &u, &cfg).unwrap();
        let diff = (&driven.outputs - &direct.states).amax();
        assert!(diff <= 1e-8, "trial {trial}: {diff:e}");
    }
}

#[test]
fn input_weighted_matches_cascade() {
    let mut r = rng(13);
    for extended in [false, true] {
        let s = rand_qb(&mut r, 3, 1, false, extended);
        // z' = -z + u_F, u = z; with u_F = sin t and z(0) = 0.
        let f = SignalGenerator::linear(
            SparseMat::new(1, 1, vec![(0, 0, -1.0)]).unwrap(),
            SparseMat::identity(1),
            DVector::zeros(1),
        )
        .unwrap()
        .with_input(SparseMat::identity(1))
        .unwrap();
        let w = assemble_input_weighted(&s, &f).unwrap();
        let mut s0 = s.clone();
        s0.x0 = DVector::zeros(3);
        let sf = w.as_qb_system(&s0.c).unwrap();
        let cfg = tight(2.0);
        let uf = InputFn::scalar(f64::sin);
        let weighted = integrate_qb(&sf, &uf, &cfg).unwrap();
        let u = InputFn::scalar(|t| 0.5 * (t.sin() - t.cos() + (-t).exp()))
            .with_derivative(|t| DVector::from_element(1, 0.5 * (t.cos() + t.sin() - (-t).exp())));
        let cascade = integrate_qb(&s0, &u, &cfg).unwrap();
        let diff = output_error(&cascade, &weighted).unwrap().max_abs;
        assert!(diff <= 1e-8, "extended = {extended}: {diff:e}");
    }
}

#[test]
fn weighted_system_of_linear_input_plant() {
    let mut r = rng(17);
    let s = rand_qb(&mut r, 4, 1, false, false);
    let f = SignalGenerator::linear(
        SparseMat::new(1, 1, vec![(0, 0, -1.0)]).unwrap(),
        SparseMat::identity(1),
        DVector::zeros(1),
    )
    .unwrap()
    .with_input(SparseMat::identity(1))
    .unwrap();
    let w = assemble_input_weighted(&s, &f).unwrap();
    assert_eq!(w.dim(), 5);
    let bc = w.bc.to_dense();
    assert_eq!(bc.rows(0, 4).amax(), 0.0);
    assert_eq!(bc[(4, 0)], 1.0);
}

#[test]
fn galerkin_blocks_match_dense_formulas() {
    let mut r = rng(19);
    let s = rand_qb(&mut r, 5, 2, true, true);
    let v = rand_mat(&mut r, 5, 2, 1.0).qr().q();
    let red = galerkin_project(&s, &v).unwrap();
    let vt = v.transpose();
    let vv = v.kronecker(&v);
    let vi = v.kronecker(&DMatrix::<f64>::identity(2, 2));
    assert!((red.e.to_dense() - &vt * s.e.to_dense() * &v).amax() <= 1e-12);
    assert!((red.a.to_dense() - &vt * s.a.to_dense() * &v).amax() <= 1e-12);
    assert!((flat(&red.g) - &vt * flat(&s.g) * &vv).amax() <= 1e-12);
    assert!((flat(&red.d) - &vt * flat(&s.d) * &vi).amax() <= 1e-12);
    assert!((red.b.to_dense() - &vt * s.b.to_dense()).amax() <= 1e-12);
    assert!((red.c.to_dense() - s.c.to_dense() * &v).amax() <= 1e-12);
    assert!((&red.x0 - &vt * &s.x0).amax() <= 1e-12);
    assert!((flat(red.gu.as_ref().unwrap()) - &vt * flat(s.gu.as_ref().unwrap())).amax() <= 1e-12);
    assert!((red.bp.as_ref().unwrap().to_dense() - &vt * s.bp.as_ref().unwrap().to_dense()).amax() <= 1e-12);

    let skewed = &v * 1.01;
    assert!(galerkin_project(&s, &skewed).is_err());
}

#[test]
fn superposition_of_exponential_and_cosine() {
    let (a1, l1, a2, l2) = (0.7, -0.4, 1.5, 2.0);
    let exp = SignalGenerator::linear(
        SparseMat::new(1, 1, vec![(0, 0, l1)]).unwrap(),
        SparseMat::identity(1),
        DVector::from_element(1, a1),
    )
    .unwrap();
    let cos = SignalGenerator::linear(
        SparseMat::new(2, 2, vec![(0, 1, l2), (1, 0, -l2)]).unwrap(),
        SparseMat::new(1, 2, vec![(0, 0, 1.0)]).unwrap(),
        DVector::from_vec(vec![a2, 0.0]),
    )
    .unwrap();
    let sum = superpose_generators(&[exp, cos]).unwrap();
    assert_eq!(sum.dim(), 3);
    assert_eq!(sum.cz.to_dense(), DMatrix::from_row_slice(1, 3, &[1.0, 1.0, 0.0]));
    let u = linear_generator_input(&sum);
    for k in 0..20 {
        let t = 0.3 * k as f64;
        let want = a1 * (l1 * t).exp() + a2 * (l2 * t).cos();
        assert!((u.value(t)[0] - want).abs() <= 1e-12);
    }
}

#[test]
fn burgers_case_one_generator_matches_closed_form() {
    let g = burgers_case_generator(1).unwrap();
    assert_eq!(g.dim(), 8);
    assert!(g.is_linear());
    let u = linear_generator_input(&g);
    let closed = burgers_case_input(1).unwrap();
    for k in 0..=60 {
        let t = 0.05 * k as f64;
        assert!((u.value(t)[0] - closed.value(t)[0]).abs() <= 1e-9, "t = {t}");
    }
}

#[test]
fn quadratic_generator_derivative_state() {
    let g = burgers_case_generator(2).unwrap();
    let ext = extend_generator_derivative(&g, 1).unwrap();
    let q = g.dim();
    let alone = DrivenSystem::new(SparseMat::identity(2 * q), ext.az.clone(), ext.gz.clone(), ext.z0.clone(), 2 * q).unwrap();
    let cfg = IntegratorConfig {
        abs_tol: 1e-12,
        rel_tol: 1e-10,
        t_end: 3.0,
        max_step: f64::INFINITY,
        output_grid: 3000,
    };
    let tr = integrate_driven(&alone, &SparseMat::identity(2 * q), &cfg).unwrap();
    let h = tr.times[1] - tr.times[0];
    let z = |i: usize, k: usize| tr.outputs[(i, k)];
    let mut worst = 0.0f64;
    for k in 2..tr.times.len() - 2 {
        for i in 0..q {
            let fd = (z(i, k - 2) - 8.0 * z(i, k - 1) + 8.0 * z(i, k + 1) - z(i, k + 2)) / (12.0 * h);
            worst = worst.max((fd - tr.outputs[(q + i, k)]).abs());
        }
    }
    assert!(worst <= 1e-4, "{worst:e}");
    assert!(extend_generator_derivative(&g, 3).is_err());
}

#[test]
fn conservative_and_advective_burgers_converge_together() {
    let g = burgers_case_generator(1).unwrap();
    let cfg = IntegratorConfig::with_horizon(3.0);
    let gap = |n: usize| {
        let adv = burgers(n, 0.01, BurgersForm::Advective).unwrap();
        let cons = burgers(n, 0.01, BurgersForm::Conservative).unwrap();
        assert!(cons.gu.is_some() && adv.gu.is_none());
        let ya = integrate_driven(&assemble_driven(&adv, &g).unwrap(), &adv.c, &cfg).unwrap();
        let yc = integrate_driven(&assemble_driven_extended(&cons, &g).unwrap(), &cons.c, &cfg).unwrap();
        output_error(&ya, &yc).unwrap().max_abs
    };
    let (g50, g100) = (gap(50), gap(100));
    // measured 1.45e-3 at N = 50, second order in the mesh width
    assert!(g50 <= 1.5e-3, "{g50:e}");
    assert!(g50 / g100 >= 3.5, "{g50:e} -> {g100:e}");
}

#[test]
fn bundles_round_trip() {
    let mut r = rng(23);
    let s = rand_qb(&mut r, 4, 2, true, true);
    let t = rand_quadratic_generator(&mut r, 3, 2);
    let dir = std::env::temp_dir().join(format!("qbmor-model-{}", std::process::id()));
    s.save(&dir.join("s")).unwrap();
    t.save(&dir.join("t")).unwrap();
    let d = assemble_driven_extended(&s, &t).unwrap();
    d.save(&dir.join("d")).unwrap();
    let s2 = QbSystem::load(&dir.join("s")).unwrap();
    let t2 = SignalGenerator::load(&dir.join("t")).unwrap();
    let d2 = DrivenSystem::load(&dir.join("d")).unwrap();
    std::fs::remove_dir_all(&dir).unwrap();
    assert_eq!(flat(&s.g), flat(&s2.g));
    assert_eq!(s.bp.unwrap().to_dense(), s2.bp.unwrap().to_dense());
    assert_eq!(t.z0, t2.z0);
    assert_eq!(d.b, d2.b);
    assert_eq!(d.n_x, d2.n_x);
}
