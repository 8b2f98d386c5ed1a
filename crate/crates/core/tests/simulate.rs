mod common;

use common::*;
use nalgebra::DVector;
use proptest::prelude::*;
use qbmor::bench::*;
use qbmor::kron::{QuadMap, SparseMat};
use qbmor::model::*;
use qbmor::reduction::{assm_reduce, AssmConfig};
use qbmor::simulate::*;
use qbmor::Error;

fn tight(t_end: f64) -> IntegratorConfig {
    IntegratorConfig {
        abs_tol: 1e-10,
        rel_tol: 1e-8,
        ..IntegratorConfig::with_horizon(t_end)
    }
}

#[test]
fn logistic_matches_closed_form() {
    let s = scalar_plant(-1.0, 1.0, 0.5);
    let tr = integrate_qb(&s, &no_input(), &tight(5.0)).unwrap();
    let err = tr
        .times
        .iter()
        .enumerate()
        .map(|(k, t)| (tr.outputs[(0, k)] - 1.0 / (1.0 + t.exp())).abs())
        .fold(0.0, f64::max);
    assert!(err <= 1e-6, "{err:e}");
}

#[test]
fn linear_system_with_mass_matches_matrix_exponential() {
    let mut r = rng(41);
    let e = rand_mass(&mut r, 4);
    let a = rand_stable(&mut r, 4);
    let x0 = rand_vec(&mut r, 4);
    let s = QbSystem::new(
        sparse(&e),
        sparse(&a),
        QuadMap::zeros(4, 4, 4),
        QuadMap::zeros(4, 4, 1),
        SparseMat::zeros(4, 1),
        SparseMat::identity(4),
        x0.clone(),
        None,
        None,
    )
    .unwrap();
    let tr = integrate_qb(&s, &no_input(), &tight(3.0)).unwrap();
    let f = e.clone().lu().solve(&a).unwrap();
    for (k, &t) in tr.times.iter().enumerate() {
        let want = (&f * t).exp() * &x0;
        assert!((tr.outputs.column(k) - &want).amax() <= 1e-6, "t = {t}");
    }
}

#[test]
fn rc_recast_matches_node_equations() {
    let s = rc_ladder(3).unwrap();
    let input = rc_case_input(1).unwrap();
    let full = integrate_qb(&s, &input, &tight(2.0)).unwrap();
    let u = input.clone();
    let reference = rk4(
        |t, v| DVector::from_vec(rc_node_rhs(v.as_slice(), u.value(t)[0], DiodeLaw::Shifted)),
        DVector::zeros(3),
        2.0,
        200_000,
        &full.times,
    );
    assert_eq!(reference.len(), full.times.len());
    let err = reference
        .iter()
        .enumerate()
        .map(|(k, v)| (full.outputs[(0, k)] - v[0]).abs())
        .fold(0.0, f64::max);
    assert!(err <= 1e-6, "{err:e}");
}

#[test]
fn halving_tolerances_is_self_consistent() {
    let spec = BenchmarkSpec::new(BenchmarkName::BurgersAdv, 50, 1);
    let s = spec.system().unwrap();
    let input = spec.input().unwrap();
    let loose = IntegratorConfig::with_horizon(3.0);
    let half = IntegratorConfig {
        abs_tol: loose.abs_tol / 2.0,
        rel_tol: loose.rel_tol / 2.0,
        ..loose.clone()
    };
    let a = integrate_qb(&s, &input, &loose).unwrap();
    let b = integrate_qb(&s, &input, &half).unwrap();
    let last = a.times.len() - 1;
    let scale = a.outputs.column(last).amax();
    let diff = (a.outputs.column(last) - b.outputs.column(last)).amax();
    assert!(diff < 10.0 * (loose.abs_tol + loose.rel_tol * scale), "{diff:e}");
}

#[test]
fn reduced_simulation_agrees_with_projected_driven_system() {
    let spec = BenchmarkSpec::new(BenchmarkName::BurgersAdv, 40, 1);
    let s = spec.system().unwrap();
    let t = spec.generator().unwrap();
    let res = assm_reduce(&s, &t, &AssmConfig::uniform(&[0.5, 2.0], 2, 1, 1e-6)).unwrap();
    let cfg = tight(3.0);
    let direct = integrate_qb(&res.reduced, &spec.input().unwrap(), &cfg).unwrap();
    let d = assemble_driven_extended(&s, &t).unwrap().project(&res.basis.v).unwrap();
    let via_driven = integrate_driven(&d, &res.reduced.c, &cfg).unwrap();
    let err = output_error(&direct, &via_driven).unwrap();
    assert!(err.max_abs <= 1e-6, "{:e}", err.max_abs);
}

#[test]
fn repeated_runs_are_bit_identical() {
    let spec = BenchmarkSpec::new(BenchmarkName::Chafee, 20, 1);
    let s = spec.system().unwrap();
    let cfg = IntegratorConfig::with_horizon(1.0);
    let a = integrate_qb(&s, &spec.input().unwrap(), &cfg).unwrap();
    let b = integrate_qb(&s, &spec.input().unwrap(), &cfg).unwrap();
    assert_eq!(a.outputs, b.outputs);
    assert_eq!(a.states, b.states);
}

#[test]
fn trajectory_shape_invariants() {
    let tr = integrate_qb(&scalar_plant(-1.0, 0.0, 1.0), &no_input(), &IntegratorConfig::default()).unwrap();
    assert_eq!(tr.times.len(), 300);
    assert!(tr.times.windows(2).all(|w| w[1] > w[0]));
    assert_eq!(tr.states.ncols(), tr.times.len());
    assert_eq!(tr.outputs.ncols(), tr.times.len());
    assert_eq!(*tr.times.last().unwrap(), 1.0);
}

#[test]
fn blow_up_is_reported_with_time() {
    // ẋ = x², x(0) = 1 escapes at t = 1
    let s = scalar_plant(0.0, 1.0, 1.0);
    match integrate_qb(&s, &no_input(), &IntegratorConfig::with_horizon(2.0)) {
        Err(Error::Integration { t, .. }) => assert!(t > 0.9 && t <= 1.0 + 1e-3, "t = {t}"),
        other => panic!("expected an integration failure, got {:?}", other.map(|tr| tr.stats)),
    }
}

#[test]
fn constant_offset_error() {
    let tr = integrate_qb(&scalar_plant(-1.0, 0.0, 1.0), &no_input(), &IntegratorConfig::default()).unwrap();
    let mut shifted = tr.clone();
    shifted.outputs.add_scalar_mut(1e-3);
    let e = output_error(&tr, &shifted).unwrap();
    assert!((e.max_abs - 1e-3).abs() <= 1e-15);
    assert!(e.per_time.iter().all(|v| (v - 1e-3).abs() <= 1e-15));
    let mut other_grid = tr.clone();
    other_grid.times[5] += 1e-3;
    assert!(output_error(&tr, &other_grid).is_err());
}

#[test]
fn input_derivative_is_required_for_input_rate_terms() {
    let mut r = rng(43);
    let s = rand_qb(&mut r, 3, 1, false, true);
    let u = InputFn::scalar(|t| t.sin());
    assert!(integrate_qb(&s, &u, &IntegratorConfig::default()).is_err());
    let u = u.with_derivative(|t| DVector::from_element(1, t.cos()));
    assert!(integrate_qb(&s, &u, &IntegratorConfig::default()).is_ok());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    /// Stable linear systems follow the matrix exponential for any size and seed.
    #[test]
    fn random_linear_systems_follow_exponential(seed in 0u64..1000, n in 1usize..6) {
        let mut r = rng(seed);
        let a = rand_stable(&mut r, n);
        let x0 = rand_vec(&mut r, n);
        let s = QbSystem::new(
            SparseMat::identity(n),
            sparse(&a),
            QuadMap::zeros(n, n, n),
            QuadMap::zeros(n, n, 1),
            SparseMat::zeros(n, 1),
            SparseMat::identity(n),
            x0.clone(),
            None,
            None,
        )
        .unwrap();
        let tr = integrate_qb(&s, &no_input(), &tight(2.0)).unwrap();
        let last = tr.times.len() - 1;
        let want = (&a * 2.0).exp() * &x0;
        prop_assert!((tr.outputs.column(last) - want).amax() <= 1e-6);
    }
}
