mod common;

use common::*;
use nalgebra::{Complex, DMatrix, DVector};
use qbmor::bench::*;
use qbmor::kron::{QuadMap, SparseMat};
use qbmor::linalg::{orthonormality_defect, principal_angle_sines};
use qbmor::model::*;
use qbmor::moments::{dense_rep_w2, linear_moments, w2_moments};
use qbmor::reduction::*;
use qbmor::simulate::{integrate_qb, IntegratorConfig};

type C = Complex<f64>;

fn same_span(v1: &DMatrix<f64>, v2: &DMatrix<f64>, tol: f64) -> bool {
    v1.ncols() == v2.ncols() && principal_angle_sines(v1, v2).first().copied().unwrap_or(0.0) <= tol
}

fn linear_system(r: &mut rand::rngs::StdRng, n: usize) -> QbSystem {
    let mut s = rand_qb(r, n, 1, true, false);
    s.g = QuadMap::zeros(n, n, n);
    s.d = QuadMap::zeros(n, n, 1);
    s
}

/// Taylor coefficients of C (sE − A)⁻¹ B at s0 by the trapezoidal rule on a
/// circle (Cauchy integral).
fn taylor_by_contour(s: &QbSystem, s0: f64, count: usize, radius: f64) -> Vec<f64> {
    let e = s.e.to_dense().map(|v| C::new(v, 0.0));
    let a = s.a.to_dense().map(|v| C::new(v, 0.0));
    let b = s.b.to_dense().map(|v| C::new(v, 0.0));
    let c = s.c.row(0).map(|v| C::new(v, 0.0));
    let nodes = 64;
    let mut coef = vec![C::new(0.0, 0.0); count];
    for k in 0..nodes {
        let theta = 2.0 * std::f64::consts::PI * k as f64 / nodes as f64;
        let w = C::from_polar(radius, theta);
        let x = (&e * (w + s0) - &a).lu().solve(&b).unwrap();
        let h = (&c * x)[(0, 0)];
        for (j, cj) in coef.iter_mut().enumerate() {
            *cj += h * C::from_polar(radius.powi(-(j as i32)), -(j as f64) * theta);
        }
    }
    coef.iter().map(|z| z.re / nodes as f64).collect()
}

trait FirstRow {
    fn row(&self, i: usize) -> DMatrix<f64>;
}

impl FirstRow for SparseMat {
    fn row(&self, i: usize) -> DMatrix<f64> {
        self.to_dense().rows(i, 1).into_owned()
    }
}

#[test]
fn projection_error_identity() {
    let mut r = rng(5);
    for trial in 0..20 {
        let n = 3 + trial % 6;
        let red = 1 + trial % (n - 1);
        let s = rand_qb(&mut r, n, 1, false, false);
        let v = rand_mat(&mut r, n, red, 1.0).qr().q();
        let sr = galerkin_project(&s, &v).unwrap();
        let x = &linear_moments(&s.e, &s.a, &s.b.to_dense(), 0.0, 1).unwrap()[0];
        let xr = &linear_moments(&sr.e, &sr.a, &sr.b.to_dense(), 0.0, 1).unwrap()[0];
        let a = s.a.to_dense();
        let ar_inv = sr.a.to_dense().try_inverse().unwrap();
        let id = DMatrix::<f64>::identity(n, n);
        let rhs = (&id - &v * ar_inv * v.transpose() * &a) * (&id - &v * v.transpose()) * x;
        let lhs = x - &v * xr;
        assert!((lhs - rhs).amax() <= 1e-12, "trial {trial}");
    }
}

#[test]
fn reduced_w2_representation_is_galerkin_projection() {
    let mut r = rng(9);
    for trial in 0..10 {
        let n = 2 + trial % 3;
        let q = 1 + trial % 2;
        let s = rand_qb(&mut r, n, 1, trial % 2 == 0, false);
        let t = rand_linear_generator(&mut r, q, 1);
        let v = rand_mat(&mut r, n, 1 + trial % n, 1.0).qr().q();
        let d = assemble_driven(&s, &t).unwrap();
        let dr = assemble_driven(&galerkin_project(&s, &v).unwrap(), &t).unwrap();
        let full = dense_rep_w2(&d).unwrap();
        let red = dense_rep_w2(&dr).unwrap();
        let (m, mr) = (d.dim(), dr.dim());
        let mut cal = DMatrix::zeros(m, mr);
        cal.view_mut((0, 0), (n, v.ncols())).copy_from(&v);
        for i in 0..q {
            cal[(n + i, v.ncols() + i)] = 1.0;
        }
        let mut w = DMatrix::zeros(m + m * m, mr + mr * mr);
        w.view_mut((0, 0), (m, mr)).copy_from(&cal);
        w.view_mut((m, mr), (m * m, mr * mr)).copy_from(&cal.kronecker(&cal));
        let wt = w.transpose();
        assert!((&red.e - &wt * &full.e * &w).amax() <= 1e-12, "trial {trial} E");
        assert!((&red.a - &wt * &full.a * &w).amax() <= 1e-12, "trial {trial} A");
        assert!((&red.b - &wt * &full.b).amax() <= 1e-12, "trial {trial} b");
    }
}

#[test]
fn krylov_reduction_matches_linear_moments_exactly() {
    let mut r = rng(21);
    for trial in 0..12 {
        let n = 5 + 4 * trial;
        let order = 1 + trial % 4;
        let s = rand_qb(&mut r, n, 1, trial % 2 == 1, false);
        let s0 = [0.0, 0.7, 2.5][trial % 3];
        let cfg = AssmConfig {
            freqs_w2: vec![],
            orders_w2: vec![],
            freqs_w1: vec![s0],
            orders_w1: vec![order],
            lowrank_tol: 1e-3,
            lyap_tol: None,
        };
        let t = rand_linear_generator(&mut r, 1, 1);
        let res = assm_reduce(&s, &t, &cfg).unwrap();
        let v = &res.basis.v;
        let full = linear_moments(&s.e, &s.a, &s.b.to_dense(), s0, order).unwrap();
        let red = linear_moments(&res.reduced.e, &res.reduced.a, &res.reduced.b.to_dense(), s0, order).unwrap();
        for i in 0..order {
            let err = (&full[i] - v * &red[i]).norm() / full[i].norm();
            assert!(err <= 1e-8, "trial {trial}, moment {i}: {err:e}");
        }
    }
}

#[test]
fn krylov_reduction_matches_transfer_derivatives() {
    // chain of five first-order sections
    let n = 5;
    let mut entries = Vec::new();
    for i in 0..n {
        entries.push((i, i, -1.0 - i as f64 * 0.3));
        if i > 0 {
            entries.push((i, i - 1, 1.0));
        }
    }
    let s = QbSystem::new(
        SparseMat::identity(n),
        SparseMat::new(n, n, entries).unwrap(),
        QuadMap::zeros(n, n, n),
        QuadMap::zeros(n, n, 1),
        SparseMat::new(n, 1, vec![(0, 0, 1.0)]).unwrap(),
        SparseMat::new(1, n, vec![(0, n - 1, 1.0)]).unwrap(),
        DVector::zeros(n),
        None,
        None,
    )
    .unwrap();
    let (s0, order) = (0.5, 3);
    let basis = krylov_basis(&s, &[s0], &[order]).unwrap();
    assert_eq!(basis.len(), order);
    let red = galerkin_project(&s, &basis.v).unwrap();
    let full = taylor_by_contour(&s, s0, order, 0.5);
    let reduced = taylor_by_contour(&red, s0, order, 0.5);
    for j in 0..order {
        assert!((full[j] - reduced[j]).abs() <= 1e-8 * full[j].abs(), "derivative {j}: {} vs {}", full[j], reduced[j]);
    }
}

#[test]
fn assm_span_invariant_under_input_scaling() {
    let s = burgers(40, 0.01, BurgersForm::Advective).unwrap();
    let g = burgers_case_generator(1).unwrap();
    let base = AssmConfig::uniform(&[0.5, 2.0], 2, 2, 1e-5);
    let v1 = assm_reduce(&s, &g, &base).unwrap().basis.v;
    for alpha in [0.1, 4.0] {
        let mut gs = g.clone();
        gs.z0 *= alpha;
        let mut cfg = base.clone();
        cfg.lowrank_tol *= alpha;
        let v2 = assm_reduce(&s, &gs, &cfg).unwrap().basis.v;
        assert!(same_span(&v1, &v2, 1e-8), "alpha {alpha}: {:?}", principal_angle_sines(&v1, &v2));
    }
}

#[test]
fn assm_without_quadratic_part_has_no_second_level_directions() {
    let mut r = rng(3);
    let s = linear_system(&mut r, 6);
    let t = rand_linear_generator(&mut r, 2, 1);
    let res = assm_reduce(&s, &t, &AssmConfig::uniform(&[1.0], 2, 2, 1e-8)).unwrap();
    assert_eq!((res.n_a, res.n_b), (0, 0));
    assert_eq!(res.basis.len(), res.n_1);
}

#[test]
fn x2_bases_of_scalar_driven_system() {
    let d = DrivenSystem::new(
        SparseMat::identity(1),
        SparseMat::new(1, 1, vec![(0, 0, -1.0)]).unwrap(),
        QuadMap::new(1, 1, 1, vec![(0, 0, 0, 1.0)]).unwrap(),
        DVector::from_element(1, 1.0),
        1,
    )
    .unwrap();
    let cfg = AssmConfig {
        freqs_w2: vec![0.0],
        orders_w2: vec![2],
        freqs_w1: vec![],
        orders_w1: vec![],
        lowrank_tol: 1e-8,
        lyap_tol: Some(1e-12),
    };
    let x2 = assm_x2_bases(&d, &cfg, &DMatrix::zeros(1, 0)).unwrap();
    assert_eq!(x2.va.len(), 1);
    assert!((x2.va.v[(0, 0)].abs() - 1.0).abs() <= 1e-12);
    assert_eq!(x2.vb.len(), 0);
}

#[test]
fn burgers_x2_approximation_conditions() {
    let s = burgers(50, 0.01, BurgersForm::Advective).unwrap();
    let g = burgers_case_generator(1).unwrap();
    let freqs = [0.03, 0.22];
    let res = assm_reduce(&s, &g, &AssmConfig::uniform(&freqs, 3, 2, 1e-3)).unwrap();
    let v = &res.basis.v;
    let d = assemble_driven_extended(&s, &g).unwrap();
    let n = s.dim();
    for &sigma in &freqs {
        let ms = w2_moments(&d, sigma, 2, 1e-10).unwrap();
        for i in 0..2 {
            let m = ms.m[i].rows(0, n).into_owned();
            let resid = (&m - v * (v.transpose() * &m)).norm() / m.norm();
            assert!(resid <= 0.1, "m_{i} at {sigma}: {resid:e}");
            let full = ms.mhat[i].to_matrix().view((0, 0), (n, n)).into_owned();
            let proj = v * (v.transpose() * &full * v) * v.transpose();
            let resid = (&full - proj).norm() / full.norm();
            assert!(resid <= 0.3, "mhat_{i} at {sigma}: {resid:e}");
        }
    }
}

#[test]
fn rc_ladder_small_dimension_band() {
    let s = rc_ladder(50).unwrap();
    let res = assm_reduce(&s, &rc_case_generator(1).unwrap(), &AssmConfig::uniform(&[1.0], 3, 2, 6e-4)).unwrap();
    let n = res.basis.len();
    assert!((4..=11).contains(&n), "n = {n}");
}

#[test]
fn multm_without_nonlinearity_is_krylov() {
    let mut r = rng(31);
    let s = linear_system(&mut r, 8);
    let m = multm_reduce(&s, &MultmConfig::uniform(&[0.5], 3, 2)).unwrap();
    let k = krylov_basis(&s, &[0.5], &[3]).unwrap();
    assert!(same_span(&m.v, &k.v, 1e-8));

    let weight = SignalGenerator::linear(
        SparseMat::new(1, 1, vec![(0, 0, -1.0)]).unwrap(),
        SparseMat::identity(1),
        DVector::zeros(1),
    )
    .unwrap()
    .with_input(SparseMat::identity(1))
    .unwrap();
    let iw = multm_iw_reduce(&s, &weight, &MultmConfig::uniform(&[0.5], 3, 2)).unwrap();
    assert!(same_span(&iw.v, &k.v, 1e-8), "{:?}", principal_angle_sines(&iw.v, &k.v));
}

#[test]
fn multm_iw_extraction_reproduces_extended_basis() {
    let mut r = rng(37);
    let s = rand_qb(&mut r, 6, 1, false, true);
    let weight = SignalGenerator::linear(
        SparseMat::new(1, 1, vec![(0, 0, -2.0)]).unwrap(),
        SparseMat::identity(1),
        DVector::zeros(1),
    )
    .unwrap()
    .with_input(SparseMat::identity(1))
    .unwrap();
    let cfg = MultmConfig::uniform(&[0.3, 1.1], 2, 1);
    let v = multm_iw_reduce(&s, &weight, &cfg).unwrap().v;
    let ext = multm_reduce(&assemble_input_weighted(&s, &weight).unwrap().as_qb_system(&s.c).unwrap(), &cfg).unwrap();
    let top = ext.v.rows(0, 6).into_owned();
    let resid = (&top - &v * (v.transpose() * &top)).amax();
    assert!(resid <= 1e-10, "{resid:e}");
    assert!(orthonormality_defect(&v) <= 1e-12);
}

#[test]
fn pod_block_keeps_variables_unmixed() {
    let nt = 100;
    let s = chafee(nt).unwrap();
    let tr = integrate_qb(&s, &chafee_case_input(1).unwrap(), &IntegratorConfig::with_horizon(3.0)).unwrap();
    let plain = pod_reduce(tr.snapshots(), 12, None).unwrap();
    let block = pod_reduce(tr.snapshots(), 12, Some(&[(nt, 6), (nt, 6)])).unwrap();
    assert_eq!(block.len(), 12);
    assert!(orthonormality_defect(&plain.v) <= 1e-12);
    assert!(orthonormality_defect(&block.v) <= 1e-12);
    assert_eq!(block.v.view((nt, 0), (nt, 6)).amax(), 0.0);
    assert_eq!(block.v.view((0, 6), (nt, 6)).amax(), 0.0);
    assert!(!same_span(&plain.v, &block.v, 1e-3));
}

#[test]
fn pod_orthogonal_snapshots() {
    let mut snaps = DMatrix::zeros(4, 3);
    snaps[(0, 0)] = 3.0;
    snaps[(1, 1)] = 2.0;
    snaps[(2, 2)] = 1.0;
    let b = pod_reduce(&snaps, 2, None).unwrap();
    let mut want = DMatrix::zeros(4, 2);
    want[(0, 0)] = 1.0;
    want[(1, 1)] = 1.0;
    assert!(same_span(&b.v, &want, 1e-12));
    assert!(pod_reduce(&snaps, 4, None).is_err());
}

#[test]
fn irka_on_symmetric_chain_gives_positive_real_shifts() {
    let n = 30;
    let mut entries = Vec::new();
    for i in 0..n {
        entries.push((i, i, -2.0));
        if i + 1 < n {
            entries.push((i, i + 1, 1.0));
            entries.push((i + 1, i, 1.0));
        }
    }
    let s = QbSystem::new(
        SparseMat::identity(n),
        SparseMat::new(n, n, entries).unwrap(),
        QuadMap::zeros(n, n, n),
        QuadMap::zeros(n, n, 1),
        SparseMat::new(n, 1, vec![(0, 0, 1.0)]).unwrap(),
        SparseMat::new(1, n, vec![(0, 0, 1.0)]).unwrap(),
        DVector::zeros(n),
        None,
        None,
    )
    .unwrap();
    let irka = irka_frequencies(&s, 3).unwrap();
    assert_eq!(irka.shifts.len(), 3);
    assert!(irka.shifts.iter().all(|&x| x > 0.0));
    assert!(irka.shifts.windows(2).all(|w| w[0] <= w[1]));
}

#[test]
fn irka_rc_ladder_near_published_shifts() {
    let s = rc_ladder(500).unwrap();
    let irka = irka_frequencies(&s, 4).unwrap();
    let published = [1.2, 8.8, 37.7, 108.2];
    assert_eq!(irka.shifts.len(), 4, "{:?}", irka.warning);
    for (got, want) in irka.shifts.iter().zip(published) {
        assert!((got - want).abs() <= 0.2 * want, "{got} vs {want}");
    }
}

#[test]
fn every_reducer_returns_orthonormal_basis() {
    let s = burgers(30, 0.01, BurgersForm::Conservative).unwrap();
    let g = burgers_case_generator(2).unwrap();
    let freqs = [0.1, 1.0];
    let bases = [
        assm_reduce(&s, &g, &AssmConfig::uniform(&freqs, 2, 2, 1e-6)).unwrap().basis,
        multm_reduce(&s, &MultmConfig::uniform(&freqs, 3, 2)).unwrap(),
        krylov_basis(&s, &freqs, &[2, 2]).unwrap(),
    ];
    for b in &bases {
        assert!(orthonormality_defect(&b.v) <= 1e-12);
        assert_eq!(b.provenance.len(), b.len());
    }
}
