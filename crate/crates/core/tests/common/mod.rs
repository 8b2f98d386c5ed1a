#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use qbmor::kron::{QuadMap, SparseMat};
use qbmor::model::{DrivenSystem, QbSystem};
use qbmor::simulate::InputFn;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

pub fn rng(seed: u64) -> StdRng {
    StdRng::seed_from_u64(seed)
}

pub fn rand_mat(r: &mut StdRng, rows: usize, cols: usize, scale: f64) -> DMatrix<f64> {
    DMatrix::from_fn(rows, cols, |_, _| scale * r.gen_range(-1.0..1.0))
}

pub fn rand_vec(r: &mut StdRng, n: usize) -> DVector<f64> {
    DVector::from_fn(n, |_, _| r.gen_range(-1.0..1.0))
}

/// Random matrix whose eigenvalues have real parts ≤ −0.2 and stay away
/// from the imaginary axis.
pub fn rand_stable(r: &mut StdRng, n: usize) -> DMatrix<f64> {
    loop {
        let mut a = rand_mat(r, n, n, 0.5);
        for i in 0..n {
            a[(i, i)] -= 1.0 + r.gen_range(0.0..2.0);
        }
        let eig = a.complex_eigenvalues();
        if eig.iter().all(|z| z.re < -0.2 && z.im.abs() < 3.0 * -z.re) {
            return a;
        }
    }
}

/// Symmetric positive definite mass matrix close to the identity.
pub fn rand_mass(r: &mut StdRng, n: usize) -> DMatrix<f64> {
    let p = rand_mat(r, n, n, 0.2);
    DMatrix::identity(n, n) + &p * p.transpose()
}

pub fn rand_quad(r: &mut StdRng, rows: usize, left: usize, right: usize, density: f64) -> QuadMap {
    let mut entries = Vec::new();
    for i in 0..rows {
        for j in 0..left {
            for k in 0..right {
                if r.gen::<f64>() < density {
                    entries.push((i, j, k, r.gen_range(-1.0..1.0)));
                }
            }
        }
    }
    QuadMap::new(rows, left, right, entries).unwrap()
}

pub fn sparse(m: &DMatrix<f64>) -> SparseMat {
    SparseMat::from_dense(m)
}

/// Random stable driven system of dimension m (identity or SPD mass).
pub fn rand_driven(r: &mut StdRng, m: usize, with_mass: bool) -> DrivenSystem {
    let e = if with_mass { rand_mass(r, m) } else { DMatrix::identity(m, m) };
    // stability of E⁻¹A follows from A + Aᵀ < 0 only for SPD E; resample
    let a = loop {
        let a = rand_stable(r, m);
        let f = e.clone().lu().solve(&a).unwrap();
        let eig = f.complex_eigenvalues();
        if eig.iter().all(|z| z.re < -0.1 && z.im.abs() < 3.0 * -z.re) {
            break a;
        }
    };
    let g = rand_quad(r, m, m, m, 0.6);
    let b = rand_vec(r, m);
    let n_x = (m + 1) / 2;
    DrivenSystem::new(sparse(&e), sparse(&a), g, b, n_x).unwrap()
}

/// Dense flattened quadratic map, column j·right + k.
pub fn flat(g: &QuadMap) -> DMatrix<f64> {
    let mut out = DMatrix::zeros(g.rows(), g.left() * g.right());
    for &(i, j, k, v) in g.entries() {
        out[(i, j * g.right() + k)] += v;
    }
    out
}

pub fn rel_err(a: &DVector<f64>, b: &DVector<f64>) -> f64 {
    let d = (a - b).norm();
    let n = b.norm();
    if n == 0.0 {
        d
    } else {
        d / n
    }
}

/// Random stable sparse pencil of size m: perturbed diffusion stencil and a
/// mass matrix close to the identity. Eigenvalues of E⁻¹A lie roughly in
/// [−25, −0.3].
pub fn rand_sparse_pencil(r: &mut StdRng, m: usize) -> (SparseMat, SparseMat) {
    let mut a = Vec::new();
    let mut e = Vec::new();
    let lap = 5.0;
    for i in 0..m {
        a.push((i, i, -2.0 * lap - 0.5 - r.gen_range(0.0..2.0)));
        e.push((i, i, 1.0 + r.gen_range(0.0..0.2)));
        if i + 1 < m {
            let off = r.gen_range(0.8..1.2) * lap;
            a.push((i, i + 1, off));
            a.push((i + 1, i, off));
            a.push((i, i + 1, r.gen_range(-0.3..0.3)));
            let em = r.gen_range(0.0..0.05);
            e.push((i, i + 1, em));
            e.push((i + 1, i, em));
        }
    }
    (
        SparseMat::new(m, m, e).unwrap(),
        SparseMat::new(m, m, a).unwrap(),
    )
}

/// Independent dense Lyapunov solve A X Eᵀ + E X Aᵀ + C = 0 by the matrix
/// sign-function iteration on E⁻¹A.
pub fn sign_lyap(e: &DMatrix<f64>, a: &DMatrix<f64>, c: &DMatrix<f64>) -> DMatrix<f64> {
    let einv = e.clone().try_inverse().unwrap();
    let mut f = &einv * a;
    let mut q = &einv * c * einv.transpose();
    for _ in 0..100 {
        let finv = f.clone().try_inverse().unwrap();
        let next = (&f + &finv) * 0.5;
        q = (&q + &finv * &q * finv.transpose()) * 0.5;
        let done = (&next - &f).norm() <= 1e-14 * next.norm();
        f = next;
        if done {
            break;
        }
    }
    q * 0.5
}

/// Random small plant with `p` inputs, stable linear part and the given
/// optional input extensions.
pub fn rand_qb(r: &mut StdRng, n: usize, p: usize, with_mass: bool, extended: bool) -> qbmor::model::QbSystem {
    let e = if with_mass { rand_mass(r, n) } else { DMatrix::identity(n, n) };
    let a = rand_stable(r, n);
    let gu = extended.then(|| rand_quad(r, n, p, p, 0.7));
    let bp = extended.then(|| sparse(&rand_mat(r, n, p, 0.5)));
    qbmor::model::QbSystem::new(
        sparse(&e),
        sparse(&a),
        rand_quad(r, n, n, n, 0.5),
        rand_quad(r, n, n, p, 0.5),
        sparse(&rand_mat(r, n, p, 1.0)),
        sparse(&rand_mat(r, 2, n, 1.0)),
        rand_vec(r, n) * 0.1,
        gu,
        bp,
    )
    .unwrap()
}

/// Random linear generator with `q` states and `p` outputs; stable so the
/// closed form stays bounded.
pub fn rand_linear_generator(r: &mut StdRng, q: usize, p: usize) -> qbmor::model::SignalGenerator {
    qbmor::model::SignalGenerator::linear(sparse(&rand_stable(r, q)), sparse(&rand_mat(r, p, q, 1.0)), rand_vec(r, q)).unwrap()
}

/// Random quadratic generator.
pub fn rand_quadratic_generator(r: &mut StdRng, q: usize, p: usize) -> qbmor::model::SignalGenerator {
    qbmor::model::SignalGenerator::new(
        sparse(&rand_stable(r, q)),
        rand_quad(r, q, q, q, 0.5),
        sparse(&rand_mat(r, p, q, 1.0)),
        rand_vec(r, q) * 0.3,
    )
    .unwrap()
}

pub fn blkdiag(blocks: &[DMatrix<f64>]) -> DMatrix<f64> {
    let n: usize = blocks.iter().map(|b| b.nrows()).sum();
    let mut out = DMatrix::zeros(n, n);
    let mut o = 0;
    for b in blocks {
        out.view_mut((o, o), (b.nrows(), b.ncols())).copy_from(b);
        o += b.nrows();
    }
    out
}

pub fn swap_perm(m: usize) -> DMatrix<f64> {
    let mut p = DMatrix::zeros(m * m, m * m);
    for j in 0..m {
        for k in 0..m {
            p[(j * m + k, k * m + j)] = 1.0;
        }
    }
    p
}

/// State moments of the unrolled system built here with nalgebra's Kronecker
/// product.
pub fn oracle_moments(e: &DMatrix<f64>, a: &DMatrix<f64>, b: &DVector<f64>, s0: f64, l: usize) -> Vec<DVector<f64>> {
    let lu = (a - e * s0).lu();
    let mut k = lu.solve(&(-b)).unwrap();
    let mut out = vec![k.clone()];
    for _ in 1..l {
        k = lu.solve(&(e * &k)).unwrap();
        out.push(k.clone());
    }
    out
}

pub fn oracle_w2(d: &qbmor::model::DrivenSystem) -> (DMatrix<f64>, DMatrix<f64>, DVector<f64>) {
    let m = d.dim();
    let e = d.e.to_dense();
    let a = d.a.to_dense();
    let e2 = blkdiag(&[e.clone(), e.kronecker(&e)]);
    let mut a2 = blkdiag(&[a.clone(), a.kronecker(&e) + e.kronecker(&a)]);
    a2.view_mut((0, m), (m, m * m)).copy_from(&flat(&d.g));
    let mut b2 = DVector::zeros(m + m * m);
    b2.rows_mut(m, m * m).copy_from(&d.b.kronecker(&d.b));
    (e2, a2, b2)
}

pub fn oracle_w3(d: &qbmor::model::DrivenSystem) -> (DMatrix<f64>, DMatrix<f64>, DVector<f64>) {
    let m = d.dim();
    let (m2, m3) = (m * m, m * m * m);
    let e = d.e.to_dense();
    let a = d.a.to_dense();
    let gf = flat(&d.g);
    let gs = (&gf + &gf * swap_perm(m)) * 0.5;
    let ee = e.kronecker(&e);
    let e3 = blkdiag(&[e.clone(), ee.clone(), ee.kronecker(&e)]);
    let mut a3 = blkdiag(&[
        a.clone(),
        a.kronecker(&e) + e.kronecker(&a),
        a.kronecker(&ee) + e.kronecker(&a).kronecker(&e) + ee.kronecker(&a),
    ]);
    a3.view_mut((0, m), (m, m2)).copy_from(&(&gs * 2.0));
    a3.view_mut((m, m + m2), (m2, m3)).copy_from(&gs.kronecker(&e));
    let mut b3 = DVector::zeros(m + m2 + m3);
    b3.rows_mut(m + m2, m3).copy_from(&d.b.kronecker(&d.b).kronecker(&d.b));
    (e3, a3, b3)
}

pub fn scalar_plant(a: f64, g: f64, x0: f64) -> QbSystem {
    QbSystem::new(
        SparseMat::identity(1),
        SparseMat::new(1, 1, vec![(0, 0, a)]).unwrap(),
        QuadMap::new(1, 1, 1, vec![(0, 0, 0, g)]).unwrap(),
        QuadMap::zeros(1, 1, 1),
        SparseMat::zeros(1, 1),
        SparseMat::identity(1),
        DVector::from_element(1, x0),
        None,
        None,
    )
    .unwrap()
}

pub fn no_input() -> InputFn {
    InputFn::scalar(|_| 0.0)
}

/// Classical fixed-step Runge-Kutta, independent of the library integrator.
pub fn rk4(f: impl Fn(f64, &DVector<f64>) -> DVector<f64>, x0: DVector<f64>, t_end: f64, steps: usize, samples: &[f64]) -> Vec<DVector<f64>> {
    let h = t_end / steps as f64;
    let mut out = Vec::new();
    let mut x = x0;
    let mut next = 0;
    for k in 0..=steps {
        let t = k as f64 * h;
        while next < samples.len() && (samples[next] - t).abs() <= 0.5 * h {
            out.push(x.clone());
            next += 1;
        }
        if k == steps {
            break;
        }
        let k1 = f(t, &x);
        let k2 = f(t + 0.5 * h, &(&x + &k1 * (0.5 * h)));
        let k3 = f(t + 0.5 * h, &(&x + &k2 * (0.5 * h)));
        let k4 = f(t + h, &(&x + &k3 * h));
        x += (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0);
    }
    out
}
