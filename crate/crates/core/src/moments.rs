//! Moments of linear transfer functions and of the second- and third-order
//! frequency representations of a driven system.
//!
//! Vectors in R^{M²} are identified with M×M matrices row-major:
//! (u ⊗ v)[j·M + k] = u_j v_k corresponds to u vᵀ.

use std::fmt::Write as _;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::kron::{circled, kron, kron_vec, LowRankSymFactor, QuadMap, SparseMat};
use crate::linalg::{lyap_dense, SparseLu, C64};
use crate::lyap::{chain_rhs, solve as lyap_solve, LyapProblem};
use crate::model::DrivenSystem;

/// Largest number of moments per frequency.
pub const MAX_ORDER: usize = 5;
/// Largest dimension of the unrolled dense representations.
pub const ORACLE_CAP: usize = 4096;
/// Largest driven-system dimension for third-order moments.
pub const ORDER3_CAP: usize = 512;
const MAX_QUAD_NODES: usize = 200_000;

/// A_{s0} = A − s0 E together with its sparse LU.
pub struct ShiftedOperator {
    pub s0: f64,
    e: SparseMat,
    lu: SparseLu,
}

impl ShiftedOperator {
    pub fn new(e: &SparseMat, a: &SparseMat, s0: f64) -> Result<Self> {
        let shifted = a.lin_comb(1.0, e, -s0)?;
        let lu = SparseLu::new(&shifted, &format!("A - s0 E at s0 = {s0}")).map_err(|err| match err {
            Error::Singular(msg) => Error::Singular(format!("shift {s0}: {msg}")),
            other => other,
        })?;
        Ok(ShiftedOperator {
            s0,
            e: e.clone(),
            lu,
        })
    }

    pub fn solve(&self, v: &DVector<f64>) -> Result<DVector<f64>> {
        self.lu.solve(v)
    }

    pub fn solve_mat(&self, v: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        self.lu.solve_mat(v)
    }

    /// A_{s0}⁻¹ E v.
    pub fn step(&self, v: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        self.lu.solve_mat(&self.e.mul_dense(v))
    }
}

fn check_order(l: usize) -> Result<()> {
    if l == 0 || l > MAX_ORDER {
        return Err(Error::InvalidParam(format!(
            "number of moments {l} outside 1..={MAX_ORDER}; prefer more frequencies over high orders"
        )));
    }
    Ok(())
}

/// k_0 = −A_{s0}⁻¹ B, k_i = A_{s0}⁻¹ E k_{i−1}.
pub fn linear_moments(e: &SparseMat, a: &SparseMat, b: &DMatrix<f64>, s0: f64, l: usize) -> Result<Vec<DMatrix<f64>>> {
    if b.nrows() != a.rows() {
        return Err(Error::dim(format!("B has {} rows, A is {}x{}", b.nrows(), a.rows(), a.cols())));
    }
    let op = ShiftedOperator::new(e, a, s0)?;
    let mut out = Vec::with_capacity(l);
    if l == 0 {
        return Ok(out);
    }
    out.push(-op.solve_mat(b)?);
    for i in 1..l {
        let next = op.step(&out[i - 1])?;
        out.push(next);
    }
    Ok(out)
}

/// Second level of a moment set.
#[derive(Clone, Debug)]
pub enum SecondLevel {
    Factored(LowRankSymFactor),
    /// Matrix form of a (not necessarily symmetric) vector in R^{M²}.
    Dense(DMatrix<f64>),
}

impl SecondLevel {
    pub fn to_matrix(&self) -> DMatrix<f64> {
        match self {
            SecondLevel::Factored(f) => f.to_matrix(),
            SecondLevel::Dense(m) => m.clone(),
        }
    }

    /// The represented vector in R^{M²}.
    pub fn to_kron_vector(&self) -> DVector<f64> {
        let m = self.to_matrix();
        let t = m.transpose();
        DVector::from_column_slice(t.as_slice())
    }

    pub fn factored(&self) -> Option<&LowRankSymFactor> {
        match self {
            SecondLevel::Factored(f) => Some(f),
            SecondLevel::Dense(_) => None,
        }
    }
}

/// Symmetric CP representation Σ_k ω_k z_k⊗z_k⊗z_k, with one weight vector
/// per moment sharing the same nodes.
#[derive(Clone, Debug)]
pub struct CpFactor {
    pub nodes: DMatrix<f64>,
    pub weights: Vec<Vec<f64>>,
}

impl CpFactor {
    /// The represented vector of moment `i` in R^{M³}.
    pub fn to_kron_vector(&self, i: usize) -> DVector<f64> {
        let m = self.nodes.nrows();
        let mut out = DVector::zeros(m * m * m);
        for (k, w) in self.weights[i].iter().enumerate() {
            let z = self.nodes.column(k).into_owned();
            let zz = kron_vec(&kron_vec(&z, &z), &z);
            out.axpy(*w, &zz, 1.0);
        }
        out
    }
}

#[derive(Clone, Debug)]
pub struct MomentSet {
    pub s0: f64,
    pub order: usize,
    pub m: Vec<DVector<f64>>,
    pub mhat: Vec<SecondLevel>,
    pub mhathat: Option<CpFactor>,
    /// Relative residuals of the Lyapunov solves behind each mhat.
    pub lyap_residuals: Vec<f64>,
}

impl MomentSet {
    pub fn dump(&self, n_x: Option<usize>) -> String {
        let mut s = String::new();
        let take = |v: &DVector<f64>| -> Vec<f64> {
            let n = n_x.unwrap_or(v.len()).min(v.len());
            v.iter().take(n).copied().collect()
        };
        let _ = writeln!(s, "# s0 = {:.17e}, order = {}", self.s0, self.order);
        for (i, m) in self.m.iter().enumerate() {
            let _ = writeln!(s, "[m {i}]");
            for v in take(m) {
                let _ = writeln!(s, "{:.17e}", v);
            }
        }
        for (i, mh) in self.mhat.iter().enumerate() {
            match mh {
                SecondLevel::Factored(f) => {
                    let _ = writeln!(
                        s,
                        "[mhat {i}] rank {} residual {:.3e}",
                        f.rank(),
                        self.lyap_residuals.get(i).copied().unwrap_or(0.0)
                    );
                    for (c, w) in f.weights.iter().enumerate() {
                        let _ = writeln!(s, "weight {:.17e}", w);
                        for v in take(&f.factors.column(c).into_owned()) {
                            let _ = writeln!(s, "{:.17e}", v);
                        }
                    }
                }
                SecondLevel::Dense(m) => {
                    let _ = writeln!(s, "[mhat {i}] dense {}x{}", m.nrows(), m.ncols());
                    for v in m.iter() {
                        let _ = writeln!(s, "{:.17e}", v);
                    }
                }
            }
        }
        s
    }
}

/// Second-order recursion for a generic symmetric initial factor, with
/// `split` the plant dimension when the pencil is plant-over-generator block
/// triangular:
/// ⊛²A_{s0/2} m̂_0 = −Σ w b⊗b, ⊛²A_{s0/2} m̂_i = E⊗² m̂_{i−1},
/// A_{s0} m_0 = −G m̂_0, A_{s0} m_i = E m_{i−1} − G m̂_i.
pub fn w2_moments_from_factor(
    e: &SparseMat,
    a: &SparseMat,
    g: &QuadMap,
    init: &LowRankSymFactor,
    s0: f64,
    l: usize,
    lyap_tol: f64,
    split: Option<usize>,
) -> Result<MomentSet> {
    check_order(l)?;
    let op = ShiftedOperator::new(e, a, s0)?;
    let a_half = a.lin_comb(1.0, e, -0.5 * s0)?;
    let mut mhat: Vec<SecondLevel> = Vec::with_capacity(l);
    let mut residuals = Vec::with_capacity(l);
    let mut m: Vec<DVector<f64>> = Vec::with_capacity(l);
    let mut rhs = init.clone();
    for i in 0..l {
        if i > 0 {
            let prev = mhat[i - 1].factored().expect("second level is factored");
            rhs = chain_rhs(e, prev)?.scale_weights(-1.0);
        }
        let mut problem = LyapProblem::new(e, &a_half, &rhs).with_tol(lyap_tol);
        problem.split = split;
        let sol = lyap_solve(&problem)?;
        if !sol.converged {
            return Err(Error::LyapNoConvergence {
                residual: sol.residual,
                tol: lyap_tol,
                iterations: sol.iterations,
                context: format!(" (second-order moment {i} at s0 = {s0})"),
            });
        }
        residuals.push(sol.residual);
        let source = sol.x.apply_quad_sum(g)?;
        let rhs_m = if i == 0 { -source } else { e.matvec(&m[i - 1]) - source };
        m.push(op.solve(&rhs_m)?);
        mhat.push(SecondLevel::Factored(sol.x));
    }
    Ok(MomentSet {
        s0,
        order: l,
        m,
        mhat,
        mhathat: None,
        lyap_residuals: residuals,
    })
}

/// Moments of W2 at s0.
pub fn w2_moments(d: &DrivenSystem, s0: f64, l: usize, lyap_tol: f64) -> Result<MomentSet> {
    w2_moments_from_factor(&d.e, &d.a, &d.g, &LowRankSymFactor::from_vector(&d.b), s0, l, lyap_tol, Some(d.n_x))
}

/// Second-order moments for initial conditions spanned by the columns of
/// B0: one moment set per column pair (a ≤ b) for the symmetric part
/// (b_a⊗b_b + b_b⊗b_a)/2 of the pair, factored as
/// ((b_a+b_b)⊗² − (b_a−b_b)⊗²)/4.
pub fn w2_moments_b0(
    d: &DrivenSystem,
    b0: &DMatrix<f64>,
    s0: f64,
    l: usize,
    lyap_tol: f64,
) -> Result<Vec<((usize, usize), MomentSet)>> {
    if b0.nrows() != d.dim() {
        return Err(Error::dim(format!("B0 has {} rows, driven system {}", b0.nrows(), d.dim())));
    }
    let mut out = Vec::new();
    for a in 0..b0.ncols() {
        for b in a..b0.ncols() {
            let init = if a == b {
                LowRankSymFactor::from_vector(&b0.column(a).into_owned())
            } else {
                let mut f = DMatrix::zeros(b0.nrows(), 2);
                f.set_column(0, &(b0.column(a) + b0.column(b)));
                f.set_column(1, &(b0.column(a) - b0.column(b)));
                LowRankSymFactor::new(f, vec![0.25, -0.25])?
            };
            out.push(((a, b), w2_moments_from_factor(&d.e, &d.a, &d.g, &init, s0, l, lyap_tol, Some(d.n_x))?));
        }
    }
    Ok(out)
}

fn dense_inverse_apply(e: &SparseMat, m: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    if e.is_identity() {
        return Ok(m.clone());
    }
    SparseLu::new(e, "mass matrix")?.solve_mat(m)
}

/// Quadrature nodes and weights for X_i = (−1)^i ∫_0^∞ t^i/i! z(t)⊗³ dt with
/// z(t) = exp(tF) c, using t = e^x and the trapezoid rule.
fn third_level_cp(f: &DMatrix<f64>, c: &DVector<f64>, l: usize) -> Result<CpFactor> {
    let m = f.nrows();
    let (u, t) = crate::linalg::complex_schur(f);
    let (lambda, w) = crate::linalg::eigen_from_schur(&u, &t);
    let max_re = lambda.iter().fold(f64::NEG_INFINITY, |acc, z| acc.max(z.re));
    if max_re >= 0.0 {
        return Err(Error::Unstable(format!(
            "third-order solve needs a stable shifted pencil (max real part {max_re:.3e})"
        )));
    }
    let a_min = -max_re;
    let lam_max = lambda.iter().fold(0.0f64, |acc, z| acc.max(z.norm()));
    // largest angle of −λ from the positive real axis
    let angle = lambda.iter().fold(0.0f64, |acc, z| acc.max((-z).arg().abs()));
    let margin = std::f64::consts::FRAC_PI_2 - angle;
    if margin <= 1e-6 {
        return Err(Error::Unstable("spectrum too close to the imaginary axis for the rank-structured solve".into()));
    }
    let wc = w.clone();
    let ctil = wc
        .clone()
        .lu()
        .solve(&c.map(|v| C64::new(v, 0.0)))
        .ok_or_else(|| Error::Singular("eigenvector matrix singular".into()))?;
    let cond = {
        let s = w.clone().svd(false, false).singular_values;
        let smin = s.iter().fold(f64::INFINITY, |acc, v| acc.min(*v));
        let smax = s.iter().fold(0.0f64, |acc, v| acc.max(*v));
        if smin > 0.0 {
            smax / smin
        } else {
            f64::INFINITY
        }
    };
    if !cond.is_finite() || cond > 1e10 {
        return Err(Error::Singular(format!("shifted operator not diagonalizable (eigenvector condition {cond:.2e})")));
    }
    let digits = 40.0 + 3.0 * cond.ln();
    let h = 2.0 * std::f64::consts::PI * 0.5 * margin / digits;
    let x_min = -digits - (3.0 * lam_max).max(1.0).ln();
    let mut t_max = digits / (3.0 * a_min);
    for _ in 0..5 {
        t_max = (digits + (l as f64) * t_max.max(1.0).ln()) / (3.0 * a_min);
    }
    let x_max = (1.5 * t_max).ln();
    let count = ((x_max - x_min) / h).ceil() as usize + 1;
    if count > MAX_QUAD_NODES {
        return Err(Error::TooLarge(format!("{count} quadrature nodes for the third-order level")));
    }
    let mut nodes = DMatrix::zeros(m, count);
    let mut weights = vec![vec![0.0; count]; l];
    for k in 0..count {
        let x = x_min + k as f64 * h;
        let tk = x.exp();
        let mut col = DVector::<C64>::zeros(m);
        for (a_idx, lam) in lambda.iter().enumerate() {
            let coef = (lam * tk).exp() * ctil[a_idx];
            col.axpy(coef, &wc.column(a_idx), C64::new(1.0, 0.0));
        }
        for r in 0..m {
            nodes[(r, k)] = col[r].re;
        }
        let base = h * tk;
        let mut pow = 1.0;
        for (i, wi) in weights.iter_mut().enumerate() {
            if i > 0 {
                pow *= tk / i as f64;
            }
            let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
            wi[k] = sign * base * pow;
        }
    }
    Ok(CpFactor { nodes, weights })
}

/// Moments of W3 at s0 (three-level recursion with a symmetrized quadratic
/// map).
pub fn w3_moments(d: &DrivenSystem, s0: f64, l: usize, lyap_tol: f64) -> Result<MomentSet> {
    check_order(l)?;
    let mdim = d.dim();
    if mdim > ORDER3_CAP {
        return Err(Error::TooLarge(format!("third-order moments limited to dimension {ORDER3_CAP}, got {mdim}")));
    }
    let gs = d.g.symmetrized()?;
    let op = ShiftedOperator::new(&d.e, &d.a, s0)?;
    let e_dense = d.e.to_dense();
    let third = d.a.lin_comb(1.0, &d.e, -s0 / 3.0)?;
    let f3 = dense_inverse_apply(&d.e, &third.to_dense())?;
    let c = dense_inverse_apply(&d.e, &DMatrix::from_column_slice(mdim, 1, d.b.as_slice()))?;
    let cp = third_level_cp(&f3, &c.column(0).into_owned(), l)?;

    let half = d.a.lin_comb(1.0, &d.e, -s0 / 2.0)?;
    let f2 = dense_inverse_apply(&d.e, &half.to_dense())?;
    let (u2, t2) = crate::linalg::complex_schur(&f2);

    // rows 𝔊s(z⊗z) and E z per node
    let kcount = cp.nodes.ncols();
    let mut gz = DMatrix::zeros(mdim, kcount);
    let mut ez = DMatrix::zeros(mdim, kcount);
    for k in 0..kcount {
        let z = cp.nodes.column(k).into_owned();
        let mut out = DVector::zeros(mdim);
        gs.apply_into(z.as_slice(), z.as_slice(), out.as_mut_slice());
        gz.set_column(k, &out);
        ez.set_column(k, &(&e_dense * &z));
    }

    let mut mhat: Vec<SecondLevel> = Vec::with_capacity(l);
    let mut m: Vec<DVector<f64>> = Vec::with_capacity(l);
    let mut residuals = Vec::with_capacity(l);
    for i in 0..l {
        let mut wgz = gz.clone();
        for (k, w) in cp.weights[i].iter().enumerate() {
            wgz.column_mut(k).scale_mut(*w);
        }
        let source = wgz * ez.transpose();
        let mut rhs = -source;
        if i > 0 {
            let prev = mhat[i - 1].to_matrix();
            rhs += &e_dense * prev * e_dense.transpose();
        }
        // E (F Y + Y Fᵀ) Eᵀ = rhs
        let lhs = dense_inverse_apply(&d.e, &rhs)?;
        let lhs = dense_inverse_apply(&d.e, &lhs.transpose())?.transpose();
        let y = crate::linalg::sylvester_schur((&u2, &t2), (&u2, &t2), &lhs)?;
        let res = &f2 * &y + &y * f2.transpose() - &lhs;
        let rel = res.norm() / lhs.norm().max(f64::MIN_POSITIVE);
        if rel > lyap_tol {
            return Err(Error::LyapNoConvergence {
                residual: rel,
                tol: lyap_tol,
                iterations: 1,
                context: format!(" (third-order auxiliary {i} at s0 = {s0})"),
            });
        }
        residuals.push(rel);
        let mut gy = DVector::zeros(mdim);
        for &(row, j, k, g) in gs.entries() {
            gy[row] += g * y[(j, k)];
        }
        let rhs_m = if i == 0 { -2.0 * gy } else { d.e.matvec(&m[i - 1]) - 2.0 * gy };
        m.push(op.solve(&rhs_m)?);
        mhat.push(SecondLevel::Dense(y));
    }
    Ok(MomentSet {
        s0,
        order: l,
        m,
        mhat,
        mhathat: Some(cp),
        lyap_residuals: residuals,
    })
}

/// Unrolled linear realization (E, A, b, C) of a frequency representation.
#[derive(Clone, Debug)]
pub struct DenseRep {
    pub e: DMatrix<f64>,
    pub a: DMatrix<f64>,
    pub b: DVector<f64>,
    pub c: DMatrix<f64>,
}

impl DenseRep {
    /// C (sE − A)⁻¹ b.
    pub fn transfer(&self, s: f64) -> Result<DVector<f64>> {
        let x = (&self.e * s - &self.a)
            .lu()
            .solve(&self.b)
            .ok_or_else(|| Error::Singular(format!("dense resolvent at s = {s}")))?;
        Ok(&self.c * x)
    }

    /// Moments C k_i of the realization at s0.
    pub fn moments(&self, s0: f64, l: usize) -> Result<Vec<DVector<f64>>> {
        let lu = (&self.a - &self.e * s0).lu();
        let mut k = lu
            .solve(&(-&self.b))
            .ok_or_else(|| Error::Singular(format!("dense shifted matrix at s0 = {s0}")))?;
        let mut out = vec![&self.c * &k];
        for _ in 1..l {
            k = lu
                .solve(&(&self.e * &k))
                .ok_or_else(|| Error::Singular(format!("dense shifted matrix at s0 = {s0}")))?;
            out.push(&self.c * &k);
        }
        Ok(out)
    }

    /// Full state moments k_i.
    pub fn state_moments(&self, s0: f64, l: usize) -> Result<Vec<DVector<f64>>> {
        let lu = (&self.a - &self.e * s0).lu();
        let mut k = lu
            .solve(&(-&self.b))
            .ok_or_else(|| Error::Singular(format!("dense shifted matrix at s0 = {s0}")))?;
        let mut out = vec![k.clone()];
        for _ in 1..l {
            k = lu
                .solve(&(&self.e * &k))
                .ok_or_else(|| Error::Singular(format!("dense shifted matrix at s0 = {s0}")))?;
            out.push(k.clone());
        }
        Ok(out)
    }
}

fn place(dst: &mut DMatrix<f64>, r0: usize, c0: usize, src: &DMatrix<f64>) {
    dst.view_mut((r0, c0), (src.nrows(), src.ncols())).copy_from(src);
}

/// Dense realization of W2: blkdiag(E, E⊗E), [[A, G], [0, ⊛²A]], [0; b⊗b],
/// [I, 0].
pub fn dense_rep_w2(d: &DrivenSystem) -> Result<DenseRep> {
    let m = d.dim();
    let m2 = m * m;
    if m2 > ORACLE_CAP {
        return Err(Error::TooLarge(format!("dense W2 representation of size {m2} exceeds {ORACLE_CAP}")));
    }
    let n = m + m2;
    let mut e = DMatrix::zeros(n, n);
    let mut a = DMatrix::zeros(n, n);
    place(&mut e, 0, 0, &d.e.to_dense());
    place(&mut e, m, m, &kron(&d.e, &d.e)?.to_dense());
    place(&mut a, 0, 0, &d.a.to_dense());
    place(&mut a, 0, m, &d.g.to_flat().to_dense());
    place(&mut a, m, m, &circled(2, &d.e, &d.a)?.to_dense());
    let mut b = DVector::zeros(n);
    b.rows_mut(m, m2).copy_from(&kron_vec(&d.b, &d.b));
    let mut c = DMatrix::zeros(m, n);
    place(&mut c, 0, 0, &DMatrix::identity(m, m));
    Ok(DenseRep { e, a, b, c })
}

/// Dense realization of W3 with the symmetrized quadratic map.
pub fn dense_rep_w3(d: &DrivenSystem) -> Result<DenseRep> {
    let m = d.dim();
    let m2 = m * m;
    let m3 = m2 * m;
    if m3 > ORACLE_CAP {
        return Err(Error::TooLarge(format!("dense W3 representation of size {m3} exceeds {ORACLE_CAP}")));
    }
    let gs = d.g.symmetrized()?.to_flat();
    let n = m + m2 + m3;
    let mut e = DMatrix::zeros(n, n);
    let mut a = DMatrix::zeros(n, n);
    let e2 = kron(&d.e, &d.e)?;
    place(&mut e, 0, 0, &d.e.to_dense());
    place(&mut e, m, m, &e2.to_dense());
    place(&mut e, m + m2, m + m2, &kron(&e2, &d.e)?.to_dense());
    place(&mut a, 0, 0, &d.a.to_dense());
    place(&mut a, 0, m, &(gs.to_dense() * 2.0));
    place(&mut a, m, m, &circled(2, &d.e, &d.a)?.to_dense());
    place(&mut a, m, m + m2, &kron(&gs, &d.e)?.to_dense());
    place(&mut a, m + m2, m + m2, &circled(3, &d.e, &d.a)?.to_dense());
    let mut b = DVector::zeros(n);
    b.rows_mut(m + m2, m3).copy_from(&kron_vec(&kron_vec(&d.b, &d.b), &d.b));
    let mut c = DMatrix::zeros(m, n);
    place(&mut c, 0, 0, &DMatrix::identity(m, m));
    Ok(DenseRep { e, a, b, c })
}

/// Tolerance used by eval_W for its Lyapunov solve.
pub const EVAL_LYAP_TOL: f64 = 1e-12;

/// W_order(s) ∈ R^M by a cascade of solves.
pub fn eval_w(d: &DrivenSystem, order: usize, s: f64) -> Result<DVector<f64>> {
    match order {
        1 => {
            let op = ShiftedOperator::new(&d.e, &d.a, s)?;
            Ok(-op.solve(&d.b)?)
        }
        2 => Ok(w2_moments(d, s, 1, EVAL_LYAP_TOL)?.m.remove(0)),
        3 => Ok(w3_moments(d, s, 1, EVAL_LYAP_TOL)?.m.remove(0)),
        _ => Err(Error::Unsupported(format!("frequency representation of order {order}"))),
    }
}

/// Checks ⊛ⁱ_E (A − (s0/i)E) = −s0 E^{⊗i} + ⊛ⁱ_E A entrywise to 1e-12.
pub fn shifted_tensor_check(e: &SparseMat, a: &SparseMat, s0: f64, order: usize) -> Result<bool> {
    let shifted = a.lin_comb(1.0, e, -s0 / order as f64)?;
    let lhs = circled(order, e, &shifted)?;
    let mut epow = e.clone();
    for _ in 1..order {
        epow = kron(&epow, e)?;
    }
    let rhs = circled(order, e, a)?.lin_comb(1.0, &epow, -s0)?;
    let diff = lhs.lin_comb(1.0, &rhs, -1.0)?;
    Ok(diff.max_abs() <= 1e-12)
}

/// Solves F Y + Y Fᵀ = C densely (exposed for oracles).
pub fn dense_lyap(f: &DMatrix<f64>, c: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    lyap_dense(f, c)
}
