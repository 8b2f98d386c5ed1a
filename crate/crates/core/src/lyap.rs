//! Low-rank solver for A X Eᵀ + E X Aᵀ + R W Rᵀ = 0 by adaptive rational
//! Krylov projection with Galerkin extraction.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::kron::{LowRankSymFactor, SparseMat};
use crate::linalg::{complex_schur, lyap_dense, ComplexSparseLu, OrthBasis, SparseLu, C64};

pub const DEFAULT_TOL: f64 = 1e-8;
pub const DEFAULT_MAX_RANK: usize = 200;
pub const DEFAULT_MAX_ITERS: usize = 100;

#[derive(Clone, Debug)]
pub struct LyapProblem<'a> {
    pub e: &'a SparseMat,
    pub a: &'a SparseMat,
    pub rhs: &'a LowRankSymFactor,
    pub tol: f64,
    pub max_rank: usize,
    pub max_iters: usize,
    /// Leading block size of a block upper triangular pencil whose trailing
    /// block is small enough for a dense solve.
    pub split: Option<usize>,
}

impl<'a> LyapProblem<'a> {
    pub fn new(e: &'a SparseMat, a: &'a SparseMat, rhs: &'a LowRankSymFactor) -> Self {
        LyapProblem {
            e,
            a,
            rhs,
            tol: DEFAULT_TOL,
            max_rank: DEFAULT_MAX_RANK,
            max_iters: DEFAULT_MAX_ITERS,
            split: None,
        }
    }

    pub fn with_tol(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }

    pub fn with_split(mut self, split: usize) -> Self {
        self.split = Some(split);
        self
    }
}

#[derive(Clone, Debug)]
pub struct LyapSolution {
    pub x: LowRankSymFactor,
    /// Relative Frobenius residual of the returned factor in the original
    /// (untransformed) equation.
    pub residual: f64,
    pub converged: bool,
    pub iterations: usize,
    /// Residual of the best iterate after each iteration.
    pub history: Vec<f64>,
}

/// Relative Frobenius residual ‖A X Eᵀ + E X Aᵀ + R W Rᵀ‖ / ‖R W Rᵀ‖ for
/// X = Σ w_k z_k z_kᵀ, evaluated through a thin QR of the stacked factors.
pub fn residual_norm(e: &SparseMat, a: &SparseMat, x: &LowRankSymFactor, rhs: &LowRankSymFactor) -> f64 {
    let m = a.rows();
    let r = x.rank();
    let p = rhs.rank();
    let rhs_norm = sym_core_norm(&rhs.factors, &DMatrix::from_diagonal(&DVector::from_vec(rhs.weights.clone())));
    let cols = 2 * r + p;
    let mut l = DMatrix::zeros(m, cols);
    l.columns_mut(0, r).copy_from(&a.mul_dense(&x.factors));
    l.columns_mut(r, r).copy_from(&e.mul_dense(&x.factors));
    l.columns_mut(2 * r, p).copy_from(&rhs.factors);
    let mut mid = DMatrix::zeros(cols, cols);
    for (k, w) in x.weights.iter().enumerate() {
        mid[(k, r + k)] = *w;
        mid[(r + k, k)] = *w;
    }
    for (k, w) in rhs.weights.iter().enumerate() {
        mid[(2 * r + k, 2 * r + k)] = *w;
    }
    let res = sym_core_norm(&l, &mid);
    if rhs_norm == 0.0 {
        res
    } else {
        res / rhs_norm
    }
}

/// ‖L K Lᵀ‖_F via thin QR of L.
fn sym_core_norm(l: &DMatrix<f64>, k: &DMatrix<f64>) -> f64 {
    if l.ncols() == 0 {
        return 0.0;
    }
    let r = if l.nrows() >= l.ncols() {
        l.clone().qr().r()
    } else {
        l.clone()
    };
    (&r * k * r.transpose()).norm()
}

/// Represents (E ⊗ E) applied to Σ w z⊗z: every factor mapped z ↦ E z.
pub fn chain_rhs(e: &SparseMat, x: &LowRankSymFactor) -> Result<LowRankSymFactor> {
    if e.cols() != x.dim() {
        return Err(Error::dim(format!("E has {} columns, factor dimension {}", e.cols(), x.dim())));
    }
    LowRankSymFactor::new(e.mul_dense(&x.factors), x.weights.clone())
}

/// Applies F = E⁻¹ A.
struct Operator<'a> {
    a: &'a SparseMat,
    e: &'a SparseMat,
    e_lu: Option<SparseLu>,
}

impl<'a> Operator<'a> {
    fn new(e: &'a SparseMat, a: &'a SparseMat) -> Result<Self> {
        let e_lu = if e.is_identity() {
            None
        } else {
            Some(SparseLu::new(e, "mass matrix of Lyapunov equation")?)
        };
        Ok(Operator { a, e, e_lu })
    }

    fn e_inv(&self, v: &DVector<f64>) -> Result<DVector<f64>> {
        match &self.e_lu {
            Some(lu) => lu.solve(v),
            None => Ok(v.clone()),
        }
    }

    fn apply(&self, v: &DVector<f64>) -> Result<DVector<f64>> {
        self.e_inv(&self.a.matvec(v))
    }
}

/// Magnitude estimates of the extreme eigenvalues of F by power iteration on
/// F and F⁻¹.
fn spectral_bounds(op: &Operator, a_lu: &SparseLu) -> Result<(f64, f64)> {
    let m = op.a.rows();
    let start = DVector::from_fn(m, |i, _| 1.0 + 0.1 * ((i * 7919 % 97) as f64 / 97.0));
    let mut v = start.normalize();
    let mut big = 0.0;
    for _ in 0..30 {
        let w = op.apply(&v)?;
        big = w.norm();
        if big == 0.0 {
            break;
        }
        v = w / big;
    }
    let mut v = start.normalize();
    let mut small_inv = 0.0;
    for _ in 0..30 {
        let w = a_lu.solve(&op.e.matvec(&v))?;
        small_inv = w.norm();
        if small_inv == 0.0 {
            break;
        }
        v = w / small_inv;
    }
    let small = if small_inv > 0.0 { 1.0 / small_inv } else { big };
    let big = big.max(small);
    Ok((small.max(f64::MIN_POSITIVE), big))
}

/// Convex hull of points (monotone chain), counter-clockwise.
fn convex_hull(mut pts: Vec<(f64, f64)>) -> Vec<(f64, f64)> {
    pts.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    pts.dedup();
    if pts.len() < 3 {
        return pts;
    }
    let cross = |o: (f64, f64), a: (f64, f64), b: (f64, f64)| (a.0 - o.0) * (b.1 - o.1) - (a.1 - o.1) * (b.0 - o.0);
    let mut lower: Vec<(f64, f64)> = Vec::new();
    for &p in &pts {
        while lower.len() >= 2 && cross(lower[lower.len() - 2], lower[lower.len() - 1], p) <= 0.0 {
            lower.pop();
        }
        lower.push(p);
    }
    let mut upper: Vec<(f64, f64)> = Vec::new();
    for &p in pts.iter().rev() {
        while upper.len() >= 2 && cross(upper[upper.len() - 2], upper[upper.len() - 1], p) <= 0.0 {
            upper.pop();
        }
        upper.push(p);
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    lower
}

/// Candidate poles on the boundary of the mirrored spectral region.
fn candidates(ritz: &[C64], s_min: f64, s_max: f64) -> Vec<C64> {
    let mut pts: Vec<(f64, f64)> = ritz.iter().map(|t| ((-t.re).abs().max(s_min * 1e-3), t.im)).collect();
    pts.push((s_min, 0.0));
    pts.push((s_max, 0.0));
    let hull = convex_hull(pts);
    let mut fracs = vec![0.0];
    for k in 0..24 {
        let f = 10f64.powf(-(k as f64) / 4.0);
        fracs.push(f);
        fracs.push(1.0 - f);
    }
    let mut out = Vec::new();
    if hull.len() == 1 {
        out.push(C64::new(hull[0].0, hull[0].1));
        return out;
    }
    for i in 0..hull.len() {
        let p0 = hull[i];
        let p1 = hull[(i + 1) % hull.len()];
        if hull.len() == 2 && i == 1 {
            break;
        }
        // log-spaced along the real direction when the edge is mostly real
        let real_edge = p0.0 > 0.0 && p1.0 > 0.0 && (p1.1 - p0.1).abs() < 1e-12;
        if real_edge {
            let (lo, hi) = (p0.0.min(p1.0), p0.0.max(p1.0));
            for k in 0..=60 {
                let x = lo * (hi / lo).powf(k as f64 / 60.0);
                out.push(C64::new(x, p0.1));
            }
        } else {
            for &f in &fracs {
                out.push(C64::new(p0.0 + f * (p1.0 - p0.0), p0.1 + f * (p1.1 - p0.1)));
            }
        }
    }
    out
}

/// Next pole maximizing 1/|r(s)| over the candidates, where
/// r(s) = Π (s − θ_j) / (s − σ_j).
const MAX_STALLED_POLES: usize = 8;

fn next_pole(ritz: &[C64], poles: &[C64], s_min: f64, s_max: f64) -> C64 {
    let cands = candidates(ritz, s_min, s_max);
    let mut best = C64::new(s_min, 0.0);
    let mut best_val = f64::NEG_INFINITY;
    for s in cands {
        let mut log_val = 0.0;
        for t in ritz {
            log_val -= (s - t).norm().max(f64::MIN_POSITIVE).ln();
        }
        let mut degenerate = false;
        for p in poles {
            let d = (s - p).norm();
            let dc = (s - p.conj()).norm();
            if d < 1e-12 * s.norm().max(1.0) {
                degenerate = true;
            }
            log_val += d.max(f64::MIN_POSITIVE).ln();
            if p.im != 0.0 {
                log_val += dc.max(f64::MIN_POSITIVE).ln();
            }
        }
        if degenerate {
            continue;
        }
        if log_val > best_val {
            best_val = log_val;
            best = s;
        }
    }
    if best.im.abs() < 1e-10 * best.re.abs() {
        best.im = 0.0;
    }
    best
}

fn factor_norm(f: &LowRankSymFactor) -> f64 {
    sym_core_norm(&f.factors, &DMatrix::from_diagonal(&DVector::from_vec(f.weights.clone())))
}

/// Truncates U Y Uᵀ by an eigendecomposition of Y, dropping weights below
/// `drop_tol` times the largest.
fn truncate(u: &DMatrix<f64>, y: &DMatrix<f64>, drop_tol: f64) -> LowRankSymFactor {
    let eig = y.clone().symmetric_eigen();
    let wmax = eig.eigenvalues.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].abs().total_cmp(&eig.eigenvalues[a].abs()));
    let keep: Vec<usize> = order
        .into_iter()
        .filter(|&i| eig.eigenvalues[i].abs() > drop_tol * wmax && eig.eigenvalues[i] != 0.0)
        .collect();
    let mut z = DMatrix::zeros(u.nrows(), keep.len());
    let mut w = Vec::with_capacity(keep.len());
    for (c, &i) in keep.iter().enumerate() {
        z.column_mut(c).copy_from(&(u * eig.eigenvectors.column(i)));
        w.push(eig.eigenvalues[i]);
    }
    LowRankSymFactor { factors: z, weights: w }
}

struct Iterate {
    y: DMatrix<f64>,
    k: usize,
    residual: f64,
}

pub fn solve(p: &LyapProblem) -> Result<LyapSolution> {
    let m = p.a.rows();
    if !p.a.is_square() || p.e.rows() != m || p.e.cols() != m || p.rhs.dim() != m {
        return Err(Error::dim(format!(
            "Lyapunov problem with A {}x{}, E {}x{}, rhs dimension {}",
            p.a.rows(),
            p.a.cols(),
            p.e.rows(),
            p.e.cols(),
            p.rhs.dim()
        )));
    }
    if !(p.tol > 0.0) {
        return Err(Error::InvalidParam(format!("Lyapunov tolerance {}", p.tol)));
    }
    let zero = LyapSolution {
        x: LowRankSymFactor::empty(m),
        residual: 0.0,
        converged: true,
        iterations: 0,
        history: vec![0.0],
    };
    if factor_norm(p.rhs) == 0.0 {
        return Ok(zero);
    }
    if let Some(split) = p.split.filter(|&s| is_triangular_at(p.e, p.a, s)) {
        // the decoupling transform can be ill-conditioned; keep the better
        // of the decoupled and the coupled solve
        let decoupled = solve_split(p, split);
        if let Ok(sol) = &decoupled {
            if sol.converged {
                return decoupled;
            }
        }
        let coupled = solve(&LyapProblem { split: None, ..*p });
        return match (decoupled, coupled) {
            (Ok(d), Ok(c)) => Ok(if d.residual <= c.residual { d } else { c }),
            (Ok(d), Err(_)) => Ok(d),
            (Err(_), c) => c,
        };
    }
    let op = Operator::new(p.e, p.a)?;
    let a_lu = SparseLu::new(p.a, "shifted Lyapunov coefficient").map_err(|e| match e {
        Error::Singular(s) => Error::Unstable(format!("coefficient matrix singular: {s}")),
        other => other,
    })?;

    // transformed right-hand side E⁻¹ R
    let mut ghat = DMatrix::zeros(m, p.rhs.rank());
    for c in 0..p.rhs.rank() {
        let col = op.e_inv(&p.rhs.factors.column(c).into_owned())?;
        ghat.column_mut(c).copy_from(&col);
    }
    let wdiag = DMatrix::from_diagonal(&DVector::from_vec(p.rhs.weights.clone()));

    let mut basis = OrthBasis::new(m);
    let mut last_block: Vec<usize> = Vec::new();
    for c in 0..ghat.ncols() {
        if basis.push(&ghat.column(c).into_owned()) {
            last_block.push(basis.len() - 1);
        }
    }
    if basis.is_empty() {
        return Ok(zero);
    }
    let mut fu: Vec<DVector<f64>> = Vec::new();
    for q in basis.columns() {
        fu.push(op.apply(q)?);
    }

    let (s_min, s_max) = spectral_bounds(&op, &a_lu)?;
    let mut poles: Vec<C64> = Vec::new();
    let mut history = Vec::new();
    let mut best: Option<Iterate> = None;
    let mut iterations = 0;
    let mut monitor_tol = p.tol;
    let mut stalled = 0;
    let block_width = last_block.len();

    loop {
        iterations += 1;
        let u = basis.matrix();
        let k = u.ncols();
        let fum = DMatrix::from_columns(&fu);
        let fk = u.transpose() * &fum;
        let gk = u.transpose() * &ghat;
        let qk = &gk * &wdiag * gk.transpose();
        let q_norm = qk.norm();
        let y = match lyap_dense(&fk, &(-&qk)) {
            Ok(y) => (&y + y.transpose()) * 0.5,
            Err(_) => {
                return Err(Error::Unstable(format!(
                    "projected Lyapunov equation singular at basis size {k}"
                )))
            }
        };
        let fperp = &fum - &u * &fk;
        let res = std::f64::consts::SQRT_2 * (&fperp * &y).norm() / q_norm;
        if !res.is_finite() {
            return Err(Error::Unstable(format!("non-finite residual at basis size {k}")));
        }
        let improved = best.as_ref().map(|b| res < b.residual).unwrap_or(true);
        if improved {
            best = Some(Iterate { y: y.clone(), k, residual: res });
        }
        history.push(best.as_ref().map(|b| b.residual).unwrap_or(res));

        if res <= monitor_tol {
            let (x, true_res) = finalize(p, &u, &y)?;
            if true_res <= p.tol {
                return Ok(LyapSolution {
                    x,
                    residual: true_res,
                    converged: true,
                    iterations,
                    history,
                });
            }
            monitor_tol = (monitor_tol * 0.1).max(1e-15);
        }

        if iterations >= p.max_iters || k >= p.max_rank {
            break;
        }

        // Ritz values and next pole
        let ritz: Vec<C64> = fk.complex_eigenvalues().iter().copied().collect();
        let sigma = if poles.is_empty() {
            C64::new(s_min, 0.0)
        } else if poles.len() == 1 {
            C64::new(s_max, 0.0)
        } else {
            next_pole(&ritz, &poles, s_min, s_max)
        };
        poles.push(sigma);

        let mut new_dirs: Vec<DVector<f64>> = Vec::new();
        if sigma.im == 0.0 {
            let shifted = p.a.lin_comb(1.0, p.e, -sigma.re)?;
            let lu = SparseLu::new(&shifted, "rational Krylov shift")?;
            for &j in &last_block {
                new_dirs.push(lu.solve(&p.e.matvec(&basis.columns()[j]))?);
            }
        } else {
            let lu = ComplexSparseLu::shifted(p.e, p.a, sigma)?;
            for &j in &last_block {
                let (re, im) = lu.solve_real(&p.e.matvec(&basis.columns()[j]))?;
                new_dirs.push(re);
                new_dirs.push(im);
            }
        }
        let source = std::mem::take(&mut last_block);
        for d in &new_dirs {
            if basis.len() >= p.max_rank {
                break;
            }
            if basis.push(d) {
                let idx = basis.len() - 1;
                last_block.push(idx);
                fu.push(op.apply(&basis.columns()[idx])?);
            }
        }
        if !last_block.is_empty() {
            stalled = 0;
            // continue from the newest directions only, so a complex pole
            // does not double the block
            let excess = last_block.len().saturating_sub(block_width);
            last_block.drain(..excess);
        }
        if last_block.is_empty() {
            // a pole close to an already captured eigenvalue adds nothing new;
            // retry from the same block with another pole before concluding
            // that the subspace is invariant
            stalled += 1;
            if stalled <= MAX_STALLED_POLES && basis.len() < p.max_rank && iterations < p.max_iters {
                last_block = source;
                continue;
            }
            let (x, true_res) = finalize(p, &u, &y)?;
            return Ok(LyapSolution {
                x,
                residual: true_res,
                converged: true_res <= p.tol,
                iterations,
                history,
            });
        }
    }

    let b = best.expect("at least one iterate");
    let u = DMatrix::from_columns(&basis.columns()[..b.k]);
    let (x, true_res) = finalize(p, &u, &b.y)?;
    Ok(LyapSolution {
        x,
        residual: true_res,
        converged: true_res <= p.tol,
        iterations,
        history,
    })
}

/// True when A and E are block upper triangular at `split` and E is block
/// diagonal there.
pub fn is_triangular_at(e: &SparseMat, a: &SparseMat, split: usize) -> bool {
    let m = a.rows();
    if split == 0 || split >= m {
        return false;
    }
    let lower = |&(i, j, _): &(usize, usize, f64)| i >= split && j < split;
    let upper = |&(i, j, _): &(usize, usize, f64)| i < split && j >= split;
    !a.entries().iter().any(lower) && !e.entries().iter().any(|t| lower(t) || upper(t))
}

/// Solves A_x Y − E_x Y H = C for a small dense H through the complex
/// Schur form of H, one shifted sparse solve per column.
fn sylvester_sparse_dense(ex: &SparseMat, ax: &SparseMat, h: &DMatrix<f64>, c: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let n = ax.rows();
    let q = h.nrows();
    let (u, t) = complex_schur(h);
    let cu = c.map(|v| C64::new(v, 0.0)) * &u;
    let mut yh = DMatrix::<C64>::zeros(n, q);
    for j in 0..q {
        let mut col: Vec<C64> = cu.column(j).iter().copied().collect();
        for i in 0..j {
            let tij = t[(i, j)];
            if tij == C64::new(0.0, 0.0) {
                continue;
            }
            let yi = yh.column(i);
            let re = ex.matvec(&DVector::from_iterator(n, yi.iter().map(|z| z.re)));
            let im = ex.matvec(&DVector::from_iterator(n, yi.iter().map(|z| z.im)));
            for (k, c) in col.iter_mut().enumerate() {
                *c += tij * C64::new(re[k], im[k]);
            }
        }
        let lu = ComplexSparseLu::shifted(ex, ax, t[(j, j)]).map_err(|e| match e {
            Error::Singular(s) => Error::Unstable(format!("plant and generator pencils share an eigenvalue: {s}")),
            other => other,
        })?;
        for (k, z) in lu.solve(&col)?.into_iter().enumerate() {
            yh[(k, j)] = z;
        }
    }
    Ok((yh * u.adjoint()).map(|z| z.re))
}

/// Block upper triangular pencil [[A_x, A_xz], [0, A_z]], E = diag(E_x, E_z).
/// The substitution x = x̃ + P z with A_x P − E_x P F_z = −A_xz,
/// F_z = E_z⁻¹A_z, decouples the pencil; the generator block and the
/// coupling block are then dense or Sylvester solves and only the plant
/// block goes through rational Krylov.
fn solve_split(p: &LyapProblem, n: usize) -> Result<LyapSolution> {
    let m = p.a.rows();
    let q = m - n;
    let ex = p.e.sub(0, n, 0, n);
    let ax = p.a.sub(0, n, 0, n);
    let axz = p.a.sub(0, n, n, q).to_dense();
    let ez = p.e.sub(n, q, n, q).to_dense();
    let az = p.a.sub(n, q, n, q).to_dense();
    let ez_inv = ez
        .try_inverse()
        .ok_or_else(|| Error::Singular("trailing mass block of Lyapunov equation".into()))?;
    let w = DMatrix::from_diagonal(&DVector::from_vec(p.rhs.weights.clone()));
    let rx = p.rhs.factors.rows(0, n).into_owned();
    let gz = &ez_inv * p.rhs.factors.rows(n, q);
    let fz = &ez_inv * &az;

    let decouple = sylvester_sparse_dense(&ex, &ax, &fz, &(-axz))?;
    let rx_t = &rx - ex.mul_dense(&(&decouple * &gz));

    let xzz = lyap_dense(&fz, &(-(&gz * &w * gz.transpose())))
        .map_err(|_| Error::Unstable("trailing block of Lyapunov equation".into()))?;
    let xzz = (&xzz + xzz.transpose()) * 0.5;
    let y = sylvester_sparse_dense(&ex, &ax, &(-fz.transpose()), &(-(&rx_t * &w * gz.transpose())))?;

    let rhs_xx = LowRankSymFactor::new(rx_t, p.rhs.weights.clone())?;
    let full_norm = factor_norm(p.rhs);
    let xx_norm = factor_norm(&rhs_xx);
    let sub_tol = if xx_norm > 0.0 { 0.5 * p.tol * full_norm / xx_norm } else { p.tol };
    let sub = solve(&LyapProblem {
        e: &ex,
        a: &ax,
        rhs: &rhs_xx,
        tol: sub_tol.min(p.tol),
        max_rank: p.max_rank,
        max_iters: p.max_iters,
        split: None,
    })?;

    // X = Ẑ M Ẑᵀ with Ẑ = [[Z, Y, P], [0, 0, I]], M = [[D, 0, 0], [0, 0, I], [0, I, X_zz]]
    let r = sub.x.rank();
    let cols = r + 2 * q;
    let mut zhat = DMatrix::zeros(m, cols);
    zhat.view_mut((0, 0), (n, r)).copy_from(&sub.x.factors);
    zhat.view_mut((0, r), (n, q)).copy_from(&y);
    zhat.view_mut((0, r + q), (n, q)).copy_from(&decouple);
    zhat.view_mut((n, r + q), (q, q)).fill_with_identity();
    let mut core = DMatrix::zeros(cols, cols);
    for (k, wk) in sub.x.weights.iter().enumerate() {
        core[(k, k)] = *wk;
    }
    core.view_mut((r, r + q), (q, q)).fill_with_identity();
    core.view_mut((r + q, r), (q, q)).fill_with_identity();
    core.view_mut((r + q, r + q), (q, q)).copy_from(&xzz);
    let qr = zhat.qr();
    let (basis, tri) = (qr.q(), qr.r());
    let y_core = &tri * core * tri.transpose();
    let y_core = (&y_core + y_core.transpose()) * 0.5;
    let (x, residual) = finalize(p, &basis, &y_core)?;
    Ok(LyapSolution {
        x,
        residual,
        converged: residual <= p.tol,
        iterations: sub.iterations,
        history: sub.history,
    })
}

/// Truncates the Galerkin solution, tightening the drop threshold until the
/// truncated factor still meets the residual target.
fn finalize(p: &LyapProblem, u: &DMatrix<f64>, y: &DMatrix<f64>) -> Result<(LowRankSymFactor, f64)> {
    let mut drop_tol = p.tol;
    loop {
        let x = truncate(u, y, drop_tol);
        let res = residual_norm(p.e, p.a, &x, p.rhs);
        if res <= p.tol || drop_tol < 1e-15 {
            return Ok((x, res));
        }
        drop_tol *= 1e-2;
    }
}
