//! Reducers: input-tailored approximate moment matching (AssM), one-sided
//! multi-moment matching (MultM and its input-weighted variant), POD, and
//! the IRKA frequency heuristic.

use std::fmt;
use std::path::Path;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::io;
use crate::kron::SparseMat;
use crate::linalg::{left_singular, ComplexSparseLu, OrthBasis, C64, DEFLATION_TOL};
use crate::model::{
    assemble_driven_extended, assemble_input_weighted, galerkin_project, DrivenSystem, QbSystem, SignalGenerator,
};
use crate::moments::{linear_moments, w2_moments, ShiftedOperator};

/// Origin of a basis column.
#[derive(Clone, Debug, PartialEq)]
pub enum Provenance {
    W1Moment { s: f64, i: usize },
    W2Moment { s: f64, i: usize },
    W2Lowrank { s: f64, i: usize, k: usize },
    /// Left singular direction of the projected low-rank factors.
    W2Svd { index: usize, sigma: f64 },
    Pod { index: usize },
    Multm { sigma: f64, level: usize, index: usize },
    Extracted { index: usize },
}

impl fmt::Display for Provenance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Provenance::W1Moment { s, i } => write!(f, "w1-moment({s},{i})"),
            Provenance::W2Moment { s, i } => write!(f, "w2-moment({s},{i})"),
            Provenance::W2Lowrank { s, i, k } => write!(f, "w2-lowrank({s},{i},{k})"),
            Provenance::W2Svd { index, sigma } => write!(f, "w2-svd({index},{sigma:.6e})"),
            Provenance::Pod { index } => write!(f, "pod({index})"),
            Provenance::Multm { sigma, level, index } => write!(f, "multm({sigma},{level},{index})"),
            Provenance::Extracted { index } => write!(f, "extracted({index})"),
        }
    }
}

/// Column-orthonormal basis with a tag per column.
#[derive(Clone, Debug)]
pub struct ReductionBasis {
    pub v: DMatrix<f64>,
    pub provenance: Vec<Provenance>,
    /// Candidate columns dropped as linearly dependent.
    pub deflated: usize,
}

impl ReductionBasis {
    pub fn empty(dim: usize) -> Self {
        ReductionBasis {
            v: DMatrix::zeros(dim, 0),
            provenance: Vec::new(),
            deflated: 0,
        }
    }

    /// Orthonormalizes candidates in order; a tag survives with its column.
    pub fn from_candidates(dim: usize, candidates: impl IntoIterator<Item = (DVector<f64>, Provenance)>) -> Self {
        let mut orth = OrthBasis::new(dim);
        let mut provenance = Vec::new();
        for (c, p) in candidates {
            if orth.push(&c) {
                provenance.push(p);
            }
        }
        ReductionBasis {
            v: orth.matrix(),
            provenance,
            deflated: orth.deflated(),
        }
    }

    pub fn dim(&self) -> usize {
        self.v.nrows()
    }

    pub fn len(&self) -> usize {
        self.v.ncols()
    }

    pub fn is_empty(&self) -> bool {
        self.v.ncols() == 0
    }

    fn candidates(&self) -> impl Iterator<Item = (DVector<f64>, Provenance)> + '_ {
        self.v
            .column_iter()
            .zip(self.provenance.iter())
            .map(|(c, p)| (c.into_owned(), p.clone()))
    }

    pub fn provenance_text(&self) -> String {
        self.provenance.iter().map(|p| format!("{p}\n")).collect()
    }

    /// Writes the basis as a dense Matrix Market array and the tags to
    /// `<path>.prov`.
    pub fn save(&self, path: &Path) -> Result<()> {
        io::write_dense(path, &self.v)?;
        let mut side = path.as_os_str().to_owned();
        side.push(".prov");
        io::write_text(Path::new(&side), &self.provenance_text())
    }
}

/// Default Lyapunov residual target for AssM. The full-scale benchmarks
/// bottom out between 1e-9 and 1.5e-6 in double precision.
pub const ASSM_LYAP_TOL: f64 = 1e-5;

#[derive(Clone, Debug)]
pub struct AssmConfig {
    pub freqs_w2: Vec<f64>,
    pub orders_w2: Vec<usize>,
    pub freqs_w1: Vec<f64>,
    pub orders_w1: Vec<usize>,
    pub lowrank_tol: f64,
    /// Relative Lyapunov residual target; [`ASSM_LYAP_TOL`] when unset.
    pub lyap_tol: Option<f64>,
}

impl AssmConfig {
    /// Same frequencies for both levels with uniform orders.
    pub fn uniform(freqs: &[f64], l_w1: usize, l_w2: usize, tol: f64) -> Self {
        AssmConfig {
            freqs_w2: freqs.to_vec(),
            orders_w2: vec![l_w2; freqs.len()],
            freqs_w1: freqs.to_vec(),
            orders_w1: vec![l_w1; freqs.len()],
            lowrank_tol: tol,
            lyap_tol: None,
        }
    }

    pub fn lyap_tol(&self) -> f64 {
        self.lyap_tol.unwrap_or(ASSM_LYAP_TOL)
    }

    pub fn validate(&self) -> Result<()> {
        check_freqs(&self.freqs_w2, &self.orders_w2, "w2")?;
        check_freqs(&self.freqs_w1, &self.orders_w1, "w1")?;
        if !(self.lowrank_tol > 0.0) || !(self.lyap_tol() > 0.0) {
            return Err(Error::InvalidParam("tolerances must be positive".into()));
        }
        Ok(())
    }
}

fn check_freqs(freqs: &[f64], orders: &[usize], what: &str) -> Result<()> {
    if freqs.len() != orders.len() {
        return Err(Error::InvalidParam(format!(
            "{what}: {} frequencies but {} orders",
            freqs.len(),
            orders.len()
        )));
    }
    if orders.iter().any(|&l| l == 0) {
        return Err(Error::InvalidParam(format!("{what}: orders must be at least 1")));
    }
    if freqs.iter().any(|s| !s.is_finite()) {
        return Err(Error::InvalidParam(format!("{what}: frequencies must be finite reals")));
    }
    for (i, a) in freqs.iter().enumerate() {
        if freqs[..i].contains(a) {
            return Err(Error::InvalidParam(format!("{what}: frequency {a} listed twice")));
        }
    }
    Ok(())
}

/// Input columns [B, B_p] of the linear part.
fn input_columns(s: &QbSystem) -> DMatrix<f64> {
    let b = s.b.to_dense();
    match &s.bp {
        Some(bp) => {
            let bp = bp.to_dense();
            let mut out = DMatrix::zeros(b.nrows(), b.ncols() + bp.ncols());
            out.columns_mut(0, b.ncols()).copy_from(&b);
            out.columns_mut(b.ncols(), bp.ncols()).copy_from(&bp);
            out
        }
        None => b,
    }
}

/// Union of K_L(A_s⁻¹E, A_s⁻¹B) over the given frequencies.
pub fn krylov_basis(s: &QbSystem, freqs: &[f64], orders: &[usize]) -> Result<ReductionBasis> {
    if freqs.len() != orders.len() {
        return Err(Error::InvalidParam("frequency and order lists differ in length".into()));
    }
    let b = input_columns(s);
    let mut cands = Vec::new();
    for (&sf, &l) in freqs.iter().zip(orders) {
        for (i, k) in linear_moments(&s.e, &s.a, &b, sf, l)?.into_iter().enumerate() {
            for c in k.column_iter() {
                cands.push((c.into_owned(), Provenance::W1Moment { s: sf, i }));
            }
        }
    }
    Ok(ReductionBasis::from_candidates(s.dim(), cands))
}

/// Output of the X2 basis construction.
#[derive(Clone, Debug)]
pub struct X2Bases {
    pub va: ReductionBasis,
    pub vb: ReductionBasis,
    /// Collected plant parts of the (balanced) low-rank factors.
    pub z: DMatrix<f64>,
    /// Singular values of the projected factor matrix, descending.
    pub singular_values: Vec<f64>,
    /// Worst relative Lyapunov residual over all solves.
    pub max_lyap_residual: f64,
}

/// Moment-matching bases Va (second-order moments) and Vb (dominant
/// directions of the low-rank auxiliary factors) for the plant.
pub fn assm_x2_bases(d: &DrivenSystem, cfg: &AssmConfig, v_perp: &DMatrix<f64>) -> Result<X2Bases> {
    cfg.validate()?;
    let n = d.n_x;
    if v_perp.nrows() != n && v_perp.ncols() > 0 {
        return Err(Error::dim(format!("V_perp has {} rows, plant has {}", v_perp.nrows(), n)));
    }
    if d.g.is_zero() {
        return Ok(X2Bases {
            va: ReductionBasis::empty(n),
            vb: ReductionBasis::empty(n),
            z: DMatrix::zeros(n, 0),
            singular_values: Vec::new(),
            max_lyap_residual: 0.0,
        });
    }
    let tol = cfg.lyap_tol();
    let sets: Vec<_> = cfg
        .freqs_w2
        .par_iter()
        .zip(cfg.orders_w2.par_iter())
        .map(|(&s0, &l)| {
            w2_moments(d, s0, l, tol).map_err(|e| match e {
                Error::LyapNoConvergence {
                    residual,
                    tol,
                    iterations,
                    context,
                } => Error::LyapNoConvergence {
                    residual,
                    tol,
                    iterations,
                    context: format!("{context} [frequency {s0}]"),
                },
                other => other,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let mut z_cols = Vec::new();
    let mut z_tags = Vec::new();
    let mut m_cands = Vec::new();
    let mut max_res: f64 = 0.0;
    for set in &sets {
        for (i, mh) in set.mhat.iter().enumerate() {
            let f = mh.factored().expect("second-order auxiliaries are factored");
            let (bal, _) = f.balanced();
            for (k, c) in bal.column_iter().enumerate() {
                z_cols.push(c.rows(0, n).into_owned());
                z_tags.push(Provenance::W2Lowrank { s: set.s0, i, k });
            }
        }
        for (i, m) in set.m.iter().enumerate() {
            m_cands.push((d.px(m), Provenance::W2Moment { s: set.s0, i }));
        }
        max_res = set.lyap_residuals.iter().fold(max_res, |a, &r| a.max(r));
    }
    let va = ReductionBasis::from_candidates(n, m_cands);

    let z = if z_cols.is_empty() {
        DMatrix::zeros(n, 0)
    } else {
        DMatrix::from_columns(&z_cols)
    };
    let mut guard = OrthBasis::from_matrix(&va.v);
    for c in v_perp.column_iter() {
        guard.push(&c.into_owned());
    }
    let mut zp = z.clone();
    for mut c in zp.column_iter_mut() {
        let w = guard.project_out(&c.clone_owned());
        c.copy_from(&w);
    }
    let (u, sv) = left_singular(&zp);
    let mut vb_cands = Vec::new();
    for (idx, &sigma) in sv.iter().enumerate() {
        if sigma > cfg.lowrank_tol {
            vb_cands.push((u.column(idx).into_owned(), Provenance::W2Svd { index: idx, sigma }));
        }
    }
    let vb = ReductionBasis::from_candidates(n, vb_cands);
    Ok(X2Bases {
        va,
        vb,
        z,
        singular_values: sv.iter().copied().collect(),
        max_lyap_residual: max_res,
    })
}

/// Result of the full input-tailored reduction.
#[derive(Clone, Debug)]
pub struct AssmResult {
    pub basis: ReductionBasis,
    pub reduced: QbSystem,
    pub n_a: usize,
    pub n_b: usize,
    pub n_1: usize,
    pub max_lyap_residual: f64,
}

/// V = orth[Va, Vb, V1] and the Galerkin reduced model.
pub fn assm_reduce(s: &QbSystem, t: &SignalGenerator, cfg: &AssmConfig) -> Result<AssmResult> {
    cfg.validate()?;
    let v1 = krylov_basis(s, &cfg.freqs_w1, &cfg.orders_w1)?;
    let (va, vb, max_res) = if cfg.freqs_w2.is_empty() {
        (ReductionBasis::empty(s.dim()), ReductionBasis::empty(s.dim()), 0.0)
    } else {
        let d = assemble_driven_extended(s, t)?;
        let x2 = assm_x2_bases(&d, cfg, &v1.v)?;
        (x2.va, x2.vb, x2.max_lyap_residual)
    };
    let (n_a, n_b) = (va.len(), vb.len());
    let basis = ReductionBasis::from_candidates(
        s.dim(),
        va.candidates().chain(vb.candidates()).chain(v1.candidates()).collect::<Vec<_>>(),
    );
    let n_1 = basis.provenance.iter().filter(|p| matches!(p, Provenance::W1Moment { .. })).count();
    let reduced = galerkin_project(s, &basis.v)?;
    Ok(AssmResult {
        basis,
        reduced,
        n_a,
        n_b,
        n_1,
        max_lyap_residual: max_res,
    })
}

/// Expansion points and per-point orders for multi-moment matching.
#[derive(Clone, Debug)]
pub struct MultmConfig {
    pub freqs: Vec<f64>,
    pub q1: Vec<usize>,
    pub q2: Vec<usize>,
}

impl MultmConfig {
    pub fn uniform(freqs: &[f64], q1: usize, q2: usize) -> Self {
        MultmConfig {
            freqs: freqs.to_vec(),
            q1: vec![q1; freqs.len()],
            q2: vec![q2; freqs.len()],
        }
    }

    pub fn validate(&self) -> Result<()> {
        check_freqs(&self.freqs, &self.q1, "multm")?;
        if self.q2.len() != self.freqs.len() {
            return Err(Error::InvalidParam(format!(
                "multm: {} frequencies but {} q2 orders",
                self.freqs.len(),
                self.q2.len()
            )));
        }
        for (&q1, &q2) in self.q1.iter().zip(&self.q2) {
            if q1 < q2 {
                return Err(Error::InvalidParam(format!("multm: need q1 >= q2, got q1 = {q1}, q2 = {q2}")));
            }
        }
        Ok(())
    }
}

/// One-sided multi-moment matching: linear moments up to q1 and diagonal
/// multi-moments of the second symmetric transfer function up to q2.
pub fn multm_reduce(s: &QbSystem, cfg: &MultmConfig) -> Result<ReductionBasis> {
    cfg.validate()?;
    let p = s.inputs();
    let mut cands = Vec::new();
    for ((&sigma, &q1), &q2) in cfg.freqs.iter().zip(&cfg.q1).zip(&cfg.q2) {
        let b = s.b.to_dense();
        let v = linear_moments(&s.e, &s.a, &b, sigma, q1)?;
        let mut index = 0;
        for vk in &v {
            for c in vk.column_iter() {
                cands.push((c.into_owned(), Provenance::Multm { sigma, level: 1, index }));
                index += 1;
            }
        }
        if q2 == 0 {
            continue;
        }
        let op2 = ShiftedOperator::new(&s.e, &s.a, 2.0 * sigma)?;
        // Taylor terms of the second transfer function at (σ, σ) up to total
        // order q2 − 1: k powers of the outer resolvent, derivative orders a, b
        // of the inner ones. Quadratic and bilinear parts are kept apart.
        let mut index = 0;
        for total in 0..q2 {
            for a in 0..=total {
                for b in a..=(total - a) {
                    let k = total - a - b;
                    let mut block = Vec::new();
                    for c1 in 0..p {
                        let va = v[a].column(c1).into_owned();
                        for c2 in 0..p {
                            let vb = v[b].column(c2).into_owned();
                            let mut rhs = DVector::zeros(s.dim());
                            s.g.accumulate(0.5, va.as_slice(), vb.as_slice(), rhs.as_mut_slice());
                            s.g.accumulate(0.5, vb.as_slice(), va.as_slice(), rhs.as_mut_slice());
                            block.push(rhs);
                        }
                    }
                    if a == 0 {
                        for c1 in 0..p {
                            let va = v[b].column(c1).into_owned();
                            for c2 in 0..p {
                                let mut unit = DVector::zeros(p);
                                unit[c2] = 1.0;
                                let mut rhs = DVector::zeros(s.dim());
                                s.d.accumulate(1.0, va.as_slice(), unit.as_slice(), rhs.as_mut_slice());
                                block.push(rhs);
                            }
                        }
                    }
                    let mut w = op2.solve_mat(&DMatrix::from_columns(&block))?;
                    for _ in 0..k {
                        w = op2.step(&w)?;
                    }
                    for c in w.column_iter() {
                        if c.amax() > 0.0 {
                            cands.push((c.into_owned(), Provenance::Multm { sigma, level: 2, index }));
                        }
                        index += 1;
                    }
                }
            }
        }
    }
    Ok(ReductionBasis::from_candidates(s.dim(), cands))
}

/// MultM on the input-weighted composition, restricted to the plant rows.
pub fn multm_iw_reduce(s: &QbSystem, weight: &SignalGenerator, cfg: &MultmConfig) -> Result<ReductionBasis> {
    let iw = assemble_input_weighted(s, weight)?;
    let sf = iw.as_qb_system(&s.c)?;
    let ext = multm_reduce(&sf, cfg)?;
    let n = s.dim();
    let cands: Vec<_> = ext
        .v
        .column_iter()
        .enumerate()
        .map(|(index, c)| (c.rows(0, n).into_owned(), Provenance::Extracted { index }))
        .collect();
    Ok(ReductionBasis::from_candidates(n, cands))
}

/// POD basis from snapshot columns. With `blocks`, each entry is (rows of
/// the block, basis size of the block) and the result is block diagonal.
pub fn pod_reduce(snapshots: &DMatrix<f64>, n: usize, blocks: Option<&[(usize, usize)]>) -> Result<ReductionBasis> {
    let rows = snapshots.nrows();
    match blocks {
        None => {
            if snapshots.ncols() < n {
                return Err(Error::InvalidParam(format!(
                    "{} snapshots for a basis of size {n}",
                    snapshots.ncols()
                )));
            }
            let (u, s) = left_singular(snapshots);
            let smax = s.iter().fold(0.0f64, |a, &b| a.max(b));
            let mut cands = Vec::new();
            let mut deflated = 0;
            for i in 0..n.min(s.len()) {
                if s[i] > DEFLATION_TOL * smax {
                    cands.push((u.column(i).into_owned(), Provenance::Pod { index: i }));
                } else {
                    deflated += 1;
                }
            }
            let mut b = ReductionBasis::from_candidates(rows, cands);
            b.deflated += deflated + n.saturating_sub(s.len());
            Ok(b)
        }
        Some(parts) => {
            let total_rows: usize = parts.iter().map(|p| p.0).sum();
            let total_n: usize = parts.iter().map(|p| p.1).sum();
            if total_rows != rows {
                return Err(Error::dim(format!("blocks cover {total_rows} rows, snapshots have {rows}")));
            }
            if total_n != n {
                return Err(Error::InvalidParam(format!("block sizes sum to {total_n}, requested {n}")));
            }
            let mut cands = Vec::new();
            let mut deflated = 0;
            let mut off = 0;
            let mut index = 0;
            for &(r, nb) in parts {
                let sub = snapshots.rows(off, r).into_owned();
                let part = pod_reduce(&sub, nb, None)?;
                deflated += part.deflated;
                for c in part.v.column_iter() {
                    let mut full = DVector::zeros(rows);
                    full.rows_mut(off, r).copy_from(&c);
                    cands.push((full, Provenance::Pod { index }));
                    index += 1;
                }
                off += r;
            }
            let mut b = ReductionBasis::from_candidates(rows, cands);
            b.deflated += deflated;
            Ok(b)
        }
    }
}

/// Outcome of the IRKA heuristic.
#[derive(Clone, Debug)]
pub struct IrkaShifts {
    pub shifts: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
    pub warning: Option<String>,
}

const IRKA_TOL: f64 = 1e-4;
const IRKA_MAX_ITERS: usize = 50;

fn sort_complex(v: &mut [C64]) {
    v.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
}

/// Real basis of the span of (σE − A)⁻¹ r over shifts closed under
/// conjugation.
fn irka_space(e: &SparseMat, a: &SparseMat, r: &DVector<f64>, shifts: &[C64]) -> Result<DMatrix<f64>> {
    let mut orth = OrthBasis::new(a.rows());
    for &sh in shifts {
        if sh.im < 0.0 {
            continue;
        }
        let lu = ComplexSparseLu::shifted(e, a, sh)?;
        let (re, im) = lu.solve_real(r)?;
        orth.push(&re);
        if sh.im > 0.0 {
            orth.push(&im);
        }
    }
    Ok(orth.matrix())
}

/// Runs IRKA on the first input/output channel of the linear part and
/// returns the `count` smallest real positive shifts.
pub fn irka_frequencies(s: &QbSystem, count: usize) -> Result<IrkaShifts> {
    if count == 0 {
        return Ok(IrkaShifts {
            shifts: Vec::new(),
            iterations: 0,
            converged: true,
            warning: None,
        });
    }
    if count > s.dim() {
        return Err(Error::InvalidParam(format!("{count} shifts for a system of dimension {}", s.dim())));
    }
    let b = s.b.to_dense().column(0).into_owned();
    let c = s.c.to_dense().row(0).transpose();
    let (et, at) = (s.e.transpose(), s.a.transpose());
    let mut shifts: Vec<C64> = (0..count)
        .map(|i| {
            let t = if count == 1 { 0.5 } else { i as f64 / (count - 1) as f64 };
            C64::new(10f64.powf(-1.0 + 4.0 * t), 0.0)
        })
        .collect();
    let mut converged = false;
    let mut iterations = 0;
    for it in 1..=IRKA_MAX_ITERS {
        iterations = it;
        let v = irka_space(&s.e, &s.a, &b, &shifts)?;
        let w = irka_space(&et, &at, &c, &shifts)?;
        if v.ncols() != w.ncols() || v.ncols() == 0 {
            break;
        }
        let er = w.transpose() * s.e.mul_dense(&v);
        let ar = w.transpose() * s.a.mul_dense(&v);
        let f = er
            .lu()
            .solve(&ar)
            .ok_or_else(|| Error::Singular("reduced mass matrix in IRKA".into()))?;
        let mut next: Vec<C64> = f.complex_eigenvalues().iter().map(|z| -z).collect();
        for z in next.iter_mut() {
            if z.im.abs() <= 1e-10 * z.norm() {
                z.im = 0.0;
            }
        }
        sort_complex(&mut next);
        let mut old = shifts.clone();
        sort_complex(&mut old);
        let change = next
            .iter()
            .zip(old.iter())
            .map(|(a, b)| (a - b).norm() / a.norm().max(f64::MIN_POSITIVE))
            .fold(0.0f64, f64::max);
        shifts = next;
        if change < IRKA_TOL {
            converged = true;
            break;
        }
    }
    let mut real: Vec<f64> = shifts.iter().filter(|z| z.im == 0.0 && z.re > 0.0).map(|z| z.re).collect();
    real.sort_by(f64::total_cmp);
    let warning = if real.len() < count {
        Some(format!("IRKA produced {} real shifts, {count} requested", real.len()))
    } else {
        None
    };
    real.truncate(count);
    Ok(IrkaShifts {
        shifts: real,
        iterations,
        converged,
        warning,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kron::QuadMap;

    fn scalar_qb(g: f64) -> QbSystem {
        QbSystem::new(
            SparseMat::identity(1),
            SparseMat::new(1, 1, vec![(0, 0, -1.0)]).unwrap(),
            QuadMap::new(1, 1, 1, vec![(0, 0, 0, g)]).unwrap(),
            QuadMap::zeros(1, 1, 1),
            SparseMat::identity(1),
            SparseMat::identity(1),
            DVector::zeros(1),
            None,
            None,
        )
        .unwrap()
    }

    #[test]
    fn single_krylov_column_normalized() {
        let s = scalar_qb(1.0);
        let b = krylov_basis(&s, &[0.5], &[1]).unwrap();
        assert_eq!(b.len(), 1);
        assert!((b.v[(0, 0)].abs() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn multm_scalar() {
        let b = multm_reduce(&scalar_qb(1.0), &MultmConfig::uniform(&[0.0], 1, 1)).unwrap();
        assert_eq!(b.len(), 1);
        assert_eq!(b.deflated, 1);
    }

    #[test]
    fn pod_repeated_snapshot() {
        let mut s = DMatrix::zeros(3, 3);
        s.row_mut(0).fill(1.0);
        let b = pod_reduce(&s, 1, None).unwrap();
        assert!((b.v[(0, 0)].abs() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn irka_scalar_mirror() {
        let mut s = scalar_qb(0.0);
        s.a = SparseMat::new(1, 1, vec![(0, 0, -2.0)]).unwrap();
        let r = irka_frequencies(&s, 1).unwrap();
        assert!(r.converged);
        assert!((r.shifts[0] - 2.0).abs() < 1e-10);
    }

    #[test]
    fn duplicate_frequencies_rejected() {
        let cfg = AssmConfig::uniform(&[1.0, 1.0], 1, 1, 1e-4);
        assert!(matches!(cfg.validate(), Err(Error::InvalidParam(_))));
    }
}
