//! Factorizations and dense helpers: sparse LU (real and complex shifts),
//! Gram-Schmidt with deflation, triangular Sylvester solves.

use faer::linalg::solvers::Solve;
use faer::sparse::{SparseColMat, Triplet};
use faer::{c64, MatMut};
use nalgebra::{Complex, DMatrix, DVector};

use crate::error::{Error, Result};
use crate::kron::SparseMat;

pub type C64 = Complex<f64>;

/// Sparse LU of a real matrix.
pub struct SparseLu {
    n: usize,
    lu: faer::sparse::linalg::solvers::Lu<usize, f64>,
}

impl SparseLu {
    pub fn new(a: &SparseMat, what: &str) -> Result<Self> {
        if !a.is_square() {
            return Err(Error::dim(format!("{what}: LU of non-square {}x{} matrix", a.rows(), a.cols())));
        }
        let n = a.rows();
        let trip: Vec<_> = a.entries().iter().map(|&(i, j, v)| Triplet::new(i, j, v)).collect();
        let m = SparseColMat::<usize, f64>::try_new_from_triplets(n, n, &trip)
            .map_err(|e| Error::InvalidParam(format!("{what}: {e:?}")))?;
        let lu = m.sp_lu().map_err(|e| Error::Singular(format!("{what}: {e:?}")))?;
        let out = SparseLu { n, lu };
        out.probe(a, what)?;
        Ok(out)
    }

    /// Catches structurally fine but numerically singular factorizations.
    fn probe(&self, a: &SparseMat, what: &str) -> Result<()> {
        if self.n == 0 {
            return Ok(());
        }
        let ones = DVector::from_element(self.n, 1.0);
        let x = self.solve_raw(&ones);
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::Singular(format!("{what}: factorization produced non-finite values")));
        }
        let r = a.matvec(&x) - &ones;
        let scale = a.max_abs() * x.amax() + 1.0;
        if r.amax() > 1e-6 * scale {
            return Err(Error::Singular(format!("{what}: numerically singular (probe residual {:.2e})", r.amax())));
        }
        Ok(())
    }

    fn solve_raw(&self, b: &DVector<f64>) -> DVector<f64> {
        let mut x = b.clone();
        let n = self.n;
        self.lu
            .solve_in_place(MatMut::from_column_major_slice_mut(x.as_mut_slice(), n, 1));
        x
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn solve(&self, b: &DVector<f64>) -> Result<DVector<f64>> {
        if b.len() != self.n {
            return Err(Error::dim(format!("rhs length {} for LU of size {}", b.len(), self.n)));
        }
        let x = self.solve_raw(b);
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::Singular("solve produced non-finite values".into()));
        }
        Ok(x)
    }

    pub fn solve_mat(&self, b: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        if b.nrows() != self.n {
            return Err(Error::dim(format!("rhs with {} rows for LU of size {}", b.nrows(), self.n)));
        }
        let mut x = b.clone();
        let (n, k) = (self.n, b.ncols());
        if k > 0 {
            self.lu
                .solve_in_place(MatMut::from_column_major_slice_mut(x.as_mut_slice(), n, k));
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::Singular("solve produced non-finite values".into()));
        }
        Ok(x)
    }
}

/// Sparse LU of A − σE for complex σ.
pub struct ComplexSparseLu {
    n: usize,
    lu: faer::sparse::linalg::solvers::Lu<usize, c64>,
}

impl ComplexSparseLu {
    pub fn shifted(e: &SparseMat, a: &SparseMat, sigma: C64) -> Result<Self> {
        let n = a.rows();
        let mut trip: Vec<_> = a
            .entries()
            .iter()
            .map(|&(i, j, v)| Triplet::new(i, j, c64::new(v, 0.0)))
            .collect();
        trip.extend(
            e.entries()
                .iter()
                .map(|&(i, j, v)| Triplet::new(i, j, c64::new(-sigma.re * v, -sigma.im * v))),
        );
        let m = SparseColMat::<usize, c64>::try_new_from_triplets(n, n, &trip)
            .map_err(|e| Error::InvalidParam(format!("{e:?}")))?;
        let lu = m
            .sp_lu()
            .map_err(|err| Error::Singular(format!("A - ({sigma})E: {err:?}")))?;
        Ok(ComplexSparseLu { n, lu })
    }

    pub fn solve(&self, b: &[C64]) -> Result<Vec<C64>> {
        let mut x: Vec<c64> = b.iter().map(|z| c64::new(z.re, z.im)).collect();
        let n = self.n;
        self.lu
            .solve_in_place(MatMut::from_column_major_slice_mut(x.as_mut_slice(), n, 1));
        if x.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::Singular("complex shifted solve produced non-finite values".into()));
        }
        Ok(x.into_iter().map(|z| C64::new(z.re, z.im)).collect())
    }

    /// Solves with a real right-hand side, returning real and imaginary parts.
    pub fn solve_real(&self, b: &DVector<f64>) -> Result<(DVector<f64>, DVector<f64>)> {
        let rhs: Vec<C64> = b.iter().map(|&v| C64::new(v, 0.0)).collect();
        let x = self.solve(&rhs)?;
        Ok((
            DVector::from_iterator(self.n, x.iter().map(|z| z.re)),
            DVector::from_iterator(self.n, x.iter().map(|z| z.im)),
        ))
    }
}

/// A − sE.
pub fn shifted(e: &SparseMat, a: &SparseMat, s: f64) -> Result<SparseMat> {
    a.lin_comb(1.0, e, -s)
}

/// Relative deflation threshold for Gram-Schmidt.
pub const DEFLATION_TOL: f64 = 1e-10;

/// Column-orthonormal basis grown by modified Gram-Schmidt with one
/// re-orthogonalization pass.
#[derive(Clone, Debug)]
pub struct OrthBasis {
    dim: usize,
    cols: Vec<DVector<f64>>,
    deflated: usize,
}

impl OrthBasis {
    pub fn new(dim: usize) -> Self {
        OrthBasis {
            dim,
            cols: Vec::new(),
            deflated: 0,
        }
    }

    pub fn from_matrix(v: &DMatrix<f64>) -> Self {
        let mut b = OrthBasis::new(v.nrows());
        for c in v.column_iter() {
            b.push(&c.into_owned());
        }
        b
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.cols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cols.is_empty()
    }

    pub fn deflated(&self) -> usize {
        self.deflated
    }

    pub fn columns(&self) -> &[DVector<f64>] {
        &self.cols
    }

    /// Orthogonalizes `v` against the basis without adding it.
    pub fn project_out(&self, v: &DVector<f64>) -> DVector<f64> {
        let mut w = v.clone();
        for _ in 0..2 {
            for q in &self.cols {
                let h = q.dot(&w);
                w.axpy(-h, q, 1.0);
            }
        }
        w
    }

    /// Returns true if `v` added a new direction.
    pub fn push(&mut self, v: &DVector<f64>) -> bool {
        assert_eq!(v.len(), self.dim, "basis vector length");
        let norm0 = v.norm();
        if norm0 == 0.0 || !norm0.is_finite() {
            self.deflated += 1;
            return false;
        }
        let w = self.project_out(v);
        let norm = w.norm();
        if norm <= DEFLATION_TOL * norm0 {
            self.deflated += 1;
            return false;
        }
        self.cols.push(w / norm);
        true
    }

    pub fn matrix(&self) -> DMatrix<f64> {
        if self.cols.is_empty() {
            return DMatrix::zeros(self.dim, 0);
        }
        DMatrix::from_columns(&self.cols)
    }
}

/// max |VᵀV − I|.
pub fn orthonormality_defect(v: &DMatrix<f64>) -> f64 {
    let g = v.transpose() * v;
    let n = g.nrows();
    (g - DMatrix::identity(n, n)).amax()
}

/// Thin left singular vectors and singular values of a tall matrix.
pub fn left_singular(z: &DMatrix<f64>) -> (DMatrix<f64>, DVector<f64>) {
    if z.ncols() == 0 || z.nrows() == 0 {
        return (DMatrix::zeros(z.nrows(), 0), DVector::zeros(0));
    }
    if z.nrows() > 2 * z.ncols() {
        let qr = z.clone().qr();
        let q = qr.q();
        let r = qr.r();
        let svd = r.svd(true, false);
        let u = q * svd.u.expect("left vectors requested");
        sort_svd(u, svd.singular_values)
    } else {
        let svd = z.clone().svd(true, false);
        sort_svd(svd.u.expect("left vectors requested"), svd.singular_values)
    }
}

fn sort_svd(u: DMatrix<f64>, s: DVector<f64>) -> (DMatrix<f64>, DVector<f64>) {
    let mut idx: Vec<usize> = (0..s.len()).collect();
    idx.sort_by(|&a, &b| s[b].total_cmp(&s[a]));
    let cols: Vec<_> = idx.iter().map(|&i| u.column(i).into_owned()).collect();
    let vals = DVector::from_iterator(s.len(), idx.iter().map(|&i| s[i]));
    let u = if cols.is_empty() {
        DMatrix::zeros(u.nrows(), 0)
    } else {
        DMatrix::from_columns(&cols)
    };
    (u, vals)
}

/// Sines of the principal angles between the spans of two orthonormal bases,
/// largest first. Spans of different dimension compare the smaller into the
/// larger.
pub fn principal_angle_sines(v1: &DMatrix<f64>, v2: &DMatrix<f64>) -> Vec<f64> {
    let (a, b) = if v1.ncols() <= v2.ncols() { (v1, v2) } else { (v2, v1) };
    if a.ncols() == 0 {
        return Vec::new();
    }
    let resid = a - b * (b.transpose() * a);
    let s = resid.svd(false, false).singular_values;
    let mut v: Vec<f64> = s.iter().copied().collect();
    v.sort_by(|x, y| y.total_cmp(x));
    v
}

/// Complex Schur form F = U T U*.
pub fn complex_schur(f: &DMatrix<f64>) -> (DMatrix<C64>, DMatrix<C64>) {
    let fc = f.map(|v| C64::new(v, 0.0));
    let (u, t) = nalgebra::linalg::Schur::new(fc).unpack();
    (u, t)
}

/// Solves F Y + Y Gᵀ = C given complex Schur forms of F and G. Returns the
/// real part of the solution.
pub fn sylvester_schur(
    (uf, tf): (&DMatrix<C64>, &DMatrix<C64>),
    (ug, tg): (&DMatrix<C64>, &DMatrix<C64>),
    c: &DMatrix<f64>,
) -> Result<DMatrix<f64>> {
    let n = tf.nrows();
    let m = tg.nrows();
    let cc = c.map(|v| C64::new(v, 0.0));
    // transformed rhs U_f* C conj(U_g)
    let ct = uf.adjoint() * cc * ug.map(|z| z.conj());
    let mut y = DMatrix::<C64>::zeros(n, m);
    let scale = tf.iter().chain(tg.iter()).fold(0.0f64, |acc, z| acc.max(z.norm()));
    for j in (0..m).rev() {
        let mut rhs: Vec<C64> = (0..n).map(|i| ct[(i, j)]).collect();
        for l in (j + 1)..m {
            let s = tg[(j, l)];
            if s != C64::new(0.0, 0.0) {
                for (i, r) in rhs.iter_mut().enumerate() {
                    *r -= s * y[(i, l)];
                }
            }
        }
        let shift = tg[(j, j)];
        for i in (0..n).rev() {
            let mut acc = rhs[i];
            for l in (i + 1)..n {
                acc -= tf[(i, l)] * y[(l, j)];
            }
            let d = tf[(i, i)] + shift;
            if d.norm() <= 1e-14 * (scale + 1.0) {
                return Err(Error::Singular(format!(
                    "Sylvester operator singular: eigenvalue sum {d}"
                )));
            }
            y[(i, j)] = acc / d;
        }
    }
    let full = uf * y * ug.transpose();
    Ok(full.map(|z| z.re))
}

/// Solves F Y + Y Fᵀ = C.
pub fn lyap_dense(f: &DMatrix<f64>, c: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let (u, t) = complex_schur(f);
    sylvester_schur((&u, &t), (&u, &t), c)
}

/// Eigen-decomposition F = W Λ W⁻¹ derived from the complex Schur form.
pub fn eigen_from_schur(u: &DMatrix<C64>, t: &DMatrix<C64>) -> (Vec<C64>, DMatrix<C64>) {
    let n = t.nrows();
    let scale = t.iter().fold(0.0f64, |acc, z| acc.max(z.norm())) + f64::MIN_POSITIVE;
    let mut v = DMatrix::<C64>::zeros(n, n);
    for k in 0..n {
        v[(k, k)] = C64::new(1.0, 0.0);
        for i in (0..k).rev() {
            let mut acc = C64::new(0.0, 0.0);
            for l in (i + 1)..=k {
                acc += t[(i, l)] * v[(l, k)];
            }
            let mut d = t[(i, i)] - t[(k, k)];
            if d.norm() < 1e-14 * scale {
                d = C64::new(1e-14 * scale, 0.0);
            }
            v[(i, k)] = -acc / d;
        }
        let nrm = v.column(k).norm();
        v.column_mut(k).unscale_mut(nrm);
    }
    let w = u * v;
    let lambda = (0..n).map(|i| t[(i, i)]).collect();
    (lambda, w)
}
