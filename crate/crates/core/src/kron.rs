//! Sparse matrices, quadratic maps and Kronecker-structured kernels.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Largest dimension for which dense fallbacks are built.
pub const DENSE_FALLBACK_CAP: usize = 64;

/// Real sparse matrix in canonical coordinate form: entries sorted by
/// (row, col), duplicates summed, exact zeros dropped.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseMat {
    rows: usize,
    cols: usize,
    entries: Vec<(usize, usize, f64)>,
}

impl SparseMat {
    pub fn new(rows: usize, cols: usize, mut entries: Vec<(usize, usize, f64)>) -> Result<Self> {
        for &(i, j, v) in &entries {
            if i >= rows || j >= cols {
                return Err(Error::dim(format!(
                    "entry ({i},{j}) outside {rows}x{cols} matrix"
                )));
            }
            if !v.is_finite() {
                return Err(Error::InvalidParam(format!("non-finite entry at ({i},{j})")));
            }
        }
        entries.sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
        let mut out: Vec<(usize, usize, f64)> = Vec::with_capacity(entries.len());
        for (i, j, v) in entries {
            match out.last_mut() {
                Some(last) if last.0 == i && last.1 == j => last.2 += v,
                _ => out.push((i, j, v)),
            }
        }
        out.retain(|e| e.2 != 0.0);
        Ok(SparseMat {
            rows,
            cols,
            entries: out,
        })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        SparseMat {
            rows,
            cols,
            entries: Vec::new(),
        }
    }

    pub fn identity(n: usize) -> Self {
        SparseMat {
            rows: n,
            cols: n,
            entries: (0..n).map(|i| (i, i, 1.0)).collect(),
        }
    }

    pub fn from_dense(m: &DMatrix<f64>) -> Self {
        let mut entries = Vec::new();
        for i in 0..m.nrows() {
            for j in 0..m.ncols() {
                if m[(i, j)] != 0.0 {
                    entries.push((i, j, m[(i, j)]));
                }
            }
        }
        SparseMat {
            rows: m.nrows(),
            cols: m.ncols(),
            entries,
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    pub fn entries(&self) -> &[(usize, usize, f64)] {
        &self.entries
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        match self
            .entries
            .binary_search_by(|e| (e.0, e.1).cmp(&(i, j)))
        {
            Ok(pos) => self.entries[pos].2,
            Err(_) => 0.0,
        }
    }

    pub fn is_identity(&self) -> bool {
        self.is_square()
            && self.entries.len() == self.rows
            && self.entries.iter().all(|&(i, j, v)| i == j && v == 1.0)
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.rows, self.cols);
        for &(i, j, v) in &self.entries {
            m[(i, j)] += v;
        }
        m
    }

    pub fn transpose(&self) -> SparseMat {
        let entries = self.entries.iter().map(|&(i, j, v)| (j, i, v)).collect();
        SparseMat::new(self.cols, self.rows, entries).expect("transpose keeps indices in range")
    }

    pub fn scale(&self, alpha: f64) -> SparseMat {
        let entries = self.entries.iter().map(|&(i, j, v)| (i, j, alpha * v)).collect();
        SparseMat::new(self.rows, self.cols, entries).expect("scaling keeps indices in range")
    }

    /// alpha * self + beta * other
    pub fn lin_comb(&self, alpha: f64, other: &SparseMat, beta: f64) -> Result<SparseMat> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::dim(format!(
                "cannot add {}x{} and {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut entries: Vec<_> = self.entries.iter().map(|&(i, j, v)| (i, j, alpha * v)).collect();
        entries.extend(other.entries.iter().map(|&(i, j, v)| (i, j, beta * v)));
        SparseMat::new(self.rows, self.cols, entries)
    }

    pub fn matvec_into(&self, x: &[f64], y: &mut [f64]) {
        y.iter_mut().for_each(|v| *v = 0.0);
        for &(i, j, v) in &self.entries {
            y[i] += v * x[j];
        }
    }

    pub fn matvec(&self, x: &DVector<f64>) -> DVector<f64> {
        assert_eq!(x.len(), self.cols, "matvec dimension");
        let mut y = DVector::zeros(self.rows);
        self.matvec_into(x.as_slice(), y.as_mut_slice());
        y
    }

    pub fn matvec_t(&self, x: &DVector<f64>) -> DVector<f64> {
        assert_eq!(x.len(), self.rows, "matvec_t dimension");
        let mut y = DVector::zeros(self.cols);
        for &(i, j, v) in &self.entries {
            y[j] += v * x[i];
        }
        y
    }

    /// self * M for dense M.
    pub fn mul_dense(&self, m: &DMatrix<f64>) -> DMatrix<f64> {
        assert_eq!(m.nrows(), self.cols, "mul_dense dimension");
        let mut out = DMatrix::zeros(self.rows, m.ncols());
        for c in 0..m.ncols() {
            let src = m.column(c);
            let mut dst = out.column_mut(c);
            for &(i, j, v) in &self.entries {
                dst[i] += v * src[j];
            }
        }
        out
    }

    /// selfᵀ * M for dense M.
    pub fn tr_mul_dense(&self, m: &DMatrix<f64>) -> DMatrix<f64> {
        assert_eq!(m.nrows(), self.rows, "tr_mul_dense dimension");
        let mut out = DMatrix::zeros(self.cols, m.ncols());
        for c in 0..m.ncols() {
            let src = m.column(c);
            let mut dst = out.column_mut(c);
            for &(i, j, v) in &self.entries {
                dst[j] += v * src[i];
            }
        }
        out
    }

    pub fn mul(&self, other: &SparseMat) -> Result<SparseMat> {
        if self.cols != other.rows {
            return Err(Error::dim(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut row_start = vec![0usize; other.rows + 1];
        for &(i, _, _) in &other.entries {
            row_start[i + 1] += 1;
        }
        for i in 0..other.rows {
            row_start[i + 1] += row_start[i];
        }
        let mut entries = Vec::new();
        for &(i, k, a) in &self.entries {
            for &(_, j, b) in &other.entries[row_start[k]..row_start[k + 1]] {
                entries.push((i, j, a * b));
            }
        }
        SparseMat::new(self.rows, other.cols, entries)
    }

    /// Assembles a block matrix from (block_row, block_col, matrix) triples.
    pub fn block(row_sizes: &[usize], col_sizes: &[usize], blocks: &[(usize, usize, &SparseMat)]) -> Result<SparseMat> {
        let offsets = |sizes: &[usize]| {
            let mut off = vec![0usize; sizes.len() + 1];
            for (i, s) in sizes.iter().enumerate() {
                off[i + 1] = off[i] + s;
            }
            off
        };
        let ro = offsets(row_sizes);
        let co = offsets(col_sizes);
        let mut entries = Vec::new();
        for &(bi, bj, m) in blocks {
            if bi >= row_sizes.len() || bj >= col_sizes.len() {
                return Err(Error::dim(format!("block index ({bi},{bj}) out of range")));
            }
            if m.rows != row_sizes[bi] || m.cols != col_sizes[bj] {
                return Err(Error::dim(format!(
                    "block ({bi},{bj}) is {}x{}, expected {}x{}",
                    m.rows, m.cols, row_sizes[bi], col_sizes[bj]
                )));
            }
            entries.extend(m.entries.iter().map(|&(i, j, v)| (ro[bi] + i, co[bj] + j, v)));
        }
        SparseMat::new(ro[row_sizes.len()], co[col_sizes.len()], entries)
    }

    /// Rows `r0..r0+nr`, columns `c0..c0+nc`.
    pub fn sub(&self, r0: usize, nr: usize, c0: usize, nc: usize) -> SparseMat {
        let entries = self
            .entries
            .iter()
            .filter(|&&(i, j, _)| i >= r0 && i < r0 + nr && j >= c0 && j < c0 + nc)
            .map(|&(i, j, v)| (i - r0, j - c0, v))
            .collect();
        SparseMat {
            rows: nr,
            cols: nc,
            entries,
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.entries.iter().fold(0.0, |m, e| m.max(e.2.abs()))
    }

    pub fn frobenius(&self) -> f64 {
        self.entries.iter().map(|e| e.2 * e.2).sum::<f64>().sqrt()
    }
}

/// Standard Kronecker product.
pub fn kron(a: &SparseMat, b: &SparseMat) -> Result<SparseMat> {
    let rows = a
        .rows
        .checked_mul(b.rows)
        .ok_or_else(|| Error::TooLarge(format!("{} x {} rows", a.rows, b.rows)))?;
    let cols = a
        .cols
        .checked_mul(b.cols)
        .ok_or_else(|| Error::TooLarge(format!("{} x {} cols", a.cols, b.cols)))?;
    a.nnz()
        .checked_mul(b.nnz())
        .ok_or_else(|| Error::TooLarge("kronecker nonzero count".into()))?;
    let mut entries = Vec::with_capacity(a.nnz() * b.nnz());
    for &(i1, j1, v1) in &a.entries {
        for &(i2, j2, v2) in &b.entries {
            entries.push((i1 * b.rows + i2, j1 * b.cols + j2, v1 * v2));
        }
    }
    SparseMat::new(rows, cols, entries)
}

/// Symmetric Kronecker sum: order 2 gives Q⊗P + P⊗Q, order 3 places Q in
/// each of the three slots among copies of P.
pub fn circled(order: usize, p: &SparseMat, q: &SparseMat) -> Result<SparseMat> {
    if !p.is_square() || !q.is_square() || p.rows != q.rows {
        return Err(Error::dim(format!(
            "circled needs equal square factors, got {}x{} and {}x{}",
            p.rows, p.cols, q.rows, q.cols
        )));
    }
    match order {
        2 => kron(q, p)?.lin_comb(1.0, &kron(p, q)?, 1.0),
        3 => {
            let pp = kron(p, p)?;
            let t1 = kron(&kron(q, p)?, p)?;
            let t2 = kron(&kron(p, q)?, p)?;
            let t3 = kron(&pp, q)?;
            t1.lin_comb(1.0, &t2, 1.0)?.lin_comb(1.0, &t3, 1.0)
        }
        _ => Err(Error::Unsupported(format!("circled order {order}"))),
    }
}

/// Block-interleaving permutation for P ⊗ [[A, B], [C, D]] with P, A of size
/// m and D of size k.
pub fn perm_block(m: usize, k: usize) -> SparseMat {
    let n = m * (m + k);
    let mut entries = Vec::with_capacity(n);
    for a in 0..m {
        for b in 0..m {
            entries.push((a * (m + k) + b, a * m + b, 1.0));
        }
    }
    for a in 0..m {
        for c in 0..k {
            entries.push((a * (m + k) + m + c, m * m + a * k + c, 1.0));
        }
    }
    SparseMat::new(n, n, entries).expect("permutation indices in range")
}

/// Bilinear map R^{left} x R^{right} -> R^{rows}; entry (i, j, k, g) adds
/// g * u_j * v_k to output row i.
#[derive(Clone, Debug, PartialEq)]
pub struct QuadMap {
    rows: usize,
    left: usize,
    right: usize,
    entries: Vec<(usize, usize, usize, f64)>,
}

impl QuadMap {
    pub fn new(rows: usize, left: usize, right: usize, mut entries: Vec<(usize, usize, usize, f64)>) -> Result<Self> {
        for &(i, j, k, g) in &entries {
            if i >= rows || j >= left || k >= right {
                return Err(Error::dim(format!(
                    "quadratic entry ({i};{j},{k}) outside ({rows};{left},{right})"
                )));
            }
            if !g.is_finite() {
                return Err(Error::InvalidParam(format!("non-finite quadratic entry ({i};{j},{k})")));
            }
        }
        entries.sort_by(|a, b| (a.0, a.1, a.2).cmp(&(b.0, b.1, b.2)));
        let mut out: Vec<(usize, usize, usize, f64)> = Vec::with_capacity(entries.len());
        for (i, j, k, g) in entries {
            match out.last_mut() {
                Some(last) if last.0 == i && last.1 == j && last.2 == k => last.3 += g,
                _ => out.push((i, j, k, g)),
            }
        }
        out.retain(|e| e.3 != 0.0);
        Ok(QuadMap {
            rows,
            left,
            right,
            entries: out,
        })
    }

    pub fn zeros(rows: usize, left: usize, right: usize) -> Self {
        QuadMap {
            rows,
            left,
            right,
            entries: Vec::new(),
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn left(&self) -> usize {
        self.left
    }

    pub fn right(&self) -> usize {
        self.right
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[(usize, usize, usize, f64)] {
        &self.entries
    }

    pub fn apply_into(&self, u: &[f64], v: &[f64], out: &mut [f64]) {
        out.iter_mut().for_each(|o| *o = 0.0);
        self.accumulate(1.0, u, v, out);
    }

    /// out += alpha * G(u ⊗ v)
    pub fn accumulate(&self, alpha: f64, u: &[f64], v: &[f64], out: &mut [f64]) {
        for &(i, j, k, g) in &self.entries {
            out[i] += alpha * g * u[j] * v[k];
        }
    }

    /// Flat matrix of shape rows x (left*right), column index j*right + k.
    pub fn to_flat(&self) -> SparseMat {
        let entries = self
            .entries
            .iter()
            .map(|&(i, j, k, g)| (i, j * self.right + k, g))
            .collect();
        SparseMat::new(self.rows, self.left * self.right, entries).expect("flat indices in range")
    }

    pub fn from_flat(flat: &SparseMat, left: usize, right: usize) -> Result<Self> {
        if flat.cols() != left * right {
            return Err(Error::dim(format!(
                "flat matrix has {} columns, expected {}",
                flat.cols(),
                left * right
            )));
        }
        let entries = flat
            .entries()
            .iter()
            .map(|&(i, c, g)| (i, c / right, c % right, g))
            .collect();
        QuadMap::new(flat.rows(), left, right, entries)
    }

    /// (G(u⊗v) + G(v⊗u)) / 2 as a map.
    pub fn symmetrized(&self) -> Result<QuadMap> {
        if self.left != self.right {
            return Err(Error::dim("symmetrization needs equal factor dimensions"));
        }
        let mut entries = Vec::with_capacity(2 * self.entries.len());
        for &(i, j, k, g) in &self.entries {
            entries.push((i, j, k, 0.5 * g));
            entries.push((i, k, j, 0.5 * g));
        }
        QuadMap::new(self.rows, self.left, self.right, entries)
    }

    /// Adds the Jacobian of x ↦ G(x⊗x) at x into `push(row, col, value)`.
    pub fn jacobian_sym(&self, x: &[f64], mut push: impl FnMut(usize, usize, f64)) {
        for &(i, j, k, g) in &self.entries {
            push(i, j, g * x[k]);
            push(i, k, g * x[j]);
        }
    }
}

/// G(u ⊗ v).
pub fn apply_quad(g: &QuadMap, u: &DVector<f64>, v: &DVector<f64>) -> Result<DVector<f64>> {
    if u.len() != g.left || v.len() != g.right {
        return Err(Error::dim(format!(
            "quadratic map ({};{},{}) applied to vectors of length {} and {}",
            g.rows,
            g.left,
            g.right,
            u.len(),
            v.len()
        )));
    }
    let mut out = DVector::zeros(g.rows);
    g.apply_into(u.as_slice(), v.as_slice(), out.as_mut_slice());
    Ok(out)
}

/// Vlᵀ G (Va ⊗ Vb) without forming the Kronecker product of the bases.
pub fn project_quad_general(g: &QuadMap, vl: &DMatrix<f64>, va: &DMatrix<f64>, vb: &DMatrix<f64>) -> Result<QuadMap> {
    if vl.nrows() != g.rows || va.nrows() != g.left || vb.nrows() != g.right {
        return Err(Error::dim(format!(
            "projection bases with {}/{}/{} rows for map ({};{},{})",
            vl.nrows(),
            va.nrows(),
            vb.nrows(),
            g.rows,
            g.left,
            g.right
        )));
    }
    let (r, a, b) = (vl.ncols(), va.ncols(), vb.ncols());
    let mut out = vec![0.0; r * a * b];
    let mut slab = vec![0.0; a * b];
    let mut idx = 0;
    while idx < g.entries.len() {
        let row = g.entries[idx].0;
        slab.iter_mut().for_each(|s| *s = 0.0);
        while idx < g.entries.len() && g.entries[idx].0 == row {
            let (_, j, k, coeff) = g.entries[idx];
            for p in 0..a {
                let f = coeff * va[(j, p)];
                if f == 0.0 {
                    continue;
                }
                let dst = &mut slab[p * b..(p + 1) * b];
                for (q, d) in dst.iter_mut().enumerate() {
                    *d += f * vb[(k, q)];
                }
            }
            idx += 1;
        }
        for t in 0..r {
            let w = vl[(row, t)];
            if w == 0.0 {
                continue;
            }
            let dst = &mut out[t * a * b..(t + 1) * a * b];
            for (d, s) in dst.iter_mut().zip(&slab) {
                *d += w * s;
            }
        }
    }
    let mut entries = Vec::new();
    for t in 0..r {
        for p in 0..a {
            for q in 0..b {
                let v = out[(t * a + p) * b + q];
                if v != 0.0 {
                    entries.push((t, p, q, v));
                }
            }
        }
    }
    QuadMap::new(r, a, b, entries)
}

/// Vlᵀ G (Vr ⊗ Vr).
pub fn project_quad(g: &QuadMap, vl: &DMatrix<f64>, vr: &DMatrix<f64>) -> Result<QuadMap> {
    project_quad_general(g, vl, vr, vr)
}

/// Weighted symmetric sum Σ_k w_k z_k ⊗ z_k, stored by its factors.
#[derive(Clone, Debug)]
pub struct LowRankSymFactor {
    pub factors: DMatrix<f64>,
    pub weights: Vec<f64>,
}

impl LowRankSymFactor {
    pub fn new(factors: DMatrix<f64>, weights: Vec<f64>) -> Result<Self> {
        if factors.ncols() != weights.len() {
            return Err(Error::dim(format!(
                "{} factor columns with {} weights",
                factors.ncols(),
                weights.len()
            )));
        }
        Ok(LowRankSymFactor { factors, weights })
    }

    pub fn unweighted(factors: DMatrix<f64>) -> Self {
        let weights = vec![1.0; factors.ncols()];
        LowRankSymFactor { factors, weights }
    }

    pub fn from_vector(z: &DVector<f64>) -> Self {
        LowRankSymFactor::unweighted(DMatrix::from_column_slice(z.len(), 1, z.as_slice()))
    }

    pub fn empty(dim: usize) -> Self {
        LowRankSymFactor {
            factors: DMatrix::zeros(dim, 0),
            weights: Vec::new(),
        }
    }

    pub fn dim(&self) -> usize {
        self.factors.nrows()
    }

    pub fn rank(&self) -> usize {
        self.factors.ncols()
    }

    pub fn scale_weights(&self, alpha: f64) -> LowRankSymFactor {
        LowRankSymFactor {
            factors: self.factors.clone(),
            weights: self.weights.iter().map(|w| alpha * w).collect(),
        }
    }

    /// Σ w_k z_k z_kᵀ.
    pub fn to_matrix(&self) -> DMatrix<f64> {
        let mut scaled = self.factors.clone();
        for (c, w) in self.weights.iter().enumerate() {
            scaled.column_mut(c).scale_mut(*w);
        }
        &scaled * self.factors.transpose()
    }

    /// The represented vector in R^{dim²}.
    pub fn to_kron_vector(&self) -> DVector<f64> {
        let m = self.to_matrix();
        DVector::from_column_slice(m.as_slice())
    }

    /// Factors scaled by sqrt|w| together with the signs of the weights.
    pub fn balanced(&self) -> (DMatrix<f64>, Vec<f64>) {
        let mut z = self.factors.clone();
        let mut signs = Vec::with_capacity(self.weights.len());
        for (c, w) in self.weights.iter().enumerate() {
            z.column_mut(c).scale_mut(w.abs().sqrt());
            signs.push(if *w < 0.0 { -1.0 } else { 1.0 });
        }
        (z, signs)
    }

    /// Σ w_k G(z_k ⊗ z_k).
    pub fn apply_quad_sum(&self, g: &QuadMap) -> Result<DVector<f64>> {
        if g.left != self.dim() || g.right != self.dim() {
            return Err(Error::dim(format!(
                "factor dimension {} against map ({};{},{})",
                self.dim(),
                g.rows,
                g.left,
                g.right
            )));
        }
        let mut out = DVector::zeros(g.rows);
        for (c, w) in self.weights.iter().enumerate() {
            let z = self.factors.column(c);
            g.accumulate(*w, z.as_slice(), z.as_slice(), out.as_mut_slice());
        }
        Ok(out)
    }

    /// Applies a row-selection to every factor (keeps weights).
    pub fn restrict_rows(&self, n: usize) -> LowRankSymFactor {
        LowRankSymFactor {
            factors: self.factors.rows(0, n).into_owned(),
            weights: self.weights.clone(),
        }
    }
}

/// Dense Kronecker product, oracle use only.
pub fn kron_dense(a: &DMatrix<f64>, b: &DMatrix<f64>) -> DMatrix<f64> {
    a.kronecker(b)
}

/// Dense u ⊗ v.
pub fn kron_vec(u: &DVector<f64>, v: &DVector<f64>) -> DVector<f64> {
    let mut out = DVector::zeros(u.len() * v.len());
    for j in 0..u.len() {
        for k in 0..v.len() {
            out[j * v.len() + k] = u[j] * v[k];
        }
    }
    out
}
