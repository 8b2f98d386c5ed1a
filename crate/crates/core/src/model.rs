//! Quadratic-bilinear systems, signal generators and the driven systems
//! assembled from them.

use std::path::Path;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::io;
use crate::kron::{project_quad, project_quad_general, QuadMap, SparseMat};
use crate::linalg::{orthonormality_defect, SparseLu};

/// E ẋ = A x + G x⊗x + D x⊗u + B u + G_u u⊗u + B_p u̇,  y = C x.
#[derive(Clone, Debug)]
pub struct QbSystem {
    pub e: SparseMat,
    pub a: SparseMat,
    pub g: QuadMap,
    pub d: QuadMap,
    pub b: SparseMat,
    pub c: SparseMat,
    pub x0: DVector<f64>,
    pub gu: Option<QuadMap>,
    pub bp: Option<SparseMat>,
}

impl QbSystem {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        e: SparseMat,
        a: SparseMat,
        g: QuadMap,
        d: QuadMap,
        b: SparseMat,
        c: SparseMat,
        x0: DVector<f64>,
        gu: Option<QuadMap>,
        bp: Option<SparseMat>,
    ) -> Result<Self> {
        let sys = QbSystem {
            e,
            a,
            g,
            d,
            b,
            c,
            x0,
            gu: gu.filter(|m| !m.is_zero()),
            bp: bp.filter(|m| m.nnz() > 0),
        };
        sys.check()?;
        if !sys.e.is_identity() {
            SparseLu::new(&sys.e, "mass matrix E")?;
        }
        Ok(sys)
    }

    fn check(&self) -> Result<()> {
        let n = self.a.rows();
        let p = self.b.cols();
        let bad = |what: &str| Err(Error::dim(format!("{what} inconsistent with state dimension {n}, {p} inputs")));
        if !self.a.is_square() || self.e.rows() != n || self.e.cols() != n {
            return bad("E/A");
        }
        if (self.g.rows(), self.g.left(), self.g.right()) != (n, n, n) {
            return bad("G");
        }
        if (self.d.rows(), self.d.left(), self.d.right()) != (n, n, p) {
            return bad("D");
        }
        if self.b.rows() != n || self.c.cols() != n || self.x0.len() != n {
            return bad("B/C/x0");
        }
        if let Some(gu) = &self.gu {
            if (gu.rows(), gu.left(), gu.right()) != (n, p, p) {
                return bad("G_u");
            }
        }
        if let Some(bp) = &self.bp {
            if bp.rows() != n || bp.cols() != p {
                return bad("B_p");
            }
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.a.rows()
    }

    pub fn inputs(&self) -> usize {
        self.b.cols()
    }

    pub fn outputs(&self) -> usize {
        self.c.rows()
    }

    pub fn has_input_extension(&self) -> bool {
        self.gu.is_some() || self.bp.is_some()
    }

    pub fn save(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir).map_err(|source| Error::Io {
            path: dir.display().to_string(),
            source,
        })?;
        io::write_sparse(&dir.join("E.mtx"), &self.e)?;
        io::write_sparse(&dir.join("A.mtx"), &self.a)?;
        io::write_sparse(&dir.join("B.mtx"), &self.b)?;
        io::write_sparse(&dir.join("C.mtx"), &self.c)?;
        io::write_vec(&dir.join("x0.vec"), &self.x0)?;
        io::write_quad(&dir.join("G.qmap"), &self.g)?;
        io::write_quad(&dir.join("D.qmap"), &self.d)?;
        if let Some(gu) = &self.gu {
            io::write_quad(&dir.join("Gu.qmap"), gu)?;
        }
        if let Some(bp) = &self.bp {
            io::write_sparse(&dir.join("Bp.mtx"), bp)?;
        }
        Ok(())
    }

    pub fn load(dir: &Path) -> Result<Self> {
        let opt_quad = |name: &str| -> Result<Option<QuadMap>> {
            let p = dir.join(name);
            if p.exists() {
                io::read_quad(&p).map(Some)
            } else {
                Ok(None)
            }
        };
        let bp_path = dir.join("Bp.mtx");
        let bp = if bp_path.exists() {
            Some(io::read_sparse(&bp_path)?)
        } else {
            None
        };
        QbSystem::new(
            io::read_sparse(&dir.join("E.mtx"))?,
            io::read_sparse(&dir.join("A.mtx"))?,
            io::read_quad(&dir.join("G.qmap"))?,
            io::read_quad(&dir.join("D.qmap"))?,
            io::read_sparse(&dir.join("B.mtx"))?,
            io::read_sparse(&dir.join("C.mtx"))?,
            io::read_vec(&dir.join("x0.vec"))?,
            opt_quad("Gu.qmap")?,
            bp,
        )
    }
}

/// ż = A_z z + G_z z⊗z (+ B_z u_F),  u = C_z z,  z(0) = z0.
#[derive(Clone, Debug)]
pub struct SignalGenerator {
    pub az: SparseMat,
    pub gz: QuadMap,
    pub cz: SparseMat,
    pub z0: DVector<f64>,
    pub bz: Option<SparseMat>,
}

impl SignalGenerator {
    pub fn new(az: SparseMat, gz: QuadMap, cz: SparseMat, z0: DVector<f64>) -> Result<Self> {
        let q = az.rows();
        if !az.is_square()
            || (gz.rows(), gz.left(), gz.right()) != (q, q, q)
            || cz.cols() != q
            || z0.len() != q
        {
            return Err(Error::dim(format!("signal generator blocks inconsistent with {q} states")));
        }
        Ok(SignalGenerator {
            az,
            gz,
            cz,
            z0,
            bz: None,
        })
    }

    pub fn linear(az: SparseMat, cz: SparseMat, z0: DVector<f64>) -> Result<Self> {
        let q = az.rows();
        SignalGenerator::new(az, QuadMap::zeros(q, q, q), cz, z0)
    }

    pub fn with_input(mut self, bz: SparseMat) -> Result<Self> {
        if bz.rows() != self.dim() {
            return Err(Error::dim(format!("B_z has {} rows for {} generator states", bz.rows(), self.dim())));
        }
        self.bz = Some(bz);
        Ok(self)
    }

    pub fn dim(&self) -> usize {
        self.az.rows()
    }

    pub fn outputs(&self) -> usize {
        self.cz.rows()
    }

    pub fn is_linear(&self) -> bool {
        self.gz.is_zero()
    }

    pub fn save(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir).map_err(|source| Error::Io {
            path: dir.display().to_string(),
            source,
        })?;
        io::write_sparse(&dir.join("Az.mtx"), &self.az)?;
        io::write_quad(&dir.join("Gz.qmap"), &self.gz)?;
        io::write_sparse(&dir.join("Cz.mtx"), &self.cz)?;
        io::write_vec(&dir.join("z0.vec"), &self.z0)?;
        if let Some(bz) = &self.bz {
            io::write_sparse(&dir.join("Bz.mtx"), bz)?;
        }
        Ok(())
    }

    pub fn load(dir: &Path) -> Result<Self> {
        let gen = SignalGenerator::new(
            io::read_sparse(&dir.join("Az.mtx"))?,
            io::read_quad(&dir.join("Gz.qmap"))?,
            io::read_sparse(&dir.join("Cz.mtx"))?,
            io::read_vec(&dir.join("z0.vec"))?,
        )?;
        let bz = dir.join("Bz.mtx");
        if bz.exists() {
            gen.with_input(io::read_sparse(&bz)?)
        } else {
            Ok(gen)
        }
    }
}

/// Autonomous system 𝔈 ẇ = 𝔄 w + 𝔊 w⊗w, w(0) = b, whose first `n_x`
/// coordinates are the plant state.
#[derive(Clone, Debug)]
pub struct DrivenSystem {
    pub e: SparseMat,
    pub a: SparseMat,
    pub g: QuadMap,
    pub b: DVector<f64>,
    pub n_x: usize,
}

impl DrivenSystem {
    pub fn new(e: SparseMat, a: SparseMat, g: QuadMap, b: DVector<f64>, n_x: usize) -> Result<Self> {
        let m = a.rows();
        if !a.is_square()
            || (e.rows(), e.cols()) != (m, m)
            || (g.rows(), g.left(), g.right()) != (m, m, m)
            || b.len() != m
            || n_x > m
        {
            return Err(Error::dim(format!("driven system blocks inconsistent with dimension {m}")));
        }
        Ok(DrivenSystem { e, a, g, b, n_x })
    }

    pub fn dim(&self) -> usize {
        self.a.rows()
    }

    /// P_x v: the plant coordinates of v.
    pub fn px(&self, v: &DVector<f64>) -> DVector<f64> {
        v.rows(0, self.n_x).into_owned()
    }

    /// Galerkin projection with blkdiag(V, I_q).
    pub fn project(&self, v: &DMatrix<f64>) -> Result<DrivenSystem> {
        if v.nrows() != self.n_x {
            return Err(Error::dim(format!("basis has {} rows, plant has {}", v.nrows(), self.n_x)));
        }
        let q = self.dim() - self.n_x;
        let n = v.ncols();
        let mut big = DMatrix::zeros(self.dim(), n + q);
        big.view_mut((0, 0), (self.n_x, n)).copy_from(v);
        for i in 0..q {
            big[(self.n_x + i, n + i)] = 1.0;
        }
        let e = SparseMat::from_dense(&(big.transpose() * self.e.mul_dense(&big)));
        let a = SparseMat::from_dense(&(big.transpose() * self.a.mul_dense(&big)));
        let g = project_quad(&self.g, &big, &big)?;
        let b = big.transpose() * &self.b;
        DrivenSystem::new(e, a, g, b, n)
    }

    pub fn save(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir).map_err(|source| Error::Io {
            path: dir.display().to_string(),
            source,
        })?;
        io::write_sparse(&dir.join("E.mtx"), &self.e)?;
        io::write_sparse(&dir.join("A.mtx"), &self.a)?;
        io::write_quad(&dir.join("G.qmap"), &self.g)?;
        io::write_vec(&dir.join("b.vec"), &self.b)?;
        io::write_text(&dir.join("plant_dim"), &format!("{}\n", self.n_x))
    }

    pub fn load(dir: &Path) -> Result<Self> {
        let path = dir.join("plant_dim");
        let text = std::fs::read_to_string(&path).map_err(|source| Error::Io {
            path: path.display().to_string(),
            source,
        })?;
        let n_x = text.trim().parse::<usize>().map_err(|e| Error::Parse {
            path: path.display().to_string(),
            line: 1,
            msg: e.to_string(),
        })?;
        DrivenSystem::new(
            io::read_sparse(&dir.join("E.mtx"))?,
            io::read_sparse(&dir.join("A.mtx"))?,
            io::read_quad(&dir.join("G.qmap"))?,
            io::read_vec(&dir.join("b.vec"))?,
            n_x,
        )
    }

    /// Scales the initial condition (input amplitude scaling for linear
    /// generators).
    pub fn with_initial(&self, b: DVector<f64>) -> Result<DrivenSystem> {
        DrivenSystem::new(self.e.clone(), self.a.clone(), self.g.clone(), b, self.n_x)
    }
}

/// Driven system with an external input entering through B_c and zero
/// initial state.
#[derive(Clone, Debug)]
pub struct InputWeightedSystem {
    pub e: SparseMat,
    pub a: SparseMat,
    pub g: QuadMap,
    pub bc: SparseMat,
    pub n_x: usize,
}

impl InputWeightedSystem {
    pub fn dim(&self) -> usize {
        self.a.rows()
    }

    /// Views the weighted system as a linear-input QB system with output
    /// C acting on the plant part.
    pub fn as_qb_system(&self, c: &SparseMat) -> Result<QbSystem> {
        let m = self.dim();
        let pf = self.bc.cols();
        let q = m - self.n_x;
        let cc = SparseMat::block(&[c.rows()], &[self.n_x, q], &[(0, 0, c)])?;
        QbSystem::new(
            self.e.clone(),
            self.a.clone(),
            self.g.clone(),
            QuadMap::zeros(m, m, pf),
            self.bc.clone(),
            cc,
            DVector::zeros(m),
            None,
            None,
        )
    }
}

struct Coupled {
    e: SparseMat,
    a: SparseMat,
    g: QuadMap,
}

fn couple(s: &QbSystem, t: &SignalGenerator) -> Result<Coupled> {
    let n = s.dim();
    let q = t.dim();
    let p = s.inputs();
    if t.outputs() != p {
        return Err(Error::dim(format!("generator has {} outputs, system has {p} inputs", t.outputs())));
    }
    let e = SparseMat::block(&[n, q], &[n, q], &[(0, 0, &s.e), (1, 1, &SparseMat::identity(q))])?;
    let mut upper = s.b.mul(&t.cz)?;
    let bp_cz = match &s.bp {
        Some(bp) => Some(bp.mul(&t.cz)?),
        None => None,
    };
    if let Some(bpc) = &bp_cz {
        upper = upper.lin_comb(1.0, &bpc.mul(&t.az)?, 1.0)?;
    }
    let a = SparseMat::block(&[n, q], &[n, q], &[(0, 0, &s.a), (0, 1, &upper), (1, 1, &t.az)])?;

    let mut entries: Vec<(usize, usize, usize, f64)> = s.g.entries().to_vec();
    // columns of C_z grouped by output row
    let mut cz_rows: Vec<Vec<(usize, f64)>> = vec![Vec::new(); p];
    for &(l, m, v) in t.cz.entries() {
        cz_rows[l].push((m, v));
    }
    for &(i, j, l, v) in s.d.entries() {
        for &(m, c) in &cz_rows[l] {
            entries.push((i, j, n + m, v * c));
        }
    }
    if let Some(gu) = &s.gu {
        for &(i, l1, l2, v) in gu.entries() {
            for &(m1, c1) in &cz_rows[l1] {
                for &(m2, c2) in &cz_rows[l2] {
                    entries.push((i, n + m1, n + m2, v * c1 * c2));
                }
            }
        }
    }
    if let Some(bpc) = &bp_cz {
        let mut by_col: Vec<Vec<(usize, f64)>> = vec![Vec::new(); q];
        for &(i, a_idx, v) in bpc.entries() {
            by_col[a_idx].push((i, v));
        }
        for &(a_idx, b_idx, c_idx, gz) in t.gz.entries() {
            for &(i, v) in &by_col[a_idx] {
                entries.push((i, n + b_idx, n + c_idx, v * gz));
            }
        }
    }
    for &(a_idx, b_idx, c_idx, gz) in t.gz.entries() {
        entries.push((n + a_idx, n + b_idx, n + c_idx, gz));
    }
    let g = QuadMap::new(n + q, n + q, n + q, entries)?;
    Ok(Coupled { e, a, g })
}

/// Stacks plant and generator into one autonomous system.
pub fn assemble_driven(s: &QbSystem, t: &SignalGenerator) -> Result<DrivenSystem> {
    if s.has_input_extension() {
        return Err(Error::InvalidParam(
            "system has a quadratic input map or input derivative; use assemble_driven_extended".into(),
        ));
    }
    assemble_driven_extended(s, t)
}

/// Driven system for plants with G_u u⊗u and B_p u̇ terms.
pub fn assemble_driven_extended(s: &QbSystem, t: &SignalGenerator) -> Result<DrivenSystem> {
    let c = couple(s, t)?;
    let mut b = DVector::zeros(s.dim() + t.dim());
    b.rows_mut(0, s.dim()).copy_from(&s.x0);
    b.rows_mut(s.dim(), t.dim()).copy_from(&t.z0);
    DrivenSystem::new(c.e, c.a, c.g, b, s.dim())
}

/// Composition of the plant with an input filter F that carries B_z.
pub fn assemble_input_weighted(s: &QbSystem, f: &SignalGenerator) -> Result<InputWeightedSystem> {
    let bz = f
        .bz
        .as_ref()
        .ok_or_else(|| Error::InvalidParam("input weight needs an input matrix B_z".into()))?;
    let c = couple(s, f)?;
    let n = s.dim();
    let q = f.dim();
    let top = match &s.bp {
        Some(bp) => bp.mul(&f.cz)?.mul(bz)?,
        None => SparseMat::zeros(n, bz.cols()),
    };
    let bc = SparseMat::block(&[n, q], &[bz.cols()], &[(0, 0, &top), (1, 0, bz)])?;
    Ok(InputWeightedSystem {
        e: c.e,
        a: c.a,
        g: c.g,
        bc,
        n_x: n,
    })
}

/// Generator whose output stacks u and its time derivatives.
///
/// Linear generators get the rows C_z A_z^i for i = 0..=max_derivative.
/// Quadratic generators are augmented by z1 = ż with
/// ż1 = A_z z1 + G_z (z1⊗z + z⊗z1); the output stacks u = C_z z and
/// u̇ = C_z z1, and the second derivative is the time derivative of the
/// u̇ block, which the extended assembly handles through B_p.
pub fn extend_generator_derivative(t: &SignalGenerator, max_derivative: usize) -> Result<SignalGenerator> {
    if max_derivative == 0 {
        return Err(Error::InvalidParam("max_derivative must be at least 1".into()));
    }
    let q = t.dim();
    let p = t.outputs();
    if t.is_linear() {
        let mut blocks = vec![t.cz.clone()];
        for i in 1..=max_derivative {
            let next = blocks[i - 1].mul(&t.az)?;
            blocks.push(next);
        }
        let refs: Vec<(usize, usize, &SparseMat)> = blocks.iter().enumerate().map(|(i, b)| (i, 0, b)).collect();
        let cz = SparseMat::block(&vec![p; max_derivative + 1], &[q], &refs)?;
        return SignalGenerator::new(t.az.clone(), t.gz.clone(), cz, t.z0.clone());
    }
    if max_derivative > 2 {
        return Err(Error::Unsupported(format!(
            "derivative order {max_derivative} for a quadratic generator (at most 2)"
        )));
    }
    let az = SparseMat::block(&[q, q], &[q, q], &[(0, 0, &t.az), (1, 1, &t.az)])?;
    let mut entries = Vec::new();
    for &(i, j, k, v) in t.gz.entries() {
        entries.push((i, j, k, v));
        entries.push((q + i, q + j, k, v));
        entries.push((q + i, j, q + k, v));
    }
    let gz = QuadMap::new(2 * q, 2 * q, 2 * q, entries)?;
    let cz = SparseMat::block(&[p, p], &[q, q], &[(0, 0, &t.cz), (1, 1, &t.cz)])?;
    let mut z1 = t.az.matvec(&t.z0);
    t.gz.accumulate(1.0, t.z0.as_slice(), t.z0.as_slice(), z1.as_mut_slice());
    let mut z0 = DVector::zeros(2 * q);
    z0.rows_mut(0, q).copy_from(&t.z0);
    z0.rows_mut(q, q).copy_from(&z1);
    SignalGenerator::new(az, gz, cz, z0)
}

/// Block-diagonal superposition; the outputs add up.
pub fn superpose_generators(list: &[SignalGenerator]) -> Result<SignalGenerator> {
    let first = list
        .first()
        .ok_or_else(|| Error::InvalidParam("no generators to superpose".into()))?;
    let p = first.outputs();
    if list.iter().any(|t| t.outputs() != p) {
        return Err(Error::dim("generators have different output dimensions"));
    }
    let sizes: Vec<usize> = list.iter().map(|t| t.dim()).collect();
    let total: usize = sizes.iter().sum();
    let diag: Vec<(usize, usize, &SparseMat)> = list.iter().enumerate().map(|(i, t)| (i, i, &t.az)).collect();
    let az = SparseMat::block(&sizes, &sizes, &diag)?;
    let row: Vec<(usize, usize, &SparseMat)> = list.iter().enumerate().map(|(i, t)| (0, i, &t.cz)).collect();
    let cz = SparseMat::block(&[p], &sizes, &row)?;
    let mut entries = Vec::new();
    let mut z0 = DVector::zeros(total);
    let mut off = 0;
    for t in list {
        entries.extend(t.gz.entries().iter().map(|&(i, j, k, v)| (off + i, off + j, off + k, v)));
        z0.rows_mut(off, t.dim()).copy_from(&t.z0);
        off += t.dim();
    }
    let gz = QuadMap::new(total, total, total, entries)?;
    let gen = SignalGenerator::new(az, gz, cz, z0)?;
    if list.iter().all(|t| t.bz.is_some()) {
        let cols = list[0].bz.as_ref().map(|b| b.cols()).unwrap_or(0);
        if list.iter().any(|t| t.bz.as_ref().map(|b| b.cols()) != Some(cols)) {
            return Err(Error::dim("generator input matrices have different widths"));
        }
        let col: Vec<(usize, usize, &SparseMat)> = list
            .iter()
            .enumerate()
            .map(|(i, t)| (i, 0, t.bz.as_ref().expect("checked above")))
            .collect();
        return gen.with_input(SparseMat::block(&sizes, &[cols], &col)?);
    }
    Ok(gen)
}

/// Maximum Gram deviation accepted for projection bases.
pub const ORTHONORMAL_TOL: f64 = 1e-10;

/// One-sided Galerkin projection x ≈ V x_r.
pub fn galerkin_project(s: &QbSystem, v: &DMatrix<f64>) -> Result<QbSystem> {
    if v.nrows() != s.dim() {
        return Err(Error::dim(format!("basis has {} rows for a system of dimension {}", v.nrows(), s.dim())));
    }
    let defect = orthonormality_defect(v);
    if defect > ORTHONORMAL_TOL {
        return Err(Error::NotOrthonormal(defect));
    }
    let vt = v.transpose();
    let ip = DMatrix::identity(s.inputs(), s.inputs());
    let e = SparseMat::from_dense(&(&vt * s.e.mul_dense(v)));
    let a = SparseMat::from_dense(&(&vt * s.a.mul_dense(v)));
    let g = project_quad(&s.g, v, v)?;
    let d = project_quad_general(&s.d, v, v, &ip)?;
    let b = SparseMat::from_dense(&s.b.tr_mul_dense(v).transpose());
    let c = SparseMat::from_dense(&s.c.mul_dense(v));
    let x0 = &vt * &s.x0;
    let gu = match &s.gu {
        Some(gu) => Some(project_quad_general(gu, v, &ip, &ip)?),
        None => None,
    };
    let bp = s
        .bp
        .as_ref()
        .map(|bp| SparseMat::from_dense(&bp.tr_mul_dense(v).transpose()));
    QbSystem::new(e, a, g, d, b, c, x0, gu, bp)
}
