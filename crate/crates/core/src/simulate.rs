//! Variable-order BDF-type integration with analytic Jacobians,
//! trajectories and output error metrics.

use std::fmt::Write as _;
use std::path::Path;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::io;
use crate::kron::SparseMat;
use crate::linalg::SparseLu;
use crate::model::{DrivenSystem, QbSystem};

#[derive(Clone, Debug)]
pub struct IntegratorConfig {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub t_end: f64,
    pub max_step: f64,
    /// Number of uniform output points on [0, t_end], both ends included.
    pub output_grid: usize,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        IntegratorConfig {
            abs_tol: 1e-8,
            rel_tol: 1e-6,
            t_end: 1.0,
            max_step: f64::INFINITY,
            output_grid: 300,
        }
    }
}

impl IntegratorConfig {
    pub fn with_horizon(t_end: f64) -> Self {
        IntegratorConfig {
            t_end,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.abs_tol > 0.0 && self.rel_tol > 0.0) {
            return Err(Error::InvalidParam("integrator tolerances must be positive".into()));
        }
        if !(self.t_end > 0.0 && self.t_end.is_finite()) {
            return Err(Error::InvalidParam(format!("end time {} must be positive", self.t_end)));
        }
        if !(self.max_step > 0.0) {
            return Err(Error::InvalidParam("max_step must be positive".into()));
        }
        if self.output_grid < 2 {
            return Err(Error::InvalidParam("output grid needs at least 2 points".into()));
        }
        Ok(())
    }

    pub fn grid(&self) -> Vec<f64> {
        let k = self.output_grid - 1;
        (0..=k).map(|i| self.t_end * i as f64 / k as f64).collect()
    }
}

/// E ẋ = f(t, x).
pub trait OdeProblem {
    fn dim(&self) -> usize;
    fn mass(&self) -> &SparseMat;
    fn rhs(&self, t: f64, x: &DVector<f64>) -> DVector<f64>;
    /// Triplets of ∂f/∂x (duplicates are summed).
    fn jacobian(&self, t: f64, x: &DVector<f64>, push: &mut dyn FnMut(usize, usize, f64));
}

type SignalFn = Arc<dyn Fn(f64) -> DVector<f64> + Send + Sync>;

/// Input signal u(t) and, for plants with a B_p term, its derivative.
#[derive(Clone)]
pub struct InputFn {
    value: SignalFn,
    derivative: Option<SignalFn>,
}

impl InputFn {
    pub fn new(value: impl Fn(f64) -> DVector<f64> + Send + Sync + 'static) -> Self {
        InputFn {
            value: Arc::new(value),
            derivative: None,
        }
    }

    pub fn scalar(f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        InputFn::new(move |t| DVector::from_element(1, f(t)))
    }

    pub fn with_derivative(mut self, d: impl Fn(f64) -> DVector<f64> + Send + Sync + 'static) -> Self {
        self.derivative = Some(Arc::new(d));
        self
    }

    pub fn value(&self, t: f64) -> DVector<f64> {
        (self.value)(t)
    }

    pub fn derivative(&self, t: f64) -> Option<DVector<f64>> {
        self.derivative.as_ref().map(|d| d(t))
    }
}

/// Plant with an explicit input function.
pub struct QbProblem<'a> {
    pub system: &'a QbSystem,
    pub input: &'a InputFn,
}

impl OdeProblem for QbProblem<'_> {
    fn dim(&self) -> usize {
        self.system.dim()
    }

    fn mass(&self) -> &SparseMat {
        &self.system.e
    }

    fn rhs(&self, t: f64, x: &DVector<f64>) -> DVector<f64> {
        let s = self.system;
        let u = self.input.value(t);
        let mut f = s.a.matvec(x);
        s.g.accumulate(1.0, x.as_slice(), x.as_slice(), f.as_mut_slice());
        s.d.accumulate(1.0, x.as_slice(), u.as_slice(), f.as_mut_slice());
        f += s.b.matvec(&u);
        if let Some(gu) = &s.gu {
            gu.accumulate(1.0, u.as_slice(), u.as_slice(), f.as_mut_slice());
        }
        if let Some(bp) = &s.bp {
            let du = self
                .input
                .derivative(t)
                .expect("input derivative checked before integration");
            f += bp.matvec(&du);
        }
        f
    }

    fn jacobian(&self, t: f64, x: &DVector<f64>, push: &mut dyn FnMut(usize, usize, f64)) {
        let s = self.system;
        for &(i, j, v) in s.a.entries() {
            push(i, j, v);
        }
        s.g.jacobian_sym(x.as_slice(), &mut *push);
        if !s.d.is_zero() {
            let u = self.input.value(t);
            for &(i, j, k, v) in s.d.entries() {
                push(i, j, v * u[k]);
            }
        }
    }
}

/// Autonomous driven system.
pub struct DrivenProblem<'a> {
    pub system: &'a DrivenSystem,
}

impl OdeProblem for DrivenProblem<'_> {
    fn dim(&self) -> usize {
        self.system.dim()
    }

    fn mass(&self) -> &SparseMat {
        &self.system.e
    }

    fn rhs(&self, _t: f64, x: &DVector<f64>) -> DVector<f64> {
        let d = self.system;
        let mut f = d.a.matvec(x);
        d.g.accumulate(1.0, x.as_slice(), x.as_slice(), f.as_mut_slice());
        f
    }

    fn jacobian(&self, _t: f64, x: &DVector<f64>, push: &mut dyn FnMut(usize, usize, f64)) {
        for &(i, j, v) in self.system.a.entries() {
            push(i, j, v);
        }
        self.system.g.jacobian_sym(x.as_slice(), &mut *push);
    }
}

#[derive(Clone, Debug, Default)]
pub struct IntegratorStats {
    pub steps: usize,
    pub rejected: usize,
    pub newton_failures: usize,
    pub factorizations: usize,
}

#[derive(Clone, Debug)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: DMatrix<f64>,
    pub outputs: DMatrix<f64>,
    pub stats: IntegratorStats,
}

impl Trajectory {
    /// CSV with header `t,y1..ym[,x1..xn]`.
    pub fn to_csv(&self, with_states: bool) -> String {
        let mut s = String::from("t");
        for i in 0..self.outputs.nrows() {
            let _ = write!(s, ",y{}", i + 1);
        }
        if with_states {
            for i in 0..self.states.nrows() {
                let _ = write!(s, ",x{}", i + 1);
            }
        }
        s.push('\n');
        for (k, t) in self.times.iter().enumerate() {
            let _ = write!(s, "{:.17e}", t);
            for v in self.outputs.column(k).iter() {
                let _ = write!(s, ",{:.17e}", v);
            }
            if with_states {
                for v in self.states.column(k).iter() {
                    let _ = write!(s, ",{:.17e}", v);
                }
            }
            s.push('\n');
        }
        s
    }

    pub fn save_csv(&self, path: &Path, with_states: bool) -> Result<()> {
        io::write_text(path, &self.to_csv(with_states))
    }

    /// Reads the time and output columns of a trajectory CSV.
    pub fn parse_csv(text: &str, path: &str) -> Result<Trajectory> {
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        let (_, header) = lines.next().ok_or_else(|| Error::Parse {
            path: path.into(),
            line: 1,
            msg: "empty file".into(),
        })?;
        let cols: Vec<&str> = header.split(',').map(str::trim).collect();
        if cols.first() != Some(&"t") {
            return Err(Error::Parse {
                path: path.into(),
                line: 1,
                msg: "header must start with t".into(),
            });
        }
        let ys: Vec<usize> = (1..cols.len()).filter(|&i| cols[i].starts_with('y')).collect();
        let xs: Vec<usize> = (1..cols.len()).filter(|&i| cols[i].starts_with('x')).collect();
        let mut times = Vec::new();
        let mut yv: Vec<f64> = Vec::new();
        let mut xv: Vec<f64> = Vec::new();
        for (ln, l) in lines {
            let vals: Vec<f64> = l
                .split(',')
                .map(|f| f.trim().parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|_| Error::Parse {
                    path: path.into(),
                    line: ln + 1,
                    msg: "non-numeric field".into(),
                })?;
            if vals.len() != cols.len() {
                return Err(Error::Parse {
                    path: path.into(),
                    line: ln + 1,
                    msg: format!("expected {} fields, found {}", cols.len(), vals.len()),
                });
            }
            times.push(vals[0]);
            yv.extend(ys.iter().map(|&i| vals[i]));
            xv.extend(xs.iter().map(|&i| vals[i]));
        }
        let k = times.len();
        Ok(Trajectory {
            times,
            states: DMatrix::from_column_slice(xs.len(), k, &xv),
            outputs: DMatrix::from_column_slice(ys.len(), k, &yv),
            stats: IntegratorStats::default(),
        })
    }

    pub fn load_csv(path: &Path) -> Result<Trajectory> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.display().to_string(),
            source,
        })?;
        Trajectory::parse_csv(&text, &path.display().to_string())
    }

    /// States sampled at every output time, as POD snapshots.
    pub fn snapshots(&self) -> &DMatrix<f64> {
        &self.states
    }
}

enum Factor {
    Dense(nalgebra::LU<f64, nalgebra::Dyn, nalgebra::Dyn>),
    Sparse(SparseLu),
}

const DENSE_LIMIT: usize = 64;

impl Factor {
    fn new(n: usize, trip: Vec<(usize, usize, f64)>) -> Result<Factor> {
        if n <= DENSE_LIMIT {
            let mut m = DMatrix::zeros(n, n);
            for (i, j, v) in trip {
                m[(i, j)] += v;
            }
            let lu = m.lu();
            if !lu.is_invertible() {
                return Err(Error::Singular("Newton matrix".into()));
            }
            Ok(Factor::Dense(lu))
        } else {
            Ok(Factor::Sparse(SparseLu::new(&SparseMat::new(n, n, trip)?, "Newton matrix")?))
        }
    }

    fn solve(&self, b: &DVector<f64>) -> Result<DVector<f64>> {
        match self {
            Factor::Dense(lu) => lu
                .solve(b)
                .ok_or_else(|| Error::Singular("Newton matrix".into())),
            Factor::Sparse(lu) => lu.solve(b),
        }
    }
}

const MAX_ORDER: usize = 5;
const NEWTON_MAX: usize = 4;
const MIN_FACTOR: f64 = 0.2;
const MAX_FACTOR: f64 = 10.0;
// NDF modification of the backward differentiation formulas
const KAPPA: [f64; MAX_ORDER + 1] = [0.0, -0.1850, -1.0 / 9.0, -0.0823, -0.0415, 0.0];

struct Coefficients {
    gamma: [f64; MAX_ORDER + 2],
    alpha: [f64; MAX_ORDER + 2],
    error_const: [f64; MAX_ORDER + 2],
}

impl Coefficients {
    fn new() -> Self {
        let mut gamma = [0.0; MAX_ORDER + 2];
        let mut alpha = [0.0; MAX_ORDER + 2];
        let mut error_const = [0.0; MAX_ORDER + 2];
        for k in 1..=MAX_ORDER + 1 {
            gamma[k] = gamma[k - 1] + 1.0 / k as f64;
        }
        for k in 0..=MAX_ORDER + 1 {
            let kappa = KAPPA.get(k).copied().unwrap_or(0.0);
            alpha[k] = (1.0 - kappa) * gamma[k];
            error_const[k] = kappa * gamma[k] + 1.0 / (k as f64 + 1.0);
        }
        Coefficients {
            gamma,
            alpha,
            error_const,
        }
    }
}

fn rms(v: &DVector<f64>, scale: &DVector<f64>) -> f64 {
    if v.is_empty() {
        return 0.0;
    }
    let sum: f64 = v.iter().zip(scale.iter()).map(|(a, b)| (a / b) * (a / b)).sum();
    (sum / v.len() as f64).sqrt()
}

fn scale_of(x: &DVector<f64>, cfg: &IntegratorConfig) -> DVector<f64> {
    x.map(|v| cfg.abs_tol + cfg.rel_tol * v.abs())
}

/// Rescaling matrix of the backward differences for a step ratio `factor`.
fn diff_rescale(order: usize, factor: f64) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(order + 1, order + 1);
    for j in 0..=order {
        m[(0, j)] = 1.0;
    }
    for i in 1..=order {
        for j in 1..=order {
            m[(i, j)] = (i as f64 - 1.0 - factor * j as f64) / i as f64;
        }
    }
    for i in 1..=order {
        for j in 0..=order {
            m[(i, j)] *= m[(i - 1, j)];
        }
    }
    m
}

fn change_differences(diffs: &mut [DVector<f64>], order: usize, factor: f64) {
    let ru = diff_rescale(order, factor) * diff_rescale(order, 1.0);
    let old: Vec<DVector<f64>> = diffs[..=order].to_vec();
    for (j, d) in diffs.iter_mut().take(order + 1).enumerate() {
        d.fill(0.0);
        for (i, o) in old.iter().enumerate() {
            d.axpy(ru[(i, j)], o, 1.0);
        }
    }
}

fn newton_matrix(p: &dyn OdeProblem, jac: &[(usize, usize, f64)], c: f64, stats: &mut IntegratorStats) -> Result<Option<Factor>> {
    let mut trip: Vec<(usize, usize, f64)> = p.mass().entries().to_vec();
    trip.extend(jac.iter().map(|&(i, j, v)| (i, j, -c * v)));
    stats.factorizations += 1;
    match Factor::new(p.dim(), trip) {
        Ok(lu) => Ok(Some(lu)),
        Err(Error::Singular(_)) => Ok(None),
        Err(e) => Err(e),
    }
}

fn jacobian_triplets(p: &dyn OdeProblem, t: f64, x: &DVector<f64>) -> Vec<(usize, usize, f64)> {
    let mut trip = Vec::new();
    p.jacobian(t, x, &mut |i, j, v| trip.push((i, j, v)));
    trip
}

struct NewtonOutcome {
    converged: bool,
    iterations: usize,
    x: DVector<f64>,
    d: DVector<f64>,
}

/// Solves E(d + psi) = c f(t, pred + d) for the correction d.
#[allow(clippy::too_many_arguments)]
fn solve_corrector(
    p: &dyn OdeProblem,
    t: f64,
    pred: &DVector<f64>,
    c: f64,
    psi: &DVector<f64>,
    lu: &Factor,
    scale: &DVector<f64>,
    tol: f64,
) -> NewtonOutcome {
    let mut d = DVector::zeros(pred.len());
    let mut x = pred.clone();
    let mut prev: Option<f64> = None;
    let mut converged = false;
    let mut k = 0;
    while k < NEWTON_MAX {
        let f = p.rhs(t, &x);
        if f.iter().any(|v| !v.is_finite()) {
            break;
        }
        let res = f * c - p.mass().matvec(&(psi + &d));
        let Ok(dx) = lu.solve(&res) else { break };
        let norm = rms(&dx, scale);
        let rate = prev.map(|q| norm / q);
        if let Some(r) = rate {
            if r >= 1.0 || r.powi((NEWTON_MAX - k) as i32) / (1.0 - r) * norm > tol {
                break;
            }
        }
        x += &dx;
        d += &dx;
        k += 1;
        if norm == 0.0 || rate.is_some_and(|r| r / (1.0 - r) * norm < tol) {
            converged = true;
            break;
        }
        prev = Some(norm);
    }
    NewtonOutcome {
        converged,
        iterations: k.max(1),
        x,
        d,
    }
}

fn initial_step(p: &dyn OdeProblem, x0: &DVector<f64>, xdot0: &DVector<f64>, cfg: &IntegratorConfig, mass_lu: Option<&SparseLu>) -> Result<f64> {
    let scale = scale_of(x0, cfg);
    let d0 = rms(x0, &scale);
    let d1 = rms(xdot0, &scale);
    let h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
    let h0 = h0.min(cfg.t_end);
    let x1 = x0 + xdot0 * h0;
    let f1 = p.rhs(h0, &x1);
    let xdot1 = match mass_lu {
        Some(lu) => lu.solve(&f1)?,
        None => f1,
    };
    let d2 = rms(&(xdot1 - xdot0), &scale) / h0;
    let h1 = if d1 <= 1e-15 && d2 <= 1e-15 {
        (h0 * 1e-3).max(1e-6)
    } else {
        (0.01 / d1.max(d2)).sqrt()
    };
    Ok((100.0 * h0).min(h1).min(cfg.max_step).min(cfg.t_end))
}

/// Integrates E ẋ = f(t, x), x(0) = x0, recording `output(x)` on the
/// uniform output grid. Variable-order (1 to 5) numerical differentiation
/// formulas in backward-difference form with simplified Newton iterations
/// and polynomial dense output.
pub fn integrate(
    p: &dyn OdeProblem,
    x0: &DVector<f64>,
    output: &dyn Fn(&DVector<f64>) -> DVector<f64>,
    cfg: &IntegratorConfig,
) -> Result<Trajectory> {
    cfg.validate()?;
    let n = p.dim();
    if x0.len() != n {
        return Err(Error::dim(format!("initial state of length {} for dimension {n}", x0.len())));
    }
    let grid = cfg.grid();
    let mut stats = IntegratorStats::default();
    let mut states = DMatrix::zeros(n, grid.len());
    let y0 = output(x0);
    let mut outputs = DMatrix::zeros(y0.len(), grid.len());
    states.set_column(0, x0);
    outputs.set_column(0, &y0);

    let coef = Coefficients::new();
    let newton_tol = (10.0 * f64::EPSILON / cfg.rel_tol).max(0.03f64.min(cfg.rel_tol.sqrt()));
    let mass_lu = if p.mass().is_identity() {
        None
    } else {
        Some(SparseLu::new(p.mass(), "mass matrix E")?)
    };
    let f0 = p.rhs(0.0, x0);
    let xdot0 = match &mass_lu {
        Some(lu) => lu.solve(&f0)?,
        None => f0,
    };
    if xdot0.iter().any(|v| !v.is_finite()) {
        return Err(Error::Integration {
            t: 0.0,
            reason: "non-finite right-hand side at the initial state".into(),
        });
    }
    let mut h = initial_step(p, x0, &xdot0, cfg, mass_lu.as_ref())?;
    let mut diffs: Vec<DVector<f64>> = vec![DVector::zeros(n); MAX_ORDER + 3];
    diffs[0] = x0.clone();
    diffs[1] = &xdot0 * h;
    let mut order = 1;
    let mut equal_steps = 0;
    let mut t = 0.0f64;
    let mut jac = jacobian_triplets(p, 0.0, x0);
    let mut lu: Option<Factor> = None;
    let mut next_out = 1;

    while next_out < grid.len() {
        let min_step = 10.0 * (t.abs() * f64::EPSILON).max(f64::MIN_POSITIVE);
        if h > cfg.max_step {
            change_differences(&mut diffs, order, cfg.max_step / h);
            h = cfg.max_step;
            equal_steps = 0;
            lu = None;
        }
        let mut current_jac = false;
        let (x_new, d, err_norm, safety, scale) = loop {
            if h < min_step {
                return Err(Error::Integration {
                    t,
                    reason: format!("step size fell below {min_step:.3e}"),
                });
            }
            let mut t_new = t + h;
            if t_new >= cfg.t_end {
                let factor = (cfg.t_end - t) / h;
                change_differences(&mut diffs, order, factor);
                h = cfg.t_end - t;
                t_new = cfg.t_end;
                equal_steps = 0;
                lu = None;
            }
            let mut pred = diffs[0].clone();
            for d in &diffs[1..=order] {
                pred += d;
            }
            let scale = scale_of(&pred, cfg);
            let mut psi = DVector::zeros(n);
            for k in 1..=order {
                psi.axpy(coef.gamma[k] / coef.alpha[order], &diffs[k], 1.0);
            }
            let c = h / coef.alpha[order];
            let outcome;
            loop {
                if lu.is_none() {
                    lu = newton_matrix(p, &jac, c, &mut stats)?;
                }
                let res = match &lu {
                    Some(f) => solve_corrector(p, t_new, &pred, c, &psi, f, &scale, newton_tol),
                    None => NewtonOutcome {
                        converged: false,
                        iterations: NEWTON_MAX,
                        x: pred.clone(),
                        d: DVector::zeros(n),
                    },
                };
                if res.converged || current_jac {
                    outcome = Some(res);
                    break;
                }
                jac = jacobian_triplets(p, t_new, &pred);
                lu = None;
                current_jac = true;
            }
            let res = outcome.expect("loop sets the outcome");
            if !res.converged {
                stats.newton_failures += 1;
                h *= 0.5;
                change_differences(&mut diffs, order, 0.5);
                equal_steps = 0;
                lu = None;
                continue;
            }
            let safety = 0.9 * (2 * NEWTON_MAX + 1) as f64 / (2 * NEWTON_MAX + res.iterations) as f64;
            let scale = scale_of(&res.x, cfg);
            let err_norm = rms(&(&res.d * coef.error_const[order]), &scale);
            if err_norm > 1.0 || !err_norm.is_finite() {
                stats.rejected += 1;
                let factor = if err_norm.is_finite() {
                    (safety * err_norm.powf(-1.0 / (order as f64 + 1.0))).max(MIN_FACTOR)
                } else {
                    MIN_FACTOR
                };
                h *= factor;
                change_differences(&mut diffs, order, factor);
                equal_steps = 0;
                continue;
            }
            break (res.x, res.d, err_norm, safety, scale);
        };
        stats.steps += 1;
        equal_steps += 1;
        let t_old = t;
        t = if (t + h - cfg.t_end).abs() <= 1e-14 * cfg.t_end { cfg.t_end } else { t + h };

        diffs[order + 2] = &d - &diffs[order + 1];
        diffs[order + 1] = d;
        for i in (0..=order).rev() {
            let next = diffs[i + 1].clone();
            diffs[i] += next;
        }
        debug_assert!((&diffs[0] - &x_new).amax() <= 1e-12 * (1.0 + x_new.amax()));

        // dense output on the grid points passed by this step
        while next_out < grid.len() && grid[next_out] <= t {
            let tg = grid[next_out];
            let x = if tg == t {
                x_new.clone()
            } else {
                let mut x = diffs[0].clone();
                let mut prod = 1.0;
                for k in 0..order {
                    let shift = t - h * k as f64;
                    prod *= (tg - shift) / (h * (k as f64 + 1.0));
                    x.axpy(prod, &diffs[k + 1], 1.0);
                }
                x
            };
            debug_assert!(tg >= t_old);
            if x.iter().any(|v| !v.is_finite()) {
                return Err(Error::Integration {
                    t: tg,
                    reason: "non-finite state".into(),
                });
            }
            outputs.set_column(next_out, &output(&x));
            states.set_column(next_out, &x);
            next_out += 1;
        }
        if t >= cfg.t_end {
            break;
        }

        if equal_steps < order + 1 {
            continue;
        }
        let err_m = if order > 1 {
            rms(&(&diffs[order] * coef.error_const[order - 1]), &scale)
        } else {
            f64::INFINITY
        };
        let err_p = if order < MAX_ORDER {
            rms(&(&diffs[order + 2] * coef.error_const[order + 1]), &scale)
        } else {
            f64::INFINITY
        };
        let candidates = [
            err_m.powf(-1.0 / order as f64),
            err_norm.powf(-1.0 / (order as f64 + 1.0)),
            err_p.powf(-1.0 / (order as f64 + 2.0)),
        ];
        let (best, best_factor) = candidates
            .iter()
            .enumerate()
            .fold((1, candidates[1]), |acc, (i, &f)| if f > acc.1 { (i, f) } else { acc });
        order = order + best - 1;
        let factor = (safety * best_factor).min(MAX_FACTOR);
        h *= factor;
        change_differences(&mut diffs, order, factor);
        equal_steps = 0;
        lu = None;
    }
    if next_out < grid.len() {
        return Err(Error::Integration {
            t,
            reason: "integration stopped before the final output time".into(),
        });
    }
    Ok(Trajectory {
        times: grid,
        states,
        outputs,
        stats,
    })
}

/// Simulates a plant driven by an explicit input function.
pub fn integrate_qb(s: &QbSystem, input: &InputFn, cfg: &IntegratorConfig) -> Result<Trajectory> {
    let u0 = input.value(0.0);
    if u0.len() != s.inputs() {
        return Err(Error::dim(format!("input of length {} for {} inputs", u0.len(), s.inputs())));
    }
    if s.bp.is_some() && input.derivative(0.0).is_none() {
        return Err(Error::InvalidParam("system has an input-derivative term; supply u'(t)".into()));
    }
    let p = QbProblem { system: s, input };
    integrate(&p, &s.x0, &|x| s.c.matvec(x), cfg)
}

/// Simulates a driven system; `c` acts on the plant coordinates.
pub fn integrate_driven(d: &DrivenSystem, c: &SparseMat, cfg: &IntegratorConfig) -> Result<Trajectory> {
    if c.cols() != d.n_x {
        return Err(Error::dim(format!("output matrix has {} columns, plant has {}", c.cols(), d.n_x)));
    }
    let p = DrivenProblem { system: d };
    integrate(&p, &d.b, &|w| c.matvec(&d.px(w)), cfg)
}

#[derive(Clone, Debug)]
pub struct ErrorSummary {
    /// max over outputs of |y − ỹ| at each time.
    pub per_time: Vec<f64>,
    pub max_abs: f64,
    /// max_abs / max |y|.
    pub rel_linf: f64,
}

impl ErrorSummary {
    pub fn to_csv(&self, times: &[f64]) -> String {
        let mut s = String::from("t,abs_error\n");
        for (t, e) in times.iter().zip(&self.per_time) {
            let _ = writeln!(s, "{:.17e},{:.17e}", t, e);
        }
        s
    }
}

pub fn output_error(full: &Trajectory, reduced: &Trajectory) -> Result<ErrorSummary> {
    if full.times.len() != reduced.times.len()
        || full
            .times
            .iter()
            .zip(&reduced.times)
            .any(|(a, b)| (a - b).abs() > 1e-12 * (1.0 + a.abs()))
    {
        return Err(Error::dim("trajectories are sampled on different grids"));
    }
    if full.outputs.nrows() != reduced.outputs.nrows() {
        return Err(Error::dim(format!(
            "{} outputs versus {}",
            full.outputs.nrows(),
            reduced.outputs.nrows()
        )));
    }
    let diff = &full.outputs - &reduced.outputs;
    let per_time: Vec<f64> = diff.column_iter().map(|c| c.amax()).collect();
    let max_abs = per_time.iter().fold(0.0f64, |a, &b| a.max(b));
    let scale = full.outputs.amax();
    Ok(ErrorSummary {
        per_time,
        max_abs,
        rel_linf: if scale > 0.0 { max_abs / scale } else { max_abs },
    })
}
