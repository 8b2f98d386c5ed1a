//! Benchmark plants (viscous Burgers, Chafee-Infante, nonlinear RC ladder)
//! with their input signals and signal generators.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::kron::{QuadMap, SparseMat};
use crate::model::{superpose_generators, QbSystem, SignalGenerator};
use crate::simulate::InputFn;

/// Convective term discretization for Burgers.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BurgersForm {
    /// v ∂ξ v
    Advective,
    /// 0.5 ∂ξ (v²)
    Conservative,
}

/// Diode characteristic of the RC ladder.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum DiodeLaw {
    /// g(v) = exp(40 v) − 1, zero at rest.
    #[default]
    Shifted,
    /// g(v) = exp(40 v − 1), as printed in the benchmark description.
    Printed,
}

impl FromStr for DiodeLaw {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "shifted" | "standard" => Ok(DiodeLaw::Shifted),
            "printed" => Ok(DiodeLaw::Printed),
            _ => Err(Error::InvalidParam(format!("unknown diode law '{s}' (expected shifted|printed)"))),
        }
    }
}

impl fmt::Display for DiodeLaw {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DiodeLaw::Shifted => "shifted",
            DiodeLaw::Printed => "printed",
        })
    }
}

impl DiodeLaw {
    pub fn eval(&self, v: f64) -> f64 {
        match self {
            DiodeLaw::Shifted => (40.0 * v).exp() - 1.0,
            DiodeLaw::Printed => (40.0 * v - 1.0).exp(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BenchmarkName {
    BurgersAdv,
    BurgersCons,
    Chafee,
    RcLadder,
}

impl FromStr for BenchmarkName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "burgers_adv" => Ok(BenchmarkName::BurgersAdv),
            "burgers_cons" => Ok(BenchmarkName::BurgersCons),
            "chafee" => Ok(BenchmarkName::Chafee),
            "rc_ladder" => Ok(BenchmarkName::RcLadder),
            _ => Err(Error::InvalidParam(format!(
                "unknown benchmark '{s}' (expected burgers_adv|burgers_cons|chafee|rc_ladder)"
            ))),
        }
    }
}

impl fmt::Display for BenchmarkName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BenchmarkName::BurgersAdv => "burgers_adv",
            BenchmarkName::BurgersCons => "burgers_cons",
            BenchmarkName::Chafee => "chafee",
            BenchmarkName::RcLadder => "rc_ladder",
        })
    }
}

/// A benchmark instance: plant, size, physical parameters and input case.
#[derive(Clone, Debug, PartialEq)]
pub struct BenchmarkSpec {
    pub name: BenchmarkName,
    /// N for Burgers, Ñ for Chafee and the RC ladder.
    pub size: usize,
    pub nu: f64,
    pub case: u8,
    pub diode_law: DiodeLaw,
}

impl BenchmarkSpec {
    pub fn new(name: BenchmarkName, size: usize, case: u8) -> Self {
        BenchmarkSpec {
            name,
            size,
            nu: 0.01,
            case,
            diode_law: DiodeLaw::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let min = if self.name == BenchmarkName::RcLadder { 3 } else { 4 };
        if self.size < min {
            return Err(Error::InvalidParam(format!("{}: size {} below minimum {min}", self.name, self.size)));
        }
        if !(self.nu > 0.0 && self.nu.is_finite()) {
            return Err(Error::InvalidParam(format!("viscosity must be positive, got {}", self.nu)));
        }
        if !matches!(self.case, 1 | 2) {
            return Err(Error::InvalidParam(format!("input case must be 1 or 2, got {}", self.case)));
        }
        Ok(())
    }

    pub fn system(&self) -> Result<QbSystem> {
        self.validate()?;
        match self.name {
            BenchmarkName::BurgersAdv => burgers(self.size, self.nu, BurgersForm::Advective),
            BenchmarkName::BurgersCons => burgers(self.size, self.nu, BurgersForm::Conservative),
            BenchmarkName::Chafee => chafee(self.size),
            BenchmarkName::RcLadder => rc_ladder_with(self.size, self.diode_law),
        }
    }

    pub fn generator(&self) -> Result<SignalGenerator> {
        self.validate()?;
        match self.name {
            BenchmarkName::BurgersAdv | BenchmarkName::BurgersCons => burgers_case_generator(self.case),
            BenchmarkName::Chafee => chafee_case_generator(self.case),
            BenchmarkName::RcLadder => rc_case_generator(self.case),
        }
    }

    pub fn input(&self) -> Result<InputFn> {
        self.validate()?;
        match self.name {
            BenchmarkName::BurgersAdv | BenchmarkName::BurgersCons => burgers_case_input(self.case),
            BenchmarkName::Chafee => chafee_case_input(self.case),
            BenchmarkName::RcLadder => rc_case_input(self.case),
        }
    }

    /// Simulation horizon used by default for this plant.
    pub fn default_horizon(&self) -> f64 {
        match self.name {
            BenchmarkName::RcLadder => 2.0,
            _ => 3.0,
        }
    }
}

fn check_size(n: usize, min: usize, what: &str) -> Result<()> {
    if n < min {
        return Err(Error::InvalidParam(format!("{what}: size {n} below minimum {min}")));
    }
    Ok(())
}

/// Viscous Burgers on (0,1) with Dirichlet control v(0) = u, homogeneous
/// Neumann right end and output at the last node. Mesh size h = 1/(N+2).
pub fn burgers(n: usize, nu: f64, form: BurgersForm) -> Result<QbSystem> {
    check_size(n, 4, "burgers")?;
    if !(nu > 0.0 && nu.is_finite()) {
        return Err(Error::InvalidParam(format!("viscosity must be positive, got {nu}")));
    }
    let h = 1.0 / (n as f64 + 2.0);
    let diff = nu / (h * h);

    let mut a = Vec::with_capacity(3 * n);
    for i in 0..n {
        if i + 1 < n {
            a.push((i, i, -2.0 * diff));
            a.push((i, i + 1, diff));
        } else {
            a.push((i, i, -diff));
        }
        if i > 0 {
            a.push((i, i - 1, diff));
        }
    }

    let mut g = Vec::new();
    let mut d = Vec::new();
    let mut gu = Vec::new();
    match form {
        BurgersForm::Advective => {
            // −v_i (v_{i+1} − v_{i−1}) / (2h)
            let c = 1.0 / (2.0 * h);
            for i in 0..n {
                let right = if i + 1 < n { i + 1 } else { i };
                g.push((i, i, right, -c));
                if i > 0 {
                    g.push((i, i, i - 1, c));
                } else {
                    d.push((0, 0, 0, c));
                }
            }
        }
        BurgersForm::Conservative => {
            // −(v_{i+1}² − v_{i−1}²) / (4h)
            let c = 1.0 / (4.0 * h);
            for i in 0..n {
                let right = if i + 1 < n { i + 1 } else { i };
                g.push((i, right, right, -c));
                if i > 0 {
                    g.push((i, i - 1, i - 1, c));
                } else {
                    gu.push((0, 0, 0, c));
                }
            }
        }
    }

    let gu = if gu.is_empty() { None } else { Some(QuadMap::new(n, 1, 1, gu)?) };
    QbSystem::new(
        SparseMat::identity(n),
        SparseMat::new(n, n, a)?,
        QuadMap::new(n, n, n, g)?,
        QuadMap::new(n, n, 1, d)?,
        SparseMat::new(n, 1, vec![(0, 0, diff)])?,
        SparseMat::new(1, n, vec![(0, n - 1, 1.0)])?,
        DVector::zeros(n),
        gu,
        None,
    )
}

/// Two-state oscillator whose output is amp_cos·cos(ωt) + amp_sin·sin(ωt).
fn harmonic(omega: f64, amp_cos: f64, amp_sin: f64) -> Result<SignalGenerator> {
    SignalGenerator::linear(
        SparseMat::new(2, 2, vec![(0, 1, omega), (1, 0, -omega)])?,
        SparseMat::new(1, 2, vec![(0, 0, 1.0)])?,
        DVector::from_vec(vec![amp_cos, amp_sin]),
    )
}

fn burgers_case1_generator(scale: f64) -> Result<SignalGenerator> {
    let half = 0.5 * scale;
    superpose_generators(&[
        harmonic(1.3 * PI, half, 0.0)?,
        harmonic(5.4 * PI, -half, 0.0)?,
        harmonic(0.6 * PI, 0.0, -half)?,
        harmonic(3.1 * PI, 0.0, 1.2 * half)?,
    ])
}

fn burgers_case1_value(t: f64) -> f64 {
    0.5 * ((1.3 * PI * t).cos() - (5.4 * PI * t).cos() - (0.6 * PI * t).sin() + 1.2 * (3.1 * PI * t).sin())
}

fn burgers_case1_rate(t: f64) -> f64 {
    0.5 * (-1.3 * PI * (1.3 * PI * t).sin() + 5.4 * PI * (5.4 * PI * t).sin() - 0.6 * PI * (0.6 * PI * t).cos()
        + 1.2 * 3.1 * PI * (3.1 * PI * t).cos())
}

/// Case 1: sum of four harmonics (8 states). Case 2: the quadratic
/// generator of 1/(0.5 − e^{2t}) + 2e^{−t}.
pub fn burgers_case_generator(case: u8) -> Result<SignalGenerator> {
    match case {
        1 => burgers_case1_generator(1.0),
        2 => SignalGenerator::new(
            SparseMat::new(2, 2, vec![(0, 0, -2.0), (1, 1, -1.0)])?,
            QuadMap::new(2, 2, 2, vec![(0, 0, 0, -0.5)])?,
            SparseMat::new(1, 2, vec![(0, 0, -0.5), (0, 1, 2.0)])?,
            DVector::from_vec(vec![4.0, 1.0]),
        ),
        _ => Err(Error::InvalidParam(format!("input case must be 1 or 2, got {case}"))),
    }
}

/// Closed-form input signal for the Burgers cases, with derivative.
pub fn burgers_case_input(case: u8) -> Result<InputFn> {
    match case {
        1 => Ok(InputFn::scalar(burgers_case1_value)
            .with_derivative(|t| DVector::from_element(1, burgers_case1_rate(t)))),
        2 => Ok(InputFn::scalar(|t| 1.0 / (0.5 - (2.0 * t).exp()) + 2.0 * (-t).exp()).with_derivative(|t| {
            let q = 0.5 - (2.0 * t).exp();
            DVector::from_element(1, 2.0 * (2.0 * t).exp() / (q * q) - 2.0 * (-t).exp())
        })),
        _ => Err(Error::InvalidParam(format!("input case must be 1 or 2, got {case}"))),
    }
}

fn chafee_scale(case: u8) -> Result<f64> {
    match case {
        1 => Ok(1.0),
        2 => Ok(0.125),
        _ => Err(Error::InvalidParam(format!("input case must be 1 or 2, got {case}"))),
    }
}

/// The Burgers Case 1 generator scaled by 1 (Case 1) or 0.125 (Case 2).
pub fn chafee_case_generator(case: u8) -> Result<SignalGenerator> {
    burgers_case1_generator(chafee_scale(case)?)
}

pub fn chafee_case_input(case: u8) -> Result<InputFn> {
    let alpha = chafee_scale(case)?;
    Ok(InputFn::scalar(move |t| alpha * burgers_case1_value(t))
        .with_derivative(move |t| DVector::from_element(1, alpha * burgers_case1_rate(t))))
}

/// Chafee-Infante with the quadratic recast w = v²:
///   v_t = −v w + v_ξξ + v,  w_t = −2w² + 2 v v_ξξ + 2v²,
/// Dirichlet control v(0) = u, Neumann right end, state [v; w], output v at
/// the last node. Mesh size h = 1/(Ñ+2).
pub fn chafee(nt: usize) -> Result<QbSystem> {
    check_size(nt, 4, "chafee")?;
    let n = 2 * nt;
    let h = 1.0 / (nt as f64 + 2.0);
    let lap = 1.0 / (h * h);
    let w = |i: usize| nt + i;

    let mut a = Vec::with_capacity(3 * nt);
    let mut g = Vec::with_capacity(6 * nt);
    for i in 0..nt {
        let last = i + 1 == nt;
        // v-row: Laplacian plus linear reaction
        let self_coef = if last { -lap } else { -2.0 * lap };
        a.push((i, i, self_coef + 1.0));
        if !last {
            a.push((i, i + 1, lap));
        }
        if i > 0 {
            a.push((i, i - 1, lap));
        }
        g.push((i, i, w(i), -1.0));

        // w-row: 2 v_i (Δv)_i + 2 v_i² − 2 w_i²
        g.push((w(i), i, i, 2.0 * self_coef + 2.0));
        if !last {
            g.push((w(i), i, i + 1, 2.0 * lap));
        }
        if i > 0 {
            g.push((w(i), i, i - 1, 2.0 * lap));
        }
        g.push((w(i), w(i), w(i), -2.0));
    }

    QbSystem::new(
        SparseMat::identity(n),
        SparseMat::new(n, n, a)?,
        QuadMap::new(n, n, n, g)?,
        QuadMap::new(n, n, 1, vec![(w(0), 0, 0, 2.0 * lap)])?,
        SparseMat::new(n, 1, vec![(0, 0, lap)])?,
        SparseMat::new(1, n, vec![(0, nt - 1, 1.0)])?,
        DVector::zeros(n),
        None,
        None,
    )
}

/// Nonlinear RC ladder with Ñ nodes, exponential diodes and a current
/// source at node 1, under the default diode law.
pub fn rc_ladder(nt: usize) -> Result<QbSystem> {
    rc_ladder_with(nt, DiodeLaw::default())
}

/// Node-voltage right-hand side of the ladder in terms of the branch
/// variables x (x_1 = v_1, x_i = v_{i−1} − v_i) and the diode currents g_i = g(x_i):
/// returns, per node, the coefficients on x, on g and on u.
fn rc_node_rows(nt: usize) -> Vec<(Vec<(usize, f64)>, Vec<(usize, f64)>, f64)> {
    (0..nt)
        .map(|i| {
            if i == 0 {
                // −2v_1 + v_2 = −x_1 − x_2
                (vec![(0, -1.0), (1, -1.0)], vec![(0, -1.0), (1, -1.0)], 1.0)
            } else if i + 1 < nt {
                (vec![(i, 1.0), (i + 1, -1.0)], vec![(i, 1.0), (i + 1, -1.0)], 0.0)
            } else {
                (vec![(i, 1.0)], vec![(i, 1.0)], 0.0)
            }
        })
        .collect()
}

/// Reference right-hand side of the node-voltage ODE, used to check the
/// quadratic recast.
pub fn rc_node_rhs(v: &[f64], u: f64, law: DiodeLaw) -> Vec<f64> {
    let nt = v.len();
    let g = |x: f64| law.eval(x);
    (0..nt)
        .map(|i| {
            if i == 0 {
                -2.0 * v[0] + v[1] - g(v[0]) - g(v[0] - v[1]) + u
            } else if i + 1 < nt {
                -2.0 * v[i] + v[i - 1] + v[i + 1] + g(v[i - 1] - v[i]) - g(v[i] - v[i + 1])
            } else {
                -v[i] + v[i - 1] + g(v[i - 1] - v[i])
            }
        })
        .collect()
}

/// RC ladder as a QB system of size 2Ñ with state [x; g(x)].
pub fn rc_ladder_with(nt: usize, law: DiodeLaw) -> Result<QbSystem> {
    check_size(nt, 3, "rc_ladder")?;
    let n = 2 * nt;
    let nodes = rc_node_rows(nt);

    // branch rows: ẋ_1 = v̇_1, ẋ_i = v̇_{i−1} − v̇_i
    let mut rows: Vec<(Vec<(usize, f64)>, f64)> = Vec::with_capacity(nt);
    for i in 0..nt {
        let mut coefs = Vec::new();
        let mut u = 0.0;
        let mut add = |node: usize, sign: f64, coefs: &mut Vec<(usize, f64)>| {
            let (xs, gs, un) = &nodes[node];
            coefs.extend(xs.iter().map(|&(j, c)| (j, sign * c)));
            coefs.extend(gs.iter().map(|&(j, c)| (nt + j, sign * c)));
            u += sign * un;
        };
        if i == 0 {
            add(0, 1.0, &mut coefs);
        } else {
            add(i - 1, 1.0, &mut coefs);
            add(i, -1.0, &mut coefs);
        }
        rows.push((coefs, u));
    }

    let mut a = Vec::new();
    let mut g = Vec::new();
    let mut d = Vec::new();
    let mut b = Vec::new();
    for (i, (coefs, u)) in rows.iter().enumerate() {
        let gi = nt + i;
        for &(j, c) in coefs {
            a.push((i, j, c));
            // d/dt g(x_i) = 40 (g_i + offset) ẋ_i
            g.push((gi, gi, j, 40.0 * c));
            if law == DiodeLaw::Shifted {
                a.push((gi, j, 40.0 * c));
            }
        }
        if *u != 0.0 {
            b.push((i, 0, *u));
            d.push((gi, gi, 0, 40.0 * u));
            if law == DiodeLaw::Shifted {
                b.push((gi, 0, 40.0 * u));
            }
        }
    }

    let mut x0 = DVector::zeros(n);
    if law == DiodeLaw::Printed {
        x0.rows_mut(nt, nt).fill((-1.0f64).exp());
    }
    QbSystem::new(
        SparseMat::identity(n),
        SparseMat::new(n, n, a)?,
        QuadMap::new(n, n, n, g)?,
        QuadMap::new(n, n, 1, d)?,
        SparseMat::new(n, 1, b)?,
        SparseMat::new(1, n, vec![(0, 0, 1.0)])?,
        x0,
        None,
        None,
    )
}

/// Case 1: e^{−t}. Case 2: 1 + cos(10πt) with the printed 3-state generator.
pub fn rc_case_generator(case: u8) -> Result<SignalGenerator> {
    match case {
        1 => SignalGenerator::linear(
            SparseMat::new(1, 1, vec![(0, 0, -1.0)])?,
            SparseMat::new(1, 1, vec![(0, 0, 1.0)])?,
            DVector::from_element(1, 1.0),
        ),
        2 => SignalGenerator::linear(
            SparseMat::new(3, 3, vec![(1, 2, 10.0 * PI), (2, 1, -10.0 * PI)])?,
            SparseMat::new(1, 3, vec![(0, 0, 1.0), (0, 2, 1.0)])?,
            DVector::from_vec(vec![1.0, 0.0, 1.0]),
        ),
        _ => Err(Error::InvalidParam(format!("input case must be 1 or 2, got {case}"))),
    }
}

pub fn rc_case_input(case: u8) -> Result<InputFn> {
    match case {
        1 => Ok(InputFn::scalar(|t| (-t).exp()).with_derivative(|t| DVector::from_element(1, -(-t).exp()))),
        2 => Ok(InputFn::scalar(|t| 1.0 + (10.0 * PI * t).cos())
            .with_derivative(|t| DVector::from_element(1, -10.0 * PI * (10.0 * PI * t).sin()))),
        _ => Err(Error::InvalidParam(format!("input case must be 1 or 2, got {case}"))),
    }
}
