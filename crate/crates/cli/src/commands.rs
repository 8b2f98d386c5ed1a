use std::fs;
use std::path::{Path, PathBuf};

use serde_json::{json, Value};

use qbmor::bench::BenchmarkSpec;
use qbmor::kron::SparseMat;
use qbmor::linalg::DEFLATION_TOL;
use qbmor::model::{assemble_driven_extended, galerkin_project, DrivenSystem, QbSystem, SignalGenerator};
use qbmor::moments::{linear_moments, w2_moments, w3_moments, MomentSet};
use qbmor::reduction::{
    assm_reduce, irka_frequencies, multm_iw_reduce, multm_reduce, pod_reduce, AssmConfig, MultmConfig,
    ReductionBasis,
};
use qbmor::simulate::{integrate_driven, integrate_qb, output_error, InputFn, IntegratorConfig, Trajectory};

use crate::config::{ReducerSection, RunConfig};
use crate::error::CliError;

/// Plant, generator and (for benchmarks) the closed-form input.
pub struct Problem {
    pub system: QbSystem,
    pub generator: SignalGenerator,
    pub input: Option<InputFn>,
    pub spec: Option<BenchmarkSpec>,
    pub horizon: f64,
}

impl Problem {
    pub fn from_spec(spec: &BenchmarkSpec) -> Result<Problem, CliError> {
        Ok(Problem {
            system: spec.system()?,
            generator: spec.generator()?,
            input: Some(spec.input()?),
            spec: Some(spec.clone()),
            horizon: spec.default_horizon(),
        })
    }

    pub fn from_config(cfg: &RunConfig) -> Result<Problem, CliError> {
        if let Some(b) = &cfg.benchmark {
            return Problem::from_spec(&b.spec()?);
        }
        let b = cfg.bundle.as_ref().expect("config validated");
        Ok(Problem {
            system: QbSystem::load(&b.system)?,
            generator: SignalGenerator::load(&b.generator)?,
            input: None,
            spec: None,
            horizon: 1.0,
        })
    }

    /// Simulates `system` (the full plant or a reduced one) under this
    /// problem's input.
    pub fn simulate(&self, system: &QbSystem, cfg: &IntegratorConfig) -> Result<Trajectory, CliError> {
        match &self.input {
            Some(u) => Ok(integrate_qb(system, u, cfg)?),
            None => simulate_driven(system, &self.generator, cfg),
        }
    }
}

/// Simulates plant and generator as one autonomous system; states are
/// restricted to the plant coordinates.
pub fn simulate_driven(system: &QbSystem, gen: &SignalGenerator, cfg: &IntegratorConfig) -> Result<Trajectory, CliError> {
    let d = assemble_driven_extended(system, gen)?;
    let mut tr = integrate_driven(&d, &system.c, cfg)?;
    tr.states = tr.states.rows(0, system.dim()).into_owned();
    Ok(tr)
}

fn create_dir(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|source| CliError::Io {
        path: dir.display().to_string(),
        source,
    })
}

fn write(path: &Path, text: &str) -> Result<(), CliError> {
    fs::write(path, text).map_err(|source| CliError::Io {
        path: path.display().to_string(),
        source,
    })
}

fn spec_json(spec: &BenchmarkSpec) -> Value {
    json!({
        "name": spec.name.to_string(),
        "size": spec.size,
        "nu": spec.nu,
        "case": spec.case,
        "diode_law": spec.diode_law.to_string(),
    })
}

fn integrator_json(cfg: &IntegratorConfig) -> Value {
    json!({
        "scheme": "variable-order NDF/BDF 1-5, simplified Newton, analytic Jacobian",
        "abs_tol": cfg.abs_tol,
        "rel_tol": cfg.rel_tol,
        "t_end": cfg.t_end,
        "max_step": if cfg.max_step.is_finite() { json!(cfg.max_step) } else { json!("inf") },
        "output_grid": cfg.output_grid,
    })
}

fn decision_flags(problem: &Problem) -> Value {
    json!({
        "svd_threshold": "absolute",
        "deflation_tol_relative": DEFLATION_TOL,
        "mesh_size": "1/(size+2)",
        "diode_law": problem.spec.as_ref().map(|s| s.diode_law.to_string()),
        "order3_symmetrized_quadratic": true,
        "multm_second_level": "Taylor terms of total order < q2 at (sigma, sigma), quadratic and bilinear parts separate",
        "multm_ignores_input_extension": problem.system.has_input_extension(),
    })
}

pub fn cmd_bench(spec: &BenchmarkSpec, out: &Path) -> Result<String, CliError> {
    spec.validate().map_err(|e| CliError::Config(e.to_string()))?;
    let p = Problem::from_spec(spec)?;
    create_dir(out)?;
    p.system.save(&out.join("system"))?;
    p.generator.save(&out.join("generator"))?;
    let meta = json!({
        "command": "bench",
        "benchmark": spec_json(spec),
        "state_dim": p.system.dim(),
        "generator_dim": p.generator.dim(),
        "quadratic_input": p.system.gu.is_some(),
        "default_horizon": p.horizon,
    });
    write(&out.join("metadata.json"), &pretty(&meta))?;
    Ok(format!(
        "{}: state dimension {}, generator dimension {} -> {}",
        spec.name,
        p.system.dim(),
        p.generator.dim(),
        out.display()
    ))
}

fn pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("json values serialize");
    s.push('\n');
    s
}

fn frequencies(r: &ReducerSection, system: &QbSystem, meta: &mut Value) -> Result<Vec<f64>, CliError> {
    if let Some(f) = &r.freqs {
        return Ok(f.clone());
    }
    let count = r.irka_count.expect("config validated");
    let irka = irka_frequencies(system, count)?;
    meta["irka"] = json!({
        "requested": count,
        "shifts": irka.shifts,
        "iterations": irka.iterations,
        "converged": irka.converged,
        "warning": irka.warning,
    });
    if irka.shifts.is_empty() {
        return Err(CliError::Config("IRKA produced no real shifts; give reducer.freqs".into()));
    }
    Ok(irka.shifts)
}

fn training_problem(cfg: &RunConfig, problem: &Problem) -> Result<Option<Problem>, CliError> {
    match (cfg.reducer.train_case, &problem.spec) {
        (Some(case), Some(spec)) if case != spec.case => {
            let mut train = spec.clone();
            train.case = case;
            Ok(Some(Problem::from_spec(&train)?))
        }
        _ => Ok(None),
    }
}

pub struct ReduceOutcome {
    pub basis: ReductionBasis,
    pub reduced: QbSystem,
    pub metadata: Value,
}

pub fn run_reducer(cfg: &RunConfig, problem: &Problem) -> Result<ReduceOutcome, CliError> {
    let r = &cfg.reducer;
    let s = &problem.system;
    let icfg = cfg.integrator.build(problem.horizon)?;
    let mut meta = json!({ "method": r.method });
    let (basis, reduced) = match r.method.as_str() {
        "assm" | "assm-q" => {
            let freqs = frequencies(r, s, &mut meta)?;
            let ac = AssmConfig {
                freqs_w2: freqs.clone(),
                orders_w2: r.l.as_ref().expect("validated").expand(freqs.len(), "l")?,
                freqs_w1: freqs.clone(),
                orders_w1: r.l_tilde.as_ref().expect("validated").expand(freqs.len(), "l_tilde")?,
                lowrank_tol: r.tol.expect("validated"),
                lyap_tol: r.lyap_tol,
            };
            ac.validate().map_err(|e| CliError::Config(e.to_string()))?;
            let res = assm_reduce(s, &problem.generator, &ac)?;
            meta["parameters"] = json!({
                "freqs": freqs,
                "l_tilde": ac.orders_w1,
                "l": ac.orders_w2,
                "tol": ac.lowrank_tol,
                "lyap_tol": ac.lyap_tol(),
            });
            meta["n_a"] = json!(res.n_a);
            meta["n_b"] = json!(res.n_b);
            meta["n_1"] = json!(res.n_1);
            meta["max_lyap_residual"] = json!(res.max_lyap_residual);
            meta["input_map"] = json!(if s.has_input_extension() { "nonlinear" } else { "linear" });
            (res.basis, res.reduced)
        }
        "multm" | "multm-iw" => {
            let freqs = frequencies(r, s, &mut meta)?;
            let mc = MultmConfig {
                freqs: freqs.clone(),
                q1: r.q1.as_ref().expect("validated").expand(freqs.len(), "q1")?,
                q2: r.q2.as_ref().expect("validated").expand(freqs.len(), "q2")?,
            };
            mc.validate().map_err(|e| CliError::Config(e.to_string()))?;
            meta["parameters"] = json!({ "freqs": freqs, "q1": mc.q1, "q2": mc.q2 });
            let basis = if r.method == "multm" {
                multm_reduce(s, &mc)?
            } else {
                let p = s.inputs();
                let weight = SignalGenerator::linear(
                    SparseMat::identity(p).scale(-r.weight_pole),
                    SparseMat::identity(p),
                    nalgebra::DVector::zeros(p),
                )?
                .with_input(SparseMat::identity(p))?;
                meta["parameters"]["weight_pole"] = json!(r.weight_pole);
                multm_iw_reduce(s, &weight, &mc)?
            };
            let reduced = galerkin_project(s, &basis.v)?;
            (basis, reduced)
        }
        "pod" | "pod-block" => {
            let train = training_problem(cfg, problem)?;
            let source = train.as_ref().unwrap_or(problem);
            let traj = source.simulate(s, &icfg)?;
            let n_state = s.dim();
            let blocks: Option<Vec<(usize, usize)>> = if r.method == "pod-block" {
                Some(match &r.blocks {
                    Some(b) => b.iter().map(|x| (x[0], x[1])).collect(),
                    None => {
                        let n = r.n.expect("validated");
                        vec![(n_state / 2, n / 2), (n_state - n_state / 2, n - n / 2)]
                    }
                })
            } else {
                None
            };
            let n = match &blocks {
                Some(b) => b.iter().map(|x| x.1).sum(),
                None => r.n.expect("validated"),
            };
            let basis = pod_reduce(traj.snapshots(), n, blocks.as_deref())?;
            meta["parameters"] = json!({
                "n": n,
                "blocks": blocks,
                "train_case": train.as_ref().and_then(|t| t.spec.as_ref().map(|s| s.case))
                    .or(problem.spec.as_ref().map(|s| s.case)),
                "snapshots": traj.times.len(),
            });
            let reduced = galerkin_project(s, &basis.v)?;
            (basis, reduced)
        }
        other => return Err(CliError::Config(format!("unknown method {other}"))),
    };
    meta["reduced_dim"] = json!(basis.len());
    meta["deflated"] = json!(basis.deflated);
    Ok(ReduceOutcome {
        basis,
        reduced,
        metadata: meta,
    })
}

pub fn cmd_reduce(cfg: &RunConfig, out: &Path) -> Result<String, CliError> {
    let problem = Problem::from_config(cfg)?;
    let icfg = cfg.integrator.build(problem.horizon)?;
    let outcome = run_reducer(cfg, &problem)?;
    create_dir(out)?;
    outcome.basis.save(&out.join("basis.mtx"))?;
    outcome.reduced.save(&out.join("reduced"))?;
    let mut meta = json!({
        "command": "reduce",
        "full_dim": problem.system.dim(),
        "reducer": outcome.metadata,
        "integrator": integrator_json(&icfg),
        "seed": cfg.output.seed,
        "decisions": decision_flags(&problem),
    });
    match (&problem.spec, &cfg.bundle) {
        (Some(spec), _) => meta["benchmark"] = spec_json(spec),
        (None, Some(b)) => {
            meta["bundle"] = json!({
                "system": b.system.display().to_string(),
                "generator": b.generator.display().to_string(),
            })
        }
        _ => {}
    }
    let mut summary = format!(
        "{}: n = {} (full {})",
        cfg.reducer.method,
        outcome.basis.len(),
        problem.system.dim()
    );
    if cfg.output.evaluate {
        let full = problem.simulate(&problem.system, &icfg)?;
        let red = problem.simulate(&outcome.reduced, &icfg)?;
        let err = output_error(&full, &red)?;
        full.save_csv(&out.join("full.csv"), false)?;
        red.save_csv(&out.join("reduced.csv"), false)?;
        write(&out.join("error.csv"), &err.to_csv(&full.times))?;
        meta["evaluation"] = json!({ "max_abs_error": err.max_abs, "rel_linf": err.rel_linf });
        summary.push_str(&format!(", max_abs_error = {:.6e}", err.max_abs));
    }
    write(&out.join("metadata.json"), &pretty(&meta))?;
    Ok(summary)
}

pub fn cmd_simulate(
    system: &Path,
    generator: &Path,
    cfg: &IntegratorConfig,
    out: &Path,
    with_states: bool,
) -> Result<String, CliError> {
    let s = QbSystem::load(system)?;
    let g = SignalGenerator::load(generator)?;
    let tr = simulate_driven(&s, &g, cfg)?;
    tr.save_csv(out, with_states)?;
    Ok(format!(
        "steps = {}, rejected = {}, factorizations = {} -> {}",
        tr.stats.steps,
        tr.stats.rejected,
        tr.stats.factorizations,
        out.display()
    ))
}

pub fn cmd_compare(full: &Path, reduced: &Path, out: Option<&PathBuf>) -> Result<String, CliError> {
    let a = Trajectory::load_csv(full)?;
    let b = Trajectory::load_csv(reduced)?;
    let err = output_error(&a, &b)?;
    if let Some(path) = out {
        write(path, &err.to_csv(&a.times))?;
    }
    Ok(format!("max_abs_error = {:.6e}, rel_linf = {:.6e}", err.max_abs, err.rel_linf))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum MomentKind {
    W1,
    W2,
    W3,
}

pub fn cmd_moments(d: &DrivenSystem, kind: MomentKind, s0: f64, order: usize, lyap_tol: f64) -> Result<String, CliError> {
    let set: MomentSet = match kind {
        MomentKind::W1 => {
            let b = nalgebra::DMatrix::from_column_slice(d.dim(), 1, d.b.as_slice());
            let ks = linear_moments(&d.e, &d.a, &b, s0, order)?;
            let mut s = format!("# s0 = {s0:.17e}, order = {order}\n");
            for (i, k) in ks.iter().enumerate() {
                s.push_str(&format!("[k {i}]\n"));
                for v in k.column(0).iter().take(d.n_x) {
                    s.push_str(&format!("{v:.17e}\n"));
                }
            }
            return Ok(s);
        }
        MomentKind::W2 => w2_moments(d, s0, order, lyap_tol)?,
        MomentKind::W3 => w3_moments(d, s0, order, lyap_tol)?,
    };
    Ok(set.dump(Some(d.n_x)))
}
