//! Run configuration (TOML).

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use qbmor::bench::{BenchmarkName, BenchmarkSpec, DiodeLaw};
use qbmor::simulate::IntegratorConfig;

use crate::error::CliError;

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub benchmark: Option<BenchmarkSection>,
    pub bundle: Option<BundleSection>,
    pub reducer: ReducerSection,
    #[serde(default)]
    pub integrator: IntegratorSection,
    #[serde(default)]
    pub output: OutputSection,
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct BenchmarkSection {
    pub name: String,
    pub size: usize,
    #[serde(default = "default_case")]
    pub case: u8,
    #[serde(default = "default_nu")]
    pub nu: f64,
    #[serde(default = "default_diode")]
    pub diode_law: String,
}

fn default_case() -> u8 {
    1
}

fn default_nu() -> f64 {
    0.01
}

fn default_diode() -> String {
    "shifted".into()
}

impl BenchmarkSection {
    pub fn spec(&self) -> Result<BenchmarkSpec, CliError> {
        let name: BenchmarkName = self.name.parse().map_err(|e: qbmor::Error| CliError::Config(e.to_string()))?;
        let law: DiodeLaw = self.diode_law.parse().map_err(|e: qbmor::Error| CliError::Config(e.to_string()))?;
        let spec = BenchmarkSpec {
            name,
            size: self.size,
            nu: self.nu,
            case: self.case,
            diode_law: law,
        };
        spec.validate().map_err(|e| CliError::Config(e.to_string()))?;
        Ok(spec)
    }
}

/// Plant and generator bundles written by `qbmor bench` or by hand.
#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct BundleSection {
    pub system: PathBuf,
    pub generator: PathBuf,
}

/// A single order for every frequency, or one per frequency.
#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(untagged)]
pub enum Orders {
    Uniform(usize),
    PerFrequency(Vec<usize>),
}

impl Orders {
    pub fn expand(&self, count: usize, key: &str) -> Result<Vec<usize>, CliError> {
        match self {
            Orders::Uniform(l) => Ok(vec![*l; count]),
            Orders::PerFrequency(v) if v.len() == count => Ok(v.clone()),
            Orders::PerFrequency(v) => Err(CliError::Config(format!(
                "reducer.{key}: {} entries for {count} frequencies",
                v.len()
            ))),
        }
    }
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct ReducerSection {
    /// assm | assm-q | multm | multm-iw | pod | pod-block
    pub method: String,
    pub freqs: Option<Vec<f64>>,
    /// Number of expansion frequencies taken from IRKA when `freqs` is absent.
    pub irka_count: Option<usize>,
    /// Linear moment orders (AssM).
    pub l_tilde: Option<Orders>,
    /// Second-level moment orders (AssM).
    pub l: Option<Orders>,
    pub tol: Option<f64>,
    pub lyap_tol: Option<f64>,
    pub q1: Option<Orders>,
    pub q2: Option<Orders>,
    /// POD dimension.
    pub n: Option<usize>,
    /// pod-block: (rows, dimension) per block.
    pub blocks: Option<Vec<[usize; 2]>>,
    /// POD training input case; defaults to the benchmark case.
    pub train_case: Option<u8>,
    /// multm-iw: weight ż = −pole·z + u_F, u = z.
    #[serde(default = "default_pole")]
    pub weight_pole: f64,
}

fn default_pole() -> f64 {
    1.0
}

pub const METHODS: [&str; 6] = ["assm", "assm-q", "multm", "multm-iw", "pod", "pod-block"];

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct IntegratorSection {
    #[serde(default = "default_abs")]
    pub abs_tol: f64,
    #[serde(default = "default_rel")]
    pub rel_tol: f64,
    pub t_end: Option<f64>,
    pub max_step: Option<f64>,
    #[serde(default = "default_grid")]
    pub output_grid: usize,
}

fn default_abs() -> f64 {
    1e-8
}

fn default_rel() -> f64 {
    1e-6
}

fn default_grid() -> usize {
    300
}

impl Default for IntegratorSection {
    fn default() -> Self {
        IntegratorSection {
            abs_tol: default_abs(),
            rel_tol: default_rel(),
            t_end: None,
            max_step: None,
            output_grid: default_grid(),
        }
    }
}

impl IntegratorSection {
    pub fn build(&self, default_t_end: f64) -> Result<IntegratorConfig, CliError> {
        let cfg = IntegratorConfig {
            abs_tol: self.abs_tol,
            rel_tol: self.rel_tol,
            t_end: self.t_end.unwrap_or(default_t_end),
            max_step: self.max_step.unwrap_or(f64::INFINITY),
            output_grid: self.output_grid,
        };
        cfg.validate().map_err(|e| CliError::Config(e.to_string()))?;
        Ok(cfg)
    }
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    #[serde(default = "default_dir")]
    pub dir: PathBuf,
    /// Also simulate full and reduced models and write error curves.
    #[serde(default)]
    pub evaluate: bool,
    #[serde(default)]
    pub seed: u64,
}

fn default_dir() -> PathBuf {
    PathBuf::from("qbmor-out")
}

impl Default for OutputSection {
    fn default() -> Self {
        OutputSection {
            dir: default_dir(),
            evaluate: false,
            seed: 0,
        }
    }
}

impl RunConfig {
    pub fn parse(text: &str, path: &str) -> Result<RunConfig, CliError> {
        let mut cfg: RunConfig = toml::from_str(text).map_err(|e| CliError::Config(format!("{path}: {e}")))?;
        cfg.validate()?;
        let base = Path::new(path).parent().map(Path::to_path_buf).unwrap_or_default();
        if let Some(b) = &mut cfg.bundle {
            b.system = base.join(&b.system);
            b.generator = base.join(&b.generator);
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<RunConfig, CliError> {
        let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
            path: path.display().to_string(),
            source,
        })?;
        RunConfig::parse(&text, &path.display().to_string())
    }

    pub fn validate(&self) -> Result<(), CliError> {
        match (&self.benchmark, &self.bundle) {
            (Some(_), Some(_)) => return Err(CliError::Config("give either [benchmark] or [bundle], not both".into())),
            (None, None) => return Err(CliError::Config("missing [benchmark] or [bundle] section".into())),
            (Some(b), None) => {
                b.spec()?;
            }
            _ => {}
        }
        let r = &self.reducer;
        if !METHODS.contains(&r.method.as_str()) {
            return Err(CliError::Config(format!(
                "reducer.method '{}' is not one of {}",
                r.method,
                METHODS.join(", ")
            )));
        }
        let need = |field: bool, key: &str| -> Result<(), CliError> {
            if field {
                Ok(())
            } else {
                Err(CliError::Config(format!("reducer.{key} is required for method '{}'", r.method)))
            }
        };
        let has_freqs = r.freqs.is_some() || r.irka_count.is_some();
        match r.method.as_str() {
            "assm" | "assm-q" => {
                need(has_freqs, "freqs")?;
                need(r.l_tilde.is_some(), "l_tilde")?;
                need(r.l.is_some(), "l")?;
                need(r.tol.is_some(), "tol")?;
            }
            "multm" | "multm-iw" => {
                need(has_freqs, "freqs")?;
                need(r.q1.is_some(), "q1")?;
                need(r.q2.is_some(), "q2")?;
            }
            "pod" => need(r.n.is_some(), "n")?,
            "pod-block" => {
                need(r.blocks.is_some() || r.n.is_some(), "blocks")?;
            }
            _ => unreachable!("method checked above"),
        }
        if r.method.starts_with("pod") && self.bundle.is_some() && r.train_case.is_some() {
            return Err(CliError::Config("reducer.train_case needs a [benchmark] section".into()));
        }
        if !(r.weight_pole > 0.0) {
            return Err(CliError::Config("reducer.weight_pole must be positive".into()));
        }
        Ok(())
    }
}
