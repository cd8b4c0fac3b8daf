//! Solver configuration files (TOML).
//!
//! ```toml
//! [driver]
//! horizon = 1.0
//! step = 0.001
//! volatility = 1.0
//!
//! [coefficients.sigma]
//! kind = "affine"
//! a = 0.5
//! b = 0.4
//!
//! [coefficients.b]
//! kind = "constant"
//! c = 0.0
//!
//! [barriers]
//! lower = -1.0          # a number or a CSV file
//! upper = "upper.csv"
//!
//! [solver]
//! x0 = 0.0
//! m = 0.5
//! picard_tol = 1e-9
//! max_iters = 200
//! seed = 1
//! ```
//!
//! Relative CSV paths are resolved against the directory of the config file.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use skorokhod_core::regulated::RegulatedPath;
use skorokhod_core::sde::{CoefficientKind, CoefficientSpec, SdeProblem};
use skorokhod_core::semimartingale::{DriverSpec, SemimartingalePath};
use skorokhod_core::two_sided::BarrierPair;

use crate::csv_io;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub driver: DriverSpec,
    pub coefficients: Coefficients,
    pub barriers: Barriers,
    pub solver: SolverConfig,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Coefficients {
    pub sigma: CoefficientConfig,
    pub b: CoefficientConfig,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoefficientConfig {
    #[serde(flatten)]
    pub kind: CoefficientKind,
    /// Defaults to the smallest valid constant.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lipschitz: Option<f64>,
    /// CSV file with the time factor `f(t)`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub time_factor: Option<PathBuf>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum BarrierSource {
    Constant(f64),
    File(PathBuf),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Barriers {
    pub lower: BarrierSource,
    pub upper: BarrierSource,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverConfig {
    pub x0: f64,
    pub m: f64,
    #[serde(default = "default_tol")]
    pub picard_tol: f64,
    #[serde(default = "default_iters")]
    pub max_iters: usize,
    #[serde(default)]
    pub seed: u64,
}

fn default_tol() -> f64 {
    1e-9
}

fn default_iters() -> usize {
    200
}

/// A parsed config with every referenced file loaded.
#[derive(Clone, Debug)]
pub struct LoadedConfig {
    pub config: Config,
    pub sigma_factor: Option<RegulatedPath>,
    pub b_factor: Option<RegulatedPath>,
    pub lower: Option<RegulatedPath>,
    pub upper: Option<RegulatedPath>,
    /// Hex SHA-256 of the canonical JSON form of the config and the
    /// contents of the files it references.
    pub digest: String,
}

impl LoadedConfig {
    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
        let base = path.parent().unwrap_or(Path::new("."));
        Self::parse(&text, base).with_context(|| format!("in {}", path.display()))
    }

    pub fn parse(text: &str, base: &Path) -> anyhow::Result<Self> {
        let config: Config = toml::from_str(text)?;
        config.driver.validate()?;
        let mut files = BTreeMap::new();
        let mut load = |p: &Path| -> anyhow::Result<RegulatedPath> {
            let full = base.join(p);
            let bytes = std::fs::read(&full).with_context(|| format!("cannot read {}", full.display()))?;
            files.insert(p.display().to_string(), hex::encode(Sha256::digest(&bytes)));
            Ok(csv_io::read_path_from(bytes.as_slice(), &full.display().to_string())?)
        };
        let sigma_factor = config.coefficients.sigma.time_factor.as_deref().map(&mut load).transpose()?;
        let b_factor = config.coefficients.b.time_factor.as_deref().map(&mut load).transpose()?;
        let mut barrier = |s: &BarrierSource| match s {
            BarrierSource::Constant(_) => Ok(None),
            BarrierSource::File(p) => load(p).map(Some),
        };
        let lower = barrier(&config.barriers.lower)?;
        let upper = barrier(&config.barriers.upper)?;

        let canonical = serde_json::json!({ "config": &config, "files": files });
        let digest = hex::encode(Sha256::digest(canonical.to_string().as_bytes()));
        let loaded = Self { config, sigma_factor, b_factor, lower, upper, digest };
        loaded.coefficients()?;
        Ok(loaded)
    }

    pub fn coefficients(&self) -> anyhow::Result<(CoefficientSpec, CoefficientSpec)> {
        let make = |c: &CoefficientConfig, f: &Option<RegulatedPath>| -> anyhow::Result<CoefficientSpec> {
            let sup_f = f.as_ref().map_or(1.0, |f| f.slots().fold(0.0_f64, |m, v| m.max(v.abs())));
            let lipschitz = c.lipschitz.unwrap_or(sup_f * c.kind.slope());
            Ok(CoefficientSpec::new(c.kind.clone(), f.clone(), lipschitz)?)
        };
        let sigma = make(&self.config.coefficients.sigma, &self.sigma_factor).context("coefficients.sigma")?;
        let b = make(&self.config.coefficients.b, &self.b_factor).context("coefficients.b")?;
        Ok((sigma, b))
    }

    /// Barriers on `grid` (constants become flat paths).
    pub fn barriers(&self, grid: &[f64]) -> anyhow::Result<BarrierPair> {
        let path = |s: &BarrierSource, loaded: &Option<RegulatedPath>| -> anyhow::Result<RegulatedPath> {
            Ok(match (s, loaded) {
                (BarrierSource::Constant(c), _) => RegulatedPath::constant(grid, *c)?,
                (_, Some(p)) => p.clone(),
                (BarrierSource::File(p), None) => bail!("barrier file {} not loaded", p.display()),
            })
        };
        let l = path(&self.config.barriers.lower, &self.lower)?;
        let u = path(&self.config.barriers.upper, &self.upper)?;
        Ok(BarrierPair::new(&l, &u)?)
    }

    /// The SDE problem for one simulated driver.
    pub fn problem(&self, driver: SemimartingalePath) -> Result<SdeProblem, skorokhod_core::Error> {
        let (sigma, b) = self.coefficients().map_err(core_err)?;
        let barriers = self.barriers(driver.grid()).map_err(core_err)?;
        let s = &self.config.solver;
        SdeProblem::new(s.x0, sigma, b, driver, barriers, s.m, s.picard_tol, s.max_iters)
    }
}

fn core_err(e: anyhow::Error) -> skorokhod_core::Error {
    match e.downcast::<skorokhod_core::Error>() {
        Ok(e) => e,
        Err(e) => skorokhod_core::Error::InvalidArgument(format!("{e:#}")),
    }
}
