use std::path::Path;

use radshoot_core::scan::Theorem5Config;
use radshoot_core::stats::log_space;
use radshoot_core::{ProblemSpec, Tolerances};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::CliError;

pub const SCHEMA: &str = "1";

/// Log-spaced alpha grid. `jitter` in `[0, 1)` moves interior points by up to half a
/// grid step (in log scale), drawn from the config seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub min: f64,
    pub max: f64,
    pub points: usize,
    #[serde(default)]
    pub jitter: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub schema: String,
    pub problem: ProblemSpec,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alphas: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<GridSpec>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub horizon: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub radii: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub construction: Option<Theorem5Config>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<String>,
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        let cfg: RunConfig = serde_json::from_str(text)?;
        if cfg.schema != SCHEMA {
            return Err(CliError::Config(format!(
                "unsupported schema {:?}, expected {SCHEMA:?}",
                cfg.schema
            )));
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|source| CliError::ConfigRead {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    /// Alphas for per-shot commands: explicit `alphas` win over `grid`.
    pub fn alpha_values(&self) -> Result<Vec<f64>, CliError> {
        if let Some(a) = &self.alphas {
            if a.is_empty() {
                return Err(CliError::Config("alphas is empty".into()));
            }
            return Ok(a.clone());
        }
        match &self.grid {
            Some(g) => g.values(self.seed),
            None => Err(CliError::Config(
                "config needs either alphas or grid".into(),
            )),
        }
    }
}

impl RunConfig {
    /// Alphas for sweeps: `grid` wins over `alphas`.
    pub fn sweep_values(&self) -> Result<Vec<f64>, CliError> {
        match &self.grid {
            Some(g) => g.values(self.seed),
            None => self.alpha_values(),
        }
    }
}

impl GridSpec {
    pub fn values(&self, seed: u64) -> Result<Vec<f64>, CliError> {
        if !(self.min > 0.0 && self.max > self.min && self.points >= 1) {
            return Err(CliError::Config(format!(
                "bad grid [{}, {}] x {}",
                self.min, self.max, self.points
            )));
        }
        if !(0.0..1.0).contains(&self.jitter) {
            return Err(CliError::Config(format!(
                "grid jitter {} outside [0, 1)",
                self.jitter
            )));
        }
        if self.points == 1 {
            return Ok(vec![self.min]);
        }
        let mut v = log_space(self.min, self.max, self.points);
        if self.jitter > 0.0 {
            let step = (self.max / self.min).ln() / (self.points - 1) as f64;
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let last = v.len() - 1;
            for x in &mut v[1..last] {
                let u: f64 = rng.gen_range(-0.5..0.5);
                *x *= (self.jitter * step * u).exp();
            }
        }
        Ok(v)
    }
}
