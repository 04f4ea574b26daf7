//! Flat key-value scenario configuration (INI-like), one scenario per
//! file. Unknown keys are rejected; every field has a documented
//! default so a config may be as short as `scenario = conservation`.
//!
//! ```text
//! # comment
//! scenario = phase-imprint-rate
//! n        = 256
//! lambda   = -1
//! seed     = 42
//! sweep    = tau: 0.2, 0.1, 0.05, 0.025
//! out      = imprint.csv
//! ```

use std::collections::BTreeMap;
use std::path::PathBuf;

use crate::error::{Error, Result};

/// Fully resolved scenario configuration. A config plus the build
/// determines every number in the output (given the seed).
#[derive(Debug, Clone)]
pub struct ScenarioConfig {
    pub scenario: String,
    /// Spatial dimension (scenarios run d ∈ {1, 2}).
    pub dim: usize,
    /// Grid nodes per axis, power of two; 0 selects the scenario default.
    pub n: usize,
    /// Box half-width L (box geometry only).
    pub half_width: f64,
    /// Nonlinearity strength λ.
    pub lambda: f64,
    /// Regularization floor ε in log(ε + |ψ|²).
    pub epsilon: f64,
    /// Solver timestep; 0 selects the scenario default.
    pub dt: f64,
    /// Seed of the ChaCha8 stream behind all randomness.
    pub seed: u64,
    /// Sweep override: parameter name and values.
    pub sweep: Option<(String, Vec<f64>)>,
    /// CSV output path.
    pub out: Option<PathBuf>,
    /// Record wall-clock times in the CSV (breaks byte-identical
    /// reproducibility; off by default).
    pub timings: bool,
    /// Scenario-specific numeric knobs.
    pub extras: BTreeMap<String, f64>,
}

impl ScenarioConfig {
    /// Defaults shared by every scenario; scenario code overrides the
    /// grid/timestep per its needs when a value is left at 0.
    pub fn new(scenario: &str) -> Self {
        ScenarioConfig {
            scenario: scenario.to_string(),
            dim: 1,
            n: 0,
            half_width: 12.0,
            lambda: -1.0,
            epsilon: 0.0,
            dt: 0.0,
            seed: 42,
            sweep: None,
            out: None,
            timings: false,
            extras: BTreeMap::new(),
        }
    }

    pub fn extra(&self, key: &str, default: f64) -> f64 {
        self.extras.get(key).copied().unwrap_or(default)
    }
}

pub fn parse_config(text: &str) -> Result<ScenarioConfig> {
    let mut pairs: Vec<(String, String)> = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| {
            Error::Config(format!("line {}: expected `key = value`, got `{raw}`", lineno + 1))
        })?;
        pairs.push((k.trim().to_string(), v.trim().to_string()));
    }
    let scenario = pairs
        .iter()
        .find(|(k, _)| k == "scenario")
        .map(|(_, v)| v.clone())
        .ok_or_else(|| Error::Config("missing `scenario = <name>`".into()))?;
    let mut cfg = ScenarioConfig::new(&scenario);
    for (k, v) in pairs {
        match k.as_str() {
            "scenario" => {}
            "dim" => cfg.dim = parse_num(&k, &v)? as usize,
            "n" => cfg.n = parse_num(&k, &v)? as usize,
            "half_width" => cfg.half_width = parse_num(&k, &v)?,
            "lambda" => cfg.lambda = parse_num(&k, &v)?,
            "epsilon" => cfg.epsilon = parse_num(&k, &v)?,
            "dt" => cfg.dt = parse_num(&k, &v)?,
            "seed" => {
                cfg.seed = v
                    .parse::<u64>()
                    .map_err(|_| Error::Config(format!("bad seed `{v}`")))?
            }
            "out" => cfg.out = Some(PathBuf::from(v)),
            "timings" => cfg.timings = v == "true" || v == "1",
            "sweep" => {
                let (name, list) = v.split_once(':').ok_or_else(|| {
                    Error::Config(format!("sweep needs `name: v1, v2, …`, got `{v}`"))
                })?;
                let values: Result<Vec<f64>> = list
                    .split(',')
                    .map(|s| parse_num("sweep value", s.trim()))
                    .collect();
                cfg.sweep = Some((name.trim().to_string(), values?));
            }
            _ => {
                // scenario-specific numeric knob
                cfg.extras.insert(k.clone(), parse_num(&k, &v)?);
            }
        }
    }
    Ok(cfg)
}

fn parse_num(key: &str, v: &str) -> Result<f64> {
    v.parse::<f64>().map_err(|_| Error::Config(format!("bad numeric value for {key}: `{v}`")))
}
