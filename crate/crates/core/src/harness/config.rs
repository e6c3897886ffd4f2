//! Experiment configuration, read from TOML.
//!
//! ```toml
//! experiment = "independence"
//! seed = 7
//! threads = 4
//!
//! [grid]
//! dim = 1
//! points = 1024
//! half_period = 16.0
//!
//! [scales]
//! per_octave = 8
//! octaves = 5
//!
//! [exponents]
//! alpha = { kind = "sine", base = 0.5, amplitude = 0.3, frequency = 4.0 }
//! p = { kind = "constant", value = 2.0 }
//! q = { kind = "constant", value = 2.0 }
//!
//! [corpus]
//! factor = 1.0
//!
//! [peetre]
//! a = 2.5            # default n/p⁻ + 1
//!
//! [local_means]
//! moments = 3
//! radius = 1.0
//!
//! [thresholds]
//! default = 50.0
//! independence = 20.0
//! ```

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exponent::ExponentFamily;
use crate::grid::{GridSpec, ScaleGrid};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridConfig {
    pub dim: usize,
    pub points: usize,
    pub half_period: f64,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self { dim: 1, points: 1024, half_period: 16.0 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScalesConfig {
    pub per_octave: usize,
    pub octaves: usize,
}

impl Default for ScalesConfig {
    fn default() -> Self {
        Self { per_octave: 8, octaves: 5 }
    }
}

/// `(α, p, q)` families.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExponentTriple {
    pub alpha: ExponentFamily,
    pub p: ExponentFamily,
    pub q: ExponentFamily,
}

impl Default for ExponentTriple {
    fn default() -> Self {
        Self::preset("constant").expect("known preset")
    }
}

impl ExponentTriple {
    pub const PRESETS: [&'static str; 3] = ["constant", "sine-alpha", "sine-p"];

    /// `constant`: `α = 1/2, p = q = 2`; `sine-alpha`: `α = 1/2 + 0.3 sin(4πx/L)`;
    /// `sine-p`: `p = 2 + 0.5 sin(4πx/L)`.
    pub fn preset(name: &str) -> Result<Self> {
        let c = |value| ExponentFamily::Constant { value };
        let sine = |base, amplitude| ExponentFamily::Sine { base, amplitude, frequency: 4.0 };
        match name {
            "constant" => Ok(Self { alpha: c(0.5), p: c(2.0), q: c(2.0) }),
            "sine-alpha" => Ok(Self { alpha: sine(0.5, 0.3), p: c(2.0), q: c(2.0) }),
            "sine-p" => Ok(Self { alpha: c(0.5), p: sine(2.0, 0.5), q: c(2.0) }),
            other => {
                Err(Error::Config(format!("unknown exponent preset `{other}` (expected one of {:?})", Self::PRESETS)))
            }
        }
    }

    pub fn label(&self) -> String {
        format!("α={} p={} q={}", self.alpha.label(), self.p.label(), self.q.label())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CorpusConfig {
    /// Every entry is multiplied by this factor.
    pub factor: f64,
}

impl Default for CorpusConfig {
    fn default() -> Self {
        Self { factor: 1.0 }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PeetreConfig {
    /// Defaults to `n/p⁻ + 1`.
    pub a: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LocalMeansConfig {
    pub moments: i32,
    pub radius: f64,
}

impl Default for LocalMeansConfig {
    fn default() -> Self {
        Self { moments: 3, radius: 1.0 }
    }
}

/// Spread thresholds: `default`, plus overrides keyed by experiment name.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Thresholds {
    pub default: f64,
    #[serde(flatten)]
    pub per_experiment: BTreeMap<String, f64>,
}

impl Default for Thresholds {
    fn default() -> Self {
        Self { default: 50.0, per_experiment: BTreeMap::new() }
    }
}

impl Thresholds {
    pub fn for_experiment(&self, name: &str) -> f64 {
        self.per_experiment.get(name).copied().unwrap_or(self.default)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub experiment: Option<String>,
    pub seed: u64,
    pub threads: usize,
    pub grid: GridConfig,
    pub scales: ScalesConfig,
    pub exponents: ExponentTriple,
    pub corpus: CorpusConfig,
    pub peetre: PeetreConfig,
    pub local_means: LocalMeansConfig,
    pub thresholds: Thresholds,
}

impl Default for Config {
    fn default() -> Self {
        Self {
            experiment: None,
            seed: 7,
            threads: 4,
            grid: GridConfig::default(),
            scales: ScalesConfig::default(),
            exponents: ExponentTriple::default(),
            corpus: CorpusConfig::default(),
            peetre: PeetreConfig::default(),
            local_means: LocalMeansConfig::default(),
            thresholds: Thresholds::default(),
        }
    }
}

impl Config {
    pub fn from_toml(text: &str) -> Result<Self> {
        let config: Self = toml::from_str(text)?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_toml(&std::fs::read_to_string(path)?)
    }

    pub fn grid_spec(&self) -> Result<GridSpec> {
        GridSpec::new(self.grid.dim, self.grid.points, self.grid.half_period)
    }

    pub fn scale_grid(&self) -> Result<ScaleGrid> {
        ScaleGrid::new(self.scales.per_octave, self.scales.octaves)
    }

    pub fn validate(&self) -> Result<()> {
        let spec = self.grid_spec()?;
        self.scale_grid()?.ensure_resolvable(&spec)?;
        if self.threads == 0 {
            return Err(Error::Config("threads must be at least 1".into()));
        }
        if !(self.corpus.factor.is_finite() && self.corpus.factor != 0.0) {
            return Err(Error::Config(format!("corpus factor must be finite and nonzero, got {}", self.corpus.factor)));
        }
        let thresholds = std::iter::once(&self.thresholds.default).chain(self.thresholds.per_experiment.values());
        for &t in thresholds {
            if !(t >= 1.0) {
                return Err(Error::Config(format!("spread thresholds must be >= 1, got {t}")));
            }
        }
        Ok(())
    }
}
