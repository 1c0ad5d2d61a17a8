//! File formats: model files, potential files, and run configurations.
//! A run is a single JSON config naming the instance files and parameters;
//! paths inside a config resolve relative to the config file's directory.

use crate::error::{Result, ShiftError};
use crate::potential::{CountableModel, Potential, TailEnvelope};
use crate::shift::{parse_word, MarkovShift};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::sync::Arc;

/// Model file: `{ "alphabet_size": N, "edges": [[a,b],...] }`,
/// `{ "alphabet_size": N, "full": true }`, or the countable marker
/// `{ "countable": true, "full": true }` whose truncation level comes from
/// the potential's tail envelope. `metric_base` defaults to 0.5.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ModelFile {
    #[serde(default)]
    pub alphabet_size: Option<u32>,
    #[serde(default)]
    pub full: bool,
    #[serde(default)]
    pub edges: Option<Vec<(u32, u32)>>,
    #[serde(default)]
    pub metric_base: Option<f64>,
    #[serde(default)]
    pub countable: bool,
}

impl ModelFile {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Ok(serde_json::from_str(&text)?)
    }

    pub fn build_finite(&self) -> Result<Arc<MarkovShift>> {
        let n = self.alphabet_size.ok_or_else(|| {
            ShiftError::Config("finite model needs alphabet_size".into())
        })?;
        let mut table = vec![vec![self.full; n as usize]; n as usize];
        if let Some(edges) = &self.edges {
            for &(a, b) in edges {
                if a >= n || b >= n {
                    return Err(ShiftError::SymbolOutOfRange {
                        symbol: a.max(b),
                        alphabet_size: n,
                    });
                }
                table[a as usize][b as usize] = true;
            }
        }
        Ok(Arc::new(MarkovShift::new(
            table,
            self.metric_base.unwrap_or(0.5),
        )?))
    }
}

/// Potential file: either an explicit table
/// `{ "range": k, "values": { "word": v, ... } }` or a built-in countable
/// family `{ "rule": "linear_symbol_penalty", "slope": c }` with an optional
/// envelope override and declared Var_1 bound.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PotentialFile {
    #[serde(default)]
    pub range: Option<u32>,
    #[serde(default)]
    pub values: Option<BTreeMap<String, f64>>,
    #[serde(default)]
    pub rule: Option<String>,
    #[serde(default)]
    pub slope: Option<f64>,
    #[serde(flatten, default)]
    pub envelope: Option<TailEnvelope>,
    #[serde(default)]
    pub declared_var1: Option<f64>,
}

impl PotentialFile {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Ok(serde_json::from_str(&text)?)
    }

    pub fn is_rule(&self) -> bool {
        self.rule.is_some()
    }

    pub fn build_table(&self, shift: &Arc<MarkovShift>) -> Result<Potential> {
        let range = self
            .range
            .ok_or_else(|| ShiftError::Config("table potential needs range".into()))?;
        let values = self
            .values
            .as_ref()
            .ok_or_else(|| ShiftError::Config("table potential needs values".into()))?;
        let mut table = BTreeMap::new();
        for (word_str, &v) in values {
            table.insert(parse_word(word_str)?, v);
        }
        Potential::new(Arc::clone(shift), range, table)
    }

    pub fn build_rule(&self) -> Result<CountableModel> {
        match self.rule.as_deref() {
            Some("linear_symbol_penalty") => {
                let slope = self.slope.ok_or_else(|| {
                    ShiftError::Config("linear_symbol_penalty needs slope".into())
                })?;
                let mut model = CountableModel::linear_symbol_penalty(slope);
                if let Some(env) = &self.envelope {
                    model.envelope = env.clone();
                }
                if self.declared_var1.is_some() {
                    model.declared_var1 = self.declared_var1;
                }
                Ok(model)
            }
            Some(other) => Err(ShiftError::Config(format!("unknown rule {other:?}"))),
            None => Err(ShiftError::Config("potential file has neither values nor rule".into())),
        }
    }
}

/// A complete experiment specification.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunConfig {
    pub model: PathBuf,
    pub potential: PathBuf,
    #[serde(default = "default_beta_grid")]
    pub beta_grid: Vec<f64>,
    #[serde(default)]
    pub cylinders: Vec<String>,
    #[serde(default)]
    pub tracked_words: Vec<String>,
    #[serde(default = "default_tolerance")]
    pub tolerance: f64,
    #[serde(default = "default_max_iter")]
    pub max_iter: usize,
    #[serde(default = "default_truncation_epsilon")]
    pub truncation_epsilon: f64,
    #[serde(default = "default_max_period")]
    pub max_period: usize,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    #[serde(default = "default_format")]
    pub format: String,
}

fn default_beta_grid() -> Vec<f64> {
    vec![4.0, 8.0, 16.0, 32.0, 64.0, 128.0, 256.0, 512.0]
}
fn default_tolerance() -> f64 {
    1e-12
}
fn default_max_iter() -> usize {
    100_000
}
fn default_truncation_epsilon() -> f64 {
    1e-6
}
fn default_max_period() -> usize {
    6
}
fn default_output_dir() -> PathBuf {
    PathBuf::from("out")
}
fn default_format() -> String {
    "csv".into()
}

impl RunConfig {
    /// Load a config and resolve its file paths against its own directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let mut cfg: RunConfig = serde_json::from_str(&text)?;
        let base = path.parent().unwrap_or(Path::new("."));
        if cfg.model.is_relative() {
            cfg.model = base.join(&cfg.model);
        }
        if cfg.potential.is_relative() {
            cfg.potential = base.join(&cfg.potential);
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.tolerance > 0.0) {
            return Err(ShiftError::Config("tolerance must be positive".into()));
        }
        if !(self.truncation_epsilon > 0.0) {
            return Err(ShiftError::Config(
                "truncation_epsilon must be positive".into(),
            ));
        }
        for pair in self.beta_grid.windows(2) {
            if !(pair[1] > pair[0]) {
                return Err(ShiftError::Config("beta_grid must be increasing".into()));
            }
        }
        if self.beta_grid.is_empty() {
            return Err(ShiftError::Config("beta_grid must be nonempty".into()));
        }
        self.format.parse::<crate::sweep::EmitFormat>()?;
        Ok(())
    }

    pub fn parsed_cylinders(&self) -> Result<Vec<Vec<u32>>> {
        self.cylinders.iter().map(|s| parse_word(s)).collect()
    }

    pub fn parsed_tracked_words(&self) -> Result<Vec<Vec<u32>>> {
        self.tracked_words.iter().map(|s| parse_word(s)).collect()
    }
}

/// The instance a config names, after truncation when countable.
pub struct LoadedInstance {
    pub shift: Arc<MarkovShift>,
    pub potential: Potential,
    /// Truncation level for countable models.
    pub truncation_level: Option<u32>,
    pub envelope: Option<TailEnvelope>,
    pub declared_var1: Option<f64>,
}

impl LoadedInstance {
    pub fn load(config: &RunConfig) -> Result<Self> {
        let model = ModelFile::load(&config.model)?;
        let pot_file = PotentialFile::load(&config.potential)?;
        if model.countable || pot_file.is_rule() {
            if !model.full {
                return Err(ShiftError::Config(
                    "countable models currently support full adjacency only".into(),
                ));
            }
            let rule = pot_file.build_rule()?;
            let n = match model.alphabet_size {
                Some(n) => n,
                None => rule
                    .envelope
                    .truncation_level(config.truncation_epsilon)?
                    .max(1) as u32,
            };
            let envelope = rule.envelope.clone();
            let declared_var1 = rule.declared_var1;
            let (shift, potential) = rule.truncate(n)?;
            Ok(Self {
                shift,
                potential,
                truncation_level: Some(n),
                envelope: Some(envelope),
                declared_var1,
            })
        } else {
            let shift = model.build_finite()?;
            let potential = pot_file.build_table(&shift)?;
            Ok(Self {
                shift,
                potential,
                truncation_level: None,
                envelope: None,
                declared_var1: None,
            })
        }
    }
}
