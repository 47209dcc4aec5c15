//! Experiment configuration files.

use std::path::PathBuf;

use randdehn_core::chains::{ChainSpec, TamenessMethod};
use randdehn_core::report::Format;
use randdehn_core::{AreaConfig, CombingKind, CorridorParams};
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    Rdehn,
    DehnWorst,
    Deviation,
    Subwalk,
    Tameness,
    CombingCheck,
    Area,
    Fill,
}

/// Everything a run needs. Command-line flags override these keys.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    /// Builtin name or presentation file.
    pub group: String,
    /// Radius budget of the generic word-problem solver.
    pub generic_radius: usize,
    pub chain: ChainSpec,
    pub combing: CombingKind,
    pub n_grid: Vec<usize>,
    pub trials: usize,
    pub seed: u64,
    pub area: AreaConfig,
    pub output: Option<PathBuf>,
    pub format: Option<Format>,
    /// rdehn: basepoints of the supremum, as words.
    pub basepoints: Vec<String>,
    /// rdehn: keep per-trial values in JSON reports.
    pub keep_samples: bool,
    /// rdehn, dehn-worst: also fit `C n^a (ln n)^b` with reference degree.
    pub fit_degree: Option<u32>,
    /// dehn-worst: largest word length.
    pub max_len: usize,
    /// subwalk
    pub c3_grid: Vec<f64>,
    pub r: f64,
    /// tameness
    pub n_max: usize,
    pub tameness: TamenessMethod,
    pub reach_cap: usize,
    /// combing-check
    pub radius: usize,
    /// area
    pub word: Option<String>,
    /// fill: trial index of the sampled path.
    pub trial: u64,
    /// fill: also decompose into corridor loops.
    pub corridor: Option<CorridorParams>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            experiment: Experiment::Rdehn,
            group: "f2".into(),
            generic_radius: 6,
            chain: ChainSpec::Srw,
            combing: CombingKind::Native,
            n_grid: vec![64, 128, 256],
            trials: 100,
            seed: 1,
            area: AreaConfig::default(),
            output: None,
            format: None,
            basepoints: Vec::new(),
            keep_samples: false,
            fit_degree: None,
            max_len: 8,
            c3_grid: vec![4.0, 8.0],
            r: 1.0,
            n_max: 30,
            tameness: TamenessMethod::ExactConvolution,
            reach_cap: 8,
            radius: 4,
            word: None,
            trial: 0,
            corridor: None,
        }
    }
}

impl ExperimentConfig {
    pub fn load(path: &std::path::Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::invalid("config", format!("{}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| CliError::invalid("config", e.to_string()))
    }

    /// Checks the fields the selected experiment uses.
    pub fn validate(&self) -> Result<(), CliError> {
        use Experiment::*;
        let e = self.experiment;
        if matches!(e, Rdehn | Deviation | Subwalk) && self.trials == 0 {
            return Err(CliError::invalid("trials", "must be at least 1"));
        }
        if matches!(e, Rdehn | Subwalk) && self.n_grid.is_empty() {
            return Err(CliError::invalid("n_grid", "must not be empty"));
        }
        if matches!(e, Deviation | Fill) && self.n_grid.len() != 1 {
            return Err(CliError::invalid("n_grid", "needs exactly one step count"));
        }
        if let ChainSpec::LazySrw { laziness } = self.chain {
            if !(0.0..1.0).contains(&laziness) {
                return Err(CliError::invalid("chain.laziness", "must lie in [0, 1)"));
            }
        }
        if e == Subwalk && (self.c3_grid.is_empty() || self.c3_grid.iter().any(|c| c.is_nan() || *c <= 0.0)) {
            return Err(CliError::invalid("c3_grid", "needs positive values"));
        }
        if e == Area && self.word.is_none() {
            return Err(CliError::invalid("word", "required"));
        }
        if e == DehnWorst && self.max_len == 0 {
            return Err(CliError::invalid("max_len", "must be at least 1"));
        }
        Ok(())
    }
}
