//! Experiment files.
//!
//! An experiment file is TOML. Top-level keys hold the scalar settings and
//! each structured setting is a table whose `kind` key selects a variant:
//!
//! ```toml
//! name = "linear100-desk"
//! seed = 2024
//! orders = [12, 13, 14]          # LFSR orders m; chains have 2^m - 1 steps
//! replicates = 20
//! families = ["coordinate"]      # coordinate | square | indicator
//! output = "linear100-desk.csv"  # optional, overridden by --output
//! burn_in_order = 10             # optional LFSR prefix used as burn-in
//! offset = 11                    # optional LFSR offset override
//! minibatch = 10                 # optional minibatch size
//!
//! [model]                        # linear | logistic | crossed | double_well | standard_normal
//! kind = "linear"
//! n = 20
//! d = 100
//! noise_var = 0.25
//! data_seed = 1
//!
//! [schedule]                     # constant {step} | decreasing {first, last, exponent}
//! kind = "constant"
//! step = 0.001
//!
//! [truth]                        # exact | reference {step, iterations, seeds}
//! kind = "exact"
//!
//! [initial]                      # zero | mode {step, iterations} | point {value}
//! kind = "zero"
//! ```

use std::path::{Path, PathBuf};

use lqmc::bench::Experiment;
use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    pub name: String,
    pub seed: u64,
    pub orders: Vec<u32>,
    pub replicates: usize,
    pub families: Vec<lqmc::models::TestFamily>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub burn_in_order: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub offset: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub minibatch: Option<usize>,
    pub model: lqmc::bench::ModelSpec,
    pub schedule: lqmc::bench::ScheduleSpec,
    pub truth: lqmc::bench::TruthSpec,
    pub initial: lqmc::bench::InitialSpec,
}

impl ExperimentSpec {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let spec: Self = toml::from_str(text).map_err(|e| CliError::validation("parse", e.to_string()))?;
        spec.experiment()
            .validate()
            .map_err(|e| CliError::from_core("validation", e))?;
        Ok(spec)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::validation("read", format!("{}: {e}", path.display())))?;
        Self::parse(&text).map_err(|e| e.context(&path.display().to_string()))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("experiment specs always serialize")
    }

    pub fn experiment(&self) -> Experiment {
        Experiment {
            name: self.name.clone(),
            seed: self.seed,
            model: self.model.clone(),
            schedule: self.schedule,
            orders: self.orders.clone(),
            replicates: self.replicates,
            families: self.families.clone(),
            truth: self.truth.clone(),
            initial: self.initial.clone(),
            burn_in_order: self.burn_in_order,
            offset: self.offset,
            minibatch: self.minibatch,
        }
    }
}
