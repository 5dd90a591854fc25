//! Scenarios, Monte-Carlo RMSE/RCRB sweeps and the end-to-end workflow.

mod montecarlo;
mod reproduce;

use serde::{Deserialize, Serialize};

pub use montecarlo::{
    association_distance, run_monte_carlo, run_monte_carlo_with_code, trial_seed, McPoint,
    McReport,
};
pub use reproduce::{crb_improvement, reproduce, CrbImprovement, ReproduceOptions, ReproduceSummary};

use crate::error::{Error, Result};
use crate::model::{ArrayConfig, CodeMatrix, TargetScene};
use crate::relax::EstimatorConfig;
use crate::sequences::CodeFamily;

const FULL_SCENE: &str = include_str!("../../data/full_scene.json");
const SMALL_SCENE: &str = include_str!("../../data/small_scene.json");

fn default_trials() -> usize {
    100
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    #[serde(default)]
    pub name: String,
    pub array: ArrayConfig,
    /// Targets with the noise power of the nominal operating point.
    pub scene: TargetScene,
    pub code: CodeFamily,
    /// Defaults to [`EstimatorConfig::for_array`].
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub estimator: Option<EstimatorConfig>,
    #[serde(default)]
    pub snr_db: Vec<f64>,
    #[serde(default = "default_trials")]
    pub trials: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub target_of_interest: usize,
}

impl Scenario {
    pub fn validate(&self) -> Result<()> {
        self.array.validate()?;
        self.scene.validate()?;
        if self.trials == 0 {
            return Err(Error::InvalidConfig("trials must be at least 1".into()));
        }
        if !self.scene.is_empty() && self.target_of_interest >= self.scene.len() {
            return Err(Error::IndexOutOfRange {
                index: self.target_of_interest,
                len: self.scene.len(),
            });
        }
        self.estimator().validate(&self.array)
    }

    pub fn estimator(&self) -> EstimatorConfig {
        self.estimator
            .clone()
            .unwrap_or_else(|| EstimatorConfig::for_array(&self.array))
    }

    pub fn generate_code(&self) -> Result<CodeMatrix> {
        self.code.generate(self.array.tx_count, self.array.pri_count)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let s: Scenario = serde_json::from_str(text)?;
        s.validate()?;
        Ok(s)
    }

    pub fn load(path: impl AsRef<std::path::Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }
}

/// The 20-target, 10 x 10, N = 64 setup at 10 dB SNR with Zadoff-Chu codes.
/// Target 20 (index 19) sits at 15 deg, w = 0.1 with `b = (1 + j)/(10 sqrt 2)`;
/// the other nineteen come from a fixture approximating the published layout.
pub fn paper_scenario() -> Scenario {
    Scenario::from_json(FULL_SCENE).expect("bundled full-scale scenario is valid")
}

/// Two targets on a 2 x 3 array with N = 16, for quick runs.
pub fn small_scenario() -> Scenario {
    Scenario::from_json(SMALL_SCENE).expect("bundled small scenario is valid")
}
