use serde::{Deserialize, Serialize};

use localwave::cascade::CascadeMode;
use localwave::first_stage::Normalization;
use localwave::lambda::{NuPolicy, NumraParams};

use crate::CliError;

fn default_window() -> u32 {
    4
}
fn default_resolution() -> i32 {
    3
}
fn default_tolerance() -> f64 {
    1e-10
}

/// Run configuration: Λ parameters plus the evaluation knobs. Echoed into every report.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    #[serde(flatten)]
    pub params: NumraParams,
    #[serde(default = "default_window")]
    pub window: u32,
    #[serde(default = "default_resolution")]
    pub resolution: i32,
    #[serde(default = "default_tolerance")]
    pub tolerance: f64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub cascade_mode: CascadeMode,
    #[serde(default)]
    pub normalization: Normalization,
    /// Refuse to drop taps that leave Λ while cascading.
    #[serde(default)]
    pub strict: bool,
}

impl RunConfig {
    pub fn validate(&self) -> Result<(), CliError> {
        if !(self.tolerance > 0.0 && self.tolerance.is_finite()) {
            return Err(CliError::Usage(format!("tolerance must be positive, got {}", self.tolerance)));
        }
        if self.window == 0 {
            return Err(CliError::Usage("window must be at least 1".into()));
        }
        if self.resolution < 0 {
            return Err(CliError::Usage("resolution must be non-negative".into()));
        }
        self.params.validate()?;
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum ModeArg {
    Fatherchain,
    Paperliteral,
}

impl From<ModeArg> for CascadeMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Fatherchain => CascadeMode::FatherChain,
            ModeArg::Paperliteral => CascadeMode::PaperLiteral,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum NuArg {
    Scalar,
    Coset,
}

impl From<NuArg> for NuPolicy {
    fn from(n: NuArg) -> Self {
        match n {
            NuArg::Scalar => NuPolicy::ScalarModP,
            NuArg::Coset => NuPolicy::CosetRep,
        }
    }
}
