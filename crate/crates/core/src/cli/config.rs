use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use super::spec::{FieldSpec, PotentialSpec};
use crate::error::{FracError, Result};
use crate::model::{validate_np, validate_s, LimitModel, NormFlavor, Params};
use crate::quad::EngineSpec;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    Constants,
    #[default]
    Energy,
    Scan,
    Perimeter,
    Audit,
    Verify,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Profile {
    #[default]
    Quick,
    Full,
}

/// Everything a run depends on. Two runs with equal configs write
/// byte-identical output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub command: Command,
    pub field: FieldSpec,
    pub potential: PotentialSpec,
    pub n: usize,
    pub p: f64,
    pub s: Option<f64>,
    pub s_grid: Vec<f64>,
    pub norm_flavor: NormFlavor,
    pub engine: EngineSpec,
    pub model: LimitModel,
    /// Pair count for `audit`.
    pub samples: u64,
    pub profile: Profile,
    pub out: Option<PathBuf>,
    pub format: OutputFormat,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            command: Command::Energy,
            field: FieldSpec::Gaussian { width: 1.0 },
            potential: PotentialSpec::Zero,
            n: 1,
            p: 2.0,
            s: None,
            s_grid: Vec::new(),
            norm_flavor: NormFlavor::Euclid,
            engine: EngineSpec::default(),
            model: LimitModel::default(),
            samples: 1_000_000,
            profile: Profile::Quick,
            out: None,
            format: OutputFormat::Csv,
        }
    }
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| FracError::Config(format!("config file: {e}")))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    /// All s values the command will use: `s` first, then the grid.
    pub fn s_values(&self) -> Vec<f64> {
        self.s.iter().copied().chain(self.s_grid.iter().copied()).collect()
    }

    pub fn params(&self, s: f64) -> Result<Params> {
        Ok(Params::new(self.n, self.p, s)?.with_flavor(self.norm_flavor))
    }

    /// Checks every numeric input before any computation starts.
    pub fn validate(&self) -> Result<()> {
        validate_np(self.n, self.p)?;
        for s in self.s_values() {
            validate_s(s)?;
        }
        let needs_engine = !matches!(self.command, Command::Constants | Command::Verify | Command::Audit);
        if needs_engine {
            self.engine.validate()?;
            self.field.build(self.n)?;
            self.potential.build(self.n)?;
        }
        match self.command {
            Command::Energy if self.s.is_none() => Err(FracError::Config("energy needs --s".into())),
            Command::Scan if self.s.is_some() => Err(FracError::Config("scan takes --s-grid, not --s".into())),
            Command::Perimeter => {
                if self.field.region().is_none() {
                    return Err(FracError::Config("perimeter needs an indicator field".into()));
                }
                match (self.s.is_some(), self.s_grid.is_empty()) {
                    (true, true) | (false, false) => Ok(()),
                    _ => Err(FracError::Config("perimeter takes exactly one of --s or --s-grid".into())),
                }
            }
            Command::Audit => {
                if self.samples == 0 {
                    return Err(FracError::Config("audit needs --samples >= 1".into()));
                }
                self.field.build(self.n)?;
                self.potential.build(self.n)?;
                Ok(())
            }
            _ => Ok(()),
        }
    }
}
