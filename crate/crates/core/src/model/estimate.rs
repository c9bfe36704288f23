use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Mc,
    Det,
    Split,
}

impl Method {
    pub fn as_str(&self) -> &'static str {
        match self {
            Method::Mc => "mc",
            Method::Det => "det",
            Method::Split => "split",
        }
    }
}

impl std::str::FromStr for Method {
    type Err = crate::FracError;

    fn from_str(s: &str) -> crate::Result<Self> {
        match s {
            "mc" => Ok(Method::Mc),
            "det" => Ok(Method::Det),
            "split" => Ok(Method::Split),
            other => Err(crate::FracError::Config(format!("unknown method `{other}`"))),
        }
    }
}

/// Evaluation-count record.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Budget {
    /// Monte Carlo samples drawn (0 for deterministic engines).
    pub samples: u64,
    /// Integrand evaluations.
    pub evaluations: u64,
}

/// One evaluation of E_{s,p,A}(u) with its error budget.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnergyEstimate {
    pub value: f64,
    /// One standard error; zero for deterministic engines.
    pub stat_error: f64,
    /// Rigorous bound on the far-field mass beyond `r_max`.
    pub trunc_error: f64,
    pub method: Method,
    pub budget: Budget,
    pub seed: Option<u64>,
    /// Leading-order near-diagonal mass below `r_min` that was added to `value`.
    pub near_correction: f64,
    pub r_min: f64,
    pub r_max: f64,
    /// Successive deterministic refinement values, coarsest first.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub refinement: Vec<f64>,
}

impl EnergyEstimate {
    pub(crate) fn zero(method: Method, seed: Option<u64>) -> Self {
        EnergyEstimate {
            value: 0.0,
            stat_error: 0.0,
            trunc_error: 0.0,
            method,
            budget: Budget::default(),
            seed,
            near_correction: 0.0,
            r_min: 0.0,
            r_max: 0.0,
            refinement: Vec::new(),
        }
    }

    /// stat + truncation error, the tolerance used when comparing estimates.
    pub fn total_error(&self) -> f64 {
        self.stat_error + self.trunc_error
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LimitModel {
    LinearInS,
    SLogS,
    #[default]
    Richardson,
}

impl std::str::FromStr for LimitModel {
    type Err = crate::FracError;

    fn from_str(s: &str) -> crate::Result<Self> {
        match s {
            "linear_in_s" | "linear" => Ok(LimitModel::LinearInS),
            "s_log_s" => Ok(LimitModel::SLogS),
            "richardson" => Ok(LimitModel::Richardson),
            other => Err(crate::FracError::Config(format!("unknown model `{other}`"))),
        }
    }
}

/// Extrapolated limit of a scan.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LimitFit {
    pub limit: f64,
    /// Standard error of `limit` propagated from the rows' statistical errors.
    pub limit_error: f64,
    pub coefficients: Vec<f64>,
    pub residual: f64,
    pub s_grid: Vec<f64>,
    pub model: LimitModel,
}
