//! Request and response bodies of the v1 JSON interface.
//!
//! Every response type deserializes as well as serializes, so clients (and the
//! CLI tests) can parse what the service emits.

use lifecover::config::{ConfigDocument, PremiumBlock};
use lifecover::model::Scheme;
use lifecover::policy::{PropertyCheck, SweepParameter, SweepRow};
use lifecover::ruin::RuinReport;
use serde::{Deserialize, Serialize};

pub const SCHEMA: &str = "v1";
pub const DOLLARS_PER_UNIT: f64 = 50_000.0;
pub const UNITS_NOTE: &str =
    "money is in units of $50,000; money fields carry both `units` and `dollars`, rates are per year";

/// Largest grid a single sweep request may ask for.
pub const MAX_SWEEP_POINTS: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Money {
    pub units: f64,
    pub dollars: f64,
}

impl Money {
    pub fn new(units: f64) -> Self {
        Self {
            units,
            dollars: units * DOLLARS_PER_UNIT,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Units {
    pub dollars_per_unit: f64,
    pub note: String,
}

impl Default for Units {
    fn default() -> Self {
        Self {
            dollars_per_unit: DOLLARS_PER_UNIT,
            note: UNITS_NOTE.to_string(),
        }
    }
}

/// The parameters as the solver accepted them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidatedParams {
    pub r: f64,
    pub mu: f64,
    pub sigma: f64,
    /// `((mu - r)/sigma)^2 / 2`.
    pub m: f64,
    pub lambda_x: f64,
    pub lambda_y: f64,
    pub income_x: Money,
    pub income_y: Money,
    pub alpha: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wealth: Option<Money>,
    pub premium: PremiumBlock,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuoteView {
    pub scheme: Scheme,
    pub loading: f64,
    /// `H` per unit of benefit for the single scheme, `h` per unit per year for the continuous one.
    pub rate: f64,
    /// Probability that the insurer loses money on the contract.
    pub loss_probability: f64,
}

/// Consumption `c = r w + intercept`, with `w` the wealth after any up-front premium.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConsumptionRule {
    pub rate_on_wealth: f64,
    pub intercept_before_first_death: Money,
    pub intercept_x_survives: Money,
    pub intercept_y_survives: Money,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoefficientView {
    pub k: f64,
    pub ln_k: f64,
    pub relative_residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolicyView {
    pub scheme: Scheme,
    pub benefit: Money,
    /// Lump sum for the single scheme, per year for the continuous one.
    pub premium: Money,
    pub investment: Money,
    pub consumption: ConsumptionRule,
    pub consumption_jump_x: Money,
    pub consumption_jump_y: Money,
    pub drift: Money,
    /// `null` when no risk aversion makes insurance worth buying.
    pub alpha_threshold: Option<f64>,
    pub coefficient: CoefficientView,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial_consumption: Option<Money>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ruin: Option<RuinReport>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveResponse {
    pub schema: String,
    pub units: Units,
    pub validated: ValidatedParams,
    pub quotes: Vec<QuoteView>,
    pub policies: Vec<PolicyView>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ElicitRequest {
    pub loss: f64,
    pub p: f64,
    pub willingness_to_pay: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ElicitResponse {
    pub schema: String,
    pub units: Units,
    pub loss: Money,
    pub p: f64,
    pub willingness_to_pay: Money,
    pub expected_loss: Money,
    pub alpha: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RuinView {
    pub scheme: Scheme,
    pub initial_consumption: Money,
    pub report: RuinReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RuinResponse {
    pub schema: String,
    pub units: Units,
    pub validated: ValidatedParams,
    pub wealth: Money,
    pub results: Vec<RuinView>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepRequest {
    pub scenario: ConfigDocument,
    pub parameter: SweepParameter,
    pub from: f64,
    pub to: f64,
    pub steps: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResponse {
    pub schema: String,
    pub units: Units,
    pub validated: ValidatedParams,
    pub parameter: SweepParameter,
    pub single_loading: f64,
    pub continuous_loading: f64,
    pub rows: Vec<SweepRow>,
    pub checks: Vec<PropertyCheck>,
    pub all_hold: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorDetail {
    pub kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub field: Option<String>,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorResponse {
    pub schema: String,
    pub error: ErrorDetail,
}
