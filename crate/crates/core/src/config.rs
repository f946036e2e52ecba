//! Scenario documents in JSON or TOML.
//!
//! ```toml
//! r = 0.02
//! mu = 0.06
//! sigma = 0.2
//! lambda_x = 0.04
//! lambda_y = 0.03
//! income_x = 2.0
//! income_y = 1.5
//! alpha = 2.0
//! wealth = 10.0
//!
//! [premium]
//! scheme = "both"
//! loading = 0.0
//! ```

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{
    calibrate_to_loss_probability, continuous_premium, quote_from_rate, single_premium, HouseholdParams, MarketParams,
    PremiumQuote, Scheme,
};

/// Which premium schemes a scenario prices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SchemeChoice {
    Single,
    Continuous,
    #[default]
    Both,
}

impl SchemeChoice {
    pub fn includes(self, scheme: Scheme) -> bool {
        matches!(
            (self, scheme),
            (SchemeChoice::Both, _)
                | (SchemeChoice::Single, Scheme::Single)
                | (SchemeChoice::Continuous, Scheme::Continuous)
        )
    }
}

/// How premiums are set: exactly one of `loading`, `loss_probability`, `rate`.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PremiumBlock {
    #[serde(default)]
    pub scheme: SchemeChoice,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub loading: Option<f64>,
    /// Loading for the continuous scheme when it differs from `loading`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub continuous_loading: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub loss_probability: Option<f64>,
    /// `H` or `h` directly; needs a single scheme.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rate: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigDocument {
    pub r: f64,
    pub mu: f64,
    pub sigma: f64,
    pub lambda_x: f64,
    pub lambda_y: f64,
    pub income_x: f64,
    pub income_y: f64,
    pub alpha: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wealth: Option<f64>,
    pub premium: PremiumBlock,
}

/// Validated parameters and the quotes they imply.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Scenario {
    pub market: MarketParams,
    pub household: HouseholdParams,
    pub single: Option<PremiumQuote>,
    pub continuous: Option<PremiumQuote>,
    pub wealth: Option<f64>,
}

impl Scenario {
    pub fn quotes(&self) -> impl Iterator<Item = &PremiumQuote> {
        self.single.iter().chain(self.continuous.iter())
    }
}

impl ConfigDocument {
    pub fn from_json_str(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| Error::Document(e.to_string()))
    }

    pub fn from_toml_str(s: &str) -> Result<Self> {
        toml::from_str(s).map_err(|e| Error::Document(e.to_string()))
    }

    /// Load a document, choosing the format from the file extension.
    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Document(format!("cannot read {}: {e}", path.display())))?;
        match path.extension().and_then(|e| e.to_str()) {
            Some("json") => Self::from_json_str(&text),
            Some("toml") => Self::from_toml_str(&text),
            _ => Err(Error::Document(format!(
                "{}: expected a .json or .toml extension",
                path.display()
            ))),
        }
    }

    pub fn resolve(&self) -> Result<Scenario> {
        let market = MarketParams::new(self.r, self.mu, self.sigma)?;
        let household = HouseholdParams::new(self.lambda_x, self.lambda_y, self.income_x, self.income_y, self.alpha)?;
        if let Some(w) = self.wealth {
            if !w.is_finite() {
                return Err(Error::invalid("wealth", "must be finite"));
            }
        }
        let p = &self.premium;
        let given = [p.loading.is_some(), p.loss_probability.is_some(), p.rate.is_some()]
            .iter()
            .filter(|b| **b)
            .count();
        if given != 1 {
            return Err(Error::invalid(
                "premium",
                "give exactly one of `loading`, `loss_probability`, `rate`",
            ));
        }
        if p.continuous_loading.is_some() && p.loading.is_none() {
            return Err(Error::invalid(
                "premium.continuous_loading",
                "only valid together with `loading`",
            ));
        }
        let want = |s| p.scheme.includes(s);
        let (single, continuous) = if let Some(theta) = p.loading {
            let single = want(Scheme::Single)
                .then(|| single_premium(&market, &household, theta))
                .transpose()?;
            let continuous = want(Scheme::Continuous)
                .then(|| continuous_premium(&market, &household, p.continuous_loading.unwrap_or(theta)))
                .transpose()?;
            (single, continuous)
        } else if let Some(q) = p.loss_probability {
            let single = want(Scheme::Single)
                .then(|| calibrate_to_loss_probability(&market, &household, q, Scheme::Single))
                .transpose()?;
            let continuous = want(Scheme::Continuous)
                .then(|| calibrate_to_loss_probability(&market, &household, q, Scheme::Continuous))
                .transpose()?;
            (single, continuous)
        } else {
            let rate = p.rate.unwrap_or_default();
            match p.scheme {
                SchemeChoice::Single => (Some(quote_from_rate(&market, &household, Scheme::Single, rate)?), None),
                SchemeChoice::Continuous => (
                    None,
                    Some(quote_from_rate(&market, &household, Scheme::Continuous, rate)?),
                ),
                SchemeChoice::Both => {
                    return Err(Error::invalid(
                        "premium.rate",
                        "needs `scheme` set to single or continuous",
                    ))
                }
            }
        };
        Ok(Scenario {
            market,
            household,
            single,
            continuous,
            wealth: self.wealth,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const TOML: &str = r#"
r = 0.02
mu = 0.06
sigma = 0.2
lambda_x = 0.04
lambda_y = 0.03
income_x = 2.0
income_y = 1.5
alpha = 2.0

[premium]
loading = 0.0
"#;

    #[test]
    fn toml_and_json_agree() {
        let a = ConfigDocument::from_toml_str(TOML).unwrap();
        let json = serde_json::to_string(&a).unwrap();
        let b = ConfigDocument::from_json_str(&json).unwrap();
        assert_eq!(a, b);
        let s = a.resolve().unwrap();
        assert!((s.single.unwrap().rate() - 7.0 / 9.0).abs() < 1e-15);
        assert!((s.continuous.unwrap().rate() - 0.07).abs() < 1e-15);
    }

    #[test]
    fn unknown_key_rejected() {
        let bad = format!("{TOML}\nextra = 1\n");
        let err = ConfigDocument::from_toml_str(&bad).unwrap_err();
        assert!(err.to_string().contains("extra"), "{err}");
    }

    #[test]
    fn premium_choice_must_be_unique() {
        let mut doc = ConfigDocument::from_toml_str(TOML).unwrap();
        doc.premium.loss_probability = Some(0.3);
        assert!(doc.resolve().is_err());
    }

    #[test]
    fn explicit_rate_above_one_rejected() {
        let mut doc = ConfigDocument::from_toml_str(TOML).unwrap();
        doc.premium = PremiumBlock {
            scheme: SchemeChoice::Single,
            rate: Some(1.2),
            ..Default::default()
        };
        assert!(matches!(doc.resolve(), Err(Error::PremiumNotViable { .. })));
    }
}
