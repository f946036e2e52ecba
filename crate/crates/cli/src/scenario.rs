//! Merge a scenario document with command-line overrides.

use std::path::Path;

use lifecover::config::{ConfigDocument, PremiumBlock};

use crate::args::Overrides;
use crate::CliError;

fn required(name: &str, file: Option<f64>, flag: Option<f64>) -> Result<f64, CliError> {
    flag.or(file).ok_or_else(|| {
        CliError::input(format!(
            "missing `{name}`: give --config or --{}",
            name.replace('_', "-")
        ))
    })
}

pub fn build_document(config: Option<&Path>, o: &Overrides) -> Result<ConfigDocument, CliError> {
    let base = config
        .map(ConfigDocument::from_path)
        .transpose()
        .map_err(|e| CliError::input(e.to_string()))?;
    let get = |f: fn(&ConfigDocument) -> f64| base.as_ref().map(f);
    let r = required("r", get(|d| d.r), o.r)?;
    let mu = required("mu", get(|d| d.mu), o.mu)?;
    let sigma = required("sigma", get(|d| d.sigma), o.sigma)?;
    let lambda_x = required("lambda_x", get(|d| d.lambda_x), o.lambda_x)?;
    let lambda_y = required("lambda_y", get(|d| d.lambda_y), o.lambda_y)?;
    let income_x = required("income_x", get(|d| d.income_x), o.income_x)?;
    let income_y = required("income_y", get(|d| d.income_y), o.income_y)?;
    let alpha = required("alpha", get(|d| d.alpha), o.alpha)?;
    let mut premium = base.as_ref().map(|b| b.premium.clone());
    if o.loading.is_some() || o.loss_prob.is_some() || o.rate.is_some() {
        let scheme = premium.as_ref().map(|p| p.scheme).unwrap_or_default();
        premium = Some(PremiumBlock {
            scheme,
            loading: o.loading,
            continuous_loading: o.continuous_loading,
            loss_probability: o.loss_prob,
            rate: o.rate,
        });
    }
    let mut premium =
        premium.ok_or_else(|| CliError::input("missing premium: give --config, --loading, --loss-prob or --rate"))?;
    if let Some(s) = o.scheme {
        premium.scheme = s.into();
    }
    Ok(ConfigDocument {
        r,
        mu,
        sigma,
        lambda_x,
        lambda_y,
        income_x,
        income_y,
        alpha,
        wealth: o.wealth.or(base.as_ref().and_then(|b| b.wealth)),
        premium,
    })
}
