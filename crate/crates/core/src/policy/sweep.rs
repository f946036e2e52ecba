use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{optimal_benefit_continuous, optimal_benefit_single};
use crate::error::{Error, Result};
use crate::model::{continuous_premium, single_premium, HouseholdParams, MarketParams, Survivor};

const SLACK: f64 = 1e-9;

/// Parameter varied by a comparative-statics sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepParameter {
    /// Sets both premium loadings to the grid value.
    Theta,
    Alpha,
    #[serde(rename = "I_x", alias = "income_x")]
    IncomeX,
    #[serde(rename = "I_y", alias = "income_y")]
    IncomeY,
    LambdaX,
    LambdaY,
}

impl SweepParameter {
    pub fn label(self) -> &'static str {
        match self {
            SweepParameter::Theta => "theta",
            SweepParameter::Alpha => "alpha",
            SweepParameter::IncomeX => "I_x",
            SweepParameter::IncomeY => "I_y",
            SweepParameter::LambdaX => "lambda_x",
            SweepParameter::LambdaY => "lambda_y",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "theta" => SweepParameter::Theta,
            "alpha" => SweepParameter::Alpha,
            "I_x" | "income_x" => SweepParameter::IncomeX,
            "I_y" | "income_y" => SweepParameter::IncomeY,
            "lambda_x" => SweepParameter::LambdaX,
            "lambda_y" => SweepParameter::LambdaY,
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub value: f64,
    pub d_star: f64,
    pub d_bar_star: f64,
    /// Consumption jumps under the single-premium optimum.
    pub dc_x: f64,
    pub dc_y: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckStatus {
    Holds,
    Violated,
    NotAsserted,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PropertyCheck {
    pub name: String,
    pub status: CheckStatus,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepTable {
    pub parameter: SweepParameter,
    pub rows: Vec<SweepRow>,
    pub checks: Vec<PropertyCheck>,
}

impl SweepTable {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("parameter,value,D_star,D_bar_star,dc_x,dc_y\n");
        for row in &self.rows {
            out.push_str(&format!(
                "{},{},{},{},{},{}\n",
                self.parameter.label(),
                row.value,
                row.d_star,
                row.d_bar_star,
                row.dc_x,
                row.dc_y
            ));
        }
        out
    }

    /// True when no asserted property is violated.
    pub fn all_hold(&self) -> bool {
        self.checks.iter().all(|c| c.status != CheckStatus::Violated)
    }
}

fn row_at(
    market: &MarketParams,
    household: &HouseholdParams,
    loadings: (f64, f64),
    parameter: SweepParameter,
    value: f64,
) -> Result<SweepRow> {
    let (mut theta, mut theta_bar) = loadings;
    let hh = match parameter {
        SweepParameter::Theta => {
            theta = value;
            theta_bar = value;
            *household
        }
        SweepParameter::Alpha => household.with_alpha(value)?,
        SweepParameter::IncomeX => household.with_incomes(value, household.income_y())?,
        SweepParameter::IncomeY => household.with_incomes(household.income_x(), value)?,
        SweepParameter::LambdaX => household.with_hazards(value, household.lambda_y())?,
        SweepParameter::LambdaY => household.with_hazards(household.lambda_x(), value)?,
    };
    let single = single_premium(market, &hh, theta)?;
    let continuous = continuous_premium(market, &hh, theta_bar)?;
    let d_star = optimal_benefit_single(market, &hh, &single);
    let d_bar_star = optimal_benefit_continuous(market, &hh, &continuous);
    let dc_x = super::consumption_jump_at(market, &hh, &single, d_star, Survivor::X)?;
    let dc_y = super::consumption_jump_at(market, &hh, &single, d_star, Survivor::Y)?;
    Ok(SweepRow {
        value,
        d_star,
        d_bar_star,
        dc_x,
        dc_y,
    })
}

fn status(ok: bool) -> CheckStatus {
    if ok {
        CheckStatus::Holds
    } else {
        CheckStatus::Violated
    }
}

fn check(name: &str, ok: bool) -> PropertyCheck {
    PropertyCheck {
        name: name.to_string(),
        status: status(ok),
    }
}

fn not_asserted(name: &str) -> PropertyCheck {
    PropertyCheck {
        name: name.to_string(),
        status: CheckStatus::NotAsserted,
    }
}

fn nonincreasing(xs: &[(f64, f64)]) -> bool {
    xs.windows(2).all(|w| w[1].1 <= w[0].1 + SLACK)
}

fn nondecreasing(xs: &[(f64, f64)]) -> bool {
    xs.windows(2).all(|w| w[1].1 >= w[0].1 - SLACK)
}

/// Strict decrease between consecutive points while the earlier one is positive.
fn strictly_decreasing_while_positive(xs: &[(f64, f64)]) -> bool {
    xs.windows(2).all(|w| w[0].1 <= 0.0 || w[1].1 < w[0].1)
}

/// Sign of divided second differences over triples where all three values are positive.
fn curvature_on_positive(xs: &[(f64, f64)], convex: bool) -> bool {
    xs.windows(3).filter(|w| w.iter().all(|p| p.1 > 0.0)).all(|w| {
        let s1 = (w[1].1 - w[0].1) / (w[1].0 - w[0].0);
        let s2 = (w[2].1 - w[1].1) / (w[2].0 - w[1].0);
        let d2 = (s2 - s1) / (w[2].0 - w[0].0);
        if convex {
            d2 >= -SLACK
        } else {
            d2 <= SLACK
        }
    })
}

fn ordered(household: &HouseholdParams) -> bool {
    let (ix, iy) = (household.income_x(), household.income_y());
    let (lx, ly) = (household.lambda_x(), household.lambda_y());
    (ix >= iy && lx >= ly) || (ix <= iy && lx <= ly)
}

/// Tabulate the optimal benefits and consumption jumps over a parameter grid
/// and check the comparative-statics properties that the model guarantees.
///
/// `loadings` holds the single and continuous premium loadings used at every
/// grid point except in a `Theta` sweep, which overrides both.
pub fn comparative_statics_sweep(
    market: &MarketParams,
    household: &HouseholdParams,
    loadings: (f64, f64),
    parameter: SweepParameter,
    grid: &[f64],
) -> Result<SweepTable> {
    if grid.is_empty() {
        return Err(Error::invalid("grid", "must not be empty"));
    }
    if grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::invalid("grid", "must be strictly increasing"));
    }
    let rows = grid
        .par_iter()
        .map(|&v| row_at(market, household, loadings, parameter, v))
        .collect::<Result<Vec<_>>>()?;

    let single: Vec<(f64, f64)> = rows.iter().map(|r| (r.value, r.d_star)).collect();
    let cont: Vec<(f64, f64)> = rows.iter().map(|r| (r.value, r.d_bar_star)).collect();
    let checks = match parameter {
        SweepParameter::Theta => vec![
            check("D_star nonincreasing in loading", nonincreasing(&single)),
            check(
                "D_star strictly decreasing while positive",
                strictly_decreasing_while_positive(&single),
            ),
            check("D_bar_star nonincreasing in loading", nonincreasing(&cont)),
            check(
                "D_bar_star strictly decreasing while positive",
                strictly_decreasing_while_positive(&cont),
            ),
        ],
        SweepParameter::Alpha => {
            let mut v = vec![
                check("D_star nondecreasing in alpha", nondecreasing(&single)),
                check("D_bar_star nondecreasing in alpha", nondecreasing(&cont)),
            ];
            if ordered(household) {
                v.push(check(
                    "D_star concave in alpha where positive",
                    curvature_on_positive(&single, false),
                ));
                v.push(check(
                    "D_bar_star concave in alpha where positive",
                    curvature_on_positive(&cont, false),
                ));
            } else {
                v.push(not_asserted("D_star concave in alpha where positive"));
                v.push(not_asserted("D_bar_star concave in alpha where positive"));
            }
            v
        }
        SweepParameter::IncomeX | SweepParameter::IncomeY => vec![
            check("D_star nondecreasing in income", nondecreasing(&single)),
            check(
                "D_star convex in income where positive",
                curvature_on_positive(&single, true),
            ),
            check("D_bar_star nondecreasing in income", nondecreasing(&cont)),
            check(
                "D_bar_star convex in income where positive",
                curvature_on_positive(&cont, true),
            ),
        ],
        SweepParameter::LambdaX | SweepParameter::LambdaY => vec![
            not_asserted("D_star monotone in hazard"),
            not_asserted("D_bar_star monotone in hazard"),
        ],
    };
    Ok(SweepTable {
        parameter,
        rows,
        checks,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn base() -> (MarketParams, HouseholdParams) {
        (
            MarketParams::new(0.02, 0.06, 0.2).unwrap(),
            HouseholdParams::new(0.04, 0.03, 2.0, 1.5, 2.0).unwrap(),
        )
    }

    #[test]
    fn theta_sweep_hits_zero() {
        let (mkt, hh) = base();
        let grid: Vec<f64> = (0..28).map(|i| i as f64 * 0.01).collect();
        let t = comparative_statics_sweep(&mkt, &hh, (0.0, 0.0), SweepParameter::Theta, &grid).unwrap();
        assert!(t.all_hold(), "{:?}", t.checks);
        assert_eq!(t.rows.last().unwrap().d_star, 0.0);
        assert!(t.rows[0].d_star > 52.0);
    }

    #[test]
    fn alpha_sweep_approaches_bound() {
        let (mkt, hh) = base();
        let grid: Vec<f64> = (1..=60).map(|i| i as f64 * 0.5).collect();
        let t = comparative_statics_sweep(&mkt, &hh, (0.0, 0.0), SweepParameter::Alpha, &grid).unwrap();
        assert!(t.all_hold(), "{:?}", t.checks);
        let last = t.rows.last().unwrap().d_star;
        assert!(last < 100.0 && last > 95.0, "{last}");
    }

    #[test]
    fn income_sweep_and_csv() {
        let (mkt, hh) = base();
        let grid = [0.5, 1.0, 1.5, 2.0, 2.5, 3.0];
        let t = comparative_statics_sweep(&mkt, &hh, (0.0, 0.0), SweepParameter::IncomeX, &grid).unwrap();
        assert!(t.all_hold());
        let csv = t.to_csv();
        assert!(csv.starts_with("parameter,value,D_star,D_bar_star,dc_x,dc_y\n"));
        assert_eq!(csv.lines().count(), 7);
    }

    #[test]
    fn unsorted_grid_rejected() {
        let (mkt, hh) = base();
        assert!(comparative_statics_sweep(&mkt, &hh, (0.0, 0.0), SweepParameter::Alpha, &[2.0, 1.0]).is_err());
    }
}
