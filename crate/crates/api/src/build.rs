//! Response builders shared by the HTTP handlers and the command-line tool.

use lifecover::config::{ConfigDocument, Scenario};
use lifecover::model::{elicit_risk_aversion, PremiumQuote, Survivor};
use lifecover::policy::comparative_statics_sweep;
use lifecover::policy::{self, Phase, PolicySolution};
use lifecover::ruin::{prob_ruin_total, RuinInputs};

use crate::error::ApiError;
use crate::schema::*;

fn validated(doc: &ConfigDocument, s: &Scenario) -> ValidatedParams {
    ValidatedParams {
        r: s.market.r(),
        mu: s.market.mu(),
        sigma: s.market.sigma(),
        m: s.market.m(),
        lambda_x: s.household.lambda_x(),
        lambda_y: s.household.lambda_y(),
        income_x: Money::new(s.household.income_x()),
        income_y: Money::new(s.household.income_y()),
        alpha: s.household.alpha(),
        wealth: s.wealth.map(Money::new),
        premium: doc.premium.clone(),
    }
}

fn quote_view(q: &PremiumQuote) -> QuoteView {
    QuoteView {
        scheme: q.scheme(),
        loading: q.loading(),
        rate: q.rate(),
        loss_probability: q.loss_probability(),
    }
}

fn policy_view(sol: &PolicySolution, wealth: Option<f64>) -> Result<PolicyView, ApiError> {
    let after = |who| Money::new(sol.consumption_rate(0.0, Phase::AfterFirstDeath(who)));
    let ruin = wealth
        .map(|w| prob_ruin_total(&RuinInputs::from_solution(sol, w)))
        .transpose()?;
    Ok(PolicyView {
        scheme: sol.scheme(),
        benefit: Money::new(sol.benefit),
        premium: Money::new(sol.quote.rate() * sol.benefit),
        investment: Money::new(sol.investment),
        consumption: ConsumptionRule {
            rate_on_wealth: sol.market.r(),
            intercept_before_first_death: Money::new(sol.consumption_rate(0.0, Phase::BeforeFirstDeath)),
            intercept_x_survives: after(Survivor::X),
            intercept_y_survives: after(Survivor::Y),
        },
        consumption_jump_x: Money::new(sol.consumption_jump_x),
        consumption_jump_y: Money::new(sol.consumption_jump_y),
        drift: Money::new(sol.drift),
        alpha_threshold: sol.alpha_threshold.is_finite().then_some(sol.alpha_threshold),
        coefficient: CoefficientView {
            k: sol.coefficient.k,
            ln_k: sol.coefficient.ln_k,
            relative_residual: sol.coefficient.relative_residual(&sol.market),
        },
        initial_consumption: wealth.map(|w| Money::new(sol.initial_consumption(w))),
        ruin,
    })
}

/// Solved policies for every scheme the scenario prices.
pub fn solve_scenario(s: &Scenario) -> Result<Vec<PolicySolution>, ApiError> {
    s.quotes()
        .map(|q| policy::solve(&s.market, &s.household, q).map_err(ApiError::from))
        .collect()
}

pub fn build_solve_response(doc: &ConfigDocument) -> Result<SolveResponse, ApiError> {
    let scenario = doc.resolve()?;
    let policies = solve_scenario(&scenario)?
        .iter()
        .map(|sol| policy_view(sol, scenario.wealth))
        .collect::<Result<_, _>>()?;
    Ok(SolveResponse {
        schema: SCHEMA.into(),
        units: Units::default(),
        validated: validated(doc, &scenario),
        quotes: scenario.quotes().map(quote_view).collect(),
        policies,
    })
}

pub fn build_elicit_response(req: &ElicitRequest) -> Result<ElicitResponse, ApiError> {
    let alpha = elicit_risk_aversion(req.loss, req.p, req.willingness_to_pay)?;
    Ok(ElicitResponse {
        schema: SCHEMA.into(),
        units: Units::default(),
        loss: Money::new(req.loss),
        p: req.p,
        willingness_to_pay: Money::new(req.willingness_to_pay),
        expected_loss: Money::new(req.p * req.loss),
        alpha,
    })
}

/// Ruin probabilities for every priced scheme; the document must give `wealth`.
pub fn build_ruin_response(doc: &ConfigDocument) -> Result<RuinResponse, ApiError> {
    let Some(wealth) = doc.wealth else {
        return Err(ApiError::bad_request(
            "missing_field",
            Some("wealth".into()),
            "ruin probabilities need an initial `wealth`",
        ));
    };
    let scenario = doc.resolve()?;
    let results = solve_scenario(&scenario)?
        .iter()
        .map(|sol| {
            let report = prob_ruin_total(&RuinInputs::from_solution(sol, wealth))?;
            Ok(RuinView {
                scheme: sol.scheme(),
                initial_consumption: Money::new(sol.initial_consumption(wealth)),
                report,
            })
        })
        .collect::<Result<_, ApiError>>()?;
    Ok(RuinResponse {
        schema: SCHEMA.into(),
        units: Units::default(),
        validated: validated(doc, &scenario),
        wealth: Money::new(wealth),
        results,
    })
}

/// `steps` evenly spaced points from `from` to `to` inclusive.
pub fn sweep_grid(from: f64, to: f64, steps: usize) -> Result<Vec<f64>, ApiError> {
    if steps > MAX_SWEEP_POINTS {
        return Err(ApiError::unprocessable(
            "sweep_too_large",
            Some("steps".into()),
            format!("at most {MAX_SWEEP_POINTS} grid points per request, got {steps}"),
        ));
    }
    if steps == 0 {
        return Err(ApiError::unprocessable(
            "invalid_parameter",
            Some("steps".into()),
            "must be at least 1",
        ));
    }
    for (name, v) in [("from", from), ("to", to)] {
        if !v.is_finite() {
            return Err(ApiError::unprocessable(
                "invalid_parameter",
                Some(name.into()),
                "must be finite",
            ));
        }
    }
    if steps == 1 {
        return Ok(vec![from]);
    }
    if !(to > from) {
        return Err(ApiError::unprocessable(
            "invalid_parameter",
            Some("to".into()),
            "must exceed `from` when steps > 1",
        ));
    }
    let n = (steps - 1) as f64;
    Ok((0..steps)
        .map(|i| {
            if i + 1 == steps {
                to
            } else {
                from + (to - from) * i as f64 / n
            }
        })
        .collect())
}

/// Comparative-statics sweep at the scenario's premium loadings.
pub fn build_sweep_response(req: &SweepRequest) -> Result<SweepResponse, ApiError> {
    let grid = sweep_grid(req.from, req.to, req.steps)?;
    let scenario = req.scenario.resolve()?;
    let single = scenario.single.map(|q| q.loading());
    let cont = scenario.continuous.map(|q| q.loading());
    let loadings = match (single, cont) {
        (Some(a), Some(b)) => (a, b),
        (Some(a), None) => (a, a),
        (None, Some(b)) => (b, b),
        (None, None) => unreachable!("a resolved scenario prices at least one scheme"),
    };
    let table = comparative_statics_sweep(&scenario.market, &scenario.household, loadings, req.parameter, &grid)?;
    Ok(SweepResponse {
        schema: SCHEMA.into(),
        units: Units::default(),
        validated: validated(&req.scenario, &scenario),
        parameter: req.parameter,
        single_loading: loadings.0,
        continuous_loading: loadings.1,
        all_hold: table.all_hold(),
        rows: table.rows,
        checks: table.checks,
    })
}
