//! Optimal benefit, consumption, and investment.

mod sweep;
mod verify;

pub use sweep::{comparative_statics_sweep, CheckStatus, PropertyCheck, SweepParameter, SweepRow, SweepTable};
pub use verify::{
    evaluate_variational_inequality, generator, verify_variational_inequality, VerificationReport, VerifyGrid,
    VerifyOptions, WorstPoint,
};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::ksolve::{self, ValueCoefficient};
use crate::model::{HouseholdParams, MarketParams, PremiumQuote, Scheme, Survivor};
use crate::numerics::log_add_exp;

/// `ln(λ_x e^{α I_x + λ_x/r} + λ_y e^{α I_y + λ_y/r})`.
pub fn mortality_log_sum(market: &MarketParams, household: &HouseholdParams) -> f64 {
    let (r, a) = (market.r(), household.alpha());
    let (lx, ly) = (household.lambda_x(), household.lambda_y());
    log_add_exp(
        lx.ln() + a * household.income_x() + lx / r,
        ly.ln() + a * household.income_y() + ly / r,
    )
}

/// Numerator of the optimal-benefit formula; the benefit is positive iff this is.
pub fn benefit_bracket(market: &MarketParams, household: &HouseholdParams, quote: &PremiumQuote) -> f64 {
    let r = market.r();
    let l0 = mortality_log_sum(market, household);
    let rate = quote.rate();
    match quote.scheme() {
        Scheme::Single => {
            let odds = rate / (1.0 - rate);
            l0 - (r * odds).ln() - odds
        }
        Scheme::Continuous => l0 - rate.ln() - rate / r,
    }
}

/// `D*` for a single premium `H` per unit of benefit.
pub fn optimal_benefit_single(market: &MarketParams, household: &HouseholdParams, quote: &PremiumQuote) -> f64 {
    let bracket = benefit_bracket(market, household, quote);
    (bracket / (household.alpha() * market.r())).max(0.0)
}

/// `D̄*` for a continuous premium rate `h`.
pub fn optimal_benefit_continuous(market: &MarketParams, household: &HouseholdParams, quote: &PremiumQuote) -> f64 {
    let bracket = benefit_bracket(market, household, quote);
    (bracket / (household.alpha() * (quote.rate() + market.r()))).max(0.0)
}

/// Amount held in the risky asset, `(μ - r)/(α r σ²)`.
pub fn investment_rate(market: &MarketParams, household: &HouseholdParams) -> f64 {
    (market.mu() - market.r()) / (household.alpha() * market.r() * market.sigma().powi(2))
}

/// Where the household is in its life cycle.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Phase {
    BeforeFirstDeath,
    AfterFirstDeath(Survivor),
}

/// Solved policy for one premium scheme.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PolicySolution {
    pub market: MarketParams,
    pub household: HouseholdParams,
    pub quote: PremiumQuote,
    /// `D*` (single) or `D̄*` (continuous).
    pub benefit: f64,
    pub coefficient: ValueCoefficient,
    pub investment: f64,
    pub consumption_jump_x: f64,
    pub consumption_jump_y: f64,
    /// Drift of wealth before the first death, `δ` or `δ̄`.
    pub drift: f64,
    pub alpha_threshold: f64,
}

fn coefficient_at(
    market: &MarketParams,
    household: &HouseholdParams,
    quote: &PremiumQuote,
    benefit: f64,
) -> Result<ValueCoefficient> {
    match quote.scheme() {
        Scheme::Single => ksolve::solve_k(market, household, benefit),
        Scheme::Continuous => ksolve::solve_k_bar(market, household, quote.rate(), benefit),
    }
}

/// Solve the policy for whichever scheme the quote belongs to.
pub fn solve(market: &MarketParams, household: &HouseholdParams, quote: &PremiumQuote) -> Result<PolicySolution> {
    let benefit = match quote.scheme() {
        Scheme::Single => optimal_benefit_single(market, household, quote),
        Scheme::Continuous => optimal_benefit_continuous(market, household, quote),
    };
    let coefficient = coefficient_at(market, household, quote, benefit)?;
    let jump = |who| consumption_jump_with(market, household, &coefficient, who);
    let (r, m, a) = (market.r(), market.m(), household.alpha());
    let premium_outflow = match quote.scheme() {
        Scheme::Single => 0.0,
        Scheme::Continuous => quote.rate() * benefit,
    };
    let drift = 2.0 * m / (a * r) + household.total_income() + coefficient.ln_k / a - premium_outflow;
    Ok(PolicySolution {
        market: *market,
        household: *household,
        quote: *quote,
        benefit,
        coefficient,
        investment: investment_rate(market, household),
        consumption_jump_x: jump(Survivor::X),
        consumption_jump_y: jump(Survivor::Y),
        drift,
        alpha_threshold: alpha_threshold(market, household, quote),
    })
}

fn consumption_jump_with(
    market: &MarketParams,
    household: &HouseholdParams,
    coefficient: &ValueCoefficient,
    survivor: Survivor,
) -> f64 {
    let (r, m, a) = (market.r(), market.m(), household.alpha());
    r * coefficient.benefit
        + household.income(survivor)
        + (household.hazard(survivor) + m) / (a * r)
        + coefficient.ln_k / a
}

/// Consumption change at the first death when the benefit is `benefit`
/// rather than the optimum.
pub fn consumption_jump_at(
    market: &MarketParams,
    household: &HouseholdParams,
    quote: &PremiumQuote,
    benefit: f64,
    survivor: Survivor,
) -> Result<f64> {
    let c = coefficient_at(market, household, quote, benefit)?;
    Ok(consumption_jump_with(market, household, &c, survivor))
}

/// Consumption jump at an interior single-premium optimum, written without `k`.
pub fn consumption_jump_closed_form(
    market: &MarketParams,
    household: &HouseholdParams,
    single_rate: f64,
    survivor: Survivor,
) -> f64 {
    let (r, a) = (market.r(), household.alpha());
    let dead = survivor.other();
    let lam = household.total_hazard();
    let (ia, id) = (household.income(survivor), household.income(dead));
    let (la, ld) = (household.hazard(survivor), household.hazard(dead));
    let mix = log_add_exp((ld / lam).ln(), (la / lam).ln() + a * (ia - id) + (la - ld) / r);
    (mix + lam.ln() - (r * single_rate / (1.0 - single_rate)).ln()) / a
}

/// Drift of wealth before the first death in two algebraically equal forms.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DriftReport {
    pub definitional: f64,
    pub reduced: f64,
}

impl PolicySolution {
    pub fn scheme(&self) -> Scheme {
        self.quote.scheme()
    }

    /// Wealth left after paying any up-front premium.
    pub fn wealth_after_purchase(&self, wealth: f64) -> f64 {
        match self.scheme() {
            Scheme::Single => wealth - self.quote.rate() * self.benefit,
            Scheme::Continuous => wealth,
        }
    }

    /// Consumption rate at time zero for pre-purchase wealth `wealth`.
    pub fn initial_consumption(&self, wealth: f64) -> f64 {
        self.consumption_rate(self.wealth_after_purchase(wealth), Phase::BeforeFirstDeath)
    }

    /// Optimal consumption rate at current wealth.
    ///
    /// Before the first death `wealth` is taken to be post-purchase wealth with
    /// the benefit already at its optimum.
    pub fn consumption_rate(&self, wealth: f64, phase: Phase) -> f64 {
        let (r, m, a) = (self.market.r(), self.market.m(), self.household.alpha());
        match phase {
            Phase::BeforeFirstDeath => r * wealth - self.coefficient.ln_k / a,
            Phase::AfterFirstDeath(who) => {
                r * wealth + self.household.income(who) + (self.household.hazard(who) + m) / (a * r)
            }
        }
    }

    pub fn consumption_jump(&self, survivor: Survivor) -> f64 {
        match survivor {
            Survivor::X => self.consumption_jump_x,
            Survivor::Y => self.consumption_jump_y,
        }
    }

    /// Premium paid per year while both are alive.
    pub fn premium_outflow(&self) -> f64 {
        match self.scheme() {
            Scheme::Single => 0.0,
            Scheme::Continuous => self.quote.rate() * self.benefit,
        }
    }

    /// Pre-death drift, checked against its reduced form at an interior optimum.
    pub fn pre_death_drift(&self) -> Result<DriftReport> {
        if self.benefit <= 0.0 {
            return Err(Error::InteriorOptimumRequired);
        }
        let (r, m, a) = (self.market.r(), self.market.m(), self.household.alpha());
        let lam = self.household.total_hazard();
        let rate = self.quote.rate();
        let tail = match self.scheme() {
            Scheme::Single => rate / (1.0 - rate) / a,
            Scheme::Continuous => rate / (a * r),
        };
        Ok(DriftReport {
            definitional: self.drift,
            reduced: (m - lam) / (a * r) + tail,
        })
    }

    /// Value function at wealth `wealth` with benefit `benefit` in force.
    ///
    /// Below the optimum the household tops up immediately, so the value is
    /// read off at the optimum after paying for the difference.
    pub fn value(&self, wealth: f64, benefit: f64) -> Result<f64> {
        let mkt = &self.market;
        let hh = &self.household;
        if benefit >= self.benefit {
            let c = coefficient_at(mkt, hh, &self.quote, benefit)?;
            Ok(c.value(mkt, hh, wealth))
        } else {
            let shifted = match self.scheme() {
                Scheme::Single => wealth - self.quote.rate() * (self.benefit - benefit),
                Scheme::Continuous => wealth,
            };
            Ok(self.coefficient.value(mkt, hh, shifted))
        }
    }
}

/// Smallest risk aversion at which buying insurance becomes optimal.
///
/// Returns zero when any positive `α` buys insurance and infinity when none
/// does (both incomes zero and the bracket never turns positive).
pub fn alpha_threshold(market: &MarketParams, household: &HouseholdParams, quote: &PremiumQuote) -> f64 {
    let bracket = |a: f64| match household.with_alpha(a) {
        Ok(hh) => benefit_bracket(market, &hh, quote),
        Err(_) => f64::NAN,
    };
    let tiny = 1e-12;
    if bracket(tiny) > 0.0 {
        return 0.0;
    }
    if household.total_income() == 0.0 {
        return f64::INFINITY;
    }
    let mut hi = 1.0;
    while bracket(hi) <= 0.0 {
        hi *= 2.0;
        if hi > 1e300 {
            return f64::INFINITY;
        }
    }
    crate::numerics::bisect(bracket, tiny, hi, 1e-14).unwrap_or(f64::INFINITY)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{continuous_premium, single_premium};

    fn base() -> (MarketParams, HouseholdParams) {
        (
            MarketParams::new(0.02, 0.06, 0.2).unwrap(),
            HouseholdParams::new(0.04, 0.03, 2.0, 1.5, 2.0).unwrap(),
        )
    }

    #[test]
    fn reference_policy() {
        let (mkt, hh) = base();
        let s = solve(&mkt, &hh, &single_premium(&mkt, &hh, 0.0).unwrap()).unwrap();
        let c = solve(&mkt, &hh, &continuous_premium(&mkt, &hh, 0.0).unwrap()).unwrap();
        assert!((s.benefit - 52.37795990003324).abs() < 1e-10);
        assert!((c.benefit - 11.639546644451832).abs() < 1e-10);
        assert!((s.coefficient.ln_k + 8.0).abs() < 1e-10);
        assert!((s.consumption_jump_x - 0.5475591980006649).abs() < 1e-10);
        assert!((s.consumption_jump_y + 0.2024408019993351).abs() < 1e-10);
        assert!((c.consumption_jump_x - s.consumption_jump_x).abs() < 1e-10);
        assert!((s.investment - 25.0).abs() < 1e-12);
        assert!((s.drift - 0.5).abs() < 1e-10);
        assert!((c.drift - 0.5).abs() < 1e-10);
        assert!((s.consumption_rate(10.0, Phase::BeforeFirstDeath) - 4.2).abs() < 1e-10);
        assert!((s.consumption_rate(0.0, Phase::AfterFirstDeath(Survivor::X)) - 3.5).abs() < 1e-12);
        assert!((s.initial_consumption(10.0) - 3.385231734888372).abs() < 1e-10);
        assert!((s.initial_consumption(10.0) - c.initial_consumption(10.0)).abs() < 1e-10);
    }

    #[test]
    fn drift_forms_agree() {
        let (mkt, hh) = base();
        let s = solve(&mkt, &hh, &single_premium(&mkt, &hh, 0.05).unwrap()).unwrap();
        let d = s.pre_death_drift().unwrap();
        assert!((d.definitional - d.reduced).abs() < 1e-10);
        let c = solve(&mkt, &hh, &continuous_premium(&mkt, &hh, 0.1).unwrap()).unwrap();
        let d = c.pre_death_drift().unwrap();
        assert!((d.definitional - d.reduced).abs() < 1e-10);
    }

    #[test]
    fn no_insurance_means_no_drift_report() {
        let (mkt, hh) = base();
        let hh = hh.with_alpha(0.01).unwrap();
        let s = solve(&mkt, &hh, &single_premium(&mkt, &hh, 0.0).unwrap()).unwrap();
        assert_eq!(s.benefit, 0.0);
        assert_eq!(s.pre_death_drift(), Err(Error::InteriorOptimumRequired));
    }

    #[test]
    fn threshold_reference() {
        let (mkt, hh) = base();
        let q = single_premium(&mkt, &hh, 0.0).unwrap();
        let t = alpha_threshold(&mkt, &hh, &q);
        assert!((t - 0.9026119109339468).abs() < 1e-10);
        let qc = continuous_premium(&mkt, &hh, 0.0).unwrap();
        assert!((alpha_threshold(&mkt, &hh, &qc) - 0.9026119109339468).abs() < 1e-10);
        let zero = hh.with_incomes(0.0, 0.0).unwrap();
        assert_eq!(alpha_threshold(&mkt, &zero, &q), f64::INFINITY);
    }

    #[test]
    fn closed_form_jump() {
        let (mkt, hh) = base();
        let q = single_premium(&mkt, &hh, 0.05).unwrap();
        let s = solve(&mkt, &hh, &q).unwrap();
        for who in [Survivor::X, Survivor::Y] {
            let cf = consumption_jump_closed_form(&mkt, &hh, q.rate(), who);
            assert!((cf - s.consumption_jump(who)).abs() < 1e-10);
        }
    }
}
