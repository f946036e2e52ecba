//! Coefficient of the pre-death value function.
//!
//! Before the first death the value function is `-k(D)/(α r) e^{-α r w}` where
//! `k` solves the transcendental equation
//!
//! ```text
//! k (r ln k + A) = B(D)
//! A    = α r (I_x + I_y) + Λ + m   (less α r h D for the continuous scheme)
//! B(D) = e^{-α r D - m/r} [λ_x e^{-α I_y - λ_y/r} + λ_y e^{-α I_x - λ_x/r}]
//! ```
//!
//! With `K = k e^{A/r}` this is `K ln K = (B/r) e^{A/r}`, so `ln K` is the
//! principal Lambert W of the right side. The root is found in log space so
//! that large exponents do not overflow.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{HouseholdParams, MarketParams, Scheme};
use crate::numerics::log_add_exp;

/// Solved coefficient `k` at a given benefit, with the terms of its equation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ValueCoefficient {
    pub scheme: Scheme,
    pub benefit: f64,
    /// Premium rate `h` for the continuous scheme; zero for the single scheme.
    pub premium_rate: f64,
    pub k: f64,
    pub ln_k: f64,
    /// `A`, already reduced by `α r h D` for the continuous scheme.
    pub a_term: f64,
    pub ln_b: f64,
    /// `ln(ln k + A/r)`, kept separately because `r ln k + A` cancels badly when `A/r` is large.
    pub ln_lambert: f64,
}

/// `ln B(D)`.
pub fn ln_b(market: &MarketParams, household: &HouseholdParams, benefit: f64) -> f64 {
    let (r, m, a) = (market.r(), market.m(), household.alpha());
    let (lx, ly) = (household.lambda_x(), household.lambda_y());
    let inner = log_add_exp(
        lx.ln() - a * household.income_y() - ly / r,
        ly.ln() - a * household.income_x() - lx / r,
    );
    -a * r * benefit - m / r + inner
}

/// `A` for the single scheme.
pub fn a_term(market: &MarketParams, household: &HouseholdParams) -> f64 {
    household.alpha() * market.r() * household.total_income() + household.total_hazard() + market.m()
}

/// Root `y > 0` of `y + ln y = ln_c`, i.e. `y = W0(C)` for `C = e^{ln_c}`.
///
/// Halley's method in log form, seeded by `L - ln L` for large `L` and by `C`
/// for small `C`; bisection takes over if Halley fails to settle.
pub fn lambert_w0_from_log(ln_c: f64) -> Result<f64> {
    if !ln_c.is_finite() {
        return Err(Error::SingularParameter(format!("ln C = {ln_c} is not finite")));
    }
    let g = |y: f64| y + y.ln() - ln_c;
    let mut y = if ln_c > 1.0 { ln_c - ln_c.ln() } else { ln_c.exp() };
    if y > 0.0 {
        for _ in 0..50 {
            let gy = g(y);
            let d1 = 1.0 + 1.0 / y;
            let d2 = -1.0 / (y * y);
            let step = 2.0 * gy * d1 / (2.0 * d1 * d1 - gy * d2);
            let next = y - step;
            if !(next > 0.0) || !next.is_finite() {
                break;
            }
            let done = (next - y).abs() <= 4.0 * f64::EPSILON * next;
            y = next;
            if done {
                return Ok(y);
            }
        }
        if g(y).abs() <= 1e-13 * ln_c.abs().max(1.0) {
            return Ok(y);
        }
    }
    let hi = if ln_c > 1.0 { ln_c } else { ln_c.exp().min(1.0) };
    let lo = hi * 1e-300_f64.max(f64::MIN_POSITIVE);
    crate::numerics::bisect(g, lo, hi, 1e-15)
        .ok_or_else(|| Error::SingularParameter(format!("no root of K ln K = C for ln C = {ln_c}")))
}

fn solve_with(
    market: &MarketParams,
    household: &HouseholdParams,
    scheme: Scheme,
    premium_rate: f64,
    benefit: f64,
) -> Result<ValueCoefficient> {
    if !benefit.is_finite() || benefit < 0.0 {
        return Err(Error::invalid(
            "benefit",
            format!("must be finite and non-negative, got {benefit}"),
        ));
    }
    let r = market.r();
    let a = a_term(market, household) - household.alpha() * r * premium_rate * benefit;
    let lb = ln_b(market, household, benefit);
    let ln_c = lb - r.ln() + a / r;
    let (y, ln_y) = if ln_c < -30.0 {
        // y is below 1e-13 here, so y = C e^{-y} converges in a few passes in log form
        let mut ly = ln_c;
        for _ in 0..4 {
            ly = ln_c - ly.exp();
        }
        (ly.exp(), ly)
    } else {
        let y = lambert_w0_from_log(ln_c)?;
        (y, y.ln())
    };
    let ln_k = y - a / r;
    Ok(ValueCoefficient {
        scheme,
        benefit,
        premium_rate,
        k: ln_k.exp(),
        ln_k,
        a_term: a,
        ln_b: lb,
        ln_lambert: ln_y,
    })
}

/// `k(D)` for the single-premium scheme.
pub fn solve_k(market: &MarketParams, household: &HouseholdParams, benefit: f64) -> Result<ValueCoefficient> {
    solve_with(market, household, Scheme::Single, 0.0, benefit)
}

/// `k̄(D)` for the continuous-premium scheme with premium rate `h`.
pub fn solve_k_bar(
    market: &MarketParams,
    household: &HouseholdParams,
    premium_rate: f64,
    benefit: f64,
) -> Result<ValueCoefficient> {
    if !(premium_rate > 0.0) || !premium_rate.is_finite() {
        return Err(Error::invalid(
            "premium_rate",
            format!("must be positive, got {premium_rate}"),
        ));
    }
    solve_with(market, household, Scheme::Continuous, premium_rate, benefit)
}

impl ValueCoefficient {
    /// `k (r ln k + A) / B - 1`.
    pub fn relative_residual(&self, market: &MarketParams) -> f64 {
        let lhs = self.ln_k + market.r().ln() + self.ln_lambert;
        (lhs - self.ln_b).exp_m1()
    }

    /// `dk/dD`, from implicit differentiation of the defining equation.
    pub fn slope(&self, market: &MarketParams, household: &HouseholdParams) -> f64 {
        let r = market.r();
        let ar = household.alpha() * r;
        let b = self.ln_b.exp();
        let denom = r * (self.ln_lambert.exp() + 1.0);
        ar * (self.premium_rate * self.k - b) / denom
    }

    /// Value function `-k/(α r) e^{-α r w}` before the first death.
    pub fn value(&self, market: &MarketParams, household: &HouseholdParams, wealth: f64) -> f64 {
        let ar = household.alpha() * market.r();
        -(self.ln_k - ar * wealth).exp() / ar
    }
}

/// Value function of a single survivor with hazard `lambda` and income `income`.
pub fn merton_value(market: &MarketParams, alpha: f64, lambda: f64, income: f64, wealth: f64) -> f64 {
    let (r, m) = (market.r(), market.m());
    let ar = alpha * r;
    -(-ar * (wealth + income / r + (lambda + m) / (ar * r))).exp() / ar
}
