//! Market and household parameters, premium quotes, and risk-aversion elicitation.
//!
//! Money is measured in units of $50,000 throughout.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Dollars per model unit of money.
pub const DOLLARS_PER_UNIT: f64 = 50_000.0;

fn finite(field: &str, v: f64) -> Result<f64> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::invalid(field, format!("must be finite, got {v}")))
    }
}

fn positive(field: &str, v: f64) -> Result<f64> {
    finite(field, v)?;
    if v > 0.0 {
        Ok(v)
    } else {
        Err(Error::invalid(field, format!("must be positive, got {v}")))
    }
}

fn non_negative(field: &str, v: f64) -> Result<f64> {
    finite(field, v)?;
    if v >= 0.0 {
        Ok(v)
    } else {
        Err(Error::invalid(field, format!("must be non-negative, got {v}")))
    }
}

/// Riskless rate and the single risky asset.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MarketParams {
    r: f64,
    mu: f64,
    sigma: f64,
    m: f64,
}

impl MarketParams {
    pub fn new(r: f64, mu: f64, sigma: f64) -> Result<Self> {
        positive("r", r)?;
        finite("mu", mu)?;
        positive("sigma", sigma)?;
        if mu <= r {
            return Err(Error::invalid("mu", format!("must exceed r = {r}, got {mu}")));
        }
        let sharpe = (mu - r) / sigma;
        Ok(Self {
            r,
            mu,
            sigma,
            m: 0.5 * sharpe * sharpe,
        })
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    /// Half the squared Sharpe ratio.
    pub fn m(&self) -> f64 {
        self.m
    }
}

/// One of the two household members.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Survivor {
    X,
    Y,
}

impl Survivor {
    pub fn other(self) -> Self {
        match self {
            Survivor::X => Survivor::Y,
            Survivor::Y => Survivor::X,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Survivor::X => "x",
            Survivor::Y => "y",
        }
    }
}

/// Mortality, income, and risk aversion of the couple.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HouseholdParams {
    lambda_x: f64,
    lambda_y: f64,
    income_x: f64,
    income_y: f64,
    alpha: f64,
}

impl HouseholdParams {
    pub fn new(lambda_x: f64, lambda_y: f64, income_x: f64, income_y: f64, alpha: f64) -> Result<Self> {
        Ok(Self {
            lambda_x: positive("lambda_x", lambda_x)?,
            lambda_y: positive("lambda_y", lambda_y)?,
            income_x: non_negative("income_x", income_x)?,
            income_y: non_negative("income_y", income_y)?,
            alpha: positive("alpha", alpha)?,
        })
    }

    pub fn lambda_x(&self) -> f64 {
        self.lambda_x
    }

    pub fn lambda_y(&self) -> f64 {
        self.lambda_y
    }

    pub fn income_x(&self) -> f64 {
        self.income_x
    }

    pub fn income_y(&self) -> f64 {
        self.income_y
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// Combined hazard of the first death.
    pub fn total_hazard(&self) -> f64 {
        self.lambda_x + self.lambda_y
    }

    pub fn total_income(&self) -> f64 {
        self.income_x + self.income_y
    }

    pub fn hazard(&self, who: Survivor) -> f64 {
        match who {
            Survivor::X => self.lambda_x,
            Survivor::Y => self.lambda_y,
        }
    }

    pub fn income(&self, who: Survivor) -> f64 {
        match who {
            Survivor::X => self.income_x,
            Survivor::Y => self.income_y,
        }
    }

    pub fn with_alpha(&self, alpha: f64) -> Result<Self> {
        Self::new(self.lambda_x, self.lambda_y, self.income_x, self.income_y, alpha)
    }

    pub fn with_incomes(&self, income_x: f64, income_y: f64) -> Result<Self> {
        Self::new(self.lambda_x, self.lambda_y, income_x, income_y, self.alpha)
    }

    pub fn with_hazards(&self, lambda_x: f64, lambda_y: f64) -> Result<Self> {
        Self::new(lambda_x, lambda_y, self.income_x, self.income_y, self.alpha)
    }
}

/// How the life-insurance benefit is paid for.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    /// One lump sum `H` per unit of benefit at purchase.
    Single,
    /// A premium rate `h` per unit of benefit, paid until the first death.
    Continuous,
}

impl Scheme {
    pub fn label(self) -> &'static str {
        match self {
            Scheme::Single => "single",
            Scheme::Continuous => "continuous",
        }
    }
}

/// Premium for one scheme together with its loading and implied loss probability.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PremiumQuote {
    scheme: Scheme,
    loading: f64,
    rate: f64,
    loss_probability: f64,
}

impl PremiumQuote {
    pub fn scheme(&self) -> Scheme {
        self.scheme
    }

    /// Proportional loading over the fair premium.
    pub fn loading(&self) -> f64 {
        self.loading
    }

    /// `H` for the single scheme, `h` for the continuous one.
    pub fn rate(&self) -> f64 {
        self.rate
    }

    /// Probability that the insurer loses money on the contract.
    pub fn loss_probability(&self) -> f64 {
        self.loss_probability
    }
}

/// Quotes for both schemes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QuotePair {
    pub single: PremiumQuote,
    pub continuous: PremiumQuote,
}

fn check_loading(field: &str, theta: f64) -> Result<()> {
    finite(field, theta)?;
    if theta < 0.0 {
        return Err(Error::invalid(field, format!("must be non-negative, got {theta}")));
    }
    Ok(())
}

/// `q = 1 - H^(Λ/r)`, computed without cancellation for `H` near 1.
fn single_loss_probability(r: f64, total_hazard: f64, rate: f64) -> f64 {
    -((total_hazard / r) * rate.ln()).exp_m1()
}

/// `q = 1 - (h / (h + r))^(Λ/r)`.
fn continuous_loss_probability(r: f64, total_hazard: f64, rate: f64) -> f64 {
    -((total_hazard / r) * -(r / rate).ln_1p()).exp_m1()
}

/// Single premium per unit of benefit, `H = (1 + θ) Λ / (Λ + r)`.
pub fn single_premium(market: &MarketParams, household: &HouseholdParams, theta: f64) -> Result<PremiumQuote> {
    check_loading("theta", theta)?;
    let lam = household.total_hazard();
    let rate = (1.0 + theta) * lam / (lam + market.r());
    if rate >= 1.0 {
        return Err(Error::PremiumNotViable { rate });
    }
    Ok(PremiumQuote {
        scheme: Scheme::Single,
        loading: theta,
        rate,
        loss_probability: single_loss_probability(market.r(), lam, rate),
    })
}

/// Continuous premium rate per unit of benefit, `h = (1 + θ̄) Λ`.
pub fn continuous_premium(market: &MarketParams, household: &HouseholdParams, theta_bar: f64) -> Result<PremiumQuote> {
    check_loading("theta_bar", theta_bar)?;
    let lam = household.total_hazard();
    let rate = (1.0 + theta_bar) * lam;
    Ok(PremiumQuote {
        scheme: Scheme::Continuous,
        loading: theta_bar,
        rate,
        loss_probability: continuous_loss_probability(market.r(), lam, rate),
    })
}

/// Quote for a given premium rate rather than a loading.
///
/// The implied loading must be non-negative (up to rounding): a rate below the
/// fair premium is rejected.
pub fn quote_from_rate(
    market: &MarketParams,
    household: &HouseholdParams,
    scheme: Scheme,
    rate: f64,
) -> Result<PremiumQuote> {
    positive("rate", rate)?;
    let lam = household.total_hazard();
    let r = market.r();
    let (loading, loss_probability) = match scheme {
        Scheme::Single => {
            if rate >= 1.0 {
                return Err(Error::PremiumNotViable { rate });
            }
            (rate * (lam + r) / lam - 1.0, single_loss_probability(r, lam, rate))
        }
        Scheme::Continuous => (rate / lam - 1.0, continuous_loss_probability(r, lam, rate)),
    };
    if loading < -1e-12 {
        return Err(Error::invalid(
            "rate",
            format!("{rate} is below the fair premium (implied loading {loading})"),
        ));
    }
    Ok(PremiumQuote {
        scheme,
        loading: loading.max(0.0),
        rate,
        loss_probability,
    })
}

/// Insurer loss probability implied by a quote's premium rate.
pub fn implied_loss_probability(market: &MarketParams, household: &HouseholdParams, quote: &PremiumQuote) -> f64 {
    let lam = household.total_hazard();
    match quote.scheme {
        Scheme::Single => single_loss_probability(market.r(), lam, quote.rate),
        Scheme::Continuous => continuous_loss_probability(market.r(), lam, quote.rate),
    }
}

/// Loss probability of a fairly priced contract; no loading can exceed it.
pub fn max_loss_probability(market: &MarketParams, household: &HouseholdParams) -> f64 {
    let lam = household.total_hazard();
    let r = market.r();
    -((lam / r) * -(r / lam).ln_1p()).exp_m1()
}

/// Premium that leaves the insurer losing money with probability `q`.
pub fn calibrate_to_loss_probability(
    market: &MarketParams,
    household: &HouseholdParams,
    q: f64,
    scheme: Scheme,
) -> Result<PremiumQuote> {
    finite("loss_probability", q)?;
    if q <= 0.0 {
        return Err(Error::invalid("loss_probability", format!("must be positive, got {q}")));
    }
    let q_max = max_loss_probability(market, household);
    if q > q_max * (1.0 + 1e-12) {
        return Err(Error::LossProbabilityTooHigh { q, max: q_max });
    }
    let lam = household.total_hazard();
    let r = market.r();
    // ln H = (r/Λ) ln(1 - q)
    let ln_single = (r / lam) * (-q).ln_1p();
    let (rate, loading) = match scheme {
        Scheme::Single => {
            let rate = ln_single.exp();
            (rate, rate * (lam + r) / lam - 1.0)
        }
        Scheme::Continuous => {
            let rate = r * ln_single.exp() / -ln_single.exp_m1();
            (rate, rate / lam - 1.0)
        }
    };
    Ok(PremiumQuote {
        scheme,
        loading: loading.max(0.0),
        rate,
        loss_probability: q,
    })
}

/// Both quotes calibrated to the same loss probability.
pub fn calibrate_pair(market: &MarketParams, household: &HouseholdParams, q: f64) -> Result<QuotePair> {
    Ok(QuotePair {
        single: calibrate_to_loss_probability(market, household, q, Scheme::Single)?,
        continuous: calibrate_to_loss_probability(market, household, q, Scheme::Continuous)?,
    })
}

/// Exponential-utility premium `(1/α) ln(p e^{αL} + 1 - p)` for a loss `L` with probability `p`.
pub fn exponential_premium(alpha: f64, loss: f64, p: f64) -> f64 {
    let z = alpha * loss;
    if z > 30.0 {
        loss + (p + (1.0 - p) * (-z).exp()).ln() / alpha
    } else {
        (p * z.exp_m1()).ln_1p() / alpha
    }
}

/// Risk aversion at which a household would pay exactly `willingness_to_pay`
/// to insure a loss of `loss` occurring with probability `p`.
pub fn elicit_risk_aversion(loss: f64, p: f64, willingness_to_pay: f64) -> Result<f64> {
    positive("loss", loss)?;
    finite("probability", p)?;
    if p <= 0.0 || p >= 1.0 {
        return Err(Error::invalid("probability", format!("must lie in (0, 1), got {p}")));
    }
    finite("willingness_to_pay", willingness_to_pay)?;
    let lower = p * loss;
    if willingness_to_pay <= lower || willingness_to_pay >= loss {
        return Err(Error::NoSolution {
            willingness_to_pay,
            lower,
            upper: loss,
        });
    }
    let f = |a: f64| exponential_premium(a, loss, p) - willingness_to_pay;
    let lo = 1e-12;
    if f(lo) >= 0.0 {
        return Ok(lo);
    }
    let mut hi = 1.0 / loss;
    while f(hi) < 0.0 {
        hi *= 2.0;
        if !hi.is_finite() {
            return Err(Error::NoSolution {
                willingness_to_pay,
                lower,
                upper: loss,
            });
        }
    }
    crate::numerics::bisect(f, lo, hi, 1e-12).ok_or(Error::NoSolution {
        willingness_to_pay,
        lower,
        upper: loss,
    })
}
