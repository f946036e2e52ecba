//! Probability that optimal consumption reaches zero.
//!
//! Before the first death consumption is an arithmetic Brownian motion
//! starting at `c0` with drift `ν = r δ` and variance rate `s² = 2m/α²`.
//! At the first death it jumps by the survivor's `Δc`; afterwards it drifts at
//! `(m - λ_a)/α` with the same volatility, so from level `c > 0` it reaches zero
//! with probability `e^{-α c}`.
//!
//! Write `κ = α²/(2m) = 1/s²`, `S = sqrt(ν² + 2Λ s²)`, `P = κ S` and
//! `β = κ ν - α`. Consumption surviving to the first death has sub-density
//! `(Λ/S) e^{κ ν (x - c0)} (e^{-P|x - c0|} - e^{-P(x + c0)})` on `x > 0`, which gives
//! every probability below in closed form.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::Survivor;
use crate::numerics::{exprel, ln_exprel};
use crate::policy::PolicySolution;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RuinInputs {
    /// Consumption rate at time zero.
    pub c0: f64,
    /// Pre-death wealth drift `δ`.
    pub delta: f64,
    pub dc_x: f64,
    pub dc_y: f64,
    pub lambda_x: f64,
    pub lambda_y: f64,
    pub m: f64,
    pub r: f64,
    pub alpha: f64,
}

impl RuinInputs {
    /// Inputs for the optimal policy started from pre-purchase wealth `wealth`.
    pub fn from_solution(sol: &PolicySolution, wealth: f64) -> Self {
        Self {
            c0: sol.initial_consumption(wealth),
            delta: sol.drift,
            dc_x: sol.consumption_jump_x,
            dc_y: sol.consumption_jump_y,
            lambda_x: sol.household.lambda_x(),
            lambda_y: sol.household.lambda_y(),
            m: sol.market.m(),
            r: sol.market.r(),
            alpha: sol.household.alpha(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let named = [
            ("c0", self.c0),
            ("delta", self.delta),
            ("dc_x", self.dc_x),
            ("dc_y", self.dc_y),
            ("lambda_x", self.lambda_x),
            ("lambda_y", self.lambda_y),
            ("m", self.m),
            ("r", self.r),
            ("alpha", self.alpha),
        ];
        for (name, v) in named {
            if !v.is_finite() {
                return Err(Error::invalid(name, format!("must be finite, got {v}")));
            }
        }
        for (name, v) in [
            ("c0", self.c0),
            ("lambda_x", self.lambda_x),
            ("lambda_y", self.lambda_y),
            ("m", self.m),
            ("r", self.r),
            ("alpha", self.alpha),
        ] {
            if v <= 0.0 {
                return Err(Error::invalid(name, format!("must be positive, got {v}")));
            }
        }
        Ok(())
    }

    /// Consumption drift before the first death.
    pub fn nu(&self) -> f64 {
        self.r * self.delta
    }

    /// Consumption variance rate `s² = 2m/α²`.
    pub fn variance_rate(&self) -> f64 {
        2.0 * self.m / (self.alpha * self.alpha)
    }

    /// Consumption drift after the first death when `survivor` remains.
    pub fn drift_after(&self, survivor: Survivor) -> f64 {
        (self.m - self.hazard(survivor)) / self.alpha
    }

    pub fn hazard(&self, who: Survivor) -> f64 {
        match who {
            Survivor::X => self.lambda_x,
            Survivor::Y => self.lambda_y,
        }
    }

    pub fn jump(&self, who: Survivor) -> f64 {
        match who {
            Survivor::X => self.dc_x,
            Survivor::Y => self.dc_y,
        }
    }

    /// `S = sqrt((rδ)² + (4m/α²)(λ_x + λ_y))`.
    pub fn s_term(&self) -> f64 {
        let nu = self.nu();
        (nu * nu + 2.0 * (self.lambda_x + self.lambda_y) * self.variance_rate()).sqrt()
    }
}

struct Consts {
    c0: f64,
    nu: f64,
    kappa: f64,
    s: f64,
    p: f64,
    beta: f64,
    alpha: f64,
}

impl Consts {
    fn new(inp: &RuinInputs) -> Result<Self> {
        inp.validate()?;
        let kappa = 1.0 / inp.variance_rate();
        let s = inp.s_term();
        if !(s > 0.0) || !s.is_finite() || !kappa.is_finite() {
            return Err(Error::SingularParameter(format!("S = {s}, kappa = {kappa}")));
        }
        let nu = inp.nu();
        Ok(Self {
            c0: inp.c0,
            nu,
            kappa,
            s,
            p: kappa * s,
            beta: kappa * nu - inp.alpha,
            alpha: inp.alpha,
        })
    }
}

/// How far a survivor's consumption jump reaches relative to `c0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum JumpRegime {
    /// `Δc ≥ 0`.
    Headroom,
    /// `-c0 < Δc < 0`.
    Partial,
    /// `Δc ≤ -c0`.
    Exhausted,
}

fn regime(c0: f64, jump: f64) -> JumpRegime {
    if jump >= 0.0 {
        JumpRegime::Headroom
    } else if -jump < c0 {
        JumpRegime::Partial
    } else {
        JumpRegime::Exhausted
    }
}

/// Sign pattern of the two jumps.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Case {
    /// Both jumps non-negative.
    I,
    /// One non-negative, one negative.
    II,
    /// Both negative.
    III,
}

/// Regimes of the larger and smaller jump.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Subcase {
    /// Both headroom.
    A,
    /// Headroom and partial.
    B,
    /// Both partial.
    C,
    /// Headroom and exhausted.
    D,
    /// Partial and exhausted.
    E,
    /// Both exhausted.
    F,
}

impl Subcase {
    pub fn case(self) -> Case {
        match self {
            Subcase::A => Case::I,
            Subcase::B | Subcase::D => Case::II,
            Subcase::C | Subcase::E | Subcase::F => Case::III,
        }
    }
}

/// Classify the pair of jumps.
pub fn classify(inp: &RuinInputs) -> Subcase {
    let (large, small) = if inp.dc_x >= inp.dc_y {
        (inp.dc_x, inp.dc_y)
    } else {
        (inp.dc_y, inp.dc_x)
    };
    use JumpRegime::*;
    match (regime(inp.c0, large), regime(inp.c0, small)) {
        (Headroom, Headroom) => Subcase::A,
        (Headroom, Partial) => Subcase::B,
        (Partial, Partial) => Subcase::C,
        (Headroom, Exhausted) => Subcase::D,
        (Partial, Exhausted) => Subcase::E,
        (Exhausted, Exhausted) => Subcase::F,
        // the larger jump cannot fall in a lower regime than the smaller one
        _ => unreachable!("jumps sorted by size"),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SurvivorTerm {
    pub survivor: Survivor,
    pub jump: f64,
    pub regime: JumpRegime,
    /// Probability that this member survives the other and consumption then
    /// reaches zero after a positive post-jump level.
    pub probability: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RuinReport {
    pub p_before_first_death: f64,
    pub p_between_deaths: f64,
    /// `p_before_first_death + p_between_deaths`.
    pub p_total: f64,
    /// Probability that the jump at the first death takes consumption to zero
    /// or below. Not part of `p_total`.
    pub p_jump_at_first_death: f64,
    pub case: Case,
    pub subcase: Subcase,
    pub terms: Vec<SurvivorTerm>,
    pub inputs: RuinInputs,
}

/// Probability that consumption reaches zero before the first death.
pub fn prob_ruin_before_first_death(inp: &RuinInputs) -> Result<f64> {
    let k = Consts::new(inp)?;
    Ok((-k.kappa * (k.s + k.nu) * k.c0).exp())
}

/// First-passage density of consumption to zero at time `t`, before any death.
pub fn ruin_density_before_first_death(inp: &RuinInputs, t: f64) -> Result<f64> {
    inp.validate()?;
    if !(t > 0.0) {
        return Ok(0.0);
    }
    let s2 = inp.variance_rate();
    let (c0, nu) = (inp.c0, inp.nu());
    let ln_f =
        c0.ln() - 0.5 * (2.0 * std::f64::consts::PI * s2 * t * t * t).ln() - (c0 + nu * t).powi(2) / (2.0 * s2 * t);
    Ok(ln_f.exp())
}

/// `∫ e^{κν(x-c0)} (e^{-P|x-c0|} - e^{-P(x+c0)}) e^{-α(x+d)} dx` over `x > max(0, -d)`,
/// times `λ_o / S`.
fn survivor_probability(k: &Consts, weight: f64, jump: f64) -> f64 {
    let (c0, kappa, nu, s, p, beta, alpha) = (k.c0, k.kappa, k.nu, k.s, k.p, k.beta, k.alpha);
    let b = (-jump).max(0.0);
    let inner = if b < c0 {
        let u = c0 - b;
        // x in (b, c0)
        let below = (-alpha * (c0 + jump) - (beta + p) * u + u.ln() + ln_exprel((beta + p) * u)).exp();
        // x > c0
        let above = ((-alpha * (c0 + jump)).exp()
            - (-kappa * (nu + s) * c0 + kappa * (nu - s) * b - alpha * (b + jump)).exp())
            / (p - beta);
        below + above
    } else {
        (kappa * (s - nu) * (c0 + jump)).exp() * -(-2.0 * p * c0).exp_m1() / (p - beta)
    };
    weight / s * inner
}

/// Probability that consumption reaches zero between the two deaths, by survivor.
pub fn prob_ruin_between_deaths(inp: &RuinInputs) -> Result<(f64, Vec<SurvivorTerm>)> {
    let k = Consts::new(inp)?;
    let terms: Vec<SurvivorTerm> = [Survivor::X, Survivor::Y]
        .into_iter()
        .map(|who| {
            let jump = inp.jump(who);
            SurvivorTerm {
                survivor: who,
                jump,
                regime: regime(inp.c0, jump),
                probability: survivor_probability(&k, inp.hazard(who.other()), jump),
            }
        })
        .collect();
    Ok((terms.iter().map(|t| t.probability).sum(), terms))
}

/// Probability that consumption is alive just before the first death and the
/// jump takes it to zero or below.
pub fn prob_jump_to_zero_at_first_death(inp: &RuinInputs) -> Result<f64> {
    let k = Consts::new(inp)?;
    let (c0, kappa, nu, s, p) = (k.c0, k.kappa, k.nu, k.s, k.p);
    let g = kappa * nu;
    let mut total = 0.0;
    for who in [Survivor::X, Survivor::Y] {
        let jump = inp.jump(who);
        if jump >= 0.0 {
            continue;
        }
        let b = -jump;
        let w = inp.hazard(who.other()) / s;
        let ln_lead = -kappa * (nu + s) * c0;
        // lead * x * (exprel((g+P)x) - exprel((g-P)x)), kept in logs since (g+P)x can be large
        let near = |x: f64| {
            let hi = ln_exprel((g + p) * x);
            let lo = ln_exprel((g - p) * x);
            x * (ln_lead + hi).exp() * -(lo - hi).exp_m1()
        };
        total += if b <= c0 {
            w * near(b)
        } else {
            w * (near(c0) + -(-2.0 * p * c0).exp_m1() * (b - c0) * exprel((g - p) * (b - c0)))
        };
    }
    Ok(total)
}

fn clamp_probability(name: &str, v: f64) -> Result<f64> {
    if !v.is_finite() || v < -1e-9 || v > 1.0 + 1e-9 {
        return Err(Error::SingularParameter(format!("{name} evaluated to {v}")));
    }
    Ok(v.clamp(0.0, 1.0))
}

/// Probability that consumption reaches zero at any time, split by phase.
pub fn prob_ruin_total(inp: &RuinInputs) -> Result<RuinReport> {
    let before = clamp_probability("p_before_first_death", prob_ruin_before_first_death(inp)?)?;
    let (between, terms) = prob_ruin_between_deaths(inp)?;
    let between = clamp_probability("p_between_deaths", between)?;
    let jump = clamp_probability("p_jump_at_first_death", prob_jump_to_zero_at_first_death(inp)?)?;
    let subcase = classify(inp);
    Ok(RuinReport {
        p_before_first_death: before,
        p_between_deaths: between,
        p_total: before + between,
        p_jump_at_first_death: jump,
        case: subcase.case(),
        subcase,
        terms,
        inputs: *inp,
    })
}
