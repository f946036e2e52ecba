//! Monte Carlo oracles for consumption paths, ruin, and insurer loss.
//!
//! Every path owns a ChaCha8 stream selected by its index, so results do not
//! depend on how paths are spread over threads. Paths are reduced in fixed
//! chunks, in index order.

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{calibrate_pair, HouseholdParams, MarketParams, QuotePair, Scheme, Survivor};
use crate::policy::{self, Phase, PolicySolution};
use crate::ruin::RuinInputs;

const CHUNK: usize = 1024;
/// Steps are at least this many standard deviations away from the barrier
/// when adaptive stepping is on.
const STEP_SIGMAS: f64 = 4.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub n_paths: usize,
    /// Base time step in years.
    pub dt: f64,
    /// Paths are cut off at this age of the household, in years.
    pub horizon_cap: f64,
    pub seed: u64,
    /// Initial (pre-purchase) wealth.
    pub wealth: f64,
    pub bridge_correction: bool,
    /// Lengthen steps far from the barrier. Only used with bridge correction,
    /// which keeps crossing probabilities exact for any step length.
    pub adaptive_steps: bool,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            n_paths: 100_000,
            dt: 1.0 / 2000.0,
            horizon_cap: 2000.0,
            seed: 0x5eed,
            wealth: 0.0,
            bridge_correction: true,
            adaptive_steps: true,
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_paths == 0 {
            return Err(Error::ConfigInvalid("n_paths must be at least 1".into()));
        }
        if !(self.dt > 0.0 && self.dt <= 1.0 / 252.0) {
            return Err(Error::ConfigInvalid(format!(
                "dt must lie in (0, 1/252], got {}",
                self.dt
            )));
        }
        if !(self.horizon_cap > 0.0) || !self.horizon_cap.is_finite() {
            return Err(Error::ConfigInvalid(format!(
                "horizon_cap must be positive, got {}",
                self.horizon_cap
            )));
        }
        if !self.wealth.is_finite() {
            return Err(Error::ConfigInvalid("wealth must be finite".into()));
        }
        Ok(())
    }

    fn warnings(&self, lambda_min: f64) -> Vec<String> {
        let mut out = Vec::new();
        if self.horizon_cap < 50.0 / lambda_min {
            out.push(format!(
                "horizon_cap {} is below the recommended {}",
                self.horizon_cap,
                50.0 / lambda_min
            ));
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub name: String,
    pub value: f64,
    pub std_error: f64,
}

impl Estimate {
    fn probability(name: &str, hits: u64, n: u64) -> Self {
        let p = hits as f64 / n as f64;
        Self {
            name: name.to_string(),
            value: p,
            std_error: (p * (1.0 - p) / n as f64).sqrt(),
        }
    }

    fn exact(name: &str, value: f64) -> Self {
        Self {
            name: name.to_string(),
            value,
            std_error: 0.0,
        }
    }

    fn mean(name: &str, sum: f64, sum_sq: f64, n: u64) -> Self {
        let nf = n as f64;
        let mean = sum / nf;
        let var = if n > 1 {
            ((sum_sq - nf * mean * mean) / (nf - 1.0)).max(0.0)
        } else {
            0.0
        };
        Self {
            name: name.to_string(),
            value: mean,
            std_error: (var / nf).sqrt(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimResult {
    pub kind: String,
    pub n_paths: usize,
    /// Paths contributing to the estimates.
    pub n_effective: u64,
    /// Paths cut off by `horizon_cap` before the second death.
    pub n_truncated: u64,
    pub seed: u64,
    pub rng_fingerprint: String,
    pub estimates: Vec<Estimate>,
    pub warnings: Vec<String>,
}

impl SimResult {
    pub fn get(&self, name: &str) -> Option<&Estimate> {
        self.estimates.iter().find(|e| e.name == name)
    }

    pub fn value(&self, name: &str) -> f64 {
        self.get(name).map_or(f64::NAN, |e| e.value)
    }
}

/// RNG for path `index`.
pub fn path_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

fn fingerprint(seed: u64) -> String {
    let first = path_rng(seed, 0).next_u64();
    format!("chacha8:seed={seed:#018x}:stream=path-index:first={first:#018x}")
}

fn death_times<R: Rng>(rng: &mut R, lambda_x: f64, lambda_y: f64) -> (f64, f64) {
    // rates are validated positive upstream
    let tx = Exp::new(lambda_x).expect("positive hazard").sample(rng);
    let ty = Exp::new(lambda_y).expect("positive hazard").sample(rng);
    (tx, ty)
}

fn normal<R: Rng>(rng: &mut R) -> f64 {
    StandardNormal.sample(rng)
}

/// Outcome of running an arithmetic Brownian motion against a barrier at zero.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Passage {
    /// Reached zero; the time is exact for zero volatility and the end of the
    /// crossing step otherwise.
    Hit {
        time: f64,
    },
    Survived {
        end: f64,
    },
}

/// Run `x0 + drift t + vol B_t` for `horizon` years and report whether it reaches zero.
pub fn first_passage<R: Rng>(rng: &mut R, cfg: &SimConfig, x0: f64, drift: f64, vol: f64, horizon: f64) -> Passage {
    if x0 <= 0.0 {
        return Passage::Hit { time: 0.0 };
    }
    if vol == 0.0 {
        if drift < 0.0 && -x0 / drift <= horizon {
            return Passage::Hit { time: -x0 / drift };
        }
        return Passage::Survived {
            end: x0 + drift * horizon,
        };
    }
    let adaptive = cfg.bridge_correction && cfg.adaptive_steps;
    let mut t = 0.0;
    let mut x = x0;
    while t < horizon {
        let remaining = horizon - t;
        let h = if adaptive {
            (x / (STEP_SIGMAS * vol)).powi(2).max(cfg.dt).min(remaining)
        } else {
            cfg.dt.min(remaining)
        };
        let next = x + drift * h + vol * h.sqrt() * normal(rng);
        t = if h == remaining { horizon } else { t + h };
        if next <= 0.0 {
            return Passage::Hit { time: t };
        }
        if cfg.bridge_correction {
            let p = (-2.0 * x * next / (vol * vol * h)).exp();
            if rng.random::<f64>() < p {
                return Passage::Hit { time: t };
            }
        }
        x = next;
    }
    Passage::Survived { end: x }
}

#[derive(Debug, Clone, Copy, Default)]
struct RuinCounts {
    before: u64,
    between: u64,
    jump: u64,
    truncated: u64,
}

fn ruin_path(cfg: &SimConfig, inp: &RuinInputs, index: u64) -> RuinCounts {
    let mut rng = path_rng(cfg.seed, index);
    let mut out = RuinCounts::default();
    let (tx, ty) = death_times(&mut rng, inp.lambda_x, inp.lambda_y);
    let (t1, survivor) = if tx < ty { (tx, Survivor::Y) } else { (ty, Survivor::X) };
    let t2 = tx.max(ty);
    let vol = inp.variance_rate().sqrt();
    let cap = cfg.horizon_cap;
    if t2 > cap {
        out.truncated = 1;
    }
    match first_passage(&mut rng, cfg, inp.c0, inp.nu(), vol, t1.min(cap)) {
        Passage::Hit { .. } => out.before = 1,
        Passage::Survived { end } => {
            if t1 >= cap {
                return out;
            }
            let c = end + inp.jump(survivor);
            if c <= 0.0 {
                out.jump = 1;
            } else if let Passage::Hit { .. } =
                first_passage(&mut rng, cfg, c, inp.drift_after(survivor), vol, t2.min(cap) - t1)
            {
                out.between = 1;
            }
        }
    }
    out
}

fn chunks(n: usize) -> Vec<(u64, u64)> {
    (0..n)
        .step_by(CHUNK)
        .map(|s| (s as u64, (s + CHUNK).min(n) as u64))
        .collect()
}

/// Brute-force ruin probabilities for arbitrary consumption-process inputs.
pub fn estimate_ruin_from_inputs(cfg: &SimConfig, inputs: &RuinInputs) -> Result<SimResult> {
    cfg.validate()?;
    inputs.validate().map_err(|e| Error::ConfigInvalid(e.to_string()))?;
    let totals = chunks(cfg.n_paths)
        .par_iter()
        .map(|&(lo, hi)| {
            let mut acc = RuinCounts::default();
            for i in lo..hi {
                let c = ruin_path(cfg, inputs, i);
                acc.before += c.before;
                acc.between += c.between;
                acc.jump += c.jump;
                acc.truncated += c.truncated;
            }
            acc
        })
        .collect::<Vec<_>>()
        .into_iter()
        .fold(RuinCounts::default(), |a, c| RuinCounts {
            before: a.before + c.before,
            between: a.between + c.between,
            jump: a.jump + c.jump,
            truncated: a.truncated + c.truncated,
        });
    let n = cfg.n_paths as u64;
    Ok(SimResult {
        kind: "ruin".into(),
        n_paths: cfg.n_paths,
        n_effective: n,
        n_truncated: totals.truncated,
        seed: cfg.seed,
        rng_fingerprint: fingerprint(cfg.seed),
        estimates: vec![
            Estimate::probability("p_before_first_death", totals.before, n),
            Estimate::probability("p_between_deaths", totals.between, n),
            Estimate::probability("p_total", totals.before + totals.between, n),
            Estimate::probability("p_jump_at_first_death", totals.jump, n),
        ],
        warnings: cfg.warnings(inputs.lambda_x.min(inputs.lambda_y)),
    })
}

/// Brute-force ruin probabilities for the optimal policy started at `cfg.wealth`.
pub fn estimate_ruin_probability(cfg: &SimConfig, sol: &PolicySolution) -> Result<SimResult> {
    let inputs = RuinInputs::from_solution(sol, cfg.wealth);
    if !(inputs.c0 > 0.0) {
        return Err(Error::ConfigInvalid(format!(
            "initial consumption {} must be positive; raise the initial wealth",
            inputs.c0
        )));
    }
    estimate_ruin_from_inputs(cfg, &inputs)
}

/// State of one scheme's controlled wealth along a shared Brownian path.
struct Controlled<'a> {
    sol: &'a PolicySolution,
    wealth: f64,
    phase: Phase,
}

impl<'a> Controlled<'a> {
    fn new(sol: &'a PolicySolution, wealth: f64) -> Self {
        Self {
            sol,
            wealth: sol.wealth_after_purchase(wealth),
            phase: Phase::BeforeFirstDeath,
        }
    }

    fn consumption(&self) -> f64 {
        self.sol.consumption_rate(self.wealth, self.phase)
    }

    /// Advance wealth over `h` years with Brownian increment `db`. The drift
    /// is constant under the optimal feedback, so the step is exact.
    fn step(&mut self, h: f64, db: f64) {
        let s = self.sol;
        let (r, mu, sigma) = (s.market.r(), s.market.mu(), s.market.sigma());
        let pi = s.investment;
        let (income, premium) = match self.phase {
            Phase::BeforeFirstDeath => (s.household.total_income(), s.premium_outflow()),
            Phase::AfterFirstDeath(who) => (s.household.income(who), 0.0),
        };
        let c = self.consumption();
        self.wealth += (r * self.wealth + (mu - r) * pi + income - c - premium) * h + sigma * pi * db;
    }

    fn first_death(&mut self, survivor: Survivor) {
        self.wealth += self.sol.benefit;
        self.phase = Phase::AfterFirstDeath(survivor);
    }
}

/// Walk a Brownian path from 0 to `end`, stopping at every time in `stops`
/// and otherwise taking steps of at most `max_step`.
fn walk<R: Rng, F: FnMut(f64, f64, f64)>(rng: &mut R, max_step: f64, end: f64, stops: &[f64], mut on_step: F) {
    let mut t = 0.0;
    let mut next_stop = 0;
    while t < end {
        while next_stop < stops.len() && stops[next_stop] <= t {
            next_stop += 1;
        }
        let target = stops.get(next_stop).copied().unwrap_or(end).min(end);
        let t_next = (t + max_step).min(target);
        let h = t_next - t;
        let db = h.sqrt() * normal(rng);
        on_step(t_next, h, db);
        t = t_next;
    }
}

#[derive(Debug, Clone, Copy, Default)]
struct PathwiseGap {
    consumption: f64,
    wealth: f64,
    truncated: u64,
}

fn pathwise_gap(cfg: &SimConfig, single: &PolicySolution, cont: &PolicySolution, index: u64, dt: f64) -> PathwiseGap {
    let mut rng = path_rng(cfg.seed, index);
    let hh = &single.household;
    let (tx, ty) = death_times(&mut rng, hh.lambda_x(), hh.lambda_y());
    let (t1, survivor) = if tx < ty { (tx, Survivor::Y) } else { (ty, Survivor::X) };
    let end = tx.max(ty).min(cfg.horizon_cap);
    let mut a = Controlled::new(single, cfg.wealth);
    let mut b = Controlled::new(cont, cfg.wealth);
    let mut out = PathwiseGap {
        consumption: (a.consumption() - b.consumption()).abs(),
        wealth: (a.wealth - b.wealth).abs(),
        truncated: u64::from(tx.max(ty) > cfg.horizon_cap),
    };
    let mut died = false;
    walk(&mut rng, dt, end, &[t1], |t, h, db| {
        a.step(h, db);
        b.step(h, db);
        out.consumption = out.consumption.max((a.consumption() - b.consumption()).abs());
        out.wealth = out.wealth.max((a.wealth - b.wealth).abs());
        if !died && t >= t1 && t < end {
            died = true;
            a.first_death(survivor);
            b.first_death(survivor);
            out.consumption = out.consumption.max((a.consumption() - b.consumption()).abs());
        }
    });
    out
}

/// Drive two solved policies with the same Brownian increments and death
/// times and record the largest gap between their consumption rates.
///
/// Steps are `1/252` years regardless of `cfg.dt`.
pub fn compare_schemes_pathwise(cfg: &SimConfig, single: &PolicySolution, cont: &PolicySolution) -> Result<SimResult> {
    cfg.validate()?;
    if single.scheme() != Scheme::Single || cont.scheme() != Scheme::Continuous {
        return Err(Error::ConfigInvalid(
            "expected one single and one continuous policy".into(),
        ));
    }
    if single.household != cont.household || single.market != cont.market {
        return Err(Error::ConfigInvalid("policies must share market and household".into()));
    }
    let dt = 1.0 / 252.0;
    let parts: Vec<PathwiseGap> = chunks(cfg.n_paths)
        .par_iter()
        .map(|&(lo, hi)| {
            let mut acc = PathwiseGap::default();
            for i in lo..hi {
                let g = pathwise_gap(cfg, single, cont, i, dt);
                acc.consumption = acc.consumption.max(g.consumption);
                acc.wealth = acc.wealth.max(g.wealth);
                acc.truncated += g.truncated;
            }
            acc
        })
        .collect();
    let total = parts.into_iter().fold(PathwiseGap::default(), |a, g| PathwiseGap {
        consumption: a.consumption.max(g.consumption),
        wealth: a.wealth.max(g.wealth),
        truncated: a.truncated + g.truncated,
    });
    let hh = &single.household;
    Ok(SimResult {
        kind: "pathwise_comparison".into(),
        n_paths: cfg.n_paths,
        n_effective: cfg.n_paths as u64,
        n_truncated: total.truncated,
        seed: cfg.seed,
        rng_fingerprint: fingerprint(cfg.seed),
        estimates: vec![
            Estimate::exact("max_consumption_gap", total.consumption),
            Estimate::exact("max_wealth_gap", total.wealth),
        ],
        warnings: cfg.warnings(hh.lambda_x().min(hh.lambda_y())),
    })
}

/// Pathwise check that calibrated single and continuous premiums produce the
/// same consumption.
pub fn verify_scheme_equivalence(
    cfg: &SimConfig,
    market: &MarketParams,
    household: &HouseholdParams,
    loss_probability: f64,
) -> Result<SimResult> {
    let pair = calibrate_pair(market, household, loss_probability)?;
    let single = policy::solve(market, household, &pair.single)?;
    let cont = policy::solve(market, household, &pair.continuous)?;
    if single.benefit <= 0.0 || cont.benefit <= 0.0 {
        return Err(Error::InteriorOptimumRequired);
    }
    let mut res = compare_schemes_pathwise(cfg, &single, &cont)?;
    res.kind = "scheme_equivalence".into();
    Ok(res)
}

#[derive(Debug, Clone, Copy, Default)]
struct PathMoments {
    n_alive_5: u64,
    inc5: f64,
    inc5_sq: f64,
    n_alive_2: u64,
    inc_a: f64,
    inc_a_sq: f64,
    inc_b: f64,
    inc_b_sq: f64,
    inc_ab: f64,
    n_jump: u64,
    jump: f64,
    jump_sq: f64,
    truncated: u64,
}

impl PathMoments {
    fn add(&mut self, o: &PathMoments) {
        self.n_alive_5 += o.n_alive_5;
        self.inc5 += o.inc5;
        self.inc5_sq += o.inc5_sq;
        self.n_alive_2 += o.n_alive_2;
        self.inc_a += o.inc_a;
        self.inc_a_sq += o.inc_a_sq;
        self.inc_b += o.inc_b;
        self.inc_b_sq += o.inc_b_sq;
        self.inc_ab += o.inc_ab;
        self.n_jump += o.n_jump;
        self.jump += o.jump;
        self.jump_sq += o.jump_sq;
        self.truncated += o.truncated;
    }
}

fn consumption_moments(cfg: &SimConfig, sol: &PolicySolution, index: u64) -> PathMoments {
    let mut rng = path_rng(cfg.seed, index);
    let hh = &sol.household;
    let (tx, ty) = death_times(&mut rng, hh.lambda_x(), hh.lambda_y());
    let (t1, survivor) = if tx < ty { (tx, Survivor::Y) } else { (ty, Survivor::X) };
    let mut out = PathMoments {
        truncated: u64::from(tx.max(ty) > cfg.horizon_cap),
        ..Default::default()
    };
    let end = t1.min(5.0).min(cfg.horizon_cap);
    let mut path = Controlled::new(sol, cfg.wealth);
    let c0 = path.consumption();
    let mut marks = [c0; 3];
    let mut stops = vec![1.0, 2.0, 5.0];
    stops.retain(|&s| s < end);
    walk(&mut rng, f64::INFINITY, end, &stops, |t, h, db| {
        path.step(h, db);
        let c = path.consumption();
        if t == 1.0 {
            marks[1] = c;
        } else if t == 2.0 {
            marks[2] = c;
        }
        if t == 5.0 && t1 > 5.0 {
            out.n_alive_5 = 1;
            out.inc5 = c - c0;
            out.inc5_sq = (c - c0).powi(2);
        }
    });
    if t1 > 2.0 {
        let (a, b) = (marks[1] - marks[0], marks[2] - marks[1]);
        out.n_alive_2 = 1;
        out.inc_a = a;
        out.inc_a_sq = a * a;
        out.inc_b = b;
        out.inc_b_sq = b * b;
        out.inc_ab = a * b;
    }
    if t1 <= 5.0 && t1 < cfg.horizon_cap {
        let before = path.consumption();
        path.first_death(survivor);
        let j = path.consumption() - before;
        out.n_jump = 1;
        out.jump = j;
        out.jump_sq = j * j;
    }
    out
}

/// Simulate optimally controlled paths and summarize the consumption process:
/// its mean drift, increment variance and independence before the first
/// death, and the jump at the first death.
pub fn simulate_consumption_paths(cfg: &SimConfig, sol: &PolicySolution) -> Result<SimResult> {
    cfg.validate()?;
    let parts: Vec<PathMoments> = chunks(cfg.n_paths)
        .par_iter()
        .map(|&(lo, hi)| {
            let mut acc = PathMoments::default();
            for i in lo..hi {
                acc.add(&consumption_moments(cfg, sol, i));
            }
            acc
        })
        .collect();
    let mut m = PathMoments::default();
    for p in &parts {
        m.add(p);
    }
    let r = sol.market.r();
    let n2 = m.n_alive_2.max(1) as f64;
    let mean_a = m.inc_a / n2;
    let mean_b = m.inc_b / n2;
    let var_a = m.inc_a_sq / n2 - mean_a * mean_a;
    let var_b = m.inc_b_sq / n2 - mean_b * mean_b;
    let cov = m.inc_ab / n2 - mean_a * mean_b;
    let var_pool = 0.5 * (var_a + var_b);
    let hh = &sol.household;
    let lam = hh.total_hazard();
    let expected_jump = (hh.lambda_y() * sol.consumption_jump_x + hh.lambda_x() * sol.consumption_jump_y) / lam;
    Ok(SimResult {
        kind: "consumption_paths".into(),
        n_paths: cfg.n_paths,
        n_effective: m.n_alive_5,
        n_truncated: m.truncated,
        seed: cfg.seed,
        rng_fingerprint: fingerprint(cfg.seed),
        estimates: vec![
            Estimate::mean("mean_increment_t5", m.inc5, m.inc5_sq, m.n_alive_5),
            Estimate::exact("expected_increment_t5", r * sol.drift * 5.0),
            Estimate {
                name: "increment_variance_rate".into(),
                value: var_pool,
                std_error: var_pool * (1.0 / n2).sqrt(),
            },
            Estimate::exact("expected_variance_rate", 2.0 * sol.market.m() / hh.alpha().powi(2)),
            Estimate {
                name: "increment_correlation".into(),
                value: cov / (var_a * var_b).sqrt(),
                std_error: (1.0 / n2).sqrt(),
            },
            Estimate::mean("mean_jump", m.jump, m.jump_sq, m.n_jump),
            Estimate::exact("expected_jump", expected_jump),
        ],
        warnings: cfg.warnings(hh.lambda_x().min(hh.lambda_y())),
    })
}

/// One simulated path of the single- or continuous-premium policy on the `dt` grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PathSample {
    pub tau_x: f64,
    pub tau_y: f64,
    pub times: Vec<f64>,
    pub wealth: Vec<f64>,
    pub consumption: Vec<f64>,
}

/// Sample path `index` up to the second death or the horizon cap.
pub fn sample_path(cfg: &SimConfig, sol: &PolicySolution, index: u64) -> Result<PathSample> {
    cfg.validate()?;
    let mut rng = path_rng(cfg.seed, index);
    let hh = &sol.household;
    let (tx, ty) = death_times(&mut rng, hh.lambda_x(), hh.lambda_y());
    let (t1, survivor) = if tx < ty { (tx, Survivor::Y) } else { (ty, Survivor::X) };
    let end = tx.max(ty).min(cfg.horizon_cap);
    let mut path = Controlled::new(sol, cfg.wealth);
    let mut out = PathSample {
        tau_x: tx,
        tau_y: ty,
        times: vec![0.0],
        wealth: vec![path.wealth],
        consumption: vec![path.consumption()],
    };
    let mut died = false;
    walk(&mut rng, cfg.dt, end, &[t1], |t, h, db| {
        path.step(h, db);
        out.times.push(t);
        out.wealth.push(path.wealth);
        out.consumption.push(path.consumption());
        if !died && t >= t1 && t < end {
            died = true;
            path.first_death(survivor);
            out.times.push(t);
            out.wealth.push(path.wealth);
            out.consumption.push(path.consumption());
        }
    });
    Ok(out)
}

/// Probability that the insurer loses money on each contract, with the
/// first death drawn from the two exponential lifetimes.
pub fn estimate_insurer_loss_probability(
    cfg: &SimConfig,
    market: &MarketParams,
    household: &HouseholdParams,
    quotes: &QuotePair,
    benefits: (f64, f64),
) -> Result<SimResult> {
    cfg.validate()?;
    let r = market.r();
    let (h_single, h_cont) = (quotes.single.rate(), quotes.continuous.rate());
    let (d_single, d_cont) = benefits;
    let counts: Vec<(u64, u64)> = chunks(cfg.n_paths)
        .par_iter()
        .map(|&(lo, hi)| {
            let mut acc = (0u64, 0u64);
            for i in lo..hi {
                let mut rng = path_rng(cfg.seed, i);
                let (tx, ty) = death_times(&mut rng, household.lambda_x(), household.lambda_y());
                let disc = (-r * tx.min(ty)).exp();
                let annuity = -(-r * tx.min(ty)).exp_m1() / r;
                if d_single * (disc - h_single) > 0.0 {
                    acc.0 += 1;
                }
                if d_cont * (disc - h_cont * annuity) > 0.0 {
                    acc.1 += 1;
                }
            }
            acc
        })
        .collect();
    let (a, b) = counts.iter().fold((0, 0), |s, c| (s.0 + c.0, s.1 + c.1));
    let n = cfg.n_paths as u64;
    Ok(SimResult {
        kind: "insurer_loss".into(),
        n_paths: cfg.n_paths,
        n_effective: n,
        n_truncated: 0,
        seed: cfg.seed,
        rng_fingerprint: fingerprint(cfg.seed),
        estimates: vec![
            Estimate::probability("p_loss_single", a, n),
            Estimate::probability("p_loss_continuous", b, n),
        ],
        warnings: Vec::new(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::single_premium;

    fn base() -> (MarketParams, HouseholdParams) {
        (
            MarketParams::new(0.02, 0.06, 0.2).unwrap(),
            HouseholdParams::new(0.04, 0.03, 2.0, 1.5, 2.0).unwrap(),
        )
    }

    #[test]
    fn config_validation() {
        let bad = SimConfig {
            dt: 0.01,
            ..Default::default()
        };
        assert!(matches!(bad.validate(), Err(Error::ConfigInvalid(_))));
        let bad = SimConfig {
            n_paths: 0,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn zero_volatility_crossing_is_exact() {
        let cfg = SimConfig::default();
        let mut rng = path_rng(1, 0);
        assert_eq!(
            first_passage(&mut rng, &cfg, 1.0, -0.25, 0.0, 10.0),
            Passage::Hit { time: 4.0 }
        );
        assert_eq!(
            first_passage(&mut rng, &cfg, 1.0, -0.25, 0.0, 3.0),
            Passage::Survived { end: 0.25 }
        );
    }

    #[test]
    fn path_streams_differ() {
        assert_ne!(path_rng(7, 0).next_u64(), path_rng(7, 1).next_u64());
        assert_eq!(path_rng(7, 3).next_u64(), path_rng(7, 3).next_u64());
    }

    #[test]
    fn sample_path_jumps_at_first_death() {
        let (mkt, hh) = base();
        let sol = policy::solve(&mkt, &hh, &single_premium(&mkt, &hh, 0.0).unwrap()).unwrap();
        let cfg = SimConfig {
            dt: 1.0 / 252.0,
            wealth: 10.0,
            ..Default::default()
        };
        let p = sample_path(&cfg, &sol, 0).unwrap();
        let t1 = p.tau_x.min(p.tau_y);
        let i = p.times.iter().position(|&t| t == t1).unwrap();
        let jump = p.consumption[i + 1] - p.consumption[i];
        let expected = if p.tau_x < p.tau_y {
            sol.consumption_jump_y
        } else {
            sol.consumption_jump_x
        };
        assert!((jump - expected).abs() < 1e-9);
        assert!((p.consumption[0] - sol.initial_consumption(10.0)).abs() < 1e-12);
    }
}
