//! Independent oracles shared by the integration tests.
#![allow(dead_code)]

use lifecover::model::{HouseholdParams, MarketParams};
use rand::Rng;

/// `∫_a^b f` by tanh-sinh quadrature; `f` should be smooth inside the interval.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64) -> f64 {
    quadrature::double_exponential::integrate(f, a, b, 1e-14).integral
}

/// `∫_0^∞ g(t) dt` via `t = e^u`, split into unit pieces in `u`.
pub fn integrate_positive_axis<F: Fn(f64) -> f64>(g: F, u_lo: f64, u_hi: f64) -> f64 {
    let h = |u: f64| {
        let t = u.exp();
        g(t) * t
    };
    let n = (u_hi - u_lo).ceil() as usize;
    let step = (u_hi - u_lo) / n as f64;
    (0..n)
        .map(|i| integrate(h, u_lo + i as f64 * step, u_lo + (i + 1) as f64 * step))
        .sum()
}

/// Plain bisection for `ln k` in `k (r ln k + A) = B`, on the branch `r ln k + A > 0`.
///
/// Works in `u = ln(r ln k + A)`, which ranges over the whole real line.
pub fn k_by_bisection(r: f64, a: f64, ln_b: f64) -> f64 {
    let ln_k = |u: f64| (u.exp() - a) / r;
    let f = |u: f64| ln_k(u) + u - ln_b;
    let (mut lo, mut hi) = (-700.0, 1.0);
    assert!(f(lo) < 0.0);
    while f(hi) < 0.0 {
        hi += 1.0;
    }
    for _ in 0..2000 {
        let mid = 0.5 * (lo + hi);
        if mid == lo || mid == hi {
            break;
        }
        if f(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    ln_k(0.5 * (lo + hi))
}

/// The worked example household: r 2%, μ 6%, σ 20%, hazards 4% and 3%,
/// incomes $100k and $75k, α = 2.
pub fn baseline() -> (MarketParams, HouseholdParams) {
    (
        MarketParams::new(0.02, 0.06, 0.2).unwrap(),
        HouseholdParams::new(0.04, 0.03, 2.0, 1.5, 2.0).unwrap(),
    )
}

/// Minimizer of a smooth unimodal `f` on `[lo, hi]`.
///
/// Golden-section search brackets the minimum; values alone cannot place a
/// flat minimum much better than `sqrt(eps)`, so the bracket is then bisected
/// on the sign of a central difference.
pub fn argmin<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64) -> f64 {
    let coarse = lifecover::numerics::golden_section_min(&f, lo, hi, 1e-6);
    let step = 1e-4;
    let slope = |x: f64| f(x + step) - f(x - step);
    let (mut a, mut b) = ((coarse - 1e-2).max(lo + step), (coarse + 1e-2).min(hi - step));
    if slope(a) >= 0.0 || slope(b) <= 0.0 {
        return coarse;
    }
    for _ in 0..100 {
        let mid = 0.5 * (a + b);
        if slope(mid) < 0.0 {
            a = mid;
        } else {
            b = mid;
        }
    }
    0.5 * (a + b)
}

/// Random market and household over the ranges used by the property suites.
pub fn draw_params<R: Rng>(rng: &mut R) -> (MarketParams, HouseholdParams) {
    let r = rng.random_range(0.005..0.06);
    let mu = r + rng.random_range(0.01..0.1);
    let sigma = rng.random_range(0.1..0.4);
    let lx = rng.random_range(0.005..0.1);
    let ly = rng.random_range(0.005..0.1);
    let ix = rng.random_range(0.0..5.0);
    let iy = rng.random_range(0.0..5.0);
    let alpha = rng.random_range(0.1..5.0);
    (
        MarketParams::new(r, mu, sigma).unwrap(),
        HouseholdParams::new(lx, ly, ix, iy, alpha).unwrap(),
    )
}

/// Largest single-premium loading that keeps `H < 1`, shrunk by `frac`.
pub fn viable_loading(market: &MarketParams, household: &HouseholdParams, frac: f64) -> f64 {
    frac * market.r() / household.total_hazard()
}

pub fn rel(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (a - b).abs() / a.abs().max(b.abs())
    }
}
