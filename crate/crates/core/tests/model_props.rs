mod common;

use common::{baseline, draw_params, rel};
use lifecover::model::{
    calibrate_pair, calibrate_to_loss_probability, continuous_premium, elicit_risk_aversion, exponential_premium,
    implied_loss_probability, max_loss_probability, quote_from_rate, single_premium, HouseholdParams, MarketParams,
    Scheme,
};
use lifecover::Error;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[test]
fn baseline_quotes() {
    let (mkt, hh) = baseline();
    let s = single_premium(&mkt, &hh, 0.0).unwrap();
    let c = continuous_premium(&mkt, &hh, 0.0).unwrap();
    assert!(rel(s.rate(), 7.0 / 9.0) < 1e-15);
    assert!(rel(c.rate(), 0.07) < 1e-15);
    // fair pricing in both schemes loses with the same probability
    let q = 1.0 - (7.0f64 / 9.0).powf(3.5);
    assert!(rel(s.loss_probability(), q) < 1e-13);
    assert!(rel(c.loss_probability(), q) < 1e-13);
    assert!(rel(max_loss_probability(&mkt, &hh), q) < 1e-13);
}

#[test]
fn loaded_quotes() {
    let (mkt, hh) = baseline();
    assert!(rel(single_premium(&mkt, &hh, 0.2).unwrap().rate(), 14.0 / 15.0) < 1e-15);
    assert!(rel(continuous_premium(&mkt, &hh, 0.5).unwrap().rate(), 0.105) < 1e-15);
    let pair = calibrate_pair(&mkt, &hh, 0.3).unwrap();
    assert!(rel(pair.single.rate(), 0.7f64.powf(2.0 / 7.0)) < 1e-15);
    let h = pair.single.rate();
    assert!(rel(pair.continuous.rate(), 0.02 * h / (1.0 - h)) < 1e-14);
}

#[test]
fn unviable_single_premium() {
    let (mkt, hh) = baseline();
    // (1 + θ) 0.07 / 0.09 >= 1 once θ >= 2/7
    assert!(matches!(
        single_premium(&mkt, &hh, 0.3),
        Err(Error::PremiumNotViable { .. })
    ));
    assert!(single_premium(&mkt, &hh, 0.28).is_ok());
    assert!(matches!(
        quote_from_rate(&mkt, &hh, Scheme::Single, 1.2),
        Err(Error::PremiumNotViable { .. })
    ));
    assert!(continuous_premium(&mkt, &hh, -0.1).is_err());
    let err = quote_from_rate(&mkt, &hh, Scheme::Continuous, 0.05).unwrap_err();
    assert_eq!(err.field(), Some("rate"));
}

#[test]
fn loss_probability_bounds() {
    let (mkt, hh) = baseline();
    let q_max = max_loss_probability(&mkt, &hh);
    assert!(calibrate_to_loss_probability(&mkt, &hh, q_max, Scheme::Single).is_ok());
    assert!(matches!(
        calibrate_to_loss_probability(&mkt, &hh, q_max * 1.01, Scheme::Continuous),
        Err(Error::LossProbabilityTooHigh { .. })
    ));
    assert!(calibrate_to_loss_probability(&mkt, &hh, 0.0, Scheme::Single).is_err());
    let at_max = calibrate_pair(&mkt, &hh, q_max).unwrap();
    assert!(at_max.single.loading().abs() < 1e-12);
    assert!(at_max.continuous.loading().abs() < 1e-12);
}

#[test]
fn calibrated_pairs_satisfy_rate_identity() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..1000 {
        let (mkt, hh) = draw_params(&mut rng);
        let q = max_loss_probability(&mkt, &hh) * rand::Rng::random_range(&mut rng, 0.01..1.0);
        let pair = calibrate_pair(&mkt, &hh, q).unwrap();
        let (big_h, h) = (pair.single.rate(), pair.continuous.rate());
        // evaluating the right side from a rounded H costs about eps/(1 - H)
        let cond = 1e-14 + 4.0 * f64::EPSILON / (1.0 - big_h);
        assert!(rel(h, mkt.r() * big_h / (1.0 - big_h)) < cond);
        assert!(rel(big_h, h / (h + mkt.r())) < 1e-14);
        assert!(rel(implied_loss_probability(&mkt, &hh, &pair.continuous), q) < 1e-10);
        assert!(pair.continuous.loading() >= pair.single.loading() - 1e-12);
    }
}

#[test]
fn elicitation_recovers_known_alpha() {
    let (loss, p) = (0.2, 0.01);
    let wtp = exponential_premium(2.0, loss, p);
    // $10,000 loss at 1%: an α = 2 household pays about $122.65
    assert!((wtp * 50_000.0 - 122.65).abs() < 0.01, "{wtp}");
    let a = elicit_risk_aversion(loss, p, 122.65 / 50_000.0).unwrap();
    assert!((a - 2.0).abs() < 1e-3, "{a}");
    assert!(matches!(
        elicit_risk_aversion(loss, p, 0.002),
        Err(Error::NoSolution { .. })
    ));
    assert!(matches!(
        elicit_risk_aversion(loss, p, 0.2),
        Err(Error::NoSolution { .. })
    ));
    assert_eq!(elicit_risk_aversion(-1.0, p, 0.1).unwrap_err().field(), Some("loss"));

    let forward = exponential_premium(1.0, 1.0, 0.1);
    assert!(rel(forward, (0.1 * std::f64::consts::E + 0.9).ln()) < 1e-15);
    assert!((forward - 0.158565).abs() < 1e-6);
    assert!((elicit_risk_aversion(1.0, 0.1, forward).unwrap() - 1.0).abs() < 1e-9);
    // just above the expected loss the household is nearly risk neutral
    assert!(elicit_risk_aversion(loss, p, loss * p * (1.0 + 1e-9)).unwrap() < 1e-6);
}

#[test]
fn exponential_premium_branches_join() {
    for &(alpha, loss, p) in &[(30.0, 1.0, 0.01), (3.0, 10.0, 0.5), (60.0, 0.5, 1e-6)] {
        let z: f64 = alpha * loss;
        let naive = (p * z.exp() + 1.0 - p).ln() / alpha;
        assert!(rel(exponential_premium(alpha, loss, p), naive) < 1e-13);
    }
    assert!(exponential_premium(1e4, 1.0, 0.01).is_finite());
}

proptest! {
    #[test]
    fn single_round_trip(
        r in 0.005f64..0.08, lx in 0.001f64..0.2, ly in 0.001f64..0.2, frac in 1e-3f64..1.0,
    ) {
        let mkt = MarketParams::new(r, r + 0.04, 0.2).unwrap();
        let hh = HouseholdParams::new(lx, ly, 1.0, 1.0, 1.0).unwrap();
        let q_max = max_loss_probability(&mkt, &hh);
        let q = (q_max * frac).max(1e-3).min(q_max);
        let quote = calibrate_to_loss_probability(&mkt, &hh, q, Scheme::Single).unwrap();
        prop_assert!(rel(implied_loss_probability(&mkt, &hh, &quote), q) < 1e-12);
        let again = quote_from_rate(&mkt, &hh, Scheme::Single, quote.rate()).unwrap();
        prop_assert!((again.loading() - quote.loading()).abs() < 1e-12);
    }

    #[test]
    fn continuous_round_trip(
        r in 0.005f64..0.08, lx in 0.001f64..0.2, ly in 0.001f64..0.2, ln_frac in -20f64..0.0,
    ) {
        let mkt = MarketParams::new(r, r + 0.04, 0.2).unwrap();
        let hh = HouseholdParams::new(lx, ly, 1.0, 1.0, 1.0).unwrap();
        let q = max_loss_probability(&mkt, &hh) * ln_frac.exp();
        let quote = calibrate_to_loss_probability(&mkt, &hh, q, Scheme::Continuous).unwrap();
        prop_assert!(rel(implied_loss_probability(&mkt, &hh, &quote), q) < 1e-12);
    }

    #[test]
    fn loss_probability_falls_with_loading(
        r in 0.005f64..0.08, lam in 0.002f64..0.2, t1 in 0.0f64..2.0, dt in 1e-3f64..2.0,
    ) {
        let mkt = MarketParams::new(r, r + 0.04, 0.2).unwrap();
        let hh = HouseholdParams::new(lam / 2.0, lam / 2.0, 1.0, 1.0, 1.0).unwrap();
        let a = continuous_premium(&mkt, &hh, t1).unwrap();
        let b = continuous_premium(&mkt, &hh, t1 + dt).unwrap();
        prop_assert!(b.loss_probability() < a.loss_probability());
    }

    #[test]
    fn elicitation_is_monotone(loss in 0.01f64..5.0, p in 1e-4f64..0.5, u1 in 0.01f64..0.98, du in 0.001f64..0.01) {
        let lower = p * loss;
        let wtp = |u: f64| lower + u * (loss - lower);
        let a1 = elicit_risk_aversion(loss, p, wtp(u1)).unwrap();
        let a2 = elicit_risk_aversion(loss, p, wtp(u1 + du)).unwrap();
        prop_assert!(a2 > a1);
        prop_assert!(rel(exponential_premium(a1, loss, p), wtp(u1)) < 1e-9);
    }
}
