//! Pointwise check of the variational inequality on a `(w, D)` grid.

use rayon::prelude::*;
use serde::Serialize;

use super::PolicySolution;
use crate::error::{Error, Result};
use crate::ksolve::{merton_value, ValueCoefficient};
use crate::model::{HouseholdParams, MarketParams, Scheme};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct VerifyGrid {
    pub w_min: f64,
    pub w_max: f64,
    pub n_w: usize,
    pub d_min: f64,
    pub d_max: f64,
    pub n_d: usize,
}

impl VerifyGrid {
    /// `w` in `[-20, 60]`, `D` in `[0, 1.5 max(I)/r]`, 201 by 161 points.
    pub fn default_for(market: &MarketParams, household: &HouseholdParams) -> Self {
        let top = household.income_x().max(household.income_y()) / market.r();
        Self {
            w_min: -20.0,
            w_max: 60.0,
            n_w: 201,
            d_min: 0.0,
            d_max: if top > 0.0 { 1.5 * top } else { 1.0 },
            n_d: 161,
        }
    }

    fn validate(&self) -> Result<()> {
        let ok = self.w_min.is_finite()
            && self.w_max.is_finite()
            && self.d_min.is_finite()
            && self.d_max.is_finite()
            && self.w_max > self.w_min
            && self.d_max > self.d_min
            && self.d_min >= 0.0
            && self.n_w >= 2
            && self.n_d >= 2;
        if ok {
            Ok(())
        } else {
            Err(Error::invalid("grid", format!("{self:?} is not a valid grid")))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct VerifyOptions {
    pub tol: f64,
    /// Also compare analytic derivatives against central differences.
    pub finite_difference: bool,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self {
            tol: 1e-6,
            finite_difference: false,
        }
    }
}

/// Largest discrepancy found and where.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WorstPoint {
    pub w: f64,
    pub benefit: f64,
    pub check: String,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerificationReport {
    pub scheme: Scheme,
    pub points: usize,
    pub tol: f64,
    /// `|L U| / scale` where the benefit is at or above the optimum.
    pub max_hjb_residual: f64,
    /// `L U / scale` below the optimum; must not be positive.
    pub max_operator_excess: f64,
    /// Gradient constraint divided by `U_w`; must not be positive.
    pub max_gradient_excess: f64,
    /// Gradient constraint at the optimal benefit; must vanish when it is interior.
    pub boundary_gradient_gap: f64,
    /// `|ln k - ln k_rhs|` at an interior optimum.
    pub boundary_coefficient_gap: Option<f64>,
    pub fd_max_discrepancy: Option<f64>,
    pub worst: Option<WorstPoint>,
    pub passed: bool,
}

#[derive(Debug, Clone, Copy)]
struct Derivs {
    u: f64,
    u_w: f64,
    u_ww: f64,
    u_d: f64,
}

struct Evaluator<'a> {
    sol: &'a PolicySolution,
    ar: f64,
}

impl<'a> Evaluator<'a> {
    fn new(sol: &'a PolicySolution) -> Self {
        Self {
            sol,
            ar: sol.household.alpha() * sol.market.r(),
        }
    }

    fn coefficient(&self, benefit: f64) -> Result<ValueCoefficient> {
        let s = self.sol;
        match s.scheme() {
            Scheme::Single => crate::ksolve::solve_k(&s.market, &s.household, benefit),
            Scheme::Continuous => crate::ksolve::solve_k_bar(&s.market, &s.household, s.quote.rate(), benefit),
        }
    }

    fn derivs(&self, w: f64, benefit: f64, above: Option<&ValueCoefficient>) -> Derivs {
        let s = self.sol;
        let ar = self.ar;
        match above {
            Some(c) => {
                let e = (c.ln_k - ar * w).exp();
                let slope = c.slope(&s.market, &s.household);
                Derivs {
                    u: -e / ar,
                    u_w: e,
                    u_ww: -ar * e,
                    u_d: -(slope / c.k) * e / ar,
                }
            }
            None => {
                let c = &s.coefficient;
                let (shift, grad) = match s.scheme() {
                    Scheme::Single => (s.quote.rate() * (s.benefit - benefit), s.quote.rate()),
                    Scheme::Continuous => (0.0, 0.0),
                };
                let e = (c.ln_k - ar * (w - shift)).exp();
                Derivs {
                    u: -e / ar,
                    u_w: e,
                    u_ww: -ar * e,
                    u_d: grad * e,
                }
            }
        }
    }

    /// Terms of `L^{c,π} U` at the given controls. The continuous premium is
    /// folded into the wealth drift.
    fn terms(&self, w: f64, benefit: f64, d: &Derivs, c: f64, pi: f64) -> [f64; 6] {
        let s = self.sol;
        let (mkt, hh) = (&s.market, &s.household);
        let (r, mu, sigma, alpha) = (mkt.r(), mkt.mu(), mkt.sigma(), hh.alpha());
        let lam = hh.total_hazard();
        let drift = r * w + (mu - r) * pi + hh.total_income() - c - s.quote_rate_flow(benefit);
        [
            drift * d.u_w,
            0.5 * sigma * sigma * pi * pi * d.u_ww,
            -(-alpha * c).exp() / alpha,
            -(r + lam) * d.u,
            hh.lambda_x() * merton_value(mkt, alpha, hh.lambda_y(), hh.income_y(), w + benefit),
            hh.lambda_y() * merton_value(mkt, alpha, hh.lambda_x(), hh.income_x(), w + benefit),
        ]
    }

    fn maximizers(&self, d: &Derivs) -> (f64, f64) {
        let mkt = &self.sol.market;
        let c = -d.u_w.ln() / self.sol.household.alpha();
        let pi = -(mkt.mu() - mkt.r()) * d.u_w / (mkt.sigma().powi(2) * d.u_ww);
        (c, pi)
    }
}

impl PolicySolution {
    fn quote_rate_flow(&self, benefit: f64) -> f64 {
        match self.scheme() {
            Scheme::Single => 0.0,
            Scheme::Continuous => self.quote.rate() * benefit,
        }
    }
}

/// `L^{c,π} U(w, D)` for arbitrary controls, using the closed-form value function.
pub fn generator(sol: &PolicySolution, w: f64, benefit: f64, consumption: f64, investment: f64) -> Result<f64> {
    let ev = Evaluator::new(sol);
    let above = if benefit >= sol.benefit {
        Some(ev.coefficient(benefit)?)
    } else {
        None
    };
    let d = ev.derivs(w, benefit, above.as_ref());
    Ok(ev.terms(w, benefit, &d, consumption, investment).iter().sum())
}

#[derive(Debug, Clone, Default)]
struct Partial {
    hjb: f64,
    operator_excess: f64,
    gradient_excess: f64,
    boundary_gap: f64,
    fd: f64,
    worst: Option<(f64, WorstPoint)>,
}

impl Partial {
    fn note(&mut self, w: f64, benefit: f64, check: &str, value: f64, tol: f64) {
        let badness = value / tol;
        if self.worst.as_ref().is_none_or(|(b, _)| badness > *b) {
            self.worst = Some((
                badness,
                WorstPoint {
                    w,
                    benefit,
                    check: check.to_string(),
                    value,
                },
            ));
        }
    }

    fn merge(mut self, other: Partial) -> Partial {
        self.hjb = self.hjb.max(other.hjb);
        self.operator_excess = self.operator_excess.max(other.operator_excess);
        self.gradient_excess = self.gradient_excess.max(other.gradient_excess);
        self.boundary_gap = self.boundary_gap.max(other.boundary_gap);
        self.fd = self.fd.max(other.fd);
        if let Some((b, p)) = other.worst {
            if self.worst.as_ref().is_none_or(|(a, _)| b > *a) {
                self.worst = Some((b, p));
            }
        }
        self
    }
}

fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
}

/// Evaluate the variational inequality on the grid without failing.
pub fn evaluate_variational_inequality(
    sol: &PolicySolution,
    grid: &VerifyGrid,
    options: &VerifyOptions,
) -> Result<VerificationReport> {
    grid.validate()?;
    if !(options.tol > 0.0) {
        return Err(Error::invalid("tol", "must be positive"));
    }
    let tol = options.tol;
    let ev = Evaluator::new(sol);
    let ws = linspace(grid.w_min, grid.w_max, grid.n_w);
    let mut ds = linspace(grid.d_min, grid.d_max, grid.n_d);
    if sol.benefit >= grid.d_min && sol.benefit <= grid.d_max && !ds.contains(&sol.benefit) {
        ds.push(sol.benefit);
        ds.sort_by(f64::total_cmp);
    }
    let coeffs: Vec<Option<ValueCoefficient>> = ds
        .iter()
        .map(|&d| {
            if d >= sol.benefit {
                ev.coefficient(d).map(Some)
            } else {
                Ok(None)
            }
        })
        .collect::<Result<_>>()?;

    let rows: Vec<Partial> = ws
        .par_iter()
        .map(|&w| {
            let mut part = Partial::default();
            for (j, &d) in ds.iter().enumerate() {
                let above = coeffs[j].as_ref();
                let der = ev.derivs(w, d, above);
                let (c, pi) = ev.maximizers(&der);
                let terms = ev.terms(w, d, &der, c, pi);
                let scale: f64 = terms.iter().map(|t| t.abs()).sum();
                let l = terms.iter().sum::<f64>() / scale;
                if above.is_some() {
                    part.hjb = part.hjb.max(l.abs());
                    part.note(w, d, "hjb_residual", l.abs(), tol);
                } else {
                    part.operator_excess = part.operator_excess.max(l);
                    part.note(w, d, "operator_excess", l, tol);
                }
                let grad = match sol.scheme() {
                    Scheme::Single => der.u_d - sol.quote.rate() * der.u_w,
                    Scheme::Continuous => der.u_d,
                } / der.u_w;
                part.gradient_excess = part.gradient_excess.max(grad);
                part.note(w, d, "gradient_excess", grad, tol);
                if d == sol.benefit && sol.benefit > 0.0 {
                    part.boundary_gap = part.boundary_gap.max(grad.abs());
                    part.note(w, d, "boundary_gradient_gap", grad.abs(), tol);
                }
                if options.finite_difference {
                    let fd = fd_discrepancy(sol, w, d, &der);
                    part.fd = part.fd.max(fd);
                    part.note(w, d, "fd_discrepancy", fd, FD_TOL);
                }
            }
            part
        })
        .collect();
    let total = rows.into_iter().fold(Partial::default(), Partial::merge);

    let boundary_coefficient_gap = (sol.benefit > 0.0).then(|| {
        let (mkt, hh) = (&sol.market, &sol.household);
        let a = crate::ksolve::a_term(mkt, hh);
        let r = mkt.r();
        let rate = sol.quote.rate();
        let rhs = match sol.scheme() {
            Scheme::Single => rate / (1.0 - rate) - a / r,
            Scheme::Continuous => rate / r + hh.alpha() * rate * sol.benefit - a / r,
        };
        (sol.coefficient.ln_k - rhs).abs()
    });

    let passed = total.hjb <= tol
        && total.operator_excess <= tol
        && total.gradient_excess <= tol
        && total.boundary_gap <= tol
        && boundary_coefficient_gap.is_none_or(|g| g <= 1e-10)
        && (!options.finite_difference || total.fd <= FD_TOL);
    Ok(VerificationReport {
        scheme: sol.scheme(),
        points: ws.len() * ds.len(),
        tol,
        max_hjb_residual: total.hjb,
        max_operator_excess: total.operator_excess,
        max_gradient_excess: total.gradient_excess,
        boundary_gradient_gap: total.boundary_gap,
        boundary_coefficient_gap,
        fd_max_discrepancy: options.finite_difference.then_some(total.fd),
        worst: total.worst.map(|(_, p)| p),
        passed,
    })
}

const FD_TOL: f64 = 1e-4;

fn fd_discrepancy(sol: &PolicySolution, w: f64, d: f64, an: &Derivs) -> f64 {
    let value = |w: f64, d: f64| sol.value(w, d).unwrap_or(f64::NAN);
    // natural length scale of the exponential in w
    let scale = 1.0 / (sol.household.alpha() * sol.market.r());
    let hw = 1e-5 * w.abs().max(scale);
    let hd = 1e-5 * d.abs().max(scale);
    let u0 = value(w, d);
    let up = value(w + hw, d);
    let um = value(w - hw, d);
    let u_w = (up - um) / (2.0 * hw);
    let u_ww = (up - 2.0 * u0 + um) / (hw * hw);
    let u_d = if d - hd >= 0.0 {
        (value(w, d + hd) - value(w, d - hd)) / (2.0 * hd)
    } else {
        (value(w, d + hd) - u0) / hd
    };
    let e1 = (u_w - an.u_w).abs() / an.u_w.abs();
    let e2 = (u_ww - an.u_ww).abs() / an.u_ww.abs();
    let e3 = (u_d - an.u_d).abs() / an.u_w.abs();
    e1.max(e2).max(e3)
}

/// Evaluate the variational inequality and fail at the worst violation.
pub fn verify_variational_inequality(
    sol: &PolicySolution,
    grid: &VerifyGrid,
    options: &VerifyOptions,
) -> Result<VerificationReport> {
    let report = evaluate_variational_inequality(sol, grid, options)?;
    if report.passed {
        return Ok(report);
    }
    let worst = report.worst.clone().unwrap_or(WorstPoint {
        w: f64::NAN,
        benefit: f64::NAN,
        check: "boundary_coefficient_gap".into(),
        value: report.boundary_coefficient_gap.unwrap_or(f64::NAN),
    });
    Err(Error::VerificationFailed {
        w: worst.w,
        benefit: worst.benefit,
        check: worst.check,
        value: worst.value,
        tol: options.tol,
    })
}
