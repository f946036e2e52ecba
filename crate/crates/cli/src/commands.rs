use lifecover::config::ConfigDocument;
use lifecover::model::{max_loss_probability, QuotePair, Scheme};
use lifecover::montecarlo::{
    compare_schemes_pathwise, estimate_insurer_loss_probability, estimate_ruin_probability, simulate_consumption_paths,
    SimConfig, SimResult,
};
use lifecover::policy::{
    evaluate_variational_inequality, PolicySolution, SweepParameter, SweepTable, VerificationReport, VerifyGrid,
    VerifyOptions,
};
use lifecover_api::build::solve_scenario;
use lifecover_api::schema::{Money, QuoteView, RuinResponse, SolveResponse, SweepRequest, Units, SCHEMA};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::args::{McArgs, SweepArgs, VerifyArgs};
use crate::render::{csv, dollars, money, num, row, table};
use crate::CliError;

/// A command's result in every output format.
pub struct Report {
    pub result: Value,
    pub csv: String,
    pub table: String,
    /// Set when a verification did not pass.
    pub failure: Option<String>,
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("report types serialize")
}

fn header(units: &Units) -> String {
    format!("{}\n\n", units.note)
}

fn scheme_label(s: Scheme) -> &'static str {
    s.label()
}

pub fn solve(doc: &ConfigDocument) -> Result<Report, CliError> {
    let resp = lifecover_api::build_solve_response(doc)?;
    Ok(Report {
        result: to_value(&resp),
        csv: solve_csv(&resp),
        table: solve_table(&resp),
        failure: None,
    })
}

fn solve_csv(resp: &SolveResponse) -> String {
    let mut rows = Vec::new();
    for (q, p) in resp.quotes.iter().zip(&resp.policies) {
        let s = scheme_label(p.scheme);
        let mut put = |name: &str, m: &Money| {
            rows.push(vec![
                s.into(),
                name.into(),
                format!("{:?}", m.units),
                format!("{:?}", m.dollars),
            ]);
        };
        put("benefit", &p.benefit);
        put("premium", &p.premium);
        put("investment", &p.investment);
        put(
            "consumption_intercept_before_first_death",
            &p.consumption.intercept_before_first_death,
        );
        put("consumption_intercept_x_survives", &p.consumption.intercept_x_survives);
        put("consumption_intercept_y_survives", &p.consumption.intercept_y_survives);
        put("consumption_jump_x", &p.consumption_jump_x);
        put("consumption_jump_y", &p.consumption_jump_y);
        put("drift", &p.drift);
        if let Some(c) = &p.initial_consumption {
            put("initial_consumption", c);
        }
        let mut plain = |name: &str, v: f64| rows.push(vec![s.into(), name.into(), format!("{v:?}"), String::new()]);
        plain("loading", q.loading);
        plain("premium_rate", q.rate);
        plain("loss_probability", q.loss_probability);
        plain("consumption_rate_on_wealth", p.consumption.rate_on_wealth);
        plain("alpha_threshold", p.alpha_threshold.unwrap_or(f64::INFINITY));
        plain("ln_k", p.coefficient.ln_k);
        if let Some(r) = &p.ruin {
            plain("ruin_before_first_death", r.p_before_first_death);
            plain("ruin_between_deaths", r.p_between_deaths);
            plain("ruin_total", r.p_total);
        }
    }
    csv(&["scheme", "quantity", "units", "dollars"], &rows)
}

fn solve_table(resp: &SolveResponse) -> String {
    let mut top = vec![String::new()];
    top.extend(resp.policies.iter().map(|p| scheme_label(p.scheme).to_string()));
    let mut rows = vec![top];
    let mut line = |name: &str, f: &dyn Fn(usize) -> String| {
        let mut r = vec![name.to_string()];
        r.extend((0..resp.policies.len()).map(f));
        rows.push(r);
    };
    let q = &resp.quotes;
    let p = &resp.policies;
    line("loading", &|i| num(q[i].loading));
    line("premium rate (H or h)", &|i| num(q[i].rate));
    line("insurer loss probability", &|i| format!("{:.4}", q[i].loss_probability));
    line("benefit D", &|i| money(&p[i].benefit));
    line("premium", &|i| {
        let basis = if p[i].scheme == Scheme::Single {
            "once"
        } else {
            "per year"
        };
        format!("{} {basis}", money(&p[i].premium))
    });
    line("risky investment", &|i| money(&p[i].investment));
    line("consumption c = r w + c0", &|i| {
        format!("r = {}", p[i].consumption.rate_on_wealth)
    });
    line("  c0 before first death", &|i| {
        money(&p[i].consumption.intercept_before_first_death)
    });
    line("  c0 once x survives alone", &|i| {
        money(&p[i].consumption.intercept_x_survives)
    });
    line("  c0 once y survives alone", &|i| {
        money(&p[i].consumption.intercept_y_survives)
    });
    line("consumption jump, x survives", &|i| money(&p[i].consumption_jump_x));
    line("consumption jump, y survives", &|i| money(&p[i].consumption_jump_y));
    line("wealth drift before first death", &|i| money(&p[i].drift));
    line("alpha above which insurance is bought", &|i| {
        p[i].alpha_threshold.map_or("none".into(), num)
    });
    line("ln k", &|i| format!("{:.6}", p[i].coefficient.ln_k));
    if let Some(w) = &resp.validated.wealth {
        line("initial consumption", &|i| {
            p[i].initial_consumption.as_ref().map_or(String::new(), money)
        });
        line("ruin probability", &|i| {
            p[i].ruin.as_ref().map_or(String::new(), |r| num(r.p_total))
        });
        rows.push(vec![format!("(ruin at initial wealth {})", money(w))]);
    }
    header(&resp.units) + &table(&rows)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrateReport {
    pub schema: String,
    pub units: Units,
    pub loss_probability: f64,
    pub max_loss_probability: f64,
    pub quotes: Vec<QuoteView>,
    /// `|h - rH/(1-H)| / h` when both schemes are priced.
    pub identity_gap: Option<f64>,
}

pub fn calibrate(doc: &ConfigDocument) -> Result<Report, CliError> {
    let Some(q) = doc.premium.loss_probability else {
        return Err(CliError::input(
            "calibrate needs --loss-prob (or premium.loss_probability in the config)",
        ));
    };
    let s = doc.resolve()?;
    let view = |q: &lifecover::model::PremiumQuote| QuoteView {
        scheme: q.scheme(),
        loading: q.loading(),
        rate: q.rate(),
        loss_probability: q.loss_probability(),
    };
    let identity_gap = match (&s.single, &s.continuous) {
        (Some(a), Some(b)) => {
            let from_single = s.market.r() * a.rate() / (1.0 - a.rate());
            Some((b.rate() - from_single).abs() / b.rate())
        }
        _ => None,
    };
    let rep = CalibrateReport {
        schema: SCHEMA.into(),
        units: Units::default(),
        loss_probability: q,
        max_loss_probability: max_loss_probability(&s.market, &s.household),
        quotes: s.quotes().map(view).collect(),
        identity_gap,
    };
    let rows: Vec<Vec<String>> = rep
        .quotes
        .iter()
        .map(|v| {
            vec![
                scheme_label(v.scheme).into(),
                num(v.loading),
                num(v.rate),
                format!("{:.6}", v.loss_probability),
            ]
        })
        .collect();
    let mut text = vec![row(["scheme", "loading", "rate", "loss probability"])];
    text.extend(rows.iter().cloned());
    let mut tbl = format!(
        "target loss probability {:.6} (largest attainable {:.6})\n\n{}",
        q,
        rep.max_loss_probability,
        table(&text)
    );
    if let Some(g) = identity_gap {
        tbl.push_str(&format!("\nh - rH/(1-H), relative: {g:.2e}\n"));
    }
    Ok(Report {
        result: to_value(&rep),
        csv: csv(&["scheme", "loading", "rate", "loss_probability"], &rows),
        table: tbl,
        failure: None,
    })
}

pub fn sweep(doc: &ConfigDocument, a: &SweepArgs) -> Result<Report, CliError> {
    let parameter = SweepParameter::parse(&a.param).ok_or_else(|| {
        CliError::input(format!(
            "unknown --param `{}`; expected theta, alpha, I_x, I_y, lambda_x or lambda_y",
            a.param
        ))
    })?;
    let req = SweepRequest {
        scenario: doc.clone(),
        parameter,
        from: a.from,
        to: a.to,
        steps: a.steps,
    };
    let resp = lifecover_api::build_sweep_response(&req)?;
    let t = SweepTable {
        parameter,
        rows: resp.rows.clone(),
        checks: resp.checks.clone(),
    };
    let mut rows = vec![row([parameter.label(), "D*", "D_bar*", "dc_x", "dc_y"])];
    rows.extend(resp.rows.iter().map(|r| {
        vec![
            num(r.value),
            dollars(r.d_star),
            dollars(r.d_bar_star),
            dollars(r.dc_x),
            dollars(r.dc_y),
        ]
    }));
    let mut text = header(&resp.units) + &table(&rows) + "\n";
    for c in &resp.checks {
        text.push_str(&format!("{:?}: {}\n", c.status, c.name));
    }
    Ok(Report {
        result: to_value(&resp),
        csv: t.to_csv(),
        table: text,
        failure: None,
    })
}

fn sim_config(a: &McArgs, seed: u64, wealth: f64) -> Result<SimConfig, CliError> {
    let cfg = SimConfig {
        n_paths: a.paths,
        dt: a.dt,
        seed,
        wealth,
        ..SimConfig::default()
    };
    cfg.validate()?;
    Ok(cfg)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RuinComparison {
    pub analytic: RuinResponse,
    pub monte_carlo: Vec<SimResult>,
}

const RUIN_PARTS: [&str; 4] = [
    "p_before_first_death",
    "p_between_deaths",
    "p_total",
    "p_jump_at_first_death",
];

pub fn ruin(doc: &ConfigDocument, a: &McArgs, seed: u64) -> Result<Report, CliError> {
    let analytic = lifecover_api::build_ruin_response(doc)?;
    let wealth = analytic.wealth.units;
    let cfg = sim_config(a, seed, wealth)?;
    let sols = solve_scenario(&doc.resolve()?)?;
    let monte_carlo = sols
        .iter()
        .map(|s| estimate_ruin_probability(&cfg, s))
        .collect::<Result<Vec<_>, _>>()?;
    let mut rows = Vec::new();
    for (view, mc) in analytic.results.iter().zip(&monte_carlo) {
        let r = &view.report;
        let exact = [
            r.p_before_first_death,
            r.p_between_deaths,
            r.p_total,
            r.p_jump_at_first_death,
        ];
        for (name, value) in RUIN_PARTS.iter().zip(exact) {
            let est = mc.get(name).expect("ruin estimates are named");
            let z = if est.std_error > 0.0 {
                (est.value - value) / est.std_error
            } else {
                f64::NAN
            };
            rows.push(vec![
                scheme_label(view.scheme).to_string(),
                name.to_string(),
                format!("{value:.6e}"),
                format!("{:.6e}", est.value),
                format!("{:.2e}", est.std_error),
                if z.is_nan() { String::new() } else { format!("{z:.2}") },
            ]);
        }
    }
    let mut text = vec![row([
        "scheme",
        "component",
        "analytic",
        "monte carlo",
        "std error",
        "z",
    ])];
    text.extend(rows.iter().cloned());
    let mut tbl = format!(
        "{}initial wealth {}, {} paths, seed {}\n\n{}",
        header(&analytic.units),
        money(&analytic.wealth),
        cfg.n_paths,
        cfg.seed,
        table(&text)
    );
    for (view, mc) in analytic.results.iter().zip(&monte_carlo) {
        tbl.push_str(&format!(
            "\n{}: initial consumption {}, subcase {:?}",
            scheme_label(view.scheme),
            money(&view.initial_consumption),
            view.report.subcase
        ));
        for w in &mc.warnings {
            tbl.push_str(&format!("\n  warning: {w}"));
        }
    }
    tbl.push('\n');
    let out = RuinComparison { analytic, monte_carlo };
    Ok(Report {
        result: to_value(&out),
        csv: csv(
            &["scheme", "component", "analytic", "monte_carlo", "std_error", "z"],
            &rows,
        ),
        table: tbl,
        failure: None,
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SimulateReport {
    pub schema: String,
    pub units: Units,
    pub wealth: Money,
    pub runs: Vec<SimResult>,
}

pub fn simulate(doc: &ConfigDocument, a: &McArgs, seed: u64) -> Result<Report, CliError> {
    let s = doc.resolve()?;
    let wealth = s.wealth.unwrap_or(0.0);
    let cfg = sim_config(a, seed, wealth)?;
    let sols: Vec<PolicySolution> = solve_scenario(&s)?;
    let mut runs = Vec::new();
    for sol in &sols {
        let mut r = simulate_consumption_paths(&cfg, sol)?;
        r.kind = format!("{}_{}", r.kind, sol.scheme().label());
        runs.push(r);
    }
    if let (Some(single), Some(cont)) = (s.single, s.continuous) {
        runs.push(compare_schemes_pathwise(&cfg, &sols[0], &sols[1])?);
        let pair = QuotePair {
            single,
            continuous: cont,
        };
        runs.push(estimate_insurer_loss_probability(
            &cfg,
            &s.market,
            &s.household,
            &pair,
            (sols[0].benefit, sols[1].benefit),
        )?);
    }
    let mut rows = Vec::new();
    for r in &runs {
        for e in &r.estimates {
            rows.push(vec![
                r.kind.clone(),
                e.name.clone(),
                format!("{:?}", e.value),
                format!("{:?}", e.std_error),
            ]);
        }
    }
    let mut text = vec![row(["run", "estimate", "value", "std error"])];
    text.extend(rows.iter().map(|r| {
        let v: f64 = r[2].parse().unwrap_or(f64::NAN);
        let se: f64 = r[3].parse().unwrap_or(f64::NAN);
        vec![
            r[0].clone(),
            r[1].clone(),
            num(v),
            if se > 0.0 { format!("{se:.2e}") } else { String::new() },
        ]
    }));
    let rep = SimulateReport {
        schema: SCHEMA.into(),
        units: Units::default(),
        wealth: Money::new(wealth),
        runs,
    };
    let tbl = format!(
        "{}initial wealth {}, {} paths, seed {}\n\n{}",
        header(&rep.units),
        money(&rep.wealth),
        cfg.n_paths,
        cfg.seed,
        table(&text)
    );
    Ok(Report {
        result: to_value(&rep),
        csv: csv(&["run", "estimate", "value", "std_error"], &rows),
        table: tbl,
        failure: None,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct InvariantCheck {
    pub name: String,
    pub value: f64,
    pub tol: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct VerifyReport {
    pub schema: String,
    pub passed: bool,
    pub variational_inequality: Vec<VerificationReport>,
    pub invariants: Vec<InvariantCheck>,
}

const INVARIANT_TOL: f64 = 1e-10;

fn invariant(name: String, value: f64) -> InvariantCheck {
    InvariantCheck {
        name,
        value,
        tol: INVARIANT_TOL,
        passed: value <= INVARIANT_TOL,
    }
}

pub fn verify(doc: &ConfigDocument, a: &VerifyArgs) -> Result<Report, CliError> {
    let s = doc.resolve()?;
    let sols = solve_scenario(&s)?;
    let grid = VerifyGrid {
        n_w: a.n_w,
        n_d: a.n_d,
        ..VerifyGrid::default_for(&s.market, &s.household)
    };
    let options = VerifyOptions {
        tol: a.tol,
        finite_difference: a.fd,
    };
    let mut vi = Vec::new();
    let mut inv = Vec::new();
    for sol in &sols {
        vi.push(evaluate_variational_inequality(sol, &grid, &options)?);
        let label = sol.scheme().label();
        inv.push(invariant(
            format!("{label}: k equation residual"),
            sol.coefficient.relative_residual(&sol.market).abs(),
        ));
        if sol.benefit > 0.0 {
            let d = sol.pre_death_drift()?;
            inv.push(invariant(
                format!("{label}: drift matches reduced form"),
                (d.definitional - d.reduced).abs() / d.reduced.abs().max(1.0),
            ));
        }
    }
    if let (Some(single), Some(cont)) = (&s.single, &s.continuous) {
        if (single.loss_probability() - cont.loss_probability()).abs() <= 1e-12 {
            let h = s.market.r() * single.rate() / (1.0 - single.rate());
            // cancellation in 1 - H scales the attainable accuracy
            let scale = 1.0 / (1.0 - single.rate());
            let mut c = invariant(
                "h = rH/(1-H) at equal loss probability".into(),
                (cont.rate() - h).abs() / cont.rate(),
            );
            c.tol = INVARIANT_TOL * scale;
            c.passed = c.value <= c.tol;
            inv.push(c);
        }
    }
    let passed = vi.iter().all(|r| r.passed) && inv.iter().all(|c| c.passed);
    let status = |ok: bool| if ok { "PASS" } else { "FAIL" }.to_string();
    let mut rows = Vec::new();
    for r in &vi {
        let l = r.scheme.label();
        let mut put = |name: &str, v: f64, tol: f64| {
            rows.push(vec![
                format!("{l}: {name}"),
                format!("{v:.3e}"),
                format!("{tol:.1e}"),
                status(v <= tol),
            ]);
        };
        put("max hjb residual", r.max_hjb_residual, r.tol);
        put("max operator excess", r.max_operator_excess, r.tol);
        put("max gradient excess", r.max_gradient_excess, r.tol);
        put("boundary gradient gap", r.boundary_gradient_gap, r.tol);
        if let Some(g) = r.boundary_coefficient_gap {
            put("boundary coefficient gap", g, 1e-10);
        }
        if let Some(g) = r.fd_max_discrepancy {
            put("finite-difference discrepancy", g, 1e-4);
        }
    }
    for c in &inv {
        rows.push(vec![
            c.name.clone(),
            format!("{:.3e}", c.value),
            format!("{:.1e}", c.tol),
            status(c.passed),
        ]);
    }
    let failure = (!passed).then(|| {
        let mut bad: Vec<String> = vi
            .iter()
            .filter(|r| !r.passed)
            .map(|r| match &r.worst {
                Some(w) => format!(
                    "{}: {} = {:.3e} at w = {}, D = {}",
                    r.scheme.label(),
                    w.check,
                    w.value,
                    w.w,
                    w.benefit
                ),
                None => format!("{}: variational inequality", r.scheme.label()),
            })
            .collect();
        bad.extend(inv.iter().filter(|c| !c.passed).map(|c| c.name.clone()));
        format!("verification failed: {}", bad.join("; "))
    });
    let rep = VerifyReport {
        schema: SCHEMA.into(),
        passed,
        variational_inequality: vi,
        invariants: inv,
    };
    let mut text = vec![row(["check", "value", "tolerance", "status"])];
    text.extend(rows.iter().cloned());
    let tbl = format!(
        "{} by {} grid, w in [{}, {}], D in [{}, {}]\n\n{}\n{}\n",
        grid.n_w,
        grid.n_d,
        grid.w_min,
        grid.w_max,
        grid.d_min,
        grid.d_max,
        table(&text),
        if passed { "PASS" } else { "FAIL" }
    );
    Ok(Report {
        result: to_value(&rep),
        csv: csv(&["check", "value", "tolerance", "status"], &rows),
        table: tbl,
        failure,
    })
}
