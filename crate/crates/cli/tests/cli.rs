use std::path::PathBuf;
use std::process::{Command, Output};

use axum::body::Body;
use axum::http::{header, Method, Request};
use http_body_util::BodyExt;
use lifecover_api::schema::{RuinResponse, SolveResponse, SweepResponse};
use serde_json::{json, Value};
use tower::ServiceExt;

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(name)
}

const FIXTURES: [&str; 3] = ["baseline.toml", "calibrated.json", "single_loaded.toml"];

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lifecover"))
        .args(args)
        .output()
        .unwrap()
}

fn run_config(config: &str, args: &[&str]) -> Output {
    let path = fixture(config);
    let mut all = vec!["--config", path.to_str().unwrap()];
    all.extend_from_slice(args);
    run(&all)
}

fn json_of(out: &Output) -> Value {
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn benefits(v: &Value) -> Vec<f64> {
    v["result"]["policies"]
        .as_array()
        .unwrap()
        .iter()
        .map(|p| p["benefit"]["units"].as_f64().unwrap())
        .collect()
}

async fn api(path: &str, body: Vec<u8>) -> Vec<u8> {
    let req = Request::builder()
        .method(Method::POST)
        .uri(path)
        .header(header::CONTENT_TYPE, "application/json")
        .body(Body::from(body))
        .unwrap();
    let resp = lifecover_api::router().oneshot(req).await.unwrap();
    assert!(resp.status().is_success());
    resp.into_body().collect().await.unwrap().to_bytes().to_vec()
}

#[test]
fn solve_worked_example() {
    let v = json_of(&run_config("baseline.toml", &["--format", "json", "solve"]));
    let d = benefits(&v);
    assert!((d[0] - 52.38).abs() < 5e-3 && (d[1] - 11.64).abs() < 5e-3, "{d:?}");
    for q in v["result"]["quotes"].as_array().unwrap() {
        assert!((q["loss_probability"].as_f64().unwrap() - 0.585).abs() < 1e-3);
    }
    let m = &v["manifest"];
    assert_eq!(m["command"], "solve");
    assert!(m["config_path"].as_str().unwrap().ends_with("baseline.toml"));
    assert_eq!(m["parameters"]["alpha"], 2.0);
    assert_eq!(m["version"], env!("CARGO_PKG_VERSION"));

    let table = run_config("baseline.toml", &["solve"]);
    let text = String::from_utf8(table.stdout).unwrap();
    assert!(text.contains("52.3780 ($2,618,898)"), "{text}");
    assert!(text.contains("11.6395 ($581,977)"), "{text}");
    assert!(text.contains("$50,000"));
}

#[test]
fn flags_override_the_config() {
    let v = json_of(&run_config(
        "baseline.toml",
        &["--format", "json", "solve", "--alpha", "3", "--scheme", "single"],
    ));
    assert_eq!(v["manifest"]["parameters"]["alpha"], 3.0);
    assert_eq!(benefits(&v).len(), 1);
    assert!(benefits(&v)[0] > 52.38);
}

#[test]
fn bad_input_exits_2() {
    let out = run_config("baseline.toml", &["verify", "--scheme", "single", "--rate", "1.2"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("premium"), "{}", stderr(&out));

    let out = run_config("baseline.toml", &["ruin", "--paths", "0"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("n_paths"), "{}", stderr(&out));

    let out = run(&[
        "solve",
        "--r",
        "0.02",
        "--mu",
        "0.06",
        "--sigma",
        "0.2",
        "--lambda-x",
        "0.04",
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("lambda_y"), "{}", stderr(&out));

    let out = run_config("baseline.toml", &["solve", "--alpha", "-1"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("alpha"), "{}", stderr(&out));

    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.toml");
    let text = std::fs::read_to_string(fixture("baseline.toml")).unwrap();
    std::fs::write(&bad, text.replace("alpha = 2.0", "alpha = 2.0\nbeta = 1.0")).unwrap();
    let out = run(&["--config", bad.to_str().unwrap(), "solve"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("beta"), "{}", stderr(&out));

    let out = run_config(
        "baseline.toml",
        &["sweep", "--param", "gamma", "--from", "0", "--to", "1", "--steps", "3"],
    );
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn fair_single_premium_equals_maximal_loss_probability() {
    let cal = json_of(&run_config(
        "baseline.toml",
        &["--format", "json", "calibrate", "--loss-prob", "0.3"],
    ));
    let q_max = cal["result"]["max_loss_probability"].as_f64().unwrap();
    let q = format!("{q_max:?}");
    let a = json_of(&run_config(
        "baseline.toml",
        &["--format", "json", "solve", "--scheme", "single", "--loading", "0"],
    ));
    let b = json_of(&run_config(
        "baseline.toml",
        &["--format", "json", "solve", "--scheme", "single", "--loss-prob", &q],
    ));
    let (da, db) = (benefits(&a)[0], benefits(&b)[0]);
    assert!((da - db).abs() <= 1e-9 * da, "{da} vs {db}");
    let pa = &a["result"]["policies"][0];
    let pb = &b["result"]["policies"][0];
    for key in ["consumption_jump_x", "consumption_jump_y", "drift", "premium"] {
        let (x, y) = (pa[key]["units"].as_f64().unwrap(), pb[key]["units"].as_f64().unwrap());
        assert!((x - y).abs() <= 1e-9 * x.abs().max(1.0), "{key}: {x} vs {y}");
    }
}

#[test]
fn calibrate_requires_a_target() {
    let out = run_config("baseline.toml", &["calibrate"]);
    assert_eq!(out.status.code(), Some(2));
    let v = json_of(&run_config(
        "baseline.toml",
        &["--format", "json", "calibrate", "--loss-prob", "0.3"],
    ));
    assert!(v["result"]["identity_gap"].as_f64().unwrap() < 1e-12);
    for quote in v["result"]["quotes"].as_array().unwrap() {
        assert!((quote["loss_probability"].as_f64().unwrap() - 0.3).abs() < 1e-12);
    }
}

#[tokio::test]
async fn json_output_round_trips_through_the_api_schema() {
    for name in FIXTURES {
        let cli = json_of(&run_config(name, &["--format", "json", "solve"]));
        let parsed: SolveResponse = serde_json::from_value(cli["result"].clone()).unwrap();
        let doc = serde_json::to_vec(&cli["manifest"]["parameters"]).unwrap();
        let body = api("/v1/solve", doc.clone()).await;
        assert_eq!(lifecover_api::to_json(&parsed), body, "{name}");

        let ruin = json_of(&run_config(name, &["--format", "json", "ruin", "--paths", "2000"]));
        let parsed: RuinResponse = serde_json::from_value(ruin["result"]["analytic"].clone()).unwrap();
        assert_eq!(
            lifecover_api::to_json(&parsed),
            api("/v1/ruin", doc.clone()).await,
            "{name}"
        );

        let sweep = json_of(&run_config(
            name,
            &[
                "--format", "json", "sweep", "--param", "alpha", "--from", "0.5", "--to", "5", "--steps", "10",
            ],
        ));
        let parsed: SweepResponse = serde_json::from_value(sweep["result"].clone()).unwrap();
        let req = json!({
            "scenario": cli["manifest"]["parameters"],
            "parameter": "alpha", "from": 0.5, "to": 5.0, "steps": 10
        });
        let body = api("/v1/sweep", serde_json::to_vec(&req).unwrap()).await;
        assert_eq!(lifecover_api::to_json(&parsed), body, "{name}");
    }
}

#[test]
fn same_seed_same_bytes() {
    let args = ["--format", "json", "--seed", "7", "simulate", "--paths", "500"];
    let a = run_config("baseline.toml", &args);
    let b = run_config("baseline.toml", &args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let c = run_config(
        "baseline.toml",
        &["--format", "json", "--seed", "8", "simulate", "--paths", "500"],
    );
    assert_ne!(a.stdout, c.stdout);

    let ruin = ["--format", "csv", "--seed", "3", "ruin", "--paths", "5000"];
    assert_eq!(
        run_config("calibrated.json", &ruin).stdout,
        run_config("calibrated.json", &ruin).stdout
    );
}

#[test]
fn ruin_analytic_next_to_monte_carlo() {
    let v = json_of(&run_config(
        "baseline.toml",
        &["--format", "json", "ruin", "--paths", "200000"],
    ));
    let analytic = v["result"]["analytic"]["results"][0]["report"]["p_total"]
        .as_f64()
        .unwrap();
    let mc = &v["result"]["monte_carlo"][0]["estimates"];
    let est = mc.as_array().unwrap().iter().find(|e| e["name"] == "p_total").unwrap();
    let (value, se) = (est["value"].as_f64().unwrap(), est["std_error"].as_f64().unwrap());
    assert!((analytic - 1.147e-3).abs() < 1e-6, "{analytic}");
    assert!((value - analytic).abs() < 4.0 * se, "{value} ± {se} vs {analytic}");
    assert_eq!(v["manifest"]["seed"], 0x5eed);
}

#[test]
fn sweep_csv() {
    let out = run_config(
        "baseline.toml",
        &[
            "--format", "csv", "sweep", "--param", "theta", "--from", "0", "--to", "0.2", "--steps", "5",
        ],
    );
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "parameter,value,D_star,D_bar_star,dc_x,dc_y");
    assert_eq!(lines.len(), 6);
    assert!(lines[1].starts_with("theta,0,52.37795990003"), "{}", lines[1]);
}

#[test]
fn verify_respects_tolerance() {
    let coarse = ["verify", "--n-w", "11", "--n-d", "11"];
    let tight = run_config("baseline.toml", &[&coarse[..], &["--tol", "1e-17"]].concat());
    assert_eq!(tight.status.code(), Some(1), "{}", stderr(&tight));
    assert!(stderr(&tight).contains("hjb_residual"));
    let loose = run_config("baseline.toml", &[&coarse[..], &["--tol", "1e-12"]].concat());
    assert_eq!(loose.status.code(), Some(0), "{}", stderr(&loose));
    assert_eq!(run_config("calibrated.json", &["verify"]).status.code(), Some(0));
}

#[test]
fn outputs_record_the_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("sweep.csv");
    let status = run_config(
        "baseline.toml",
        &[
            "--format",
            "csv",
            "--out",
            out.to_str().unwrap(),
            "sweep",
            "--param",
            "alpha",
            "--from",
            "1",
            "--to",
            "3",
            "--steps",
            "3",
        ],
    );
    assert!(status.status.success());
    assert!(status.stdout.is_empty());
    assert!(std::fs::read_to_string(&out).unwrap().starts_with("parameter,"));
    let manifest: Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("sweep.csv.manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["command"], "sweep");
    assert_eq!(manifest["arguments"]["command"]["steps"], 3);
    assert_eq!(manifest["output_paths"].as_array().unwrap().len(), 2);

    let json_out = dir.path().join("solve.json");
    assert!(run_config(
        "baseline.toml",
        &["--format", "json", "--out", json_out.to_str().unwrap(), "solve"]
    )
    .status
    .success());
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&json_out).unwrap()).unwrap();
    assert_eq!(v["manifest"]["output_paths"][0], json_out.to_str().unwrap());
    assert_eq!(v["result"]["schema"], "v1");
}

#[test]
fn serve_rejects_a_bad_address() {
    let out = run(&["serve", "--bind", "not an address"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("cannot bind"));
}
