use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn thetalab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_thetalab"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("thetalab-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

fn report(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("json report on stdout")
}

#[test]
fn theta_eval_elliptic() {
    let doc = scratch("tau-i.json");
    std::fs::write(&doc, r#"{"g": 1, "omega": [[[0.0, 1.0]]]}"#).unwrap();
    let out = thetalab(&["theta-eval", "--period", doc.to_str().unwrap(), "--z", "0"]);
    assert_eq!(out.status.code(), Some(0));
    let r = report(&out);
    assert_eq!(r["passed"], true);
    let re = r["results"]["value"][0].as_f64().unwrap();
    // theta(0, i) = pi^(1/4) / Gamma(3/4)
    assert!((re - 1.086_434_811_213_308_2).abs() < 1e-14);
}

#[test]
fn kummer_rank_separates_examples() {
    let out = thetalab(&["kummer-rank", "--example", "genus2-decomposable", "--seed", "3"]);
    assert_eq!(out.status.code(), Some(0));
    let r = report(&out);
    assert_eq!(r["results"]["rank"], 3);
    assert_eq!(r["results"]["indecomposable"], false);

    let out = thetalab(&["kummer-rank", "--example", "genus2-indecomposable", "--seed", "3"]);
    assert_eq!(report(&out)["results"]["rank"], 4);
}

#[test]
fn kp_fit_passes_and_stalled_fit_fails() {
    let out = thetalab(&["kp-fit", "--example", "genus2-indecomposable", "--max-residual", "1e-7"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(report(&out)["passed"], true);

    let out = thetalab(&["kp-fit", "--example", "genus2-indecomposable", "--starts", "1", "--max-residual", "1e-30"]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(report(&out)["passed"], false);
}

#[test]
fn invalid_documents_exit_2() {
    let asym = scratch("asym.json");
    std::fs::write(
        &asym,
        r#"{"g": 2, "omega": [[[0.0, 1.0], [0.1, 0.2]], [[0.3, 0.2], [0.0, 1.0]]]}"#,
    )
    .unwrap();
    let indef = scratch("indef.json");
    std::fs::write(&indef, r#"{"g": 1, "omega": [[[0.0, -1.0]]]}"#).unwrap();
    let garbled = scratch("garbled.json");
    std::fs::write(&garbled, "{\"g\": 1, \"omega\": [[[0.0,").unwrap();

    for doc in [&asym, &indef, &garbled] {
        let out = thetalab(&["kummer-rank", "--period", doc.to_str().unwrap()]);
        assert_eq!(out.status.code(), Some(2), "{}", doc.display());
        let r = report(&out);
        assert_eq!(r["error"]["invalid_input"], true);
        assert!(!out.stderr.is_empty());
    }

    assert_eq!(thetalab(&["theta-eval", "--example", "elliptic", "--z", "1,2"]).status.code(), Some(2));
    assert_eq!(thetalab(&["no-such-command"]).status.code(), Some(2));
    assert_eq!(thetalab(&["gen-example", "genus7"]).status.code(), Some(2));
}

#[test]
fn reports_are_deterministic() {
    let strip = |mut v: Value| {
        v.as_object_mut().unwrap().remove("wall_time_s");
        v
    };
    let args = ["kp-check", "--example", "elliptic", "--seed", "4"];
    let a = strip(report(&thetalab(&args)));
    let b = strip(report(&thetalab(&args)));
    assert_eq!(a, b);
    assert_eq!(a["seed"], 4);
    assert_eq!(a["inputs"]["command"], "kp-check");
}

#[test]
fn translate_trace_csv() {
    let path = scratch("trace.csv");
    let out = thetalab(&[
        "--format",
        "csv",
        "--out",
        path.to_str().unwrap(),
        "translate-trace",
        "--example",
        "genus2-indecomposable",
        "--span",
        "0.05",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let mut reader = csv::Reader::from_path(&path).unwrap();
    let header: Vec<String> = reader.headers().unwrap().iter().map(str::to_string).collect();
    assert_eq!(header, ["tau2", "z_1_re", "z_1_im", "z_2_re", "z_2_im", "theta_abs", "correction"]);
    let rows: Vec<_> = reader.records().map(|r| r.unwrap()).collect();
    assert_eq!(rows.len(), 51);
    let tau2: f64 = rows[1][0].parse().unwrap();
    assert!((tau2 - rows[0][0].parse::<f64>().unwrap() - 1e-3).abs() < 1e-12);
}

#[test]
fn gen_example_round_trips() {
    let path = scratch("siegel.json");
    let out = thetalab(&["gen-example", "random-siegel", "--genus", "3", "--seed", "11", "--out", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let text = std::fs::read_to_string(&path).unwrap();
    let doc = thetalab::io::parse_document(&text).unwrap();
    assert_eq!(doc.g, 3);
    assert_eq!(doc.label.as_deref(), Some("random-siegel"));
    let p = doc.to_period().unwrap();
    assert!(p.lambda_min() > 0.0);
    // Written digits reproduce the matrix exactly.
    let again = thetalab::io::parse_period_matrix(&thetalab::io::serialize_period_matrix(&p)).unwrap();
    assert_eq!(again.entries(), p.entries());

    // Reading the written document back gives the same numbers as the example flag.
    let a = report(&thetalab(&["theta-eval", "--period", path.to_str().unwrap(), "--z", "0.1,0.2,0.3"]));
    let b = report(&thetalab(&["theta-eval", "--example", "random-siegel", "--seed", "11", "--z", "0.1,0.2,0.3"]));
    assert_eq!(a["results"]["value"], b["results"]["value"]);
}

#[test]
fn surface_verify_both_surfaces() {
    let out = thetalab(&["surface-verify", "--surface", "cubic"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    let out = thetalab(&["surface-verify", "--surface", "theta", "--example", "genus2-indecomposable"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
}

#[test]
fn gw_test_reports_rank() {
    let out = thetalab(&["gw-test", "--example", "genus2-indecomposable"]);
    let code = out.status.code().unwrap();
    assert!(code == 0 || code == 1);
    let r = report(&out);
    assert!(r["results"]["rank"].as_u64().unwrap() <= 3);
}
