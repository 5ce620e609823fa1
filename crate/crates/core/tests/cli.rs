mod common;

use std::process::{Command, Output};

use common::{config_path, MODELS};
use powerhjm::options::{option_price, OptionSpec};
use powerhjm::quadrature::QuadratureSpec;

fn powerhjm(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_powerhjm")).args(args).output().unwrap()
}

fn path(name: &str) -> String {
    config_path(name).display().to_string()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn flat_curve_futures_price() {
    let pfc = path("pfc_flat40.csv");
    let out = powerhjm(&["price", "futures", "--pfc", &pfc, "--t", "0", "--tau1", "0", "--tau2", "24"]);
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["product"], "futures");
    assert!((v["price"].as_f64().unwrap() - 40.0).abs() < 1e-10);

    let out = powerhjm(&["price", "spot", "--pfc", &pfc, "--day", "2", "--hour", "5", "--format", "csv"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    let (header, row) = text.trim_end().split_once('\n').unwrap();
    assert_eq!(header, "product,price");
    let price: f64 = row.strip_prefix("spot,").unwrap().parse().unwrap();
    assert!((price - 40.0).abs() < 1e-10);
}

#[test]
fn errors_exit_with_two() {
    let out = powerhjm(&["price", "futures", "--model", "/no/such/model.json", "--tau1", "0", "--tau2", "1"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("/no/such/model.json"));

    let out = powerhjm(&["price", "futures", "--tau1", "0"]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(powerhjm(&["--help"]).status.code(), Some(0));

    // pfc_wrap without a curve
    let out = powerhjm(&["price", "futures", "--model", &path("schwartz_smith.json"), "--tau1", "0", "--tau2", "1"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn pfc_inspect() {
    let out = powerhjm(&["pfc", "inspect", "--pfc", &path("pfc.csv")]);
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["segments"], 186);
    assert_eq!(v["horizon"], 1488.0);
    let out = powerhjm(&["pfc", "inspect", "--pfc", &path("pfc_flat40.csv"), "--format", "csv"]);
    assert!(stdout(&out).lines().count() >= 2);
}

#[test]
fn simulate_writes_long_csv() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("curves.csv");
    let out = powerhjm(&[
        "simulate", "--pfc", &path("pfc.csv"), "--model", &path("lucia_schwartz.json"), "--vol", &path("vol.json"),
        "--paths", "3", "--seed", "9", "--trading-grid", "0,24", "--delivery-grid", "48,72", "--format", "csv",
        "--out", file.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(&file).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("path,t,tau,f"));
    assert_eq!(lines.count(), 3 * 2 * 2);
}

#[test]
fn option_output_matches_the_library() {
    let pfc = path("pfc.csv");
    let model = path("schwartz_smith.json");
    let vol = path("vol.json");
    let out = powerhjm(&[
        "price", "option", "--pfc", &pfc, "--model", &model, "--vol", &vol, "--paths", "200", "--seed", "5", "--T",
        "360", "--K", "45", "--tau1", "744", "--tau2", "768",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));

    let m = common::reference_model("schwartz_smith", &common::reference_pfc());
    let spec: OptionSpec = powerhjm::config::read_json(path("option.json")).unwrap();
    let est = option_price(m.as_ref(), &common::reference_vol(), &spec, 200, 5, &QuadratureSpec::default()).unwrap();
    assert_eq!(stdout(&out).trim_end(), serde_json::to_string(&est).unwrap());
}

#[test]
fn id_index_from_a_path_file() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("path.csv");
    let rows: String = (0..=30).map(|i| format!("{},{}\n", 7.0 + 0.1 * i as f64, 50.0)).collect();
    std::fs::write(&file, format!("t,f\n{rows}")).unwrap();
    let out = powerhjm(&[
        "price", "id-index", "--pfc", &path("pfc_flat40.csv"), "--tau1", "10", "--tau2", "11", "--n", "3", "--path",
        file.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["price"], 50.0);
}

#[test]
fn validate_is_green_on_reference_configs() {
    for name in MODELS {
        let out = powerhjm(&[
            "validate", "--pfc", &path("pfc.csv"), "--model", &path(&format!("{name}.json")), "--vol", &path("vol.json"),
            "--paths", "2000", "--format", "csv",
        ]);
        assert_eq!(out.status.code(), Some(0), "{name}:\n{}", stdout(&out));
    }
}
