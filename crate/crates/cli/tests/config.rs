use std::fs;

use slds_cli::config::{Experiment, Overrides, RunConfig};
use slds_cli::{load_config, parse_config, resolve, CliError};
use slds_core::fbm::FbmMethod;
use slds_core::lattice::Boundary;

fn write_tmp(text: &str) -> (tempfile::TempDir, std::path::PathBuf) {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("run.json");
    fs::write(&path, text).unwrap();
    (dir, path)
}

fn message(err: CliError) -> String {
    err.to_string()
}

#[test]
fn minimal_config_takes_defaults() {
    let (_d, path) = write_tmp("{}");
    let cfg = load_config(&path).unwrap();
    assert_eq!(cfg, RunConfig::default());
    assert_eq!(cfg.lattice.half_width, 32);
    assert_eq!(cfg.lattice.boundary, Boundary::Dirichlet);
    assert_eq!(cfg.grid.dt, 1.0 / 256.0);
    assert_eq!(cfg.grid.method, FbmMethod::DaviesHarte);
    assert_eq!(cfg.params.hurst.value(), 0.75);
    assert_eq!((cfg.params.lambda, cfg.params.sigma, cfg.params.varrho), (1.0, 1.0, 1.0));
    assert_eq!(cfg.params.gamma, 0.5);
    assert_eq!(cfg.coefficients.a.decay_q, 1.0);
    assert_eq!(cfg.pullback.horizons, vec![10.0, 20.0, 30.0]);
    assert_eq!(cfg.verify.ball_radius, 10.0);
    assert_eq!(cfg.seed, 0);
}

#[test]
fn partial_sections_keep_sibling_defaults() {
    let cfg = parse_config(r#"{"params": {"lambda": 2.0}, "grid": {"dt": 0.125}}"#).unwrap();
    assert_eq!(cfg.params.lambda, 2.0);
    assert_eq!(cfg.params.sigma, 1.0);
    assert_eq!(cfg.grid.dt, 0.125);
    assert_eq!(cfg.grid.method, FbmMethod::DaviesHarte);
}

#[test]
fn hurst_outside_range_names_the_interval() {
    let (_d, path) = write_tmp(r#"{"params": {"hurst": 0.4}}"#);
    let msg = message(load_config(&path).unwrap_err());
    assert!(msg.contains("(1/2, 1)"), "{msg}");
}

#[test]
fn decay_q_at_half_names_square_summability() {
    let (_d, path) = write_tmp(r#"{"coefficients": {"b": {"decay_q": 0.5}}}"#);
    let msg = message(load_config(&path).unwrap_err());
    assert!(msg.contains("square-summable") && msg.contains("q > 1/2"), "{msg}");
    assert!(msg.contains("coefficients.b"), "{msg}");
}

#[test]
fn unknown_keys_are_rejected_with_line_info() {
    let (_d, path) = write_tmp("{\n  \"seed\": 1,\n  \"hurts\": 0.7\n}");
    let msg = message(load_config(&path).unwrap_err());
    assert!(msg.contains("unknown field `hurts`"), "{msg}");
    assert!(msg.contains("line 3"), "{msg}");
    let nested = parse_config(r#"{"params": {"lamda": 1.0}}"#).unwrap_err().to_string();
    assert!(nested.contains("unknown field `lamda`"), "{nested}");
}

#[test]
fn syntax_errors_carry_line_info() {
    let msg = parse_config("{\n\"seed\": 1,,\n}").unwrap_err().to_string();
    assert!(msg.contains("line 2"), "{msg}");
}

#[test]
fn rates_must_be_positive() {
    for key in ["lambda", "sigma", "varrho", "gamma"] {
        let cfg = parse_config(&format!(r#"{{"params": {{"{key}": 0.0}}}}"#)).unwrap();
        let msg = cfg.validate().unwrap_err().to_string();
        assert!(msg.contains(key) && msg.contains("> 0"), "{msg}");
    }
}

#[test]
fn two_sided_experiments_need_zero_in_the_window() {
    let cfg = parse_config(r#"{"experiment": "pullback", "grid": {"window": [1.0, 40.0]}}"#).unwrap();
    let msg = cfg.validate().unwrap_err().to_string();
    assert!(msg.contains("must contain 0"), "{msg}");
    let short = parse_config(r#"{"experiment": "pullback", "grid": {"window": [-5.0, 0.0]}}"#).unwrap();
    assert!(short.validate().unwrap_err().to_string().contains("does not cover"));
    let ok = parse_config(r#"{"experiment": "pullback", "grid": {"window": [-40.0, 1.0]}}"#).unwrap();
    ok.validate().unwrap();
}

#[test]
fn flags_override_file_which_overrides_defaults() {
    let (_d, path) = write_tmp(r#"{"seed": 5, "params": {"lambda": 2.0, "sigma": 3.0}, "grid": {"method": "hosking"}}"#);
    let o = Overrides {
        lambda: Some(4.0),
        n_sites: Some(21),
        method: Some(FbmMethod::Cholesky),
        ..Default::default()
    };
    let cfg = resolve(Experiment::Contraction, Some(&path), &o).unwrap();
    assert_eq!(cfg.params.lambda, 4.0);
    assert_eq!(cfg.params.sigma, 3.0);
    assert_eq!(cfg.params.varrho, 1.0);
    assert_eq!(cfg.seed, 5);
    assert_eq!(cfg.lattice.half_width, 10);
    assert_eq!(cfg.grid.method, FbmMethod::Cholesky);
    assert_eq!(cfg.experiment, Experiment::Contraction);
}

#[test]
fn flag_values_are_validated() {
    let bad_h = Overrides {
        hurst: Some(0.4),
        ..Default::default()
    };
    let msg = resolve(Experiment::Fbm, None, &bad_h).unwrap_err().to_string();
    assert!(msg.contains("(1/2, 1)"), "{msg}");
    let even = Overrides {
        n_sites: Some(20),
        ..Default::default()
    };
    assert!(resolve(Experiment::Fbm, None, &even).unwrap_err().to_string().contains("odd"));
}

#[test]
fn config_round_trips_through_json() {
    let cfg = parse_config(r#"{"experiment": "verify", "nonlinearity": {"kind": "classic_fhn", "a": 0.1}}"#).unwrap();
    let text = serde_json::to_string(&cfg).unwrap();
    assert_eq!(parse_config(&text).unwrap(), cfg);
}
