//! Runner behavior: input validation before any writes, exit-code mapping,
//! and byte-identical reports for identical config + seed.

use std::path::Path;

use gabden::{run, Command, Outcome};

fn write(path: &Path, content: &str) {
    std::fs::write(path, content).unwrap();
}

const VERIFY_CONFIG: &str = r#"{
  "seed": 7,
  "verify": {
    "cases": [
      {
        "name": "upper",
        "check": "density_theorem",
        "generators": [{"kind": "gaussian"}],
        "points": {"source": "lattice", "v": [2.0, 0.0], "w": [0.0, 2.0], "window_half_side": 8.0},
        "search_region": {"center": [0.0, 0.0], "half_side": 1.0},
        "radii": [2.0],
        "hypothesis": "riesz_sequence"
      }
    ]
  }
}"#;

#[test]
fn missing_pointset_file_is_config_error_with_no_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("config.json");
    write(
        &config,
        r#"{
          "density": {
            "points": {"source": "csv", "path": "nope.csv"},
            "radii": [1.0, 2.0],
            "search_region": {"center": [0.0, 0.0], "half_side": 1.0}
          }
        }"#,
    );
    let out_dir = dir.path().join("out");
    let result = run(Command::Density, &config, Some(&out_dir), None);
    assert!(matches!(result.outcome, Outcome::ConfigError(_)));
    assert_eq!(result.outcome.code(), 1);
    assert!(!out_dir.exists(), "no partial outputs on config error");
}

#[test]
fn missing_section_is_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("config.json");
    write(&config, r#"{"seed": 1}"#);
    let result = run(Command::Verify, &config, None, None);
    assert_eq!(result.outcome.code(), 1);
}

#[test]
fn verify_reports_are_byte_identical_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("config.json");
    write(&config, VERIFY_CONFIG);
    let out1 = dir.path().join("run1");
    let out2 = dir.path().join("run2");
    let r1 = run(Command::Verify, &config, Some(&out1), Some(7));
    let r2 = run(Command::Verify, &config, Some(&out2), Some(7));
    assert_eq!(r1.outcome.code(), 0);
    assert_eq!(r2.outcome.code(), 0);
    for name in ["case_upper.json", "summary.json"] {
        let a = std::fs::read(out1.join(name)).unwrap();
        let b = std::fs::read(out2.join(name)).unwrap();
        assert_eq!(a, b, "{name} differs between identical runs");
    }
}

#[test]
fn hypothesis_failure_maps_to_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("config.json");
    // density-4 lattice under a riesz_sequence hypothesis: rank-deficient section
    write(
        &config,
        r#"{
          "seed": 3,
          "verify": {
            "cases": [
              {
                "name": "overcomplete",
                "check": "density_theorem",
                "generators": [{"kind": "gaussian"}],
                "points": {"source": "lattice", "v": [0.5, 0.0], "w": [0.0, 0.5], "window_half_side": 6.0},
                "search_region": {"center": [0.0, 0.0], "half_side": 0.5},
                "radii": [2.0],
                "hypothesis": "riesz_sequence"
              }
            ]
          }
        }"#,
    );
    let out = dir.path().join("out");
    let result = run(Command::Verify, &config, Some(&out), None);
    assert_eq!(result.outcome.code(), 2);
    assert!(out.join("case_overcomplete.json").exists());
}

#[test]
fn stft_density_bounds_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("config.json");
    write(
        &config,
        r#"{
          "stft": {
            "generator": {"kind": "gaussian"},
            "x": {"lo": -1.0, "hi": 1.0, "step": 0.5},
            "y": {"lo": -1.0, "hi": 1.0, "step": 0.5}
          },
          "density": {
            "points": {"source": "lattice", "v": [1.0, 0.0], "w": [0.0, 1.0], "window_half_side": 6.0},
            "radii": [1.0, 2.0],
            "search_region": {"center": [0.0, 0.0], "half_side": 0.5}
          },
          "bounds": {
            "generators": [{"kind": "gaussian"}],
            "points": {"source": "inline", "points": [[0.0, 0.0], [2.0, 0.0], [0.0, 2.0]]},
            "cube": {"center": [0.0, 0.0], "half_side": 3.0}
          }
        }"#,
    );
    let out = dir.path().join("out");
    assert_eq!(run(Command::Stft, &config, Some(&out), None).outcome.code(), 0);
    assert_eq!(run(Command::Density, &config, Some(&out), None).outcome.code(), 0);
    assert_eq!(run(Command::Bounds, &config, Some(&out), None).outcome.code(), 0);
    let field = std::fs::read_to_string(out.join("field.csv")).unwrap();
    assert!(field.starts_with("x,y,re,im,modulus\n"));
    assert_eq!(field.lines().count(), 26); // header + 5x5 nodes
    let density = std::fs::read_to_string(out.join("density.csv")).unwrap();
    assert!(density.starts_with("R,max_count,min_count,norm_max,norm_min\n"));
    let bounds: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("bounds.json")).unwrap()).unwrap();
    assert!(bounds["lower"].as_f64().unwrap() > 0.0);
    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("manifest.json")).unwrap()).unwrap();
    assert!(manifest["config_sha256"].as_str().unwrap().len() == 64);

    // report command summarizes nothing here but succeeds on the verify dir
    let vconfig = dir.path().join("vconfig.json");
    write(&vconfig, VERIFY_CONFIG);
    let vout = dir.path().join("vout");
    assert_eq!(run(Command::Verify, &vconfig, Some(&vout), None).outcome.code(), 0);
    let rconfig = dir.path().join("rconfig.json");
    write(
        &rconfig,
        &format!(r#"{{"report": {{"input_dir": {:?}}}}}"#, vout.to_str().unwrap()),
    );
    let rout = dir.path().join("rout");
    assert_eq!(run(Command::Report, &rconfig, Some(&rout), None).outcome.code(), 0);
    let summary = std::fs::read_to_string(rout.join("summary.csv")).unwrap();
    assert!(summary.starts_with("check,pass,margin\n"));
}

#[test]
fn hap_check_through_config() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("config.json");
    write(
        &config,
        r#"{
          "seed": 2,
          "verify": {
            "cases": [
              {
                "name": "sparse-set-plateaus",
                "check": "hap",
                "generator": {"kind": "gaussian"},
                "points": {"source": "lattice", "v": [4.0, 0.0], "w": [0.0, 4.0], "window_half_side": 8.0},
                "epsilon": 1e-4,
                "probes": [[2.0, 2.0]],
                "expect_found": false
              },
              {
                "name": "trivial-epsilon",
                "check": "hap",
                "generator": {"kind": "gaussian"},
                "points": {"source": "inline", "points": [[0.0, 0.0]]},
                "epsilon": 2.0,
                "probes": [[0.1, 0.2]],
                "expect_found": true
              }
            ]
          }
        }"#,
    );
    let out = dir.path().join("out");
    let result = run(Command::Verify, &config, Some(&out), None);
    assert_eq!(result.outcome.code(), 0);
    let report: serde_json::Value = serde_json::from_str(
        &std::fs::read_to_string(out.join("case_trivial-epsilon.json")).unwrap(),
    )
    .unwrap();
    assert_eq!(report["measured"][0]["name"], "radius");
    assert_eq!(report["measured"][0]["value"], 0.0);
}
