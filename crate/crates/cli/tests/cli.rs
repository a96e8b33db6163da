use std::f64::consts::{FRAC_PI_4, TAU};
use std::path::Path;
use std::process::{Command, Output};

use approx::assert_relative_eq;
use collapse_core::bath::build_ohmic_bath;
use collapse_core::wavepacket::{density_grid, BlochVector, BrownianSource, GridSpec};
use collapse_core::ModelParams;
use collapse_sim::output::{parse_csv, parse_grid_csv, GRID_HEADER, WIDTH_HEADER};
use sha2::{Digest, Sha256};

fn sim(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_collapse-sim"))
        .args(args)
        .arg("--out")
        .arg(out)
        .env_remove("COLLAPSE_SIM_OUT")
        .output()
        .unwrap()
}

fn error_json(out: &Output) -> serde_json::Value {
    let text = String::from_utf8_lossy(&out.stderr);
    serde_json::from_str(text.trim()).unwrap_or_else(|e| panic!("stderr is not JSON ({e}): {text}"))
}

#[test]
fn fig1_grids_carry_born_weights_and_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let out = sim(&["run", "fig1"], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert_eq!(stdout.lines().count(), 2);

    let p = ModelParams::figure_defaults();
    let spin = BlochVector::new(FRAC_PI_4, 0.0).unwrap();
    let bath = build_ohmic_bath(&p, 4096, 50.0 * p.omega0).unwrap();
    let source = BrownianSource::Bath { bath: &bath, temperature: 0.0 };

    for (name, with) in [("fig1_without_brownian.csv", false), ("fig1_with_brownian.csv", true)] {
        let bytes = std::fs::read(dir.path().join(name)).unwrap();
        let line = stdout.lines().find(|l| l.contains(name)).unwrap();
        assert!(line.contains(&format!("sha256={}", hex::encode(Sha256::digest(&bytes)))));
        assert!(line.contains("rows=192941"));
        let text = String::from_utf8(bytes).unwrap();
        assert!(text.starts_with(GRID_HEADER) && !text.contains('\r'));

        let grid = parse_grid_csv(&text).unwrap();
        let direct = density_grid(&p, &spin, &source, &GridSpec::default_q(), &GridSpec::default_t(), with).unwrap();
        assert_eq!(grid, direct);
        for ti in 0..grid.t_axis.len() {
            let m = grid.column_mass(ti);
            assert!((m.plus - 0.8535).abs() < 1e-3 && (m.minus - 0.1464).abs() < 1e-3, "t = {}", m.t);
        }
    }
}

#[test]
fn fig2b_probabilities_are_constant() {
    let dir = tempfile::tempdir().unwrap();
    assert!(sim(&["run", "fig2b"], dir.path()).status.success());
    let text = std::fs::read_to_string(dir.path().join("fig2b_probabilities.csv")).unwrap();
    let (header, rows) = parse_csv(&text).unwrap();
    assert_eq!(header, ["t", "p_plus", "p_minus", "p_total"]);
    assert_eq!(rows.len(), 301);
    for r in rows {
        assert!((r[1] - 0.8535).abs() < 1e-4 && (r[2] - 0.1464).abs() < 1e-4);
        assert!((r[3] - 1.0).abs() < 1e-8);
    }
}

#[test]
fn undamped_widths_stay_at_ground_width() {
    let dir = tempfile::tempdir().unwrap();
    let out = sim(&["run", "widths", "--param", "eta=0", "--param", "bath.n=64"], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(dir.path().join("widths.csv")).unwrap();
    let (header, rows) = parse_csv(&text).unwrap();
    assert_eq!(header.join(","), WIDTH_HEADER);
    let sigma_q = (1.0 / (2.0 * TAU)).sqrt();
    for r in rows {
        assert_relative_eq!(r[1], sigma_q, max_relative = 1e-12);
        assert_eq!(r[2], 0.0);
    }
}

#[test]
fn fig2a_widths_approach_long_time_value() {
    let dir = tempfile::tempdir().unwrap();
    assert!(sim(&["run", "fig2a", "--param", "grid.t.max=10"], dir.path()).status.success());
    let text = std::fs::read_to_string(dir.path().join("fig2a_widths.csv")).unwrap();
    let (_, rows) = parse_csv(&text).unwrap();
    let last = rows.last().unwrap();
    assert_eq!(last[0], 10.0);
    let asymptote = collapse_core::bath::sigma_xi_sq_asymptotic(&ModelParams::figure_defaults()).unwrap().sigma_xi_sq;
    assert!((last[3] - asymptote.sqrt()).abs() / asymptote.sqrt() < 0.01);
    // sigma_Q + sigma_xi in quadrature
    for r in &rows {
        assert_relative_eq!(r[3] * r[3], r[1] * r[1] + r[2] * r[2], max_relative = 1e-12);
    }
}

#[test]
fn other_experiments_write_their_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    for (exp, files) in [
        ("fig3", vec!["fig3_early.csv", "fig3_late_without_brownian.csv", "fig3_late_with_brownian.csv"]),
        ("bath-convergence", vec!["bath-convergence.csv"]),
        ("bell", vec!["bell.json"]),
    ] {
        let out = sim(&["run", exp, "--param", "samples=20000"], dir.path());
        assert!(out.status.success(), "{exp}: {}", String::from_utf8_lossy(&out.stderr));
        for f in files {
            assert!(dir.path().join(f).is_file(), "{f}");
        }
    }
    let bell: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("bell.json")).unwrap()).unwrap();
    assert_eq!(bell["quantum"]["violated"], true);
    assert_eq!(bell["classical"]["samples"], 20000);
    let (_, rows) = parse_csv(&std::fs::read_to_string(dir.path().join("fig3_early.csv")).unwrap()).unwrap();
    assert_eq!(rows.len(), 2 * 1601);
}

#[test]
fn exit_codes_and_error_json() {
    let dir = tempfile::tempdir().unwrap();

    let out = sim(&["run", "fig9"], dir.path());
    assert_eq!(out.status.code(), Some(3));
    assert_eq!(error_json(&out)["error"], "unknown-experiment");

    let out = sim(&["run", "fig1", "--param", "no.such.key=1"], dir.path());
    assert_eq!(out.status.code(), Some(4));
    assert_eq!(error_json(&out)["error"], "invalid-config");

    let bad = dir.path().join("bad.toml");
    std::fs::write(&bad, "[scenario.fig1\n").unwrap();
    let out = sim(&["run", "fig1", "--config", bad.to_str().unwrap()], dir.path());
    assert_eq!(out.status.code(), Some(4));

    let out = sim(&["run", "widths", "--param", "eta=30", "--param", "bath.analytic=true"], dir.path());
    assert_eq!(out.status.code(), Some(5));
    assert_eq!(error_json(&out)["error"], "unsupported-regime");

    let out = sim(&["run", "fig1", "--config", dir.path().join("missing.toml").to_str().unwrap()], dir.path());
    assert_eq!(out.status.code(), Some(6));
    assert_eq!(error_json(&out)["exit_code"], 6);

    let blocker = dir.path().join("file");
    std::fs::write(&blocker, "").unwrap();
    let out = sim(&["run", "bath-convergence"], &blocker.join("sub"));
    assert_eq!(out.status.code(), Some(6));
}

#[test]
fn user_config_and_env_out_dir() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("my.toml");
    std::fs::write(
        &cfg,
        "[scenario.quick]\nexperiment = \"widths\"\nmodel = { eta = 1.0 }\nbath = { n = 128 }\n\n[scenario.quick.grid.t]\nmin = 0.0\nmax = 1.0\npoints = 11\n",
    )
    .unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_collapse-sim"))
        .args(["run", "quick", "--config", cfg.to_str().unwrap()])
        .env("COLLAPSE_SIM_OUT", dir.path().join("env-out"))
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(dir.path().join("env-out").join("quick.csv")).unwrap();
    assert_eq!(parse_csv(&text).unwrap().1.len(), 11);
}

#[test]
fn verify_reports_json() {
    let out = Command::new(env!("CARGO_BIN_EXE_collapse-sim")).arg("verify").output().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["passed"], true);
    assert!(report["checks"].as_array().unwrap().len() >= 8);
}
