use std::path::Path;
use std::process::{Command, Output};

use mbspec::dispersion::{special_energy_record, Sign, SpecialKappa};
use mbspec::{Regime, SystemConfig};
use mbspec_cli::RunConfig;
use serde_json::Value;

fn mbspec(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mbspec"))
        .args(args)
        .arg("--out")
        .arg(out)
        .env_remove("MBSPEC_THREADS")
        .output()
        .expect("run mbspec")
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn csv_rows(path: &Path) -> (Vec<String>, Vec<Vec<String>>) {
    let mut r = csv::Reader::from_path(path).unwrap();
    let header = r.headers().unwrap().iter().map(str::to_string).collect();
    let rows = r
        .records()
        .map(|rec| rec.unwrap().iter().map(str::to_string).collect())
        .collect();
    (header, rows)
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path();
    let code = |o: Output| o.status.code().unwrap();
    assert_eq!(
        code(mbspec(&["spectrum", "--kappa-grid", "1:0:0.1"], out)),
        2
    );
    assert_eq!(code(mbspec(&["spectrum", "--kappa-grid", "0:1:0"], out)), 2);
    assert_eq!(code(mbspec(&["spectrum", "--preset", "fig9"], out)), 2);
    assert_eq!(code(mbspec(&["spectrum", "--L", "-1"], out)), 2);
    assert_eq!(code(mbspec(&["spectrum", "--no-such-flag"], out)), 2);
    assert_eq!(
        code(mbspec(&["spectrum", "--max-grid-points", "10"], out)),
        3
    );
    let threads = Command::new(env!("CARGO_BIN_EXE_mbspec"))
        .args(["table1", "--out"])
        .arg(out)
        .env("MBSPEC_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(code(threads), 2);
    assert_eq!(code(mbspec(&["table1"], out)), 0);
}

#[test]
fn spectrum_files_and_sidecar() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path();
    let o = mbspec(
        &["spectrum", "--preset", "fig7", "--kappa-grid", "0:2pi:0.05"],
        out,
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csvs: Vec<_> = std::fs::read_dir(out)
        .unwrap()
        .filter_map(|e| e.ok())
        .filter(|e| e.path().extension().is_some_and(|x| x == "csv"))
        .collect();
    assert_eq!(csvs.len(), 14);

    let (header, rows) = csv_rows(&out.join("spectrum_c1.4.csv"));
    assert_eq!(
        header,
        [
            "kappa",
            "E",
            "branch_N",
            "multiplicity",
            "mode",
            "regime",
            "flags"
        ]
    );
    assert!(!rows.is_empty());
    let e0 = 15.0 / 2.4;
    let mut prev = (f64::NEG_INFINITY, f64::NEG_INFINITY);
    for r in &rows {
        let (k, e): (f64, f64) = (r[0].parse().unwrap(), r[1].parse().unwrap());
        assert!(k > prev.0 || (k == prev.0 && e >= prev.1));
        assert!(e > e0 && e < 15.0);
        assert_eq!((r[4].as_str(), r[5].as_str()), ("squared-phase", "below"));
        prev = (k, e);
    }

    let side = read_json(&out.join("spectrum.json"));
    let runs = side["runs"].as_array().unwrap();
    assert_eq!(runs.len(), 14);
    assert!(runs
        .iter()
        .all(|r| !r["gaps"].as_array().unwrap().is_empty()));
    assert_eq!(side["config"]["settings"]["residual_tol"], 1e-8);
    assert_eq!(side["config"]["L"], 0.278);
}

#[test]
fn config_file_round_trip_and_layering() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run");
    let mut cfg = RunConfig::preset("fig5").unwrap();
    cfg.c = vec![0.6, 1.2];
    cfg.out = out.clone();
    cfg.kappa_grid.step = 0.5;
    let path = dir.path().join("cfg.json");
    std::fs::write(&path, serde_json::to_string_pretty(&cfg).unwrap()).unwrap();

    let o = mbspec(
        &[
            "spectrum",
            "--config",
            path.to_str().unwrap(),
            "--tol-residual",
            "1e-9",
        ],
        &out,
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let side = read_json(&out.join("spectrum.json"));
    let mut back: RunConfig = serde_json::from_value(side["config"].clone()).unwrap();
    assert_eq!(back.settings.residual_tol, 1e-9);
    back.settings.residual_tol = cfg.settings.residual_tol;
    assert_eq!(back, cfg);
    assert!(out.join("spectrum_c0.6.csv").exists());
    assert!(out.join("spectrum_c1.2.csv").exists());

    std::fs::write(&path, r#"{"no_such_key": 1}"#).unwrap();
    let o = mbspec(&["spectrum", "--config", path.to_str().unwrap()], &out);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn table1_matches_closed_forms() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path();
    let o = mbspec(&["table1", "--V", "1", "--L", "1", "--c", "1"], out);
    assert!(o.status.success());
    let (header, rows) = csv_rows(&out.join("table1.csv"));
    assert_eq!(
        header,
        [
            "c",
            "regime",
            "kind",
            "sign",
            "N",
            "E",
            "admissible",
            "failed",
            "outside_allowed_interval"
        ]
    );
    assert_eq!(rows.len(), 2 * 4 + 2 * 2 * 4);
    for r in &rows {
        let regime: Regime = r[1].parse().unwrap();
        let kind = match r[2].as_str() {
            "half-odd" => SpecialKappa::HalfOdd,
            "integer-pi" => SpecialKappa::IntegerPi,
            other => panic!("kind {other}"),
        };
        let sign = if r[3] == "+" { Sign::Plus } else { Sign::Minus };
        let n: u32 = r[4].parse().unwrap();
        let rec = special_energy_record(
            kind,
            sign,
            n,
            &SystemConfig::new(1.0, 1.0, 1.0, regime).unwrap(),
        );
        assert_eq!(r[5].parse::<f64>().unwrap(), rec.energy);
        assert_eq!(r[6] == "true", rec.admissibility.admissible);
        assert_eq!(r[7].is_empty(), rec.admissibility.failed.is_none());
        assert_eq!(r[8] == "true", rec.outside_allowed_interval);
    }
    // Above the barrier with V = 1, L = 1, c = 1 only κ = 0 (N = 0) misses the bound.
    let above: Vec<_> = rows.iter().filter(|r| r[1] == "above").collect();
    assert!(above.iter().all(|r| r[3] == "+"));
    for r in &above {
        let zero = r[2] == "integer-pi" && r[4] == "0";
        assert_eq!(r[6] == "true", !zero, "{r:?}");
        assert_eq!(r[7].is_empty(), !zero);
    }
    let e_half0: f64 = above[0][5].parse().unwrap();
    assert!((e_half0 - (std::f64::consts::PI / 2.0 + 0.5)).abs() < 1e-15);
}

#[test]
fn multichannel_rows_cover_examples() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path();
    assert!(mbspec(&["multichannel"], out).status.success());
    let (header, rows) = csv_rows(&out.join("multichannel.csv"));
    let col = |name: &str| header.iter().position(|h| h == name).unwrap();
    let (n_ch, n_sc, abs_r2, lim) = (col("N"), col("n"), col("abs_R2"), col("abs_R2_limit"));
    let bounded = rows
        .iter()
        .find(|r| r[n_ch] == "10" && r[n_sc] == "1000000")
        .unwrap();
    assert!(bounded[abs_r2].parse::<f64>().unwrap() < 1e-4);
    assert_eq!(bounded[col("class")], "transmission-dominated");
    let unbounded = rows
        .iter()
        .find(|r| r[n_ch] == "10" && r[n_sc].is_empty())
        .unwrap();
    assert!(unbounded[lim].parse::<f64>().unwrap() > 0.999);
    for r in rows.iter().filter(|r| r[n_ch] == "1") {
        assert_eq!(r[abs_r2].parse::<f64>().unwrap(), 0.0);
        assert_eq!(r[col("T_prob")].parse::<f64>().unwrap(), 1.0);
    }
}

#[test]
fn converge_free_particle_and_baseline() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path();
    let o = mbspec(&["converge", "--V", "0", "--n-list", "1,2,8"], out);
    assert!(o.status.success());
    let (header, rows) = csv_rows(&out.join("converge.csv"));
    assert_eq!(
        header,
        [
            "c",
            "n",
            "distance",
            "distance_left_edge",
            "distance_effective",
            "T",
            "R"
        ]
    );
    assert_eq!(rows.len(), 3);
    for r in &rows {
        assert!(r[2].parse::<f64>().unwrap() < 1e-12);
        assert!((r[5].parse::<f64>().unwrap() - 1.0).abs() < 1e-12);
    }

    let o = mbspec(&["converge", "--n-list", "1"], out);
    assert!(o.status.success());
    let (_, rows) = csv_rows(&out.join("converge.csv"));
    assert_eq!(rows.len(), 1);
    let t: f64 = rows[0][5].parse().unwrap();
    let side = read_json(&out.join("converge.json"));
    assert_eq!(side["runs"][0]["trend"]["first_transmission"], t);
}

#[test]
fn bands_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path();
    let o = mbspec(
        &[
            "bands",
            "--V",
            "0",
            "--regime",
            "above",
            "--kappa-grid",
            "0:2pi:0.1",
        ],
        out,
    );
    assert!(o.status.success());
    let report = read_json(&out.join("bands.json"));
    assert!(report["runs"][0]["report"]["gaps"]
        .as_array()
        .unwrap()
        .is_empty());
    assert!(out.join("bands.csv").exists() && out.join("jumps.csv").exists());

    let o = mbspec(
        &[
            "bands",
            "--preset",
            "fig7",
            "--kappa-grid",
            "0:4pi:0.02",
            "--format",
            "json",
        ],
        out,
    );
    assert!(o.status.success());
    let report = read_json(&out.join("bands.json"));
    for run in report["runs"].as_array().unwrap() {
        let gaps = run["report"]["gaps"].as_array().unwrap();
        assert!(gaps.len() >= 4, "c = {}: {} gaps", run["c"], gaps.len());
    }
}

#[test]
fn json_format_spectrum() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path();
    let o = mbspec(
        &[
            "spectrum",
            "--preset",
            "fig2",
            "--c",
            "1",
            "--kappa-grid",
            "0:1:0.5",
            "--format",
            "json",
        ],
        out,
    );
    assert!(o.status.success());
    let rows = read_json(&out.join("spectrum_c1.json"));
    let rows = rows.as_array().unwrap();
    assert!(!rows.is_empty());
    assert!(rows[0].get("branch_N").is_some() && rows[0].get("E").is_some());
}
