use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn gffmax(out: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gffmax"))
        .arg("--out")
        .arg(out)
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn green_n2_is_one() {
    let dir = tempfile::tempdir().unwrap();
    let o = gffmax(dir.path(), &["green", "--n", "2"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = fs::read_to_string(dir.path().join("green_N2_dense.csv")).unwrap();
    assert_eq!(text, "x1,y1,x2,y2,g\n1,1,1,1,1.00000000000e0\n");
}

#[test]
fn green_forms_agree() {
    let dir = tempfile::tempdir().unwrap();
    for form in ["--dense", "--spectral"] {
        let o = gffmax(dir.path(), &["green", "--n", "8", form]);
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    }
    let parse = |name: &str| -> Vec<f64> {
        fs::read_to_string(dir.path().join(name))
            .unwrap()
            .lines()
            .skip(1)
            .map(|l| l.rsplit(',').next().unwrap().parse().unwrap())
            .collect()
    };
    let (d, s) = (parse("green_N8_dense.csv"), parse("green_N8_spectral.csv"));
    assert_eq!(d.len(), 49 * 49);
    assert!(d.iter().zip(&s).all(|(a, b)| (a - b).abs() < 1e-8));
}

#[test]
fn size_cap_and_bad_arguments() {
    let dir = tempfile::tempdir().unwrap();
    let o = gffmax(dir.path(), &["green", "--n", "128"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("spectral"));
    let o = gffmax(dir.path(), &["--dense-cutoff", "100", "green", "--n", "16"]);
    assert_eq!(o.status.code(), Some(3));
    assert_eq!(gffmax(dir.path(), &["green", "--n", "12"]).status.code(), Some(2));
    assert_eq!(gffmax(dir.path(), &["green"]).status.code(), Some(2));
    assert_eq!(gffmax(dir.path(), &["frobnicate"]).status.code(), Some(2));
    let o = gffmax(dir.path(), &["extremes", "--n-min", "0", "--samples", "100"]);
    assert_eq!(o.status.code(), Some(2));
    let o = gffmax(dir.path(), &["extremes", "--samples", "50"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn report_needs_data() {
    let dir = tempfile::tempdir().unwrap();
    let o = gffmax(dir.path(), &["report", "--dir", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(4));
    let missing = dir.path().join("absent");
    let o = gffmax(dir.path(), &["report", "--dir", missing.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(4));
}

#[test]
fn hierarchy_exact_passes() {
    let dir = tempfile::tempdir().unwrap();
    let o = gffmax(dir.path(), &["hierarchy", "--n", "8", "--k", "1", "--exact"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = stdout(&o);
    assert!(text.contains("Markov check N=8 k=1: PASS"), "{text}");
    assert!(text.contains("max block deviation"));
    assert_eq!(gffmax(dir.path(), &["hierarchy", "--n", "8", "--k", "4"]).status.code(), Some(2));
}

#[test]
fn hierarchy_writes_levels() {
    let dir = tempfile::tempdir().unwrap();
    let o = gffmax(dir.path(), &["hierarchy", "--n", "8"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = fs::read_to_string(dir.path().join("decomposition_N8_seed1.csv")).unwrap();
    assert!(text.starts_with("x,y,value,level\n"));
    assert_eq!(text.lines().count(), 1 + 3 * 81);
}

#[test]
fn brw_depth_zero_is_degenerate() {
    let dir = tempfile::tempdir().unwrap();
    let o = gffmax(dir.path(), &["brw", "--depth", "0"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = fs::read_to_string(dir.path().join("brw_b4_depth0.csv")).unwrap();
    let rows: Vec<&str> = text.lines().collect();
    assert_eq!(rows[0], "generation,mean,median,q10,q90,dh_gap");
    assert_eq!(rows.len(), 2);
    let values: Vec<f64> = rows[1].split(',').map(|v| v.parse().unwrap()).collect();
    assert!(values.iter().all(|v| v.abs() < 1e-9), "{values:?}");
}

#[test]
fn brw_simulation_and_budget() {
    let dir = tempfile::tempdir().unwrap();
    let o = gffmax(dir.path(), &["brw", "--depth", "3", "--simulate", "2000", "--dump-cdf"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stdout(&o).contains("Dekking-Host: PASS"));
    assert!(dir.path().join("brw_cdf_b4_depth3.csv").exists());
    assert!(dir.path().join("brw_sim_b4_depth3_seed1.csv").exists());
    let o = gffmax(dir.path(), &["brw", "--depth", "3", "--simulate", "2000", "--leaf-budget", "100"]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn sample_dumps_fields() {
    let dir = tempfile::tempdir().unwrap();
    let o = gffmax(dir.path(), &["--seed", "5", "sample", "--n", "4", "--count", "2", "--dump-fields"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let bin = fs::read(dir.path().join("field_N4_spectral_seed5_1.bin")).unwrap();
    assert_eq!(bin.len(), 4 + 25 * 8);
    assert_eq!(&bin[..4], &4u32.to_le_bytes());
    let o = gffmax(dir.path(), &["sample", "--n", "4", "--dense"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(dir.path().join("samples_N4_dense_seed1.csv").exists());
}

fn extremes(out: &Path, extra: &[&str]) -> Output {
    let mut args = vec!["--seed", "9", "extremes", "--samples", "200", "--quiet"];
    args.extend_from_slice(extra);
    gffmax(out, &args)
}

#[test]
fn extremes_resume_matches_uninterrupted_run() {
    let whole = tempfile::tempdir().unwrap();
    let o = extremes(whole.path(), &["--n-min", "1", "--n-max", "4"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let parts = tempfile::tempdir().unwrap();
    assert_eq!(extremes(parts.path(), &["--n-min", "1", "--n-max", "2"]).status.code(), Some(0));
    let o = extremes(parts.path(), &["--n-min", "1", "--n-max", "4"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stderr(&o).contains("level 2: persisted, skipped"));
    let read = |d: &Path| fs::read(d.join("extremes_seed9.csv")).unwrap();
    assert_eq!(read(whole.path()), read(parts.path()));
    // A later level first, then the gap filled: rows end up sorted.
    let shuffled = tempfile::tempdir().unwrap();
    assert_eq!(extremes(shuffled.path(), &["--n-min", "3", "--n-max", "4"]).status.code(), Some(0));
    assert_eq!(extremes(shuffled.path(), &["--n-min", "1", "--n-max", "2"]).status.code(), Some(0));
    assert_eq!(read(whole.path()), read(shuffled.path()));
}

#[test]
fn extremes_resume_mismatch_is_refused() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(extremes(dir.path(), &["--n-min", "1", "--n-max", "2"]).status.code(), Some(0));
    let o = gffmax(dir.path(), &["--seed", "9", "extremes", "--samples", "300", "--n-min", "1", "--n-max", "2"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("200 samples"), "{}", stderr(&o));
}

#[test]
fn extremes_file_format_and_report() {
    let dir = tempfile::tempdir().unwrap();
    let o = gffmax(dir.path(), &["--seed", "2", "extremes", "--samples", "400", "--n-min", "1", "--n-max", "4"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let printed = stdout(&o);
    assert!(printed.contains("exact n=1 checks"));
    let text = fs::read_to_string(dir.path().join("extremes_seed2.csv")).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "# gffmax extremes schema v1");
    assert_eq!(lines[1], "n,N,samples,mean_max,se_mean,var_max,dh_gap,dh_se,q10,q25,q50,q75,q90");
    assert_eq!(lines.len(), 6);
    assert!(gffmax(dir.path(), &["brw", "--depth", "2"]).status.success());
    let o = gffmax(dir.path(), &["report"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let report = stdout(&o);
    assert!(report.contains("== extremes_seed2.csv"));
    assert!(report.contains("== brw_b4_depth2.csv"));
    // The report reads only persisted files, so it matches the run's own.
    assert!(report.contains(printed.trim_end()));
}

#[test]
fn config_file_is_used_and_overridden() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("config.json");
    let out = dir.path().join("from-config");
    fs::write(
        &cfg,
        format!(
            r#"{{"n_min": 1, "n_max": 2, "samples": 150, "seed": 3, "workers": 2, "out": {:?}, "tolerances": {{"inequality": 2.5}}, "threshold": 1.5}}"#,
            out.to_str().unwrap()
        ),
    )
    .unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_gffmax"))
        .args(["--config", cfg.to_str().unwrap(), "extremes", "--n-max", "3"])
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = fs::read_to_string(out.join("extremes_seed3.csv")).unwrap();
    assert_eq!(text.lines().count(), 2 + 3);
    assert!(text.lines().nth(2).unwrap().starts_with("1,2,150,"));
    assert!(stdout(&o).contains("K = 1.5"));
    fs::write(&cfg, r#"{"samples": "many"}"#).unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_gffmax"))
        .args(["--config", cfg.to_str().unwrap(), "extremes"])
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn locked_directory_is_refused() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join(".gffmax.lock"), "1\n").unwrap();
    let o = gffmax(dir.path(), &["green", "--n", "2"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("locked"));
}
