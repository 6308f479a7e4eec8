use std::path::Path;
use std::process::Command;

use uwb_nlos::classify::{Method, Selector};
use uwb_nlos::{classify_record, extract_all, load_dataset, Dataset64, Label};
use uwb_nlos_cli::{
    cmd_classify, cmd_extract, cmd_fit, cmd_generate, cmd_report, read_model, CliError, RunConfig,
};

fn small_cfg() -> RunConfig {
    RunConfig {
        n_per_class: 40,
        ..Default::default()
    }
}

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_uwb-nlos"))
}

#[test]
fn generate_writes_rows_and_repeats_bytes() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a.csv"), dir.path().join("b.csv"));
    let cfg = small_cfg();
    let msg = cmd_generate(&cfg, &a).unwrap();
    assert!(msg.contains("40 LOS + 40 NLOS"), "{msg}");
    cmd_generate(&cfg, &b).unwrap();
    let text = std::fs::read(&a).unwrap();
    assert_eq!(text, std::fs::read(&b).unwrap());
    assert_eq!(String::from_utf8(text).unwrap().lines().count(), 81);
}

#[test]
fn generate_rejects_zero_per_class_without_writing() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("never.csv");
    let cfg = RunConfig {
        n_per_class: 0,
        ..Default::default()
    };
    let err = cmd_generate(&cfg, &out).unwrap_err();
    assert_eq!(err.exit_code(), 2);
    assert!(!out.exists());
}

#[test]
fn extract_rows_match_library() {
    let dir = tempfile::tempdir().unwrap();
    let (ds_path, feat) = (dir.path().join("ds.csv"), dir.path().join("f.csv"));
    cmd_generate(&small_cfg(), &ds_path).unwrap();
    cmd_extract(&small_cfg(), &ds_path, &feat, false).unwrap();
    let ds: Dataset64 = load_dataset(&ds_path).unwrap();
    let text = std::fs::read_to_string(&feat).unwrap();
    let rows: Vec<&str> = text.lines().skip(1).collect();
    assert_eq!(rows.len(), ds.len());
    for i in [0, 17, 41, 79] {
        let fv = extract_all(&ds.records()[i].cir, 0.01).unwrap();
        let vals: Vec<f64> = rows[i]
            .split(',')
            .skip(1)
            .map(|v| v.parse().unwrap())
            .collect();
        assert_eq!(
            vals,
            vec![
                fv.skewness,
                fv.kurtosis,
                fv.med,
                fv.rds,
                fv.energy,
                fv.energy_ratio,
                fv.amp_mean
            ]
        );
    }
}

fn write(path: &Path, text: &str) {
    std::fs::write(path, text).unwrap();
}

#[test]
fn extract_degenerate_handling() {
    let dir = tempfile::tempdir().unwrap();
    let ds = dir.path().join("ds.csv");
    write(
        &ds,
        "label,t_start,dt,n\nLOS,0,1,3,1,0.5,0\nNLOS,0,1,3,0,0,0\nNLOS,0,1,3,0,1,0.25\n",
    );
    let out = dir.path().join("f.csv");
    let err = cmd_extract(&RunConfig::default(), &ds, &out, false).unwrap_err();
    assert_eq!(err.exit_code(), 4);
    assert!(err.to_string().contains("record 1"), "{err}");
    assert!(!out.exists());

    let msg = cmd_extract(&RunConfig::default(), &ds, &out, true).unwrap();
    assert!(msg.contains("skipped record 1"), "{msg}");
    assert_eq!(std::fs::read_to_string(&out).unwrap().lines().count(), 3);
}

#[test]
fn corrupt_dataset_names_line() {
    let dir = tempfile::tempdir().unwrap();
    let ds = dir.path().join("ds.csv");
    write(&ds, "label,t_start,dt,n\nLOS,0,1,2,1,2\nLOS,0,1,2,1\n");
    let err =
        cmd_extract(&RunConfig::default(), &ds, &dir.path().join("f.csv"), false).unwrap_err();
    assert_eq!(err.exit_code(), 3);
    assert!(err.to_string().contains("line 3"), "{err}");
}

#[test]
fn fit_twice_is_byte_identical_and_single_class_fails() {
    let dir = tempfile::tempdir().unwrap();
    let ds = dir.path().join("ds.csv");
    cmd_generate(&small_cfg(), &ds).unwrap();
    let (m1, m2) = (dir.path().join("m1.json"), dir.path().join("m2.json"));
    cmd_fit(&small_cfg(), &ds, &m1).unwrap();
    cmd_fit(&small_cfg(), &ds, &m2).unwrap();
    assert_eq!(std::fs::read(&m1).unwrap(), std::fs::read(&m2).unwrap());
    assert_eq!(read_model(&m1).unwrap().features.len(), 7);

    let los_only = dir.path().join("los.csv");
    let text = std::fs::read_to_string(&ds).unwrap();
    let kept: Vec<&str> = text.lines().filter(|l| !l.starts_with("NLOS")).collect();
    write(&los_only, &(kept.join("\n") + "\n"));
    let err = cmd_fit(&small_cfg(), &los_only, &dir.path().join("m3.json")).unwrap_err();
    assert_eq!(err.exit_code(), 2);
    assert!(!dir.path().join("m3.json").exists());
}

#[test]
fn classify_agrees_with_library() {
    let dir = tempfile::tempdir().unwrap();
    let (ds_path, model_path, labels) = (
        dir.path().join("ds.csv"),
        dir.path().join("m.json"),
        dir.path().join("labels.csv"),
    );
    cmd_generate(&small_cfg(), &ds_path).unwrap();
    cmd_fit(&small_cfg(), &ds_path, &model_path).unwrap();
    cmd_classify(&model_path, &ds_path, "amp_mean+med", "ratio", &labels).unwrap();
    let first = std::fs::read(&labels).unwrap();
    cmd_classify(&model_path, &ds_path, "amp_mean+med", "ratio", &labels).unwrap();
    assert_eq!(first, std::fs::read(&labels).unwrap());

    let model = read_model(&model_path).unwrap();
    let ds: Dataset64 = load_dataset(&ds_path).unwrap();
    let sel: Selector = "amp_mean+med".parse().unwrap();
    for (line, rec) in String::from_utf8(first)
        .unwrap()
        .lines()
        .skip(1)
        .zip(ds.records())
    {
        let predicted: Label = line.rsplit(',').next().unwrap().parse().unwrap();
        assert_eq!(
            predicted,
            classify_record(&model, &rec.cir, Method::Ratio, &sel).unwrap()
        );
    }

    let err = cmd_classify(&model_path, &ds_path, "pld", "ratio", &labels).unwrap_err();
    assert!(matches!(err, CliError::Usage(_)));
    let err = cmd_classify(&model_path, &ds_path, "cov_mean", "ratio", &labels).unwrap_err();
    assert_eq!(err.exit_code(), 2);
}

#[test]
fn report_structure_and_holdout() {
    let dir = tempfile::tempdir().unwrap();
    let (ds, model) = (dir.path().join("ds.csv"), dir.path().join("m.json"));
    let cfg = RunConfig {
        in_sample: false,
        ..small_cfg()
    };
    cmd_generate(&cfg, &ds).unwrap();
    cmd_fit(&cfg, &ds, &model).unwrap();
    let out = dir.path().join("rep");
    cmd_report(&cfg, &model, &ds, &out).unwrap();
    let names: Vec<String> = std::fs::read_dir(&out)
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .collect();
    assert_eq!(names.iter().filter(|n| n.starts_with("pdf_")).count(), 14);
    assert_eq!(names.iter().filter(|n| n.starts_with("joint_")).count(), 4);
    let grid = std::fs::read_to_string(out.join("joint_rds_med_LOS.csv")).unwrap();
    assert_eq!(
        grid.lines().next(),
        Some("feature_a,feature_b,value_a,value_b,density")
    );
    assert_eq!(grid.lines().count(), 1 + 50 * 50);
    let pdf = std::fs::read_to_string(out.join("pdf_med_NLOS.csv")).unwrap();
    assert_eq!(
        pdf.lines().next(),
        Some("feature,class,bin_lo,bin_hi,density")
    );
    assert!(read_model(&model).unwrap().metadata["in_sample"] == "false");
}

#[test]
fn binary_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let ds = dir.path().join("ds.csv");
    let st = bin()
        .args(["generate", "--n-per-class", "5", "--seed", "3", "--out"])
        .arg(&ds)
        .status()
        .unwrap();
    assert_eq!(st.code(), Some(0));

    let st = bin().args(["frobnicate"]).status().unwrap();
    assert_eq!(st.code(), Some(2));

    let cfg = dir.path().join("run.conf");
    write(&cfg, "n_per_class = 4\nmystery = 1\n");
    let st = bin()
        .arg("--config")
        .arg(&cfg)
        .args(["generate", "--out"])
        .arg(dir.path().join("x.csv"))
        .status()
        .unwrap();
    assert_eq!(st.code(), Some(2));

    let bad = dir.path().join("bad.csv");
    write(&bad, "label,t_start,dt,n\nLOS,0,1,2,1\n");
    let st = bin()
        .arg("fit")
        .arg(&bad)
        .arg("--out")
        .arg(dir.path().join("m.json"))
        .status()
        .unwrap();
    assert_eq!(st.code(), Some(3));

    let zero = dir.path().join("zero.csv");
    write(&zero, "label,t_start,dt,n\nLOS,0,1,2,0,0\nNLOS,0,1,2,1,0\n");
    let st = bin()
        .arg("fit")
        .arg(&zero)
        .arg("--out")
        .arg(dir.path().join("m.json"))
        .status()
        .unwrap();
    assert_eq!(st.code(), Some(4));

    let st = bin()
        .arg("extract")
        .arg(dir.path().join("missing.csv"))
        .status()
        .unwrap();
    assert_eq!(st.code(), Some(3));
}

#[test]
fn config_file_and_flag_precedence() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.conf");
    write(&cfg, "n_per_class = 4\nseed = 10\n");
    let (a, b) = (dir.path().join("a.csv"), dir.path().join("b.csv"));
    let st = bin()
        .arg("--config")
        .arg(&cfg)
        .args(["generate", "--out"])
        .arg(&a)
        .status()
        .unwrap();
    assert!(st.success());
    let st = bin()
        .arg("--config")
        .arg(&cfg)
        .args(["--n-per-class", "6", "generate", "--out"])
        .arg(&b)
        .status()
        .unwrap();
    assert!(st.success());
    assert_eq!(std::fs::read_to_string(&a).unwrap().lines().count(), 9);
    assert_eq!(std::fs::read_to_string(&b).unwrap().lines().count(), 13);
}
