use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use tfcorr::atom_energy::SlopeConvention;
use tfcorr::config::RunConfig;
use tfcorr::data::*;
use tfcorr::Error;

const CONVENTIONS: [SlopeConvention; 2] = [SlopeConvention::PerLnN, SlopeConvention::PerLnNCubeRoot];

fn fixture() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/synthetic_correlation.csv")
}

fn parse(text: &str) -> tfcorr::Result<CorrelationDataset> {
    parse_correlation_csv(text, Path::new("t.csv"))
}

fn parse_line(text: &str) -> usize {
    match parse(text) {
        Err(Error::Parse { line, .. }) => line,
        other => panic!("expected a parse error, got {other:?}"),
    }
}

fn ns() -> Vec<u32> {
    (2..=54).step_by(2).collect()
}

#[test]
fn loader_cases() {
    assert!(parse("n,label,e_corr_hartree,source\n").unwrap().is_empty());
    let one = parse("n,label,e_corr_hartree,source\n10,Ne,-0.39,exp\n").unwrap();
    assert_eq!(one.len(), 1);
    let r = &one.records[0];
    assert_eq!((r.n, r.label.as_str(), r.e_corr_hartree, r.source), (10, "Ne", -0.39, Source::Exp));
    // Same n in different sources is fine.
    assert_eq!(parse("n,label,e_corr_hartree,source\n10,Ne,-0.39,exp\n10,Ne,-0.38,ext-hf\n").unwrap().len(), 2);
}

#[test]
fn loader_errors_carry_line_numbers() {
    let h = "n,label,e_corr_hartree,source\n";
    assert_eq!(parse_line(&format!("{h}10,Ne,-0.39,exp\n10,Ne,-0.4,exp\n")), 3);
    assert_eq!(parse_line(&format!("{h}2,He,-0.04,exp\n3,Li,abc,exp\n")), 3);
    assert_eq!(parse_line(&format!("{h}2,He,-0.04,exp\n3,Li,-0.04\n")), 3);
    assert_eq!(parse_line(&format!("{h}2,He,-0.04,lab\n")), 2);
    assert_eq!(parse_line(&format!("{h}0,X,-0.04,exp\n")), 2);
    assert_eq!(parse_line(&format!("{h}2,X,NaN,exp\n")), 2);
    assert_eq!(parse_line("n,name,e,source\n"), 1);
    assert!(matches!(load_correlation_csv(Path::new("/nonexistent/x.csv")), Err(Error::Io { .. })));
}

#[test]
fn dataset_csv_round_trip() {
    let ds = load_correlation_csv(&fixture()).unwrap();
    assert_eq!(ds.sources(), vec![Source::Exp, Source::ExtHf]);
    let back = parse(&ds.to_csv_string()).unwrap();
    assert_eq!(back, ds);
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("d.csv");
    ds.write(&p).unwrap();
    assert_eq!(load_correlation_csv(&p).unwrap(), ds);
    let dup = vec![ds.records[0].clone(), ds.records[0].clone()];
    assert!(CorrelationDataset::new(dup).is_err());
}

#[test]
fn exact_recovery_of_the_offset() {
    let slope = default_theory_slope();
    assert!((slope - 0.06218).abs() < 1e-15);
    for conv in CONVENTIONS {
        let ds = synthetic_dataset(&ns(), conv, conv.slope(), -0.018, Source::Exp).unwrap();
        let fit = fit_offset(&ds, conv, conv.slope()).unwrap();
        assert!((fit.c_prime + 0.018).abs() < 1e-12, "{conv:?}: {}", fit.c_prime);
        assert!(fit.max_rel_dev_n_ge_10.unwrap() < 1e-12);
        for r in &fit.residuals {
            assert_eq!(r.residual, r.data - r.model);
        }
    }
}

#[test]
fn noisy_data_stays_near_the_offset() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for conv in CONVENTIONS {
        for _ in 0..50 {
            let mut ds = synthetic_dataset(&ns(), conv, conv.slope(), -0.018, Source::Exp).unwrap();
            for r in &mut ds.records {
                r.e_corr_hartree *= 1.0 + rng.gen_range(-0.01..=0.01);
            }
            let fit = fit_offset(&ds, conv, conv.slope()).unwrap();
            assert!((fit.c_prime + 0.018).abs() < 0.002, "{}", fit.c_prime);
        }
    }
}

#[test]
fn fit_needs_three_records() {
    let ds = synthetic_dataset(&[2, 3], SlopeConvention::PerLnN, 0.06218, -0.018, Source::Exp).unwrap();
    assert!(fit_offset(&ds, SlopeConvention::PerLnN, 0.06218).is_err());
    assert!(fit_all(&ds, 0.06218).is_err());
}

#[test]
fn fit_all_reports_each_source_and_joint() {
    let ds = load_correlation_csv(&fixture()).unwrap();
    let groups = fit_all(&ds, default_theory_slope()).unwrap();
    let names: Vec<&str> = groups.iter().map(|g| g.subset.as_str()).collect();
    assert_eq!(names, ["exp", "ext-hf", "joint"]);
    for g in &groups {
        assert_eq!(g.fits.len(), 2);
        assert_eq!(g.best, SlopeConvention::PerLnN);
        let fit = &g.fits[0];
        assert!((fit.c_prime + 0.018).abs() < 0.005);
        assert!(fit.max_rel_dev_n_ge_10.unwrap() < 0.08);
    }
}

#[test]
fn plot_data_has_one_row_per_record() {
    let ds = load_correlation_csv(&fixture()).unwrap();
    let fit = fit_offset(&ds, SlopeConvention::PerLnN, default_theory_slope()).unwrap();
    let text = plot_data_csv(&fit);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("n,model,data"));
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), ds.len());
    for (row, r) in rows.iter().zip(&fit.residuals) {
        let f: Vec<&str> = row.split(',').collect();
        assert_eq!(f[0].parse::<u32>().unwrap(), r.n);
        assert_eq!(f[1].parse::<f64>().unwrap(), r.model);
        assert_eq!(f[2].parse::<f64>().unwrap(), r.data);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]
    #[test]
    fn fit_is_invariant_under_reordering(perm in Just((0..27usize).collect::<Vec<_>>()).prop_shuffle()) {
        let ds = load_correlation_csv(&fixture()).unwrap();
        let ds = CorrelationDataset::new(ds.records.into_iter().filter(|r| r.source == Source::ExtHf || r.n % 2 == 0).collect()).unwrap();
        prop_assert_eq!(ds.len(), 23);
        let shuffled = CorrelationDataset::new(perm.iter().filter(|&&i| i < 23).map(|&i| ds.records[i].clone()).collect()).unwrap();
        for conv in CONVENTIONS {
            let a = fit_offset(&ds, conv, 0.06218).unwrap();
            let b = fit_offset(&shuffled, conv, 0.06218).unwrap();
            prop_assert_eq!(a, b);
        }
    }
}

#[test]
fn config_file_and_overrides() {
    let mut cfg = RunConfig::default();
    cfg.apply_text("# comment\nseed = 9\ntol=1e-7  # trailing\n\npotential = r^4\n", Path::new("c.txt")).unwrap();
    assert_eq!((cfg.seed, cfg.tol, cfg.potential.as_str()), (9, 1e-7, "r^4"));
    cfg.set("slope_convention", "per-lnN^(1/3)").unwrap();
    assert_eq!(cfg.slope_convention, SlopeConvention::PerLnNCubeRoot);
    match cfg.apply_text("seed = 1\nbogus = 2\n", Path::new("c.txt")) {
        Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
        other => panic!("{other:?}"),
    }
    assert!(cfg.apply_text("seed 1\n", Path::new("c.txt")).is_err());
    // Every printed key reads back to the same configuration.
    let mut back = RunConfig::default();
    back.apply_text(&cfg.to_text(), Path::new("c.txt")).unwrap();
    assert_eq!(back, cfg);
    cfg.tol = -1.0;
    assert!(cfg.validate().is_err());
}

fn tfcorr(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tfcorr")).args(args).output().unwrap()
}

/// Runs the command twice with `--out` and returns the report bytes.
fn twice(args: &[&str]) -> Vec<u8> {
    let dir = tempfile::tempdir().unwrap();
    let mut outs = Vec::new();
    for k in 0..2 {
        let p = dir.path().join(format!("r{k}.json"));
        let mut full: Vec<&str> = args.to_vec();
        let ps = p.to_str().unwrap().to_string();
        full.extend(["--out", &ps]);
        let o = tfcorr(&full);
        assert!(o.status.success(), "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
        outs.push(std::fs::read(&p).unwrap());
    }
    assert_eq!(outs[0], outs[1], "{args:?} is not reproducible");
    outs.pop().unwrap()
}

fn json(bytes: &[u8]) -> serde_json::Value {
    serde_json::from_slice(bytes).unwrap()
}

#[test]
fn cli_tf_reports_are_deterministic() {
    let v = json(&twice(&["tf", "atom"]));
    assert_eq!(v["schema_version"], 1);
    assert_eq!(v["kind"], "tf-atom");
    assert!((v["result"]["e_tf_hartree_per_z_7_3"].as_f64().unwrap() + 0.7687).abs() < 1e-3);
    let v = json(&twice(&["tf", "dot", "--potential", "r^4"]));
    assert_eq!(v["kind"], "tf-dot");
    assert_eq!(v["config"]["potential"], "r^4");
}

#[test]
fn cli_constants_are_deterministic() {
    let v = json(&twice(&["constants", "--seed", "3"]));
    let arr = v.as_array().unwrap();
    assert!(arr.len() >= 10);
    for e in arr {
        assert_eq!(e["schema_version"], 1);
        assert!(e["name"].is_string() && e["numeric"].is_number() && e["rel_error"].is_number());
    }
    let o = tfcorr(&["constants", "verify"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn cli_atom_reports_are_deterministic() {
    let v = json(&twice(&["atom", "corr", "--n", "18"]));
    assert_eq!(v["kind"], "atom-corr");
    assert!(v["result"]["b_value"].is_null());
    let v = json(&twice(&["atom", "hx", "--n", "10"]));
    assert!((v["result"]["total"].as_f64().unwrap() - v["result"]["terms"][0]["value"].as_f64().unwrap()).abs() > 0.0);
}

#[test]
fn cli_dot_and_fit_reports_are_deterministic() {
    let v = json(&twice(&["dot", "energy", "--n", "100"]));
    assert_eq!(v["kind"], "dot-energy");
    let r = &v["result"];
    assert!(r["screening_residual"].as_f64().unwrap() < 1e-8);
    let fx = fixture();
    let f = fx.to_str().unwrap();
    let v = json(&twice(&["fit", "--data", f]));
    assert_eq!(v["result"].as_array().unwrap().len(), 3);
    let dir = tempfile::tempdir().unwrap();
    let plot = dir.path().join("plot.csv");
    let o = tfcorr(&["fit", "--data", f, "--convention", "per-lnN", "--plot-data", plot.to_str().unwrap()]);
    assert!(o.status.success());
    let text = std::fs::read_to_string(&plot).unwrap();
    assert_eq!(text.lines().count(), 1 + 31);
}

#[test]
fn cli_exit_codes() {
    assert_eq!(tfcorr(&["atom", "hx", "--n", "10"]).status.code(), Some(0));
    assert_eq!(tfcorr(&["tf", "atom", "--q", "1.5"]).status.code(), Some(2));
    assert_eq!(tfcorr(&["--tol", "-1", "atom", "hx"]).status.code(), Some(2));
    assert_eq!(tfcorr(&["dot", "energy", "--potential", "r^x"]).status.code(), Some(2));
    assert_eq!(tfcorr(&["atom", "hx", "--n", "0.5"]).status.code(), Some(2));
    assert_eq!(tfcorr(&[]).status.code(), Some(2));
    assert_eq!(tfcorr(&["fit", "--data", "/nonexistent/t.csv"]).status.code(), Some(4));
    assert_eq!(tfcorr(&["atom", "hx", "--out", "/nonexistent/dir/r.json"]).status.code(), Some(4));
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.csv");
    std::fs::write(&bad, "n,label,e_corr_hartree,source\n2,He,x,exp\n").unwrap();
    let o = tfcorr(&["fit", "--data", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("bad.csv:2"));
}

#[test]
fn cli_show_config_and_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(&cfg, "seed = 5\nn = 20\n").unwrap();
    let o = tfcorr(&["--config", cfg.to_str().unwrap(), "--seed", "6", "--set", "x_unknown=0.25", "--show-config"]);
    assert!(o.status.success());
    let text = String::from_utf8(o.stdout).unwrap();
    let mut parsed = RunConfig::default();
    parsed.apply_text(&text, Path::new("shown")).unwrap();
    assert_eq!((parsed.seed, parsed.n, parsed.x_unknown), (6, 20.0, 0.25));
    std::fs::write(&cfg, "seed = 5\nnonsense\n").unwrap();
    let o = tfcorr(&["--config", cfg.to_str().unwrap(), "--show-config"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("run.cfg:2"));
}
