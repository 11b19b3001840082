use std::fs;

use rdesn::io;
use rdesn::pipeline::{
    cmd_evaluate, cmd_predict, cmd_report, cmd_simulate, cmd_train, RunConfig, RunLayout,
};
use rdesn::{Error, ModelVersion};

fn small(version: ModelVersion) -> RunConfig {
    let mut cfg = RunConfig::preset(version);
    cfg.apply_overrides(
        "nx = 8\nny = 8\nnz = 8\nUNITS = 60\nWARM_UP = 10\nTRAIN_END = 40\nROLLOUT_STEPS = 12\nSIM_STEPS = 52\nPOINTS = \"1,1,7; 4,5,7\"\nLYAP_ALIGN_STEPS = 20\n",
        None,
    )
    .unwrap();
    cfg
}

#[test]
fn v1_simulation_writes_every_step() {
    let mut cfg = RunConfig::preset(ModelVersion::V1);
    cfg.sim_steps = 150;
    let dir = tempfile::tempdir().unwrap();
    let layout = RunLayout::new(dir.path());
    let m = cmd_simulate(&cfg, &layout).unwrap();
    assert_eq!(m.recorded_steps.len(), 151);
    for field in ["c", "v", "h"] {
        let n = fs::read_dir(layout.truth())
            .unwrap()
            .filter(|e| {
                let name = e.as_ref().unwrap().file_name().into_string().unwrap();
                name.starts_with(&format!("{field}_")) && name.ends_with(".f64")
            })
            .count();
        assert_eq!(n, 151, "snapshots of {field}");
    }
    let text = fs::read_to_string(layout.config()).unwrap();
    assert!(text.contains("D_v = 1.2"));
}

#[test]
fn report_writes_all_outputs() {
    let cfg = small(ModelVersion::V2);
    let dir = tempfile::tempdir().unwrap();
    let layout = RunLayout::new(dir.path());
    let summary = cmd_report(&cfg, &layout, true).unwrap();
    assert!(summary.fit.nrmse.is_finite());
    assert_eq!(summary.evaluation.report.first_step, 41);
    assert_eq!(summary.evaluation.report.last_step, 52);

    let eval = layout.eval();
    let nrmse = fs::read_to_string(eval.join("nrmse.csv")).unwrap();
    let mut lines = nrmse.lines();
    assert_eq!(lines.next(), Some("point,x,y,z,field,nrmse,normalized"));
    assert_eq!(nrmse.lines().count(), 1 + 2 * 3 + 1);
    assert!(nrmse.lines().last().unwrap().starts_with("total"));

    let entropy = fs::read_to_string(eval.join("entropy.csv")).unwrap();
    assert_eq!(entropy.lines().count(), 1 + 2 * 12);
    let lyap = fs::read_to_string(eval.join("lyapunov.csv")).unwrap();
    assert!(lyap.lines().any(|l| l.starts_with("all,40,52,")));
    for stem in ["truth_c_000041", "pred_h_000052", "truth_v_000046"] {
        assert!(
            eval.join("planes").join(format!("{stem}.csv")).exists(),
            "{stem}"
        );
        assert!(
            eval.join("planes").join(format!("{stem}.png")).exists(),
            "{stem}"
        );
    }
    let plane = fs::read_to_string(eval.join("planes/truth_c_000041.csv")).unwrap();
    assert_eq!(plane.lines().count(), 8);
    assert_eq!(plane.lines().next().unwrap().split(',').count(), 8);
}

#[test]
fn zero_length_rollout_writes_an_empty_prediction() {
    let mut cfg = small(ModelVersion::V1);
    let dir = tempfile::tempdir().unwrap();
    let layout = RunLayout::new(dir.path());
    cmd_simulate(&cfg, &layout).unwrap();
    cmd_train(&cfg, &layout).unwrap();
    cfg.rollout_steps = 0;
    let m = cmd_predict(&cfg, &layout).unwrap();
    assert!(m.recorded_steps.is_empty());
    assert!(matches!(
        cmd_evaluate(&cfg, &layout, false),
        Err(Error::Config(_))
    ));
}

#[test]
fn training_needs_the_whole_slot() {
    let mut cfg = small(ModelVersion::V1);
    let dir = tempfile::tempdir().unwrap();
    let layout = RunLayout::new(dir.path());
    cmd_simulate(&cfg, &layout).unwrap();
    fs::remove_file(
        layout
            .truth()
            .join(io::snapshot_name(rdesn::FieldKind::V, 17)),
    )
    .unwrap();
    assert!(cmd_train(&cfg, &layout).is_err());

    cfg.esn.warm_up = 40;
    assert!(matches!(cmd_train(&cfg, &layout), Err(Error::Config(_))));
}

#[test]
fn reruns_are_byte_identical() {
    let cfg = small(ModelVersion::V1);
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    cmd_report(&cfg, &RunLayout::new(a.path()), false).unwrap();
    cmd_report(&cfg, &RunLayout::new(b.path()), false).unwrap();
    for name in [
        "nrmse.csv",
        "entropy.csv",
        "lyapunov.csv",
        "planes/pred_v_000052.csv",
    ] {
        let x = fs::read(a.path().join("eval").join(name)).unwrap();
        let y = fs::read(b.path().join("eval").join(name)).unwrap();
        assert_eq!(x, y, "{name}");
    }
    assert_eq!(
        fs::read(a.path().join("config.toml")).unwrap(),
        fs::read(b.path().join("config.toml")).unwrap()
    );
}
