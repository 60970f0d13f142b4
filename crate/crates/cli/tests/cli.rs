use std::path::Path;
use std::process::{Command, Output};

use bimrecon::io::load_bim_json;
use bimrecon::metrics::{evaluate, EvalReport};
use tempfile::TempDir;

fn bimrecon(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bimrecon"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn synth_room(dir: &Path) {
    let out = bimrecon(&["synth", "--preset", "room", "-o", s(dir)]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn reconstruct_room_writes_model_ifc_and_manifest() {
    let tmp = TempDir::new().unwrap();
    let scene = tmp.path().join("scene");
    let run = tmp.path().join("run");
    synth_room(&scene);
    let out = bimrecon(&["reconstruct", s(&scene.join("cloud.ply")), "-o", s(&run)]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    for f in ["model.json", "model.ifc", "manifest.json"] {
        assert!(run.join(f).is_file(), "{f} missing");
    }
    let manifest: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(run.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["counts"]["walls"], 4);
    assert_eq!(manifest["seed"], 42);
    assert_eq!(manifest["wall_seeding"], "histogram");
    assert_eq!(manifest["topology_refinement"], true);
    let storeys = manifest["timings"]["stages"]["storeys"].as_array().unwrap();
    for st in storeys {
        for (_, v) in st["timings"].as_object().unwrap() {
            assert!(v.as_f64().unwrap() >= 0.0);
        }
    }
    let ifc = std::fs::read_to_string(run.join("model.ifc")).unwrap();
    assert!(ifc.starts_with("ISO-10303-21;"));
    let leftovers: Vec<_> = std::fs::read_dir(&run)
        .unwrap()
        .filter_map(|e| e.ok())
        .filter(|e| e.file_name().to_string_lossy().starts_with('.'))
        .collect();
    assert!(leftovers.is_empty());
}

#[test]
fn missing_input_exits_with_io_code_and_writes_nothing() {
    let tmp = TempDir::new().unwrap();
    let run = tmp.path().join("run");
    let out = bimrecon(&["reconstruct", s(&tmp.path().join("absent.ply")), "-o", s(&run)]);
    assert_eq!(out.status.code(), Some(3));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("[read-input]"), "{err}");
    assert!(!run.exists());
}

#[test]
fn malformed_cloud_exits_with_parse_code() {
    let tmp = TempDir::new().unwrap();
    let bad = tmp.path().join("bad.xyz");
    std::fs::write(&bad, "1 2 3 0\n1 2 oops 0\n").unwrap();
    let out = bimrecon(&["reconstruct", s(&bad), "-o", s(&tmp.path().join("run"))]);
    assert_eq!(out.status.code(), Some(4));
}

#[test]
fn degenerate_cloud_reports_reconstruct_stage() {
    let tmp = TempDir::new().unwrap();
    let flat = tmp.path().join("flat.xyz");
    std::fs::write(&flat, "0 0 0 0\n1 0 0 0\n0 1 0 0\n").unwrap();
    let run = tmp.path().join("run");
    let out = bimrecon(&["reconstruct", s(&flat), "-o", s(&run)]);
    assert_eq!(out.status.code(), Some(8));
    assert!(String::from_utf8_lossy(&out.stderr).contains("[reconstruct]"));
    assert!(!run.exists());
}

#[test]
fn baseline_flag_is_recorded() {
    let tmp = TempDir::new().unwrap();
    let scene = tmp.path().join("scene");
    let run = tmp.path().join("run");
    synth_room(&scene);
    let out = bimrecon(&[
        "reconstruct",
        s(&scene.join("cloud.ply")),
        "-o",
        s(&run),
        "--baseline",
        "--seed",
        "7",
        "--threads",
        "1",
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let manifest: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(run.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["baseline"], true);
    assert_eq!(manifest["wall_seeding"], "uniform");
    assert_eq!(manifest["topology_refinement"], false);
    assert_eq!(manifest["seed"], 7);
    let model = load_bim_json(&run.join("model.json")).unwrap();
    let cfg = model.provenance.config.unwrap();
    assert!(!cfg.topology_refinement);
}

#[test]
fn reconstruction_is_deterministic_across_thread_counts() {
    let tmp = TempDir::new().unwrap();
    let scene = tmp.path().join("scene");
    let out = bimrecon(&["synth", "--preset", "benchmark", "-o", s(&scene)]);
    assert!(out.status.success());
    let mut models = Vec::new();
    for (i, threads) in ["1", "4"].iter().enumerate() {
        let run = tmp.path().join(format!("run{i}"));
        let out = bimrecon(&["reconstruct", s(&scene.join("cloud.ply")), "-o", s(&run), "--threads", threads]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        models.push((
            std::fs::read(run.join("model.json")).unwrap(),
            std::fs::read(run.join("model.ifc")).unwrap(),
        ));
    }
    assert_eq!(models[0], models[1]);
}

#[test]
fn evaluate_matches_library_and_defaults_to_five_centimetres() {
    let tmp = TempDir::new().unwrap();
    let scene = tmp.path().join("scene");
    let run = tmp.path().join("run");
    synth_room(&scene);
    assert!(bimrecon(&["reconstruct", s(&scene.join("cloud.ply")), "-o", s(&run)]).status.success());
    let pred_path = run.join("model.json");
    let gt_path = scene.join("gt.json");
    let report_path = tmp.path().join("report.json");
    let out = bimrecon(&["evaluate", s(&pred_path), s(&gt_path), "-o", s(&report_path)]);
    assert!(out.status.success());
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("wall"));
    let from_cli: EvalReport = serde_json::from_str(&std::fs::read_to_string(&report_path).unwrap()).unwrap();
    let pred = load_bim_json(&pred_path).unwrap();
    let gt = load_bim_json(&gt_path).unwrap();
    let direct = evaluate(&pred, &gt, 0.05);
    assert_eq!(from_cli, direct);
    assert_eq!(from_cli.voxel_size, 0.05);
}

#[test]
fn evaluate_model_against_itself_is_perfect() {
    let tmp = TempDir::new().unwrap();
    synth_room(tmp.path());
    let gt = tmp.path().join("gt.json");
    let out = bimrecon(&["evaluate", s(&gt), s(&gt), "--format", "json"]);
    assert!(out.status.success());
    let report: EvalReport = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report.mean_iou_3d, 1.0);
    assert_eq!(report.mean_viou, 1.0);
}

#[test]
fn evaluate_missing_model_fails_with_io_code() {
    let tmp = TempDir::new().unwrap();
    let a = tmp.path().join("a.json");
    let out = bimrecon(&["evaluate", s(&a), s(&a)]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn synth_is_byte_identical_across_runs() {
    let tmp = TempDir::new().unwrap();
    let spec = tmp.path().join("scene.toml");
    std::fs::write(
        &spec,
        r#"
seed = 11
noise_sigma = 0.01

[[walls]]
start = [0.0, 0.0]
end = [5.0, 0.0]

[[walls]]
start = [5.0, 0.0]
end = [5.0, 4.0]

[[doors]]
wall = 0
offset = 2.0
"#,
    )
    .unwrap();
    let mut bytes = Vec::new();
    for i in 0..2 {
        let dir = tmp.path().join(format!("out{i}"));
        let out = bimrecon(&["synth", s(&spec), "-o", s(&dir), "--format", "xyz"]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        assert!(dir.join("cloud.xyz").is_file());
        assert!(dir.join("gt.json").is_file());
        bytes.push((std::fs::read(dir.join("cloud.xyz")).unwrap(), std::fs::read(dir.join("gt.json")).unwrap()));
    }
    assert_eq!(bytes[0], bytes[1]);
}

#[test]
fn invalid_spec_exits_with_spec_code() {
    let tmp = TempDir::new().unwrap();
    let spec = tmp.path().join("bad.toml");
    std::fs::write(&spec, "[[walls]]\nstart = [0.0, 0.0]\nend = [0.0, 0.0]\n").unwrap();
    let dir = tmp.path().join("out");
    let out = bimrecon(&["synth", s(&spec), "-o", s(&dir)]);
    assert_eq!(out.status.code(), Some(6));
    assert!(!dir.exists());
}

#[test]
fn invalid_config_exits_with_config_code() {
    let tmp = TempDir::new().unwrap();
    synth_room(tmp.path());
    let cfg = tmp.path().join("cfg.toml");
    std::fs::write(&cfg, "voxel_size_m = -1.0\n").unwrap();
    let out = bimrecon(&["reconstruct", s(&tmp.path().join("cloud.ply")), "--config", s(&cfg), "-o", s(&tmp.path().join("run"))]);
    assert_eq!(out.status.code(), Some(5));
    assert!(String::from_utf8_lossy(&out.stderr).contains("[config]"));
}

#[test]
fn info_summarises_cloud_and_model() {
    let tmp = TempDir::new().unwrap();
    synth_room(tmp.path());
    let out = bimrecon(&["info", s(&tmp.path().join("cloud.ply")), "--format", "json"]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(v["points"].as_u64().unwrap() > 1000);
    let out = bimrecon(&["info", s(&tmp.path().join("gt.json")), "--format", "json"]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["counts"]["walls"], 4);
}

#[test]
fn bad_arguments_exit_with_usage_code() {
    let out = bimrecon(&["reconstruct"]);
    assert_eq!(out.status.code(), Some(2));
}
