use std::path::Path;
use std::process::{Command, Output};

fn mvsk() -> Command {
    Command::new(env!("CARGO_BIN_EXE_mvsk"))
}

fn run_ok(cmd: &mut Command) -> Output {
    let out = cmd.output().expect("spawn mvsk");
    assert!(
        out.status.success(),
        "command failed: {}\nstdout: {}\nstderr: {}",
        format!("{cmd:?}"),
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn status_code(cmd: &mut Command) -> i32 {
    cmd.output().expect("spawn mvsk").status.code().expect("exit code")
}

fn write(path: &Path, text: &str) {
    std::fs::write(path, text).unwrap();
}

fn gen_config(out: &Path) -> String {
    format!(
        "# smoke dataset\n\
         categories = box-table, open-cup, superellipsoid\n\
         instances_per_category = 2\n\
         views_per_instance = 2\n\
         seed = 11\n\
         resolution = 32\n\
         rig_views = 6\n\
         grid_dim = 16\n\
         out = {}\n",
        out.display()
    )
}

const CUBE_OBJ: &str = "v -0.5 -0.5 -0.5\nv 0.5 -0.5 -0.5\nv 0.5 0.5 -0.5\nv -0.5 0.5 -0.5\n\
v -0.5 -0.5 0.5\nv 0.5 -0.5 0.5\nv 0.5 0.5 0.5\nv -0.5 0.5 0.5\n\
f 1 3 2\nf 1 4 3\nf 5 6 7\nf 5 7 8\nf 1 2 6\nf 1 6 5\n\
f 2 3 7\nf 2 7 6\nf 3 4 8\nf 3 8 7\nf 4 1 5\nf 4 5 8\n";

#[test]
fn pipeline_gen_split_run_export() {
    let tmp = tempfile::tempdir().unwrap();
    let data = tmp.path().join("data");
    let cfg = tmp.path().join("gen.cfg");
    write(&cfg, &gen_config(&data));
    run_ok(mvsk().args(["dataset", "gen", "--config"]).arg(&cfg));
    assert!(data.join("dataset.json").is_file());
    assert_eq!(std::fs::read_dir(data.join("examples")).unwrap().count(), 12);

    let splits = data.join("splits.json");
    run_ok(
        mvsk()
            .args(["dataset", "split", "--data"])
            .arg(&data)
            .args(["--view-fraction", "0.5", "--instance-fraction", "0.5"]),
    );
    assert!(splits.is_file());

    let records = tmp.path().join("records.jsonl");
    let summary = tmp.path().join("summary.csv");
    run_ok(
        mvsk()
            .args(["experiment", "run", "--data"])
            .arg(&data)
            .arg("--splits")
            .arg(&splits)
            .arg("--records")
            .arg(&records)
            .arg("--summary")
            .arg(&summary)
            .args(["--frames", "viewer"])
            .args(["--representations", "multi-surface"])
            .args(["--metrics", "voxel_iou,silhouette_iou"]),
    );
    let records_text = std::fs::read_to_string(&records).unwrap();
    assert_eq!(records_text.lines().count(), 10);
    let summary_text = std::fs::read_to_string(&summary).unwrap();
    let mut lines = summary_text.lines();
    assert_eq!(lines.next(), Some("split,frame,representation,metric,mean"));
    assert_eq!(lines.count(), 6);

    let first_id = records_text
        .lines()
        .next()
        .and_then(|l| serde_json::from_str::<serde_json::Value>(l).ok())
        .and_then(|v| v.get("example_id").and_then(|s| s.as_str().map(str::to_string)))
        .expect("example id in first record");
    let export_dir = tmp.path().join("export");
    run_ok(
        mvsk()
            .arg("export")
            .arg("--data")
            .arg(&data)
            .arg("--splits")
            .arg(&splits)
            .args(["--example", &first_id])
            .arg("--out")
            .arg(&export_dir),
    );
    for name in ["input_depth.msdi", "input_sil.pgm", "fused_cloud.ply", "recon.obj"] {
        assert!(export_dir.join(name).is_file(), "missing {name}");
    }
    assert!(export_dir.join("branches").is_dir());
}

#[test]
fn render_fuse_voxelize_roundtrip() {
    let tmp = tempfile::tempdir().unwrap();
    let mesh = tmp.path().join("cube.obj");
    write(&mesh, CUBE_OBJ);

    let render_dir = tmp.path().join("render");
    run_ok(
        mvsk()
            .arg("render")
            .arg("--mesh")
            .arg(&mesh)
            .args(["--views", "6", "--dir", "0.3,-0.5,0.8", "--res", "48"])
            .arg("--out")
            .arg(&render_dir),
    );
    assert!(render_dir.join("rig.json").is_file());
    let images = std::fs::read_dir(&render_dir)
        .unwrap()
        .filter(|e| e.as_ref().unwrap().file_name() != "rig.json")
        .count();
    assert_eq!(images, 3 * 3);

    let fused = tmp.path().join("fused.ply");
    run_ok(
        mvsk()
            .arg("fuse")
            .arg("--in")
            .arg(&render_dir)
            .args(["--method", "tsdf", "--grid", "24"])
            .arg("--out")
            .arg(&fused),
    );
    let header = std::fs::read(&fused).unwrap();
    assert!(header.starts_with(b"ply"));

    let cloud = tmp.path().join("cloud.ply");
    run_ok(
        mvsk()
            .arg("fuse")
            .arg("--in")
            .arg(&render_dir)
            .args(["--method", "cloud"])
            .arg("--out")
            .arg(&cloud),
    );
    assert!(std::fs::read(&cloud).unwrap().starts_with(b"ply"));

    let grid = tmp.path().join("cube.msvx");
    run_ok(
        mvsk()
            .arg("voxelize")
            .arg("--mesh")
            .arg(&mesh)
            .args(["--grid", "16", "--frame", "object"])
            .arg("--out")
            .arg(&grid),
    );
    assert!(std::fs::read(&grid).unwrap().starts_with(b"MSVX"));
}

#[test]
fn exit_codes_distinguish_config_and_geometry() {
    let tmp = tempfile::tempdir().unwrap();
    let bad_cfg = tmp.path().join("bad.cfg");
    write(&bad_cfg, "bogus_key = 1\n");
    assert_eq!(
        status_code(mvsk().args(["dataset", "gen", "--config"]).arg(&bad_cfg)),
        2
    );

    // Required settings missing entirely.
    assert_eq!(status_code(mvsk().args(["experiment", "run"])), 2);

    // Unknown fuse method.
    assert_eq!(
        status_code(
            mvsk()
                .arg("fuse")
                .arg("--in")
                .arg(tmp.path())
                .args(["--method", "bogus"])
                .arg("--out")
                .arg(tmp.path().join("x.ply"))
        ),
        2
    );

    // A faceless mesh is a geometry failure, not a config one.
    let empty = tmp.path().join("empty.obj");
    write(&empty, "v 0 0 0\nv 1 0 0\nv 0 1 0\n");
    assert_eq!(
        status_code(
            mvsk()
                .arg("voxelize")
                .arg("--mesh")
                .arg(&empty)
                .args(["--grid", "16", "--frame", "object"])
                .arg("--out")
                .arg(tmp.path().join("e.msvx"))
        ),
        3
    );
}

#[test]
fn flags_override_config_values() {
    let tmp = tempfile::tempdir().unwrap();
    let data = tmp.path().join("data");
    let cfg = tmp.path().join("gen.cfg");
    write(&cfg, &gen_config(&data));
    run_ok(
        mvsk()
            .args(["dataset", "gen", "--config"])
            .arg(&cfg)
            .args(["--resolution", "16", "--views-per-instance", "1"]),
    );
    let index: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(data.join("dataset.json")).unwrap()).unwrap();
    assert_eq!(index["resolution"], 16);
    assert_eq!(index["views_per_instance"], 1);
    assert_eq!(index["seed"], 11);
}
