use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn root() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
}

fn scenium(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_scenium"))
        .args(args)
        .current_dir(cwd)
        .env_remove("SCENIUM_RAY_DENSITY")
        .output()
        .unwrap()
}

fn text(bytes: &[u8]) -> String {
    String::from_utf8_lossy(bytes).into_owned()
}

fn write(dir: &Path, name: &str, src: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, src).unwrap();
    p.display().to_string()
}

fn scenario(name: &str) -> String {
    root().join("scenarios").join(name).display().to_string()
}

#[test]
fn check_accepts_the_facing_program() {
    let dir = tempfile::tempdir().unwrap();
    let f = root().join("tests/corpus/facing.scn").display().to_string();
    let o = scenium(&["check", &f], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", text(&o.stderr));
}

#[test]
fn check_reports_missing_argument_with_caret() {
    let dir = tempfile::tempdir().unwrap();
    let f = write(dir.path(), "bad.scn", "ego = new Ball at\n");
    let o = scenium(&["check", &f], dir.path());
    assert_eq!(o.status.code(), Some(1));
    let err = text(&o.stderr);
    assert!(err.contains("bad.scn:1:") && err.contains('^'), "{err}");
}

#[test]
fn check_reports_conflicting_specifiers() {
    let dir = tempfile::tempdir().unwrap();
    let f = write(dir.path(), "twice.scn", "ego = new Ball at (0, 0, 0), at (1, 0, 0)\n");
    let o = scenium(&["check", &f], dir.path());
    assert_eq!(o.status.code(), Some(1));
    let err = text(&o.stderr);
    assert!(err.contains("position") && err.contains('^'), "{err}");
}

#[test]
fn sampling_is_byte_identical_for_a_seed() {
    let dir = tempfile::tempdir().unwrap();
    let f = scenario("vacuum.scn");
    let a = scenium(&["sample", &f, "--seed", "7", "--out", "a"], dir.path());
    let b = scenium(&["sample", &f, "--seed", "7", "--out", "b"], dir.path());
    assert_eq!(a.status.code(), Some(0), "{}", text(&a.stderr));
    assert_eq!(b.status.code(), Some(0));
    let ja = std::fs::read(dir.path().join("a/scene_7.json")).unwrap();
    let jb = std::fs::read(dir.path().join("b/scene_7.json")).unwrap();
    assert_eq!(ja, jb);
    assert!(text(&a.stdout).contains("seed 7:"));
}

#[test]
fn count_yields_distinct_layouts() {
    let dir = tempfile::tempdir().unwrap();
    let o = scenium(&["sample", &scenario("vacuum.scn"), "--count", "4", "--seed", "10"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", text(&o.stderr));
    let layouts: Vec<serde_json::Value> = (10..14)
        .map(|s| {
            let doc: serde_json::Value =
                serde_json::from_str(&std::fs::read_to_string(dir.path().join(format!("scene_{s}.json"))).unwrap()).unwrap();
            doc["objects"].as_array().unwrap().iter().map(|o| o["position"].clone()).collect()
        })
        .collect();
    for i in 0..4 {
        for j in i + 1..4 {
            assert_ne!(layouts[i], layouts[j]);
        }
    }
    assert_eq!(text(&o.stdout).lines().count(), 4);
}

#[test]
fn obj_output_reloads() {
    let dir = tempfile::tempdir().unwrap();
    let o = scenium(&["sample", &scenario("vacuum.scn"), "--format", "obj", "--seed", "2"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", text(&o.stderr));
    let obj = dir.path().join("scene_2.obj");
    let mesh = scenium::mesh::read_mesh(&obj).unwrap();
    let b = mesh.aabb();
    // The walls bound the room.
    assert!((b.min.x + 2.1).abs() < 1e-9 && (b.max.y - 2.1).abs() < 1e-9 && (b.max.z - 1.2).abs() < 1e-9, "{b:?}");
    assert!(scenium::mesh::load_mesh(&obj).is_ok());
    assert_eq!(std::fs::read_to_string(&obj).unwrap().lines().filter(|l| l.starts_with("o ")).count(), 10);
}

#[test]
fn exhaustion_exits_2_and_keeps_partial_output() {
    let dir = tempfile::tempdir().unwrap();
    let f = write(dir.path(), "half.scn", "ego = new Ball at (Range(-1, 1), 0, 0)\nrequire ego.position.x > 0\n");
    let o = scenium(&["sample", &f, "--count", "8", "--max-rejections", "0"], dir.path());
    assert_eq!(o.status.code(), Some(2), "{}", text(&o.stderr));
    let written = std::fs::read_dir(dir.path()).unwrap().filter(|e| e.as_ref().unwrap().path().extension().is_some_and(|x| x == "json")).count();
    assert!(written > 0 && written < 8, "{written}");
    assert!(text(&o.stderr).contains("gave up"));
}

#[test]
fn missing_file_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let o = scenium(&["check", "nope.scn"], dir.path());
    assert_eq!(o.status.code(), Some(3));
    let o = scenium(&["check-trace", "nope.txt", "always p"], dir.path());
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn ray_density_comes_from_the_environment() {
    let dir = tempfile::tempdir().unwrap();
    let f = root().join("tests/corpus/facing.scn").display().to_string();
    let run = |v: &str| {
        Command::new(env!("CARGO_BIN_EXE_scenium"))
            .args(["sample", &f])
            .current_dir(dir.path())
            .env("SCENIUM_RAY_DENSITY", v)
            .output()
            .unwrap()
    };
    assert_eq!(run("2").status.code(), Some(0));
    let bad = run("lots");
    assert_eq!(bad.status.code(), Some(1));
    assert!(text(&bad.stderr).contains("ray-density"), "{}", text(&bad.stderr));
}

#[test]
fn single_step_simulation() {
    let dir = tempfile::tempdir().unwrap();
    let f = write(
        dir.path(),
        "pair.scn",
        "ego = new Car at (0, 0, 0.75)\ncar = new Car at (10, 0, 0.75), with behavior ConstantVelocity(1, 0, 0)\nrequire always (distance to car > 0)\n",
    );
    let o = scenium(&["simulate", &f, "--steps", "1", "--seed", "4"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", text(&o.stderr));
    let trace = std::fs::read_to_string(dir.path().join("trace_4.jsonl")).unwrap();
    assert_eq!(trace.lines().count(), 2);
    assert!(text(&o.stdout).contains("\t2\tPRESUMABLY_TRUE"), "{}", text(&o.stdout));
    // An open `until` after one step is presumably false, which is not accepted.
    let o = scenium(&["simulate", &scenario("intersection.scn"), "--steps", "1", "--max-rejections", "3"], dir.path());
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn intersection_runs_satisfy_the_requirement() {
    let dir = tempfile::tempdir().unwrap();
    let o = scenium(&["simulate", &scenario("intersection.scn"), "--steps", "60", "--runs", "3"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", text(&o.stderr));
    let summary = std::fs::read_to_string(dir.path().join("summary.tsv")).unwrap();
    assert_eq!(summary, text(&o.stdout));
    let rows: Vec<&str> = summary.lines().skip(1).collect();
    assert_eq!(rows.len(), 3);
    assert!(rows.iter().all(|r| r.ends_with("\tTRUE") || r.ends_with("\tPRESUMABLY_TRUE")), "{summary}");
    for s in 0..3 {
        assert_eq!(std::fs::read_to_string(dir.path().join(format!("trace_{s}.jsonl"))).unwrap().lines().count(), 61);
    }
}

#[test]
fn vacuum_runs_report_robustness_and_mean() {
    let dir = tempfile::tempdir().unwrap();
    let o = scenium(
        &["simulate", &scenario("vacuum.scn"), "--steps", "300", "--runs", "3", "--coverage", "floor", "--horizon", "30"],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(0), "{}", text(&o.stderr));
    let out = text(&o.stdout);
    let lines: Vec<&str> = out.lines().collect();
    assert!(lines[0].ends_with("\trobustness"));
    let values: Vec<f64> = lines[1..4].iter().map(|l| l.rsplit('\t').next().unwrap().parse().unwrap()).collect();
    let mean: f64 = lines[4].strip_prefix("mean robustness\t").unwrap().parse().unwrap();
    assert!((mean - values.iter().sum::<f64>() / 3.0).abs() < 1e-5);
    // Robustness is max coverage minus a third, and coverage lies in [0, 1].
    assert!(values.iter().all(|v| (-1.0 / 3.0 - 1e-6..=2.0 / 3.0 + 1e-6).contains(v)));
}

#[test]
fn check_trace_prints_the_verdict() {
    let dir = tempfile::tempdir().unwrap();
    let t = write(dir.path(), "t.txt", "p=1 q=0\np=1 q=1\n");
    let cases = [
        ("p until q", "TRUE"),
        ("always p", "PRESUMABLY_TRUE"),
        ("eventually not p", "PRESUMABLY_FALSE"),
        ("always q", "FALSE"),
    ];
    for (formula, verdict) in cases {
        let o = scenium(&["check-trace", &t, formula], dir.path());
        assert_eq!(o.status.code(), Some(0), "{}", text(&o.stderr));
        assert_eq!(text(&o.stdout).trim(), verdict, "{formula}");
    }
    let o = scenium(&["check-trace", &t, "always r"], dir.path());
    assert_eq!(o.status.code(), Some(1));
}
