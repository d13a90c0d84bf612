use std::path::Path;
use std::process::{Command, Output};

fn lagmin(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lagmin")).args(args).output().unwrap()
}

fn lagmin_env(args: &[&str], key: &str, val: &str) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lagmin")).args(args).env(key, val).output().unwrap()
}

fn path(dir: &Path, name: &str) -> String {
    dir.join(name).to_string_lossy().into_owned()
}

fn records(p: &str) -> Vec<serde_json::Value> {
    serde_json::from_str(&std::fs::read_to_string(p).unwrap()).unwrap()
}

#[test]
fn generate_writes_grid_vertices() {
    let d = tempfile::tempdir().unwrap();
    let out = path(d.path(), "r3.obj");
    assert_eq!(lagmin(&["generate", "--surface", "r3", "--grid", "20x30", "-o", &out]).status.code(), Some(0));
    let text = std::fs::read_to_string(&out).unwrap();
    assert_eq!(text.lines().filter(|l| l.starts_with("v ")).count(), 600);
    assert!(text.lines().any(|l| l.starts_with("f ")));
    #[cfg(unix)]
    {
        use std::os::unix::fs::PermissionsExt;
        assert_eq!(std::fs::metadata(&out).unwrap().permissions().mode() & 0o777, 0o644);
    }
}

#[test]
fn verify_reports_one_record_per_check() {
    let d = tempfile::tempdir().unwrap();
    let rep = path(d.path(), "rep.json");
    let o = lagmin(&["verify", "--surface", "r4", "--checks", "biharmonic,curvature", "--seed", "3", "--report", &rep]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let r = records(&rep);
    assert_eq!(r.len(), 2);
    assert_eq!(r[0]["check"], "biharmonic");
    assert_eq!(r[1]["check"], "curvature");
    assert!(r.iter().all(|x| x["pass"] == true));
}

#[test]
fn tightened_tolerance_fails_with_exit_1() {
    let d = tempfile::tempdir().unwrap();
    let rep = path(d.path(), "rep.json");
    let o = lagmin(&["verify", "--surface", "r3", "--checks", "gaussmap", "--set", "tol.gaussmap=1e-300", "--report", &rep]);
    assert_eq!(o.status.code(), Some(1));
    let r = records(&rep);
    assert_eq!(r[0]["pass"], false);
    // the default serde_json reader is not exact this far out; check the text
    assert!(std::fs::read_to_string(&rep).unwrap().contains(r#""tolerance":1.0000000000000000e-300"#));
}

#[test]
fn config_file_sets_tolerances() {
    let d = tempfile::tempdir().unwrap();
    let cfg = path(d.path(), "lagmin.conf");
    std::fs::write(&cfg, "# loose\ntol.curvature = 0.5\n").unwrap();
    let rep = path(d.path(), "rep.json");
    let o = lagmin(&["--config", &cfg, "verify", "--surface", "r1", "--checks", "curvature", "--report", &rep]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(records(&rep)[0]["tolerance"].as_f64(), Some(0.5));
    std::fs::write(&cfg, "tol.bogus = 1\n").unwrap();
    assert_eq!(lagmin(&["--config", &cfg, "verify", "--surface", "r1", "--checks", "curvature", "--report", &rep]).status.code(), Some(2));
}

#[test]
fn usage_errors_exit_2() {
    let d = tempfile::tempdir().unwrap();
    let out = path(d.path(), "x.obj");
    for args in [
        vec!["generate", "--surface", "r12", "-o", &out],
        vec!["generate", "--surface", "r1", "--grid", "1x5", "-o", &out],
        vec!["generate", "--surface", "r1", "--range", "1,0,0,1", "-o", &out],
        vec!["verify", "--surface", "r1", "--checks", "nope", "--report", &out],
        // rulings apply only to r1, r2, r3 combinations
        vec!["verify", "--surface", "r4", "--checks", "ruling", "--report", &out],
        vec!["frobnicate"],
    ] {
        assert_eq!(lagmin(&args).status.code(), Some(2), "{args:?}");
    }
    assert!(!Path::new(&out).exists());
}

#[test]
fn bad_thread_count_is_a_usage_error() {
    let d = tempfile::tempdir().unwrap();
    let out = path(d.path(), "x.obj");
    let args = ["generate", "--surface", "r3", "--grid", "8x8", "-o", &out];
    assert_eq!(lagmin_env(&args, "LAGMIN_THREADS", "zero").status.code(), Some(2));
    assert_eq!(lagmin_env(&args, "LAGMIN_THREADS", "2").status.code(), Some(0));
}

#[test]
fn classify_pencil_reports_each_family() {
    let d = tempfile::tempdir().unwrap();
    let input = path(d.path(), "fam.json");
    let rep = path(d.path(), "rep.json");
    std::fs::write(
        &input,
        r#"{"families": [
            [[1,0,0,-1],[1,0,0,-4],[1,0,0,-9]],
            [[1,-1,0,0],[1,-1.25,0,-0.75],[1,-1.5,0,-1.118033988749895],[1,-2,0,-1.7320508075688772]]
        ]}"#,
    )
    .unwrap();
    assert_eq!(lagmin(&["classify-pencil", "--input", &input, "--report", &rep]).status.code(), Some(0));
    let r = records(&rep);
    assert_eq!(r[0]["result"]["tag"], "hyperbolic");
    assert_eq!(r[1]["result"]["tag"], "not-a-pencil");
}

#[test]
fn ruled_and_isotropic_meshes() {
    let d = tempfile::tempdir().unwrap();
    let ruled = path(d.path(), "ruled.obj");
    let o = lagmin(&["ruled", "--A", "0", "--B", "0", "--C", "0", "--D", "0.5", "--grid", "10x10", "--rulings", "4", "-o", &ruled]);
    assert_eq!(o.status.code(), Some(0));
    let text = std::fs::read_to_string(&ruled).unwrap();
    assert_eq!(text.lines().filter(|l| l.starts_with("l ")).count(), 4);
    let iso = path(d.path(), "iso.obj");
    let o = lagmin(&["isotropic", "--surface", "r7", "--grid", "10x10", "-o", &iso]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(std::fs::read_to_string(&iso).unwrap().lines().filter(|l| l.starts_with("v ")).count(), 100);
}
