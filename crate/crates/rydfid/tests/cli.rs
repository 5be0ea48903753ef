use std::path::Path;
use std::process::{Command, Output};

fn rydfid(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rydfid")).args(args).current_dir(dir).output().expect("spawn rydfid")
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.display().to_string()
}

const SCAN: &str = r#"
[trap]
f_parallel = 20e3

[[scan]]
variable = "trap.temperature"
start = 0.0
stop = 4e-6
points = 5
"#;

#[test]
fn estimate_output_is_deterministic_and_stamped() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "scan.toml", SCAN);
    let a = rydfid(&["estimate", "--config", &cfg, "--out", "a", "--jobs", "2"], dir.path());
    let b = rydfid(&["estimate", "--config", &cfg, "--out", "b", "--jobs", "1"], dir.path());
    assert!(a.status.success(), "{}", String::from_utf8_lossy(&a.stderr));
    assert!(b.status.success());
    let ta = std::fs::read_to_string(dir.path().join("a/estimate.csv")).unwrap();
    let tb = std::fs::read_to_string(dir.path().join("b/estimate.csv")).unwrap();
    assert_eq!(ta, tb);
    let hash = ta.lines().find_map(|l| l.strip_prefix("# config_sha256: ")).unwrap();
    assert_eq!(hash.len(), 64);
    let data: Vec<&str> = ta.lines().filter(|l| !l.starts_with('#')).collect();
    assert!(data[0].starts_with("trap.temperature,t_eff_parallel_K"));
    assert_eq!(data.len(), 6);
}

#[test]
fn config_errors_exit_with_2() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "bad.toml", "[trap]\nf_parallel = -5\n");
    let out = rydfid(&["estimate", "--config", &cfg], dir.path());
    assert_eq!(out.status.code(), Some(2));
    let out = rydfid(&["simulate", "--config", "missing.toml"], dir.path());
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn unreachable_phase_target_exits_with_4() {
    let dir = tempfile::tempdir().unwrap();
    let text = "[gate]\nkind = \"reference\"\nindex = 1\n\n[search]\nratio_bounds = [-0.6, -0.59]\ndt_bounds = [0.2, 0.2]\naccept = 1e-6\n";
    let cfg = write(dir.path(), "search.toml", text);
    let out = rydfid(&["gate-search", "--config", &cfg, "--out", "o"], dir.path());
    assert_eq!(out.status.code(), Some(4), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn reproduce_writes_table_script_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    let out = rydfid(&["reproduce", "fig7", "--out", "figs"], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    for ext in ["csv", "gp", "json"] {
        assert!(dir.path().join(format!("figs/fig7.{ext}")).exists(), "{ext}");
    }
    let gp = std::fs::read_to_string(dir.path().join("figs/fig7.gp")).unwrap();
    assert!(gp.contains("'fig7.csv'"));
    let bad = rydfid(&["reproduce", "fig9"], dir.path());
    assert_eq!(bad.status.code(), Some(2));
}
