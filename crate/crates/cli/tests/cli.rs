use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..").canonicalize().unwrap()
}

fn rtssos(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rtssos")).args(args).current_dir(root()).env_remove("RTSSOS_SDP_SOLVER").output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn golden(name: &str) -> String {
    std::fs::read_to_string(Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden").join(name)).unwrap()
}

/// A solver command for the relaxations, if one is available here.
fn solver() -> Option<String> {
    if let Ok(cmd) = std::env::var("RTSSOS_SDP_SOLVER") {
        return Some(cmd);
    }
    let ok = Command::new("python3").args(["-c", "import clarabel, scipy"]).status().is_ok_and(|s| s.success());
    ok.then(|| "python3 tools/sdpa_clarabel.py".to_string())
}

#[test]
fn six_block_tssos() {
    let o = rtssos(&["relax", "--poly", "data/sextic_six_blocks.txt", "--mode", "tssos", "--k", "1"]);
    assert!(o.status.success());
    assert!(stdout(&o).starts_with("mb=8, blocks=6\nsizes=8,5,4,1,1,1\n"), "{}", stdout(&o));
}

#[test]
fn refined_sextic_partition() {
    let o = rtssos(&["relax", "--poly", "data/sextic_one_block.txt", "--mode", "refine", "--k", "1", "--eps", "0.2", "--tie-break", "most-merges"]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("sizes=11,4,4,1\n"));
    let same = rtssos(&["relax", "--poly", "data/sextic_one_block.txt", "--mode", "refine", "--tau", "0.2", "--tie-break", "most-merges"]);
    assert_eq!(stdout(&o), stdout(&same));
}

#[test]
fn partition_golden_files() {
    let dir = tempfile::tempdir().unwrap();
    let cases: [(&str, &[&str], &str); 3] = [
        ("data/sextic_six_blocks.txt", &["--mode", "tssos"], "partition_sextic_six_blocks_t1.json"),
        ("data/sextic_one_block.txt", &["--mode", "tssos"], "partition_sextic_one_block_t1.json"),
        ("data/sextic_one_block.txt", &["--mode", "refine", "--eps", "0.2", "--tie-break", "most-merges"], "partition_sextic_one_block_eps0.2.json"),
    ];
    for (poly, extra, name) in cases {
        let out = dir.path().join(name);
        let mut args = vec!["relax", "--poly", poly];
        args.extend_from_slice(extra);
        let out_str = out.display().to_string();
        args.extend_from_slice(&["--partition-out", &out_str]);
        assert!(rtssos(&args).status.success());
        assert_eq!(std::fs::read_to_string(&out).unwrap(), golden(name), "{name}");
    }
    let v: Value = serde_json::from_str(&golden("partition_sextic_one_block_t1.json")).unwrap();
    assert_eq!(v["localizers"][0]["sizes"], serde_json::json!([20]));
}

#[test]
fn trace_golden_file() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("trace.json");
    let o = rtssos(&[
        "trace",
        "--poly",
        "data/sextic_one_block.txt",
        "--eps",
        "0.2",
        "--tie-break",
        "most-merges",
        "-o",
        &out.display().to_string(),
    ]);
    assert!(o.status.success());
    let text = std::fs::read_to_string(&out).unwrap();
    assert_eq!(text, golden("trace_sextic_one_block_eps0.2.json"));
    let v: Value = serde_json::from_str(&text).unwrap();
    let step = v["steps"].as_array().unwrap().iter().find(|s| s["nu"] == "101").unwrap();
    let d = &step["matrices"]["d"];
    assert_eq!(d[1][3], 1);
    assert_eq!(d[2][3], 0);
    assert_eq!(step["ip"]["omega"], 11);
    assert_eq!(v["final_width"], 11);
}

#[test]
fn trace_extremes() {
    let o = rtssos(&["trace", "--poly", "data/sextic_one_block.txt", "--eps", "0.99"]);
    assert!(o.status.success());
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["final_width"], 20);
    assert_eq!(v["final_blocks"].as_array().unwrap().len(), 1);

    let o = rtssos(&["trace", "--expr", "x1^4 + x2^4 + x1^2*x2^2 + 1", "--eps", "0.01"]);
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["ips_solved"], 0);
    assert!(v["steps"].as_array().unwrap().is_empty());
}

#[test]
fn dense_square_bound() {
    let Some(cmd) = solver() else { return };
    let o = rtssos(&["relax", "--expr", "x1^2", "--n", "1", "--mode", "dense", "--solver", &cmd]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let theta: f64 = stdout(&o).lines().find_map(|l| l.strip_prefix("theta=")).unwrap().parse().unwrap();
    assert!(theta.abs() < 1e-6, "{theta}");
}

#[test]
fn artifacts_in_out_dir() {
    let Some(cmd) = solver() else { return };
    let dir = tempfile::tempdir().unwrap();
    let o = rtssos(&[
        "relax",
        "--poly",
        "data/sextic_six_blocks.txt",
        "--solver",
        &cmd,
        "--out-dir",
        &dir.path().display().to_string(),
    ]);
    assert!(o.status.success());
    let report: Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("bound.json")).unwrap()).unwrap();
    let theta = report["theta"].as_f64().unwrap();
    assert!((theta + 43.8281).abs() <= 1e-3 * 43.8281, "{theta}");
    let sdpa = std::fs::read_to_string(dir.path().join("relaxation.dat-s")).unwrap();
    assert_eq!(sdpa.lines().nth(3), Some("8 5 4 1 1 1"));
    assert!(dir.path().join("partition.json").exists());
}

#[test]
fn constrained_relaxation() {
    let o = rtssos(&["relax", "--expr", "x1^4 + x2^4 - x1*x2", "--ball", "2", "--d-hat", "2", "--mode", "refine", "--tau", "0.3,0.5"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).starts_with("mb=("));
    let o = rtssos(&["relax", "--expr", "x1^4 + x2^4 - x1*x2", "--constraint", "1 - x1^2 >= 0", "--constraint", "x2 <= 1", "--d-hat", "2", "--mode", "dense"]);
    assert!(o.status.success());
    assert!(stdout(&o).starts_with("mb=(6,3,3), blocks=3"), "{}", stdout(&o));
}

#[test]
fn exit_codes() {
    assert_eq!(rtssos(&["relax", "--expr", "x1^2 +* 3"]).status.code(), Some(2));
    assert_eq!(rtssos(&["relax", "--expr", "x1^2", "--mode", "refine", "--eps", "1.5"]).status.code(), Some(2));
    assert_eq!(rtssos(&["relax", "--expr", "x1^3"]).status.code(), Some(3));
    assert_eq!(rtssos(&["relax", "--expr", "x1^4 - x1", "--ball", "1", "--d-hat", "1"]).status.code(), Some(3));
    assert_eq!(rtssos(&["relax", "--expr", "x1^2 + 1", "--solver", "/nonexistent/solver"]).status.code(), Some(4));
    let dir = tempfile::tempdir().unwrap();
    let script = dir.path().join("slow.sh");
    std::fs::write(&script, "#!/bin/sh\nsleep 5\n").unwrap();
    std::fs::set_permissions(&script, std::os::unix::fs::PermissionsExt::from_mode(0o755)).unwrap();
    let o = rtssos(&["relax", "--expr", "x1^2 + 1", "--solver", &script.display().to_string(), "--timeout", "0.2"]);
    assert_eq!(o.status.code(), Some(5));
}

#[test]
fn bench_table_structure() {
    let o = rtssos(&["bench", "configs/table2.toml"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("seed,method,mb,bound,time_total,time_ip,status"));
    let rows: Vec<Vec<&str>> = lines.map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 24);
    for (i, name) in ["f1", "f2", "f3"].iter().enumerate() {
        let group = &rows[8 * i..8 * i + 8];
        assert!(group.iter().all(|r| r[0] == *name && r[6] == "no-solver" && r[3].is_empty()));
        assert_eq!(group.iter().map(|r| r[1]).collect::<Vec<_>>(), ["t1", "0.1", "0.2", "0.3", "0.4", "0.5", "0.6", "0.7"]);
    }
    assert_eq!([rows[0][2], rows[8][2], rows[16][2]], ["340", "248", "184"]);
}

#[test]
fn bench_without_seeds_is_header_only() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("empty.toml");
    std::fs::write(&cfg, "methods = [\"t1\"]\nseeds = 0\n[generator]\nfamily = \"I\"\nn = 3\ndegree = 4\ns = 6\n").unwrap();
    let out = dir.path().join("rows.csv");
    let o = rtssos(&["bench", &cfg.display().to_string(), "-o", &out.display().to_string()]);
    assert!(o.status.success());
    assert_eq!(std::fs::read_to_string(out).unwrap(), "seed,method,mb,bound,time_total,time_ip,status\n");
}

#[test]
fn bench_with_solver() {
    let Some(cmd) = solver() else { return };
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("small.toml");
    std::fs::write(&cfg, "methods = [\"dense\", \"t1\", \"0.5\"]\nseeds = 2\n[generator]\nfamily = \"I\"\nn = 3\ndegree = 4\ns = 8\n").unwrap();
    let o = rtssos(&["bench", &cfg.display().to_string(), "--solver", &cmd, "--reference", "dense"]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert_eq!(text.lines().filter(|l| l.ends_with(",optimal")).count(), 6, "{text}");
    assert!(String::from_utf8_lossy(&o.stderr).contains("dense tol=0.001 solved=1.000"));
}
