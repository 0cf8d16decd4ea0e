use std::path::Path;
use std::process::{Command, Output};

fn terp(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_terp")).args(args).current_dir(dir).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn simulate_cluster_evaluate_plot() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let o = terp(&["simulate", "--model", "6", "--sizes", "10,10", "--seed", "3", "--out", "sim"], d);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(d.join("sim/data.csv").exists() && d.join("sim/truth.csv").exists());

    let o = terp(
        &["cluster", "sim/data.csv", "--labels", "sim/truth.csv", "--k", "2", "--m-set", "10,50", "--out", "run"],
        d,
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    assert!(text.contains("rand index"), "{text}");
    assert!(d.join("run/labels_001.csv").exists());

    let o = terp(&["evaluate", "sim/truth.csv", "sim/truth.csv"], d);
    assert_eq!(stdout(&o).trim(), "1.000000");

    let o = terp(&["plot", "sim/data.csv", "--labels", "run/labels_001.csv", "--out", "c.svg"], d);
    assert!(o.status.success());
    assert!(std::fs::read_to_string(d.join("c.svg")).unwrap().starts_with("<svg"));
}

#[test]
fn fragmented_simulation_clusters_from_long_csv() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let o = terp(&["simulate", "--model", "8", "--sizes", "6,6,6", "--regime", "fragmented", "--out", "f"], d);
    assert!(o.status.success());
    let o = terp(&["cluster", "f/data.csv", "--regime", "fragmented", "--k-sweep", "2..3", "--m-set", "10"], d);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).starts_with("K "));
}

#[test]
fn bench_from_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    std::fs::write(
        d.join("bench.cfg"),
        "# small run\nmodel = 1\nsizes = 8,8\nm_set = 10\nreplicates = 2\nseed = 4\nout = res\n",
    )
    .unwrap();
    let o = terp(&["bench", "--config", "bench.cfg"], d);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let results = std::fs::read_to_string(d.join("res/results.csv")).unwrap();
    assert_eq!(results.lines().count(), 3);
    assert!(results.starts_with("replicate,l_star,m_star,s_star,final_cost,rand_index,wall_seconds"));
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    // configuration errors
    assert_eq!(terp(&["bench", "--model", "11", "--reps", "1"], d).status.code(), Some(2));
    std::fs::write(d.join("tiny.csv"), "0,0.5,1\n1,2,3\n4,5,6\n7,8,9\n").unwrap();
    assert_eq!(terp(&["cluster", "tiny.csv", "--k", "5"], d).status.code(), Some(2));
    // unreadable or malformed data
    assert_eq!(terp(&["cluster", "missing.csv", "--k", "2"], d).status.code(), Some(3));
    std::fs::write(d.join("bad.csv"), "0,1\n1,x\n").unwrap();
    assert_eq!(terp(&["cluster", "bad.csv", "--k", "2"], d).status.code(), Some(3));
    // identical curves leave no dispersion to cluster
    std::fs::write(d.join("flat.csv"), "0,0.5,1\n1,1,1\n1,1,1\n1,1,1\n1,1,1\n").unwrap();
    assert_eq!(terp(&["cluster", "flat.csv", "--k", "2", "--m-set", "10"], d).status.code(), Some(4));
}
