use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_diffattack"))
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("diffattack-cli-{}-{name}", std::process::id()));
    let _ = fs::remove_dir_all(&dir);
    fs::create_dir_all(&dir).unwrap();
    dir
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn generate_certify_attack_verify() {
    let dir = scratch("pipeline");
    let o = run(&["generate", "ba", "--n", "60", "--attach", "3", "--seed", "5", "--target-percentile", "90", "--out", s(&dir)]);
    assert!(o.status.success(), "{o:?}");
    let graph = dir.join("graph.edgelist");
    let target = dir.join("target.txt");
    assert!(fs::read_to_string(&graph).unwrap().lines().count() > 100);

    let o = run(&["certify", "--graph", s(&graph), "--target", s(&target)]);
    assert!(o.status.success());
    let out = stdout(&o);
    assert!(out.starts_with("epsilonMin,applicable,tau,certificate,impactEstimate\n"));

    let adir = dir.join("attack");
    let o = run(&["attack", "--graph", s(&graph), "--target", s(&target), "--gamma", "0.3", "--out", s(&adir)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let summary = stdout(&o);
    let eps: f64 = summary.lines().nth(1).unwrap().split(',').next().unwrap().parse().unwrap();
    let modified = adir.join("modified.edgelist");
    assert!(modified.exists() && adir.join("trace.csv").exists());

    let o = run(&["verify", "--graph", s(&graph), "--modified", s(&modified), "--epsilon", &eps.to_string()]);
    assert!(o.status.success());
    let csv = stdout(&o);
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("name,measured,bound,holds"));
    for line in lines {
        let name = line.split(',').next().unwrap();
        if name != "triangles" {
            assert!(line.ends_with(",true"), "{line}");
        }
    }

    for kind in ["deg", "gel"] {
        let o = run(&["baseline", "--graph", s(&graph), "--target", s(&target), "--kind", kind, "--gamma", "0.3"]);
        assert!(o.status.success());
    }

    let o = run(&["simulate", "--graph", s(&graph), "--target", s(&target), "--trials", "100", "--seed", "2"]);
    assert!(o.status.success());
    let again = run(&["simulate", "--graph", s(&graph), "--target", s(&target), "--trials", "100", "--seed", "2"]);
    assert_eq!(o.stdout, again.stdout);
}

fn strip_last_column(csv: &str) -> String {
    csv.lines().map(|l| l.rsplit_once(',').unwrap().0.to_string()).collect::<Vec<_>>().join("\n")
}

#[test]
fn experiment_is_deterministic_across_thread_counts() {
    let dir = scratch("experiment");
    let cfg = dir.join("run.conf");
    fs::write(
        &cfg,
        "# small sweep\ngenerator = ba\nn = 50\nattach = 3\ngammas = 0, 0.2, 0.4\nbaselines = deg, gel\n\
         trials = 200\nwalks = true\nseed = 3\n",
    )
    .unwrap();
    let mut outputs = Vec::new();
    for threads in ["1", "8"] {
        let out = dir.join(format!("t{threads}"));
        let o = run(&["experiment", "--config", s(&cfg), "--threads", threads, "--out", s(&out)]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        let results = fs::read_to_string(out.join("results.csv")).unwrap();
        assert!(!results.contains('\r'));
        assert_eq!(results.lines().count(), 1 + 9);
        outputs.push((strip_last_column(&results), fs::read_to_string(out.join("walks.csv")).unwrap()));
    }
    assert_eq!(outputs[0], outputs[1]);

    // --seed overrides the configuration.
    let o = run(&["experiment", "--config", s(&cfg), "--seed", "4"]);
    assert!(o.status.success());
    assert_ne!(strip_last_column(&stdout(&o)), outputs[0].0);
}

#[test]
fn input_errors_exit_with_one() {
    let dir = scratch("errors");
    let bad = dir.join("bad.edgelist");
    fs::write(&bad, "0 1\n1 x\n").unwrap();
    let target = dir.join("t.txt");
    fs::write(&target, "0\n").unwrap();
    let o = run(&["simulate", "--graph", s(&bad), "--target", s(&target)]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 2"));

    let cfg = dir.join("bad.conf");
    fs::write(&cfg, "generator = ba\nbeta = lots\n").unwrap();
    let o = run(&["experiment", "--config", s(&cfg)]);
    assert_eq!(o.status.code(), Some(1));
    let err = String::from_utf8_lossy(&o.stderr).to_string();
    assert!(err.contains("bad.conf") && err.contains("beta"), "{err}");

    assert_eq!(run(&["experiment"]).status.code(), Some(1));
    assert_eq!(run(&["no-such-command"]).status.code(), Some(1));
    assert_eq!(run(&["--help"]).status.code(), Some(0));
}

#[test]
fn numeric_failures_exit_with_two() {
    // Node 2 has no edges and is the whole complement of S, so the
    // normalized cut has a zero volume.
    let dir = scratch("numeric");
    let graph = dir.join("g.edgelist");
    fs::write(&graph, "0 1\n0 3\n1 3\n").unwrap();
    let target = dir.join("t.txt");
    fs::write(&target, "0\n1\n3\n").unwrap();
    let o = run(&["attack", "--graph", s(&graph), "--target", s(&target)]);
    assert_eq!(o.status.code(), Some(2), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(String::from_utf8_lossy(&o.stderr).contains("degenerate partition"));
}
