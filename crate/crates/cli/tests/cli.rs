use std::path::Path;
use std::process::{Command, Output};

use dfljam_core::fnn::decode_checkpoint;
use dfljam_core::graph::TopologyFile;
use dfljam_core::AttackPlan;

fn dfljam(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dfljam"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn ok(args: &[&str]) -> Output {
    let out = dfljam(args);
    assert!(
        out.status.success(),
        "{args:?}: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

#[test]
fn ndba_plan_on_line() {
    let out = ok(&[
        "plan",
        "--topology",
        "line",
        "--scenario",
        "s1",
        "--algo",
        "ndba",
        "--mb",
        "2",
    ]);
    let plan: AttackPlan = serde_json::from_slice(&out.stdout).unwrap();
    let links: Vec<(usize, usize)> = plan.jammed_links.iter().map(|l| (l.lo(), l.hi())).collect();
    assert_eq!(links, [(0, 1), (3, 4)]);
    assert_eq!(plan.budget_used, 2);
}

#[test]
fn oversized_budget_is_clamped_with_warning() {
    let out = ok(&[
        "plan",
        "--topology",
        "star",
        "--scenario",
        "s1",
        "--algo",
        "mcba",
        "--mb",
        "50",
    ]);
    assert!(stderr(&out).contains("warning: mb = 50 exceeds the 8 links"));
    let plan: AttackPlan = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(plan.jammed_links.len(), 8);
}

#[test]
fn invalid_config_names_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.json");
    std::fs::write(&cfg, r#"{"topology": "line", "rj": "far"}"#).unwrap();
    let out = dfljam(&["plan", "--config", cfg.to_str().unwrap()]);
    assert!(!out.status.success());
    assert!(stderr(&out).contains("`rj`"), "{}", stderr(&out));

    let out = dfljam(&["plan", "--topology", "hexagon"]);
    assert!(!out.status.success());
    assert!(stderr(&out).contains("topology"));
}

#[test]
fn thread_cap_must_be_positive() {
    let out = Command::new(env!("CARGO_BIN_EXE_dfljam"))
        .args(["topology", "--topology", "line"])
        .env("DFLJAM_THREADS", "0")
        .output()
        .unwrap();
    assert!(!out.status.success());
    assert!(stderr(&out).contains("DFLJAM_THREADS"));
}

#[test]
fn topology_file_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("ring.json");
    ok(&["topology", "--topology", "ring", "--out", file.to_str().unwrap()]);
    let topo = TopologyFile::load(&file).unwrap();
    assert_eq!((topo.node_count(), topo.links().len()), (16, 16));

    // same plan whether the layout is generated or loaded
    let generated = ok(&["plan", "--topology", "ring", "--scenario", "s2", "--algo", "ndba"]);
    let loaded = ok(&[
        "plan",
        "--topology",
        "ring",
        "--topology-file",
        file.to_str().unwrap(),
        "--scenario",
        "s2",
        "--algo",
        "ndba",
    ]);
    assert_eq!(generated.stdout, loaded.stdout);
}

fn read_dir_sorted(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<(String, Vec<u8>)> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (
                e.file_name().to_string_lossy().into_owned(),
                std::fs::read(e.path()).unwrap(),
            )
        })
        .collect();
    files.sort();
    files
}

#[test]
fn table_has_every_row_and_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str| {
        let out = dir.path().join(name);
        let args = [
            "table",
            "--topology",
            "line",
            "--preset",
            "paper",
            "--max-rounds",
            "3",
            "--train-samples",
            "40",
            "--seed",
            "4",
            "--out",
            out.to_str().unwrap(),
        ];
        let stdout = ok(&args).stdout;
        (out, stdout)
    };
    let (a, stdout_a) = run("a");
    let (b, stdout_b) = run("b");
    assert_eq!(stdout_a, stdout_b);
    assert_eq!(read_dir_sorted(&a), read_dir_sorted(&b));

    let csv = std::fs::read_to_string(a.join("summary.csv")).unwrap();
    let labels: Vec<&str> = csv.lines().skip(1).map(|l| l.split(',').next().unwrap()).collect();
    assert_eq!(
        labels,
        [
            "No attack",
            "Attack all links",
            "Unlimited jamming range",
            "MCBA",
            "NDBA",
            "Random",
            "Limited jamming range",
            "MCBA",
            "NDBA",
            "Random"
        ]
    );
    for slug in [
        "no_attack",
        "attack_all",
        "mcba_s1",
        "ndba_s1",
        "random_s1",
        "mcba_s2",
        "ndba_s2",
        "random_s2",
    ] {
        let tsv = std::fs::read_to_string(a.join(format!("rounds_{slug}.tsv"))).unwrap();
        assert_eq!(tsv.lines().count(), 1 + 3, "{slug}");
        assert!(a.join(format!("plan_{slug}.json")).exists());
        let nodes = std::fs::read_to_string(a.join(format!("{slug}_node_metrics.csv"))).unwrap();
        assert_eq!(nodes.lines().count(), 1 + 3 * 5);
    }
}

#[test]
fn run_writes_manifest_metrics_and_checkpoint() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run");
    ok(&[
        "run",
        "--topology",
        "star",
        "--preset",
        "desk",
        "--scenario",
        "s2",
        "--algo",
        "mcba",
        "--max-rounds",
        "4",
        "--train-samples",
        "40",
        "--checkpoint",
        "--out",
        out.to_str().unwrap(),
    ]);
    for f in [
        "manifest.json",
        "topology.json",
        "plan.json",
        "summary.csv",
        "summary.json",
        "rounds_mcba_s2.tsv",
    ] {
        assert!(out.join(f).exists(), "{f}");
    }
    let rounds = std::fs::read_to_string(out.join("round_metrics.csv")).unwrap();
    assert_eq!(rounds.lines().next(), Some("round,avg,min,best_avg"));
    assert_eq!(rounds.lines().count(), 1 + 4);
    let models = decode_checkpoint(&std::fs::read(out.join("checkpoint.dflm")).unwrap()).unwrap();
    assert_eq!(models.len(), 9);
    assert_eq!(models[0].param_count(), 14_626);

    // rerun from the manifest alone
    let again = dir.path().join("again");
    ok(&[
        "run",
        "--config",
        out.join("manifest.json").to_str().unwrap(),
        "--out",
        again.to_str().unwrap(),
    ]);
    assert_eq!(
        std::fs::read(out.join("summary.json")).unwrap(),
        std::fs::read(again.join("summary.json")).unwrap()
    );
}
