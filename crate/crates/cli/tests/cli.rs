use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use latent_consensus::WeightedDigraph;
use serde_json::Value;
use tempfile::TempDir;

const ARC: &str = r#"{"n": 2, "arcs": [{"from": 1, "to": 2, "w": 1.0}]}"#;
const CYCLE3: &str = r#"{"n": 3, "arcs": [
    {"from": 1, "to": 2, "w": 1.0}, {"from": 2, "to": 3, "w": 1.0}, {"from": 3, "to": 1, "w": 1.0}]}"#;
const EMPTY2: &str = r#"{"n": 2, "arcs": []}"#;
const K2: &str =
    r#"{"n": 2, "arcs": [{"from": 1, "to": 2, "w": 1.0}, {"from": 2, "to": 1, "w": 1.0}]}"#;

struct Workspace {
    dir: TempDir,
}

impl Workspace {
    fn new() -> Self {
        Self { dir: TempDir::new().unwrap() }
    }

    fn file(&self, name: &str, contents: &str) -> PathBuf {
        let p = self.dir.path().join(name);
        fs::write(&p, contents).unwrap();
        p
    }

    fn path(&self, name: &str) -> PathBuf {
        self.dir.path().join(name)
    }
}

fn latcon<I, S>(args: I) -> Output
where
    I: IntoIterator<Item = S>,
    S: AsRef<std::ffi::OsStr>,
{
    Command::new(env!("CARGO_BIN_EXE_latcon")).args(args).output().unwrap()
}

fn stdout_json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout)
        .unwrap_or_else(|e| panic!("bad JSON ({e}): {}", String::from_utf8_lossy(&out.stdout)))
}

fn read_json(p: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(p).unwrap()).unwrap()
}

fn matrix(v: &Value) -> Vec<Vec<f64>> {
    serde_json::from_value(v.clone()).unwrap()
}

fn max_diff(a: &[Vec<f64>], b: &[Vec<f64>]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter()
        .zip(b)
        .flat_map(|(r, s)| r.iter().zip(s).map(|(x, y)| (x - y).abs()))
        .fold(0.0, f64::max)
}

#[test]
fn laplacian_examples() {
    let ws = Workspace::new();
    let cases: [(&str, Vec<Vec<f64>>); 3] = [
        (ARC, vec![vec![1., -1.], vec![0., 0.]]),
        (EMPTY2, vec![vec![0., 0.], vec![0., 0.]]),
        (CYCLE3, vec![vec![1., -1., 0.], vec![0., 1., -1.], vec![-1., 0., 1.]]),
    ];
    for (k, (graph, expect)) in cases.into_iter().enumerate() {
        let out = latcon(["laplacian".as_ref(), ws.file(&format!("g{k}.json"), graph).as_os_str()]);
        assert!(out.status.success());
        assert_eq!(matrix(&stdout_json(&out)), expect);
    }
}

#[test]
fn laplacian_output_round_trips_bit_for_bit() {
    let ws = Workspace::new();
    for seed in 0..10 {
        let g = WeightedDigraph::random(7, 0.4, 0.1, 2.0, seed).unwrap();
        let path = ws.file("g.json", &g.to_json_string());
        let out = latcon(["laplacian".as_ref(), path.as_os_str()]);
        let parsed = matrix(&stdout_json(&out));
        let l = g.laplacian();
        for i in 0..7 {
            for j in 0..7 {
                assert_eq!(parsed[i][j].to_bits(), l[(i, j)].to_bits(), "seed {seed} ({i},{j})");
            }
        }
    }
}

#[test]
fn malformed_graph_is_reported_with_context() {
    let ws = Workspace::new();
    let bad = ws.file("bad.json", r#"{"n": 2, "arcs": [{"from": 1, "to": 3, "w": 1.0}]}"#);
    let out = latcon(["laplacian".as_ref(), bad.as_os_str()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("arcs[0]"));

    let typo = ws.file("typo.json", "{\"n\": 2,\n \"arcs\": [{\"from\": 1, \"too\": 2}]}");
    let out = latcon(["laplacian".as_ref(), typo.as_os_str()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 2"));
}

#[test]
fn eigenprojection_methods_agree_on_examples() {
    let ws = Workspace::new();
    let third = 1.0 / 3.0;
    let cases = [
        (ARC, vec![vec![0., 1.], vec![0., 1.]]),
        (CYCLE3, vec![vec![third; 3]; 3]),
        (EMPTY2, vec![vec![1., 0.], vec![0., 1.]]),
    ];
    for (k, (graph, expect)) in cases.into_iter().enumerate() {
        let path = ws.file(&format!("g{k}.json"), graph);
        for (method, tol) in [("nullspace", 1e-14), ("limit", 1e-7), ("oracle", 1e-15)] {
            let out = latcon([
                "eigenprojection".as_ref(),
                path.as_os_str(),
                "--method".as_ref(),
                method.as_ref(),
            ]);
            assert!(out.status.success(), "{method} on graph {k}");
            let report = stdout_json(&out);
            assert!(report["failure"].is_null());
            let p = matrix(&report["projection"]);
            assert!(max_diff(&p, &expect) <= tol, "{method} on graph {k}: {p:?}");
        }
    }
}

#[test]
fn oracle_size_guard() {
    let ws = Workspace::new();
    let path = ws.file("big.json", &WeightedDigraph::empty(11).unwrap().to_json_string());
    let out = latcon([
        "eigenprojection".as_ref(),
        path.as_os_str(),
        "--method".as_ref(),
        "oracle".as_ref(),
    ]);
    assert_eq!(out.status.code(), Some(2));
    let out = latcon(["forests".as_ref(), path.as_os_str()]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn limit_with_small_tau_fails_the_residual_check() {
    let ws = Workspace::new();
    let path = ws.file("c3.json", CYCLE3);
    let out = latcon([
        "eigenprojection".as_ref(),
        path.as_os_str(),
        "--method".as_ref(),
        "limit".as_ref(),
        "--tau".as_ref(),
        "10".as_ref(),
    ]);
    assert_eq!(out.status.code(), Some(1));
    let report = stdout_json(&out);
    assert!(report["failure"].as_str().unwrap().contains("exceeds"));
}

fn run(ws: &Workspace, args: &[&str]) -> (Output, Value) {
    let out_csv = ws.path("traj.csv");
    let report = ws.path("report.json");
    let mut full: Vec<&std::ffi::OsStr> = vec!["run".as_ref()];
    full.extend(args.iter().map(|a| std::ffi::OsStr::new(*a)));
    full.extend(["--out".as_ref(), out_csv.as_os_str(), "--report".as_ref(), report.as_os_str()]);
    let out = latcon(full);
    let value = if report.exists() { read_json(&report) } else { Value::Null };
    (out, value)
}

#[test]
fn run_plain_on_arc() {
    let ws = Workspace::new();
    let g = ws.file("arc.json", ARC);
    let x0 = ws.file("x0.json", "[5, 2]");
    let (out, report) =
        run(&ws, &["--protocol", "plain", g.to_str().unwrap(), "--x0", x0.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(report["protocol"], "plain");
    let predicted: Vec<f64> = serde_json::from_value(report["predicted"].clone()).unwrap();
    assert!((predicted[0] - 2.0).abs() < 1e-14 && (predicted[1] - 2.0).abs() < 1e-14);
    assert!(report["residual"].as_f64().unwrap() <= 1e-6);
    assert_eq!(report["converged"], true);
    assert!(report["failure"].is_null());
    assert!(report["wall_time_s"].as_f64().unwrap() >= 0.0);

    let csv = fs::read_to_string(ws.path("traj.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("t,x1,x2"));
    let first: Vec<f64> = lines.next().unwrap().split(',').map(|s| s.parse().unwrap()).collect();
    assert_eq!(first, vec![0.0, 5.0, 2.0]);
    let last: Vec<f64> =
        csv.lines().last().unwrap().split(',').map(|s| s.parse().unwrap()).collect();
    assert!((last[0] - 40.0).abs() < 1e-9);
    assert!((last[1] - 2.0).abs() < 1e-6);
}

#[test]
fn run_background_without_links() {
    let ws = Workspace::new();
    let g = ws.file("e2.json", EMPTY2);
    let x0 = ws.file("x0.json", "[4, 8]");
    let (out, report) = run(
        &ws,
        &[
            "--protocol",
            "background",
            g.to_str().unwrap(),
            "--x0",
            x0.to_str().unwrap(),
            "--delta",
            "0.1",
        ],
    );
    assert!(out.status.success());
    assert!((report["predicted_consensus"].as_f64().unwrap() - 6.0).abs() < 1e-14);
    assert_eq!(report["parameters"]["v"], serde_json::json!([0.5, 0.5]));
    assert!(report["residual"].as_f64().unwrap() <= 1e-6);
}

#[test]
fn run_hub_and_ortho_converge() {
    let ws = Workspace::new();
    let g =
        ws.file("g.json", &WeightedDigraph::random(5, 0.3, 0.5, 1.5, 8).unwrap().to_json_string());
    let y0 = ws.file("y0.json", "[1, -2, 3, 0.5, 4, 10]");
    let x0 = ws.file("x0.json", "[1, -2, 3, 0.5, 4]");
    let v = ws.file("v.json", "[0.5, 1, 0, 0.25, 2]");
    let (out, report) = run(
        &ws,
        &[
            "--protocol",
            "hub",
            g.to_str().unwrap(),
            "--x0",
            y0.to_str().unwrap(),
            "--delta",
            "0.3",
            "--v",
            v.to_str().unwrap(),
        ],
    );
    assert!(out.status.success(), "{report}");
    assert_eq!(report["predicted"].as_array().unwrap().len(), 6);

    let (out, report) =
        run(&ws, &["--protocol", "ortho", g.to_str().unwrap(), "--x0", x0.to_str().unwrap()]);
    assert!(out.status.success(), "{report}");
    let c = report["predicted_consensus"].as_f64().unwrap();
    let latent = latcon([
        "latent".as_ref(),
        "--model".as_ref(),
        "ortho".as_ref(),
        g.as_os_str(),
        "--x0".as_ref(),
        x0.as_os_str(),
    ]);
    assert!((stdout_json(&latent)["consensus"].as_f64().unwrap() - c).abs() < 1e-12);
}

#[test]
fn run_second_order_residual_decays() {
    let ws = Workspace::new();
    let g = ws.file("k2.json", K2);
    let x0 = ws.file("x0.json", "[1, -1, 0.5, 2]");
    let (out, report) = run(
        &ws,
        &[
            "--protocol",
            "second-order",
            g.to_str().unwrap(),
            "--x0",
            x0.to_str().unwrap(),
            "--gamma",
            "1",
        ],
    );
    assert!(out.status.success());
    let r_end = report["residual"].as_f64().unwrap();
    let r_half = report["residual_half_horizon"].as_f64().unwrap();
    assert!(r_end <= 1e-6 && r_end < r_half, "{r_end} vs {r_half}");
    // ξ → (ξ̄0 + t ζ̄0)·1 with ζ̄0 = 1.25
    let predicted: Vec<f64> = serde_json::from_value(report["predicted"].clone()).unwrap();
    let t = report["parameters"]["t_max"].as_f64().unwrap();
    assert!((predicted[0] - 1.25 * t).abs() < 1e-9);
    assert!((predicted[3] - 1.25).abs() < 1e-12);
    let header = fs::read_to_string(ws.path("traj.csv")).unwrap();
    assert!(header.starts_with("t,x1,x2,x3,x4\n"));
}

#[test]
fn unstable_second_order_is_refused_with_failure_field() {
    let ws = Workspace::new();
    let g = ws.file("c3.json", CYCLE3);
    let x0 = ws.file("x0.json", "[1, 2, 3, 0, 0, 1]");
    let (out, report) = run(
        &ws,
        &[
            "--protocol",
            "second-order",
            g.to_str().unwrap(),
            "--x0",
            x0.to_str().unwrap(),
            "--gamma",
            "0.01",
        ],
    );
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(report["converged"], false);
    assert!(report["failure"].as_str().unwrap().contains("nonnegative real part"));
}

#[test]
fn non_convergence_exits_nonzero_with_failure_field() {
    let ws = Workspace::new();
    let g = ws.file("arc.json", ARC);
    let x0 = ws.file("x0.json", "[5, 2]");
    let (out, report) = run(
        &ws,
        &["--protocol", "plain", g.to_str().unwrap(), "--x0", x0.to_str().unwrap(), "--t-max", "1"],
    );
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(report["converged"], false);
    assert!(report["residual"].as_f64().unwrap() > 1e-6);
    assert!(report["failure"].as_str().unwrap().contains("exceeds tolerance"));
}

#[test]
fn inconsistent_flags_are_rejected() {
    let ws = Workspace::new();
    let g = ws.file("arc.json", ARC);
    let x0 = ws.file("x0.json", "[5, 2]");
    let x1 = ws.file("x1.json", "[5, 2, 1]");
    let bad_v = ws.file("v.json", "[0.7, 0.7]");
    let gs = g.to_str().unwrap();
    for args in [
        vec!["--protocol", "plain", gs, "--x0", x0.to_str().unwrap(), "--gamma", "1"],
        vec!["--protocol", "plain", gs, "--x0", x0.to_str().unwrap(), "--delta", "1"],
        vec!["--protocol", "hub", gs, "--x0", x1.to_str().unwrap()],
        vec!["--protocol", "hub", gs, "--x0", x0.to_str().unwrap(), "--delta", "1"],
        vec!["--protocol", "second-order", gs, "--x0", x0.to_str().unwrap()],
        vec![
            "--protocol",
            "background",
            gs,
            "--x0",
            x0.to_str().unwrap(),
            "--delta",
            "1",
            "--v",
            bad_v.to_str().unwrap(),
        ],
    ] {
        let (out, _) = run(&ws, &args);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
        assert!(!out.stderr.is_empty());
    }
}

#[test]
fn latent_examples() {
    let ws = Workspace::new();
    let e2 = ws.file("e2.json", EMPTY2);
    let x0 = ws.file("x0.json", "[4, 8]");
    let out = latcon([
        "latent".as_ref(),
        "--model".as_ref(),
        "background".as_ref(),
        e2.as_os_str(),
        "--x0".as_ref(),
        x0.as_os_str(),
    ]);
    assert!(out.status.success());
    assert!((stdout_json(&out)["consensus"].as_f64().unwrap() - 6.0).abs() < 1e-14);

    for seed in 0..5 {
        let g = ws.file(
            "g.json",
            &WeightedDigraph::random(6, 0.25, 0.1, 2.0, seed).unwrap().to_json_string(),
        );
        let x = ws.file("x.json", "[3, -1, 2.5, 0, 7, -4]");
        let value = |model: &str| {
            let out = latcon([
                "latent".as_ref(),
                "--model".as_ref(),
                model.as_ref(),
                g.as_os_str(),
                "--x0".as_ref(),
                x.as_os_str(),
            ]);
            assert!(out.status.success());
            stdout_json(&out)["consensus"].as_f64().unwrap()
        };
        let (hub, background) = (value("hub"), value("background"));
        assert!((hub - background).abs() <= 1e-10, "seed {seed}: {hub} vs {background}");
    }

    // in-tree: ortho coincides with the plain limit
    let arc = ws.file("arc.json", ARC);
    let x = ws.file("x.json", "[5, 2]");
    let out = latcon([
        "latent".as_ref(),
        "--model".as_ref(),
        "ortho".as_ref(),
        arc.as_os_str(),
        "--x0".as_ref(),
        x.as_os_str(),
    ]);
    let state: Vec<f64> = serde_json::from_value(stdout_json(&out)["state"].clone()).unwrap();
    assert!(state.iter().all(|s| (s - 2.0).abs() < 1e-12));
}

#[test]
fn sweep_is_ordered_and_independent_of_jobs() {
    let ws = Workspace::new();
    let g =
        ws.file("g.json", &WeightedDigraph::random(6, 0.3, 0.1, 2.0, 12).unwrap().to_json_string());
    let x = ws.file("x.json", "[1, 2, 3, 4, 5, 6]");
    let sweep = |jobs: &str| {
        let out = latcon([
            "sweep".as_ref(),
            "--protocol".as_ref(),
            "hub".as_ref(),
            g.as_os_str(),
            "--x0".as_ref(),
            x.as_os_str(),
            "--deltas".as_ref(),
            "1,0.1,0.01,0.001,1e-4".as_ref(),
            "--jobs".as_ref(),
            jobs.as_ref(),
        ]);
        assert!(out.status.success());
        out.stdout
    };
    let one = sweep("1");
    assert_eq!(one, sweep("3"));
    let report: Value = serde_json::from_slice(&one).unwrap();
    let deltas: Vec<f64> =
        report["points"].as_array().unwrap().iter().map(|p| p["delta"].as_f64().unwrap()).collect();
    assert_eq!(deltas, vec![1.0, 0.1, 0.01, 0.001, 1e-4]);
    let last = report["points"][4]["consensus"].as_f64().unwrap();
    assert!((last - report["latent"].as_f64().unwrap()).abs() < 1e-2);
}

#[test]
fn forests_report_counts_and_matrices() {
    let ws = Workspace::new();
    let c3 = ws.file("c3.json", CYCLE3);
    let out = latcon([
        "forests".as_ref(),
        c3.as_os_str(),
        "--tau".as_ref(),
        "1".as_ref(),
        "--list".as_ref(),
    ]);
    assert!(out.status.success());
    let report = stdout_json(&out);
    assert_eq!(report["count_by_size"], serde_json::json!([1, 3, 3]));
    assert_eq!(report["forests"].as_array().unwrap().len(), 7);
    let q = matrix(&report["parametric_forest_matrix"]);
    assert!((q[0][0] - 4.0 / 7.0).abs() < 1e-15);
}

#[test]
fn generate_is_reproducible_and_parsable() {
    let args = ["generate", "--n", "5", "--p", "0.4", "--seed", "9"];
    let a = latcon(args);
    let b = latcon(args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let g = WeightedDigraph::from_json_str(&String::from_utf8(a.stdout).unwrap()).unwrap();
    assert_eq!(g, WeightedDigraph::random(5, 0.4, 0.1, 2.0, 9).unwrap());
}
