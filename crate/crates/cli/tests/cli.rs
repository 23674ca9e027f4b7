use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_topotherm"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(args: &[&str]) -> String {
    let out = run(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn data_rows(csv: &str) -> Vec<Vec<String>> {
    csv.lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

#[test]
fn spectrum_levels() {
    let v: serde_json::Value = serde_json::from_str(&stdout(&["spectrum", "complete:5"])).unwrap();
    let levels = v["levels"].as_array().unwrap();
    assert_eq!(levels.len(), 2);
    assert_eq!(levels[0]["energy"], 0.0);
    assert_eq!(levels[0]["degeneracy"], 1);
    assert_eq!(levels[1]["energy"], 5.0);
    assert_eq!(levels[1]["degeneracy"], 4);

    let v: serde_json::Value =
        serde_json::from_str(&stdout(&["spectrum", "prod(path:2,path:2)"])).unwrap();
    let ev: Vec<f64> = v["eigenvalues"].as_array().unwrap().iter().map(|x| x.as_f64().unwrap()).collect();
    for (g, w) in ev.iter().zip([0.0, 2.0, 2.0, 4.0]) {
        assert!((g - w).abs() < 1e-12);
    }
}

#[test]
fn analytic_flag_rejects_lattices_without_closed_form() {
    assert_eq!(run(&["spectrum", "tri:3x3:obc", "--analytic"]).status.code(), Some(2));
    assert!(run(&["spectrum", "tri:3x3:obc"]).status.success());
}

#[test]
fn eigenvectors_are_unitary() {
    let v: serde_json::Value =
        serde_json::from_str(&stdout(&["spectrum", "cycle:5", "--eigenvectors"])).unwrap();
    let flat = v["eigenvectors"].as_array().unwrap();
    assert_eq!(flat.len(), 25);
    let at = |i: usize, j: usize| {
        let z = &flat[i * 5 + j];
        (z[0].as_f64().unwrap(), z[1].as_f64().unwrap())
    };
    for a in 0..5 {
        for b in 0..5 {
            let (mut re, mut im) = (0.0, 0.0);
            for i in 0..5 {
                let (x1, y1) = at(i, a);
                let (x2, y2) = at(i, b);
                re += x1 * x2 + y1 * y2;
                im += x1 * y2 - y1 * x2;
            }
            let want = if a == b { 1.0 } else { 0.0 };
            assert!((re - want).abs() < 1e-12 && im.abs() < 1e-12);
        }
    }
}

#[test]
fn bad_inputs_exit_with_two() {
    for args in [
        &["spectrum", "badname:3"][..],
        &["report", "star:8", "--T", "0"],
        &["report", "star:8", "--T", "-2"],
        &["sweep", "cycle:6", "--points", "1"],
        &["table1", "--N", "15"],
        &["crb", "complete:4", "--T", "1", "--M", "100", "--trials", "10", "--seed", "1"],
        &["spectrum", "cycle:4", "--tol", "0"],
        &["report", "cycle:4", "--T", "1", "--bogus"],
    ] {
        assert_eq!(run(args).status.code(), Some(2), "{args:?}");
    }
}

#[test]
fn io_failures_exit_with_one() {
    let out = run(&["spectrum", "cycle:4", "--out", "/nonexistent-dir/x.json"]);
    assert_eq!(out.status.code(), Some(1));
    let out = run(&["spectrum", "--edges", "/nonexistent-dir/g.txt"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn report_values() {
    let rows = data_rows(&stdout(&["report", "cycle:8", "--T", "1"]));
    assert_eq!(rows[0][2], "0");

    let v: serde_json::Value =
        serde_json::from_str(&stdout(&["report", "complete:8", "--T", "1", "--format", "json"])).unwrap();
    let q = (-8.0f64).exp();
    let want = 64.0 * 7.0 * q / (1.0 + 7.0 * q).powi(2);
    let got = v["qfi"].as_f64().unwrap();
    assert!((got - want).abs() < 1e-12 * want);
}

#[test]
fn table1_shape() {
    let csv = stdout(&["table1", "--N", "16"]);
    let rows = data_rows(&csv);
    assert_eq!(rows.len(), 7);
    let header = csv.lines().find(|l| !l.starts_with('#')).unwrap();
    let cols: Vec<&str> = header.split(',').collect();
    let idx = |name: &str| cols.iter().position(|c| *c == name).unwrap();
    let star = rows.iter().find(|r| r[0] == "S_N").unwrap();
    // The bipartite descriptor is quoted and contains a comma, so index
    // from the end for the numeric columns.
    let off = star.len() - cols.len();
    let v = |r: &Vec<String>, name: &str| r[idx(name) + off].parse::<f64>().unwrap();
    assert_eq!(v(star, "qfi_high_closed"), 15.0 * 228.0 / 256.0);
    let bip = rows.iter().find(|r| r[0] == "K_N1_N2").unwrap();
    let off_b = bip.len() - cols.len();
    assert!(bip[idx("dev_qfi") + off_b].parse::<f64>().unwrap() < 0.01);
}

#[test]
fn sweep_shape_and_peak_footer() {
    let csv = stdout(&["sweep", "honey:4x4:obc", "--points", "200"]);
    assert_eq!(data_rows(&csv).len(), 200);
    assert!(csv.starts_with("# topotherm "));
    assert!(csv.lines().last().unwrap().starts_with("# peak: T_max="));
}

#[test]
fn outputs_are_byte_identical() {
    let args = ["crb", "complete:8", "--T", "1", "--M", "10000", "--trials", "200", "--seed", "7"];
    let a = run(&args);
    let b = run(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let v: serde_json::Value = serde_json::from_slice(&a.stdout).unwrap();
    assert_eq!(v["converged_trials"].as_u64().unwrap() + v["excluded_trials"].as_u64().unwrap(), 200);

    let sweep = ["sweep", "star:6", "--points", "50", "--format", "json"];
    assert_eq!(run(&sweep).stdout, run(&sweep).stdout);
}

#[test]
fn out_flag_and_edge_list_input() {
    let dir = tempfile::tempdir().unwrap();
    let edges = dir.path().join("square.txt");
    std::fs::write(&edges, "# a 4-cycle\n4\n0 1\n1 2\n2 3\n3 0\n").unwrap();
    let target = dir.path().join("report.csv");
    let out = run(&[
        "report",
        "--edges",
        edges.to_str().unwrap(),
        "--T",
        "1",
        "--out",
        target.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    let text = std::fs::read_to_string(&target).unwrap();
    assert!(text.contains("# graph: custom"));
    assert_eq!(data_rows(&text)[0][2], "0");
}

#[test]
fn coherence_window_for_complete_graph() {
    let v: serde_json::Value = serde_json::from_str(&stdout(&["coherence", "complete:6", "--points", "100"])).unwrap();
    assert_eq!(v["peak_within_coherence_drop"], true);
    assert_eq!(v["curve"].as_array().unwrap().len(), 100);
}

#[test]
fn help_lists_flags() {
    let help = stdout(&["crb", "--help"]);
    for flag in ["--T", "--M", "--trials", "--seed", "--kind", "--per-trial", "--out", "--format", "--tol"] {
        assert!(help.contains(flag), "{flag}");
    }
}
