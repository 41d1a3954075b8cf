use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn sparse_nmf(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sparse-nmf"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn sparseness_of_a_spike_is_one() {
    let dir = tempfile::tempdir().unwrap();
    let x = dir.path().join("x.txt");
    fs::write(&x, "0 0 5 0\n").unwrap();
    let o = sparse_nmf(&["sparseness", "--in", path(&x)]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert_eq!(stdout(&o), "1.0\n");
}

#[test]
fn project_two_dimensional_example() {
    let dir = tempfile::tempdir().unwrap();
    let x = dir.path().join("x.csv");
    fs::write(&x, "0.8,0.2\n").unwrap();
    let o = sparse_nmf(&["project", "--in", path(&x), "--sparseness", "1", "--l2", "1"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = stdout(&o);
    let mut lines = text.lines();
    let values: Vec<f64> = lines
        .next()
        .unwrap()
        .split_whitespace()
        .map(|v| v.parse().unwrap())
        .collect();
    assert!((values[0] - 1.0).abs() < 1e-12 && values[1].abs() < 1e-12);
    assert_eq!(lines.next(), Some("iterations: 1"));
}

#[test]
fn project_defaults_to_each_rows_norm() {
    let dir = tempfile::tempdir().unwrap();
    let x = dir.path().join("x.txt");
    fs::write(&x, "3 4 0 1\n").unwrap();
    let o = sparse_nmf(&["project", "--in", path(&x), "--sparseness", "0.5"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let first = stdout(&o).lines().next().unwrap().to_string();
    let values: Vec<f64> = first.split_whitespace().map(|v| v.parse().unwrap()).collect();
    let l2 = values.iter().map(|v| v * v).sum::<f64>().sqrt();
    assert!((l2 - 26f64.sqrt()).abs() < 1e-9);
}

#[test]
fn exit_codes_distinguish_usage_data_and_io() {
    let dir = tempfile::tempdir().unwrap();

    let o = sparse_nmf(&["project", "--sparseness", "0.5"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("--in"));

    let o = sparse_nmf(&["--help"]);
    assert_eq!(o.status.code(), Some(0));

    let bad = dir.path().join("bad.txt");
    fs::write(&bad, "1 2\n3 x\n").unwrap();
    let o = sparse_nmf(&["sparseness", "--in", path(&bad)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("line 2"), "{}", stderr(&o));

    let negative = dir.path().join("neg.txt");
    fs::write(&negative, "1 -2\n3 4\n").unwrap();
    let out_w = dir.path().join("w.csv");
    let out_h = dir.path().join("h.csv");
    let o = sparse_nmf(&[
        "fit", "--data", path(&negative), "--components", "1",
        "--out-w", path(&out_w), "--out-h", path(&out_h),
    ]);
    assert_eq!(o.status.code(), Some(2));

    let missing = dir.path().join("missing.txt");
    let o = sparse_nmf(&["sparseness", "--in", path(&missing)]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("--in"));

    let x = dir.path().join("x.txt");
    fs::write(&x, "1 2\n").unwrap();
    let o = sparse_nmf(&["project", "--in", path(&x), "--sparseness", "1.5"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("--sparseness"), "{}", stderr(&o));
}

#[test]
fn fit_writes_factors_and_reports() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("v.csv");
    let rows: Vec<String> = (0..6)
        .map(|i| (0..9).map(|j| format!("{}", ((i * 5 + j * 2) % 7) as f64 + 0.25)).collect::<Vec<_>>().join(","))
        .collect();
    fs::write(&data, rows.join("\n") + "\n").unwrap();
    let (w, h, report) = (
        dir.path().join("w.csv"),
        dir.path().join("h.csv"),
        dir.path().join("trace.csv"),
    );
    let o = sparse_nmf(&[
        "fit", "--data", path(&data), "--components", "3", "--sh", "0.6",
        "--max-iter", "50", "--seed", "4",
        "--out-w", path(&w), "--out-h", path(&h), "--report", path(&report),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));

    let w_text = fs::read_to_string(&w).unwrap();
    assert_eq!(w_text.lines().count(), 6);
    assert!(w_text.lines().all(|l| l.split(',').count() == 3));
    let h_text = fs::read_to_string(&h).unwrap();
    assert_eq!(h_text.lines().count(), 3);

    let trace = fs::read_to_string(&report).unwrap();
    let mut lines = trace.lines();
    assert_eq!(lines.next(), Some("iteration,objective,stepsize_w,stepsize_h"));
    let objectives: Vec<f64> = lines
        .map(|l| l.split(',').nth(1).unwrap().parse().unwrap())
        .collect();
    assert!(objectives.windows(2).all(|p| p[1] <= p[0]));

    let components = fs::read_to_string(dir.path().join("trace.components.csv")).unwrap();
    let mut lines = components.lines();
    assert_eq!(lines.next(), Some("component,basis_sparseness,coeff_sparseness"));
    for line in lines {
        let s: f64 = line.split(',').nth(2).unwrap().parse().unwrap();
        assert!((s - 0.6).abs() < 1e-9);
    }
}

#[test]
fn export_basis_has_grid_dimensions() {
    let dir = tempfile::tempdir().unwrap();
    let w = dir.path().join("w.txt");
    // Five 3x2 patches.
    let rows: Vec<String> = (0..6)
        .map(|i| (0..5).map(|k| format!("{}", (i + k) as f64)).collect::<Vec<_>>().join(" "))
        .collect();
    fs::write(&w, rows.join("\n")).unwrap();
    let out = dir.path().join("grid.pgm");
    let o = sparse_nmf(&[
        "export-basis", "--w", path(&w), "--patch-h", "3", "--patch-w", "2",
        "--cols", "3", "--out", path(&out),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let bytes = fs::read(&out).unwrap();
    // 3 patches across: 3*2 + 2 separators; 2 rows: 2*3 + 1 separator.
    let header = b"P5\n8 7\n255\n";
    assert_eq!(&bytes[..header.len()], header);
    assert_eq!(bytes.len(), header.len() + 8 * 7);

    let o = sparse_nmf(&[
        "export-basis", "--w", path(&w), "--patch-h", "4", "--patch-w", "2",
        "--cols", "3", "--out", path(&out),
    ]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn bench_projection_writes_csv() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("bench.csv");
    let o = sparse_nmf(&[
        "bench-projection", "--dims", "2,10", "--sparseness-grid", "0.2,0.8",
        "--trials", "5", "--out", path(&out),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let csv = fs::read_to_string(&out).unwrap();
    assert_eq!(csv.lines().count(), 1 + 2 * 4);
    assert!(csv.starts_with("dim,s_init,s_target,trials,iter_min,iter_mean,iter_max\n"));
}
