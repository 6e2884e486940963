//! End-to-end runs of the binary. Golden files live in tests/golden; set
//! HELIOTROPE_BLESS=1 to rewrite them.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn run(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_heliotrope"))
        .args(args)
        .arg("--out")
        .arg(out)
        .env("HELIOTROPE_THREADS", "1")
        .output()
        .expect("binary runs")
}

fn golden(name: &str, produced: &Path) {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/golden").join(name);
    let got = fs::read_to_string(produced).unwrap();
    if std::env::var_os("HELIOTROPE_BLESS").is_some() {
        fs::create_dir_all(path.parent().unwrap()).unwrap();
        fs::write(&path, &got).unwrap();
        return;
    }
    let want = fs::read_to_string(&path).unwrap_or_else(|_| panic!("missing golden {}", path.display()));
    assert_eq!(got, want, "{name} differs from its golden file");
}

fn csv_rows(path: &Path) -> Vec<Vec<String>> {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

#[test]
fn orient_point_sun_matches_golden() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["orient", "--recipe", "point-sun", "--start", "0,0"], dir.path());
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    golden("orient_point_sun_trajectory.csv", &dir.path().join("trajectory.csv"));
    golden("orient_point_sun_summary.csv", &dir.path().join("summary.csv"));
}

#[test]
fn scalespace_three_lobe_matches_golden() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["scalespace", "--profile-seed", "three-lobe", "--tilts", "5,15,30,45,60,90"], dir.path());
    assert!(o.status.success());
    golden("scalespace_three_lobe_modes.csv", &dir.path().join("modes.csv"));
    let rows = csv_rows(&dir.path().join("modes.csv"));
    let blurred: Vec<usize> = rows.iter().map(|r| r[2].parse().unwrap()).collect();
    assert!(blurred.windows(2).all(|w| w[1] <= w[0]), "{blurred:?}");
    assert_eq!(*blurred.last().unwrap(), 1);
}

#[test]
fn uniform_benchmark_matches_golden() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["benchmark", "--corpus", "uniform", "--count", "3", "--starts", "4"], dir.path());
    assert!(o.status.success());
    let csv = dir.path().join("benchmark.csv");
    golden("benchmark_uniform.csv", &csv);
    // a uniform sky is optimal everywhere up to quadrature ripple
    for r in csv_rows(&csv) {
        let pct: f64 = r[1].parse().unwrap();
        assert!(pct > 99.9, "{r:?}");
    }
}

#[test]
fn every_csv_starts_with_the_run_config() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["simulate-day", "--from", "11", "--to", "13", "--interval", "30", "--height", "32"], dir.path());
    assert!(o.status.success());
    let mut seen = 0;
    for e in fs::read_dir(dir.path()).unwrap() {
        let p = e.unwrap().path();
        if p.extension().is_some_and(|x| x == "csv") {
            let text = fs::read_to_string(&p).unwrap();
            let first = text.lines().next().unwrap();
            let cfg: serde_json::Value = serde_json::from_str(first.trim_start_matches('#').trim()).unwrap();
            assert_eq!(cfg["command"], "simulate-day");
            assert!(cfg.get("out").is_none());
            seen += 1;
        }
    }
    assert!(seen >= 3);
    assert!(dir.path().join("day.svg").exists());
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let ok = run(&["orient", "--recipe", "point-sun"], dir.path());
    assert_eq!(ok.status.code(), Some(0));
    let capped = run(&["orient", "--recipe", "point-sun", "--max-iters", "1"], dir.path());
    assert_eq!(capped.status.code(), Some(2));
    let missing = run(&["orient", "--map", "/nonexistent/map.pfm"], dir.path());
    assert_eq!(missing.status.code(), Some(1));
    let bad = run(&["orient", "--recipe", "point-sun", "--delta-theta", "-5"], dir.path());
    assert_eq!(bad.status.code(), Some(1));
    let unknown = run(&["benchmark", "--corpus", "nowhere", "--count", "1"], dir.path());
    assert_eq!(unknown.status.code(), Some(1));
    assert!(!unknown.stderr.is_empty());
}

#[test]
fn thread_count_does_not_change_results() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let args = ["sweep-tilt", "--corpus", "multimodal", "--count", "4", "--starts", "4", "--tilts", "5,45"];
    assert!(run(&args, a.path()).status.success());
    let o = Command::new(env!("CARGO_BIN_EXE_heliotrope"))
        .args(args)
        .arg("--out")
        .arg(b.path())
        .env("HELIOTROPE_THREADS", "3")
        .output()
        .unwrap();
    assert!(o.status.success());
    assert_eq!(
        fs::read(a.path().join("sweep.csv")).unwrap(),
        fs::read(b.path().join("sweep.csv")).unwrap()
    );
}

#[test]
fn batch_histogram_has_one_row_per_location() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(
        &["simulate-day", "--batch", "4", "--from", "11", "--to", "13", "--interval", "30", "--height", "32"],
        dir.path(),
    );
    assert!(o.status.success());
    let rows = csv_rows(&dir.path().join("histogram.csv"));
    assert_eq!(rows.len(), 4);
    for r in rows {
        let pct: f64 = r[1].parse().unwrap();
        assert!((0.0..=100.0).contains(&pct));
    }
}
