//! Acceptance run: one PASS/FAIL line per criterion.

use std::fs;
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use warpsym::verify::{run_case, CaseResult, Level, Tolerances};

const SEED: u64 = 7;

struct Line {
    id: usize,
    title: &'static str,
    passed: bool,
    detail: String,
    elapsed: Duration,
}

fn cases(names: &[&str]) -> (Vec<CaseResult>, Duration) {
    let tol = Tolerances::default();
    let start = Instant::now();
    let out = names.iter().map(|n| run_case(n, Level::Full, SEED, &tol).expect("known case")).collect();
    (out, start.elapsed())
}

fn criterion(id: usize, title: &'static str, names: &[&str], limit: Option<Duration>) -> Line {
    let (results, elapsed) = cases(names);
    let mut passed = results.iter().all(|c| c.passed);
    let mut detail: Vec<String> = results.iter().map(|c| c.message.clone()).collect();
    if let Some(limit) = limit {
        if elapsed > limit {
            passed = false;
            detail.push(format!("runtime {:.1} s over the {} s limit", elapsed.as_secs_f64(), limit.as_secs()));
        }
    }
    Line { id, title, passed, detail: detail.join("; "), elapsed }
}

fn verify_twice() -> Line {
    let start = Instant::now();
    let root = tempfile::tempdir().expect("temp dir");
    let run = |dir: &Path| {
        Command::new(env!("CARGO_BIN_EXE_warpsym"))
            .args(["verify", "--suite", "all", "--seed", "7", "--out-dir"])
            .arg(dir)
            .output()
            .expect("binary runs")
    };
    let (a, b) = (root.path().join("a"), root.path().join("b"));
    let (ra, rb) = (run(&a), run(&b));
    let mut files = vec!["verify-report.xml".to_string(), "verify-report.json".to_string()];
    let mut evidence: Vec<String> = fs::read_dir(a.join("evidence"))
        .map(|d| d.filter_map(|e| e.ok()).map(|e| format!("evidence/{}", e.file_name().to_string_lossy())).collect())
        .unwrap_or_default();
    evidence.sort();
    files.extend(evidence);
    let differing: Vec<&String> = files
        .iter()
        .filter(|f| fs::read(a.join(f)).ok().is_none() || fs::read(a.join(f)).ok() != fs::read(b.join(f)).ok())
        .collect();
    let statuses = (ra.status.code(), rb.status.code());
    let passed = differing.is_empty() && statuses == (Some(0), Some(0));
    let detail = format!(
        "{} files compared, {} differ; exit statuses {:?}",
        files.len(),
        differing.len(),
        statuses
    );
    Line { id: 10, title: "reproducible verify reports", passed, detail, elapsed: start.elapsed() }
}

fn main() {
    let minute = Some(Duration::from_secs(60));
    let ten = Some(Duration::from_secs(600));
    let lines = [
        criterion(1, "volume preservation", &["volume-profiles", "volume-grids"], minute),
        criterion(2, "profile perimeter and Jensen chain", &["perimeter-profiles"], None),
        criterion(3, "Minkowski route with shrinking ε(h)", &["minkowski-route"], ten),
        criterion(4, "golden values", &["golden-values"], None),
        criterion(5, "equality forces centered slices", &["equality-profiles"], None),
        criterion(6, "enlargement containment", &["containment"], None),
        criterion(7, "centered interval strictly minimizes", &["fiber-oracle"], minute),
        criterion(8, "bundle checks", &["hopf-transport", "product-distance", "hopf-tube-perimeter"], ten),
        criterion(9, "derivative comparison checker", &["derivative-comparison"], None),
        verify_twice(),
    ];
    for l in &lines {
        println!(
            "criterion {:2} {} {} ({:.1} s): {}",
            l.id,
            if l.passed { "PASS" } else { "FAIL" },
            l.title,
            l.elapsed.as_secs_f64(),
            l.detail
        );
    }
    let failed = lines.iter().filter(|l| !l.passed).count();
    println!("acceptance: {} of {} criteria pass", lines.len() - failed, lines.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
