//! Acceptance gate: one line per criterion, with the runtime budget included in the verdict.

use std::time::{Duration, Instant};

use hz_core::lattice::build_lattice;
use hz_core::verify::{self, Check, SuiteKind};

/// Criteria that cannot pass by construction; they still run and print, but do not fail the target.
const KNOWN_UNATTAINABLE: &[u32] = &[];

struct Outcome {
    criterion: u32,
    pass: bool,
    line: String,
}

fn judge(criterion: u32, budget: Duration, run: impl FnOnce() -> Vec<Check>) -> Outcome {
    let start = Instant::now();
    let checks = run();
    let elapsed = start.elapsed();
    let failed: Vec<String> = checks.iter().filter(|c| !c.pass).map(|c| format!("{} {}", c.name, c.detail)).collect();
    let in_time = elapsed < budget;
    let pass = failed.is_empty() && !checks.is_empty() && in_time;
    let mut line = format!(
        "criterion {criterion}: {} ({} checks, {:.1}s of {}s)",
        if pass { "PASS" } else { "FAIL" },
        checks.len(),
        elapsed.as_secs_f64(),
        budget.as_secs()
    );
    if !in_time {
        line.push_str(" over budget");
    }
    for f in failed {
        line.push_str(&format!("\n    failed: {f}"));
    }
    if let Some(v) = checks.first().and_then(|c| c.detail.get("value").map(|v| (c, v))) {
        line.push_str(&format!("\n    {}: value {} ({})", v.0.name, v.1, v.0.detail));
    }
    Outcome { criterion, pass, line }
}

fn secs(s: u64) -> Duration {
    Duration::from_secs(s)
}

fn main() {
    let lat = build_lattice(5).expect("D = 5 lattice");
    let k = 4;
    let mut outcomes = vec![];
    let mut emit = |o: Outcome| {
        println!("{}", o.line);
        outcomes.push((o.criterion, o.pass));
    };

    emit(judge(1, secs(10), || verify::weil_checks(&[5, 8, 13])));
    emit(judge(2, secs(30), || verify::geometry_checks(5)));
    emit(judge(3, secs(10), || verify::algebra_checks(21, 100)));
    emit(judge(4, secs(120), verify::theta_checks));
    let mut basis = None;
    emit(judge(5, secs(60), || {
        let b = verify::trace_basis(&lat, k);
        let out = match &b {
            Ok(b) => verify::residue_checks(&lat, b),
            Err(e) => vec![Check { criterion: 5, name: "plus-space basis".into(), pass: false, detail: e.to_string().into() }],
        };
        basis = b.ok();
        out
    }));
    emit(judge(6, secs(300), verify::preimage_checks));
    emit(judge(7, secs(600), || match &basis {
        Some(b) => verify::trace_checks(&lat, b),
        None => vec![],
    }));
    emit(judge(8, secs(300), || verify::xi_checks(&lat, k)));
    emit(judge(9, secs(3600), || {
        let runs: Vec<String> = (0..2)
            .map(|_| match verify::run_suite(SuiteKind::Core, 5, k) {
                Ok(r) => serde_json::to_string_pretty(&r.to_json()).expect("report serializes"),
                Err(e) => e.to_string(),
            })
            .collect();
        let same = runs[0] == runs[1];
        vec![Check { criterion: 9, name: "two suite runs are byte-identical".into(), pass: same, detail: runs[0].len().into() }]
    }));

    let blocking: Vec<u32> = outcomes.iter().filter(|(c, p)| !p && !KNOWN_UNATTAINABLE.contains(c)).map(|(c, _)| *c).collect();
    if !blocking.is_empty() {
        eprintln!("acceptance failed for criteria {blocking:?}");
        std::process::exit(1);
    }
}
