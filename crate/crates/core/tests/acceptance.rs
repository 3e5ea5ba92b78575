//! Acceptance run: one documented CLI invocation per criterion, one
//! PASS/FAIL line each. A criterion passes when every check of its
//! invocation passes within the runtime budget.
//!
//! Failing criteria are reported but do not fail the test binary unless
//! `ACCEPTANCE_STRICT=1` is set.

use std::time::Instant;

use spikelab::cli::execute;

struct Criterion {
    id: u32,
    title: &'static str,
    args: &'static [&'static str],
    budget_s: f64,
}

const CRITERIA: &[Criterion] = &[
    Criterion { id: 1, title: "ground-state oracle", args: &["ground-state", "--case", "1:4", "--case", "1:3"], budget_s: 5.0 },
    Criterion {
        id: 2,
        title: "pohozaev identity",
        args: &["constants", "--case", "2:4", "--case", "2:3", "--case", "3:3"],
        budget_s: 30.0,
    },
    Criterion { id: 3, title: "moment identity", args: &["identity-check", "--case", "2:4", "--case", "3:3"], budget_s: 2.0 },
    Criterion { id: 4, title: "metric expansions", args: &["geometry-check", "--manifold", "ellipse:2,1"], budget_s: 60.0 },
    Criterion {
        id: 5,
        title: "kernel structure",
        args: &["spectrum", "--n", "2", "--p", "4", "--box-l", "14", "--grid-h", "0.1", "--refine", "true"],
        budget_s: 300.0,
    },
    Criterion {
        id: 6,
        title: "energy expansion",
        args: &["expansion", "--manifold", "ellipse:2,1", "--manifold", "disk:1", "--xi", "0"],
        budget_s: 300.0,
    },
    Criterion {
        id: 7,
        title: "gradient lemma",
        args: &["gradient-check", "--manifold", "ellipse:2,1", "--xi", "0.7", "--eps", "0.02,0.01"],
        budget_s: 300.0,
    },
    Criterion {
        id: 8,
        title: "remainder scaling",
        args: &[
            "remainder", "--manifold", "ellipse:2,1", "--h-mesh", "0.01", "--case", "2:4", "--case", "2:3", "--eps",
            "0.08,0.06,0.04,0.03,0.02",
        ],
        budget_s: 600.0,
    },
    Criterion {
        id: 9,
        title: "concentration",
        args: &[
            "continuation", "--manifold", "ellipse:2,1", "--eps", "0.08,0.06,0.045,0.034", "--xi", "0.3175604292915215",
            "--h-mesh", "0.01",
        ],
        budget_s: 900.0,
    },
    Criterion { id: 10, title: "degenerate landscape", args: &["landscape", "--manifold", "disk:1"], budget_s: 120.0 },
];

fn main() {
    let out = tempfile::tempdir().expect("temp dir");
    let mut passed = 0;
    for c in CRITERIA {
        let dir = out.path().join(format!("criterion{}", c.id));
        let mut argv: Vec<String> = vec!["spikelab".into()];
        argv.extend(c.args.iter().map(|s| s.to_string()));
        argv.push("--out".into());
        argv.push(dir.display().to_string());
        let start = Instant::now();
        let ex = execute(&argv);
        let secs = start.elapsed().as_secs_f64();
        let failed: Vec<String> = ex.checks.iter().filter(|k| !k.passed).map(|k| format!("{} ({})", k.name, k.detail)).collect();
        let in_time = secs < c.budget_s;
        let ok = ex.code == 0 && failed.is_empty() && in_time;
        passed += ok as usize;
        let mut detail = format!("{} checks, {secs:.1} s (budget {} s)", ex.checks.len(), c.budget_s);
        if !in_time {
            detail.push_str(", over budget");
        }
        if ex.code == 2 {
            detail.push_str(&format!(", config error: {}", ex.stderr.trim()));
        }
        if !failed.is_empty() {
            detail.push_str(&format!("; failed: {}", failed.join("; ")));
        }
        println!("{} criterion {} ({}): {detail}", if ok { "PASS" } else { "FAIL" }, c.id, c.title);
    }
    println!("acceptance: {passed} of {} criteria pass", CRITERIA.len());
    let strict = std::env::var("ACCEPTANCE_STRICT").map(|v| v == "1").unwrap_or(false);
    if strict && passed != CRITERIA.len() {
        std::process::exit(1);
    }
}
