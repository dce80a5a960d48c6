//! End-to-end acceptance criteria, one line per criterion.
//!
//! Criteria 4 and 5 each contain one claim that does not hold at the stated block lengths.
//! They are reported as FAIL and listed in `KNOWN_FAILURES` with the exact failing checks;
//! the run errors if any other criterion fails or if a known failure changes shape.

use std::collections::BTreeSet;
use std::fs;
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use itertools::Itertools;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use stratcomm::info::{binary_entropy, rd_blahut_arimoto};
use stratcomm::model::Distribution;
use stratcomm::rational::{int, rat};
use stratcomm::utility::{gamma, UtilityMatrix};
use stratcomm_cli::commands::{example2, example2_checks, example3, example3_utility};
use stratcomm_cli::report::Report;
use stratcomm_cli::suites::SuiteRegistry;

type Outcome = Result<(bool, String, Vec<String>), String>;

struct Criterion {
    id: u8,
    name: &'static str,
    budget: Duration,
    run: fn() -> Outcome,
}

const KNOWN_FAILURES: &[(u8, &[&str])] = &[(4, &["strategic_decreasing_in_index"]), (5, &["reachable_image_rate_exceeds_bound"])];

fn from_report(r: &Report) -> Outcome {
    let failed: Vec<String> = r.failures().iter().map(|c| c.name.clone()).collect();
    let detail = if failed.is_empty() {
        format!("{} checks", r.checks.len())
    } else {
        r.failures().iter().map(|c| format!("{}: {}", c.name, c.detail)).join(" | ")
    };
    Ok((failed.is_empty(), detail, failed))
}

fn suite(name: &str) -> Outcome {
    let registry = SuiteRegistry::default();
    let s = registry.get(name).map_err(|e| e.to_string())?;
    from_report(&s.run().map_err(|e| e.to_string())?)
}

fn matrix(rows: &[&[i64]]) -> UtilityMatrix {
    UtilityMatrix::new(rows.iter().map(|r| r.iter().map(|&v| int(v)).collect()).collect()).expect("square")
}

/// Independent oracle: best sum over non-identity permutations, read straight from the rows.
fn oracle_gamma(rows: &[&[i64]]) -> i64 {
    let q = rows.len();
    (0..q)
        .permutations(q)
        .filter(|p| p.iter().enumerate().any(|(j, &i)| i != j))
        .map(|p| p.iter().enumerate().map(|(j, &i)| rows[i][j]).sum::<i64>())
        .max()
        .expect("q >= 2")
}

fn gamma_anchors() -> Outcome {
    let example1: &[&[i64]] = &[&[0, 1, 1], &[-4, 0, 1], &[-4, -4, 0]];
    let example3: &[&[i64]] = &[&[0, -2, -13, -18], &[1, 0, -13, -18], &[12, 1, 0, -18], &[5, 5, 5, 0]];
    let g1 = gamma(&matrix(example1)).map_err(|e| e.to_string())?.value;
    let g3 = gamma(&example3_utility()).map_err(|e| e.to_string())?.value;
    let (o1, o3) = (oracle_gamma(example1), oracle_gamma(example3));
    let ok = g1 == int(-2) && g3 == int(-1) && g1 == int(o1) && g3 == int(o3);
    Ok((ok, format!("example 1: {g1} (oracle {o1}), example 3: {g3} (oracle {o3})"), vec![]))
}

fn binary_reduction() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0xb1_2024);
    let mut bad = 0;
    for _ in 0..1000 {
        let mut r = || rat(rng.gen_range(-1000..=1000), rng.gen_range(1..=60));
        let (a, b) = (r(), r());
        let g = gamma(&UtilityMatrix::binary(a.clone(), b.clone())).map_err(|e| e.to_string())?.value;
        if g != a + b {
            bad += 1;
        }
    }
    Ok((bad == 0, format!("1000 random utilities, {bad} mismatches"), vec![]))
}

fn example2_reproduction() -> Outcome {
    let (_, rows) = example2("sequence,type").map_err(|e| e.to_string())?;
    from_report(&example2_checks(&rows))
}

fn example3_claims() -> Outcome {
    let report = example3(&rat(1, 400)).map_err(|e| e.to_string())?;
    from_report(&report.report)
}

fn blahut_arimoto() -> Outcome {
    let mut worst: f64 = 0.0;
    for p in [rat(1, 10), rat(1, 5), rat(3, 10), rat(2, 5), rat(1, 2)] {
        for d in [rat(0, 1), rat(1, 50), rat(1, 20), rat(1, 10), rat(3, 20), rat(1, 5)] {
            if d >= p {
                continue;
            }
            let src = Distribution::binary(p.clone()).map_err(|e| e.to_string())?;
            let ba = rd_blahut_arimoto(&src, &d, 1e-9).map_err(|e| e.to_string())?;
            let closed = binary_entropy(stratcomm::rational::to_f64(&p)) - binary_entropy(stratcomm::rational::to_f64(&d));
            worst = worst.max((ba - closed).abs());
        }
    }
    let uniform = Distribution::uniform(4).map_err(|e| e.to_string())?;
    for d in [rat(0, 1), rat(1, 20), rat(1, 10), rat(1, 4), rat(1, 2), rat(7, 10)] {
        let ba = rd_blahut_arimoto(&uniform, &d, 1e-9).map_err(|e| e.to_string())?;
        let df = stratcomm::rational::to_f64(&d);
        let closed = 2.0 - binary_entropy(df) - df * 3f64.log2();
        worst = worst.max((ba - closed).abs());
    }
    Ok((worst <= 1e-6, format!("largest deviation {worst:.3e}"), vec![]))
}

fn run_binary(args: &[&str], threads: &str) -> Result<Vec<u8>, String> {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let out = dir.path().join("out");
    Command::new(env!("CARGO_BIN_EXE_stratcomm"))
        .args(args)
        .args(["--threads", threads, "--out"])
        .arg(&out)
        .output()
        .map_err(|e| e.to_string())?;
    fs::read(&out).map_err(|e| format!("{args:?} with {threads} threads wrote nothing: {e}"))
}

fn determinism() -> Outcome {
    let mut differing = Vec::new();
    for args in [&["example2"][..], &["example3"][..]] {
        let one = run_binary(args, "1")?;
        let again = run_binary(args, "1")?;
        let eight = run_binary(args, "8")?;
        if one != again || one != eight {
            differing.push(args[0].to_string());
        }
    }
    let detail = if differing.is_empty() { "example2, example3 byte-identical across runs and thread counts".into() } else { format!("differs: {differing:?}") };
    Ok((differing.is_empty(), detail, vec![]))
}

fn criteria() -> Vec<Criterion> {
    let s = Duration::from_secs;
    vec![
        Criterion { id: 1, name: "gamma_anchors", budget: s(1), run: gamma_anchors },
        Criterion { id: 2, name: "binary_reduction", budget: s(1), run: binary_reduction },
        Criterion { id: 3, name: "dbar_anchors", budget: s(5), run: || suite("dbar_anchors") },
        Criterion { id: 4, name: "example2_reproduction", budget: s(30), run: example2_reproduction },
        Criterion { id: 5, name: "example3_claims", budget: s(120), run: example3_claims },
        Criterion { id: 6, name: "finite_length_positive_error", budget: s(120), run: || suite("theorem1") },
        Criterion { id: 7, name: "independent_set", budget: s(60), run: || suite("independent_set") },
        Criterion { id: 8, name: "biregular_identity", budget: s(120), run: || suite("biregular") },
        Criterion { id: 9, name: "no_positive_cycle", budget: s(60), run: || suite("no_positive_cycle") },
        Criterion { id: 10, name: "time_sharing", budget: s(30), run: || suite("time_share") },
        Criterion { id: 11, name: "blahut_arimoto_closed_forms", budget: s(10), run: blahut_arimoto },
        Criterion { id: 12, name: "determinism", budget: s(300), run: determinism },
    ]
}

fn main() -> ExitCode {
    let mut unexpected = Vec::new();
    for c in criteria() {
        let start = Instant::now();
        let outcome = (c.run)();
        let elapsed = start.elapsed();
        let known: Option<BTreeSet<String>> =
            KNOWN_FAILURES.iter().find(|(id, _)| *id == c.id).map(|(_, names)| names.iter().map(|n| n.to_string()).collect());
        let (passed, detail, failed) = match outcome {
            Ok(o) => o,
            Err(e) => (false, format!("error: {e}"), vec!["<error>".into()]),
        };
        let label = if passed { "PASS" } else { "FAIL" };
        let slow = if elapsed > c.budget { format!(" [over {}s budget]", c.budget.as_secs()) } else { String::new() };
        let note = if !passed && known.is_some() { " (known failure)" } else { "" };
        println!("{label} criterion {:>2} {}{note}: {detail} ({:.2}s){slow}", c.id, c.name, elapsed.as_secs_f64());
        let failed: BTreeSet<String> = failed.into_iter().collect();
        let as_expected = match known {
            Some(k) => !passed && failed == k,
            None => passed,
        };
        if !as_expected {
            unexpected.push(c.id);
        }
    }
    if unexpected.is_empty() {
        println!("acceptance: all criteria behaved as recorded");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: unexpected outcome for criteria {unexpected:?}");
        ExitCode::FAILURE
    }
}
