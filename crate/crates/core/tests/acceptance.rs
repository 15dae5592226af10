//! Acceptance suite: the twelve numerical claims at their stated sizes and
//! tolerances. Prints one PASS/FAIL line per criterion and exits nonzero if
//! any fails. Takes a few minutes; run alone with
//! `cargo test --release --test acceptance`.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use eulerlab::harness::{default_config, execute, ExperimentConfig, InitialKind, Outcome};

struct Verdict {
    passed: bool,
    detail: String,
}

fn run(cfg: &ExperimentConfig) -> (Result<Outcome, String>, Duration) {
    let start = Instant::now();
    let out = execute(cfg).map_err(|e| e.to_string());
    (out, start.elapsed())
}

fn describe(out: &Outcome) -> String {
    let failed: Vec<String> = out
        .checks
        .iter()
        .filter(|c| !c.passed)
        .map(|c| format!("{} = {:.3e} vs {:.3e}", c.name, c.value, c.limit))
        .collect();
    let bad_runs: Vec<String> =
        out.runs.iter().filter(|r| r.status != eulerlab::harness::RunStatus::Ok).map(|r| r.label.clone()).collect();
    if failed.is_empty() && bad_runs.is_empty() {
        let shown: Vec<String> = out
            .checks
            .iter()
            .filter(|c| c.limit != 1.0 || c.value != 1.0)
            .take(4)
            .map(|c| format!("{} = {:.3e}", c.name, c.value))
            .collect();
        format!("{} checks ok; {}", out.checks.len(), shown.join(", "))
    } else {
        format!("failed: {} {}", failed.join("; "), bad_runs.join(", "))
    }
}

/// Runs `cfg` and requires every check to pass within `budget`.
fn criterion(cfg: ExperimentConfig, budget: Option<Duration>) -> Verdict {
    let (out, took) = run(&cfg);
    match out {
        Err(e) => Verdict { passed: false, detail: format!("error: {e}") },
        Ok(out) => {
            let in_time = budget.is_none_or(|b| took <= b);
            let mut detail = describe(&out);
            detail.push_str(&format!(" [{:.1}s]", took.as_secs_f64()));
            if !in_time {
                detail.push_str(&format!(" over budget {:.0}s", budget.unwrap().as_secs_f64()));
            }
            Verdict { passed: out.passed() && in_time, detail }
        }
    }
}

fn named(name: &str) -> ExperimentConfig {
    default_config(name).expect("registered experiment")
}

fn c1() -> Verdict {
    let mut cfg = named("tg_stationarity");
    cfg.grid.n = 64;
    cfg.time.dt = 1e-3;
    cfg.time.t_end = 1.0;
    criterion(cfg, Some(Duration::from_secs(60)))
}

fn c2() -> Verdict {
    let mut cfg = named("ns_decay");
    cfg.scheme.nu = vec![0.1];
    cfg.time.t_end = 1.0;
    criterion(cfg, None)
}

fn c3() -> Verdict {
    let mut cfg = named("energy_conservation");
    cfg.grid.n = 64;
    cfg.time.t_end = 1.0;
    cfg.time.dt = 1e-3;
    criterion(cfg, None)
}

fn c4() -> Verdict {
    let budget = Duration::from_secs(600);
    let start = Instant::now();
    let tg = named("vanishing_viscosity");
    let mut random = tg.clone();
    random.initial.kind = InitialKind::Random;
    random.initial.band = 6;
    let a = criterion(tg, None);
    let b = criterion(random, None);
    let took = start.elapsed();
    Verdict {
        passed: a.passed && b.passed && took <= budget,
        detail: format!("taylor-green: {}; random: {}; total {:.1}s", a.detail, b.detail, took.as_secs_f64()),
    }
}

fn c5() -> Verdict {
    criterion(named("galerkin_convergence"), None)
}

fn c6() -> Verdict {
    criterion(named("weak_strong"), None)
}

fn c7() -> Verdict {
    let mut cfg = named("rlf_certification");
    cfg.flow.m = 128;
    cfg.time.t_end = 1.0;
    criterion(cfg, None)
}

fn c8() -> Verdict {
    criterion(named("transport"), None)
}

fn c9() -> Verdict {
    criterion(named("scalar_vanishing_diffusivity"), None)
}

fn c10() -> Verdict {
    criterion(named("flow_gronwall"), None)
}

fn c11() -> Verdict {
    let cfg = named("jensen_gap");
    assert_eq!(cfg.scheme.runs, 100);
    criterion(cfg, None)
}

fn c12() -> Verdict {
    let cfg = named("growth_calibration");
    assert_eq!((cfg.scheme.runs, cfg.scheme.holdout), (10, 20));
    criterion(cfg, None)
}

fn main() -> ExitCode {
    // `cargo test -- --list` and filters: this target has no sub-tests to list
    if std::env::args().any(|a| a == "--list") {
        println!("acceptance: test");
        return ExitCode::SUCCESS;
    }
    let criteria: [(&str, fn() -> Verdict); 12] = [
        ("1 stationarity", c1),
        ("2 navier-stokes closed form", c2),
        ("3 energy conservation", c3),
        ("4 vanishing viscosity", c4),
        ("5 galerkin convergence", c5),
        ("6 weak-strong inequality", c6),
        ("7 lagrangian flow certificate", c7),
        ("8 transport", c8),
        ("9 scalar vanishing diffusivity", c9),
        ("10 flow gronwall bound", c10),
        ("11 jensen gap", c11),
        ("12 growth-bound calibration", c12),
    ];
    let mut all = true;
    for (name, f) in criteria {
        let v = f();
        all &= v.passed;
        println!("{} criterion {name}: {}", if v.passed { "PASS" } else { "FAIL" }, v.detail);
    }
    if all {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
