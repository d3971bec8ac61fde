//! Acceptance criteria, one line each. Runs without the libtest harness so
//! the lines are always printed; exits non-zero when any criterion fails.

use std::process::{Command, ExitCode};
use std::time::Instant;

use radwave::suites::{run_suite, Check, Report, Suite, SuiteOptions};

struct Verdict {
    pass: bool,
    summary: String,
}

fn run(suite: Suite, n: Option<u32>) -> Report {
    let opts = SuiteOptions {
        n,
        ..Default::default()
    };
    run_suite(suite, &opts).unwrap_or_else(|e| panic!("{} suite rejected its defaults: {e}", suite.name()))
}

/// Verdict over the checks of `reports` whose names satisfy `keep`.
fn judge<'a>(reports: impl IntoIterator<Item = &'a Report>, keep: impl Fn(&Check) -> bool) -> Verdict {
    let checks: Vec<&Check> = reports.into_iter().flat_map(|r| &r.checks).filter(|c| keep(c)).collect();
    let failed: Vec<&&Check> = checks.iter().filter(|c| !c.passed()).collect();
    let summary = if checks.is_empty() {
        "no checks ran".to_string()
    } else if failed.is_empty() {
        format!("{} checks", checks.len())
    } else {
        let names: Vec<String> = failed
            .iter()
            .map(|c| format!("{} (measured {:e}, need {:?} {:e})", c.name, c.measured, c.relation, c.threshold))
            .collect();
        format!("{}/{} checks failed: {}", failed.len(), checks.len(), names.join("; "))
    };
    Verdict {
        pass: !checks.is_empty() && failed.is_empty(),
        summary,
    }
}

fn all(_: &Check) -> bool {
    true
}

fn representation() -> Verdict {
    judge(&[run(Suite::Representation, None)], all)
}

fn oracles() -> Verdict {
    judge(&[run(Suite::Oracle, None)], all)
}

fn residual(pde: &Report) -> Verdict {
    judge([pde], |c| c.name.ends_with("residual_order"))
}

fn initial_conditions(pde: &Report) -> Verdict {
    judge([pde], |c| c.name.contains("initial_"))
}

fn huygens() -> Verdict {
    judge(&[run(Suite::Huygens, None)], all)
}

fn kernels() -> Verdict {
    judge(&[run(Suite::Kernels, None), run(Suite::Polynomials, None)], all)
}

fn decay() -> Verdict {
    judge(&[run(Suite::Decay, None)], all)
}

fn lemmas() -> Verdict {
    judge(&[run(Suite::Lemmas, None), run(Suite::Majorants, None)], all)
}

fn determinism() -> Verdict {
    let exe = env!("CARGO_BIN_EXE_radwave");
    let verify = |seed: &str| {
        Command::new(exe)
            .args(["verify", "--suite", "kernels", "--n", "6", "--seed", seed])
            .output()
            .expect("run the radwave binary")
    };
    let (a, b, c) = (verify("11"), verify("11"), verify("12"));
    let identical = a.stdout == b.stdout && !a.stdout.is_empty();
    // Reports must depend on the seed, or the comparison proves nothing.
    let seeded = a.stdout != c.stdout;
    let in_process = {
        let opts = SuiteOptions {
            n: Some(5),
            seed: 3,
            points: Some(40),
        };
        let once = serde_json::to_vec(&run_suite(Suite::Representation, &opts).unwrap()).unwrap();
        let twice = serde_json::to_vec(&run_suite(Suite::Representation, &opts).unwrap()).unwrap();
        once == twice
    };
    Verdict {
        pass: identical && seeded && in_process,
        summary: format!(
            "CLI reports identical: {identical}; seed changes report: {seeded}; library reports identical: {in_process}"
        ),
    }
}

fn main() -> ExitCode {
    let mut failures = 0;
    let mut report = |id: u32, name: &str, f: &mut dyn FnMut() -> Verdict| {
        let start = Instant::now();
        let v = f();
        println!(
            "criterion {id} {name}: {} ({}; {:.1} s)",
            if v.pass { "PASS" } else { "FAIL" },
            v.summary,
            start.elapsed().as_secs_f64()
        );
        if !v.pass {
            failures += 1;
        }
    };
    let pde = run(Suite::Pde, None);
    report(1, "representation equivalence", &mut representation);
    report(2, "oracle agreement", &mut oracles);
    report(3, "PDE residual order", &mut || residual(&pde));
    report(4, "initial conditions", &mut || initial_conditions(&pde));
    report(5, "Huygens dichotomy", &mut huygens);
    report(6, "kernel identities", &mut kernels);
    report(7, "decay certification", &mut decay);
    report(8, "supporting estimates", &mut lemmas);
    report(9, "determinism", &mut determinism);
    if failures == 0 {
        println!("acceptance: all 9 criteria pass");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: {failures} of 9 criteria fail");
        ExitCode::FAILURE
    }
}
