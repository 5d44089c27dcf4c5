//! Numerical acceptance criteria: one PASS/FAIL line each, nonzero exit on any failure.

use std::process::ExitCode;

use mudflow::selftest::{self, tol};

fn pinned() -> Vec<(&'static str, f64, f64)> {
    vec![
        ("multiplier off-diagonal", tol::MULTIPLIER_OFF_DIAGONAL, 1e-8),
        ("multiplier diagonal rel", tol::MULTIPLIER_DIAGONAL_REL, 1e-4),
        ("dispersion rel", tol::DISPERSION_REL, 0.02),
        ("mean drift", tol::MEAN_DRIFT, 1e-12),
        ("velocity mean", tol::VELOCITY_MEAN, 1e-8),
        ("elliptic abs", tol::ELLIPTIC_ABS, 1e-8),
        ("composition rel", tol::COMPOSITION_REL, 1e-5),
        ("equilibrium", tol::EQUILIBRIUM, 1e-12),
        ("growth rel", tol::GROWTH_REL, 0.05),
        ("newtonian mu_m", tol::NEWTONIAN_MU_M, 1e-10),
        ("derivative rel", tol::DERIVATIVE_REL, 1e-6),
        ("uniqueness", tol::UNIQUENESS, 1e-8),
        ("maximum principle", tol::MAX_PRINCIPLE, 1e-8),
    ]
}

fn main() -> ExitCode {
    let mut failed = 0;
    for (name, used, required) in pinned() {
        if used != required {
            println!("FAIL tolerance {name}: {used:e} differs from {required:e}");
            failed += 1;
        }
    }
    let results = selftest::run_all();
    for r in &results {
        println!("{r}");
    }
    failed += results.iter().filter(|r| !r.passed).count();
    println!("acceptance: {} criteria, {failed} failure(s)", results.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
