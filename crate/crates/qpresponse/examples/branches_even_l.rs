//! For even degeneracy order the leading equation a^l = -eps f_bar(0) has
//! two real roots on one side of eps = 0 and none on the other.  Solve both
//! branches and show the sign obstruction.
//!
//!     cargo run --example branches_even_l

use num_complex::Complex64;
use qpresponse::{
    solve_response, ContractionConfig, FourierTaylor, NormParams, ProblemSpec, SolveMode,
};

fn problem(eps: f64, branch: usize) -> qpresponse::Result<ProblemSpec> {
    let f = FourierTaylor::scalar(1)
        .with_const(0, Complex64::new(1.0, 0.0))
        .with_cos(0, &[1], 0.1);
    Ok(ProblemSpec::new(
        2,
        vec![1.0],
        Complex64::new(eps, 0.0),
        f,
        FourierTaylor::scalar(1),
        SolveMode::Response,
    )?
    .with_branch(branch))
}

fn main() -> qpresponse::Result<()> {
    let norm = NormParams::new(0.1, 2.0)?;
    let cfg = ContractionConfig::default();

    println!("eps = -0.01: two real branches");
    for branch in 0..2 {
        let report = solve_response(&problem(-0.01, branch)?, 32, &norm, &cfg)?;
        println!(
            "  branch {branch}: a = {:+.6e}, ||V|| = {:.3e}, residual = {:.3e}",
            report.a[0].re, report.v_norm, report.residual.sup
        );
    }

    println!("\neps = +0.01: a^2 = -eps f_bar(0) < 0 has no real root");
    match solve_response(&problem(0.01, 0)?, 32, &norm, &cfg) {
        Err(e) => println!("  rejected as expected: {e}"),
        Ok(_) => println!("  unexpected success"),
    }
    Ok(())
}
