//! Solve the standard cubic problem x' = x^3 + eps (1 + 0.1 cos t) and print
//! the leading term, contraction diagnostics, and the time-domain residual.
//!
//!     cargo run --example standard_response

use num_complex::Complex64;
use qpresponse::{
    solve_response, ContractionConfig, FourierTaylor, NormParams, ProblemSpec, SolveMode,
};

fn main() -> qpresponse::Result<()> {
    let f = FourierTaylor::scalar(1)
        .with_const(0, Complex64::new(1.0, 0.0))
        .with_cos(0, &[1], 0.1);
    let problem = ProblemSpec::new(
        3,
        vec![1.0],
        Complex64::new(1e-3, 0.0),
        f,
        FourierTaylor::scalar(1),
        SolveMode::Response,
    )?;

    let norm = NormParams::new(0.1, 2.0)?;
    let report = solve_response(&problem, 32, &norm, &ContractionConfig::default())?;

    println!("leading term      a = {:+.12e}", report.a[0].re);
    println!("correction norm   ||V|| = {:.6e}", report.v_norm);
    println!("iterations        {}", report.iterations);
    println!("contraction       lambda_hat = {:.3e}", report.lambda_hat);
    println!(
        "operator norm     ||L_a^-1|| = {:.6e}",
        report.operator_norm
    );
    println!("residual (sup)    {:.3e}", report.residual.sup);
    println!("residual (L2)     {:.3e}", report.residual.l2);

    // the correction is tiny compared to the leading constant
    println!(
        "\n||V|| / |a| = {:.3e}  (the response is a slightly wobbling constant)",
        report.v_norm / report.a[0].norm()
    );
    Ok(())
}
