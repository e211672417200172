//! When the forcing average vanishes the response is no longer a wobbling
//! constant: the dominant part solves a cohomology equation and the
//! fluctuation comes from a twisted-operator fixed point.
//!
//!     cargo run --example zero_average

use num_complex::Complex64;
use qpresponse::{
    solve_zero_average, ContractionConfig, FourierTaylor, NormParams, ProblemSpec, SolveMode,
};

fn problem(l: u32, eps: f64) -> qpresponse::Result<ProblemSpec> {
    // f = cos theta + x: zero average at x = 0, linear slice g1 = 1
    let f = FourierTaylor::scalar(1)
        .with_cos(0, &[1], 1.0)
        .with_const(1, Complex64::new(1.0, 0.0));
    ProblemSpec::new(
        l,
        vec![1.0],
        Complex64::new(eps, 0.0),
        f,
        FourierTaylor::scalar(1),
        SolveMode::ZeroAverage,
    )
}

fn main() -> qpresponse::Result<()> {
    let norm = NormParams::new(0.1, 2.0)?;
    let cfg = ContractionConfig::default();

    println!("l = 3 (the generic case): x = eps V + U with V = sin theta");
    for eps in [1e-2, 1e-3] {
        let report = solve_zero_average(&problem(3, eps)?, 32, &norm, &cfg)?;
        let u_norm = report.u_norm.unwrap();
        println!(
            "  eps = {eps:.0e}: ||V|| = {:.6e}, ||U|| = {:.3e}, ||U||/eps^2 = {:.3}, residual = {:.3e}",
            report.v_norm,
            u_norm,
            u_norm / (eps * eps),
            report.residual.sup
        );
    }

    println!("\nl = 2 (quadratic case): the free average of V is shifted so");
    println!("the twisted operator stays uniformly invertible");
    let report = solve_zero_average(&problem(2, 1e-3)?, 32, &norm, &cfg)?;
    let vbar = report.v.scalar_average();
    println!(
        "  V_bar = {:+.3e}{:+.3e}i, |g1_bar + 2 V_bar| = {:.3}",
        vbar.re,
        vbar.im,
        (Complex64::new(1.0, 0.0) + vbar * 2.0).norm()
    );
    println!(
        "  ||U|| = {:.3e}, residual = {:.3e}",
        report.u_norm.unwrap(),
        report.residual.sup
    );
    Ok(())
}
