//! Damped second-order oscillator x'' + delta x' = x^3 + eps f: the same
//! contraction pipeline with the second-order multiplier
//! -(k w)^2 + i delta (k w) - l a^(l-1).
//!
//!     cargo run --example oscillator

use num_complex::Complex64;
use qpresponse::operators::make_oscillator_op;
use qpresponse::{
    solve_oscillator, ContractionConfig, FourierTaylor, NormParams, ProblemSpec, SolveMode,
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
        SolveMode::Oscillator,
    )?
    .with_delta(1.0);

    let norm = NormParams::new(0.1, 2.0)?;
    let report = solve_oscillator(&problem, 32, &norm, &ContractionConfig::default())?;

    println!("a = {:+.9e}", report.a[0].re);
    println!("||V|| = {:.6e}", report.v_norm);
    println!("second-order residual (sup) = {:.3e}", report.residual.sup);

    // the multiplier modulus is bounded below by l |a|^(l-1), attained at k = 0
    let op = make_oscillator_op(&[1.0], 3, report.a[0], 1.0, 64)?;
    println!(
        "min |L_k| over |k| <= 64: {:.9e} (l|a|^(l-1) = {:.9e}, attained at k = {})",
        op.min_modulus(),
        3.0 * report.a[0].norm_sqr(),
        op.argmin()
    );

    // heavy damping pushes the solution towards the first-order balance
    let heavy = solve_oscillator(
        &problem.clone().with_delta(100.0),
        32,
        &norm,
        &ContractionConfig::default(),
    )?;
    println!(
        "\ndelta = 100: ||V|| = {:.3e} (diagnostic only; compare {:.3e} at delta = 1)",
        heavy.v_norm, report.v_norm
    );
    Ok(())
}
