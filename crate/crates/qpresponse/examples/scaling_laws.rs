//! Sweep epsilon over three decades and fit the power laws:
//! |a| ~ eps^(1/3), ||L_a^-1|| ~ eps^(-2/3), ||V|| ~ eps.
//!
//!     cargo run --example scaling_laws

use num_complex::Complex64;
use qpresponse::{
    scaling_study, ContractionConfig, FourierTaylor, NormParams, ProblemSpec, SolveMode,
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
    let report = scaling_study(
        &problem,
        &[1e-2, 1e-3, 1e-4],
        32,
        &norm,
        &ContractionConfig::default(),
    )?;

    println!("epsilon        |a|          op_norm      ||V||        residual");
    for r in &report.rows {
        println!(
            "{:.3e}   {:.6e} {:.6e} {:.6e} {:.3e}",
            r.epsilon, r.a_abs, r.op_norm, r.v_norm, r.residual_sup
        );
    }
    let fit = report.fit.expect("sweep converged");
    println!("\nfitted slopes (log-log):");
    println!("  |a|     ~ eps^{:+.10}  (exact: +1/3)", fit.slope_a);
    println!("  op_norm ~ eps^{:+.10}  (exact: -2/3)", fit.slope_op_norm);
    println!(
        "  ||V||   ~ eps^{:+.10}  (expected close to +1)",
        fit.slope_v
    );
    Ok(())
}
