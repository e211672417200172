//! Two-dimensional state with a coupled homogeneous cubic leading map: the
//! leading term comes from a damped Newton solve of phi(a0) = -f_bar(0) and
//! the linear part is inverted block by block.
//!
//!     cargo run --example two_dimensional

use num_complex::Complex64;
use qpresponse::{
    solve_response, ContractionConfig, FourierTaylor, HomogeneousMap, NormParams, ProblemSpec,
    SolveMode,
};

fn main() -> qpresponse::Result<()> {
    // phi(x) = (x1^3 + 0.3 x1 x2^2, x2^3 + 0.3 x1^2 x2)
    let phi = HomogeneousMap::new(2, 3)
        .with_monomial(0, &[3, 0], 1.0)
        .with_monomial(0, &[1, 2], 0.3)
        .with_monomial(1, &[0, 3], 1.0)
        .with_monomial(1, &[2, 1], 0.3);
    let f = FourierTaylor::new(1, 2)
        .with_const_component(0, 0, Complex64::new(1.0, 0.0))
        .with_const_component(0, 1, Complex64::new(1.0, 0.0))
        .with_cos_component(0, &[1], 0, 0.05)
        .with_cos_component(0, &[1], 1, 0.04);
    let problem = ProblemSpec::new(
        3,
        vec![1.0],
        Complex64::new(1e-3, 0.0),
        f,
        FourierTaylor::new(1, 2),
        SolveMode::Response,
    )?
    .with_phi(phi)?;

    let norm = NormParams::new(0.1, 2.0)?;
    let report = solve_response(&problem, 16, &norm, &ContractionConfig::default())?;

    println!(
        "leading term a = ({:+.9e}, {:+.9e})",
        report.a[0].re, report.a[1].re
    );
    println!("spectral margin of Dphi(a): {:.3e}", report.mode_margin);
    println!(
        "block-inverse norm over the truncation: {:.6e}",
        report.operator_norm
    );
    println!("||V|| = {:.6e}", report.v_norm);
    println!("residual (sup) = {:.3e}", report.residual.sup);
    Ok(())
}
