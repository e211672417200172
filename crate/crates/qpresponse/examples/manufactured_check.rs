//! Build a problem whose exact solution is known, recover it with the
//! solver, and shadow it with a Runge-Kutta integration in the stable time
//! direction.
//!
//!     cargo run --example manufactured_check

use num_complex::Complex64;
use qpresponse::{
    manufacture, residual_norm, rk4_shadow, solve_response, ContractionConfig, FourierSeries,
    NormParams,
};

fn main() -> qpresponse::Result<()> {
    let a_star = -0.1;
    let v_star = FourierSeries::cosine(1, 3, &[1], 0.01);
    let problem = manufacture(3, &[1.0], a_star, &v_star)?;

    // the planted pair solves the equation to rounding before any solve
    let pre = residual_norm(&problem, &[Complex64::new(a_star, 0.0)], &v_star, 256)?;
    println!("pre-solve residual of the planted pair: {:.3e}", pre.sup);

    let norm = NormParams::new(0.1, 2.0)?;
    let report = solve_response(&problem, 16, &norm, &ContractionConfig::default())?;
    let planted = v_star.with_truncation(16)?;
    let v_err = report.v.sub(&planted)?.sobolev_norm(&norm);
    println!(
        "recovered a = {:+.12e} (planted {a_star}), ||V - V*|| = {:.3e}",
        report.a[0].re, v_err
    );

    // l a^(l-1) > 0: the response repels forward orbits, so shadow backward
    let shadow = rk4_shadow(&problem, report.a[0], &report.v, 50.0, 1e-3)?;
    println!(
        "shadowing over t in [0, 50], dt = 1e-3 ({}): sup deviation {:.3e}",
        if shadow.backward {
            "backward"
        } else {
            "forward"
        },
        shadow.sup_deviation
    );
    Ok(())
}
