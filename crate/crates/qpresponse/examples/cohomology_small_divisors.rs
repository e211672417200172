//! Solve the cohomology equation omega . dV/dtheta = f for a two-frequency
//! forcing and watch the small divisors at work, including the twisted
//! variant (omega . d + beta + w) V = f solved by an integrating factor.
//!
//!     cargo run --example cohomology_small_divisors

use num_complex::Complex64;
use qpresponse::operators::{solve_cohomology, TwistedOperator};
use qpresponse::{FourierSeries, MultiIndex, NormParams};

fn main() -> qpresponse::Result<()> {
    let golden = (5.0f64.sqrt() - 1.0) / 2.0;
    let omega = [1.0, golden];
    let trunc = 32;

    // forcing concentrated on a near-resonant mode pair
    let f = FourierSeries::cosine(2, trunc, &[13, -21], 1.0);
    let sol = solve_cohomology(&omega, &f)?;
    println!(
        "smallest divisor over |k| <= {trunc}: |k.omega| = {:.6e} at k = {}",
        sol.min_divisor, sol.argmin
    );
    let amp = sol
        .solution
        .scalar_coeff(&MultiIndex::new(vec![13, -21]))
        .norm();
    println!("forcing amplitude 0.5 at (13,-21) is amplified to {amp:.3}");

    let params = NormParams::new(0.0, 1.0)?;
    println!(
        "||f|| = {:.3}, ||V|| = {:.3}",
        f.sobolev_norm(&params),
        sol.solution.sobolev_norm(&params)
    );

    // twisted solve: the zero-order term beta keeps the k = 0 mode invertible
    let w = FourierSeries::sine(2, trunc, &[1, 0], 0.2);
    let op = TwistedOperator::new(&omega, Complex64::new(0.5, 0.0), &w)?;
    let rhs = FourierSeries::cosine(2, trunc, &[1, -1], 1.0)
        .add_scalar_constant(Complex64::new(0.3, 0.0))?;
    let v = op.apply_inverse(&rhs)?;
    let back = op.apply_forward(&v, &w)?;
    let err = back.sub(&rhs)?.max_coeff_norm();
    println!("\ntwisted solve round-trip error: {err:.3e}");
    Ok(())
}
