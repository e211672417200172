//! Measure realized Diophantine constants of a frequency vector: the
//! smallest |k.omega| weighted exponentially (gamma(eta)) or polynomially
//! (gamma(tau)) over the truncated mode cube.
//!
//!     cargo run --example frequency_quality

use qpresponse::operators::estimate_diophantine;

fn main() -> qpresponse::Result<()> {
    let golden = (5.0f64.sqrt() - 1.0) / 2.0;
    let omega = [1.0, golden];

    println!("omega = (1, (sqrt(5)-1)/2), the badly approximable benchmark\n");
    for trunc in [16, 32, 64] {
        let table = estimate_diophantine(&omega, trunc, &[0.05, 0.1], &[1.0, 2.0])?;
        println!("K = {trunc}:");
        for row in table.exponential.iter() {
            println!(
                "  gamma(eta = {:.2}) = {:.6e} at k = {}",
                row.exponent, row.gamma, row.argmin
            );
        }
        for row in table.polynomial.iter() {
            println!(
                "  gamma(tau = {:.1}) = {:.6e} at k = {}",
                row.exponent, row.gamma, row.argmin
            );
        }
    }
    println!("\nthe argmin modes are consecutive Fibonacci pairs: the");
    println!("continued-fraction convergents of the golden mean; gamma(tau = 1)");
    println!("stabilizes as K grows because the frequency is badly approximable");
    Ok(())
}
