//! Drive eps once around the origin: the leading term rotates by 2 pi / l
//! and only returns to itself after l loops.  Inside the cone region
//! |Im eps| <= C |Re eps| the full correction is re-solved along the path.
//!
//!     cargo run --example monodromy_loop

use num_complex::Complex64;
use qpresponse::{
    monodromy_continuation, ContractionConfig, FourierTaylor, NormParams, ProblemSpec, SolveMode,
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
        SolveMode::Monodromy,
    )?;
    let norm = NormParams::new(0.1, 2.0)?;
    let cfg = ContractionConfig::default();

    for loops in 1..=3u32 {
        let report = monodromy_continuation(&problem, 16, &norm, &cfg, 1e-3, loops, 128, 0.5)?;
        let good = report.steps.iter().filter(|s| s.in_good_region).count();
        println!(
            "{loops} loop(s): a(end)/a(start) = {:+.9e}{:+.9e}i (arg = {:+.6}), {}/{} steps in the good region",
            report.ratio.re,
            report.ratio.im,
            report.ratio.arg(),
            good,
            report.steps.len()
        );
    }
    println!("\nafter l = 3 loops the branch closes up: that is the monodromy");
    Ok(())
}
