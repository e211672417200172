//! Shared fixtures for the integration suites.

use num_complex::Complex64;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use qpresponse::{FourierSeries, FourierTaylor, MultiIndex, ProblemSpec, SolveMode};

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn golden() -> f64 {
    (5.0f64.sqrt() - 1.0) / 2.0
}

/// x' = x^l + eps (1 + 0.1 cos theta), the standard response fixture.
pub fn standard_problem(l: u32, eps: f64) -> ProblemSpec {
    let f = FourierTaylor::scalar(1)
        .with_const(0, c(1.0, 0.0))
        .with_cos(0, &[1], 0.1);
    ProblemSpec::new(
        l,
        vec![1.0],
        c(eps, 0.0),
        f,
        FourierTaylor::scalar(1),
        SolveMode::Response,
    )
    .unwrap()
}

/// x' = x^l + eps (cos theta + x), the zero-average fixture.
pub fn zero_average_problem(l: u32, eps: f64) -> ProblemSpec {
    let f = FourierTaylor::scalar(1)
        .with_cos(0, &[1], 1.0)
        .with_const(1, c(1.0, 0.0));
    ProblemSpec::new(
        l,
        vec![1.0],
        c(eps, 0.0),
        f,
        FourierTaylor::scalar(1),
        SolveMode::ZeroAverage,
    )
    .unwrap()
}

/// Random zero-average scalar series with exponentially decaying
/// coefficients supported on `|k|_inf <= mode_cap`.
pub fn random_zero_average(
    rng: &mut ChaCha8Rng,
    d: usize,
    trunc: i32,
    mode_cap: i32,
    decay: f64,
) -> FourierSeries {
    let mut modes = vec![MultiIndex::zero(d)];
    for axis in 0..d {
        let mut next = Vec::new();
        for m in &modes {
            for e in -mode_cap..=mode_cap {
                let mut v = m.entries().to_vec();
                v[axis] = e;
                next.push(MultiIndex::new(v));
            }
        }
        modes = next;
    }
    let mut s = FourierSeries::zeros(d, 1, trunc);
    for k in modes {
        if k.is_zero() {
            continue;
        }
        let amp = (-decay * k.euclid()).exp();
        let re = (rng.random::<f64>() - 0.5) * amp;
        let im = (rng.random::<f64>() - 0.5) * amp;
        let mut v = s.coeff(&k);
        v[0] += c(re, im);
        s.set_coeff(k, &v).unwrap();
    }
    s
}

pub fn pass(number: u32, name: &str) {
    println!("acceptance criterion {number:02} ({name}): PASS");
}
