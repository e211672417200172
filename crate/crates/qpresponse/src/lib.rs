//! Quasi-periodic response solutions of forced systems with degenerate
//! equilibria.
//!
//! For `x' = x^l + h(omega t, x) + eps f(omega t, x)` with `l >= 2` (so the
//! linearization at the origin vanishes), this crate computes response
//! solutions `x(t) = a + V(omega t)`: the constant `a` solves the algebraic
//! balance `a^l + eps f_bar(0) = 0` and the correction `V` is found as the
//! fixed point of a contraction built from the mode-by-mode inverse of
//! `L_a = omega . d_theta - l a^(l-1)`.  Variants cover zero-average
//! forcing (where the dominant part instead solves a small-divisor
//! cohomology equation and the fluctuation goes through a twisted-operator
//! inversion), damped second-order oscillators, states of dimension
//! `n > 1` with a homogeneous leading map, and analytic continuation of the
//! branch around `eps = 0`, which exhibits monodromy.
//!
//! Everything is spectral: functions on the torus are truncated Fourier
//! series ([`FourierSeries`]), products are exact truncated convolutions,
//! and all estimates use the weighted norms `H^{rho,m}` ([`NormParams`]).
//! Every solve returns a [`SolveReport`] carrying contraction diagnostics,
//! operator norms, convolution-tail sizes, and an independent time-domain
//! residual.
//!
//! ## Examples
//!
//! Each major capability has a runnable example:
//!
//! ```text
//! cargo run --example standard_response          # the basic cubic solve
//! cargo run --example branches_even_l            # two branches / sign obstruction
//! cargo run --example zero_average               # cohomology-dominated responses
//! cargo run --example oscillator                 # second-order damped variant
//! cargo run --example monodromy_loop             # eps around the origin, branch rotation
//! cargo run --example manufactured_check         # planted solutions + RK4 shadowing
//! cargo run --example scaling_laws               # |a|, ||L_a^-1||, ||V|| power laws
//! cargo run --example frequency_quality          # realized Diophantine constants
//! cargo run --example cohomology_small_divisors  # plain and twisted cohomology
//! cargo run --example two_dimensional            # n = 2 with a coupled cubic map
//! ```
//!
//! ## Command line
//!
//! The thin `qpr` binary drives the same pipelines from TOML problem files
//! (see `configs/`): `qpr solve`, `qpr sweep`, `qpr monodromy`,
//! `qpr check-frequency`, and `qpr verify`.  Exit codes are stable:
//! `0` success, `1` input error, `2` mathematical failure.

pub mod cli;
pub mod config;
pub mod error;
pub mod fourier;
pub mod operators;
pub mod problem;
pub mod report;
pub mod solver;
pub mod verify;

pub use error::{Error, Result};
pub use fourier::{FourierSeries, MultiIndex, NormParams};
pub use problem::{FourierTaylor, HomogeneousMap, ProblemSpec, SolveMode};
pub use solver::{
    contraction_solve, leading_term, leading_term_nd, monodromy_continuation, solve_oscillator,
    solve_response, solve_response_from, solve_zero_average, ContractionConfig, LeadingTerm,
    MonodromyReport, SolveReport,
};
pub use verify::{
    manufacture, manufacture_oscillator, residual_norm, rk4_shadow, scaling_study, ResidualReport,
    ScalingReport, ShadowReport,
};
