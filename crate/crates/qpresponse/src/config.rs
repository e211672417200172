//! Run configuration: TOML problem files.
//!
//! Frequencies may be given as plain numbers or as expressions from a small
//! whitelist (`"p/q"`, `"sqrt(n)"`, `"sqrt(n)/m"`, `"golden"`) so irrational
//! vectors are machine-exact to double precision.

use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde::Deserialize;

use crate::error::{Error, Result};
use crate::fourier::{MultiIndex, NormParams};
use crate::problem::{FourierTaylor, HomogeneousMap, ProblemSpec, SolveMode};
use crate::solver::ContractionConfig;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    problem: RawProblem,
    numerics: RawNumerics,
    #[serde(default)]
    output: RawOutput,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawProblem {
    l: u32,
    #[serde(default)]
    n: Option<usize>,
    omega: Vec<FreqExpr>,
    epsilon: EpsilonSpec,
    #[serde(default)]
    mode: Option<String>,
    #[serde(default)]
    delta: Option<f64>,
    #[serde(default)]
    branch: Option<usize>,
    #[serde(default)]
    real_branch: Option<bool>,
    #[serde(default)]
    a0_guess: Option<Vec<f64>>,
    f: RawTaylor,
    #[serde(default)]
    h: Option<RawTaylor>,
    #[serde(default)]
    phi: Option<RawPhi>,
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum FreqExpr {
    Number(f64),
    Expr(String),
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum EpsilonSpec {
    Real(f64),
    Pair([f64; 2]),
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTaylor {
    #[serde(default)]
    terms: Vec<RawTerm>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTerm {
    degree: u32,
    mode: Vec<i32>,
    #[serde(default)]
    re: f64,
    #[serde(default)]
    im: f64,
    #[serde(default)]
    component: usize,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPhi {
    degree: u32,
    monomials: Vec<RawMonomial>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawMonomial {
    component: usize,
    exponents: Vec<u32>,
    coeff: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawNumerics {
    truncation: i32,
    rho: f64,
    m: f64,
    #[serde(default)]
    ball_factor: Option<f64>,
    #[serde(default)]
    tol_step: Option<f64>,
    #[serde(default)]
    max_iter: Option<usize>,
    #[serde(default)]
    retry_halvings: Option<usize>,
    #[serde(default)]
    grid_size: Option<usize>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawOutput {
    #[serde(default)]
    dir: Option<String>,
}

/// Parsed and validated run configuration.
#[derive(Clone, Debug)]
pub struct RunConfig {
    pub problem: ProblemSpec,
    pub truncation: i32,
    pub norm: NormParams,
    pub contraction: ContractionConfig,
    pub grid_size: usize,
    pub out_dir: Option<PathBuf>,
}

/// Whitelisted frequency expressions.
pub fn parse_frequency(expr: &str) -> Result<f64> {
    let s = expr.trim();
    let bad = |msg: &str| {
        Error::Config(format!(
            "frequency expression '{expr}': {msg} (allowed: numbers, 'p/q', 'sqrt(n)', 'sqrt(n)/m', 'golden')"
        ))
    };
    let (neg, s) = match s.strip_prefix('-') {
        Some(rest) => (true, rest.trim()),
        None => (false, s),
    };
    let value = if s == "golden" {
        (5.0f64.sqrt() - 1.0) / 2.0
    } else {
        let (head, denom) = match s.split_once('/') {
            Some((h, d)) => {
                let q: f64 = d
                    .trim()
                    .parse::<u64>()
                    .map_err(|_| bad("denominator must be a positive integer"))?
                    as f64;
                if q == 0.0 {
                    return Err(bad("denominator must be nonzero"));
                }
                (h.trim(), q)
            }
            None => (s, 1.0),
        };
        let num = if let Some(inner) = head.strip_prefix("sqrt(").and_then(|r| r.strip_suffix(')'))
        {
            let n: u64 = inner
                .trim()
                .parse()
                .map_err(|_| bad("sqrt argument must be a nonnegative integer"))?;
            (n as f64).sqrt()
        } else {
            head.parse::<f64>().map_err(|_| bad("not a number"))?
        };
        num / denom
    };
    let value = if neg { -value } else { value };
    if !value.is_finite() {
        return Err(bad("does not evaluate to a finite number"));
    }
    Ok(value)
}

/// Size caps keeping dense convolutions (cost ~ K^(2d)) under control.
pub fn enforce_size_caps(d: usize, n: usize, truncation: i32) -> Result<()> {
    if d == 0 || d > 4 {
        return Err(Error::Config(format!(
            "torus dimension d = {d} outside 1..=4"
        )));
    }
    if n == 0 || n > 8 {
        return Err(Error::Config(format!(
            "state dimension n = {n} outside 1..=8"
        )));
    }
    let cap = match d {
        1 => 256,
        2 => 64,
        _ => 16,
    };
    if truncation < 1 || truncation > cap {
        return Err(Error::Config(format!(
            "truncation K = {truncation} outside 1..={cap} for d = {d}"
        )));
    }
    Ok(())
}

fn build_taylor(raw: &RawTaylor, d: usize, n: usize, what: &str) -> Result<FourierTaylor> {
    let mut t = FourierTaylor::new(d, n);
    for (i, term) in raw.terms.iter().enumerate() {
        if term.mode.len() != d {
            return Err(Error::Config(format!(
                "{what}.terms[{i}]: mode has {} entries, torus dimension is {d}",
                term.mode.len()
            )));
        }
        if term.component >= n {
            return Err(Error::Config(format!(
                "{what}.terms[{i}]: component {} out of range (n = {n})",
                term.component
            )));
        }
        let mut block = vec![Complex64::ZERO; n];
        block[term.component] = Complex64::new(term.re, term.im);
        t.add_term(term.degree, MultiIndex::new(term.mode.clone()), &block)
            .map_err(|e| Error::Config(format!("{what}.terms[{i}]: {e}")))?;
    }
    Ok(t)
}

pub fn parse_config(text: &str) -> Result<RunConfig> {
    let raw: RawConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
    let d = raw.problem.omega.len();
    let n = raw.problem.n.unwrap_or(1);
    enforce_size_caps(d, n, raw.numerics.truncation)?;

    let mut omega = Vec::with_capacity(d);
    for entry in &raw.problem.omega {
        omega.push(match entry {
            FreqExpr::Number(x) => *x,
            FreqExpr::Expr(s) => parse_frequency(s)?,
        });
    }
    let epsilon = match raw.problem.epsilon {
        EpsilonSpec::Real(x) => Complex64::new(x, 0.0),
        EpsilonSpec::Pair([re, im]) => Complex64::new(re, im),
    };
    let mode = match raw.problem.mode.as_deref().unwrap_or("response") {
        "response" => SolveMode::Response,
        "zero_average" => SolveMode::ZeroAverage,
        "oscillator" => SolveMode::Oscillator,
        "monodromy" => SolveMode::Monodromy,
        other => {
            return Err(Error::Config(format!(
                "problem.mode '{other}' is not one of response, zero_average, oscillator, monodromy"
            )))
        }
    };
    let f = build_taylor(&raw.problem.f, d, n, "problem.f")?;
    let h = match &raw.problem.h {
        Some(h) => build_taylor(h, d, n, "problem.h")?,
        None => FourierTaylor::new(d, n),
    };
    let mut problem = ProblemSpec::new(raw.problem.l, omega, epsilon, f, h, mode)
        .map_err(|e| Error::Config(format!("problem: {e}")))?;
    if let Some(delta) = raw.problem.delta {
        problem = problem.with_delta(delta);
    }
    if let Some(phi_raw) = &raw.problem.phi {
        let mut phi = HomogeneousMap::new(n, phi_raw.degree);
        for (i, m) in phi_raw.monomials.iter().enumerate() {
            phi.add_monomial(m.component, &m.exponents, m.coeff)
                .map_err(|e| Error::Config(format!("problem.phi.monomials[{i}]: {e}")))?;
        }
        problem = problem
            .with_phi(phi)
            .map_err(|e| Error::Config(format!("problem.phi: {e}")))?;
    }
    if let Some(b) = raw.problem.branch {
        problem = problem.with_branch(b);
    }
    if let Some(r) = raw.problem.real_branch {
        problem = problem.with_real_branch(r);
    }
    if let Some(g) = raw.problem.a0_guess.clone() {
        problem = problem.with_a0_guess(g);
    }

    let norm = NormParams::new(raw.numerics.rho, raw.numerics.m)
        .map_err(|e| Error::Config(format!("numerics: {e}")))?;
    let defaults = ContractionConfig::default();
    let contraction = ContractionConfig {
        ball_factor: raw.numerics.ball_factor.unwrap_or(defaults.ball_factor),
        tol_step: raw.numerics.tol_step.unwrap_or(defaults.tol_step),
        max_iter: raw.numerics.max_iter.unwrap_or(defaults.max_iter),
        retry_halvings: raw
            .numerics
            .retry_halvings
            .unwrap_or(defaults.retry_halvings),
    };
    let grid_size = raw
        .numerics
        .grid_size
        .unwrap_or_else(|| crate::solver::default_grid(d));
    if grid_size.pow(d as u32) < 64 {
        return Err(Error::Config(format!(
            "numerics.grid_size = {grid_size} gives fewer than 64 residual samples"
        )));
    }
    Ok(RunConfig {
        problem,
        truncation: raw.numerics.truncation,
        norm,
        contraction,
        grid_size,
        out_dir: raw.output.dir.map(PathBuf::from),
    })
}

pub fn load_config(path: &Path) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Config(format!("cannot read config {}: {e}", path.display())))?;
    parse_config(&text)
}
