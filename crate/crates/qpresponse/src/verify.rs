//! Independent verification: time-domain residuals on sampling grids,
//! manufactured solutions, shadowing against a one-step integrator, and
//! scaling-law fits.
//!
//! The residual is deliberately evaluated pointwise — the linear part
//! spectrally, the nonlinearity by plain arithmetic at each grid point — so
//! composition and truncation errors that mode-wise identities would hide
//! show up here.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fourier::{FourierSeries, MultiIndex, NormParams};
use crate::problem::{FourierTaylor, ProblemSpec, SolveMode};
use crate::solver::{solve_response, ContractionConfig};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EquationVariant {
    FirstOrder,
    SecondOrder,
    HigherDimensional,
}

impl EquationVariant {
    pub fn as_str(&self) -> &'static str {
        match self {
            EquationVariant::FirstOrder => "first_order",
            EquationVariant::SecondOrder => "second_order",
            EquationVariant::HigherDimensional => "n_dim",
        }
    }
}

#[derive(Clone, Copy, Debug)]
pub struct ResidualReport {
    pub sup: f64,
    pub l2: f64,
    pub samples: usize,
    pub variant: EquationVariant,
}

/// Evaluates the equation residual along `x(theta) = a + corr(theta)` on a
/// uniform grid of `grid_size^d` points.
///
/// For zero-average problems the caller passes `a = 0` and the assembled
/// correction `eps V + U`.
pub fn residual_norm(
    p: &ProblemSpec,
    a: &[Complex64],
    corr: &FourierSeries,
    grid_size: usize,
) -> Result<ResidualReport> {
    let d = p.dim_torus();
    let n = p.dim_state();
    if a.len() != n || corr.dim_target() != n {
        return Err(Error::DimensionMismatch(
            "residual: leading term / correction dimensions do not match the problem".into(),
        ));
    }
    let samples = grid_size.pow(d as u32);
    if samples < 64 {
        return Err(Error::InvalidInput(format!(
            "residual grid must contain at least 64 samples (got {samples})"
        )));
    }
    let variant = match p.mode() {
        SolveMode::Oscillator => EquationVariant::SecondOrder,
        _ if n > 1 => EquationVariant::HigherDimensional,
        _ => EquationVariant::FirstOrder,
    };

    let trunc = corr.truncation();
    let corr_grid = corr.evaluate_grid(grid_size);
    let d1 = corr.omega_derivative(p.omega())?;
    let d1_grid = d1.evaluate_grid(grid_size);
    let d2_grid = if variant == EquationVariant::SecondOrder {
        Some(d1.omega_derivative(p.omega())?.evaluate_grid(grid_size))
    } else {
        None
    };
    let delta = p.delta().unwrap_or(0.0);

    // grids of the forcing coefficient slices
    let f_slices = slice_grids(p.f(), trunc, grid_size)?;
    let h_slices = slice_grids(p.h(), trunc, grid_size)?;
    let eps = p.epsilon();

    let mut sup = 0.0f64;
    let mut sum_sq = 0.0f64;
    for pt in 0..samples {
        let x: Vec<Complex64> = (0..n).map(|i| a[i] + corr_grid[pt][i]).collect();
        // leading nonlinearity
        let lead: Vec<Complex64> = match (variant, p.phi()) {
            (EquationVariant::HigherDimensional, Some(phi)) => phi.eval(&x),
            _ => x.iter().map(|&xi| xi.powu(p.l())).collect(),
        };
        let mut r_sq = 0.0f64;
        for i in 0..n {
            let fv = eval_poly_at(&f_slices, pt, i, x[i]);
            let hv = eval_poly_at(&h_slices, pt, i, x[i]);
            let rhs = lead[i] + hv + eps * fv;
            let lhs = match variant {
                EquationVariant::SecondOrder => {
                    d2_grid.as_ref().unwrap()[pt][i] + d1_grid[pt][i] * delta
                }
                _ => d1_grid[pt][i],
            };
            r_sq += (lhs - rhs).norm_sqr();
        }
        let r = r_sq.sqrt();
        sup = sup.max(r);
        sum_sq += r_sq;
    }
    Ok(ResidualReport {
        sup,
        l2: (sum_sq / samples as f64).sqrt(),
        samples,
        variant,
    })
}

/// Grid values of every degree slice: `out[j][pt][component]`.
fn slice_grids(
    taylor: &FourierTaylor,
    trunc: i32,
    grid_size: usize,
) -> Result<Vec<Vec<Vec<Complex64>>>> {
    let mut out = Vec::new();
    if taylor.is_empty() {
        return Ok(out);
    }
    for j in 0..=taylor.max_degree() {
        let slice = taylor.degree_slice(j, trunc)?;
        out.push(slice.evaluate_grid(grid_size));
    }
    Ok(out)
}

fn eval_poly_at(slices: &[Vec<Vec<Complex64>>], pt: usize, comp: usize, x: Complex64) -> Complex64 {
    let mut acc = Complex64::ZERO;
    let mut xp = Complex64::new(1.0, 0.0);
    for grid in slices {
        acc += grid[pt][comp] * xp;
        xp *= x;
    }
    acc
}

/// Builds a problem whose exact solution is `x(t) = a_star + v_star(omega t)`
/// by solving for the forcing:
/// `F = omega.d_theta v_star - (a_star + v_star)^l`, with a degree-one
/// compensation term arranged so that `f_bar(0) = -a_star^l` exactly and the
/// real leading-term branch returns `a_star`.
pub fn manufacture(
    l: u32,
    omega: &[f64],
    a_star: f64,
    v_star: &FourierSeries,
) -> Result<ProblemSpec> {
    manufacture_impl(l, omega, None, a_star, v_star)
}

/// Second-order variant: plants the same solution into
/// `x'' + delta x' = x^l + eps f`.
pub fn manufacture_oscillator(
    l: u32,
    omega: &[f64],
    delta: f64,
    a_star: f64,
    v_star: &FourierSeries,
) -> Result<ProblemSpec> {
    manufacture_impl(l, omega, Some(delta), a_star, v_star)
}

fn manufacture_impl(
    l: u32,
    omega: &[f64],
    delta: Option<f64>,
    a_star: f64,
    v_star: &FourierSeries,
) -> Result<ProblemSpec> {
    if a_star == 0.0 || !a_star.is_finite() {
        return Err(Error::InvalidInput(
            "a_star must be real and nonzero".into(),
        ));
    }
    if v_star.dim_target() != 1 {
        return Err(Error::InvalidInput("v_star must be scalar".into()));
    }
    if v_star.dim_torus() != omega.len() {
        return Err(Error::DimensionMismatch(
            "v_star torus dimension does not match omega".into(),
        ));
    }
    let max_mode = v_star.modes().map(|(k, _)| k.inf_norm()).max().unwrap_or(0);
    let trunc = (l as i32 * max_mode).max(1);
    let v = v_star.with_truncation(trunc)?;
    let a = Complex64::new(a_star, 0.0);
    let base = v.add_scalar_constant(a)?;
    let lead = base.powi(l)?;
    let deriv = v.omega_derivative(omega)?;
    let forcing = match delta {
        None => deriv.sub(&lead)?,
        Some(dl) => {
            let second = deriv.omega_derivative(omega)?;
            second
                .add(&deriv.scale(Complex64::new(dl, 0.0)))?
                .sub(&lead)?
        }
    };
    // shift the x=0 average to exactly -a_star^l with a term q (x - a - V):
    // it vanishes on the planted solution and moves only f_bar(0)
    let fbar_target = -a.powu(l);
    let discrepancy = forcing.scalar_average() - fbar_target;
    let denom = a + v.scalar_average();
    if denom.norm() < 1e-12 {
        return Err(Error::InvalidInput(
            "a_star + average(v_star) too small for the compensation term".into(),
        ));
    }
    let q = discrepancy / denom;
    let degree0 = forcing.sub(&base.scale(q))?;

    let mut f = FourierTaylor::scalar(omega.len());
    for (k, c) in degree0.modes() {
        f.add_term(0, k.clone(), c)?;
    }
    if q.norm() > 0.0 {
        f.add_term(1, MultiIndex::zero(omega.len()), &[q])?;
    }
    let branch = if l.is_multiple_of(2) && a_star < 0.0 {
        1
    } else {
        0
    };
    let mode = if delta.is_some() {
        SolveMode::Oscillator
    } else {
        SolveMode::Response
    };
    let mut p = ProblemSpec::new(
        l,
        omega.to_vec(),
        Complex64::new(1.0, 0.0),
        f,
        FourierTaylor::scalar(omega.len()),
        mode,
    )?
    .with_branch(branch);
    if let Some(dl) = delta {
        p = p.with_delta(dl);
    }
    Ok(p)
}

#[derive(Clone, Copy, Debug)]
pub struct ShadowReport {
    /// Sup over the integration span of `|x_num(t) - (a + V(omega t))|`.
    pub sup_deviation: f64,
    /// Whether the stable direction was backward in time.
    pub backward: bool,
    pub steps: usize,
    pub max_local_error: f64,
}

/// Integrates the first-order equation with the classical fourth-order
/// one-step method from `x(0) = a + V(0)`, in the stable time direction
/// (forward if `Re(l a^(l-1)) < 0`, backward otherwise), and reports the
/// worst deviation from the quasi-periodic solution.
pub fn rk4_shadow(
    p: &ProblemSpec,
    a: Complex64,
    v: &FourierSeries,
    t_span: f64,
    dt: f64,
) -> Result<ShadowReport> {
    if p.dim_state() != 1 {
        return Err(Error::InvalidInput("shadowing requires n = 1".into()));
    }
    if p.mode() == SolveMode::Oscillator {
        return Err(Error::InvalidInput(
            "shadowing is defined for the first-order equation".into(),
        ));
    }
    if !(dt > 0.0 && t_span > 0.0) {
        return Err(Error::InvalidInput("t_span and dt must be positive".into()));
    }
    let l = p.l();
    let shift = Complex64::new(l as f64, 0.0) * a.powu(l - 1);
    let backward = shift.re >= 0.0;
    let dir = if backward { -1.0 } else { 1.0 };

    // flatten the forcing into (degree, k.omega, coefficient) terms
    let mut terms: Vec<(u32, f64, Complex64)> = Vec::new();
    for (j, k, c) in p.f().terms() {
        terms.push((j, k.dot(p.omega()), c[0] * p.epsilon()));
    }
    for (j, k, c) in p.h().terms() {
        terms.push((j, k.dot(p.omega()), c[0]));
    }
    let max_deg = terms.iter().map(|(j, _, _)| *j).max().unwrap_or(0).max(l);
    let rhs = |t: f64, x: Complex64| -> Complex64 {
        let mut powers = Vec::with_capacity(max_deg as usize + 1);
        let mut xp = Complex64::new(1.0, 0.0);
        for _ in 0..=max_deg {
            powers.push(xp);
            xp *= x;
        }
        let mut val = x.powu(l);
        for &(j, kw, c) in &terms {
            let phase = Complex64::from_polar(1.0, kw * t);
            val += c * phase * powers[j as usize];
        }
        val
    };
    let step = |t: f64, x: Complex64, h: f64| -> Complex64 {
        // d/ds x(t0 + dir s) = dir * rhs(t0 + dir s, x)
        let f1 = rhs(t, x) * dir;
        let f2 = rhs(t + dir * h / 2.0, x + f1 * (h / 2.0)) * dir;
        let f3 = rhs(t + dir * h / 2.0, x + f2 * (h / 2.0)) * dir;
        let f4 = rhs(t + dir * h, x + f3 * h) * dir;
        x + (f1 + f2 * 2.0 + f3 * 2.0 + f4) * (h / 6.0)
    };

    let theta0 = vec![0.0; p.dim_torus()];
    let mut x = a + v.evaluate_scalar_at(&theta0);
    let mut s = 0.0f64;
    let mut sup_dev = 0.0f64;
    let mut max_local = 0.0f64;
    let mut steps = 0usize;
    while s < t_span - 1e-12 {
        let h = dt.min(t_span - s);
        let t = dir * s;
        let full = step(t, x, h);
        let half = step(t, x, h / 2.0);
        let half2 = step(t + dir * h / 2.0, half, h / 2.0);
        let local = (full - half2).norm();
        max_local = max_local.max(local);
        if local > 1e-8 {
            return Err(Error::StepTooLarge(local));
        }
        x = full;
        s += h;
        steps += 1;
        let tau = dir * s;
        let theta: Vec<f64> = p.omega().iter().map(|w| w * tau).collect();
        let exact = a + v.evaluate_scalar_at(&theta);
        sup_dev = sup_dev.max((x - exact).norm());
    }
    Ok(ShadowReport {
        sup_deviation: sup_dev,
        backward,
        steps,
        max_local_error: max_local,
    })
}

#[derive(Clone, Copy, Debug)]
pub struct ScalingRow {
    pub epsilon: f64,
    pub a_abs: f64,
    pub op_norm: f64,
    pub v_norm: f64,
    pub residual_sup: f64,
}

#[derive(Clone, Debug)]
pub struct ScalingFit {
    pub slope_a: f64,
    pub slope_op_norm: f64,
    pub slope_v: f64,
    pub max_dev_a: f64,
    pub max_dev_op_norm: f64,
    pub max_dev_v: f64,
}

#[derive(Clone, Debug)]
pub struct ScalingReport {
    pub rows: Vec<ScalingRow>,
    pub fit: Option<ScalingFit>,
    /// Message of the solve that aborted the sweep, if any.
    pub failure: Option<String>,
}

impl ScalingReport {
    /// Delimited rows: `epsilon |a| op_norm v_norm residual`.
    pub fn table_string(&self) -> String {
        use std::fmt::Write as _;
        let mut out = String::new();
        out.push_str("# epsilon a_abs op_norm v_norm residual_sup\n");
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{:.16e} {:.16e} {:.16e} {:.16e} {:.16e}",
                r.epsilon, r.a_abs, r.op_norm, r.v_norm, r.residual_sup
            );
        }
        out
    }

    /// Delimited fit rows: `quantity slope max_dev`.
    pub fn fit_string(&self) -> String {
        use std::fmt::Write as _;
        let mut out = String::new();
        out.push_str("# quantity slope max_dev\n");
        if let Some(fit) = &self.fit {
            let _ = writeln!(out, "a_abs {:.16e} {:.16e}", fit.slope_a, fit.max_dev_a);
            let _ = writeln!(
                out,
                "op_norm {:.16e} {:.16e}",
                fit.slope_op_norm, fit.max_dev_op_norm
            );
            let _ = writeln!(out, "v_norm {:.16e} {:.16e}", fit.slope_v, fit.max_dev_v);
        }
        out
    }
}

/// Runs the response solve over an epsilon family and fits the log-log
/// slopes of `|a|`, the operator norm, and `||V||`.
///
/// Requires at least three epsilons spanning two decades.  A failing solve
/// aborts the sweep; the rows collected so far are returned alongside the
/// failure message.
pub fn scaling_study(
    p: &ProblemSpec,
    epsilons: &[f64],
    truncation: i32,
    norm: &NormParams,
    cfg: &ContractionConfig,
) -> Result<ScalingReport> {
    if epsilons.len() < 3 {
        return Err(Error::InvalidInput(format!(
            "scaling study needs at least 3 epsilon values (got {})",
            epsilons.len()
        )));
    }
    let mags: Vec<f64> = epsilons.iter().map(|e| e.abs()).collect();
    let span = mags.iter().cloned().fold(0.0, f64::max)
        / mags.iter().cloned().fold(f64::INFINITY, f64::min);
    if !span.is_finite() || span < 100.0 {
        return Err(Error::InvalidInput(
            "scaling study epsilons must span at least two decades".into(),
        ));
    }
    let mut rows = Vec::new();
    let mut failure = None;
    for &eps in epsilons {
        let pe = p.clone().with_epsilon(Complex64::new(eps, 0.0));
        match solve_response(&pe, truncation, norm, cfg) {
            Ok(report) => rows.push(ScalingRow {
                epsilon: eps,
                a_abs: report.a.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt(),
                op_norm: report.operator_norm,
                v_norm: report.v_norm,
                residual_sup: report.residual.sup,
            }),
            Err(e) => {
                failure = Some(format!("epsilon = {eps:.3e}: {e}"));
                break;
            }
        }
    }
    let fit = if failure.is_none() && rows.len() >= 3 {
        let xs: Vec<f64> = rows.iter().map(|r| r.epsilon.abs().ln()).collect();
        let (slope_a, max_dev_a) = fit_line(&xs, &log_of(&rows, |r| r.a_abs));
        let (slope_op, max_dev_op) = fit_line(&xs, &log_of(&rows, |r| r.op_norm));
        let (slope_v, max_dev_v) = fit_line(&xs, &log_of(&rows, |r| r.v_norm));
        Some(ScalingFit {
            slope_a,
            slope_op_norm: slope_op,
            slope_v,
            max_dev_a,
            max_dev_op_norm: max_dev_op,
            max_dev_v,
        })
    } else {
        None
    };
    Ok(ScalingReport { rows, fit, failure })
}

fn log_of(rows: &[ScalingRow], f: impl Fn(&ScalingRow) -> f64) -> Vec<f64> {
    rows.iter().map(|r| f(r).ln()).collect()
}

/// Least-squares slope and the largest residual of the fit.
pub fn fit_line(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let xbar = xs.iter().sum::<f64>() / n;
    let ybar = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - xbar) * (x - xbar)).sum();
    let sxy: f64 = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| (x - xbar) * (y - ybar))
        .sum();
    let slope = sxy / sxx;
    let max_dev = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| (y - (ybar + slope * (x - xbar))).abs())
        .fold(0.0, f64::max);
    (slope, max_dev)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solver::solve_response;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn norm_std() -> NormParams {
        NormParams::new(0.1, 2.0).unwrap()
    }

    #[test]
    fn manufactured_pair_has_tiny_residual() {
        let v_star = FourierSeries::cosine(1, 3, &[1], 0.01);
        let p = manufacture(3, &[1.0], -0.1, &v_star).unwrap();
        let v = v_star.with_truncation(3).unwrap();
        let r = residual_norm(&p, &[c(-0.1, 0.0)], &v, 256).unwrap();
        assert!(r.sup <= 1e-13, "pre-solve residual {}", r.sup);
        assert!((p.f_bar0()[0] - c(1e-3, 0.0)).norm() < 1e-16);
    }

    #[test]
    fn manufactured_recovery() {
        let v_star = FourierSeries::cosine(1, 3, &[1], 0.01);
        let p = manufacture(3, &[1.0], -0.1, &v_star).unwrap();
        let norm = norm_std();
        let report = solve_response(&p, 16, &norm, &ContractionConfig::default()).unwrap();
        assert!((report.a[0] - c(-0.1, 0.0)).norm() < 1e-12);
        let planted = v_star.with_truncation(16).unwrap();
        let err = report.v.sub(&planted).unwrap().sobolev_norm(&norm);
        assert!(err < 1e-10, "recovery error {err}");
    }

    #[test]
    fn manufactured_trivial_case() {
        let v_star = FourierSeries::zeros(1, 1, 1);
        let p = manufacture(3, &[1.0], -0.2, &v_star).unwrap();
        // forcing is the constant -a^l
        assert!((p.f_bar0()[0] - c(8e-3, 0.0)).norm() < 1e-17);
        let report = solve_response(&p, 8, &norm_std(), &ContractionConfig::default()).unwrap();
        assert!(report.v_norm < 1e-13);
        assert!((report.a[0] - c(-0.2, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn manufactured_oscillator_recovery() {
        let norm = norm_std();
        let v_star = FourierSeries::cosine(1, 3, &[1], 0.01);
        let p = manufacture_oscillator(3, &[1.0], 1.0, -0.1, &v_star).unwrap();
        // the planted pair solves the second-order equation to rounding
        let pre = residual_norm(&p, &[c(-0.1, 0.0)], &v_star, 256).unwrap();
        assert!(pre.sup <= 1e-13, "pre-solve residual {}", pre.sup);
        assert_eq!(pre.variant, EquationVariant::SecondOrder);
        let report =
            crate::solver::solve_oscillator(&p, 16, &norm, &ContractionConfig::default()).unwrap();
        assert!((report.a[0] - c(-0.1, 0.0)).norm() < 1e-12);
        let planted = v_star.with_truncation(16).unwrap();
        let err = report.v.sub(&planted).unwrap().sobolev_norm(&norm);
        assert!(err < 1e-10, "recovery error {err}");
    }

    #[test]
    fn residual_zero_for_equilibrium() {
        // a = 0, V = 0, f = 0, h = 0
        let p = ProblemSpec::new(
            2,
            vec![1.0],
            c(1.0, 0.0),
            FourierTaylor::scalar(1),
            FourierTaylor::scalar(1),
            SolveMode::ZeroAverage,
        )
        .unwrap();
        let zero = FourierSeries::zeros(1, 1, 4);
        let r = residual_norm(&p, &[Complex64::ZERO], &zero, 64).unwrap();
        assert_eq!(r.sup, 0.0);
        assert_eq!(r.samples, 64);
    }

    #[test]
    fn shadow_stable_direction_and_error() {
        let v_star = FourierSeries::cosine(1, 3, &[1], 0.01);
        let p = manufacture(3, &[1.0], -0.1, &v_star).unwrap();
        let v = v_star.with_truncation(3).unwrap();
        // l a^(l-1) = 0.03 > 0 forces backward integration
        let report = rk4_shadow(&p, c(-0.1, 0.0), &v, 50.0, 1e-3).unwrap();
        assert!(report.backward);
        assert!(report.sup_deviation <= 1e-6, "dev {}", report.sup_deviation);
    }

    #[test]
    fn shadow_equilibrium_is_exact_to_rounding() {
        let v_star = FourierSeries::zeros(1, 1, 1);
        let p = manufacture(3, &[1.0], -0.1, &v_star).unwrap();
        let v = v_star.with_truncation(1).unwrap();
        let report = rk4_shadow(&p, c(-0.1, 0.0), &v, 10.0, 1e-2).unwrap();
        assert!(report.sup_deviation < 1e-12);
    }

    #[test]
    fn shadow_error_scales_like_dt4() {
        // higher-frequency planted solution so the discretization error
        // dominates rounding at dt ~ 1e-2
        let v_star = FourierSeries::cosine(1, 15, &[5], 0.02);
        let p = manufacture(3, &[1.0], -0.1, &v_star).unwrap();
        let v = v_star.with_truncation(15).unwrap();
        let e1 = rk4_shadow(&p, c(-0.1, 0.0), &v, 20.0, 2e-2).unwrap();
        let e2 = rk4_shadow(&p, c(-0.1, 0.0), &v, 20.0, 1e-2).unwrap();
        let ratio = e1.sup_deviation / e2.sup_deviation;
        assert!(
            (12.0..=20.0).contains(&ratio),
            "ratio {ratio} (errors {} / {})",
            e1.sup_deviation,
            e2.sup_deviation
        );
    }

    #[test]
    fn scaling_slopes_match_closed_forms() {
        let f = FourierTaylor::scalar(1)
            .with_const(0, c(1.0, 0.0))
            .with_cos(0, &[1], 0.1);
        let p = ProblemSpec::new(
            3,
            vec![1.0],
            c(1e-3, 0.0),
            f,
            FourierTaylor::scalar(1),
            SolveMode::Response,
        )
        .unwrap();
        let report = scaling_study(
            &p,
            &[1e-2, 1e-3, 1e-4],
            32,
            &norm_std(),
            &ContractionConfig::default(),
        )
        .unwrap();
        assert!(report.failure.is_none());
        let fit = report.fit.unwrap();
        assert!(
            (fit.slope_a - 1.0 / 3.0).abs() < 1e-10,
            "slope {}",
            fit.slope_a
        );
        assert!(
            (fit.slope_op_norm - (-1.0 + 1.0 / 3.0)).abs() < 1e-6,
            "slope {}",
            fit.slope_op_norm
        );
        assert!(fit.slope_v >= 0.9, "slope {}", fit.slope_v);
    }

    #[test]
    fn scaling_preconditions() {
        let f = FourierTaylor::scalar(1).with_const(0, c(1.0, 0.0));
        let p = ProblemSpec::new(
            3,
            vec![1.0],
            c(1e-3, 0.0),
            f,
            FourierTaylor::scalar(1),
            SolveMode::Response,
        )
        .unwrap();
        let norm = norm_std();
        let cfg = ContractionConfig::default();
        assert!(scaling_study(&p, &[1e-2], 8, &norm, &cfg).is_err());
        assert!(scaling_study(&p, &[1e-2, 2e-2, 4e-2], 8, &norm, &cfg).is_err());
    }
}
