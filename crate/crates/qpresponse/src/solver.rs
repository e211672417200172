//! The constructive pipelines.
//!
//! Every solve follows the same pattern: pick the leading constant from the
//! algebraic equation, invert the dominant linear operator mode by mode, and
//! run the correction as a fixed-point iteration whose contraction behaviour
//! is measured rather than assumed.  The three pipelines differ only in the
//! operator that is inverted and in the right-hand side assembled at each
//! step.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fourier::{FourierSeries, NormParams};
use crate::operators::{
    estimate_diophantine, make_l_a, make_l_a_nd, make_oscillator_op, solve_cohomology,
    DiagonalOperator, TwistedOperator,
};
use crate::problem::{s_remainder_with_tail, ProblemSpec, SolveMode};
use crate::verify::{residual_norm, ResidualReport};

/// Leading constant `a` with `a^l + eps f_bar(0) = 0` (or
/// `phi(a) = -eps f_bar(0)` for `n > 1`).
#[derive(Clone, Debug)]
pub struct LeadingTerm {
    pub a: Vec<Complex64>,
    /// Root branch in the principal-argument convention
    /// `a = r^(1/l) exp(i (Arg(-eps f_bar0) + 2 pi branch) / l)`.
    pub branch_index: usize,
    /// `|Re(l a^(l-1))|` for `n = 1`, spectral margin of `Dphi(a)` otherwise.
    pub mode_margin: f64,
}

impl LeadingTerm {
    pub fn a_scalar(&self) -> Complex64 {
        self.a[0]
    }

    pub fn a_norm(&self) -> f64 {
        self.a.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
    }
}

/// Controls of the fixed-point iteration.
#[derive(Clone, Copy, Debug)]
pub struct ContractionConfig {
    /// Initial ball radius as a fraction of the leading-term size.
    pub ball_factor: f64,
    /// Relative step-norm tolerance for convergence.
    pub tol_step: f64,
    pub max_iter: usize,
    /// Ball halvings attempted before giving up.
    pub retry_halvings: usize,
}

impl Default for ContractionConfig {
    fn default() -> Self {
        ContractionConfig {
            ball_factor: 0.5,
            tol_step: 1e-12,
            max_iter: 200,
            retry_halvings: 6,
        }
    }
}

impl ContractionConfig {
    fn validate(&self) -> Result<()> {
        if !(self.ball_factor > 0.0 && self.ball_factor <= 1.0) {
            return Err(Error::InvalidInput("ball_factor must lie in (0, 1]".into()));
        }
        if self.tol_step <= 0.0 {
            return Err(Error::InvalidInput("tol_step must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct ContractionDiagnostics {
    pub iterations: usize,
    pub step_norms: Vec<f64>,
    /// Empirical contraction factor: max ratio of consecutive step norms
    /// after the third iteration.
    pub lambda_hat: f64,
    pub final_radius: f64,
    pub halvings: usize,
}

/// Iterates `V_{j+1} = T(V_j)` from `v0` until the relative step norm drops
/// below `tol_step`.  An iterate escaping the current ball aborts the pass;
/// the radius is halved and the iteration restarted, up to
/// `retry_halvings` times.
pub fn contraction_solve<T>(
    map: T,
    v0: &FourierSeries,
    radius: f64,
    norm: &NormParams,
    cfg: &ContractionConfig,
) -> Result<(FourierSeries, ContractionDiagnostics)>
where
    T: Fn(&FourierSeries) -> Result<FourierSeries>,
{
    cfg.validate()?;
    let mut r = radius;
    let mut halvings = 0usize;
    loop {
        let mut v = v0.clone();
        let mut steps: Vec<f64> = Vec::new();
        let mut escaped = false;
        for _ in 0..cfg.max_iter {
            let next = map(&v)?;
            let step = next.sub(&v)?.sobolev_norm(norm);
            let next_norm = next.sobolev_norm(norm);
            steps.push(step);
            if next_norm > r {
                escaped = true;
                break;
            }
            if step <= cfg.tol_step * next_norm || step == 0.0 {
                let lambda_hat = lambda_from_steps(&steps);
                return Ok((
                    next,
                    ContractionDiagnostics {
                        iterations: steps.len(),
                        step_norms: steps,
                        lambda_hat,
                        final_radius: r,
                        halvings,
                    },
                ));
            }
            v = next;
        }
        if !escaped {
            return Err(Error::MaxIterExceeded(cfg.max_iter));
        }
        if halvings >= cfg.retry_halvings {
            return Err(Error::NoContraction { halvings });
        }
        halvings += 1;
        r *= 0.5;
    }
}

fn lambda_from_steps(steps: &[f64]) -> f64 {
    let mut lambda: f64 = 0.0;
    for j in 3..steps.len() {
        if steps[j - 1] > 0.0 {
            lambda = lambda.max(steps[j] / steps[j - 1]);
        }
    }
    lambda
}

/// Solves `a^l = -eps f_bar0` on the requested branch.
///
/// In real mode the branch indexes the list of real roots (positive root
/// first for even `l`); the reported `branch_index` is always the
/// principal-argument branch of the chosen root.
pub fn leading_term(
    l: u32,
    epsilon: Complex64,
    fbar0: Complex64,
    branch: usize,
    real_only: bool,
) -> Result<LeadingTerm> {
    if epsilon.norm() == 0.0 {
        return Err(Error::InvalidInput("epsilon must be nonzero".into()));
    }
    if fbar0.norm() == 0.0 {
        return Err(Error::InvalidInput(
            "f_bar(0) must be nonzero (zero_average mode handles the other case)".into(),
        ));
    }
    let w = -epsilon * fbar0;
    let r = w.norm().powf(1.0 / l as f64);
    let base_arg = w.arg();
    let root = |b: usize| -> Complex64 {
        let ang = (base_arg + 2.0 * std::f64::consts::PI * b as f64) / l as f64;
        Complex64::from_polar(r, ang)
    };
    let (a, branch_index) = if real_only {
        let prod = epsilon * fbar0;
        if prod.im.abs() > 1e-13 * prod.norm() {
            return Err(Error::NoRealBranch(
                "eps * f_bar(0) is not real; disable the real branch restriction".into(),
            ));
        }
        let s = prod.re;
        if l.is_multiple_of(2) {
            if s > 0.0 {
                return Err(Error::NoRealBranch(format!(
                    "l = {l} even and eps * f_bar(0) = {s:.3e} > 0: a^l = -eps f_bar(0) has no real root"
                )));
            }
            // two real roots +-r
            match branch {
                0 => (Complex64::new(r, 0.0), 0),
                1 => (Complex64::new(-r, 0.0), (l / 2) as usize),
                _ => {
                    return Err(Error::InvalidInput(format!(
                        "even l has two real branches, requested branch {branch}"
                    )))
                }
            }
        } else {
            if branch > 0 {
                return Err(Error::InvalidInput(format!(
                    "odd l has a single real branch, requested branch {branch}"
                )));
            }
            if s < 0.0 {
                (Complex64::new(r, 0.0), 0)
            } else {
                (Complex64::new(-r, 0.0), ((l - 1) / 2) as usize)
            }
        }
    } else {
        if branch >= l as usize {
            return Err(Error::InvalidInput(format!(
                "branch must lie in [0, {l}), requested {branch}"
            )));
        }
        (root(branch), branch)
    };
    // residual of the algebraic equation
    let defect = (a.powu(l) + epsilon * fbar0).norm();
    let scale = (epsilon * fbar0).norm().max(a.norm().powi(l as i32));
    if defect > 1e-13 * scale {
        return Err(Error::InvalidInput(format!(
            "leading-term root residual {defect:.3e} exceeds tolerance"
        )));
    }
    let margin = (Complex64::new(l as f64, 0.0) * a.powu(l - 1)).re.abs();
    Ok(LeadingTerm {
        a: vec![a],
        branch_index,
        mode_margin: margin,
    })
}

/// All `l` complex roots of `a^l = -eps f_bar0`, in branch order.
pub fn leading_roots(l: u32, epsilon: Complex64, fbar0: Complex64) -> Vec<Complex64> {
    let w = -epsilon * fbar0;
    let r = w.norm().powf(1.0 / l as f64);
    let base = w.arg();
    (0..l)
        .map(|b| {
            Complex64::from_polar(r, (base + 2.0 * std::f64::consts::PI * b as f64) / l as f64)
        })
        .collect()
}

/// Damped Newton solve of `phi(a0) = -sign(eps) f_bar0` followed by the
/// scaling `a = |eps|^(1/l) a0`.
pub fn leading_term_nd(
    phi: &crate::problem::HomogeneousMap,
    epsilon: f64,
    fbar0: &[Complex64],
    a0_guess: &[Complex64],
) -> Result<LeadingTerm> {
    use nalgebra::DVector;
    if epsilon == 0.0 {
        return Err(Error::InvalidInput("epsilon must be nonzero".into()));
    }
    let n = phi.dim();
    if fbar0.len() != n || a0_guess.len() != n {
        return Err(Error::DimensionMismatch(
            "f_bar0 / guess dimension does not match phi".into(),
        ));
    }
    let sign = if epsilon > 0.0 { 1.0 } else { -1.0 };
    let target: Vec<Complex64> = fbar0.iter().map(|&c| -c * sign).collect();
    let tnorm: f64 = target.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
    let mut a0 = a0_guess.to_vec();
    let res = |x: &[Complex64]| -> DVector<Complex64> {
        let val = phi.eval(x);
        DVector::from_iterator(n, val.iter().zip(&target).map(|(v, t)| v - t))
    };
    let mut current = res(&a0);
    let mut converged = false;
    for _ in 0..50 {
        if current.norm() <= 1e-12 * tnorm.max(1.0) {
            converged = true;
            break;
        }
        let jac = phi.jacobian(&a0);
        let delta = jac
            .lu()
            .solve(&current)
            .ok_or_else(|| Error::NewtonDiverged("singular Jacobian".into()))?;
        let mut lambda = 1.0f64;
        loop {
            let trial: Vec<Complex64> = a0
                .iter()
                .zip(delta.iter())
                .map(|(x, d)| x - d * Complex64::new(lambda, 0.0))
                .collect();
            let trial_res = res(&trial);
            if trial_res.norm() < current.norm() || lambda < 1e-4 {
                a0 = trial;
                current = trial_res;
                break;
            }
            lambda *= 0.5;
        }
    }
    if !converged && current.norm() > 1e-12 * tnorm.max(1.0) {
        return Err(Error::NewtonDiverged(format!(
            "residual {:.3e} after 50 damped steps",
            current.norm()
        )));
    }
    // spectrum of Dphi(a0) must stay away from the imaginary axis
    let jac0 = phi.jacobian(&a0);
    let margin0 = spectral_margin_of(&jac0);
    if margin0 <= 1e-10 {
        return Err(Error::SpectrumOnAxis(margin0));
    }
    let s = epsilon.abs().powf(1.0 / phi.degree() as f64);
    let a: Vec<Complex64> = a0.iter().map(|&x| x * s).collect();
    let margin = spectral_margin_of(&phi.jacobian(&a));
    Ok(LeadingTerm {
        a,
        branch_index: 0,
        mode_margin: margin,
    })
}

fn spectral_margin_of(m: &nalgebra::DMatrix<Complex64>) -> f64 {
    let n = m.nrows();
    let mut real = nalgebra::DMatrix::<f64>::zeros(2 * n, 2 * n);
    for i in 0..n {
        for j in 0..n {
            real[(i, j)] = m[(i, j)].re;
            real[(i, j + n)] = -m[(i, j)].im;
            real[(i + n, j)] = m[(i, j)].im;
            real[(i + n, j + n)] = m[(i, j)].re;
        }
    }
    real.complex_eigenvalues()
        .iter()
        .map(|e| e.re.abs())
        .fold(f64::INFINITY, f64::min)
}

/// Outcome of one solve: the solution data plus every diagnostic the
/// iteration produced.
#[derive(Clone, Debug)]
pub struct SolveReport {
    pub mode: SolveMode,
    pub a: Vec<Complex64>,
    pub branch_index: usize,
    pub mode_margin: f64,
    /// Correction `V` (for zero-average mode: the dominant cohomology
    /// solution, including the adjusted average).
    pub v: FourierSeries,
    /// Secondary correction `U` (zero-average mode only).
    pub u: Option<FourierSeries>,
    pub iterations: usize,
    pub step_norms: Vec<f64>,
    pub lambda_hat: f64,
    pub ball_radius: f64,
    pub halvings: usize,
    pub v_norm: f64,
    pub u_norm: Option<f64>,
    /// Exact truncated inverse norm of the dominant linear operator.
    pub operator_norm: f64,
    /// A-priori bound on the same quantity.
    pub operator_norm_bound: f64,
    /// `||T(V*) - V*||` measured after convergence.
    pub fixed_point_defect: f64,
    /// Largest convolution-tail norm seen while assembling right-hand sides.
    pub tail_max: f64,
    pub residual: ResidualReport,
    pub warnings: Vec<String>,
    pub truncation: i32,
    pub norm_params: NormParams,
    /// Realized weak-Diophantine constant (zero-average mode): `(eta, gamma)`.
    pub diophantine: Option<(f64, f64)>,
}

/// Residual sampling density per torus dimension, sized to keep
/// `grid^d` moderate while staying above 64 samples.
pub fn default_grid(dim_torus: usize) -> usize {
    match dim_torus {
        1 => 256,
        2 => 64,
        3 => 16,
        _ => 8,
    }
}

/// Response pipeline: `V = L_a^{-1}(S(a,V) + h(theta,a+V) + eps f_tilde0 +
/// eps g(theta,a+V))` iterated to a fixed point.
pub fn solve_response(
    p: &ProblemSpec,
    truncation: i32,
    norm: &NormParams,
    cfg: &ContractionConfig,
) -> Result<SolveReport> {
    solve_response_impl(p, truncation, norm, cfg, None, None)
}

/// Same pipeline started from a caller-supplied iterate (continuation and
/// local-uniqueness experiments).
pub fn solve_response_from(
    p: &ProblemSpec,
    truncation: i32,
    norm: &NormParams,
    cfg: &ContractionConfig,
    start: &FourierSeries,
) -> Result<SolveReport> {
    solve_response_impl(p, truncation, norm, cfg, Some(start), None)
}

pub(crate) fn solve_response_impl(
    p: &ProblemSpec,
    truncation: i32,
    norm: &NormParams,
    cfg: &ContractionConfig,
    start: Option<&FourierSeries>,
    leading_override: Option<&LeadingTerm>,
) -> Result<SolveReport> {
    if !matches!(p.mode(), SolveMode::Response | SolveMode::Monodromy) {
        return Err(Error::InvalidInput(format!(
            "solve_response called on a problem in {} mode",
            p.mode().as_str()
        )));
    }
    let validation = p.validate(truncation);
    if !validation.passed() {
        return Err(Error::ValidationFailed(validation.failure_summary()));
    }
    norm.validate_mode(p.dim_torus())?;

    if p.dim_state() == 1 {
        let fbar0 = p.f_bar0()[0];
        let lt = match leading_override {
            Some(lt) => lt.clone(),
            None => leading_term(p.l(), p.epsilon(), fbar0, p.branch(), p.real_branch())?,
        };
        let a = lt.a_scalar();
        let op = make_l_a(p.omega(), p.l(), a, truncation)?;
        let driver = ScalarDriver {
            p,
            a,
            op: &op,
            ftilde: p.f_tilde0(truncation)?,
            g: p.f().degrees_from(1),
            norm,
        };
        let mut warnings = Vec::new();
        let small = driver.ftilde.sobolev_norm(norm) / fbar0.norm();
        if small > 1.0 {
            warnings.push(format!(
                "smallness hypothesis violated: ||f_tilde(.,0)|| / |f_bar(0)| = {small:.3e} > 1"
            ));
        }
        run_direct_pipeline(p, truncation, norm, cfg, start, lt, &op, driver, warnings)
    } else {
        let phi = p.phi().ok_or_else(|| {
            Error::InvalidInput("n > 1 requires a homogeneous leading map".into())
        })?;
        if p.epsilon().im.abs() > 1e-13 * p.epsilon().norm() {
            return Err(Error::InvalidInput(
                "the n > 1 pipeline is defined for real epsilon".into(),
            ));
        }
        let fbar0 = p.f_bar0();
        let lt = match leading_override {
            Some(lt) => lt.clone(),
            None => {
                let guess: Vec<Complex64> = match p.a0_guess() {
                    Some(g) => g.iter().map(|&x| Complex64::new(x, 0.0)).collect(),
                    None => default_nd_guess(phi, p.epsilon().re, &fbar0),
                };
                leading_term_nd(phi, p.epsilon().re, &fbar0, &guess)?
            }
        };
        let op = make_l_a_nd(p.omega(), phi, &lt.a, truncation)?;
        let driver = BlockDriver {
            p,
            phi,
            a: lt.a.clone(),
            op: &op,
            ftilde: p.f_tilde0(truncation)?,
            g: p.f().degrees_from(1),
            norm,
        };
        let mut warnings = Vec::new();
        let min_avg = fbar0.iter().map(|c| c.norm()).fold(f64::INFINITY, f64::min);
        let small = driver.ftilde.sobolev_norm(norm) / min_avg;
        if small > 1.0 {
            warnings.push(format!(
                "smallness hypothesis violated: ||f_tilde(.,0)|| / min_j |f_bar_j(0)| = {small:.3e} > 1"
            ));
        }
        run_direct_pipeline(p, truncation, norm, cfg, start, lt, &op, driver, warnings)
    }
}

/// Oscillator pipeline: identical to the response pipeline with the
/// second-order multiplier in place of `L_a`.
pub fn solve_oscillator(
    p: &ProblemSpec,
    truncation: i32,
    norm: &NormParams,
    cfg: &ContractionConfig,
) -> Result<SolveReport> {
    if p.mode() != SolveMode::Oscillator {
        return Err(Error::InvalidInput(
            "solve_oscillator requires oscillator mode".into(),
        ));
    }
    let validation = p.validate(truncation);
    if !validation.passed() {
        return Err(Error::ValidationFailed(validation.failure_summary()));
    }
    norm.validate_mode(p.dim_torus())?;
    let delta = p
        .delta()
        .ok_or_else(|| Error::InvalidInput("oscillator mode requires delta".into()))?;
    let fbar0 = p.f_bar0()[0];
    let lt = leading_term(p.l(), p.epsilon(), fbar0, p.branch(), p.real_branch())?;
    let a = lt.a_scalar();
    let op = make_oscillator_op(p.omega(), p.l(), a, delta, truncation)?;
    let driver = ScalarDriver {
        p,
        a,
        op: &op,
        ftilde: p.f_tilde0(truncation)?,
        g: p.f().degrees_from(1),
        norm,
    };
    let mut warnings = Vec::new();
    let small = driver.ftilde.sobolev_norm(norm) / fbar0.norm();
    if small > 1.0 {
        warnings.push(format!(
            "smallness hypothesis violated: ||f_tilde(.,0)|| / |f_bar(0)| = {small:.3e} > 1"
        ));
    }
    run_direct_pipeline(p, truncation, norm, cfg, None, lt, &op, driver, warnings)
}

/// Assembles one right-hand side application for the scalar pipelines.
struct ScalarDriver<'a> {
    p: &'a ProblemSpec,
    a: Complex64,
    op: &'a DiagonalOperator,
    ftilde: FourierSeries,
    g: crate::problem::FourierTaylor,
    norm: &'a NormParams,
}

impl ScalarDriver<'_> {
    fn apply(&self, v: &FourierSeries, tail_max: &mut f64) -> Result<FourierSeries> {
        let (s, t1) = s_remainder_with_tail(self.p.l(), self.a, v, self.norm)?;
        let (hv, t2) = self.p.h().eval_with_tail(&[self.a], v, self.norm)?;
        let (gv, t3) = self.g.eval_with_tail(&[self.a], v, self.norm)?;
        *tail_max = tail_max.max(t1).max(t2).max(t3);
        let eps = self.p.epsilon();
        let rhs = s
            .add(&hv)?
            .add(&self.ftilde.scale(eps))?
            .add(&gv.scale(eps))?;
        self.op.apply_inverse(&rhs)
    }
}

/// Block (n > 1) variant: the Taylor remainder of `phi` replaces `S`.
struct BlockDriver<'a> {
    p: &'a ProblemSpec,
    phi: &'a crate::problem::HomogeneousMap,
    a: Vec<Complex64>,
    op: &'a DiagonalOperator,
    ftilde: FourierSeries,
    g: crate::problem::FourierTaylor,
    norm: &'a NormParams,
}

impl BlockDriver<'_> {
    fn apply(&self, v: &FourierSeries, tail_max: &mut f64) -> Result<FourierSeries> {
        let (s, t1) = self.phi.taylor_remainder_with_tail(&self.a, v, self.norm)?;
        let (hv, t2) = self.p.h().eval_with_tail(&self.a, v, self.norm)?;
        let (gv, t3) = self.g.eval_with_tail(&self.a, v, self.norm)?;
        *tail_max = tail_max.max(t1).max(t2).max(t3);
        let eps = self.p.epsilon();
        let rhs = s
            .add(&hv)?
            .add(&self.ftilde.scale(eps))?
            .add(&gv.scale(eps))?;
        self.op.apply_inverse(&rhs)
    }
}

enum Driver<'a> {
    Scalar(ScalarDriver<'a>),
    Block(BlockDriver<'a>),
}

impl Driver<'_> {
    fn apply(&self, v: &FourierSeries, tail: &mut f64) -> Result<FourierSeries> {
        match self {
            Driver::Scalar(d) => d.apply(v, tail),
            Driver::Block(d) => d.apply(v, tail),
        }
    }
}

impl<'a> From<ScalarDriver<'a>> for Driver<'a> {
    fn from(d: ScalarDriver<'a>) -> Self {
        Driver::Scalar(d)
    }
}

impl<'a> From<BlockDriver<'a>> for Driver<'a> {
    fn from(d: BlockDriver<'a>) -> Self {
        Driver::Block(d)
    }
}

#[allow(clippy::too_many_arguments)]
fn run_direct_pipeline<'a>(
    p: &ProblemSpec,
    truncation: i32,
    norm: &NormParams,
    cfg: &ContractionConfig,
    start: Option<&FourierSeries>,
    lt: LeadingTerm,
    op: &DiagonalOperator,
    driver: impl Into<Driver<'a>>,
    warnings: Vec<String>,
) -> Result<SolveReport> {
    let driver = driver.into();
    let radius = cfg.ball_factor * lt.a_norm();
    let zero = FourierSeries::zeros(p.dim_torus(), p.dim_state(), truncation);
    let v0 = start.cloned().unwrap_or(zero);

    let tail_cell = std::cell::Cell::new(0.0f64);
    let map = |v: &FourierSeries| -> Result<FourierSeries> {
        let mut tail = tail_cell.get();
        let out = driver.apply(v, &mut tail)?;
        tail_cell.set(tail);
        Ok(out)
    };
    let (v, diag) = contraction_solve(map, &v0, radius, norm, cfg)?;
    let mut tail = tail_cell.get();
    let defect = {
        let mut t = tail;
        let tv = driver.apply(&v, &mut t)?;
        tail = tail.max(t);
        tv.sub(&v)?.sobolev_norm(norm)
    };
    let residual = residual_norm(p, &lt.a, &v, default_grid(p.dim_torus()))?;
    let v_norm = v.sobolev_norm(norm);
    Ok(SolveReport {
        mode: p.mode(),
        a: lt.a.clone(),
        branch_index: lt.branch_index,
        mode_margin: lt.mode_margin,
        v,
        u: None,
        iterations: diag.iterations,
        step_norms: diag.step_norms,
        lambda_hat: diag.lambda_hat,
        ball_radius: diag.final_radius,
        halvings: diag.halvings,
        v_norm,
        u_norm: None,
        operator_norm: op.truncated_inverse_norm(),
        operator_norm_bound: op.norm_bound(),
        fixed_point_defect: defect,
        tail_max: tail,
        residual,
        warnings,
        truncation,
        norm_params: *norm,
        diophantine: None,
    })
}

/// Zero-average pipeline: the dominant part solves the cohomology equation
/// `omega d V = f_tilde(theta, 0)`; the fluctuation `U` is a fixed point of
/// the twisted-operator inversion, and the solution is `x = eps V + U`.
pub fn solve_zero_average(
    p: &ProblemSpec,
    truncation: i32,
    norm: &NormParams,
    cfg: &ContractionConfig,
) -> Result<SolveReport> {
    if p.mode() != SolveMode::ZeroAverage {
        return Err(Error::InvalidInput(
            "solve_zero_average requires zero_average mode".into(),
        ));
    }
    if p.dim_state() != 1 {
        return Err(Error::InvalidInput(
            "the zero-average pipeline is defined for n = 1".into(),
        ));
    }
    let validation = p.validate(truncation);
    if !validation.passed() {
        return Err(Error::ValidationFailed(validation.failure_summary()));
    }
    norm.validate_mode(p.dim_torus())?;
    cfg.validate()?;

    let eps = p.epsilon();
    let ftilde = p.f_tilde0(truncation)?;
    let coh = solve_cohomology(p.omega(), &ftilde)?;
    let (g1, g_higher) = p.split_g(truncation)?;
    let g1bar = g1.scalar_average();
    let g1tilde = g1.oscillatory_part();

    // weak-Diophantine data at eta = rho / 2, for the report
    let eta = if norm.rho > 0.0 { norm.rho / 2.0 } else { 0.1 };
    let dio = estimate_diophantine(p.omega(), truncation, &[eta], &[])?;
    let gamma = dio.gamma_for_eta(eta).unwrap_or(coh.min_divisor);

    let l = p.l();
    let (v_adj, beta, w) = if l > 2 {
        if g1bar.norm() <= 1e-10 {
            return Err(Error::G1Degenerate(g1bar.norm()));
        }
        (coh.solution.clone(), -eps * g1bar, g1tilde.scale(-eps))
    } else {
        // l = 2: shift the free average of V so that |g1_bar + 2 V_bar| >=
        // max(1, |g1_bar|).  The shift is taken imaginary: a real shift
        // leaves the k = 0 mode of the fixed point non-attracting once
        // avg(V~^2) is comparable to the shifted coefficient (the constant
        // balance u^2 + eps G u + eps^2 q = 0 has a V_bar-independent
        // discriminant), while an imaginary shift of this size makes the
        // response solution an attracting fixed point.
        let shift = g1bar.norm().max(1.0).max(coh.solution.sup_norm_estimate());
        let vbar = Complex64::new(0.0, shift);
        let v_adj = coh.solution.add_scalar_constant(vbar)?;
        let vtilde = coh.solution.clone();
        let beta = -eps * (g1bar + vbar * 2.0);
        let w = g1tilde
            .add(&vtilde.scale(Complex64::new(2.0, 0.0)))?
            .scale(-eps);
        (v_adj, beta, w)
    };

    let op = TwistedOperator::new(p.omega(), beta, &w)?;
    let zero = FourierSeries::zeros(p.dim_torus(), 1, truncation);

    let tail_cell = std::cell::Cell::new(0.0f64);
    let rhs = |u: &FourierSeries| -> Result<FourierSeries> {
        let mut tail = tail_cell.get();
        let x = u.add(&v_adj.scale(eps))?;
        let (hx, t1) = p.h().eval_with_tail(&[Complex64::ZERO], &x, norm)?;
        let (gx, t2) = g_higher.eval_with_tail(&[Complex64::ZERO], &x, norm)?;
        let (g1v, t3) = g1.mul_with_tail(&v_adj, norm)?;
        let acc = if l > 2 {
            let (xl, t4) = x.powi_with_tail(l, norm)?;
            tail = tail.max(t4);
            xl
        } else {
            let (u2, t4) = u.powi_with_tail(2, norm)?;
            let (v2, t5) = v_adj.powi_with_tail(2, norm)?;
            tail = tail.max(t4).max(t5);
            u2.add(&v2.scale(eps * eps))?
        };
        tail = tail.max(t1).max(t2).max(t3);
        tail_cell.set(tail);
        let total = acc
            .add(&hx)?
            .add(&g1v.scale(eps * eps))?
            .add(&gx.scale(eps))?;
        op.apply_inverse(&total)
    };

    // ball radius A|eps|, floored by the size of the first iterate so the
    // Theta(|eps|) ball actually contains the fixed point
    let first = rhs(&zero)?;
    let radius = (cfg.ball_factor * eps.norm()).max(3.0 * first.sobolev_norm(norm));
    let (u, diag) = contraction_solve(rhs, &zero, radius, norm, cfg)?;
    let mut tail = tail_cell.get();
    let defect = {
        let tu = rhs(&u)?;
        tail = tail.max(tail_cell.get());
        tu.sub(&u)?.sobolev_norm(norm)
    };
    let assembled = v_adj.scale(eps).add(&u)?;
    let residual = residual_norm(
        p,
        &[Complex64::ZERO],
        &assembled,
        default_grid(p.dim_torus()),
    )?;
    let v_norm = v_adj.sobolev_norm(norm);
    let u_norm = u.sobolev_norm(norm);
    let op_bound = (2.0 / gamma * w.sobolev_norm(norm)).exp() / beta.norm();
    Ok(SolveReport {
        mode: p.mode(),
        a: vec![Complex64::ZERO],
        branch_index: 0,
        mode_margin: beta.norm(),
        v: v_adj,
        u: Some(u),
        iterations: diag.iterations,
        step_norms: diag.step_norms,
        lambda_hat: diag.lambda_hat,
        ball_radius: diag.final_radius,
        halvings: diag.halvings,
        v_norm,
        u_norm: Some(u_norm),
        operator_norm: op.diagonal_inverse_norm(truncation),
        operator_norm_bound: op_bound,
        fixed_point_defect: defect,
        tail_max: tail,
        residual,
        warnings: Vec::new(),
        truncation,
        norm_params: *norm,
        diophantine: Some((eta, gamma)),
    })
}

fn default_nd_guess(
    phi: &crate::problem::HomogeneousMap,
    epsilon: f64,
    fbar0: &[Complex64],
) -> Vec<Complex64> {
    // componentwise real-root guess pretending phi were diagonal; adequate
    // for diagonally dominant maps, and the damped Newton does the rest
    let sign = if epsilon > 0.0 { 1.0 } else { -1.0 };
    let l = phi.degree();
    fbar0
        .iter()
        .map(|&f| {
            let target = -sign * f.re;
            let mag = target.abs().powf(1.0 / l as f64).max(0.1);
            Complex64::new(
                mag.copysign(if l.is_multiple_of(2) { 1.0 } else { target }),
                0.0,
            )
        })
        .collect()
}

/// One step of the continuation path.
#[derive(Clone, Debug)]
pub struct MonodromyStep {
    pub index: usize,
    pub t: f64,
    pub epsilon: Complex64,
    pub a: Complex64,
    pub in_good_region: bool,
    /// `H^{rho,m}` norm of the re-solved correction; `None` when the step is
    /// outside the good region or the per-step solve failed.
    pub v_norm: Option<f64>,
    /// Distance to the previous trusted correction.
    pub v_diff: Option<f64>,
    pub error: Option<String>,
}

#[derive(Clone, Debug)]
pub struct MonodromyReport {
    pub steps: Vec<MonodromyStep>,
    /// `a(end) / a(start)`.
    pub ratio: Complex64,
    pub loops: u32,
    pub steps_per_loop: usize,
    pub cone_constant: f64,
}

impl MonodromyReport {
    /// Delimited path table:
    /// `t re_eps im_eps re_a im_a in_good_region v_norm`.
    pub fn path_table_string(&self) -> String {
        use std::fmt::Write as _;
        let mut out = String::new();
        out.push_str("# t re_eps im_eps re_a im_a in_good_region v_norm\n");
        for s in &self.steps {
            let v = match s.v_norm {
                Some(n) => format!("{n:.16e}"),
                None => "untrusted".to_string(),
            };
            let _ = writeln!(
                out,
                "{:.16e} {:.16e} {:.16e} {:.16e} {:.16e} {} {}",
                s.t,
                s.epsilon.re,
                s.epsilon.im,
                s.a.re,
                s.a.im,
                u8::from(s.in_good_region),
                v
            );
        }
        out
    }
}

/// Continues the leading term (and, inside the good cone region, the full
/// correction) along the loop `eps(t) = alpha exp(2 pi i t)`, `t in
/// [0, loops]`, tracking the nearest root of `a^l = -eps(t) f_bar(0)`.
///
/// Outside `|Im eps| <= C |Re eps|` the correction is flagged untrusted and
/// only the root is continued.  Per-step solver failures inside the good
/// region are recorded on the step, not raised.
#[allow(clippy::too_many_arguments)]
pub fn monodromy_continuation(
    p: &ProblemSpec,
    truncation: i32,
    norm: &NormParams,
    cfg: &ContractionConfig,
    alpha: f64,
    loops: u32,
    steps_per_loop: usize,
    cone_constant: f64,
) -> Result<MonodromyReport> {
    if p.dim_state() != 1 {
        return Err(Error::InvalidInput(
            "monodromy continuation requires n = 1".into(),
        ));
    }
    if alpha <= 0.0 {
        return Err(Error::InvalidInput("alpha must be positive".into()));
    }
    if steps_per_loop < 64 {
        return Err(Error::InvalidInput(format!(
            "steps_per_loop must be at least 64 (got {steps_per_loop})"
        )));
    }
    if loops == 0 {
        return Err(Error::InvalidInput("loops must be at least 1".into()));
    }
    if cone_constant <= 0.0 {
        return Err(Error::InvalidInput("cone constant must be positive".into()));
    }
    let fbar0 = p.f_bar0()[0];
    if fbar0.norm() == 0.0 {
        return Err(Error::InvalidInput(
            "monodromy continuation requires f_bar(0) != 0".into(),
        ));
    }
    let l = p.l();
    let total = loops as usize * steps_per_loop;
    let mut steps = Vec::with_capacity(total + 1);
    let mut prev_a = Complex64::ZERO;
    let mut prev_v: Option<FourierSeries> = None;

    for i in 0..=total {
        let t = i as f64 / steps_per_loop as f64;
        let phase = Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * t);
        let eps = phase * alpha;
        let roots = leading_roots(l, eps, fbar0);
        let (a, branch) = if i == 0 {
            if p.branch() >= roots.len() {
                return Err(Error::InvalidInput(format!(
                    "branch {} out of range [0, {l})",
                    p.branch()
                )));
            }
            (roots[p.branch()], p.branch())
        } else {
            // nearest-root continuation with ambiguity and coarseness guards
            let mut order: Vec<usize> = (0..roots.len()).collect();
            order.sort_by(|&x, &y| {
                (roots[x] - prev_a)
                    .norm()
                    .partial_cmp(&(roots[y] - prev_a).norm())
                    .unwrap()
            });
            let best = order[0];
            let d0 = (roots[best] - prev_a).norm();
            let scale = roots[best].norm().max(prev_a.norm()).max(1e-300);
            if roots.len() > 1 {
                let d1 = (roots[order[1]] - prev_a).norm();
                if (d1 - d0).abs() <= 1e-9 * scale {
                    return Err(Error::RootTrackingAmbiguous(format!(
                        "two candidate roots equidistant from a({t:.6}) within 1e-9"
                    )));
                }
            }
            let spacing = 2.0 * roots[best].norm() * (std::f64::consts::PI / l as f64).sin();
            if d0 > 0.5 * spacing {
                return Err(Error::RootTrackingAmbiguous(format!(
                    "root jump {d0:.3e} exceeds half the root spacing {spacing:.3e}; refine steps_per_loop"
                )));
            }
            (roots[best], best)
        };

        let in_good = eps.im.abs() <= cone_constant * eps.re.abs();
        let mut v_norm = None;
        let mut v_diff = None;
        let mut error = None;
        if in_good {
            let margin = (Complex64::new(l as f64, 0.0) * a.powu(l - 1)).re.abs();
            let lt = LeadingTerm {
                a: vec![a],
                branch_index: branch,
                mode_margin: margin,
            };
            let p_t = p.clone().with_epsilon(eps).with_real_branch(false);
            match solve_response_impl(&p_t, truncation, norm, cfg, prev_v.as_ref(), Some(&lt)) {
                Ok(report) => {
                    v_norm = Some(report.v_norm);
                    if let Some(old) = &prev_v {
                        if let Ok(diff) = report.v.sub(old) {
                            v_diff = Some(diff.sobolev_norm(norm));
                        }
                    }
                    prev_v = Some(report.v);
                }
                Err(e) => {
                    error = Some(e.to_string());
                }
            }
        }
        steps.push(MonodromyStep {
            index: i,
            t,
            epsilon: eps,
            a,
            in_good_region: in_good,
            v_norm,
            v_diff,
            error,
        });
        prev_a = a;
    }
    let ratio = steps.last().unwrap().a / steps.first().unwrap().a;
    Ok(MonodromyReport {
        steps,
        ratio,
        loops,
        steps_per_loop,
        cone_constant,
    })
}
