//! Per-mode diagonal (or block) operators and small-divisor solvers.
//!
//! Every operator here is diagonal on the Fourier basis: applying it, or its
//! inverse, multiplies the `k`-th coefficient by a scalar (`n = 1`) or solves
//! an `n x n` block system.  The exact truncated inverse norm is cached at
//! construction, next to the a-priori bound the multiplier formula provides.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fourier::{FourierSeries, MultiIndex};
use crate::problem::HomogeneousMap;

/// Absolute floor below which a realized small divisor counts as resonant.
const RESONANCE_FLOOR: f64 = 1e-14;

/// Relative cone threshold for `|Re(l a^(l-1))|`.
const CONE_TOL: f64 = 1e-14;

/// Eigenvalue distance from the imaginary axis required of `Dphi(a0)`.
const SPECTRUM_TOL: f64 = 1e-10;

#[derive(Clone, Debug)]
enum Kind {
    /// Multiplier `i (k.omega) - shift`.
    Shifted { shift: Complex64 },
    /// Multiplier `-(k.omega)^2 + i delta (k.omega) - shift`.
    Oscillator { shift: Complex64, delta: f64 },
    /// Block `i (k.omega) Id - M` with per-mode `n x n` solves.
    Block { matrix: DMatrix<Complex64> },
}

/// Diagonal operator on the truncated space, with cached inverse-norm data.
#[derive(Clone, Debug)]
pub struct DiagonalOperator {
    dim_torus: usize,
    truncation: i32,
    omega: Vec<f64>,
    kind: Kind,
    min_modulus: f64,
    argmin: MultiIndex,
    max_inverse_norm: f64,
    norm_bound: f64,
}

impl DiagonalOperator {
    fn build(
        dim_torus: usize,
        truncation: i32,
        omega: Vec<f64>,
        kind: Kind,
        norm_bound: f64,
    ) -> Self {
        let mut min_modulus = f64::INFINITY;
        let mut argmin = MultiIndex::zero(dim_torus);
        let mut max_inverse_norm = 0.0f64;
        for k in mode_cube(dim_torus, truncation) {
            match &kind {
                Kind::Shifted { .. } | Kind::Oscillator { .. } => {
                    let m = scalar_multiplier(&kind, k.dot(&omega));
                    let modulus = m.norm();
                    if modulus < min_modulus {
                        min_modulus = modulus;
                        argmin = k.clone();
                    }
                }
                Kind::Block { matrix } => {
                    let b = block_at(matrix, k.dot(&omega));
                    if let Some(inv) = b.try_inverse() {
                        let nrm = frobenius(&inv);
                        if nrm > max_inverse_norm {
                            max_inverse_norm = nrm;
                            argmin = k.clone();
                        }
                    } else {
                        max_inverse_norm = f64::INFINITY;
                        argmin = k.clone();
                    }
                }
            }
        }
        if matches!(kind, Kind::Shifted { .. } | Kind::Oscillator { .. }) {
            max_inverse_norm = 1.0 / min_modulus;
        } else {
            min_modulus = 1.0 / max_inverse_norm;
        }
        DiagonalOperator {
            dim_torus,
            truncation,
            omega,
            kind,
            min_modulus,
            argmin,
            max_inverse_norm,
            norm_bound,
        }
    }

    /// Smallest multiplier modulus over the truncation (scalar case), or the
    /// reciprocal of the largest inverse-block norm.
    pub fn min_modulus(&self) -> f64 {
        self.min_modulus
    }

    /// Mode attaining the extreme multiplier.
    pub fn argmin(&self) -> &MultiIndex {
        &self.argmin
    }

    /// Exact operator norm of the inverse on the truncated space (Frobenius
    /// norm per block in the `n > 1` case).
    pub fn truncated_inverse_norm(&self) -> f64 {
        self.max_inverse_norm
    }

    /// A-priori bound on the inverse norm from the multiplier formula.
    pub fn norm_bound(&self) -> f64 {
        self.norm_bound
    }

    pub fn multiplier(&self, k: &MultiIndex) -> Complex64 {
        scalar_multiplier(&self.kind, k.dot(&self.omega))
    }

    fn check_input(&self, f: &FourierSeries, want_target: Option<usize>) -> Result<()> {
        if f.dim_torus() != self.dim_torus {
            return Err(Error::DimensionMismatch(
                "series torus dimension does not match the operator".into(),
            ));
        }
        if f.truncation() != self.truncation {
            return Err(Error::TruncationMismatch(format!(
                "series truncation {} does not match operator truncation {}",
                f.truncation(),
                self.truncation
            )));
        }
        if let Some(n) = want_target {
            if f.dim_target() != n {
                return Err(Error::DimensionMismatch(format!(
                    "series target dimension {} does not match operator blocks ({n})",
                    f.dim_target()
                )));
            }
        }
        Ok(())
    }

    /// Solves `L V = f` mode by mode.
    pub fn apply_inverse(&self, f: &FourierSeries) -> Result<FourierSeries> {
        match &self.kind {
            Kind::Shifted { .. } | Kind::Oscillator { .. } => {
                self.check_input(f, Some(1))?;
                let modes: Vec<(MultiIndex, Complex64)> = f
                    .modes()
                    .map(|(k, c)| {
                        let m = scalar_multiplier(&self.kind, k.dot(&self.omega));
                        (k.clone(), c[0] / m)
                    })
                    .collect();
                FourierSeries::from_modes(self.dim_torus, self.truncation, modes)
            }
            Kind::Block { matrix } => {
                let n = matrix.nrows();
                self.check_input(f, Some(n))?;
                let mut parts: Vec<BTreeMap<MultiIndex, Complex64>> = vec![BTreeMap::new(); n];
                for (k, c) in f.modes() {
                    let b = block_at(matrix, k.dot(&self.omega));
                    let rhs = DVector::from_column_slice(c);
                    let sol = b.lu().solve(&rhs).ok_or_else(|| {
                        Error::InvalidInput(format!("singular block at mode {k}"))
                    })?;
                    for i in 0..n {
                        parts[i].insert(k.clone(), sol[i]);
                    }
                }
                let comps: Result<Vec<FourierSeries>> = parts
                    .into_iter()
                    .map(|m| FourierSeries::from_modes(self.dim_torus, self.truncation, m))
                    .collect();
                FourierSeries::from_components(&comps?)
            }
        }
    }

    /// Applies the operator itself (used by the round-trip checks).
    pub fn apply_forward(&self, v: &FourierSeries) -> Result<FourierSeries> {
        match &self.kind {
            Kind::Shifted { .. } | Kind::Oscillator { .. } => {
                self.check_input(v, Some(1))?;
                let modes: Vec<(MultiIndex, Complex64)> = v
                    .modes()
                    .map(|(k, c)| {
                        let m = scalar_multiplier(&self.kind, k.dot(&self.omega));
                        (k.clone(), c[0] * m)
                    })
                    .collect();
                FourierSeries::from_modes(self.dim_torus, self.truncation, modes)
            }
            Kind::Block { matrix } => {
                let n = matrix.nrows();
                self.check_input(v, Some(n))?;
                let mut parts: Vec<BTreeMap<MultiIndex, Complex64>> = vec![BTreeMap::new(); n];
                for (k, c) in v.modes() {
                    let b = block_at(matrix, k.dot(&self.omega));
                    let x = DVector::from_column_slice(c);
                    let y = &b * &x;
                    for i in 0..n {
                        parts[i].insert(k.clone(), y[i]);
                    }
                }
                let comps: Result<Vec<FourierSeries>> = parts
                    .into_iter()
                    .map(|m| FourierSeries::from_modes(self.dim_torus, self.truncation, m))
                    .collect();
                FourierSeries::from_components(&comps?)
            }
        }
    }
}

fn scalar_multiplier(kind: &Kind, t: f64) -> Complex64 {
    match kind {
        Kind::Shifted { shift } => Complex64::new(0.0, t) - shift,
        Kind::Oscillator { shift, delta } => Complex64::new(-t * t, delta * t) - shift,
        Kind::Block { .. } => unreachable!("scalar multiplier on block operator"),
    }
}

fn block_at(matrix: &DMatrix<Complex64>, t: f64) -> DMatrix<Complex64> {
    let n = matrix.nrows();
    DMatrix::from_fn(n, n, |i, j| {
        let diag = if i == j {
            Complex64::new(0.0, t)
        } else {
            Complex64::ZERO
        };
        diag - matrix[(i, j)]
    })
}

fn frobenius(m: &DMatrix<Complex64>) -> f64 {
    m.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
}

pub(crate) fn mode_cube(d: usize, trunc: i32) -> Vec<MultiIndex> {
    let mut cube = vec![MultiIndex::zero(d)];
    for axis in 0..d {
        let mut next = Vec::new();
        for m in &cube {
            for e in -trunc..=trunc {
                let mut v = m.entries().to_vec();
                v[axis] = e;
                next.push(MultiIndex::new(v));
            }
        }
        cube = next;
    }
    cube
}

/// Eigenvalues of a complex matrix via its real doubling; only the distances
/// to the imaginary axis are needed, which the doubling preserves.
fn spectral_margin(m: &DMatrix<Complex64>) -> f64 {
    let n = m.nrows();
    let mut real = DMatrix::<f64>::zeros(2 * n, 2 * n);
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

/// `L_a = omega . d_theta - l a^(l-1)` as a diagonal operator.
///
/// Rejected when `l a^(l-1)` sits (relatively) within `1e-14` of the
/// imaginary axis, where the inverse bound `1/|Re(l a^(l-1))|` degenerates.
pub fn make_l_a(omega: &[f64], l: u32, a: Complex64, truncation: i32) -> Result<DiagonalOperator> {
    let shift = Complex64::new(l as f64, 0.0) * a.powu(l - 1);
    let margin = shift.re.abs();
    if shift.norm() == 0.0 || margin <= CONE_TOL * shift.norm() {
        return Err(Error::ConeViolation {
            margin,
            relative: if shift.norm() == 0.0 {
                0.0
            } else {
                margin / shift.norm()
            },
        });
    }
    Ok(DiagonalOperator::build(
        omega.len(),
        truncation,
        omega.to_vec(),
        Kind::Shifted { shift },
        1.0 / margin,
    ))
}

/// Block version for `n > 1`: multiplier `i (k.omega) Id - Dphi(a)`.
pub fn make_l_a_nd(
    omega: &[f64],
    phi: &HomogeneousMap,
    a: &[Complex64],
    truncation: i32,
) -> Result<DiagonalOperator> {
    if phi.dim() != a.len() {
        return Err(Error::DimensionMismatch(
            "leading term dimension does not match phi".into(),
        ));
    }
    if phi.dim() > 8 {
        return Err(Error::InvalidInput(
            "dense eigen-solves are limited to n <= 8".into(),
        ));
    }
    let jac = phi.jacobian(a);
    let margin = spectral_margin(&jac);
    if margin <= SPECTRUM_TOL {
        return Err(Error::SpectrumOnAxis(margin));
    }
    Ok(DiagonalOperator::build(
        omega.len(),
        truncation,
        omega.to_vec(),
        Kind::Block { matrix: jac },
        1.0 / margin,
    ))
}

/// Second-order multiplier `-(k.omega)^2 + i delta (k.omega) - l a^(l-1)`.
///
/// Complex `a` is accepted only when `l a^(l-1)` is real (the second-order
/// bound is stated for the real case); the condition
/// `delta^2 + 2 l a^(l-1) >= 0` then guarantees `|L_k| >= l |a|^(l-1)`.
pub fn make_oscillator_op(
    omega: &[f64],
    l: u32,
    a: Complex64,
    delta: f64,
    truncation: i32,
) -> Result<DiagonalOperator> {
    let shift = Complex64::new(l as f64, 0.0) * a.powu(l - 1);
    if shift.im.abs() > 1e-13 * shift.norm() {
        return Err(Error::InvalidInput(
            "oscillator operator requires l a^(l-1) real".into(),
        ));
    }
    let cond = delta * delta + 2.0 * shift.re;
    if cond < 0.0 {
        return Err(Error::OscillatorConditionViolated(cond));
    }
    if shift.norm() == 0.0 {
        return Err(Error::ConeViolation {
            margin: 0.0,
            relative: 0.0,
        });
    }
    let op = DiagonalOperator::build(
        omega.len(),
        truncation,
        omega.to_vec(),
        Kind::Oscillator { shift, delta },
        1.0 / shift.norm(),
    );
    debug_assert!(op.min_modulus() >= shift.norm() * (1.0 - 1e-12));
    Ok(op)
}

/// Solution data of the cohomology equation `omega . d_theta V = f`.
#[derive(Clone, Debug)]
pub struct CohomologySolution {
    pub solution: FourierSeries,
    /// Realized small-divisor minimum `min_{0 < |k| <= K} |k.omega|`.
    pub min_divisor: f64,
    pub argmin: MultiIndex,
}

/// Scans the truncated mode cube for a vanishing divisor, naming the
/// smallest offending mode.
fn resonance_witness(omega: &[f64], d: usize, trunc: i32) -> Option<(MultiIndex, f64)> {
    let mut witness: Option<(MultiIndex, f64)> = None;
    for k in mode_cube(d, trunc) {
        if k.is_zero() {
            continue;
        }
        let val = k.dot(omega).abs();
        if val < RESONANCE_FLOOR {
            let cand = k.canonical_sign();
            let better = match &witness {
                None => true,
                Some((w, _)) => (cand.inf_norm(), cand.clone()) < (w.inf_norm(), w.clone()),
            };
            if better {
                witness = Some((cand, val));
            }
        }
    }
    witness
}

/// Solves `omega . d_theta V = f` for zero-average `f`; the solution is
/// normalized to zero average.
pub fn solve_cohomology(omega: &[f64], f: &FourierSeries) -> Result<CohomologySolution> {
    let avg: f64 = f.average().iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
    let scale = f.max_coeff_norm().max(1.0);
    if avg > 1e-13 * scale {
        return Err(Error::NonZeroAverage(avg));
    }
    let d = f.dim_torus();
    let trunc = f.truncation();
    if let Some((k, value)) = resonance_witness(omega, d, trunc) {
        return Err(Error::ResonantMode { k, value });
    }
    let mut min_divisor = f64::INFINITY;
    let mut argmin = MultiIndex::zero(d);
    for k in mode_cube(d, trunc) {
        if k.is_zero() {
            continue;
        }
        let val = k.dot(omega).abs();
        if val < min_divisor {
            min_divisor = val;
            argmin = k.clone();
        }
    }
    let mut parts = Vec::with_capacity(f.dim_target());
    for comp in 0..f.dim_target() {
        let series = f.component(comp);
        let modes: Vec<(MultiIndex, Complex64)> = series
            .modes()
            .filter(|(k, _)| !k.is_zero())
            .map(|(k, c)| {
                let divisor = Complex64::new(0.0, k.dot(omega));
                (k.clone(), c[0] / divisor)
            })
            .collect();
        parts.push(FourierSeries::from_modes(d, trunc, modes)?);
    }
    Ok(CohomologySolution {
        solution: FourierSeries::from_components(&parts)?,
        min_divisor,
        argmin: argmin.canonical_sign(),
    })
}

/// The operator `omega . d_theta + beta + w` with zero-average `w`, inverted
/// by the integrating-factor conjugation
/// `V = exp(-Gamma) (omega . d_theta + beta)^(-1) (f exp(Gamma))`,
/// `omega . d_theta Gamma = w`.
///
/// The conjugation factors are computed once at construction so the operator
/// can be applied repeatedly inside a fixed-point iteration.
#[derive(Clone, Debug)]
pub struct TwistedOperator {
    omega: Vec<f64>,
    beta: Complex64,
    exp_plus: FourierSeries,
    exp_minus: FourierSeries,
    /// Small divisor realized while solving for Gamma.
    pub min_divisor: f64,
    /// Norm of the integrating factor, for diagnostics.
    pub gamma_l1: f64,
}

impl TwistedOperator {
    pub fn new(omega: &[f64], beta: Complex64, w: &FourierSeries) -> Result<Self> {
        if beta.norm() <= 1e-14 {
            return Err(Error::ZeroBeta);
        }
        if w.dim_target() != 1 {
            return Err(Error::DimensionMismatch(
                "twisted cohomology is defined for scalar series".into(),
            ));
        }
        let coh = solve_cohomology(omega, w)?;
        let gamma = coh.solution;
        let exp_plus = gamma.exp_series()?;
        let exp_minus = gamma.neg().exp_series()?;
        Ok(TwistedOperator {
            omega: omega.to_vec(),
            beta,
            exp_plus,
            exp_minus,
            min_divisor: coh.min_divisor,
            gamma_l1: gamma.sup_norm_estimate(),
        })
    }

    pub fn beta(&self) -> Complex64 {
        self.beta
    }

    /// Exact truncated norm of the diagonal factor `(omega d + beta)^(-1)`.
    pub fn diagonal_inverse_norm(&self, truncation: i32) -> f64 {
        let d = self.omega.len();
        mode_cube(d, truncation)
            .iter()
            .map(|k| 1.0 / (Complex64::new(0.0, k.dot(&self.omega)) + self.beta).norm())
            .fold(0.0, f64::max)
    }

    pub fn apply_inverse(&self, f: &FourierSeries) -> Result<FourierSeries> {
        let lifted = f.mul(&self.exp_plus)?;
        let modes: Vec<(MultiIndex, Complex64)> = lifted
            .modes()
            .map(|(k, c)| {
                let m = Complex64::new(0.0, k.dot(&self.omega)) + self.beta;
                (k.clone(), c[0] / m)
            })
            .collect();
        let mid = FourierSeries::from_modes(f.dim_torus(), f.truncation(), modes)?;
        self.exp_minus.mul(&mid)
    }

    /// `(omega . d_theta + beta + w) v`, for round-trip verification.
    pub fn apply_forward(&self, v: &FourierSeries, w: &FourierSeries) -> Result<FourierSeries> {
        let dv = v.omega_derivative(&self.omega)?;
        dv.add(&v.scale(self.beta))?.add(&w.mul(v)?)
    }
}

/// Convenience wrapper: a single twisted solve.
pub fn solve_twisted_cohomology(
    omega: &[f64],
    beta: Complex64,
    w: &FourierSeries,
    f: &FourierSeries,
) -> Result<FourierSeries> {
    TwistedOperator::new(omega, beta, w)?.apply_inverse(f)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum DiophantineForm {
    /// `|k.omega| >= gamma exp(-eta |k|)`.
    Exponential { eta: f64 },
    /// `|k.omega| >= gamma |k|^(-tau)`.
    Polynomial { tau: f64 },
}

/// Lower-bound parameters for the small divisors `|k.omega|`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DiophantineParams {
    pub gamma: f64,
    pub form: DiophantineForm,
}

impl DiophantineParams {
    pub fn exponential(gamma: f64, eta: f64) -> Result<Self> {
        if gamma <= 0.0 || eta <= 0.0 {
            return Err(Error::InvalidInput(
                "Diophantine parameters require gamma > 0 and eta > 0".into(),
            ));
        }
        Ok(DiophantineParams {
            gamma,
            form: DiophantineForm::Exponential { eta },
        })
    }

    /// Polynomial form; `tau > d - 1` keeps the admissible frequency set of
    /// positive measure.
    pub fn polynomial(gamma: f64, tau: f64, dim_torus: usize) -> Result<Self> {
        if gamma <= 0.0 {
            return Err(Error::InvalidInput("gamma must be positive".into()));
        }
        if tau <= dim_torus as f64 - 1.0 {
            return Err(Error::InvalidInput(format!(
                "tau must exceed d - 1 = {}",
                dim_torus as f64 - 1.0
            )));
        }
        Ok(DiophantineParams {
            gamma,
            form: DiophantineForm::Polynomial { tau },
        })
    }
}

#[derive(Clone, Debug)]
pub struct DiophantineRow {
    /// Grid value of eta (exponential rows) or tau (polynomial rows).
    pub exponent: f64,
    pub gamma: f64,
    pub argmin: MultiIndex,
}

/// Realized Diophantine constants over one truncation.
///
/// This is a certificate for `|k|_inf <= K` only, not a number-theoretic
/// statement about the frequency.
#[derive(Clone, Debug)]
pub struct DiophantineTable {
    pub truncation: i32,
    pub exponential: Vec<DiophantineRow>,
    pub polynomial: Vec<DiophantineRow>,
}

impl DiophantineTable {
    /// Looks up gamma for a grid eta (exact match on the grid value).
    pub fn gamma_for_eta(&self, eta: f64) -> Option<f64> {
        self.exponential
            .iter()
            .find(|r| r.exponent == eta)
            .map(|r| r.gamma)
    }

    /// Delimited text: `form exponent gamma k_1 .. k_d`.
    pub fn table_string(&self) -> String {
        let mut out = String::new();
        out.push_str("# form exponent gamma argmin_mode\n");
        for r in &self.exponential {
            let _ = write!(out, "eta {:.16e} {:.16e}", r.exponent, r.gamma);
            for e in r.argmin.entries() {
                let _ = write!(out, " {e}");
            }
            out.push('\n');
        }
        for r in &self.polynomial {
            let _ = write!(out, "tau {:.16e} {:.16e}", r.exponent, r.gamma);
            for e in r.argmin.entries() {
                let _ = write!(out, " {e}");
            }
            out.push('\n');
        }
        out
    }
}

/// Measures `gamma(eta) = min |k.omega| e^(eta |k|)` and
/// `gamma(tau) = min |k.omega| |k|^tau` over `0 < |k|_inf <= K`.
pub fn estimate_diophantine(
    omega: &[f64],
    truncation: i32,
    etas: &[f64],
    taus: &[f64],
) -> Result<DiophantineTable> {
    let d = omega.len();
    if let Some((k, value)) = resonance_witness(omega, d, truncation) {
        return Err(Error::ResonantMode { k, value });
    }
    let mut realized: Vec<(f64, f64, MultiIndex)> = Vec::new();
    for k in mode_cube(d, truncation) {
        if k.is_zero() {
            continue;
        }
        let val = k.dot(omega).abs();
        realized.push((val, k.euclid(), k));
    }
    let minimize = |weight: &dyn Fn(f64) -> f64| -> DiophantineRow {
        let mut best = f64::INFINITY;
        let mut arg = MultiIndex::zero(d);
        for (val, kn, k) in &realized {
            let w = val * weight(*kn);
            if w < best {
                best = w;
                arg = k.clone();
            }
        }
        DiophantineRow {
            exponent: 0.0,
            gamma: best,
            argmin: arg.canonical_sign(),
        }
    };
    let exponential = etas
        .iter()
        .map(|&eta| {
            let mut row = minimize(&|kn| (eta * kn).exp());
            row.exponent = eta;
            row
        })
        .collect();
    let polynomial = taus
        .iter()
        .map(|&tau| {
            let mut row = minimize(&|kn| kn.powf(tau));
            row.exponent = tau;
            row
        })
        .collect();
    Ok(DiophantineTable {
        truncation,
        exponential,
        polynomial,
    })
}

/// Applies `L_a = omega . d_theta - l a^(l-1)` directly (test helper for the
/// inverse round trip).
pub fn apply_l_a(omega: &[f64], l: u32, a: Complex64, v: &FourierSeries) -> Result<FourierSeries> {
    let shift = Complex64::new(l as f64, 0.0) * a.powu(l - 1);
    v.omega_derivative(omega)?.sub(&v.scale(shift))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fourier::NormParams;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn golden() -> f64 {
        (5.0f64.sqrt() - 1.0) / 2.0
    }

    fn random_zero_average(
        rng: &mut ChaCha8Rng,
        d: usize,
        trunc: i32,
        mode_cap: i32,
        decay: f64,
    ) -> FourierSeries {
        let mut s = FourierSeries::zeros(d, 1, trunc);
        for k in mode_cube(d, mode_cap) {
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

    #[test]
    fn l_a_inverse_single_mode() {
        let op = make_l_a(&[1.0], 2, c(0.1, 0.0), 8).unwrap();
        let f = FourierSeries::harmonic(1, 8, &[1], c(1.0, 0.0));
        let v = op.apply_inverse(&f).unwrap();
        let got = v.scalar_coeff(&MultiIndex::new(vec![1]));
        let want = c(1.0, 0.0) / (c(0.0, 1.0) - c(0.2, 0.0));
        assert!((got - want).norm() < 1e-15);
        assert!((got.norm() - 1.0 / 1.04f64.sqrt()).abs() < 1e-12);

        // constant input attains the truncated norm at k = 0
        let one = FourierSeries::scalar_constant(1, 8, c(1.0, 0.0));
        let v0 = op.apply_inverse(&one).unwrap();
        assert!((v0.scalar_average() - c(-5.0, 0.0)).norm() < 1e-12);
        assert!(op.argmin().is_zero());
        assert!((op.truncated_inverse_norm() - 5.0).abs() < 1e-12);
    }

    #[test]
    fn l_a_norm_bound_real_a() {
        let mut rng = ChaCha8Rng::seed_from_u64(61);
        for _ in 0..50 {
            let l = rng.random_range(2..=5u32);
            let mag = 0.05 + 0.45 * rng.random::<f64>();
            let a = if rng.random::<bool>() { mag } else { -mag };
            let omega = [0.5 + 1.5 * rng.random::<f64>()];
            let op = make_l_a(&omega, l, c(a, 0.0), 32).unwrap();
            let want = 1.0 / (l as f64 * mag.powi(l as i32 - 1));
            assert!(
                (op.truncated_inverse_norm() - want).abs() <= 1e-12 * want,
                "norm mismatch"
            );
            assert!(op.truncated_inverse_norm() <= op.norm_bound() * (1.0 + 1e-12));
        }
        // complex a: the truncated norm stays below 1/|Re(l a^(l-1))|
        for _ in 0..20 {
            let a = c(
                0.3 * (rng.random::<f64>() + 0.1),
                0.1 * (rng.random::<f64>() - 0.05),
            );
            let l = rng.random_range(2..=4u32);
            let shift = c(l as f64, 0.0) * a.powu(l - 1);
            if shift.re.abs() <= 1e-10 * shift.norm() {
                continue;
            }
            let op = make_l_a(&[1.1], l, a, 16).unwrap();
            let bound = 1.0 / shift.re.abs();
            assert!(op.truncated_inverse_norm() <= bound * (1.0 + 1e-12));
        }
    }

    #[test]
    fn l_a_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(67);
        let f = random_zero_average(&mut rng, 1, 16, 8, 0.3)
            .add_scalar_constant(c(0.4, -0.1))
            .unwrap();
        let a = c(-0.2, 0.0);
        let op = make_l_a(&[1.3], 3, a, 16).unwrap();
        let v = op.apply_inverse(&f).unwrap();
        let back = apply_l_a(&[1.3], 3, a, &v).unwrap();
        let err = back.sub(&f).unwrap().max_coeff_norm();
        assert!(err < 1e-12 * f.max_coeff_norm().max(1.0));
    }

    #[test]
    fn cone_violation_rejected() {
        // a on the imaginary axis for l = 3 gives l a^2 real negative; pick
        // a at 45 degrees so a^2 is purely imaginary instead.
        let a = c(1.0, 1.0) * 0.1;
        assert!(matches!(
            make_l_a(&[1.0], 3, a, 8),
            Err(Error::ConeViolation { .. })
        ));
        assert!(matches!(
            make_l_a(&[1.0], 2, c(0.0, 0.0), 8),
            Err(Error::ConeViolation { .. })
        ));
    }

    #[test]
    fn block_operator_decoupled_and_consistent() {
        // phi(x) = (x1^3, x2^3), a = (-0.1, -0.1)
        let phi = HomogeneousMap::diagonal(&[1.0, 1.0], 3);
        let a = [c(-0.1, 0.0), c(-0.1, 0.0)];
        let op = make_l_a_nd(&[1.0], &phi, &a, 8).unwrap();
        // inverse block at k = 0 is diag(-1/0.03)
        let f = FourierSeries::constant(1, 8, &[c(1.0, 0.0), c(0.0, 0.0)]);
        let v = op.apply_inverse(&f).unwrap();
        assert!((v.average()[0] - c(-1.0 / 0.03, 0.0)).norm() < 1e-10);
        assert!(v.average()[1].norm() < 1e-12);

        // n = 1 block path reproduces the scalar multipliers
        let phi1 = HomogeneousMap::diagonal(&[1.0], 3);
        let a1 = [c(-0.1, 0.0)];
        let block = make_l_a_nd(&[1.0], &phi1, &a1, 8).unwrap();
        let scalar = make_l_a(&[1.0], 3, a1[0], 8).unwrap();
        let probe = FourierSeries::harmonic(1, 8, &[2], c(0.3, 0.1));
        let vb = block.apply_inverse(&probe).unwrap();
        let vs = scalar.apply_inverse(&probe).unwrap();
        assert!(vb.sub(&vs).unwrap().max_coeff_norm() < 1e-15);
    }

    #[test]
    fn block_spectrum_on_axis_rejected() {
        // phi(x) = (x2^3, -x1^3): Dphi(a) is anti-diagonal with opposite
        // signs, so its eigenvalues are +- i 3 t^2, exactly on the axis.
        let phi = HomogeneousMap::new(2, 3)
            .with_monomial(0, &[0, 3], 1.0)
            .with_monomial(1, &[3, 0], -1.0);
        let a = [c(0.2, 0.0), c(0.2, 0.0)];
        assert!(matches!(
            make_l_a_nd(&[1.0], &phi, &a, 4),
            Err(Error::SpectrumOnAxis(_))
        ));
    }

    #[test]
    fn block_inverse_scaling_follows_epsilon_power() {
        let phi = HomogeneousMap::diagonal(&[1.0, 1.0], 3);
        let a0 = [c(-1.0, 0.0), c(-1.0, 0.0)];
        let mut consts = Vec::new();
        for eps in [1e-2f64, 1e-3, 1e-4] {
            let s = eps.powf(1.0 / 3.0);
            let a: Vec<Complex64> = a0.iter().map(|&x| x * s).collect();
            let op = make_l_a_nd(&[1.0], &phi, &a, 16).unwrap();
            let ratio = op.truncated_inverse_norm() / eps.powf(-1.0 + 1.0 / 3.0);
            consts.push(ratio);
        }
        let base = consts[0];
        for r in &consts {
            assert!((r / base - 1.0).abs() < 0.1, "C drifted: {consts:?}");
        }
    }

    #[test]
    fn cohomology_golden_mode() {
        let omega = [1.0, 2.0f64.sqrt()];
        let f = FourierSeries::harmonic(2, 4, &[1, -1], c(1.0, 0.0));
        let sol = solve_cohomology(&omega, &f).unwrap();
        let got = sol.solution.scalar_coeff(&MultiIndex::new(vec![1, -1]));
        assert!((got.norm() - (2.0f64.sqrt() + 1.0)).abs() < 1e-12);

        let zero = FourierSeries::zeros(2, 1, 4);
        assert_eq!(
            solve_cohomology(&omega, &zero)
                .unwrap()
                .solution
                .num_modes(),
            0
        );
    }

    #[test]
    fn cohomology_rejects_average_and_resonance() {
        let f = FourierSeries::scalar_constant(1, 4, c(1.0, 0.0));
        assert!(matches!(
            solve_cohomology(&[1.0], &f),
            Err(Error::NonZeroAverage(_))
        ));
        let g = FourierSeries::harmonic(2, 4, &[1, 0], c(1.0, 0.0));
        assert!(matches!(
            solve_cohomology(&[1.0, 1.0], &g),
            Err(Error::ResonantMode { .. })
        ));
    }

    #[test]
    fn cohomology_derivative_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(71);
        let omega = [1.0, golden()];
        let f = random_zero_average(&mut rng, 2, 8, 4, 0.5);
        let sol = solve_cohomology(&omega, &f).unwrap();
        let back = sol.solution.omega_derivative(&omega).unwrap();
        let err = back.sub(&f).unwrap().max_coeff_norm();
        assert!(err <= 1e-12 * f.max_coeff_norm());
    }

    #[test]
    fn cohomology_norm_bound_with_gamma() {
        let mut rng = ChaCha8Rng::seed_from_u64(73);
        let omega = [1.0, golden()];
        let trunc = 16;
        let rho = 0.15;
        let m = 3.0;
        let table = estimate_diophantine(&omega, trunc, &[0.05, 0.1], &[]).unwrap();
        let f = random_zero_average(&mut rng, 2, trunc, trunc, 0.4);
        let sol = solve_cohomology(&omega, &f).unwrap();
        let upper = NormParams::new(rho, m).unwrap();
        for eta in [0.05, 0.1] {
            let gamma = table.gamma_for_eta(eta).unwrap();
            let lower = NormParams::new(rho - eta, m).unwrap();
            let lhs = sol.solution.sobolev_norm(&lower);
            let rhs = f.sobolev_norm(&upper) / gamma;
            assert!(lhs <= rhs * (1.0 + 1e-12), "eta = {eta}: {lhs} > {rhs}");
        }
    }

    #[test]
    fn twisted_identity_and_single_mode() {
        let w = FourierSeries::zeros(1, 1, 8);
        let one = FourierSeries::scalar_constant(1, 8, c(1.0, 0.0));
        let v = solve_twisted_cohomology(&[1.0], c(1.0, 0.0), &w, &one).unwrap();
        assert!((v.scalar_average() - c(1.0, 0.0)).norm() < 1e-15);

        let e = FourierSeries::harmonic(1, 8, &[1], c(1.0, 0.0));
        let v1 = solve_twisted_cohomology(&[1.0], c(1.0, 0.0), &w, &e).unwrap();
        let want = c(1.0, 0.0) / c(1.0, 1.0);
        assert!((v1.scalar_coeff(&MultiIndex::new(vec![1])) - want).norm() < 1e-15);
    }

    #[test]
    fn twisted_round_trip_and_estimate() {
        let mut rng = ChaCha8Rng::seed_from_u64(79);
        let omega = [1.0];
        let trunc = 32;
        let rho = 0.3;
        let m = 2.0;
        let eta = 0.1;
        let table = estimate_diophantine(&omega, trunc, &[eta], &[]).unwrap();
        let gamma = table.gamma_for_eta(eta).unwrap();
        for _ in 0..10 {
            let beta = c(0.3, 0.0);
            let mut w = random_zero_average(&mut rng, 1, trunc, 2, 1.0);
            let wp = NormParams::new(rho, m).unwrap();
            let wn = w.sobolev_norm(&wp);
            if wn > 0.5 {
                w = w.scale(c(0.45 / wn, 0.0));
            }
            let f = random_zero_average(&mut rng, 1, trunc, 2, 1.0)
                .add_scalar_constant(c(0.3, 0.0))
                .unwrap();
            let op = TwistedOperator::new(&omega, beta, &w).unwrap();
            let v = op.apply_inverse(&f).unwrap();
            let back = op.apply_forward(&v, &w).unwrap();
            let err = back.sub(&f).unwrap().max_coeff_norm();
            assert!(err < 1e-10, "round trip error {err}");

            let lower = NormParams::new(rho - eta, m).unwrap();
            let lhs = v.sobolev_norm(&lower);
            let bound =
                f.sobolev_norm(&lower) / beta.norm() * (2.0 / gamma * w.sobolev_norm(&wp)).exp();
            assert!(lhs <= bound * (1.0 + 1e-10), "{lhs} > {bound}");
        }
    }

    #[test]
    fn twisted_rejects_zero_beta_and_average() {
        let w = FourierSeries::zeros(1, 4, 4).component(0);
        assert!(matches!(
            TwistedOperator::new(&[1.0], c(0.0, 0.0), &w),
            Err(Error::ZeroBeta)
        ));
        let bad_w = FourierSeries::scalar_constant(1, 4, c(0.5, 0.0));
        assert!(matches!(
            TwistedOperator::new(&[1.0], c(1.0, 0.0), &bad_w),
            Err(Error::NonZeroAverage(_))
        ));
    }

    #[test]
    fn oscillator_multiplier_values() {
        // k = 0 multiplier is -l a^(l-1)
        let op = make_oscillator_op(&[1.0], 3, c(-0.1, 0.0), 1.0, 64).unwrap();
        let m0 = op.multiplier(&MultiIndex::zero(1));
        assert!((m0 - c(-0.03, 0.0)).norm() < 1e-15);
        // minimum over |k| <= 64 is l |a|^(l-1), attained at k = 0
        assert!((op.min_modulus() - 0.03).abs() < 1e-14);
        assert!(op.argmin().is_zero());

        // delta = 0 with the quartic coefficient still nonnegative
        let op2 = make_oscillator_op(&[1.0], 3, c(-0.1, 0.0), 0.0, 64).unwrap();
        assert!(op2.min_modulus() >= 0.03 - 1e-14);

        // violated condition: l = 2, a < 0 makes l a^(l-1) negative
        assert!(matches!(
            make_oscillator_op(&[1.0], 2, c(-0.3, 0.0), 0.1, 8),
            Err(Error::OscillatorConditionViolated(_))
        ));
    }

    #[test]
    fn diophantine_table_basics() {
        // d = 1, omega = 1: min |k omega| = 1, so gamma(eta) >= 1
        let t = estimate_diophantine(&[1.0], 16, &[0.0, 0.1, 0.2], &[]).unwrap();
        for r in &t.exponential {
            assert!(r.gamma >= 1.0 - 1e-15);
        }
        // gamma nondecreasing in eta
        for w in t.exponential.windows(2) {
            assert!(w[1].gamma >= w[0].gamma - 1e-15);
        }
        // resonance detected
        assert!(matches!(
            estimate_diophantine(&[1.0, 1.0], 4, &[0.1], &[]),
            Err(Error::ResonantMode { .. })
        ));
        // parameter validation: gamma > 0, and tau > d - 1 so the admissible
        // frequency set keeps positive measure
        assert!(DiophantineParams::exponential(0.1, 0.05).is_ok());
        assert!(DiophantineParams::exponential(0.0, 0.05).is_err());
        assert!(DiophantineParams::polynomial(0.1, 1.5, 2).is_ok());
        assert!(DiophantineParams::polynomial(0.1, 0.9, 2).is_err());
    }

    #[test]
    fn diophantine_golden_mean_convergents() {
        // for omega = (1, golden) the worst modes are consecutive Fibonacci
        // pairs, and gamma(tau = 1) stabilizes as K grows
        let omega = [1.0, golden()];
        let mut fib = vec![1i64, 1];
        while *fib.last().unwrap() < 512 {
            let n = fib.len();
            fib.push(fib[n - 1] + fib[n - 2]);
        }
        let mut gammas = Vec::new();
        for trunc in [32, 64] {
            let t = estimate_diophantine(&omega, trunc, &[], &[1.0]).unwrap();
            let row = &t.polynomial[0];
            gammas.push(row.gamma);
            // argmin is a pair of consecutive Fibonacci numbers (p, -q)
            // with p/q a continued-fraction convergent of the golden mean
            let entries = row.argmin.entries();
            let p = entries[0].abs() as i64;
            let q = entries[1].abs() as i64;
            assert!(
                fib.windows(2).any(|w| w[0] == p && w[1] == q),
                "argmin {:?} is not a convergent",
                entries
            );
            // oracle: the minimum over the convergents with q <= K bounds it
            let oracle = fib
                .windows(2)
                .filter(|w| w[0] <= trunc as i64 && w[1] <= trunc as i64)
                .map(|w| {
                    let k = MultiIndex::new(vec![w[0] as i32, -(w[1] as i32)]);
                    k.dot(&omega).abs() * k.euclid()
                })
                .fold(f64::INFINITY, f64::min);
            assert!(row.gamma <= oracle * (1.0 + 1e-12));
        }
        // bounded away from zero and stabilizing
        assert!(gammas.iter().all(|&g| g > 0.1));
        assert!((gammas[0] - gammas[1]).abs() / gammas[0] < 0.5);
    }
}
