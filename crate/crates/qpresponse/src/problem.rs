//! Problem instances: forcings as Fourier–Taylor polynomials, structural
//! validation, and the decompositions the solver consumes.
//!
//! A forcing `f(theta, x)` is stored as a polynomial in the state whose
//! coefficients are truncated Fourier series in the angle.  For state
//! dimension `n > 1` the polynomial part is componentwise (component `i`
//! depends on `x_i` only); all cross coupling between state components
//! enters through the homogeneous leading map `phi`.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fourier::{FourierSeries, MultiIndex, NormParams};

/// Polynomial in `x` with Fourier-series coefficients in `theta`.
#[derive(Clone, Debug, PartialEq)]
pub struct FourierTaylor {
    dim_torus: usize,
    dim_target: usize,
    terms: BTreeMap<(u32, MultiIndex), Vec<Complex64>>,
}

impl FourierTaylor {
    pub fn new(dim_torus: usize, dim_target: usize) -> Self {
        FourierTaylor {
            dim_torus,
            dim_target,
            terms: BTreeMap::new(),
        }
    }

    pub fn scalar(dim_torus: usize) -> Self {
        FourierTaylor::new(dim_torus, 1)
    }

    pub fn dim_torus(&self) -> usize {
        self.dim_torus
    }

    pub fn dim_target(&self) -> usize {
        self.dim_target
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn max_degree(&self) -> u32 {
        self.terms.keys().map(|(j, _)| *j).max().unwrap_or(0)
    }

    pub fn max_mode_inf(&self) -> i32 {
        self.terms
            .keys()
            .map(|(_, k)| k.inf_norm())
            .max()
            .unwrap_or(0)
    }

    pub fn terms(&self) -> impl Iterator<Item = (u32, &MultiIndex, &[Complex64])> {
        self.terms.iter().map(|((j, k), v)| (*j, k, v.as_slice()))
    }

    /// Adds a coefficient block; errors on dimension mismatch.
    pub fn add_term(&mut self, degree: u32, mode: MultiIndex, coeff: &[Complex64]) -> Result<()> {
        if mode.dim() != self.dim_torus {
            return Err(Error::DimensionMismatch(format!(
                "mode {} has dimension {}, torus dimension is {}",
                mode,
                mode.dim(),
                self.dim_torus
            )));
        }
        if coeff.len() != self.dim_target {
            return Err(Error::DimensionMismatch(format!(
                "coefficient has {} components, target dimension is {}",
                coeff.len(),
                self.dim_target
            )));
        }
        let e = self
            .terms
            .entry((degree, mode))
            .or_insert_with(|| vec![Complex64::ZERO; self.dim_target]);
        for (a, b) in e.iter_mut().zip(coeff) {
            *a += b;
        }
        if e.iter().all(|c| c.norm() == 0.0) {
            let key = self
                .terms
                .iter()
                .find(|(_, v)| v.iter().all(|c| c.norm() == 0.0))
                .map(|(k, _)| k.clone());
            if let Some(k) = key {
                self.terms.remove(&k);
            }
        }
        Ok(())
    }

    /// Builder: scalar term `c x^degree e^(i k.theta)`.  Panics on dimension
    /// mismatch (programmatic construction only; the config path validates).
    pub fn with_term(mut self, degree: u32, mode: &[i32], c: Complex64) -> Self {
        assert_eq!(self.dim_target, 1, "with_term is for scalar forcings");
        self.add_term(degree, MultiIndex::new(mode), &[c])
            .expect("valid term");
        self
    }

    /// Builder: `amp cos(k.theta) x^degree` for component `component`.
    pub fn with_cos_component(
        mut self,
        degree: u32,
        mode: &[i32],
        component: usize,
        amp: f64,
    ) -> Self {
        let mut block = vec![Complex64::ZERO; self.dim_target];
        block[component] = Complex64::new(amp / 2.0, 0.0);
        let k = MultiIndex::new(mode);
        self.add_term(degree, k.clone(), &block)
            .expect("valid term");
        self.add_term(degree, k.negated(), &block)
            .expect("valid term");
        self
    }

    pub fn with_cos(self, degree: u32, mode: &[i32], amp: f64) -> Self {
        self.with_cos_component(degree, mode, 0, amp)
    }

    /// Builder: `amp sin(k.theta) x^degree` for component 0.
    pub fn with_sin(mut self, degree: u32, mode: &[i32], amp: f64) -> Self {
        let k = MultiIndex::new(mode);
        self.add_term(degree, k.clone(), &[Complex64::new(0.0, -amp / 2.0)])
            .expect("valid term");
        self.add_term(degree, k.negated(), &[Complex64::new(0.0, amp / 2.0)])
            .expect("valid term");
        self
    }

    /// Builder: constant-in-theta coefficient for `x^degree`, component `i`.
    pub fn with_const_component(mut self, degree: u32, component: usize, c: Complex64) -> Self {
        let mut block = vec![Complex64::ZERO; self.dim_target];
        block[component] = c;
        self.add_term(degree, MultiIndex::zero(self.dim_torus), &block)
            .expect("valid term");
        self
    }

    pub fn with_const(self, degree: u32, c: Complex64) -> Self {
        self.with_const_component(degree, 0, c)
    }

    /// Materializes the degree-`j` coefficient as a series at truncation `K`.
    pub fn degree_slice(&self, degree: u32, truncation: i32) -> Result<FourierSeries> {
        let mut parts = Vec::with_capacity(self.dim_target);
        for comp in 0..self.dim_target {
            let mut modes = Vec::new();
            for ((j, k), v) in &self.terms {
                if *j == degree && v[comp].norm() != 0.0 {
                    if k.inf_norm() > truncation {
                        return Err(Error::TruncationMismatch(format!(
                            "forcing mode {} exceeds truncation K = {}",
                            k, truncation
                        )));
                    }
                    modes.push((k.clone(), v[comp]));
                }
            }
            parts.push(FourierSeries::from_modes(
                self.dim_torus,
                truncation,
                modes,
            )?);
        }
        FourierSeries::from_components(&parts)
    }

    /// Sub-polynomial with degrees `>= jmin`.
    pub fn degrees_from(&self, jmin: u32) -> Self {
        FourierTaylor {
            dim_torus: self.dim_torus,
            dim_target: self.dim_target,
            terms: self
                .terms
                .iter()
                .filter(|((j, _), _)| *j >= jmin)
                .map(|(k, v)| (k.clone(), v.clone()))
                .collect(),
        }
    }

    /// Composition `F(theta, a + V(theta))`, exact up to truncation.
    ///
    /// Uses a componentwise Horner recursion, so it costs one truncated
    /// product per polynomial degree and never forms differences of nearly
    /// equal terms.
    pub fn eval(&self, a: &[Complex64], v: &FourierSeries) -> Result<FourierSeries> {
        Ok(self.eval_impl(a, v, None)?.0)
    }

    /// Like [`Self::eval`], additionally reporting the largest convolution-tail
    /// norm produced by the internal products.
    pub fn eval_with_tail(
        &self,
        a: &[Complex64],
        v: &FourierSeries,
        params: &NormParams,
    ) -> Result<(FourierSeries, f64)> {
        self.eval_impl(a, v, Some(params))
    }

    fn eval_impl(
        &self,
        a: &[Complex64],
        v: &FourierSeries,
        params: Option<&NormParams>,
    ) -> Result<(FourierSeries, f64)> {
        let n = self.dim_target;
        if a.len() != n {
            return Err(Error::DimensionMismatch(format!(
                "leading term has {} components, forcing target dimension is {}",
                a.len(),
                n
            )));
        }
        if v.dim_target() != n {
            return Err(Error::DimensionMismatch(format!(
                "correction has {} components, forcing target dimension is {}",
                v.dim_target(),
                n
            )));
        }
        let trunc = v.truncation();
        if self.is_empty() {
            return Ok((FourierSeries::zeros(self.dim_torus, n, trunc), 0.0));
        }
        let p = self.max_degree();
        let mut tail_max = 0.0f64;
        let mut parts = Vec::with_capacity(n);
        #[allow(clippy::needless_range_loop)]
        for comp in 0..n {
            let x = v.component(comp).add_scalar_constant(a[comp])?;
            let slice = |j: u32| -> Result<FourierSeries> {
                Ok(self.degree_slice(j, trunc)?.component(comp))
            };
            let mut acc = slice(p)?;
            for j in (0..p).rev() {
                let prod = match params {
                    Some(pr) => {
                        let (s, t) = acc.mul_with_tail(&x, pr)?;
                        tail_max = tail_max.max(t);
                        s
                    }
                    None => acc.mul(&x)?,
                };
                acc = prod.add(&slice(j)?)?;
            }
            parts.push(acc);
        }
        Ok((FourierSeries::from_components(&parts)?, tail_max))
    }

    /// Conjugate symmetry of every degree slice.
    pub fn is_real(&self) -> bool {
        let scale = self
            .terms
            .values()
            .flat_map(|v| v.iter().map(|c| c.norm()))
            .fold(1.0f64, f64::max);
        for ((j, k), v) in &self.terms {
            let neg = self
                .terms
                .get(&(*j, k.negated()))
                .cloned()
                .unwrap_or_else(|| vec![Complex64::ZERO; self.dim_target]);
            let err: f64 = v
                .iter()
                .zip(&neg)
                .map(|(a, b)| (a - b.conj()).norm_sqr())
                .sum::<f64>()
                .sqrt();
            if err > 1e-13 * scale {
                return false;
            }
        }
        true
    }
}

/// `S(a, V) = (a + V)^l - a^l - l a^(l-1) V`, computed in the binomial form
/// `sum_{j=2}^{l} C(l,j) a^(l-j) V^j`.  The literal subtraction would lose
/// about `l` digits to cancellation in the regime `|V| << |a|` where the
/// solver operates.
pub fn s_remainder(l: u32, a: Complex64, v: &FourierSeries) -> Result<FourierSeries> {
    Ok(s_remainder_impl(l, a, v, None)?.0)
}

pub fn s_remainder_with_tail(
    l: u32,
    a: Complex64,
    v: &FourierSeries,
    params: &NormParams,
) -> Result<(FourierSeries, f64)> {
    s_remainder_impl(l, a, v, Some(params))
}

fn s_remainder_impl(
    l: u32,
    a: Complex64,
    v: &FourierSeries,
    params: Option<&NormParams>,
) -> Result<(FourierSeries, f64)> {
    if v.dim_target() != 1 {
        return Err(Error::DimensionMismatch(
            "S(a, V) is defined for scalar series".into(),
        ));
    }
    let mut out = FourierSeries::zeros(v.dim_torus(), 1, v.truncation());
    let mut tail_max = 0.0f64;
    let mut vpow = v.clone();
    for j in 2..=l {
        vpow = match params {
            Some(p) => {
                let (s, t) = vpow.mul_with_tail(v, p)?;
                tail_max = tail_max.max(t);
                s
            }
            None => vpow.mul(v)?,
        };
        let coeff = Complex64::new(binomial(l, j), 0.0) * a.powu(l - j);
        out = out.add(&vpow.scale(coeff))?;
    }
    Ok((out, tail_max))
}

fn binomial(n: u32, k: u32) -> f64 {
    let mut num = 1.0f64;
    let mut den = 1.0f64;
    for i in 0..k.min(n - k) {
        num *= (n - i) as f64;
        den *= (i + 1) as f64;
    }
    num / den
}

/// Map `phi: R^n -> R^n` whose components are polynomials all of whose
/// monomials have total degree exactly `l`, so `phi(s x) = s^l phi(x)`.
#[derive(Clone, Debug, PartialEq)]
pub struct HomogeneousMap {
    dim: usize,
    degree: u32,
    components: Vec<BTreeMap<Vec<u32>, f64>>,
}

impl HomogeneousMap {
    pub fn new(dim: usize, degree: u32) -> Self {
        HomogeneousMap {
            dim,
            degree,
            components: vec![BTreeMap::new(); dim],
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn add_monomial(&mut self, component: usize, exponents: &[u32], coeff: f64) -> Result<()> {
        if component >= self.dim || exponents.len() != self.dim {
            return Err(Error::DimensionMismatch(format!(
                "monomial (component {component}, exponents {exponents:?}) does not fit dimension {}",
                self.dim
            )));
        }
        let total: u32 = exponents.iter().sum();
        if total != self.degree {
            return Err(Error::InvalidInput(format!(
                "monomial {exponents:?} has total degree {total}, map degree is {}",
                self.degree
            )));
        }
        *self.components[component]
            .entry(exponents.to_vec())
            .or_insert(0.0) += coeff;
        Ok(())
    }

    pub fn with_monomial(mut self, component: usize, exponents: &[u32], coeff: f64) -> Self {
        self.add_monomial(component, exponents, coeff)
            .expect("valid monomial");
        self
    }

    /// Decoupled `phi_i(x) = c_i x_i^l`.
    pub fn diagonal(coeffs: &[f64], degree: u32) -> Self {
        let n = coeffs.len();
        let mut map = HomogeneousMap::new(n, degree);
        for (i, &c) in coeffs.iter().enumerate() {
            let mut e = vec![0u32; n];
            e[i] = degree;
            map = map.with_monomial(i, &e, c);
        }
        map
    }

    pub fn eval(&self, x: &[Complex64]) -> Vec<Complex64> {
        self.components
            .iter()
            .map(|mons| {
                mons.iter()
                    .map(|(e, &c)| {
                        let mut t = Complex64::new(c, 0.0);
                        for (xi, &ei) in x.iter().zip(e) {
                            t *= xi.powu(ei);
                        }
                        t
                    })
                    .sum()
            })
            .collect()
    }

    pub fn jacobian(&self, x: &[Complex64]) -> DMatrix<Complex64> {
        let n = self.dim;
        let mut j = DMatrix::from_element(n, n, Complex64::ZERO);
        for (i, mons) in self.components.iter().enumerate() {
            for (e, &c) in mons {
                for (col, &ecol) in e.iter().enumerate() {
                    if ecol == 0 {
                        continue;
                    }
                    let mut t = Complex64::new(c * ecol as f64, 0.0);
                    for (q, (xq, &eq)) in x.iter().zip(e).enumerate() {
                        let p = if q == col { eq - 1 } else { eq };
                        t *= xq.powu(p);
                    }
                    j[(i, col)] += t;
                }
            }
        }
        j
    }

    /// Taylor remainder `phi(a + V) - phi(a) - Dphi(a) V`, expanded
    /// multinomially so only the genuinely quadratic-and-higher pieces are
    /// ever formed (no cancelling subtraction).
    pub fn taylor_remainder(&self, a: &[Complex64], v: &FourierSeries) -> Result<FourierSeries> {
        Ok(self.taylor_remainder_impl(a, v, None)?.0)
    }

    pub fn taylor_remainder_with_tail(
        &self,
        a: &[Complex64],
        v: &FourierSeries,
        params: &NormParams,
    ) -> Result<(FourierSeries, f64)> {
        self.taylor_remainder_impl(a, v, Some(params))
    }

    fn taylor_remainder_impl(
        &self,
        a: &[Complex64],
        v: &FourierSeries,
        params: Option<&NormParams>,
    ) -> Result<(FourierSeries, f64)> {
        let n = self.dim;
        if a.len() != n || v.dim_target() != n {
            return Err(Error::DimensionMismatch(
                "leading term / correction dimension does not match the map".into(),
            ));
        }
        let trunc = v.truncation();
        let d = v.dim_torus();
        let mut tail_max = 0.0f64;
        // power tables of the scalar components
        let mut pows: Vec<Vec<FourierSeries>> = Vec::with_capacity(n);
        for i in 0..n {
            let comp = v.component(i);
            let mut table = vec![FourierSeries::scalar_constant(
                d,
                trunc,
                Complex64::new(1.0, 0.0),
            )];
            for p in 1..=self.degree {
                let prev = &table[(p - 1) as usize];
                let next = match params {
                    Some(pr) => {
                        let (s, t) = prev.mul_with_tail(&comp, pr)?;
                        tail_max = tail_max.max(t);
                        s
                    }
                    None => prev.mul(&comp)?,
                };
                table.push(next);
            }
            pows.push(table);
        }
        let mut parts = Vec::with_capacity(n);
        for mons in &self.components {
            let mut acc = FourierSeries::zeros(d, 1, trunc);
            for (e, &c) in mons {
                // beta <= e componentwise, |beta| >= 2
                let mut betas: Vec<Vec<u32>> = vec![Vec::new()];
                for &ei in e {
                    let mut next = Vec::new();
                    for b in &betas {
                        for bi in 0..=ei {
                            let mut nb = b.clone();
                            nb.push(bi);
                            next.push(nb);
                        }
                    }
                    betas = next;
                }
                for beta in betas {
                    let order: u32 = beta.iter().sum();
                    if order < 2 {
                        continue;
                    }
                    let mut scalar = Complex64::new(c, 0.0);
                    for i in 0..n {
                        scalar *= Complex64::new(binomial(e[i], beta[i]), 0.0)
                            * a[i].powu(e[i] - beta[i]);
                    }
                    if scalar.norm() == 0.0 {
                        continue;
                    }
                    let mut term: Option<FourierSeries> = None;
                    for i in 0..n {
                        if beta[i] == 0 {
                            continue;
                        }
                        let factor = &pows[i][beta[i] as usize];
                        term = Some(match term {
                            None => factor.clone(),
                            Some(t) => match params {
                                Some(pr) => {
                                    let (s, tl) = t.mul_with_tail(factor, pr)?;
                                    tail_max = tail_max.max(tl);
                                    s
                                }
                                None => t.mul(factor)?,
                            },
                        });
                    }
                    let term = term.expect("order >= 2 implies a factor");
                    acc = acc.add(&term.scale(scalar))?;
                }
            }
            parts.push(acc);
        }
        Ok((FourierSeries::from_components(&parts)?, tail_max))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SolveMode {
    Response,
    ZeroAverage,
    Oscillator,
    Monodromy,
}

impl SolveMode {
    pub fn as_str(&self) -> &'static str {
        match self {
            SolveMode::Response => "response",
            SolveMode::ZeroAverage => "zero_average",
            SolveMode::Oscillator => "oscillator",
            SolveMode::Monodromy => "monodromy",
        }
    }
}

/// A complete problem instance for
/// `x' = x^l + h(omega t, x) + eps f(omega t, x)` and its variants.
#[derive(Clone, Debug, PartialEq)]
pub struct ProblemSpec {
    l: u32,
    dim_torus: usize,
    dim_state: usize,
    omega: Vec<f64>,
    epsilon: Complex64,
    f: FourierTaylor,
    h: FourierTaylor,
    delta: Option<f64>,
    phi: Option<HomogeneousMap>,
    mode: SolveMode,
    branch: usize,
    real_branch: bool,
    a0_guess: Option<Vec<f64>>,
}

impl ProblemSpec {
    pub fn new(
        l: u32,
        omega: Vec<f64>,
        epsilon: Complex64,
        f: FourierTaylor,
        h: FourierTaylor,
        mode: SolveMode,
    ) -> Result<Self> {
        if l < 2 {
            return Err(Error::InvalidInput(format!(
                "degeneracy order l must be at least 2 (got {l})"
            )));
        }
        if omega.is_empty() || omega.iter().any(|w| !w.is_finite()) {
            return Err(Error::InvalidInput("omega must be a finite vector".into()));
        }
        let d = omega.len();
        if f.dim_torus() != d || h.dim_torus() != d {
            return Err(Error::DimensionMismatch(
                "forcing torus dimension does not match omega".into(),
            ));
        }
        let n = f.dim_target();
        if h.dim_target() != n {
            return Err(Error::DimensionMismatch(
                "f and h target dimensions differ".into(),
            ));
        }
        let real_branch = epsilon.im == 0.0;
        Ok(ProblemSpec {
            l,
            dim_torus: d,
            dim_state: n,
            omega,
            epsilon,
            f,
            h,
            delta: None,
            phi: None,
            mode,
            branch: 0,
            real_branch,
            a0_guess: None,
        })
    }

    pub fn with_delta(mut self, delta: f64) -> Self {
        self.delta = Some(delta);
        self
    }

    pub fn with_phi(mut self, phi: HomogeneousMap) -> Result<Self> {
        if phi.dim() != self.dim_state {
            return Err(Error::DimensionMismatch(format!(
                "phi has dimension {}, state dimension is {}",
                phi.dim(),
                self.dim_state
            )));
        }
        if phi.degree() != self.l {
            return Err(Error::InvalidInput(format!(
                "phi has degree {}, problem degeneracy order is {}",
                phi.degree(),
                self.l
            )));
        }
        self.phi = Some(phi);
        Ok(self)
    }

    pub fn with_branch(mut self, branch: usize) -> Self {
        self.branch = branch;
        self
    }

    pub fn with_real_branch(mut self, real: bool) -> Self {
        self.real_branch = real;
        self
    }

    pub fn with_a0_guess(mut self, guess: Vec<f64>) -> Self {
        self.a0_guess = Some(guess);
        self
    }

    pub fn with_epsilon(mut self, epsilon: Complex64) -> Self {
        self.epsilon = epsilon;
        self
    }

    pub fn with_mode(mut self, mode: SolveMode) -> Self {
        self.mode = mode;
        self
    }

    pub fn l(&self) -> u32 {
        self.l
    }

    pub fn dim_torus(&self) -> usize {
        self.dim_torus
    }

    pub fn dim_state(&self) -> usize {
        self.dim_state
    }

    pub fn omega(&self) -> &[f64] {
        &self.omega
    }

    pub fn epsilon(&self) -> Complex64 {
        self.epsilon
    }

    pub fn f(&self) -> &FourierTaylor {
        &self.f
    }

    pub fn h(&self) -> &FourierTaylor {
        &self.h
    }

    pub fn delta(&self) -> Option<f64> {
        self.delta
    }

    pub fn phi(&self) -> Option<&HomogeneousMap> {
        self.phi.as_ref()
    }

    pub fn mode(&self) -> SolveMode {
        self.mode
    }

    pub fn branch(&self) -> usize {
        self.branch
    }

    pub fn real_branch(&self) -> bool {
        self.real_branch
    }

    pub fn a0_guess(&self) -> Option<&[f64]> {
        self.a0_guess.as_deref()
    }

    /// `f_bar(0)`: the `k = 0`, degree-0 coefficient of `f`.
    pub fn f_bar0(&self) -> Vec<Complex64> {
        let zero = MultiIndex::zero(self.dim_torus);
        self.f
            .terms()
            .find(|(j, k, _)| *j == 0 && **k == zero)
            .map(|(_, _, v)| v.to_vec())
            .unwrap_or_else(|| vec![Complex64::ZERO; self.dim_state])
    }

    /// `f_tilde(theta, 0)`: degree-0 part of `f` with the average removed.
    pub fn f_tilde0(&self, truncation: i32) -> Result<FourierSeries> {
        Ok(self.f.degree_slice(0, truncation)?.oscillatory_part())
    }

    /// Splits `g(theta, x) = f(theta, x) - f(theta, 0)` into the linear slice
    /// `g_1` and the rest `g_>` (degrees >= 2).  Scalar problems only.
    pub fn split_g(&self, truncation: i32) -> Result<(FourierSeries, FourierTaylor)> {
        if self.dim_state != 1 {
            return Err(Error::DimensionMismatch(
                "split_g is defined for scalar problems".into(),
            ));
        }
        let g1 = self.f.degree_slice(1, truncation)?;
        let g_higher = self.f.degrees_from(2);
        Ok((g1, g_higher))
    }

    /// Structural checks: non-resonance up to `2K`, vanishing order of `h`,
    /// and the mode-specific hypotheses.  Failures are reported with
    /// witnesses rather than raised.
    pub fn validate(&self, truncation: i32) -> ValidationReport {
        let mut checks = Vec::new();

        // non-resonance over 0 < |k|_inf <= 2K
        let omega_norm: f64 = self.omega.iter().map(|w| w * w).sum::<f64>().sqrt();
        let mut witness: Option<(MultiIndex, f64)> = None;
        let bound = 2 * truncation;
        let mut cube = vec![MultiIndex::zero(self.dim_torus)];
        for axis in 0..self.dim_torus {
            let mut next = Vec::new();
            for m in &cube {
                for e in -bound..=bound {
                    let mut v = m.entries().to_vec();
                    v[axis] = e;
                    next.push(MultiIndex::new(v));
                }
            }
            cube = next;
        }
        for k in &cube {
            if k.is_zero() {
                continue;
            }
            let val = k.dot(&self.omega).abs();
            if val <= 1e-14 * k.euclid() * omega_norm {
                let cand = k.canonical_sign();
                // name the smallest offending mode
                let better = match &witness {
                    None => true,
                    Some((w, _)) => (cand.inf_norm(), cand.clone()) < (w.inf_norm(), w.clone()),
                };
                if better {
                    witness = Some((cand, val));
                }
            }
        }
        checks.push(match witness {
            None => ValidationCheck::pass(
                "non_resonance",
                format!("|k.omega| > 0 for all 0 < |k|_inf <= {bound}"),
            ),
            Some((k, val)) => ValidationCheck::fail(
                "non_resonance",
                format!("resonant mode k = {k}: |k.omega| = {val:.3e}"),
            ),
        });

        // h vanishes to order l + 1
        let low_term = self
            .h
            .terms()
            .find(|(j, _, _)| *j <= self.l)
            .map(|(j, k, _)| (j, k.clone()));
        checks.push(match low_term {
            None => ValidationCheck::pass(
                "h_vanishing_order",
                format!("h has no terms of degree <= {}", self.l),
            ),
            Some((j, k)) => ValidationCheck::fail(
                "h_vanishing_order",
                format!("h contains a degree-{j} term at mode {k}"),
            ),
        });

        // mode-specific hypotheses on the average
        let fbar0 = self.f_bar0();
        let scale = self
            .f
            .terms()
            .flat_map(|(_, _, v)| v.iter().map(|c| c.norm()))
            .fold(1.0f64, f64::max);
        match self.mode {
            SolveMode::ZeroAverage => {
                let norm: f64 = fbar0.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
                checks.push(if norm <= 1e-13 * scale {
                    ValidationCheck::pass("average_zero", "f_bar(0) = 0".into())
                } else {
                    ValidationCheck::fail(
                        "average_zero",
                        format!("zero-average mode requires f_bar(0) = 0, found |f_bar(0)| = {norm:.3e}"),
                    )
                });
            }
            _ => {
                let bad = fbar0
                    .iter()
                    .enumerate()
                    .find(|(_, c)| c.norm() <= 1e-13 * scale);
                checks.push(match bad {
                    None => ValidationCheck::pass("average_nonzero", "f_bar(0) != 0".into()),
                    Some((i, _)) => ValidationCheck::fail(
                        "average_nonzero",
                        format!(
                            "component {i} of f_bar(0) vanishes; the zero_average mode handles this case"
                        ),
                    ),
                });
            }
        }

        if self.mode == SolveMode::Oscillator {
            let ok = self.dim_state == 1 && self.delta.is_some();
            checks.push(if ok {
                ValidationCheck::pass("oscillator_requirements", "n = 1 and delta present".into())
            } else {
                ValidationCheck::fail(
                    "oscillator_requirements",
                    "oscillator mode requires n = 1 and a damping delta".into(),
                )
            });
        }

        if self.mode == SolveMode::Monodromy && self.dim_state != 1 {
            checks.push(ValidationCheck::fail(
                "monodromy_requirements",
                "monodromy continuation requires n = 1".into(),
            ));
        }

        if self.dim_state > 1 {
            checks.push(match &self.phi {
                Some(_) => ValidationCheck::pass("phi_present", "homogeneous map supplied".into()),
                None => ValidationCheck::fail(
                    "phi_present",
                    "state dimension > 1 requires a homogeneous leading map phi".into(),
                ),
            });
        }

        ValidationReport { checks }
    }
}

#[derive(Clone, Debug)]
pub struct ValidationCheck {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl ValidationCheck {
    fn pass(name: &'static str, detail: String) -> Self {
        ValidationCheck {
            name,
            passed: true,
            detail,
        }
    }

    fn fail(name: &'static str, detail: String) -> Self {
        ValidationCheck {
            name,
            passed: false,
            detail,
        }
    }
}

#[derive(Clone, Debug)]
pub struct ValidationReport {
    pub checks: Vec<ValidationCheck>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &ValidationCheck> {
        self.checks.iter().filter(|c| !c.passed)
    }

    pub fn failure_summary(&self) -> String {
        self.failures()
            .map(|c| format!("{}: {}", c.name, c.detail))
            .collect::<Vec<_>>()
            .join("; ")
    }
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

    fn standard_f() -> FourierTaylor {
        // f = 2 + cos(theta) + x
        FourierTaylor::scalar(1)
            .with_const(0, c(2.0, 0.0))
            .with_cos(0, &[1], 1.0)
            .with_const(1, c(1.0, 0.0))
    }

    #[test]
    fn fbar0_and_ftilde0_read_slices() {
        let p = ProblemSpec::new(
            3,
            vec![1.0],
            c(1e-3, 0.0),
            standard_f(),
            FourierTaylor::scalar(1),
            SolveMode::Response,
        )
        .unwrap();
        assert_eq!(p.f_bar0()[0], c(2.0, 0.0));
        let ft = p.f_tilde0(8).unwrap();
        assert_eq!(ft.scalar_average(), Complex64::ZERO);
        let want = FourierSeries::cosine(1, 8, &[1], 1.0);
        assert!(ft.sub(&want).unwrap().max_coeff_norm() < 1e-15);

        // zero-average routing case
        let f2 = FourierTaylor::scalar(1)
            .with_cos(0, &[1], 1.0)
            .with_const(1, c(1.0, 0.0));
        let p2 = ProblemSpec::new(
            3,
            vec![1.0],
            c(1e-3, 0.0),
            f2,
            FourierTaylor::scalar(1),
            SolveMode::ZeroAverage,
        )
        .unwrap();
        assert_eq!(p2.f_bar0()[0], Complex64::ZERO);
        assert!(p2.validate(4).passed());
    }

    #[test]
    fn split_g_slices_by_degree() {
        // f = cos + (1 + sin) x + x^3
        let f = FourierTaylor::scalar(1)
            .with_cos(0, &[1], 1.0)
            .with_const(1, c(1.0, 0.0))
            .with_sin(1, &[1], 1.0)
            .with_const(3, c(1.0, 0.0));
        let p = ProblemSpec::new(
            3,
            vec![1.0],
            c(1.0, 0.0),
            f,
            FourierTaylor::scalar(1),
            SolveMode::Response,
        )
        .unwrap();
        let (g1, ghi) = p.split_g(8).unwrap();
        let want = FourierSeries::sine(1, 8, &[1], 1.0)
            .add_scalar_constant(c(1.0, 0.0))
            .unwrap();
        assert!(g1.sub(&want).unwrap().max_coeff_norm() < 1e-15);
        assert_eq!(ghi.max_degree(), 3);
        assert!(ghi.terms().all(|(j, _, _)| j >= 2));

        // reassembly f - f(theta, 0) = g1 x + g_> as an exact identity of terms
        let g_taylor = p.f().degrees_from(1);
        let mut rebuilt = FourierTaylor::scalar(1);
        for (k, cs) in g1.modes() {
            rebuilt.add_term(1, k.clone(), cs).unwrap();
        }
        for (j, k, v) in ghi.terms() {
            rebuilt.add_term(j, k.clone(), v).unwrap();
        }
        assert_eq!(rebuilt, g_taylor);

        // no x dependence
        let f0 = FourierTaylor::scalar(1).with_cos(0, &[1], 1.0);
        let p0 = ProblemSpec::new(
            2,
            vec![1.0],
            c(1.0, 0.0),
            f0,
            FourierTaylor::scalar(1),
            SolveMode::ZeroAverage,
        )
        .unwrap();
        let (g1, ghi) = p0.split_g(4).unwrap();
        assert_eq!(g1.num_modes(), 0);
        assert!(ghi.is_empty());
    }

    #[test]
    fn eval_matches_hand_expansion() {
        // F = x^2 at a = 1, V = cos: 3/2 + 2 cos + (1/2) cos 2theta
        let f = FourierTaylor::scalar(1).with_const(2, c(1.0, 0.0));
        let v = FourierSeries::cosine(1, 8, &[1], 1.0);
        let got = f.eval(&[c(1.0, 0.0)], &v).unwrap();
        assert!((got.scalar_average() - c(1.5, 0.0)).norm() < 1e-15);
        assert!((got.scalar_coeff(&MultiIndex::new(vec![1])) - c(1.0, 0.0)).norm() < 1e-15);
        assert!((got.scalar_coeff(&MultiIndex::new(vec![2])) - c(0.25, 0.0)).norm() < 1e-15);

        // degree-0 polynomial ignores (a, V)
        let f0 = FourierTaylor::scalar(1).with_cos(0, &[1], 0.3);
        let got0 = f0.eval(&[c(5.0, 0.0)], &v).unwrap();
        let want0 = FourierSeries::cosine(1, 8, &[1], 0.3);
        assert!(got0.sub(&want0).unwrap().max_coeff_norm() < 1e-15);
    }

    #[test]
    fn eval_matches_collocation_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        let mut f = FourierTaylor::scalar(1);
        for j in 0..=3u32 {
            for k in -2..=2i32 {
                let re = rng.random::<f64>() - 0.5;
                let im = rng.random::<f64>() - 0.5;
                f = f.with_term(j, &[k], c(re, im));
            }
        }
        let mut v = FourierSeries::zeros(1, 1, 16);
        for k in 1..=3i32 {
            v = v
                .add(&FourierSeries::cosine(
                    1,
                    16,
                    &[k],
                    0.1 * rng.random::<f64>(),
                ))
                .unwrap();
        }
        let a = c(0.3, 0.0);
        let composed = f.eval(&[a], &v).unwrap();
        let grid = 128;
        let vals = v.evaluate_grid(grid);
        let out = composed.evaluate_grid(grid);
        for (i, (xv, ov)) in vals.iter().zip(&out).enumerate() {
            let theta = [2.0 * std::f64::consts::PI * i as f64 / grid as f64];
            let x = a + xv[0];
            let mut want = Complex64::ZERO;
            let mut xp = Complex64::new(1.0, 0.0);
            for j in 0..=3u32 {
                let cj = f.degree_slice(j, 16).unwrap().evaluate_scalar_at(&theta);
                want += cj * xp;
                xp *= x;
            }
            assert!((want - ov[0]).norm() < 1e-12);
        }
    }

    #[test]
    fn eval_linear_in_polynomial() {
        let mut rng = ChaCha8Rng::seed_from_u64(43);
        let f1 = FourierTaylor::scalar(1)
            .with_cos(0, &[1], rng.random::<f64>())
            .with_const(2, c(rng.random::<f64>(), 0.0));
        let f2 = FourierTaylor::scalar(1)
            .with_sin(1, &[1], rng.random::<f64>())
            .with_const(3, c(rng.random::<f64>(), 0.0));
        let mut sum = f1.clone();
        for (j, k, v) in f2.terms() {
            sum.add_term(j, k.clone(), v).unwrap();
        }
        let v = FourierSeries::cosine(1, 16, &[1], 0.2);
        let a = [c(0.1, 0.0)];
        let lhs = sum.eval(&a, &v).unwrap();
        let rhs = f1
            .eval(&a, &v)
            .unwrap()
            .add(&f2.eval(&a, &v).unwrap())
            .unwrap();
        assert!(lhs.sub(&rhs).unwrap().max_coeff_norm() < 1e-14);
    }

    #[test]
    fn s_remainder_binomial_values() {
        // l = 2: S = V^2
        let v = FourierSeries::cosine(1, 8, &[1], 0.5);
        let s2 = s_remainder(2, c(0.3, 0.0), &v).unwrap();
        let want = v.powi(2).unwrap();
        assert!(s2.sub(&want).unwrap().max_coeff_norm() < 1e-16);

        // l = 3, constant V = c0: S = 3 a c0^2 + c0^3
        let c0 = c(0.2, 0.0);
        let vc = FourierSeries::scalar_constant(1, 4, c0);
        let s3 = s_remainder(3, c(-0.1, 0.0), &vc).unwrap();
        let want3 = c(3.0, 0.0) * c(-0.1, 0.0) * c0 * c0 + c0 * c0 * c0;
        assert!((s3.scalar_average() - want3).norm() < 1e-16);

        // S(a, 0) = 0 and first derivative vanishes at V = 0
        let zero = FourierSeries::zeros(1, 4, 4).component(0);
        assert_eq!(s_remainder(4, c(0.5, 0.0), &zero).unwrap().num_modes(), 0);
        let step = 1e-8;
        let dir = FourierSeries::scalar_constant(1, 4, c(step, 0.0));
        let s_eps = s_remainder(4, c(0.5, 0.0), &dir).unwrap();
        assert!(s_eps.scalar_average().norm() / step <= 1e-6);
    }

    #[test]
    fn s_remainder_agrees_with_cancelling_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(47);
        let params = NormParams::new(0.0, 0.0).unwrap();
        for l in 2..=5u32 {
            let a = c(0.4 * (rng.random::<f64>() + 0.2), 0.0);
            let mut v = FourierSeries::zeros(1, 1, 16);
            for k in 1..=3i32 {
                v = v
                    .add(&FourierSeries::cosine(
                        1,
                        16,
                        &[k],
                        0.05 * rng.random::<f64>(),
                    ))
                    .unwrap();
            }
            let s = s_remainder(l, a, &v).unwrap();
            // cancelling oracle: (a+V)^l - a^l - l a^(l-1) V
            let base = v.add_scalar_constant(a).unwrap();
            let lhs = base.powi(l).unwrap();
            let oracle = lhs
                .add_scalar_constant(-a.powu(l))
                .unwrap()
                .sub(&v.scale(c(l as f64, 0.0) * a.powu(l - 1)))
                .unwrap();
            let err = s.sub(&oracle).unwrap().sobolev_norm(&params);
            let scale = s.sobolev_norm(&params).max(1e-10);
            assert!(err / scale < 1e-13, "l = {l}: {err}");
        }
    }

    #[test]
    fn validate_flags_resonance_and_vanishing() {
        let f = FourierTaylor::new(2, 1).with_const_component(0, 0, c(1.0, 0.0));
        let p = ProblemSpec::new(
            2,
            vec![1.0, 1.0],
            c(0.01, 0.0),
            f.clone(),
            FourierTaylor::new(2, 1),
            SolveMode::Response,
        )
        .unwrap();
        let report = p.validate(2);
        assert!(!report.passed());
        let failure = report.failures().next().unwrap();
        assert_eq!(failure.name, "non_resonance");
        assert!(failure.detail.contains("(1,-1)"), "{}", failure.detail);

        // h with a degree-l term fails the vanishing check
        let h_bad = FourierTaylor::scalar(1).with_const(3, c(1.0, 0.0));
        let p2 = ProblemSpec::new(
            3,
            vec![1.0],
            c(0.01, 0.0),
            FourierTaylor::scalar(1).with_const(0, c(1.0, 0.0)),
            h_bad,
            SolveMode::Response,
        )
        .unwrap();
        let r2 = p2.validate(4);
        assert!(r2
            .failures()
            .any(|c| c.name == "h_vanishing_order" && c.detail.contains("degree-3")));

        // the standard golden-mean problem passes every check: l = 3,
        // omega = (1, (sqrt(5)-1)/2), f = cos theta_1 + x
        let golden = (5.0f64.sqrt() - 1.0) / 2.0;
        let f3 = FourierTaylor::new(2, 1)
            .with_cos_component(0, &[1, 0], 0, 1.0)
            .with_const_component(1, 0, c(1.0, 0.0));
        let p3 = ProblemSpec::new(
            3,
            vec![1.0, golden],
            c(1e-3, 0.0),
            f3,
            FourierTaylor::new(2, 1),
            SolveMode::ZeroAverage,
        )
        .unwrap();
        assert!(
            p3.validate(8).passed(),
            "{}",
            p3.validate(8).failure_summary()
        );
    }

    #[test]
    fn l_below_two_rejected() {
        let f = FourierTaylor::scalar(1).with_const(0, c(1.0, 0.0));
        assert!(ProblemSpec::new(
            1,
            vec![1.0],
            c(0.01, 0.0),
            f,
            FourierTaylor::scalar(1),
            SolveMode::Response
        )
        .is_err());
    }

    #[test]
    fn homogeneous_map_euler_identity() {
        let phi = HomogeneousMap::new(2, 3)
            .with_monomial(0, &[3, 0], 1.0)
            .with_monomial(0, &[1, 2], 0.3)
            .with_monomial(1, &[0, 3], 1.0)
            .with_monomial(1, &[2, 1], 0.3);
        let mut rng = ChaCha8Rng::seed_from_u64(53);
        let x: Vec<Complex64> = (0..2)
            .map(|_| c(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5))
            .collect();
        let lambda = 2.0;
        let xs: Vec<Complex64> = x.iter().map(|&xi| xi * lambda).collect();
        // phi(lambda x) = lambda^3 phi(x)
        let lhs = phi.eval(&xs);
        let rhs: Vec<Complex64> = phi.eval(&x).iter().map(|&v| v * lambda.powi(3)).collect();
        for (a, b) in lhs.iter().zip(&rhs) {
            assert!((a - b).norm() < 1e-12);
        }
        // Euler: Dphi(lambda x) v = lambda^(l-1) Dphi(x) v
        let j_scaled = phi.jacobian(&xs);
        let j = phi.jacobian(&x);
        let v = nalgebra::DVector::from_vec(vec![c(0.7, -0.2), c(-0.4, 0.1)]);
        let lhs = &j_scaled * &v;
        let rhs = &j * &v * Complex64::new(lambda.powi(2), 0.0);
        assert!((lhs - rhs).norm() < 1e-12);
    }

    #[test]
    fn taylor_remainder_matches_direct_expansion() {
        let phi = HomogeneousMap::new(2, 3)
            .with_monomial(0, &[3, 0], 1.0)
            .with_monomial(0, &[1, 2], 0.3)
            .with_monomial(1, &[0, 3], 1.0)
            .with_monomial(1, &[2, 1], 0.3);
        let a = [c(-0.5, 0.0), c(-0.6, 0.0)];
        let v1 = FourierSeries::cosine(1, 16, &[1], 0.05);
        let v2 = FourierSeries::sine(1, 16, &[1], 0.04);
        let v = FourierSeries::from_components(&[v1, v2]).unwrap();
        let rem = phi.taylor_remainder(&a, &v).unwrap();
        // oracle on a grid: phi(a+V) - phi(a) - Dphi(a) V pointwise
        let grid = 64;
        let vv = v.evaluate_grid(grid);
        let rr = rem.evaluate_grid(grid);
        let phia = phi.eval(&a);
        let ja = phi.jacobian(&a);
        for (pt, rpt) in vv.iter().zip(&rr) {
            let xpt: Vec<Complex64> = a.iter().zip(pt).map(|(ai, vi)| ai + vi).collect();
            let full = phi.eval(&xpt);
            for i in 0..2 {
                let lin: Complex64 = (0..2).map(|q| ja[(i, q)] * pt[q]).sum();
                let want = full[i] - phia[i] - lin;
                assert!((want - rpt[i]).norm() < 1e-13);
            }
        }
    }
}
