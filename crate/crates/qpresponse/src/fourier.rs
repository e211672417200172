//! Truncated multi-dimensional Fourier series.
//!
//! A [`FourierSeries`] stores the coefficients of a function on the torus
//! `T^d` with values in `C^n`, truncated to modes `|k|_inf <= K`.  Products
//! are exact truncated convolutions (never grid collocation), so every
//! operation stays inside the space of trigonometric polynomials and the
//! discarded convolution tail is observable as a diagnostic.
//!
//! Norms are the Fourier-weighted family
//!
//! ```text
//! ||V||^2 = sum_k |V_k|^2 e^(2 rho |k|) (|k|^2 + 1)^m
//! ```
//!
//! with `|k|` the Euclidean norm of the mode (this convention is used
//! consistently everywhere, including the small-divisor estimates).

use std::collections::BTreeMap;
use std::fmt;
use std::io::{BufRead, Write};

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Relative tolerance for the conjugate-symmetry ("real-valued") check.
const REAL_FLAG_TOL: f64 = 1e-13;

/// Largest dense accumulator we are willing to allocate for a convolution.
const MAX_DENSE_CELLS: usize = 1 << 22;

/// Fourier mode `k` in `Z^d`.  Ordered lexicographically so that coefficient
/// storage and iteration are canonical.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct MultiIndex(Vec<i32>);

impl MultiIndex {
    pub fn new(entries: impl Into<Vec<i32>>) -> Self {
        MultiIndex(entries.into())
    }

    pub fn zero(dim: usize) -> Self {
        MultiIndex(vec![0; dim])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn entries(&self) -> &[i32] {
        &self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&e| e == 0)
    }

    pub fn inf_norm(&self) -> i32 {
        self.0.iter().map(|e| e.abs()).max().unwrap_or(0)
    }

    /// Euclidean norm |k|, the convention used in every norm weight.
    pub fn euclid(&self) -> f64 {
        self.0
            .iter()
            .map(|&e| (e as f64) * (e as f64))
            .sum::<f64>()
            .sqrt()
    }

    pub fn dot(&self, omega: &[f64]) -> f64 {
        self.0.iter().zip(omega).map(|(&k, &w)| k as f64 * w).sum()
    }

    pub fn negated(&self) -> Self {
        MultiIndex(self.0.iter().map(|&e| -e).collect())
    }

    pub fn sum(&self, other: &Self) -> Self {
        MultiIndex(self.0.iter().zip(&other.0).map(|(&a, &b)| a + b).collect())
    }

    /// Representative with the first non-zero entry positive; used when
    /// reporting resonance witnesses so `(1,-1)` is named rather than
    /// `(-1,1)`.
    pub fn canonical_sign(&self) -> Self {
        match self.0.iter().find(|&&e| e != 0) {
            Some(&e) if e < 0 => self.negated(),
            _ => self.clone(),
        }
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, e) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{e}")?;
        }
        write!(f, ")")
    }
}

/// Weight parameters of the `H^{rho,m}` norm family.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NormParams {
    pub rho: f64,
    pub m: f64,
}

impl NormParams {
    pub fn new(rho: f64, m: f64) -> Result<Self> {
        if !(rho.is_finite() && m.is_finite()) || rho < 0.0 || m < 0.0 {
            return Err(Error::InvalidInput(format!(
                "norm parameters must be finite and nonnegative (rho = {rho}, m = {m})"
            )));
        }
        Ok(NormParams { rho, m })
    }

    /// Weight e^(rho |k|) (|k|^2 + 1)^(m/2) at mode `k`.
    pub fn weight(&self, k: &MultiIndex) -> f64 {
        let kk = k.euclid();
        (self.rho * kk).exp() * (kk * kk + 1.0).powf(self.m / 2.0)
    }

    /// Checks that the parameters select a valid regime for torus dimension
    /// `d`: analytic (`rho > 0`, `m > d`) or Sobolev (`rho = 0`, `m > d/2`).
    pub fn validate_mode(&self, dim_torus: usize) -> Result<()> {
        let d = dim_torus as f64;
        if self.rho > 0.0 && self.m > d {
            return Ok(());
        }
        if self.rho == 0.0 && self.m > d / 2.0 {
            return Ok(());
        }
        Err(Error::InvalidInput(format!(
            "norm parameters (rho = {}, m = {}) fit neither the analytic regime \
             (rho > 0, m > d) nor the Sobolev regime (rho = 0, m > d/2) for d = {}",
            self.rho, self.m, dim_torus
        )))
    }
}

/// Truncated Fourier series of a function `T^d -> C^n`.
///
/// Absent modes are zero.  Values are immutable in normal use: every
/// operation returns a fresh series, so sharing across threads is safe.
#[derive(Clone, Debug, PartialEq)]
pub struct FourierSeries {
    dim_torus: usize,
    dim_target: usize,
    truncation: i32,
    coeffs: BTreeMap<MultiIndex, Vec<Complex64>>,
    real_valued: bool,
}

impl FourierSeries {
    pub fn zeros(dim_torus: usize, dim_target: usize, truncation: i32) -> Self {
        FourierSeries {
            dim_torus,
            dim_target,
            truncation,
            coeffs: BTreeMap::new(),
            real_valued: true,
        }
    }

    pub fn constant(dim_torus: usize, truncation: i32, values: &[Complex64]) -> Self {
        let mut s = FourierSeries::zeros(dim_torus, values.len(), truncation);
        if values.iter().any(|c| c.norm() != 0.0) {
            s.coeffs
                .insert(MultiIndex::zero(dim_torus), values.to_vec());
        }
        s.real_valued = values.iter().all(|c| c.im == 0.0);
        s
    }

    pub fn scalar_constant(dim_torus: usize, truncation: i32, value: Complex64) -> Self {
        FourierSeries::constant(dim_torus, truncation, &[value])
    }

    /// Builds a scalar series from explicit `(mode, coefficient)` pairs.
    pub fn from_modes(
        dim_torus: usize,
        truncation: i32,
        modes: impl IntoIterator<Item = (MultiIndex, Complex64)>,
    ) -> Result<Self> {
        let mut s = FourierSeries::zeros(dim_torus, 1, truncation);
        for (k, c) in modes {
            s.check_mode(&k)?;
            if c.norm() != 0.0 {
                let e = s.coeffs.entry(k).or_insert_with(|| vec![Complex64::ZERO]);
                e[0] += c;
            }
        }
        s.real_valued = s.check_conjugate_symmetry();
        Ok(s)
    }

    /// `amplitude * cos(k . theta)` as the mode pair `+-k`.
    pub fn cosine(dim_torus: usize, truncation: i32, k: &[i32], amplitude: f64) -> Self {
        let k = MultiIndex::new(k);
        let half = Complex64::new(amplitude / 2.0, 0.0);
        let mut s = FourierSeries::zeros(dim_torus, 1, truncation);
        s.insert_scalar(k.negated(), half);
        s.insert_scalar(k, half);
        s.real_valued = true;
        s
    }

    /// `amplitude * sin(k . theta)` as the mode pair `+-k`.
    pub fn sine(dim_torus: usize, truncation: i32, k: &[i32], amplitude: f64) -> Self {
        let k = MultiIndex::new(k);
        let mut s = FourierSeries::zeros(dim_torus, 1, truncation);
        s.insert_scalar(k.negated(), Complex64::new(0.0, amplitude / 2.0));
        s.insert_scalar(k, Complex64::new(0.0, -amplitude / 2.0));
        s.real_valued = true;
        s
    }

    /// Single complex exponential `c e^(i k.theta)`.
    pub fn harmonic(dim_torus: usize, truncation: i32, k: &[i32], c: Complex64) -> Self {
        let mut s = FourierSeries::zeros(dim_torus, 1, truncation);
        s.insert_scalar(MultiIndex::new(k), c);
        s.real_valued = s.check_conjugate_symmetry();
        s
    }

    fn insert_scalar(&mut self, k: MultiIndex, c: Complex64) {
        if c.norm() != 0.0 {
            let e = self
                .coeffs
                .entry(k)
                .or_insert_with(|| vec![Complex64::ZERO; self.dim_target]);
            e[0] += c;
        }
    }

    fn check_mode(&self, k: &MultiIndex) -> Result<()> {
        if k.dim() != self.dim_torus {
            return Err(Error::DimensionMismatch(format!(
                "mode {} has dimension {}, series torus dimension is {}",
                k,
                k.dim(),
                self.dim_torus
            )));
        }
        if k.inf_norm() > self.truncation {
            return Err(Error::TruncationMismatch(format!(
                "mode {} exceeds truncation K = {}",
                k, self.truncation
            )));
        }
        Ok(())
    }

    pub fn dim_torus(&self) -> usize {
        self.dim_torus
    }

    pub fn dim_target(&self) -> usize {
        self.dim_target
    }

    pub fn truncation(&self) -> i32 {
        self.truncation
    }

    pub fn num_modes(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_real_valued(&self) -> bool {
        self.real_valued
    }

    pub fn modes(&self) -> impl Iterator<Item = (&MultiIndex, &[Complex64])> {
        self.coeffs.iter().map(|(k, v)| (k, v.as_slice()))
    }

    pub fn coeff(&self, k: &MultiIndex) -> Vec<Complex64> {
        self.coeffs
            .get(k)
            .cloned()
            .unwrap_or_else(|| vec![Complex64::ZERO; self.dim_target])
    }

    pub fn scalar_coeff(&self, k: &MultiIndex) -> Complex64 {
        self.coeffs.get(k).map(|v| v[0]).unwrap_or(Complex64::ZERO)
    }

    /// Inserts/overwrites one coefficient and re-derives the real-valued flag.
    pub fn set_coeff(&mut self, k: MultiIndex, values: &[Complex64]) -> Result<()> {
        self.check_mode(&k)?;
        if values.len() != self.dim_target {
            return Err(Error::DimensionMismatch(format!(
                "coefficient has {} components, series target dimension is {}",
                values.len(),
                self.dim_target
            )));
        }
        if values.iter().all(|c| c.norm() == 0.0) {
            self.coeffs.remove(&k);
        } else {
            self.coeffs.insert(k, values.to_vec());
        }
        self.real_valued = self.check_conjugate_symmetry();
        Ok(())
    }

    /// Largest coefficient magnitude (Euclidean over components).
    pub fn max_coeff_norm(&self) -> f64 {
        self.coeffs
            .values()
            .map(|v| coeff_norm(v))
            .fold(0.0, f64::max)
    }

    /// Verifies `coeff(-k) = conj(coeff(k))` within a relative tolerance.
    pub fn check_conjugate_symmetry(&self) -> bool {
        let scale = self.max_coeff_norm().max(1.0);
        for (k, v) in &self.coeffs {
            let neg = self.coeff(&k.negated());
            let err: f64 = v
                .iter()
                .zip(&neg)
                .map(|(a, b)| (a - b.conj()).norm_sqr())
                .sum::<f64>()
                .sqrt();
            if err > REAL_FLAG_TOL * scale.max(coeff_norm(v)) {
                return false;
            }
        }
        true
    }

    fn require_compatible(&self, other: &Self) -> Result<()> {
        if self.dim_torus != other.dim_torus {
            return Err(Error::DimensionMismatch(format!(
                "torus dimensions differ ({} vs {})",
                self.dim_torus, other.dim_torus
            )));
        }
        if self.truncation != other.truncation {
            return Err(Error::TruncationMismatch(format!(
                "truncations differ ({} vs {})",
                self.truncation, other.truncation
            )));
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.require_compatible(other)?;
        if self.dim_target != other.dim_target {
            return Err(Error::DimensionMismatch(format!(
                "target dimensions differ ({} vs {})",
                self.dim_target, other.dim_target
            )));
        }
        let mut out = self.clone();
        for (k, v) in &other.coeffs {
            let e = out
                .coeffs
                .entry(k.clone())
                .or_insert_with(|| vec![Complex64::ZERO; out.dim_target]);
            for (a, b) in e.iter_mut().zip(v) {
                *a += b;
            }
        }
        out.coeffs.retain(|_, v| coeff_norm(v) != 0.0);
        out.real_valued = self.real_valued && other.real_valued;
        Ok(out)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Self {
        self.scale(Complex64::new(-1.0, 0.0))
    }

    pub fn scale(&self, c: Complex64) -> Self {
        let mut out = self.clone();
        if c.norm() == 0.0 {
            out.coeffs.clear();
            out.real_valued = true;
            return out;
        }
        for v in out.coeffs.values_mut() {
            for a in v.iter_mut() {
                *a *= c;
            }
        }
        out.real_valued = self.real_valued && c.im == 0.0;
        out
    }

    /// Adds a constant to the series (shifts the `k = 0` coefficient).
    pub fn add_constant(&self, c: &[Complex64]) -> Result<Self> {
        self.add(&FourierSeries::constant(self.dim_torus, self.truncation, c))
    }

    pub fn add_scalar_constant(&self, c: Complex64) -> Result<Self> {
        self.add_constant(&[c])
    }

    /// The `k = 0` coefficient (zero if absent).
    pub fn average(&self) -> Vec<Complex64> {
        self.coeff(&MultiIndex::zero(self.dim_torus))
    }

    pub fn scalar_average(&self) -> Complex64 {
        self.scalar_coeff(&MultiIndex::zero(self.dim_torus))
    }

    /// Copy with the `k = 0` coefficient removed; the result has zero average
    /// exactly.
    pub fn oscillatory_part(&self) -> Self {
        let mut out = self.clone();
        out.coeffs.remove(&MultiIndex::zero(self.dim_torus));
        out
    }

    /// Truncated product.  Both operands scalar, or one scalar (broadcast).
    pub fn mul(&self, other: &Self) -> Result<Self> {
        Ok(self.mul_impl(other, None)?.0)
    }

    /// Truncated product together with the `H^{rho,m}` norm of the discarded
    /// convolution tail (the shells `K < |k|_inf <= 2K`).
    pub fn mul_with_tail(&self, other: &Self, params: &NormParams) -> Result<(Self, f64)> {
        self.mul_impl(other, Some(params))
    }

    fn mul_impl(&self, other: &Self, tail: Option<&NormParams>) -> Result<(Self, f64)> {
        self.require_compatible(other)?;
        let (vector, scalar) = match (self.dim_target, other.dim_target) {
            (1, 1) => (self, other),
            (_, 1) => (self, other),
            (1, _) => (other, self),
            (a, b) => {
                return Err(Error::DimensionMismatch(format!(
                    "product needs a scalar operand (target dimensions {a} and {b})"
                )))
            }
        };
        let scalar_map: BTreeMap<MultiIndex, Complex64> = scalar
            .coeffs
            .iter()
            .map(|(k, v)| (k.clone(), v[0]))
            .collect();
        let n = vector.dim_target;
        let mut out = FourierSeries::zeros(self.dim_torus, n, self.truncation);
        let mut tail_sq = 0.0;
        for comp in 0..n {
            let comp_map: BTreeMap<MultiIndex, Complex64> = vector
                .coeffs
                .iter()
                .map(|(k, v)| (k.clone(), v[comp]))
                .collect();
            let (prod, t_sq) = convolve(
                &comp_map,
                &scalar_map,
                self.dim_torus,
                self.truncation,
                tail,
            );
            tail_sq += t_sq;
            for (k, c) in prod {
                if c.norm() != 0.0 {
                    out.coeffs
                        .entry(k)
                        .or_insert_with(|| vec![Complex64::ZERO; n])[comp] = c;
                }
            }
        }
        out.coeffs.retain(|_, v| coeff_norm(v) != 0.0);
        out.real_valued = self.real_valued && other.real_valued;
        Ok((out, tail_sq.sqrt()))
    }

    /// `p`-fold truncated product; `p = 0` is rejected (use a constant
    /// series instead).
    pub fn powi(&self, p: u32) -> Result<Self> {
        Ok(self.powi_impl(p, None)?.0)
    }

    pub fn powi_with_tail(&self, p: u32, params: &NormParams) -> Result<(Self, f64)> {
        self.powi_impl(p, Some(params))
    }

    fn powi_impl(&self, p: u32, tail: Option<&NormParams>) -> Result<(Self, f64)> {
        if p == 0 {
            return Err(Error::InvalidInput(
                "power 0 is rejected; use a constant series".into(),
            ));
        }
        if self.dim_target != 1 {
            return Err(Error::DimensionMismatch(
                "powers are defined for scalar series".into(),
            ));
        }
        let mut acc = self.clone();
        let mut tail_max = 0.0f64;
        for _ in 1..p {
            let (next, t) = acc.mul_impl(self, tail)?;
            acc = next;
            tail_max = tail_max.max(t);
        }
        Ok((acc, tail_max))
    }

    /// Directional derivative along the flow: coefficient at `k` is
    /// multiplied by `i (k . omega)`.
    pub fn omega_derivative(&self, omega: &[f64]) -> Result<Self> {
        if omega.len() != self.dim_torus {
            return Err(Error::DimensionMismatch(format!(
                "omega has dimension {}, torus dimension is {}",
                omega.len(),
                self.dim_torus
            )));
        }
        let mut out = FourierSeries::zeros(self.dim_torus, self.dim_target, self.truncation);
        for (k, v) in &self.coeffs {
            let factor = Complex64::new(0.0, k.dot(omega));
            let w: Vec<Complex64> = v.iter().map(|c| c * factor).collect();
            if coeff_norm(&w) != 0.0 {
                out.coeffs.insert(k.clone(), w);
            }
        }
        out.real_valued = self.real_valued;
        Ok(out)
    }

    /// `H^{rho,m}` norm over the stored modes.
    pub fn sobolev_norm(&self, params: &NormParams) -> f64 {
        self.coeffs
            .iter()
            .map(|(k, v)| {
                let t = coeff_norm(v) * params.weight(k);
                t * t
            })
            .sum::<f64>()
            .sqrt()
    }

    /// Upper bound `sum_k |V_k|` for the sup norm over real arguments.
    pub fn sup_norm_estimate(&self) -> f64 {
        self.coeffs.values().map(|v| coeff_norm(v)).sum()
    }

    /// `sum_k V_k e^(i k.theta)`.
    pub fn evaluate_at(&self, theta: &[f64]) -> Vec<Complex64> {
        let mut out = vec![Complex64::ZERO; self.dim_target];
        for (k, v) in &self.coeffs {
            let phase = k.dot(theta);
            let e = Complex64::new(phase.cos(), phase.sin());
            for (o, c) in out.iter_mut().zip(v) {
                *o += c * e;
            }
        }
        out
    }

    pub fn evaluate_scalar_at(&self, theta: &[f64]) -> Complex64 {
        self.evaluate_at(theta)[0]
    }

    /// Evaluates on the uniform grid `theta_j = 2 pi i_j / grid`, returning
    /// `grid^d` points in row-major order (last axis fastest).
    pub fn evaluate_grid(&self, grid: usize) -> Vec<Vec<Complex64>> {
        let d = self.dim_torus;
        let total = grid.pow(d as u32);
        let tau = 2.0 * std::f64::consts::PI / grid as f64;
        let twiddle: Vec<Complex64> = (0..grid)
            .map(|r| {
                let p = tau * r as f64;
                Complex64::new(p.cos(), p.sin())
            })
            .collect();
        let mut out = vec![vec![Complex64::ZERO; self.dim_target]; total];
        let mut idx = vec![0usize; d];
        for point in out.iter_mut() {
            for (k, v) in &self.coeffs {
                let mut e = Complex64::new(1.0, 0.0);
                for (axis, &ka) in k.entries().iter().enumerate() {
                    let r = (ka as i64 * idx[axis] as i64).rem_euclid(grid as i64) as usize;
                    e *= twiddle[r];
                }
                for (o, c) in point.iter_mut().zip(v) {
                    *o += c * e;
                }
            }
            // advance the multi-index, last axis fastest
            for axis in (0..d).rev() {
                idx[axis] += 1;
                if idx[axis] < grid {
                    break;
                }
                idx[axis] = 0;
            }
        }
        out
    }

    /// Exponential of a scalar series by the power series on the coefficient
    /// algebra; terms are added until the l1 norm of the next term drops
    /// below `1e-16` of the accumulated sum.
    pub fn exp_series(&self) -> Result<Self> {
        if self.dim_target != 1 {
            return Err(Error::DimensionMismatch(
                "exp is defined for scalar series".into(),
            ));
        }
        let mut sum = FourierSeries::scalar_constant(
            self.dim_torus,
            self.truncation,
            Complex64::new(1.0, 0.0),
        );
        let mut term = sum.clone();
        for j in 1..=400u32 {
            term = term.mul(self)?.scale(Complex64::new(1.0 / j as f64, 0.0));
            sum = sum.add(&term)?;
            if term.sup_norm_estimate() <= 1e-16 * sum.sup_norm_estimate() {
                return Ok(sum);
            }
        }
        Err(Error::InvalidInput(
            "exponential series did not converge within 400 terms".into(),
        ))
    }

    /// Extracts component `i` as a scalar series.
    pub fn component(&self, i: usize) -> Self {
        let mut out = FourierSeries::zeros(self.dim_torus, 1, self.truncation);
        for (k, v) in &self.coeffs {
            if v[i].norm() != 0.0 {
                out.coeffs.insert(k.clone(), vec![v[i]]);
            }
        }
        out.real_valued = out.check_conjugate_symmetry();
        out
    }

    pub fn from_components(parts: &[FourierSeries]) -> Result<Self> {
        let first = parts
            .first()
            .ok_or_else(|| Error::InvalidInput("no components given".into()))?;
        let n = parts.len();
        let mut out = FourierSeries::zeros(first.dim_torus, n, first.truncation);
        for (i, p) in parts.iter().enumerate() {
            first.require_compatible(p)?;
            if p.dim_target != 1 {
                return Err(Error::DimensionMismatch(
                    "components must be scalar series".into(),
                ));
            }
            for (k, v) in &p.coeffs {
                out.coeffs
                    .entry(k.clone())
                    .or_insert_with(|| vec![Complex64::ZERO; n])[i] = v[0];
            }
        }
        out.real_valued = parts.iter().all(|p| p.real_valued);
        Ok(out)
    }

    /// Re-embeds the series at a (larger) truncation.
    pub fn with_truncation(&self, truncation: i32) -> Result<Self> {
        let max_mode = self.coeffs.keys().map(|k| k.inf_norm()).max().unwrap_or(0);
        if truncation < max_mode {
            return Err(Error::TruncationMismatch(format!(
                "series has modes up to {max_mode}, requested truncation {truncation}"
            )));
        }
        let mut out = self.clone();
        out.truncation = truncation;
        Ok(out)
    }

    /// Writes the coefficient dump: one line per stored mode,
    /// `k_1 .. k_d  re im` per target component, 17 significant digits.
    pub fn write_dump<W: Write>(&self, w: &mut W) -> std::io::Result<()> {
        for (k, v) in &self.coeffs {
            for e in k.entries() {
                write!(w, "{e} ")?;
            }
            for (i, c) in v.iter().enumerate() {
                let sep = if i + 1 == v.len() { "" } else { " " };
                write!(w, "{:.16e} {:.16e}{}", c.re, c.im, sep)?;
            }
            writeln!(w)?;
        }
        Ok(())
    }

    pub fn dump_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_dump(&mut buf).expect("write to Vec");
        String::from_utf8(buf).expect("dump is ascii")
    }

    /// Reads a coefficient dump produced by [`Self::write_dump`].
    pub fn read_dump<R: BufRead>(
        dim_torus: usize,
        dim_target: usize,
        truncation: i32,
        r: R,
    ) -> Result<Self> {
        let mut out = FourierSeries::zeros(dim_torus, dim_target, truncation);
        for (lineno, line) in r.lines().enumerate() {
            let line = line?;
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split_whitespace().collect();
            if fields.len() != dim_torus + 2 * dim_target {
                return Err(Error::InvalidInput(format!(
                    "dump line {}: expected {} fields, found {}",
                    lineno + 1,
                    dim_torus + 2 * dim_target,
                    fields.len()
                )));
            }
            let parse = |s: &str| -> Result<f64> {
                s.parse::<f64>()
                    .map_err(|e| Error::InvalidInput(format!("dump line {}: {e}", lineno + 1)))
            };
            let mut k = Vec::with_capacity(dim_torus);
            for f in &fields[..dim_torus] {
                k.push(
                    f.parse::<i32>().map_err(|e| {
                        Error::InvalidInput(format!("dump line {}: {e}", lineno + 1))
                    })?,
                );
            }
            let mut v = Vec::with_capacity(dim_target);
            for i in 0..dim_target {
                let re = parse(fields[dim_torus + 2 * i])?;
                let im = parse(fields[dim_torus + 2 * i + 1])?;
                v.push(Complex64::new(re, im));
            }
            let k = MultiIndex::new(k);
            out.check_mode(&k)?;
            out.coeffs.insert(k, v);
        }
        out.coeffs.retain(|_, v| coeff_norm(v) != 0.0);
        out.real_valued = out.check_conjugate_symmetry();
        Ok(out)
    }
}

fn coeff_norm(v: &[Complex64]) -> f64 {
    v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
}

/// Scalar truncated convolution.  Accumulates over all mode pairs; modes with
/// `|k|_inf <= K` form the product, the shells up to `2K` feed the optional
/// tail diagnostic.  The accumulator is densified when an operand fills more
/// than a quarter of the truncated mode cube.
fn convolve(
    a: &BTreeMap<MultiIndex, Complex64>,
    b: &BTreeMap<MultiIndex, Complex64>,
    d: usize,
    trunc: i32,
    tail: Option<&NormParams>,
) -> (BTreeMap<MultiIndex, Complex64>, f64) {
    let side = 2 * trunc as usize + 1;
    let cells = side.pow(d as u32) as f64;
    let fill = (a.len().max(b.len())) as f64 / cells;
    let side2 = 4 * trunc as i64 + 1;
    let dense_cells = (side2 as usize).checked_pow(d as u32);
    let use_dense = fill > 0.25 && dense_cells.map(|c| c <= MAX_DENSE_CELLS).unwrap_or(false);

    let mut kept: BTreeMap<MultiIndex, Complex64> = BTreeMap::new();
    let mut tail_sq = 0.0f64;

    if use_dense {
        let total = dense_cells.unwrap();
        // strides for linear indexing of [-2K, 2K]^d; index is additive up to
        // the constant offset of the zero mode.
        let mut strides = vec![1i64; d];
        for i in (0..d.saturating_sub(1)).rev() {
            strides[i] = strides[i + 1] * side2;
        }
        let lin = |k: &MultiIndex| -> i64 {
            k.entries()
                .iter()
                .zip(&strides)
                .map(|(&e, &s)| (e as i64 + 2 * trunc as i64) * s)
                .sum()
        };
        let zero_off = lin(&MultiIndex::zero(d));
        let al: Vec<(i64, Complex64)> = a.iter().map(|(k, &c)| (lin(k), c)).collect();
        let bl: Vec<(i64, Complex64)> = b.iter().map(|(k, &c)| (lin(k), c)).collect();
        let mut acc = vec![Complex64::ZERO; total];
        for &(ia, ca) in &al {
            for &(ib, cb) in &bl {
                acc[(ia + ib - zero_off) as usize] += ca * cb;
            }
        }
        for (idx, &c) in acc.iter().enumerate() {
            if c.norm() == 0.0 {
                continue;
            }
            let mut rem = idx as i64;
            let mut entries = vec![0i32; d];
            for (axis, &s) in strides.iter().enumerate() {
                entries[axis] = (rem / s - 2 * trunc as i64) as i32;
                rem %= s;
            }
            let k = MultiIndex::new(entries);
            if k.inf_norm() <= trunc {
                kept.insert(k, c);
            } else if let Some(p) = tail {
                let t = c.norm() * p.weight(&k);
                tail_sq += t * t;
            }
        }
    } else {
        let mut tail_acc: BTreeMap<MultiIndex, Complex64> = BTreeMap::new();
        for (ka, ca) in a {
            for (kb, cb) in b {
                let k = ka.sum(kb);
                let c = ca * cb;
                if k.inf_norm() <= trunc {
                    *kept.entry(k).or_insert(Complex64::ZERO) += c;
                } else if tail.is_some() {
                    *tail_acc.entry(k).or_insert(Complex64::ZERO) += c;
                }
            }
        }
        if let Some(p) = tail {
            for (k, c) in tail_acc {
                let t = c.norm() * p.weight(&k);
                tail_sq += t * t;
            }
        }
        kept.retain(|_, c| c.norm() != 0.0);
    }
    (kept, tail_sq)
}
