//! Eigendecomposition of shift matrices, the graph Fourier transform,
//! filter kernels, exact spectral filtering and the shifted Chebyshev
//! approximation of a kernel.

use std::f64::consts::PI;
use std::fmt;
use std::io::Write;

use faer::{Mat, Side};

use crate::error::{Error, Result};
use crate::shift::{ShiftKind, ShiftMatrix};

/// Largest shift dimension handled by the dense eigensolver.
pub const MAX_DENSE_N: usize = 5000;

/// Relative residual tolerated for `S V = V Λ`.
pub const EIG_RESIDUAL_TOL: f64 = 1e-8;

/// Eigenvalues with magnitude below this (relative to the spectral scale)
/// count as zero when checking kernel poles.
pub const ZERO_EIGENVALUE_TOL: f64 = 1e-9;

/// Default number of trapezoid intervals for Chebyshev coefficients.
pub const DEFAULT_QUADRATURE_POINTS: usize = 8192;

/// Eigenvalues in ascending order with the forward and inverse eigenbasis.
#[derive(Debug, Clone)]
pub struct Spectrum {
    kind: ShiftKind,
    eigenvalues: Vec<f64>,
    basis: Mat<f64>,
    inverse_basis: Mat<f64>,
}

/// Dense eigendecomposition of a shift matrix.
///
/// Symmetric kinds go straight to the symmetric solver with
/// `V^{-1} = V^T`. The random-walk and augmented Laplacians are similar to
/// symmetric matrices through a positive diagonal `P`; they are solved in
/// that form so the spectrum is real and `V = P U`, `V^{-1} = U^T P^{-1}`.
/// Eigenvector signs are fixed so the first non-negligible entry is
/// positive.
pub fn eig(shift: &ShiftMatrix) -> Result<Spectrum> {
    let n = shift.n();
    if n > MAX_DENSE_N {
        return Err(Error::Parameter(format!(
            "dense eigendecomposition limited to n <= {MAX_DENSE_N}, got {n}"
        )));
    }
    let sym = shift.symmetric_form();
    let evd = sym.selfadjoint_eigendecomposition(Side::Lower);
    let raw_values = evd.s().column_vector();
    let u = evd.u();

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| raw_values.read(a).total_cmp(&raw_values.read(b)));
    let eigenvalues: Vec<f64> = order.iter().map(|&c| raw_values.read(c)).collect();

    let mut unit = Mat::<f64>::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        let col = u.col(src);
        let scale = col.norm_max();
        let pivot = (0..n)
            .map(|i| col.read(i))
            .find(|x| x.abs() > 1e-8 * scale)
            .unwrap_or(1.0);
        let sign = if pivot < 0.0 { -1.0 } else { 1.0 };
        for i in 0..n {
            unit[(i, dst)] = sign * col.read(i);
        }
    }

    let (basis, inverse_basis) = match shift.similarity() {
        None => {
            let inverse = unit.transpose().to_owned();
            (unit, inverse)
        }
        Some(p) => {
            let basis = Mat::from_fn(n, n, |i, j| p[i] * unit[(i, j)]);
            let inverse = Mat::from_fn(n, n, |i, j| unit[(j, i)] / p[j]);
            (basis, inverse)
        }
    };

    let spectrum = Spectrum {
        kind: shift.kind(),
        eigenvalues,
        basis,
        inverse_basis,
    };
    let residual = spectrum.residual(shift);
    if !(residual <= EIG_RESIDUAL_TOL) {
        return Err(Error::NumericalFailure(format!(
            "eigendecomposition residual {residual:e} exceeds {EIG_RESIDUAL_TOL:e}"
        )));
    }
    Ok(spectrum)
}

impl Spectrum {
    pub fn kind(&self) -> ShiftKind {
        self.kind
    }

    pub fn n(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn basis(&self) -> &Mat<f64> {
        &self.basis
    }

    pub fn inverse_basis(&self) -> &Mat<f64> {
        &self.inverse_basis
    }

    pub fn eigenvector(&self, index: usize) -> Vec<f64> {
        (0..self.n()).map(|i| self.basis[(i, index)]).collect()
    }

    /// `max |S V - V Λ| / (max(‖S‖_∞, 1) · max |V|)`, computed with sparse
    /// products.
    pub fn residual(&self, shift: &ShiftMatrix) -> f64 {
        let n = self.n();
        let mut worst = 0.0f64;
        let mut column = vec![0.0; n];
        let mut image = vec![0.0; n];
        let mut vmax = 0.0f64;
        for c in 0..n {
            for (i, x) in column.iter_mut().enumerate() {
                *x = self.basis[(i, c)];
                vmax = vmax.max(x.abs());
            }
            shift.apply_into(&column, &mut image);
            let lambda = self.eigenvalues[c];
            for i in 0..n {
                worst = worst.max((image[i] - lambda * column[i]).abs());
            }
        }
        if n == 0 {
            return 0.0;
        }
        worst / (shift.norm_inf().max(1.0) * vmax)
    }

    fn check_len(&self, len: usize) -> Result<()> {
        if len != self.n() {
            return Err(Error::DimensionMismatch {
                expected: self.n(),
                actual: len,
            });
        }
        Ok(())
    }

    /// Graph Fourier transform `x̂ = V^{-1} x`.
    pub fn gft(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_len(x.len())?;
        Ok(mat_vec(&self.inverse_basis, x))
    }

    /// Inverse transform `x = V x̂`.
    pub fn igft(&self, xhat: &[f64]) -> Result<Vec<f64>> {
        self.check_len(xhat.len())?;
        Ok(mat_vec(&self.basis, xhat))
    }

    /// Scale used to decide when an eigenvalue is numerically zero.
    fn zero_threshold(&self) -> f64 {
        let scale = self
            .eigenvalues
            .iter()
            .fold(1.0f64, |acc, &l| acc.max(l.abs()));
        ZERO_EIGENVALUE_TOL * scale
    }

    /// Writes `index,eigenvalue` rows.
    pub fn write_eigenvalues_csv<W: Write>(&self, mut writer: W) -> Result<()> {
        writeln!(writer, "index,eigenvalue")?;
        for (i, l) in self.eigenvalues.iter().enumerate() {
            writeln!(writer, "{i},{l:.17e}")?;
        }
        Ok(())
    }
}

fn mat_vec(m: &Mat<f64>, x: &[f64]) -> Vec<f64> {
    let col = faer::col::from_slice::<f64>(x);
    let y = m * col;
    (0..m.nrows()).map(|i| y.read(i)).collect()
}

/// Spectral filter kernels `h(λ)`.
#[derive(Clone, Copy)]
pub enum FilterKernel {
    /// `(1-α)/(1-α(1-λ))`, random walk with restart.
    Cia {
        alpha: f64,
    },
    /// `(1-λ)^Γ`, early-terminated random walk.
    SybilRank {
        gamma: u32,
    },
    /// `1/λ`; a pole at a zero eigenvalue is an error unless the input has
    /// no component there.
    Inverse,
    /// `1/λ` with `h(0) := 0`. Nonstandard.
    PseudoInverse,
    /// `1` if `λ <= cutoff`, else `0`.
    IdealLowPass {
        cutoff: f64,
    },
    /// `e^{-sλ}`, the heat kernel.
    Heat {
        s: f64,
    },
    Custom(fn(f64) -> f64),
}

impl fmt::Debug for FilterKernel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Cia { alpha } => write!(f, "Cia {{ alpha: {alpha} }}"),
            Self::SybilRank { gamma } => write!(f, "SybilRank {{ gamma: {gamma} }}"),
            Self::Inverse => f.write_str("Inverse"),
            Self::PseudoInverse => f.write_str("PseudoInverse"),
            Self::IdealLowPass { cutoff } => write!(f, "IdealLowPass {{ cutoff: {cutoff} }}"),
            Self::Heat { s } => write!(f, "Heat {{ s: {s} }}"),
            Self::Custom(_) => f.write_str("Custom(..)"),
        }
    }
}

impl FilterKernel {
    /// Evaluates `h(λ)` directly.
    pub fn value(&self, lambda: f64) -> f64 {
        match *self {
            Self::Cia { alpha } => (1.0 - alpha) / (1.0 - alpha * (1.0 - lambda)),
            Self::SybilRank { gamma } => (1.0 - lambda).powi(gamma as i32),
            Self::Inverse | Self::PseudoInverse => 1.0 / lambda,
            Self::IdealLowPass { cutoff } => {
                if lambda <= cutoff {
                    1.0
                } else {
                    0.0
                }
            }
            Self::Heat { s } => (-s * lambda).exp(),
            Self::Custom(h) => h(lambda),
        }
    }

    /// `h(λ)` on a spectrum, with `None` marking a pole. `zero` is the
    /// magnitude below which an eigenvalue is treated as exactly zero.
    fn response(&self, lambda: f64, zero: f64) -> Option<f64> {
        match self {
            Self::Inverse if lambda.abs() <= zero => None,
            Self::PseudoInverse if lambda.abs() <= zero => Some(0.0),
            _ => Some(self.value(lambda)).filter(|v| v.is_finite()),
        }
    }
}

/// `V h(Λ) V^{-1} q`.
pub fn apply_filter(spec: &Spectrum, kernel: &FilterKernel, q: &[f64]) -> Result<Vec<f64>> {
    let mut qhat = spec.gft(q)?;
    let zero = spec.zero_threshold();
    let scale = qhat.iter().fold(0.0f64, |acc, x| acc.max(x.abs()));
    for (coef, &lambda) in qhat.iter_mut().zip(spec.eigenvalues()) {
        match kernel.response(lambda, zero) {
            Some(h) => *coef *= h,
            None if coef.abs() <= 1e-12 * scale.max(f64::MIN_POSITIVE) => *coef = 0.0,
            None => return Err(Error::SingularFilter { eigenvalue: lambda }),
        }
    }
    spec.igft(&qhat)
}

/// Shifted Chebyshev coefficients
/// `c̃_k = (2/π) ∫_0^π h(cos θ + 1) cos(kθ) dθ`, `k = 0..=order`, by the
/// trapezoid rule with `quadrature_points` intervals.
pub fn chebyshev_coeffs(kernel: &FilterKernel, order: usize, quadrature_points: usize) -> Vec<f64> {
    let m = quadrature_points.max(1);
    let step = PI / m as f64;
    let samples: Vec<f64> = (0..=m)
        .map(|j| {
            let w = if j == 0 || j == m { 0.5 } else { 1.0 };
            w * kernel.value((j as f64 * step).cos() + 1.0)
        })
        .collect();
    (0..=order)
        .map(|k| {
            let sum: f64 = samples
                .iter()
                .enumerate()
                .map(|(j, &hs)| hs * (k as f64 * j as f64 * step).cos())
                .sum();
            2.0 / PI * step * sum
        })
        .collect()
}

/// `c̃_0/2 q + Σ_k c̃_k T̃_k(S) q` via the three-term recursion
/// `T̃_k = 2(S - I) T̃_{k-1} - T̃_{k-2}`. Only sparse products with `S` are
/// used, so the cost is `O(K |E|)`.
pub fn chebyshev_apply(shift: &ShiftMatrix, coeffs: &[f64], q: &[f64]) -> Result<Vec<f64>> {
    let n = shift.n();
    if q.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            actual: q.len(),
        });
    }
    match shift.spectral_support() {
        Some((lo, hi)) if lo >= 0.0 && hi <= 2.0 => {}
        other => {
            return Err(Error::Domain(format!(
            "Chebyshev expansion needs a spectrum inside [0, 2], shift {} has support {other:?}",
            shift.kind()
        )))
        }
    }
    let Some((&c0, rest)) = coeffs.split_first() else {
        return Ok(vec![0.0; n]);
    };
    let mut out: Vec<f64> = q.iter().map(|&x| 0.5 * c0 * x).collect();
    if rest.is_empty() {
        return Ok(out);
    }

    let mut scratch = vec![0.0; n];
    // (S - I) x
    let mut centered = |x: &[f64], dst: &mut Vec<f64>| {
        shift.apply_into(x, &mut scratch);
        for ((d, s), xi) in dst.iter_mut().zip(&scratch).zip(x) {
            *d = s - xi;
        }
    };

    let mut prev = q.to_vec();
    let mut curr = vec![0.0; n];
    centered(&prev, &mut curr);
    for (o, c) in out.iter_mut().zip(&curr) {
        *o += rest[0] * c;
    }
    let mut next = vec![0.0; n];
    for &ck in &rest[1..] {
        centered(&curr, &mut next);
        for (nx, p) in next.iter_mut().zip(&prev) {
            *nx = 2.0 * *nx - p;
        }
        for (o, x) in out.iter_mut().zip(&next) {
            *o += ck * x;
        }
        std::mem::swap(&mut prev, &mut curr);
        std::mem::swap(&mut curr, &mut next);
    }
    Ok(out)
}
