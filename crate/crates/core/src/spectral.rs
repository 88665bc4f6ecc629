//! Unitary DFT and the compact spectral mapping between `R^N` and `C^{N/2}`.
//!
//! The forward kernel is `e^{-2πijk/N}` and both directions are scaled by
//! `1/√N`. Every feasible-set target elsewhere in the crate assumes this
//! normalization, so no other convention is exposed.
//!
//! Latent vectors are treated as plain 1-D sequences in whatever order the
//! caller provides; multi-dimensional layouts are flattened upstream.

use std::cell::RefCell;
use std::f64::consts::SQRT_2;
use std::ops::Deref;
use std::sync::Arc;

use num_complex::Complex64;
use realfft::{ComplexToReal, RealFftPlanner, RealToComplex};
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};

thread_local! {
    static COMPLEX_PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
    static REAL_PLANNER: RefCell<RealFftPlanner<f64>> = RefCell::new(RealFftPlanner::new());
}

fn complex_fft(n: usize, inverse: bool) -> Arc<dyn Fft<f64>> {
    COMPLEX_PLANNER.with(|p| {
        let mut p = p.borrow_mut();
        if inverse {
            p.plan_fft_inverse(n)
        } else {
            p.plan_fft_forward(n)
        }
    })
}

fn real_forward(n: usize) -> Arc<dyn RealToComplex<f64>> {
    REAL_PLANNER.with(|p| p.borrow_mut().plan_fft_forward(n))
}

fn real_inverse(n: usize) -> Arc<dyn ComplexToReal<f64>> {
    REAL_PLANNER.with(|p| p.borrow_mut().plan_fft_inverse(n))
}

fn check_even_len(n: usize) -> Result<()> {
    if n < 2 || !n.is_multiple_of(2) {
        return Err(Error::Dimension(format!(
            "latent length must be even and at least 2, got {n}"
        )));
    }
    Ok(())
}

/// A real spatial-domain latent of even length with finite entries.
#[derive(Clone, Debug, PartialEq)]
pub struct LatentVector(Vec<f64>);

impl LatentVector {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        check_even_len(values.len())?;
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::Validation(format!(
                "latent entry {i} is not finite ({})",
                values[i]
            )));
        }
        Ok(Self(values))
    }

    pub fn zeros(n: usize) -> Result<Self> {
        Self::new(vec![0.0; n])
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }

    pub fn norm_sq(&self) -> f64 {
        self.0.iter().map(|v| v * v).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }
}

impl Deref for LatentVector {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}

/// Full unitary DFT of a real vector. Conjugate-symmetric by construction.
#[derive(Clone, Debug, PartialEq)]
pub struct HermitianSpectrum(Vec<Complex64>);

impl HermitianSpectrum {
    /// Wraps raw coefficients without checking symmetry; see [`check_hermitian`].
    pub fn from_coeffs(coeffs: Vec<Complex64>) -> Self {
        Self(coeffs)
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.0
    }

    pub fn into_coeffs(self) -> Vec<Complex64> {
        self.0
    }
}

/// Redundancy-free spectrum `y = F(x)` of length `N/2`.
#[derive(Clone, Debug, PartialEq)]
pub struct CompactSpectrum(Vec<Complex64>);

impl CompactSpectrum {
    pub fn new(coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::Dimension(
                "compact spectrum must be non-empty".into(),
            ));
        }
        if let Some(i) = coeffs.iter().position(|c| !c.is_finite()) {
            return Err(Error::Validation(format!(
                "compact coefficient {i} is not finite"
            )));
        }
        Ok(Self(coeffs))
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.0
    }

    pub fn coeffs_mut(&mut self) -> &mut [Complex64] {
        &mut self.0
    }

    pub fn into_coeffs(self) -> Vec<Complex64> {
        self.0
    }

    /// Length of the spatial vector this spectrum maps back to.
    pub fn latent_len(&self) -> usize {
        2 * self.0.len()
    }

    pub fn norm_sq(&self) -> f64 {
        self.0.iter().map(|c| c.norm_sqr()).sum()
    }
}

/// Unitary forward DFT of a real vector.
pub fn dft_unitary(x: &LatentVector) -> HermitianSpectrum {
    let mut buf: Vec<Complex64> = x.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    complex_fft(buf.len(), false).process(&mut buf);
    let scale = 1.0 / (buf.len() as f64).sqrt();
    buf.iter_mut().for_each(|c| *c *= scale);
    HermitianSpectrum(buf)
}

/// Unitary forward DFT of an arbitrary complex sequence.
pub fn dft_unitary_complex(input: &[Complex64]) -> Vec<Complex64> {
    transform_complex(input, false)
}

/// Unitary inverse DFT of an arbitrary complex sequence.
pub fn idft_unitary(input: &[Complex64]) -> Vec<Complex64> {
    transform_complex(input, true)
}

fn transform_complex(input: &[Complex64], inverse: bool) -> Vec<Complex64> {
    let mut buf = input.to_vec();
    if buf.is_empty() {
        return buf;
    }
    complex_fft(buf.len(), inverse).process(&mut buf);
    let scale = 1.0 / (buf.len() as f64).sqrt();
    buf.iter_mut().for_each(|c| *c *= scale);
    buf
}

/// `y = F(x)`: packs the two real bins `x̂_0`, `x̂_{N/2}` into `y_0` and keeps
/// `x̂_1 .. x̂_{N/2-1}` as they are.
pub fn to_compact(x: &LatentVector) -> CompactSpectrum {
    let n = x.len();
    let half = n / 2;
    let fft = real_forward(n);
    let mut input = x.as_slice().to_vec();
    let mut spectrum = fft.make_output_vec();
    let mut scratch = fft.make_scratch_vec();
    fft.process_with_scratch(&mut input, &mut spectrum, &mut scratch)
        .expect("buffer sizes come from the plan");

    let scale = 1.0 / (n as f64).sqrt();
    let mut y = Vec::with_capacity(half);
    y.push(Complex64::new(spectrum[0].re, spectrum[half].re) * (scale / SQRT_2));
    y.extend(spectrum[1..half].iter().map(|c| c * scale));
    CompactSpectrum(y)
}

/// `x = F⁻¹(y)`. The real-output inverse FFT only reads the independent half
/// of the Hermitian spectrum, so the result is real by construction.
pub fn from_compact(y: &CompactSpectrum) -> LatentVector {
    let half = y.0.len();
    let n = 2 * half;
    let fft = real_inverse(n);
    let mut spectrum = fft.make_input_vec();
    spectrum[0] = Complex64::new(SQRT_2 * y.0[0].re, 0.0);
    spectrum[half] = Complex64::new(SQRT_2 * y.0[0].im, 0.0);
    spectrum[1..half].copy_from_slice(&y.0[1..]);
    let mut out = fft.make_output_vec();
    let mut scratch = fft.make_scratch_vec();
    fft.process_with_scratch(&mut spectrum, &mut out, &mut scratch)
        .expect("DC and Nyquist bins are real");

    let scale = 1.0 / (n as f64).sqrt();
    out.iter_mut().for_each(|v| *v *= scale);
    LatentVector(out)
}

/// Rebuilds the full Hermitian spectrum `x̂` from a compact one.
pub fn expand_compact(y: &CompactSpectrum) -> HermitianSpectrum {
    let half = y.0.len();
    let n = 2 * half;
    let mut full = vec![Complex64::new(0.0, 0.0); n];
    full[0] = Complex64::new(SQRT_2 * y.0[0].re, 0.0);
    full[half] = Complex64::new(SQRT_2 * y.0[0].im, 0.0);
    for k in 1..half {
        full[k] = y.0[k];
        full[n - k] = y.0[k].conj();
    }
    HermitianSpectrum(full)
}

/// Inverse through the full complex DFT. Slower than [`from_compact`], but it
/// materializes the imaginary part of the spatial result and rejects it when
/// it exceeds `1e-10·(1 + ‖y‖)`.
pub fn from_compact_checked(y: &CompactSpectrum) -> Result<LatentVector> {
    let full = expand_compact(y);
    let spatial = idft_unitary(full.coeffs());
    let residue = spatial.iter().map(|c| c.im.abs()).fold(0.0, f64::max);
    let limit = 1e-10 * (1.0 + y.norm_sq().sqrt());
    if residue >= limit {
        return Err(Error::Numerical(format!(
            "inverse DFT left imaginary residue {residue:e} (limit {limit:e})"
        )));
    }
    Ok(LatentVector(spatial.into_iter().map(|c| c.re).collect()))
}

/// `|c|` without `hypot` on the common path; falls back to it when the
/// squared magnitude would underflow or overflow.
#[inline]
pub(crate) fn magnitude(c: Complex64) -> f64 {
    let sq = c.norm_sqr();
    if sq.is_normal() {
        sq.sqrt()
    } else {
        c.norm()
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HermitianReport {
    /// `max_k |s_k − conj(s_{N−k})|` over `k = 1..N/2−1`.
    pub max_pair_deviation: f64,
    pub dc_imag: f64,
    pub nyquist_imag: f64,
    pub passed: bool,
}

impl HermitianReport {
    pub fn max_deviation(&self) -> f64 {
        self.max_pair_deviation
            .max(self.dc_imag)
            .max(self.nyquist_imag)
    }
}

pub fn check_hermitian(s: &HermitianSpectrum, tol: f64) -> Result<HermitianReport> {
    if tol.is_nan() || tol <= 0.0 {
        return Err(Error::Validation(format!(
            "tolerance must be positive, got {tol}"
        )));
    }
    let c = s.coeffs();
    let n = c.len();
    check_even_len(n)?;
    let max_pair_deviation = (1..n / 2)
        .map(|k| (c[k] - c[n - k].conj()).norm())
        .fold(0.0, f64::max);
    let dc_imag = c[0].im.abs();
    let nyquist_imag = c[n / 2].im.abs();
    let passed = max_pair_deviation < tol && dc_imag < tol && nyquist_imag < tol;
    Ok(HermitianReport {
        max_pair_deviation,
        dc_imag,
        nyquist_imag,
        passed,
    })
}
