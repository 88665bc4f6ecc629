//! Soft-regularization baselines.
//!
//! * [`l_norm_loss`]: negative log-likelihood of `‖x‖₂` under the χ_N
//!   distribution.
//! * [`l_power_loss`]: blockwise ℓ1 penalty on the magnitudes of the **full**
//!   length-N DFT, split into `2P` blocks of size `B`. This is deliberately
//!   not the compact spectrum used by the hard constraints: the full DFT
//!   carries the Hermitian duplicates, so the two definitions disagree even
//!   on feasible points.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::block::BlockLayout;
use crate::error::{Error, Result};
use crate::spectral::{dft_unitary, idft_unitary, magnitude, LatentVector};

/// Per-block ℓ1 target factor of the power-spectral penalty (`μ·B`).
pub const POWER_MU: f64 = 0.875;

/// Regularization coefficient used for the baselines.
pub const BASELINE_COEFFICIENT: f64 = 2.0;

/// Below this norm the regularizer gradient is too small to rescale.
const RESCALE_FLOOR: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RegularizerKind {
    NormChi,
    PowerSpectral,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Weighting {
    #[default]
    Fixed,
    /// Rescale the regularizer gradient to the reward-gradient norm.
    GradientNormalized,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegularizerSpec {
    pub kind: RegularizerKind,
    pub coefficient: f64,
    pub weighting: Weighting,
}

impl RegularizerSpec {
    pub fn new(kind: RegularizerKind, coefficient: f64, weighting: Weighting) -> Result<Self> {
        if !coefficient.is_finite() || coefficient < 0.0 {
            return Err(Error::Validation(format!(
                "regularization coefficient must be finite and non-negative, got {coefficient}"
            )));
        }
        Ok(Self {
            kind,
            coefficient,
            weighting,
        })
    }

    /// Loss value and gradient of this regularizer at `x`.
    pub fn loss(&self, x: &LatentVector, layout: &BlockLayout) -> Result<(f64, Vec<f64>)> {
        match self.kind {
            RegularizerKind::NormChi => l_norm_loss(x),
            RegularizerKind::PowerSpectral => l_power_loss(x, layout),
        }
    }
}

/// `−log p_{χ_N}(‖x‖)` with `p_{χ_N}(r) = r^{N−1} e^{−r²/2} / (2^{N/2−1} Γ(N/2))`.
///
/// Stationary exactly on the sphere `‖x‖² = N − 1`.
pub fn l_norm_loss(x: &LatentVector) -> Result<(f64, Vec<f64>)> {
    let r2 = x.norm_sq();
    if r2 == 0.0 {
        return Err(Error::SingularInput(
            "χ log-density is −∞ at the origin".into(),
        ));
    }
    let n = x.len() as f64;
    let log_pdf = (n - 1.0) * 0.5 * r2.ln()
        - 0.5 * r2
        - (0.5 * n - 1.0) * std::f64::consts::LN_2
        - ln_gamma(0.5 * n);
    let radial = 1.0 - (n - 1.0) / r2;
    let gradient = x.iter().map(|v| v * radial).collect();
    Ok((-log_pdf, gradient))
}

/// `(1/N) Σ_{p<2P} |‖x̂^(p)‖₁ − μB|` over blocks of the full unitary DFT.
///
/// The gradient uses subgradient 0 wherever a block deviation or a DFT
/// coefficient is exactly zero.
pub fn l_power_loss(x: &LatentVector, layout: &BlockLayout) -> Result<(f64, Vec<f64>)> {
    layout.check_len(x.len())?;
    let n = x.len();
    let b = layout.block_size();
    let target = POWER_MU * b as f64;
    let spectrum = dft_unitary(x).into_coeffs();

    let mut value = 0.0;
    // d|x̂_k|/dx = Re(conj(u_k)·F_k·), u_k = x̂_k/|x̂_k|. Summing sign-weighted
    // rows of the symmetric unitary DFT gives Re(F⁻¹(c ∘ u)) for real x.
    let mut weighted = vec![Complex64::new(0.0, 0.0); n];
    for (block, out) in spectrum.chunks(b).zip(weighted.chunks_mut(b)) {
        let l1: f64 = block.iter().map(|&c| magnitude(c)).sum();
        let deviation = l1 - target;
        value += deviation.abs();
        let sign = if deviation > 0.0 {
            1.0
        } else if deviation < 0.0 {
            -1.0
        } else {
            0.0
        };
        for (c, o) in block.iter().zip(out.iter_mut()) {
            let m = magnitude(*c);
            if m > 0.0 && sign != 0.0 {
                *o = c * (sign / m);
            }
        }
    }
    let scale = 1.0 / n as f64;
    let gradient = idft_unitary(&weighted)
        .into_iter()
        .map(|c| c.re * scale)
        .collect();
    Ok((value * scale, gradient))
}

/// Ascent direction `reward_gradient − λ·∇L_reg`, with the optional
/// gradient-normalized weighting.
pub fn combined_gradient(
    reward_gradient: &[f64],
    x: &LatentVector,
    spec: &RegularizerSpec,
    layout: &BlockLayout,
) -> Result<Vec<f64>> {
    if reward_gradient.len() != x.len() {
        return Err(Error::Dimension(format!(
            "reward gradient has length {} but the latent has length {}",
            reward_gradient.len(),
            x.len()
        )));
    }
    if spec.coefficient == 0.0 {
        return Ok(reward_gradient.to_vec());
    }
    let (_, reg) = spec.loss(x, layout)?;
    Ok(combine(reward_gradient, &reg, spec))
}

pub(crate) fn combine(reward_gradient: &[f64], reg: &[f64], spec: &RegularizerSpec) -> Vec<f64> {
    let mut weight = spec.coefficient;
    if spec.weighting == Weighting::GradientNormalized {
        let reg_norm = l2(reg);
        if reg_norm >= RESCALE_FLOOR {
            weight *= l2(reward_gradient) / reg_norm;
        }
    }
    reward_gradient
        .iter()
        .zip(reg)
        .map(|(g, r)| g - weight * r)
        .collect()
}

fn l2(v: &[f64]) -> f64 {
    v.iter().map(|a| a * a).sum::<f64>().sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{gaussian_latent, stream_rng};

    fn latent(v: Vec<f64>) -> LatentVector {
        LatentVector::new(v).unwrap()
    }

    #[test]
    fn l_norm_value_at_n4() {
        // p_{χ_4}(2) = 2³ e^{−2} / (2¹ Γ(2)) = 4 e^{−2}.
        let x = latent(vec![1.0, 1.0, 1.0, 1.0]);
        let (value, _) = l_norm_loss(&x).unwrap();
        let expected = -(4.0 * (-2.0f64).exp()).ln();
        assert!((value - expected).abs() < 1e-12);
    }

    #[test]
    fn l_norm_stationary_on_n_minus_one_sphere() {
        let mut x = gaussian_latent(64, &mut stream_rng(1, 0)).into_vec();
        let scale = (63.0 / x.iter().map(|v| v * v).sum::<f64>()).sqrt();
        x.iter_mut().for_each(|v| *v *= scale);
        let (_, g) = l_norm_loss(&latent(x)).unwrap();
        assert!(g.iter().all(|v| v.abs() < 1e-12));
    }

    #[test]
    fn l_norm_gradient_is_radial() {
        let x = gaussian_latent(16, &mut stream_rng(2, 0));
        for t in [0.1, 1.0, 3.0] {
            let xs = latent(x.iter().map(|v| v * t).collect());
            let (_, g) = l_norm_loss(&xs).unwrap();
            let ratio = g[0] / xs[0];
            for (gi, xi) in g.iter().zip(xs.iter()) {
                assert!((gi - ratio * xi).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn l_norm_finite_at_large_n() {
        let x = gaussian_latent(65536, &mut stream_rng(3, 0));
        let (value, _) = l_norm_loss(&x).unwrap();
        assert!(value.is_finite());
    }

    #[test]
    fn l_norm_rejects_zero() {
        let err = l_norm_loss(&LatentVector::zeros(8).unwrap()).unwrap_err();
        assert!(matches!(err, Error::SingularInput(_)));
    }

    #[test]
    fn l_power_of_zero_is_mu() {
        let layout = BlockLayout::for_len(64, 16).unwrap();
        let (value, g) = l_power_loss(&LatentVector::zeros(64).unwrap(), &layout).unwrap();
        assert!((value - POWER_MU).abs() < 1e-15);
        assert!(g.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn combined_gradient_cases() {
        let layout = BlockLayout::for_len(16, 4).unwrap();
        let x = gaussian_latent(16, &mut stream_rng(4, 0));
        let reward: Vec<f64> = (0..16).map(|i| i as f64 * 0.1).collect();

        let off = RegularizerSpec::new(RegularizerKind::NormChi, 0.0, Weighting::Fixed).unwrap();
        assert_eq!(
            combined_gradient(&reward, &x, &off, &layout).unwrap(),
            reward
        );

        let fixed = RegularizerSpec::new(
            RegularizerKind::NormChi,
            BASELINE_COEFFICIENT,
            Weighting::Fixed,
        )
        .unwrap();
        let (_, reg) = l_norm_loss(&x).unwrap();
        let g = combined_gradient(&reward, &x, &fixed, &layout).unwrap();
        for i in 0..16 {
            assert!((g[i] - (reward[i] - 2.0 * reg[i])).abs() < 1e-15);
        }

        let normalized =
            RegularizerSpec::new(RegularizerKind::NormChi, 1.0, Weighting::GradientNormalized)
                .unwrap();
        let g = combined_gradient(&reward, &x, &normalized, &layout).unwrap();
        let diff: Vec<f64> = g.iter().zip(&reward).map(|(a, b)| b - a).collect();
        assert!((l2(&diff) - l2(&reward)).abs() < 1e-12);

        assert!(RegularizerSpec::new(RegularizerKind::NormChi, -1.0, Weighting::Fixed).is_err());
        assert!(combined_gradient(&reward[..4], &x, &fixed, &layout).is_err());
    }

    #[test]
    fn normalized_weighting_skips_vanishing_gradient() {
        // At the χ minimum the regularizer gradient vanishes.
        let mut x = vec![1.0; 16];
        let scale = (15.0f64 / 16.0).sqrt();
        x.iter_mut().for_each(|v| *v *= scale);
        let x = latent(x);
        let layout = BlockLayout::for_len(16, 4).unwrap();
        let reward = vec![0.5; 16];
        let spec =
            RegularizerSpec::new(RegularizerKind::NormChi, 2.0, Weighting::GradientNormalized)
                .unwrap();
        let g = combined_gradient(&reward, &x, &spec, &layout).unwrap();
        for (a, b) in g.iter().zip(&reward) {
            assert!((a - b).abs() < 1e-12);
        }
    }
}
