//! Desk-scale stand-ins for a generator and reward model, plus the
//! autocorrelation diagnostics.
//!
//! The reward-hacking probe is the spectral spike `|y_t|²` on the compact
//! spectrum. On the feasible set it can never exceed the squared magnitude
//! cap (≈ 7.18 for `B = 16`), while unconstrained ascent grows it without
//! bound.

use std::time::{Duration, Instant};

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::block::BlockLayout;
use crate::error::{Error, Result};
use crate::feasible::{cosine, project_to_feasible};
use crate::optimizer::{
    projected_ascent, regularized_ascent, unconstrained_ascent, AscentMode, Objective,
    OptimizerConfig, Trajectory,
};
use crate::regularizers::{RegularizerKind, RegularizerSpec, Weighting};
use crate::rng::{derive_seed, gaussian_latent, stream_rng};
use crate::spectral::{
    dft_unitary, from_compact, idft_unitary, to_compact, CompactSpectrum, LatentVector,
};

/// Circular autocorrelation `r[ℓ] = (1/N) Σ_n x_n x_{(n−ℓ) mod N}`.
#[derive(Clone, Debug, PartialEq)]
pub struct AutocorrelationProfile(pub Vec<f64>);

impl AutocorrelationProfile {
    pub fn values(&self) -> &[f64] {
        &self.0
    }

    /// Mean of `|r[ℓ]|` over the non-zero lags.
    pub fn mean_off_origin(&self) -> f64 {
        let n = self.0.len();
        if n < 2 {
            return 0.0;
        }
        self.0[1..].iter().map(|v| v.abs()).sum::<f64>() / (n - 1) as f64
    }
}

/// Autocorrelation through the periodogram: `r = (1/√N)·F⁻¹(|x̂|²)` with the
/// unitary inverse.
pub fn autocorrelation(x: &LatentVector) -> AutocorrelationProfile {
    let n = x.len();
    let power: Vec<Complex64> = dft_unitary(x)
        .coeffs()
        .iter()
        .map(|c| Complex64::new(c.norm_sqr(), 0.0))
        .collect();
    let scale = 1.0 / (n as f64).sqrt();
    AutocorrelationProfile(
        idft_unitary(&power)
            .into_iter()
            .map(|c| c.re * scale)
            .collect(),
    )
}

/// Direct `O(N²)` circular sum.
pub fn autocorrelation_direct(x: &[f64]) -> AutocorrelationProfile {
    let n = x.len();
    let inv_n = 1.0 / n as f64;
    let values = (0..n)
        .into_par_iter()
        .map(|lag| {
            // n ≥ lag pairs with n − lag; n < lag wraps to n − lag + N.
            let head = dot(&x[lag..], &x[..n - lag]);
            let tail = dot(&x[..lag], &x[n - lag..]);
            (head + tail) * inv_n
        })
        .collect();
    AutocorrelationProfile(values)
}

/// Lane-split dot product so the compiler can vectorize the accumulation.
fn dot(a: &[f64], b: &[f64]) -> f64 {
    const LANES: usize = 8;
    let mut acc = [0.0; LANES];
    let chunks = a.len() / LANES;
    for (ca, cb) in a.chunks_exact(LANES).zip(b.chunks_exact(LANES)) {
        for i in 0..LANES {
            acc[i] += ca[i] * cb[i];
        }
    }
    let mut sum: f64 = acc.iter().sum();
    for i in chunks * LANES..a.len() {
        sum += a[i] * b[i];
    }
    sum
}

/// Largest absolute gap between the direct circular autocorrelation and the
/// inverse DFT of the periodogram. The two are an exact DFT pair, so the gap
/// is pure rounding.
pub fn wiener_khinchin_check(x: &LatentVector) -> f64 {
    let direct = autocorrelation_direct(x);
    let via_fft = autocorrelation(x);
    direct
        .0
        .iter()
        .zip(&via_fft.0)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max)
}

/// `|y_t|²` on `y = F(x)` and its gradient.
///
/// `F⁻¹` is √2 times an orthogonal map, so the adjoint of `F` is `F⁻¹/2` and
/// the gradient is `F⁻¹(y_t·e_t)`.
pub fn spike_reward(x: &LatentVector, target_bin: usize) -> Result<(f64, Vec<f64>)> {
    let y = to_compact(x);
    let half = y.coeffs().len();
    if target_bin >= half {
        return Err(Error::Validation(format!(
            "target bin {target_bin} is out of range for N/2 = {half}"
        )));
    }
    let yt = y.coeffs()[target_bin];
    let mut basis = vec![Complex64::new(0.0, 0.0); half];
    basis[target_bin] = yt;
    let gradient = from_compact(&CompactSpectrum::new(basis)?).into_vec();
    Ok((yt.norm_sqr(), gradient))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SpikeReward {
    pub target_bin: usize,
}

impl Objective for SpikeReward {
    fn evaluate(&self, x: &LatentVector) -> Result<(f64, Vec<f64>)> {
        spike_reward(x, self.target_bin)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScenarioMode {
    Unconstrained,
    NormChi,
    PowerSpectral,
    Projected,
}

impl ScenarioMode {
    pub fn name(&self) -> &'static str {
        match self {
            ScenarioMode::Unconstrained => "unconstrained",
            ScenarioMode::NormChi => "norm_chi",
            ScenarioMode::PowerSpectral => "power_spectral",
            ScenarioMode::Projected => "projected",
        }
    }
}

fn default_project_gradient() -> bool {
    true
}

/// Declarative comparison scenario, read from a flat JSON object.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub n: usize,
    pub block_size: usize,
    pub target_bin: usize,
    pub modes: Vec<ScenarioMode>,
    pub iterations: usize,
    pub step_size: f64,
    pub clip: f64,
    pub lambda: f64,
    pub weighting: Weighting,
    pub seed: u64,
    #[serde(default = "default_project_gradient")]
    pub project_gradient: bool,
}

impl ScenarioConfig {
    pub fn layout(&self) -> Result<BlockLayout> {
        BlockLayout::for_len(self.n, self.block_size)
    }

    fn optimizer_config(&self, mode: AscentMode) -> OptimizerConfig {
        OptimizerConfig {
            step_size: self.step_size,
            iterations: self.iterations,
            clip_threshold: self.clip,
            project_gradient: self.project_gradient,
            mode,
            seed: self.seed,
            ..OptimizerConfig::default()
        }
    }

    /// Shared starting latent: a Gaussian draw projected onto the feasible
    /// set, so that every mode (including the projected one, which projects
    /// its start again) begins from the same point.
    pub fn initial_latent(&self) -> Result<LatentVector> {
        let layout = self.layout()?;
        let raw = gaussian_latent(self.n, &mut stream_rng(self.seed, u64::MAX));
        Ok(project_to_feasible(&raw, &layout, derive_seed(self.seed, u64::MAX))?.output)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ModeOutcome {
    pub mode: ScenarioMode,
    pub initial_value: f64,
    pub final_value: f64,
    /// Largest compact-spectrum magnitude of the final latent.
    pub max_magnitude: f64,
    pub max_residual: f64,
    pub cos_to_init: Option<f64>,
    pub wall_time: Duration,
    pub trajectory: Trajectory,
}

/// Runs every requested mode from the same start on the spike reward.
pub fn run_comparison(cfg: &ScenarioConfig) -> Result<Vec<ModeOutcome>> {
    run_each_mode(cfg)?
        .into_iter()
        .map(|(_, outcome)| outcome)
        .collect()
}

/// Like [`run_comparison`], but a failing mode does not discard the others.
/// The outer error covers scenario validation only.
pub fn run_each_mode(cfg: &ScenarioConfig) -> Result<Vec<(ScenarioMode, Result<ModeOutcome>)>> {
    if cfg.modes.is_empty() {
        return Err(Error::Validation("scenario lists no modes".into()));
    }
    let layout = cfg.layout()?;
    if cfg.target_bin >= cfg.n / 2 {
        return Err(Error::Validation(format!(
            "target bin {} is out of range for N/2 = {}",
            cfg.target_bin,
            cfg.n / 2
        )));
    }
    if cfg
        .modes
        .iter()
        .any(|m| matches!(m, ScenarioMode::NormChi | ScenarioMode::PowerSpectral))
    {
        RegularizerSpec::new(RegularizerKind::NormChi, cfg.lambda, cfg.weighting)?;
    }
    cfg.optimizer_config(AscentMode::Projected).validate()?;
    let x0 = cfg.initial_latent()?;
    Ok(cfg
        .modes
        .par_iter()
        .map(|&mode| (mode, run_mode(cfg, mode, &x0, &layout)))
        .collect())
}

fn run_mode(
    cfg: &ScenarioConfig,
    mode: ScenarioMode,
    x0: &LatentVector,
    layout: &BlockLayout,
) -> Result<ModeOutcome> {
    let reward = SpikeReward {
        target_bin: cfg.target_bin,
    };
    let started = Instant::now();
    let trajectory = match mode {
        ScenarioMode::Unconstrained => unconstrained_ascent(
            &reward,
            x0,
            layout,
            &cfg.optimizer_config(AscentMode::Unconstrained),
        ),
        ScenarioMode::Projected => projected_ascent(
            &reward,
            x0,
            layout,
            &cfg.optimizer_config(AscentMode::Projected),
        ),
        ScenarioMode::NormChi | ScenarioMode::PowerSpectral => {
            let kind = if mode == ScenarioMode::NormChi {
                RegularizerKind::NormChi
            } else {
                RegularizerKind::PowerSpectral
            };
            let spec = RegularizerSpec::new(kind, cfg.lambda, cfg.weighting)?;
            regularized_ascent(
                &reward,
                &spec,
                x0,
                layout,
                &cfg.optimizer_config(AscentMode::Regularized),
            )
        }
    }?;
    let wall_time = started.elapsed();
    let last = *trajectory.records.last().expect("at least one record");
    let max_magnitude = to_compact(&trajectory.final_latent)
        .coeffs()
        .iter()
        .map(|c| c.norm())
        .fold(0.0, f64::max);
    Ok(ModeOutcome {
        mode,
        initial_value: trajectory.records[0].value,
        final_value: last.value,
        max_magnitude,
        max_residual: last.max_residual,
        cos_to_init: cosine(&trajectory.final_latent, x0),
        wall_time,
        trajectory,
    })
}

/// Comparison table as CSV. Wall time is left out so that identical
/// scenarios produce identical files.
pub fn comparison_csv(outcomes: &[ModeOutcome]) -> String {
    let mut out =
        String::from("mode,initial_value,final_value,max_magnitude,max_residual,cos_to_init\n");
    for o in outcomes {
        let cos = o.cos_to_init.map(|c| c.to_string()).unwrap_or_default();
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            o.mode.name(),
            o.initial_value,
            o.final_value,
            o.max_magnitude,
            o.max_residual,
            cos
        ));
    }
    out
}
