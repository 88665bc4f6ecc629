//! Gradient ascent drivers: projected (hard constraint), regularized (soft
//! penalty) and unconstrained.
//!
//! One projected iteration is
//!
//! 1. evaluate `(J, g)` at the current iterate,
//! 2. clip `g` elementwise to `[−clip, clip]`,
//! 3. optionally replace `g` by its projection onto the feasible set,
//! 4. take an Adam step of size `η`,
//! 5. project the iterate onto the feasible set.
//!
//! The Adam moment buffers are never projected.

use serde::{Deserialize, Serialize};

use crate::block::BlockLayout;
use crate::error::{Error, Result};
use crate::feasible::{cosine, max_feasibility_residual, project_to_feasible};
use crate::regularizers::{combine, RegularizerSpec};
use crate::rng::derive_seed;
use crate::spectral::LatentVector;

/// Objective values beyond this magnitude count as divergence.
pub const DIVERGENCE_LIMIT: f64 = 1e12;

/// A differentiable scalar objective to maximize.
///
/// Implementations must be deterministic given their own configuration.
pub trait Objective {
    /// Returns the objective value and its gradient (same length as `x`).
    fn evaluate(&self, x: &LatentVector) -> Result<(f64, Vec<f64>)>;
}

impl<F> Objective for F
where
    F: Fn(&LatentVector) -> Result<(f64, Vec<f64>)>,
{
    fn evaluate(&self, x: &LatentVector) -> Result<(f64, Vec<f64>)> {
        self(x)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AscentMode {
    Projected,
    Regularized,
    Unconstrained,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OptimizerConfig {
    pub step_size: f64,
    pub iterations: usize,
    pub clip_threshold: f64,
    pub adam_beta1: f64,
    pub adam_beta2: f64,
    pub adam_epsilon: f64,
    pub project_gradient: bool,
    pub mode: AscentMode,
    pub seed: u64,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            step_size: 0.02,
            iterations: 200,
            clip_threshold: 0.03,
            adam_beta1: 0.9,
            adam_beta2: 0.999,
            adam_epsilon: 1e-8,
            project_gradient: true,
            mode: AscentMode::Projected,
            seed: 0,
        }
    }
}

impl OptimizerConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str| Err(Error::Validation(what.to_string()));
        if !(self.step_size > 0.0 && self.step_size.is_finite()) {
            return bad("step size must be positive");
        }
        if self.iterations == 0 {
            return bad("iterations must be positive");
        }
        if self.clip_threshold.is_nan() || self.clip_threshold <= 0.0 {
            return bad("clip threshold must be positive");
        }
        if !(0.0..1.0).contains(&self.adam_beta1) || !(0.0..1.0).contains(&self.adam_beta2) {
            return bad("Adam betas must lie in [0, 1)");
        }
        if self.adam_epsilon.is_nan() || self.adam_epsilon <= 0.0 {
            return bad("Adam epsilon must be positive");
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct IterationRecord {
    pub iteration: usize,
    pub value: f64,
    pub norm_sq: f64,
    pub max_residual: f64,
    /// Cosine to the caller's initial latent; `None` if either is zero.
    pub cos_to_init: Option<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    /// Iteration 0 is the (possibly projected) starting point.
    pub records: Vec<IterationRecord>,
    pub final_latent: LatentVector,
}

impl Trajectory {
    pub fn final_value(&self) -> f64 {
        self.records.last().map_or(f64::NAN, |r| r.value)
    }

    /// CSV with header `iteration,value,norm_sq,max_residual,cos_to_init`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("iteration,value,norm_sq,max_residual,cos_to_init\n");
        for r in &self.records {
            let cos = r.cos_to_init.map(|c| c.to_string()).unwrap_or_default();
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                r.iteration, r.value, r.norm_sq, r.max_residual, cos
            ));
        }
        out
    }
}

/// Adam moment estimates.
#[derive(Clone, Debug, PartialEq)]
pub struct AdamState {
    pub m: Vec<f64>,
    pub v: Vec<f64>,
    pub t: u32,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl AdamState {
    pub fn new(len: usize, beta1: f64, beta2: f64, epsilon: f64) -> Self {
        Self {
            m: vec![0.0; len],
            v: vec![0.0; len],
            t: 0,
            beta1,
            beta2,
            epsilon,
        }
    }

    fn from_config(len: usize, cfg: &OptimizerConfig) -> Self {
        Self::new(len, cfg.adam_beta1, cfg.adam_beta2, cfg.adam_epsilon)
    }
}

/// Bias-corrected Adam update. Returns the increment `η·m̂/(√v̂ + ε)`, to be
/// added to the iterate for ascent.
pub fn adam_step(state: &mut AdamState, gradient: &[f64], eta: f64) -> Result<Vec<f64>> {
    if gradient.len() != state.m.len() {
        return Err(Error::Dimension(format!(
            "gradient has length {} but the Adam state has length {}",
            gradient.len(),
            state.m.len()
        )));
    }
    state.t += 1;
    let c1 = 1.0 - state.beta1.powi(state.t as i32);
    let c2 = 1.0 - state.beta2.powi(state.t as i32);
    Ok(state
        .m
        .iter_mut()
        .zip(state.v.iter_mut())
        .zip(gradient)
        .map(|((m, v), &g)| {
            *m = state.beta1 * *m + (1.0 - state.beta1) * g;
            *v = state.beta2 * *v + (1.0 - state.beta2) * g * g;
            let m_hat = *m / c1;
            let v_hat = *v / c2;
            eta * m_hat / (v_hat.sqrt() + state.epsilon)
        })
        .collect())
}

pub fn clip_elementwise(g: &mut [f64], threshold: f64) {
    g.iter_mut()
        .for_each(|v| *v = v.clamp(-threshold, threshold));
}

/// Projected gradient ascent. `x0` is projected before the first record, so
/// every recorded iterate lies in the feasible set.
pub fn projected_ascent<O: Objective + ?Sized>(
    obj: &O,
    x0: &LatentVector,
    layout: &BlockLayout,
    cfg: &OptimizerConfig,
) -> Result<Trajectory> {
    cfg.validate()?;
    layout.check_len(x0.len())?;
    let start = project_to_feasible(x0, layout, derive_seed(cfg.seed, 0))?.output;
    let mut run = Run::start(obj, x0, start, layout)?;
    let mut adam = AdamState::from_config(x0.len(), cfg);

    for it in 1..=cfg.iterations {
        let mut g = std::mem::take(&mut run.gradient);
        clip_elementwise(&mut g, cfg.clip_threshold);
        // A zero gradient has no direction to keep; projecting it would
        // inject an arbitrary feasible vector.
        if cfg.project_gradient && g.iter().any(|&v| v != 0.0) {
            let gl = LatentVector::new(g).map_err(|_| run.diverged(it))?;
            g = project_to_feasible(&gl, layout, derive_seed(cfg.seed, 2 * it as u64 - 1))?
                .output
                .into_vec();
        }
        let step = adam_step(&mut adam, &g, cfg.step_size)?;
        let moved: Vec<f64> = run.x.iter().zip(&step).map(|(a, d)| a + d).collect();
        let moved = LatentVector::new(moved).map_err(|_| run.diverged(it))?;
        let next =
            project_to_feasible(&moved, layout, derive_seed(cfg.seed, 2 * it as u64))?.output;
        run.advance(obj, next, it)?;
    }
    Ok(run.finish())
}

/// Gradient ascent on `J − λ·L_reg` without projection. Feasibility
/// residuals are still recorded for comparison.
pub fn regularized_ascent<O: Objective + ?Sized>(
    obj: &O,
    spec: &RegularizerSpec,
    x0: &LatentVector,
    layout: &BlockLayout,
    cfg: &OptimizerConfig,
) -> Result<Trajectory> {
    free_ascent(obj, Some(spec), x0, layout, cfg)
}

pub fn unconstrained_ascent<O: Objective + ?Sized>(
    obj: &O,
    x0: &LatentVector,
    layout: &BlockLayout,
    cfg: &OptimizerConfig,
) -> Result<Trajectory> {
    free_ascent(obj, None, x0, layout, cfg)
}

/// Dispatches on `cfg.mode`. `spec` is required for regularized mode.
pub fn run_ascent<O: Objective + ?Sized>(
    obj: &O,
    spec: Option<&RegularizerSpec>,
    x0: &LatentVector,
    layout: &BlockLayout,
    cfg: &OptimizerConfig,
) -> Result<Trajectory> {
    match cfg.mode {
        AscentMode::Projected => projected_ascent(obj, x0, layout, cfg),
        AscentMode::Unconstrained => unconstrained_ascent(obj, x0, layout, cfg),
        AscentMode::Regularized => {
            let spec = spec.ok_or_else(|| {
                Error::Validation("regularized mode needs a regularizer spec".into())
            })?;
            regularized_ascent(obj, spec, x0, layout, cfg)
        }
    }
}

fn free_ascent<O: Objective + ?Sized>(
    obj: &O,
    spec: Option<&RegularizerSpec>,
    x0: &LatentVector,
    layout: &BlockLayout,
    cfg: &OptimizerConfig,
) -> Result<Trajectory> {
    cfg.validate()?;
    layout.check_len(x0.len())?;
    let mut run = Run::start(obj, x0, x0.clone(), layout)?;
    let mut adam = AdamState::from_config(x0.len(), cfg);

    for it in 1..=cfg.iterations {
        let reward = std::mem::take(&mut run.gradient);
        let mut g = match spec {
            Some(spec) if spec.coefficient != 0.0 => {
                let (_, reg) = spec.loss(&run.x, layout)?;
                combine(&reward, &reg, spec)
            }
            _ => reward,
        };
        clip_elementwise(&mut g, cfg.clip_threshold);
        let step = adam_step(&mut adam, &g, cfg.step_size)?;
        let next: Vec<f64> = run.x.iter().zip(&step).map(|(a, d)| a + d).collect();
        let next = LatentVector::new(next).map_err(|_| run.diverged(it))?;
        run.advance(obj, next, it)?;
    }
    Ok(run.finish())
}

/// Bookkeeping shared by the drivers.
struct Run<'a> {
    init: &'a LatentVector,
    layout: &'a BlockLayout,
    x: LatentVector,
    gradient: Vec<f64>,
    records: Vec<IterationRecord>,
}

impl<'a> Run<'a> {
    fn start<O: Objective + ?Sized>(
        obj: &O,
        init: &'a LatentVector,
        x: LatentVector,
        layout: &'a BlockLayout,
    ) -> Result<Self> {
        let mut run = Self {
            init,
            layout,
            x: x.clone(),
            gradient: Vec::new(),
            records: Vec::new(),
        };
        run.advance(obj, x, 0)?;
        Ok(run)
    }

    fn advance<O: Objective + ?Sized>(
        &mut self,
        obj: &O,
        x: LatentVector,
        it: usize,
    ) -> Result<()> {
        let (value, gradient) = obj.evaluate(&x)?;
        if gradient.len() != x.len() {
            return Err(Error::Dimension(format!(
                "objective returned a gradient of length {} for a latent of length {}",
                gradient.len(),
                x.len()
            )));
        }
        if !value.is_finite()
            || value.abs() > DIVERGENCE_LIMIT
            || gradient.iter().any(|g| !g.is_finite())
        {
            return Err(self.diverged(it));
        }
        self.records.push(IterationRecord {
            iteration: it,
            value,
            norm_sq: x.norm_sq(),
            max_residual: max_feasibility_residual(&x, self.layout)?,
            cos_to_init: cosine(&x, self.init),
        });
        self.x = x;
        self.gradient = gradient;
        Ok(())
    }

    /// Divergence at iteration `it`, carrying everything recorded so far.
    fn diverged(&self, it: usize) -> Error {
        Error::Diverged {
            iteration: it,
            trajectory: Box::new(Trajectory {
                records: self.records.clone(),
                final_latent: self.x.clone(),
            }),
        }
    }

    fn finish(self) -> Trajectory {
        Trajectory {
            records: self.records,
            final_latent: self.x,
        }
    }
}
