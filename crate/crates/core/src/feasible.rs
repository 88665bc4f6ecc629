//! Projection onto the spatial feasible set `G_R = F⁻¹(G_C)`.
//!
//! Because `‖F⁻¹(a) − F⁻¹(b)‖² = 2‖a − b‖²`, the nearest point of `G_R` is
//! obtained by mapping to the compact spectrum, projecting every block onto
//! its ℓ1/ℓ2 sphere intersection and mapping back.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::block::{project_block_into, BlockLayout, BlockScratch};
use crate::error::{Error, Result};
use crate::rng::{derive_seed, gaussian_latent, stream_rng};
use crate::spectral::{from_compact, magnitude, to_compact, CompactSpectrum, LatentVector};

/// Residual tolerance, relative to the block size, for a point to count as
/// feasible.
pub const FEASIBILITY_TOL: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq)]
pub struct ProjectionReport {
    pub output: LatentVector,
    /// `None` when the input or output has zero norm.
    pub cosine_similarity: Option<f64>,
    /// Spatial distance `‖x − output‖`.
    pub distance: f64,
    /// `Σ_p ‖y^(p) − ẏ^(p)‖²` in the compact domain; half of `distance²`.
    pub spectral_distance_sq: f64,
    pub max_block_l1_residual: f64,
    pub max_block_l2_residual: f64,
    pub blocks_perturbed: usize,
    /// `k*` for every block.
    pub threshold_indices: Vec<usize>,
}

impl ProjectionReport {
    pub fn max_residual(&self) -> f64 {
        self.max_block_l1_residual.max(self.max_block_l2_residual)
    }
}

/// Outcome of projecting a compact spectrum onto `G_C`.
#[derive(Clone, Debug, PartialEq)]
pub struct CompactProjection {
    pub projected: CompactSpectrum,
    pub distance_sq: f64,
    pub blocks_perturbed: usize,
    pub threshold_indices: Vec<usize>,
}

/// Blockwise projection onto `G_C`. Block `p` draws any perturbation noise
/// from the stream `(seed, p)`, so the result does not depend on the order in
/// which blocks are processed.
pub fn project_compact(
    y: &CompactSpectrum,
    layout: &BlockLayout,
    seed: u64,
) -> Result<CompactProjection> {
    layout.check_len(y.latent_len())?;
    let b = layout.block_size();
    let mut out = vec![Complex64::new(0.0, 0.0); y.coeffs().len()];
    let mut scratch = BlockScratch::new(b);
    let mut distance_sq = 0.0;
    let mut blocks_perturbed = 0;
    let mut threshold_indices = Vec::with_capacity(layout.block_count());
    for (p, (src, dst)) in y.coeffs().chunks(b).zip(out.chunks_mut(b)).enumerate() {
        let stats = project_block_into(src, dst, layout, &mut scratch, || {
            stream_rng(seed, p as u64)
        })?;
        distance_sq += stats.distance_sq;
        blocks_perturbed += usize::from(stats.perturbed);
        threshold_indices.push(stats.active_count - 1);
    }
    Ok(CompactProjection {
        projected: CompactSpectrum::new(out)?,
        distance_sq,
        blocks_perturbed,
        threshold_indices,
    })
}

/// Nearest point of `G_R` to `x`.
pub fn project_to_feasible(
    x: &LatentVector,
    layout: &BlockLayout,
    seed: u64,
) -> Result<ProjectionReport> {
    layout.check_len(x.len())?;
    let y = to_compact(x);
    let cp = project_compact(&y, layout, seed)?;
    let (l1, l2) = block_residuals(&cp.projected, layout);
    let output = from_compact(&cp.projected);
    let distance = x
        .iter()
        .zip(output.iter())
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        .sqrt();
    Ok(ProjectionReport {
        cosine_similarity: cosine(x, &output),
        distance,
        spectral_distance_sq: cp.distance_sq,
        max_block_l1_residual: max_of(&l1),
        max_block_l2_residual: max_of(&l2),
        blocks_perturbed: cp.blocks_perturbed,
        threshold_indices: cp.threshold_indices,
        output,
    })
}

/// Per-block `|‖y^(p)‖₁ − (√π/2)B|` and `|‖y^(p)‖₂² − B|` on `y = F(x)`.
pub fn feasibility_residuals(
    x: &LatentVector,
    layout: &BlockLayout,
) -> Result<(Vec<f64>, Vec<f64>)> {
    layout.check_len(x.len())?;
    Ok(block_residuals(&to_compact(x), layout))
}

/// Largest residual of either kind over all blocks.
pub fn max_feasibility_residual(x: &LatentVector, layout: &BlockLayout) -> Result<f64> {
    let (l1, l2) = feasibility_residuals(x, layout)?;
    Ok(max_of(&l1).max(max_of(&l2)))
}

fn block_residuals(y: &CompactSpectrum, layout: &BlockLayout) -> (Vec<f64>, Vec<f64>) {
    let (l1_target, l2_target) = (layout.l1_target(), layout.l2sq_target());
    y.coeffs()
        .chunks(layout.block_size())
        .map(|block| {
            let (l1, l2) = block.iter().fold((0.0, 0.0), |(a, b), &c| {
                (a + magnitude(c), b + c.norm_sqr())
            });
            ((l1 - l1_target).abs(), (l2 - l2_target).abs())
        })
        .unzip()
}

fn max_of(v: &[f64]) -> f64 {
    v.iter().copied().fold(0.0, f64::max)
}

/// `⟨a, b⟩ / (‖a‖‖b‖)`, or `None` if either vector is zero.
pub fn cosine(a: &[f64], b: &[f64]) -> Option<f64> {
    let (mut dot, mut na, mut nb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        dot += x * y;
        na += x * x;
        nb += y * y;
    }
    if na == 0.0 || nb == 0.0 {
        return None;
    }
    Some((dot / (na.sqrt() * nb.sqrt())).clamp(-1.0, 1.0))
}

/// Cosine between `F⁻¹(a)` and `F⁻¹(b)` without leaving the compact domain:
/// `⟨F⁻¹a, F⁻¹b⟩ = 2·Re⟨a, b⟩`, and the factor 2 cancels.
fn spectral_cosine(a: &CompactSpectrum, b: &CompactSpectrum) -> Option<f64> {
    let (mut dot, mut na, mut nb) = (0.0, 0.0, 0.0);
    for (u, v) in a.coeffs().iter().zip(b.coeffs()) {
        dot += u.re * v.re + u.im * v.im;
        na += u.norm_sqr();
        nb += v.norm_sqr();
    }
    if na == 0.0 || nb == 0.0 {
        return None;
    }
    Some((dot / (na.sqrt() * nb.sqrt())).clamp(-1.0, 1.0))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SimilarityStudyResult {
    pub sample_count: usize,
    pub n: usize,
    pub block_size: usize,
    pub min_cos: f64,
    pub mean_cos: f64,
    /// Nearest-rank 1st percentile of the per-sample cosines.
    pub p01_cos: f64,
    pub seed: u64,
    #[serde(skip)]
    pub cosines: Vec<f64>,
}

/// Projects `sample_count` standard Gaussian latents and summarizes the
/// cosine similarity between each sample and its projection.
///
/// Sample `i` is generated from, and projected with, seed
/// `derive_seed(seed, i)`; samples may be processed in parallel without
/// changing the result.
pub fn cosine_similarity_study(
    sample_count: usize,
    layout: &BlockLayout,
    seed: u64,
) -> Result<SimilarityStudyResult> {
    if sample_count == 0 {
        return Err(Error::Validation("sample count must be at least 1".into()));
    }
    let n = layout.n();
    let cosines = (0..sample_count as u64)
        .into_par_iter()
        .map(|i| {
            let sample_seed = derive_seed(seed, i);
            let x = gaussian_latent(n, &mut stream_rng(sample_seed, u64::MAX));
            let y = to_compact(&x);
            let cp = project_compact(&y, layout, sample_seed)?;
            spectral_cosine(&y, &cp.projected).ok_or_else(|| {
                Error::Numerical(format!("cosine similarity undefined for sample {i}"))
            })
        })
        .collect::<Result<Vec<f64>>>()?;
    summarize(cosines, layout, seed)
}

/// Same summary as [`cosine_similarity_study`] over caller-supplied latents.
/// A zero input leaves the cosine undefined and is reported as an error.
pub fn cosine_similarity_study_over(
    inputs: &[LatentVector],
    layout: &BlockLayout,
    seed: u64,
) -> Result<SimilarityStudyResult> {
    if inputs.is_empty() {
        return Err(Error::Validation("sample count must be at least 1".into()));
    }
    let cosines = inputs
        .iter()
        .enumerate()
        .map(|(i, x)| {
            let report = project_to_feasible(x, layout, derive_seed(seed, i as u64))?;
            report.cosine_similarity.ok_or_else(|| {
                Error::Numerical(format!("cosine similarity undefined for sample {i}"))
            })
        })
        .collect::<Result<Vec<f64>>>()?;
    summarize(cosines, layout, seed)
}

fn summarize(cosines: Vec<f64>, layout: &BlockLayout, seed: u64) -> Result<SimilarityStudyResult> {
    let mut sorted = cosines.clone();
    sorted.sort_by(f64::total_cmp);
    let count = sorted.len();
    let p01_index = (0.01 * count as f64).ceil().max(1.0) as usize - 1;
    Ok(SimilarityStudyResult {
        sample_count: count,
        n: layout.n(),
        block_size: layout.block_size(),
        min_cos: sorted[0],
        mean_cos: sorted.iter().sum::<f64>() / count as f64,
        p01_cos: sorted[p01_index],
        seed,
        cosines,
    })
}
