//! Wall-clock scaling of the feasible-set projection.

use std::time::Instant;

use serde::Serialize;

use crate::block::BlockLayout;
use crate::error::{Error, Result};
use crate::feasible::project_to_feasible;
use crate::rng::{gaussian_latent, stream_rng};
use crate::spectral::{from_compact, to_compact};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScalingRow {
    pub n: usize,
    pub repeats: usize,
    pub median_projection_secs: f64,
    /// Median time of the forward plus inverse compact mapping alone.
    pub median_fft_secs: f64,
    pub fft_fraction: f64,
    /// `median(n) / median(previous n)`; absent for the first row.
    pub ratio_to_previous: Option<f64>,
}

/// Times `repeats` projections of one Gaussian latent for every `n`.
/// Each `n` gets one untimed warm-up run so FFT planning is excluded.
pub fn measure_scaling(
    ns: &[usize],
    block_size: usize,
    repeats: usize,
    seed: u64,
) -> Result<Vec<ScalingRow>> {
    if repeats == 0 {
        return Err(Error::Validation("repeats must be at least 1".into()));
    }
    let mut rows: Vec<ScalingRow> = Vec::with_capacity(ns.len());
    for &n in ns {
        let layout = BlockLayout::for_len(n, block_size)?;
        let x = gaussian_latent(n, &mut stream_rng(seed, n as u64));
        project_to_feasible(&x, &layout, seed)?;

        let mut total = Vec::with_capacity(repeats);
        let mut fft = Vec::with_capacity(repeats);
        for _ in 0..repeats {
            let t = Instant::now();
            std::hint::black_box(project_to_feasible(&x, &layout, seed)?);
            total.push(t.elapsed().as_secs_f64());

            let t = Instant::now();
            std::hint::black_box(from_compact(&to_compact(&x)));
            fft.push(t.elapsed().as_secs_f64());
        }
        let median_projection_secs = median(&mut total);
        let median_fft_secs = median(&mut fft);
        let ratio_to_previous = rows
            .last()
            .map(|prev| median_projection_secs / prev.median_projection_secs);
        rows.push(ScalingRow {
            n,
            repeats,
            median_projection_secs,
            median_fft_secs,
            fft_fraction: (median_fft_secs / median_projection_secs).min(1.0),
            ratio_to_previous,
        });
    }
    Ok(rows)
}

fn median(v: &mut [f64]) -> f64 {
    v.sort_by(f64::total_cmp);
    let mid = v.len() / 2;
    if v.len() % 2 == 1 {
        v[mid]
    } else {
        0.5 * (v[mid - 1] + v[mid])
    }
}
