//! Closed-form Euclidean projection of one complex block onto the
//! intersection of the ℓ1 sphere of radius `(√π/2)·B` and the ℓ2 sphere of
//! radius `√B`.
//!
//! The optimal point keeps every input phase and reshapes the magnitudes as
//! `s_j = c · ReLU(|y_j| − λ)`. With the magnitudes sorted in descending
//! order as `w` and prefix sums `S1_k = Σ_{l≤k} w_l`, `S2_k = Σ_{l≤k} w_l²`,
//! the threshold for a candidate active set of size `k+1 > γB` is
//!
//! ```text
//! λ_k = S1_k/(k+1) − √(γB)/(k+1) · √(((k+1)·S2_k − S1_k²) / (k+1 − γB))
//! ```
//!
//! and exactly one `k` satisfies `w_{k+1} ≤ λ_k < w_k` (with `w_B = −∞`).
//! The scale `c` then restores the ℓ1 target. `γ = π/4` throughout.
//!
//! A block with at least `⌈γB⌉` entries tied at the maximum magnitude, or
//! with an exact zero that would stay active (`λ < 0`), has no unique
//! projection. Those entries are nudged by `10⁻⁶·ε`, `ε ~ CN(0, 1)`, and the
//! block is solved again.

use std::f64::consts::{FRAC_PI_4, PI};

use num_complex::Complex64;
use rand::RngCore;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::rng::complex_normal;
use crate::spectral::magnitude;

/// Ratio `E[‖y‖₁]² / (B · E[‖y‖₂²])` for `CN(0, 1)` entries.
pub const GAMMA: f64 = FRAC_PI_4;

/// Magnitude of the tie-breaking perturbation.
pub const PERTURBATION_SCALE: f64 = 1e-6;

/// Maximum number of perturbation rounds before a block is declared degenerate.
pub const MAX_PERTURBATION_RETRIES: usize = 8;

/// Block size used unless the caller overrides it.
pub const DEFAULT_BLOCK_SIZE: usize = 16;

/// Relative slack accepted on the `k*` bracket when rounding empties it.
const BRACKET_SLACK: f64 = 1e-12;

/// Partition of a compact spectrum of length `N/2 = P·B` into `P` blocks.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct BlockLayout {
    block_size: usize,
    block_count: usize,
}

impl BlockLayout {
    pub fn new(block_size: usize, block_count: usize) -> Result<Self> {
        if block_size < 2 {
            return Err(Error::Validation(format!(
                "block size must be at least 2, got {block_size}"
            )));
        }
        if block_count == 0 {
            return Err(Error::Validation("block count must be positive".into()));
        }
        Ok(Self {
            block_size,
            block_count,
        })
    }

    /// Layout for a latent of length `n`, which must be a multiple of `2·B`.
    pub fn for_len(n: usize, block_size: usize) -> Result<Self> {
        if block_size < 2 {
            return Err(Error::Validation(format!(
                "block size must be at least 2, got {block_size}"
            )));
        }
        if n == 0 || !n.is_multiple_of(2 * block_size) {
            return Err(Error::Dimension(format!(
                "latent length {n} is not divisible by 2·B = {}",
                2 * block_size
            )));
        }
        Self::new(block_size, n / (2 * block_size))
    }

    pub fn block_size(&self) -> usize {
        self.block_size
    }

    pub fn block_count(&self) -> usize {
        self.block_count
    }

    /// Spatial length `N = 2PB`.
    pub fn n(&self) -> usize {
        2 * self.block_count * self.block_size
    }

    /// Per-block ℓ1 target `(√π/2)·B`.
    pub fn l1_target(&self) -> f64 {
        PI.sqrt() / 2.0 * self.block_size as f64
    }

    /// Per-block squared ℓ2 target `B`.
    pub fn l2sq_target(&self) -> f64 {
        self.block_size as f64
    }

    pub fn gamma(&self) -> f64 {
        GAMMA
    }

    /// Smallest admissible active-set size `⌈γB⌉`.
    pub fn min_active(&self) -> usize {
        (GAMMA * self.block_size as f64).ceil() as usize
    }

    pub fn magnitude_bounds(&self) -> MagnitudeBounds {
        bounds_for(self.block_size)
    }

    pub(crate) fn check_len(&self, n: usize) -> Result<()> {
        if n != self.n() {
            return Err(Error::Dimension(format!(
                "latent length {n} does not match layout N = 2·{}·{} = {}",
                self.block_count,
                self.block_size,
                self.n()
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct MagnitudeBounds {
    pub min: f64,
    pub max: f64,
}

/// Range of a single compact magnitude `|y_j|` on the feasible set: the
/// extremes are reached when the other `B−1` entries share one magnitude.
/// The analytic lower extreme goes negative from `B = 6` on, in which case
/// the attainable floor is 0.
pub fn magnitude_bounds(block_size: usize) -> Result<MagnitudeBounds> {
    if block_size < 2 {
        return Err(Error::Validation(format!(
            "block size must be at least 2, got {block_size}"
        )));
    }
    Ok(bounds_for(block_size))
}

fn bounds_for(block_size: usize) -> MagnitudeBounds {
    let spread = ((1.0 - GAMMA) * (block_size as f64 - 1.0)).sqrt();
    MagnitudeBounds {
        min: (GAMMA.sqrt() - spread).max(0.0),
        max: GAMMA.sqrt() + spread,
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BlockProjection {
    pub projected: Vec<Complex64>,
    /// Soft threshold `λ_{k*}` applied to the magnitudes.
    pub threshold_lambda: f64,
    /// Number of entries left non-zero, `k* + 1`.
    pub active_count: usize,
    pub perturbed: bool,
    /// `‖input − projected‖²` measured against the unperturbed input.
    pub distance_sq: f64,
}

impl BlockProjection {
    pub fn threshold_index(&self) -> usize {
        self.active_count - 1
    }
}

/// Statistics of a projection written into a caller-provided buffer.
#[derive(Clone, Copy, Debug, PartialEq)]
pub(crate) struct BlockStats {
    pub threshold_lambda: f64,
    pub active_count: usize,
    pub perturbed: bool,
    pub distance_sq: f64,
}

/// Projects `block` onto the ℓ1/ℓ2 sphere intersection described by `layout`.
///
/// `rng` is only consumed when the block is degenerate.
pub fn project_block<R: RngCore + ?Sized>(
    block: &[Complex64],
    layout: &BlockLayout,
    rng: &mut R,
) -> Result<BlockProjection> {
    let mut projected = vec![Complex64::new(0.0, 0.0); block.len()];
    let mut scratch = BlockScratch::new(layout.block_size());
    let stats = project_block_into(block, &mut projected, layout, &mut scratch, || rng)?;
    Ok(BlockProjection {
        projected,
        threshold_lambda: stats.threshold_lambda,
        active_count: stats.active_count,
        perturbed: stats.perturbed,
        distance_sq: stats.distance_sq,
    })
}

/// Reusable buffers so that projecting many blocks does not allocate.
pub(crate) struct BlockScratch {
    work: Vec<Complex64>,
    mags: Vec<f64>,
    sorted: Vec<f64>,
}

impl BlockScratch {
    pub fn new(block_size: usize) -> Self {
        Self {
            work: Vec::with_capacity(block_size),
            mags: Vec::with_capacity(block_size),
            sorted: Vec::with_capacity(block_size),
        }
    }
}

/// Core of [`project_block`]. `make_rng` is called at most once, and only when
/// the block needs perturbing, so callers can derive per-block streams lazily.
pub(crate) fn project_block_into<R, F>(
    block: &[Complex64],
    out: &mut [Complex64],
    layout: &BlockLayout,
    scratch: &mut BlockScratch,
    make_rng: F,
) -> Result<BlockStats>
where
    R: RngCore,
    F: FnOnce() -> R,
{
    let b = layout.block_size();
    if block.len() != b || out.len() != b {
        return Err(Error::Dimension(format!(
            "block has length {} but the layout block size is {b}",
            block.len()
        )));
    }
    if let Some(j) = block.iter().position(|c| !c.is_finite()) {
        return Err(Error::Validation(format!("block entry {j} is not finite")));
    }

    let min_active = layout.min_active();
    let BlockScratch { work, mags, sorted } = scratch;
    work.clear();
    work.extend_from_slice(block);

    let mut perturbed = false;
    let mut rng: Option<R> = None;
    let mut make_rng = Some(make_rng);
    let mut retries = 0;
    let (k, lambda, s1) = loop {
        mags.clear();
        mags.extend(work.iter().map(|&c| magnitude(c)));
        let max = mags.iter().copied().fold(0.0, f64::max);
        let ties = mags.iter().filter(|&&m| m == max).count();
        let tied_max = ties >= min_active;
        if !tied_max {
            // Only the sorted values matter, so ties need no index order.
            sorted.clear();
            sorted.extend_from_slice(mags);
            sorted.sort_unstable_by(|a, b| b.total_cmp(a));
            let solution = solve_threshold(sorted, layout)?;
            // A zero entry only needs a phase when it stays active (λ < 0);
            // below the threshold it maps to zero whatever its angle. The
            // slack keeps feasible points with zeros, where λ is 0 up to
            // rounding, fixed.
            if solution.1 >= -BRACKET_SLACK * max || mags.iter().all(|&m| m > 0.0) {
                break solution;
            }
        }
        if retries == MAX_PERTURBATION_RETRIES {
            return Err(Error::Degenerate { retries });
        }
        retries += 1;
        perturbed = true;
        let rng = rng.get_or_insert_with(|| (make_rng.take().expect("created once"))());
        for (c, &m) in work.iter_mut().zip(mags.iter()) {
            let degenerate = if tied_max { m == max } else { m == 0.0 };
            if degenerate {
                *c += complex_normal(rng) * PERTURBATION_SCALE;
            }
        }
    };
    let scale = layout.l1_target() / (s1 - (k + 1) as f64 * lambda);

    let mut distance_sq = 0.0;
    for j in 0..b {
        let shrunk = (mags[j] - lambda).max(0.0);
        out[j] = if shrunk > 0.0 && mags[j] > 0.0 {
            work[j] * (scale * shrunk / mags[j])
        } else {
            Complex64::new(0.0, 0.0)
        };
        distance_sq += (block[j] - out[j]).norm_sqr();
    }

    Ok(BlockStats {
        threshold_lambda: lambda,
        active_count: k + 1,
        perturbed,
        distance_sq,
    })
}

/// Linear scan for the unique `k*` over magnitudes sorted in descending
/// order. Returns `(k*, λ_{k*}, S1_{k*})`.
fn solve_threshold(sorted: &[f64], layout: &BlockLayout) -> Result<(usize, f64, f64)> {
    let b = layout.block_size();
    let gamma_b = GAMMA * b as f64;
    let sqrt_gamma_b = gamma_b.sqrt();
    let min_active = layout.min_active();
    let w = |i: usize| sorted[i];
    let w_max = w(0);

    let (mut s1, mut s2) = (0.0, 0.0);
    for i in 0..min_active - 1 {
        s1 += w(i);
        s2 += w(i) * w(i);
    }

    // Closest miss, used only when rounding leaves every bracket empty.
    let mut best: Option<(f64, usize, f64, f64)> = None;
    for k in (min_active - 1)..b {
        let wk = w(k);
        s1 += wk;
        s2 += wk * wk;
        let kp1 = (k + 1) as f64;
        let spread = (kp1 * s2 - s1 * s1).max(0.0);
        let lambda = s1 / kp1 - sqrt_gamma_b / kp1 * (spread / (kp1 - gamma_b)).sqrt();
        let lower = if k + 1 < b {
            w(k + 1)
        } else {
            f64::NEG_INFINITY
        };
        if lower <= lambda && lambda < wk {
            return Ok((k, lambda, s1));
        }
        let miss = if lambda >= wk {
            lambda - wk
        } else {
            lower - lambda
        };
        if best.is_none_or(|(m, ..)| miss < m) {
            best = Some((miss, k, lambda, s1));
        }
    }

    match best {
        Some((miss, k, lambda, s1)) if miss < BRACKET_SLACK * w_max => Ok((k, lambda, s1)),
        Some((miss, ..)) => Err(Error::Numerical(format!(
            "no threshold bracket found (closest miss {miss:e})"
        ))),
        None => unreachable!("min_active <= block size"),
    }
}

/// Independent solver for the same projection, for tests and verification.
///
/// Instead of the closed form, it scans `λ` on a dense grid for the root of
/// `p1(λ)²/p2(λ) − γB`, where `p1`, `p2` are the sums of `ReLU(|y_j| − λ)` and
/// its square, then refines it by bisection to `1e-12`. The ratio is
/// decreasing on `(−∞, max|y_j|)` and tends to `B` at `−∞`, so the grid is
/// extended below zero until the ratio exceeds the target.
pub fn oracle_project_block(
    block: &[Complex64],
    layout: &BlockLayout,
    grid_resolution: usize,
) -> Result<Vec<Complex64>> {
    let b = layout.block_size();
    if b > 16 {
        return Err(Error::Validation(format!(
            "oracle is limited to B <= 16, got {b}"
        )));
    }
    if grid_resolution < 1000 {
        return Err(Error::Validation(format!(
            "grid resolution must be at least 1000, got {grid_resolution}"
        )));
    }
    if block.len() != b {
        return Err(Error::Dimension(format!(
            "block has length {} but the layout block size is {b}",
            block.len()
        )));
    }
    let mags: Vec<f64> = block.iter().map(|c| c.norm()).collect();
    let target = GAMMA * b as f64;
    let sums = |lambda: f64| {
        mags.iter().fold((0.0, 0.0), |(p1, p2), &m| {
            let r = (m - lambda).max(0.0);
            (p1 + r, p2 + r * r)
        })
    };
    let excess = |lambda: f64| {
        let (p1, p2) = sums(lambda);
        if p2 == 0.0 {
            return -target;
        }
        p1 * p1 / p2 - target
    };

    let top = mags.iter().copied().fold(0.0, f64::max);
    if top == 0.0 {
        return Err(Error::OracleFailure("all-zero block".into()));
    }
    let mut lo = 0.0_f64.min(mags.iter().copied().fold(f64::INFINITY, f64::min));
    let mut span = top.max(1.0);
    while excess(lo) <= 0.0 {
        lo -= span;
        span *= 2.0;
        if span > 1e12 {
            return Err(Error::OracleFailure(
                "ratio never exceeds target below zero".into(),
            ));
        }
    }

    let step = (top - lo) / grid_resolution as f64;
    let mut bracket = None;
    let mut prev = (lo, excess(lo));
    for i in 1..grid_resolution {
        let lambda = lo + step * i as f64;
        let f = excess(lambda);
        if prev.1 > 0.0 && f <= 0.0 {
            bracket = Some((prev.0, lambda));
            break;
        }
        prev = (lambda, f);
    }
    let (mut a, mut z) =
        bracket.ok_or_else(|| Error::OracleFailure("no sign change on the λ grid".into()))?;
    while z - a > 1e-12 {
        let mid = 0.5 * (a + z);
        if mid <= a || mid >= z {
            break;
        }
        if excess(mid) > 0.0 {
            a = mid;
        } else {
            z = mid;
        }
    }
    let lambda = 0.5 * (a + z);
    let (p1, _) = sums(lambda);
    let scale = layout.l1_target() / p1;
    Ok(block
        .iter()
        .zip(&mags)
        .map(|(c, &m)| {
            let s = scale * (m - lambda).max(0.0);
            if m > 0.0 {
                c * (s / m)
            } else {
                Complex64::new(s, 0.0)
            }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream_rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn l1(v: &[Complex64]) -> f64 {
        v.iter().map(|c| c.norm()).sum()
    }

    fn l2sq(v: &[Complex64]) -> f64 {
        v.iter().map(|c| c.norm_sqr()).sum()
    }

    fn random_block(b: usize, seed: u64) -> Vec<Complex64> {
        let mut rng = stream_rng(seed, 0);
        (0..b).map(|_| complex_normal(&mut rng)).collect()
    }

    // Magnitudes (a, b) with a > b solving a + b = √π, a² + b² = 2.
    fn two_entry_solution() -> (f64, f64, f64) {
        let root = (4.0 - PI).sqrt();
        let a = (PI.sqrt() + root) / 2.0;
        let b = (PI.sqrt() - root) / 2.0;
        // (3 − λ)/(1 − λ) = a/b
        let lambda = (a - 3.0 * b) / (a - b);
        (a, b, lambda)
    }

    #[test]
    fn layout_rejects_bad_shapes() {
        assert!(BlockLayout::new(1, 4).is_err());
        assert!(BlockLayout::new(4, 0).is_err());
        assert!(matches!(
            BlockLayout::for_len(100, 16),
            Err(Error::Dimension(_))
        ));
        let l = BlockLayout::for_len(64, 16).unwrap();
        assert_eq!((l.block_count(), l.n(), l.min_active()), (2, 64, 13));
        let ratio = l.l1_target().powi(2) / l.l2sq_target();
        assert!((ratio - GAMMA * 16.0).abs() < 1e-12);
    }

    #[test]
    fn worked_two_entry_case() {
        let (a, b, lambda) = two_entry_solution();
        assert!((a - 1.3495).abs() < 1e-4 && (b - 0.4230).abs() < 1e-4);
        assert!((lambda - 0.0869).abs() < 1e-4);

        let layout = BlockLayout::new(2, 1).unwrap();
        let input = [c(3.0, 0.0), c(1.0, 0.0)];
        let r = project_block(&input, &layout, &mut stream_rng(0, 0)).unwrap();
        assert!((r.projected[0].re - a).abs() < 1e-12);
        assert!((r.projected[1].re - b).abs() < 1e-12);
        assert!((r.threshold_lambda - lambda).abs() < 1e-12);
        assert_eq!(r.active_count, 2);
        assert!(!r.perturbed);

        let oracle = oracle_project_block(&input, &layout, 10_000).unwrap();
        assert!((oracle[0].re - a).abs() < 1e-9);
        assert!((oracle[1].re - b).abs() < 1e-9);
    }

    #[test]
    fn feasible_block_is_fixed_point() {
        let layout = BlockLayout::new(16, 1).unwrap();
        let first = project_block(&random_block(16, 9), &layout, &mut stream_rng(0, 0)).unwrap();
        let again = project_block(&first.projected, &layout, &mut stream_rng(0, 0)).unwrap();
        assert_eq!(again.active_count, 16);
        assert!(again.threshold_lambda.abs() < 1e-12);
        assert!(again.distance_sq < 1e-18);
        for (a, b) in first.projected.iter().zip(&again.projected) {
            assert!((a - b).norm() < 1e-9);
        }
        let oracle = oracle_project_block(&first.projected, &layout, 1000).unwrap();
        for (a, b) in first.projected.iter().zip(&oracle) {
            assert!((a - b).norm() < 1e-9);
        }
    }

    #[test]
    fn output_hits_both_spheres_and_keeps_phase_and_order() {
        for &b in &[2usize, 3, 4, 8, 16, 64] {
            let layout = BlockLayout::new(b, 1).unwrap();
            for seed in 0..50 {
                let input = random_block(b, seed * 31 + b as u64);
                let r = project_block(&input, &layout, &mut stream_rng(seed, 1)).unwrap();
                assert!((l1(&r.projected) - layout.l1_target()).abs() < 1e-9 * b as f64);
                assert!((l2sq(&r.projected) - layout.l2sq_target()).abs() < 1e-9 * b as f64);
                assert!(r.active_count >= layout.min_active());
                let bound = layout.magnitude_bounds().max;
                for (j, (y, p)) in input.iter().zip(&r.projected).enumerate() {
                    assert!(p.norm() <= bound + 1e-9);
                    if p.norm() > 0.0 {
                        assert!((y.arg() - p.arg()).abs() < 1e-12, "phase moved at {j}");
                    }
                    for (y2, p2) in input.iter().zip(&r.projected) {
                        if y.norm() > y2.norm() {
                            assert!(p.norm() >= p2.norm());
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn matches_oracle_on_random_blocks() {
        for &b in &[2usize, 4, 8, 16] {
            let layout = BlockLayout::new(b, 1).unwrap();
            for seed in 0..100 {
                let input = random_block(b, 1000 + seed);
                let r = project_block(&input, &layout, &mut stream_rng(seed, 0)).unwrap();
                let o = oracle_project_block(&input, &layout, 2000).unwrap();
                for (p, q) in r.projected.iter().zip(&o) {
                    assert!((p - q).norm() < 1e-6);
                }
            }
        }
    }

    #[test]
    fn zero_entries_are_perturbed() {
        let layout = BlockLayout::new(4, 1).unwrap();
        let input = [c(2.0, 0.0), c(0.0, 0.0), c(1.0, 1.0), c(0.5, 0.0)];
        let r = project_block(&input, &layout, &mut stream_rng(3, 0)).unwrap();
        assert!(r.perturbed);
        assert!((l1(&r.projected) - layout.l1_target()).abs() < 1e-9);
        assert!((l2sq(&r.projected) - layout.l2sq_target()).abs() < 1e-9);
    }

    #[test]
    fn feasible_block_with_zeros_is_fixed() {
        // One entry of magnitude a and twelve of magnitude b hit both
        // targets for B = 16; the remaining three are zero.
        let layout = BlockLayout::new(16, 1).unwrap();
        let l1 = layout.l1_target();
        let a = (2.0 * l1 + (4.0 * l1 * l1 - 52.0 * (l1 * l1 - 192.0)).sqrt()) / 26.0;
        let b = (l1 - a) / 12.0;
        let mut input = vec![c(0.0, a)];
        input.extend((0..12).map(|j| Complex64::from_polar(b, j as f64)));
        input.extend([c(0.0, 0.0); 3]);
        assert!((l2sq(&input) - 16.0).abs() < 1e-12);

        let r = project_block(&input, &layout, &mut stream_rng(3, 0)).unwrap();
        assert!(!r.perturbed);
        assert!(r.threshold_lambda.abs() < 1e-12);
        for (p, q) in input.iter().zip(&r.projected) {
            assert!((p - q).norm() < 1e-12);
        }
    }

    #[test]
    fn all_zero_block_becomes_feasible() {
        let layout = BlockLayout::new(16, 1).unwrap();
        let r = project_block(&[c(0.0, 0.0); 16], &layout, &mut stream_rng(4, 0)).unwrap();
        assert!(r.perturbed);
        assert!((l2sq(&r.projected) - 16.0).abs() < 1e-9);
    }

    #[test]
    fn tied_maximum_is_perturbed() {
        // 13 of 16 entries share the maximum: the degenerate case for B = 16.
        let layout = BlockLayout::new(16, 1).unwrap();
        let mut input = vec![c(1.0, 0.0); 13];
        input.extend([c(0.2, 0.0), c(0.3, 0.0), c(0.1, 0.0)]);
        let r = project_block(&input, &layout, &mut stream_rng(5, 0)).unwrap();
        assert!(r.perturbed);
        assert!((l1(&r.projected) - layout.l1_target()).abs() < 1e-9 * 16.0);

        // 12 ties are below ⌈γB⌉ and solve directly.
        let mut input = vec![c(1.0, 0.0); 12];
        input.extend([c(0.2, 0.0), c(0.3, 0.0), c(0.1, 0.0), c(0.4, 0.0)]);
        let r = project_block(&input, &layout, &mut stream_rng(5, 0)).unwrap();
        assert!(!r.perturbed);
    }

    struct ConstRng;
    impl RngCore for ConstRng {
        fn next_u32(&mut self) -> u32 {
            0x5555_5555
        }
        fn next_u64(&mut self) -> u64 {
            0x5555_5555_5555_5555
        }
        fn fill_bytes(&mut self, dst: &mut [u8]) {
            dst.fill(0x55)
        }
    }

    #[test]
    fn persistent_ties_exhaust_retry_budget() {
        // An rng that always yields the same value adds the same offset to
        // every tied entry, so the tie never breaks.
        let layout = BlockLayout::new(4, 1).unwrap();
        let input = [c(1.0, 0.0); 4];
        let err = project_block(&input, &layout, &mut ConstRng).unwrap_err();
        assert!(matches!(
            err,
            Error::Degenerate {
                retries: MAX_PERTURBATION_RETRIES
            }
        ));
    }

    #[test]
    fn rejects_bad_input() {
        let layout = BlockLayout::new(2, 1).unwrap();
        let mut rng = stream_rng(0, 0);
        assert!(matches!(
            project_block(&[c(f64::NAN, 0.0), c(1.0, 0.0)], &layout, &mut rng),
            Err(Error::Validation(_))
        ));
        assert!(matches!(
            project_block(&[c(1.0, 0.0)], &layout, &mut rng),
            Err(Error::Dimension(_))
        ));
        assert!(
            oracle_project_block(&[c(1.0, 0.0); 32], &BlockLayout::new(32, 1).unwrap(), 1000)
                .is_err()
        );
        assert!(oracle_project_block(&[c(1.0, 0.0), c(2.0, 0.0)], &layout, 10).is_err());
    }

    #[test]
    fn magnitude_bound_values() {
        assert!((magnitude_bounds(8).unwrap().max - 2.11).abs() < 0.01);
        let b16 = magnitude_bounds(16).unwrap();
        assert!((b16.max - 2.68).abs() < 0.01);
        assert!((b16.max * b16.max - 7.18).abs() < 0.01);
        assert_eq!(b16.min, 0.0);
        assert!((magnitude_bounds(32768).unwrap().max - 84.74).abs() < 0.01);
        assert!(magnitude_bounds(1).is_err());
        // B = 2: √γ − √(1−γ) > 0.
        assert!(magnitude_bounds(2).unwrap().min > 0.0);
    }

    #[test]
    fn extreme_block_reaches_the_upper_bound() {
        // One dominant entry with the rest equal projects to the analytic
        // extreme (a, b, ..., b).
        let layout = BlockLayout::new(16, 1).unwrap();
        let mut input = vec![c(50.0, 0.0)];
        input.extend((0..15).map(|j| c(1.0 + 1e-9 * j as f64, 0.0)));
        let r = project_block(&input, &layout, &mut stream_rng(0, 0)).unwrap();
        let bound = magnitude_bounds(16).unwrap().max;
        assert!((r.projected[0].norm() - bound).abs() < 1e-6);
    }
}
