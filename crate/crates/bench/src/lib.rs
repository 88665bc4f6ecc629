//! Input fixtures shared by the benchmarks.

use wgn_core::rng::{complex_normal, gaussian_latent, stream_rng};
use wgn_core::{Complex64, LatentVector};

pub fn gaussian_input(n: usize, seed: u64) -> LatentVector {
    gaussian_latent(n, &mut stream_rng(seed, 0))
}

pub fn gaussian_block(block_size: usize, seed: u64) -> Vec<Complex64> {
    let mut rng = stream_rng(seed, 1);
    (0..block_size).map(|_| complex_normal(&mut rng)).collect()
}
