//! Closed-form projection onto the white Gaussian noise feasible set.
//!
//! A real latent `x ∈ R^N` is mapped bijectively to a compact spectrum
//! `y ∈ C^{N/2}` ([`spectral`]). The feasible set fixes, in every block of
//! `B` compact coefficients, the ℓ1 norm to `(√π/2)·B` and the squared ℓ2
//! norm to `B`, the expected values for `CN(0, 1)` entries. Projection onto
//! it is exact and runs in `O(N log N)` ([`block`], [`feasible`]), which
//! makes projected gradient ascent ([`optimizer`]) cheap.

pub mod block;
pub mod error;
pub mod feasible;
pub mod io;
pub mod optimizer;
pub mod regularizers;
pub mod rng;
pub mod spectral;
pub mod timing;
pub mod toy;
pub mod verify;

pub use num_complex::Complex64;

pub use block::{
    magnitude_bounds, oracle_project_block, project_block, BlockLayout, BlockProjection,
    MagnitudeBounds,
};
pub use error::{Error, Result};
pub use feasible::{
    cosine_similarity_study, feasibility_residuals, project_to_feasible, ProjectionReport,
    SimilarityStudyResult,
};
pub use optimizer::{
    adam_step, projected_ascent, regularized_ascent, AdamState, AscentMode, Objective,
    OptimizerConfig, Trajectory,
};
pub use regularizers::{
    combined_gradient, l_norm_loss, l_power_loss, RegularizerKind, RegularizerSpec, Weighting,
};
pub use spectral::{
    dft_unitary, from_compact, to_compact, CompactSpectrum, HermitianSpectrum, LatentVector,
};
pub use toy::{
    run_comparison, run_each_mode, spike_reward, ScenarioConfig, ScenarioMode, SpikeReward,
};
