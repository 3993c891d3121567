//! Manifold statistics: Fréchet means, wrapped Gaussian sampling, classical
//! MDS and tangent-vector diagnostics.

mod diagnostics;
mod frechet;
pub(crate) mod mds;
mod wrapped;

pub use diagnostics::{
    direction_cosines, identity_coords, pairwise_distances, tangent_pca, TangentPca,
};
pub use frechet::{
    frechet_function, frechet_mean, frechet_mean_default, FrechetResult, DEFAULT_MAX_ITER,
    DEFAULT_TOL,
};
pub use mds::{classical_mds, MdsResult};
pub use wrapped::{sample_with_factor, sample_wrapped_gaussian, NoiseFactor};
