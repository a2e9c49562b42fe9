//! Independent numerical checks: Monte Carlo sampling, Lloyd iteration, exact
//! 1-D k-means and exhaustive search over split trees.

mod clustering;
mod exhaustive;
mod sampling;

pub use clustering::{
    kmeans_1d_exact, kmeans_pp_init, lloyd, lloyd_restarts, mc_distortion, mc_distortion_estimate, Clustering,
    McEstimate,
};
pub use exhaustive::{exhaustive_min, ExhaustiveResult, DEFAULT_SEARCH_CAP, MAX_EXHAUSTIVE_N};
pub use sampling::{sample, sample_letter, SampleBatch, CHUNK, DEFAULT_DEPTH, MAGIC};
