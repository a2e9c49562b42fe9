//! Exact optimal quantization for an infinite nonhomogeneous self-similar measure.
//!
//! The measure `P` on `[0, 1]` is generated by the similitudes
//! `S_j(x) = x/2^(j+1) + 1 − 1/2^(j−1)` with probabilities `p_1 = 1/4`,
//! `p_j = 3/2^(j+1)` (`j ≥ 2`). Optimal sets of n-means are built by repeatedly
//! splitting a node of maximal distortion, where a node is either the centroid of
//! a cylinder `J_ω` or of the tail `J_(ω,∞)` of its later siblings.
//!
//! * [`word`]: words over the positive integers.
//! * [`measure`]: probabilities, maps, regions, centroids and exact distortions.
//! * [`engine`]: greedy splitting, enumeration and counting of optimal sets,
//!   transition graphs and structural validation.
//! * [`oracle`]: Monte Carlo sampling, Lloyd and exact 1-D k-means, and exhaustive
//!   search over split trees, used to cross-check the engine.
//! * [`cli`]: the `quantizer` command-line front end.

pub mod cli;
pub mod engine;
pub mod error;
pub mod measure;
pub mod oracle;
pub mod rational;
pub mod word;

pub use error::{Error, Result};
pub use rational::Rational;
pub use word::Word;
