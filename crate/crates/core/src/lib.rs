//! Tools for the L3 rule on protein interaction networks: path census and
//! association statistics, link-prediction data partitions, and an
//! L3-path-regularized graph prompt classification head trained on top of
//! frozen protein embeddings.

pub mod autodiff;
pub mod census;
pub mod error;
pub mod gin;
pub mod graph;
pub mod metrics;
pub mod prompt;
pub mod rng;
pub mod split;
pub mod synth;
pub mod trainer;

pub use error::{Error, Result};
