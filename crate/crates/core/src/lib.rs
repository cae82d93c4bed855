//! Lexical semantic change detection toolkit.
//!
//! The crate covers the full batch pipeline of a graded/binary change
//! shared task: layered diachronic corpora ([`corpus`]), word usage graphs
//! and their correlation clustering ([`wug`]), gold change scores
//! ([`change`]), annotator agreement ([`agreement`]), the baseline systems
//! ([`baselines`]) and submission scoring ([`eval`]). [`synth`] generates
//! small corpora with planted sense changes for desk-scale end-to-end runs.
//!
//! Numeric code is generic over [`Scalar`] (`f32` or `f64`); the aliases
//! at the crate root fix it to `f64`, which is what the CLI uses.

pub mod agreement;
pub mod baselines;
pub mod change;
pub mod corpus;
pub mod error;
pub mod eval;
pub mod scalar;
pub mod stats;
pub mod synth;
pub mod tsv;
pub mod wug;

pub use error::{Error, Result};
pub use scalar::Scalar;

/// Word usage graph with `f64` edge weights.
pub type Wug = wug::WordUsageGraph<f64>;
/// Clustering result with `f64` losses.
pub type WugClustering = wug::Clustering<f64>;
/// Gold change scores for one word.
pub type Scores = change::ChangeScores<f64>;
/// Type-based embedding space with `f64` entries.
pub type Embeddings = baselines::EmbeddingMatrix<f64>;
/// Per-word predictions for one subtask.
pub type Predictions = baselines::PredictionSet<f64>;
/// Gold data for evaluation.
pub type Gold = eval::GoldSet<f64>;
