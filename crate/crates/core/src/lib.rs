//! Whole-graph embeddings built from node-feature distributions.
//!
//! For every node the features of its k-hop sub-graph are treated as samples of a
//! random variable. Neighbours are weighted either by *topological similarity*
//! (how alike their heat-kernel wavelet energy profiles are, compared with a
//! sorted-assignment distance) or by *influence* (smoothed degree). The weighted
//! empirical characteristic function is averaged over all nodes, sampled at
//! evenly spaced points and concatenated over hop counts and both weightings.
//!
//! Pipeline:
//!
//! ```text
//! Graph ──laplacian──▶ L ──eigendecomposition──▶ Ψ = U e^{-τΛ} Uᵀ
//!   │                                              │ sorted columns
//!   │                                              ▼
//!   └─ k-hop BFS ──▶ transition weights ◀── s(i,j) = e^{-MDPA(Ψ_i, Ψ_j)}
//!                          │
//!                          ▼
//!        φ_v(t) = Σ_j P(j|v) e^{i t a_j}  ──mean over v──▶ φ_G(t) ──sample──▶ χ_G
//! ```
//!
//! The [`eval`] module reproduces the usual graph-classification protocol on top
//! of the embeddings: seeded 80/20 splits, L2 logistic regression and ROC AUC.

pub mod dataset;
pub mod embedding;
pub mod error;
pub mod eval;
pub mod graph;
pub mod similarity;
pub mod spectral;

pub use embedding::{embed_collection, embed_graph, EmbeddingParams, EmbeddingVector, Variant};
pub use error::{Error, Result};
pub use graph::{AttributeMatrix, Graph, SymmetricMatrix};
pub use spectral::{heat_wavelets, symmetric_eigendecomposition, EigenDecomposition, WaveletMatrix};
