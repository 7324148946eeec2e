//! Connection center evolution (CCE) clustering.
//!
//! A pairwise similarity matrix `S` is raised to successive powers. At each
//! power `k` the points whose self-connectivity `Sᵏ[i][i]` dominates their row
//! become cluster centers and every other point joins the center it is most
//! strongly connected to relative to that center's self-connectivity. Small
//! `k` sees local structure, large `k` global structure; the counts that stay
//! constant over long runs of `k` are the suggested clusterings.
//!
//! ```
//! use cce::evolution::{run_evolution, EvolutionConfig};
//! use cce::similarity::SimilarityMatrix;
//!
//! let s = SimilarityMatrix::from_matrix(
//!     &[vec![1.0, 0.9, 0.1], vec![0.9, 1.0, 0.1], vec![0.1, 0.1, 1.0]],
//!     None,
//! )
//! .unwrap();
//! let trace = run_evolution(&s, &EvolutionConfig::default()).unwrap();
//! assert_eq!(trace.counts()[0], 3);
//! ```

pub mod analysis;
pub mod cli;
pub mod error;
pub mod evolution;
pub mod io;
pub mod matrix;
pub mod similarity;
pub mod spectral;

pub use error::{CceError, Result};
