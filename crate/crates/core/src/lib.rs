//! Linear concept erasure for embedding matrices.
//!
//! The crate fits the least-squares affine eraser that removes all linear
//! correlation between embeddings and a categorical concept (such as source or
//! language), applies it to new rows, and measures the effect with k-means
//! clustering agreement, paired-item retrieval recall and principal component
//! diagnostics. A synthetic generator with known latent structure backs the
//! tests.
//!
//! ```
//! use leace_core::{eraser, linalg::Matrix, ConceptLabels};
//!
//! let x = Matrix::from_rows(&[[1.0, 0.5], [-1.0, 0.25], [1.0, -0.5], [-1.0, 0.0]]).unwrap();
//! let c = ConceptLabels::from_strings(&["A", "B", "A", "B"]);
//! let e = eraser::fit(&x, &c).unwrap();
//! let adjusted = e.apply(&x).unwrap();
//! assert_eq!(adjusted.shape(), (4, 2));
//! ```

pub mod clustering;
pub mod config;
pub mod eraser;
pub mod error;
pub mod io;
pub mod json;
pub mod linalg;
pub mod metrics;
pub mod synth;

pub use config::Tolerances;
pub use eraser::{ConceptLabels, LeaceEraser, SufficientStats};
pub use error::{Error, Location, Result};
pub use linalg::Matrix;
