//! Cold-start active learning for text classification.
//!
//! The crate covers the whole experiment loop for the zero-label setting:
//!
//! * [`corpus`]: labeled corpora, stratified folds, pool/test splits.
//! * [`representations`]: tokenization, TF-IDF bag of words, LSI via truncated SVD,
//!   the DVEC embedding format and the unit-norm similarity view.
//! * [`selection`]: exact cosine kNN, density, diversity and the greedy
//!   density-weighted diversity selector (DWDS).
//! * [`classifier`]: one-vs-rest linear max-margin classifier.
//! * [`evaluation`]: macro-F1, t confidence intervals, paired Wilcoxon signed-rank test.
//! * [`harness`]: cross-validated experiments, LSI dimension sweeps, CSV/JSON reports and
//!   the embedding sidecar protocol.
//!
//! The selection stage only ever receives feature views, never labels.

pub mod classifier;
pub mod corpus;
pub mod error;
pub mod evaluation;
pub mod harness;
pub mod representations;
pub mod selection;

pub use error::{Error, Result};
