//! Feature matrices for both active learning stages.
//!
//! Every representation is exposed twice: the raw feature view used by the
//! classifier and a unit-norm [`similarity_view`] used for selection.

pub mod dvec;
pub mod lsi;
pub mod matrix;
pub mod text;

pub use dvec::{load_embeddings, save_embeddings};
pub use lsi::{lsi_fit, lsi_fit_with, lsi_project, LsiModel, SvdOptions, DEFAULT_LSI_DIM};
pub use matrix::{similarity_view, CsrMatrix, DenseMatrix, FeatureMatrix, MatrixKind, Row, Storage};
pub use text::{fit_vocabulary, tfidf, tokenize, Vocabulary, DEFAULT_MIN_DF};
