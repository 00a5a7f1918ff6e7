//! Unsupervised semantic frame induction.
//!
//! The toolkit splits frame induction into two independent clustering
//! problems and a merge step:
//!
//! * verb instances are grouped into frames by clustering composed
//!   context + word vectors ([`pipeline::run_subtask_a`]);
//! * highlighted arguments are grouped into generic roles by clustering
//!   embeddings together with dependency features ([`pipeline::run_subtask_b2`]);
//! * the two labelings are combined into frame-specific slots
//!   ([`pipeline::merge_b1`]).
//!
//! Supporting pieces: CoNLL-U / JSONL ingestion ([`corpus`]), static and
//! precomputed contextual vectors ([`embeddings`]), syntactic feature blocks
//! ([`features`]), hierarchical agglomerative clustering ([`cluster`]),
//! Purity and B-Cubed scoring ([`eval`]) and a multinomial logistic regression
//! used as a supervised upper bound ([`logreg`]).

pub mod cluster;
pub mod corpus;
pub mod embeddings;
mod error;
pub mod eval;
pub mod features;
pub mod labeling;
pub mod logreg;
pub mod pipeline;

pub use error::{Error, Result, WithWarnings};
