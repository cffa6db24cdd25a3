//! Candidate lemma synthesis and the local inference loop.

mod candidates;
mod local;
pub mod table;

pub use candidates::{candidate_space_size, enumerate, Candidate, Evaluator};
pub use local::{local_inv_inference, CandidateStats, LocalResult, SynthConfig};

use crate::model::EvalError;

#[derive(Debug, thiserror::Error)]
pub enum SynthError {
    #[error(transparent)]
    Table(#[from] table::TableError),
    #[error(transparent)]
    Eval(#[from] EvalError),
}
