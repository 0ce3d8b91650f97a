//! Function-level code/documentation inconsistency detection.
//!
//! The pipeline is `extraction` -> `prompting` -> `llm_client` ->
//! `analysis` -> `reporting`, with `evaluation` scoring results against
//! human labels.

pub mod analysis;
pub mod category;
pub mod cli;
pub mod error;
pub mod evaluation;
pub mod extraction;
pub mod jsonl;
pub mod llm_client;
pub mod pipeline;
pub mod prompting;
pub mod rates;
pub mod reporting;

pub use error::{Error, Result};
