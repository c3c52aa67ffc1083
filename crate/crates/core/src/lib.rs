//! Parallel-corpus mining and filtering over multilingual sentence embeddings.
//!
//! The pipeline: load raw embedding matrices ([`embed_io`]), run exact cosine
//! k-nearest-neighbor search ([`simcore`]), score candidate pairs with a
//! margin function that discounts generically-similar "hub" sentences
//! ([`margin`]), turn scores into candidate pairs with one of four retrieval
//! strategies ([`retrieval`]), and evaluate against a gold alignment
//! ([`evalsuite`]). [`prefilter`] removes boilerplate pairs from raw text
//! corpora before scoring, and [`synthgen`] builds deterministic synthetic
//! fixtures with planted translations and hub distractors.

pub mod embed_io;
pub mod error;
pub mod evalsuite;
pub mod margin;
pub mod prefilter;
pub mod retrieval;
pub mod simcore;
pub mod synthgen;

pub use error::{Error, Result};
