//! Speech-emotion recognition pipeline for isolated-word corpora: WAV and
//! manifest ingestion, endpointing and wavelet features, mixed-model feature
//! analysis, and emotional vs. non-emotional classification.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod corpus;
pub mod dsp;
pub mod format;
pub mod ml;
pub mod stats;
