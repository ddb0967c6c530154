//! Text classification through document images.
//!
//! Documents are turned into banded self-attention images of word-embedding
//! inner products ([`transform`]), classified with a small convolutional
//! network written from scratch ([`nn`]), and evaluated with the usual
//! answer-selection metrics ([`experiment`]). The [`glove`] module is a
//! numerical lab relating GloVe's per-word cost to the LLE reconstruction
//! cost.

pub mod corpus;
pub mod experiment;
pub mod glove;
pub mod nn;
pub mod transform;
