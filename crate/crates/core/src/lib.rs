//! Emotion arcs and gender-stereotype structure in narrative corpora.
//!
//! Words are scored by cosine similarity with a happiness direction in an
//! embedding space; segments, characters and co-occurrences of the leading
//! woman and man turn those scores into per-character curves, slopes between
//! co-occurrences, word co-occurrence networks and regression inputs.

pub mod arc;
pub mod axis;
pub mod cast;
pub mod corpus;
pub mod embedstore;
pub mod endorse;
pub mod error;
pub mod lexnet;
pub mod par;
pub mod pipeline;
pub mod slope;
pub mod stats;
pub mod synth;

pub use error::{Error, Result};
