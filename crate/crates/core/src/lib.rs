//! Topic modeling for threaded online discussions.
//!
//! Comment trees are parsed into a [`thread_model::Corpus`], every comment gets
//! a level-weighted [`popularity`] score, a popularity-weighted collapsed
//! Gibbs [`sampler`] fits topics, and [`assignment`] labels each comment by
//! blending topic distributions along its root path. [`coherence`] scores
//! topics against a reference corpus and [`synthetic`] provides planted-topic
//! data with ground truth.

pub mod assignment;
pub mod coherence;
pub mod config;
pub mod error;
mod matching;
pub mod pipeline;
pub mod popularity;
pub mod sampler;
pub mod synthetic;
pub mod thread_model;

pub use error::{Error, Result};
pub use matching::max_weight_assignment;
