//! Tag-aware recommendation with socially regularized matrix factorization.
//!
//! The pipeline: load a user-item-tag corpus and a friendship graph
//! ([`corpus`]), cluster users by tag profile ([`clustering`]), weight
//! friendships by similarity and items by user-item correlation
//! ([`affinity`]), train latent factors ([`factorizer`]), and rank items for
//! each user ([`evaluator`]).

pub mod affinity;
pub mod baselines;
pub mod checkpoint;
pub mod cli;
pub mod clustering;
pub mod config;
pub mod corpus;
pub mod error;
pub mod evaluator;
pub mod experiment;
pub mod factorizer;
pub mod store;
pub mod synthetic;

pub use error::{Error, Result};
