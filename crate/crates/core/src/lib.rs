//! Arc-eager dependency parsing with future-reward reranking.
//!
//! A greedy arc-eager transition parser picks each action by mixing its
//! classifier's probabilities with a *future reward*: for every legal
//! action, the score of the best projective tree that remains derivable
//! after taking it. Derivability is expressed as required and forbidden arc
//! sets ([`constraints`]) that a constrained Eisner decoder ([`decoder`])
//! honours. The mixture weight `beta` moves the parser smoothly from the
//! pure graph-based decoder (`beta = 0`) to the pure transition parser
//! (`beta = 1`).
//!
//! ```
//! use frparse::decoder::{decode, ScoreMatrix};
//!
//! let mut scores = ScoreMatrix::zeros(2);
//! scores.set(0, 1, 1.0);
//! scores.set(0, 2, 0.5);
//! scores.set(1, 2, 2.0);
//! scores.set(2, 1, 3.0);
//! let best = decode(&scores);
//! assert_eq!(best.tree.heads(), &[2, 0]);
//! assert_eq!(best.score, 3.5);
//! ```

pub mod cli;
pub mod constraints;
pub mod decoder;
pub mod error;
pub mod eval;
pub mod integrator;
pub mod scoring;
pub mod synthetic;
pub mod transition;
pub mod treebank;

pub use error::{Error, Result};
