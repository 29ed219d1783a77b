//! Finite structures and their automorphism groups.
//!
//! The crate computes automorphism groups of finite multi-sorted relational
//! structures and uses the fact that, for finite structures, a set of tuples
//! is definable exactly when it is invariant under all automorphisms. On top
//! of that it provides definable and algebraic closure, bounded-arity
//! imaginaries, interpretations between structures, exact sequences of
//! automorphism groups, splittings of those sequences, cover structures with
//! their deck groups, and finite towers.

pub mod autcomp;
pub mod catalog;
pub mod config;
pub mod covers;
pub mod error;
pub mod fostruct;
pub mod imaginaries;
pub mod morphcat;
pub mod permgrp;
pub mod sections;
pub mod towers;

pub use config::Limits;
pub use error::{Error, Result};
