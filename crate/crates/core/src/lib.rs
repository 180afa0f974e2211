//! Desk-scale experiments on finitely generated semigroups of transcendental
//! entire functions: word algebra and subsemigroup indices, escape-time
//! approximations of the escaping, Julia and Fatou sets, and reproducible
//! checks of how those sets relate between a semigroup and its subsemigroups.

pub mod config;
pub mod dynamics;
pub mod error;
pub mod function;
pub mod index;
pub mod oracle;
pub mod verification;
pub mod word;

pub use error::{Error, Result};
