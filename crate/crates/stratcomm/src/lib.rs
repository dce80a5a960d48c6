//! Exact analysis of a receiver extracting information from a strategic sender.
//!
//! The receiver commits to a decoder `g`; the sender, who observes an i.i.d. source block
//! `x`, reports whatever maximises its block utility given `g`. This crate evaluates such
//! games exactly at small block lengths, both sequence by sequence and through the method
//! of types, and provides the single-letter tools (utility cycle tests, rate-region
//! endpoints, the mismatched distortion bound) that describe the asymptotic picture.

pub mod dbar;
mod digraph;
pub mod engine;
pub mod error;
pub mod graph;
pub mod info;
pub mod model;
pub mod rate;
pub mod rational;
pub mod strategy;
pub mod transport;
pub mod utility;

pub use error::{Error, Result};
