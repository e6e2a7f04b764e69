//! Procedural generation of ARC-style task families.
//!
//! A task family samples fresh episodes (train/test grid pairs sharing one
//! latent rule) under episode-level constraints. Each sample carries
//! instantiated reasoning lines and a closed DSL program (the witness) whose
//! re-execution reproduces every stored output.

pub mod analysis;
pub mod dataset;
pub mod dsl;
pub mod exemplars;
pub mod generator;
pub mod grid;
pub mod objects;
pub mod sampler;
pub mod score;
pub mod verify;
