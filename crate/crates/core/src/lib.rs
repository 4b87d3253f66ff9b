//! Procedural generation of compositional visual decision-making tasks.
//!
//! A task is a [`graph::TaskGraph`] of operators. Graphs are sampled by
//! [`autotask`] or built by hand, instantiated into trials by [`trial`],
//! described in words by [`instruction`], drawn by [`render`], bundled into
//! benchmarks by [`presets`] and scored by [`harness`].

pub mod autotask;
pub mod dataset;
pub mod graph;
pub mod harness;
pub mod instruction;
pub mod presets;
pub mod render;
pub mod seed;
pub mod stimulus;
pub mod trial;
pub mod value;
