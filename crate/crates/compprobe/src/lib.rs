//! Desk-scale laboratory for probing compositional structure in
//! character-level arithmetic transformers.
//!
//! The pipeline has four stages, each exposed as a library module and as a
//! CLI subcommand:
//!
//! 1. [`expr`] / [`dataset`] — six arithmetic expression templates,
//!    constrained problem sampling, and line-delimited problem files.
//! 2. [`tensor`] / [`model`] — a minimal reverse-mode autodiff tensor core
//!    and a character-level transformer encoder-decoder in two variants
//!    (standard attention and TP-attention with role-filler binding).
//! 3. [`train`] — teacher-forced sequence-to-sequence training with
//!    exact-match evaluation and binary checkpoints.
//! 4. [`probe`] — distance/difference Spearman analyses of recorded
//!    activation vectors: digit probes, operator probes, matched/unmatched
//!    regression, per-layer curves and per-position correlation maps.
//!
//! Everything downstream of a seed is deterministic: reruns with identical
//! inputs produce byte-identical output files, independent of the worker
//! thread count (see [`par`]).

pub mod dataset;
pub mod expr;
pub mod manifest;
pub mod model;
pub mod par;
pub mod probe;
pub mod rng;
pub mod tensor;
pub mod train;
