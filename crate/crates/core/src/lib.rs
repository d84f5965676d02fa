//! Analysis and synthesis of quantum access structures.
//!
//! A quantum access structure is a monotone family of player subsets whose
//! authorized sets pairwise intersect. This crate provides:
//!
//! * [`structure`]: the bitmask representation, closure membership, the
//!   no-cloning check and the maximality test;
//! * [`maximalize`]: extension of a structure to a maximal one, reduction of
//!   a maximal structure to a minimal maximal one (`r = n`), the one-player
//!   growth step and an exhaustive enumeration of self-dual families;
//! * [`decomp`]: realizability oracles (bundled weighted thresholds) and the
//!   exact minimum-block decomposition;
//! * [`qsim`]: a sparse qudit simulator for polynomial-code threshold schemes
//!   that checks secrecy and recoverability through reference decoupling;
//! * [`scheme`]: assembly and verification of the decomposition scheme
//!   (registers per player) and the concatenated threshold scheme.
//!
//! With the default `parallel` feature the exhaustive sweeps run on rayon;
//! without it every sweep runs sequentially with identical results.

pub mod decomp;
pub mod error;
pub mod format;
pub mod limits;
pub mod maximalize;
pub mod par;
pub mod qsim;
pub mod sample;
pub mod scheme;
pub mod structure;

pub use error::{Error, Result};
pub use limits::Limits;
pub use structure::{AccessStructure, PlayerSet, Universe};
