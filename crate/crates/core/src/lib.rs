//! Construction and checking of two infinite trees of maximum degree 3 that are vertex- and
//! edge-hypomorphic, yet neither embeds in the other.

pub mod cli;
pub mod construction;
pub mod presentation;
pub mod promise;
pub mod tree_core;
pub mod verify;
