//! Finite coloured trees and the analyses run on them.

pub mod bare;
pub mod binary;
pub mod canon;
pub mod deck;
pub mod embed;
pub mod export;
pub mod iso;
pub mod tree;

pub use bare::{bare_decompose, bare_extension, bare_path_bound_after_deletion, max_bare_path};
pub use binary::{binary_tree, max_binary_height};
pub use canon::{canonical_code, CanonicalCode, Labels};
pub use deck::deck_compare;
pub use embed::{embed_search, EmbedOptions, EmbedOutcome, RootMode};
pub use iso::{component_of, rooted_iso, unrooted_iso};
pub use tree::{ColoredTree, Colour, DirectedEdge, TreeDoc, TreeError, VertexId};
