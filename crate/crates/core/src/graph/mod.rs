//! Binary matrices as graphs: block closure, components and chordal
//! extension.

mod chordal;
mod closure;
mod matrix;
mod partition;

pub use chordal::{chordal_extension, is_chordal, is_perfect_elimination_ordering, maximum_cardinality_search, ChordalExtension};
pub(crate) use matrix::iter_bits;
pub use closure::{block_closure, connected_components, UnionFind};
pub use matrix::SymBinMatrix;
pub use partition::BlockPartition;
