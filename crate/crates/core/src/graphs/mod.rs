//! Bundle graphs: the edge-substitution product, recursive family builders,
//! the set-theoretic coding of diamonds and isomorphism checks between them.

pub mod bundle;
pub mod code;
pub mod coded;
pub mod iso;
pub mod product;

pub use bundle::{BundleGraph, BundleSpec, Family, GraphMeta, PathCheck, Provenance};
pub use code::VertexCode;
pub use coded::{build_coded, code_index, coded_vertex_count, coded_vertices, up_down_edge};
pub use iso::{check_isomorphism, Isomorphism};
pub use product::{build_recursive, oslash_product};
