//! Truncated countably branching diamond, Laakso and parasol graphs, their
//! exact metrics, three explicit bi-Lipschitz embeddings and the matching
//! distortion lower-bound curves.

pub mod bounds;
pub mod distortion;
pub mod dyadic;
pub mod error;
pub mod exact;
pub mod graphs;
pub mod io;
pub mod l1_embed;
pub mod linf_embed;
pub mod lp_transfer;
pub mod metric;

pub use dyadic::Dyadic;
pub use error::{Error, Result};
