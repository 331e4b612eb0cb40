//! Structured sunflowers in finite relational structures.
//!
//! The crate is organised bottom-up:
//!
//! * [`structures`]: finite relational structures, embeddings, classes given by
//!   forbidden irreducible structures, quantifier-free types, 3-DAP checking.
//! * [`generators`]: seeded finite approximations of generic structures.
//! * [`partitionlab`]: vertex partitions, colourings and copy searches.
//! * [`ksets`]: structures on k-sets, sunflower detection, exhaustive witness checks.
//! * [`ramsey`]: partitioned high-girth hypergraphs and the counting behind them.
//! * [`witness`]: pasting, the recursive witness chain and sunflower extraction.

pub mod error;
pub mod generators;
pub mod ksets;
pub mod partitionlab;
pub mod ramsey;
pub mod structures;
pub mod witness;

pub use error::{Error, Result};
