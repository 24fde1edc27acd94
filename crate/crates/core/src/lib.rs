//! Boolean sum-of-squares relaxations for graph cut and cover problems,
//! with moment conditioning and metric-based rounding.
//!
//! The crate solves degree-d relaxations of Vertex Cover, Balanced
//! Separator, Uniform Sparsest Cut, Min UnCut, Min 2CNF Deletion and Min
//! Symmetric DiCut over boolean pseudo-expectations, conditions the
//! solution until its correlation structure is hollow, and rounds via
//! well-separated sets. Exact brute-force oracles validate every claim at
//! small scale.

pub mod arv;
pub mod battery;
pub mod conditioning;
pub mod error;
pub mod instances;
pub mod linalg;
pub mod metrics;
pub mod oracle;
pub mod poly;
pub mod pseudoexp;
pub mod report;
pub mod rounding;
pub mod sossolver;
pub mod subset;

pub use error::{Error, Result};
