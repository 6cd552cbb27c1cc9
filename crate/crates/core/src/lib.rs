//! Free-fermion entanglement entropy on Hamming graphs H(d,q).
//!
//! Fast paths work module by module in the Terwilliger decomposition and never
//! touch a `q^d`-dimensional object; [`oracle`] builds the dense matrices for
//! small graphs and is used to validate everything else.

pub mod error;
pub mod special;
pub mod xfloat;
pub mod model;
pub mod spectrum;
pub mod entropy;
pub mod subgraph;
pub mod tridiag;
pub mod terwilliger;
pub mod heun;
pub mod poly;
pub mod bethe;
pub mod oracle;
pub mod figures;

pub use error::{Error, Result};
pub use model::{Couplings, GraphSpec, LevelSet};
pub use spectrum::CorrelationSpectrum;
