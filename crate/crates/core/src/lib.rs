//! Regular operator norms on finite `ℓ_p` lattices, their Calderón-product
//! description and norm-preserving extensions from subspaces.

pub mod calderon;
pub mod error;
pub mod extension;
pub mod gen;
pub mod hardy;
pub mod io;
pub mod model;
pub mod norms;
pub mod oracle;

pub use error::{Error, Result};
pub use model::{entrywise_abs, ExponentSpec, FamilyWitness, MatrixOperator, NonnegVector};
pub use num_complex::Complex64;

/// Embedded in every machine-readable report.
pub const SCHEMA_VERSION: &str = "regint-report/1";
