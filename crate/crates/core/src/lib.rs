//! Verification toolkit for Frobenius-like structures on translated families
//! of hyperplane arrangements: flag spaces with their contravariant form,
//! Gauss-Manin operators, algebras of functions on critical sets, the
//! canonical isomorphism between them, and potential functions.

pub mod critalg;
pub mod error;
pub mod family;
pub mod frobenius;
pub mod gaussmanin;
pub mod linalg;
pub mod osflag;
pub mod poly;
pub mod roots;
pub mod scalar;

pub use error::{Error, Result};
pub use family::{load_family, ArrangementFamily, Circuit, FamilyConfig, SubsetIndex};
pub use scalar::{Complex, Rational, Scalar};
