//! Exact cohomology and splitting types for bundles on CP¹, quaternionic
//! structures on ⊕²ⁿO(1), and the flat hyperkähler twistor correspondence.

pub mod bundle;
pub mod deformation;
pub mod error;
pub mod hypercomplex;
pub mod json;
pub mod laurent;
pub mod linalg;
pub mod matrix;
pub mod quaternionic;
pub mod rng;
pub mod scalar;
pub mod twistor;

pub use bundle::{BundleCP1, CohomologyReport, GlobalSection, SplittingType};
pub use error::{Error, Result};
pub use laurent::{LaurentMatrix, LaurentPoly};
pub use matrix::Matrix;
pub use scalar::{Backend, Exact, Float, GaussRational, Scalar};
