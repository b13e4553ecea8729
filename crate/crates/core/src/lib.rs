pub mod error;
pub mod exactla;

pub use error::{QdError, Result};
pub use exactla::{FpMatrix, FpScalar};
pub mod polyring;
pub use polyring::{Monomial, Polynomial, RingSpec, Weight};
pub mod grmod;
pub use grmod::{Generator, GradedMap, GradedModulePresentation};
pub mod cohomeng;
pub use cohomeng::{CohTable, Entry};
pub mod bundlecat;
pub use bundlecat::BundleExpr;
pub mod theoremkit;
pub use theoremkit::{Certificate, ComplexSpec};
