pub mod catalog;
pub mod divisors;
pub mod error;
pub mod groups;
pub mod io;
pub mod isospectral;
pub mod linalg;
pub mod quantum_graph;
pub mod quotient;

pub use error::{Error, Result};
pub use groups::{PermGroup, Representation, Subgroup};
pub use linalg::{CMatrix, C64};
