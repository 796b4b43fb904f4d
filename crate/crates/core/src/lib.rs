//! Numerical core: two-qubit gate geometry, coupling normal forms and the
//! time-optimal pulse solver.

pub mod gates;
pub mod hamiltonian;
pub mod numerics;
pub mod scheme;
pub mod weyl;

pub use numerics::{CMatrix, NumericsError, C64};
pub use weyl::{LocalDecomposition, WeylCoordinate};
