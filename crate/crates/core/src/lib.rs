//! Numerical laboratory for logistic reaction–diffusion populations living on
//! a landscape with a degraded region `B`: habitat degradation at a finite
//! rate `c` and its destruction limit `c → ∞`.

pub mod analysis;
pub mod cli;
pub mod discretization;
pub mod dynamics;
pub mod error;
pub mod field;
pub mod landscape;
pub mod linalg;
pub mod spectral;

pub use discretization::{
    assemble_destruction_laplacian, assemble_neumann_laplacian, build_grid, DiscreteDomain,
    NodeClass, OperatorKind, SparseOperator,
};
pub use error::{Error, Result};
pub use field::{Field, Support};
pub use landscape::{build_landscape, AxisBox, GrowthProfile, Interval, Landscape, Rate};
pub use spectral::{
    lambda_degradation, lambda_destruction, mu_degradation, mu_destruction, EigenKind,
    EigenOptions, EigenResult, Normalization,
};
