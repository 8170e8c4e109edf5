//! Diagonal sections, copula families, and the construction of ordered joint
//! laws from symmetric copulas evaluated at the mixture cdf `G`.

mod construct;
mod diagonal;
mod families;

pub use construct::{
    diagonal_from_marginals, extend_diagonal, marginals_from_diagonal, ordered_joint_cdf,
    DiagonalCompanion, OrderedJointLaw, PartialDiagonal, RangeGap, COMPATIBILITY_GRID,
};
pub use diagonal::{
    validate_diagonal, ArchimedeanGenerator, DiagonalKind, DiagonalProperty, DiagonalReport,
    DiagonalSection, DiagonalViolation, Gumbel,
};
pub use families::{archimedean_copula, archimedean_diagonal, bertino, Copula, CopulaFamily};
