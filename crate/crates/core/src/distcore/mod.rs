//! One-dimensional distribution machinery: cdfs and their generalized
//! inverses, validated ordered pairs with the mixture cdf `G` and the gap
//! function `H = F2 - F1`, unimodality analysis of `H`, and bivariate cdfs.

mod cdf;
mod joint;
mod pair;

pub use cdf::{Cdf, Steps, UnivariateCdf, TAIL_EPS};
pub use joint::{rectangle_mass, JointCdf};
pub use pair::{make_ordered_pair, unimodal_profile, OrderedMarginalPair, UnimodalProfile, DOMINANCE_GRID};
