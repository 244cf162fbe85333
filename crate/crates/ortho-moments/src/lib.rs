//! Numerically stable orthogonal image moments and texture descriptors.
//!
//! The toolkit evaluates Legendre, second-kind Chebyshev and discrete
//! Chebyshev orthonormal bases through their three-term recurrences,
//! computes image moments (Simpson product rule for the continuous
//! families, exact matrix products for the discrete one), reconstructs
//! images from moments, extracts moments-from-GLCM texture features and
//! evaluates them with a seeded 1-NN rotation protocol. An
//! explicit-expansion Legendre evaluator with constant quadrature weights
//! is kept as the deliberately unstable baseline the benchmarks compare
//! against.
//!
//! All values are immutable after construction and all pipelines are
//! deterministic given their seeds; anything parallel runs over
//! independently seeded work items, so outputs never depend on thread
//! count.

pub mod bench;
pub mod classify;
pub mod error;
pub mod glcm;
pub mod imageio;
pub mod moments;
pub mod orthopoly;
pub mod quadrature;
mod seeding;

pub use error::{Error, Result};
