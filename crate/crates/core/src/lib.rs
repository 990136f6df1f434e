//! Closed-form hyperball volumes on complex Grassmann manifolds, Haar-uniform
//! Monte Carlo validation, and SINR prediction for massive MU-MIMO downlinks
//! with imperfect channel state information.

// `!(x > 0.0)` style checks are used on purpose so NaN is rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod error;
pub mod grassmann;
pub mod harness;
pub mod mimo;
pub mod numfmt;
pub mod rng;
pub mod special;
pub mod volume;

pub use error::{Error, Result};
pub use grassmann::{
    canonical_angles, distance_p2, distance_pf, sample_uniform, CanonicalAngles, GrassmannPoint,
};
pub use rng::SeededRng;
pub use volume::{volume, Metric, VolumeQuery};

/// Package version with the git description of the build, if any.
pub const VERSION: &str = env!("GRASSMIMO_VERSION");
