//! Explicit extremal K-quasiconformal maps on self-similar Cantor sets.
//!
//! The crate builds a packing of `m` equal disks in the unit disk, derives the
//! source and image Cantor constructions for a target dimension `t` and
//! distortion `K`, evaluates the limit map `φ` (and its inverse and Jacobian)
//! exactly by self-similar descent, and provides the numerical harness used to
//! check dimension distortion, Hölder regularity, Jacobian integrability and
//! the Cauchy-transform nonremovability witness.

pub mod error;
pub mod geometry;
pub mod glue;
pub mod map;
pub mod mass;
pub mod nonremovable;
pub mod rng;
pub mod stats;
pub mod verify;

#[cfg(feature = "oracle")]
pub mod oracle;

pub use error::{Error, Result};
pub use geometry::{
    build_packing, derive_params, generation_centers, generation_disks, hex_params, image_map, locate,
    source_map, ConstructionParams, Disk, DiskPacking, Location, MultiIndex, Side, Similarity,
};
pub use map::{jacobian, phi, phi_inverse, phi_stage, MapResult};
pub use mass::{lp_mass_closed_form, lp_mass_monte_carlo, LpMassReport, MonteCarloEstimate, Sampling};
pub use nonremovable::{build_counterexample, cauchy_transform, frostman_measure, verify_counterexample, DiscreteMeasure};
pub use verify::{box_dimension, holder_estimate, integral_growth_check, packing_condition_check, HolderConfig, PhiMap};

pub type Complex = num_complex::Complex64;
