//! Exact computational analysis of median oscillations.
//!
//! The crate models real-valued step functions on dyadic grids with exact
//! rational arithmetic, computes their upper s-medians and oscillation
//! functionals, builds sparse stopping-time decompositions with certified
//! domination constants, and provides geometric diagnostics for point sets:
//! free-cube inventories, porosity classification, and Muckenhoupt-weight
//! estimators for powers of distance functions.

pub mod constructions;
pub mod cube;
pub mod error;
pub mod median;
pub mod points;
pub mod samples;
pub mod selftest;
pub mod verify;
pub mod porosity;
pub mod sparse;
pub mod rational;
pub mod real;
pub mod step;
pub mod weights;

pub use constructions::{gamma_porosity_demo, gamma_set, good_interval_scan, haar_counterexample, GammaDemoConfig, GammaDemoReport, GammaScanReport};
pub use cube::{dyadic_family, cell_partition, cube_overlap_measure, CellBudget, Cube, DyadicCube};
pub use error::{Error, Result};
pub use median::{
    local_mean_oscillation, median_difference, median_pair, median_seminorm, sigma_oscillations,
    upper_median, MedianParams, OscillationTriple,
};
pub use rational::{fmt_rat, parse_rat, Rat};
pub use points::PointSet;
pub use porosity::{free_cube_inventory, gap_length_scale, porosity_report, vs_volume, FreeCubeInventory, PorosityConfig, PorosityReport, VsValue};
pub use real::Real;
pub use sparse::{build_chain, build_directed_family, build_dyadic_decomposition, build_general_decomposition, carleson_diagnostics, Direction, DominationReport, SparseFamily, SparseMember};
pub use step::{StepFunction, WeightedValueMultiset};
pub use weights::{ap_product, distance_power_integral, mu_exponent_estimate, muckenhoupt_constant, neighborhood_measure, IntegralValue, MuConfig, MuEstimate, PIndex, WeightParams};
