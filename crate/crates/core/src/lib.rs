//! Spatial random graphs with prescribed degrees.
//!
//! Points of a homogeneous Poisson process on a box or torus carry iid
//! numbers of stubs. A pairing scheme joins the stubs into edges using only
//! the geometry, never creating self-loops or multiple edges. [`rsmc`]
//! repeats stable matching level by level with a colouring that rules out
//! repeated pairs; [`sam`] pairs neighbours along a line. [`truncated_scheme`]
//! first attaches high-degree lattice cubes and hands the rest to one of those.
//!
//! Geometry is generic over [`Scalar`] (`f32` or `f64`); the `*F64` and
//! `*F32` aliases fix the coordinate type.

// Negated comparisons are deliberate: NaN must fail validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod coloring;
pub mod degrees;
pub mod error;
pub mod geometry;
pub mod matching;
pub mod pairing;
pub mod scalar;
pub mod stats;
pub mod theory;

pub use degrees::{mark_points, DegreeDistribution, DegreeFamily, Finiteness, MarkedPointSet, Support};
pub use error::{Error, Result};
pub use geometry::{sample_poisson, seeded_rng, Boundary, PointSet, SimDomain, SimRng};
pub use matching::{find_blocking_pair, stable_match, Matching};
pub use pairing::{
    default_truncation, rsmc, sam, truncated_scheme, validate_pairing, Edge, Pairing, Stage,
    ValidationReport,
};
pub use scalar::Scalar;

pub type SimDomainF64 = SimDomain<f64>;
pub type PointSetF64 = PointSet<f64>;
pub type MarkedPointSetF64 = MarkedPointSet<f64>;
pub type LatticeOverlayF64 = pairing::LatticeOverlay<f64>;
pub type PalmStatsF64 = stats::PalmStats<f64>;

pub type SimDomainF32 = SimDomain<f32>;
pub type PointSetF32 = PointSet<f32>;
pub type MarkedPointSetF32 = MarkedPointSet<f32>;
pub type LatticeOverlayF32 = pairing::LatticeOverlay<f32>;
pub type PalmStatsF32 = stats::PalmStats<f32>;
