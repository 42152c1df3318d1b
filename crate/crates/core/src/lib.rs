//! Explicit Einstein, ambient and Poincaré–Einstein metrics on products of
//! Einstein manifolds, and numerical checks of the identities they satisfy.
//!
//! Curvature comes from truncated Taylor jets ([`kernel::jet`]), so checks
//! run at round-off level rather than finite-difference accuracy.

// index loops mirror the tensor notation they implement
#![allow(clippy::needless_range_loop)]

pub mod catalog;
pub mod constructions;
pub mod error;
pub mod kernel;
pub mod verify;

pub use catalog::{parse_entry, solve_mu, EinsteinSpec, MuSolution};
pub use constructions::{
    ambient_metric, cone_product, metric_cone, multi_subproduct, poincare_metric, special_killing_form, ConeProductSpec, ConeSpec,
    KillingFormSpec, MultiSubProductSpec, PoincareSpec, ProductAmbientSpec,
};
pub use error::{GeometryError, Result};
pub use kernel::chart::{ChartPoint, Domain};
pub use kernel::jet::Jet;
pub use kernel::lie::VectorField;
pub use kernel::patch::MetricPatch;
pub use kernel::sampling::SamplePlan;
pub use kernel::transport::PathSpec;
pub use verify::{CheckReport, Tolerance, ToleranceTier};
