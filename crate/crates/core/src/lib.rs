//! Focal points, Morse indices and index splitting for submanifolds of
//! Riemannian manifolds and singular Riemannian foliations.
//!
//! Geometry, integration, geodesics and Jacobi fields are generic over the
//! scalar type (see [`scalar::Real`]); everything from focal detection on is
//! `f64`. The aliases below fix the scalar for the common case.

pub mod error;
pub mod focal;
pub mod foliation;
pub mod geodesic;
pub mod geometry;
pub mod harness;
pub mod io;
pub mod jacobi;
pub mod linking;
pub mod ode;
pub mod scalar;
pub mod transversal;

pub use error::{Error, Result};

pub type Space = geometry::RiemannianSpace<f64>;
pub type Patch = geometry::SubmanifoldPatch<f64>;
pub type Normal = geometry::NormalVector<f64>;
pub type Geodesic = geodesic::GeodesicTrace<f64>;
pub type JacobiBasis = jacobi::JacobiBasisTrace<f64>;
