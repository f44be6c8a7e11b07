//! Riemannian spaces, submanifold patches and their curvature data.

pub mod chart;
pub mod linalg;
pub mod patch;
pub mod space;

pub use chart::{ChartMetric, Christoffel, FiniteDifference, MetricFn};
pub use patch::{complex_i, hopf_rotate, quaternion_j, NormalVector, SubmanifoldPatch};
pub use space::{RiemannianSpace, SpaceKind};
