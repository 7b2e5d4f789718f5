//! Affine-subspace coding, tube-intersection bounds, finite-scale dimension
//! estimators and the constructions and harnesses built on them.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

#[cfg(test)]
macro_rules! assert_close {
    ($a:expr, $b:expr, $tol:expr) => {{
        let (a, b, tol): (f64, f64, f64) = ($a, $b, $tol);
        assert!((a - b).abs() <= tol, "{} vs {} (tol {})", a, b, tol);
    }};
}

pub mod affine;
pub mod constructions;
pub mod dimension;
pub mod error;
pub mod family;
pub mod fixtures;
pub mod l2;
pub mod io;
pub mod mc;
pub mod runner;
pub mod tube;

pub use affine::{AffinePlane, Ambient, DomainBox, PlaneFrame, Projection};
pub use dimension::{FitResult, PointCloud, ScaleSeries, SeriesKind};
pub use error::{Error, Result};
pub use family::WeightedFamily;
pub use mc::McEstimate;
pub use tube::{
    derive_slope_bound, gengeo_ratio, in_tube, intersection_volume, intersection_volume_mc, separation_test,
    strip_bound, GengeoEstimate, SamplingDomain, SlopeBound, TubeSpec,
};
