//! Standard families and clouds shared by the experiments, the benches and
//! the acceptance suite.

use serde::{Deserialize, Serialize};

use crate::affine::{Ambient, DomainBox};
use crate::constructions::{plane_clouds, sharpness_family};
use crate::dimension::{AxisBox, PointCloud};
use crate::error::Result;
use crate::family::WeightedFamily;
use crate::l2::{select_scale, CoverSpec, ScaleSelection};

/// Margin of the window used by all fixtures.
pub const DELTA0: f64 = 0.2;
/// Content floor `eps` used for the minimal level `M`.
pub const CONTENT_FLOOR: f64 = 0.1;

/// Parallel `k`-planes in a `(k+1)`-plane, intercepts on a dimension-`s`
/// Cantor set, each carrying a full `k`-dimensional grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SharpnessFixture {
    pub name: &'static str,
    pub k: usize,
    pub n: usize,
    pub s: f64,
    pub family_depth: u32,
    pub cloud_depth: u32,
    /// Dyadic exponents `j` of the scales `delta = 2^-j` used by the L^2 checks.
    pub delta_exponents: [i32; 4],
}

pub const SHARPNESS_FIXTURES: [SharpnessFixture; 3] = [
    SharpnessFixture {
        name: "sharpness-1-2-half",
        k: 1,
        n: 2,
        s: 0.5,
        family_depth: 4,
        cloud_depth: 8,
        delta_exponents: [3, 4, 5, 6],
    },
    SharpnessFixture {
        name: "sharpness-1-3-1",
        k: 1,
        n: 3,
        s: 1.0,
        family_depth: 7,
        cloud_depth: 7,
        delta_exponents: [3, 4, 5, 6],
    },
    SharpnessFixture {
        name: "sharpness-2-3-1",
        k: 2,
        n: 3,
        s: 1.0,
        family_depth: 6,
        cloud_depth: 6,
        delta_exponents: [3, 4, 5, 6],
    },
];

/// Depth-6 dyadic family of horizontal lines in the plane.
pub const DYADIC_LINES: SharpnessFixture = SharpnessFixture {
    name: "dyadic-lines",
    k: 1,
    n: 2,
    s: 1.0,
    family_depth: 6,
    cloud_depth: 6,
    delta_exponents: [3, 4, 5, 6],
};

/// A built fixture.
#[derive(Debug, Clone)]
pub struct FixtureData {
    pub family: WeightedFamily,
    pub clouds: Vec<PointCloud>,
    pub union: PointCloud,
    pub window: DomainBox,
    /// The part of the window over the parameter cube `[0, 1/k]^k` that
    /// carries the plane subsets.
    pub region: AxisBox,
}

impl SharpnessFixture {
    pub fn alpha(&self) -> f64 {
        self.k as f64
    }

    pub fn deltas(&self) -> Vec<f64> {
        self.delta_exponents.iter().map(|&j| 0.5f64.powi(j)).collect()
    }

    pub fn build(&self) -> Result<FixtureData> {
        FixtureData::sharpness(self.k, self.n, self.s, self.alpha(), self.family_depth, self.cloud_depth)
    }
}

impl FixtureData {
    /// Sharpness family with `alpha`-dimensional subsets on every plane.
    pub fn sharpness(k: usize, n: usize, s: f64, alpha: f64, family_depth: u32, cloud_depth: u32) -> Result<Self> {
        let family = sharpness_family(s, k, n, family_depth)?;
        let clouds = plane_clouds(&family, alpha, cloud_depth)?;
        let union = PointCloud::union(&clouds)?;
        let union = union.clone().with_gen_scale(union.gen_scale().max(family.resolution()))?;
        let window = DomainBox::new(Ambient::new(n, k)?, DELTA0)?;
        let side = 1.0 / k as f64;
        let region = AxisBox {
            lo: (0..n).map(|d| if d < k { 0.0 } else { -0.5 }).collect(),
            hi: (0..n).map(|d| if d < k { side } else { 0.5 }).collect(),
        };
        Ok(Self {
            family,
            clouds,
            union,
            window,
            region,
        })
    }

    /// Scale selection for the cover of the union by grid balls at level `M`.
    pub fn select_scale(&self) -> Result<ScaleSelection> {
        let m = crate::l2::minimal_level(CONTENT_FLOOR, DELTA0)?;
        let cover = CoverSpec::grid(&self.union, m, CONTENT_FLOOR, DELTA0)?;
        let alpha = self.clouds[0].dim().min(self.family.ambient().k()) as f64;
        select_scale(&cover, &self.family, &self.clouds, alpha, CONTENT_FLOOR)
    }
}
