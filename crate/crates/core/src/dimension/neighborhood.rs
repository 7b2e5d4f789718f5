use rayon::prelude::*;
use rustc_hash::FxHashSet;
use serde::{Deserialize, Serialize};

use super::index::{dist2, for_each_offset, CellIndex, CellKey};
use super::{box_count, PointCloud};
use crate::affine::DomainBox;
use crate::error::{Error, Result};

/// Membership oracle for the open `delta`-neighbourhood of a cloud.
pub struct Neighborhood<'a> {
    cloud: &'a PointCloud,
    index: CellIndex,
    delta: f64,
}

impl<'a> Neighborhood<'a> {
    pub fn new(cloud: &'a PointCloud, delta: f64) -> Result<Self> {
        if !(delta > 0.0 && delta.is_finite()) {
            return Err(Error::OutOfRange {
                name: "delta",
                value: delta,
                constraint: "delta > 0",
            });
        }
        let index = CellIndex::new(cloud.dim(), cloud.coords(), delta)?;
        Ok(Self { cloud, index, delta })
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    /// Strict: some cloud point at distance `< delta`.
    pub fn contains(&self, y: &[f64]) -> bool {
        let n = self.cloud.dim();
        let d2 = self.delta * self.delta;
        let coords = self.cloud.coords();
        self.index.any_near(&self.index.key_of(y), 1, |i| {
            let i = i as usize;
            dist2(y, &coords[i * n..(i + 1) * n]) < d2
        })
    }
}

/// Volume of the open `delta`-neighbourhood, measured as the number of
/// lattice cells of side `grid_res` whose centre lies within `delta` of the
/// cloud, times `grid_res^n`.
pub fn neighborhood_volume(cloud: &PointCloud, delta: f64, grid_res: f64) -> Result<f64> {
    let cells = neighborhood_cells(cloud, delta, grid_res, None)?;
    Ok(cells as f64 * grid_res.powi(cloud.dim() as i32))
}

/// As [`neighborhood_volume`], counting only cells whose centre lies in
/// `region`.
pub fn neighborhood_volume_in(cloud: &PointCloud, delta: f64, grid_res: f64, region: &dyn Region) -> Result<f64> {
    if region.dim() != cloud.dim() {
        return Err(Error::DimensionMismatch {
            what: "cloud dimension",
            expected: region.dim(),
            got: cloud.dim(),
        });
    }
    let cells = neighborhood_cells(cloud, delta, grid_res, Some(region))?;
    Ok(cells as f64 * grid_res.powi(cloud.dim() as i32))
}

/// Number of lattice cells (side `grid_res`) whose centre is within `delta`
/// of the cloud, optionally restricted to centres in `window`.
pub fn neighborhood_cells(cloud: &PointCloud, delta: f64, grid_res: f64, region: Option<&dyn Region>) -> Result<u64> {
    check_scales(cloud, delta, grid_res)?;
    let n = cloud.dim();
    let index = CellIndex::new(n, cloud.coords(), delta)?;
    let mut buckets: FxHashSet<CellKey> = FxHashSet::default();
    for key in index.occupied() {
        for_each_offset(n, 1, |off| {
            let mut k = *key;
            for d in 0..n {
                k[d] += off[d];
            }
            buckets.insert(k);
        });
    }
    let buckets: Vec<CellKey> = buckets.into_iter().collect();
    let ctx = Ctx {
        n,
        h: grid_res,
        delta,
        coords: cloud.coords(),
        region,
    };
    Ok(buckets
        .par_iter()
        .map(|b| {
            let mut local = Vec::new();
            index.for_each_near(b, 1, |i| local.push(i));
            if local.is_empty() {
                return 0;
            }
            let mut lo = [0i64; super::index::MAX_INDEX_DIM];
            let mut hi = [0i64; super::index::MAX_INDEX_DIM];
            for d in 0..n {
                lo[d] = first_center_index(b[d], delta, grid_res);
                hi[d] = first_center_index(b[d] + 1, delta, grid_res);
            }
            ctx.count(&lo, &hi, &local)
        })
        .sum())
}

fn check_scales(cloud: &PointCloud, delta: f64, grid_res: f64) -> Result<()> {
    if !(grid_res > 0.0 && grid_res <= delta / 4.0 * (1.0 + 1e-12)) {
        return Err(Error::OutOfRange {
            name: "grid_res",
            value: grid_res,
            constraint: "0 < grid_res <= delta / 4",
        });
    }
    if !(delta >= cloud.gen_scale()) {
        return Err(Error::BelowGenerationScale {
            eps: delta,
            gen_scale: cloud.gen_scale(),
        });
    }
    Ok(())
}

/// Smallest `i` with `(i + 1/2) h >= b delta`.
fn first_center_index(b: i64, delta: f64, h: f64) -> i64 {
    (b as f64 * delta / h - 0.5).ceil() as i64
}

/// How an axis-aligned box meets a region.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Overlap {
    Disjoint,
    Partial,
    Inside,
}

/// A closed convex region that can classify axis-aligned boxes exactly
/// enough for cell counting.
pub trait Region: Sync {
    fn dim(&self) -> usize;
    fn contains(&self, y: &[f64]) -> bool;
    /// `Inside` and `Disjoint` must be exact; `Partial` may be returned
    /// conservatively.
    fn classify(&self, lo: &[f64], hi: &[f64]) -> Overlap;
}

/// Closed axis-aligned box.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AxisBox {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl Region for AxisBox {
    fn dim(&self) -> usize {
        self.lo.len()
    }

    fn contains(&self, y: &[f64]) -> bool {
        y.iter().zip(&self.lo).zip(&self.hi).all(|((v, l), h)| v >= l && v <= h)
    }

    fn classify(&self, lo: &[f64], hi: &[f64]) -> Overlap {
        let mut inside = true;
        for d in 0..self.lo.len() {
            if hi[d] < self.lo[d] || lo[d] > self.hi[d] {
                return Overlap::Disjoint;
            }
            inside &= lo[d] >= self.lo[d] && hi[d] <= self.hi[d];
        }
        if inside {
            Overlap::Inside
        } else {
            Overlap::Partial
        }
    }
}

impl Region for DomainBox {
    fn dim(&self) -> usize {
        self.ambient().n()
    }

    fn contains(&self, y: &[f64]) -> bool {
        DomainBox::contains(self, y)
    }

    fn classify(&self, a: &[f64], b: &[f64]) -> Overlap {
        let k = self.ambient().k();
        let n = a.len();
        if (0..k).any(|d| b[d] < 0.0)
            || (0..k).map(|d| a[d].max(0.0)).sum::<f64>() > 1.0
            || (k..n).any(|d| b[d] < -0.5 || a[d] > 0.5)
        {
            return Overlap::Disjoint;
        }
        let simplex_in = (0..k).all(|d| a[d] >= 0.0) && (0..k).map(|d| b[d]).sum::<f64>() <= 1.0;
        let cube_in = (k..n).all(|d| a[d] >= -0.5 && b[d] <= 0.5);
        if simplex_in && cube_in {
            Overlap::Inside
        } else {
            Overlap::Partial
        }
    }
}

struct Ctx<'a> {
    n: usize,
    h: f64,
    delta: f64,
    coords: &'a [f64],
    region: Option<&'a dyn Region>,
}

type Idx = [i64; super::index::MAX_INDEX_DIM];

impl Ctx<'_> {
    /// Cells with index in `[lo, hi)` whose centre is in the neighbourhood.
    fn count(&self, lo: &Idx, hi: &Idx, cand: &[u32]) -> u64 {
        let n = self.n;
        let h = self.h;
        let mut total = 1u64;
        let mut center = [0.0; super::index::MAX_INDEX_DIM];
        let mut r2 = 0.0;
        let (mut split, mut widest) = (0usize, 0i64);
        for d in 0..n {
            let w = hi[d] - lo[d];
            if w <= 0 {
                return 0;
            }
            total *= w as u64;
            center[d] = ((lo[d] + hi[d] - 1) as f64 * 0.5 + 0.5) * h;
            r2 += ((w - 1) as f64 * 0.5 * h).powi(2);
            if w > widest {
                widest = w;
                split = d;
            }
        }
        let radius = r2.sqrt();
        let region = self.region.map_or(Overlap::Inside, |r| {
            let a: Vec<f64> = (0..n).map(|d| (lo[d] as f64 + 0.5) * h).collect();
            let b: Vec<f64> = (0..n).map(|d| (hi[d] as f64 - 0.5) * h).collect();
            r.classify(&a, &b)
        });
        if region == Overlap::Disjoint {
            return 0;
        }
        let c = &center[..n];
        let reach = (self.delta + radius).powi(2);
        let mut inside = false;
        let mut kept = Vec::with_capacity(cand.len());
        for &i in cand {
            let i = i as usize;
            let d2 = dist2(c, &self.coords[i * n..(i + 1) * n]);
            if d2 < reach {
                kept.push(i as u32);
                if !inside && d2.sqrt() + radius < self.delta {
                    inside = true;
                }
            }
        }
        if kept.is_empty() {
            return 0;
        }
        if total == 1 {
            return u64::from(region == Overlap::Inside);
        }
        if inside && region == Overlap::Inside {
            return total;
        }
        let mid = lo[split] + widest / 2;
        let mut hi_a = *hi;
        hi_a[split] = mid;
        let mut lo_b = *lo;
        lo_b[split] = mid;
        self.count(lo, &hi_a, &kept) + self.count(&lo_b, hi, &kept)
    }
}

/// Covering number versus neighbourhood volume at one scale.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoverCheck {
    /// `N(X, 2 delta) * delta^n`
    pub lhs: f64,
    /// Neighbourhood volume at `delta`.
    pub rhs: f64,
    pub constant: f64,
    pub ok: bool,
}

/// Checks `N(X, 2 delta) delta^n <= 5^n L^n(X_delta)`.
pub fn covering_volume_check(cloud: &PointCloud, delta: f64, grid_res: f64) -> Result<CoverCheck> {
    let n = cloud.dim() as i32;
    let lhs = box_count(cloud, 2.0 * delta)? as f64 * delta.powi(n);
    let rhs = neighborhood_volume(cloud, delta, grid_res)?;
    let constant = 5f64.powi(n);
    Ok(CoverCheck {
        lhs,
        rhs,
        constant,
        ok: lhs <= constant * rhs,
    })
}
