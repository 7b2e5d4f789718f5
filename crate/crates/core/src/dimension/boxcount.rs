use rayon::prelude::*;

use super::{PointCloud, ScaleSeries, SeriesKind};
use crate::error::{Error, Result};

/// Number of occupied cubes of side `eps` in the origin-anchored lattice.
///
/// Cubes are half-open, except that a point sitting on the cloud's upper
/// extreme along an axis, exactly on a lattice hyperplane, is counted in the
/// cube below it (so `[0, 1]` at `eps = 1/16` occupies 16 cells, not 17).
pub fn box_count(cloud: &PointCloud, eps: f64) -> Result<usize> {
    if !(eps >= cloud.gen_scale()) {
        return Err(Error::BelowGenerationScale {
            eps,
            gen_scale: cloud.gen_scale(),
        });
    }
    let keys = CellKeys::new(cloud, eps)?;
    let mut cells: Vec<u128> = cloud.coords().par_chunks_exact(cloud.dim()).map(|p| keys.key(p)).collect();
    cells.par_sort_unstable();
    cells.dedup();
    Ok(cells.len())
}

/// Box counts at each scale, in the given (strictly decreasing) order.
pub fn box_count_series(cloud: &PointCloud, scales: &[f64]) -> Result<ScaleSeries> {
    let entries = scales
        .iter()
        .map(|&e| Ok((e, box_count(cloud, e)? as f64)))
        .collect::<Result<Vec<_>>>()?;
    ScaleSeries::new(entries, SeriesKind::BoxCount)
}

struct CellKeys {
    eps: f64,
    lo_idx: Vec<i64>,
    lo: Vec<f64>,
    hi: Vec<f64>,
    bits: u32,
}

impl CellKeys {
    fn new(cloud: &PointCloud, eps: f64) -> Result<Self> {
        let n = cloud.dim();
        let bits = (128 / n as u32).min(63);
        let (lo, hi) = cloud.bounds();
        let mut lo_idx = Vec::with_capacity(n);
        for (l, h) in lo.iter().zip(&hi) {
            let a = (l / eps).floor();
            let b = (h / eps).floor();
            if !(b - a < (1u64 << bits) as f64) || a.abs() > 9e15 {
                return Err(Error::CellOverflow(eps));
            }
            lo_idx.push(a as i64);
        }
        Ok(Self {
            eps,
            lo_idx,
            lo,
            hi,
            bits,
        })
    }

    #[inline]
    fn key(&self, p: &[f64]) -> u128 {
        let mut key = 0u128;
        for (d, &x) in p.iter().enumerate() {
            let q = x / self.eps;
            let mut f = q.floor();
            if f == q && x == self.hi[d] && x > self.lo[d] {
                f -= 1.0;
            }
            let rel = (f as i64 - self.lo_idx[d]).max(0) as u128;
            key = (key << self.bits) | rel;
        }
        key
    }
}
