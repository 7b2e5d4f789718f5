use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::cantor::{cantor_code_family, levels_for_resolution, CantorSet};
use crate::affine::{AffinePlane, Ambient};
use crate::dimension::PointCloud;
use crate::error::{Error, Result};
use crate::family::WeightedFamily;
use crate::tube::SlopeBound;

/// A dimension-`alpha` self-similar subset of `P ∩ S`, resolved to parameter
/// scale `2^-depth / k`.
///
/// The parameter set is a product in the cube `[0, 1/k]^k` (which lies in
/// `C`): `floor(alpha)` full segment factors gridded at `2^depth + 1`
/// points, one Cantor factor of dimension `alpha - floor(alpha)` (if
/// non-zero) and the remaining coordinates fixed at 0.
pub fn plane_subset_cantor(plane: &AffinePlane, alpha: f64, depth: u32) -> Result<PointCloud> {
    let amb = plane.ambient();
    let k = amb.k();
    if !(alpha > 0.0 && alpha <= k as f64) {
        return Err(Error::OutOfRange {
            name: "alpha",
            value: alpha,
            constraint: "0 < alpha <= k",
        });
    }
    let steps = 1u64 << depth;
    let side = 1.0 / k as f64;
    let m = alpha.floor() as usize;
    let frac = alpha - m as f64;
    let segment: Vec<f64> = (0..=steps).map(|i| side * i as f64 / steps as f64).collect();
    let mut factors: Vec<Vec<f64>> = vec![segment; m];
    if frac > 0.0 {
        let levels = levels_for_resolution(frac, depth);
        factors.push(CantorSet::new(frac, levels, 0.0, side)?.endpoints());
    }
    factors.resize(k, vec![0.0]);
    let params = product(&factors);
    let n = amb.n();
    let mut coords = Vec::with_capacity(params.len() / k * n);
    let mut tail = vec![0.0; amb.codim()];
    for t in params.chunks_exact(k) {
        plane.graph_into(t, &mut tail);
        coords.extend_from_slice(t);
        coords.extend_from_slice(&tail);
    }
    let c = SlopeBound::new(amb, plane.max_abs_slope())?.c;
    PointCloud::from_flat(n, coords, c * side / steps as f64)
}

/// Integer points of `{i >= 0, sum i <= steps}` scaled by `1/steps`, flat.
pub(crate) fn simplex_lattice(k: usize, steps: u64) -> Vec<f64> {
    let mut out = Vec::new();
    let mut idx = vec![0u64; k];
    loop {
        out.extend(idx.iter().map(|&i| i as f64 / steps as f64));
        let mut d = 0;
        loop {
            if d == k {
                return out;
            }
            idx[d] += 1;
            if idx.iter().sum::<u64>() <= steps {
                break;
            }
            idx[d] = 0;
            d += 1;
        }
    }
}

/// Cartesian product of coordinate lists, flat, first factor slowest.
pub(crate) fn product(factors: &[Vec<f64>]) -> Vec<f64> {
    let k = factors.len();
    let mut out = Vec::new();
    let mut idx = vec![0usize; k];
    loop {
        out.extend(idx.iter().zip(factors).map(|(&i, f)| f[i]));
        let mut d = k;
        loop {
            if d == 0 {
                return out;
            }
            d -= 1;
            idx[d] += 1;
            if idx[d] < factors[d].len() {
                break;
            }
            idx[d] = 0;
        }
    }
}

/// Union of [`plane_subset_cantor`] over the family, in plane order. The
/// generation scale is the coarsest of the parts and the family resolution.
pub fn union_cloud(family: &WeightedFamily, alpha: f64, depth: u32) -> Result<PointCloud> {
    let parts = plane_clouds(family, alpha, depth)?;
    let union = PointCloud::union(&parts)?;
    let gen = union.gen_scale().max(family.resolution());
    union.with_gen_scale(gen)
}

/// One [`plane_subset_cantor`] cloud per plane.
pub fn plane_clouds(family: &WeightedFamily, alpha: f64, depth: u32) -> Result<Vec<PointCloud>> {
    family
        .planes()
        .par_iter()
        .map(|p| plane_subset_cantor(p, alpha, depth))
        .collect()
}

/// Parallel `k`-planes inside the `(k+1)`-plane spanned by the first `k + 1`
/// coordinates, intercepts on a dimension-`s` Cantor set.
pub fn sharpness_family(s: f64, k: usize, n: usize, depth: u32) -> Result<WeightedFamily> {
    cantor_code_family(s, 0, depth, Ambient::new(n, k)?)
}

/// Planar lines with slopes on a dimension-`s` Cantor set in `[0, 1]`, each
/// carrying a dimension-`alpha` subset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FurstenbergSet {
    pub family: WeightedFamily,
    pub cloud: PointCloud,
}

/// Offset of the line with the given slope; keeps every line inside `S`.
pub fn furstenberg_offset(slope: f64) -> f64 {
    -0.45 - 0.05 * slope
}

pub fn furstenberg_cloud(alpha: f64, s: f64, depth: u32) -> Result<FurstenbergSet> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::OutOfRange {
            name: "alpha",
            value: alpha,
            constraint: "0 < alpha <= 1",
        });
    }
    let levels = levels_for_resolution(s, depth).max(1);
    let slopes = CantorSet::new(s, levels, 0.0, 1.0)?;
    let amb = Ambient::new(2, 1)?;
    let planes = slopes
        .left_endpoints()
        .into_iter()
        .map(|b| AffinePlane::from_code(vec![furstenberg_offset(b)], vec![vec![b]], amb))
        .collect::<Result<Vec<_>>>()?;
    let family = WeightedFamily::uniform(planes, s, levels, slopes.cell())?;
    let cloud = union_cloud(&family, alpha, depth)?;
    Ok(FurstenbergSet { family, cloud })
}
