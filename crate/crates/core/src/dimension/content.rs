use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::ops::RangeInclusive;

use rustc_hash::FxHashMap;

use super::index::{dist2, CellIndex, CellKey};
use super::PointCloud;
use crate::error::{Error, Result};

/// Dyadic levels `j` (radius `2^-j`) from a radius covering the whole cloud
/// down to half the generation scale.
pub fn default_content_levels(cloud: &PointCloud) -> RangeInclusive<i32> {
    let top = -(cloud.diameter().log2().ceil().max(0.0) as i32);
    let bottom = (2.0 / cloud.gen_scale()).log2().floor() as i32;
    top..=bottom.max(top)
}

/// Greedy upper estimate of the `alpha`-dimensional Hausdorff content.
///
/// Candidate sets are open balls `|x - c| < 2^-j` centred at cloud points,
/// for `j` in `levels`. The greedy repeatedly takes the candidate with the
/// most uncovered points per unit cost `(2r)^alpha` and returns the total
/// cost of the resulting cover.
pub fn hausdorff_content(cloud: &PointCloud, alpha: f64, levels: RangeInclusive<i32>) -> Result<f64> {
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(Error::OutOfRange {
            name: "alpha",
            value: alpha,
            constraint: "alpha > 0",
        });
    }
    if levels.is_empty() {
        return Err(Error::Empty("content level range"));
    }
    let cloud = cloud.dedup();
    let n = cloud.dim();
    let coords = cloud.coords();
    let npts = cloud.len();

    let radii: Vec<f64> = levels.clone().map(|j| 0.5f64.powi(j)).collect();
    let indexes = radii
        .iter()
        .map(|&r| CellIndex::new(n, coords, r))
        .collect::<Result<Vec<_>>>()?;
    let cost: Vec<f64> = radii.iter().map(|r| (2.0 * r).powf(alpha)).collect();

    let mut covered = vec![false; npts];
    let gain = |lvl: usize, c: usize, covered: &[bool]| -> usize {
        let r2 = radii[lvl] * radii[lvl];
        let p = &coords[c * n..(c + 1) * n];
        let mut g = 0;
        indexes[lvl].for_each_near(&indexes[lvl].key_of(p), 1, |i| {
            let i = i as usize;
            if !covered[i] && dist2(p, &coords[i * n..(i + 1) * n]) < r2 {
                g += 1;
            }
        });
        g
    };

    // Initial scores are bucket-count upper bounds; the lazy loop below
    // refreshes a candidate before accepting it.
    let mut heap = BinaryHeap::with_capacity(npts * radii.len());
    for (lvl, idx) in indexes.iter().enumerate() {
        let mut bound: FxHashMap<CellKey, usize> = FxHashMap::default();
        for c in 0..npts {
            let key = idx.key_of(&coords[c * n..(c + 1) * n]);
            let g = *bound.entry(key).or_insert_with(|| idx.count_near(&key, 1));
            heap.push(Candidate {
                score: g as f64 / cost[lvl],
                lvl,
                center: c,
            });
        }
    }

    let mut remaining = npts;
    let mut total = 0.0;
    while remaining > 0 {
        let Some(top) = heap.pop() else { break };
        let g = gain(top.lvl, top.center, &covered);
        if g == 0 {
            continue;
        }
        let score = g as f64 / cost[top.lvl];
        let fresh = Candidate { score, ..top };
        if heap.peek().is_some_and(|next| next > &fresh) {
            heap.push(fresh);
            continue;
        }
        let r2 = radii[top.lvl] * radii[top.lvl];
        let p = &coords[top.center * n..(top.center + 1) * n];
        let idx = &indexes[top.lvl];
        idx.for_each_near(&idx.key_of(p), 1, |i| {
            let i = i as usize;
            if !covered[i] && dist2(p, &coords[i * n..(i + 1) * n]) < r2 {
                covered[i] = true;
                remaining -= 1;
            }
        });
        total += cost[top.lvl];
    }
    Ok(total)
}

#[derive(Debug, Clone, Copy)]
struct Candidate {
    score: f64,
    lvl: usize,
    center: usize,
}

impl PartialEq for Candidate {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Candidate {}

impl PartialOrd for Candidate {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Candidate {
    fn cmp(&self, other: &Self) -> Ordering {
        self.score
            .total_cmp(&other.score)
            .then(other.lvl.cmp(&self.lvl))
            .then(other.center.cmp(&self.center))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn segment() -> PointCloud {
        let pts: Vec<Vec<f64>> = (0..=1024).map(|i| vec![i as f64 / 1024.0, 0.0]).collect();
        PointCloud::new(2, &pts, 1.0 / 1024.0).unwrap()
    }

    #[test]
    fn segment_content_near_length() {
        let c = segment();
        let h = hausdorff_content(&c, 1.0, default_content_levels(&c)).unwrap();
        assert!((1.0..=1.3).contains(&h), "{h}");
    }

    #[test]
    fn single_point_vanishes() {
        let c = PointCloud::new(2, &[vec![0.2, 0.7]], 1e-3).unwrap();
        let h = hausdorff_content(&c, 0.5, 0..=20).unwrap();
        assert_close!(h, (2.0 * 0.5f64.powi(20)).sqrt(), 1e-15);
    }

    #[test]
    fn rejects_bad_alpha() {
        let c = segment();
        assert!(hausdorff_content(&c, 0.0, 0..=3).is_err());
        assert!(hausdorff_content(&c, -1.0, 0..=3).is_err());
    }

    #[test]
    fn default_levels() {
        let c = segment();
        assert_eq!(default_content_levels(&c), 0..=11);
        let big = c.scaled(6.0).unwrap();
        assert_eq!(*default_content_levels(&big).start(), -3);
    }
}
