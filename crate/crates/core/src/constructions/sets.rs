use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::affine::AffinePlane;
use crate::dimension::{FitWindow, PointCloud};
use crate::error::{Error, Result};
use crate::mc::rng_for;

const ROTATION_STREAM: u64 = 0x5eed_0001;

/// What the distance is measured from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum DistanceBase {
    Point(Vec<f64>),
    Plane(AffinePlane),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistanceFamilySpec {
    pub base: DistanceBase,
    pub r: f64,
    /// Parameter grid step `2^-depth`; circles get `4 * 2^depth` points.
    pub depth: u32,
}

/// Points at distance exactly `r` from the base: the parameter lattice of
/// the plane over `C` times a grid on the radius-`r` sphere of the normal
/// space.
pub fn distance_r_set(spec: &DistanceFamilySpec) -> Result<PointCloud> {
    if !(spec.r > 0.0 && spec.r.is_finite()) {
        return Err(Error::OutOfRange {
            name: "r",
            value: spec.r,
            constraint: "r > 0",
        });
    }
    let steps = 1u64 << spec.depth;
    match &spec.base {
        DistanceBase::Point(x) => {
            let (sphere, gen) = sphere_grid(x.len(), spec.r, spec.depth)?;
            let n = x.len();
            let coords = sphere
                .chunks_exact(n)
                .flat_map(|u| u.iter().zip(x).map(|(a, b)| a + b))
                .collect();
            PointCloud::from_flat(n, coords, gen)
        }
        DistanceBase::Plane(p) => {
            let amb = p.ambient();
            let (n, k) = (amb.n(), amb.k());
            let (dirs, normals) = plane_frame(p);
            let (sphere, sgen) = sphere_grid(n - k, spec.r, spec.depth)?;
            let origin = p.point_at(&vec![0.0; k])?;
            let params = super::subsets::simplex_lattice(k, steps);
            let mut coords = Vec::with_capacity(params.len() / k * sphere.len() / (n - k) * n);
            for t in params.chunks_exact(k) {
                let mut base = origin.clone();
                for (l, tl) in t.iter().enumerate() {
                    // directions are stored unnormalised: (e_l, b^l)
                    for (bi, di) in base.iter_mut().zip(&dirs[l]) {
                        *bi += tl * di;
                    }
                }
                for u in sphere.chunks_exact(n - k) {
                    let mut y = base.clone();
                    for (ui, nv) in u.iter().zip(&normals) {
                        for (yi, ni) in y.iter_mut().zip(nv) {
                            *yi += ui * ni;
                        }
                    }
                    coords.extend_from_slice(&y);
                }
            }
            let c = crate::tube::SlopeBound::new(amb, p.max_abs_slope())?.c;
            // two antipodal points carry no resolution of their own
            let gen = if n - k == 1 { c / steps as f64 } else { sgen.max(c / steps as f64) };
            PointCloud::from_flat(n, coords, gen)
        }
    }
}

/// Unnormalised direction vectors `(e_l, b^l)` and an orthonormal basis of
/// the orthogonal complement.
fn plane_frame(p: &AffinePlane) -> (Vec<Vec<f64>>, Vec<Vec<f64>>) {
    let amb = p.ambient();
    let (n, k) = (amb.n(), amb.k());
    let dirs: Vec<Vec<f64>> = (0..k)
        .map(|l| {
            let mut v = vec![0.0; n];
            v[l] = 1.0;
            v[k..].copy_from_slice(&p.slopes()[l]);
            v
        })
        .collect();
    let mut ortho: Vec<Vec<f64>> = Vec::new();
    let candidates = dirs.iter().cloned().chain((0..n).map(|i| {
        let mut e = vec![0.0; n];
        e[i] = 1.0;
        e
    }));
    for mut v in candidates {
        for _ in 0..2 {
            for e in &ortho {
                let c: f64 = v.iter().zip(e).map(|(a, b)| a * b).sum();
                for (vi, ei) in v.iter_mut().zip(e) {
                    *vi -= c * ei;
                }
            }
        }
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-8 && ortho.len() < n {
            ortho.push(v.into_iter().map(|x| x / norm).collect());
        }
    }
    let normals = ortho.split_off(k);
    (dirs, normals)
}

/// Grid on the radius-`r` sphere in `R^m` and its spacing.
fn sphere_grid(m: usize, r: f64, depth: u32) -> Result<(Vec<f64>, f64)> {
    match m {
        0 => Err(Error::Invalid("distance set needs codimension >= 1".into())),
        1 => Ok((vec![-r, r], 2.0 * r)),
        2 => {
            let count = 4usize << depth;
            let step = std::f64::consts::TAU / count as f64;
            let pts = (0..count)
                .flat_map(|i| {
                    let th = step * i as f64;
                    [r * th.cos(), r * th.sin()]
                })
                .collect();
            Ok((pts, r * step))
        }
        _ => {
            let steps = 1i64 << depth;
            let mut pts = Vec::new();
            let mut idx = vec![-steps; m];
            loop {
                if idx.iter().any(|i| i.abs() == steps) {
                    let v: Vec<f64> = idx.iter().map(|&i| i as f64 / steps as f64).collect();
                    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
                    pts.extend(v.iter().map(|x| r * x / norm));
                }
                let mut d = 0;
                loop {
                    if d == m {
                        return Ok((pts, 2.0 * r / steps as f64));
                    }
                    if idx[d] < steps {
                        idx[d] += 1;
                        break;
                    }
                    idx[d] = -steps;
                    d += 1;
                }
            }
        }
    }
}

/// Rotation matrix (row-major) from a Gaussian frame orthonormalised by
/// Gram-Schmidt.
pub fn seeded_rotation(n: usize, seed: u64, index: u64) -> Vec<f64> {
    let mut rng = rng_for(seed, ROTATION_STREAM, index);
    let mut rows: Vec<Vec<f64>> = Vec::with_capacity(n);
    while rows.len() < n {
        let mut v: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
        for _ in 0..2 {
            for e in &rows {
                let c: f64 = v.iter().zip(e).map(|(a, b)| a * b).sum();
                for (vi, ei) in v.iter_mut().zip(e) {
                    *vi -= c * ei;
                }
            }
        }
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-6 {
            rows.push(v.into_iter().map(|x| x / norm).collect());
        }
    }
    rows.concat()
}

/// Points of the `k`-skeleton of `[-1/2, 1/2]^n`, each `k`-face gridded at
/// step `2^-depth`. Shared edges appear once per face.
pub fn cube_skeleton(k: usize, n: usize, depth: u32) -> Result<Vec<f64>> {
    if k >= n {
        return Err(Error::InvalidAmbient { n, k });
    }
    let steps = 1u64 << depth;
    let grid: Vec<f64> = (0..=steps).map(|i| i as f64 / steps as f64 - 0.5).collect();
    let mut out = Vec::new();
    for free in 0u32..(1 << n) {
        if free.count_ones() as usize != k {
            continue;
        }
        let fixed: Vec<usize> = (0..n).filter(|d| free & (1 << d) == 0).collect();
        let moving: Vec<usize> = (0..n).filter(|d| free & (1 << d) != 0).collect();
        for signs in 0u32..(1 << fixed.len()) {
            let mut idx = vec![0usize; k];
            loop {
                let mut p = vec![0.0; n];
                for (b, &d) in fixed.iter().enumerate() {
                    p[d] = if signs & (1 << b) != 0 { 0.5 } else { -0.5 };
                }
                for (i, &d) in moving.iter().enumerate() {
                    p[d] = grid[idx[i]];
                }
                out.extend_from_slice(&p);
                let mut j = 0;
                loop {
                    if j == k {
                        break;
                    }
                    idx[j] += 1;
                    if idx[j] < grid.len() {
                        break;
                    }
                    idx[j] = 0;
                    j += 1;
                }
                if j == k {
                    break;
                }
            }
        }
    }
    Ok(out)
}

/// Union over the centres of a rotated copy of the cube's `k`-skeleton;
/// centre `i` uses rotation `seeded_rotation(n, rotation_seed, i)`.
pub fn skeleton_union_cloud(
    k: usize,
    n: usize,
    centers: &PointCloud,
    rotation_seed: u64,
    depth: u32,
) -> Result<PointCloud> {
    if centers.dim() != n {
        return Err(Error::DimensionMismatch {
            what: "centre dimension",
            expected: n,
            got: centers.dim(),
        });
    }
    let skel = cube_skeleton(k, n, depth)?;
    let parts: Vec<Vec<f64>> = centers
        .coords()
        .par_chunks_exact(n)
        .enumerate()
        .map(|(i, c)| {
            let rot = seeded_rotation(n, rotation_seed, i as u64);
            let mut out = Vec::with_capacity(skel.len());
            for x in skel.chunks_exact(n) {
                for (row, ci) in rot.chunks_exact(n).zip(c) {
                    out.push(ci + row.iter().zip(x).map(|(a, b)| a * b).sum::<f64>());
                }
            }
            out
        })
        .collect();
    PointCloud::from_flat(n, parts.concat(), 1.0 / (1u64 << depth) as f64)
}

/// Centres on the lattice `{0, 1/m, .., (m-1)/m}^n`.
pub fn lattice_centers(n: usize, m: usize) -> Result<PointCloud> {
    let axis: Vec<f64> = (0..m).map(|i| i as f64 / m as f64).collect();
    let coords = super::subsets::product(&vec![axis; n]);
    PointCloud::from_flat(n, coords, 1.0 / m.max(1) as f64)
}

/// Finite model of `R^(k+1) x Q^(n-k-1)`: the lattice `2^-grid_depth Z`
/// on `[0,1]^(k+1)` times rationals in `[0, 1)` with denominator at most
/// `2^depth` in each remaining coordinate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Counterexample {
    pub cloud: PointCloud,
    /// Smallest gap between distinct rationals used.
    pub min_gap: f64,
}

impl Counterexample {
    /// Scales at which the rational factor looks like isolated points and
    /// the lattice factor is resolved.
    pub fn fit_window(&self) -> FitWindow {
        FitWindow::new(0.5 * self.min_gap, 4.0 * self.cloud.gen_scale())
    }
}

pub fn scaled_axis_parallel_counterexample(n: usize, k: usize, depth: u32, grid_depth: u32) -> Result<Counterexample> {
    if !(k >= 1 && n > k + 1) {
        return Err(Error::Invalid(format!("need n > k + 1 and k >= 1, got n={n}, k={k}")));
    }
    let rationals = farey(1u64 << depth);
    let min_gap = rationals.windows(2).map(|w| w[1] - w[0]).fold(1.0, f64::min);
    let steps = 1u64 << grid_depth;
    let axis: Vec<f64> = (0..=steps).map(|i| i as f64 / steps as f64).collect();
    let mut factors = vec![axis; k + 1];
    factors.extend(std::iter::repeat(rationals).take(n - k - 1));
    let coords = super::subsets::product(&factors);
    Ok(Counterexample {
        cloud: PointCloud::from_flat(n, coords, 1.0 / steps as f64)?,
        min_gap,
    })
}

/// Distinct fractions `p/q` in `[0, 1)` with `q <= max_den`, increasing.
pub fn farey(max_den: u64) -> Vec<f64> {
    let mut fr: Vec<(u64, u64)> = Vec::new();
    for q in 1..=max_den {
        for p in 0..q {
            if gcd(p, q) == 1 {
                fr.push((p, q));
            }
        }
    }
    fr.sort_by(|a, b| (a.0 * b.1).cmp(&(b.0 * a.1)));
    fr.into_iter().map(|(p, q)| p as f64 / q as f64).collect()
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::affine::Ambient;

    #[test]
    fn coarse_ring() {
        let spec = DistanceFamilySpec {
            base: DistanceBase::Point(vec![0.0, 0.0]),
            r: 1.0,
            depth: 1,
        };
        let c = distance_r_set(&spec).unwrap();
        assert_eq!(c.len(), 8);
        assert!(c.points().all(|p| (p[0].hypot(p[1]) - 1.0).abs() < 1e-12));
    }

    #[test]
    fn cylinder_points_at_distance() {
        let p = AffinePlane::from_code(vec![0.1, -0.2], vec![vec![0.3, 0.4]], Ambient::new(3, 1).unwrap()).unwrap();
        let spec = DistanceFamilySpec {
            base: DistanceBase::Plane(p.clone()),
            r: 0.5,
            depth: 3,
        };
        let c = distance_r_set(&spec).unwrap();
        assert_eq!(c.len(), 9 * 32);
        for y in c.points() {
            assert_close!(p.distance(y).unwrap(), 0.5, 1e-12);
        }
        let bad = DistanceFamilySpec { r: 0.0, ..spec };
        assert!(distance_r_set(&bad).is_err());
    }

    #[test]
    fn sphere_in_three_dimensions() {
        let spec = DistanceFamilySpec {
            base: DistanceBase::Point(vec![1.0, 2.0, 3.0]),
            r: 0.25,
            depth: 2,
        };
        let c = distance_r_set(&spec).unwrap();
        assert_eq!(c.len(), 9usize.pow(3) - 7usize.pow(3));
        for y in c.points() {
            let d = ((y[0] - 1.0).powi(2) + (y[1] - 2.0).powi(2) + (y[2] - 3.0).powi(2)).sqrt();
            assert_close!(d, 0.25, 1e-12);
        }
    }

    #[test]
    fn rotations_are_orthogonal_and_seeded() {
        let r = seeded_rotation(3, 7, 2);
        for i in 0..3 {
            for j in 0..3 {
                let d: f64 = (0..3).map(|l| r[i * 3 + l] * r[j * 3 + l]).sum();
                assert_close!(d, if i == j { 1.0 } else { 0.0 }, 1e-12);
            }
        }
        assert_eq!(r, seeded_rotation(3, 7, 2));
        assert_ne!(r, seeded_rotation(3, 7, 3));
    }

    #[test]
    fn skeleton_counts() {
        assert_eq!(cube_skeleton(0, 3, 4).unwrap().len() / 3, 8);
        assert_eq!(cube_skeleton(1, 2, 2).unwrap().len() / 2, 4 * 5);
        let centers = PointCloud::new(3, &[vec![0.0; 3]], 1.0).unwrap();
        let c = skeleton_union_cloud(0, 3, &centers, 1, 3).unwrap();
        assert_eq!(c.len(), 8);
        for y in c.points() {
            assert_close!(y.iter().map(|x| x * x).sum::<f64>(), 0.75, 1e-12);
        }
        assert!(cube_skeleton(2, 2, 1).is_err());
    }

    #[test]
    fn counterexample_shapes() {
        let c = scaled_axis_parallel_counterexample(3, 1, 0, 2).unwrap();
        assert_eq!(c.cloud.len(), 25);
        assert!(c.cloud.points().all(|p| p[2] == 0.0));
        assert!(scaled_axis_parallel_counterexample(2, 1, 2, 2).is_err());
        assert_eq!(farey(4).len(), 6);
        assert_close!(scaled_axis_parallel_counterexample(3, 1, 2, 2).unwrap().min_gap, 1.0 / 12.0, 1e-15);
    }
}
