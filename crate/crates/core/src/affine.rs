//! Non-vertical affine k-planes in R^n, stored by their code.
//!
//! A plane is the graph `{(t, a0 + t_1 b^1 + ... + t_k b^k) : t in R^k}` over the
//! first `k` coordinates. `a0` is where it crosses `H_0 = {t = 0}` and
//! `a0 + b^l` is where it crosses `H_l = {t = e_l}`. Vertical planes have no
//! code and cannot be built.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{check_len, Error, Result};

/// Ambient dimension `n` and plane dimension `k`, with `1 <= k < n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Ambient {
    n: usize,
    k: usize,
}

impl Ambient {
    pub fn new(n: usize, k: usize) -> Result<Self> {
        if k >= 1 && k < n {
            Ok(Self { n, k })
        } else {
            Err(Error::InvalidAmbient { n, k })
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// Number of vertical coordinates, `n - k`.
    pub fn codim(&self) -> usize {
        self.n - self.k
    }

    /// Length of a flattened code `(a0, b^1, .., b^k)`.
    pub fn code_len(&self) -> usize {
        (self.k + 1) * self.codim()
    }

    pub(crate) fn ensure_same(&self, other: &Ambient) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(Error::AmbientMismatch {
                n1: self.n,
                k1: self.k,
                n2: other.n,
                k2: other.k,
            })
        }
    }
}

/// Nearest point of a plane to a query point.
#[derive(Debug, Clone, PartialEq)]
pub struct Projection {
    pub foot: Vec<f64>,
    pub distance: f64,
}

/// A k-plane in R^n given by its intercept and slopes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AffinePlane {
    ambient: Ambient,
    intercept: Vec<f64>,
    /// `slopes[l][j]` is coordinate `j` of `b^{l+1}`.
    slopes: Vec<Vec<f64>>,
}

impl AffinePlane {
    /// Builds the plane with graph map `f(t) = a0 + sum_i t_i b^i`.
    pub fn from_code(intercept: Vec<f64>, slopes: Vec<Vec<f64>>, ambient: Ambient) -> Result<Self> {
        let m = ambient.codim();
        check_len("intercept", m, intercept.len())?;
        check_len("slope list", ambient.k(), slopes.len())?;
        for b in &slopes {
            check_len("slope vector", m, b.len())?;
        }
        if intercept.iter().chain(slopes.iter().flatten()).any(|v| !v.is_finite()) {
            return Err(Error::Invalid("code coordinates must be finite".into()));
        }
        Ok(Self {
            ambient,
            intercept,
            slopes,
        })
    }

    /// Builds a plane from its crossings with `H_0, .., H_k`.
    ///
    /// Point `i` must have leading coordinates exactly `e_i` (with `e_0 = 0`).
    pub fn from_intersections(points: &[Vec<f64>], ambient: Ambient) -> Result<Self> {
        let k = ambient.k();
        check_len("intersection point list", k + 1, points.len())?;
        for (i, p) in points.iter().enumerate() {
            check_len("intersection point", ambient.n(), p.len())?;
            for (l, &x) in p[..k].iter().enumerate() {
                let want = if i > 0 && l + 1 == i { 1.0 } else { 0.0 };
                if x != want {
                    return Err(Error::NotOnReferenceSlice {
                        index: i,
                        detail: format!("leading coordinate {l} is {x}, expected {want}"),
                    });
                }
            }
        }
        let a0 = points[0][k..].to_vec();
        let slopes = points[1..]
            .iter()
            .map(|p| p[k..].iter().zip(&a0).map(|(x, a)| x - a).collect())
            .collect();
        Self::from_code(a0, slopes, ambient)
    }

    /// Parses a flattened code record `a0.., b^1.., .., b^k..`.
    pub fn from_flat_code(code: &[f64], ambient: Ambient) -> Result<Self> {
        check_len("flat code", ambient.code_len(), code.len())?;
        let m = ambient.codim();
        let intercept = code[..m].to_vec();
        let slopes = code[m..].chunks(m).map(<[f64]>::to_vec).collect();
        Self::from_code(intercept, slopes, ambient)
    }

    pub fn ambient(&self) -> Ambient {
        self.ambient
    }

    pub fn intercept(&self) -> &[f64] {
        &self.intercept
    }

    pub fn slopes(&self) -> &[Vec<f64>] {
        &self.slopes
    }

    /// The code flattened as `a0, b^1, .., b^k`.
    pub fn flat_code(&self) -> Vec<f64> {
        let mut out = self.intercept.clone();
        for b in &self.slopes {
            out.extend_from_slice(b);
        }
        out
    }

    /// Largest absolute slope entry.
    pub fn max_abs_slope(&self) -> f64 {
        self.slopes
            .iter()
            .flatten()
            .fold(0.0_f64, |acc, v| acc.max(v.abs()))
    }

    /// Writes `f(t)` into `out` (length `n - k`). No length checks.
    #[inline]
    pub(crate) fn graph_into(&self, t: &[f64], out: &mut [f64]) {
        out.copy_from_slice(&self.intercept);
        for (ti, b) in t.iter().zip(&self.slopes) {
            for (o, bj) in out.iter_mut().zip(b) {
                *o += ti * bj;
            }
        }
    }

    /// Returns the point `(t, f(t))`.
    pub fn point_at(&self, t: &[f64]) -> Result<Vec<f64>> {
        check_len("parameter t", self.ambient.k(), t.len())?;
        let k = self.ambient.k();
        let mut p = vec![0.0; self.ambient.n()];
        p[..k].copy_from_slice(t);
        self.graph_into(t, &mut p[k..]);
        Ok(p)
    }

    /// Euclidean nearest point and distance.
    pub fn project(&self, y: &[f64]) -> Result<Projection> {
        check_len("query point", self.ambient.n(), y.len())?;
        let frame = self.frame();
        let mut foot = vec![0.0; y.len()];
        frame.foot_into(y, &mut foot);
        let distance = y
            .iter()
            .zip(&foot)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt();
        Ok(Projection { foot, distance })
    }

    /// Distance from `y` to the plane.
    pub fn distance(&self, y: &[f64]) -> Result<f64> {
        self.project(y).map(|p| p.distance)
    }

    /// `max_j |a0_j - a0'_j|`.
    pub fn intercept_gap(&self, other: &AffinePlane) -> Result<f64> {
        self.ambient.ensure_same(&other.ambient)?;
        Ok(max_abs_diff(&self.intercept, &other.intercept))
    }

    /// `max_{l,j} |b^l_j - b^l_j'|`.
    pub fn slope_gap(&self, other: &AffinePlane) -> Result<f64> {
        self.ambient.ensure_same(&other.ambient)?;
        Ok(self
            .slopes
            .iter()
            .zip(&other.slopes)
            .map(|(b, c)| max_abs_diff(b, c))
            .fold(0.0, f64::max))
    }

    /// Max-norm distance between codes.
    pub fn code_metric(&self, other: &AffinePlane) -> Result<f64> {
        Ok(self.intercept_gap(other)?.max(self.slope_gap(other)?))
    }

    /// Whether the plane crosses every `H_i` inside the window `S = C x Q`.
    pub fn meets_slices_inside(&self, window: &DomainBox) -> bool {
        let inside = |u: &[f64]| u.iter().all(|v| v.abs() <= 0.5);
        if !inside(&self.intercept) {
            return false;
        }
        let mut u = vec![0.0; self.ambient.codim()];
        self.slopes.iter().all(|b| {
            for ((o, a), bj) in u.iter_mut().zip(&self.intercept).zip(b) {
                *o = a + bj;
            }
            inside(&u)
        }) && window.ambient() == self.ambient
    }

    /// Orthonormal frame used by the fast distance routines.
    pub fn frame(&self) -> PlaneFrame {
        PlaneFrame::new(self)
    }
}

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

/// Origin plus an orthonormal basis of the direction space of a plane.
#[derive(Debug, Clone)]
pub struct PlaneFrame {
    n: usize,
    origin: Vec<f64>,
    /// `k` orthonormal vectors stored row-major.
    basis: Vec<f64>,
}

impl PlaneFrame {
    fn new(plane: &AffinePlane) -> Self {
        let n = plane.ambient.n();
        let k = plane.ambient.k();
        let mut origin = vec![0.0; n];
        origin[k..].copy_from_slice(&plane.intercept);
        let mut basis = vec![0.0; k * n];
        for l in 0..k {
            let (done, rest) = basis.split_at_mut(l * n);
            let v = &mut rest[..n];
            v[l] = 1.0;
            v[k..].copy_from_slice(&plane.slopes[l]);
            // Modified Gram-Schmidt, twice for stability.
            for _ in 0..2 {
                for e in done.chunks(n) {
                    let c: f64 = v.iter().zip(e).map(|(a, b)| a * b).sum();
                    for (vi, ei) in v.iter_mut().zip(e) {
                        *vi -= c * ei;
                    }
                }
            }
            let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            for vi in v.iter_mut() {
                *vi /= norm;
            }
        }
        Self { n, origin, basis }
    }

    /// Squared distance from `y` to the plane; `scratch` must have length `n`.
    #[inline]
    pub fn dist2(&self, y: &[f64], scratch: &mut [f64]) -> f64 {
        for ((r, yi), oi) in scratch.iter_mut().zip(y).zip(&self.origin) {
            *r = yi - oi;
        }
        for e in self.basis.chunks_exact(self.n) {
            let c: f64 = scratch.iter().zip(e).map(|(a, b)| a * b).sum();
            for (ri, ei) in scratch.iter_mut().zip(e) {
                *ri -= c * ei;
            }
        }
        scratch.iter().map(|r| r * r).sum()
    }

    fn foot_into(&self, y: &[f64], foot: &mut [f64]) {
        foot.copy_from_slice(&self.origin);
        for e in self.basis.chunks_exact(self.n) {
            let c: f64 = y
                .iter()
                .zip(&self.origin)
                .zip(e)
                .map(|((yi, oi), ei)| (yi - oi) * ei)
                .sum();
            for (fi, ei) in foot.iter_mut().zip(e) {
                *fi += c * ei;
            }
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }
}

/// The window `S = C x Q`: the standard k-simplex in the first `k`
/// coordinates times the unit cube centred at the origin in the rest,
/// together with the margin `delta0` defining the core `S'`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DomainBox {
    ambient: Ambient,
    delta0: f64,
}

impl DomainBox {
    pub fn new(ambient: Ambient, delta0: f64) -> Result<Self> {
        let k = ambient.k() as f64;
        let inradius = (1.0 / (k + k.sqrt())).min(0.5);
        if !(delta0 > 0.0 && delta0 < inradius) {
            return Err(Error::OutOfRange {
                name: "delta0",
                value: delta0,
                constraint: "0 < delta0 < inradius of S",
            });
        }
        Ok(Self { ambient, delta0 })
    }

    pub fn ambient(&self) -> Ambient {
        self.ambient
    }

    pub fn delta0(&self) -> f64 {
        self.delta0
    }

    /// `vol(C) * vol(Q) = 1 / k!`.
    pub fn volume(&self) -> f64 {
        simplex_volume(self.ambient.k())
    }

    /// Closed membership in `S`.
    pub fn contains(&self, y: &[f64]) -> bool {
        let k = self.ambient.k();
        let t = &y[..k];
        t.iter().all(|&v| v >= 0.0)
            && t.iter().sum::<f64>() <= 1.0
            && y[k..].iter().all(|v| v.abs() <= 0.5)
    }

    /// Distance from a point of `S` to the complement of `S`.
    pub fn depth_inside(&self, y: &[f64]) -> f64 {
        let k = self.ambient.k();
        let t = &y[..k];
        let facet = (1.0 - t.iter().sum::<f64>()) / (k as f64).sqrt();
        let simplex = t.iter().copied().fold(facet, f64::min);
        let cube = y[k..].iter().map(|v| 0.5 - v.abs()).fold(f64::INFINITY, f64::min);
        simplex.min(cube)
    }

    /// Membership in the core `S' = {y : dist(y, R^n \ S) > delta0}`, so that
    /// the open `delta0`-neighbourhood of `S'` lies in `S`.
    pub fn in_core(&self, y: &[f64]) -> bool {
        self.contains(y) && self.depth_inside(y) > self.delta0
    }

    /// Axis-aligned bounding box `[0,1]^k x [-1/2,1/2]^(n-k)`.
    pub fn bounds(&self) -> (Vec<f64>, Vec<f64>) {
        let k = self.ambient.k();
        let n = self.ambient.n();
        let lo = (0..n).map(|i| if i < k { 0.0 } else { -0.5 }).collect();
        let hi = (0..n).map(|i| if i < k { 1.0 } else { 0.5 }).collect();
        (lo, hi)
    }

    /// Uniform sample of `S` written into `out` (length `n`).
    #[inline]
    pub fn sample_into<R: Rng + ?Sized>(&self, rng: &mut R, out: &mut [f64]) {
        let k = self.ambient.k();
        sample_simplex(rng, &mut out[..k]);
        for u in &mut out[k..] {
            *u = rng.random::<f64>() - 0.5;
        }
    }
}

/// Uniform point of `{t >= 0, sum t <= 1}` via spacings of sorted uniforms.
#[inline]
pub(crate) fn sample_simplex<R: Rng + ?Sized>(rng: &mut R, t: &mut [f64]) {
    match t.len() {
        0 => {}
        1 => t[0] = rng.random(),
        _ => {
            for v in t.iter_mut() {
                *v = rng.random();
            }
            t.sort_unstable_by(f64::total_cmp);
            for i in (1..t.len()).rev() {
                t[i] -= t[i - 1];
            }
        }
    }
}

pub(crate) fn simplex_volume(k: usize) -> f64 {
    1.0 / (1..=k).map(|i| i as f64).product::<f64>()
}
