use serde::{Deserialize, Serialize};

use crate::error::{check_len, Error, Result};

/// Finite point set in `R^n` with the scale down to which it represents
/// its ideal set. Points are stored flat, row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointCloud {
    n: usize,
    coords: Vec<f64>,
    gen_scale: f64,
}

impl PointCloud {
    pub fn new(n: usize, points: &[Vec<f64>], gen_scale: f64) -> Result<Self> {
        let mut coords = Vec::with_capacity(points.len() * n);
        for p in points {
            check_len("point", n, p.len())?;
            coords.extend_from_slice(p);
        }
        Self::from_flat(n, coords, gen_scale)
    }

    pub fn from_flat(n: usize, coords: Vec<f64>, gen_scale: f64) -> Result<Self> {
        if n == 0 {
            return Err(Error::Invalid("point dimension must be positive".into()));
        }
        if coords.is_empty() {
            return Err(Error::Empty("point cloud"));
        }
        if coords.len() % n != 0 {
            return Err(Error::DimensionMismatch {
                what: "flat coordinates",
                expected: coords.len().next_multiple_of(n),
                got: coords.len(),
            });
        }
        if !(gen_scale > 0.0 && gen_scale.is_finite()) {
            return Err(Error::OutOfRange {
                name: "gen_scale",
                value: gen_scale,
                constraint: "gen_scale > 0",
            });
        }
        if coords.iter().any(|x| !x.is_finite()) {
            return Err(Error::Invalid("non-finite coordinate".into()));
        }
        Ok(Self { n, coords, gen_scale })
    }

    /// Concatenation; the generation scale is the coarsest of the parts.
    pub fn union<'a>(clouds: impl IntoIterator<Item = &'a PointCloud>) -> Result<Self> {
        let mut it = clouds.into_iter();
        let first = it.next().ok_or(Error::Empty("cloud list"))?;
        let mut out = first.clone();
        for c in it {
            check_len("cloud dimension", out.n, c.n)?;
            out.coords.extend_from_slice(&c.coords);
            out.gen_scale = out.gen_scale.max(c.gen_scale);
        }
        Ok(out)
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.coords.len() / self.n
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn gen_scale(&self) -> f64 {
        self.gen_scale
    }

    pub fn with_gen_scale(mut self, gen_scale: f64) -> Result<Self> {
        if !(gen_scale > 0.0 && gen_scale.is_finite()) {
            return Err(Error::OutOfRange {
                name: "gen_scale",
                value: gen_scale,
                constraint: "gen_scale > 0",
            });
        }
        self.gen_scale = gen_scale;
        Ok(self)
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.coords[i * self.n..(i + 1) * self.n]
    }

    pub fn points(&self) -> std::slice::ChunksExact<'_, f64> {
        self.coords.chunks_exact(self.n)
    }

    /// Axis-aligned bounding box.
    pub fn bounds(&self) -> (Vec<f64>, Vec<f64>) {
        let mut lo = vec![f64::INFINITY; self.n];
        let mut hi = vec![f64::NEG_INFINITY; self.n];
        for p in self.points() {
            for ((l, h), x) in lo.iter_mut().zip(hi.iter_mut()).zip(p) {
                *l = l.min(*x);
                *h = h.max(*x);
            }
        }
        (lo, hi)
    }

    /// Length of the bounding-box diagonal, an upper bound for the diameter.
    pub fn diameter(&self) -> f64 {
        let (lo, hi) = self.bounds();
        lo.iter().zip(&hi).map(|(l, h)| (h - l).powi(2)).sum::<f64>().sqrt()
    }

    /// `lambda * X` with the generation scale scaled alike.
    pub fn scaled(&self, lambda: f64) -> Result<Self> {
        Self::from_flat(
            self.n,
            self.coords.iter().map(|x| x * lambda).collect(),
            self.gen_scale * lambda.abs(),
        )
    }

    /// Copy with exact duplicate points removed (order not preserved).
    pub fn dedup(&self) -> Self {
        let mut pts: Vec<&[f64]> = self.points().collect();
        pts.sort_unstable_by(|a, b| {
            a.iter()
                .zip(b.iter())
                .map(|(x, y)| x.total_cmp(y))
                .find(|o| o.is_ne())
                .unwrap_or(std::cmp::Ordering::Equal)
        });
        pts.dedup();
        Self {
            n: self.n,
            coords: pts.concat(),
            gen_scale: self.gen_scale,
        }
    }
}
