//! Finite weighted families of planes: the discrete stand-in for a
//! measure on a set of planes.

use serde::{Deserialize, Serialize};

use crate::affine::{AffinePlane, Ambient};
use crate::error::{Error, Result};

const WEIGHT_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightedFamily {
    planes: Vec<AffinePlane>,
    weights: Vec<f64>,
    target_s: f64,
    depth: u32,
    /// Code-space scale down to which the family represents its ideal set.
    resolution: f64,
    /// Total weight; 1 for a probability family, less after restriction.
    mass: f64,
}

impl WeightedFamily {
    /// Probability family. Every plane must cross `H_0..H_k` inside the window.
    pub fn new(
        planes: Vec<AffinePlane>,
        weights: Vec<f64>,
        target_s: f64,
        depth: u32,
        resolution: f64,
    ) -> Result<Self> {
        Self::with_mass(planes, weights, target_s, depth, resolution, 1.0)
    }

    pub fn uniform(planes: Vec<AffinePlane>, target_s: f64, depth: u32, resolution: f64) -> Result<Self> {
        let w = 1.0 / planes.len().max(1) as f64;
        let weights = vec![w; planes.len()];
        Self::new(planes, weights, target_s, depth, resolution)
    }

    fn with_mass(
        planes: Vec<AffinePlane>,
        weights: Vec<f64>,
        target_s: f64,
        depth: u32,
        resolution: f64,
        mass: f64,
    ) -> Result<Self> {
        let first = planes.first().ok_or(Error::Empty("family"))?;
        let ambient = first.ambient();
        if weights.len() != planes.len() {
            return Err(Error::DimensionMismatch {
                what: "weights",
                expected: planes.len(),
                got: weights.len(),
            });
        }
        for (i, p) in planes.iter().enumerate() {
            ambient.ensure_same(&p.ambient())?;
            if !meets_window(p) {
                return Err(Error::PlaneOutsideWindow { index: i });
            }
        }
        let total: f64 = weights.iter().sum();
        if weights.iter().any(|w| !(*w >= 0.0)) || (total - mass).abs() > WEIGHT_TOL {
            return Err(Error::BadWeights {
                expected: mass,
                got: total,
            });
        }
        if !(0.0..=1.0).contains(&target_s) {
            return Err(Error::OutOfRange {
                name: "target_s",
                value: target_s,
                constraint: "0 <= s <= 1",
            });
        }
        if !(resolution >= 0.0) {
            return Err(Error::OutOfRange {
                name: "resolution",
                value: resolution,
                constraint: "resolution >= 0",
            });
        }
        Ok(Self {
            planes,
            weights,
            target_s,
            depth,
            resolution,
            mass,
        })
    }

    pub fn planes(&self) -> &[AffinePlane] {
        &self.planes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.planes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.planes.is_empty()
    }

    pub fn ambient(&self) -> Ambient {
        self.planes[0].ambient()
    }

    pub fn target_s(&self) -> f64 {
        self.target_s
    }

    pub fn depth(&self) -> u32 {
        self.depth
    }

    pub fn resolution(&self) -> f64 {
        self.resolution
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }

    pub fn iter(&self) -> impl Iterator<Item = (&AffinePlane, f64)> {
        self.planes.iter().zip(self.weights.iter().copied())
    }

    /// Restriction of the measure to the planes with `keep[i]`; weights are
    /// not renormalised. Returns `None` when nothing is kept.
    pub fn restrict(&self, keep: &[bool]) -> Option<Self> {
        let (planes, weights): (Vec<_>, Vec<_>) = self
            .iter()
            .zip(keep)
            .filter(|(_, &k)| k)
            .map(|((p, w), _)| (p.clone(), w))
            .unzip();
        if planes.is_empty() {
            return None;
        }
        let mass = weights.iter().sum();
        Some(Self {
            planes,
            weights,
            target_s: self.target_s,
            depth: self.depth,
            resolution: self.resolution,
            mass,
        })
    }
}

fn meets_window(p: &AffinePlane) -> bool {
    let ok = |v: f64| v.abs() <= 0.5;
    p.intercept().iter().all(|&a| ok(a))
        && p
            .slopes()
            .iter()
            .all(|b| b.iter().zip(p.intercept()).all(|(bj, a)| ok(a + bj)))
}
