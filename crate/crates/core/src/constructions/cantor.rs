use serde::{Deserialize, Serialize};

use crate::affine::{AffinePlane, Ambient};
use crate::error::{Error, Result};
use crate::family::WeightedFamily;

/// Two-branch self-similar Cantor set of dimension `s` inside
/// `[lo, lo + span]`: each interval keeps its two end pieces of relative
/// length `2^(-1/s)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CantorSet {
    pub s: f64,
    pub depth: u32,
    pub lo: f64,
    pub span: f64,
}

impl CantorSet {
    pub fn new(s: f64, depth: u32, lo: f64, span: f64) -> Result<Self> {
        check_s(s)?;
        if !(span > 0.0 && span.is_finite() && lo.is_finite()) {
            return Err(Error::OutOfRange {
                name: "span",
                value: span,
                constraint: "span > 0",
            });
        }
        Ok(Self { s, depth, lo, span })
    }

    /// Standard set on `[0, 1]`.
    pub fn unit(s: f64, depth: u32) -> Result<Self> {
        Self::new(s, depth, 0.0, 1.0)
    }

    pub fn ratio(&self) -> f64 {
        2f64.powf(-1.0 / self.s)
    }

    /// Length of a construction interval at the final depth.
    pub fn cell(&self) -> f64 {
        self.span * self.ratio().powi(self.depth as i32)
    }

    /// Left endpoints of the `2^depth` final intervals, increasing.
    pub fn left_endpoints(&self) -> Vec<f64> {
        let rho = self.ratio();
        let mut pts = vec![0.0];
        let mut len = 1.0;
        for _ in 0..self.depth {
            let shift = len * (1.0 - rho);
            pts = pts.iter().flat_map(|&x| [x, x + shift]).collect();
            len *= rho;
        }
        pts.into_iter().map(|x| self.lo + self.span * x).collect()
    }

    /// Both endpoints of every final interval, increasing.
    pub fn endpoints(&self) -> Vec<f64> {
        let cell = self.cell();
        self.left_endpoints().into_iter().flat_map(|x| [x, x + cell]).collect()
    }

    /// Midpoints of the final intervals, increasing.
    pub fn midpoints(&self) -> Vec<f64> {
        let half = 0.5 * self.cell();
        self.left_endpoints().into_iter().map(|x| x + half).collect()
    }
}

/// Levels a dimension-`s` Cantor factor needs to resolve scale `2^-depth`.
pub fn levels_for_resolution(s: f64, depth: u32) -> u32 {
    (depth as f64 * s - 1e-9).ceil().max(0.0) as u32
}

fn check_s(s: f64) -> Result<()> {
    if s > 0.0 && s <= 1.0 {
        Ok(())
    } else {
        Err(Error::OutOfRange {
            name: "s",
            value: s,
            constraint: "0 < s <= 1",
        })
    }
}

/// Family whose code coordinate `axis` (index into the flat code
/// `a^0, b^1, .., b^k`) runs over a dimension-`s` Cantor set in
/// `[-1/2, 1/2]`; all other code coordinates are zero. Uniform weights.
pub fn cantor_code_family(s: f64, axis: usize, depth: u32, ambient: Ambient) -> Result<WeightedFamily> {
    check_s(s)?;
    if depth < 1 {
        return Err(Error::OutOfRange {
            name: "depth",
            value: depth as f64,
            constraint: "depth >= 1",
        });
    }
    if axis >= ambient.code_len() {
        return Err(Error::OutOfRange {
            name: "axis",
            value: axis as f64,
            constraint: "axis < code length",
        });
    }
    let set = CantorSet::new(s, depth, -0.5, 1.0)?;
    let planes = set
        .left_endpoints()
        .into_iter()
        .map(|x| {
            let mut code = vec![0.0; ambient.code_len()];
            code[axis] = x;
            AffinePlane::from_flat_code(&code, ambient)
        })
        .collect::<Result<Vec<_>>>()?;
    WeightedFamily::uniform(planes, s, depth, set.cell())
}

/// Result of an exhaustive Frostman-constant evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrostmanReport {
    /// `max mu(B(P, r)) / r^s` over family planes and dyadic radii.
    pub constant: f64,
    pub plane: usize,
    pub radius: f64,
    /// A single-plane family: a point mass, whose constant is trivially `2^s`.
    pub degenerate: bool,
}

/// Maximum of `mu(B_d(P, r)) / r^s` over all planes `P` of the family and
/// dyadic radii `r = 2^-1 .. 2^-(depth * ceil(1/s))`, balls open in the code
/// metric.
pub fn frostman_constant(family: &WeightedFamily, s: f64) -> Result<FrostmanReport> {
    if !(s > 0.0) {
        return Err(Error::OutOfRange {
            name: "s",
            value: s,
            constraint: "s > 0",
        });
    }
    let jmax = (family.depth().max(1) * (1.0 / s).ceil() as u32).max(1) as i32;
    let radii: Vec<f64> = (1..=jmax).map(|j| 0.5f64.powi(j)).collect();
    let planes = family.planes();
    let weights = family.weights();
    let mut best = FrostmanReport {
        constant: 0.0,
        plane: 0,
        radius: radii[0],
        degenerate: planes.len() == 1,
    };
    let mut dists = vec![0.0; planes.len()];
    for (i, p) in planes.iter().enumerate() {
        for (d, q) in dists.iter_mut().zip(planes) {
            *d = p.code_metric(q)?;
        }
        for &r in &radii {
            let mass: f64 = dists.iter().zip(weights).filter(|(d, _)| **d < r).map(|(_, w)| w).sum();
            let ratio = mass / r.powf(s);
            if ratio > best.constant {
                best.constant = ratio;
                best.plane = i;
                best.radius = r;
            }
        }
    }
    Ok(best)
}
