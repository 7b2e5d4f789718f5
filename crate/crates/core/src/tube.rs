//! Open delta-tubes around planes and bounds on how much two of them can
//! overlap inside the window `S`.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::affine::{sample_simplex, simplex_volume, AffinePlane, Ambient, DomainBox, PlaneFrame};
use crate::error::{Error, Result};
use crate::family::WeightedFamily;
use crate::mc::{count_hits, McEstimate};

/// The open delta-neighbourhood of a plane.
#[derive(Debug, Clone, PartialEq)]
pub struct TubeSpec {
    plane: AffinePlane,
    delta: f64,
}

impl TubeSpec {
    pub fn new(plane: AffinePlane, delta: f64) -> Result<Self> {
        check_delta(delta)?;
        Ok(Self { plane, delta })
    }

    /// Same as [`TubeSpec::new`] but also enforces `delta <= delta0`.
    pub fn in_window(plane: AffinePlane, delta: f64, window: &DomainBox) -> Result<Self> {
        check_delta_window(delta, window)?;
        Self::new(plane, delta)
    }

    pub fn plane(&self) -> &AffinePlane {
        &self.plane
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    /// Strict membership: distance to the plane `< delta`.
    pub fn contains(&self, y: &[f64]) -> Result<bool> {
        Ok(self.plane.distance(y)? < self.delta)
    }
}

pub fn in_tube(tube: &TubeSpec, y: &[f64]) -> Result<bool> {
    tube.contains(y)
}

/// Slope bound of a family and the constants derived from it.
///
/// A point at Euclidean distance `< delta` from a plane whose slopes are
/// bounded by `b_max` is at vertical (max-norm) distance `< c * delta`,
/// with `c = sqrt(1 + k (n - k) b_max^2)`. `separation = 2c`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SlopeBound {
    pub b_max: f64,
    pub c: f64,
    pub separation: f64,
}

impl SlopeBound {
    pub fn new(ambient: Ambient, b_max: f64) -> Result<Self> {
        if !(b_max >= 0.0 && b_max.is_finite()) {
            return Err(Error::OutOfRange {
                name: "b_max",
                value: b_max,
                constraint: "finite and >= 0",
            });
        }
        let kk = (ambient.k() * ambient.codim()) as f64;
        let c = (1.0 + kk * b_max * b_max).sqrt();
        Ok(Self {
            b_max,
            c,
            separation: 2.0 * c,
        })
    }

    pub fn for_planes<'a>(planes: impl IntoIterator<Item = &'a AffinePlane>) -> Result<Self> {
        let mut it = planes.into_iter().peekable();
        let ambient = it.peek().ok_or(Error::Empty("plane list"))?.ambient();
        let mut b_max = 0.0_f64;
        for p in it {
            ambient.ensure_same(&p.ambient())?;
            b_max = b_max.max(p.max_abs_slope());
        }
        Self::new(ambient, b_max)
    }
}

pub fn derive_slope_bound(family: &WeightedFamily) -> Result<SlopeBound> {
    SlopeBound::for_planes(family.planes())
}

/// `||a - a'|| > ||b - b'|| + D delta`; a `true` result certifies that the two
/// open delta-tubes do not meet inside `S`.
pub fn separation_test(p: &AffinePlane, q: &AffinePlane, delta: f64, sb: &SlopeBound) -> Result<bool> {
    separation_with_reach(p, q, delta, sb, 1.0)
}

/// Separation certificate valid for points whose first `k` coordinates lie
/// within `delta` of `C` (the neighbourhood of any set drawn over `C`), not
/// only inside `S`.
pub fn separation_test_near_window(
    p: &AffinePlane,
    q: &AffinePlane,
    delta: f64,
    sb: &SlopeBound,
) -> Result<bool> {
    let k = p.ambient().k() as f64;
    separation_with_reach(p, q, delta, sb, 1.0 + k.sqrt() * delta)
}

fn separation_with_reach(
    p: &AffinePlane,
    q: &AffinePlane,
    delta: f64,
    sb: &SlopeBound,
    reach: f64,
) -> Result<bool> {
    check_delta(delta)?;
    let da = p.intercept_gap(q)?;
    let db = p.slope_gap(q)?;
    Ok(da > db * reach + sb.separation * delta)
}

/// Explicit upper bound on `L^n(P_delta ∩ P'_delta ∩ S)` for non-parallel
/// planes: `(2 c delta)^(n-k) * sqrt(2)^(k-1) * d` where `d` is the width of
/// the strip of parameters over which the vertical gap in the coordinate
/// attaining `||b - b'||` stays below `2 c delta`.
pub fn strip_bound(p: &AffinePlane, q: &AffinePlane, delta: f64, sb: &SlopeBound) -> Result<f64> {
    check_delta(delta)?;
    let amb = p.ambient();
    amb.ensure_same(&q.ambient())?;
    let (mut best, mut best_j) = (0.0_f64, 0usize);
    for (bp, bq) in p.slopes().iter().zip(q.slopes()) {
        for (j, (x, y)) in bp.iter().zip(bq).enumerate() {
            let g = (x - y).abs();
            if g > best {
                best = g;
                best_j = j;
            }
        }
    }
    if best == 0.0 {
        return Err(Error::ParallelPlanes);
    }
    let normal = p
        .slopes()
        .iter()
        .zip(q.slopes())
        .map(|(bp, bq)| (bp[best_j] - bq[best_j]).powi(2))
        .sum::<f64>()
        .sqrt();
    let side = 2.0 * sb.c * delta;
    let width = side / normal;
    Ok(side.powi(amb.codim() as i32) * 2f64.sqrt().powi(amb.k() as i32 - 1) * width)
}

/// Where intersection-volume samples are drawn from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SamplingDomain {
    /// Uniform over `S`.
    Window,
    /// Uniform over the vertical slab `{(t, f(t) + w) : t in C, |w|_inf < c delta}`
    /// of the first plane, which contains its tube inside `S`.
    Slab,
}

/// Uniform Monte Carlo estimate of `L^n(P_delta ∩ P'_delta ∩ S)`.
pub fn intersection_volume_mc(
    p: &AffinePlane,
    q: &AffinePlane,
    delta: f64,
    window: &DomainBox,
    samples: u64,
    seed: u64,
) -> Result<McEstimate> {
    intersection_volume(p, q, delta, window, SamplingDomain::Window, samples, seed)
}

pub fn intersection_volume(
    p: &AffinePlane,
    q: &AffinePlane,
    delta: f64,
    window: &DomainBox,
    domain: SamplingDomain,
    samples: u64,
    seed: u64,
) -> Result<McEstimate> {
    check_delta_window(delta, window)?;
    let amb = window.ambient();
    amb.ensure_same(&p.ambient())?;
    amb.ensure_same(&q.ambient())?;
    if samples == 0 {
        return Err(Error::OutOfRange {
            name: "samples",
            value: 0.0,
            constraint: "samples >= 1",
        });
    }
    let fp = p.frame();
    let fq = q.frame();
    let d2 = delta * delta;
    let n = amb.n();
    let k = amb.k();
    match domain {
        SamplingDomain::Window => {
            let hits = count_hits(
                samples,
                seed,
                0,
                || (vec![0.0; n], vec![0.0; n]),
                |rng, (y, scratch)| {
                    window.sample_into(rng, y);
                    both_within(&fp, &fq, y, scratch, d2)
                },
            );
            Ok(McEstimate::from_hits(hits, samples, window.volume()))
        }
        SamplingDomain::Slab => {
            let c = SlopeBound::new(amb, p.max_abs_slope())?.c;
            let half = c * delta;
            let volume = simplex_volume(k) * (2.0 * half).powi(amb.codim() as i32);
            let hits = count_hits(
                samples,
                seed,
                1,
                || (vec![0.0; n], vec![0.0; n]),
                |rng, (y, scratch)| {
                    let (t, u) = y.split_at_mut(k);
                    sample_simplex(rng, t);
                    p.graph_into(t, u);
                    for v in u.iter_mut() {
                        *v += half * (2.0 * rng.random::<f64>() - 1.0);
                    }
                    u.iter().all(|v| v.abs() <= 0.5) && both_within(&fp, &fq, y, scratch, d2)
                },
            );
            Ok(McEstimate::from_hits(hits, samples, volume))
        }
    }
}

#[inline]
fn both_within(fp: &PlaneFrame, fq: &PlaneFrame, y: &[f64], scratch: &mut [f64], d2: f64) -> bool {
    fp.dist2(y, scratch) < d2 && fq.dist2(y, scratch) < d2
}

/// Normalised intersection volume `vol * (d(P,P') + delta) / delta^(n-k+1)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GengeoEstimate {
    pub ratio: f64,
    pub stderr: f64,
    pub code_distance: f64,
    pub separated: bool,
    pub volume: McEstimate,
}

/// Estimates the normalised overlap of two tubes. Certified-separated
/// pairs return zero without sampling; others use slab sampling around `p`.
pub fn gengeo_ratio(
    p: &AffinePlane,
    q: &AffinePlane,
    delta: f64,
    window: &DomainBox,
    samples: u64,
    seed: u64,
) -> Result<GengeoEstimate> {
    gengeo_ratio_with(p, q, delta, window, SamplingDomain::Slab, samples, seed)
}

pub fn gengeo_ratio_with(
    p: &AffinePlane,
    q: &AffinePlane,
    delta: f64,
    window: &DomainBox,
    domain: SamplingDomain,
    samples: u64,
    seed: u64,
) -> Result<GengeoEstimate> {
    check_delta_window(delta, window)?;
    let code_distance = p.code_metric(q)?;
    let sb = SlopeBound::for_planes([p, q])?;
    if separation_test(p, q, delta, &sb)? {
        return Ok(GengeoEstimate {
            ratio: 0.0,
            stderr: 0.0,
            code_distance,
            separated: true,
            volume: McEstimate::zero(),
        });
    }
    let volume = intersection_volume(p, q, delta, window, domain, samples, seed)?;
    let scale = (code_distance + delta) / delta.powi(p.ambient().codim() as i32 + 1);
    Ok(GengeoEstimate {
        ratio: volume.estimate * scale,
        stderr: volume.stderr * scale,
        code_distance,
        separated: false,
        volume,
    })
}

fn check_delta(delta: f64) -> Result<()> {
    if delta > 0.0 && delta.is_finite() {
        Ok(())
    } else {
        Err(Error::OutOfRange {
            name: "delta",
            value: delta,
            constraint: "delta > 0",
        })
    }
}

fn check_delta_window(delta: f64, window: &DomainBox) -> Result<()> {
    check_delta(delta)?;
    if delta <= window.delta0() {
        Ok(())
    } else {
        Err(Error::OutOfRange {
            name: "delta",
            value: delta,
            constraint: "delta <= delta0",
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn amb2() -> Ambient {
        Ambient::new(2, 1).unwrap()
    }

    fn line(a: f64, b: f64) -> AffinePlane {
        AffinePlane::from_code(vec![a], vec![vec![b]], amb2()).unwrap()
    }

    #[test]
    fn tube_membership_is_open() {
        let t = TubeSpec::new(line(0.0, 0.0), 0.1).unwrap();
        assert!(in_tube(&t, &[0.5, 0.05]).unwrap());
        assert!(!in_tube(&t, &[0.5, 0.2]).unwrap());
        assert!(!in_tube(&t, &[0.5, 0.1]).unwrap());
        assert!(TubeSpec::new(line(0.0, 0.0), 0.0).is_err());
    }

    #[test]
    fn slope_bound_constants() {
        let fam = WeightedFamily::uniform(vec![line(0.0, 0.0), line(0.0, 0.5)], 1.0, 1, 0.0).unwrap();
        let sb = derive_slope_bound(&fam).unwrap();
        assert_eq!(sb.b_max, 0.5);
        assert_close!(sb.c, 1.25f64.sqrt(), 1e-15);
        assert_close!(sb.separation, 2.0 * 1.25f64.sqrt(), 1e-15);

        let flat = SlopeBound::new(amb2(), 0.0).unwrap();
        assert_eq!((flat.c, flat.separation), (1.0, 2.0));

        let sb3 = SlopeBound::new(Ambient::new(3, 2).unwrap(), 1.0).unwrap();
        assert_close!(sb3.c, 3f64.sqrt(), 1e-15);
    }

    #[test]
    fn separation_examples() {
        let sb = SlopeBound::new(amb2(), 0.5).unwrap();
        assert!(separation_test(&line(0.0, 0.0), &line(0.2, 0.1), 0.02, &sb).unwrap());
        assert!(!separation_test(&line(0.0, 0.0), &line(0.0, 0.0), 0.02, &sb).unwrap());
        assert!(!separation_test(&line(0.0, 0.0), &line(0.1, 0.1), 0.02, &sb).unwrap());
    }

    #[test]
    fn strip_bound_examples() {
        let sb = SlopeBound::new(amb2(), 0.5).unwrap();
        let (p, q) = (line(0.1, 0.0), line(-0.15, 0.5));
        let b = strip_bound(&p, &q, 0.01, &sb).unwrap();
        let side = 0.02 * 1.25f64.sqrt();
        assert_close!(b, side * side / 0.5, 1e-15);
        assert_close!(b, 1.0e-3, 1e-6);
        let half = strip_bound(&p, &q, 0.005, &sb).unwrap();
        assert_close!(half / b, 0.25, 1e-12);
        assert_eq!(strip_bound(&p, &line(0.3, 0.0), 0.01, &sb), Err(Error::ParallelPlanes));
    }

    #[test]
    fn separated_pair_has_no_hits() {
        let s = DomainBox::new(amb2(), 0.1).unwrap();
        let est = intersection_volume_mc(&line(0.0, 0.0), &line(0.2, 0.1), 0.02, &s, 50_000, 3).unwrap();
        assert_eq!(est.hits, 0);
        assert_eq!(est.estimate, 0.0);
        let g = gengeo_ratio(&line(0.0, 0.0), &line(0.2, 0.1), 0.02, &s, 1000, 3).unwrap();
        assert!(g.separated);
        assert_eq!(g.ratio, 0.0);
    }

    #[test]
    fn delta_above_margin_rejected() {
        let s = DomainBox::new(amb2(), 0.05).unwrap();
        assert!(intersection_volume_mc(&line(0.0, 0.0), &line(0.0, 0.0), 0.06, &s, 10, 0).is_err());
        assert!(TubeSpec::in_window(line(0.0, 0.0), 0.06, &s).is_err());
    }
}
