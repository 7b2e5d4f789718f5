//! The L^2 counting chain on discrete data: scale selection, tube masses,
//! pairwise overlap masses, the Cauchy-Schwarz comparison, dyadic shells
//! and the final volume lower bound.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::affine::{AffinePlane, DomainBox};
use crate::dimension::{
    default_content_levels, dimension_fit, hausdorff_content, neighborhood_volume, neighborhood_volume_in,
    FitResult, FitWindow, Neighborhood, PointCloud, Region, ScaleSeries, SeriesKind,
};
use crate::dimension::index::CellIndex;
use crate::error::{check_len, Error, Result};
use crate::family::WeightedFamily;
use crate::mc::{count_hits_seq, derive_seed, McEstimate};
use crate::tube::{intersection_volume, separation_test_near_window, SamplingDomain, SlopeBound};

const PAIR_STREAM: u64 = 0x9a1f;
const SHELL_STREAM: u64 = 0x5e11;
const MIN_PAIR_SAMPLES: u64 = 512;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Ball {
    pub center: Vec<f64>,
    pub radius: f64,
}

impl Ball {
    /// Closed ball.
    pub fn contains(&self, y: &[f64]) -> bool {
        let d2: f64 = self.center.iter().zip(y).map(|(a, b)| (a - b).powi(2)).sum();
        d2 <= self.radius * self.radius
    }
}

/// A finite cover by balls together with the first admissible level `M`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoverSpec {
    balls: Vec<Ball>,
    m: u32,
}

/// `sum_{l >= m} 1/l^2`.
pub fn inverse_square_tail(m: u32) -> f64 {
    let head: f64 = (1..m.max(1)).map(|l| 1.0 / (l as f64 * l as f64)).sum();
    std::f64::consts::PI.powi(2) / 6.0 - head
}

/// Smallest `M` with `sum_{l >= M} 1/l^2 < eps` and `2^(1-M) <= delta0`.
pub fn minimal_level(eps: f64, delta0: f64) -> Result<u32> {
    if !(eps > 0.0 && delta0 > 0.0) {
        return Err(Error::OutOfRange {
            name: "eps",
            value: eps,
            constraint: "eps > 0 and delta0 > 0",
        });
    }
    let mut m = 1;
    while inverse_square_tail(m) >= eps || 2f64.powi(1 - m as i32) > delta0 {
        m += 1;
    }
    Ok(m)
}

/// Level `l` with `2^-l < r <= 2^(1-l)`.
pub fn radius_level(r: f64) -> i32 {
    let mut l = (-r.log2()).ceil() as i32 + 1;
    while 0.5f64.powi(l) >= r {
        l += 1;
    }
    while 0.5f64.powi(l - 1) < r {
        l -= 1;
    }
    l
}

impl CoverSpec {
    /// Every radius must lie in some `J_l` with `l >= M`.
    pub fn new(balls: Vec<Ball>, eps: f64, delta0: f64) -> Result<Self> {
        if balls.is_empty() {
            return Err(Error::Empty("cover"));
        }
        let m = minimal_level(eps, delta0)?;
        for b in &balls {
            if !(b.radius > 0.0) || radius_level(b.radius) < m as i32 {
                return Err(Error::OutOfRange {
                    name: "radius",
                    value: b.radius,
                    constraint: "0 < r <= 2^(1-M)",
                });
            }
        }
        Ok(Self { balls, m })
    }

    /// One ball of radius `2^(1-level)` at the centre of each occupied cell
    /// of side `2^-level`.
    pub fn grid(cloud: &PointCloud, level: u32, eps: f64, delta0: f64) -> Result<Self> {
        let side = 0.5f64.powi(level as i32);
        let mut cells: Vec<Vec<i64>> = cloud
            .points()
            .map(|p| p.iter().map(|x| (x / side).floor() as i64).collect())
            .collect();
        cells.sort_unstable();
        cells.dedup();
        let balls = cells
            .into_iter()
            .map(|c| Ball {
                center: c.iter().map(|&i| (i as f64 + 0.5) * side).collect(),
                radius: 2.0 * side,
            })
            .collect();
        Self::new(balls, eps, delta0)
    }

    pub fn balls(&self) -> &[Ball] {
        &self.balls
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    /// Deepest level with a non-empty `J_l`.
    pub fn max_level(&self) -> u32 {
        self.balls.iter().map(|b| radius_level(b.radius)).max().unwrap_or(0).max(0) as u32
    }

    /// Balls of `J_l`.
    pub fn level(&self, l: u32) -> impl Iterator<Item = &Ball> {
        self.balls.iter().filter(move |b| radius_level(b.radius) == l as i32)
    }

    /// Points of `cloud` in the union of the closed balls of `J_l`.
    pub fn restrict(&self, cloud: &PointCloud, l: u32) -> Option<PointCloud> {
        self.restrict_all(std::slice::from_ref(cloud), l).pop().flatten()
    }

    /// [`CoverSpec::restrict`] for several clouds of the same dimension.
    pub fn restrict_all(&self, clouds: &[PointCloud], l: u32) -> Vec<Option<PointCloud>> {
        let Some(n) = clouds.first().map(PointCloud::dim) else {
            return Vec::new();
        };
        let balls: Vec<&Ball> = self.level(l).filter(|b| b.center.len() == n).collect();
        let side = 0.5f64.powi(l as i32 - 1);
        let centers: Vec<f64> = balls.iter().flat_map(|b| b.center.iter().copied()).collect();
        let Ok(index) = CellIndex::new(n, &centers, side) else {
            return vec![None; clouds.len()];
        };
        clouds
            .par_iter()
            .map(|cloud| {
                let coords: Vec<f64> = cloud
                    .points()
                    .filter(|p| index.any_near(&index.key_of(p), 1, |i| balls[i as usize].contains(p)))
                    .flatten()
                    .copied()
                    .collect();
                PointCloud::from_flat(n, coords, cloud.gen_scale()).ok()
            })
            .collect()
    }
}

/// Outcome of the pigeonhole scale selection.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScaleSelection {
    pub l: u32,
    pub m: u32,
    /// Restricted, un-renormalised family.
    pub family: WeightedFamily,
    pub keep: Vec<bool>,
    /// `P ∩ B_l` for each kept plane.
    pub clouds: Vec<PointCloud>,
    /// Mass of the selected sub-family.
    pub mass: f64,
    /// Every plane's full set had estimated content at least `eps`.
    pub hypothesis_met: bool,
}

/// Smallest `l >= M` for which the planes whose set `P ∩ B_l` has estimated
/// `alpha`-content at least `1/l^2` carry mass at least `1/l^2`.
///
/// `plane_sets[i]` is the part of the covered set lying on plane `i`.
pub fn select_scale(
    cover: &CoverSpec,
    family: &WeightedFamily,
    plane_sets: &[PointCloud],
    alpha: f64,
    eps: f64,
) -> Result<ScaleSelection> {
    check_len("plane sets", family.len(), plane_sets.len())?;
    let contents: Vec<f64> = plane_sets
        .par_iter()
        .map(|c| hausdorff_content(c, alpha, default_content_levels(c)))
        .collect::<Result<_>>()?;
    let hypothesis_met = contents.iter().all(|&h| h >= eps);
    for l in cover.m()..=cover.max_level() {
        let thr = 1.0 / (l as f64 * l as f64);
        let restricted: Vec<Option<PointCloud>> = cover
            .restrict_all(plane_sets, l)
            .into_par_iter()
            .zip(plane_sets)
            .zip(&contents)
            .map(|((sub, c), &full)| match sub {
                Some(sub) => {
                    let h = if sub.len() == c.len() {
                        full
                    } else {
                        hausdorff_content(&sub, alpha, default_content_levels(c))?
                    };
                    Ok((h >= thr).then_some(sub))
                }
                None => Ok(None),
            })
            .collect::<Result<_>>()?;
        let keep: Vec<bool> = restricted.iter().map(Option::is_some).collect();
        let mass: f64 = family.weights().iter().zip(&keep).filter(|(_, k)| **k).map(|(w, _)| w).sum();
        if mass >= thr {
            let sub = family.restrict(&keep).ok_or(Error::Empty("selected family"))?;
            return Ok(ScaleSelection {
                l,
                m: cover.m(),
                family: sub,
                keep,
                clouds: restricted.into_iter().flatten().collect(),
                mass,
                hypothesis_met,
            });
        }
    }
    Err(Error::NoScale { hypothesis_met })
}

/// `sum_P mu(P) L^n((P~)_delta)`.
pub fn tube_mass(family: &WeightedFamily, clouds: &[PointCloud], delta: f64, grid_res: f64) -> Result<f64> {
    check_len("clouds", family.len(), clouds.len())?;
    let vols = clouds
        .par_iter()
        .map(|c| neighborhood_volume(c, delta, grid_res))
        .collect::<Result<Vec<_>>>()?;
    Ok(vols.iter().zip(family.weights()).map(|(v, w)| v * w).sum())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairMass {
    pub value: f64,
    pub stderr: f64,
    pub certified_pairs: usize,
    pub sampled_pairs: usize,
}

/// `sum_{P,P'} mu(P) mu(P') L^n((P~)_delta ∩ (P'~)_delta)` on the lattice of
/// side `grid_res` (a point counts through the centre of its cell).
///
/// Diagonal terms use the neighbourhood volume; off-diagonal pairs are
/// sampled uniformly over the overlap of their padded bounding boxes,
/// except pairs certified disjoint, which contribute zero. `samples` is
/// the total budget, split evenly over the sampled pairs.
pub fn pairwise_mass(
    family: &WeightedFamily,
    clouds: &[PointCloud],
    delta: f64,
    grid_res: f64,
    samples: u64,
    seed: u64,
) -> Result<PairMass> {
    check_len("clouds", family.len(), clouds.len())?;
    let w = family.weights();
    let diag: Vec<f64> = clouds
        .par_iter()
        .map(|c| neighborhood_volume(c, delta, grid_res))
        .collect::<Result<_>>()?;
    let sb = SlopeBound::for_planes(family.planes())?;
    let hoods = clouds
        .iter()
        .map(|c| Neighborhood::new(c, delta))
        .collect::<Result<Vec<_>>>()?;
    let boxes: Vec<(Vec<f64>, Vec<f64>)> = clouds.iter().map(PointCloud::bounds).collect();
    let planes = family.planes();
    let m = planes.len();
    let pairs: Vec<(usize, usize)> = (0..m).flat_map(|i| (i + 1..m).map(move |j| (i, j))).collect();
    let pad = delta + grid_res;

    let n = family.ambient().n();
    let mut jobs = Vec::new();
    for (idx, &(i, j)) in pairs.iter().enumerate() {
        if separation_test_near_window(&planes[i], &planes[j], delta, &sb)? {
            continue;
        }
        let lo: Vec<f64> = (0..n).map(|d| boxes[i].0[d].max(boxes[j].0[d]) - pad).collect();
        let hi: Vec<f64> = (0..n).map(|d| boxes[i].1[d].min(boxes[j].1[d]) + pad).collect();
        if lo.iter().zip(&hi).all(|(a, b)| a < b) {
            jobs.push((idx, lo, hi));
        }
    }
    let per_pair = (samples / jobs.len().max(1) as u64).max(MIN_PAIR_SAMPLES);

    let terms: Vec<(usize, McEstimate)> = jobs
        .par_iter()
        .map(|(idx, lo, hi)| {
            let (i, j) = pairs[*idx];
            let vol: f64 = lo.iter().zip(hi).map(|(a, b)| b - a).product();
            let pair_seed = derive_seed(seed, PAIR_STREAM, *idx as u64);
            let (hi_i, hi_j) = (&hoods[i], &hoods[j]);
            let hits = count_hits_seq(
                per_pair,
                pair_seed,
                0,
                || vec![0.0; n],
                |rng, c| {
                    for d in 0..n {
                        let y = lo[d] + (hi[d] - lo[d]) * rand::Rng::random::<f64>(rng);
                        c[d] = ((y / grid_res).floor() + 0.5) * grid_res;
                    }
                    hi_i.contains(c) && hi_j.contains(c)
                },
            );
            (*idx, McEstimate::from_hits(hits, per_pair, vol))
        })
        .collect();

    let mut value: f64 = diag.iter().zip(w).map(|(v, wi)| wi * wi * v).sum();
    let mut var = 0.0;
    for (idx, est) in &terms {
        let (i, j) = pairs[*idx];
        let f = 2.0 * w[i] * w[j];
        value += f * est.estimate;
        var += (f * est.stderr).powi(2);
    }
    Ok(PairMass {
        value,
        stderr: var.sqrt(),
        certified_pairs: pairs.len() - terms.len(),
        sampled_pairs: terms.len(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CsReport {
    pub tube_mass: f64,
    /// `tube_mass^2`
    pub lhs: f64,
    pub f_vol: f64,
    pub pair_mass: f64,
    pub pair_stderr: f64,
    /// Standard errors of slack allowed on the pair mass.
    pub sigmas: f64,
    pub ok: bool,
}

/// `(sum mu vol)^2 <= L^n(F_delta) * pair mass`, allowing `sigmas` standard
/// errors of Monte Carlo slack on the pair mass.
#[allow(clippy::too_many_arguments)]
pub fn cauchy_schwarz_report(
    family: &WeightedFamily,
    clouds: &[PointCloud],
    delta: f64,
    grid_res: f64,
    samples: u64,
    seed: u64,
    sigmas: f64,
) -> Result<CsReport> {
    let tm = tube_mass(family, clouds, delta, grid_res)?;
    let union = PointCloud::union(clouds)?;
    let f_vol = neighborhood_volume(&union, delta, grid_res)?;
    let pm = pairwise_mass(family, clouds, delta, grid_res, samples, seed)?;
    let lhs = tm * tm;
    let ok = lhs <= f_vol * (pm.value + sigmas * pm.stderr) * (1.0 + 1e-12);
    Ok(CsReport {
        tube_mass: tm,
        lhs,
        f_vol,
        pair_mass: pm.value,
        pair_stderr: pm.stderr,
        sigmas,
        ok,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShellReport {
    pub j: u32,
    pub mass: f64,
    /// Distance bracket `(lower, upper]`; shell 0 is `[0, delta]`.
    pub lower: f64,
    pub upper: f64,
    /// `sum_{P' in E_j} mu(P') L^n(P_delta ∩ P'_delta ∩ S)` for the pivot `P`.
    pub intersection_mass: f64,
    pub intersection_stderr: f64,
    /// `mu(E_j) delta^(n-k+1) / (2^(j-1) delta + delta)`; `mu(E_0) delta^(n-k)`.
    pub per_shell_bound: f64,
    /// `F (2^(j+1) delta)^s`, the Frostman bound for the enclosing open ball.
    pub frostman_bound: f64,
    pub frostman_ok: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShellDecomposition {
    pub delta: f64,
    pub shells: Vec<ShellReport>,
    pub total_mass: f64,
    /// `sum_j 2^(j(s-1))` over non-empty shells `j >= 1`.
    pub geometric_sum: f64,
    pub bound_sum: f64,
}

/// Shell index of a code distance: 0 for `d <= delta`, otherwise the `j`
/// with `2^(j-1) delta < d <= 2^j delta`.
pub fn shell_index(d: f64, delta: f64) -> u32 {
    if d <= delta {
        return 0;
    }
    let mut j = 1;
    while d > 2f64.powi(j as i32) * delta {
        j += 1;
    }
    j
}

/// Partitions the family by code distance to `pivot` into dyadic shells
/// and estimates each shell's overlap mass with the pivot's tube.
#[allow(clippy::too_many_arguments)]
pub fn shell_decomposition(
    family: &WeightedFamily,
    pivot: &AffinePlane,
    delta: f64,
    window: &DomainBox,
    frostman: f64,
    s: f64,
    samples: u64,
    seed: u64,
) -> Result<ShellDecomposition> {
    let amb = family.ambient();
    amb_check(pivot, family)?;
    let codim = amb.codim() as i32;
    let members: Vec<(u32, usize)> = family
        .planes()
        .iter()
        .enumerate()
        .map(|(i, p)| Ok((shell_index(pivot.code_metric(p)?, delta), i)))
        .collect::<Result<_>>()?;
    let vols: Vec<McEstimate> = family
        .planes()
        .par_iter()
        .enumerate()
        .map(|(i, p)| {
            let sb = SlopeBound::for_planes([pivot, p])?;
            if crate::tube::separation_test(pivot, p, delta, &sb)? {
                return Ok(McEstimate::zero());
            }
            let sd = derive_seed(seed, SHELL_STREAM, i as u64);
            intersection_volume(pivot, p, delta, window, SamplingDomain::Slab, samples, sd)
        })
        .collect::<Result<_>>()?;
    let top = members.iter().map(|m| m.0).max().unwrap_or(0);
    let w = family.weights();
    let mut shells = Vec::new();
    for j in 0..=top {
        let idx: Vec<usize> = members.iter().filter(|m| m.0 == j).map(|m| m.1).collect();
        if idx.is_empty() {
            continue;
        }
        let mass: f64 = idx.iter().map(|&i| w[i]).sum();
        let inter: f64 = idx.iter().map(|&i| w[i] * vols[i].estimate).sum();
        let var: f64 = idx.iter().map(|&i| (w[i] * vols[i].stderr).powi(2)).sum();
        let (lower, upper, bound) = if j == 0 {
            (0.0, delta, mass * delta.powi(codim))
        } else {
            let lo = 2f64.powi(j as i32 - 1) * delta;
            (lo, 2.0 * lo, mass * delta.powi(codim + 1) / (lo + delta))
        };
        let r = 2f64.powi(j as i32 + 1) * delta;
        let frostman_bound = frostman * r.powf(s);
        shells.push(ShellReport {
            j,
            mass,
            lower,
            upper,
            intersection_mass: inter,
            intersection_stderr: var.sqrt(),
            per_shell_bound: bound,
            frostman_bound,
            frostman_ok: mass <= frostman_bound * (1.0 + 1e-12) || r > 0.5,
        });
    }
    let total_mass = shells.iter().map(|s| s.mass).sum();
    let geometric_sum = shells
        .iter()
        .filter(|sh| sh.j >= 1)
        .map(|sh| 2f64.powf(sh.j as f64 * (s - 1.0)))
        .sum();
    let bound_sum = shells.iter().map(|s| s.per_shell_bound).sum();
    Ok(ShellDecomposition {
        delta,
        shells,
        total_mass,
        geometric_sum,
        bound_sum,
    })
}

fn amb_check(pivot: &AffinePlane, family: &WeightedFamily) -> Result<()> {
    let (a, b) = (pivot.ambient(), family.ambient());
    if a == b {
        Ok(())
    } else {
        Err(Error::AmbientMismatch {
            n1: a.n(),
            k1: a.k(),
            n2: b.n(),
            k2: b.k(),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdeLevel {
    pub delta: f64,
    pub f_vol: f64,
    /// `F_vol l^8 ln(1/delta) / delta^(n - (2 alpha - k + s))`
    pub normalized: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdeReport {
    pub levels: Vec<AdeLevel>,
    pub min_normalized: f64,
    pub floor: f64,
    pub pass: bool,
    /// `n - (2 alpha - k + s)`
    pub predicted_exponent: f64,
    pub fit: FitResult,
}

/// Inputs of [`ade_check`] beyond the data.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdeParams {
    pub alpha: f64,
    pub s: f64,
    pub l: u32,
    /// Lattice side is `delta / grid_div`.
    pub grid_div: f64,
    pub floor: f64,
}

/// Volume of `F_delta ∩ region` for `F` the union of the clouds, normalised
/// by the predicted lower bound, across the given scales. `region` should
/// lie in the window.
pub fn ade_check(
    clouds: &[PointCloud],
    deltas: &[f64],
    window: &DomainBox,
    region: &dyn Region,
    p: &AdeParams,
) -> Result<AdeReport> {
    if deltas.len() < 4 {
        return Err(Error::InsufficientScales {
            needed: 4,
            got: deltas.len(),
        });
    }
    let amb = window.ambient();
    let (n, k) = (amb.n() as f64, amb.k() as f64);
    let predicted = n - (2.0 * p.alpha - k + p.s);
    let union = PointCloud::union(clouds)?;
    let l8 = (p.l as f64).powi(8);
    let levels = deltas
        .iter()
        .map(|&d| {
            let f_vol = neighborhood_volume_in(&union, d, d / p.grid_div, region)?;
            Ok(AdeLevel {
                delta: d,
                f_vol,
                normalized: f_vol * l8 * (1.0 / d).ln() / d.powf(predicted),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let min_normalized = levels.iter().map(|l| l.normalized).fold(f64::INFINITY, f64::min);
    let series = ScaleSeries::new(
        levels.iter().map(|l| (l.delta, l.f_vol)).collect(),
        SeriesKind::NeighborhoodVolume,
    )?;
    let fit = dimension_fit(&series, FitWindow::ALL)?;
    Ok(AdeReport {
        levels,
        min_normalized,
        floor: p.floor,
        pass: min_normalized > p.floor,
        predicted_exponent: predicted,
        fit,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::affine::Ambient;
    use crate::constructions::{cantor_code_family, plane_subset_cantor};

    fn line(a: f64, b: f64) -> AffinePlane {
        AffinePlane::from_code(vec![a], vec![vec![b]], Ambient::new(2, 1).unwrap()).unwrap()
    }

    #[test]
    fn minimal_level_example() {
        assert_eq!(minimal_level(0.1, 0.2).unwrap(), 11);
        assert_close!(inverse_square_tail(11), 0.0952, 1e-4);
        assert_eq!(minimal_level(0.5, 0.01).unwrap(), 8);
    }

    #[test]
    fn radius_levels() {
        assert_eq!(radius_level(0.5), 2);
        assert_eq!(radius_level(0.3), 2);
        assert_eq!(radius_level(0.25), 3);
        assert_eq!(radius_level(0.0078125), 8);
        assert_eq!(radius_level(0.01), 7);
    }

    #[test]
    fn single_level_cover_selects_that_level() {
        let fam = WeightedFamily::uniform(vec![line(-0.2, 0.0), line(0.2, 0.0)], 1.0, 1, 0.0).unwrap();
        let clouds: Vec<PointCloud> = fam.planes().iter().map(|p| plane_subset_cantor(p, 1.0, 7).unwrap()).collect();
        let union = PointCloud::union(&clouds).unwrap();
        let cover = CoverSpec::grid(&union, 7, 0.2, 0.2).unwrap();
        assert_eq!(cover.m(), 6);
        assert!(cover.balls().iter().all(|b| b.radius > 0.5f64.powi(7) && b.radius <= 0.5f64.powi(6)));
        let sel = select_scale(&cover, &fam, &clouds, 1.0, 0.5).unwrap();
        assert_eq!(sel.l, 7);
        assert_eq!(sel.mass, 1.0);
        assert!(sel.keep.iter().all(|&k| k));
        assert!(sel.hypothesis_met);
    }

    #[test]
    fn tube_mass_is_linear() {
        let a = plane_subset_cantor(&line(-0.3, 0.0), 1.0, 6).unwrap();
        let b = plane_subset_cantor(&line(0.3, 0.0), 1.0, 6).unwrap();
        let single = WeightedFamily::uniform(vec![line(-0.3, 0.0)], 1.0, 1, 0.0).unwrap();
        let v = neighborhood_volume(&a, 0.05, 0.01).unwrap();
        assert_eq!(tube_mass(&single, std::slice::from_ref(&a), 0.05, 0.01).unwrap(), v);
        let two = WeightedFamily::uniform(vec![line(-0.3, 0.0), line(0.3, 0.0)], 1.0, 1, 0.0).unwrap();
        let vb = neighborhood_volume(&b, 0.05, 0.01).unwrap();
        assert_close!(tube_mass(&two, &[a, b], 0.05, 0.01).unwrap(), 0.5 * (v + vb), 1e-15);
    }

    #[test]
    fn separated_pairs_and_equality_case() {
        let fam = WeightedFamily::uniform(vec![line(-0.3, 0.0), line(0.3, 0.0)], 1.0, 1, 0.0).unwrap();
        let clouds: Vec<PointCloud> = fam.planes().iter().map(|p| plane_subset_cantor(p, 1.0, 6).unwrap()).collect();
        let pm = pairwise_mass(&fam, &clouds, 0.05, 0.01, 10_000, 1).unwrap();
        let v: Vec<f64> = clouds.iter().map(|c| neighborhood_volume(c, 0.05, 0.01).unwrap()).collect();
        assert_close!(pm.value, 0.25 * (v[0] + v[1]), 1e-15);
        assert_eq!((pm.certified_pairs, pm.stderr), (1, 0.0));
        let cs = cauchy_schwarz_report(&fam, &clouds, 0.05, 0.01, 10_000, 1, 0.0).unwrap();
        assert!(cs.ok);
        assert_close!(cs.lhs, cs.f_vol * cs.pair_mass, 1e-12 * cs.lhs);

        let one = WeightedFamily::uniform(vec![line(0.0, 0.3)], 1.0, 1, 0.0).unwrap();
        let c = vec![plane_subset_cantor(&line(0.0, 0.3), 1.0, 6).unwrap()];
        let cs = cauchy_schwarz_report(&one, &c, 0.05, 0.01, 1000, 1, 0.0).unwrap();
        assert!(cs.ok);
        assert_close!(cs.pair_mass, cs.f_vol, 1e-15);
    }

    #[test]
    fn overlapping_pair_is_sampled() {
        let fam = WeightedFamily::uniform(vec![line(0.0, 0.0), line(0.02, 0.1)], 1.0, 1, 0.0).unwrap();
        let clouds: Vec<PointCloud> = fam.planes().iter().map(|p| plane_subset_cantor(p, 1.0, 7).unwrap()).collect();
        let cs = cauchy_schwarz_report(&fam, &clouds, 0.05, 0.0125, 200_000, 5, 3.0).unwrap();
        assert_eq!(pairwise_mass(&fam, &clouds, 0.05, 0.0125, 1000, 5).unwrap().sampled_pairs, 1);
        assert!(cs.ok, "{cs:?}");
        // overlap of the two strips: integral of (2 delta - 0.02 - 0.1 x)^+ over [0, 1]
        let v: Vec<f64> = clouds.iter().map(|c| neighborhood_volume(c, 0.05, 0.0125).unwrap()).collect();
        let cross = 2.0 * (cs.pair_mass - 0.25 * (v[0] + v[1]));
        assert!((0.030..0.040).contains(&cross), "{cross}");
    }

    #[test]
    fn shell_brackets() {
        let delta = 1.0 / 32.0;
        assert_eq!(shell_index(0.3, delta), 4);
        assert_eq!(shell_index(delta, delta), 0);
        assert_eq!(shell_index(2.0 * delta, delta), 1);
        let fam = WeightedFamily::uniform(vec![line(0.0, 0.0), line(0.3, 0.0)], 1.0, 1, 0.0).unwrap();
        let w = DomainBox::new(Ambient::new(2, 1).unwrap(), 0.2).unwrap();
        let d = shell_decomposition(&fam, &line(0.0, 0.0), delta, &w, 2.0, 1.0, 1000, 0).unwrap();
        let js: Vec<u32> = d.shells.iter().map(|s| s.j).collect();
        assert_eq!(js, vec![0, 4]);
        assert_eq!(d.total_mass, 1.0);
    }

    #[test]
    fn shells_of_dyadic_family() {
        let fam = cantor_code_family(1.0, 0, 6, Ambient::new(2, 1).unwrap()).unwrap();
        let w = DomainBox::new(Ambient::new(2, 1).unwrap(), 0.2).unwrap();
        let delta = 1.0 / 64.0;
        let d = shell_decomposition(&fam, &fam.planes()[0], delta, &w, 2.0, 1.0, 20_000, 3).unwrap();
        assert_eq!(d.total_mass, 1.0);
        assert!(d.shells.iter().all(|s| s.frostman_ok));
        assert!(d.geometric_sum <= d.shells.len() as f64);
        for s in &d.shells {
            assert!(s.intersection_mass <= 4.0 * s.per_shell_bound + 3.0 * s.intersection_stderr, "{s:?}");
        }
    }
}
