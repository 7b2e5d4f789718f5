use rand::Rng;
use serde::{Deserialize, Serialize};
use serde_json::json;

use super::config::{validate_config, RunConfig};
use super::report::{Check, Report, SeriesRecord};
use crate::affine::{AffinePlane, Ambient, DomainBox};
use crate::constructions::{
    distance_r_set, frostman_constant, furstenberg_cloud, lattice_centers, scaled_axis_parallel_counterexample,
    skeleton_union_cloud, DistanceBase, DistanceFamilySpec,
};
use crate::dimension::{
    box_count_series, dimension_fit, dyadic_scales, FitResult, FitWindow, PointCloud,
    ScaleSeries, SeriesKind,
};
use crate::error::{Error, Result};
use crate::fixtures::FixtureData;
use crate::l2::{
    ade_check, cauchy_schwarz_report, minimal_level, pairwise_mass, select_scale, shell_decomposition,
    AdeParams, CoverSpec,
};
use crate::mc::{derive_seed, rng_for, McEstimate};
use crate::tube::{gengeo_ratio, intersection_volume, separation_test, strip_bound, SamplingDomain, SlopeBound};

/// Registered experiment names.
pub const EXPERIMENTS: [&str; 7] = [
    "geometry-suite",
    "sharpness",
    "furstenberg",
    "skeleton",
    "distance-r",
    "counterexample",
    "l2-suite",
];

/// Empirical cap on the Frostman constant of shipped families.
pub const FROSTMAN_CAP: f64 = 8.0;

const PAIR_POPULATION_STREAM: u64 = 0x6e0;
const PAIR_MC_STREAM: u64 = 0x6e1;
const GENGEO_STREAM: u64 = 0x6e2;
const MAX_POINTS: f64 = 5.0e7;

/// Validates the configuration and runs the named experiment.
pub fn run_experiment(name: &str, config: &RunConfig) -> Result<Report> {
    if !EXPERIMENTS.contains(&name) {
        return Err(Error::Invalid(format!(
            "unknown experiment {name:?}; expected one of {}",
            EXPERIMENTS.join(", ")
        )));
    }
    let violations = validate_config(config);
    if !violations.is_empty() {
        let list: Vec<String> = violations.iter().map(ToString::to_string).collect();
        return Err(Error::Invalid(format!("invalid config: {}", list.join("; "))));
    }
    match name {
        "geometry-suite" => geometry_suite(config),
        "sharpness" => sharpness(config),
        "furstenberg" => furstenberg(config),
        "skeleton" => skeleton(config),
        "distance-r" => distance_r(config),
        "counterexample" => counterexample(config),
        _ => l2_suite(config),
    }
}

/// Box-count series at every dyadic scale above the generation scale, fitted
/// over `window` (default: [`FitWindow::for_cloud`]).
pub fn fit_cloud(cloud: &PointCloud, window: Option<FitWindow>) -> Result<(ScaleSeries, FitResult)> {
    let finest = (1.0 / cloud.gen_scale()).log2().ceil() as i32;
    let scales: Vec<f64> = dyadic_scales(1, finest.max(1))
        .into_iter()
        .filter(|&e| e >= cloud.gen_scale())
        .collect();
    let series = box_count_series(cloud, &scales)?;
    let fit = dimension_fit(&series, window.unwrap_or_else(|| FitWindow::for_cloud(cloud)))?;
    Ok((series, fit))
}

/// Random plane pair at a random dyadic scale.
#[derive(Debug, Clone, PartialEq)]
pub struct PlanePair {
    pub p: AffinePlane,
    pub q: AffinePlane,
    pub delta: f64,
}

/// `count` pairs with intercepts uniform in `[-1/2, 1/2]`, slopes uniform in
/// `[-1, 1]` and `delta = 2^-j` for `j` uniform in `exp_lo..=exp_hi`.
pub fn pair_population(amb: Ambient, count: usize, exp_lo: i32, exp_hi: i32, seed: u64) -> Result<Vec<PlanePair>> {
    let mut rng = rng_for(seed, PAIR_POPULATION_STREAM, 0);
    let m = amb.codim();
    let plane = |rng: &mut crate::mc::McRng| {
        let a = (0..m).map(|_| rng.random_range(-0.5..0.5)).collect();
        let b = (0..amb.k()).map(|_| (0..m).map(|_| rng.random_range(-1.0..=1.0)).collect()).collect();
        AffinePlane::from_code(a, b, amb)
    };
    (0..count)
        .map(|_| {
            let p = plane(&mut rng)?;
            let q = plane(&mut rng)?;
            let delta = 0.5f64.powi(rng.random_range(exp_lo..=exp_hi));
            Ok(PlanePair { p, q, delta })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairOutcome {
    pub separated: bool,
    pub volume: McEstimate,
    /// `None` for parallel planes.
    pub strip_bound: Option<f64>,
}

impl PairOutcome {
    /// A certified-separated pair whose tubes were nevertheless hit.
    pub fn separation_violated(&self) -> bool {
        self.separated && self.volume.hits > 0
    }

    pub fn strip_violated(&self) -> bool {
        self.strip_bound
            .is_some_and(|b| self.volume.estimate - 3.0 * self.volume.stderr > b)
    }
}

/// Slab-sampled joint hit count of the pair with the separation and strip
/// bounds at slope bound 1. Separated pairs use `separated_samples`.
pub fn check_pair(
    pair: &PlanePair,
    window: &DomainBox,
    samples: u64,
    separated_samples: u64,
    seed: u64,
) -> Result<PairOutcome> {
    let sb = SlopeBound::new(window.ambient(), 1.0)?;
    let separated = separation_test(&pair.p, &pair.q, pair.delta, &sb)?;
    let n = if separated { separated_samples } else { samples };
    let volume = intersection_volume(&pair.p, &pair.q, pair.delta, window, SamplingDomain::Slab, n, seed)?;
    let strip_bound = match strip_bound(&pair.p, &pair.q, pair.delta, &sb) {
        Ok(b) => Some(b),
        Err(Error::ParallelPlanes) => None,
        Err(e) => return Err(e),
    };
    Ok(PairOutcome {
        separated,
        volume,
        strip_bound,
    })
}

/// Maximum over the probed pairs of the gengeo ratio at each scale; pairs
/// are the pivot with itself and with up to `probes` other planes.
pub fn gengeo_profile(
    planes: &[AffinePlane],
    deltas: &[f64],
    window: &DomainBox,
    probes: usize,
    samples: u64,
    seed: u64,
) -> Result<Vec<f64>> {
    let step = (planes.len() / probes.max(1)).max(1);
    deltas
        .iter()
        .enumerate()
        .map(|(di, &d)| {
            let mut best: f64 = 0.0;
            for qi in (0..planes.len()).step_by(step) {
                let sd = derive_seed(seed, GENGEO_STREAM, (di * planes.len() + qi) as u64);
                best = best.max(gengeo_ratio(&planes[0], &planes[qi], d, window, samples, sd)?.ratio);
            }
            Ok(best)
        })
        .collect()
}

pub fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let m = v.len();
    if m == 0 {
        f64::NAN
    } else if m % 2 == 1 {
        v[m / 2]
    } else {
        0.5 * (v[m / 2 - 1] + v[m / 2])
    }
}

/// Gengeo ratio of two lines crossing at angle `theta` whose strips'
/// rhombus lies inside the sampled slab: `4 (d + delta) / sin(theta)`.
pub fn crossing_lines_ratio(p: &AffinePlane, q: &AffinePlane, delta: f64) -> Result<f64> {
    let (b1, b2) = (p.slopes()[0][0], q.slopes()[0][0]);
    let sin = (b1 - b2).abs() / ((1.0 + b1 * b1).sqrt() * (1.0 + b2 * b2).sqrt());
    Ok(4.0 * (p.code_metric(q)? + delta) / sin)
}

fn geometry_suite(c: &RunConfig) -> Result<Report> {
    let amb = Ambient::new(c.n, c.k)?;
    let window = DomainBox::new(amb, c.delta0)?;
    let pairs = pair_population(amb, c.pairs, c.delta_exp_lo, c.delta_exp_hi, c.seed)?;
    let mut separated = 0;
    let mut sep_bad = 0;
    let mut strip_tested = 0;
    let mut strip_bad = 0;
    for (i, pair) in pairs.iter().enumerate() {
        let o = check_pair(pair, &window, c.samples, c.samples, derive_seed(c.seed, PAIR_MC_STREAM, i as u64))?;
        separated += usize::from(o.separated);
        sep_bad += usize::from(o.separation_violated());
        strip_tested += usize::from(o.strip_bound.is_some());
        strip_bad += usize::from(o.strip_violated());
    }

    let data = FixtureData::sharpness(c.k, c.n, c.s, c.k as f64, c.depth, 1)?;
    let deltas = c.deltas();
    let profile = gengeo_profile(data.family.planes(), &deltas, &window, 16, c.samples, c.seed)?;
    let worst = profile.iter().copied().fold(0.0, f64::max);
    let med = median(&profile);

    let mut checks = vec![
        Check::at_most("separation soundness: hits in certified-separated pairs", sep_bad as f64, 0.0),
        Check::at_most("strip-bound dominance: violations", strip_bad as f64, 0.0),
        Check::at_most("gengeo boundedness: max / median over scales", worst / med, c.gengeo_cap),
    ];
    let mut oracle = serde_json::Value::Null;
    if (c.n, c.k) == (2, 1) {
        let p = AffinePlane::from_code(vec![-0.25], vec![vec![0.5]], amb)?;
        let q = AffinePlane::from_code(vec![0.25], vec![vec![-0.5]], amb)?;
        let d = c.delta_min();
        let est = gengeo_ratio(&p, &q, d, &window, c.samples.max(100_000), c.seed)?;
        let exact = crossing_lines_ratio(&p, &q, d)?;
        checks.push(Check::near("crossing lines: gengeo ratio vs parallelogram formula", est.ratio, exact, 0.1 * exact));
        oracle = json!({"delta": d, "estimate": est.ratio, "exact": exact});
    }
    let gengeo_series = ScaleSeries::new(deltas.iter().copied().zip(profile.iter().copied()).collect(), SeriesKind::TubeMass);
    let series = match gengeo_series {
        Ok(s) => vec![SeriesRecord::new("gengeo_max", &s)],
        Err(_) => Vec::new(),
    };
    let data = json!({
        "pairs": pairs.len(),
        "separated_pairs": separated,
        "strip_tested_pairs": strip_tested,
        "gengeo_max_per_delta": profile,
        "gengeo_median": med,
        "crossing_lines": oracle,
    });
    Ok(Report::new("geometry-suite", c, checks, series, data))
}

fn sharpness(c: &RunConfig) -> Result<Report> {
    let data = FixtureData::sharpness(c.k, c.n, c.s, c.k as f64, c.depth, c.cloud_depth)?;
    let (series, fit) = fit_cloud(&data.union, None)?;
    let target = c.k as f64 + c.s;
    let frost = frostman_constant(&data.family, c.s)?;
    let checks = vec![
        Check::near("union dimension equals k + s", fit.exponent, target, c.dim_tol),
        Check::at_most("frostman constant", frost.constant, FROSTMAN_CAP),
    ];
    let report_data = json!({
        "planes": data.family.len(),
        "points": data.union.len(),
        "fit": fit,
        "target": target,
        "upper_bound": target + c.dim_tol,
        "frostman": frost,
    });
    Ok(Report::new("sharpness", c, checks, vec![SeriesRecord::new("box_counts", &series)], report_data))
}

fn require_ambient(c: &RunConfig, n: usize, k: usize, what: &str) -> Result<()> {
    if (c.n, c.k) == (n, k) {
        Ok(())
    } else {
        Err(Error::Invalid(format!("{what} needs n = {n}, k = {k}")))
    }
}

fn furstenberg(c: &RunConfig) -> Result<Report> {
    require_ambient(c, 2, 1, "furstenberg")?;
    let set = furstenberg_cloud(c.alpha, c.s, c.depth)?;
    let (series, fit) = fit_cloud(&set.cloud, None)?;
    let bound = 2.0 * c.alpha - 1.0 + c.s;
    let frost = frostman_constant(&set.family, c.s)?;
    let checks = vec![
        Check::at_least("union dimension at least 2 alpha - 1 + s", fit.exponent, bound - c.dim_tol),
        Check::at_most("frostman constant", frost.constant, FROSTMAN_CAP),
    ];
    let data = json!({
        "lines": set.family.len(),
        "points": set.cloud.len(),
        "fit": fit,
        "lower_bound": bound,
        "frostman": frost,
    });
    Ok(Report::new("furstenberg", c, checks, vec![SeriesRecord::new("box_counts", &series)], data))
}

fn skeleton(c: &RunConfig) -> Result<Report> {
    let centers = lattice_centers(c.n, c.centers)?;
    let pts = (c.centers as f64).powi(c.n as i32) * 2f64.powi(c.cloud_depth as i32) * 2f64.powi(c.n as i32) * c.n as f64;
    guard_points(pts)?;
    let cloud = skeleton_union_cloud(c.k, c.n, &centers, c.seed, c.cloud_depth)?;
    let (series, fit) = fit_cloud(&cloud, None)?;
    let bound = c.k as f64 + 1.0;
    let checks = vec![Check::at_least("union dimension at least k + 1", fit.exponent, bound - c.dim_tol)];
    let data = json!({"centers": centers.len(), "points": cloud.len(), "fit": fit, "lower_bound": bound});
    Ok(Report::new("skeleton", c, checks, vec![SeriesRecord::new("box_counts", &series)], data))
}

fn distance_r(c: &RunConfig) -> Result<Report> {
    let target = c.n as f64 - 1.0;
    let plane = AffinePlane::from_code(vec![0.0; c.n - c.k], vec![vec![0.0; c.n - c.k]; c.k], Ambient::new(c.n, c.k)?)?;
    let mut checks = Vec::new();
    let mut series = Vec::new();
    let mut fits = Vec::new();
    for (name, base) in [("point", DistanceBase::Point(vec![0.0; c.n])), ("plane", DistanceBase::Plane(plane))] {
        let cloud = distance_r_set(&DistanceFamilySpec {
            base,
            r: c.radius,
            depth: c.cloud_depth,
        })?;
        let (s, fit) = fit_cloud(&cloud, None)?;
        checks.push(Check::near(format!("{name} base: dimension equals n - 1"), fit.exponent, target, c.dim_tol));
        series.push(SeriesRecord::new(format!("box_counts_{name}"), &s));
        fits.push(json!({"base": name, "points": cloud.len(), "fit": fit}));
    }
    Ok(Report::new("distance-r", c, checks, series, json!({"target": target, "sets": fits})))
}

fn counterexample(c: &RunConfig) -> Result<Report> {
    let rationals = crate::constructions::farey(1u64 << c.depth.min(20)).len() as f64;
    let pts = 2f64.powi(c.cloud_depth as i32).powi(c.k as i32 + 1) * rationals.powi((c.n - c.k - 1) as i32);
    guard_points(pts)?;
    let ce = scaled_axis_parallel_counterexample(c.n, c.k, c.depth, c.cloud_depth)?;
    let (series, fit) = fit_cloud(&ce.cloud, Some(ce.fit_window()))?;
    let target = c.k as f64 + 1.0;
    let checks = vec![Check::near("dimension equals k + 1", fit.exponent, target, c.dim_tol)];
    let data = json!({"points": ce.cloud.len(), "min_gap": ce.min_gap, "fit": fit, "target": target});
    Ok(Report::new("counterexample", c, checks, vec![SeriesRecord::new("box_counts", &series)], data))
}

fn guard_points(estimate: f64) -> Result<()> {
    if estimate > MAX_POINTS {
        Err(Error::Invalid(format!("construction would have about {estimate:.3e} points")))
    } else {
        Ok(())
    }
}

fn l2_suite(c: &RunConfig) -> Result<Report> {
    let data = FixtureData::sharpness(c.k, c.n, c.s, c.alpha, c.depth, c.cloud_depth)?;
    let window = DomainBox::new(Ambient::new(c.n, c.k)?, c.delta0)?;
    let deltas = c.deltas();
    let mut checks = Vec::new();

    let frost = frostman_constant(&data.family, c.s)?;
    checks.push(Check::at_most("frostman constant", frost.constant, FROSTMAN_CAP));

    let m = minimal_level(c.eps, c.delta0)?;
    let cover = CoverSpec::grid(&data.union, m, c.eps, c.delta0)?;
    let selection = select_scale(&cover, &data.family, &data.clouds, c.alpha, c.eps);
    let (l, selection_json) = match &selection {
        Ok(sel) => (sel.l, json!({"l": sel.l, "m": sel.m, "mass": sel.mass, "kept": sel.family.len(), "hypothesis_met": sel.hypothesis_met})),
        Err(e) => (m, json!({"error": e.to_string()})),
    };
    checks.push(Check::holds("scale selection finds a level", selection.is_ok()));

    let mut tube = Vec::new();
    let mut fvol = Vec::new();
    let mut pair = Vec::new();
    let mut cs_json = Vec::new();
    for (i, &d) in deltas.iter().enumerate() {
        let seed = derive_seed(c.seed, 0x12, i as u64);
        let cs = cauchy_schwarz_report(&data.family, &data.clouds, d, c.grid_res, c.samples, seed, c.cs_tolerance)?;
        checks.push(Check::at_most(
            format!("cauchy-schwarz at delta = {d}"),
            cs.lhs,
            cs.f_vol * (cs.pair_mass + c.cs_tolerance * cs.pair_stderr),
        ));
        tube.push((d, cs.tube_mass));
        fvol.push((d, cs.f_vol));
        pair.push((d, cs.pair_mass));
        cs_json.push(cs);
    }
    let pair_series = ScaleSeries::new(pair, SeriesKind::PairMass)?;
    let pair_fit = dimension_fit(&pair_series, FitWindow::ALL)?;
    let pair_target = (c.n - c.k) as f64 + c.s;
    checks.push(Check::at_least("pair mass exponent", pair_fit.exponent, pair_target - c.dim_tol));

    let d = c.delta_min();
    let shells = shell_decomposition(&data.family, &data.family.planes()[0], d, &window, frost.constant, c.s, c.samples, c.seed)?;
    let shell_excess = shells
        .shells
        .iter()
        .map(|sh| (sh.intersection_mass - 3.0 * sh.intersection_stderr) / sh.per_shell_bound)
        .fold(0.0, f64::max);
    checks.push(Check::at_most("shell overlap / per-shell bound", shell_excess, c.shell_cap));
    checks.push(Check::holds("shell masses within frostman bound", shells.shells.iter().all(|s| s.frostman_ok)));

    let ade = ade_check(
        &data.clouds,
        &deltas,
        &window,
        &data.region,
        &AdeParams {
            alpha: c.alpha,
            s: c.s,
            l,
            grid_div: (c.delta_min() / c.grid_res).max(1.0),
            floor: c.ade_floor,
        },
    )?;
    checks.push(Check::at_least("ade normalised volume floor", ade.min_normalized, c.ade_floor));
    checks.push(Check::near("ade volume exponent", ade.fit.exponent, ade.predicted_exponent, c.dim_tol));

    let series = vec![
        SeriesRecord::new("tube_mass", &ScaleSeries::new(tube, SeriesKind::TubeMass)?),
        SeriesRecord::new("f_vol", &ScaleSeries::new(fvol, SeriesKind::NeighborhoodVolume)?),
        SeriesRecord::new("pair_mass", &pair_series),
    ];
    let report_data = json!({
        "m": m,
        "selection": selection_json,
        "frostman": frost,
        "cauchy_schwarz": cs_json,
        "pair_fit": pair_fit,
        "pair_target": pair_target,
        "shells": shells,
        "ade": ade,
        "u": c.u(),
        "gamma": c.gamma,
    });
    Ok(Report::new("l2-suite", c, checks, series, report_data))
}

/// Pair mass of the family at each scale, for callers that only need the
/// exponent.
pub fn pair_mass_series(data: &FixtureData, deltas: &[f64], grid_div: f64, samples: u64, seed: u64) -> Result<ScaleSeries> {
    let entries = deltas
        .iter()
        .enumerate()
        .map(|(i, &d)| {
            let pm = pairwise_mass(&data.family, &data.clouds, d, d / grid_div, samples, derive_seed(seed, 0x12, i as u64))?;
            Ok((d, pm.value))
        })
        .collect::<Result<Vec<_>>>()?;
    ScaleSeries::new(entries, SeriesKind::PairMass)
}
