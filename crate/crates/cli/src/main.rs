mod args;

use std::fs::{self, File};
use std::io::{BufReader, BufWriter};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use affunion::constructions::{
    cantor_code_family, distance_r_set, frostman_constant, furstenberg_cloud, lattice_centers,
    scaled_axis_parallel_counterexample, skeleton_union_cloud, DistanceBase, DistanceFamilySpec,
};
use affunion::dimension::{
    default_content_levels, dimension_fit, dyadic_scales, hausdorff_content, neighborhood_volume, FitWindow,
};
use affunion::fixtures::FixtureData;
use affunion::io::{read_cloud_csv, read_family_csv, write_cloud_csv, write_family_csv, write_series_csv};
use affunion::l2::{
    ade_check, cauchy_schwarz_report, minimal_level, select_scale, shell_decomposition, AdeParams, CoverSpec,
};
use affunion::mc::derive_seed;
use affunion::runner::{
    check_pair, fit_cloud, run_and_write, validate_config, PlanePair, RunConfig, EXPERIMENTS,
};
use affunion::{gengeo_ratio, AffinePlane, Ambient, DomainBox, PointCloud, ScaleSeries, SeriesKind, WeightedFamily};
use anyhow::{bail, Context};
use args::ConfigArgs;
use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

#[derive(Parser)]
#[command(name = "affunion", version, about = "Unions of affine planes: constructions, tube geometry and dimension estimates")]
struct Cli {
    /// Worker threads (default: all cores). Results do not depend on it.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build a family and/or point cloud and write them as CSV.
    Construct {
        kind: ConstructKind,
        /// Output directory for cloud.csv and family.csv.
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        cfg: ConfigArgs,
    },
    /// Separation, strip-bound and gengeo checks over the pairs of a family.
    VerifyGeometry {
        #[arg(long)]
        family: PathBuf,
        #[arg(long)]
        delta: Option<f64>,
        #[arg(long, default_value_t = 200)]
        max_pairs: usize,
        #[command(flatten)]
        cfg: ConfigArgs,
    },
    /// Fitted dimension of a point cloud.
    EstimateDim {
        #[arg(long)]
        cloud: PathBuf,
        #[arg(long)]
        gen_scale: Option<f64>,
        #[arg(long, value_enum, default_value_t = Method::Box)]
        method: Method,
        /// Content exponent for `--method content`.
        #[arg(long, default_value_t = 1.0)]
        alpha: f64,
        /// Coarsest dyadic exponent.
        #[arg(long, default_value_t = 1)]
        lo: i32,
        /// Finest dyadic exponent (default: down to the generation scale).
        #[arg(long)]
        hi: Option<i32>,
        /// Write the scale series here.
        #[arg(long)]
        series_out: Option<PathBuf>,
    },
    /// The L^2 chain on a family with one cloud per plane.
    L2Report {
        #[arg(long)]
        family: PathBuf,
        #[arg(long, num_args = 1.., required = true)]
        clouds: Vec<PathBuf>,
        #[arg(long, default_value_t = 1)]
        pivots: usize,
        #[command(flatten)]
        cfg: ConfigArgs,
    },
    /// Run a registered experiment and write its report directory.
    Run {
        name: String,
        #[command(flatten)]
        cfg: ConfigArgs,
    },
    /// Print configuration violations (nothing when valid).
    ValidateConfig {
        #[command(flatten)]
        cfg: ConfigArgs,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum ConstructKind {
    Sharpness,
    Furstenberg,
    Skeleton,
    DistanceR,
    Counterexample,
    CantorFamily,
}

#[derive(Clone, Copy, PartialEq, ValueEnum)]
enum Method {
    Box,
    Volume,
    Content,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(t) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(t).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    match dispatch(cli.command) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn print_json(v: &Value) {
    println!("{}", serde_json::to_string_pretty(v).expect("json"));
}

fn dispatch(cmd: Command) -> anyhow::Result<bool> {
    match cmd {
        Command::Construct { kind, out, cfg } => construct(kind, &out, &cfg.resolve()?),
        Command::VerifyGeometry {
            family,
            delta,
            max_pairs,
            cfg,
        } => verify_geometry(&family, delta, max_pairs, &cfg.resolve()?),
        Command::EstimateDim {
            cloud,
            gen_scale,
            method,
            alpha,
            lo,
            hi,
            series_out,
        } => estimate_dim(&cloud, gen_scale, method, alpha, lo, hi, series_out.as_deref()),
        Command::L2Report {
            family,
            clouds,
            pivots,
            cfg,
        } => l2_report(&family, &clouds, pivots, &cfg.resolve()?),
        Command::Run { name, cfg } => run(&name, &cfg.resolve()?),
        Command::ValidateConfig { cfg } => {
            let v = validate_config(&cfg.resolve()?);
            for violation in &v {
                println!("{violation}");
            }
            Ok(v.is_empty())
        }
    }
}

fn ensure_valid(cfg: &RunConfig) -> anyhow::Result<()> {
    let v = validate_config(cfg);
    if v.is_empty() {
        return Ok(());
    }
    let list: Vec<String> = v.iter().map(ToString::to_string).collect();
    bail!("invalid config: {}", list.join("; "))
}

fn create(path: &Path) -> anyhow::Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path).with_context(|| path.display().to_string())?))
}

fn open(path: &Path) -> anyhow::Result<BufReader<File>> {
    Ok(BufReader::new(File::open(path).with_context(|| path.display().to_string())?))
}

fn construct(kind: ConstructKind, out: &Path, cfg: &RunConfig) -> anyhow::Result<bool> {
    ensure_valid(cfg)?;
    fs::create_dir_all(out).with_context(|| out.display().to_string())?;
    let amb = Ambient::new(cfg.n, cfg.k)?;
    let (family, cloud): (Option<WeightedFamily>, Option<PointCloud>) = match kind {
        ConstructKind::Sharpness => {
            let data = FixtureData::sharpness(cfg.k, cfg.n, cfg.s, cfg.alpha, cfg.depth, cfg.cloud_depth)?;
            let dir = out.join("clouds");
            fs::create_dir_all(&dir).with_context(|| dir.display().to_string())?;
            for (i, c) in data.clouds.iter().enumerate() {
                write_cloud_csv(create(&dir.join(format!("plane-{i:04}.csv")))?, c)?;
            }
            (Some(data.family), Some(data.union))
        }
        ConstructKind::Furstenberg => {
            let set = furstenberg_cloud(cfg.alpha, cfg.s, cfg.depth)?;
            (Some(set.family), Some(set.cloud))
        }
        ConstructKind::Skeleton => {
            let centers = lattice_centers(cfg.n, cfg.centers)?;
            (None, Some(skeleton_union_cloud(cfg.k, cfg.n, &centers, cfg.seed, cfg.cloud_depth)?))
        }
        ConstructKind::DistanceR => {
            let plane = AffinePlane::from_code(vec![0.0; amb.codim()], vec![vec![0.0; amb.codim()]; cfg.k], amb)?;
            let spec = DistanceFamilySpec {
                base: DistanceBase::Plane(plane),
                r: cfg.radius,
                depth: cfg.cloud_depth,
            };
            (None, Some(distance_r_set(&spec)?))
        }
        ConstructKind::Counterexample => {
            let ce = scaled_axis_parallel_counterexample(cfg.n, cfg.k, cfg.depth, cfg.cloud_depth)?;
            (None, Some(ce.cloud))
        }
        ConstructKind::CantorFamily => (Some(cantor_code_family(cfg.s, 0, cfg.depth, amb)?), None),
    };
    let mut summary = serde_json::Map::new();
    if let Some(f) = &family {
        let path = out.join("family.csv");
        write_family_csv(create(&path)?, f)?;
        summary.insert("family".into(), json!({"path": path, "planes": f.len()}));
        summary.insert("frostman".into(), serde_json::to_value(frostman_constant(f, cfg.s)?)?);
    }
    if let Some(c) = &cloud {
        let path = out.join("cloud.csv");
        write_cloud_csv(create(&path)?, c)?;
        summary.insert("cloud".into(), json!({"path": path, "points": c.len(), "gen_scale": c.gen_scale()}));
    }
    print_json(&Value::Object(summary));
    Ok(true)
}

fn load_family(path: &Path, cfg: &RunConfig) -> anyhow::Result<WeightedFamily> {
    let (planes, weights) = read_family_csv(open(path)?)?;
    Ok(WeightedFamily::new(planes, weights, cfg.s, cfg.depth, 0.0)?)
}

fn verify_geometry(path: &Path, delta: Option<f64>, max_pairs: usize, cfg: &RunConfig) -> anyhow::Result<bool> {
    let family = load_family(path, cfg)?;
    let window = DomainBox::new(family.ambient(), cfg.delta0)?;
    let delta = delta.unwrap_or_else(|| cfg.delta_min());
    let planes = family.planes();
    let mut records = Vec::new();
    let (mut sep_bad, mut strip_bad) = (0, 0);
    'outer: for i in 0..planes.len() {
        for j in i + 1..planes.len() {
            if records.len() >= max_pairs {
                break 'outer;
            }
            let pair = PlanePair {
                p: planes[i].clone(),
                q: planes[j].clone(),
                delta,
            };
            let seed = derive_seed(cfg.seed, 0x7e, records.len() as u64);
            let o = check_pair(&pair, &window, cfg.samples, cfg.samples, seed)?;
            let g = gengeo_ratio(&pair.p, &pair.q, delta, &window, cfg.samples, seed)?;
            sep_bad += usize::from(o.separation_violated());
            strip_bad += usize::from(o.strip_violated());
            records.push(json!({
                "i": i,
                "j": j,
                "separated": o.separated,
                "volume": o.volume.estimate,
                "stderr": o.volume.stderr,
                "strip_bound": o.strip_bound,
                "gengeo_ratio": g.ratio,
                "code_distance": g.code_distance,
            }));
        }
    }
    print_json(&json!({
        "delta": delta,
        "pairs": records,
        "separation_violations": sep_bad,
        "strip_violations": strip_bad,
    }));
    Ok(sep_bad == 0 && strip_bad == 0)
}

fn estimate_dim(
    path: &Path,
    gen_scale: Option<f64>,
    method: Method,
    alpha: f64,
    lo: i32,
    hi: Option<i32>,
    series_out: Option<&Path>,
) -> anyhow::Result<bool> {
    let cloud = read_cloud_csv(open(path)?, gen_scale)?;
    if method == Method::Content {
        let h = hausdorff_content(&cloud, alpha, default_content_levels(&cloud))?;
        print_json(&json!({"points": cloud.len(), "alpha": alpha, "content": h}));
        return Ok(true);
    }
    let (series, fit) = match (method, hi) {
        (Method::Box, None) => fit_cloud(&cloud, None)?,
        (Method::Box, Some(hi)) => {
            let series = affunion::dimension::box_count_series(&cloud, &dyadic_scales(lo, hi))?;
            let fit = dimension_fit(&series, FitWindow::for_cloud(&cloud))?;
            (series, fit)
        }
        _ => {
            let finest = hi.unwrap_or(((1.0 / cloud.gen_scale()).log2().floor() as i32 - 2).max(lo + 2));
            let entries = dyadic_scales(lo, finest)
                .into_iter()
                .map(|d| Ok((d, neighborhood_volume(&cloud, d, d / 4.0)?)))
                .collect::<affunion::Result<Vec<_>>>()?;
            let series = ScaleSeries::new(entries, SeriesKind::NeighborhoodVolume)?;
            let fit = dimension_fit(&series, FitWindow::ALL)?;
            (series, fit)
        }
    };
    if let Some(p) = series_out {
        write_series_csv(create(p)?, &series)?;
    }
    let dimension = match method {
        Method::Volume => cloud.dim() as f64 - fit.exponent,
        _ => fit.exponent,
    };
    print_json(&json!({
        "points": cloud.len(),
        "gen_scale": cloud.gen_scale(),
        "kind": series.kind().as_str(),
        "fit": fit,
        "dimension": dimension,
    }));
    Ok(true)
}

fn l2_report(family_path: &Path, cloud_paths: &[PathBuf], pivots: usize, cfg: &RunConfig) -> anyhow::Result<bool> {
    ensure_valid(cfg)?;
    let family = load_family(family_path, cfg)?;
    if cloud_paths.len() != family.len() {
        bail!("{} clouds given for {} planes", cloud_paths.len(), family.len());
    }
    let clouds = cloud_paths
        .iter()
        .map(|p| Ok(read_cloud_csv(open(p)?, None)?))
        .collect::<anyhow::Result<Vec<_>>>()?;
    let window = DomainBox::new(family.ambient(), cfg.delta0)?;
    let union = PointCloud::union(&clouds)?;
    let m = minimal_level(cfg.eps, cfg.delta0)?;
    let cover = CoverSpec::grid(&union, m, cfg.eps, cfg.delta0)?;
    let selection = select_scale(&cover, &family, &clouds, cfg.alpha, cfg.eps);
    let (l, mu_tilde, selection_error) = match &selection {
        Ok(s) => (s.l, s.mass, None),
        Err(e) => (m, 0.0, Some(e.to_string())),
    };

    let deltas = cfg.deltas();
    let mut per_delta = Vec::new();
    let (mut tube, mut fvol, mut pair) = (Vec::new(), Vec::new(), Vec::new());
    let mut cs_ok = true;
    for (i, &d) in deltas.iter().enumerate() {
        let seed = derive_seed(cfg.seed, 0x12, i as u64);
        let cs = cauchy_schwarz_report(&family, &clouds, d, cfg.grid_res, cfg.samples, seed, cfg.cs_tolerance)?;
        cs_ok &= cs.ok;
        tube.push((d, cs.tube_mass));
        fvol.push((d, cs.f_vol));
        pair.push((d, cs.pair_mass));
        per_delta.push(cs);
    }
    let frost = frostman_constant(&family, cfg.s)?;
    let shells = family
        .planes()
        .iter()
        .take(pivots.max(1))
        .enumerate()
        .map(|(i, p)| {
            shell_decomposition(
                &family,
                p,
                cfg.delta_min(),
                &window,
                frost.constant,
                cfg.s,
                cfg.samples,
                derive_seed(cfg.seed, 0x5e, i as u64),
            )
        })
        .collect::<affunion::Result<Vec<_>>>()?;
    let ade = ade_check(
        &clouds,
        &deltas,
        &window,
        &window,
        &AdeParams {
            alpha: cfg.alpha,
            s: cfg.s,
            l,
            grid_div: (cfg.delta_min() / cfg.grid_res).max(1.0),
            floor: cfg.ade_floor,
        },
    )?;
    let fit = |entries: Vec<(f64, f64)>, kind| -> anyhow::Result<Value> {
        Ok(serde_json::to_value(dimension_fit(&ScaleSeries::new(entries, kind)?, FitWindow::ALL)?)?)
    };
    print_json(&json!({
        "l": l,
        "M": m,
        "mu_tilde": mu_tilde,
        "selection_error": selection_error,
        "deltas": deltas,
        "tube_mass": tube.iter().map(|e| e.1).collect::<Vec<_>>(),
        "pair_mass": pair.iter().map(|e| e.1).collect::<Vec<_>>(),
        "F_vol": fvol.iter().map(|e| e.1).collect::<Vec<_>>(),
        "cauchy_schwarz": per_delta,
        "shells": shells,
        "cs_ok": cs_ok,
        "ade_pass": ade.pass,
        "ade": ade,
        "fitted_exponents": {
            "tube_mass": fit(tube, SeriesKind::TubeMass)?,
            "F_vol": fit(fvol, SeriesKind::NeighborhoodVolume)?,
            "pair_mass": fit(pair, SeriesKind::PairMass)?,
        },
    }));
    Ok(cs_ok && ade.pass)
}

fn run(name: &str, cfg: &RunConfig) -> anyhow::Result<bool> {
    if !EXPERIMENTS.contains(&name) {
        bail!("unknown experiment {name:?}; expected one of {}", EXPERIMENTS.join(", "));
    }
    let (report, dir) = run_and_write(name, cfg)?;
    for c in &report.checks {
        println!("{} {}: {}", if c.pass { "PASS" } else { "FAIL" }, c.criterion, c.value);
    }
    println!("report: {}", dir.join("report.json").display());
    for c in report.failures() {
        eprintln!("failed criterion: {}", c.criterion);
    }
    Ok(report.pass)
}
