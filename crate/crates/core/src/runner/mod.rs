//! Run configuration, the experiment registry and report directories.

mod config;
mod experiments;
mod report;

pub use config::{validate_config, RunConfig, Violation, ADE_FLOOR, OUTPUT_ROOT_ENV};
pub use experiments::{
    check_pair, crossing_lines_ratio, fit_cloud, gengeo_profile, median, pair_mass_series, pair_population,
    run_experiment, PairOutcome, PlanePair, EXPERIMENTS, FROSTMAN_CAP,
};
pub use report::{write_run, Check, Report, SeriesRecord};

/// Runs the experiment and writes its report under the resolved output root.
pub fn run_and_write(name: &str, config: &RunConfig) -> crate::Result<(Report, std::path::PathBuf)> {
    let report = run_experiment(name, config)?;
    let dir = write_run(&config.resolved_output_root(), &report)?;
    Ok((report, dir))
}
