use std::path::PathBuf;

use affunion::runner::RunConfig;
use clap::Args;

/// Run configuration: `--config FILE` then individual flags, which win.
#[derive(Debug, Clone, Default, Args)]
pub struct ConfigArgs {
    /// Flat TOML configuration file.
    #[arg(long, value_name = "FILE")]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub s: Option<f64>,
    #[arg(long)]
    pub gamma: Option<f64>,
    #[arg(long)]
    pub depth: Option<u32>,
    #[arg(long)]
    pub cloud_depth: Option<u32>,
    #[arg(long, allow_negative_numbers = true)]
    pub delta_exp_lo: Option<i32>,
    #[arg(long, allow_negative_numbers = true)]
    pub delta_exp_hi: Option<i32>,
    #[arg(long)]
    pub samples: Option<u64>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub grid_res: Option<f64>,
    #[arg(long)]
    pub eps: Option<f64>,
    #[arg(long)]
    pub delta0: Option<f64>,
    #[arg(long)]
    pub gengeo_cap: Option<f64>,
    #[arg(long)]
    pub shell_cap: Option<f64>,
    #[arg(long)]
    pub cs_tolerance: Option<f64>,
    #[arg(long)]
    pub ade_floor: Option<f64>,
    #[arg(long)]
    pub dim_tol: Option<f64>,
    #[arg(long)]
    pub radius: Option<f64>,
    #[arg(long)]
    pub centers: Option<usize>,
    #[arg(long)]
    pub pairs: Option<usize>,
    #[arg(long, value_name = "DIR")]
    pub output_root: Option<PathBuf>,
}

macro_rules! apply {
    ($cfg:ident, $args:ident, $($field:ident),*) => {
        $(if let Some(v) = $args.$field.clone() {
            $cfg.$field = v;
        })*
    };
}

impl ConfigArgs {
    pub fn resolve(&self) -> anyhow::Result<RunConfig> {
        let mut cfg = match &self.config {
            Some(path) => RunConfig::load(path)?,
            None => RunConfig::default(),
        };
        apply!(
            cfg, self, n, k, alpha, s, gamma, depth, cloud_depth, delta_exp_lo, delta_exp_hi, samples, seed, grid_res,
            eps, delta0, gengeo_cap, shell_cap, cs_tolerance, ade_floor, dim_tol, radius, centers, pairs, output_root
        );
        Ok(cfg)
    }
}
