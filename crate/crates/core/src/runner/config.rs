use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::fixtures::{CONTENT_FLOOR, DELTA0};

/// Environment variable overriding [`RunConfig::output_root`].
pub const OUTPUT_ROOT_ENV: &str = "AFFUNION_OUTPUT_ROOT";

/// Ade floor calibrated on the sharpness fixtures.
pub const ADE_FLOOR: f64 = 5.0e7;

/// Flat run configuration. Every key can also be given as a CLI flag of the
/// same name (underscores become dashes).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub n: usize,
    pub k: usize,
    pub alpha: f64,
    pub s: f64,
    /// Report-only slack in the exponent `u = 2 alpha - k + s - gamma`.
    pub gamma: f64,
    /// Depth of the plane family.
    pub depth: u32,
    /// Depth of the per-plane point sets and other point constructions.
    pub cloud_depth: u32,
    /// Scales `delta = 2^-j` for `j` in `delta_exp_lo..=delta_exp_hi`.
    pub delta_exp_lo: i32,
    pub delta_exp_hi: i32,
    pub samples: u64,
    pub seed: u64,
    /// Lattice side of the neighbourhood-volume counts.
    pub grid_res: f64,
    /// Content floor.
    pub eps: f64,
    pub delta0: f64,
    pub gengeo_cap: f64,
    pub shell_cap: f64,
    /// Standard errors of slack in the Cauchy-Schwarz comparison.
    pub cs_tolerance: f64,
    pub ade_floor: f64,
    pub dim_tol: f64,
    pub radius: f64,
    /// Centres per axis of the skeleton lattice.
    pub centers: usize,
    /// Random plane pairs in the geometry suite.
    pub pairs: usize,
    pub output_root: PathBuf,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            n: 2,
            k: 1,
            alpha: 1.0,
            s: 1.0,
            gamma: 0.05,
            depth: 6,
            cloud_depth: 6,
            delta_exp_lo: 3,
            delta_exp_hi: 6,
            samples: 20_000,
            seed: 1,
            grid_res: 1.0 / 256.0,
            eps: CONTENT_FLOOR,
            delta0: DELTA0,
            gengeo_cap: 8.0,
            shell_cap: 8.0,
            cs_tolerance: 3.0,
            ade_floor: ADE_FLOOR,
            dim_tol: 0.15,
            radius: 0.5,
            centers: 32,
            pairs: 500,
            output_root: PathBuf::from("runs"),
        }
    }
}

/// A violated constraint on one parameter.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub param: &'static str,
    pub constraint: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.param, self.constraint)
    }
}

impl RunConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Invalid(format!("config: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Invalid(format!("{}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("config serialises")
    }

    pub fn deltas(&self) -> Vec<f64> {
        (self.delta_exp_lo..=self.delta_exp_hi).map(|j| 0.5f64.powi(j)).collect()
    }

    pub fn delta_min(&self) -> f64 {
        0.5f64.powi(self.delta_exp_hi)
    }

    /// `u = 2 alpha - k + s - gamma`.
    pub fn u(&self) -> f64 {
        2.0 * self.alpha - self.k as f64 + self.s - self.gamma
    }

    /// Output root after applying [`OUTPUT_ROOT_ENV`].
    pub fn resolved_output_root(&self) -> PathBuf {
        match std::env::var_os(OUTPUT_ROOT_ENV) {
            Some(v) if !v.is_empty() => PathBuf::from(v),
            _ => self.output_root.clone(),
        }
    }

    /// SHA-256 of the configuration without its output location.
    pub fn hash(&self) -> String {
        let mut c = self.clone();
        c.output_root = PathBuf::new();
        let json = serde_json::to_string(&c).expect("config serialises");
        hex::encode(Sha256::digest(json.as_bytes()))
    }
}

/// Every constraint the downstream operations place on the configuration.
pub fn validate_config(c: &RunConfig) -> Vec<Violation> {
    let mut out = Vec::new();
    let mut need = |ok: bool, param: &'static str, constraint: String| {
        if !ok {
            out.push(Violation { param, constraint });
        }
    };
    let k = c.k as f64;
    need(c.k >= 1 && c.k < c.n, "k", format!("1 <= k < n (n = {})", c.n));
    need(c.n <= crate::dimension::MAX_INDEX_DIM, "n", format!("n <= {}", crate::dimension::MAX_INDEX_DIM));
    need(c.alpha > 0.0 && c.alpha <= k, "alpha", format!("0 < alpha <= k = {}", c.k));
    need(c.s > 0.0 && c.s <= 1.0, "s", "0 < s <= 1".into());
    need(c.gamma > 0.0 && c.gamma.is_finite(), "gamma", "gamma > 0".into());
    need((1..=20).contains(&c.depth), "depth", "1 <= depth <= 20".into());
    need((1..=14).contains(&c.cloud_depth), "cloud_depth", "1 <= cloud_depth <= 14".into());
    need(
        c.delta_exp_lo >= 1 && c.delta_exp_hi >= c.delta_exp_lo + 3,
        "delta_exp_hi",
        "at least four dyadic scales: 1 <= delta_exp_lo and delta_exp_hi >= delta_exp_lo + 3".into(),
    );
    let dmax_window = (1.0 / (k + k.sqrt())).min(0.5);
    need(
        c.delta0 > 0.0 && c.delta0 < dmax_window,
        "delta0",
        format!("0 < delta0 < min(1/(k + sqrt k), 1/2) = {dmax_window}"),
    );
    need(
        0.5f64.powi(c.delta_exp_lo) <= c.delta0,
        "delta_exp_lo",
        format!("largest scale 2^-{} must not exceed delta0 = {}", c.delta_exp_lo, c.delta0),
    );
    need(c.grid_res > 0.0, "grid_res", "grid_res > 0".into());
    need(
        c.delta_min() >= 4.0 * c.grid_res,
        "grid_res",
        format!("neighbourhood volumes need delta >= 4 grid_res; smallest delta is {}", c.delta_min()),
    );
    need(c.samples >= 1, "samples", "samples >= 1".into());
    need(c.eps > 0.0 && c.eps < 1.0, "eps", "0 < eps < 1".into());
    need(c.gengeo_cap >= 1.0, "gengeo_cap", "gengeo_cap >= 1".into());
    need(c.shell_cap > 0.0, "shell_cap", "shell_cap > 0".into());
    need(c.cs_tolerance >= 0.0, "cs_tolerance", "cs_tolerance >= 0".into());
    need(c.ade_floor > 0.0, "ade_floor", "ade_floor > 0".into());
    need(c.dim_tol > 0.0, "dim_tol", "dim_tol > 0".into());
    need(c.radius > 0.0 && c.radius.is_finite(), "radius", "radius > 0".into());
    need(c.centers >= 1, "centers", "centers >= 1".into());
    need(c.pairs >= 1, "pairs", "pairs >= 1".into());
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_is_valid() {
        assert_eq!(validate_config(&RunConfig::default()), vec![]);
    }

    #[test]
    fn grid_too_coarse() {
        let c = RunConfig {
            grid_res: 1.0 / 128.0,
            ..RunConfig::default()
        };
        let v = validate_config(&c);
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].param, "grid_res");
        assert!(v[0].constraint.contains("neighbourhood"));
    }

    #[test]
    fn s_above_one() {
        let c = RunConfig {
            s: 1.5,
            ..RunConfig::default()
        };
        let v = validate_config(&c);
        assert_eq!(v.iter().map(|v| v.param).collect::<Vec<_>>(), vec!["s"]);
    }

    #[test]
    fn several_violations_are_all_named() {
        let c = RunConfig {
            n: 2,
            k: 2,
            samples: 0,
            delta_exp_hi: 4,
            ..RunConfig::default()
        };
        let params: Vec<_> = validate_config(&c).iter().map(|v| v.param).collect();
        for p in ["k", "samples", "delta_exp_hi"] {
            assert!(params.contains(&p), "{params:?}");
        }
    }

    #[test]
    fn toml_round_trip() {
        let c = RunConfig {
            alpha: 0.6309297535714574,
            seed: 99,
            grid_res: 0.1 + 0.2,
            ..RunConfig::default()
        };
        let back = RunConfig::from_toml_str(&c.to_toml_string()).unwrap();
        assert_eq!(back, c);
        assert_eq!(back.hash(), c.hash());
    }

    #[test]
    fn partial_file_uses_defaults() {
        let c = RunConfig::from_toml_str("n = 3\nseed = 7\n").unwrap();
        assert_eq!((c.n, c.k, c.seed), (3, 1, 7));
        assert!(RunConfig::from_toml_str("bogus = 1").is_err());
    }

    #[test]
    fn hash_ignores_output_root() {
        let a = RunConfig::default();
        let b = RunConfig {
            output_root: "elsewhere".into(),
            ..a.clone()
        };
        assert_eq!(a.hash(), b.hash());
        let c = RunConfig { seed: 2, ..a.clone() };
        assert_ne!(a.hash(), c.hash());
        assert_eq!(a.hash().len(), 64);
    }
}
