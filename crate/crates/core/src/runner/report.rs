use std::fs::{self, OpenOptions};
use std::io::{ErrorKind, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::config::RunConfig;
use crate::dimension::{ScaleSeries, SeriesKind};
use crate::error::{Error, Result};

/// One asserted bound.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub criterion: String,
    pub value: f64,
    pub lower: Option<f64>,
    pub upper: Option<f64>,
    pub pass: bool,
}

impl Check {
    pub fn within(criterion: impl Into<String>, value: f64, lower: Option<f64>, upper: Option<f64>) -> Self {
        let pass = value.is_finite() && lower.map_or(true, |l| value >= l) && upper.map_or(true, |u| value <= u);
        Self {
            criterion: criterion.into(),
            value,
            lower,
            upper,
            pass,
        }
    }

    pub fn at_least(criterion: impl Into<String>, value: f64, lower: f64) -> Self {
        Self::within(criterion, value, Some(lower), None)
    }

    pub fn at_most(criterion: impl Into<String>, value: f64, upper: f64) -> Self {
        Self::within(criterion, value, None, Some(upper))
    }

    pub fn near(criterion: impl Into<String>, value: f64, target: f64, tol: f64) -> Self {
        Self::within(criterion, value, Some(target - tol), Some(target + tol))
    }

    /// A boolean outcome recorded as 1 (pass) or 0.
    pub fn holds(criterion: impl Into<String>, ok: bool) -> Self {
        Self::within(criterion, f64::from(u8::from(ok)), Some(1.0), None)
    }
}

/// A named scale series, written as `<name>.csv`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesRecord {
    pub name: String,
    pub kind: SeriesKind,
    pub entries: Vec<(f64, f64)>,
}

impl SeriesRecord {
    pub fn new(name: impl Into<String>, series: &ScaleSeries) -> Self {
        Self {
            name: name.into(),
            kind: series.kind(),
            entries: series.entries().to_vec(),
        }
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("scale,value\n");
        for (e, v) in &self.entries {
            out.push_str(&format!("{e},{v}\n"));
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub experiment: String,
    pub config_hash: String,
    pub config: RunConfig,
    pub pass: bool,
    pub checks: Vec<Check>,
    pub series: Vec<SeriesRecord>,
    /// Experiment-specific values; object keys are sorted.
    pub data: serde_json::Value,
}

impl Report {
    pub fn new(experiment: &str, config: &RunConfig, checks: Vec<Check>, series: Vec<SeriesRecord>, data: serde_json::Value) -> Self {
        Self {
            experiment: experiment.to_string(),
            config_hash: config.hash(),
            config: config.clone(),
            pass: checks.iter().all(|c| c.pass),
            checks,
            series,
            data,
        }
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.pass)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serialises");
        s.push('\n');
        s
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct ManifestEntry {
    file: String,
    sha256: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct Manifest {
    experiment: String,
    config_hash: String,
    pass: bool,
    files: Vec<ManifestEntry>,
}

/// Writes the report into a fresh directory `<root>/<experiment>/<NNNN>-<hash>`
/// and returns its path. Existing runs are never touched.
pub fn write_run(root: &Path, report: &Report) -> Result<PathBuf> {
    let base = root.join(&report.experiment);
    fs::create_dir_all(&base).map_err(|e| io_err(&base, e))?;
    let short = &report.config_hash[..12];
    let mut index = next_index(&base)?;
    let dir = loop {
        let dir = base.join(format!("{index:04}-{short}"));
        match fs::create_dir(&dir) {
            Ok(()) => break dir,
            Err(e) if e.kind() == ErrorKind::AlreadyExists => index += 1,
            Err(e) => return Err(io_err(&dir, e)),
        }
    };

    let mut files: Vec<(String, String)> = vec![
        ("config.toml".into(), report.config.to_toml_string()),
        ("report.json".into(), report.to_json()),
    ];
    for s in &report.series {
        files.push((format!("{}.csv", s.name), s.to_csv()));
    }
    let mut entries = Vec::new();
    for (name, body) in &files {
        create_new(&dir.join(name), body.as_bytes())?;
        entries.push(ManifestEntry {
            file: name.clone(),
            sha256: hex::encode(Sha256::digest(body.as_bytes())),
        });
    }
    let manifest = Manifest {
        experiment: report.experiment.clone(),
        config_hash: report.config_hash.clone(),
        pass: report.pass,
        files: entries,
    };
    let mut text = serde_json::to_string_pretty(&manifest).expect("manifest serialises");
    text.push('\n');
    create_new(&dir.join("manifest.json"), text.as_bytes())?;
    Ok(dir)
}

fn next_index(base: &Path) -> Result<u32> {
    let mut next = 0;
    for entry in fs::read_dir(base).map_err(|e| io_err(base, e))? {
        let entry = entry.map_err(|e| io_err(base, e))?;
        let name = entry.file_name();
        if let Some(i) = name.to_str().and_then(|s| s.split('-').next()).and_then(|s| s.parse::<u32>().ok()) {
            next = next.max(i + 1);
        }
    }
    Ok(next)
}

fn create_new(path: &Path, body: &[u8]) -> Result<()> {
    let mut f = OpenOptions::new().write(true).create_new(true).open(path).map_err(|e| io_err(path, e))?;
    f.write_all(body).map_err(|e| io_err(path, e))
}

fn io_err(path: &Path, e: std::io::Error) -> Error {
    Error::Invalid(format!("{}: {e}", path.display()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn report() -> Report {
        let series = ScaleSeries::new(vec![(0.5, 2.0), (0.25, 4.0)], SeriesKind::BoxCount).unwrap();
        Report::new(
            "demo",
            &RunConfig::default(),
            vec![Check::near("dim", 1.02, 1.0, 0.05), Check::at_most("cap", 9.0, 8.0)],
            vec![SeriesRecord::new("counts", &series)],
            serde_json::json!({"b": 1, "a": [0.5]}),
        )
    }

    #[test]
    fn checks() {
        let r = report();
        assert!(r.checks[0].pass);
        assert!(!r.checks[1].pass);
        assert!(!r.pass);
        assert_eq!(r.failures().map(|c| c.criterion.as_str()).collect::<Vec<_>>(), vec!["cap"]);
        assert!(!Check::at_least("nan", f64::NAN, 0.0).pass);
        assert!(Check::holds("ok", true).pass);
    }

    #[test]
    fn json_keys_are_sorted() {
        let json = report().to_json();
        assert!(json.find("\"a\"").unwrap() < json.find("\"b\"").unwrap());
        let back: Report = serde_json::from_str(&json).unwrap();
        assert_eq!(back, report());
    }

    #[test]
    fn series_csv() {
        assert_eq!(report().series[0].to_csv(), "scale,value\n0.5,2\n0.25,4\n");
    }

    #[test]
    fn runs_are_append_only() {
        let tmp = tempfile::tempdir().unwrap();
        let r = report();
        let a = write_run(tmp.path(), &r).unwrap();
        let b = write_run(tmp.path(), &r).unwrap();
        assert_ne!(a, b);
        assert!(a.file_name().unwrap().to_str().unwrap().starts_with("0000-"));
        assert!(b.file_name().unwrap().to_str().unwrap().starts_with("0001-"));
        for f in ["config.toml", "report.json", "counts.csv", "manifest.json"] {
            assert!(a.join(f).is_file(), "{f}");
        }
        assert_eq!(fs::read(a.join("report.json")).unwrap(), fs::read(b.join("report.json")).unwrap());
        let manifest: serde_json::Value = serde_json::from_slice(&fs::read(a.join("manifest.json")).unwrap()).unwrap();
        assert_eq!(manifest["files"].as_array().unwrap().len(), 3);
    }
}
