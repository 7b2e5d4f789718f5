use serde::{Deserialize, Serialize};

use super::PointCloud;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SeriesKind {
    BoxCount,
    NeighborhoodVolume,
    TubeMass,
    PairMass,
}

impl SeriesKind {
    pub fn as_str(self) -> &'static str {
        match self {
            SeriesKind::BoxCount => "box_count",
            SeriesKind::NeighborhoodVolume => "neighborhood_volume",
            SeriesKind::TubeMass => "tube_mass",
            SeriesKind::PairMass => "pair_mass",
        }
    }

    /// Counts grow as `eps -> 0`; volumes and masses shrink.
    pub fn is_count(self) -> bool {
        matches!(self, SeriesKind::BoxCount)
    }
}

impl std::str::FromStr for SeriesKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "box_count" => Ok(SeriesKind::BoxCount),
            "neighborhood_volume" => Ok(SeriesKind::NeighborhoodVolume),
            "tube_mass" => Ok(SeriesKind::TubeMass),
            "pair_mass" => Ok(SeriesKind::PairMass),
            other => Err(Error::Invalid(format!("unknown series kind {other:?}"))),
        }
    }
}

/// `(scale, value)` measurements with strictly decreasing scales.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScaleSeries {
    entries: Vec<(f64, f64)>,
    kind: SeriesKind,
}

impl ScaleSeries {
    pub fn new(entries: Vec<(f64, f64)>, kind: SeriesKind) -> Result<Self> {
        for w in entries.windows(2) {
            if !(w[1].0 < w[0].0) {
                return Err(Error::Invalid(format!(
                    "scales must be strictly decreasing, got {} then {}",
                    w[0].0, w[1].0
                )));
            }
        }
        for &(e, v) in &entries {
            if !(e > 0.0 && v > 0.0 && e.is_finite() && v.is_finite()) {
                return Err(Error::Invalid(format!("non-positive entry ({e}, {v})")));
            }
        }
        Ok(Self { entries, kind })
    }

    pub fn entries(&self) -> &[(f64, f64)] {
        &self.entries
    }

    pub fn kind(&self) -> SeriesKind {
        self.kind
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// Closed scale interval `[eps_min, eps_max]` of entries used by a fit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitWindow {
    pub eps_max: f64,
    pub eps_min: f64,
}

impl FitWindow {
    pub const ALL: FitWindow = FitWindow {
        eps_max: f64::INFINITY,
        eps_min: 0.0,
    };

    pub fn new(eps_max: f64, eps_min: f64) -> Self {
        Self { eps_max, eps_min }
    }

    /// Scales at least 4 times the generation scale and at most a quarter of
    /// the cloud diameter.
    pub fn for_cloud(cloud: &PointCloud) -> Self {
        Self {
            eps_max: cloud.diameter() / 4.0,
            eps_min: 4.0 * cloud.gen_scale(),
        }
    }

    pub fn contains(&self, eps: f64) -> bool {
        let tol = 1e-12 * eps;
        eps <= self.eps_max + tol && eps >= self.eps_min - tol
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    /// Box dimension for counts; scaling power `p` in `value ~ eps^p` for
    /// volumes and masses.
    pub exponent: f64,
    pub intercept: f64,
    pub r2: f64,
    /// Largest and smallest scale actually used.
    pub window: (f64, f64),
}

/// Least-squares line through `(ln(1/eps), ln value)` over the entries in
/// `window`. For counts the slope is reported; for volumes its negation.
pub fn dimension_fit(series: &ScaleSeries, window: FitWindow) -> Result<FitResult> {
    let used: Vec<(f64, f64)> = series
        .entries()
        .iter()
        .copied()
        .filter(|&(e, _)| window.contains(e))
        .collect();
    if used.len() < 3 {
        return Err(Error::InsufficientScales {
            needed: 3,
            got: used.len(),
        });
    }
    let xs: Vec<f64> = used.iter().map(|(e, _)| -e.ln()).collect();
    let ys: Vec<f64> = used.iter().map(|(_, v)| v.ln()).collect();
    let (slope, intercept, r2) = least_squares(&xs, &ys);
    let sign = if series.kind().is_count() { 1.0 } else { -1.0 };
    Ok(FitResult {
        exponent: sign * slope,
        intercept,
        r2,
        window: (used[0].0, used[used.len() - 1].0),
    })
}

fn least_squares(xs: &[f64], ys: &[f64]) -> (f64, f64, f64) {
    let m = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / m;
    let my = ys.iter().sum::<f64>() / m;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r2 = if syy <= 1e-24 * m {
        1.0
    } else {
        (slope * sxy / syy).clamp(0.0, 1.0)
    };
    (slope, intercept, r2)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_power_law() {
        let entries = (2..=8).map(|m| (0.5f64.powi(m), 4f64.powi(m))).collect();
        let fit = dimension_fit(&ScaleSeries::new(entries, SeriesKind::BoxCount).unwrap(), FitWindow::ALL).unwrap();
        assert_close!(fit.exponent, 2.0, 1e-12);
        assert_close!(fit.r2, 1.0, 1e-12);
        assert_eq!(fit.window, (0.25, 0.5f64.powi(8)));
    }

    #[test]
    fn constant_series() {
        let entries = (1..=5).map(|m| (0.5f64.powi(m), 7.0)).collect();
        let fit = dimension_fit(&ScaleSeries::new(entries, SeriesKind::BoxCount).unwrap(), FitWindow::ALL).unwrap();
        assert_close!(fit.exponent, 0.0, 1e-12);
        assert_eq!(fit.r2, 1.0);
    }

    #[test]
    fn volume_power_sign() {
        let entries = (1..=5).map(|m| (0.5f64.powi(m), 3.0 * 0.5f64.powi(2 * m))).collect();
        let fit = dimension_fit(
            &ScaleSeries::new(entries, SeriesKind::NeighborhoodVolume).unwrap(),
            FitWindow::ALL,
        )
        .unwrap();
        assert_close!(fit.exponent, 2.0, 1e-12);
        assert_close!(fit.intercept, 3f64.ln(), 1e-12);
    }

    #[test]
    fn window_and_errors() {
        let entries: Vec<_> = (1..=6).map(|m| (0.5f64.powi(m), 2f64.powi(m))).collect();
        let s = ScaleSeries::new(entries.clone(), SeriesKind::BoxCount).unwrap();
        assert!(matches!(
            dimension_fit(&s, FitWindow::new(0.25, 0.125)),
            Err(Error::InsufficientScales { needed: 3, got: 2 })
        ));
        assert!(ScaleSeries::new(entries.into_iter().rev().collect(), SeriesKind::BoxCount).is_err());
        assert!(ScaleSeries::new(vec![(0.5, 0.0)], SeriesKind::BoxCount).is_err());
    }
}
