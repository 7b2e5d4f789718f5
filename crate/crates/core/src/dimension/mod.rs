//! Finite-scale dimension surrogates: box counting, log-log fits, a greedy
//! Hausdorff-content estimate, and neighbourhood volumes.

mod boxcount;
mod cloud;
mod content;
mod fit;
pub(crate) mod index;
mod neighborhood;

pub use boxcount::{box_count, box_count_series};
pub use cloud::PointCloud;
pub use content::{default_content_levels, hausdorff_content};
pub use fit::{dimension_fit, FitResult, FitWindow, ScaleSeries, SeriesKind};
pub use index::MAX_INDEX_DIM;
pub use neighborhood::{
    covering_volume_check, neighborhood_cells, neighborhood_volume, neighborhood_volume_in, AxisBox, CoverCheck, Neighborhood,
    Overlap, Region,
};

/// Dyadic scales `2^-lo, ..., 2^-hi`.
pub fn dyadic_scales(lo: i32, hi: i32) -> Vec<f64> {
    (lo..=hi).map(|j| 0.5f64.powi(j)).collect()
}

/// Box-count series at dyadic scales and its fit over the default window.
pub fn box_dimension(cloud: &PointCloud, lo: i32, hi: i32) -> crate::Result<(ScaleSeries, FitResult)> {
    let series = box_count_series(cloud, &dyadic_scales(lo, hi))?;
    let fit = dimension_fit(&series, FitWindow::for_cloud(cloud))?;
    Ok((series, fit))
}
