//! Instance builders shared by the CLI presets and the test suites.

use crate::cost::{coulomb_cost, euclidean_cost, CostMatrix};
use crate::error::Result;
use crate::measure::{make_measure, DiscreteMeasure};
use crate::nmf::NmfDataset;
use crate::rng::RngKey;

/// Midpoints of `n` equal cells on [0, 1]; spacing `1/n`, so the default
/// Coulomb cap `2n` equals one over half the grid spacing.
pub fn grid_midpoints(n: usize) -> Vec<f64> {
    (0..n).map(|i| (i as f64 + 0.5) / n as f64).collect()
}

/// Default singularity cap for an `n`-point grid.
pub fn default_coulomb_cap(n: usize) -> f64 {
    2.0 * n as f64
}

fn two_mode_density(grid: &[f64], means: (f64, f64), std: f64) -> Vec<f64> {
    grid.iter()
        .map(|&x| {
            let a = (x - means.0) / std;
            let b = (x - means.1) / std;
            (-0.5 * a * a).exp() + (-0.5 * b * b).exp()
        })
        .collect()
}

/// Two-mode truncated-Gaussian pair on an `n`-point grid with squared
/// Euclidean cost. A documented reconstruction: means 0.25/0.75 with std
/// 0.08 against means 0.35/0.65 with std 0.06.
pub fn toy1d(n: usize) -> Result<(DiscreteMeasure, DiscreteMeasure, CostMatrix)> {
    let grid = grid_midpoints(n);
    let support: Vec<Vec<f64>> = grid.iter().map(|&x| vec![x]).collect();
    let p = make_measure(two_mode_density(&grid, (0.25, 0.75), 0.08), Some(support.clone()))?;
    let q = make_measure(two_mode_density(&grid, (0.35, 0.65), 0.06), Some(support.clone()))?;
    let cost = euclidean_cost(&support, &support, 2.0)?;
    Ok((p, q, cost))
}

/// Uniform densities on an `n`-point grid with capped Coulomb cost.
pub fn coulomb1d(n: usize) -> Result<(DiscreteMeasure, DiscreteMeasure, CostMatrix)> {
    let grid = grid_midpoints(n);
    let support: Vec<Vec<f64>> = grid.iter().map(|&x| vec![x]).collect();
    let p = make_measure(vec![1.0; n], Some(support.clone()))?;
    let q = p.clone();
    let cost = coulomb_cost(&grid, &grid, default_coulomb_cap(n))?;
    Ok((p, q, cost))
}

/// Seeded random instance: uniform-random weights and iid uniform costs.
pub fn random_instance(
    m1: usize,
    m2: usize,
    seed: u64,
) -> Result<(DiscreteMeasure, DiscreteMeasure, CostMatrix)> {
    let key = RngKey::new(seed, 0);
    let p = make_measure((0..m1).map(|i| key.unit_open(0, i as u64)).collect(), None)?;
    let q = make_measure((0..m2).map(|j| key.unit_open(1, j as u64)).collect(), None)?;
    let entries: Vec<f64> =
        (0..m1 * m2).map(|c| key.unit_open(2, c as u64)).collect();
    let cost = CostMatrix::from_raw(m1, m2, entries, crate::cost::CostKind::Custom)?;
    Ok((p, q, cost))
}

fn blob(side: usize, center: (f64, f64), std: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(side * side);
    for r in 0..side {
        for c in 0..side {
            let x = (c as f64 + 0.5) / side as f64;
            let y = (r as f64 + 0.5) / side as f64;
            let d2 = (x - center.0).powi(2) + (y - center.1).powi(2);
            out.push((-0.5 * d2 / (std * std)).exp());
        }
    }
    out
}

/// Pixel-grid support for `cols x rows` rasters: cell midpoints in [0, 1]^2,
/// row-major.
pub fn raster_grid_support(cols: usize, rows: usize) -> Vec<Vec<f64>> {
    let mut pts = Vec::with_capacity(cols * rows);
    for r in 0..rows {
        for c in 0..cols {
            pts.push(vec![(c as f64 + 0.5) / cols as f64, (r as f64 + 0.5) / rows as f64]);
        }
    }
    pts
}

/// Square-raster convenience wrapper around [`raster_grid_support`].
pub fn raster_support(side: usize) -> Vec<Vec<f64>> {
    raster_grid_support(side, side)
}

/// Synthetic NMF corpus: random convex mixtures of two Gaussian blobs (plus
/// mild multiplicative noise) on a shared `side x side` pixel grid.
pub fn two_blob_corpus(images: usize, side: usize, seed: u64) -> Result<NmfDataset> {
    let support = raster_support(side);
    let proto_a = blob(side, (0.3, 0.35), 0.16);
    let proto_b = blob(side, (0.7, 0.65), 0.16);
    let key = RngKey::new(seed, 1);
    let mut instances = Vec::with_capacity(images);
    for img in 0..images {
        let mix = key.unit_open(img as u64, 0);
        let raw: Vec<f64> = proto_a
            .iter()
            .zip(&proto_b)
            .enumerate()
            .map(|(px, (&a, &b))| {
                let noise = 0.9 + 0.2 * key.unit_open(img as u64, 1 + px as u64);
                (mix * a + (1.0 - mix) * b) * noise
            })
            .collect();
        instances.push(make_measure(raw, Some(support.clone()))?);
    }
    NmfDataset::new(instances, support)
}

/// Raster intensities (row-major, any nonnegative scale) into a measure on
/// the pixel grid. Rejects rasters with zero total mass.
pub fn raster_to_measure(side_cols: usize, intensities: &[f64]) -> Result<DiscreteMeasure> {
    if side_cols == 0 || intensities.len() % side_cols != 0 {
        return Err(crate::error::Error::InvalidParameter(format!(
            "{} intensities do not tile {side_cols} columns",
            intensities.len()
        )));
    }
    let rows = intensities.len() / side_cols;
    let mut pts = Vec::with_capacity(intensities.len());
    for r in 0..rows {
        for c in 0..side_cols {
            pts.push(vec![(c as f64 + 0.5) / side_cols as f64, (r as f64 + 0.5) / rows as f64]);
        }
    }
    make_measure(intensities.to_vec(), Some(pts))
}
