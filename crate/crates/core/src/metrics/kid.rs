use nalgebra::DMatrix;
use serde::Serialize;

use super::FeatureSet;
use crate::error::{Error, Result};
use crate::matrix::{check_dim, dot, Matrix};
use crate::rng::Xoshiro256StarStar;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KidConfig {
    pub subset_size: usize,
    pub num_subsets: usize,
    pub seed: u64,
}

impl Default for KidConfig {
    fn default() -> Self {
        Self { subset_size: 1000, num_subsets: 10, seed: 0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KidEstimate {
    pub mean: f64,
    /// Population standard deviation over subsets.
    pub std: f64,
    pub per_subset: Vec<f64>,
}

/// `(x·y / d + 1)³`
pub fn polynomial_kernel(x: &[f64], y: &[f64]) -> f64 {
    let k = dot(x, y) / x.len() as f64 + 1.0;
    k * k * k
}

fn gram(a: &Matrix, rows_a: &[usize], b: &Matrix, rows_b: &[usize]) -> DMatrix<f64> {
    let d = a.cols();
    let xa = DMatrix::from_fn(rows_a.len(), d, |i, j| a.get(rows_a[i], j));
    let xb = DMatrix::from_fn(rows_b.len(), d, |i, j| b.get(rows_b[i], j));
    let inv_d = 1.0 / d as f64;
    (xa * xb.transpose()).map(|v| {
        let k = v * inv_d + 1.0;
        k * k * k
    })
}

fn off_diagonal_sum(k: &DMatrix<f64>) -> f64 {
    k.sum() - k.trace()
}

fn mmd2_rows(a: &Matrix, ia: &[usize], b: &Matrix, ib: &[usize], unbiased: bool) -> f64 {
    let (m, n) = (ia.len() as f64, ib.len() as f64);
    let kxx = gram(a, ia, a, ia);
    let kyy = gram(b, ib, b, ib);
    let kxy = gram(a, ia, b, ib);
    let cross = 2.0 * kxy.sum() / (m * n);
    if unbiased {
        off_diagonal_sum(&kxx) / (m * (m - 1.0)) + off_diagonal_sum(&kyy) / (n * (n - 1.0)) - cross
    } else {
        kxx.sum() / (m * m) + kyy.sum() / (n * n) - cross
    }
}

fn all_rows(m: &Matrix) -> Vec<usize> {
    (0..m.rows()).collect()
}

/// Unbiased MMD² under the cubic polynomial kernel; diagonal terms of the
/// within-set kernel matrices are excluded.
pub fn mmd2_unbiased(a: &FeatureSet, b: &FeatureSet) -> Result<f64> {
    check_dim(a.dim(), b.dim())?;
    let (x, y) = (a.features(), b.features());
    Ok(mmd2_rows(x, &all_rows(x), y, &all_rows(y), true))
}

/// Biased (V-statistic) MMD², diagonals included.
pub fn mmd2_biased(a: &FeatureSet, b: &FeatureSet) -> Result<f64> {
    check_dim(a.dim(), b.dim())?;
    let (x, y) = (a.features(), b.features());
    Ok(mmd2_rows(x, &all_rows(x), y, &all_rows(y), false))
}

/// Kernel Inception Distance: the unbiased MMD² averaged over seeded random
/// subsets of `subset_size` rows drawn without replacement from each set.
///
/// All subset indices are drawn up front from one generator, so the result
/// does not depend on evaluation order.
pub fn kid(a: &FeatureSet, b: &FeatureSet, config: &KidConfig) -> Result<KidEstimate> {
    check_dim(a.dim(), b.dim())?;
    if config.num_subsets == 0 {
        return Err(Error::InvalidConfig("num_subsets must be at least 1".into()));
    }
    let m = config.subset_size;
    let limit = a.len().min(b.len());
    if m < 2 || m > limit {
        return Err(Error::InvalidConfig(format!("subset_size {m} must be in [2, {limit}]")));
    }
    let mut rng = Xoshiro256StarStar::seed_from_u64(config.seed);
    let draws: Vec<(Vec<usize>, Vec<usize>)> = (0..config.num_subsets)
        .map(|_| {
            let ia = rng.sample_indices(a.len(), m);
            let ib = rng.sample_indices(b.len(), m);
            (ia, ib)
        })
        .collect();
    let per_subset: Vec<f64> = draws
        .iter()
        .map(|(ia, ib)| mmd2_rows(a.features(), ia, b.features(), ib, true))
        .collect();
    let s = per_subset.len() as f64;
    let mean = per_subset.iter().sum::<f64>() / s;
    let std = (per_subset.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / s).sqrt();
    Ok(KidEstimate { mean, std, per_subset })
}
