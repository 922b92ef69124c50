use nalgebra::{DMatrix, SymmetricEigen};

use super::FeatureSet;
use crate::error::{Error, Result};
use crate::matrix::{check_dim, Matrix};

/// Eigenvalues below this are treated as zero when taking matrix square roots.
pub const EIGEN_CLAMP: f64 = 1e-12;
const SYMMETRY_TOLERANCE: f64 = 1e-8;

/// Sample mean and unbiased covariance of a feature set.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianMoments {
    mean: Vec<f64>,
    cov: Matrix,
}

impl GaussianMoments {
    /// `cov` must be `d × d` and symmetric within 1e-8 (relative to its
    /// largest entry when that exceeds one).
    pub fn new(mean: Vec<f64>, cov: Matrix) -> Result<Self> {
        let d = mean.len();
        if d == 0 {
            return Err(Error::InvalidShape("zero-dimensional moments".into()));
        }
        check_dim(d, cov.rows())?;
        check_dim(d, cov.cols())?;
        let scale = cov.as_slice().iter().fold(1.0f64, |m, x| m.max(x.abs()));
        let mut worst = 0.0f64;
        for i in 0..d {
            for j in i + 1..d {
                worst = worst.max((cov.get(i, j) - cov.get(j, i)).abs());
            }
        }
        if worst > SYMMETRY_TOLERANCE * scale {
            return Err(Error::AsymmetricCovariance(worst));
        }
        Ok(Self { mean, cov })
    }

    pub fn mean(&self) -> &[f64] {
        &self.mean
    }

    pub fn cov(&self) -> &Matrix {
        &self.cov
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    fn cov_dense(&self) -> DMatrix<f64> {
        let d = self.dim();
        DMatrix::from_row_slice(d, d, self.cov.as_slice())
    }
}

pub fn moments(f: &FeatureSet) -> Result<GaussianMoments> {
    let x = f.features();
    let (n, d) = (x.rows(), x.cols());
    if n < 2 {
        return Err(Error::TooFewSamples { need: 2, got: n });
    }
    let mut mean = vec![0.0; d];
    for row in x.iter_rows() {
        mean.iter_mut().zip(row).for_each(|(m, v)| *m += v);
    }
    mean.iter_mut().for_each(|m| *m /= n as f64);

    let centered = DMatrix::from_fn(n, d, |i, j| x.get(i, j) - mean[j]);
    let mut cov = centered.tr_mul(&centered) / (n as f64 - 1.0);
    // gemm does not promise exact symmetry
    for i in 0..d {
        for j in i + 1..d {
            let v = 0.5 * (cov[(i, j)] + cov[(j, i)]);
            cov[(i, j)] = v;
            cov[(j, i)] = v;
        }
    }
    let cov = Matrix::from_vec(d, d, cov.transpose().as_slice().to_vec())?;
    GaussianMoments::new(mean, cov)
}

fn eigen(m: DMatrix<f64>) -> Result<SymmetricEigen<f64, nalgebra::Dyn>> {
    SymmetricEigen::try_new(m, f64::EPSILON, 0)
        .ok_or_else(|| Error::Eigen("symmetric eigendecomposition did not converge".into()))
}

/// PSD square root with eigenvalues below [`EIGEN_CLAMP`] set to zero.
fn psd_sqrt(m: DMatrix<f64>) -> Result<DMatrix<f64>> {
    let e = eigen(m)?;
    let roots = e.eigenvalues.map(|l| if l < EIGEN_CLAMP { 0.0 } else { l.sqrt() });
    let v = &e.eigenvectors;
    Ok(v * DMatrix::from_diagonal(&roots) * v.transpose())
}

/// Fréchet distance between two Gaussians:
/// `‖μ₁ − μ₂‖² + Tr(Σ₁ + Σ₂ − 2 (Σ₁Σ₂)^{1/2})`.
///
/// The trace of `(Σ₁Σ₂)^{1/2}` is taken from the eigenvalues of the
/// symmetric `Σ₁^{1/2} Σ₂ Σ₁^{1/2}`, which is similar to `Σ₁Σ₂`. Small
/// negative results from rounding are clamped to zero.
pub fn fid_from_moments(p: &GaussianMoments, q: &GaussianMoments) -> Result<f64> {
    check_dim(p.dim(), q.dim())?;
    let s1 = p.cov_dense();
    let s2 = q.cov_dense();
    let s1_half = psd_sqrt(s1.clone())?;
    let mut inner = &s1_half * &s2 * &s1_half;
    let d = p.dim();
    for i in 0..d {
        for j in i + 1..d {
            let v = 0.5 * (inner[(i, j)] + inner[(j, i)]);
            inner[(i, j)] = v;
            inner[(j, i)] = v;
        }
    }
    let trace_sqrt: f64 = eigen(inner)?
        .eigenvalues
        .iter()
        .map(|&l| if l < EIGEN_CLAMP { 0.0 } else { l.sqrt() })
        .sum();
    let mean_term: f64 = p.mean().iter().zip(q.mean()).map(|(a, b)| (a - b) * (a - b)).sum();
    let value = mean_term + s1.trace() + s2.trace() - 2.0 * trace_sqrt;
    Ok(value.max(0.0))
}

pub fn fid(a: &FeatureSet, b: &FeatureSet) -> Result<f64> {
    fid_from_moments(&moments(a)?, &moments(b)?)
}
