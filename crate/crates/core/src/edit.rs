//! Edit algebra on latent vectors.
//!
//! An edit moves a latent along a hyperplane's unit normal:
//! `x' = x + alpha · normal`, which shifts `normal · x` by exactly `alpha`.
//! Conditioning projects the normal off a set of attribute directions so the
//! latent's coordinates along those attributes stay fixed, and layer masks
//! restrict an extended-space edit to selected rows of the `L × D` latent.

use crate::dataset::LayerStructure;
use crate::error::{Error, Result};
use crate::hyperplane::Hyperplane;
use crate::matrix::{check_dim, dot, norm, scaled_norm, Matrix};

/// Residual norm below which a vector counts as linearly dependent.
pub const DEPENDENCE_TOLERANCE: f64 = 1e-8;

/// Layers of an `L × D` extended latent to edit.
#[derive(Debug, Clone, PartialEq)]
pub struct LayerMask {
    structure: LayerStructure,
    layers: Vec<usize>,
}

impl LayerMask {
    /// Sorted, de-duplicated; every index must be below `structure.layers`.
    pub fn new(structure: LayerStructure, layers: impl IntoIterator<Item = usize>) -> Result<Self> {
        let mut layers: Vec<usize> = layers.into_iter().collect();
        if let Some(&index) = layers.iter().find(|&&l| l >= structure.layers) {
            return Err(Error::LayerOutOfRange { index, layers: structure.layers });
        }
        layers.sort_unstable();
        layers.dedup();
        Ok(Self { structure, layers })
    }

    pub fn all(structure: LayerStructure) -> Self {
        Self { structure, layers: (0..structure.layers).collect() }
    }

    pub fn structure(&self) -> LayerStructure {
        self.structure
    }

    pub fn layers(&self) -> &[usize] {
        &self.layers
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct EditSpec {
    pub alpha: f64,
    pub layer_mask: Option<LayerMask>,
    /// Attribute directions to hold fixed; need not be orthonormal.
    pub conditions: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EditTrajectory {
    pub alphas: Vec<f64>,
    pub latents: Vec<Vec<f64>>,
}

/// `x + alpha · normal`. With `alpha == 0` the input is returned unchanged,
/// bit for bit.
pub fn edit(x: &[f64], h: &Hyperplane, alpha: f64) -> Result<Vec<f64>> {
    check_dim(h.dim(), x.len())?;
    if alpha == 0.0 {
        return Ok(x.to_vec());
    }
    Ok(x.iter().zip(h.normal()).map(|(xi, ni)| xi + alpha * ni).collect())
}

/// Orthonormal basis for the span of `vectors` by modified Gram–Schmidt with
/// one reorthogonalization pass. Vectors whose normalized residual falls
/// below [`DEPENDENCE_TOLERANCE`] are dropped, as are zero vectors.
pub fn orthonormalize(vectors: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(vectors.len());
    for v in vectors {
        let n0 = scaled_norm(v);
        if n0.is_nan() || n0 <= 0.0 || !n0.is_finite() {
            continue;
        }
        let mut r: Vec<f64> = v.iter().map(|x| x / n0).collect();
        for _ in 0..2 {
            for q in &basis {
                let c = dot(q, &r);
                r.iter_mut().zip(q).for_each(|(ri, qi)| *ri -= c * qi);
            }
        }
        let rn = scaled_norm(&r);
        if rn < DEPENDENCE_TOLERANCE {
            continue;
        }
        r.iter_mut().for_each(|x| *x /= rn);
        basis.push(r);
    }
    basis
}

/// Projects the hyperplane normal off `span(attrs)` and renormalizes it.
///
/// The result keeps the space tag and layer structure, has bias 0 (it is an
/// edit direction, not a classifier) and records the number of retained
/// attribute directions in `meta["conditioned_on"]`.
pub fn condition_direction(h: &Hyperplane, attrs: &[Vec<f64>]) -> Result<Hyperplane> {
    let d = h.dim();
    if attrs.is_empty() {
        return Err(Error::EmptyAttributes);
    }
    if attrs.len() >= d {
        return Err(Error::InvalidConfig(format!(
            "{} conditioning directions leave no freedom in dimension {d}",
            attrs.len()
        )));
    }
    for a in attrs {
        check_dim(d, a.len())?;
    }
    let basis = orthonormalize(attrs);
    if basis.is_empty() {
        return Err(Error::EmptyAttributes);
    }
    let residual = project_out(h.normal(), &basis);
    let rn = scaled_norm(&residual);
    if rn < DEPENDENCE_TOLERANCE {
        return Err(Error::InseparableDirection);
    }
    let normal: Vec<f64> = residual.iter().map(|x| x / rn).collect();
    let mut out = h.with_normal(normal, 0.0)?;
    out.train_accuracy = None;
    out.val_accuracy = None;
    out.meta.insert("conditioned_on".into(), basis.len().to_string());
    out.meta.insert("bias_note".into(), "bias reset to 0 after conditioning".into());
    Ok(out)
}

/// `v − Σ (v·q) q` over an orthonormal basis, applied sequentially twice.
fn project_out(v: &[f64], basis: &[Vec<f64>]) -> Vec<f64> {
    let mut r = v.to_vec();
    for _ in 0..2 {
        for q in basis {
            let c = dot(q, &r);
            r.iter_mut().zip(q).for_each(|(ri, qi)| *ri -= c * qi);
        }
    }
    r
}

/// Edits only the selected rows of an `L × D` latent.
///
/// Row `l` in `layers` becomes `row + alpha · normal[l·D .. (l+1)·D]`; other
/// rows are copied bit for bit.
pub fn layerwise_edit(w: &Matrix, h: &Hyperplane, alpha: f64, layers: &[usize]) -> Result<Matrix> {
    let structure = LayerStructure { layers: w.rows(), layer_dim: w.cols() };
    check_dim(structure.dim(), h.dim())?;
    let mask = LayerMask::new(structure, layers.iter().copied())?;
    let flat = masked_edit(w.as_slice(), h, alpha, &mask)?;
    Matrix::from_vec(w.rows(), w.cols(), flat)
}

/// [`layerwise_edit`] on a flattened latent.
pub fn masked_edit(x: &[f64], h: &Hyperplane, alpha: f64, mask: &LayerMask) -> Result<Vec<f64>> {
    let structure = mask.structure();
    check_dim(structure.dim(), h.dim())?;
    check_dim(h.dim(), x.len())?;
    let mut out = x.to_vec();
    if alpha == 0.0 {
        return Ok(out);
    }
    for &l in mask.layers() {
        let span = structure.span(l);
        out[span.clone()]
            .iter_mut()
            .zip(&h.normal()[span])
            .for_each(|(xi, ni)| *xi += alpha * ni);
    }
    Ok(out)
}

/// The direction a spec edits along: conditioned when the spec carries
/// attribute directions.
pub fn effective_direction(h: &Hyperplane, spec: &EditSpec) -> Result<Hyperplane> {
    if let Some(mask) = &spec.layer_mask {
        check_dim(mask.structure().dim(), h.dim())?;
    }
    if spec.conditions.is_empty() {
        Ok(h.clone())
    } else {
        condition_direction(h, &spec.conditions)
    }
}

/// Applies `alpha` along an already-resolved direction, honoring the mask.
pub fn apply_direction(x: &[f64], direction: &Hyperplane, alpha: f64, mask: Option<&LayerMask>) -> Result<Vec<f64>> {
    match mask {
        Some(m) => masked_edit(x, direction, alpha, m),
        None => edit(x, direction, alpha),
    }
}

/// Applies `spec.alpha` with the spec's conditioning and layer mask.
pub fn apply(x: &[f64], h: &Hyperplane, spec: &EditSpec) -> Result<Vec<f64>> {
    let direction = effective_direction(h, spec)?;
    apply_direction(x, &direction, spec.alpha, spec.layer_mask.as_ref())
}

/// Applies `spec` to every row of `latents`.
pub fn apply_rows(latents: &Matrix, h: &Hyperplane, spec: &EditSpec) -> Result<Matrix> {
    let direction = effective_direction(h, spec)?;
    edit_rows(latents, &direction, spec.alpha, spec.layer_mask.as_ref())
}

pub fn edit_rows(latents: &Matrix, direction: &Hyperplane, alpha: f64, mask: Option<&LayerMask>) -> Result<Matrix> {
    check_dim(direction.dim(), latents.cols())?;
    let mut data = Vec::with_capacity(latents.rows() * latents.cols());
    for row in latents.iter_rows() {
        data.extend(apply_direction(row, direction, alpha, mask)?);
    }
    Matrix::from_vec(latents.rows(), latents.cols(), data)
}

/// One edited latent per alpha. Conditioning is resolved once, before the
/// sweep; `spec.alpha` is ignored.
pub fn sweep(x: &[f64], h: &Hyperplane, alphas: &[f64], spec: &EditSpec) -> Result<EditTrajectory> {
    if alphas.is_empty() {
        return Err(Error::EmptyInput("sweep needs at least one alpha"));
    }
    check_dim(h.dim(), x.len())?;
    let direction = effective_direction(h, spec)?;
    let latents = alphas
        .iter()
        .map(|&a| apply_direction(x, &direction, a, spec.layer_mask.as_ref()))
        .collect::<Result<Vec<_>>>()?;
    Ok(EditTrajectory { alphas: alphas.to_vec(), latents })
}

/// Unit vector along `v`; used by callers building attribute sets by hand.
pub fn unit(v: &[f64]) -> Option<Vec<f64>> {
    let n = norm(v);
    (n > 0.0 && n.is_finite()).then(|| v.iter().map(|x| x / n).collect())
}
