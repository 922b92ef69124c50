//! Separating hyperplanes from L2-regularized logistic regression.
//!
//! The optimizer is plain full-batch gradient descent with Armijo
//! backtracking, so the loss history is monotone and the result is a pure
//! function of the data and the configuration. Per-feature standardization is
//! applied implicitly (the design matrix is never copied) and folded back into
//! raw coordinates before the weights are exported as a unit normal.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::{split, LabeledDataset, LayerStructure, SplitSpec};
use crate::error::{Error, Result};
use crate::matrix::{check_dim, dot, norm, Matrix};
use crate::tensor_io::{HyperplaneRecord, UNIT_NORM_TOLERANCE};

/// Rows per gradient-accumulation block. Partial sums are reduced in block
/// order, which makes the result independent of the rayon thread count.
const BLOCK_ROWS: usize = 256;
const ARMIJO_C: f64 = 1e-4;
const MAX_HALVINGS: usize = 60;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitConfig {
    pub l2_lambda: f64,
    pub max_iters: usize,
    pub tol: f64,
    pub learning_rate: f64,
    pub standardize: bool,
}

impl Default for FitConfig {
    fn default() -> Self {
        Self { l2_lambda: 1e-4, max_iters: 500, tol: 1e-6, learning_rate: 0.1, standardize: true }
    }
}

impl FitConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.l2_lambda >= 0.0 && self.l2_lambda.is_finite()) {
            return Err(Error::InvalidConfig(format!("l2_lambda {} must be >= 0", self.l2_lambda)));
        }
        if self.max_iters == 0 {
            return Err(Error::InvalidConfig("max_iters must be positive".into()));
        }
        if self.tol.is_nan() || self.tol <= 0.0 {
            return Err(Error::InvalidConfig(format!("tol {} must be > 0", self.tol)));
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::InvalidConfig(format!("learning_rate {} must be > 0", self.learning_rate)));
        }
        Ok(())
    }
}

/// Which latent space a hyperplane lives in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SpaceTag {
    #[serde(rename = "z")]
    Z,
    #[serde(rename = "w+")]
    WPlus,
}

impl SpaceTag {
    pub fn as_str(self) -> &'static str {
        match self {
            SpaceTag::Z => "z",
            SpaceTag::WPlus => "w+",
        }
    }
}

impl std::str::FromStr for SpaceTag {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "z" => Ok(SpaceTag::Z),
            "w+" | "w" => Ok(SpaceTag::WPlus),
            other => Err(Error::InvalidConfig(format!("unknown space tag {other:?}"))),
        }
    }
}

/// A decision boundary `normal · x + bias = 0` with unit `normal`.
///
/// The normal doubles as the edit direction: moving a latent by `alpha`
/// along it shifts [`direction_score`] by exactly `alpha`.
#[derive(Debug, Clone, PartialEq)]
pub struct Hyperplane {
    normal: Vec<f64>,
    bias: f64,
    pub train_accuracy: Option<f64>,
    pub val_accuracy: Option<f64>,
    pub space_tag: SpaceTag,
    pub layer_structure: Option<LayerStructure>,
    /// Extra provenance carried through to the JSON record.
    pub meta: BTreeMap<String, String>,
}

impl Hyperplane {
    /// Requires `normal` to be unit length within 1e-6.
    pub fn new(normal: Vec<f64>, bias: f64) -> Result<Self> {
        if normal.is_empty() {
            return Err(Error::InvalidHyperplane("empty normal".into()));
        }
        let n = norm(&normal);
        if !n.is_finite() || (n - 1.0).abs() > UNIT_NORM_TOLERANCE {
            return Err(Error::InvalidHyperplane(format!("normal has norm {n}, expected 1")));
        }
        if !bias.is_finite() {
            return Err(Error::InvalidHyperplane("non-finite bias".into()));
        }
        Ok(Self {
            normal,
            bias,
            train_accuracy: None,
            val_accuracy: None,
            space_tag: SpaceTag::Z,
            layer_structure: None,
            meta: BTreeMap::new(),
        })
    }

    /// Normalizes an arbitrary non-zero direction; bias 0.
    pub fn from_direction(direction: &[f64]) -> Result<Self> {
        let n = norm(direction);
        if !(n > 0.0 && n.is_finite()) {
            return Err(Error::ZeroWeights);
        }
        Self::new(direction.iter().map(|x| x / n).collect(), 0.0)
    }

    pub fn normal(&self) -> &[f64] {
        &self.normal
    }

    pub fn bias(&self) -> f64 {
        self.bias
    }

    pub fn dim(&self) -> usize {
        self.normal.len()
    }

    /// Same plane with a different unit normal and bias, keeping tags.
    pub(crate) fn with_normal(&self, normal: Vec<f64>, bias: f64) -> Result<Self> {
        let mut h = Self::new(normal, bias)?;
        h.space_tag = self.space_tag;
        h.layer_structure = self.layer_structure;
        h.meta = self.meta.clone();
        Ok(h)
    }

    pub fn predict(&self, x: &[f64]) -> bool {
        dot(&self.normal, x) + self.bias > 0.0
    }

    pub fn to_record(&self) -> HyperplaneRecord {
        let mut meta = self.meta.clone();
        meta.insert("space".into(), self.space_tag.as_str().into());
        if let Some(a) = self.train_accuracy {
            meta.insert("train_accuracy".into(), a.to_string());
        }
        if let Some(a) = self.val_accuracy {
            meta.insert("val_accuracy".into(), a.to_string());
        }
        if let Some(ls) = self.layer_structure {
            meta.insert("layers".into(), ls.to_string());
        }
        HyperplaneRecord { dim: self.dim(), normal: self.normal.clone(), bias: self.bias, meta }
    }

    pub fn from_record(rec: &HyperplaneRecord) -> Result<Self> {
        rec.validate()?;
        let mut h = Self::new(rec.normal.clone(), rec.bias)?;
        let mut meta = rec.meta.clone();
        let parse_acc = |s: String| -> Result<f64> {
            s.parse().map_err(|_| Error::InvalidHyperplane(format!("bad accuracy {s:?}")))
        };
        if let Some(s) = meta.remove("space") {
            h.space_tag = s.parse()?;
        }
        if let Some(s) = meta.remove("train_accuracy") {
            h.train_accuracy = Some(parse_acc(s)?);
        }
        if let Some(s) = meta.remove("val_accuracy") {
            h.val_accuracy = Some(parse_acc(s)?);
        }
        if let Some(s) = meta.remove("layers") {
            let ls: LayerStructure = s.parse()?;
            check_dim(ls.dim(), h.dim())?;
            h.layer_structure = Some(ls);
        }
        h.meta = meta;
        Ok(h)
    }
}

#[derive(Debug, Clone)]
pub struct FitOutcome {
    pub hyperplane: Hyperplane,
    /// Objective value before the first step and after every accepted step.
    pub loss_history: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
}

fn sigmoid(m: f64) -> f64 {
    if m >= 0.0 {
        1.0 / (1.0 + (-m).exp())
    } else {
        let e = m.exp();
        e / (1.0 + e)
    }
}

/// log(1 + e^m) without overflow.
fn softplus(m: f64) -> f64 {
    m.max(0.0) + (-m.abs()).exp().ln_1p()
}

/// Per-feature affine map `x̃ = (x - shift) / scale`.
struct Standardizer {
    shift: Vec<f64>,
    scale: Vec<f64>,
}

impl Standardizer {
    fn identity(d: usize) -> Self {
        Self { shift: vec![0.0; d], scale: vec![1.0; d] }
    }

    fn from_data(x: &Matrix) -> Self {
        let n = x.rows() as f64;
        let d = x.cols();
        let mut mean = vec![0.0; d];
        for row in x.iter_rows() {
            mean.iter_mut().zip(row).for_each(|(m, v)| *m += v);
        }
        mean.iter_mut().for_each(|m| *m /= n);
        let mut var = vec![0.0; d];
        for row in x.iter_rows() {
            var.iter_mut().zip(row.iter().zip(&mean)).for_each(|(s, (v, m))| *s += (v - m) * (v - m));
        }
        let scale = var
            .into_iter()
            .map(|s| {
                let sd = (s / n).sqrt();
                // constant feature: centering zeroes it, leave it unscaled
                if sd > 0.0 { sd } else { 1.0 }
            })
            .collect();
        Self { shift: mean, scale }
    }

    /// Raw-coordinate weights and bias equivalent to `(theta, b)` applied to
    /// standardized features.
    fn to_raw(&self, theta: &[f64], b: f64) -> (Vec<f64>, f64) {
        let w: Vec<f64> = theta.iter().zip(&self.scale).map(|(t, s)| t / s).collect();
        let b_raw = b - dot(&w, &self.shift);
        (w, b_raw)
    }
}

struct Evaluation {
    loss: f64,
    grad_theta: Vec<f64>,
    grad_b: f64,
}

/// Regularized objective over standardized parameters.
struct Objective<'a> {
    x: &'a Matrix,
    y: &'a [u8],
    std: Standardizer,
    lambda: f64,
}

impl Objective<'_> {
    fn evaluate(&self, theta: &[f64], b: f64) -> Evaluation {
        let n = self.x.rows();
        let d = self.x.cols();
        let (w, b_raw) = self.std.to_raw(theta, b);

        let partials: Vec<(f64, f64, Vec<f64>)> = (0..n.div_ceil(BLOCK_ROWS))
            .into_par_iter()
            .map(|block| {
                let lo = block * BLOCK_ROWS;
                let hi = (lo + BLOCK_ROWS).min(n);
                let mut loss = 0.0;
                let mut resid_sum = 0.0;
                let mut g = vec![0.0; d];
                for i in lo..hi {
                    let row = self.x.row(i);
                    let m = dot(&w, row) + b_raw;
                    let yi = f64::from(self.y[i]);
                    loss += softplus(m) - yi * m;
                    let r = sigmoid(m) - yi;
                    resid_sum += r;
                    g.iter_mut().zip(row).for_each(|(gj, xj)| *gj += r * xj);
                }
                (loss, resid_sum, g)
            })
            .collect();

        let mut loss = 0.0;
        let mut resid_sum = 0.0;
        let mut g_raw = vec![0.0; d];
        for (l, r, g) in partials {
            loss += l;
            resid_sum += r;
            g_raw.iter_mut().zip(&g).for_each(|(a, b)| *a += b);
        }
        let nf = n as f64;
        let reg = 0.5 * self.lambda * dot(theta, theta);
        // d/dθ̃_j of mean loss = (Σ r_i x_ij − shift_j Σ r_i) / (n · scale_j)
        let grad_theta = (0..d)
            .map(|j| (g_raw[j] - self.std.shift[j] * resid_sum) / (nf * self.std.scale[j]) + self.lambda * theta[j])
            .collect();
        Evaluation { loss: loss / nf + reg, grad_theta, grad_b: resid_sum / nf }
    }
}

/// Fits the separating hyperplane on `train`.
///
/// Minimizes mean logistic loss plus `(λ/2)‖θ‖²` (bias unregularized) by
/// gradient descent; each step starts at `learning_rate` and halves until the
/// Armijo condition holds. Stops when the gradient norm drops below `tol`,
/// when no decreasing step exists at machine precision, or at `max_iters`.
pub fn fit(train: &LabeledDataset, config: &FitConfig) -> Result<FitOutcome> {
    config.validate()?;
    let d = train.dim();
    if d == 0 {
        return Err(Error::InvalidConfig("latent dimension must be at least 1".into()));
    }
    let positives = train.labels().iter().filter(|&&l| l == 1).count();
    if positives == 0 || positives == train.len() {
        return Err(Error::SingleClass);
    }
    let x = train.latents();
    let std = if config.standardize { Standardizer::from_data(x) } else { Standardizer::identity(d) };
    let objective = Objective { x, y: train.labels(), std, lambda: config.l2_lambda };

    let mut theta = vec![0.0; d];
    let mut b = 0.0;
    let mut current = objective.evaluate(&theta, b);
    if !current.loss.is_finite() {
        return Err(Error::Divergence { iteration: 0 });
    }
    let mut history = vec![current.loss];
    let mut converged = false;
    let mut iterations = 0;

    for iter in 0..config.max_iters {
        let grad_sq = dot(&current.grad_theta, &current.grad_theta) + current.grad_b * current.grad_b;
        if grad_sq.sqrt() < config.tol {
            converged = true;
            break;
        }
        let mut step = config.learning_rate;
        let mut accepted = None;
        for _ in 0..MAX_HALVINGS {
            let cand_theta: Vec<f64> =
                theta.iter().zip(&current.grad_theta).map(|(t, g)| t - step * g).collect();
            let cand_b = b - step * current.grad_b;
            let eval = objective.evaluate(&cand_theta, cand_b);
            if !eval.loss.is_finite() {
                return Err(Error::Divergence { iteration: iter + 1 });
            }
            if eval.loss <= current.loss - ARMIJO_C * step * grad_sq {
                accepted = Some((cand_theta, cand_b, eval));
                break;
            }
            step *= 0.5;
        }
        let Some((t, nb, eval)) = accepted else {
            // No decrease representable at this precision.
            converged = true;
            break;
        };
        theta = t;
        b = nb;
        current = eval;
        history.push(current.loss);
        iterations = iter + 1;
    }

    let (w, b_raw) = objective.std.to_raw(&theta, b);
    let w_norm = norm(&w);
    if w_norm.is_nan() || w_norm <= 0.0 || !w_norm.is_finite() {
        return Err(Error::ZeroWeights);
    }
    let normal: Vec<f64> = w.iter().map(|v| v / w_norm).collect();
    let mut h = Hyperplane::new(normal, b_raw / w_norm)?;
    h.layer_structure = train.layer_structure();
    h.space_tag = if h.layer_structure.is_some() { SpaceTag::WPlus } else { SpaceTag::Z };
    h.train_accuracy = Some(accuracy(&h, train)?);
    Ok(FitOutcome { hyperplane: h, loss_history: history, iterations, converged })
}

/// Fits on `train` and records held-out accuracy on `val`.
pub fn fit_with_validation(train: &LabeledDataset, val: &LabeledDataset, config: &FitConfig) -> Result<FitOutcome> {
    let mut out = fit(train, config)?;
    out.hyperplane.val_accuracy = Some(accuracy(&out.hyperplane, val)?);
    Ok(out)
}

/// Fraction of samples where `normal · x + bias > 0` agrees with `label == 1`.
pub fn accuracy(h: &Hyperplane, data: &LabeledDataset) -> Result<f64> {
    check_dim(h.dim(), data.dim())?;
    if data.is_empty() {
        return Err(Error::EmptyInput("accuracy on an empty dataset"));
    }
    let correct = data
        .latents()
        .iter_rows()
        .zip(data.labels())
        .filter(|(x, &label)| h.predict(x) == (label == 1))
        .count();
    Ok(correct as f64 / data.len() as f64)
}

/// Signed distance `normal · x`, without the bias term.
pub fn direction_score(h: &Hyperplane, x: &[f64]) -> Result<f64> {
    check_dim(h.dim(), x.len())?;
    Ok(dot(h.normal(), x))
}

#[derive(Debug, Clone)]
pub struct SpaceComparison {
    pub z: Hyperplane,
    pub w: Hyperplane,
    pub z_val_accuracy: f64,
    pub w_val_accuracy: f64,
}

impl SpaceComparison {
    /// Extended-space minus plain-space validation accuracy.
    pub fn difference(&self) -> f64 {
        self.w_val_accuracy - self.z_val_accuracy
    }
}

/// Fits the same labeled samples in two representations (plain latent and
/// extended latent) using one shared split and reports both held-out
/// accuracies.
pub fn compare_spaces(
    z_data: &LabeledDataset,
    w_data: &LabeledDataset,
    config: &FitConfig,
    split_spec: SplitSpec,
) -> Result<SpaceComparison> {
    if z_data.len() != w_data.len() || z_data.labels() != w_data.labels() {
        return Err(Error::LabelMismatch);
    }
    let (z_train, z_val) = split(z_data, split_spec)?;
    let (w_train, w_val) = split(w_data, split_spec)?;
    let mut z = fit_with_validation(&z_train, &z_val, config)?.hyperplane;
    let mut w = fit_with_validation(&w_train, &w_val, config)?.hyperplane;
    z.space_tag = SpaceTag::Z;
    w.space_tag = SpaceTag::WPlus;
    let z_val_accuracy = z.val_accuracy.expect("set by fit_with_validation");
    let w_val_accuracy = w.val_accuracy.expect("set by fit_with_validation");
    Ok(SpaceComparison { z, w, z_val_accuracy, w_val_accuracy })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::ThresholdStrategy;
    use crate::rng::Xoshiro256StarStar;
    use proptest::prelude::*;

    /// (−1, 0) → 0 and (1, 0) → 1, 50 copies each with jitter of sd 0.01 on
    /// the first coordinate and, when `isotropic`, on the second as well.
    fn separable_toy(seed: u64, isotropic: bool) -> LabeledDataset {
        let mut rng = Xoshiro256StarStar::seed_from_u64(seed);
        let mut rows = Vec::new();
        let mut labels = Vec::new();
        for i in 0..100 {
            let cls = (i % 2) as u8;
            let cx = if cls == 1 { 1.0 } else { -1.0 };
            let y = if isotropic { 0.01 * rng.next_normal() } else { 0.0 };
            rows.push(vec![cx + 0.01 * rng.next_normal(), y]);
            labels.push(cls);
        }
        let scores = labels.iter().map(|&l| f64::from(l)).collect();
        LabeledDataset::new(Matrix::from_rows(&rows).unwrap(), scores, labels, None).unwrap()
    }

    fn random_problem(seed: u64, n: usize, d: usize) -> LabeledDataset {
        let mut rng = Xoshiro256StarStar::seed_from_u64(seed);
        let rows: Vec<Vec<f64>> = (0..n).map(|_| (0..d).map(|_| rng.next_normal() * 2.0 + 0.5).collect()).collect();
        let scores: Vec<f64> = rows.iter().map(|r| r[0] - 0.5 * r[1] + rng.next_normal()).collect();
        LabeledDataset::from_scores(Matrix::from_rows(&rows).unwrap(), scores, ThresholdStrategy::Mean, None)
            .unwrap()
            .0
    }

    #[test]
    fn separable_toy_recovers_axis() {
        let data = separable_toy(1, false);
        let (train, val) = split(&data, SplitSpec { train_fraction: 0.8, seed: 3 }).unwrap();
        let out = fit_with_validation(&train, &val, &FitConfig::default()).unwrap();
        let h = &out.hyperplane;
        assert_eq!(h.val_accuracy, Some(1.0));
        assert!(h.normal()[0].abs() >= 0.99, "{:?}", h.normal());
        assert_eq!(accuracy(h, &data).unwrap(), 1.0);

        let flipped_labels: Vec<u8> = data.labels().iter().map(|l| 1 - l).collect();
        let flipped =
            LabeledDataset::new(data.latents().clone(), data.scores().to_vec(), flipped_labels, None).unwrap();
        assert_eq!(accuracy(h, &flipped).unwrap(), 0.0);
    }

    #[test]
    fn isotropic_jitter_toy() {
        let data = separable_toy(1, true);
        let (train, val) = split(&data, SplitSpec { train_fraction: 0.8, seed: 3 }).unwrap();
        let raw = FitConfig { standardize: false, ..Default::default() };
        let h = fit_with_validation(&train, &val, &raw).unwrap().hyperplane;
        assert!(h.normal()[0].abs() >= 0.99, "{:?}", h.normal());
        assert_eq!(h.val_accuracy, Some(1.0));
        // Standardizing blows the 0.01-sd noise coordinate up to unit scale, so
        // the exported direction tilts, but every decision stays correct.
        let h = fit_with_validation(&train, &val, &FitConfig::default()).unwrap().hyperplane;
        assert_eq!(h.val_accuracy, Some(1.0));
        assert_eq!(h.train_accuracy, Some(1.0));
    }

    #[test]
    fn single_class_rejected() {
        let data = separable_toy(2, false);
        let zeros = vec![0u8; data.len()];
        let one_class = LabeledDataset::new(data.latents().clone(), data.scores().to_vec(), zeros, None).unwrap();
        assert!(matches!(fit(&one_class, &FitConfig::default()), Err(Error::SingleClass)));
    }

    #[test]
    fn invalid_config_rejected() {
        let data = separable_toy(2, false);
        for cfg in [
            FitConfig { l2_lambda: -1.0, ..Default::default() },
            FitConfig { max_iters: 0, ..Default::default() },
            FitConfig { tol: 0.0, ..Default::default() },
            FitConfig { learning_rate: 0.0, ..Default::default() },
        ] {
            assert!(matches!(fit(&data, &cfg), Err(Error::InvalidConfig(_))));
        }
    }

    #[test]
    fn loss_history_non_increasing() {
        let data = random_problem(5, 400, 10);
        for standardize in [true, false] {
            let cfg = FitConfig { standardize, max_iters: 200, ..Default::default() };
            let out = fit(&data, &cfg).unwrap();
            assert!(out.loss_history.len() > 1);
            for w in out.loss_history.windows(2) {
                assert!(w[1] <= w[0], "{} > {}", w[1], w[0]);
            }
        }
    }

    /// Central finite differences of the objective against its analytic gradient.
    #[test]
    fn gradient_matches_finite_differences() {
        for seed in 0..5 {
            let data = random_problem(100 + seed, 60, 10);
            let x = data.latents();
            let obj = Objective { x, y: data.labels(), std: Standardizer::from_data(x), lambda: 0.3 };
            let mut rng = Xoshiro256StarStar::seed_from_u64(seed);
            let theta: Vec<f64> = (0..10).map(|_| rng.next_normal()).collect();
            let b = rng.next_normal();
            let eval = obj.evaluate(&theta, b);
            let h = 1e-6;
            for j in 0..10 {
                let mut tp = theta.clone();
                let mut tm = theta.clone();
                tp[j] += h;
                tm[j] -= h;
                let fd = (obj.evaluate(&tp, b).loss - obj.evaluate(&tm, b).loss) / (2.0 * h);
                let an = eval.grad_theta[j];
                let rel = (fd - an).abs() / an.abs().max(1e-8);
                assert!(rel <= 1e-5, "seed {seed} j {j}: fd {fd} analytic {an}");
            }
            let fd_b = (obj.evaluate(&theta, b + h).loss - obj.evaluate(&theta, b - h).loss) / (2.0 * h);
            assert!((fd_b - eval.grad_b).abs() / eval.grad_b.abs().max(1e-8) <= 1e-5);
        }
    }

    #[test]
    fn normalization_preserves_every_decision() {
        let data = random_problem(9, 300, 6);
        let cfg = FitConfig { max_iters: 100, ..Default::default() };
        // Recompute the raw (unnormalized) weights the way fit does.
        let x = data.latents();
        let obj = Objective { x, y: data.labels(), std: Standardizer::from_data(x), lambda: cfg.l2_lambda };
        let out = fit(&data, &cfg).unwrap();
        let h = &out.hyperplane;
        let mut rng = Xoshiro256StarStar::seed_from_u64(4);
        let theta: Vec<f64> = (0..6).map(|_| rng.next_normal()).collect();
        let (w, b_raw) = obj.std.to_raw(&theta, 0.3);
        let scaled = Hyperplane::from_direction(&w).unwrap();
        let c = norm(&w);
        for row in x.iter_rows() {
            assert_eq!(dot(&w, row) + b_raw > 0.0, dot(scaled.normal(), row) + b_raw / c > 0.0);
        }
        assert!((norm(h.normal()) - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn fit_is_deterministic_across_thread_counts() {
        let data = random_problem(13, 2000, 16);
        let cfg = FitConfig { max_iters: 50, ..Default::default() };
        let run = |threads| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap()
                .install(|| fit(&data, &cfg).unwrap())
        };
        let a = run(1);
        let b = run(4);
        let c = run(4);
        assert_eq!(a.hyperplane, b.hyperplane);
        assert_eq!(b.hyperplane, c.hyperplane);
        assert_eq!(a.loss_history, b.loss_history);
    }

    #[test]
    fn direction_score_is_plain_dot() {
        let mut e1 = vec![0.0; 4];
        e1[0] = 1.0;
        let h = Hyperplane::new(e1, 5.0).unwrap();
        assert_eq!(direction_score(&h, &[3.0, 1.0, 2.0, -7.0]).unwrap(), 3.0);
        assert_eq!(direction_score(&h, &[0.0; 4]).unwrap(), 0.0);
        assert!(matches!(direction_score(&h, &[0.0; 3]), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn record_roundtrip_keeps_tags() {
        let mut h = Hyperplane::from_direction(&[3.0, 4.0, 0.0, 0.0]).unwrap();
        h.space_tag = SpaceTag::WPlus;
        h.layer_structure = Some(LayerStructure { layers: 2, layer_dim: 2 });
        h.train_accuracy = Some(0.75);
        h.val_accuracy = Some(0.5);
        h.meta.insert("threshold".into(), "mean".into());
        let back = Hyperplane::from_record(&h.to_record()).unwrap();
        assert_eq!(back, h);
    }

    #[test]
    fn compare_spaces_identical_inputs_agree() {
        let data = random_problem(21, 200, 5);
        let cfg = FitConfig { max_iters: 100, ..Default::default() };
        let r = compare_spaces(&data, &data, &cfg, SplitSpec::default()).unwrap();
        assert_eq!(r.difference(), 0.0);
    }

    #[test]
    fn compare_spaces_label_mismatch() {
        let a = random_problem(21, 200, 5);
        let flipped: Vec<u8> = a.labels().iter().map(|l| 1 - l).collect();
        let b = LabeledDataset::new(a.latents().clone(), a.scores().to_vec(), flipped, None).unwrap();
        assert!(matches!(
            compare_spaces(&a, &b, &FitConfig::default(), SplitSpec::default()),
            Err(Error::LabelMismatch)
        ));
    }

    proptest! {
        #[test]
        fn direction_score_matches_reverse_summation(seed in any::<u64>(), d in 1usize..300) {
            let mut rng = Xoshiro256StarStar::seed_from_u64(seed);
            let raw: Vec<f64> = (0..d).map(|_| rng.next_normal()).collect();
            prop_assume!(norm(&raw) > 1e-6);
            let h = Hyperplane::from_direction(&raw).unwrap();
            let x: Vec<f64> = (0..d).map(|_| rng.next_normal()).collect();
            let mut brute = 0.0;
            for i in (0..d).rev() {
                brute += h.normal()[i] * x[i];
            }
            prop_assert!((direction_score(&h, &x).unwrap() - brute).abs() <= 1e-12);
        }
    }
}
