use serde::Serialize;

use crate::error::{Error, Result};

pub const HISTOGRAM_BINS: usize = 50;

/// Fixed-width histogram; the last bin is closed on the right.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Histogram {
    pub edges: Vec<f64>,
    pub counts: Vec<usize>,
}

impl Histogram {
    fn new(lo: f64, hi: f64, values: &[f64]) -> Self {
        let width = (hi - lo) / HISTOGRAM_BINS as f64;
        let edges = (0..=HISTOGRAM_BINS).map(|i| if i == HISTOGRAM_BINS { hi } else { lo + width * i as f64 }).collect();
        let mut counts = vec![0; HISTOGRAM_BINS];
        for &v in values {
            let bin = ((v - lo) / width).floor();
            let bin = if bin.is_finite() { (bin.max(0.0) as usize).min(HISTOGRAM_BINS - 1) } else { 0 };
            counts[bin] += 1;
        }
        Self { edges, counts }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AlphaStats {
    pub alpha: f64,
    pub mean: f64,
    /// Population standard deviation.
    pub std: f64,
    pub histogram: Histogram,
}

/// Score distribution per edit coefficient; histograms share one set of
/// edges spanning the global score range.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepReport {
    pub entries: Vec<AlphaStats>,
}

impl SweepReport {
    pub fn means(&self) -> Vec<f64> {
        self.entries.iter().map(|e| e.mean).collect()
    }

    /// `alpha,mean,std` rows under a header.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("alpha,mean,std\n");
        for e in &self.entries {
            out.push_str(&format!("{},{},{}\n", e.alpha, e.mean, e.std));
        }
        out
    }
}

pub fn sweep_report(scores_per_alpha: &[(f64, Vec<f64>)]) -> Result<SweepReport> {
    let Some((_, first)) = scores_per_alpha.first() else {
        return Err(Error::EmptyInput("sweep report needs at least one alpha"));
    };
    let n = first.len();
    if n == 0 {
        return Err(Error::EmptyInput("sweep report needs at least one score per alpha"));
    }
    for (_, s) in scores_per_alpha {
        if s.len() != n {
            return Err(Error::DimensionMismatch { expected: n, got: s.len() });
        }
        if let Some(index) = s.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { index });
        }
    }
    let all = scores_per_alpha.iter().flat_map(|(_, s)| s.iter().copied());
    let (mut lo, mut hi) = all.fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), v| (l.min(v), h.max(v)));
    if lo == hi {
        lo -= 0.5;
        hi += 0.5;
    }
    let entries = scores_per_alpha
        .iter()
        .map(|(alpha, s)| {
            let nf = s.len() as f64;
            let rough = s.iter().sum::<f64>() / nf;
            // one refinement pass; makes constant inputs come out exact
            let mean = rough + s.iter().map(|v| v - rough).sum::<f64>() / nf;
            let std = (s.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / nf).sqrt();
            AlphaStats { alpha: *alpha, mean, std, histogram: Histogram::new(lo, hi, s) }
        })
        .collect();
    Ok(SweepReport { entries })
}
