use std::cmp::Ordering;

use crate::error::{Error, Result};

fn check_pair(a: &[f64], b: &[f64]) -> Result<()> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch { expected: a.len(), got: b.len() });
    }
    if a.len() < 2 {
        return Err(Error::TooFewSamples { need: 2, got: a.len() });
    }
    if let Some(index) = a.iter().chain(b).position(|x| !x.is_finite()) {
        return Err(Error::NonFinite { index: index % a.len() });
    }
    Ok(())
}

// Inputs are finite, so partial_cmp never fails; -0.0 and 0.0 compare equal.
fn cmp(x: &f64, y: &f64) -> Ordering {
    x.partial_cmp(y).expect("finite values")
}

/// Number of tied pairs: Σ t(t−1)/2 over runs of equal values in sorted order.
fn tied_pairs<T: PartialEq>(sorted: &[T]) -> u64 {
    let mut total = 0u64;
    let mut run = 1u64;
    for w in sorted.windows(2) {
        if w[0] == w[1] {
            run += 1;
        } else {
            total += run * (run - 1) / 2;
            run = 1;
        }
    }
    total + run * (run - 1) / 2
}

/// Sorts `v` (stable merge sort) and returns the number of inversions removed.
fn merge_sort_count(v: &mut [f64], buf: &mut [f64]) -> u64 {
    let n = v.len();
    if n < 2 {
        return 0;
    }
    let mid = n / 2;
    let mut swaps = merge_sort_count(&mut v[..mid], &mut buf[..mid]) + merge_sort_count(&mut v[mid..], &mut buf[mid..]);
    let (mut i, mut j, mut k) = (0, mid, 0);
    while i < mid && j < n {
        if v[j] < v[i] {
            buf[k] = v[j];
            swaps += (mid - i) as u64;
            j += 1;
        } else {
            buf[k] = v[i];
            i += 1;
        }
        k += 1;
    }
    buf[k..k + mid - i].copy_from_slice(&v[i..mid]);
    k += mid - i;
    buf[k..k + n - j].copy_from_slice(&v[j..n]);
    v.copy_from_slice(&buf[..n]);
    swaps
}

/// Kendall's tau-b, `(C − D) / sqrt((C + D + T_a)(C + D + T_b))`, in
/// O(n log n) by Knight's merge-sort inversion count.
pub fn kendall_tau(a: &[f64], b: &[f64]) -> Result<f64> {
    check_pair(a, b)?;
    let n = a.len() as u64;
    let mut pairs: Vec<(f64, f64)> = a.iter().copied().zip(b.iter().copied()).collect();
    pairs.sort_by(|p, q| cmp(&p.0, &q.0).then_with(|| cmp(&p.1, &q.1)));

    let total = n * (n - 1) / 2;
    let ties_a = tied_pairs(&pairs.iter().map(|p| p.0).collect::<Vec<_>>());
    let ties_joint = tied_pairs(&pairs);

    let mut ys: Vec<f64> = pairs.iter().map(|p| p.1).collect();
    let mut buf = vec![0.0; ys.len()];
    let swaps = merge_sort_count(&mut ys, &mut buf);
    let ties_b = tied_pairs(&ys);

    let untied_a = total - ties_a;
    let untied_b = total - ties_b;
    if untied_a == 0 || untied_b == 0 {
        return Err(Error::AllTied);
    }
    // C − D = total − ties_a − ties_b + ties_joint − 2·swaps
    let numer = total as f64 - ties_a as f64 - ties_b as f64 + ties_joint as f64 - 2.0 * swaps as f64;
    let tau = numer / ((untied_a as f64) * (untied_b as f64)).sqrt();
    Ok(tau.clamp(-1.0, 1.0))
}

/// 1-based fractional ranks; tied values share the mean of their positions.
pub fn average_ranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&i, &j| cmp(&values[i], &values[j]));
    let mut ranks = vec![0.0; values.len()];
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && values[order[end]] == values[order[start]] {
            end += 1;
        }
        // positions start+1 ..= end
        let rank = (start + 1 + end) as f64 / 2.0;
        for &idx in &order[start..end] {
            ranks[idx] = rank;
        }
        start = end;
    }
    ranks
}

/// Spearman's rho: Pearson correlation of average ranks.
pub fn spearman_rho(a: &[f64], b: &[f64]) -> Result<f64> {
    check_pair(a, b)?;
    let ra = average_ranks(a);
    let rb = average_ranks(b);
    let n = ra.len() as f64;
    // Mean rank is exactly (n + 1) / 2 regardless of ties.
    let mean = (n + 1.0) / 2.0;
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (x, y) in ra.iter().zip(&rb) {
        let (dx, dy) = (x - mean, y - mean);
        sab += dx * dy;
        saa += dx * dx;
        sbb += dy * dy;
    }
    if saa == 0.0 || sbb == 0.0 {
        return Err(Error::AllTied);
    }
    Ok((sab / (saa * sbb).sqrt()).clamp(-1.0, 1.0))
}
