use crate::geom::Rng;

/// Draws `n_fine` distances by inverse CDF over the piecewise-constant density
/// whose bin `i` spans `[t_i, t_{i+1}]` (the last bin ends at `t_far`) and has
/// mass proportional to `weights[i]`. The `u` values are stratified. With no
/// positive weight the draws are uniform over `[t_near, t_far]`.
///
/// Output is ascending.
pub fn hierarchical_resample(
    t_near: f64,
    t_far: f64,
    coarse_t: &[f64],
    weights: &[f64],
    n_fine: usize,
    rng: &mut Rng,
) -> Vec<f64> {
    assert_eq!(coarse_t.len(), weights.len(), "one weight per coarse sample");
    let mut cdf = Vec::with_capacity(weights.len() + 1);
    cdf.push(0.0);
    let mut acc = 0.0;
    for &w in weights {
        acc += if w > 0.0 { w } else { 0.0 };
        cdf.push(acc);
    }
    let strat = |k: usize, rng: &mut Rng| (k as f64 + rng.uniform()) / n_fine as f64;
    if !(acc > 0.0 && acc.is_finite()) || coarse_t.is_empty() {
        return (0..n_fine).map(|k| t_near + strat(k, rng) * (t_far - t_near)).collect();
    }
    let edge = |i: usize| if i + 1 < coarse_t.len() { coarse_t[i + 1] } else { t_far };
    (0..n_fine)
        .map(|k| {
            let u = (strat(k, rng) * acc).min(acc.next_down());
            // last bin whose start lies at or below u; zero-mass bins are skipped
            let b = cdf.partition_point(|&c| c <= u) - 1;
            let b = b.min(weights.len() - 1);
            let (lo, hi) = (coarse_t[b], edge(b));
            let frac = ((u - cdf[b]) / (cdf[b + 1] - cdf[b])).clamp(0.0, 1.0);
            (lo + frac * (hi - lo)).min(hi)
        })
        .collect()
}

/// Sorted union of two ascending lists.
pub fn merge_sorted(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() || j < b.len() {
        if j == b.len() || (i < a.len() && a[i] <= b[j]) {
            out.push(a[i]);
            i += 1;
        } else {
            out.push(b[j]);
            j += 1;
        }
    }
    out
}
