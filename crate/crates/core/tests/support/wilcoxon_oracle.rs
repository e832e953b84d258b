//! Brute-force reference for the signed-rank test: rank by counting, then
//! enumerate every sign assignment.

/// Two-tailed p value and (W+, W-) for paired samples, or `None` when every
/// difference is zero.
pub fn wilcoxon_enumerate(x: &[f64], y: &[f64]) -> Option<(f64, f64, f64)> {
    let d: Vec<f64> = x.iter().zip(y).map(|(a, b)| a - b).filter(|v| *v != 0.0).collect();
    let n = d.len();
    if n == 0 {
        return None;
    }
    assert!(n <= 24, "enumeration oracle is for small n");
    let ranks: Vec<f64> = d
        .iter()
        .map(|v| {
            let below = d.iter().filter(|w| w.abs() < v.abs()).count() as f64;
            let equal = d.iter().filter(|w| w.abs() == v.abs()).count() as f64;
            below + (equal + 1.0) / 2.0
        })
        .collect();
    let w_plus: f64 = d.iter().zip(&ranks).filter(|(v, _)| **v > 0.0).map(|(_, r)| r).sum();
    let w_minus: f64 = ranks.iter().sum::<f64>() - w_plus;
    let mean = (n * (n + 1)) as f64 / 4.0;
    let observed = (w_plus - mean).abs();
    let mut extreme = 0u64;
    for mask in 0u64..(1 << n) {
        let t: f64 = (0..n).filter(|i| mask >> i & 1 == 1).map(|i| ranks[i]).sum();
        if (t - mean).abs() >= observed {
            extreme += 1;
        }
    }
    Some((extreme as f64 / (1u64 << n) as f64, w_plus, w_minus))
}
