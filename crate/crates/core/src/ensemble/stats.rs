//! Summary statistics for failure counts.

/// Ordinary least-squares slope of `y` on `x`; `None` for fewer than two
/// distinct abscissae.
pub fn least_squares_slope(points: &[(f64, f64)]) -> Option<f64> {
    let n = points.len() as f64;
    if points.len() < 2 {
        return None;
    }
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

/// Sample mean and standard error `stdev / √n`.
pub fn mean_and_sem(values: &[usize]) -> (f64, f64) {
    if values.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let n = values.len() as f64;
    let mean = values.iter().map(|&v| v as f64).sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|&v| (v as f64 - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Empirical density of `values` in logarithmic bins covering `[lo, hi]`.
///
/// Bin edges are integers spaced geometrically; each returned point is
/// `(geometric bin centre, count / (width · total))`. Empty bins are skipped.
pub fn log_binned_density(values: &[usize], lo: usize, hi: usize, bins: usize) -> Vec<(f64, f64)> {
    if values.is_empty() || lo == 0 || hi < lo || bins == 0 {
        return Vec::new();
    }
    let ratio = ((hi + 1) as f64 / lo as f64).powf(1.0 / bins as f64);
    let mut edges: Vec<usize> = (0..=bins)
        .map(|i| (lo as f64 * ratio.powi(i as i32)).round() as usize)
        .collect();
    edges[bins] = hi + 1;
    edges.dedup();
    let total = values.len() as f64;
    edges
        .windows(2)
        .filter_map(|w| {
            let (a, b) = (w[0], w[1]);
            let count = values.iter().filter(|&&v| v >= a && v < b).count();
            if count == 0 {
                return None;
            }
            let width = (b - a) as f64;
            let centre = (a as f64 * (b - 1) as f64).sqrt();
            Some((centre, count as f64 / (width * total)))
        })
        .collect()
}

/// Log-log slope of the empirical failures density over `[lo, hi]`.
pub fn tail_slope(values: &[usize], lo: usize, hi: usize, bins: usize) -> Option<f64> {
    let pts: Vec<(f64, f64)> = log_binned_density(values, lo, hi, bins)
        .into_iter()
        .map(|(x, y)| (x.ln(), y.ln()))
        .collect();
    least_squares_slope(&pts)
}
