//! Analytic convergence bounds for LWMA after a hashrate change.

/// Per-block contraction `(N - 1) / (N + 1)`.
pub fn decay_per_block(window: u64) -> f64 {
    let n = window as f64;
    (n - 1.0) / (n + 1.0)
}

/// `((N - 1)/(N + 1))^m`.
pub fn decay_factor(m: u64, window: u64) -> f64 {
    decay_per_block(window).powf(m as f64)
}

/// `|1/delta - 1| ((N - 1)/(N + 1))^m`.
///
/// ```
/// use powlab::sim::deviation_envelope;
/// assert!((deviation_envelope(0.1, 0, 120) - 9.0).abs() < 1e-12);
/// ```
pub fn deviation_envelope(delta: f64, m: u64, window: u64) -> f64 {
    (1.0 / delta - 1.0).abs() * decay_factor(m, window)
}

/// Blocks for the deviation envelope to halve: `ln 2 / ln((N+1)/(N-1))`.
pub fn half_life_blocks(window: u64) -> f64 {
    std::f64::consts::LN_2 / (1.0 / decay_per_block(window)).ln()
}

/// Blocks until the envelope falls strictly below `epsilon`; zero when it
/// already starts at or below it.
pub fn recovery_blocks(delta: f64, epsilon: f64, window: u64) -> u64 {
    let initial = (1.0 / delta - 1.0).abs();
    if epsilon >= initial {
        return 0;
    }
    let rate = (1.0 / decay_per_block(window)).ln();
    let mut m = ((initial / epsilon).ln() / rate).ceil().max(0.0) as u64;
    while deviation_envelope(delta, m, window) >= epsilon {
        m += 1;
    }
    while m > 0 && deviation_envelope(delta, m - 1, window) < epsilon {
        m -= 1;
    }
    m
}

/// Bound on `|mean block time / T - 1|` when hashrate oscillates by `delta`
/// with period `period` blocks: `|1/delta - 1| / (1 + 2P/(N+1))`.
pub fn oscillation_avg_bound(delta: f64, period: u64, window: u64) -> f64 {
    (1.0 / delta - 1.0).abs() / (1.0 + 2.0 * period as f64 / (window as f64 + 1.0))
}

/// Block time implied by a deviation from spacing `T`.
pub fn block_time_at_deviation(deviation: f64, spacing: f64) -> f64 {
    spacing * (1.0 + deviation)
}

/// Least-squares per-block decay factor of `|series|` over `from..to`,
/// fitted in log space.
pub fn fit_decay(series: &[f64], from: usize, to: usize) -> Option<f64> {
    let pts: Vec<(f64, f64)> = series[from..to.min(series.len())]
        .iter()
        .enumerate()
        .filter(|(_, v)| v.abs() > 0.0)
        .map(|(i, v)| (i as f64, v.abs().ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    Some((sxy / sxx).exp())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constants() {
        assert!((half_life_blocks(120) - 41.588).abs() < 1e-3);
        assert!((decay_factor(120, 120) - 0.135_33).abs() < 1e-5);
        assert_eq!(recovery_blocks(0.1, 0.07, 120), 292);
        assert_eq!(recovery_blocks(0.1, 9.0, 120), 0);
        assert!((oscillation_avg_bound(2.0, 240, 120) - 0.100_7).abs() < 1e-4);
    }

    #[test]
    fn fit_recovers_a_geometric_series() {
        let s: Vec<f64> = (0..50).map(|i| 3.0 * 0.9f64.powi(i)).collect();
        assert!((fit_decay(&s, 0, 50).unwrap() - 0.9).abs() < 1e-12);
        assert_eq!(fit_decay(&s, 0, 1), None);
    }
}
