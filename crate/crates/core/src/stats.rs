//! Summary statistics for performance-space exports.

/// Pearson correlation; `None` for fewer than two points or zero variance.
pub fn pearson(a: &[f64], b: &[f64]) -> Option<f64> {
    if a.len() != b.len() || a.len() < 2 {
        return None;
    }
    let n = a.len() as f64;
    let (ma, mb) = (a.iter().sum::<f64>() / n, b.iter().sum::<f64>() / n);
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        let (dx, dy) = (x - ma, y - mb);
        sab += dx * dy;
        saa += dx * dx;
        sbb += dy * dy;
    }
    (saa > 0.0 && sbb > 0.0).then(|| sab / (saa * sbb).sqrt())
}

fn quantile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let (lo, hi) = (pos.floor() as usize, pos.ceil() as usize);
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

/// Silverman's rule: 0.9 · min(σ, IQR/1.34) · n^(−1/5). Falls back to σ or
/// 1 when the sample is degenerate.
pub fn silverman_bandwidth(x: &[f64]) -> f64 {
    let n = x.len() as f64;
    if x.len() < 2 {
        return 1.0;
    }
    let mean = x.iter().sum::<f64>() / n;
    let sd = (x.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt();
    let mut s = x.to_vec();
    s.sort_by(f64::total_cmp);
    let iqr = (quantile(&s, 0.75) - quantile(&s, 0.25)) / 1.34;
    let spread = match (sd > 0.0, iqr > 0.0) {
        (true, true) => sd.min(iqr),
        (true, false) => sd,
        (false, true) => iqr,
        (false, false) => mean.abs().max(1.0) * 1e-3,
    };
    0.9 * spread * n.powf(-0.2)
}

/// A Gaussian KDE evaluated on an even grid over `[min − 3h, max + 3h]`.
#[derive(Clone, Debug, PartialEq)]
pub struct KdeCurve {
    pub bandwidth: f64,
    pub x: Vec<f64>,
    pub density: Vec<f64>,
}

pub fn gaussian_kde(samples: &[f64], points: usize) -> KdeCurve {
    let h = silverman_bandwidth(samples);
    let lo = samples.iter().copied().fold(f64::INFINITY, f64::min) - 3.0 * h;
    let hi = samples.iter().copied().fold(f64::NEG_INFINITY, f64::max) + 3.0 * h;
    let points = points.max(2);
    let step = (hi - lo) / (points - 1) as f64;
    let x: Vec<f64> = (0..points).map(|i| lo + step * i as f64).collect();
    let density = x.iter().map(|&t| kde_at(samples, h, t)).collect();
    KdeCurve { bandwidth: h, x, density }
}

pub fn kde_at(samples: &[f64], h: f64, t: f64) -> f64 {
    let norm = 1.0 / (samples.len() as f64 * h * (2.0 * std::f64::consts::PI).sqrt());
    norm * samples.iter().map(|s| (-0.5 * ((t - s) / h).powi(2)).exp()).sum::<f64>()
}

/// Trapezoidal integral of a sampled curve.
pub fn trapezoid(x: &[f64], y: &[f64]) -> f64 {
    x.windows(2).zip(y.windows(2)).map(|(xs, ys)| 0.5 * (xs[1] - xs[0]) * (ys[0] + ys[1])).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pearson_signs() {
        let a = [1.0, 2.0, 3.0, 4.0];
        assert!((pearson(&a, &[2.0, 4.0, 6.0, 8.0]).unwrap() - 1.0).abs() < 1e-15);
        assert!((pearson(&a, &[4.0, 3.0, 2.0, 1.0]).unwrap() + 1.0).abs() < 1e-15);
        assert!(pearson(&a, &[1.0; 4]).is_none());
    }

    #[test]
    fn silverman_matches_hand_value() {
        let x = [1.0, 2.0, 3.0, 4.0, 5.0];
        // σ = 1.5811, IQR/1.34 = 2/1.34 = 1.4925 → 0.9·1.4925·5^(−0.2).
        let expect = 0.9 * (2.0 / 1.34) * 5f64.powf(-0.2);
        assert!((silverman_bandwidth(&x) - expect).abs() < 1e-12);
    }

    #[test]
    fn kde_integrates_to_one() {
        let x: Vec<f64> = (0..500).map(|i| ((i * 7919) % 1000) as f64 / 100.0).collect();
        let c = gaussian_kde(&x, 256);
        assert_eq!(c.x.len(), 256);
        assert!((trapezoid(&c.x, &c.density) - 1.0).abs() < 0.01);
        let one = gaussian_kde(&[2.0, 2.0, 2.0], 256);
        assert!((trapezoid(&one.x, &one.density) - 1.0).abs() < 0.01);
    }
}
