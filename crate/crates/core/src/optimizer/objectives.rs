//! Mixed-type distances and the three counterfactual objectives.

use crate::model::{DesignVector, N_CATEGORICAL, N_CONTINUOUS, N_PARAMS};
use crate::sampling::ParameterRanges;

/// Per-feature normalisation for Gower distances. Zero-width ranges drop
/// the feature from the average.
#[derive(Clone, Debug, PartialEq)]
pub struct GowerScale {
    range: [f64; N_CONTINUOUS],
    active: usize,
}

impl GowerScale {
    pub fn new(ranges: &ParameterRanges) -> Self {
        let range = ranges.continuous.map(|i| i.range);
        let skipped = range.iter().filter(|&&r| r <= 0.0).count();
        if skipped > 0 {
            log::warn!("{skipped} zero-width parameter range(s) skipped in Gower distance");
        }
        GowerScale {
            range,
            active: N_PARAMS - skipped,
        }
    }

    /// Per-feature distances; skipped features are 0.
    pub fn terms(&self, a: &DesignVector, b: &DesignVector) -> [f64; N_PARAMS] {
        let mut t = [0.0; N_PARAMS];
        let (ca, cb) = (a.continuous(), b.continuous());
        for k in 0..N_CONTINUOUS {
            if self.range[k] > 0.0 {
                t[k] = ((ca[k] - cb[k]).abs() / self.range[k]).min(1.0);
            }
        }
        let (ma, mb) = (a.materials(), b.materials());
        for k in 0..N_CATEGORICAL {
            t[N_CONTINUOUS + k] = if ma[k] == mb[k] { 0.0 } else { 1.0 };
        }
        t
    }

    pub fn distance(&self, a: &DesignVector, b: &DesignVector) -> f64 {
        if self.active == 0 {
            return 0.0;
        }
        self.terms(a, b).iter().sum::<f64>() / self.active as f64
    }
}

/// Gower distance in [0, 1]: mean of range-normalised absolute differences
/// (continuous, capped at 1) and mismatch indicators (materials).
pub fn gower_distance(a: &DesignVector, b: &DesignVector, ranges: &ParameterRanges) -> f64 {
    GowerScale::new(ranges).distance(a, b)
}

/// Fraction of the 16 parameters whose normalised change exceeds `tolerance`.
pub fn changed_feature_ratio(scale: &GowerScale, a: &DesignVector, b: &DesignVector, tolerance: f64) -> f64 {
    let t = scale.terms(a, b);
    let changed = (0..N_PARAMS)
        .filter(|&k| {
            if k < N_CONTINUOUS {
                t[k] > tolerance
            } else {
                t[k] > 0.0
            }
        })
        .count();
    changed as f64 / N_PARAMS as f64
}

/// Mean Gower distance from `d` to its `k` nearest designs in `dataset`.
/// `k` is clamped to the dataset size.
pub fn dataset_proximity(scale: &GowerScale, d: &DesignVector, dataset: &[DesignVector], k: usize) -> f64 {
    let k = k.min(dataset.len());
    if k == 0 {
        return 0.0;
    }
    let mut best: Vec<f64> = Vec::with_capacity(k + 1);
    for other in dataset {
        let g = scale.distance(d, other);
        if best.len() < k || g < best[k - 1] {
            let pos = best.partition_point(|&x| x <= g);
            best.insert(pos, g);
            best.truncate(k);
        }
    }
    best.iter().sum::<f64>() / k as f64
}

/// (Gower to query, changed-feature ratio, mean Gower to k nearest dataset
/// designs); all minimised.
pub fn counterfactual_objectives(
    d: &DesignVector,
    query: &DesignVector,
    dataset: &[DesignVector],
    k: usize,
    ranges: &ParameterRanges,
    tolerance: f64,
) -> [f64; 3] {
    if k > dataset.len() {
        log::warn!("k = {k} exceeds the dataset size {}; clamped", dataset.len());
    }
    let scale = GowerScale::new(ranges);
    [
        scale.distance(d, query),
        changed_feature_ratio(&scale, d, query, tolerance),
        dataset_proximity(&scale, d, dataset, k),
    ]
}
