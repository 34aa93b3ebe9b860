use serde::{Deserialize, Serialize};

use super::encoding::{Features, N_FEATURES};

/// Brute-force Euclidean neighbour index over encoded features.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NeighborIndex {
    pub points: Vec<Features>,
}

impl NeighborIndex {
    pub fn new(points: Vec<Features>) -> Self {
        NeighborIndex { points }
    }

    /// Indices of the `k` nearest points, ties broken by index.
    pub fn nearest(&self, q: &Features, k: usize) -> Vec<usize> {
        let k = k.min(self.points.len());
        let mut best: Vec<(f64, usize)> = Vec::with_capacity(k + 1);
        for (i, p) in self.points.iter().enumerate() {
            let mut d = 0.0;
            for j in 0..N_FEATURES {
                let t = p[j] - q[j];
                d += t * t;
            }
            if best.len() < k || d < best[k - 1].0 {
                let pos = best.partition_point(|&(bd, _)| bd <= d);
                best.insert(pos, (d, i));
                best.truncate(k);
            }
        }
        best.into_iter().map(|(_, i)| i).collect()
    }
}

/// Uniform average of the targets of the given neighbours.
pub fn average(neighbors: &[usize], y: &[f64]) -> f64 {
    if neighbors.is_empty() {
        return 0.0;
    }
    neighbors.iter().map(|&i| y[i]).sum::<f64>() / neighbors.len() as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pt(x: f64) -> Features {
        let mut f = [0.0; N_FEATURES];
        f[0] = x;
        f
    }

    #[test]
    fn finds_nearest_in_order() {
        let idx = NeighborIndex::new((0..10).map(|i| pt(i as f64)).collect());
        assert_eq!(idx.nearest(&pt(3.2), 3), vec![3, 4, 2]);
        assert_eq!(idx.nearest(&pt(100.0), 20).len(), 10);
    }

    #[test]
    fn ties_keep_lower_index_first() {
        let idx = NeighborIndex::new(vec![pt(1.0), pt(-1.0), pt(1.0)]);
        assert_eq!(idx.nearest(&pt(0.0), 2), vec![0, 1]);
    }

    #[test]
    fn average_of_targets() {
        assert_eq!(average(&[0, 2], &[1.0, 5.0, 3.0]), 2.0);
    }
}
