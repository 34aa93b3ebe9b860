//! NSGA-II building blocks: constrained domination, fronts, crowding and
//! variation operators.

use std::cmp::Ordering;

use rand::Rng;

/// Feasibility-first domination: any satisfier beats any violator,
/// violators compare by violation, satisfiers by Pareto dominance.
pub fn constrained_dominates(va: f64, oa: &[f64; 3], vb: f64, ob: &[f64; 3]) -> bool {
    match (va == 0.0, vb == 0.0) {
        (true, false) => true,
        (false, true) => false,
        (false, false) => va < vb,
        (true, true) => dominates(oa, ob),
    }
}

/// Pareto dominance for minimisation.
pub fn dominates(a: &[f64; 3], b: &[f64; 3]) -> bool {
    a.iter().zip(b).all(|(x, y)| x <= y) && a.iter().zip(b).any(|(x, y)| x < y)
}

/// Fast non-dominated sort; returns fronts of indices, best first.
pub fn fronts<F: Fn(usize, usize) -> bool>(n: usize, dom: F) -> Vec<Vec<usize>> {
    let mut dominated_by = vec![0usize; n];
    let mut dominates_list: Vec<Vec<usize>> = vec![Vec::new(); n];
    for i in 0..n {
        for j in i + 1..n {
            if dom(i, j) {
                dominates_list[i].push(j);
                dominated_by[j] += 1;
            } else if dom(j, i) {
                dominates_list[j].push(i);
                dominated_by[i] += 1;
            }
        }
    }
    let mut out = Vec::new();
    let mut current: Vec<usize> = (0..n).filter(|&i| dominated_by[i] == 0).collect();
    while !current.is_empty() {
        let mut next = Vec::new();
        for &i in &current {
            for &j in &dominates_list[i] {
                dominated_by[j] -= 1;
                if dominated_by[j] == 0 {
                    next.push(j);
                }
            }
        }
        next.sort_unstable();
        out.push(current);
        current = next;
    }
    out
}

/// Crowding distance of each member of `front` (same order).
pub fn crowding(front: &[usize], objectives: impl Fn(usize) -> [f64; 3]) -> Vec<f64> {
    let n = front.len();
    let mut dist = vec![0.0; n];
    if n <= 2 {
        return vec![f64::INFINITY; n];
    }
    for m in 0..3 {
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| objectives(front[a])[m].total_cmp(&objectives(front[b])[m]).then(a.cmp(&b)));
        let lo = objectives(front[order[0]])[m];
        let hi = objectives(front[order[n - 1]])[m];
        dist[order[0]] = f64::INFINITY;
        dist[order[n - 1]] = f64::INFINITY;
        if hi > lo {
            for w in 1..n - 1 {
                let gap = objectives(front[order[w + 1]])[m] - objectives(front[order[w - 1]])[m];
                dist[order[w]] += gap / (hi - lo);
            }
        }
    }
    dist
}

/// Tournament key: lower rank wins, then larger crowding distance.
pub fn better(rank_a: usize, crowd_a: f64, rank_b: usize, crowd_b: f64) -> Ordering {
    rank_a.cmp(&rank_b).then(crowd_b.total_cmp(&crowd_a))
}

/// Bounded simulated binary crossover on one gene pair.
pub fn sbx<R: Rng>(rng: &mut R, x1: f64, x2: f64, lo: f64, hi: f64, eta: f64) -> (f64, f64) {
    if (x1 - x2).abs() <= 1e-14 || hi <= lo {
        return (x1, x2);
    }
    let (y1, y2) = if x1 < x2 { (x1, x2) } else { (x2, x1) };
    let u: f64 = rng.random();
    let spread = |beta: f64| {
        let alpha = 2.0 - beta.powf(-(eta + 1.0));
        if u <= 1.0 / alpha {
            (u * alpha).powf(1.0 / (eta + 1.0))
        } else {
            (1.0 / (2.0 - u * alpha)).powf(1.0 / (eta + 1.0))
        }
    };
    let bq1 = spread(1.0 + 2.0 * (y1 - lo) / (y2 - y1));
    let bq2 = spread(1.0 + 2.0 * (hi - y2) / (y2 - y1));
    let c1 = (0.5 * ((y1 + y2) - bq1 * (y2 - y1))).clamp(lo, hi);
    let c2 = (0.5 * ((y1 + y2) + bq2 * (y2 - y1))).clamp(lo, hi);
    if rng.random_bool(0.5) {
        (c2, c1)
    } else {
        (c1, c2)
    }
}

/// Bounded polynomial mutation of one gene.
pub fn polynomial_mutation<R: Rng>(rng: &mut R, x: f64, lo: f64, hi: f64, eta: f64) -> f64 {
    if hi <= lo {
        return x;
    }
    let span = hi - lo;
    let (d1, d2) = ((x - lo) / span, (hi - x) / span);
    let u: f64 = rng.random();
    let p = 1.0 / (eta + 1.0);
    let dq = if u < 0.5 {
        let v = 2.0 * u + (1.0 - 2.0 * u) * (1.0 - d1).powf(eta + 1.0);
        v.powf(p) - 1.0
    } else {
        let v = 2.0 * (1.0 - u) + 2.0 * (u - 0.5) * (1.0 - d2).powf(eta + 1.0);
        1.0 - v.powf(p)
    };
    (x + dq * span).clamp(lo, hi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn satisfiers_dominate_violators() {
        let good = [0.9, 0.9, 0.9];
        let bad = [0.0, 0.0, 0.0];
        assert!(constrained_dominates(0.0, &good, 0.1, &bad));
        assert!(!constrained_dominates(0.1, &bad, 0.0, &good));
        assert!(constrained_dominates(0.1, &good, 0.2, &bad));
        assert!(!constrained_dominates(0.0, &good, 0.0, &good));
    }

    #[test]
    fn fronts_of_a_small_set() {
        let pts = [[1.0, 1.0, 1.0], [0.0, 2.0, 1.0], [2.0, 2.0, 2.0], [3.0, 3.0, 3.0]];
        let f = fronts(4, |i, j| dominates(&pts[i], &pts[j]));
        assert_eq!(f, vec![vec![0, 1], vec![2], vec![3]]);
        let c = crowding(&[0, 1, 2], |i| pts[i]);
        assert!(c.iter().all(|v| v.is_infinite()) || c[0].is_finite());
    }

    #[test]
    fn operators_stay_in_bounds() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..2000 {
            let (a, b) = sbx(&mut rng, 0.1, 0.9, 0.0, 1.0, 15.0);
            assert!((0.0..=1.0).contains(&a) && (0.0..=1.0).contains(&b));
            let m = polynomial_mutation(&mut rng, 0.99, 0.0, 1.0, 20.0);
            assert!((0.0..=1.0).contains(&m));
        }
        assert_eq!(sbx(&mut rng, 0.5, 0.5, 0.0, 1.0, 15.0), (0.5, 0.5));
        assert_eq!(polynomial_mutation(&mut rng, 2.0, 2.0, 2.0, 20.0), 2.0);
    }

    #[test]
    fn sbx_preserves_mean_on_interior() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let (a, b) = sbx(&mut rng, 0.4, 0.6, -100.0, 100.0, 15.0);
        assert!((a + b - 1.0).abs() < 1e-6);
    }
}
