use serde::{Deserialize, Serialize};

/// Solves `a·x = b` for symmetric positive definite `a` (row-major, n×n).
/// Returns `None` if a pivot is not positive.
pub(crate) fn cholesky_solve(mut a: Vec<f64>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for j in 0..n {
        let mut d = a[j * n + j];
        for k in 0..j {
            d -= a[j * n + k] * a[j * n + k];
        }
        if d <= 0.0 || !d.is_finite() {
            return None;
        }
        let d = d.sqrt();
        a[j * n + j] = d;
        for i in j + 1..n {
            let mut s = a[i * n + j];
            for k in 0..j {
                s -= a[i * n + k] * a[j * n + k];
            }
            a[i * n + j] = s / d;
        }
    }
    for i in 0..n {
        let mut s = b[i];
        for k in 0..i {
            s -= a[i * n + k] * b[k];
        }
        b[i] = s / a[i * n + i];
    }
    for i in (0..n).rev() {
        let mut s = b[i];
        for k in i + 1..n {
            s -= a[k * n + i] * b[k];
        }
        b[i] = s / a[i * n + i];
    }
    Some(b)
}

/// Ridge regression with an unpenalised intercept.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Ridge {
    pub intercept: f64,
    pub weights: Vec<f64>,
}

impl Ridge {
    pub fn fit<R: AsRef<[f64]>>(x: &[R], y: &[f64], alpha: f64) -> Self {
        let n = x.len();
        let p = x.first().map_or(0, |r| r.as_ref().len());
        if n == 0 {
            return Ridge { intercept: 0.0, weights: vec![0.0; p] };
        }
        let nf = n as f64;
        let mut xm = vec![0.0; p];
        for r in x {
            for (m, v) in xm.iter_mut().zip(r.as_ref()) {
                *m += v / nf;
            }
        }
        let ym = y.iter().sum::<f64>() / nf;
        let mut a = vec![0.0; p * p];
        let mut b = vec![0.0; p];
        let mut c = vec![0.0; p];
        for (r, &yi) in x.iter().zip(y) {
            for (cj, (v, m)) in c.iter_mut().zip(r.as_ref().iter().zip(&xm)) {
                *cj = v - m;
            }
            let dy = yi - ym;
            for i in 0..p {
                b[i] += c[i] * dy;
                for j in 0..=i {
                    a[i * p + j] += c[i] * c[j];
                }
            }
        }
        for i in 0..p {
            for j in 0..i {
                a[j * p + i] = a[i * p + j];
            }
            a[i * p + i] += alpha;
        }
        // Constant columns with alpha = 0 leave a zero pivot; nudge it.
        let weights = cholesky_solve(a.clone(), b.clone()).unwrap_or_else(|| {
            for i in 0..p {
                a[i * p + i] += 1e-10;
            }
            cholesky_solve(a, b).unwrap_or_else(|| vec![0.0; p])
        });
        let intercept = ym - weights.iter().zip(&xm).map(|(w, m)| w * m).sum::<f64>();
        Ridge { intercept, weights }
    }

    pub fn predict(&self, x: &[f64]) -> f64 {
        self.intercept + self.weights.iter().zip(x).map(|(w, v)| w * v).sum::<f64>()
    }
}
