use crate::error::{Error, Result};

/// Tridiagonal matrix; `lower[0]` and `upper[n-1]` are unused.
#[derive(Debug, Clone, PartialEq)]
pub struct Tridiagonal {
    pub lower: Vec<f64>,
    pub diag: Vec<f64>,
    pub upper: Vec<f64>,
}

impl Tridiagonal {
    pub fn zeros(n: usize) -> Self {
        Self { lower: vec![0.0; n], diag: vec![0.0; n], upper: vec![0.0; n] }
    }

    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    pub fn apply(&self, v: &[f64]) -> Vec<f64> {
        let n = self.len();
        (0..n)
            .map(|i| {
                let mut y = self.diag[i] * v[i];
                if i > 0 {
                    y += self.lower[i] * v[i - 1];
                }
                if i + 1 < n {
                    y += self.upper[i] * v[i + 1];
                }
                y
            })
            .collect()
    }

    /// `I - w self`.
    pub fn scaled_identity_minus(&self, w: f64) -> Self {
        Self {
            lower: self.lower.iter().map(|x| -w * x).collect(),
            diag: self.diag.iter().map(|x| 1.0 - w * x).collect(),
            upper: self.upper.iter().map(|x| -w * x).collect(),
        }
    }

    /// `(I + w self) v`.
    pub fn apply_plus_identity(&self, v: &[f64], w: f64) -> Vec<f64> {
        self.apply(v).iter().zip(v).map(|(a, b)| b + w * a).collect()
    }

    /// Thomas algorithm.
    pub fn solve(&self, rhs: &[f64]) -> Vec<f64> {
        let n = self.len();
        let mut c = vec![0.0; n];
        let mut d = vec![0.0; n];
        c[0] = self.upper[0] / self.diag[0];
        d[0] = rhs[0] / self.diag[0];
        for i in 1..n {
            let den = self.diag[i] - self.lower[i] * c[i - 1];
            c[i] = if i + 1 < n { self.upper[i] / den } else { 0.0 };
            d[i] = (rhs[i] - self.lower[i] * d[i - 1]) / den;
        }
        for i in (0..n - 1).rev() {
            d[i] -= c[i] * d[i + 1];
        }
        d
    }
}

const MAX_POLICY_ITERATIONS: usize = 200;

/// Exact solution of `min(A v - b, v - g) = 0` by policy iteration: rows
/// where `v - g < A v - b` are replaced by `v = g` until the active set
/// is stable.
pub fn policy_iteration(a: &Tridiagonal, b: &[f64], g: &[f64]) -> Result<Vec<f64>> {
    let n = a.len();
    let mut active = vec![false; n];
    let mut v = a.solve(b);
    for _ in 0..MAX_POLICY_ITERATIONS {
        let av = a.apply(&v);
        // hysteresis against round-off ties
        let next: Vec<bool> = (0..n)
            .map(|i| {
                let eps = 1e-12 * (1.0 + b[i].abs());
                let d = (v[i] - g[i]) - (av[i] - b[i]);
                if active[i] {
                    d <= eps
                } else {
                    d < -eps
                }
            })
            .collect();
        if next == active {
            return Ok(v);
        }
        active = next;
        let mut sys = a.clone();
        let mut rhs = b.to_vec();
        for i in 0..n {
            if active[i] {
                sys.lower[i] = 0.0;
                sys.upper[i] = 0.0;
                sys.diag[i] = 1.0;
                rhs[i] = g[i];
            }
        }
        v = sys.solve(&rhs);
    }
    Err(Error::NonConvergence { iterations: MAX_POLICY_ITERATIONS, last: [v[0], v[n - 1]], residual: f64::NAN })
}

/// Brennan-Schwartz projected elimination. With `exercise_low` the
/// exercise region is assumed to sit at the low end of the grid (put).
pub fn brennan_schwartz(a: &Tridiagonal, b: &[f64], g: &[f64], exercise_low: bool) -> Vec<f64> {
    let n = a.len();
    if !exercise_low {
        // reverse the node order and reuse the put sweep
        let r = Tridiagonal {
            lower: a.upper.iter().rev().copied().collect(),
            diag: a.diag.iter().rev().copied().collect(),
            upper: a.lower.iter().rev().copied().collect(),
        };
        let rb: Vec<f64> = b.iter().rev().copied().collect();
        let rg: Vec<f64> = g.iter().rev().copied().collect();
        let mut v = brennan_schwartz(&r, &rb, &rg, true);
        v.reverse();
        return v;
    }
    // eliminate the super-diagonal from the top, then substitute upwards
    let mut diag = a.diag.clone();
    let mut rhs = b.to_vec();
    for i in (0..n - 1).rev() {
        let w = a.upper[i] / diag[i + 1];
        diag[i] -= w * a.lower[i + 1];
        rhs[i] -= w * rhs[i + 1];
    }
    let mut v = vec![0.0; n];
    v[0] = (rhs[0] / diag[0]).max(g[0]);
    for i in 1..n {
        v[i] = ((rhs[i] - a.lower[i] * v[i - 1]) / diag[i]).max(g[i]);
    }
    v
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Tridiagonal {
        Tridiagonal { lower: vec![0.0, -1.0, -1.0, -1.0], diag: vec![4.0; 4], upper: vec![-1.0, -1.0, -1.0, 0.0] }
    }

    #[test]
    fn thomas_solves() {
        let a = sample();
        let x = [1.0, 2.0, 3.0, 4.0];
        let b = a.apply(&x);
        let y = a.solve(&b);
        for (u, v) in x.iter().zip(&y) {
            assert!((u - v).abs() < 1e-14);
        }
    }

    #[test]
    fn lcp_solvers_agree() {
        let a = sample();
        let b = [0.5, 0.2, 1.0, 3.0];
        let g = [1.0, 0.6, 0.2, 0.0];
        let v = policy_iteration(&a, &b, &g).unwrap();
        let av = a.apply(&v);
        for i in 0..4 {
            assert!((av[i] - b[i]).min(v[i] - g[i]).abs() < 1e-14);
        }
        let w = brennan_schwartz(&a, &b, &g, true);
        for (x, y) in v.iter().zip(&w) {
            assert!((x - y).abs() < 1e-12);
        }
    }
}
