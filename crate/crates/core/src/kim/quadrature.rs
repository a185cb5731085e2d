//! Fixed-size tanh-sinh rules.
//!
//! With `n` points the abscissae are `t_j = -t_max + j h`, `h = 2 t_max/(n-1)`,
//! mapped by `x = (1 + tanh(pi/2 sinh t))/2`. The truncation `t_max` solves
//! `t e^t = 1.25 pi (n - 1)`, which balances the discretization error of the
//! trapezoidal sum against the mass lost beyond the last node for an
//! inverse square-root endpoint singularity.

use std::f64::consts::PI;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Node {
    pub x: f64,
    /// `1 - x`, computed without cancellation.
    pub xc: f64,
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TanhSinh {
    nodes: Vec<Node>,
}

fn truncation(n: usize) -> f64 {
    let c = 1.25 * PI * (n - 1) as f64;
    // Newton on t + ln t = ln c
    let target = c.ln();
    let mut t = target.max(1.0);
    for _ in 0..50 {
        let g = t + t.ln() - target;
        let step = g / (1.0 + 1.0 / t);
        t -= step;
        if step.abs() < 1e-14 {
            break;
        }
    }
    t
}

impl TanhSinh {
    /// Rule on `[0, 1]` with `points` nodes; a single point gives the midpoint rule.
    pub fn new(points: usize) -> Self {
        if points <= 1 {
            return Self { nodes: vec![Node { x: 0.5, xc: 0.5, weight: 1.0 }] };
        }
        let t_max = truncation(points);
        let h = 2.0 * t_max / (points - 1) as f64;
        let nodes = (0..points)
            .map(|j| {
                let t = -t_max + j as f64 * h;
                let v = 0.5 * PI * t.sinh();
                let e = (-2.0 * v).exp();
                let x = 1.0 / (1.0 + e);
                let xc = e / (1.0 + e);
                let xc = if e.is_finite() { xc } else { 1.0 };
                let ch = v.cosh();
                let weight = 0.5 * h * 0.5 * PI * t.cosh() / (ch * ch);
                Node { x, xc, weight }
            })
            .collect();
        Self { nodes }
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// `int_0^1 f(x) dx` where `f` receives `(x, 1 - x)`.
    pub fn integrate_unit<F: FnMut(f64, f64) -> f64>(&self, mut f: F) -> f64 {
        self.nodes.iter().map(|n| n.weight * f(n.x, n.xc)).sum()
    }

    pub fn integrate<F: FnMut(f64) -> f64>(&self, mut f: F, a: f64, b: f64) -> f64 {
        let w = b - a;
        w * self.integrate_unit(|x, xc| if x <= 0.5 { f(a + w * x) } else { f(b - w * xc) })
    }
}

/// `int_a^b f(x) dx` with a `points`-node tanh-sinh rule.
pub fn tanh_sinh_integrate<F: FnMut(f64) -> f64>(f: F, a: f64, b: f64, points: usize) -> f64 {
    TanhSinh::new(points).integrate(f, a, b)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant() {
        let v = tanh_sinh_integrate(|_| 1.0, 0.0, 1.0, 21);
        assert!((v - 1.0).abs() < 1e-9, "{v}");
        let v = tanh_sinh_integrate(|_| 1.0, 0.0, 1.0, 41);
        assert!((v - 1.0).abs() < 1e-12, "{v}");
    }

    #[test]
    fn inverse_square_root() {
        let v = tanh_sinh_integrate(|x| 1.0 / x.sqrt(), 0.0, 1.0, 21);
        assert!((v - 2.0).abs() < 1e-10, "{v}");
    }

    #[test]
    fn cubic() {
        let v = tanh_sinh_integrate(|x| x * x * x, 0.0, 1.0, 41);
        assert!((v - 0.25).abs() < 1e-12, "{v}");
        let v = tanh_sinh_integrate(|x| 1.0 - 2.0 * x + 3.0 * x * x * x, -1.0, 2.0, 41);
        assert!((v - (3.0 - 3.0 + 0.75 * 15.0)).abs() < 1e-11, "{v}");
    }

    #[test]
    fn nodes_are_symmetric() {
        let r = TanhSinh::new(11);
        let n = r.nodes();
        for i in 0..n.len() {
            let j = n.len() - 1 - i;
            assert!((n[i].x - n[j].xc).abs() <= 1e-14 * n[i].x);
            assert!((n[i].weight - n[j].weight).abs() < 1e-16);
        }
    }
}
