//! Exercise boundary as a Chebyshev interpolant of a transformed function.
//!
//! For a reference level `X` (the boundary's maturity limit) the curve
//! interpolates `H(tau) = ln(B(tau)/X)^2` in `z = 2 sqrt(tau/tau_max) - 1`
//! at the `m + 1` extrema `z_k = -cos(k pi/m)`. The node `tau = 0` carries
//! `H = 0`. A curve below `X` is recovered as `X exp(-sqrt H)`, one above as
//! `X exp(sqrt H)`.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CurveSide {
    /// Boundary at or below its reference level (put upper boundary).
    Below,
    /// Boundary at or above its reference level (put lower boundary).
    Above,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundaryCurve {
    pub tau_max: f64,
    pub reference: f64,
    pub side: CurveSide,
    /// `tau` at the nodes, ascending, first is 0.
    pub knots: Vec<f64>,
    /// Boundary values at the nodes.
    pub values: Vec<f64>,
    coeffs: Vec<f64>,
}

/// Node times `tau_k = tau_max ((1 + z_k)/2)^2` for `m` intervals.
pub fn knot_times(m: usize, tau_max: f64) -> Vec<f64> {
    (0..=m)
        .map(|k| {
            if k == 0 {
                return 0.0;
            }
            if k == m {
                return tau_max;
            }
            let z = -(k as f64 * PI / m as f64).cos();
            let y = 0.5 * (1.0 + z);
            tau_max * y * y
        })
        .collect()
}

impl BoundaryCurve {
    /// Interpolates `values` given at [`knot_times`]`(values.len() - 1, tau_max)`.
    /// The first value is replaced by the reference level and values on the
    /// wrong side of it are clamped to it.
    pub fn new(tau_max: f64, reference: f64, side: CurveSide, values: &[f64]) -> Result<Self> {
        if values.len() < 2 {
            return Err(Error::Domain("a boundary curve needs at least two nodes".into()));
        }
        if !(tau_max > 0.0) || !(reference > 0.0) {
            return Err(Error::Domain(format!("invalid curve domain tau_max={tau_max}, X={reference}")));
        }
        if let Some(v) = values.iter().find(|v| !(**v > 0.0) || !v.is_finite()) {
            return Err(Error::Domain(format!("boundary value {v} is not a positive price")));
        }
        let m = values.len() - 1;
        let mut vals: Vec<f64> = values
            .iter()
            .map(|&v| match side {
                CurveSide::Below => v.min(reference),
                CurveSide::Above => v.max(reference),
            })
            .collect();
        vals[0] = reference;
        let h: Vec<f64> = vals.iter().map(|v| (v / reference).ln().powi(2)).collect();
        // DCT-I on nodes z_k = -cos(k pi / m), T_j(z_k) = (-1)^j cos(j k pi / m)
        let coeffs = (0..=m)
            .map(|j| {
                let mut acc = 0.0;
                for (k, hk) in h.iter().enumerate() {
                    let w = if k == 0 || k == m { 0.5 } else { 1.0 };
                    acc += w * hk * ((j * k) as f64 * PI / m as f64).cos();
                }
                let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
                let half = if j == 0 || j == m { 0.5 } else { 1.0 };
                half * sign * 2.0 * acc / m as f64
            })
            .collect();
        Ok(Self { tau_max, reference, side, knots: knot_times(m, tau_max), values: vals, coeffs })
    }

    /// Constant curve at the reference level.
    pub fn flat(tau_max: f64, reference: f64, side: CurveSide, m: usize) -> Result<Self> {
        Self::new(tau_max, reference, side, &vec![reference; m + 1])
    }

    pub fn intervals(&self) -> usize {
        self.values.len() - 1
    }

    fn transformed(&self, tau: f64) -> f64 {
        let z = (2.0 * (tau / self.tau_max).max(0.0).sqrt() - 1.0).clamp(-1.0, 1.0);
        // Clenshaw
        let (mut b1, mut b2) = (0.0, 0.0);
        for &c in self.coeffs.iter().skip(1).rev() {
            let b0 = c + 2.0 * z * b1 - b2;
            b2 = b1;
            b1 = b0;
        }
        (self.coeffs[0] + z * b1 - b2).max(0.0)
    }

    /// Boundary at time to maturity `tau`; clamped to `[0, tau_max]`.
    pub fn eval(&self, tau: f64) -> f64 {
        if tau <= 0.0 {
            return self.reference;
        }
        let root = self.transformed(tau).sqrt();
        match self.side {
            CurveSide::Below => self.reference * (-root).exp(),
            CurveSide::Above => self.reference * root.exp(),
        }
    }

    /// Same curve with new node values.
    pub fn with_values(&self, values: &[f64]) -> Result<Self> {
        Self::new(self.tau_max, self.reference, self.side, values)
    }
}

/// Curve through `values` at [`knot_times`]`(values.len() - 1, tau_max)`.
pub fn chebyshev_boundary(values: &[f64], reference: f64, side: CurveSide, tau_max: f64) -> Result<BoundaryCurve> {
    BoundaryCurve::new(tau_max, reference, side, values)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flat_curve() {
        let c = BoundaryCurve::flat(2.0, 100.0, CurveSide::Below, 5).unwrap();
        for tau in [0.0, 0.3, 1.0, 2.0] {
            assert_eq!(c.eval(tau), 100.0);
        }
    }

    #[test]
    fn interpolates_at_nodes() {
        let taus = knot_times(6, 3.0);
        let vals: Vec<f64> = taus.iter().map(|t| 100.0 * (-0.3 * t.sqrt()).exp()).collect();
        let c = BoundaryCurve::new(3.0, 100.0, CurveSide::Below, &vals).unwrap();
        for (t, v) in taus.iter().zip(&vals) {
            assert!((c.eval(*t) / v - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn smooth_curve_between_nodes() {
        let f = |t: f64| 50.0 * (0.2 * t.sqrt() + 0.05 * t).exp();
        let taus = knot_times(5, 4.0);
        let vals: Vec<f64> = taus.iter().map(|&t| f(t)).collect();
        let c = BoundaryCurve::new(4.0, 50.0, CurveSide::Above, &vals).unwrap();
        for w in taus.windows(2) {
            let mid = 0.5 * (w[0] + w[1]);
            assert!((c.eval(mid) / f(mid) - 1.0).abs() < 1e-3);
        }
    }

    #[test]
    fn first_node_pinned() {
        let c = BoundaryCurve::new(1.0, 100.0, CurveSide::Below, &[90.0, 80.0, 70.0]).unwrap();
        assert_eq!(c.eval(0.0), 100.0);
        assert!(BoundaryCurve::new(1.0, 100.0, CurveSide::Below, &[90.0, -1.0]).is_err());
    }
}
