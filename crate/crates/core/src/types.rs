//! Result types shared by the pricers.

use serde::{Deserialize, Serialize};

/// Exercise boundaries sampled on a calendar-time grid. Missing entries
/// mean no boundary at that time (empty exercise region, or a solver that
/// found no root because exercise is never optimal there).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundarySamples {
    /// Calendar times `t` in `[0, T]`, ascending.
    pub times: Vec<f64>,
    pub upper: Vec<Option<f64>>,
    pub lower: Vec<Option<f64>>,
}

impl BoundarySamples {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// True when at some grid time both boundaries exist and `u < l`.
    pub fn crossed(&self) -> bool {
        (0..self.len()).any(|i| self.crossed_at(i))
    }

    pub fn crossed_at(&self, i: usize) -> bool {
        matches!((self.upper[i], self.lower[i]), (Some(u), Some(l)) if u < l)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PriceResult {
    pub price: f64,
    pub european: f64,
    /// `price - european`.
    pub premium: f64,
    pub method: String,
    pub iterations: usize,
    /// Method-specific residual (fixed-point step size, Gauss-Newton norm, ...).
    pub residual: f64,
    /// Set when the method fell back to a weaker estimate.
    pub degraded: bool,
    pub boundary: Option<BoundarySamples>,
}

impl PriceResult {
    pub fn new(method: &str, price: f64, european: f64) -> Self {
        Self {
            price,
            european,
            premium: price - european,
            method: method.to_string(),
            iterations: 0,
            residual: 0.0,
            degraded: false,
            boundary: None,
        }
    }
}
