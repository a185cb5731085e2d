use crate::blackscholes::{MarketParams, OptionKind};
use crate::error::{Error, Result};
use crate::region::maturity_limits;

/// Space nodes `S_i = K + c sinh(xi_i)` with `K` on a node, and time
/// levels `tau_k = T (k/m)^2`.
#[derive(Debug, Clone, PartialEq)]
pub struct FdGrid {
    pub nodes: Vec<f64>,
    /// `tau` levels, ascending from 0 to `T`.
    pub times: Vec<f64>,
    pub concentration: f64,
}

impl FdGrid {
    pub fn new(p: &MarketParams, time_steps: usize) -> Result<Self> {
        let k = p.strike;
        let spread = p.vol * p.maturity.sqrt();
        let mut lo = (k * (-5.0 * spread).exp()).min(0.1 * k).min(0.5 * p.spot);
        if p.kind == OptionKind::Put {
            if let Ok(Some(l)) = maturity_limits(p).map(|m| m.l_limit) {
                lo = lo.min(0.5 * l);
            }
        }
        let hi = (k * (5.0 * spread).exp()).max(3.0 * k).max(1.5 * p.spot);
        let c = 0.25 * k * spread;
        let (x_lo, x_hi) = (((lo - k) / c).asinh(), ((hi - k) / c).asinh());
        let n = 10 * time_steps;
        if n < 8 {
            return Err(Error::Config("grid too small".into()));
        }
        let h = (x_hi - x_lo) / n as f64;
        let left = (-x_lo / h).round() as i64;
        let nodes: Vec<f64> =
            (0..=n as i64).map(|i| (k + c * ((i - left) as f64 * h).sinh()).max(lo * 1e-3)).collect();
        if nodes.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::Config("space grid is not increasing".into()));
        }
        let times = (0..=time_steps).map(|j| p.maturity * (j as f64 / time_steps as f64).powi(2)).collect();
        Ok(Self { nodes, times, concentration: c })
    }

    /// Width of the cell containing `x` (edge cells outside the grid).
    pub fn cell_width(&self, x: f64) -> f64 {
        let n = self.nodes.len();
        let j = self.nodes.partition_point(|&y| y <= x).clamp(1, n - 1);
        self.nodes[j] - self.nodes[j - 1]
    }
}
