use crate::blackscholes::MarketParams;
use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Parameter grid of American puts. Every `(r, q, T, sigma)` cell is priced
/// at all spots; options whose reference price is below `price_floor` are
/// excluded from the error statistics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestGrid {
    pub name: String,
    pub rates: Vec<f64>,
    pub dividends: Vec<f64>,
    pub spots: Vec<f64>,
    pub maturities: Vec<f64>,
    pub vols: Vec<f64>,
    pub strike: f64,
    pub price_floor: f64,
    /// Keep only cells with `q < r`.
    pub dividend_below_rate: bool,
}

/// One `(r, q, T, sigma)` combination.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Cell {
    pub rate: f64,
    pub dividend: f64,
    pub maturity: f64,
    pub vol: f64,
}

const SPOTS: [f64; 10] = [25.0, 50.0, 80.0, 90.0, 100.0, 110.0, 120.0, 150.0, 175.0, 200.0];
const VOLS: [f64; 6] = [0.1, 0.2, 0.3, 0.4, 0.5, 0.6];
const SHORT: [f64; 5] = [1.0 / 12.0, 0.25, 0.5, 0.75, 1.0];

impl TestGrid {
    /// Positive rates and yields; 4495 options remain after the price floor.
    pub fn positive() -> Self {
        Self {
            name: "positive".into(),
            rates: vec![0.02, 0.04, 0.06, 0.08, 0.10],
            dividends: vec![0.0, 0.04, 0.08, 0.12],
            spots: SPOTS.to_vec(),
            maturities: SHORT.to_vec(),
            vols: VOLS.to_vec(),
            strike: 100.0,
            price_floor: 0.5,
            dividend_below_rate: false,
        }
    }

    fn negative(name: &str, maturities: &[f64]) -> Self {
        Self {
            name: name.into(),
            rates: vec![-0.005, -0.01, -0.02, -0.04],
            dividends: vec![-0.01, -0.02, -0.03, -0.05],
            spots: SPOTS.to_vec(),
            maturities: maturities.to_vec(),
            vols: VOLS.to_vec(),
            strike: 100.0,
            price_floor: 0.5,
            dividend_below_rate: true,
        }
    }

    /// Negative rates with `q < r`, maturities up to one year.
    pub fn negative_short() -> Self {
        Self::negative("negative-short", &SHORT)
    }

    /// Negative rates with `q < r`, maturities 5, 10 and 15 years.
    pub fn negative_long() -> Self {
        Self::negative("negative-long", &[5.0, 10.0, 15.0])
    }

    pub fn by_name(name: &str) -> Result<Self> {
        match name {
            "positive" => Ok(Self::positive()),
            "negative-short" => Ok(Self::negative_short()),
            "negative-long" => Ok(Self::negative_long()),
            _ => Err(Error::Config(format!("unknown grid '{name}' (positive, negative-short, negative-long)"))),
        }
    }

    /// Cells in `(r, q, T, sigma)` lexicographic order of the input lists.
    pub fn cells(&self) -> Vec<Cell> {
        let mut out = Vec::new();
        for &rate in &self.rates {
            for &dividend in &self.dividends {
                if self.dividend_below_rate && !(dividend < rate) {
                    continue;
                }
                for &maturity in &self.maturities {
                    for &vol in &self.vols {
                        out.push(Cell { rate, dividend, maturity, vol });
                    }
                }
            }
        }
        out
    }

    /// Options before the price floor is applied.
    pub fn raw_size(&self) -> usize {
        self.cells().len() * self.spots.len()
    }

    /// The put of `cell` at `spot`.
    pub fn option(&self, cell: &Cell, spot: f64) -> Result<MarketParams> {
        MarketParams::put(spot, self.strike, cell.rate, cell.dividend, cell.vol, cell.maturity)
    }
}
