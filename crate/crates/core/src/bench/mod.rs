//! Accuracy and throughput over parameter grids, and reproduction of the
//! reference tables.

mod grid;
mod tables;

pub use grid::{Cell, TestGrid};
pub use tables::{reproduce_table, Table, TableCell, TableName};

use crate::blackscholes::european_price;
use crate::error::{Error, Result};
use crate::fdm::{fd_price, fd_price_batch, LcpSolverKind};
use crate::kim::{kim_price, kim_price_batch, KimConfig};
use crate::qdplus::juzhong_price;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::path::{Path, PathBuf};
use std::time::Instant;

/// Environment variable naming the directory for cached reference prices.
pub const CACHE_DIR_VAR: &str = "NEGRATE_CACHE_DIR";

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BenchMethod {
    Kim(KimConfig),
    Fdm { time_steps: usize, solver: LcpSolverKind },
    JuZhong,
    European,
}

impl BenchMethod {
    pub fn label(&self) -> String {
        match self {
            BenchMethod::Kim(c) => format!(
                "{} m={} n={} l={} p={}",
                c.method.name(),
                c.m,
                c.n,
                c.quad.inner_points,
                c.quad.pricing_points
            ),
            BenchMethod::Fdm { time_steps, solver } => format!("fdm m={time_steps} {solver:?}"),
            BenchMethod::JuZhong => "juzhong".into(),
            BenchMethod::European => "european".into(),
        }
    }
}

/// Where reference prices come from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Reference {
    /// TR-BDF2 with policy iteration and this many time steps.
    Fdm { time_steps: usize },
    /// A file written by [`save_references`].
    Stored(PathBuf),
}

/// Reference prices for every option of a grid, cell by cell in
/// [`TestGrid::cells`] order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReferenceSet {
    pub grid: TestGrid,
    pub source: String,
    pub prices: Vec<Vec<f64>>,
}

impl ReferenceSet {
    /// Options that pass the grid's price floor.
    pub fn retained(&self) -> usize {
        self.prices.iter().flatten().filter(|&&p| p >= self.grid.price_floor).count()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RunMode {
    Batch,
    Individual,
    Both,
}

/// Error statistics over the retained options. `mae` is the maximum
/// absolute error; `rrmse` the root mean square of relative errors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorReport {
    pub method: String,
    pub grid: String,
    pub options: usize,
    pub failures: usize,
    pub rmse: f64,
    pub mae: f64,
    pub rrmse: f64,
    /// Options per second priced one at a time.
    pub throughput: Option<f64>,
    /// Options per second pricing all spots of a cell together.
    pub throughput_batch: Option<f64>,
    /// Largest difference between batch and individual prices.
    pub batch_mismatch: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptionRecord {
    pub spot: f64,
    pub strike: f64,
    pub rate: f64,
    pub dividend: f64,
    pub vol: f64,
    pub maturity: f64,
    pub price: Option<f64>,
    pub reference: f64,
    pub abs_error: Option<f64>,
    pub rel_error: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridRun {
    pub report: ErrorReport,
    pub records: Vec<OptionRecord>,
}

fn price_cell(grid: &TestGrid, cell: &Cell, method: &BenchMethod, batch: bool) -> Vec<Option<f64>> {
    let one = |s: f64| -> Result<f64> {
        let p = grid.option(cell, s)?;
        Ok(match method {
            BenchMethod::Kim(c) => kim_price(&p, c)?.price,
            BenchMethod::Fdm { time_steps, solver } => fd_price(&p, *time_steps, *solver)?.price,
            BenchMethod::JuZhong => juzhong_price(&p)?.price,
            BenchMethod::European => european_price(&p)?,
        })
    };
    if !batch {
        return grid.spots.iter().map(|&s| one(s).ok()).collect();
    }
    let batched: Result<Vec<f64>> = (|| match method {
        BenchMethod::Kim(c) => {
            let p = grid.option(cell, grid.spots[0])?;
            Ok(kim_price_batch(&p, &grid.spots, c)?.into_iter().map(|r| r.price).collect())
        }
        BenchMethod::Fdm { time_steps, solver } => fdm_batch(grid, cell, *time_steps, *solver),
        _ => grid.spots.iter().map(|&s| one(s)).collect(),
    })();
    match batched {
        Ok(v) => v.into_iter().map(Some).collect(),
        // a cell-level failure: retry option by option so that only the
        // failing options are lost
        Err(_) => grid.spots.iter().map(|&s| one(s).ok()).collect(),
    }
}

fn fdm_batch(grid: &TestGrid, cell: &Cell, m: usize, solver: LcpSolverKind) -> Result<Vec<f64>> {
    let first = grid.option(cell, grid.spots[0])?;
    Ok(fd_price_batch(&first, &grid.spots, m, solver)?.into_iter().map(|r| r.price).collect())
}

fn cache_key(grid: &TestGrid, reference: &Reference) -> Result<String> {
    let mut h = Sha256::new();
    h.update(serde_json::to_vec(grid)?);
    h.update(serde_json::to_vec(reference)?);
    h.update(env!("CARGO_PKG_VERSION").as_bytes());
    // bumped when reference pricing changes
    h.update(b"floor-european");
    Ok(format!("{:x}", h.finalize()))
}

fn cache_path(grid: &TestGrid, reference: &Reference) -> Result<Option<PathBuf>> {
    match std::env::var_os(CACHE_DIR_VAR) {
        Some(dir) if !dir.is_empty() => {
            Ok(Some(Path::new(&dir).join(format!("ref-{}.json", cache_key(grid, reference)?))))
        }
        _ => Ok(None),
    }
}

/// Reference prices for `grid`. Finite-difference references are read from
/// and written to the cache directory when `NEGRATE_CACHE_DIR` is set.
pub fn reference_prices(grid: &TestGrid, reference: &Reference) -> Result<ReferenceSet> {
    match reference {
        Reference::Stored(path) => {
            let set = load_references(path)?;
            if set.grid != *grid {
                return Err(Error::Config(format!("{} holds references for grid '{}'", path.display(), set.grid.name)));
            }
            Ok(set)
        }
        Reference::Fdm { time_steps } => {
            let cached = cache_path(grid, reference)?;
            if let Some(path) = &cached {
                if path.exists() {
                    if let Ok(set) = load_references(path) {
                        if set.grid == *grid {
                            return Ok(set);
                        }
                    }
                }
            }
            let prices = grid
                .cells()
                .par_iter()
                .map(|c| -> Result<Vec<f64>> { fdm_batch(grid, c, *time_steps, LcpSolverKind::PolicyIteration) })
                .collect::<Result<Vec<_>>>()?;
            let set = ReferenceSet { grid: grid.clone(), source: format!("fdm m={time_steps}"), prices };
            if let Some(path) = &cached {
                if let Some(dir) = path.parent() {
                    std::fs::create_dir_all(dir)?;
                }
                save_references(&set, path)?;
            }
            Ok(set)
        }
    }
}

pub fn save_references(set: &ReferenceSet, path: &Path) -> Result<()> {
    let tmp = path.with_extension("json.tmp");
    std::fs::write(&tmp, serde_json::to_vec(set)?)?;
    std::fs::rename(&tmp, path)?;
    Ok(())
}

pub fn load_references(path: &Path) -> Result<ReferenceSet> {
    let set: ReferenceSet = serde_json::from_slice(&std::fs::read(path)?)?;
    let cells = set.grid.cells();
    if set.prices.len() != cells.len() || set.prices.iter().any(|p| p.len() != set.grid.spots.len()) {
        return Err(Error::Io(format!("{}: reference table does not match its grid", path.display())));
    }
    Ok(set)
}

fn timed(grid: &TestGrid, method: &BenchMethod, batch: bool) -> (Vec<Vec<Option<f64>>>, f64) {
    let start = Instant::now();
    let prices: Vec<Vec<Option<f64>>> =
        grid.cells().par_iter().map(|c| price_cell(grid, c, method, batch)).collect();
    let secs = start.elapsed().as_secs_f64().max(1e-9);
    (prices, grid.raw_size() as f64 / secs)
}

/// Prices every option of `grid` with `method` and compares with the
/// reference. Options under the price floor are left out.
pub fn run_grid(grid: &TestGrid, method: &BenchMethod, reference: &Reference, mode: RunMode) -> Result<GridRun> {
    let refs = reference_prices(grid, reference)?;
    run_grid_with(&refs, method, mode)
}

/// As [`run_grid`], with reference prices already at hand.
pub fn run_grid_with(refs: &ReferenceSet, method: &BenchMethod, mode: RunMode) -> Result<GridRun> {
    let grid = &refs.grid;
    let (batch, throughput_batch) = match mode {
        RunMode::Individual => (None, None),
        _ => {
            let (p, t) = timed(grid, method, true);
            (Some(p), Some(t))
        }
    };
    let (single, throughput) = match mode {
        RunMode::Batch => (None, None),
        _ => {
            let (p, t) = timed(grid, method, false);
            (Some(p), Some(t))
        }
    };
    let batch_mismatch = match (&batch, &single) {
        (Some(a), Some(b)) => Some(
            a.iter()
                .flatten()
                .zip(b.iter().flatten())
                .filter_map(|(x, y)| Some((x.as_ref()? - y.as_ref()?).abs()))
                .fold(0.0, f64::max),
        ),
        _ => None,
    };
    let prices = batch.or(single).ok_or_else(|| Error::Config("nothing to run".into()))?;
    let mut records = Vec::new();
    for ((cell, got), want) in grid.cells().iter().zip(&prices).zip(&refs.prices) {
        for ((&spot, price), &reference) in grid.spots.iter().zip(got).zip(want) {
            if reference < grid.price_floor {
                continue;
            }
            let abs_error = price.map(|p| p - reference);
            records.push(OptionRecord {
                spot,
                strike: grid.strike,
                rate: cell.rate,
                dividend: cell.dividend,
                vol: cell.vol,
                maturity: cell.maturity,
                price: *price,
                reference,
                abs_error,
                rel_error: abs_error.map(|e| e / reference),
            });
        }
    }
    let report = summarize(grid, method, &records, throughput, throughput_batch, batch_mismatch);
    Ok(GridRun { report, records })
}

fn summarize(
    grid: &TestGrid,
    method: &BenchMethod,
    records: &[OptionRecord],
    throughput: Option<f64>,
    throughput_batch: Option<f64>,
    batch_mismatch: Option<f64>,
) -> ErrorReport {
    let ok: Vec<&OptionRecord> = records.iter().filter(|r| r.abs_error.is_some()).collect();
    let n = ok.len().max(1) as f64;
    let sq: f64 = ok.iter().map(|r| r.abs_error.unwrap().powi(2)).sum();
    let rel: f64 = ok.iter().map(|r| r.rel_error.unwrap().powi(2)).sum();
    ErrorReport {
        method: method.label(),
        grid: grid.name.clone(),
        options: records.len(),
        failures: records.len() - ok.len(),
        rmse: (sq / n).sqrt(),
        mae: ok.iter().map(|r| r.abs_error.unwrap().abs()).fold(0.0, f64::max),
        rrmse: (rel / n).sqrt(),
        throughput,
        throughput_batch,
        batch_mismatch,
    }
}

/// One CSV row per option.
pub fn write_records_csv<W: std::io::Write>(records: &[OptionRecord], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in records {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_run_json<W: std::io::Write>(run: &GridRun, out: W) -> Result<()> {
    serde_json::to_writer_pretty(out, run)?;
    Ok(())
}
