//! TR-BDF2 finite differences for the American option LCP.
//!
//! Space nodes follow `S = K + c sinh(xi)` with `xi` uniform; time levels
//! are uniform in `sqrt(tau)`. Each TR-BDF2 stage is an LCP
//! `min(A v - b, v - g) = 0`, solved by policy iteration (exact, any
//! rates) or Brennan-Schwartz (single exercise region only).

mod grid;
mod lcp;

pub use grid::FdGrid;
pub use lcp::{brennan_schwartz, policy_iteration, Tridiagonal};

use crate::blackscholes::{european_value, MarketParams, OptionKind};
use crate::error::{Error, Result};
use crate::region::classify;
use crate::types::{BoundarySamples, PriceResult};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum LcpSolverKind {
    BrennanSchwartz,
    PolicyIteration,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FdConfig {
    pub time_steps: usize,
    pub solver: LcpSolverKind,
    /// When false the PDE is solved without the exercise constraint.
    pub american: bool,
}

impl FdConfig {
    pub fn new(time_steps: usize, solver: LcpSolverKind) -> Self {
        Self { time_steps, solver, american: true }
    }
}

/// Values on the grid at `t = 0` and the exercise frontier at every level.
#[derive(Debug, Clone, PartialEq)]
pub struct FdSolution {
    pub grid: FdGrid,
    pub values: Vec<f64>,
    pub boundary: BoundarySamples,
    /// Largest `|min(A v - b, v - g)|` over all stages.
    pub lcp_residual: f64,
    /// Smallest `v - g` over all stages.
    pub min_gap: f64,
}

const ALPHA: f64 = 2.0 - std::f64::consts::SQRT_2;

struct Pde {
    kind: OptionKind,
    strike: f64,
    rate: f64,
    dividend: f64,
    vol: f64,
}

impl Pde {
    fn payoff(&self, s: f64) -> f64 {
        self.kind.payoff(s, self.strike)
    }

    fn edge_value(&self, s: f64, tau: f64, american: bool) -> f64 {
        let e = european_value(self.kind, s, self.strike, self.rate, self.dividend, self.vol, tau);
        if american {
            e.max(self.payoff(s))
        } else {
            e
        }
    }

    /// Tridiagonal `L` (`dV/dtau = L V`) at the interior nodes; edge rows are zero.
    fn operator(&self, s: &[f64]) -> Tridiagonal {
        let n = s.len();
        let mut op = Tridiagonal::zeros(n);
        let v2 = self.vol * self.vol;
        let mu = self.rate - self.dividend;
        for i in 1..n - 1 {
            let hm = s[i] - s[i - 1];
            let hp = s[i + 1] - s[i];
            let diff = v2 * s[i] * s[i];
            let drift = mu * s[i];
            let (mut lo, mut di, mut up) = (
                diff / (hm * (hm + hp)),
                -diff / (hm * hp),
                diff / (hp * (hm + hp)),
            );
            if drift.abs() * hm.max(hp) > diff {
                // upwind when central differences would lose monotonicity
                if drift > 0.0 {
                    di -= drift / hp;
                    up += drift / hp;
                } else {
                    di += drift / hm;
                    lo -= drift / hm;
                }
            } else {
                lo -= drift * hp / (hm * (hm + hp));
                di += drift * (hp - hm) / (hm * hp);
                up += drift * hm / (hp * (hm + hp));
            }
            op.lower[i] = lo;
            op.diag[i] = di - self.rate;
            op.upper[i] = up;
        }
        op
    }
}

/// Cell average of the payoff over `[mid_{i-1}, mid_i]`.
fn averaged_payoff(pde: &Pde, s: &[f64]) -> Vec<f64> {
    let n = s.len();
    let k = pde.strike;
    (0..n)
        .map(|i| {
            if i == 0 || i == n - 1 {
                return pde.payoff(s[i]);
            }
            let a = 0.5 * (s[i - 1] + s[i]);
            let b = 0.5 * (s[i] + s[i + 1]);
            if b <= k || a >= k {
                return pde.payoff(s[i]);
            }
            // kink inside the cell
            let area = match pde.kind {
                OptionKind::Put => 0.5 * (k - a) * (k - a),
                OptionKind::Call => 0.5 * (b - k) * (b - k),
            };
            area / (b - a)
        })
        .collect()
}

fn solve_stage(
    sys: &Tridiagonal,
    rhs: &[f64],
    obstacle: Option<&[f64]>,
    solver: LcpSolverKind,
    kind: OptionKind,
) -> Result<Vec<f64>> {
    match obstacle {
        None => Ok(sys.solve(rhs)),
        Some(g) => match solver {
            LcpSolverKind::PolicyIteration => policy_iteration(sys, rhs, g),
            LcpSolverKind::BrennanSchwartz => Ok(brennan_schwartz(sys, rhs, g, kind == OptionKind::Put)),
        },
    }
}

fn stage_residual(sys: &Tridiagonal, rhs: &[f64], v: &[f64], g: &[f64]) -> (f64, f64) {
    let av = sys.apply(v);
    let mut res = 0.0f64;
    let mut gap = f64::INFINITY;
    for i in 0..v.len() {
        let scale = 1.0 + rhs[i].abs();
        res = res.max((av[i] - rhs[i]).min(v[i] - g[i]).abs() / scale);
        gap = gap.min(v[i] - g[i]);
    }
    (res, gap)
}

/// Exercise region at one level: nodes where `v = g` and `g > 0`. Each
/// edge is located between the last exercised node and the next one by
/// linear interpolation of `sqrt(v - g)`. Returns `(lower edge, upper
/// edge)`; an edge touching the end of the grid is `None`.
fn frontier(s: &[f64], v: &[f64], g: &[f64], tol: f64) -> Option<(Option<f64>, Option<f64>)> {
    let n = s.len();
    let ex: Vec<usize> = (1..n - 1).filter(|&i| g[i] > 0.0 && v[i] - g[i] <= tol * (1.0 + g[i])).collect();
    let (Some(&lo), Some(&hi)) = (ex.first(), ex.last()) else {
        return None;
    };
    let refine = |inside: usize, out1: usize, out2: usize| -> f64 {
        let h1 = (v[out1] - g[out1]).max(0.0).sqrt();
        let h2 = (v[out2] - g[out2]).max(0.0).sqrt();
        let (a, c) = if s[inside] < s[out1] { (s[inside], s[out1]) } else { (s[out1], s[inside]) };
        if h2 > h1 {
            (s[out1] - h1 * (s[out2] - s[out1]) / (h2 - h1)).clamp(a, c)
        } else {
            0.5 * (a + c)
        }
    };
    let upper = if hi + 2 < n { Some(refine(hi, hi + 1, hi + 2)) } else { None };
    let lower = if lo >= 2 { Some(refine(lo, lo - 1, lo - 2)) } else { None };
    Some((lower, upper))
}

/// Full TR-BDF2 solve. For a put `upper`/`lower` are the edges of the
/// exercise band. For a call `upper` holds the boundary nearest the
/// strike (the lower edge of the region) and `lower` the far edge, matching
/// the put obtained by put-call symmetry.
pub fn fd_solve(p: &MarketParams, cfg: &FdConfig) -> Result<FdSolution> {
    p.validate()?;
    let m = cfg.time_steps;
    if m < 2 {
        return Err(Error::Config("at least two time steps are needed".into()));
    }
    let region = classify(p.kind, p.rate, p.dividend);
    let own_rate = match p.kind {
        OptionKind::Put => p.rate,
        OptionKind::Call => p.dividend,
    };
    if cfg.american && cfg.solver == LcpSolverKind::BrennanSchwartz && own_rate < 0.0 {
        return Err(Error::Config("Brennan-Schwartz assumes a single continuation region".into()));
    }
    let grid = FdGrid::new(p, m)?;
    let s = &grid.nodes;
    let n = s.len();
    let pde = Pde { kind: p.kind, strike: p.strike, rate: p.rate, dividend: p.dividend, vol: p.vol };
    let g: Vec<f64> = s.iter().map(|&x| pde.payoff(x)).collect();
    let obstacle = if cfg.american { Some(g.as_slice()) } else { None };
    let op = pde.operator(s);
    let mut v = averaged_payoff(&pde, s);
    let mut lcp_residual = 0.0f64;
    let mut min_gap = f64::INFINITY;
    let mut upper = Vec::with_capacity(m);
    let mut lower = Vec::with_capacity(m);
    let times = &grid.times;
    for k in 0..m {
        let (t0, t1) = (times[k], times[k + 1]);
        let dt = t1 - t0;
        // trapezoidal stage to t0 + alpha dt
        let ta = t0 + ALPHA * dt;
        let half = 0.5 * ALPHA * dt;
        let mut sys = op.scaled_identity_minus(half);
        let mut rhs = op.apply_plus_identity(&v, half);
        set_edges(&mut sys, &mut rhs, s, |x| pde.edge_value(x, ta, cfg.american));
        let va = solve_stage(&sys, &rhs, obstacle, cfg.solver, p.kind)?;
        if cfg.american {
            let (r, gp) = stage_residual(&sys, &rhs, &va, &g);
            lcp_residual = lcp_residual.max(r);
            min_gap = min_gap.min(gp);
        }
        // BDF2 stage to t1
        let w = (1.0 - ALPHA) / (2.0 - ALPHA) * dt;
        let c1 = 1.0 / (ALPHA * (2.0 - ALPHA));
        let c0 = (1.0 - ALPHA) * (1.0 - ALPHA) / (ALPHA * (2.0 - ALPHA));
        sys = op.scaled_identity_minus(w);
        rhs = (0..n).map(|i| c1 * va[i] - c0 * v[i]).collect();
        set_edges(&mut sys, &mut rhs, s, |x| pde.edge_value(x, t1, cfg.american));
        v = solve_stage(&sys, &rhs, obstacle, cfg.solver, p.kind)?;
        if cfg.american {
            let (r, gp) = stage_residual(&sys, &rhs, &v, &g);
            lcp_residual = lcp_residual.max(r);
            min_gap = min_gap.min(gp);
            let (near, far) = match (frontier(s, &v, &g, 1e-10), p.kind) {
                (None, _) => (None, None),
                (Some((lo, hi)), OptionKind::Put) => (hi, lo),
                (Some((lo, hi)), OptionKind::Call) => (lo, hi),
            };
            upper.push(near);
            lower.push(if region.double_boundary_possible { far } else { None });
        } else {
            upper.push(None);
            lower.push(None);
        }
    }
    // levels were produced in increasing tau: reverse to ascending t
    let bt: Vec<f64> = times[1..].iter().rev().map(|tau| p.maturity - tau).collect();
    upper.reverse();
    lower.reverse();
    let boundary = BoundarySamples { times: bt, upper, lower };
    Ok(FdSolution { grid, values: v, boundary, lcp_residual, min_gap: if cfg.american { min_gap } else { 0.0 } })
}

fn set_edges(sys: &mut Tridiagonal, rhs: &mut [f64], s: &[f64], value: impl Fn(f64) -> f64) {
    let n = s.len();
    for i in [0, n - 1] {
        sys.lower[i] = 0.0;
        sys.upper[i] = 0.0;
        sys.diag[i] = 1.0;
        rhs[i] = value(s[i]);
    }
}

/// Four-point Lagrange interpolation of grid values at `x`.
pub fn interpolate(s: &[f64], v: &[f64], x: f64) -> f64 {
    let n = s.len();
    let j = s.partition_point(|&y| y <= x).clamp(2, n - 2);
    let idx = [j - 2, j - 1, j, j + 1];
    let mut acc = 0.0;
    for &a in &idx {
        let mut w = 1.0;
        for &b in &idx {
            if a != b {
                w *= (x - s[b]) / (s[a] - s[b]);
            }
        }
        acc += w * v[a];
    }
    acc
}

/// Lower bound `max(European, intrinsic)` applied to interpolated grid
/// prices; the discrete European value can sit a few 1e-6 below it.
pub fn price_floor(p: &MarketParams) -> f64 {
    european_value(p.kind, p.spot, p.strike, p.rate, p.dividend, p.vol, p.maturity).max(p.intrinsic())
}

/// American price at the spot with `m` time steps and `10 m` space steps.
pub fn fd_price(p: &MarketParams, m: usize, solver: LcpSolverKind) -> Result<PriceResult> {
    let sol = fd_solve(p, &FdConfig::new(m, solver))?;
    let european = european_value(p.kind, p.spot, p.strike, p.rate, p.dividend, p.vol, p.maturity);
    let price = interpolate(&sol.grid.nodes, &sol.values, p.spot).max(price_floor(p));
    let mut r = PriceResult::new("fdm", price, european);
    r.iterations = m;
    r.residual = sol.lcp_residual;
    r.boundary = Some(sol.boundary);
    Ok(r)
}

/// Prices at several spots from one solve; a spot whose domain differs
/// from that of the first is solved on its own grid.
pub fn fd_price_batch(p: &MarketParams, spots: &[f64], m: usize, solver: LcpSolverKind) -> Result<Vec<PriceResult>> {
    let Some(&first) = spots.first() else {
        return Ok(Vec::new());
    };
    let sol = fd_solve(&p.with_spot(first), &FdConfig::new(m, solver))?;
    spots
        .iter()
        .map(|&s| {
            let q = p.with_spot(s);
            if FdGrid::new(&q, m)?.nodes != sol.grid.nodes {
                return fd_price(&q, m, solver);
            }
            let european = european_value(q.kind, s, q.strike, q.rate, q.dividend, q.vol, q.maturity);
            let price = interpolate(&sol.grid.nodes, &sol.values, s).max(price_floor(&q));
            let mut r = PriceResult::new("fdm", price, european);
            r.iterations = m;
            r.residual = sol.lcp_residual;
            r.boundary = Some(sol.boundary.clone());
            Ok(r)
        })
        .collect()
}

/// Exercise boundaries on the time levels, with the grid used.
#[derive(Debug, Clone, PartialEq)]
pub struct FdBoundary {
    pub samples: BoundarySamples,
    pub grid: FdGrid,
}

impl FdBoundary {
    /// Width of the space cell containing `x`.
    pub fn cell_width(&self, x: f64) -> f64 {
        self.grid.cell_width(x)
    }
}

/// Exercise frontier of the American option at every time level, by
/// policy iteration. Levels with an empty exercise region are `None`.
pub fn fd_boundary(p: &MarketParams, m: usize) -> Result<FdBoundary> {
    let sol = fd_solve(p, &FdConfig::new(m, LcpSolverKind::PolicyIteration))?;
    Ok(FdBoundary { samples: sol.boundary, grid: sol.grid })
}
