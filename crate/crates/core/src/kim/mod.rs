//! Kim integral equation for the American put with one or two exercise
//! boundaries.
//!
//! The boundaries are Chebyshev interpolants on `tau in [0, tau_s]`, where
//! `tau_s = T - t_s` and `t_s` is the time before which the two boundaries
//! of a put with `q < r < 0` have merged (no exercise possible). Boundary
//! values at the collocation nodes are found by fixed-point iteration
//! (FP-B on price continuity, FP-A on high contact, FP-B' for pairs) or by
//! Gauss-Newton. The price is the European value plus the premium integral.

mod chebyshev;
mod crossing;
mod equations;
mod fixed_point;
mod gauss_newton;
mod quadrature;

pub use chebyshev::{chebyshev_boundary, knot_times, BoundaryCurve, CurveSide};
pub use crossing::{adjust_crossed_guess, estimate_crossing_time, qdplus_guess};
pub use fixed_point::{fixed_point_trace, fp_a_step, fp_b_prime_iterate, fp_b_step, FixedPointScheme};
pub use gauss_newton::{gauss_newton_solve, GaussNewtonReport, GnSystem};
pub use quadrature::{tanh_sinh_integrate, Node, TanhSinh};

use crate::blackscholes::{european_price, symmetric_put_params, MarketParams, OptionKind};
use crate::error::{Error, Result};
use crate::region::{classify, maturity_limits};
use crate::types::{BoundarySamples, PriceResult};
use equations::Kernel;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuadratureSpec {
    /// Nodes for the integrals inside the boundary equations.
    pub inner_points: usize,
    /// Nodes for the premium integral.
    pub pricing_points: usize,
}

impl QuadratureSpec {
    pub fn new(inner_points: usize, pricing_points: usize) -> Result<Self> {
        let q = Self { inner_points, pricing_points };
        q.validate()?;
        Ok(q)
    }

    pub fn validate(&self) -> Result<()> {
        if self.inner_points < 3 || self.pricing_points < 3 {
            return Err(Error::Config("quadratures need at least 3 points".into()));
        }
        Ok(())
    }
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self { inner_points: 15, pricing_points: 31 }
    }
}

/// Upper boundary, optional lower boundary and crossing time of a put.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DoubleBoundary {
    pub maturity: f64,
    pub upper: BoundaryCurve,
    pub lower: Option<BoundaryCurve>,
    /// Calendar time before which exercise is never optimal.
    pub t_s: Option<f64>,
}

impl DoubleBoundary {
    pub fn tau_max(&self) -> f64 {
        self.upper.tau_max
    }

    pub fn intervals(&self) -> usize {
        self.upper.intervals()
    }

    /// `tau` of the collocation nodes.
    pub fn knots(&self) -> &[f64] {
        &self.upper.knots
    }

    /// Boundaries on `points` calendar times spread over `[0, T]`; empty
    /// before the crossing time.
    pub fn samples(&self, points: usize) -> BoundarySamples {
        let points = points.max(2);
        let t_s = self.t_s.unwrap_or(0.0);
        let times: Vec<f64> = (0..points).map(|i| self.maturity * i as f64 / (points - 1) as f64).collect();
        let mut upper = Vec::with_capacity(points);
        let mut lower = Vec::with_capacity(points);
        for &t in &times {
            if t < t_s {
                upper.push(None);
                lower.push(None);
            } else {
                let tau = self.maturity - t;
                upper.push(Some(self.upper.eval(tau)));
                lower.push(self.lower.as_ref().map(|l| l.eval(tau)));
            }
        }
        BoundarySamples { times, upper, lower }
    }

    /// Node values as calendar-time samples, ascending in `t`.
    pub fn knot_samples(&self) -> BoundarySamples {
        let n = self.upper.knots.len();
        let mut times = Vec::with_capacity(n);
        let mut upper = Vec::with_capacity(n);
        let mut lower = Vec::with_capacity(n);
        for i in (0..n).rev() {
            times.push(self.maturity - self.upper.knots[i]);
            upper.push(Some(self.upper.values[i]));
            lower.push(self.lower.as_ref().map(|l| l.values[i]));
        }
        BoundarySamples { times, upper, lower }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum KimMethod {
    FpB,
    FpA,
    FpBPrime,
    GaussNewtonA,
    GaussNewtonB,
}

impl KimMethod {
    pub fn name(self) -> &'static str {
        match self {
            KimMethod::FpB => "kim-fpb",
            KimMethod::FpA => "kim-fpa",
            KimMethod::FpBPrime => "kim-fpbprime",
            KimMethod::GaussNewtonA => "kim-gn-a",
            KimMethod::GaussNewtonB => "kim-gn-b",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KimConfig {
    pub method: KimMethod,
    /// Collocation intervals; the curve has `m + 1` nodes including `tau = 0`.
    pub m: usize,
    /// Fixed-point iterations.
    pub n: usize,
    pub quad: QuadratureSpec,
    /// Stop early once the largest knot change is below this fraction of `K`.
    pub stop_tol: Option<f64>,
    pub gn_tol: f64,
    /// Crossing-time bisection stops at this fraction of the maturity.
    pub crossing_threshold: f64,
    /// On breakdown, retry with GN-B, then the finite-difference solver.
    pub fallback: bool,
}

impl Default for KimConfig {
    fn default() -> Self {
        Self {
            method: KimMethod::FpBPrime,
            m: 7,
            n: 16,
            quad: QuadratureSpec::default(),
            stop_tol: None,
            gn_tol: 1e-8,
            crossing_threshold: 1e-2,
            fallback: true,
        }
    }
}

impl KimConfig {
    pub fn new(method: KimMethod, m: usize, n: usize, l: usize, p: usize) -> Self {
        Self { method, m, n, quad: QuadratureSpec { inner_points: l, pricing_points: p }, ..Self::default() }
    }

    /// FP-B' when `r < 0`, FP-B otherwise, for the put-side rate.
    pub fn method_for(rate: f64) -> KimMethod {
        if rate < 0.0 {
            KimMethod::FpBPrime
        } else {
            KimMethod::FpB
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.quad.validate()?;
        if self.m < 1 {
            return Err(Error::Config("at least one collocation interval is needed".into()));
        }
        if !(self.crossing_threshold > 0.0) {
            return Err(Error::Config("crossing threshold must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KimSolution {
    pub boundary: DoubleBoundary,
    pub method: KimMethod,
    pub iterations: usize,
    /// Last fixed-point change relative to `K`, or Gauss-Newton residual norm.
    pub residual: f64,
    /// Set when the configured method broke down and GN-B was used.
    pub fallback: bool,
}

pub(crate) fn kernel(p: &MarketParams) -> Kernel {
    Kernel { strike: p.strike, rate: p.rate, dividend: p.dividend, vol: p.vol }
}

fn put_side(p: &MarketParams) -> Result<MarketParams> {
    p.validate()?;
    match p.kind {
        OptionKind::Put => Ok(*p),
        OptionKind::Call => symmetric_put_params(p),
    }
}

/// Reference levels `(X_upper, X_lower)` of the put boundaries.
pub(crate) fn reference_levels(p: &MarketParams) -> Result<(f64, Option<f64>)> {
    let lim = maturity_limits(p)?;
    Ok((lim.u_limit, lim.l_limit))
}

/// Solves the boundaries of a put with the configured method.
pub fn kim_boundary(p: &MarketParams, cfg: &KimConfig) -> Result<KimSolution> {
    cfg.validate()?;
    let put = put_side(p)?;
    let guess = qdplus_guess(&put, cfg.m, cfg.crossing_threshold * put.maturity)?;
    let first = solve_from(&put, &guess, cfg, cfg.method);
    match first {
        Ok(s) => Ok(s),
        Err(e @ (Error::Breakdown { .. } | Error::NonConvergence { .. } | Error::Domain(_)))
            if cfg.fallback && cfg.method != KimMethod::GaussNewtonB =>
        {
            log::debug!("{} failed ({e}); retrying with GN-B", cfg.method.name());
            let mut s = solve_from(&put, &guess, cfg, KimMethod::GaussNewtonB)?;
            s.fallback = true;
            Ok(s)
        }
        Err(e) => Err(e),
    }
}

fn solve_from(put: &MarketParams, guess: &DoubleBoundary, cfg: &KimConfig, method: KimMethod) -> Result<KimSolution> {
    let quad = cfg.quad;
    let double = guess.lower.is_some();
    match method {
        KimMethod::FpB | KimMethod::FpA | KimMethod::FpBPrime => {
            let scheme = match method {
                KimMethod::FpB => FixedPointScheme::FpB,
                KimMethod::FpA => FixedPointScheme::FpA,
                _ => FixedPointScheme::FpBPrime,
            };
            if double && scheme == FixedPointScheme::FpA {
                return Err(Error::Config("FP-A is defined for a single boundary".into()));
            }
            let scheme = if !double && scheme == FixedPointScheme::FpBPrime { FixedPointScheme::FpB } else { scheme };
            let (b, iterations, residual) = fixed_point::iterate(put, guess, quad, scheme, cfg.n, cfg.stop_tol)?;
            Ok(KimSolution { boundary: b, method, iterations, residual, fallback: false })
        }
        KimMethod::GaussNewtonA | KimMethod::GaussNewtonB => {
            let system = if method == KimMethod::GaussNewtonA { GnSystem::HighContact } else { GnSystem::Continuity };
            let (b, rep) = gauss_newton_solve(system, guess, put, quad, cfg.gn_tol)?;
            Ok(KimSolution { boundary: b, method, iterations: rep.steps, residual: rep.residual, fallback: false })
        }
    }
}

/// Price of a put given a single boundary.
pub fn kim_price_single(p: &MarketParams, b: &BoundaryCurve, quad: QuadratureSpec) -> Result<PriceResult> {
    let db = DoubleBoundary { maturity: p.maturity, upper: b.clone(), lower: None, t_s: None };
    kim_price_double(p, &db, quad)
}

/// Price of a put from its boundaries.
pub fn kim_price_double(p: &MarketParams, db: &DoubleBoundary, quad: QuadratureSpec) -> Result<PriceResult> {
    quad.validate()?;
    if p.kind != OptionKind::Put {
        return Err(Error::Domain("boundaries describe a put".into()));
    }
    let tau_s = db.tau_max();
    if !(tau_s <= p.maturity * (1.0 + 1e-12)) || (db.t_s.is_none() && (tau_s - p.maturity).abs() > 1e-12 * p.maturity)
    {
        return Err(Error::Domain("boundary domain does not match the maturity".into()));
    }
    let european = european_price(p)?;
    let (s, k) = (p.spot, p.strike);
    let res = |price: f64| {
        let mut r = PriceResult::new("kim", price, european);
        r.boundary = Some(db.knot_samples());
        r
    };
    if db.t_s.is_none() {
        let u0 = db.upper.eval(p.maturity);
        let l0 = db.lower.as_ref().map_or(0.0, |l| l.eval(p.maturity));
        if s <= u0 && s >= l0 {
            return Ok(res(k - s));
        }
    }
    let rule = TanhSinh::new(quad.pricing_points);
    let prem = kernel(p).premium(s, p.maturity, tau_s.min(p.maturity), &db.upper, db.lower.as_ref(), &rule);
    let price = (european + prem).max(european).max(k - s);
    Ok(res(price))
}

/// Prices an option (calls through put-call symmetry) with the Kim
/// equation; never-exercise regimes return the European price.
pub fn kim_price(p: &MarketParams, cfg: &KimConfig) -> Result<PriceResult> {
    let put = put_side(p)?;
    let european = european_price(&put)?;
    if classify(OptionKind::Put, put.rate, put.dividend).never_optimal {
        return Ok(PriceResult::new(cfg.method.name(), european, european));
    }
    match kim_boundary(&put, cfg) {
        Ok(sol) => {
            let mut r = kim_price_double(&put, &sol.boundary, cfg.quad)?;
            r.method = if sol.fallback { format!("{} -> kim-gn-b", cfg.method.name()) } else { cfg.method.name().into() };
            r.iterations = sol.iterations;
            r.residual = sol.residual;
            r.degraded = sol.fallback;
            Ok(r)
        }
        Err(e) if cfg.fallback => {
            log::debug!("Kim solvers failed ({e}); using finite differences");
            let mut r = crate::fdm::fd_price(&put, FALLBACK_FD_STEPS, crate::fdm::LcpSolverKind::PolicyIteration)?;
            r.method = format!("{} -> fdm", cfg.method.name());
            r.degraded = true;
            Ok(r)
        }
        Err(e) => Err(e),
    }
}

const FALLBACK_FD_STEPS: usize = 200;

/// Prices several spots from one boundary solve.
pub fn kim_price_batch(p: &MarketParams, spots: &[f64], cfg: &KimConfig) -> Result<Vec<PriceResult>> {
    let put = put_side(p)?;
    let swap = p.kind == OptionKind::Call;
    // for a call the spot enters the symmetric put as its strike
    let european_only = classify(OptionKind::Put, put.rate, put.dividend).never_optimal;
    if european_only || swap {
        return spots.iter().map(|&s| kim_price(&p.with_spot(s), cfg)).collect();
    }
    let sol = match kim_boundary(&put, cfg) {
        Ok(s) => s,
        Err(e) if cfg.fallback => {
            log::debug!("Kim solvers failed ({e}); using finite differences");
            let mut out = crate::fdm::fd_price_batch(&put, spots, FALLBACK_FD_STEPS, crate::fdm::LcpSolverKind::PolicyIteration)?;
            for r in &mut out {
                r.method = format!("{} -> fdm", cfg.method.name());
                r.degraded = true;
            }
            return Ok(out);
        }
        Err(e) => return Err(e),
    };
    spots
        .iter()
        .map(|&s| {
            let mut r = kim_price_double(&put.with_spot(s), &sol.boundary, cfg.quad)?;
            r.method = if sol.fallback { format!("{} -> kim-gn-b", cfg.method.name()) } else { cfg.method.name().into() };
            r.iterations = sol.iterations;
            r.residual = sol.residual;
            r.degraded = sol.fallback;
            Ok(r)
        })
        .collect()
}

#[cfg(test)]
mod tests;
