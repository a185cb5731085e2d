//! Exercise-boundary estimates from knock-out options with rebate.
//!
//! Exercising an American option as soon as the spot touches a constant
//! level `L` is worth a barrier option with rebate `|L - K|` paid at the
//! hit. Optimizing that value over `L` gives, at each time, an estimate of
//! the exercise boundary: the level where `lim_{S -> L} dV(S, L)/dL = 0`.
//!
//! When `r < 0` the exponent `lambda` of the rebate term may be imaginary;
//! the formulas are then evaluated in complex arithmetic and the imaginary
//! residue is checked and discarded.

use crate::blackscholes::{MarketParams, OptionKind};
use crate::dual::{HyperDual, Scalar};
use crate::error::{Error, Result};
use crate::region::classify;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// Largest imaginary part tolerated in a complex evaluation, relative to `max(1, |re|)`.
pub const IMAG_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BarrierStyle {
    UpOut,
    DownOut,
}

/// Knock-out option on `market` with barrier `barrier` and a rebate paid
/// when the barrier is hit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CapOptionParams {
    pub market: MarketParams,
    pub barrier: f64,
    pub rebate: f64,
}

impl CapOptionParams {
    /// Rebate set to the intrinsic value at the barrier, `|L - K|`.
    pub fn new(market: MarketParams, barrier: f64) -> Self {
        Self { market, barrier, rebate: (barrier - market.strike).abs() }
    }
}

/// Which boundary estimate to compute.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundKind {
    /// Up-and-out call: lower estimate of the call boundary (near boundary
    /// when there are two).
    CallLower,
    /// Down-and-out put: upper estimate of the put (upper) boundary.
    PutUpper,
    /// Up-and-out put: lower estimate of the lower put boundary.
    PutLower,
    /// Down-and-out call: upper estimate of the far call boundary.
    CallUpperLowerbound,
}

impl BoundKind {
    fn contract(self) -> (OptionKind, BarrierStyle) {
        match self {
            BoundKind::CallLower => (OptionKind::Call, BarrierStyle::UpOut),
            BoundKind::PutUpper => (OptionKind::Put, BarrierStyle::DownOut),
            BoundKind::PutLower => (OptionKind::Put, BarrierStyle::UpOut),
            BoundKind::CallUpperLowerbound => (OptionKind::Call, BarrierStyle::DownOut),
        }
    }
}

/// Boundary estimate on the requested calendar times; `None` where no
/// optimal level was found.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundCurve {
    pub kind: BoundKind,
    pub times: Vec<f64>,
    pub values: Vec<Option<f64>>,
}

struct Barrier {
    kind: OptionKind,
    style: BarrierStyle,
    strike: f64,
    r: f64,
    q: f64,
    vol: f64,
    tau: f64,
}

impl Barrier {
    fn mu(&self) -> f64 {
        let v2 = self.vol * self.vol;
        (self.r - self.q - 0.5 * v2) / v2
    }

    fn lambda_sq(&self) -> f64 {
        self.mu() * self.mu() + 2.0 * self.r / (self.vol * self.vol)
    }

    /// Knock-out value at spot `s`, barrier `h` and rebate `reb`. `lambda`
    /// is passed in so that it may be complex. `strike_above` selects the
    /// formula for `K > L`.
    fn value<T: Scalar>(&self, s: T, h: T, reb: T, lambda: T, strike_above: bool) -> T {
        let eta = if self.style == BarrierStyle::DownOut { 1.0 } else { -1.0 };
        let phi = self.kind.eta();
        let x = self.strike;
        let mu = self.mu();
        let sd = self.vol * self.tau.sqrt();
        let c = T::from_f64;
        let df_q = (-self.q * self.tau).exp();
        let df_r = (-self.r * self.tau).exp();
        let (ls, lh, lx) = (s.ln(), h.ln(), x.ln());
        let m1 = (1.0 + mu) * sd;
        let x1 = ls.shift(-lx).scale(1.0 / sd).shift(m1);
        let x2 = (ls - lh).scale(1.0 / sd).shift(m1);
        let y1 = (lh.scale(2.0) - ls).shift(-lx).scale(1.0 / sd).shift(m1);
        let y2 = (lh - ls).scale(1.0 / sd).shift(m1);
        let z = (lh - ls).scale(1.0 / sd) + lambda.scale(sd);
        let hs = h / s;
        let p1 = hs.powf(c(2.0 * (mu + 1.0)));
        let p2 = hs.powf(c(2.0 * mu));
        let vanilla =
            |d: T| (s * d.scale(phi).ncdf()).scale(phi * df_q) - d.shift(-sd).scale(phi).ncdf().scale(phi * x * df_r);
        let mirror = |y: T| {
            (s * p1 * y.scale(eta).ncdf()).scale(phi * df_q) - (p2 * y.shift(-sd).scale(eta).ncdf()).scale(phi * x * df_r)
        };
        let a = || vanilla(x1);
        let b = || vanilla(x2);
        let cc = || mirror(y1);
        let d = || mirror(y2);
        let f = reb
            * (hs.powf(lambda.shift(mu)) * z.scale(eta).ncdf()
                + hs.powf((-lambda).shift(mu)) * (z - lambda.scale(2.0 * sd)).scale(eta).ncdf());
        match (self.kind, self.style, strike_above) {
            (OptionKind::Call, BarrierStyle::DownOut, true) => a() - cc() + f,
            (OptionKind::Call, BarrierStyle::DownOut, false) => b() - d() + f,
            (OptionKind::Call, BarrierStyle::UpOut, true) => f,
            (OptionKind::Call, BarrierStyle::UpOut, false) => a() - b() + cc() - d() + f,
            (OptionKind::Put, BarrierStyle::DownOut, true) => a() - b() + cc() - d() + f,
            (OptionKind::Put, BarrierStyle::DownOut, false) => f,
            (OptionKind::Put, BarrierStyle::UpOut, true) => b() - d() + f,
            (OptionKind::Put, BarrierStyle::UpOut, false) => a() - cc() + f,
        }
    }
}

trait RealPart: Scalar {
    fn split(self) -> (f64, f64);
}

impl RealPart for f64 {
    fn split(self) -> (f64, f64) {
        (self, 0.0)
    }
}

impl RealPart for Complex64 {
    fn split(self) -> (f64, f64) {
        (self.re, self.im)
    }
}

fn real<T: RealPart>(v: T) -> Result<f64> {
    let (re, im) = v.split();
    if !re.is_finite() || !im.is_finite() {
        return Err(Error::Domain("barrier formula is not finite".into()));
    }
    if im.abs() > IMAG_TOLERANCE * re.abs().max(1.0) {
        return Err(Error::Domain(format!("imaginary residue {im:e} in barrier value")));
    }
    Ok(re)
}

fn barrier_for(m: &MarketParams, style: BarrierStyle, tau: f64) -> Barrier {
    Barrier { kind: m.kind, style, strike: m.strike, r: m.rate, q: m.dividend, vol: m.vol, tau }
}

fn value_in<T: RealPart>(b: &Barrier, s: f64, h: f64, reb: f64, lambda: T) -> Result<f64> {
    let c = T::from_f64;
    real(b.value(c(s), c(h), c(reb), lambda, b.strike > h))
}

/// Closed-form knock-out value with rebate at the hit. A spot on the
/// barrier returns the rebate.
pub fn barrier_price(c: &CapOptionParams, style: BarrierStyle) -> Result<f64> {
    c.market.validate()?;
    let (s, h) = (c.market.spot, c.barrier);
    if !(h.is_finite() && h > 0.0) || !(c.rebate.is_finite() && c.rebate >= 0.0) {
        return Err(Error::Domain("barrier and rebate must be finite, barrier positive".into()));
    }
    let dead = match style {
        BarrierStyle::UpOut => s > h,
        BarrierStyle::DownOut => s < h,
    };
    if dead {
        return Err(Error::Domain(format!("spot {s} is beyond the barrier {h}")));
    }
    if s == h {
        return Ok(c.rebate);
    }
    let b = barrier_for(&c.market, style, c.market.maturity);
    barrier_value(&b, s, h, c.rebate)
}

fn barrier_value(b: &Barrier, s: f64, h: f64, reb: f64) -> Result<f64> {
    let l2 = b.lambda_sq();
    if l2 >= 0.0 {
        value_in(b, s, h, reb, l2.sqrt())
    } else {
        value_in(b, s, h, reb, Complex64::new(l2, 0.0).sqrt())
    }
}

/// `(dV/dL, d/dL of that)` on the diagonal `S = L`, with the rebate `|L - K|`
/// moving with the barrier.
///
/// The spot is seeded on `e2` only and the barrier on `e1 + e2`, so the
/// `e1` part is `V_L` and the `e12` part is `V_LS + V_LL`, the total
/// derivative of `V_L(L, L)`.
fn optimality_in<T: RealPart>(b: &Barrier, level: f64, lambda: T) -> Result<(f64, f64)> {
    let (zero, one) = (T::from_f64(0.0), T::from_f64(1.0));
    let s = HyperDual::new(T::from_f64(level), zero, one, zero);
    let h = HyperDual::new(T::from_f64(level), one, one, zero);
    let sign = if level > b.strike { 1.0 } else { -1.0 };
    let reb = h.shift(-b.strike).scale(sign);
    let v = b.value(s, h, reb, HyperDual::constant(lambda), b.strike > level);
    Ok((real(v.e1)?, real(v.e12)?))
}

fn optimality(b: &Barrier, level: f64) -> Result<(f64, f64)> {
    let l2 = b.lambda_sq();
    if l2 >= 0.0 {
        optimality_in(b, level, l2.sqrt())
    } else {
        optimality_in(b, level, Complex64::new(l2, 0.0).sqrt())
    }
}

/// `lim_{S -> L} dV/dL` for the barrier contract behind `which`, at time to
/// maturity `tau`. Exposed for diagnostics and tests.
pub fn barrier_level_derivative(p: &MarketParams, which: BoundKind, level: f64, tau: f64) -> Result<f64> {
    let (kind, style) = which.contract();
    let m = MarketParams { kind, ..*p };
    Ok(optimality(&barrier_for(&m, style, tau), level)?.0)
}

/// Partial derivative `dV/dL` at fixed spot, for checking against finite
/// differences.
pub fn barrier_partial_level(c: &CapOptionParams, style: BarrierStyle) -> Result<f64> {
    let b = barrier_for(&c.market, style, c.market.maturity);
    let l2 = b.lambda_sq();
    let k = c.market.strike;
    fn go<T: RealPart>(b: &Barrier, s: f64, level: f64, k: f64, lambda: T) -> Result<f64> {
        let z = T::from_f64(0.0);
        let h = HyperDual::new(T::from_f64(level), T::from_f64(1.0), z, z);
        let sign = if level > k { 1.0 } else { -1.0 };
        let v = b.value(HyperDual::constant(T::from_f64(s)), h, h.shift(-k).scale(sign), HyperDual::constant(lambda), k > level);
        real(v.e1)
    }
    if l2 >= 0.0 {
        go(&b, c.market.spot, c.barrier, k, l2.sqrt())
    } else {
        go(&b, c.market.spot, c.barrier, k, Complex64::new(l2, 0.0).sqrt())
    }
}

/// Level at `tau -> 0` used to start the backward sweep.
fn initial_level(p: &MarketParams, which: BoundKind) -> f64 {
    let (k, r, q) = (p.strike, p.rate, p.dividend);
    match which {
        BoundKind::CallLower => {
            if classify(OptionKind::Call, r, q).double_boundary_possible || q <= 0.0 {
                k
            } else {
                k * (r / q).max(1.0)
            }
        }
        BoundKind::PutUpper => {
            if classify(OptionKind::Put, r, q).double_boundary_possible || q <= 0.0 {
                k
            } else {
                k * (r / q).min(1.0)
            }
        }
        BoundKind::PutLower | BoundKind::CallUpperLowerbound => k * r / q,
    }
}

/// Admissible barrier levels: beyond the strike on the side of the contract.
fn admissible(p: &MarketParams, which: BoundKind) -> (f64, f64) {
    let (k, r, q) = (p.strike, p.rate, p.dividend);
    let ratio = if q != 0.0 { (r / q).abs() } else { 1.0 };
    match which {
        BoundKind::CallLower | BoundKind::CallUpperLowerbound => (k, 10.0 * k * ratio.max(1.0)),
        BoundKind::PutUpper | BoundKind::PutLower => (1e-3 * k * ratio.min(1.0), k),
    }
}

const NEWTON_STEPS: usize = 50;
const SCAN_POINTS: usize = 400;

fn solve_level(b: &Barrier, guess: f64, lo: f64, hi: f64) -> Option<f64> {
    let tol = 1e-11 * b.strike;
    let mut x = guess.clamp(lo, hi);
    for _ in 0..NEWTON_STEPS {
        let Ok((g, dg)) = optimality(b, x) else { break };
        if g == 0.0 {
            return Some(x);
        }
        let step = g / dg;
        let next = x - step;
        if !next.is_finite() || next <= lo || next >= hi {
            break;
        }
        x = next;
        if step.abs() <= tol {
            let (g1, _) = optimality(b, x).ok()?;
            return (g1.abs() <= 1e-8 * b.strike.max(1.0)).then_some(x);
        }
    }
    bisect_nearest(b, guess.clamp(lo, hi), lo, hi)
}

/// Bisection on the sign change of `dV/dL` nearest to `guess` on a
/// geometric scan of `(lo, hi)`.
fn bisect_nearest(b: &Barrier, guess: f64, lo: f64, hi: f64) -> Option<f64> {
    let ratio = (hi / lo).powf(1.0 / SCAN_POINTS as f64);
    let xs: Vec<f64> = (1..SCAN_POINTS).map(|i| lo * ratio.powi(i as i32)).collect();
    let gs: Vec<Option<f64>> = xs.iter().map(|&x| optimality(b, x).ok().map(|v| v.0)).collect();
    let mut best: Option<(f64, f64, f64)> = None;
    for i in 1..xs.len() {
        if let (Some(g0), Some(g1)) = (gs[i - 1], gs[i]) {
            if g0.signum() != g1.signum() {
                let d = ((xs[i - 1] + xs[i]) / 2.0 - guess).abs();
                if best.map_or(true, |(_, _, bd)| d < bd) {
                    best = Some((xs[i - 1], xs[i], d));
                }
            }
        }
    }
    let (mut a, mut c, _) = best?;
    let mut ga = optimality(b, a).ok()?.0;
    for _ in 0..200 {
        let m = 0.5 * (a + c);
        let gm = optimality(b, m).ok()?.0;
        if gm.signum() == ga.signum() {
            a = m;
            ga = gm;
        } else {
            c = m;
        }
        if c - a <= 1e-12 * b.strike {
            break;
        }
    }
    Some(0.5 * (a + c))
}

/// Boundary estimate at calendar times `times`, swept backward from the
/// time nearest maturity with each solution warm-starting the next.
pub fn boundary_bound(p: &MarketParams, which: BoundKind, times: &[f64]) -> Result<BoundCurve> {
    p.validate()?;
    let (kind, style) = which.contract();
    let m = MarketParams { kind, ..*p };
    let needs_lower = matches!(which, BoundKind::PutLower | BoundKind::CallUpperLowerbound);
    let (r, q) = (p.rate, p.dividend);
    let region = match which {
        BoundKind::PutUpper | BoundKind::PutLower => classify(OptionKind::Put, r, q),
        _ => classify(OptionKind::Call, r, q),
    };
    if region.never_optimal || (needs_lower && !region.double_boundary_possible) {
        return Err(Error::Domain(format!("{which:?} boundary does not exist for r={r}, q={q}")));
    }
    if times.iter().any(|&t| !(t.is_finite() && t >= 0.0 && t <= p.maturity)) {
        return Err(Error::Domain("times must lie in [0, T]".into()));
    }
    let (lo, hi) = admissible(p, which);
    let limit = initial_level(p, which);
    let mut order: Vec<usize> = (0..times.len()).collect();
    order.sort_by(|&a, &b| times[b].total_cmp(&times[a]));
    let mut values = vec![None; times.len()];
    let mut guess = limit;
    for i in order {
        let tau = p.maturity - times[i];
        if tau <= 0.0 {
            values[i] = Some(limit);
            continue;
        }
        let b = barrier_for(&m, style, tau);
        match solve_level(&b, guess, lo, hi) {
            Some(x) => {
                values[i] = Some(x);
                guess = x;
            }
            None => log::debug!("no optimal barrier level at t={}", times[i]),
        }
    }
    Ok(BoundCurve { kind: which, times: times.to_vec(), values })
}
