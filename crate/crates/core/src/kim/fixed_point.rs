//! Fixed-point iterations on the boundary values at the collocation nodes.

use super::chebyshev::BoundaryCurve;
use super::quadrature::TanhSinh;
use super::{kernel, DoubleBoundary, QuadratureSpec};
use crate::blackscholes::MarketParams;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FixedPointScheme {
    /// Price continuity, both boundaries updated from the previous sweep.
    FpB,
    /// High contact, single boundary.
    FpA,
    /// Price continuity for the upper boundary; reordered update for the
    /// lower one using the new upper boundary, then monotonicity and
    /// ordering constraints.
    FpBPrime,
}

fn check(v: f64, knot: usize) -> Result<f64> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(Error::Breakdown { knot, reason: format!("update gave {v}") })
    }
}

/// One FP-B sweep. Returns the new values at the nodes (index 0 is the
/// maturity limit) for the upper and, when present, lower boundary.
pub fn fp_b_step(db: &DoubleBoundary, p: &MarketParams, quad: QuadratureSpec) -> Result<(Vec<f64>, Option<Vec<f64>>)> {
    let k = kernel(p);
    let rule = TanhSinh::new(quad.inner_points);
    let lower = db.lower.as_ref();
    let taus = db.knots();
    let mut up = db.upper.values.clone();
    for i in 1..taus.len() {
        up[i] = check(k.fp_b(db.upper.values[i], taus[i], &db.upper, lower, &rule), i)?;
    }
    let low = match lower {
        Some(l) => {
            let mut v = l.values.clone();
            for i in 1..taus.len() {
                v[i] = check(k.fp_b(l.values[i], taus[i], &db.upper, lower, &rule), i)?;
            }
            Some(v)
        }
        None => None,
    };
    Ok((up, low))
}

/// One FP-A sweep on a single boundary.
pub fn fp_a_step(b: &BoundaryCurve, p: &MarketParams, quad: QuadratureSpec) -> Result<Vec<f64>> {
    let k = kernel(p);
    let rule = TanhSinh::new(quad.inner_points);
    let mut v = b.values.clone();
    for i in 1..v.len() {
        v[i] = check(k.fp_a(b.values[i], b.knots[i], b, &rule), i)?;
    }
    Ok(v)
}

/// Upper boundary non-increasing and lower non-decreasing in `tau`; where
/// they cross both take the midpoint, kept inside the band of the previous
/// knot so the merged value cannot break monotonicity.
pub(crate) fn enforce_constraints(up: &mut [f64], low: &mut [f64]) {
    for i in 0..up.len() {
        if i > 0 {
            up[i] = up[i].min(up[i - 1]);
            low[i] = low[i].max(low[i - 1]);
        }
        if low[i] > up[i] {
            let mut mid = 0.5 * (up[i] + low[i]);
            if i > 0 {
                mid = mid.clamp(low[i - 1], up[i - 1]);
            }
            up[i] = mid;
            low[i] = mid;
        }
    }
}

fn fp_b_prime_sweep(db: &DoubleBoundary, p: &MarketParams, rule: &TanhSinh) -> Result<DoubleBoundary> {
    let Some(lower) = db.lower.as_ref() else {
        return Err(Error::Config("FP-B' needs two boundaries".into()));
    };
    let k = kernel(p);
    let taus = db.knots();
    let mut up = db.upper.values.clone();
    for i in 1..taus.len() {
        up[i] = check(k.fp_b(db.upper.values[i], taus[i], &db.upper, Some(lower), rule), i)?;
    }
    let new_upper = db.upper.with_values(&up)?;
    let mut low = lower.values.clone();
    for i in 1..taus.len() {
        low[i] = check(k.fp_b_prime_lower(lower.values[i], taus[i], &new_upper, lower, rule), i)?;
    }
    enforce_constraints(&mut up, &mut low);
    Ok(DoubleBoundary {
        maturity: db.maturity,
        upper: db.upper.with_values(&up)?,
        lower: Some(lower.with_values(&low)?),
        t_s: db.t_s,
    })
}

/// `n` FP-B' sweeps from `db`.
pub fn fp_b_prime_iterate(db: &DoubleBoundary, p: &MarketParams, quad: QuadratureSpec, n: usize) -> Result<DoubleBoundary> {
    let rule = TanhSinh::new(quad.inner_points);
    let mut cur = db.clone();
    for _ in 0..n {
        cur = fp_b_prime_sweep(&cur, p, &rule)?;
    }
    Ok(cur)
}

fn sweep(db: &DoubleBoundary, p: &MarketParams, quad: QuadratureSpec, rule: &TanhSinh, scheme: FixedPointScheme) -> Result<DoubleBoundary> {
    match scheme {
        FixedPointScheme::FpBPrime => fp_b_prime_sweep(db, p, rule),
        FixedPointScheme::FpA => {
            if db.lower.is_some() {
                return Err(Error::Config("FP-A is defined for a single boundary".into()));
            }
            let v = fp_a_step(&db.upper, p, quad)?;
            Ok(DoubleBoundary { upper: db.upper.with_values(&v)?, ..db.clone() })
        }
        FixedPointScheme::FpB => {
            let (up, low) = fp_b_step(db, p, quad)?;
            let lower = match (&db.lower, low) {
                (Some(l), Some(v)) => Some(l.with_values(&v)?),
                _ => None,
            };
            Ok(DoubleBoundary { upper: db.upper.with_values(&up)?, lower, ..db.clone() })
        }
    }
}

fn max_change(a: &DoubleBoundary, b: &DoubleBoundary) -> f64 {
    let mut d = a.upper.values.iter().zip(&b.upper.values).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
    if let (Some(la), Some(lb)) = (&a.lower, &b.lower) {
        d = la.values.iter().zip(&lb.values).map(|(x, y)| (x - y).abs()).fold(d, f64::max);
    }
    d
}

/// Runs up to `n` sweeps. Returns the boundary, the number of sweeps and
/// the last largest knot change relative to the strike.
pub(crate) fn iterate(
    p: &MarketParams,
    guess: &DoubleBoundary,
    quad: QuadratureSpec,
    scheme: FixedPointScheme,
    n: usize,
    stop_tol: Option<f64>,
) -> Result<(DoubleBoundary, usize, f64)> {
    let rule = TanhSinh::new(quad.inner_points);
    let mut cur = guess.clone();
    let mut change = 0.0;
    for it in 0..n {
        let next = sweep(&cur, p, quad, &rule, scheme)?;
        change = max_change(&cur, &next) / p.strike;
        cur = next;
        if stop_tol.is_some_and(|tol| change < tol) {
            return Ok((cur, it + 1, change));
        }
    }
    Ok((cur, n, change))
}

/// All iterates of `n` sweeps, starting with `guess`. Stops early on
/// breakdown, returning the iterates so far.
pub fn fixed_point_trace(
    p: &MarketParams,
    guess: &DoubleBoundary,
    quad: QuadratureSpec,
    scheme: FixedPointScheme,
    n: usize,
) -> Vec<DoubleBoundary> {
    let rule = TanhSinh::new(quad.inner_points);
    let mut out = vec![guess.clone()];
    for _ in 0..n {
        match sweep(out.last().unwrap(), p, quad, &rule, scheme) {
            Ok(next) => out.push(next),
            Err(_) => break,
        }
    }
    out
}
