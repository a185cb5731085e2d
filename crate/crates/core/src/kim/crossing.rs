//! Initial guesses from QD+ and crossing-time estimation.

use super::chebyshev::{knot_times, BoundaryCurve, CurveSide};
use super::{reference_levels, DoubleBoundary};
use crate::blackscholes::MarketParams;
use crate::error::Result;
use crate::qdplus::{initial_guess, qdplus_double_boundary, qdplus_point, Branch};
use crate::region::classify;
use crate::types::BoundarySamples;

const SCAN_POINTS: usize = 40;

fn is_crossed(u: Option<f64>, l: Option<f64>) -> bool {
    match (u, l) {
        (Some(u), Some(l)) => u <= l,
        _ => true,
    }
}

/// Flattens a crossed guess: with `s` the largest crossed index (a missing
/// value counts as crossed), both curves are set to `c* = l(t_{s+1})` on
/// `t_0..=t_s`. When every index is crossed, `c* = lower_limit`.
pub fn adjust_crossed_guess(guess: &BoundarySamples, lower_limit: f64) -> BoundarySamples {
    let n = guess.len();
    let Some(s) = (0..n).rev().find(|&i| is_crossed(guess.upper[i], guess.lower[i])) else {
        return guess.clone();
    };
    let c = if s + 1 < n {
        let u_next = guess.upper[s + 1].unwrap_or(lower_limit);
        let l_next = guess.lower[s + 1].unwrap_or(lower_limit);
        u_next.max(l_next).min(l_next)
    } else {
        lower_limit
    };
    let mut out = guess.clone();
    for i in 0..=s {
        out.upper[i] = Some(c);
        out.lower[i] = Some(c);
    }
    out
}

/// Calendar time at which the QD+ upper and lower boundaries of a put
/// cross, by bisection down to `threshold` scaled by the fraction of the
/// maturity left; `None` when they stay apart
/// on `[0, T]`. A failed QD+ solve counts as crossed.
pub fn estimate_crossing_time(p: &MarketParams, threshold: f64) -> Result<Option<f64>> {
    p.validate()?;
    if !classify(p.kind, p.rate, p.dividend).double_boundary_possible {
        return Ok(None);
    }
    let put = super::put_side(p)?;
    let t_mat = put.maturity;
    // backward scan, stop at the first crossed time
    let times: Vec<f64> = (0..SCAN_POINTS).map(|i| t_mat * i as f64 / SCAN_POINTS as f64).collect();
    let (mut gu, mut gl) = (initial_guess(&put, Branch::Upper), initial_guess(&put, Branch::Lower));
    // the limits K > rK/q at maturity are apart
    let mut hi = t_mat;
    for &t in times.iter().rev() {
        let u = qdplus_point(&put, t, Branch::Upper, gu).ok();
        let l = qdplus_point(&put, t, Branch::Lower, gl).ok();
        if is_crossed(u, l) {
            return Ok(Some(bisect(&put, t, hi, (gu, gl), threshold)));
        }
        gu = u.unwrap_or(gu);
        gl = l.unwrap_or(gl);
        hi = t;
    }
    Ok(None)
}

fn bisect(p: &MarketParams, mut lo: f64, mut hi: f64, guess: (f64, f64), threshold: f64) -> f64 {
    let (mut gu, mut gl) = guess;
    // relative to the time left, so late crossings are resolved as well
    let scale = threshold / p.maturity;
    while hi - lo > (scale * (p.maturity - lo)).max(f64::EPSILON * p.maturity) {
        let mid = 0.5 * (lo + hi);
        let u = qdplus_point(p, mid, Branch::Upper, gu).ok();
        let l = qdplus_point(p, mid, Branch::Lower, gl).ok();
        if is_crossed(u, l) {
            lo = mid;
        } else {
            hi = mid;
            gu = u.unwrap_or(gu);
            gl = l.unwrap_or(gl);
        }
    }
    0.5 * (lo + hi)
}

/// QD+ boundaries at the collocation nodes of `m` intervals, with the
/// domain cut at the estimated crossing time. Missing upper values are
/// taken from the neighbour nearer maturity.
pub fn qdplus_guess(p: &MarketParams, m: usize, threshold: f64) -> Result<DoubleBoundary> {
    let put = super::put_side(p)?;
    let t_mat = put.maturity;
    let (x_up, x_low) = reference_levels(&put)?;
    let t_s = match x_low {
        Some(_) => estimate_crossing_time(&put, threshold)?,
        None => None,
    };
    let tau_max = t_mat - t_s.unwrap_or(0.0);
    let taus = knot_times(m, tau_max);
    // ascending calendar times, excluding maturity
    let times: Vec<f64> = taus[1..].iter().rev().map(|tau| t_mat - tau).collect();
    let mut qd = qdplus_double_boundary(&put, &times)?;
    let upper_vals = |s: &BoundarySamples| -> Vec<f64> {
        std::iter::once(x_up).chain(s.upper.iter().rev().map(|v| v.unwrap_or(x_up))).collect()
    };
    let Some(x_low) = x_low else {
        let mut fill = x_up;
        for v in qd.upper.iter_mut().rev() {
            match v {
                Some(x) => fill = *x,
                None => *v = Some(fill),
            }
        }
        let upper = BoundaryCurve::new(tau_max, x_up, CurveSide::Below, &upper_vals(&qd))?;
        return Ok(DoubleBoundary { maturity: t_mat, upper, lower: None, t_s: None });
    };
    let adjusted = adjust_crossed_guess(&qd, x_low);
    let lower_vals: Vec<f64> =
        std::iter::once(x_low).chain(adjusted.lower.iter().rev().map(|v| v.unwrap_or(x_low))).collect();
    let upper = BoundaryCurve::new(tau_max, x_up, CurveSide::Below, &upper_vals(&adjusted))?;
    let lower = BoundaryCurve::new(tau_max, x_low, CurveSide::Above, &lower_vals)?;
    Ok(DoubleBoundary { maturity: t_mat, upper, lower: Some(lower), t_s })
}
