//! Exercise-regime classification for vanilla American options.
//!
//! A put is never exercised early when `r <= 0` and `r <= q`; a call when
//! `q <= 0` and `q <= r`. A put with `q < r < 0` may have two exercise
//! boundaries, a band `l(t) <= S <= u(t)` that shrinks away from maturity.

use crate::blackscholes::{MarketParams, OptionKind};
use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Constant used in the near-expiry expansion of the lower boundary.
pub const LOWER_ASYMPTOTIC_ALPHA0: f64 = 0.451723;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RegionClass {
    pub never_optimal: bool,
    pub double_boundary_possible: bool,
    pub battauz_holds: bool,
}

/// Boundary values in the limit `t -> T`. `l_limit` is `None` when there
/// is no lower boundary.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MaturityLimits {
    pub u_limit: f64,
    pub l_limit: Option<f64>,
}

pub fn classify(kind: OptionKind, rate: f64, dividend: f64) -> RegionClass {
    let (r, q) = match kind {
        OptionKind::Put => (rate, dividend),
        // a call on (r, q) behaves like a put on (q, r)
        OptionKind::Call => (dividend, rate),
    };
    let never_optimal = r <= 0.0 && r <= q;
    RegionClass {
        never_optimal,
        double_boundary_possible: r < 0.0 && !never_optimal,
        battauz_holds: false,
    }
}

/// Classification including the sufficient condition for two boundaries.
pub fn classify_params(p: &MarketParams) -> RegionClass {
    let mut c = classify(p.kind, p.rate, p.dividend);
    let (r, q) = match p.kind {
        OptionKind::Put => (p.rate, p.dividend),
        OptionKind::Call => (p.dividend, p.rate),
    };
    let (a, b, d) = battauz_condition(r, q, p.vol);
    c.battauz_holds = a && b && d;
    c
}

/// The three inequalities `r < 0`, `r - q - s^2/2 > 0`,
/// `(r - q - s^2/2)^2 + 2 r s^2 > 0`.
pub fn battauz_condition(rate: f64, dividend: f64, vol: f64) -> (bool, bool, bool) {
    let v2 = vol * vol;
    let drift = rate - dividend - 0.5 * v2;
    (rate < 0.0, drift > 0.0, drift * drift + 2.0 * rate * v2 > 0.0)
}

/// Put boundary limits at maturity (`u -> K`, `l -> rK/q`).
pub fn maturity_limits(p: &MarketParams) -> Result<MaturityLimits> {
    if p.kind != OptionKind::Put {
        return Err(Error::Domain("maturity limits are stated for puts".into()));
    }
    let c = classify(p.kind, p.rate, p.dividend);
    if c.never_optimal {
        return Err(Error::Domain("exercise is never optimal".into()));
    }
    let k = p.strike;
    if c.double_boundary_possible {
        // q < r < 0 here, so q != 0
        debug_assert!(p.dividend < 0.0);
        return Ok(MaturityLimits { u_limit: k, l_limit: Some(k * p.rate / p.dividend) });
    }
    let u = if p.dividend > 0.0 && p.rate < p.dividend { k * p.rate / p.dividend } else { k };
    Ok(MaturityLimits { u_limit: u, l_limit: None })
}

/// Near-expiry expansions `(u*(t), l*(t))` of the two put boundaries.
pub fn asymptotic_boundaries(p: &MarketParams, t: f64) -> Result<(f64, f64)> {
    let c = classify(p.kind, p.rate, p.dividend);
    if p.kind != OptionKind::Put || !c.double_boundary_possible {
        return Err(Error::Domain("asymptotics require a put in the double-boundary regime".into()));
    }
    let tau = p.maturity - t;
    if !(tau > 0.0) {
        return Err(Error::Domain("t must be before maturity".into()));
    }
    let (k, r, q, s) = (p.strike, p.rate, p.dividend, p.vol);
    let arg = s * s / (8.0 * std::f64::consts::PI * tau * (r - q).powi(2));
    let log = arg.ln();
    if !(arg > 1.0) {
        return Err(Error::Domain(format!("upper asymptotic undefined at tau={tau}")));
    }
    let upper = k - k * s * (tau * log).sqrt();
    let lower = r * k / q * (1.0 + LOWER_ASYMPTOTIC_ALPHA0 * s * (2.0 * tau).sqrt());
    Ok((upper, lower))
}
