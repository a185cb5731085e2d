//! Ju-Zhong approximate American price on top of the QD+ boundary.
//!
//! For a put above the upper boundary `S*`,
//! `V = p(S) + E (S/S*)^lambda / (1 - b ln^2(S/S*) - c ln(S/S*))` with
//! `E = K - S* - p(S*)`. Below a lower boundary the same form is used with
//! the positive root. When the two QD+ boundaries cross the formula has
//! nothing to attach to and the European price is returned, flagged as
//! degraded.

use super::{Branch, PointProblem, RootSolverKind, DEFAULT_TOLERANCE};
use crate::blackscholes::{european_price, european_value, symmetric_put_params, MarketParams, OptionKind};
use crate::error::Result;
use crate::region::classify;
use crate::types::{BoundarySamples, PriceResult};

const SWEEP_POINTS: usize = 24;

impl PointProblem {
    fn premium_form(&self, s_star: f64, spot: f64) -> f64 {
        let k = self.strike;
        let (r, q, v, tau) = (self.rate, self.dividend, self.vol, self.tau);
        let put_star = european_value(OptionKind::Put, s_star, k, r, q, v, tau);
        let theta = crate::blackscholes::european_theta_scalar(OptionKind::Put, s_star, k, r, q, v, tau);
        let premium = k - s_star - put_star;
        let lam = self.coef.lambda(self.branch);
        let denom = 2.0 * lam + self.coef.beta - 1.0;
        let c = self.c0(premium, theta);
        let b = 0.5 * self.c0_factors().2 / denom;
        let x = (spot / s_star).ln();
        let chi = b * x * x + c * x;
        premium * (spot / s_star).powf(lam) / (1.0 - chi)
    }
}

/// Boundary points at `t = 0` from a warm-started sweep in `sqrt(T - t)`.
fn boundary_at_inception(p: &MarketParams, branch: Branch) -> Result<Option<f64>> {
    let times: Vec<f64> = (1..=SWEEP_POINTS)
        .map(|i| {
            let x = i as f64 / SWEEP_POINTS as f64;
            p.maturity * (1.0 - x * x)
        })
        .map(|t| t.max(0.0))
        .collect();
    let mut ascending = times.clone();
    ascending.reverse();
    let vals = super::qdplus_boundary_branch(p, &ascending, branch, RootSolverKind::SuperHalley, DEFAULT_TOLERANCE)?;
    Ok(vals[0])
}

/// Ju-Zhong price. In the double-boundary regime only the boundary on the
/// spot's side contributes.
pub fn juzhong_price(p: &MarketParams) -> Result<PriceResult> {
    p.validate()?;
    let put = match p.kind {
        OptionKind::Put => *p,
        OptionKind::Call => symmetric_put_params(p)?,
    };
    let european = european_price(&put)?;
    let region = classify(OptionKind::Put, put.rate, put.dividend);
    if region.never_optimal {
        return Ok(PriceResult::new("juzhong", european, european));
    }
    let s = put.spot;
    let k = put.strike;
    let upper = boundary_at_inception(&put, Branch::Upper)?;
    let lower = if region.double_boundary_possible {
        boundary_at_inception(&put, Branch::Lower)?
    } else {
        None
    };
    let samples = BoundarySamples { times: vec![0.0], upper: vec![upper], lower: vec![lower] };
    let degraded = |mut r: PriceResult| {
        r.degraded = true;
        r.boundary = Some(samples.clone());
        r
    };
    let Some(u) = upper else {
        return Ok(degraded(PriceResult::new("juzhong", european, european)));
    };
    if region.double_boundary_possible {
        let Some(l) = lower else {
            return Ok(degraded(PriceResult::new("juzhong", european, european)));
        };
        if u < l {
            return Ok(degraded(PriceResult::new("juzhong", european, european)));
        }
        let price = if s >= l && s <= u {
            k - s
        } else if s > u {
            european + PointProblem::new(&put, 0.0, Branch::Upper)?.premium_form(u, s)
        } else {
            european + PointProblem::new(&put, 0.0, Branch::Lower)?.premium_form(l, s)
        };
        let mut r = PriceResult::new("juzhong", price, european);
        r.boundary = Some(samples);
        return Ok(r);
    }
    let price = if s <= u {
        k - s
    } else {
        european + PointProblem::new(&put, 0.0, Branch::Upper)?.premium_form(u, s)
    };
    let mut r = PriceResult::new("juzhong", price, european);
    r.boundary = Some(samples);
    Ok(r)
}
