//! Integral terms of the put boundary equations and of the premium.
//!
//! Every boundary integral at a node `tau_i` runs over the elapsed time
//! `s in (0, tau_i]` with the boundary evaluated at `tau_i - s`; it is
//! computed after the substitution `s = tau_i w^2`. With two boundaries
//! each integrand is the difference between its value against the upper
//! and the lower curve.

use super::chebyshev::BoundaryCurve;
use super::quadrature::TanhSinh;
use crate::blackscholes::normal;

/// Put model in the integral equations.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Kernel {
    pub strike: f64,
    pub rate: f64,
    pub dividend: f64,
    pub vol: f64,
}

/// `d1`, `d2` for spot `s`, level `b`, horizon `tau > 0`.
#[inline]
fn d12(k: &Kernel, s: f64, b: f64, tau: f64) -> (f64, f64) {
    let sd = k.vol * tau.sqrt();
    let d1 = ((s / b).ln() + (k.rate - k.dividend + 0.5 * k.vol * k.vol) * tau) / sd;
    (d1, d1 - sd)
}

/// Continuity-equation integrals at a node.
#[derive(Debug, Clone, Copy, Default)]
pub(crate) struct ContinuityTerms {
    /// `int r e^{-rs} [Phi(-d2(b, u, s)) - Phi(-d2(b, l, s))] ds`
    pub ir: f64,
    /// `int q e^{-qs} [Phi(-d1(b, u, s)) - Phi(-d1(b, l, s))] ds`
    pub iq: f64,
}

/// High-contact integrals at a node (single boundary).
#[derive(Debug, Clone, Copy, Default)]
pub(crate) struct ContactTerms {
    /// `int r e^{-rs} phi(d2(b, B, s)) / (sigma sqrt s) ds`
    pub ar: f64,
    /// `int q e^{-qs} (phi(d1(b, B, s)) / (sigma sqrt s) - Phi(-d1(b, B, s))) ds`
    pub aq: f64,
}

impl Kernel {
    /// `(Phi(-d2), Phi(-d1))` against strike `K` over `tau`.
    pub fn european_terms(&self, b: f64, tau: f64) -> (f64, f64) {
        let (d1, d2) = d12(self, b, self.strike, tau);
        (normal::cdf(-d2), normal::cdf(-d1))
    }

    pub fn continuity(
        &self,
        b: f64,
        tau: f64,
        upper: &BoundaryCurve,
        lower: Option<&BoundaryCurve>,
        rule: &TanhSinh,
    ) -> ContinuityTerms {
        let (r, q) = (self.rate, self.dividend);
        let mut out = ContinuityTerms::default();
        for n in rule.nodes() {
            let w = n.x;
            let s = tau * w * w;
            let rest = tau * n.xc * (1.0 + w);
            let jac = 2.0 * tau * w * n.weight;
            let (d1u, d2u) = d12(self, b, upper.eval(rest), s);
            let mut p2 = normal::cdf(-d2u);
            let mut p1 = normal::cdf(-d1u);
            if let Some(l) = lower {
                let (d1l, d2l) = d12(self, b, l.eval(rest), s);
                p2 -= normal::cdf(-d2l);
                p1 -= normal::cdf(-d1l);
            }
            out.ir += jac * r * (-r * s).exp() * p2;
            out.iq += jac * q * (-q * s).exp() * p1;
        }
        out
    }

    pub fn contact(&self, b: f64, tau: f64, curve: &BoundaryCurve, rule: &TanhSinh) -> ContactTerms {
        let (r, q, v) = (self.rate, self.dividend, self.vol);
        let mut out = ContactTerms::default();
        let root_tau = tau.sqrt();
        for n in rule.nodes() {
            let w = n.x;
            let s = tau * w * w;
            let rest = tau * n.xc * (1.0 + w);
            let (d1, d2) = d12(self, b, curve.eval(rest), s);
            // ds / (sigma sqrt s) = 2 sqrt(tau) / sigma dw
            let jac_sing = 2.0 * root_tau / v * n.weight;
            let jac = 2.0 * tau * w * n.weight;
            out.ar += jac_sing * r * (-r * s).exp() * normal::pdf(d2);
            out.aq += q * (-q * s).exp() * (jac_sing * normal::pdf(d1) - jac * normal::cdf(-d1));
        }
        out
    }

    /// Early-exercise premium at spot `s` for maturity `t_mat`, with the
    /// curves defined on `[0, tau_s]`.
    pub fn premium(
        &self,
        spot: f64,
        t_mat: f64,
        tau_s: f64,
        upper: &BoundaryCurve,
        lower: Option<&BoundaryCurve>,
        rule: &TanhSinh,
    ) -> f64 {
        let (k, r, q) = (self.strike, self.rate, self.dividend);
        let mut acc = 0.0;
        for n in rule.nodes() {
            let w = n.x;
            let tau = tau_s * w * w;
            // elapsed time from today
            let t = if tau_s < t_mat { t_mat - tau } else { t_mat * n.xc * (1.0 + w) };
            let jac = 2.0 * tau_s * w * n.weight;
            let term = |b: f64| {
                let (d1, d2) = d12(self, spot, b, t);
                r * k * (-r * t).exp() * normal::cdf(-d2) - q * spot * (-q * t).exp() * normal::cdf(-d1)
            };
            let mut f = term(upper.eval(tau));
            if let Some(l) = lower {
                f -= term(l.eval(tau));
            }
            acc += jac * f;
        }
        acc
    }

    /// FP-B update `K N / D` at a node of a single boundary, or of the
    /// upper boundary of a pair.
    pub fn fp_b(&self, b: f64, tau: f64, upper: &BoundaryCurve, lower: Option<&BoundaryCurve>, rule: &TanhSinh) -> f64 {
        let (n, d) = self.continuity_nd(b, tau, upper, lower, rule);
        self.strike * n / d
    }

    /// Numerator and denominator of the continuity fixed point at node `b`.
    pub fn continuity_nd(
        &self,
        b: f64,
        tau: f64,
        upper: &BoundaryCurve,
        lower: Option<&BoundaryCurve>,
        rule: &TanhSinh,
    ) -> (f64, f64) {
        let (e2, e1) = self.european_terms(b, tau);
        let c = self.continuity(b, tau, upper, lower, rule);
        let n = 1.0 - (-self.rate * tau).exp() * e2 - c.ir;
        let d = 1.0 - (-self.dividend * tau).exp() * e1 - c.iq;
        (n, d)
    }

    /// FP-B' lower-boundary update: the `q` integral moves to the numerator.
    pub fn fp_b_prime_lower(&self, b: f64, tau: f64, upper: &BoundaryCurve, lower: &BoundaryCurve, rule: &TanhSinh) -> f64 {
        let (e2, e1) = self.european_terms(b, tau);
        let c = self.continuity(b, tau, upper, Some(lower), rule);
        let n = 1.0 - (-self.rate * tau).exp() * e2 - c.ir + b / self.strike * c.iq;
        let d = 1.0 - (-self.dividend * tau).exp() * e1;
        self.strike * n / d
    }

    /// FP-A update with the symmetrized numerator and denominator.
    pub fn fp_a(&self, b: f64, tau: f64, curve: &BoundaryCurve, rule: &TanhSinh) -> f64 {
        let (n, d) = self.contact_nd(b, tau, curve, rule);
        self.strike * n / d
    }

    fn contact_nd(&self, b: f64, tau: f64, curve: &BoundaryCurve, rule: &TanhSinh) -> (f64, f64) {
        let (r, q, v) = (self.rate, self.dividend, self.vol);
        let (d1, d2) = d12(self, b, self.strike, tau);
        let sd = v * tau.sqrt();
        let a = self.contact(b, tau, curve, rule);
        let n = (-r * tau).exp() * normal::pdf(d2) / sd + a.ar;
        let d = 1.0 - (-q * tau).exp() * normal::cdf(-d1) + (-q * tau).exp() * normal::pdf(d1) / sd + a.aq;
        (n, d)
    }

    /// Price-continuity residual `(K N - b D)/K` at a node.
    pub fn continuity_residual(
        &self,
        b: f64,
        tau: f64,
        upper: &BoundaryCurve,
        lower: Option<&BoundaryCurve>,
        rule: &TanhSinh,
    ) -> f64 {
        let (n, d) = self.continuity_nd(b, tau, upper, lower, rule);
        n - b / self.strike * d
    }

    /// High-contact residual `V'(b) + 1` at a node (single boundary).
    pub fn contact_residual(&self, b: f64, tau: f64, curve: &BoundaryCurve, rule: &TanhSinh) -> f64 {
        let (d1, _) = d12(self, b, self.strike, tau);
        let a = self.contact(b, tau, curve, rule);
        1.0 - (-self.dividend * tau).exp() * normal::cdf(-d1) + a.aq - self.strike / b * a.ar
    }
}
