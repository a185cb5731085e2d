//! QD+ approximation of the put exercise boundaries.
//!
//! Each boundary point solves a scalar equation combining the European
//! delta with the refined quadratic early-exercise premium. The upper
//! boundary uses the negative root `lambda1` of the characteristic
//! quadratic; the lower boundary (only when `q < r < 0`) uses the positive
//! root `lambda2`. The two points are solved independently, so they may
//! cross.

mod juzhong;
mod roots;

pub use juzhong::juzhong_price;
pub use roots::{mean_boundary_iterations, root_step, solve_boundary_point, BoundaryPointSolution, RootSolverKind};

use crate::blackscholes::{european_price_scalar, european_theta_scalar, MarketParams, OptionKind};
use crate::dual::{HyperDual, Scalar};
use crate::error::{Error, Result};
use crate::region::classify;
use crate::types::BoundarySamples;
use serde::{Deserialize, Serialize};

pub const DEFAULT_TOLERANCE: f64 = 1e-6;
pub const DEFAULT_MAX_ITERATIONS: usize = 64;

/// Which root of the characteristic quadratic is used.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Branch {
    /// `lambda1 < 0`, premium `a1 S^lambda1` above the upper boundary.
    Upper,
    /// `lambda2 > 0`, premium `a2 S^lambda2` below the lower boundary.
    Lower,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QDCoefficients {
    pub alpha: f64,
    pub beta: f64,
    pub h: f64,
    /// `alpha / h`, kept separately because both vanish at `r = 0`.
    pub alpha_over_h: f64,
    pub lambda1: f64,
    pub lambda2: f64,
    pub lambda1_prime: f64,
    pub lambda2_prime: f64,
}

impl QDCoefficients {
    pub fn lambda(&self, branch: Branch) -> f64 {
        match branch {
            Branch::Upper => self.lambda1,
            Branch::Lower => self.lambda2,
        }
    }

    pub fn lambda_prime(&self, branch: Branch) -> f64 {
        match branch {
            Branch::Upper => self.lambda1_prime,
            Branch::Lower => self.lambda2_prime,
        }
    }
}

/// Coefficients at calendar time `t` (time to maturity `T - t`), with
/// `alpha = 2r/sigma^2`, `beta = 2(r-q)/sigma^2`, `h = 1 - exp(-r(T-t))`.
pub fn qd_coefficients(p: &MarketParams, t: f64) -> Result<QDCoefficients> {
    let tau = p.maturity - t;
    if !(tau > 0.0) {
        return Err(Error::Domain(format!("t={t} is not before maturity")));
    }
    let v2 = p.vol * p.vol;
    let alpha = 2.0 * p.rate / v2;
    let beta = 2.0 * (p.rate - p.dividend) / v2;
    let h = -(-p.rate * tau).exp_m1();
    let alpha_over_h = if p.rate == 0.0 { 2.0 / (v2 * tau) } else { alpha / h };
    let disc = (beta - 1.0).powi(2) + 4.0 * alpha_over_h;
    if !(disc >= 0.0) {
        return Err(Error::Domain(format!("negative discriminant {disc}")));
    }
    let root = disc.sqrt();
    // d lambda / dh = -+ (alpha/h^2) / root
    let dlam = alpha_over_h * alpha_over_h / (alpha * root);
    let dlam = if p.rate == 0.0 { f64::INFINITY } else { dlam };
    Ok(QDCoefficients {
        alpha,
        beta,
        h,
        alpha_over_h,
        lambda1: 0.5 * (-(beta - 1.0) - root),
        lambda2: 0.5 * (-(beta - 1.0) + root),
        lambda1_prime: dlam,
        lambda2_prime: -dlam,
    })
}

/// Put-side inputs of the boundary equation at one time.
#[derive(Debug, Clone, Copy)]
pub(crate) struct PointProblem {
    pub strike: f64,
    pub rate: f64,
    pub dividend: f64,
    pub vol: f64,
    pub tau: f64,
    pub coef: QDCoefficients,
    pub branch: Branch,
}

impl PointProblem {
    pub fn new(p: &MarketParams, t: f64, branch: Branch) -> Result<Self> {
        if p.kind != OptionKind::Put {
            return Err(Error::Domain("QD+ boundary equations are solved for puts".into()));
        }
        Ok(Self {
            strike: p.strike,
            rate: p.rate,
            dividend: p.dividend,
            vol: p.vol,
            tau: p.maturity - t,
            coef: qd_coefficients(p, t)?,
            branch,
        })
    }

    /// `(1-h) alpha / h`, `(1-h) alpha / r` and `(1-h) alpha lambda'`,
    /// each finite at `r = 0`.
    fn c0_factors(&self) -> (f64, f64, f64) {
        let c = &self.coef;
        let one_minus_h = (-self.rate * self.tau).exp();
        let v2 = self.vol * self.vol;
        let lam_prime_alpha = if self.rate == 0.0 {
            let root = ((c.beta - 1.0).powi(2) + 4.0 * c.alpha_over_h).sqrt();
            let s = c.alpha_over_h * c.alpha_over_h / root;
            match self.branch {
                Branch::Upper => s,
                Branch::Lower => -s,
            }
        } else {
            c.alpha * c.lambda_prime(self.branch)
        };
        (one_minus_h * c.alpha_over_h, one_minus_h * 2.0 / v2, one_minus_h * lam_prime_alpha)
    }

    /// QD+ refinement `c0(S)` for the premium `E(S) = K - S - p(S)` and the
    /// calendar-time theta of the European put.
    pub fn c0<S: Scalar>(&self, premium: S, theta: S) -> S {
        let lam = self.coef.lambda(self.branch);
        let denom = 2.0 * lam + self.coef.beta - 1.0;
        let (a_over_h, a_over_r, a_lam_prime) = self.c0_factors();
        // The theta term carries exp(r tau) = 1/(1-h) from d tau / d h.
        let growth = (self.rate * self.tau).exp();
        let bracket = (theta / premium).scale(-a_over_r * growth).shift(a_over_h + a_lam_prime / denom);
        bracket.scale(-1.0 / denom)
    }

    /// Boundary equation residual at `s`:
    /// `f(S) = -exp(-q tau) Phi(-d1) + (lambda + c0)(K - S - p(S))/S + 1`.
    pub fn residual<S: Scalar>(&self, s: S) -> S {
        let k = self.strike;
        let (r, q, v, tau) = (self.rate, self.dividend, self.vol, self.tau);
        let put = european_price_scalar(OptionKind::Put, s, k, r, q, v, tau);
        let theta = european_theta_scalar(OptionKind::Put, s, k, r, q, v, tau);
        let premium = -s - put + S::from_f64(k);
        let c0 = self.c0(premium, theta);
        let sd = v * tau.sqrt();
        let d1 = (s.scale(1.0 / k).ln().shift((r - q + 0.5 * v * v) * tau)).scale(1.0 / sd);
        let lam = self.coef.lambda(self.branch);
        -((-d1).ncdf().scale((-q * tau).exp())) + c0.shift(lam) * premium / s + S::from_f64(1.0)
    }

    /// `S f(S)`: the same equation with the division by `S` cleared. The
    /// root iterations run on this form.
    pub fn cleared<S: Scalar>(&self, s: S) -> S {
        self.residual(s) * s
    }

    pub fn residual_with_derivatives(&self, s: f64) -> (f64, f64, f64) {
        let f = self.residual(HyperDual::variable(s));
        (f.re, f.e1, f.e12)
    }

    pub fn cleared_with_derivatives(&self, s: f64) -> (f64, f64, f64) {
        let f = self.cleared(HyperDual::variable(s));
        (f.re, f.e1, f.e12)
    }
}

/// `f`, `f'`, `f''` of the QD+ boundary equation for a put at calendar time `t`.
pub fn qdplus_residual(s: f64, p: &MarketParams, t: f64, branch: Branch) -> Result<(f64, f64, f64)> {
    if !(s > 0.0) {
        return Err(Error::Domain("boundary candidate must be positive".into()));
    }
    let prob = PointProblem::new(p, t, branch)?;
    let out = prob.residual_with_derivatives(s);
    if !out.0.is_finite() {
        return Err(Error::Domain(format!("QD+ residual undefined at S={s} (vanishing premium)")));
    }
    Ok(out)
}

/// Initial guesses at the time closest to maturity: `K` for the upper
/// boundary, `K min(1, r/q)` for the lower one.
pub fn initial_guess(p: &MarketParams, branch: Branch) -> f64 {
    let k = p.strike;
    let ratio = if p.dividend != 0.0 { p.rate / p.dividend } else { f64::INFINITY };
    match branch {
        Branch::Upper if p.rate >= 0.0 && p.dividend > 0.0 => k * ratio.min(1.0),
        Branch::Upper => k,
        Branch::Lower => k * ratio.min(1.0),
    }
}

/// Backward sweep over `times` (ascending calendar times in `[0, T)`),
/// warm-starting each point from the previous solution. Points where the
/// solver fails are left empty.
pub fn qdplus_boundary_branch(
    p: &MarketParams,
    times: &[f64],
    branch: Branch,
    solver: RootSolverKind,
    tol: f64,
) -> Result<Vec<Option<f64>>> {
    let mut out = vec![None; times.len()];
    let mut guess = initial_guess(p, branch);
    for (i, &t) in times.iter().enumerate().rev() {
        if !(t < p.maturity) {
            return Err(Error::Domain("boundary times must be before maturity".into()));
        }
        let prob = PointProblem::new(p, t, branch)?;
        match roots::solve_with_fallback(&prob, guess, solver, tol) {
            Ok(sol) => {
                out[i] = Some(sol.s_star);
                guess = sol.s_star;
            }
            Err(_) => out[i] = None,
        }
    }
    Ok(out)
}

/// QD+ boundaries for a put (calls through put-call symmetry). The lower
/// boundary is only computed in the double-boundary regime.
pub fn qdplus_double_boundary(p: &MarketParams, times: &[f64]) -> Result<BoundarySamples> {
    qdplus_double_boundary_with(p, times, RootSolverKind::SuperHalley, DEFAULT_TOLERANCE)
}

pub fn qdplus_double_boundary_with(
    p: &MarketParams,
    times: &[f64],
    solver: RootSolverKind,
    tol: f64,
) -> Result<BoundarySamples> {
    let put = match p.kind {
        OptionKind::Put => *p,
        OptionKind::Call => crate::blackscholes::symmetric_put_params(p)?,
    };
    let region = classify(OptionKind::Put, put.rate, put.dividend);
    if region.never_optimal {
        return Err(Error::Domain("early exercise is never optimal for these rates".into()));
    }
    let upper = qdplus_boundary_branch(&put, times, Branch::Upper, solver, tol)?;
    let lower = if region.double_boundary_possible {
        qdplus_boundary_branch(&put, times, Branch::Lower, solver, tol)?
    } else {
        vec![None; times.len()]
    };
    Ok(BoundarySamples { times: times.to_vec(), upper, lower })
}

/// QD+ boundary point at a single calendar time, solved from `guess`.
pub fn qdplus_point(p: &MarketParams, t: f64, branch: Branch, guess: f64) -> Result<f64> {
    let prob = PointProblem::new(p, t, branch)?;
    roots::solve_with_fallback(&prob, guess, RootSolverKind::SuperHalley, DEFAULT_TOLERANCE).map(|s| s.s_star)
}
