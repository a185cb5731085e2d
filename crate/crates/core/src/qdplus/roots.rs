//! Third-order root iterations for the scalar boundary equation.
//!
//! All variants share the step `S - g(L) f/f'` with `L = f f'' / f'^2`:
//! Newton `g = 1`, Halley `g = 1/(1 - L/2)`, super Halley
//! `g = 1 + L/(2(1-L))`, inverse quadratic (Chebyshev) `g = 1 + L/2`, and
//! the C-method `g = 1 + L/2 + C L^2`.

use super::{Branch, PointProblem, DEFAULT_MAX_ITERATIONS};
use crate::blackscholes::MarketParams;
use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum RootSolverKind {
    Newton,
    Halley,
    SuperHalley,
    InverseQuadratic,
    /// Constant in `[0, 2]`.
    CMethod(f64),
}

impl RootSolverKind {
    fn step_factor(self, l: f64) -> f64 {
        match self {
            RootSolverKind::Newton => 1.0,
            RootSolverKind::Halley => 1.0 / (1.0 - 0.5 * l),
            RootSolverKind::SuperHalley => 1.0 + 0.5 * l / (1.0 - l),
            RootSolverKind::InverseQuadratic => 1.0 + 0.5 * l,
            RootSolverKind::CMethod(c) => 1.0 + 0.5 * l + c * l * l,
        }
    }

    fn validate(self) -> Result<()> {
        match self {
            RootSolverKind::CMethod(c) if !(0.0..=2.0).contains(&c) => {
                Err(Error::Config(format!("C-method constant {c} outside [0, 2]")))
            }
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundaryPointSolution {
    pub s_star: f64,
    /// Premium coefficient: `(K - S* - p(S*)) / S*^lambda`.
    pub a: f64,
    pub iterations: usize,
    pub residual: f64,
    pub converged: bool,
}

/// Runs the selected iteration on `F(S) = S f(S)` from `s0` until
/// `|F| <= tol`. The reported count is the number of evaluations of `F`,
/// including the one that meets the tolerance.
pub(crate) fn iterate(
    prob: &PointProblem,
    s0: f64,
    solver: RootSolverKind,
    tol: f64,
    max_iterations: usize,
) -> Result<BoundaryPointSolution> {
    solver.validate()?;
    let mut s = s0;
    let mut prev = s0;
    let mut last_f = f64::NAN;
    for n in 0..=max_iterations {
        let (f, d1, d2) = prob.cleared_with_derivatives(s);
        last_f = f;
        if !f.is_finite() {
            break;
        }
        if f.abs() <= tol {
            return Ok(solution(prob, s, n + 1, f, true));
        }
        if n == max_iterations || d1 == 0.0 || !d1.is_finite() {
            break;
        }
        let l = f * d2 / (d1 * d1);
        let mut next = s - solver.step_factor(l) * f / d1;
        if !next.is_finite() {
            break;
        }
        if next <= 0.0 {
            next = 0.5 * s;
        }
        prev = s;
        s = next;
    }
    Err(Error::NonConvergence { iterations: max_iterations + 1, last: [prev, s], residual: last_f.abs() })
}

fn solution(prob: &PointProblem, s: f64, iterations: usize, f: f64, converged: bool) -> BoundaryPointSolution {
    let k = prob.strike;
    let put = crate::blackscholes::european_value(
        crate::blackscholes::OptionKind::Put,
        s,
        k,
        prob.rate,
        prob.dividend,
        prob.vol,
        prob.tau,
    );
    let lam = prob.coef.lambda(prob.branch);
    BoundaryPointSolution {
        s_star: s,
        a: (k - s - put) / s.powf(lam),
        iterations,
        residual: f,
        converged,
    }
}

/// Solves the QD+ equation for a put at calendar time `t` with the chosen
/// iteration; non-convergence is reported, not recovered.
pub fn solve_boundary_point(
    p: &MarketParams,
    t: f64,
    branch: Branch,
    s0: f64,
    solver: RootSolverKind,
    tol: f64,
) -> Result<BoundaryPointSolution> {
    if !(s0 > 0.0) || !(tol > 0.0) {
        return Err(Error::Domain("initial guess and tolerance must be positive".into()));
    }
    let prob = PointProblem::new(p, t, branch)?;
    iterate(&prob, s0, solver, tol, DEFAULT_MAX_ITERATIONS)
}

/// One update of the selected iteration from `s`.
pub fn root_step(p: &MarketParams, t: f64, branch: Branch, s: f64, solver: RootSolverKind) -> Result<f64> {
    solver.validate()?;
    let prob = PointProblem::new(p, t, branch)?;
    let (f, d1, d2) = prob.cleared_with_derivatives(s);
    let next = s - solver.step_factor(f * d2 / (d1 * d1)) * f / d1;
    if next.is_finite() {
        Ok(next)
    } else {
        Err(Error::Domain(format!("iteration undefined at S={s}")))
    }
}

/// Configured solver, then the C-method with `C = 1/2` from the last
/// iterate, then bisection on a sign change found by scanning
/// `[1e-4 K, 10 K]`.
pub(crate) fn solve_with_fallback(
    prob: &PointProblem,
    s0: f64,
    solver: RootSolverKind,
    tol: f64,
) -> Result<BoundaryPointSolution> {
    let first = iterate(prob, s0, solver, tol, DEFAULT_MAX_ITERATIONS);
    let restart = match first {
        Ok(sol) => return Ok(sol),
        Err(Error::NonConvergence { last, .. }) if last[1].is_finite() && last[1] > 0.0 => last[1],
        Err(_) => s0,
    };
    if let Ok(sol) = iterate(prob, restart, RootSolverKind::CMethod(0.5), tol, DEFAULT_MAX_ITERATIONS) {
        return Ok(sol);
    }
    bisect(prob, s0, tol)
}

fn bisect(prob: &PointProblem, near: f64, tol: f64) -> Result<BoundaryPointSolution> {
    let k = prob.strike;
    let n = 80;
    let grid: Vec<f64> = (0..=n).map(|i| k * 1e-4 * (1e5f64).powf(i as f64 / n as f64)).collect();
    let vals: Vec<f64> = grid.iter().map(|&s| prob.cleared(s)).collect();
    let mut best: Option<(f64, f64)> = None;
    for i in 0..n {
        let (a, b) = (vals[i], vals[i + 1]);
        if a.is_finite() && b.is_finite() && a.signum() != b.signum() {
            let mid = 0.5 * (grid[i] + grid[i + 1]);
            let closer = best.is_none_or(|(lo, hi)| (mid - near).abs() < (0.5 * (lo + hi) - near).abs());
            if closer {
                best = Some((grid[i], grid[i + 1]));
            }
        }
    }
    let (mut lo, mut hi) = best.ok_or(Error::NonConvergence {
        iterations: DEFAULT_MAX_ITERATIONS,
        last: [near, near],
        residual: f64::NAN,
    })?;
    let mut flo = prob.cleared(lo);
    for n in 0..200 {
        let mid = 0.5 * (lo + hi);
        let fm = prob.cleared(mid);
        if fm.abs() <= tol || hi - lo < 1e-12 * k {
            return Ok(solution(prob, mid, n, fm, fm.abs() <= tol));
        }
        if fm.signum() == flo.signum() {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    Err(Error::NonConvergence { iterations: 200, last: [lo, hi], residual: flo.abs() })
}

/// Mean evaluation count over a warm-started backward sweep of the upper
/// boundary on `m` equidistant times `t_i = T i / m`, `i < m`.
pub fn mean_boundary_iterations(p: &MarketParams, m: usize, solver: RootSolverKind, tol: f64) -> Result<f64> {
    if m == 0 {
        return Err(Error::Config("at least one time point is needed".into()));
    }
    let mut guess = super::initial_guess(p, Branch::Upper);
    let mut total = 0;
    for i in (0..m).rev() {
        let t = p.maturity * i as f64 / m as f64;
        let sol = solve_boundary_point(p, t, Branch::Upper, guess, solver, tol)?;
        total += sol.iterations;
        guess = sol.s_star;
    }
    Ok(total as f64 / m as f64)
}
