//! Gauss-Newton solve of the boundary equations at all nodes at once.

use super::fixed_point::enforce_constraints;
use super::quadrature::TanhSinh;
use super::{kernel, DoubleBoundary, QuadratureSpec};
use crate::blackscholes::MarketParams;
use crate::error::{Error, Result};
use nalgebra::{DMatrix, DVector};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GnSystem {
    /// High-contact equations (single boundary only).
    HighContact,
    /// Price-continuity equations for one or two boundaries.
    Continuity,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussNewtonReport {
    pub steps: usize,
    /// Max-norm of the residual at the returned boundary.
    pub residual: f64,
}

const MAX_STEPS: usize = 100;
const FD_STEP: f64 = 1e-6;
/// A stalled iteration is accepted when the residual at the knots not
/// merged by the ordering constraint is below this. Merged knots are active
/// constraints: a crossing time estimated before the true one leaves them
/// without an exact solution.
const FREE_TOL: f64 = 1e-7;
/// Relative decrease of the residual norm below which a step counts as
/// stalled.
const STALL_DECREASE: f64 = 1e-6;

struct Problem<'a> {
    system: GnSystem,
    base: &'a DoubleBoundary,
    p: &'a MarketParams,
    rule: TanhSinh,
    m: usize,
}

impl Problem<'_> {
    fn unknowns(&self, db: &DoubleBoundary) -> DVector<f64> {
        let mut x: Vec<f64> = db.upper.values[1..].to_vec();
        if let Some(l) = &db.lower {
            x.extend_from_slice(&l.values[1..]);
        }
        DVector::from_vec(x)
    }

    fn boundary(&self, x: &DVector<f64>) -> Result<DoubleBoundary> {
        let m = self.m;
        let mut up = self.base.upper.values.clone();
        up[1..].copy_from_slice(&x.as_slice()[..m]);
        let mut out = self.base.clone();
        out.upper = self.base.upper.with_values(&up)?;
        if let Some(l) = &self.base.lower {
            let mut low = l.values.clone();
            low[1..].copy_from_slice(&x.as_slice()[m..]);
            out.lower = Some(l.with_values(&low)?);
        }
        Ok(out)
    }

    /// Clamps to the admissible set: positive, and for pairs the ordering
    /// and monotonicity constraints.
    fn project(&self, x: &mut DVector<f64>) {
        let m = self.m;
        for v in x.iter_mut() {
            *v = v.max(1e-8 * self.p.strike);
        }
        if let Some(l) = &self.base.lower {
            let mut up = self.base.upper.values.clone();
            let mut low = l.values.clone();
            up[1..].copy_from_slice(&x.as_slice()[..m]);
            low[1..].copy_from_slice(&x.as_slice()[m..]);
            enforce_constraints(&mut up, &mut low);
            x.as_mut_slice()[..m].copy_from_slice(&up[1..]);
            x.as_mut_slice()[m..].copy_from_slice(&low[1..]);
        }
    }

    fn residual(&self, x: &DVector<f64>) -> Result<DVector<f64>> {
        let db = self.boundary(x)?;
        let k = kernel(self.p);
        let taus = db.knots();
        let mut out = Vec::with_capacity(x.len());
        match self.system {
            GnSystem::HighContact => {
                for i in 1..taus.len() {
                    out.push(k.contact_residual(db.upper.values[i], taus[i], &db.upper, &self.rule));
                }
            }
            GnSystem::Continuity => {
                let lower = db.lower.as_ref();
                for i in 1..taus.len() {
                    out.push(k.continuity_residual(db.upper.values[i], taus[i], &db.upper, lower, &self.rule));
                }
                if let Some(l) = lower {
                    for i in 1..taus.len() {
                        out.push(k.continuity_residual(l.values[i], taus[i], &db.upper, lower, &self.rule));
                    }
                }
            }
        }
        let r = DVector::from_vec(out);
        if r.iter().all(|v| v.is_finite()) {
            Ok(r)
        } else {
            Err(Error::Breakdown { knot: 0, reason: "non-finite residual".into() })
        }
    }

    /// Max-norm of the residual over knots where the boundaries are apart.
    fn free_residual(&self, x: &DVector<f64>, f: &DVector<f64>) -> f64 {
        let m = self.m;
        if self.base.lower.is_none() {
            return norm(f);
        }
        let tie = 1e-12 * self.p.strike;
        (0..m).filter(|&i| x[i] - x[m + i] > tie).map(|i| f[i].abs().max(f[m + i].abs())).fold(0.0, f64::max)
    }

    fn jacobian(&self, x: &DVector<f64>, f: &DVector<f64>) -> Result<DMatrix<f64>> {
        let n = x.len();
        let mut j = DMatrix::zeros(f.len(), n);
        for c in 0..n {
            let h = FD_STEP * x[c].abs().max(1e-8);
            let mut xh = x.clone();
            xh[c] += h;
            let fh = self.residual(&xh)?;
            j.set_column(c, &((fh - f) / h));
        }
        Ok(j)
    }
}

fn norm(v: &DVector<f64>) -> f64 {
    v.amax()
}

/// Least-squares Gauss-Newton on the node values, starting from `initial`.
/// The node at `tau = 0` stays at the maturity limit.
pub fn gauss_newton_solve(
    system: GnSystem,
    initial: &DoubleBoundary,
    p: &MarketParams,
    quad: QuadratureSpec,
    tol: f64,
) -> Result<(DoubleBoundary, GaussNewtonReport)> {
    quad.validate()?;
    if system == GnSystem::HighContact && initial.lower.is_some() {
        return Err(Error::Config("high-contact system is defined for a single boundary".into()));
    }
    let prob = Problem { system, base: initial, p, rule: TanhSinh::new(quad.inner_points), m: initial.intervals() };
    let mut x = prob.unknowns(initial);
    let mut f = prob.residual(&x)?;
    let mut steps = MAX_STEPS;
    for step in 0..MAX_STEPS {
        if norm(&f) <= tol {
            return Ok((prob.boundary(&x)?, GaussNewtonReport { steps: step, residual: norm(&f) }));
        }
        let j = prob.jacobian(&x, &f)?;
        let delta = j
            .svd(true, true)
            .solve(&(-&f), 1e-14)
            .map_err(|e| Error::Breakdown { knot: 0, reason: e.to_string() })?;
        let f0 = f.norm();
        let mut alpha = 1.0;
        let mut stalled = true;
        for _ in 0..30 {
            let mut trial = &x + &delta * alpha;
            prob.project(&mut trial);
            if let Ok(ft) = prob.residual(&trial) {
                let f1 = ft.norm();
                if f1 < f0 {
                    stalled = f0 - f1 <= STALL_DECREASE * f0;
                    x = trial;
                    f = ft;
                    break;
                }
            }
            alpha *= 0.5;
        }
        if stalled {
            steps = step + 1;
            break;
        }
    }
    let residual = norm(&f);
    if residual <= tol || (steps < MAX_STEPS && prob.free_residual(&x, &f) <= FREE_TOL.max(tol)) {
        return Ok((prob.boundary(&x)?, GaussNewtonReport { steps, residual }));
    }
    let last = [x[0], x[x.len() - 1]];
    Err(Error::NonConvergence { iterations: steps, last, residual })
}
