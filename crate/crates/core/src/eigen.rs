//! First eigenpair of the p-Laplacian on a mesh by nonlinear inverse
//! iteration with Rayleigh quotients.

use std::sync::Arc;

use serde::Serialize;

use crate::fem::{gradient_lp_norm, inner_solve, InnerProblem};
use crate::geometry::{FeFunction, Mesh};
use crate::{Error, Result};

/// Outer iteration budget of [`first_eigenpair`].
pub const MAX_OUTER: usize = 300;
/// Newton tolerance of the inner solves.
const INNER_TOL: f64 = 1e-11;

/// `λ₁` estimate with its eigenfunction, normalised to unit lumped `L^p` norm.
#[derive(Clone, Debug)]
pub struct EigenPair {
    pub lambda: f64,
    pub phi: FeFunction,
    /// Rayleigh quotient after each outer iteration.
    pub trace: Vec<f64>,
    pub converged: bool,
}

/// Serializable view of an [`EigenPair`] without the nodal field.
#[derive(Clone, Debug, Serialize)]
pub struct EigenSummary {
    pub p: f64,
    pub lambda: f64,
    pub iterations: usize,
    pub converged: bool,
    pub trace: Vec<f64>,
    pub phi_min: f64,
    pub phi_max: f64,
}

impl EigenPair {
    pub fn summary(&self, p: f64) -> EigenSummary {
        EigenSummary {
            p,
            lambda: self.lambda,
            iterations: self.trace.len(),
            converged: self.converged,
            trace: self.trace.clone(),
            phi_min: self.phi.min(),
            phi_max: self.phi.max(),
        }
    }
}

/// `∫|∇v|^p / ∫|v|^p` with a lumped denominator.
pub fn rayleigh(v: &FeFunction, p: f64) -> Result<f64> {
    if !(p > 1.0) {
        return Err(Error::InvalidParameter(format!("p must be > 1 (got {p})")));
    }
    let den = v.lumped_lp_power(p);
    if !(den > 0.0) {
        return Err(Error::InvalidInput("Rayleigh quotient of the zero function".into()));
    }
    Ok(gradient_lp_norm(v, p)?.powf(p) / den)
}

fn normalise(v: &FeFunction, p: f64) -> FeFunction {
    v.scaled(v.lumped_lp_power(p).powf(-1.0 / p))
}

/// First eigenpair by the iteration `−Δ_p v_{k+1} = |v_k|^{p−2}v_k`, followed by
/// renormalisation in lumped `L^p`, stopped when successive Rayleigh quotients
/// differ by less than `tol·λ`.
///
/// The start is the distance-to-boundary bump. An exhausted budget or a failed
/// inner solve yields `converged = false`, not an error.
pub fn first_eigenpair(p: f64, mesh: &Arc<Mesh>, tol: f64) -> Result<EigenPair> {
    if !(p > 1.0) || !p.is_finite() {
        return Err(Error::InvalidParameter(format!("p must be > 1 (got {p})")));
    }
    if !(tol > 0.0) {
        return Err(Error::InvalidParameter(format!("tolerance must be positive (got {tol})")));
    }
    let domain = mesh.domain().clone();
    let start = FeFunction::dirichlet(mesh.clone(), mesh.nodes().iter().map(|&x| domain.distance_to_boundary(x)).collect())?;
    if start.sup_norm() == 0.0 {
        return Err(Error::InvalidInput("mesh has no interior nodes".into()));
    }
    let mut v = normalise(&start, p);
    let mut lambda = rayleigh(&v, p)?;
    let mut trace = Vec::new();
    let mut converged = false;
    for _ in 0..MAX_OUTER {
        let load: Vec<f64> = v.values().iter().map(|&x| x.max(0.0).powf(p - 1.0)).collect();
        let mut prob = InnerProblem::new(mesh.clone(), p, load)?;
        if p >= 2.0 {
            // the next iterate is close to v/λ^{1/(p−1)}; for p < 2 the
            // ε-continuation from zero is much faster than a warm start at
            // the final ε, where the Hessian degenerates on flat regions
            prob = prob.with_warm_start(v.scaled(lambda.powf(-1.0 / (p - 1.0))).into_values())?;
        }
        prob.tol = INNER_TOL;
        let rep = inner_solve(&prob)?;
        if rep.solution.sup_norm() == 0.0 {
            break;
        }
        v = normalise(&rep.solution, p);
        let next = rayleigh(&v, p)?;
        trace.push(next);
        let change = (lambda - next).abs();
        lambda = next;
        if !rep.converged {
            continue;
        }
        if change < tol * lambda {
            converged = true;
            break;
        }
    }
    Ok(EigenPair { lambda, phi: v, trace, converged })
}
