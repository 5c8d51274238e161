//! P1 finite elements for `-Δ_p v + Λ|v|^{p-2}v = g` with zero Dirichlet data.
//!
//! The discrete problem is the minimisation of the regularised energy
//!
//! ```text
//! E_ε(v) = Σ_T |T| ((|∇v|_T|² + ε²)^{p/2} − ε^p)/p + Λ Σ_i m_i |v_i|^p / p − Σ_i m_i g_i v_i
//! ```
//!
//! with lumped masses `m_i`. For every `ε > 0` it is strictly convex and `C²`,
//! so damped Newton with an Armijo line search converges globally; `ε` is
//! driven down to `ε_final` by continuation.

mod newton;
mod space;

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::geometry::{FeFunction, Mesh};
use crate::{Error, Result};

pub use newton::inner_solve;
pub(crate) use space::FemSpace;

/// Numerical settings shared by every inner solve.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverSettings {
    /// Converged when `‖∇E‖₂ ≤ tol·(1 + |E|)`.
    pub tol: f64,
    /// Newton iterations summed over all continuation stages.
    pub max_iter: usize,
    /// Final regularisation; `None` means `1e-8 · diam(Ω)`.
    pub eps_final: Option<f64>,
}

impl Default for SolverSettings {
    fn default() -> Self {
        SolverSettings { tol: 1e-8, max_iter: 500, eps_final: None }
    }
}

impl SolverSettings {
    pub fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0 && self.tol.is_finite()) {
            return Err(Error::InvalidParameter(format!("solver tolerance {} must be > 0", self.tol)));
        }
        if self.max_iter == 0 {
            return Err(Error::InvalidParameter("max_iter must be >= 1".into()));
        }
        if let Some(e) = self.eps_final {
            if !(e >= 0.0 && e.is_finite()) {
                return Err(Error::InvalidParameter(format!("eps_final {e} must be >= 0")));
            }
        }
        Ok(())
    }
}

/// One instance of `-Δ_p v + Λ|v|^{p-2}v = g`, `v = 0` on the boundary.
#[derive(Clone, Debug)]
pub struct InnerProblem {
    pub mesh: Arc<Mesh>,
    pub p: f64,
    pub lambda: f64,
    /// Nodal load values (boundary entries are irrelevant).
    pub load: Vec<f64>,
    /// Final regularisation `ε`.
    pub eps: f64,
    pub tol: f64,
    pub max_iter: usize,
    /// Start from this nodal vector at the final `ε` and skip continuation.
    pub warm_start: Option<Vec<f64>>,
}

impl InnerProblem {
    pub fn new(mesh: Arc<Mesh>, p: f64, load: Vec<f64>) -> Result<Self> {
        let settings = SolverSettings::default();
        let eps = 1e-8 * mesh.domain().diameter();
        let prob = InnerProblem {
            mesh,
            p,
            lambda: 0.0,
            load,
            eps,
            tol: settings.tol,
            max_iter: settings.max_iter,
            warm_start: None,
        };
        prob.validate()?;
        Ok(prob)
    }

    /// Load given as a function of position, sampled at the nodes.
    pub fn from_load_fn(mesh: Arc<Mesh>, p: f64, g: impl Fn([f64; 2]) -> f64) -> Result<Self> {
        let load = mesh.nodes().iter().map(|&x| g(x)).collect();
        Self::new(mesh, p, load)
    }

    pub fn with_lambda(mut self, lambda: f64) -> Result<Self> {
        self.lambda = lambda;
        self.validate()?;
        Ok(self)
    }

    pub fn with_settings(mut self, settings: &SolverSettings) -> Result<Self> {
        settings.validate()?;
        self.tol = settings.tol;
        self.max_iter = settings.max_iter;
        if let Some(e) = settings.eps_final {
            self.eps = e;
        }
        Ok(self)
    }

    pub fn with_warm_start(mut self, start: Vec<f64>) -> Result<Self> {
        if start.len() != self.mesh.num_nodes() {
            return Err(Error::InvalidInput("warm start length differs from node count".into()));
        }
        self.warm_start = Some(start);
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.p > 1.0 && self.p.is_finite()) {
            return Err(Error::InvalidParameter(format!("p = {} must satisfy 1 < p < ∞", self.p)));
        }
        if !(self.lambda >= 0.0 && self.lambda.is_finite()) {
            return Err(Error::InvalidParameter(format!("Λ = {} must be >= 0", self.lambda)));
        }
        if !(self.tol > 0.0) {
            return Err(Error::InvalidParameter(format!("tolerance {} must be > 0", self.tol)));
        }
        if !(self.eps >= 0.0 && self.eps.is_finite()) {
            return Err(Error::InvalidParameter(format!("ε = {} must be >= 0", self.eps)));
        }
        if self.load.len() != self.mesh.num_nodes() {
            return Err(Error::InvalidInput(format!(
                "{} load values for {} nodes",
                self.load.len(),
                self.mesh.num_nodes()
            )));
        }
        if let Some(bad) = self.load.iter().find(|g| !g.is_finite()) {
            return Err(Error::InvalidInput(format!("non-finite load value {bad}")));
        }
        Ok(())
    }
}

/// One stage of the `ε`-continuation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StageTrace {
    pub eps: f64,
    pub iterations: usize,
    pub energy: f64,
    pub grad_norm: f64,
    pub converged: bool,
}

/// Outcome of [`inner_solve`]. A non-converged report still carries the last
/// iterate, flagged as such.
#[derive(Clone, Debug)]
pub struct SolveReport {
    pub solution: FeFunction,
    pub energy: f64,
    pub grad_norm: f64,
    pub iterations: usize,
    pub converged: bool,
    pub trace: Vec<StageTrace>,
}

/// Serializable part of a [`SolveReport`] (everything but the nodal values).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolveSummary {
    pub energy: f64,
    pub grad_norm: f64,
    pub iterations: usize,
    pub converged: bool,
    pub sup_norm: f64,
    pub trace: Vec<StageTrace>,
}

impl SolveReport {
    pub fn summary(&self) -> SolveSummary {
        SolveSummary {
            energy: self.energy,
            grad_norm: self.grad_norm,
            iterations: self.iterations,
            converged: self.converged,
            sup_norm: self.solution.sup_norm(),
            trace: self.trace.clone(),
        }
    }
}

/// Discrete energy of `v` for `prob` at the problem's final `ε`.
pub fn energy(v: &FeFunction, prob: &InnerProblem) -> Result<f64> {
    check_same_mesh(v, prob)?;
    Ok(energy_at(&prob.mesh, v.values(), prob, prob.eps))
}

/// Gradient of [`energy`] with respect to the nodal values (boundary entries zero).
pub fn energy_gradient(v: &FeFunction, prob: &InnerProblem) -> Result<Vec<f64>> {
    check_same_mesh(v, prob)?;
    let space = prob.mesh.fem_space();
    let g = gradient_dofs(&prob.mesh, v.values(), prob, prob.eps);
    let mut full = vec![0.0; prob.mesh.num_nodes()];
    for (d, &node) in space.node_of_dof.iter().enumerate() {
        full[node] = g[d];
    }
    Ok(full)
}

fn check_same_mesh(v: &FeFunction, prob: &InnerProblem) -> Result<()> {
    if v.values().len() != prob.mesh.num_nodes() {
        return Err(Error::InvalidInput("function and problem live on different meshes".into()));
    }
    Ok(())
}

pub(crate) fn energy_at(mesh: &Mesh, v: &[f64], prob: &InnerProblem, eps: f64) -> f64 {
    let space = mesh.fem_space();
    let p = prob.p;
    let e2 = eps * eps;
    let ep = eps.powf(p);
    let mut e = 0.0;
    for (t, tri) in mesh.triangles().iter().enumerate() {
        let g = space.grad(tri, t, v);
        let s = g[0] * g[0] + g[1] * g[1] + e2;
        e += space.areas[t] * (s.powf(0.5 * p) - ep) / p;
    }
    for (i, (&vi, &mi)) in v.iter().zip(&space.lumped).enumerate() {
        if prob.lambda != 0.0 {
            e += prob.lambda * mi * vi.abs().powf(p) / p;
        }
        e -= mi * prob.load[i] * vi;
    }
    e
}

/// Energy gradient in unknown numbering.
pub(crate) fn gradient_dofs(mesh: &Mesh, v: &[f64], prob: &InnerProblem, eps: f64) -> Vec<f64> {
    let space = mesh.fem_space();
    let p = prob.p;
    let e2 = eps * eps;
    let mut out = vec![0.0; space.num_dofs()];
    for (t, tri) in mesh.triangles().iter().enumerate() {
        let g = space.grad(tri, t, v);
        let s = g[0] * g[0] + g[1] * g[1] + e2;
        let w = space.areas[t] * flux_weight(s, p);
        for k in 0..3 {
            let d = space.dof_of_node[tri[k]];
            if d != space::NO_DOF {
                let phi = space.grads[t][k];
                out[d] += w * (g[0] * phi[0] + g[1] * phi[1]);
            }
        }
    }
    for (d, &node) in space.node_of_dof.iter().enumerate() {
        let (vi, mi) = (v[node], space.lumped[node]);
        if prob.lambda != 0.0 {
            out[d] += prob.lambda * mi * signed_pow(vi, p - 1.0);
        }
        out[d] -= mi * prob.load[node];
    }
    out
}

/// `s^{(p-2)/2}`, written to stay exact for `p = 2`.
#[inline]
pub(crate) fn flux_weight(s: f64, p: f64) -> f64 {
    if p == 2.0 {
        1.0
    } else {
        s.powf(0.5 * (p - 2.0))
    }
}

#[inline]
pub(crate) fn signed_pow(x: f64, e: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        x.signum() * x.abs().powf(e)
    }
}

/// `(Σ_T |T| |∇v|_T|^σ)^{1/σ}`.
pub fn gradient_lp_norm(v: &FeFunction, sigma: f64) -> Result<f64> {
    if !(sigma >= 1.0) {
        return Err(Error::InvalidParameter(format!("gradient norm exponent {sigma} must be >= 1")));
    }
    let mesh = v.mesh();
    let space = mesh.fem_space();
    let s: f64 = mesh
        .triangles()
        .iter()
        .enumerate()
        .map(|(t, tri)| {
            let g = space.grad(tri, t, v.values());
            space.areas[t] * g[0].hypot(g[1]).powf(sigma)
        })
        .sum();
    Ok(s.powf(1.0 / sigma))
}

/// Integrability exponent of `∇u` obtained from `f(u) ∈ L^q`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegularityExponent {
    /// `r = Nq(p−1)/(N−q)`.
    pub r: f64,
    /// Whether `r > N`, i.e. `q > N/p`, which gives Hölder continuity of `u`.
    pub exceeds_dimension: bool,
}

pub fn regularity_exponent(p: f64, n: usize, q: f64) -> Result<RegularityExponent> {
    let nf = n as f64;
    if !(p > 1.0) || n < 2 {
        return Err(Error::InvalidParameter(format!("need p > 1 and N >= 2 (got p = {p}, N = {n})")));
    }
    if !(q >= 1.0 && q < nf) {
        return Err(Error::InvalidParameter(format!("need 1 <= q < N (got q = {q}, N = {n})")));
    }
    let r = nf * q * (p - 1.0) / (nf - q);
    Ok(RegularityExponent { r, exceeds_dimension: r > nf })
}
