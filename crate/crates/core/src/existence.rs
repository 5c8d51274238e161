//! Positive solutions by fixed-point iteration of the compact solution
//! operator, continuation in the forcing, small-norm probes and the
//! nonexistence threshold in the forcing `λ`.
//!
//! The operator is `K(u) = v`, where
//! `−Δ_p v + Λ v^{p−1} = f(u) + tλ₀ + Λ u^{p−1}`, `v = 0` on the boundary;
//! `Λ ≥ 0` makes the load nonnegative on the cone of nonnegative functions.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::eigen::first_eigenpair;
use crate::fem::{energy_gradient, inner_solve, InnerProblem, SolverSettings};
use crate::geometry::{FeFunction, Mesh};
use crate::nonlinearity::{check_h3pp, check_h4pp, estimate_lambda, ClassifierConfig, Nonlinearity, Verdict};
use crate::radial::radial_solve_bvp;
use crate::{Error, Result};

/// How successive iterates are rescaled.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Amplitude {
    /// Rescale when the forcing vanishes (mountain-pass type solutions).
    Auto,
    /// Always rescale each image onto the energy identity when possible.
    Rescale,
    /// Plain relaxed iteration.
    Off,
}

/// Settings of the fixed-point and continuation drivers.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HomotopyConfig {
    /// Shift `Λ`; estimated from `f` when absent.
    pub big_lambda: Option<f64>,
    /// Initial relaxation `θ ∈ (0, 1]`.
    pub theta: f64,
    /// Relative sup-norm change that declares convergence.
    pub tol: f64,
    /// Relative PDE residual required of a converged solution.
    pub residual_tol: f64,
    pub max_outer: usize,
    /// Continuation parameters, visited from the largest down.
    pub t_grid: Vec<f64>,
    /// Forcing `λ₀` of the continuation.
    pub lambda0: f64,
    /// Forcing values scanned by [`estimate_lambda_max`].
    pub lambda_grid: Vec<f64>,
    /// Sup-norm of the default start `s·φ₁/‖φ₁‖_∞`.
    pub start_scale: f64,
    pub amplitude: Amplitude,
    pub solver: SolverSettings,
}

impl Default for HomotopyConfig {
    fn default() -> Self {
        HomotopyConfig {
            big_lambda: None,
            theta: 0.5,
            tol: 1e-8,
            residual_tol: 1e-6,
            max_outer: 500,
            t_grid: vec![1.0, 0.75, 0.5, 0.25, 0.0],
            lambda0: 0.0,
            lambda_grid: (1..=20).map(|k| k as f64).collect(),
            start_scale: 1.0,
            amplitude: Amplitude::Auto,
            solver: SolverSettings { tol: 1e-10, ..SolverSettings::default() },
        }
    }
}

fn sorted_nonempty(v: &[f64], name: &str) -> Result<()> {
    if v.is_empty() {
        return Err(Error::InvalidParameter(format!("{name} is empty")));
    }
    if v.iter().any(|x| !x.is_finite()) || v.windows(2).any(|w| !(w[0] < w[1]) && !(w[0] > w[1])) {
        return Err(Error::InvalidParameter(format!("{name} must be finite and strictly monotone")));
    }
    let inc = v.windows(2).all(|w| w[0] < w[1]);
    let dec = v.windows(2).all(|w| w[0] > w[1]);
    if !(inc || dec) {
        return Err(Error::InvalidParameter(format!("{name} must be sorted")));
    }
    Ok(())
}

impl HomotopyConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.theta > 0.0 && self.theta <= 1.0) {
            return Err(Error::InvalidParameter(format!("relaxation θ = {} must lie in (0, 1]", self.theta)));
        }
        if !(self.tol > 0.0) || !(self.residual_tol > 0.0) {
            return Err(Error::InvalidParameter("tolerances must be positive".into()));
        }
        if self.max_outer == 0 {
            return Err(Error::InvalidParameter("max_outer must be positive".into()));
        }
        if let Some(l) = self.big_lambda {
            if !(l >= 0.0 && l.is_finite()) {
                return Err(Error::InvalidParameter(format!("Λ = {l} must be >= 0")));
            }
        }
        sorted_nonempty(&self.t_grid, "t-grid")?;
        if self.t_grid.iter().any(|t| !(0.0..=1.0).contains(t)) {
            return Err(Error::InvalidParameter("t-grid must lie in [0, 1]".into()));
        }
        sorted_nonempty(&self.lambda_grid, "λ-grid")?;
        if !(self.lambda0 >= 0.0 && self.lambda0.is_finite()) {
            return Err(Error::InvalidParameter(format!("λ₀ = {} must be >= 0", self.lambda0)));
        }
        if !(self.start_scale > 0.0 && self.start_scale.is_finite()) {
            return Err(Error::InvalidParameter("start scale must be positive".into()));
        }
        self.solver.validate()
    }
}

/// How a fixed-point run ended.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Outcome {
    /// Stagnated at a nontrivial function that passes the residual gate.
    Converged,
    /// Collapsed to the zero function.
    Trivial,
    /// Exceeded the blow-up ceiling.
    Diverged,
    /// Budget exhausted, or stagnated without passing the residual gate.
    NotConverged,
}

/// One solve on a branch, at continuation parameter `t` or forcing `λ`.
#[derive(Clone, Debug)]
pub struct BranchPoint {
    pub parameter: f64,
    pub solution: FeFunction,
    pub sup_norm: f64,
    /// `‖A(u) − M(f(u) + forcing)‖₂ / ‖M(f(u) + forcing)‖₂`.
    pub residual: f64,
    pub iterations: usize,
    pub outcome: Outcome,
    pub converged: bool,
    /// Relaxation in force at the end.
    pub theta: f64,
}

/// Serializable view of a [`BranchPoint`] without the nodal field.
#[derive(Clone, Debug, Serialize)]
pub struct BranchSummary {
    pub parameter: f64,
    pub sup_norm: f64,
    pub residual: f64,
    pub iterations: usize,
    pub outcome: Outcome,
    pub converged: bool,
    pub theta: f64,
}

impl BranchPoint {
    pub fn summary(&self) -> BranchSummary {
        BranchSummary {
            parameter: self.parameter,
            sup_norm: self.sup_norm,
            residual: self.residual,
            iterations: self.iterations,
            outcome: self.outcome,
            converged: self.converged,
            theta: self.theta,
        }
    }
}

fn shift_for(f: &Nonlinearity, p: f64, cfg: &HomotopyConfig) -> Result<f64> {
    match cfg.big_lambda {
        Some(l) => Ok(l),
        None => Ok(estimate_lambda(f, p, &ClassifierConfig::default())?.lambda),
    }
}

/// `K(u)` with forcing `t·λ₀` and shift `Λ`.
pub fn operator_k(
    u: &FeFunction,
    f: &Nonlinearity,
    p: f64,
    big_lambda: f64,
    t: f64,
    lambda0: f64,
    settings: &SolverSettings,
) -> Result<FeFunction> {
    if u.values().iter().any(|&x| x < 0.0) {
        return Err(Error::InvalidInput("K acts on nonnegative functions".into()));
    }
    let rep = solve_k(u, f, p, big_lambda, t * lambda0, settings, None)?;
    if !rep.1 {
        return Err(Error::NotConverged("inner solve of K did not converge".into()));
    }
    Ok(rep.0)
}

fn solve_k(
    u: &FeFunction,
    f: &Nonlinearity,
    p: f64,
    big_lambda: f64,
    forcing: f64,
    settings: &SolverSettings,
    warm: Option<&FeFunction>,
) -> Result<(FeFunction, bool)> {
    let load = u
        .values()
        .iter()
        .map(|&x| {
            let x = x.max(0.0);
            f.f(x) + forcing + big_lambda * x.powf(p - 1.0)
        })
        .collect();
    let mut prob = InnerProblem::new(u.mesh().clone(), p, load)?.with_lambda(big_lambda)?.with_settings(settings)?;
    if let Some(w) = warm.filter(|_| p >= 2.0) {
        prob = prob.with_warm_start(w.values().to_vec())?;
    }
    let rep = inner_solve(&prob)?;
    Ok((rep.solution, rep.converged))
}

/// Relative residual of `−Δ_p u = f(u) + forcing` in the discrete weak form.
pub fn pde_residual(u: &FeFunction, f: &Nonlinearity, p: f64, forcing: f64) -> Result<f64> {
    let load: Vec<f64> = u.values().iter().map(|&x| f.f(x) + forcing).collect();
    let masses = u.lumped_masses();
    let mesh = u.mesh();
    let scale: f64 = load
        .iter()
        .zip(masses)
        .enumerate()
        .filter(|(i, _)| !mesh.is_boundary(*i))
        .map(|(_, (g, m))| (g * m).powi(2))
        .sum::<f64>()
        .sqrt();
    let prob = InnerProblem::new(mesh.clone(), p, load)?;
    let g = energy_gradient(u, &prob)?;
    let norm = g.iter().map(|x| x * x).sum::<f64>().sqrt();
    if scale == 0.0 {
        return Ok(if norm == 0.0 { 0.0 } else { f64::INFINITY });
    }
    Ok(norm / scale)
}

/// Largest `c > 0` with `c^p ∫|∇v|^p = ∫ (f(cv) + forcing)·cv`, if any.
fn energy_scale(v: &FeFunction, f: &Nonlinearity, p: f64, forcing: f64) -> Option<f64> {
    let a = crate::fem::gradient_lp_norm(v, p).ok()?.powf(p);
    if !(a > 0.0) {
        return None;
    }
    let phi = |c: f64| v.lumped_integral(|s| (f.f(c * s) + forcing) * c * s) / c.powf(p) - a;
    // scan downwards for the first sign change from above
    let mut hi = 2f64.powi(40);
    let mut v_hi = phi(hi);
    if !v_hi.is_finite() {
        return None;
    }
    for k in (-160..160).rev() {
        let c = 2f64.powf(k as f64 / 4.0);
        let vc = phi(c);
        if !vc.is_finite() {
            return None;
        }
        if (vc <= 0.0) != (v_hi <= 0.0) && v_hi > 0.0 {
            let mut lo = c;
            for _ in 0..100 {
                let mid = (lo * hi).sqrt();
                if phi(mid) > 0.0 {
                    hi = mid;
                } else {
                    lo = mid;
                }
                if hi / lo - 1.0 < 1e-14 {
                    break;
                }
            }
            return Some((lo * hi).sqrt());
        }
        hi = c;
        v_hi = vc;
    }
    None
}

struct Run<'a> {
    f: &'a Nonlinearity,
    p: f64,
    big_lambda: f64,
    forcing: f64,
    rescale: bool,
    /// Multiplier `s` of the probe equation `u = s·K(u)`.
    s: f64,
}

fn iterate(run: &Run, cfg: &HomotopyConfig, start: FeFunction, parameter: f64) -> Result<BranchPoint> {
    let ceiling = 1e6 * (1.0 + start.sup_norm());
    let mut u = start;
    let mut theta = cfg.theta;
    let mut last_delta: Option<f64> = None;
    let mut alternations = 0;
    let finish = |u: FeFunction, iterations, outcome, theta, residual| BranchPoint {
        parameter,
        sup_norm: u.sup_norm(),
        solution: u,
        residual,
        iterations,
        outcome,
        converged: outcome == Outcome::Converged,
        theta,
    };
    let mut warm: Option<FeFunction> = None;
    for it in 1..=cfg.max_outer {
        let (mut v, ok) = solve_k(&u, run.f, run.p, run.big_lambda, run.forcing, &cfg.solver, warm.as_ref())?;
        if !ok || !v.values().iter().all(|x| x.is_finite()) {
            let diverged = v.sup_norm() > ceiling || !v.sup_norm().is_finite();
            let outcome = if diverged { Outcome::Diverged } else { Outcome::NotConverged };
            return Ok(finish(u, it, outcome, theta, f64::NAN));
        }
        warm = Some(v.clone());
        if run.s != 1.0 {
            v = v.scaled(run.s);
        }
        if run.rescale {
            if let Some(c) = energy_scale(&v, run.f, run.p, run.forcing) {
                v = v.scaled(c);
            }
        }
        let next = FeFunction::new(
            u.mesh().clone(),
            u.values().iter().zip(v.values()).map(|(a, b)| ((1.0 - theta) * a + theta * b).max(0.0)).collect(),
        )?;
        let change = next.values().iter().zip(u.values()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        let delta = next.sup_norm() - u.sup_norm();
        let norm = next.sup_norm();
        u = next;
        if !(norm <= ceiling) {
            return Ok(finish(u, it, Outcome::Diverged, theta, f64::NAN));
        }
        if norm <= 10.0 * cfg.tol {
            return Ok(finish(u, it, Outcome::Trivial, theta, 0.0));
        }
        if change <= cfg.tol * norm {
            let residual = pde_residual(&u, run.f, run.p, run.forcing)?;
            let outcome = if run.s != 1.0 || residual <= cfg.residual_tol {
                Outcome::Converged
            } else {
                Outcome::NotConverged
            };
            return Ok(finish(u, it, outcome, theta, residual));
        }
        // damp on sustained oscillation of the sup-norm
        if let Some(prev) = last_delta {
            if prev * delta < 0.0 {
                alternations += 1;
                if alternations >= 4 && theta > 1.0 / 64.0 {
                    theta *= 0.5;
                    alternations = 0;
                }
            } else {
                alternations = 0;
            }
        }
        last_delta = Some(delta);
    }
    let residual = pde_residual(&u, run.f, run.p, run.forcing)?;
    Ok(finish(u, cfg.max_outer, Outcome::NotConverged, theta, residual))
}

fn default_start(mesh: &Arc<Mesh>, p: f64, scale: f64) -> Result<FeFunction> {
    let eig = first_eigenpair(p, mesh, 1e-8)?;
    let phi = eig.phi;
    Ok(phi.scaled(scale / phi.sup_norm()))
}

fn rescale_for(cfg: &HomotopyConfig, forcing: f64, f: &Nonlinearity) -> bool {
    match cfg.amplitude {
        Amplitude::Auto => forcing == 0.0 && f.f(0.0) == 0.0,
        Amplitude::Rescale => true,
        Amplitude::Off => false,
    }
}

/// Relaxed fixed-point iteration `u ← (1−θ)u + θ·K(u)` at continuation
/// parameter `t`, from `start_scale·φ₁/‖φ₁‖_∞`.
///
/// With [`Amplitude::Auto`] and no forcing, each image is rescaled onto the
/// energy identity `∫|∇u|^p = ∫f(u)u`; this stabilises the otherwise
/// unstable amplitude direction of superlinear problems and leaves fixed
/// points unchanged.
pub fn fixed_point_solve(f: &Nonlinearity, p: f64, cfg: &HomotopyConfig, mesh: &Arc<Mesh>, t: f64) -> Result<BranchPoint> {
    cfg.validate()?;
    let start = default_start(mesh, p, cfg.start_scale)?;
    fixed_point_from(f, p, cfg, start, t)
}

/// [`fixed_point_solve`] from a given start.
pub fn fixed_point_from(f: &Nonlinearity, p: f64, cfg: &HomotopyConfig, start: FeFunction, t: f64) -> Result<BranchPoint> {
    cfg.validate()?;
    if !(0.0..=1.0).contains(&t) {
        return Err(Error::InvalidParameter(format!("t = {t} outside [0, 1]")));
    }
    let forcing = t * cfg.lambda0;
    let run = Run {
        f,
        p,
        big_lambda: shift_for(f, p, cfg)?,
        forcing,
        rescale: rescale_for(cfg, forcing, f),
        s: 1.0,
    };
    iterate(&run, cfg, start, t)
}

/// Continuation in `t` from the largest grid value down, each solve warm
/// started from the previous converged point.
#[derive(Clone, Debug)]
pub struct Branch {
    pub points: Vec<BranchPoint>,
    /// No grid point converged: `λ₀` is at or above the threshold.
    pub threshold_exceeded: bool,
}

pub fn homotopy_branch(f: &Nonlinearity, p: f64, cfg: &HomotopyConfig, mesh: &Arc<Mesh>) -> Result<Branch> {
    cfg.validate()?;
    let big_lambda = shift_for(f, p, cfg)?;
    let mut ts = cfg.t_grid.clone();
    ts.sort_by(|a, b| b.total_cmp(a));
    let mut start = default_start(mesh, p, cfg.start_scale)?;
    let mut points = Vec::with_capacity(ts.len());
    for t in ts {
        let forcing = t * cfg.lambda0;
        // the continuation follows the upper (large) branch, so the image is
        // always placed on the energy identity when that is possible
        let run = Run {
            f,
            p,
            big_lambda,
            forcing,
            rescale: cfg.amplitude != Amplitude::Off,
            s: 1.0,
        };
        let point = iterate(&run, cfg, start.clone(), t)?;
        if point.converged {
            start = point.solution.clone();
        }
        points.push(point);
    }
    let threshold_exceeded = points.iter().all(|pt| !pt.converged);
    Ok(Branch { points, threshold_exceeded })
}

/// Per-sample record of [`krasnoselskii_probe_a`].
#[derive(Clone, Debug, Serialize)]
pub struct ProbeSample {
    pub s: f64,
    pub start: String,
    pub outcome: Outcome,
    pub sup_norm: f64,
    /// Converged to a nontrivial fixed point of `u = s·K(u)` with sup-norm
    /// within 10% of `r`.
    pub counterexample: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct ProbeReport {
    pub r: f64,
    pub verdict: Verdict,
    pub samples: Vec<ProbeSample>,
}

/// Falsification probe of `u ≠ s·K(u)` on the sphere `‖u‖_∞ = r`: for each
/// sampled `s ∈ (0, 1]` and trial start of sup-norm `r` (first eigenfunction
/// and torsion shapes), iterate `u ← s·K(u)` and look for a nontrivial fixed
/// point whose sup-norm lies within 10% of `r`.
pub fn krasnoselskii_probe_a(
    f: &Nonlinearity,
    p: f64,
    r: f64,
    mesh: &Arc<Mesh>,
    samples: usize,
    cfg: &HomotopyConfig,
) -> Result<ProbeReport> {
    cfg.validate()?;
    if !(r > 0.0 && r.is_finite()) || samples == 0 {
        return Err(Error::InvalidParameter("probe needs r > 0 and at least one sample".into()));
    }
    let big_lambda = shift_for(f, p, cfg)?;
    let phi = default_start(mesh, p, r)?;
    let torsion = inner_solve(&InnerProblem::new(mesh.clone(), p, vec![1.0; mesh.num_nodes()])?)?.solution;
    let torsion = torsion.scaled(r / torsion.sup_norm());
    let mut probe_cfg = cfg.clone();
    probe_cfg.tol = probe_cfg.tol.max(1e-7);
    probe_cfg.theta = 1.0;
    probe_cfg.max_outer = cfg.max_outer.min(200);
    let mut out = Vec::new();
    for k in 1..=samples {
        let s = k as f64 / samples as f64;
        for (name, start) in [("eigenfunction", &phi), ("torsion", &torsion)] {
            let run = Run { f, p, big_lambda, forcing: 0.0, rescale: false, s };
            let pt = iterate(&run, &probe_cfg, start.clone(), s)?;
            let counterexample = pt.outcome == Outcome::Converged && (pt.sup_norm / r - 1.0).abs() <= 0.1;
            out.push(ProbeSample { s, start: name.into(), outcome: pt.outcome, sup_norm: pt.sup_norm, counterexample });
        }
    }
    let verdict = if out.iter().any(|x| x.counterexample) { Verdict::Fails } else { Verdict::Holds };
    Ok(ProbeReport { r, verdict, samples: out })
}

/// Bracket of the largest forcing for which `−Δ_p u = f(u) + λ` is solvable.
#[derive(Clone, Debug, Serialize)]
pub struct LambdaMaxReport {
    /// Largest forcing found solvable (0 when none in the grid was).
    pub lower: f64,
    /// Smallest forcing found unsolvable; `None` gives a lower bound only.
    pub upper: Option<f64>,
    /// Midpoint of the final bracket.
    pub estimate: Option<f64>,
    /// `(λ, outcome, sup-norm)` of every solve, in evaluation order.
    pub evaluations: Vec<(f64, Outcome, f64)>,
    /// Departures from the monotone picture (solvable above an unsolvable λ).
    pub anomalies: Vec<String>,
}

/// Scan `cfg.lambda_grid` with the monotone iteration from `u = 0` (which
/// converges to the minimal solution when one exists), then bisect the first
/// (solvable, unsolvable) bracket to relative width `1e-3`.
pub fn estimate_lambda_max(f: &Nonlinearity, p: f64, mesh: &Arc<Mesh>, cfg: &HomotopyConfig) -> Result<LambdaMaxReport> {
    cfg.validate()?;
    let mut grid = cfg.lambda_grid.clone();
    grid.sort_by(f64::total_cmp);
    if grid[0] <= 0.0 {
        return Err(Error::InvalidParameter("λ-grid must be positive".into()));
    }
    let big_lambda = shift_for(f, p, cfg)?;
    let mut evaluations = Vec::new();
    let mut solve = |lambda: f64| -> Result<bool> {
        let run = Run { f, p, big_lambda, forcing: lambda, rescale: false, s: 1.0 };
        let pt = iterate(&run, cfg, FeFunction::zeros(mesh.clone()), lambda)?;
        evaluations.push((lambda, pt.outcome, pt.sup_norm));
        Ok(pt.converged)
    };
    let mut lower = 0.0;
    let mut upper = None;
    let mut anomalies = Vec::new();
    for &lambda in &grid {
        let ok = solve(lambda)?;
        match (ok, upper) {
            (true, None) => lower = lambda,
            (false, None) => upper = Some(lambda),
            (true, Some(u)) => anomalies.push(format!("solvable at λ = {lambda} above unsolvable λ = {u}")),
            (false, Some(_)) => {}
        }
    }
    if let Some(mut hi) = upper {
        let mut lo = lower;
        while hi - lo > 1e-3 * hi {
            let mid = 0.5 * (lo + hi);
            if solve(mid)? {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        lower = lo;
        upper = Some(hi);
    }
    Ok(LambdaMaxReport {
        lower,
        upper,
        estimate: upper.map(|u| 0.5 * (lower + u)),
        evaluations,
        anomalies,
    })
}

/// One row of [`sweep_alpha`].
#[derive(Clone, Debug, Serialize)]
pub struct SweepRow {
    pub alpha: f64,
    /// `u(0)` of the radial solution, when one was found.
    pub sup_norm: Option<f64>,
    /// `"solved"`, `"no-solution-found"` or an error message.
    pub bvp: String,
    pub h3pp: Verdict,
    pub c3pp: Option<f64>,
    pub h4pp: Verdict,
}

/// Radial solutions of `−Δ_p u = u^{p*−1}/ln(e+u)^α` on the ball of radius
/// `big_r` in `R^N`, with the growth verdicts of each `α`.
pub fn sweep_alpha(p: f64, n: usize, alphas: &[f64], big_r: f64, cls: &ClassifierConfig) -> Result<Vec<SweepRow>> {
    if !(p < n as f64) {
        return Err(Error::InvalidParameter(format!("the sweep needs p < N (got p = {p}, N = {n})")));
    }
    let mut rows = Vec::with_capacity(alphas.len());
    for &alpha in alphas {
        let f = Nonlinearity::log_critical(alpha, p, n)?;
        let h3 = check_h3pp(&f, p, n, cls);
        let h4 = check_h4pp(&f, p, n, cls);
        let (sup_norm, bvp) = match radial_solve_bvp(p, n, &f, big_r) {
            Ok(prof) => (Some(prof.values()[0]), "solved".to_string()),
            Err(Error::NoSolutionFound(_)) => (None, "no-solution-found".to_string()),
            Err(e) => (None, e.to_string()),
        };
        rows.push(SweepRow { alpha, sup_norm, bvp, h3pp: h3.verdict, c3pp: h3.constant, h4pp: h4.verdict });
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::mesh_disc;

    fn disc(h: f64) -> Arc<Mesh> {
        Arc::new(mesh_disc(1.0, h).unwrap())
    }

    #[test]
    fn config_validation() {
        assert!(HomotopyConfig::default().validate().is_ok());
        let bad = HomotopyConfig { theta: 0.0, ..Default::default() };
        assert!(bad.validate().is_err());
        let bad = HomotopyConfig { t_grid: vec![], ..Default::default() };
        assert!(bad.validate().is_err());
        let bad = HomotopyConfig { t_grid: vec![0.0, 1.0, 0.5], ..Default::default() };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn k_of_zero() {
        let mesh = disc(0.1);
        let s = SolverSettings::default();
        let zero = FeFunction::zeros(mesh.clone());
        let cubic = Nonlinearity::power(3.0, 1.0).unwrap();
        assert_eq!(operator_k(&zero, &cubic, 2.0, 0.0, 0.0, 5.0, &s).unwrap().sup_norm(), 0.0);
        // K(0) at forcing tλ₀ is the scaled torsion function
        let t1 = operator_k(&zero, &Nonlinearity::constant(1.0).unwrap(), 3.0, 0.0, 0.0, 0.0, &s).unwrap();
        let k = operator_k(&zero, &cubic, 3.0, 0.0, 0.5, 8.0, &s).unwrap();
        assert!((k.sup_norm() / t1.sup_norm() - 4f64.sqrt()).abs() < 1e-6);
    }

    #[test]
    fn cubic_solution_matches_radial() {
        let mesh = disc(0.1);
        let f = Nonlinearity::power(3.0, 1.0).unwrap();
        let pt = fixed_point_solve(&f, 2.0, &HomotopyConfig::default(), &mesh, 0.0).unwrap();
        assert_eq!(pt.outcome, Outcome::Converged, "{:?}", pt.summary());
        let exact = radial_solve_bvp(2.0, 2, &f, 1.0).unwrap().values()[0];
        assert!((pt.sup_norm / exact - 1.0).abs() < 0.05, "{} vs {exact}", pt.sup_norm);
    }

    #[test]
    fn sublinear_collapses_to_zero() {
        let mesh = disc(0.1);
        let lam = first_eigenpair(2.0, &mesh, 1e-10).unwrap().lambda;
        let f = Nonlinearity::homogeneous(2.0, 0.5 * lam).unwrap();
        let pt = fixed_point_solve(&f, 2.0, &HomotopyConfig::default(), &mesh, 0.0).unwrap();
        assert_eq!(pt.outcome, Outcome::Trivial);
    }

    #[test]
    fn threshold_for_cubic() {
        let mesh = disc(0.2);
        let f = Nonlinearity::power(3.0, 1.0).unwrap();
        let rep = estimate_lambda_max(&f, 2.0, &mesh, &HomotopyConfig::default()).unwrap();
        let hi = rep.upper.unwrap();
        assert!(rep.lower > 0.0 && hi > rep.lower && hi - rep.lower <= 1e-3 * hi, "{rep:?}");
        assert!(rep.anomalies.is_empty());
    }

    #[test]
    fn zero_nonlinearity_has_no_threshold() {
        let mesh = disc(0.3);
        let cfg = HomotopyConfig { lambda_grid: vec![1.0, 10.0, 100.0], ..Default::default() };
        let rep = estimate_lambda_max(&Nonlinearity::zero(), 2.0, &mesh, &cfg).unwrap();
        assert!(rep.upper.is_none());
        assert_eq!(rep.lower, 100.0);
    }

    #[test]
    fn homotopy_small_and_huge_forcing() {
        let mesh = disc(0.2);
        let f = Nonlinearity::power(3.0, 1.0).unwrap();
        let cfg = HomotopyConfig { lambda0: 1.0, ..Default::default() };
        let b = homotopy_branch(&f, 2.0, &cfg, &mesh).unwrap();
        assert!(b.points.iter().all(|pt| pt.converged));
        assert!(b.points.windows(2).all(|w| w[1].sup_norm > w[0].sup_norm));
        let end = fixed_point_solve(&f, 2.0, &HomotopyConfig::default(), &mesh, 0.0).unwrap();
        assert!((b.points.last().unwrap().sup_norm / end.sup_norm - 1.0).abs() < 1e-6);

        let cfg = HomotopyConfig { lambda0: 1e6, t_grid: vec![0.5, 1.0], ..Default::default() };
        let b = homotopy_branch(&f, 2.0, &cfg, &mesh).unwrap();
        assert!(b.threshold_exceeded);
        assert_eq!(b.points[0].outcome, Outcome::Diverged);
    }

    #[test]
    fn single_point_grid_is_fixed_point_solve() {
        let mesh = disc(0.2);
        let f = Nonlinearity::power(3.0, 1.0).unwrap();
        let cfg = HomotopyConfig { t_grid: vec![0.0], ..Default::default() };
        let b = homotopy_branch(&f, 2.0, &cfg, &mesh).unwrap();
        let pt = fixed_point_solve(&f, 2.0, &cfg, &mesh, 0.0).unwrap();
        assert_eq!(b.points.len(), 1);
        assert_eq!(b.points[0].iterations, pt.iterations);
        assert_eq!(b.points[0].solution.values(), pt.solution.values());
    }

    #[test]
    fn probe_detects_small_fixed_points() {
        let mesh = disc(0.2);
        let cfg = HomotopyConfig::default();
        let cubic = Nonlinearity::power(3.0, 1.0).unwrap();
        assert_eq!(krasnoselskii_probe_a(&cubic, 2.0, 0.01, &mesh, 8, &cfg).unwrap().verdict, Verdict::Holds);
        let lam = first_eigenpair(2.0, &mesh, 1e-10).unwrap().lambda;
        let linear = Nonlinearity::power(1.0, 2.0 * lam).unwrap();
        let rep = krasnoselskii_probe_a(&linear, 2.0, 0.01, &mesh, 8, &cfg).unwrap();
        assert_eq!(rep.verdict, Verdict::Fails);
        assert!(rep.samples.iter().any(|s| s.counterexample && s.s == 0.5));
    }

    #[test]
    fn alpha_sweep() {
        let rows = sweep_alpha(2.0, 3, &[0.0, 2.5, 3.0, 4.0], 1.0, &ClassifierConfig::default()).unwrap();
        assert_eq!(rows[0].bvp, "no-solution-found");
        assert_eq!(rows[0].h4pp, Verdict::Fails);
        for row in &rows[1..] {
            assert_eq!(row.bvp, "solved");
            assert!(row.sup_norm.unwrap().is_finite());
            assert_eq!(row.h3pp, Verdict::Holds);
            assert_eq!(row.h4pp, Verdict::Holds);
        }
        assert!(sweep_alpha(3.0, 3, &[1.0], 1.0, &ClassifierConfig::default()).is_err());
    }
}
