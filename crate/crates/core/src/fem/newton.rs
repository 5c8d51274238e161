use super::space::NO_DOF;
use super::{energy_at, flux_weight, gradient_dofs, InnerProblem, SolveReport, StageTrace};
use crate::geometry::FeFunction;
use crate::linalg::Skyline;
use crate::Result;

/// Armijo sufficient-decrease constant.
const ARMIJO: f64 = 1e-4;
/// Below this `|∇E·d|/(1+|E|)` energy differences are rounding noise, so the
/// full Newton step is accepted without a decrease test.
const ROUNDOFF_SLOPE: f64 = 1e-13;
/// Loosest tolerance used on intermediate continuation stages; stages with
/// smaller `ε` are solved proportionally tighter so that the final stage
/// starts close to its minimiser.
const STAGE_TOL: f64 = 1e-4;
const MAX_HALVINGS: usize = 60;

/// Minimise the discrete energy of `prob`, continuing in `ε` from `1e-1` down
/// to the problem's final `ε`.
///
/// Continuation is skipped for `p = 2` (the energy does not depend on `ε`) and
/// when a nonzero warm start is supplied. Exhausting the iteration budget
/// yields a report with `converged = false`, never an error.
pub fn inner_solve(prob: &InnerProblem) -> Result<SolveReport> {
    prob.validate()?;
    let mesh = &prob.mesh;
    let warm = prob.warm_start.as_ref().filter(|w| w.iter().any(|&x| x != 0.0));
    let mut v: Vec<f64> = match warm {
        Some(w) => w.iter().zip(mesh.boundary_flags()).map(|(&x, &b)| if b { 0.0 } else { x }).collect(),
        None => vec![0.0; mesh.num_nodes()],
    };
    let stages = eps_schedule(prob.p, prob.eps, warm.is_some());
    let mut trace = Vec::with_capacity(stages.len());
    let mut used = 0;
    for (k, &eps) in stages.iter().enumerate() {
        let last = k + 1 == stages.len();
        let tol = if last { prob.tol } else { prob.tol.max(STAGE_TOL.min(eps)) };
        let stage = newton_stage(prob, &mut v, eps, tol, prob.max_iter - used);
        used += stage.iterations;
        let stop = !last && used >= prob.max_iter;
        trace.push(stage);
        if stop {
            break;
        }
    }
    let energy = energy_at(mesh, &v, prob, prob.eps);
    let grad_norm = l2(&gradient_dofs(mesh, &v, prob, prob.eps));
    let converged = trace.len() == stages.len() && trace.last().is_some_and(|s| s.converged);
    Ok(SolveReport {
        solution: FeFunction::new(mesh.clone(), v)?,
        energy,
        grad_norm,
        iterations: used,
        converged,
        trace,
    })
}

fn eps_schedule(p: f64, eps_final: f64, warm: bool) -> Vec<f64> {
    let mut out = Vec::new();
    if p != 2.0 && !warm {
        // an exact ε = 0 target is approached down to 1e-12 first
        let floor = 10.0 * eps_final.max(1e-13);
        let mut e = 0.1;
        while e > floor {
            out.push(e);
            e *= 0.1;
        }
    }
    out.push(eps_final);
    out
}

fn l2(x: &[f64]) -> f64 {
    x.iter().map(|a| a * a).sum::<f64>().sqrt()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn newton_stage(prob: &InnerProblem, v: &mut [f64], eps: f64, tol: f64, budget: usize) -> StageTrace {
    let mesh = &prob.mesh;
    let space = mesh.fem_space();
    let nodes = &space.node_of_dof;
    let mut hess = space.pattern.clone();
    let mut trial = v.to_vec();
    // previous (iterate, gradient) for Barzilai–Borwein steps
    let mut history: Option<(Vec<f64>, Vec<f64>)> = None;
    let mut iterations = 0;
    loop {
        let e = energy_at(mesh, v, prob, eps);
        let g = gradient_dofs(mesh, v, prob, eps);
        let gn = l2(&g);
        let done = gn <= tol * (1.0 + e.abs());
        if done || iterations >= budget || !e.is_finite() {
            return StageTrace { eps, iterations, energy: e, grad_norm: gn, converged: done };
        }
        iterations += 1;

        assemble_hessian(&mut hess, prob, v, eps);
        let mut d: Vec<f64> = g.iter().map(|x| -x).collect();
        let newton = hess.factor().is_ok();
        if newton {
            hess.solve_in_place(&mut d);
        } else {
            let x: Vec<f64> = nodes.iter().map(|&n| v[n]).collect();
            let step = match &history {
                Some((x0, g0)) => {
                    let s: Vec<f64> = x.iter().zip(x0).map(|(a, b)| a - b).collect();
                    let y: Vec<f64> = g.iter().zip(g0).map(|(a, b)| a - b).collect();
                    let sy = dot(&s, &y);
                    if sy > 0.0 {
                        dot(&s, &s) / sy
                    } else {
                        1.0
                    }
                }
                None => 1.0,
            };
            d.iter_mut().for_each(|x| *x *= step);
        }
        let mut slope = dot(&g, &d);
        if !(slope < 0.0) {
            d = g.iter().map(|x| -x).collect();
            slope = -gn * gn;
        }
        history = Some((nodes.iter().map(|&n| v[n]).collect(), g));

        let roundoff = slope.abs() < ROUNDOFF_SLOPE * (1.0 + e.abs());
        let mut alpha = 1.0;
        let mut accepted = false;
        for _ in 0..MAX_HALVINGS {
            for (k, &n) in nodes.iter().enumerate() {
                trial[n] = v[n] + alpha * d[k];
            }
            let et = energy_at(mesh, &trial, prob, eps);
            if et <= e + ARMIJO * alpha * slope || (roundoff && et.is_finite()) {
                accepted = true;
                break;
            }
            alpha *= 0.5;
        }
        if !accepted {
            // no representable decrease along a descent direction: stalled
            let gn_now = l2(&gradient_dofs(mesh, v, prob, eps));
            return StageTrace {
                eps,
                iterations,
                energy: e,
                grad_norm: gn_now,
                converged: gn_now <= tol * (1.0 + e.abs()),
            };
        }
        v.copy_from_slice(&trial);
    }
}

fn assemble_hessian(hess: &mut Skyline, prob: &InnerProblem, v: &[f64], eps: f64) {
    let mesh = &prob.mesh;
    let space = mesh.fem_space();
    let p = prob.p;
    let e2 = eps * eps;
    hess.clear();
    for (t, tri) in mesh.triangles().iter().enumerate() {
        let g = space.grad(tri, t, v);
        let s = g[0] * g[0] + g[1] * g[1] + e2;
        let w = flux_weight(s, p);
        let c = if p == 2.0 { 0.0 } else { (p - 2.0) * s.powf(0.5 * (p - 4.0)) };
        let phi = &space.grads[t];
        let gp = [0, 1, 2].map(|k| g[0] * phi[k][0] + g[1] * phi[k][1]);
        let area = space.areas[t];
        for a in 0..3 {
            let da = space.dof_of_node[tri[a]];
            if da == NO_DOF {
                continue;
            }
            for b in 0..=a {
                let db = space.dof_of_node[tri[b]];
                if db == NO_DOF {
                    continue;
                }
                let k = w * (phi[a][0] * phi[b][0] + phi[a][1] * phi[b][1]) + c * gp[a] * gp[b];
                hess.add(da, db, area * k);
            }
        }
    }
    if prob.lambda != 0.0 {
        for (d, &n) in space.node_of_dof.iter().enumerate() {
            let vi = v[n];
            let curv = if p < 2.0 {
                (vi * vi + e2).powf(0.5 * (p - 2.0))
            } else if p == 2.0 {
                1.0
            } else {
                vi.abs().powf(p - 2.0)
            };
            hess.add(d, d, prob.lambda * space.lumped[n] * (p - 1.0) * curv);
        }
    }
}
