//! Numerical checks of integral identities, inequalities and qualitative
//! properties (positivity at the boundary, monotonicity near the boundary,
//! ordering) on computed solutions.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::eigen::EigenPair;
use crate::fem::{gradient_lp_norm, inner_solve, InnerProblem};
use crate::geometry::{dot, norm, sub, unit_sphere_area, FeFunction, Mesh, RadialProfile};
use crate::nonlinearity::Nonlinearity;
use crate::radial::radial_shoot;
use crate::{Error, Result};

/// Denominator floor of relative residuals.
pub const RESIDUAL_FLOOR: f64 = 1e-12;
/// Nodes with `u` below this fraction of `‖u‖_∞` are skipped by [`picone_value`].
pub const PICONE_FLOOR: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    Inconclusive,
}

/// Outcome of one check: the two sides compared and the verdict.
#[derive(Clone, Debug, Serialize)]
pub struct IdentityReport {
    pub name: String,
    pub left: f64,
    pub right: f64,
    /// `left − right`.
    pub residual: f64,
    /// `|left − right| / max(|left|, |right|, floor)`.
    pub relative_residual: f64,
    pub tolerance: f64,
    pub status: Status,
    pub notes: Vec<String>,
}

impl IdentityReport {
    fn base(name: &str, left: f64, right: f64, tolerance: f64) -> Self {
        let residual = left - right;
        let relative_residual = residual.abs() / left.abs().max(right.abs()).max(RESIDUAL_FLOOR);
        IdentityReport {
            name: name.into(),
            left,
            right,
            residual,
            relative_residual,
            tolerance,
            status: Status::Inconclusive,
            notes: Vec::new(),
        }
    }

    /// Passes iff the relative residual is within `tolerance`.
    pub fn equality(name: &str, left: f64, right: f64, tolerance: f64) -> Self {
        let mut r = Self::base(name, left, right, tolerance);
        r.status = if r.relative_residual <= tolerance { Status::Pass } else { Status::Fail };
        r
    }

    /// Passes iff `left ≤ right·(1 + tolerance)`.
    pub fn upper_bound(name: &str, left: f64, right: f64, tolerance: f64) -> Self {
        let mut r = Self::base(name, left, right, tolerance);
        r.status = if left <= right + tolerance * right.abs() { Status::Pass } else { Status::Fail };
        r
    }

    fn with_status(mut self, status: Status) -> Self {
        self.status = status;
        self
    }

    fn note(mut self, s: impl Into<String>) -> Self {
        self.notes.push(s.into());
        self
    }

    pub fn passed(&self) -> bool {
        self.status == Status::Pass
    }
}

fn check_p(p: f64) -> Result<()> {
    if !(p > 1.0) || !p.is_finite() {
        return Err(Error::InvalidParameter(format!("p must be > 1 (got {p})")));
    }
    Ok(())
}

fn same_mesh(a: &FeFunction, b: &FeFunction) -> Result<()> {
    if !Arc::ptr_eq(a.mesh(), b.mesh()) && a.values().len() != b.values().len() {
        return Err(Error::InvalidInput("functions live on different meshes".into()));
    }
    Ok(())
}

/// Inward normal derivative of `u` on every boundary edge, from the adjacent
/// element's constant gradient, with the edge itself.
fn boundary_derivatives(u: &FeFunction) -> Vec<(f64, crate::geometry::BoundaryEdge)> {
    u.mesh()
        .boundary_edges()
        .into_iter()
        .map(|e| {
            let g = u.gradient(e.triangle);
            (-dot(g, e.normal), e)
        })
        .collect()
}

/// Pohozaev identity in the plane:
/// `N∫F(u) − ((N−p)/p)∫f(u)u = ((p−1)/p)∮|∂u/∂ν|^p (x·ν)` with `N = 2`.
///
/// Volume integrals use the edge-midpoint rule on each element; `x` is
/// measured from the domain centroid and `∂u/∂ν` comes from the element
/// adjacent to each boundary edge.
pub fn pohozaev_residual(u: &FeFunction, f: &Nonlinearity, p: f64, tol: f64) -> Result<IdentityReport> {
    check_p(p)?;
    let mesh = u.mesh();
    let v = u.values();
    let n = 2.0;
    let mut left = 0.0;
    for (t, tri) in mesh.triangles().iter().enumerate() {
        let area = mesh.triangle_area(t);
        let mut s = 0.0;
        for k in 0..3 {
            let w = 0.5 * (v[tri[k]] + v[tri[(k + 1) % 3]]);
            s += n * f.primitive(w) - (n - p) / p * f.f(w) * w;
        }
        left += area * s / 3.0;
    }
    let origin = mesh.domain().centroid();
    let mut right = 0.0;
    let mut nonstar = 0;
    for (d, e) in boundary_derivatives(u) {
        let xn = dot(sub(e.midpoint, origin), e.normal);
        if xn <= 0.0 {
            nonstar += 1;
        }
        right += d.abs().powf(p) * xn * e.length;
    }
    right *= (p - 1.0) / p;
    let mut r = IdentityReport::equality("pohozaev", left, right, tol).note("x·ν measured from the domain centroid");
    if nonstar > 0 {
        r = r.note(format!("{nonstar} boundary edges with x·ν <= 0"));
    }
    Ok(r)
}

/// Radial Pohozaev identity on the ball `B_R ⊂ R^N`:
/// `N∫F(u) − ((N−p)/p)∫f(u)u = ((p−1)/p)|u′(R)|^p·R·|∂B_R|`.
pub fn pohozaev_radial(profile: &RadialProfile, f: &Nonlinearity, p: f64, tol: f64) -> Result<IdentityReport> {
    check_p(p)?;
    let n = profile.dim();
    let nf = n as f64;
    let v = profile.values();
    let dr = profile.step();
    let m = v.len() - 1;
    // composite trapezoid in r with the weight r^{N−1}
    let mut left = 0.0;
    for (i, r) in profile.radii().enumerate() {
        let w = if i == 0 || i == m { 0.5 } else { 1.0 };
        left += w * r.powi(n as i32 - 1) * (nf * f.primitive(v[i]) - (nf - p) / p * f.f(v[i]) * v[i]);
    }
    left *= dr * unit_sphere_area(n);
    let slope = (3.0 * v[m] - 4.0 * v[m - 1] + v[m - 2]) / (2.0 * dr);
    let big_r = profile.radius();
    let right = (p - 1.0) / p * slope.abs().powf(p) * big_r * unit_sphere_area(n) * big_r.powi(n as i32 - 1);
    Ok(IdentityReport::equality("pohozaev-radial", left, right, tol))
}

/// Pohozaev check of the critical power `u^{p*−1}` on the ball `B_R ⊂ R^N`.
///
/// The entire positive solution from `u(0) = 1` never vanishes, so the
/// candidate is that solution shifted down by its value at `R`. For the
/// critical power `p*F(s) = s f(s)`, which makes the volume side vanish
/// identically while the boundary side stays positive: the report fails, which
/// is the expected obstruction to existence.
pub fn critical_obstruction_check(p: f64, n: usize, big_r: f64) -> Result<IdentityReport> {
    check_p(p)?;
    if !(p < n as f64) {
        return Err(Error::InvalidParameter(format!("critical exponent needs p < N (got p = {p}, N = {n})")));
    }
    let f = Nonlinearity::critical_power(p, n)?;
    let shot = radial_shoot(p, n, &f, 1.0, big_r)?;
    if shot.r0.is_some() {
        return Err(Error::InvalidInput("critical shot crossed zero inside the ball".into()));
    }
    let intervals = crate::radial::PROFILE_INTERVALS;
    let dr = big_r / intervals as f64;
    let mut values = Vec::with_capacity(intervals + 1);
    let mut j = 0;
    for i in 0..=intervals {
        let r = i as f64 * dr;
        while j + 2 < shot.radii.len() && shot.radii[j + 1] < r {
            j += 1;
        }
        let (a, b) = (shot.radii[j], shot.radii[j + 1]);
        let t = ((r - a) / (b - a)).clamp(0.0, 1.0);
        values.push((1.0 - t) * shot.values[j] + t * shot.values[j + 1]);
    }
    let shift = *values.last().unwrap();
    values.iter_mut().for_each(|x| *x -= shift);
    *values.last_mut().unwrap() = 0.0;
    let profile = RadialProfile::new(n, big_r, values)?;
    let rep = pohozaev_radial(&profile, &f, p, 1e-3)?;
    let mut rep = rep.note("critical power: the volume side vanishes identically for every candidate");
    rep.name = "pohozaev-critical".into();
    Ok(rep)
}

/// `∫ f(u)/u^{p−1}·φ₁^p` (lumped, interior nodes) against `λ₁`; passes iff the
/// value is at most `λ₁·(1 + tol)`.
///
/// Nodes where `u < 1e-12‖u‖_∞` contribute nothing and are counted in the notes.
pub fn picone_value(u: &FeFunction, f: &Nonlinearity, p: f64, eig: &EigenPair, tol: f64) -> Result<IdentityReport> {
    check_p(p)?;
    same_mesh(u, &eig.phi)?;
    let mesh = u.mesh();
    let floor = PICONE_FLOOR * u.sup_norm();
    let masses = u.lumped_masses();
    let mut value = 0.0;
    let mut skipped = 0;
    for (i, (&ui, &phi)) in u.values().iter().zip(eig.phi.values()).enumerate() {
        if mesh.is_boundary(i) {
            continue;
        }
        if !(ui > 0.0) {
            return Err(Error::InvalidInput(format!("u is not positive at interior node {i}")));
        }
        if ui < floor {
            skipped += 1;
            continue;
        }
        value += masses[i] * f.f(ui) * phi.abs().powf(p) / ui.powf(p - 1.0);
    }
    let mut r = IdentityReport::upper_bound("picone", value, eig.lambda, tol);
    if skipped > 0 {
        r = r.note(format!("{skipped} interior nodes below the positivity floor"));
    }
    Ok(r)
}

/// `∫|∇u|^p = ∫f(u)u` (lumped right-hand side).
pub fn energy_identity_residual(u: &FeFunction, f: &Nonlinearity, p: f64, tol: f64) -> Result<IdentityReport> {
    check_p(p)?;
    let left = gradient_lp_norm(u, p)?.powf(p);
    let right = u.lumped_integral(|s| f.f(s) * s);
    Ok(IdentityReport::equality("energy", left, right, tol))
}

/// Weak comparison: solve `−Δ_p v_k = g_k` (nodal loads) and check
/// `v₁ ≤ v₂ + tol·max(‖v₂‖_∞, 1)` at every node.
pub fn comparison_check(g1: &[f64], g2: &[f64], p: f64, mesh: &Arc<Mesh>, tol: f64) -> Result<IdentityReport> {
    check_p(p)?;
    if g1.len() != mesh.num_nodes() || g2.len() != mesh.num_nodes() {
        return Err(Error::InvalidInput("load length differs from the node count".into()));
    }
    if g1.iter().zip(g2).any(|(a, b)| !(*a >= 0.0 && a <= b)) {
        return Err(Error::InvalidInput("loads must satisfy 0 <= g1 <= g2".into()));
    }
    let r1 = inner_solve(&InnerProblem::new(mesh.clone(), p, g1.to_vec())?)?;
    let r2 = inner_solve(&InnerProblem::new(mesh.clone(), p, g2.to_vec())?)?;
    let worst = r1
        .solution
        .values()
        .iter()
        .zip(r2.solution.values())
        .map(|(a, b)| a - b)
        .fold(f64::NEG_INFINITY, f64::max);
    let slack = tol * r2.solution.sup_norm().max(1.0);
    let mut r = IdentityReport::base("comparison", worst, 0.0, tol);
    r.status = if !(r1.converged && r2.converged) {
        r.notes.push("an inner solve did not converge".into());
        Status::Inconclusive
    } else if worst <= slack {
        Status::Pass
    } else {
        Status::Fail
    };
    Ok(r)
}

/// Minimum inward normal derivative over boundary edges not touching a
/// polygon corner; passes iff it is positive.
pub fn hopf_boundary_check(u: &FeFunction) -> IdentityReport {
    let mesh = u.mesh();
    let domain = mesh.domain();
    let tol = 1e-9 * domain.diameter();
    let nodes = mesh.nodes();
    let mut min = f64::INFINITY;
    let mut used = 0;
    for (d, e) in boundary_derivatives(u) {
        if domain.is_corner(nodes[e.a], tol) || domain.is_corner(nodes[e.b], tol) {
            continue;
        }
        used += 1;
        min = min.min(d);
    }
    if used == 0 {
        return IdentityReport::base("hopf", f64::NAN, 0.0, 0.0)
            .with_status(Status::Inconclusive)
            .note("no boundary edge away from corners");
    }
    let mut r = IdentityReport::base("hopf", min, 0.0, 0.0);
    r.status = if min > 0.0 { Status::Pass } else { Status::Fail };
    r.note(format!("{used} boundary edges, element-gradient normal derivative"))
}

/// Settings of [`monotonicity_diagnostic`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConeSettings {
    /// Width of the boundary strip, as a fraction of the inradius.
    pub strip_fraction: f64,
    /// Cone half-angle in degrees.
    pub half_angle_deg: f64,
    /// Allowed violation relative to `‖u‖_∞`.
    pub tol: f64,
}

impl Default for ConeSettings {
    fn default() -> Self {
        ConeSettings { strip_fraction: 0.2, half_angle_deg: 30.0, tol: 1e-3 }
    }
}

/// Near-boundary monotonicity: for each node `x` within `ε` of the boundary,
/// every node `ξ` in the cone of half-angle `θ` about the inward normal at `x`
/// with `|ξ − x| ≤ ε` and `dist(ξ, ∂Ω) > dist(x, ∂Ω)` must satisfy
/// `u(ξ) ≥ u(x) − tol·‖u‖_∞`. The residual is the worst violation.
pub fn monotonicity_diagnostic(u: &FeFunction, settings: &ConeSettings) -> Result<IdentityReport> {
    if !(settings.strip_fraction > 0.0) || !(settings.half_angle_deg > 0.0 && settings.half_angle_deg < 90.0) {
        return Err(Error::InvalidParameter("cone needs a positive strip and a half-angle in (0°, 90°)".into()));
    }
    let mesh = u.mesh();
    let domain = mesh.domain();
    let eps = settings.strip_fraction * domain.inradius();
    let cos_half = settings.half_angle_deg.to_radians().cos();
    let nodes = mesh.nodes();
    let v = u.values();
    let dist: Vec<f64> = nodes.iter().map(|&x| domain.distance_to_boundary(x)).collect();
    let slack = settings.tol * u.sup_norm();
    let mut worst = 0.0f64;
    let mut checked = 0;
    let mut empty = 0;
    for (i, &x) in nodes.iter().enumerate() {
        if dist[i] >= eps {
            continue;
        }
        let nu = domain.inward_normal(x);
        let mut any = false;
        for (j, &xi) in nodes.iter().enumerate() {
            if dist[j] <= dist[i] {
                continue;
            }
            let d = sub(xi, x);
            let len = norm(d);
            if len > eps || dot(d, nu) < cos_half * len {
                continue;
            }
            any = true;
            worst = worst.max(v[i] - v[j]);
        }
        checked += 1;
        if !any {
            empty += 1;
        }
    }
    let mut r = IdentityReport::base("monotone", worst, slack, settings.tol);
    r.status = if worst > slack {
        Status::Fail
    } else if checked == 0 || empty > 0 {
        Status::Inconclusive
    } else {
        Status::Pass
    };
    Ok(r.note(format!(
        "{checked} strip nodes, {empty} empty cones, strip width {eps:.4}, half-angle {}°",
        settings.half_angle_deg
    )))
}

/// Boundary gradient bound by comparison with a multiple of the discrete
/// torsion function `v` on the same mesh.
///
/// In the strip `dist < δ` the solution is dominated by `N·v` with
/// `N = max(M^{1/(p−1)}, M / min_{dist ≥ δ} v)`, where `M` bounds `u` and
/// `f(u)` on the strip; the check passes iff the largest inward normal
/// derivative of `u` is at most `N·max|∇v|` on the boundary, times `1 + tol`.
pub fn boundary_gradient_bound(u: &FeFunction, f: &Nonlinearity, p: f64, delta: f64, tol: f64) -> Result<IdentityReport> {
    check_p(p)?;
    if !(delta > 0.0) {
        return Err(Error::InvalidParameter(format!("strip width must be positive (got {delta})")));
    }
    let mesh = u.mesh();
    let domain = mesh.domain();
    let dist: Vec<f64> = mesh.nodes().iter().map(|&x| domain.distance_to_boundary(x)).collect();
    let mut m = 0.0f64;
    for (i, &ui) in u.values().iter().enumerate() {
        if dist[i] < delta {
            m = m.max(ui.abs()).max(f.f(ui).abs());
        }
    }
    let torsion = inner_solve(&InnerProblem::new(mesh.clone(), p, vec![1.0; mesh.num_nodes()])?)?;
    let v = &torsion.solution;
    let v_inner = v
        .values()
        .iter()
        .zip(&dist)
        .filter(|(_, d)| **d >= delta)
        .map(|(x, _)| *x)
        .fold(f64::INFINITY, f64::min);
    if !(v_inner > 0.0) || !v_inner.is_finite() {
        return Ok(IdentityReport::base("boundary-gradient", f64::NAN, f64::NAN, tol)
            .with_status(Status::Inconclusive)
            .note("torsion function not positive on the inner boundary of the strip"));
    }
    let scale = m.powf(1.0 / (p - 1.0)).max(m / v_inner);
    let du = boundary_derivatives(u).into_iter().map(|(d, _)| d).fold(0.0f64, f64::max);
    let dv = boundary_derivatives(v).into_iter().map(|(d, _)| d.abs()).fold(0.0f64, f64::max);
    Ok(IdentityReport::upper_bound("boundary-gradient", du, scale * dv, tol)
        .note(format!("comparison scale {scale:.6e}, strip width {delta}")))
}
