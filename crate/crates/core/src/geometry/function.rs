use std::sync::Arc;

use super::domain::{norm, Domain};
use super::mesh::Mesh;
use crate::{Error, Result};

/// Nodal P1 function on a shared mesh.
#[derive(Clone, Debug)]
pub struct FeFunction {
    mesh: Arc<Mesh>,
    values: Vec<f64>,
}

impl FeFunction {
    pub fn new(mesh: Arc<Mesh>, values: Vec<f64>) -> Result<Self> {
        if values.len() != mesh.num_nodes() {
            return Err(Error::InvalidInput(format!(
                "{} nodal values for a mesh with {} nodes",
                values.len(),
                mesh.num_nodes()
            )));
        }
        Ok(FeFunction { mesh, values })
    }

    /// Values with boundary entries forced to exactly zero.
    pub fn dirichlet(mesh: Arc<Mesh>, mut values: Vec<f64>) -> Result<Self> {
        if values.len() != mesh.num_nodes() {
            return Self::new(mesh, values);
        }
        for (v, &b) in values.iter_mut().zip(mesh.boundary_flags()) {
            if b {
                *v = 0.0;
            }
        }
        Ok(FeFunction { mesh, values })
    }

    pub fn zeros(mesh: Arc<Mesh>) -> Self {
        let n = mesh.num_nodes();
        FeFunction { mesh, values: vec![0.0; n] }
    }

    /// Nodal interpolant of `g`, zeroed on the boundary.
    pub fn from_fn(mesh: Arc<Mesh>, g: impl Fn([f64; 2]) -> f64) -> Self {
        let values = mesh
            .nodes()
            .iter()
            .zip(mesh.boundary_flags())
            .map(|(x, &b)| if b { 0.0 } else { g(*x) })
            .collect();
        FeFunction { mesh, values }
    }

    pub fn mesh(&self) -> &Arc<Mesh> {
        &self.mesh
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn is_dirichlet_zero(&self) -> bool {
        self.values.iter().zip(self.mesh.boundary_flags()).all(|(v, &b)| !b || *v == 0.0)
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn scaled(&self, s: f64) -> FeFunction {
        FeFunction { mesh: self.mesh.clone(), values: self.values.iter().map(|v| v * s).collect() }
    }

    pub fn map(&self, g: impl Fn(f64) -> f64) -> FeFunction {
        FeFunction { mesh: self.mesh.clone(), values: self.values.iter().map(|&v| g(v)).collect() }
    }

    /// Constant gradient on triangle `t`.
    pub fn gradient(&self, t: usize) -> [f64; 2] {
        let space = self.mesh.fem_space();
        let tri = self.mesh.triangles()[t];
        let g = &space.grads[t];
        let mut out = [0.0; 2];
        for k in 0..3 {
            out[0] += self.values[tri[k]] * g[k][0];
            out[1] += self.values[tri[k]] * g[k][1];
        }
        out
    }

    /// `∫ |v|^q` with lumped (vertex) quadrature.
    pub fn lumped_lp_power(&self, q: f64) -> f64 {
        let m = &self.mesh.fem_space().lumped;
        self.values.iter().zip(m).map(|(v, mi)| mi * v.abs().powf(q)).sum()
    }

    /// Lumped `∫ g(v)`.
    pub fn lumped_integral(&self, g: impl Fn(f64) -> f64) -> f64 {
        let m = &self.mesh.fem_space().lumped;
        self.values.iter().zip(m).map(|(&v, mi)| mi * g(v)).sum()
    }

    pub fn lumped_masses(&self) -> &[f64] {
        &self.mesh.fem_space().lumped
    }
}

/// Radial function on `[0, R]` sampled on a uniform grid, vanishing at `R`.
#[derive(Clone, Debug)]
pub struct RadialProfile {
    dim: usize,
    radius: f64,
    values: Vec<f64>,
}

impl RadialProfile {
    /// Relative slack on the origin symmetry condition `|u_1 - u_0| <= tol·Δr`.
    pub const SYMMETRY_TOL: f64 = 0.1;
    /// Relative slack on `u(R) = 0`.
    pub const BOUNDARY_TOL: f64 = 1e-6;

    pub fn new(dim: usize, radius: f64, values: Vec<f64>) -> Result<Self> {
        if dim < 2 || !(radius > 0.0) {
            return Err(Error::InvalidParameter(format!("radial profile needs N >= 2, R > 0 (got {dim}, {radius})")));
        }
        if values.len() < 3 {
            return Err(Error::InvalidInput("radial profile needs at least 3 samples".into()));
        }
        let scale = values.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(f64::MIN_POSITIVE);
        let last = *values.last().unwrap();
        if last.abs() > Self::BOUNDARY_TOL * scale {
            return Err(Error::InvalidInput(format!("radial profile does not vanish at R (u_M = {last:e})")));
        }
        let dr = radius / (values.len() - 1) as f64;
        if (values[1] - values[0]).abs() > Self::SYMMETRY_TOL * scale / radius * dr {
            return Err(Error::InvalidInput("radial profile has a kink at the origin".into()));
        }
        Ok(RadialProfile { dim, radius, values })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn step(&self) -> f64 {
        self.radius / (self.values.len() - 1) as f64
    }

    pub fn radii(&self) -> impl Iterator<Item = f64> + '_ {
        let dr = self.step();
        (0..self.values.len()).map(move |i| i as f64 * dr)
    }

    /// Piecewise-linear evaluation, clamped to `[0, R]`.
    pub fn eval(&self, r: f64) -> f64 {
        let dr = self.step();
        let s = (r / dr).clamp(0.0, (self.values.len() - 1) as f64);
        let i = (s.floor() as usize).min(self.values.len() - 2);
        let t = s - i as f64;
        (1.0 - t) * self.values[i] + t * self.values[i + 1]
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

/// Nodal values `u(|x_i|)` of a radial profile on a disc mesh of the same radius.
pub fn interpolate_radial(profile: &RadialProfile, mesh: &Arc<Mesh>) -> Result<FeFunction> {
    let Domain::Ball { radius, .. } = mesh.domain() else {
        return Err(Error::InvalidParameter("radial interpolation needs a disc mesh".into()));
    };
    if (radius - profile.radius()).abs() > 1e-12 * radius {
        return Err(Error::InvalidParameter(format!(
            "profile radius {} differs from disc radius {radius}",
            profile.radius()
        )));
    }
    Ok(FeFunction::from_fn(mesh.clone(), |x| profile.eval(norm(x))))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{mesh_disc, refine};

    fn torsion(r: f64) -> f64 {
        0.25 * (1.0 - r * r)
    }

    fn torsion_profile(m: usize) -> RadialProfile {
        let vals = (0..=m).map(|i| torsion(i as f64 / m as f64)).collect();
        RadialProfile::new(2, 1.0, vals).unwrap()
    }

    #[test]
    fn constant_profile_is_rejected() {
        assert!(RadialProfile::new(2, 1.0, vec![1.0; 50]).is_err());
    }

    #[test]
    fn kinked_profile_is_rejected() {
        let vals: Vec<f64> = (0..=100).map(|i| 1.0 - i as f64 / 100.0).collect();
        assert!(RadialProfile::new(2, 1.0, vals).is_err());
    }

    #[test]
    fn radius_mismatch_is_rejected() {
        let mesh = Arc::new(mesh_disc(2.0, 0.5).unwrap());
        assert!(matches!(interpolate_radial(&torsion_profile(100), &mesh), Err(Error::InvalidParameter(_))));
    }

    #[test]
    fn interpolated_torsion_peaks_near_origin() {
        let mesh = Arc::new(mesh_disc(1.0, 0.1).unwrap());
        let u = interpolate_radial(&torsion_profile(400), &mesh).unwrap();
        let imax = (0..mesh.num_nodes()).max_by(|&a, &b| u.values()[a].total_cmp(&u.values()[b])).unwrap();
        let nearest = (0..mesh.num_nodes())
            .min_by(|&a, &b| norm(mesh.nodes()[a]).total_cmp(&norm(mesh.nodes()[b])))
            .unwrap();
        assert_eq!(imax, nearest);
        assert!(u.is_dirichlet_zero());
    }

    #[test]
    fn interpolation_preserves_radial_order() {
        let mesh = Arc::new(mesh_disc(1.0, 0.1).unwrap());
        let u = interpolate_radial(&torsion_profile(400), &mesh).unwrap();
        let mut pairs: Vec<(f64, f64)> = mesh.nodes().iter().map(|x| norm(*x)).zip(u.values().iter().copied()).collect();
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        for w in pairs.windows(2) {
            assert!(w[1].1 <= w[0].1 + 1e-12);
        }
    }

    #[test]
    fn interpolation_error_drops_under_mesh_refinement() {
        let profile = torsion_profile(20_000);
        // L∞ error of the P1 interpolant, sampled at triangle centroids
        let err = |mesh: &Arc<Mesh>| {
            let u = interpolate_radial(&profile, mesh).unwrap();
            mesh.triangles()
                .iter()
                .map(|t| {
                    let c = [0, 1].map(|d| t.iter().map(|&i| mesh.nodes()[i][d]).sum::<f64>() / 3.0);
                    let uh = t.iter().map(|&i| u.values()[i]).sum::<f64>() / 3.0;
                    (uh - torsion(norm(c))).abs()
                })
                .fold(0.0, f64::max)
        };
        let m0 = Arc::new(mesh_disc(1.0, 0.2).unwrap());
        let m1 = Arc::new(refine(&m0));
        let m2 = Arc::new(refine(&m1));
        for (a, b) in [(err(&m0), err(&m1)), (err(&m1), err(&m2))] {
            let ratio = a / b;
            assert!((2.0..=4.5).contains(&ratio), "ratio {ratio}");
        }
    }
}
