use std::sync::Arc;

use plapd_core::eigen::{first_eigenpair, rayleigh};
use plapd_core::geometry::{mesh_disc, mesh_polygon, refine, Domain, FeFunction, Mesh};
use plapd_core::radial::radial_eigen;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn disc(r: f64, h: f64) -> Arc<Mesh> {
    Arc::new(mesh_disc(r, h).unwrap())
}

#[test]
fn disc_eigenvalues_match_the_radial_oracle() {
    let exact = radial_eigen(2.0, 2, 1.0).unwrap();
    let pair = first_eigenpair(2.0, &disc(1.0, 0.05), 1e-9).unwrap();
    assert!(pair.converged);
    assert!((pair.lambda / exact - 1.0).abs() < 0.02);
    let big = first_eigenpair(2.0, &disc(2.0, 0.1), 1e-9).unwrap();
    assert!((big.lambda / (pair.lambda / 4.0) - 1.0).abs() < 0.02);
    let three = first_eigenpair(3.0, &disc(1.0, 0.05), 1e-9).unwrap();
    assert!((three.lambda / radial_eigen(3.0, 2, 1.0).unwrap() - 1.0).abs() < 0.03);
}

#[test]
fn eigenfunction_is_positive_and_normalised() {
    for p in [1.5, 2.0, 3.0] {
        let mesh = disc(1.0, 0.1);
        let pair = first_eigenpair(p, &mesh, 1e-9).unwrap();
        assert!(pair.converged, "p = {p}");
        assert!((pair.phi.lumped_lp_power(p) - 1.0).abs() < 1e-12);
        for (i, &v) in pair.phi.values().iter().enumerate() {
            if mesh.is_boundary(i) {
                assert_eq!(v, 0.0);
            } else {
                assert!(v > 0.0, "p = {p}: node {i}");
            }
        }
        assert!(pair.trace.windows(2).skip(1).all(|w| w[1] <= w[0] * (1.0 + 1e-10)), "{:?}", pair.trace);
    }
}

#[test]
fn refinement_converges_monotonically_to_the_oracle() {
    // lumped mass places the discrete values below λ₁, so they increase towards it
    for p in [2.0, 3.0] {
        let exact = radial_eigen(p, 2, 1.0).unwrap();
        let mut mesh = disc(1.0, 0.2);
        let mut prev_err = f64::INFINITY;
        for _ in 0..3 {
            let l = first_eigenpair(p, &mesh, 1e-10).unwrap().lambda;
            let err = (l - exact).abs();
            assert!(err < prev_err + 1e-3, "p = {p}");
            prev_err = err;
            mesh = Arc::new(refine(&mesh));
        }
        assert!(prev_err / exact < 0.01);
    }
}

#[test]
fn scaling_the_mesh_scales_the_eigenvalue() {
    let hex = Domain::regular_polygon(6, 1.0).unwrap();
    let Domain::ConvexPolygon { vertices } = &hex else { unreachable!() };
    let mesh = Arc::new(mesh_polygon(vertices, 0.1).unwrap());
    let big = Arc::new(mesh.scaled(2.0));
    for p in [2.0, 3.0] {
        let a = first_eigenpair(p, &mesh, 1e-10).unwrap().lambda;
        let b = first_eigenpair(p, &big, 1e-10).unwrap().lambda;
        assert!((b * 2f64.powf(p) / a - 1.0).abs() < 0.01);
    }
}

#[test]
fn rayleigh_quotient_is_minimal_at_the_eigenfunction() {
    let mesh = disc(1.0, 0.1);
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for p in [2.0, 3.0] {
        let pair = first_eigenpair(p, &mesh, 1e-10).unwrap();
        assert!((rayleigh(&pair.phi, p).unwrap() - pair.lambda).abs() < 1e-10 * pair.lambda);
        for _ in 0..50 {
            let (a, b, c) = (rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(0.0..3.0));
            let v = FeFunction::dirichlet(
                mesh.clone(),
                mesh.nodes()
                    .iter()
                    .map(|x| (1.0 - x[0] * x[0] - x[1] * x[1]).max(0.0) * (1.0 + a * x[0] + b * x[1] + c * x[0] * x[1]))
                    .collect(),
            )
            .unwrap();
            assert!(rayleigh(&v, p).unwrap() >= pair.lambda * (1.0 - 1e-9));
        }
    }
}
