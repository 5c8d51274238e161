use std::sync::Arc;

use plapd_core::fem::{energy, energy_gradient, gradient_lp_norm, inner_solve, InnerProblem};
use plapd_core::geometry::{mesh_disc, mesh_polygon, refine, Domain, FeFunction, Mesh};
use plapd_core::radial::torsion_exact;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn disc(h: f64) -> Arc<Mesh> {
    Arc::new(mesh_disc(1.0, h).unwrap())
}

fn two_triangle_square() -> Arc<Mesh> {
    let nodes = vec![[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]];
    let tris = vec![[0, 1, 2], [0, 2, 3]];
    Arc::new(Mesh::from_parts(Domain::unit_square(), nodes, tris, vec![true; 4]).unwrap())
}

fn torsion_error(mesh: &Arc<Mesh>, p: f64) -> f64 {
    let rep = inner_solve(&InnerProblem::new(mesh.clone(), p, vec![1.0; mesh.num_nodes()]).unwrap()).unwrap();
    assert!(rep.converged);
    let peak = torsion_exact(p, 2, 0.0).unwrap();
    mesh.nodes()
        .iter()
        .zip(rep.solution.values())
        .map(|(x, u)| (u - torsion_exact(p, 2, x[0].hypot(x[1]).min(1.0)).unwrap()).abs())
        .fold(0.0, f64::max)
        / peak
}

#[test]
fn hand_assembled_two_triangle_energy() {
    let mesh = two_triangle_square();
    let mut prob = InnerProblem::new(mesh.clone(), 2.0, vec![1.0; 4]).unwrap();
    prob.eps = 0.0;
    // v = x + 2y: |∇v|² = 5 on both triangles; lumped masses (1/3, 1/6, 1/3, 1/6)
    let v = FeFunction::new(mesh.clone(), vec![0.0, 1.0, 3.0, 2.0]).unwrap();
    assert!((energy(&v, &prob).unwrap() - (2.5 - 1.5)).abs() < 1e-14);
    // hat function of the diagonal node: gradients (0,1) and (1,0)
    let v = FeFunction::new(mesh, vec![0.0, 0.0, 1.0, 0.0]).unwrap();
    assert!((energy(&v, &prob).unwrap() - (0.5 - 1.0 / 3.0)).abs() < 1e-14);
}

#[test]
fn energy_of_zero_and_homogeneity() {
    let mesh = disc(0.2);
    let mut prob = InnerProblem::new(mesh.clone(), 3.0, vec![2.0; mesh.num_nodes()]).unwrap();
    assert_eq!(energy(&FeFunction::zeros(mesh.clone()), &prob).unwrap(), 0.0);
    prob.load = vec![0.0; mesh.num_nodes()];
    prob.eps = 0.0;
    let v = FeFunction::from_fn(mesh, |x| (1.0 - x[0] * x[0] - x[1] * x[1]) * (1.0 + x[0]));
    let e1 = energy(&v, &prob).unwrap();
    let e2 = energy(&v.scaled(1.7), &prob).unwrap();
    assert!((e2 / e1 - 1.7f64.powi(3)).abs() < 1e-12);
}

#[test]
fn gradient_matches_finite_differences() {
    let mesh = disc(0.25);
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for (p, lambda) in [(1.5, 0.0), (3.0, 2.0), (2.0, 1.0)] {
        let load: Vec<f64> = (0..mesh.num_nodes()).map(|_| rng.random_range(0.0..2.0)).collect();
        let mut prob = InnerProblem::new(mesh.clone(), p, load).unwrap().with_lambda(lambda).unwrap();
        prob.eps = 0.1;
        let v = FeFunction::dirichlet(mesh.clone(), (0..mesh.num_nodes()).map(|_| rng.random_range(-1.0..1.0)).collect())
            .unwrap();
        let g = energy_gradient(&v, &prob).unwrap();
        for _ in 0..20 {
            let d = FeFunction::dirichlet(
                mesh.clone(),
                (0..mesh.num_nodes()).map(|_| rng.random_range(-1.0..1.0)).collect(),
            )
            .unwrap();
            let h = 1e-5;
            let shifted = |s: f64| {
                let vals = v.values().iter().zip(d.values()).map(|(a, b)| a + s * b).collect();
                energy(&FeFunction::new(mesh.clone(), vals).unwrap(), &prob).unwrap()
            };
            let fd = (shifted(h) - shifted(-h)) / (2.0 * h);
            let exact: f64 = g.iter().zip(d.values()).map(|(a, b)| a * b).sum();
            assert!((fd - exact).abs() <= 1e-5 * exact.abs().max(1e-3), "p = {p}: {fd} vs {exact}");
        }
    }
}

#[test]
fn gradient_norm_examples() {
    let mesh = Arc::new(mesh_polygon(&[[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]], 0.25).unwrap());
    assert_eq!(gradient_lp_norm(&FeFunction::zeros(mesh.clone()), 2.0).unwrap(), 0.0);
    let x = FeFunction::new(mesh.clone(), mesh.nodes().iter().map(|n| n[0]).collect()).unwrap();
    for sigma in [1.0, 2.0, 3.5] {
        assert!((gradient_lp_norm(&x, sigma).unwrap() - 1.0).abs() < 1e-12);
    }
    assert!(gradient_lp_norm(&x, 0.5).is_err());
    // torsion: ∫|∇u|² = ∫u = π/8
    let m = disc(0.05);
    let u = inner_solve(&InnerProblem::new(m.clone(), 2.0, vec![1.0; m.num_nodes()]).unwrap()).unwrap().solution;
    let lhs = gradient_lp_norm(&u, 2.0).unwrap();
    assert!((lhs / (std::f64::consts::PI / 8.0).sqrt() - 1.0).abs() < 0.02);
}

#[test]
fn torsion_accuracy_and_refinement() {
    for p in [1.5, 2.0, 3.0] {
        let coarse = disc(0.1);
        let fine = Arc::new(refine(&coarse));
        let e0 = torsion_error(&coarse, p);
        let e1 = torsion_error(&fine, p);
        assert!(e1 <= 0.05, "p = {p}: {e1}");
        assert!(e0 / e1 >= 1.5, "p = {p}: ratio {}", e0 / e1);
    }
}

#[test]
fn homogeneity_of_minimisers() {
    let mesh = disc(0.1);
    let g: Vec<f64> = mesh.nodes().iter().map(|x| 1.0 + x[0] * x[0]).collect();
    for p in [1.5, 3.0] {
        let mut base = InnerProblem::new(mesh.clone(), p, g.clone()).unwrap();
        base.tol = 1e-12;
        base.eps = 0.0;
        let mut scaled = base.clone();
        scaled.load = g.iter().map(|x| 7.0 * x).collect();
        let u1 = inner_solve(&base).unwrap().solution;
        let u7 = inner_solve(&scaled).unwrap().solution;
        let c = 7f64.powf(1.0 / (p - 1.0));
        let err = u1.values().iter().zip(u7.values()).map(|(a, b)| (c * a - b).abs()).fold(0.0, f64::max);
        assert!(err <= 1e-6 * u7.sup_norm(), "p = {p}: {err:e}");
    }
}

#[test]
fn ordered_loads_give_ordered_solutions() {
    let mesh = disc(0.15);
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for p in [1.5, 2.0, 3.0] {
        for _ in 0..3 {
            let g1: Vec<f64> = (0..mesh.num_nodes()).map(|_| rng.random_range(0.0..1.0)).collect();
            let g2: Vec<f64> = g1.iter().map(|x| x + rng.random_range(0.0..0.5)).collect();
            let v1 = inner_solve(&InnerProblem::new(mesh.clone(), p, g1).unwrap()).unwrap().solution;
            let v2 = inner_solve(&InnerProblem::new(mesh.clone(), p, g2).unwrap()).unwrap().solution;
            let worst = v1.values().iter().zip(v2.values()).map(|(a, b)| a - b).fold(f64::MIN, f64::max);
            assert!(worst <= 1e-8 * v2.sup_norm().max(1.0), "p = {p}: {worst:e}");
        }
    }
}
