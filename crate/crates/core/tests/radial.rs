use plapd_core::nonlinearity::Nonlinearity;
use plapd_core::radial::{level_radius, radial_eigen, radial_shoot, radial_solve_bvp, torsion_exact};
use plapd_core::Error;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn d4(g: impl Fn(f64) -> f64, r: f64, h: f64) -> f64 {
    (g(r - 2.0 * h) - 8.0 * g(r - h) + 8.0 * g(r + h) - g(r + 2.0 * h)) / (12.0 * h)
}

#[test]
fn torsion_satisfies_the_radial_equation() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for (p, n) in [(1.5, 2), (2.0, 2), (3.0, 3), (2.5, 5)] {
        let u = |r: f64| torsion_exact(p, n, r).unwrap();
        let flux = |r: f64| {
            let du = d4(u, r, 1e-3);
            r.powi(n as i32 - 1) * du.abs().powf(p - 2.0) * du
        };
        for _ in 0..100 {
            let r = rng.random_range(0.05..0.95);
            let res = d4(flux, r, 1e-3) + r.powi(n as i32 - 1);
            assert!(res.abs() <= 1e-8, "p = {p}, N = {n}, r = {r}: {res:e}");
        }
    }
}

#[test]
fn shots_decrease_for_nonnegative_f() {
    let fs = [
        Nonlinearity::constant(1.0).unwrap(),
        Nonlinearity::power(3.0, 1.0).unwrap(),
        Nonlinearity::polynomial(vec![(1.0, 0.0), (1.0, 2.0)]).unwrap(),
    ];
    for f in &fs {
        for p in [1.5, 2.0, 3.0] {
            let s = radial_shoot(p, 2, f, 1.0, 5.0).unwrap();
            assert!(s.values.windows(2).all(|w| w[1] < w[0]), "{} p = {p}", f.name());
            assert!(!s.nonuniqueness_suspected);
        }
    }
}

#[test]
fn torsion_crossing_for_other_parameters() {
    let f = Nonlinearity::constant(1.0).unwrap();
    for (p, n) in [(1.5, 2), (3.0, 3), (4.0, 2)] {
        let m = torsion_exact(p, n, 0.0).unwrap();
        let r0 = radial_shoot(p, n, &f, m, 2.0).unwrap().r0.unwrap();
        assert!((r0 - 1.0).abs() < 1e-7, "p = {p}, N = {n}: {r0}");
    }
}

#[test]
fn critical_scaling_law() {
    let f = Nonlinearity::critical_power(2.0, 3).unwrap();
    let base = level_radius(2.0, 3, &f, 1.0, 0.5, 20.0).unwrap().unwrap();
    assert!((base - 3.0).abs() < 1e-7);
    for m in [2.0, 4.0, 8.0] {
        let r = level_radius(2.0, 3, &f, m, 0.5, 20.0).unwrap().unwrap();
        // m·r^{(N−p)/p} is invariant
        assert!((m * r.sqrt() / base.sqrt() - 1.0).abs() < 1e-5);
    }
}

#[test]
fn eigenvalue_scaling_law() {
    for p in [1.5, 2.0, 3.0] {
        let a = radial_eigen(p, 2, 1.0).unwrap();
        for r in [0.5, 2.0, 3.0] {
            let b = radial_eigen(p, 2, r).unwrap();
            assert!((b * r.powf(p) / a - 1.0).abs() < 1e-6, "p = {p}, R = {r}");
        }
    }
    let three = radial_eigen(2.0, 3, 1.0).unwrap();
    assert!((three - std::f64::consts::PI.powi(2)).abs() < 1e-7);
}

#[test]
fn bvp_errors() {
    let f = Nonlinearity::critical_power(2.0, 3).unwrap();
    assert!(matches!(radial_solve_bvp(2.0, 3, &f, 1.0), Err(Error::NoSolutionFound(_))));
    let neg = Nonlinearity::constant(-1.0).unwrap();
    assert!(matches!(radial_solve_bvp(2.0, 2, &neg, 1.0), Err(Error::Rejected(_))));
    assert!(radial_solve_bvp(0.5, 2, &Nonlinearity::constant(1.0).unwrap(), 1.0).is_err());
}
