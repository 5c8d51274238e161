//! Radial ground truth on balls in `R^N`: the closed-form torsion function, a
//! shooting solver for `−(r^{N−1}|u′|^{p−2}u′)′ = r^{N−1} f(u)` and the radial
//! first eigenvalue.
//!
//! The ODE is integrated in the flux variable `w = r^{N−1}|u′|^{p−2}u′`, which
//! removes both the `1/r` singularity at the origin and the degeneracy of
//! `|u′|^{p−2}`:
//!
//! ```text
//! u′ = sign(w)·(|w|/r^{N−1})^{1/(p−1)},    w′ = −r^{N−1} f(u).
//! ```

use serde::Serialize;

use crate::geometry::RadialProfile;
use crate::nonlinearity::Nonlinearity;
use crate::{Error, Result};

/// Relative local error tolerance of the adaptive integrator.
const RTOL: f64 = 1e-11;
/// The series start is used while its correction is below this fraction of `m`.
const SERIES_DROP: f64 = 1e-6;
const MAX_STEPS: usize = 1_000_000;
/// Samples per radius used when a shoot must resolve the profile.
const PROFILE_STEPS: f64 = 400.0;
/// Grid intervals of profiles returned by [`radial_solve_bvp`].
pub const PROFILE_INTERVALS: usize = 1000;
/// Relative accuracy of the crossing radius in [`radial_solve_bvp`].
const BVP_RTOL: f64 = 1e-8;

fn check_pn(p: f64, n: usize) -> Result<()> {
    if !(p > 1.0) || !p.is_finite() {
        return Err(Error::InvalidParameter(format!("p must be > 1 (got {p})")));
    }
    if n < 2 {
        return Err(Error::InvalidParameter(format!("dimension must be >= 2 (got {n})")));
    }
    Ok(())
}

/// Torsion function of the unit ball: the solution of `−Δ_p v = 1`, `v = 0` on
/// the sphere, `v(r) = ((p−1)/p)·N^{−1/(p−1)}·(1 − r^{p/(p−1)})`.
pub fn torsion_exact(p: f64, n: usize, r: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&r) {
        return Err(Error::InvalidParameter(format!("radius {r} outside [0, 1]")));
    }
    torsion_exact_ball(p, n, 1.0, r)
}

/// Torsion function of the ball of radius `big_r`.
pub fn torsion_exact_ball(p: f64, n: usize, big_r: f64, r: f64) -> Result<f64> {
    check_pn(p, n)?;
    if !(big_r > 0.0) || !(0.0..=big_r).contains(&r) {
        return Err(Error::InvalidParameter(format!("radius {r} outside [0, {big_r}]")));
    }
    let q = p / (p - 1.0);
    Ok((p - 1.0) / p * (n as f64).powf(-1.0 / (p - 1.0)) * (big_r.powf(q) - r.powf(q)))
}

/// Outcome of one shot from the centre.
#[derive(Clone, Debug, Serialize)]
pub struct ShootResult {
    /// Initial height `u(0)`.
    pub m: f64,
    /// First radius where `u` reaches the target level (`0` for [`radial_shoot`]),
    /// or `None` when it is not reached within `r_max`.
    pub r0: Option<f64>,
    /// Accepted integration points, starting at `r = 0`.
    pub radii: Vec<f64>,
    pub values: Vec<f64>,
    /// Flux `w = r^{N−1}|u′|^{p−2}u′` at the recorded points.
    pub fluxes: Vec<f64>,
    /// `u′` returned to zero while `u` was still above the target level, so the
    /// trajectory may not be unique there.
    pub nonuniqueness_suspected: bool,
}

impl ShootResult {
    /// `u′` at recorded point `i`.
    fn slope(&self, i: usize, p: f64, n: usize) -> f64 {
        slope_of(self.radii[i], self.fluxes[i], p, n)
    }
}

fn slope_of(r: f64, w: f64, p: f64, n: usize) -> f64 {
    if w == 0.0 {
        return 0.0;
    }
    let a = (w.abs() / r.powi(n as i32 - 1)).powf(1.0 / (p - 1.0));
    a.copysign(w)
}

struct Ode<'a> {
    p: f64,
    n: usize,
    f: &'a Nonlinearity,
}

impl Ode<'_> {
    fn rhs(&self, r: f64, y: [f64; 2]) -> [f64; 2] {
        [slope_of(r, y[1], self.p, self.n), -r.powi(self.n as i32 - 1) * self.f.f(y[0])]
    }

    /// One Dormand–Prince 5(4) step; returns the fifth-order value and the
    /// embedded error estimate.
    fn step(&self, r: f64, y: [f64; 2], h: f64) -> ([f64; 2], [f64; 2]) {
        const C: [f64; 7] = [0.0, 0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];
        const A: [[f64; 6]; 7] = [
            [0.0; 6],
            [0.2, 0.0, 0.0, 0.0, 0.0, 0.0],
            [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
            [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
            [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
            [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
            [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
        ];
        const E: [f64; 7] = [
            71.0 / 57600.0,
            0.0,
            -71.0 / 16695.0,
            71.0 / 1920.0,
            -17253.0 / 339200.0,
            22.0 / 525.0,
            -1.0 / 40.0,
        ];
        let mut k = [[0.0; 2]; 7];
        for s in 0..7 {
            let mut ys = y;
            for (j, kj) in k.iter().enumerate().take(s) {
                ys[0] += h * A[s][j] * kj[0];
                ys[1] += h * A[s][j] * kj[1];
            }
            k[s] = self.rhs(r + C[s] * h, ys);
        }
        // the last stage is evaluated at the fifth-order solution
        let mut y5 = y;
        let mut err = [0.0; 2];
        for s in 0..7 {
            y5[0] += h * A[6][s.min(5)] * if s < 6 { k[s][0] } else { 0.0 };
            y5[1] += h * A[6][s.min(5)] * if s < 6 { k[s][1] } else { 0.0 };
            err[0] += h * E[s] * k[s][0];
            err[1] += h * E[s] * k[s][1];
        }
        (y5, err)
    }
}

/// Shoot from `u(0) = m` until `u` falls to `level` or `r = r_max`.
fn shoot_to(p: f64, n: usize, f: &Nonlinearity, m: f64, r_max: f64, level: f64, h_max: f64) -> Result<ShootResult> {
    check_pn(p, n)?;
    if !(m > 0.0) || !m.is_finite() {
        return Err(Error::InvalidParameter(format!("initial height must be positive (got {m})")));
    }
    if !(r_max > 0.0) || !r_max.is_finite() {
        return Err(Error::InvalidParameter(format!("r_max must be positive (got {r_max})")));
    }
    let mut out = ShootResult {
        m,
        r0: None,
        radii: vec![0.0],
        values: vec![m],
        fluxes: vec![0.0],
        nonuniqueness_suspected: false,
    };
    let fm = f.f(m);
    if !(fm > 0.0) {
        // no descent from the centre: u stays at or above m
        return Ok(out);
    }
    let nf = n as f64;
    let q = p / (p - 1.0);
    let c = (fm / nf).powf(1.0 / (p - 1.0)) * (p - 1.0) / p;
    let r_init = (SERIES_DROP * m / c).powf(1.0 / q).min(1e-3 * r_max);
    let mut r = r_init;
    let mut y = [m - c * r.powf(q), -fm * r.powi(n as i32) / nf];
    out.radii.push(r);
    out.values.push(y[0]);
    out.fluxes.push(y[1]);

    let ode = Ode { p, n, f };
    let mut scale = [m, y[1].abs()];
    let mut h = r_init.min(h_max);
    let mut descended = true;
    for _ in 0..MAX_STEPS {
        if r >= r_max {
            return Ok(out);
        }
        let h_try = h.min(r_max - r).min(h_max);
        let (y_new, e) = ode.step(r, y, h_try);
        let mut err = 0.0f64;
        for i in 0..2 {
            let sc = RTOL * scale[i].max(y[i].abs()).max(y_new[i].abs()) + f64::MIN_POSITIVE;
            err = err.max(e[i].abs() / sc);
        }
        if !y_new.iter().all(|v| v.is_finite()) || !err.is_finite() {
            h = 0.25 * h_try;
            if h < 1e-15 * r.max(1e-300) {
                return Err(Error::NotConverged(format!("radial shoot broke down at r = {r:e}")));
            }
            continue;
        }
        if err > 1.0 {
            h = h_try * (0.9 * err.powf(-0.2)).max(0.2);
            continue;
        }

        if y_new[0] <= level {
            let rc = locate_crossing(&ode, r, y, h_try, level, m);
            out.r0 = Some(rc.0);
            out.radii.push(rc.0);
            out.values.push(rc.1[0]);
            out.fluxes.push(rc.1[1]);
            return Ok(out);
        }
        r += h_try;
        y = y_new;
        scale[0] = scale[0].max(y[0].abs());
        scale[1] = scale[1].max(y[1].abs());
        if y[1] >= 0.0 && descended {
            out.nonuniqueness_suspected = true;
        }
        descended = y[1] < 0.0;
        out.radii.push(r);
        out.values.push(y[0]);
        out.fluxes.push(y[1]);
        h = h_try * (0.9 * err.max(1e-10).powf(-0.2)).min(5.0);
    }
    Err(Error::NotConverged(format!("radial shoot exceeded {MAX_STEPS} steps")))
}

/// Bisect the step length inside an accepted step that crosses `level`.
fn locate_crossing(ode: &Ode, r: f64, y: [f64; 2], h: f64, level: f64, m: f64) -> (f64, [f64; 2]) {
    let (mut lo, mut hi) = (0.0, h);
    let mut best = ode.step(r, y, h).0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let ym = ode.step(r, y, mid).0;
        if ym[0] <= level {
            hi = mid;
            best = ym;
        } else {
            lo = mid;
        }
        if (ym[0] - level).abs() <= 1e-15 * m || hi - lo <= 4.0 * f64::EPSILON * (r + hi) {
            break;
        }
    }
    (r + hi, best)
}

/// Shoot from `u(0) = m` until the first zero of `u` or `r = r_max`.
///
/// A nonpositive `f(m)` gives no descent from the centre and is reported as
/// "no crossing".
pub fn radial_shoot(p: f64, n: usize, f: &Nonlinearity, m: f64, r_max: f64) -> Result<ShootResult> {
    shoot_to(p, n, f, m, r_max, 0.0, r_max / PROFILE_STEPS)
}

/// First radius where the shot from `u(0) = m` falls to `fraction·m`.
///
/// Positive entire solutions never cross zero, so their size is measured by
/// this level radius instead (for `u⁵` in `R³` it equals `3/m²` at one half).
pub fn level_radius(p: f64, n: usize, f: &Nonlinearity, m: f64, fraction: f64, r_max: f64) -> Result<Option<f64>> {
    if !(0.0..1.0).contains(&fraction) {
        return Err(Error::InvalidParameter(format!("level fraction must lie in [0, 1) (got {fraction})")));
    }
    Ok(shoot_to(p, n, f, m, r_max, fraction * m, r_max / PROFILE_STEPS)?.r0)
}

/// Positive radial solution of the Dirichlet problem on the ball of radius
/// `big_r`, found by bisection on the height `m` until the first zero lands on
/// `big_r` (relative accuracy `1e-8`).
///
/// Heights `2^k`, `k = −20..=20`, are scanned for a bracket; when none exists
/// the result is [`Error::NoSolutionFound`].
pub fn radial_solve_bvp(p: f64, n: usize, f: &Nonlinearity, big_r: f64) -> Result<RadialProfile> {
    check_pn(p, n)?;
    if !(big_r > 0.0) || !big_r.is_finite() {
        return Err(Error::InvalidParameter(format!("ball radius must be positive (got {big_r})")));
    }
    if f.f(0.0) < 0.0 {
        return Err(Error::Rejected("f(0) must be nonnegative".into()));
    }
    let r_max = 2.0 * big_r;
    let h_max = big_r / PROFILE_STEPS;
    // g(m) > 0 when the first zero lies beyond R (or does not exist)
    let g = |m: f64| -> Result<(f64, ShootResult)> {
        let s = shoot_to(p, n, f, m, r_max, 0.0, h_max)?;
        let v = s.r0.map_or(f64::INFINITY, |r0| r0 / big_r - 1.0);
        Ok((v, s))
    };
    let mut prev: Option<(f64, f64)> = None;
    let mut bracket = None;
    for k in -20..=20 {
        let m = 2f64.powi(k);
        let (v, s) = g(m)?;
        if v.abs() <= BVP_RTOL {
            return profile_from_shot(&s, p, n, big_r);
        }
        if let Some((m0, v0)) = prev {
            if (v0 > 0.0) != (v > 0.0) {
                bracket = Some((m0, v0, m));
                break;
            }
        }
        prev = Some((m, v));
    }
    let Some((mut lo, v_lo, mut hi)) = bracket else {
        return Err(Error::NoSolutionFound(format!(
            "no height in [2^-20, 2^20] brackets a first zero at R = {big_r}"
        )));
    };
    let lo_positive = v_lo > 0.0;
    for _ in 0..200 {
        let mid = (lo * hi).sqrt();
        let (v, s) = g(mid)?;
        if v.abs() <= BVP_RTOL {
            return profile_from_shot(&s, p, n, big_r);
        }
        if (v > 0.0) == lo_positive {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi / lo - 1.0 < 1e-15 {
            break;
        }
    }
    Err(Error::NoSolutionFound(format!(
        "first-zero radius is discontinuous in the height near m = {lo:e}"
    )))
}

/// Resample a shot whose first zero is (nearly) `big_r` onto the uniform grid
/// by cubic Hermite interpolation; `u` is extended linearly past the crossing.
fn profile_from_shot(s: &ShootResult, p: f64, n: usize, big_r: f64) -> Result<RadialProfile> {
    let r0 = s.r0.expect("bracketed shot crosses zero");
    let last = s.radii.len() - 1;
    let slope_end = s.slope(last, p, n);
    let dr = big_r / PROFILE_INTERVALS as f64;
    let mut values = Vec::with_capacity(PROFILE_INTERVALS + 1);
    let mut j = 0;
    for i in 0..=PROFILE_INTERVALS {
        let r = i as f64 * dr;
        if r >= r0 {
            values.push(slope_end * (r - r0));
            continue;
        }
        while j + 1 < last && s.radii[j + 1] < r {
            j += 1;
        }
        let (a, b) = (s.radii[j], s.radii[j + 1]);
        let h = b - a;
        let t = ((r - a) / h).clamp(0.0, 1.0);
        let (ua, ub) = (s.values[j], s.values[j + 1]);
        let (da, db) = (s.slope(j, p, n), s.slope(j + 1, p, n));
        let h00 = (1.0 + 2.0 * t) * (1.0 - t) * (1.0 - t);
        let h10 = t * (1.0 - t) * (1.0 - t);
        let h01 = t * t * (3.0 - 2.0 * t);
        let h11 = t * t * (t - 1.0);
        values.push(h00 * ua + h10 * h * da + h01 * ub + h11 * h * db);
    }
    RadialProfile::new(n, big_r, values)
}

/// First eigenvalue of `−Δ_p` on the ball of radius `big_r` in `R^N`: the
/// `λ` for which the shot of `f(u) = λ u^{p−1}` from `u(0) = 1` first vanishes
/// at `big_r`, found by geometric bisection on `λ`.
pub fn radial_eigen(p: f64, n: usize, big_r: f64) -> Result<f64> {
    check_pn(p, n)?;
    if !(big_r > 0.0) || !big_r.is_finite() {
        return Err(Error::InvalidParameter(format!("ball radius must be positive (got {big_r})")));
    }
    // true when the first zero lies beyond R
    let beyond = |lambda: f64| -> Result<bool> {
        let f = Nonlinearity::homogeneous(p, lambda)?;
        let s = shoot_to(p, n, &f, 1.0, 2.0 * big_r, 0.0, big_r / PROFILE_STEPS)?;
        Ok(s.r0.is_none_or(|r0| r0 > big_r))
    };
    let start = big_r.powf(-p);
    let (mut lo, mut hi) = (start, start);
    if beyond(start)? {
        for _ in 0..200 {
            hi *= 4.0;
            if !beyond(hi)? {
                break;
            }
            lo = hi;
        }
    } else {
        for _ in 0..200 {
            lo *= 0.25;
            if beyond(lo)? {
                break;
            }
            hi = lo;
        }
    }
    if beyond(hi)? || !beyond(lo)? {
        return Err(Error::Bracket("could not bracket the first radial eigenvalue".into()));
    }
    while hi / lo - 1.0 > 1e-13 {
        let mid = (lo * hi).sqrt();
        if beyond(mid)? {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok((lo * hi).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;

    const J01: f64 = 2.404_825_557_695_773;

    #[test]
    fn torsion_examples() {
        assert!((torsion_exact(2.0, 2, 0.0).unwrap() - 0.25).abs() < 1e-15);
        assert_eq!(torsion_exact(2.0, 2, 1.0).unwrap(), 0.0);
        let v = torsion_exact(3.0, 3, 0.0).unwrap();
        assert!((v - 2.0 / 3.0 / 3f64.sqrt()).abs() < 1e-14);
        assert!((v - 0.38490).abs() < 1e-5);
        assert!(matches!(torsion_exact(2.0, 2, 1.5), Err(Error::InvalidParameter(_))));
        assert!(matches!(torsion_exact(2.0, 2, -0.1), Err(Error::InvalidParameter(_))));
    }

    #[test]
    fn torsion_shot() {
        let f = Nonlinearity::constant(1.0).unwrap();
        let s = radial_shoot(2.0, 2, &f, 0.25, 3.0).unwrap();
        assert!((s.r0.unwrap() - 1.0).abs() < 1e-9, "{:?}", s.r0);
        for (r, u) in s.radii.iter().zip(&s.values) {
            if *r <= 1.0 {
                assert!((u - torsion_exact(2.0, 2, *r).unwrap()).abs() < 1e-6);
            }
        }
        assert!(!s.nonuniqueness_suspected);
    }

    #[test]
    fn linear_shot_hits_bessel_root() {
        let f = Nonlinearity::power(1.0, 1.0).unwrap();
        for m in [0.1, 1.0, 30.0] {
            let r0 = radial_shoot(2.0, 2, &f, m, 5.0).unwrap().r0.unwrap();
            assert!((r0 - J01).abs() < 1e-8, "m = {m}: {r0}");
        }
    }

    #[test]
    fn no_descent_reports_no_crossing() {
        let f = Nonlinearity::zero();
        let s = radial_shoot(2.0, 2, &f, 1.0, 2.0).unwrap();
        assert!(s.r0.is_none());
    }

    #[test]
    fn critical_level_radius_scaling() {
        let f = Nonlinearity::critical_power(2.0, 3).unwrap();
        for m in [1.0, 2.0, 4.0] {
            let r = level_radius(2.0, 3, &f, m, 0.5, 10.0).unwrap().unwrap();
            assert!((r * m * m / 3.0 - 1.0).abs() < 1e-8, "m = {m}: {r}");
        }
        assert!(radial_shoot(2.0, 3, &f, 1.0, 50.0).unwrap().r0.is_none());
    }

    #[test]
    fn bvp_reproduces_torsion() {
        for p in [1.5, 2.0, 3.0] {
            let f = Nonlinearity::constant(1.0).unwrap();
            let prof = radial_solve_bvp(p, 2, &f, 1.0).unwrap();
            for (r, u) in prof.radii().zip(prof.values()) {
                let e = torsion_exact(p, 2, r.min(1.0)).unwrap();
                assert!((u - e).abs() < 1e-6, "p = {p}, r = {r}: {u} vs {e}");
            }
        }
    }

    #[test]
    fn bvp_critical_has_no_solution() {
        let f = Nonlinearity::critical_power(2.0, 3).unwrap();
        assert!(matches!(radial_solve_bvp(2.0, 3, &f, 1.0), Err(Error::NoSolutionFound(_))));
    }

    #[test]
    fn eigen_examples() {
        let l = radial_eigen(2.0, 2, 1.0).unwrap();
        assert!((l - J01 * J01).abs() < 1e-8, "{l}");
        let l2 = radial_eigen(2.0, 2, 2.0).unwrap();
        assert!((l2 - l / 4.0).abs() < 1e-8);
        let l3 = radial_eigen(3.0, 2, 1.0).unwrap();
        let l3b = radial_eigen(3.0, 2, 2.0).unwrap();
        assert!((l3b * 8.0 / l3 - 1.0).abs() < 1e-6);
    }

    #[test]
    fn cubic_bvp_regression() {
        let f = Nonlinearity::power(3.0, 1.0).unwrap();
        let prof = radial_solve_bvp(2.0, 2, &f, 1.0).unwrap();
        assert!((prof.values()[0] - 3.573_901_017).abs() < 1e-6, "{}", prof.values()[0]);
        assert!(prof.values().windows(2).all(|w| w[1] < w[0]));
    }

    #[test]
    fn eigen_regressions() {
        assert!((radial_eigen(3.0, 2, 1.0).unwrap() - 9.831_498_405).abs() < 1e-6);
        assert!((radial_eigen(1.5, 2, 1.0).unwrap() - 4.017_795_045).abs() < 1e-6);
    }
}
