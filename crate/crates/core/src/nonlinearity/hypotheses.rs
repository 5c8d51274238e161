//! Numerical classification of the growth hypotheses on `f`.
//!
//! Limits at infinity are estimated on the geometric grid `s_k = s₀·2^k`,
//! `k = 0..=K`, looking at the last part of the grid (the "tail"). The
//! verdicts are three-valued: a finite grid can refute or support a limit
//! statement but never prove it.

use serde::{Deserialize, Serialize};

use super::{critical_exponents, Nonlinearity};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Holds,
    Fails,
    Inconclusive,
}

/// Outcome of one hypothesis check.
///
/// A `Holds` verdict carries the witnessing constant; a `Fails` verdict the
/// sample point that refutes it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub verdict: Verdict,
    /// Main estimated constant (C₁…C₄, the limit estimate, or λ₁-ratio).
    pub constant: Option<f64>,
    /// Secondary parameter: τ for H₂, θ for H₄, C₅ for H₅.
    pub parameter: Option<f64>,
    pub witness: Option<f64>,
    pub note: String,
}

impl Check {
    fn holds(constant: f64, note: impl Into<String>) -> Self {
        Check { verdict: Verdict::Holds, constant: Some(constant), parameter: None, witness: None, note: note.into() }
    }

    fn fails(witness: f64, note: impl Into<String>) -> Self {
        Check { verdict: Verdict::Fails, constant: None, parameter: None, witness: Some(witness), note: note.into() }
    }

    fn inconclusive(note: impl Into<String>) -> Self {
        Check { verdict: Verdict::Inconclusive, constant: None, parameter: None, witness: None, note: note.into() }
    }

    fn with_constant(mut self, c: f64) -> Self {
        self.constant = Some(c);
        self
    }

    fn with_parameter(mut self, x: f64) -> Self {
        self.parameter = Some(x);
        self
    }

    fn with_witness(mut self, s: f64) -> Self {
        self.witness = Some(s);
        self
    }
}

/// Grid and threshold parameters for the classifier.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ClassifierConfig {
    /// First grid point `s₀`.
    pub s0: f64,
    /// Number of doublings: `s_max = s₀·2^doublings`.
    pub doublings: u32,
    /// Fraction of the grid (at the large end) treated as the tail.
    pub tail_fraction: f64,
    /// Positive floor below which a liminf is considered zero.
    pub floor: f64,
    /// `H₀` holds when the small-`s` ratio stays below `λ₁(1 − margin)`.
    pub h0_margin: f64,
    /// Sampling range `[lo, hi]` for the behaviour at zero.
    pub h0_range: [f64; 2],
    /// Smallest `s` used when estimating `Λ`.
    pub lambda_s_min: f64,
    /// Samples per dyadic interval for `H₅`.
    pub dense_samples: usize,
}

impl Default for ClassifierConfig {
    fn default() -> Self {
        ClassifierConfig {
            s0: 1.0,
            doublings: 60,
            tail_fraction: 0.5,
            floor: 1e-6,
            h0_margin: 1e-3,
            h0_range: [1e-8, 1e-2],
            lambda_s_min: 1e-6,
            dense_samples: 64,
        }
    }
}

impl ClassifierConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.s0 > 0.0) || self.doublings < 4 {
            return Err(Error::InvalidParameter("classifier grid needs s0 > 0 and at least 4 doublings".into()));
        }
        if !(self.tail_fraction > 0.0 && self.tail_fraction <= 1.0) {
            return Err(Error::InvalidParameter(format!("tail fraction {} not in (0, 1]", self.tail_fraction)));
        }
        if !(self.floor > 0.0) || !(self.h0_margin >= 0.0 && self.h0_margin < 1.0) {
            return Err(Error::InvalidParameter("classifier floor must be > 0 and margin in [0, 1)".into()));
        }
        if !(self.h0_range[0] > 0.0 && self.h0_range[0] < self.h0_range[1]) {
            return Err(Error::InvalidParameter("h0_range must satisfy 0 < lo < hi".into()));
        }
        if self.dense_samples < 2 {
            return Err(Error::InvalidParameter("dense_samples must be >= 2".into()));
        }
        Ok(())
    }

    pub fn s_max(&self) -> f64 {
        self.s0 * 2f64.powi(self.doublings as i32)
    }

    fn first_tail_index(&self) -> u32 {
        ((self.doublings as f64) * (1.0 - self.tail_fraction)).ceil() as u32
    }

    /// Tail sample points, increasing.
    pub fn tail(&self) -> Vec<f64> {
        (self.first_tail_index()..=self.doublings).map(|k| self.s0 * 2f64.powi(k as i32)).collect()
    }
}

fn argmin(v: &[f64]) -> usize {
    (0..v.len()).min_by(|&a, &b| v[a].total_cmp(&v[b])).unwrap()
}

fn argmax(v: &[f64]) -> usize {
    (0..v.len()).max_by(|&a, &b| v[a].total_cmp(&v[b])).unwrap()
}

fn strictly_decreasing(v: &[f64]) -> bool {
    v.windows(2).all(|w| w[1] < w[0])
}

/// Least-squares slope of `ln r` against `ln s`.
fn loglog_slope(s: &[f64], r: &[f64]) -> f64 {
    let x: Vec<f64> = s.iter().map(|v| v.ln()).collect();
    let y: Vec<f64> = r.iter().map(|v| v.ln()).collect();
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(&y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}

fn nonpositive_in_tail(f: &Nonlinearity, tail: &[f64]) -> Option<f64> {
    tail.iter().copied().find(|&s| !(f.f(s) > 0.0) || !f.f(s).is_finite())
}

/// `H₀`: `limsup_{s→0⁺} f(s)/s^{p−1} < λ₁`.
pub fn check_h0(f: &Nonlinearity, p: f64, lambda1: f64, cfg: &ClassifierConfig) -> Check {
    let [lo, hi] = cfg.h0_range;
    let mut s: Vec<f64> = Vec::new();
    let mut x = lo;
    while x <= hi * (1.0 + 1e-12) {
        s.push(x);
        x *= 2.0;
    }
    let r: Vec<f64> = s.iter().map(|&x| f.f(x) / x.powf(p - 1.0)).collect();
    if let Some(i) = r.iter().position(|v| !v.is_finite()) {
        return Check::inconclusive("ratio f(s)/s^(p-1) not finite near zero").with_witness(s[i]);
    }
    // the behaviour at zero is read off the half of the samples closest to 0
    let half = s.len().div_ceil(2);
    let (ts, tr) = (&s[..half], &r[..half]);
    let imax = argmax(tr);
    let (mx, mn) = (tr[imax], tr.iter().copied().fold(f64::INFINITY, f64::min));
    let monotone = tr.windows(2).all(|w| w[1] >= w[0]) || tr.windows(2).all(|w| w[1] <= w[0]);
    if !monotone && mn > 0.0 && mx / mn > 10.0 {
        return Check::inconclusive("ratio oscillates near zero").with_constant(mx).with_witness(ts[imax]);
    }
    if mx < lambda1 * (1.0 - cfg.h0_margin) {
        Check::holds(mx, format!("sup of f(s)/s^(p-1) on [{lo:e}, {:e}] below λ₁ = {lambda1}", ts[half - 1]))
    } else {
        Check::fails(ts[imax], format!("f(s)/s^(p-1) = {mx} not below λ₁·(1 − margin) = {}", lambda1 * (1.0 - cfg.h0_margin)))
            .with_constant(mx)
    }
}

/// `H₁` gate: `f(0) ≥ 0`, finite values, and bounded difference quotients on
/// compacts. The Lipschitz part can only refute.
pub fn check_h1(f: &Nonlinearity) -> Check {
    let f0 = f.f(0.0);
    if !(f0 >= 0.0) {
        return Check::fails(0.0, format!("f(0) = {f0} < 0"));
    }
    let quotient = |d: f64| {
        (0..=1000)
            .map(|k| {
                let s = 10.0 * k as f64 / 1000.0;
                ((f.f(s + d) - f.f(s)) / d).abs()
            })
            .fold(0.0, f64::max)
    };
    let (q4, q8) = (quotient(1e-4), quotient(1e-8));
    if !q8.is_finite() || !q4.is_finite() {
        return Check::fails(0.0, "f is not finite on [0, 10]");
    }
    if q8 > 50.0 * q4.max(1.0) {
        return Check::fails(0.0, format!("difference quotients grow from {q4:.3e} to {q8:.3e} as the step shrinks"));
    }
    Check::holds(q8, "f(0) >= 0 and difference quotients bounded on [0, 10] (refutation-only check)")
}

/// `H₂`: `liminf f(s)/s^{p−1+τ} > C₁ > 0` for some `τ > 0`.
/// Returns the largest `τ ∈ {1, 1/2, …, 2⁻¹⁰}` that passes; `parameter = τ`, `constant = C₁`.
pub fn check_h2(f: &Nonlinearity, p: f64, cfg: &ClassifierConfig) -> Check {
    let tail = cfg.tail();
    if let Some(s) = nonpositive_in_tail(f, &tail) {
        return Check::inconclusive("f is not positive on the tail").with_witness(s);
    }
    let q = tail.len() / 4;
    let mut last_witness = *tail.last().unwrap();
    for k in 0..=10 {
        let tau = 2f64.powi(-k);
        let r: Vec<f64> = tail.iter().map(|&s| f.f(s) / s.powf(p - 1.0 + tau)).collect();
        let i = argmin(&r);
        let first_min = r[..=q].iter().copied().fold(f64::INFINITY, f64::min);
        let last_max = r[r.len() - 1 - q..].iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let decaying = strictly_decreasing(&r) || last_max < first_min;
        if r[i] > cfg.floor && !decaying {
            return Check::holds(r[i], format!("tail min of f(s)/s^(p-1+τ) with τ = {tau}")).with_parameter(tau);
        }
        last_witness = tail[i];
    }
    Check::fails(last_witness, "f(s)/s^(p-1+τ) decays on the tail for every tested τ")
}

/// Shared liminf logic for the `H₃` family.
fn tail_liminf(tail: &[f64], r: &[f64], floor: f64, what: &str) -> Check {
    if let Some(i) = r.iter().position(|v| !v.is_finite()) {
        return Check::inconclusive(format!("{what} not finite on the tail")).with_witness(tail[i]);
    }
    let i = argmin(r);
    if r[i] <= floor {
        return Check::fails(tail[i], format!("tail min of {what} = {:e} <= floor {floor:e}", r[i])).with_constant(r[i]);
    }
    let half = r.len() / 2;
    if r[r.len() - 1] < 0.75 * r[0] && strictly_decreasing(&r[half..]) {
        return Check::inconclusive(format!("{what} still decaying on the tail"))
            .with_constant(r[i])
            .with_witness(tail[i]);
    }
    Check::holds(r[i], format!("tail min of {what}"))
}

/// `H₃`: `liminf F(s)/(s f(s)) > C₂ > 0`.
pub fn check_h3(f: &Nonlinearity, cfg: &ClassifierConfig) -> Check {
    let tail = cfg.tail();
    if let Some(s) = nonpositive_in_tail(f, &tail) {
        return Check::inconclusive("f(s) <= 0 on the tail: ratio undefined").with_witness(s);
    }
    let r: Vec<f64> = tail.iter().map(|&s| f.primitive(s) / (s * f.f(s))).collect();
    tail_liminf(&tail, &r, cfg.floor, "F/(s f)")
}

fn p_star_or_inconclusive(p: f64, n: usize) -> std::result::Result<f64, Check> {
    match critical_exponents(p, n) {
        Ok(e) => e.p_star.ok_or_else(|| Check::inconclusive("not applicable: needs p < N")),
        Err(e) => Err(Check::inconclusive(e.to_string())),
    }
}

fn h3_weighted(f: &Nonlinearity, p: f64, n: usize, weighted: bool, cfg: &ClassifierConfig) -> Check {
    let ps = match p_star_or_inconclusive(p, n) {
        Ok(v) => v,
        Err(c) => return c,
    };
    let tail = cfg.tail();
    if let Some(s) = nonpositive_in_tail(f, &tail) {
        return Check::inconclusive("f(s) <= 0 on the tail: ratio undefined").with_witness(s);
    }
    let r: Vec<f64> = tail
        .iter()
        .map(|&s| {
            let sf = s * f.f(s);
            let h = if weighted { f.weight(s).unwrap_or(1.0) } else { 1.0 };
            (ps * f.primitive(s) - sf) / (h * sf)
        })
        .collect();
    tail_liminf(&tail, &r, cfg.floor, if weighted { "(p*F − s f)/(H s f)" } else { "(p*F − s f)/(s f)" })
}

/// `H₃′`: `liminf (p*F(s) − s f(s))/(s f(s)) > C₃ > 0`.
pub fn check_h3p(f: &Nonlinearity, p: f64, n: usize, cfg: &ClassifierConfig) -> Check {
    h3_weighted(f, p, n, false, cfg)
}

/// `H₃″`: `liminf (p*F(s) − s f(s))/(H(s) s f(s)) > 0`, with `H ≡ 1` if no weight is attached.
pub fn check_h3pp(f: &Nonlinearity, p: f64, n: usize, cfg: &ClassifierConfig) -> Check {
    h3_weighted(f, p, n, true, cfg)
}

/// Shared "ratio tends to zero" logic for `H₄′` and `H₄″`.
///
/// Holds when the last decade of the tail is ten times smaller than the first
/// and below `1e-3`, or when the ratio is strictly decreasing over the second
/// half of the tail with `d ln r / d ln ln s ≤ −1/4` (slowly varying factors
/// such as powers of logarithms decay at that rate).
fn decays_to_zero(tail: &[f64], r: &[f64], what: &str) -> Check {
    if let Some(i) = r.iter().position(|v| !v.is_finite() || *v <= 0.0) {
        return Check::inconclusive(format!("{what} not positive and finite on the tail")).with_witness(tail[i]);
    }
    let (first, last) = (r[0], *r.last().unwrap());
    let s_end = *tail.last().unwrap();
    if last >= first * (1.0 - 1e-9) {
        return Check::fails(s_end, format!("{what} does not decrease on the tail ({first:e} → {last:e})"))
            .with_constant(last);
    }
    let decade = |lo: f64, hi: f64| {
        tail.iter().zip(r).filter(|(s, _)| **s >= lo && **s <= hi).map(|(_, v)| *v).fold(0.0, f64::max)
    };
    let first_decade = decade(tail[0], 10.0 * tail[0]);
    let last_decade = decade(s_end / 10.0, s_end);
    if last_decade < first_decade / 10.0 && last_decade < 1e-3 {
        return Check::holds(last, format!("{what} dropped by more than a decade on the tail"));
    }
    let mid = r.len() / 2;
    let elasticity = (last / r[mid]).ln() / (s_end.ln() / tail[mid].ln()).ln();
    if strictly_decreasing(&r[mid..]) && elasticity <= -0.25 {
        return Check::holds(last, format!("{what} decreasing, d ln r/d ln ln s = {elasticity:.3}"));
    }
    Check::inconclusive(format!("{what} decreasing slowly (d ln r/d ln ln s = {elasticity:.3})")).with_constant(last)
}

/// `H₄`: `limsup |f(s)|/s^θ < ∞` for some `θ > 0`; reports the smallest `θ ∈ {1/4, 1/2, …, 8}` found.
pub fn check_h4(f: &Nonlinearity, cfg: &ClassifierConfig) -> Check {
    let tail = cfg.tail();
    for k in 1..=32 {
        let theta = k as f64 / 4.0;
        let r: Vec<f64> = tail.iter().map(|&s| f.f(s).abs() / s.powf(theta)).collect();
        if r.iter().any(|v| !v.is_finite()) {
            continue;
        }
        if r.iter().all(|&v| v == 0.0) || loglog_slope(&tail, &r.iter().map(|v| v.max(1e-300)).collect::<Vec<_>>()) <= 1e-9
        {
            let sup = r.iter().copied().fold(0.0, f64::max);
            return Check::holds(sup, format!("|f(s)|/s^θ bounded on the tail for θ = {theta}")).with_parameter(theta);
        }
    }
    Check::fails(*tail.last().unwrap(), "|f(s)|/s^θ grows on the tail for every θ <= 8")
}

/// `H₄′`: `f(s)/s^{p*−1} → 0`.
pub fn check_h4p(f: &Nonlinearity, p: f64, n: usize, cfg: &ClassifierConfig) -> Check {
    let ps = match p_star_or_inconclusive(p, n) {
        Ok(v) => v,
        Err(c) => return c,
    };
    let tail = cfg.tail();
    let r: Vec<f64> = tail.iter().map(|&s| f.f(s) / s.powf(ps - 1.0)).collect();
    decays_to_zero(&tail, &r, "f/s^(p*-1)")
}

/// `H₄″`: `f(s)/(s^{p*−1} H(s)^{p/(N−p)}) → 0`, with `H ≡ 1` if no weight is attached.
pub fn check_h4pp(f: &Nonlinearity, p: f64, n: usize, cfg: &ClassifierConfig) -> Check {
    let ps = match p_star_or_inconclusive(p, n) {
        Ok(v) => v,
        Err(c) => return c,
    };
    let k = p / (n as f64 - p);
    let tail = cfg.tail();
    let r: Vec<f64> = tail
        .iter()
        .map(|&s| f.f(s) / (s.powf(ps - 1.0) * f.weight(s).unwrap_or(1.0).powf(k)))
        .collect();
    decays_to_zero(&tail, &r, "f/(s^(p*-1) H^(p/(N-p)))")
}

/// `H₅`: `liminf min_{[s/2,s]} f / f(s) ≥ C₄ > 0` and `limsup max_{[0,s]} f / f(s) ≤ C₅`.
/// `constant = C₄`, `parameter = C₅`.
pub fn check_h5(f: &Nonlinearity, cfg: &ClassifierConfig) -> Check {
    let tail = cfg.tail();
    if let Some(s) = nonpositive_in_tail(f, &tail) {
        return Check::inconclusive("f is not positive on the tail").with_witness(s);
    }
    let m = cfg.dense_samples;
    let sample = |lo: f64, hi: f64| {
        (0..=m).map(|j| f.f(lo + (hi - lo) * j as f64 / m as f64)).fold((f64::INFINITY, f64::NEG_INFINITY), |acc, v| {
            (acc.0.min(v), acc.1.max(v))
        })
    };
    // running max over [0, s₀·2^k] and the min over each dyadic interval
    let (_, mut running) = sample(0.0, cfg.s0);
    let k0 = cfg.first_tail_index();
    let (mut c4s, mut c5s) = (Vec::new(), Vec::new());
    for k in 1..=cfg.doublings {
        let hi = cfg.s0 * 2f64.powi(k as i32);
        let (lo_min, lo_max) = sample(hi / 2.0, hi);
        running = running.max(lo_max);
        if k >= k0 {
            let fs = f.f(hi);
            c4s.push(lo_min / fs);
            c5s.push(running / fs);
        }
    }
    if c4s.iter().chain(&c5s).any(|v| !v.is_finite()) {
        return Check::inconclusive("H5 ratios not finite on the tail");
    }
    let i4 = argmin(&c4s);
    let c4 = c4s[i4];
    let i5 = argmax(&c5s);
    let c5 = c5s[i5];
    if c4 <= cfg.floor {
        return Check::fails(tail[i4], format!("min over [s/2, s] of f / f(s) = {c4:e}")).with_parameter(c5);
    }
    let growing = c5s.windows(2).all(|w| w[1] > w[0]) && *c5s.last().unwrap() > 2.0 * c5s[0];
    if growing {
        return Check::fails(tail[i5], "max over [0, s] of f / f(s) grows on the tail").with_constant(c4);
    }
    Check::holds(c4, "dense sampling on dyadic intervals").with_parameter(c5)
}

/// Smallest sampled `Λ ≥ 0` with `f(s)/s^{p−1} ≥ −Λ`, padded by 10%.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LambdaEstimate {
    pub lambda: f64,
    pub verdict: Verdict,
    /// Sample point where `f(s)/s^{p−1}` is smallest.
    pub argmin: f64,
}

/// Estimate `Λ` on a geometric grid `s ∈ [s_min, s_max]` (four points per doubling).
/// Rejects `f` failing the `H₁` gate. The estimate is inconclusive when the
/// ratio is still decreasing significantly at either end of the grid.
pub fn estimate_lambda(f: &Nonlinearity, p: f64, cfg: &ClassifierConfig) -> Result<LambdaEstimate> {
    if !(p > 1.0) {
        return Err(Error::InvalidParameter(format!("p = {p} must be > 1")));
    }
    let gate = check_h1(f);
    if gate.verdict == Verdict::Fails {
        return Err(Error::Rejected(format!("{} fails H1: {}", f.name(), gate.note)));
    }
    let mut s = Vec::new();
    let mut x = cfg.lambda_s_min;
    let step = 2f64.powf(0.25);
    while x <= cfg.s_max() {
        s.push(x);
        x *= step;
    }
    let r: Vec<f64> = s.iter().map(|&x| f.f(x) / x.powf(p - 1.0)).collect();
    let i = argmin(&r);
    let lambda = 1.1 * (-r[i]).max(0.0);
    let n = r.len();
    let significant = |a: f64, b: f64| a < b - 1e-6 * b.abs().max(1e-12);
    let falling_at_zero = i == 0 && significant(r[0], r[1]);
    let falling_at_inf = i == n - 1 && significant(r[n - 1], r[n - 2]);
    let verdict = if r[i] < 0.0 && (falling_at_zero || falling_at_inf) { Verdict::Inconclusive } else { Verdict::Holds };
    Ok(LambdaEstimate { lambda, verdict, argmin: s[i] })
}

/// Full hypothesis report for `f` at `(p, N)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HypothesisReport {
    pub nonlinearity: String,
    pub p: f64,
    pub n: usize,
    pub h0: Check,
    pub h1: Check,
    pub h2: Check,
    pub h3: Check,
    pub h4: Check,
    pub h3p: Check,
    pub h4p: Check,
    pub h3pp: Check,
    pub h4pp: Check,
    pub h5: Check,
    pub tau: Option<f64>,
    pub c1: Option<f64>,
    pub c2: Option<f64>,
    pub c3: Option<f64>,
    /// Tail estimate of `(p*F − s f)/(H s f)`.
    pub c3pp: Option<f64>,
    pub c4: Option<f64>,
    pub c5: Option<f64>,
    pub lambda: Option<f64>,
    pub theta: Option<f64>,
    pub s_max: f64,
    pub samples: usize,
    pub tail_fraction: f64,
}

/// Run every check. `lambda1` is needed for `H₀` (inconclusive without it).
pub fn classify(
    f: &Nonlinearity,
    p: f64,
    n: usize,
    lambda1: Option<f64>,
    cfg: &ClassifierConfig,
) -> Result<HypothesisReport> {
    cfg.validate()?;
    critical_exponents(p, n)?;
    let h0 = match lambda1 {
        Some(l) => check_h0(f, p, l, cfg),
        None => Check::inconclusive("no λ₁ supplied"),
    };
    let h1 = check_h1(f);
    let h2 = check_h2(f, p, cfg);
    let h3 = check_h3(f, cfg);
    let h4 = check_h4(f, cfg);
    let h3p = check_h3p(f, p, n, cfg);
    let h4p = check_h4p(f, p, n, cfg);
    let h3pp = check_h3pp(f, p, n, cfg);
    let h4pp = check_h4pp(f, p, n, cfg);
    let h5 = check_h5(f, cfg);
    let lambda = estimate_lambda(f, p, cfg).ok().filter(|e| e.verdict == Verdict::Holds).map(|e| e.lambda);
    Ok(HypothesisReport {
        nonlinearity: f.name().to_string(),
        p,
        n,
        tau: h2.parameter.filter(|_| h2.verdict == Verdict::Holds),
        c1: h2.constant,
        c2: h3.constant,
        c3: h3p.constant,
        c3pp: h3pp.constant,
        c4: h5.constant,
        c5: h5.parameter,
        theta: h4.parameter,
        lambda,
        s_max: cfg.s_max(),
        samples: cfg.doublings as usize + 1,
        tail_fraction: cfg.tail_fraction,
        h0,
        h1,
        h2,
        h3,
        h4,
        h3p,
        h4p,
        h3pp,
        h4pp,
        h5,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const LAMBDA1: f64 = 5.783185962946784;

    fn cfg() -> ClassifierConfig {
        ClassifierConfig::default()
    }

    #[test]
    fn h0_examples() {
        let c = cfg();
        assert_eq!(check_h0(&Nonlinearity::power(3.0, 1.0).unwrap(), 2.0, LAMBDA1, &c).verdict, Verdict::Holds);
        let fails = check_h0(&Nonlinearity::power(1.0, 10.0).unwrap(), 2.0, LAMBDA1, &c);
        assert_eq!(fails.verdict, Verdict::Fails);
        assert!(fails.witness.is_some());
        assert_eq!(check_h0(&Nonlinearity::power(1.0, LAMBDA1).unwrap(), 2.0, LAMBDA1, &c).verdict, Verdict::Fails);
    }

    #[test]
    fn h1_gate() {
        assert_eq!(check_h1(&Nonlinearity::constant(-1.0).unwrap()).verdict, Verdict::Fails);
        assert_eq!(check_h1(&Nonlinearity::power(0.5, 1.0).unwrap()).verdict, Verdict::Fails);
        assert_eq!(check_h1(&Nonlinearity::polynomial(vec![(1.0, 3.0), (-1.0, 1.0)]).unwrap()).verdict, Verdict::Holds);
    }

    #[test]
    fn lambda_examples() {
        let c = cfg();
        let e = estimate_lambda(&Nonlinearity::power(3.0, 1.0).unwrap(), 2.0, &c).unwrap();
        assert_eq!(e.lambda, 0.0);
        let e = estimate_lambda(&Nonlinearity::polynomial(vec![(1.0, 3.0), (-1.0, 1.0)]).unwrap(), 2.0, &c).unwrap();
        assert_eq!(e.verdict, Verdict::Holds);
        assert!((e.lambda - 1.0).abs() <= 0.1 + 1e-9, "Λ = {}", e.lambda);
        assert!(matches!(
            estimate_lambda(&Nonlinearity::constant(-1.0).unwrap(), 2.0, &c),
            Err(Error::Rejected(_))
        ));
        // p = 3: s³ − s over s² is unbounded below at 0
        let e = estimate_lambda(&Nonlinearity::polynomial(vec![(1.0, 3.0), (-1.0, 1.0)]).unwrap(), 3.0, &c).unwrap();
        assert_eq!(e.verdict, Verdict::Inconclusive);
    }

    #[test]
    fn h2_examples() {
        let c = cfg();
        let h = check_h2(&Nonlinearity::power(3.0, 1.0).unwrap(), 2.0, &c);
        assert_eq!(h.verdict, Verdict::Holds);
        assert_eq!(h.parameter, Some(1.0));
        // the ratio s³/s² = s grows, so C₁ = 1 is a valid (conservative) lower bound
        assert!(h.constant.unwrap() >= 1.0);
        assert_eq!(check_h2(&Nonlinearity::homogeneous(2.0, 1.0).unwrap(), 2.0, &c).verdict, Verdict::Fails);
        let ex = check_h2(&Nonlinearity::log_critical(3.0, 2.0, 3).unwrap(), 2.0, &c);
        assert_eq!(ex.verdict, Verdict::Holds);
        assert!(ex.parameter.unwrap() < 4.0);
    }

    #[test]
    fn h3_family_examples() {
        let c = cfg();
        let h = check_h3(&Nonlinearity::power(3.0, 1.0).unwrap(), &c);
        assert_eq!(h.verdict, Verdict::Holds);
        assert!((h.constant.unwrap() - 0.25).abs() < 1e-12);
        let crit = Nonlinearity::critical_power(2.0, 3).unwrap();
        assert_eq!(check_h3p(&crit, 2.0, 3, &c).verdict, Verdict::Fails);
        let ex = Nonlinearity::log_critical(3.0, 2.0, 3).unwrap();
        let h = check_h3pp(&ex, 2.0, 3, &c);
        assert_eq!(h.verdict, Verdict::Holds);
        assert!((h.constant.unwrap() - 0.5).abs() < 0.05, "{:?}", h);
    }

    #[test]
    fn h3pp_without_weight_agrees_with_h3p() {
        let c = cfg();
        for f in [
            Nonlinearity::power(3.0, 1.0).unwrap(),
            Nonlinearity::power(5.0, 1.0).unwrap(),
            Nonlinearity::perturbed_power(2.0).unwrap(),
            Nonlinearity::linear_at_zero(3.0, 1.0, 2.0).unwrap(),
            Nonlinearity::critical_power(2.0, 3).unwrap(),
        ] {
            assert_eq!(check_h3p(&f, 2.0, 3, &c).verdict, check_h3pp(&f, 2.0, 3, &c).verdict, "{}", f.name());
        }
    }

    #[test]
    fn h4_family_examples() {
        let c = cfg();
        assert_eq!(check_h4p(&Nonlinearity::power(4.9, 1.0).unwrap(), 2.0, 3, &c).verdict, Verdict::Holds);
        assert_eq!(check_h4p(&Nonlinearity::critical_power(2.0, 3).unwrap(), 2.0, 3, &c).verdict, Verdict::Fails);
        for alpha in [2.5, 3.0, 4.0] {
            let ex = Nonlinearity::log_critical(alpha, 2.0, 3).unwrap();
            assert_eq!(check_h4pp(&ex, 2.0, 3, &c).verdict, Verdict::Holds, "α = {alpha}");
        }
        let ex = Nonlinearity::log_critical(2.0, 2.0, 3).unwrap();
        assert_eq!(check_h4pp(&ex, 2.0, 3, &c).verdict, Verdict::Fails);
        let h = check_h4(&Nonlinearity::power(3.0, 1.0).unwrap(), &c);
        assert_eq!(h.verdict, Verdict::Holds);
        assert_eq!(h.parameter, Some(3.0));
        assert_eq!(check_h4p(&Nonlinearity::power(3.0, 1.0).unwrap(), 3.0, 3, &c).verdict, Verdict::Inconclusive);
    }

    #[test]
    fn h5_examples() {
        let c = cfg();
        let h = check_h5(&Nonlinearity::power(3.0, 1.0).unwrap(), &c);
        assert_eq!(h.verdict, Verdict::Holds);
        assert!((h.constant.unwrap() - 0.125).abs() < 1e-12);
        assert!((h.parameter.unwrap() - 1.0).abs() < 1e-12);
        let h = check_h5(&Nonlinearity::perturbed_power(2.0).unwrap(), &c);
        assert_eq!(h.verdict, Verdict::Holds);
        assert!(h.constant.unwrap() >= 0.25 / 3.0);
        let h = check_h5(&Nonlinearity::log_critical(3.0, 2.0, 3).unwrap(), &c);
        assert_eq!(h.verdict, Verdict::Holds);
    }

    #[test]
    fn verdicts_carry_witnesses() {
        let c = cfg();
        let fs = [
            Nonlinearity::power(3.0, 1.0).unwrap(),
            Nonlinearity::critical_power(2.0, 3).unwrap(),
            Nonlinearity::log_critical(3.0, 2.0, 3).unwrap(),
            Nonlinearity::homogeneous(2.0, 1.0).unwrap(),
            Nonlinearity::perturbed_power(2.0).unwrap(),
        ];
        for f in &fs {
            let r = classify(f, 2.0, 3, Some(LAMBDA1), &c).unwrap();
            for ch in [&r.h0, &r.h1, &r.h2, &r.h3, &r.h4, &r.h3p, &r.h4p, &r.h3pp, &r.h4pp, &r.h5] {
                match ch.verdict {
                    Verdict::Holds => assert!(ch.constant.is_some(), "{}: {:?}", f.name(), ch),
                    Verdict::Fails => assert!(ch.witness.is_some(), "{}: {:?}", f.name(), ch),
                    Verdict::Inconclusive => {}
                }
            }
            assert_eq!(r, classify(f, 2.0, 3, Some(LAMBDA1), &c).unwrap());
        }
    }
}
