//! Source terms `f`, their primitives, critical exponents and the asymptotic
//! hypothesis classifier.

mod hypotheses;

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::quadrature::integrate_from_zero;
use crate::{Error, Result};

pub use hypotheses::{
    check_h0, check_h1, check_h2, check_h3, check_h3p, check_h3pp, check_h4, check_h4p, check_h4pp, check_h5,
    classify, estimate_lambda, Check, ClassifierConfig, HypothesisReport, LambdaEstimate, Verdict,
};

/// Exponents attached to `(p, N)`. Fields that need `p < N` are `None` otherwise.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExponentSet {
    pub p: f64,
    pub n: usize,
    /// Critical Sobolev exponent `p* = Np/(N−p)`.
    pub p_star: Option<f64>,
    /// Serrin exponent `p_* = (N−1)p/(N−p)`.
    pub p_lower: Option<f64>,
    /// Conjugate of `p*`: `Np/(Np−N+p)`.
    pub p_star_conj: Option<f64>,
    /// Conjugate of `p`: `p/(p−1)`.
    pub p_conj: f64,
}

pub fn critical_exponents(p: f64, n: usize) -> Result<ExponentSet> {
    if !(p > 1.0 && p.is_finite()) {
        return Err(Error::InvalidParameter(format!("p = {p} must satisfy 1 < p < ∞")));
    }
    if n < 2 {
        return Err(Error::InvalidParameter(format!("dimension N = {n} must be >= 2")));
    }
    let nf = n as f64;
    let sub = p < nf;
    Ok(ExponentSet {
        p,
        n,
        p_star: sub.then(|| nf * p / (nf - p)),
        p_lower: sub.then(|| (nf - 1.0) * p / (nf - p)),
        p_star_conj: sub.then(|| nf * p / (nf * p - nf + p)),
        p_conj: p / (p - 1.0),
    })
}

fn require_p_star(p: f64, n: usize, what: &str) -> Result<f64> {
    critical_exponents(p, n)?
        .p_star
        .ok_or_else(|| Error::InvalidParameter(format!("{what} needs p < N (got p = {p}, N = {n})")))
}

type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

#[derive(Clone)]
enum Kind {
    /// `Σ c_k s^{e_k}` with `e_k >= 0`.
    Terms(Vec<(f64, f64)>),
    /// `s^q (2 + sin s)`.
    Perturbed { q: f64 },
    /// `s^e / ln(e+s)^α`.
    LogCorrected { e: f64, alpha: f64 },
    Custom { f: ScalarFn, primitive: Option<ScalarFn> },
}

#[derive(Clone)]
enum Weight {
    InverseLog,
    Custom(ScalarFn),
}

/// A nonlinearity `f: [0, ∞) → R` with its primitive `F(s) = ∫_0^s f` and an
/// optional nonincreasing positive weight `H`.
///
/// `f` is extended to negative arguments by `f(0)` (and `F` linearly), which
/// keeps the discrete solvers well defined when an iterate dips below zero.
#[derive(Clone)]
pub struct Nonlinearity {
    name: String,
    params: BTreeMap<String, f64>,
    kind: Kind,
    weight: Option<Weight>,
    shift: f64,
}

impl fmt::Debug for Nonlinearity {
    fn fmt(&self, fm: &mut fmt::Formatter<'_>) -> fmt::Result {
        fm.debug_struct("Nonlinearity")
            .field("name", &self.name)
            .field("params", &self.params)
            .field("shift", &self.shift)
            .field("weighted", &self.weight.is_some())
            .finish()
    }
}

impl Nonlinearity {
    fn with_kind(name: impl Into<String>, params: &[(&str, f64)], kind: Kind) -> Self {
        Nonlinearity {
            name: name.into(),
            params: params.iter().map(|(k, v)| (k.to_string(), *v)).collect(),
            kind,
            weight: None,
            shift: 0.0,
        }
    }

    /// `c·s^q`.
    pub fn power(q: f64, c: f64) -> Result<Self> {
        if !(q >= 0.0 && q.is_finite() && c.is_finite()) {
            return Err(Error::InvalidParameter(format!("power nonlinearity needs q >= 0 (got q = {q}, c = {c})")));
        }
        Ok(Self::with_kind("power", &[("q", q), ("c", c)], Kind::Terms(vec![(c, q)])))
    }

    /// `Σ c_k s^{e_k}`, exponents `>= 0`.
    pub fn polynomial(terms: Vec<(f64, f64)>) -> Result<Self> {
        if terms.iter().any(|&(c, e)| !(e >= 0.0 && e.is_finite() && c.is_finite())) {
            return Err(Error::InvalidParameter("polynomial terms need finite coefficients and exponents >= 0".into()));
        }
        let params: Vec<(String, f64)> = terms.iter().map(|&(c, e)| (format!("s^{e}"), c)).collect();
        let mut out = Self::with_kind("polynomial", &[], Kind::Terms(terms));
        out.params = params.into_iter().collect();
        Ok(out)
    }

    /// The constant `c`.
    pub fn constant(c: f64) -> Result<Self> {
        let mut f = Self::power(0.0, c)?;
        f.name = "constant".into();
        f.params = [("c".to_string(), c)].into();
        Ok(f)
    }

    pub fn zero() -> Self {
        let mut f = Self::with_kind("zero", &[], Kind::Terms(Vec::new()));
        f.params.clear();
        f
    }

    /// `c·s^{p−1}`.
    pub fn homogeneous(p: f64, c: f64) -> Result<Self> {
        let mut f = Self::power(p - 1.0, c)?;
        f.name = "homogeneous".into();
        f.params = [("p".to_string(), p), ("c".to_string(), c)].into();
        Ok(f)
    }

    /// `s^q + c·s^{p−1}`.
    pub fn linear_at_zero(q: f64, c: f64, p: f64) -> Result<Self> {
        if !(q >= 0.0 && q.is_finite() && c.is_finite() && p > 1.0) {
            return Err(Error::InvalidParameter(format!("linear-at-zero needs q >= 0, p > 1 (got q = {q}, p = {p})")));
        }
        Ok(Self::with_kind(
            "linear-at-zero",
            &[("q", q), ("c", c), ("p", p)],
            Kind::Terms(vec![(1.0, q), (c, p - 1.0)]),
        ))
    }

    /// `s^q (2 + sin s)`: growth trapped between `s^q` and `3 s^q`.
    pub fn perturbed_power(q: f64) -> Result<Self> {
        if !(q >= 0.0 && q.is_finite()) {
            return Err(Error::InvalidParameter(format!("perturbed power needs q >= 0 (got {q})")));
        }
        Ok(Self::with_kind("perturbed", &[("q", q)], Kind::Perturbed { q }))
    }

    /// `s^{p*−1}`, the critical power for `(p, N)`.
    pub fn critical_power(p: f64, n: usize) -> Result<Self> {
        let ps = require_p_star(p, n, "critical power")?;
        let mut f = Self::power(ps - 1.0, 1.0)?;
        f.name = "critical-power".into();
        f.params = [("p".to_string(), p), ("N".to_string(), n as f64)].into();
        Ok(f)
    }

    /// `s^{p*−1}/ln(e+s)^α` with weight `H(s) = 1/ln(e+s)`.
    pub fn log_critical(alpha: f64, p: f64, n: usize) -> Result<Self> {
        let ps = require_p_star(p, n, "log-critical nonlinearity")?;
        if !(alpha >= 0.0 && alpha.is_finite()) {
            return Err(Error::InvalidParameter(format!("α = {alpha} must be >= 0")));
        }
        let mut f = Self::with_kind(
            "log-critical",
            &[("alpha", alpha), ("p", p), ("N", n as f64)],
            Kind::LogCorrected { e: ps - 1.0, alpha },
        );
        f.weight = Some(Weight::InverseLog);
        Ok(f)
    }

    /// Arbitrary `f`; the primitive is computed by quadrature unless supplied.
    pub fn custom(
        name: impl Into<String>,
        f: impl Fn(f64) -> f64 + Send + Sync + 'static,
        primitive: Option<ScalarFn>,
    ) -> Self {
        Self::with_kind(name, &[], Kind::Custom { f: Arc::new(f), primitive })
    }

    /// Attach a weight `H` (expected positive and nonincreasing).
    pub fn with_weight(mut self, h: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        self.weight = Some(Weight::Custom(Arc::new(h)));
        self
    }

    /// `f + λ` (the forced problem `−Δ_p u = f(u) + λ`).
    pub fn with_shift(mut self, lambda: f64) -> Self {
        self.shift = lambda;
        self
    }

    pub fn shift(&self) -> f64 {
        self.shift
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn params(&self) -> &BTreeMap<String, f64> {
        &self.params
    }

    pub fn has_weight(&self) -> bool {
        self.weight.is_some()
    }

    fn raw(&self, s: f64) -> f64 {
        match &self.kind {
            Kind::Terms(t) => t.iter().map(|&(c, e)| c * s.powf(e)).sum(),
            Kind::Perturbed { q } => s.powf(*q) * (2.0 + s.sin()),
            Kind::LogCorrected { e, alpha } => s.powf(*e) / (std::f64::consts::E + s).ln().powf(*alpha),
            Kind::Custom { f, .. } => f(s),
        }
    }

    /// `f(s)`, with `f(s) = f(0)` for `s < 0`.
    pub fn f(&self, s: f64) -> f64 {
        self.raw(s.max(0.0)) + self.shift
    }

    /// `F(s) = ∫_0^s f`.
    pub fn primitive(&self, s: f64) -> f64 {
        if s <= 0.0 {
            return self.f(0.0) * s;
        }
        let base = match &self.kind {
            Kind::Terms(t) => t.iter().map(|&(c, e)| c * s.powf(e + 1.0) / (e + 1.0)).sum(),
            Kind::Custom { primitive: Some(big), .. } => big(s),
            Kind::Perturbed { q } if s > PERTURBED_CUTOFF => perturbed_primitive_large(*q, s),
            _ => integrate_from_zero(&|x| self.raw(x), s, 1e-13),
        };
        base + self.shift * s
    }

    /// `H(s)`, or `None` when no weight is attached.
    pub fn weight(&self, s: f64) -> Option<f64> {
        self.weight.as_ref().map(|w| match w {
            Weight::InverseLog => 1.0 / (std::f64::consts::E + s.max(0.0)).ln(),
            Weight::Custom(h) => h(s),
        })
    }
}

/// Above this point the oscillatory part of `∫ t^q (2 + sin t)` is handled
/// by integration by parts instead of quadrature.
const PERTURBED_CUTOFF: f64 = 1e4;

/// `∫_0^s t^q (2 + sin t) dt` for `s > PERTURBED_CUTOFF`:
/// `∫_c^s t^q sin t = [−t^q cos t + q t^{q−1} sin t]_c^s − q(q−1)∫_c^s t^{q−2} sin t`,
/// where the last integral is `O(s^{q−1})` and dropped (relative size `q/s²`).
fn perturbed_primitive_large(q: f64, s: f64) -> f64 {
    let c = PERTURBED_CUTOFF;
    let head = integrate_from_zero(&|t: f64| t.powf(q) * (2.0 + t.sin()), c, 1e-13);
    let bracket = |t: f64| -t.powf(q) * t.cos() + q * t.powf(q - 1.0) * t.sin();
    head + 2.0 * (s.powf(q + 1.0) - c.powf(q + 1.0)) / (q + 1.0) + bracket(s) - bracket(c)
}

/// Declarative description of a built-in nonlinearity, as used in configs:
/// `f = { kind = "power", q = 3 }` or the compact string `power:q=3`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum NonlinearitySpec {
    Power {
        q: f64,
        #[serde(default = "one")]
        c: f64,
    },
    Homogeneous {
        c: f64,
    },
    Constant {
        c: f64,
    },
    LinearAtZero {
        q: f64,
        c: f64,
    },
    Perturbed {
        q: f64,
    },
    LogCritical {
        alpha: f64,
    },
    CriticalPower,
    /// `terms = [[c, e], ...]` meaning `Σ c s^e`.
    Polynomial {
        terms: Vec<[f64; 2]>,
    },
    Zero,
}

fn one() -> f64 {
    1.0
}

impl NonlinearitySpec {
    /// Instantiate for exponent `p` in dimension `n` (needed by the critical kinds).
    pub fn build(&self, p: f64, n: usize) -> Result<Nonlinearity> {
        match *self {
            NonlinearitySpec::Power { q, c } => Nonlinearity::power(q, c),
            NonlinearitySpec::Homogeneous { c } => Nonlinearity::homogeneous(p, c),
            NonlinearitySpec::Constant { c } => Nonlinearity::constant(c),
            NonlinearitySpec::LinearAtZero { q, c } => Nonlinearity::linear_at_zero(q, c, p),
            NonlinearitySpec::Perturbed { q } => Nonlinearity::perturbed_power(q),
            NonlinearitySpec::LogCritical { alpha } => Nonlinearity::log_critical(alpha, p, n),
            NonlinearitySpec::CriticalPower => Nonlinearity::critical_power(p, n),
            NonlinearitySpec::Polynomial { ref terms } => {
                Nonlinearity::polynomial(terms.iter().map(|t| (t[0], t[1])).collect())
            }
            NonlinearitySpec::Zero => Ok(Nonlinearity::zero()),
        }
    }
}

impl std::str::FromStr for NonlinearitySpec {
    type Err = Error;

    /// `kind[:key=value,...]`, e.g. `power:q=3`, `log-critical:alpha=3`,
    /// `polynomial:3=1,1=-1` (exponent = coefficient).
    fn from_str(text: &str) -> Result<Self> {
        let (kind, rest) = text.trim().split_once(':').unwrap_or((text.trim(), ""));
        let mut kv: BTreeMap<String, f64> = BTreeMap::new();
        let mut ordered = Vec::new();
        for item in rest.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            let (k, v) = item
                .split_once('=')
                .ok_or_else(|| Error::InvalidInput(format!("expected key=value in nonlinearity spec, got `{item}`")))?;
            let v: f64 = v
                .trim()
                .parse()
                .map_err(|_| Error::InvalidInput(format!("`{v}` is not a number in nonlinearity spec")))?;
            ordered.push((k.trim().to_string(), v));
            kv.insert(k.trim().to_string(), v);
        }
        let mut take = |key: &str| -> Result<f64> {
            kv.remove(key)
                .ok_or_else(|| Error::InvalidInput(format!("nonlinearity `{kind}` needs parameter `{key}`")))
        };
        let spec = match kind {
            "power" => {
                let q = take("q")?;
                let c = take("c").unwrap_or(1.0);
                NonlinearitySpec::Power { q, c }
            }
            "homogeneous" => NonlinearitySpec::Homogeneous { c: take("c")? },
            "constant" => NonlinearitySpec::Constant { c: take("c")? },
            "linear-at-zero" => NonlinearitySpec::LinearAtZero { q: take("q")?, c: take("c")? },
            "perturbed" => NonlinearitySpec::Perturbed { q: take("q")? },
            "log-critical" => NonlinearitySpec::LogCritical { alpha: take("alpha")? },
            "critical-power" => NonlinearitySpec::CriticalPower,
            "zero" => NonlinearitySpec::Zero,
            "polynomial" => {
                let mut terms = Vec::new();
                for (k, c) in ordered {
                    let e: f64 = k
                        .parse()
                        .map_err(|_| Error::InvalidInput(format!("polynomial exponent `{k}` is not a number")))?;
                    terms.push([c, e]);
                }
                kv.clear();
                NonlinearitySpec::Polynomial { terms }
            }
            other => return Err(Error::InvalidInput(format!("unknown nonlinearity kind `{other}`"))),
        };
        if let Some(extra) = kv.keys().next() {
            return Err(Error::InvalidInput(format!("unknown parameter `{extra}` for nonlinearity `{kind}`")));
        }
        Ok(spec)
    }
}
