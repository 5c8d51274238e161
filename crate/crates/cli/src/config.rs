//! Typed run configurations.
//!
//! Every subcommand resolves to one variant of [`RunConfig`]: the optional
//! TOML file is read into a table, command-line flags are overlaid on it, and
//! the result is deserialized with unknown keys rejected. The resolved config
//! is what the manifest records and hashes, so feeding it back through
//! `plapd run --config` repeats the run exactly.

use std::str::FromStr;

use plapd_core::existence::HomotopyConfig;
use plapd_core::geometry::{mesh_disc, mesh_polygon, Domain, Mesh};
use plapd_core::identities::ConeSettings;
use plapd_core::nonlinearity::{ClassifierConfig, NonlinearitySpec};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

/// Planar domain to triangulate.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum DomainSpec {
    Disc {
        #[serde(default = "one")]
        radius: f64,
    },
    RegularPolygon {
        sides: usize,
        #[serde(default = "one")]
        circumradius: f64,
    },
    /// Counter-clockwise vertices of a strictly convex polygon.
    Polygon { vertices: Vec<[f64; 2]> },
}

impl Default for DomainSpec {
    fn default() -> Self {
        DomainSpec::Disc { radius: 1.0 }
    }
}

fn one() -> f64 {
    1.0
}

impl DomainSpec {
    pub fn domain(&self) -> plapd_core::Result<Domain> {
        match self {
            DomainSpec::Disc { radius } => Domain::disc(*radius),
            DomainSpec::RegularPolygon { sides, circumradius } => Domain::regular_polygon(*sides, *circumradius),
            DomainSpec::Polygon { vertices } => Domain::polygon(vertices.clone()),
        }
    }

    pub fn mesh(&self, h: f64) -> plapd_core::Result<Mesh> {
        match self.domain()? {
            Domain::Ball { radius, .. } => mesh_disc(radius, h),
            Domain::ConvexPolygon { vertices } => mesh_polygon(&vertices, h),
        }
    }
}

impl FromStr for DomainSpec {
    type Err = String;

    /// `disc`, `disc:radius=2`, `square`, `hexagon`, `polygon:sides=5,circumradius=1`.
    fn from_str(text: &str) -> Result<Self, String> {
        let (kind, rest) = text.trim().split_once(':').unwrap_or((text.trim(), ""));
        let mut radius = None;
        let mut sides = None;
        for item in rest.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            let (k, v) = item.split_once('=').ok_or_else(|| format!("expected key=value, got `{item}`"))?;
            match k.trim() {
                "radius" | "circumradius" => {
                    radius = Some(v.trim().parse::<f64>().map_err(|e| format!("bad radius `{v}`: {e}"))?)
                }
                "sides" => sides = Some(v.trim().parse::<usize>().map_err(|e| format!("bad sides `{v}`: {e}"))?),
                other => return Err(format!("unknown domain parameter `{other}`")),
            }
        }
        match kind {
            "disc" => Ok(DomainSpec::Disc { radius: radius.unwrap_or(1.0) }),
            "square" => Ok(DomainSpec::Polygon { vertices: vec![[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]] }),
            "hexagon" => Ok(DomainSpec::RegularPolygon { sides: 6, circumradius: radius.unwrap_or(1.0) }),
            "polygon" => Ok(DomainSpec::RegularPolygon {
                sides: sides.ok_or("polygon needs sides=<n>")?,
                circumradius: radius.unwrap_or(1.0),
            }),
            other => Err(format!("unknown domain `{other}` (disc, square, hexagon, polygon)")),
        }
    }
}

/// Identity and property checks that can gate a run.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum CheckName {
    Pohozaev,
    Picone,
    Energy,
    Hopf,
    Monotone,
    Boundary,
    /// Seeded random ordered loads on the solution's mesh.
    Comparison,
}

impl CheckName {
    pub fn as_str(self) -> &'static str {
        match self {
            CheckName::Pohozaev => "pohozaev",
            CheckName::Picone => "picone",
            CheckName::Energy => "energy",
            CheckName::Hopf => "hopf",
            CheckName::Monotone => "monotone",
            CheckName::Boundary => "boundary-gradient",
            CheckName::Comparison => "comparison",
        }
    }
}

pub fn default_checks() -> Vec<CheckName> {
    use CheckName::*;
    vec![Pohozaev, Picone, Energy, Hopf, Monotone, Boundary]
}

/// Tolerances of the identity gates.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Gates {
    /// Fixed relative Pohozaev tolerance; when absent the tolerance is
    /// `pohozaev_rate · h_max / inradius`, because the element-wise boundary
    /// flux of P1 solutions converges only at first order.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pohozaev_tol: Option<f64>,
    pub pohozaev_rate: f64,
    /// Picone integral may exceed λ₁ by this relative amount.
    pub picone_tol: f64,
    pub energy_tol: f64,
    /// Strip width of the boundary-gradient bound.
    pub boundary_delta: f64,
    pub boundary_tol: f64,
    pub cone: ConeSettings,
    /// Number of random ordered load pairs of the comparison check.
    pub comparison_pairs: usize,
    pub comparison_tol: f64,
    /// Seed of every randomized check.
    pub seed: u64,
}

impl Gates {
    pub fn pohozaev_tolerance(&self, mesh: &Mesh) -> f64 {
        self.pohozaev_tol.unwrap_or_else(|| self.pohozaev_rate * mesh.h() / mesh.domain().inradius())
    }
}

impl Default for Gates {
    fn default() -> Self {
        Gates {
            pohozaev_tol: None,
            pohozaev_rate: 1.5,
            picone_tol: 0.02,
            energy_tol: 0.01,
            boundary_delta: 0.2,
            boundary_tol: 0.01,
            cone: ConeSettings::default(),
            comparison_pairs: 20,
            comparison_tol: 1e-8,
            seed: 2024,
        }
    }
}

fn default_h() -> f64 {
    0.1
}

fn default_eigen_tol() -> f64 {
    1e-10
}

fn two() -> usize {
    2
}

fn three() -> usize {
    3
}

fn default_samples() -> usize {
    8
}

fn default_profile_name() -> String {
    "profile.csv".into()
}

/// `solve`: fixed point of `K` at `t = 0`, then the identity gates.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolveConfig {
    pub f: NonlinearitySpec,
    pub p: f64,
    #[serde(default)]
    pub domain: DomainSpec,
    #[serde(default = "default_h")]
    pub h: f64,
    #[serde(default = "default_checks")]
    pub checks: Vec<CheckName>,
    #[serde(default)]
    pub gates: Gates,
    #[serde(default)]
    pub homotopy: HomotopyConfigToml,
    /// Also write the triangulation in the plain-text mesh format.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mesh_out: Option<String>,
}

/// `eigen`: first eigenpair of `−Δ_p`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EigenConfig {
    pub p: f64,
    #[serde(default)]
    pub domain: DomainSpec,
    #[serde(default = "default_h")]
    pub h: f64,
    #[serde(default = "default_eigen_tol")]
    pub tol: f64,
}

/// `verify-identities`: gates on a stored solution.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifyConfig {
    /// Path of a `solution.json` written by `solve` or `exist`.
    pub solution: String,
    #[serde(default = "default_checks")]
    pub checks: Vec<CheckName>,
    #[serde(default)]
    pub gates: Gates,
}

/// `check-hypotheses`: growth classification of `f`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HypothesesConfig {
    pub f: NonlinearitySpec,
    pub p: f64,
    #[serde(default = "two")]
    pub n: usize,
    /// First eigenvalue used by the condition at zero; defaults to the unit ball's.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda1: Option<f64>,
    #[serde(default)]
    pub classifier: ClassifierConfig,
}

/// What `exist` computes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ExistMode {
    /// One fixed-point solve at `t = 0`.
    FixedPoint,
    /// Threshold bracket for `f(u) + λ` over an evenly spaced λ-grid.
    LambdaSweep { from: f64, to: f64, count: usize },
    /// Continuation in `t` with forcing `t·λ₀`.
    Homotopy { lambda0: f64 },
    /// Radial log-critical family `u^{p*−1}/ln(e+u)^α` on the unit ball of `R^n`.
    AlphaSweep {
        alphas: Vec<f64>,
        #[serde(default = "three")]
        n: usize,
        #[serde(default = "one")]
        radius: f64,
    },
    /// Ray probe `u = s·K(u)` on the sphere of radius `r`.
    Probe {
        r: f64,
        #[serde(default = "default_samples")]
        samples: usize,
    },
}

impl Default for ExistMode {
    fn default() -> Self {
        ExistMode::FixedPoint
    }
}

/// `exist`: fixed points, continuation, thresholds and sweeps.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExistConfig {
    /// Required by every mode except `alpha-sweep`, which builds its own family.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub f: Option<NonlinearitySpec>,
    pub p: f64,
    #[serde(default)]
    pub domain: DomainSpec,
    #[serde(default = "default_h")]
    pub h: f64,
    #[serde(default)]
    pub mode: ExistMode,
    #[serde(default)]
    pub homotopy: HomotopyConfigToml,
}

/// `oracle-radial`: shooting solution on a ball of `R^n`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RadialConfig {
    pub f: NonlinearitySpec,
    pub p: f64,
    #[serde(default = "two")]
    pub n: usize,
    #[serde(default = "one")]
    pub radius: f64,
    /// File name of the profile inside the run directory.
    #[serde(default = "default_profile_name")]
    pub out: String,
}

/// `sweep`: grid of fixed-point solves over `p` and `h`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub f: NonlinearitySpec,
    pub p_values: Vec<f64>,
    pub h_values: Vec<f64>,
    #[serde(default)]
    pub domain: DomainSpec,
    #[serde(default)]
    pub homotopy: HomotopyConfigToml,
}

/// [`HomotopyConfig`] with an equality so that configs can be compared.
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct HomotopyConfigToml(pub HomotopyConfig);

impl PartialEq for HomotopyConfigToml {
    fn eq(&self, other: &Self) -> bool {
        serde_json::to_value(&self.0).ok() == serde_json::to_value(&other.0).ok()
    }
}

/// A fully resolved run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "kebab-case")]
pub enum RunConfig {
    Solve(SolveConfig),
    Eigen(EigenConfig),
    VerifyIdentities(VerifyConfig),
    CheckHypotheses(HypothesesConfig),
    Exist(ExistConfig),
    OracleRadial(RadialConfig),
    Sweep(SweepConfig),
}

impl RunConfig {
    pub fn command(&self) -> &'static str {
        match self {
            RunConfig::Solve(_) => "solve",
            RunConfig::Eigen(_) => "eigen",
            RunConfig::VerifyIdentities(_) => "verify-identities",
            RunConfig::CheckHypotheses(_) => "check-hypotheses",
            RunConfig::Exist(_) => "exist",
            RunConfig::OracleRadial(_) => "oracle-radial",
            RunConfig::Sweep(_) => "sweep",
        }
    }

    /// Canonical TOML text; the manifest hashes exactly these bytes.
    pub fn to_toml(&self) -> Result<String, CliError> {
        toml::to_string(self).map_err(|e| CliError::Config(format!("cannot serialize config: {e}")))
    }
}

/// Read a config file into a table; a missing path gives an empty table.
pub fn load_table(path: Option<&std::path::Path>) -> Result<toml::Table, CliError> {
    let Some(path) = path else { return Ok(toml::Table::new()) };
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read config {}: {e}", path.display())))?;
    text.parse::<toml::Table>().map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
}

/// Set `table[path[0]][path[1]]… = value`, creating intermediate tables.
pub fn set_path(table: &mut toml::Table, path: &[&str], value: toml::Value) -> Result<(), CliError> {
    let (last, init) = path.split_last().expect("non-empty key path");
    let mut t = table;
    for key in init {
        let entry = t.entry(key.to_string()).or_insert_with(|| toml::Value::Table(toml::Table::new()));
        t = entry
            .as_table_mut()
            .ok_or_else(|| CliError::Config(format!("config key `{key}` must be a table")))?;
    }
    t.insert(last.to_string(), value);
    Ok(())
}

pub fn to_value<T: Serialize>(v: &T) -> Result<toml::Value, CliError> {
    toml::Value::try_from(v).map_err(|e| CliError::Config(format!("cannot encode flag value: {e}")))
}

/// Deserialize a table (already carrying its `command` key) into a [`RunConfig`].
pub fn resolve(table: toml::Table) -> Result<RunConfig, CliError> {
    if table.is_empty() {
        return Err(CliError::Config("empty configuration".into()));
    }
    if !table.contains_key("command") {
        return Err(CliError::Config("missing `command` key".into()));
    }
    toml::Value::Table(table).try_into().map_err(|e: toml::de::Error| CliError::Config(e.to_string()))
}

/// Like [`resolve`] for a file given to a specific subcommand: a `command`
/// key is optional but must agree with the subcommand.
pub fn resolve_for(command: &str, mut table: toml::Table, had_file: bool) -> Result<RunConfig, CliError> {
    if had_file && table.is_empty() {
        return Err(CliError::Config("empty configuration file".into()));
    }
    match table.get("command") {
        Some(toml::Value::String(c)) if c == command => {}
        Some(other) => {
            return Err(CliError::Config(format!("config is for command {other}, not `{command}`")));
        }
        None => {
            table.insert("command".into(), toml::Value::String(command.into()));
        }
    }
    resolve(table)
}
