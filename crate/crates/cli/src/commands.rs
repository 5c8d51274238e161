//! Execution of resolved run configurations.

use std::collections::BTreeMap;
use std::sync::Arc;

use plapd_core::eigen::first_eigenpair;
use plapd_core::existence::{
    estimate_lambda_max, fixed_point_solve, homotopy_branch, krasnoselskii_probe_a, sweep_alpha, BranchPoint,
    BranchSummary, HomotopyConfig,
};
use plapd_core::geometry::{write_mesh, write_nodal_csv, write_radial_csv, Domain, FeFunction, Mesh};
use plapd_core::identities::{
    boundary_gradient_bound, comparison_check, energy_identity_residual, hopf_boundary_check,
    monotonicity_diagnostic, picone_value, pohozaev_radial, pohozaev_residual, IdentityReport, Status,
};
use plapd_core::nonlinearity::{classify, ClassifierConfig, Nonlinearity, NonlinearitySpec, Verdict};
use plapd_core::radial::{radial_eigen, radial_solve_bvp};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::*;
use crate::error::CliError;
use crate::run::{MeshStats, Outcome, RunDir};

/// A computed solution together with everything needed to re-check it.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolutionFile {
    pub p: f64,
    pub f: NonlinearitySpec,
    /// Constant forcing added to `f` (continuation points).
    #[serde(default)]
    pub forcing: f64,
    pub domain: Domain,
    pub nodes: Vec<[f64; 2]>,
    pub triangles: Vec<[usize; 3]>,
    pub boundary: Vec<bool>,
    pub values: Vec<f64>,
}

impl SolutionFile {
    fn new(p: f64, f: &NonlinearitySpec, forcing: f64, u: &FeFunction) -> Self {
        let mesh = u.mesh();
        SolutionFile {
            p,
            f: f.clone(),
            forcing,
            domain: mesh.domain().clone(),
            nodes: mesh.nodes().to_vec(),
            triangles: mesh.triangles().to_vec(),
            boundary: mesh.boundary_flags().to_vec(),
            values: u.values().to_vec(),
        }
    }

    fn function(&self) -> Result<FeFunction, CliError> {
        let mesh = Mesh::from_parts(
            self.domain.clone(),
            self.nodes.clone(),
            self.triangles.clone(),
            self.boundary.clone(),
        )?;
        Ok(FeFunction::new(Arc::new(mesh), self.values.clone())?)
    }

    fn nonlinearity(&self) -> Result<Nonlinearity, CliError> {
        let f = self.f.build(self.p, 2)?;
        Ok(if self.forcing != 0.0 { f.with_shift(self.forcing) } else { f })
    }
}

pub fn execute(cfg: &RunConfig, dir: &mut RunDir) -> Result<Outcome, CliError> {
    match cfg {
        RunConfig::Solve(c) => solve(c, dir),
        RunConfig::Eigen(c) => eigen(c, dir),
        RunConfig::VerifyIdentities(c) => verify(c, dir),
        RunConfig::CheckHypotheses(c) => hypotheses(c, dir),
        RunConfig::Exist(c) => exist(c, dir),
        RunConfig::OracleRadial(c) => oracle_radial(c, dir),
        RunConfig::Sweep(c) => sweep(c, dir),
    }
}

fn status_str(s: Status) -> &'static str {
    match s {
        Status::Pass => "pass",
        Status::Fail => "fail",
        Status::Inconclusive => "inconclusive",
    }
}

fn verdict_str(v: Verdict) -> &'static str {
    match v {
        Verdict::Holds => "holds",
        Verdict::Fails => "fails",
        Verdict::Inconclusive => "inconclusive",
    }
}

fn outcome_str(pt: &BranchPoint) -> String {
    serde_json::to_value(pt.outcome).ok().and_then(|v| v.as_str().map(String::from)).unwrap_or_default()
}

fn write_solution(
    dir: &mut RunDir,
    stem: &str,
    p: f64,
    f: &NonlinearitySpec,
    forcing: f64,
    u: &FeFunction,
) -> Result<(), CliError> {
    dir.write_with(&format!("{stem}.csv"), |w| Ok(write_nodal_csv(u, w)?))?;
    dir.write_json(&format!("{stem}.json"), &SolutionFile::new(p, f, forcing, u))
}

/// Smooth load with values in `[0, 1]`.
fn smooth_load(mesh: &Mesh, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let (a, b, c) = (rng.random_range(0.0..6.0), rng.random_range(0.0..6.0), rng.random_range(0.0..6.0));
    mesh.nodes().iter().map(|x| 0.5 + 0.5 * (a * x[0] + b * x[1] + c).sin()).collect()
}

/// Run the requested checks on `u`; reports are returned in request order.
fn run_checks(
    u: &FeFunction,
    f: &Nonlinearity,
    p: f64,
    checks: &[CheckName],
    gates: &Gates,
) -> Result<Vec<IdentityReport>, CliError> {
    let mesh = u.mesh();
    let mut out = Vec::new();
    for &check in checks {
        match check {
            CheckName::Pohozaev => out.push(pohozaev_residual(u, f, p, gates.pohozaev_tolerance(mesh))?),
            CheckName::Picone => {
                let eig = first_eigenpair(p, mesh, 1e-10)?;
                out.push(picone_value(u, f, p, &eig, gates.picone_tol)?);
            }
            CheckName::Energy => out.push(energy_identity_residual(u, f, p, gates.energy_tol)?),
            CheckName::Hopf => out.push(hopf_boundary_check(u)),
            CheckName::Monotone => out.push(monotonicity_diagnostic(u, &gates.cone)?),
            CheckName::Boundary => {
                out.push(boundary_gradient_bound(u, f, p, gates.boundary_delta, gates.boundary_tol)?)
            }
            CheckName::Comparison => {
                let mut rng = ChaCha8Rng::seed_from_u64(gates.seed);
                let pairs: Vec<(Vec<f64>, Vec<f64>)> = (0..gates.comparison_pairs)
                    .map(|_| {
                        let g1 = smooth_load(mesh, &mut rng);
                        let extra = smooth_load(mesh, &mut rng);
                        let g2 = g1.iter().zip(&extra).map(|(a, b)| a + b).collect();
                        (g1, g2)
                    })
                    .collect();
                let reports: Vec<IdentityReport> = pairs
                    .par_iter()
                    .map(|(g1, g2)| comparison_check(g1, g2, p, mesh, gates.comparison_tol))
                    .collect::<plapd_core::Result<_>>()?;
                out.extend(reports);
            }
        }
    }
    Ok(out)
}

/// Fold reports into per-check gates (a check with several reports passes
/// only if all of them do).
fn gate_reports(out: &mut Outcome, reports: &[IdentityReport]) {
    let mut by_name: BTreeMap<&str, Status> = BTreeMap::new();
    for r in reports {
        let s = by_name.entry(&r.name).or_insert(Status::Pass);
        *s = match (*s, r.status) {
            (Status::Fail, _) | (_, Status::Fail) => Status::Fail,
            (Status::Inconclusive, _) | (_, Status::Inconclusive) => Status::Inconclusive,
            _ => Status::Pass,
        };
    }
    for (name, s) in by_name {
        out.gate(name, s == Status::Pass, status_str(s));
    }
}

fn mesh_for(domain: &DomainSpec, h: f64, out: &mut Outcome) -> Result<Arc<Mesh>, CliError> {
    let mesh = Arc::new(domain.mesh(h)?);
    out.meshes.push(MeshStats::of(&mesh));
    Ok(mesh)
}

fn solve(c: &SolveConfig, dir: &mut RunDir) -> Result<Outcome, CliError> {
    let mut out = Outcome::new();
    let f = c.f.build(c.p, 2)?;
    let mesh = mesh_for(&c.domain, c.h, &mut out)?;
    if let Some(path) = &c.mesh_out {
        dir.write_with(path, |w| Ok(write_mesh(&mesh, w)?))?;
    }
    if c.checks.contains(&CheckName::Comparison) {
        out.seed = Some(c.gates.seed);
    }
    let pt = fixed_point_solve(&f, c.p, &c.homotopy.0, &mesh, 0.0)?;
    dir.write_json("solve.json", &pt.summary())?;
    write_solution(dir, "solution", c.p, &c.f, 0.0, &pt.solution)?;
    out.gate("fixed-point", pt.converged, outcome_str(&pt));
    let reports = if pt.converged { run_checks(&pt.solution, &f, c.p, &c.checks, &c.gates)? } else { Vec::new() };
    if !pt.converged {
        for check in &c.checks {
            out.gate(check.as_str(), false, "skipped");
        }
    }
    gate_reports(&mut out, &reports);
    dir.write_json("identities.json", &reports)?;
    Ok(out)
}

#[derive(Serialize)]
struct EigenOutput {
    #[serde(flatten)]
    summary: plapd_core::eigen::EigenSummary,
    /// Radial oracle when the domain is a disc.
    oracle: Option<f64>,
}

fn eigen(c: &EigenConfig, dir: &mut RunDir) -> Result<Outcome, CliError> {
    let mut out = Outcome::new();
    let mesh = mesh_for(&c.domain, c.h, &mut out)?;
    let pair = first_eigenpair(c.p, &mesh, c.tol)?;
    let oracle = match c.domain {
        DomainSpec::Disc { radius } => Some(radial_eigen(c.p, 2, radius)?),
        _ => None,
    };
    dir.write_json("eigen.json", &EigenOutput { summary: pair.summary(c.p), oracle })?;
    dir.write_with("phi.csv", |w| Ok(write_nodal_csv(&pair.phi, w)?))?;
    out.gate("converged", pair.converged, if pair.converged { "pass" } else { "fail" });
    Ok(out)
}

fn verify(c: &VerifyConfig, dir: &mut RunDir) -> Result<Outcome, CliError> {
    let mut out = Outcome::new();
    let text = std::fs::read_to_string(&c.solution)
        .map_err(|e| CliError::Config(format!("cannot read solution {}: {e}", c.solution)))?;
    let file: SolutionFile =
        serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", c.solution)))?;
    let u = file.function()?;
    out.meshes.push(MeshStats::of(u.mesh()));
    if c.checks.contains(&CheckName::Comparison) {
        out.seed = Some(c.gates.seed);
    }
    let reports = run_checks(&u, &file.nonlinearity()?, file.p, &c.checks, &c.gates)?;
    gate_reports(&mut out, &reports);
    dir.write_json("identities.json", &reports)?;
    Ok(out)
}

fn hypotheses(c: &HypothesesConfig, dir: &mut RunDir) -> Result<Outcome, CliError> {
    let mut out = Outcome::new();
    let f = c.f.build(c.p, c.n)?;
    let lambda1 = match c.lambda1 {
        Some(l) => l,
        None => radial_eigen(c.p, c.n, 1.0)?,
    };
    let report = classify(&f, c.p, c.n, Some(lambda1), &c.classifier)?;
    for (name, check) in [
        ("h0", &report.h0),
        ("h1", &report.h1),
        ("h2", &report.h2),
        ("h3", &report.h3),
        ("h4", &report.h4),
        ("h3p", &report.h3p),
        ("h4p", &report.h4p),
        ("h3pp", &report.h3pp),
        ("h4pp", &report.h4pp),
        ("h5", &report.h5),
    ] {
        out.note(name, verdict_str(check.verdict));
    }
    dir.write_json("hypotheses.json", &report)?;
    Ok(out)
}

#[derive(Serialize)]
struct BranchOutput {
    mode: ExistMode,
    threshold_exceeded: bool,
    points: Vec<BranchSummary>,
    files: Vec<String>,
}

fn exist(c: &ExistConfig, dir: &mut RunDir) -> Result<Outcome, CliError> {
    let mut out = Outcome::new();
    let need_f = || -> Result<(NonlinearitySpec, Nonlinearity), CliError> {
        let spec = c.f.clone().ok_or_else(|| CliError::Config("this exist mode needs `f`".into()))?;
        let f = spec.build(c.p, 2)?;
        Ok((spec, f))
    };
    let mut hc: HomotopyConfig = c.homotopy.0.clone();
    match &c.mode {
        ExistMode::FixedPoint => {
            let (spec, f) = need_f()?;
            let mesh = mesh_for(&c.domain, c.h, &mut out)?;
            let pt = fixed_point_solve(&f, c.p, &hc, &mesh, 0.0)?;
            write_solution(dir, "solution", c.p, &spec, 0.0, &pt.solution)?;
            dir.write_json(
                "exist.json",
                &BranchOutput {
                    mode: c.mode.clone(),
                    threshold_exceeded: false,
                    points: vec![pt.summary()],
                    files: vec!["solution.csv".into()],
                },
            )?;
            out.gate("fixed-point", pt.converged, outcome_str(&pt));
        }
        ExistMode::Homotopy { lambda0 } => {
            let (spec, f) = need_f()?;
            let mesh = mesh_for(&c.domain, c.h, &mut out)?;
            hc.lambda0 = *lambda0;
            let branch = homotopy_branch(&f, c.p, &hc, &mesh)?;
            let mut files = Vec::new();
            for (k, pt) in branch.points.iter().enumerate() {
                let stem = format!("branch_{k:02}");
                write_solution(dir, &stem, c.p, &spec, pt.parameter * lambda0, &pt.solution)?;
                files.push(format!("{stem}.csv"));
                out.gate(format!("t={}", pt.parameter), pt.converged, outcome_str(pt));
            }
            out.gate("branch", !branch.threshold_exceeded, if branch.threshold_exceeded { "threshold-exceeded" } else { "complete" });
            dir.write_json(
                "exist.json",
                &BranchOutput {
                    mode: c.mode.clone(),
                    threshold_exceeded: branch.threshold_exceeded,
                    points: branch.points.iter().map(BranchPoint::summary).collect(),
                    files,
                },
            )?;
        }
        ExistMode::LambdaSweep { from, to, count } => {
            let (_, f) = need_f()?;
            if *count == 0 || !(*from > 0.0) || !(to >= from) {
                return Err(CliError::Config(format!("lambda sweep {from}:{to}:{count} needs 0 < from <= to and count >= 1")));
            }
            if *count > 1 && to == from {
                return Err(CliError::Config("lambda sweep with count > 1 needs from < to".into()));
            }
            hc.lambda_grid = (0..*count)
                .map(|k| if *count == 1 { *from } else { from + (to - from) * k as f64 / (*count - 1) as f64 })
                .collect();
            let mesh = mesh_for(&c.domain, c.h, &mut out)?;
            let report = estimate_lambda_max(&f, c.p, &mesh, &hc)?;
            out.gate("bracket", report.upper.is_some(), if report.upper.is_some() { "finite" } else { "lower-bound-only" });
            out.note("anomalies", report.anomalies.len().to_string());
            dir.write_json("exist.json", &report)?;
        }
        ExistMode::AlphaSweep { alphas, n, radius } => {
            let rows = sweep_alpha(c.p, *n, alphas, *radius, &ClassifierConfig::default())?;
            dir.write_with("alpha_sweep.csv", |w| {
                writeln!(w, "alpha,sup_norm,bvp,h3pp,c3pp,h4pp")?;
                for r in &rows {
                    let opt = |x: Option<f64>| x.map(|v| format!("{v:e}")).unwrap_or_default();
                    writeln!(
                        w,
                        "{},{},{},{},{},{}",
                        r.alpha,
                        opt(r.sup_norm),
                        r.bvp,
                        verdict_str(r.h3pp),
                        opt(r.c3pp),
                        verdict_str(r.h4pp)
                    )?;
                }
                Ok(())
            })?;
            for r in &rows {
                out.note(format!("alpha={}", r.alpha), r.bvp.clone());
            }
            dir.write_json("exist.json", &rows)?;
        }
        ExistMode::Probe { r, samples } => {
            let (_, f) = need_f()?;
            let mesh = mesh_for(&c.domain, c.h, &mut out)?;
            let report = krasnoselskii_probe_a(&f, c.p, *r, &mesh, *samples, &hc)?;
            out.note("probe", verdict_str(report.verdict));
            dir.write_json("exist.json", &report)?;
        }
    }
    Ok(out)
}

#[derive(Serialize)]
struct RadialOutput {
    status: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    sup_norm: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pohozaev: Option<IdentityReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    message: Option<String>,
}

fn oracle_radial(c: &RadialConfig, dir: &mut RunDir) -> Result<Outcome, CliError> {
    let mut out = Outcome::new();
    let f = c.f.build(c.p, c.n)?;
    match radial_solve_bvp(c.p, c.n, &f, c.radius) {
        Ok(profile) => {
            dir.write_with(&c.out, |w| Ok(write_radial_csv(&profile, w)?))?;
            let poh = pohozaev_radial(&profile, &f, c.p, 1e-3)?;
            out.note("pohozaev", status_str(poh.status));
            out.gate("bvp", true, "solved");
            dir.write_json(
                "radial.json",
                &RadialOutput { status: "solved", sup_norm: Some(profile.sup_norm()), pohozaev: Some(poh), message: None },
            )?;
        }
        Err(plapd_core::Error::NoSolutionFound(msg)) => {
            out.gate("bvp", false, "no-solution-found");
            dir.write_json(
                "radial.json",
                &RadialOutput { status: "no-solution-found", sup_norm: None, pohozaev: None, message: Some(msg) },
            )?;
        }
        Err(e) => return Err(e.into()),
    }
    Ok(out)
}

#[derive(Serialize)]
struct SweepCell {
    p: f64,
    h: f64,
    mesh: MeshStats,
    #[serde(flatten)]
    point: BranchSummary,
    /// `u(0)` of the radial solution on the same disc, when available.
    radial_sup: Option<f64>,
}

fn sweep(c: &SweepConfig, dir: &mut RunDir) -> Result<Outcome, CliError> {
    let mut out = Outcome::new();
    if c.p_values.is_empty() || c.h_values.is_empty() {
        return Err(CliError::Config("sweep needs non-empty p_values and h_values".into()));
    }
    let radial: Vec<Option<f64>> = c
        .p_values
        .iter()
        .map(|&p| match c.domain {
            DomainSpec::Disc { radius } => {
                let f = c.f.build(p, 2).ok()?;
                radial_solve_bvp(p, 2, &f, radius).ok().map(|prof| prof.sup_norm())
            }
            _ => None,
        })
        .collect();
    let jobs: Vec<(usize, f64, f64)> = c
        .p_values
        .iter()
        .enumerate()
        .flat_map(|(i, &p)| c.h_values.iter().map(move |&h| (i, p, h)))
        .collect();
    let cells: Vec<SweepCell> = jobs
        .par_iter()
        .map(|&(i, p, h)| -> Result<SweepCell, CliError> {
            let f = c.f.build(p, 2)?;
            let mesh = Arc::new(c.domain.mesh(h)?);
            let pt = fixed_point_solve(&f, p, &c.homotopy.0, &mesh, 0.0)?;
            Ok(SweepCell { p, h, mesh: MeshStats::of(&mesh), point: pt.summary(), radial_sup: radial[i] })
        })
        .collect::<Result<_, _>>()?;
    dir.write_with("sweep.csv", |w| {
        writeln!(w, "p,h,nodes,sup_norm,outcome,iterations,residual,radial_sup")?;
        for cell in &cells {
            let outcome = serde_json::to_value(cell.point.outcome)?;
            writeln!(
                w,
                "{},{},{},{:e},{},{},{:e},{}",
                cell.p,
                cell.h,
                cell.mesh.nodes,
                cell.point.sup_norm,
                outcome.as_str().unwrap_or(""),
                cell.point.iterations,
                cell.point.residual,
                cell.radial_sup.map(|v| format!("{v:e}")).unwrap_or_default()
            )?;
        }
        Ok(())
    })?;
    for cell in &cells {
        out.meshes.push(cell.mesh.clone());
        out.gate(format!("p={},h={}", cell.p, cell.h), cell.point.converged, if cell.point.converged { "converged" } else { "not-converged" });
    }
    dir.write_json("sweep.json", &cells)?;
    Ok(out)
}
