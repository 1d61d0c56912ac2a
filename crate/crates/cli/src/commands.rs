use crate::args::{Command, ConstantArg, Global, ParamArgs, RadiusRange};
use crate::output::{Report, Table};
use ckn_core::acceptance::{self, AcceptanceConfig};
use ckn_core::extremals::{self, bubble_scaled, tangent_generator};
use ckn_core::ineq::{self, ConstantKind};
use ckn_core::manifold::{distance_to_manifold_with, DistanceOptions};
use ckn_core::regions::{classify, region_map, RegionMap};
use ckn_core::spectral::{self, SolverConfig};
use ckn_core::stability::{log_grid, scan_directions, stability_scan};
use ckn_core::{functionals, CknParams, Error, QuadratureSpec, RadialProfile, Sampled};
use serde_json::{json, to_value, Value};
use thiserror::Error as ThisError;

#[derive(Debug, ThisError)]
pub enum CmdError {
    #[error(transparent)]
    Core(#[from] Error),
    #[error("{0}")]
    Usage(String),
    #[error("serialization: {0}")]
    Json(#[from] serde_json::Error),
}

impl CmdError {
    /// 1 for bad input, 2 for a failed property, 3 for non-convergence.
    pub fn exit_code(&self) -> i32 {
        match self {
            CmdError::Usage(_) | CmdError::Json(_) => 1,
            CmdError::Core(e) if e.is_non_convergence() => 3,
            CmdError::Core(
                Error::Param(_)
                | Error::Profile(_)
                | Error::InvalidInput(_)
                | Error::Domain(_)
                | Error::BranchMismatch { .. }
                | Error::VariantMismatch { .. },
            ) => 1,
            CmdError::Core(_) => 2,
        }
    }
}

type CmdResult = Result<Report, CmdError>;

fn params_of(a: &ParamArgs) -> Result<CknParams, CmdError> {
    Ok(CknParams::validate(a.n, a.p, a.mu, a.s).map_err(Error::from)?)
}

fn num(x: f64) -> String {
    x.to_string()
}

fn radii(r: &RadiusRange) -> Result<Vec<f64>, CmdError> {
    if !(r.rho_min > 0.0 && r.rho_max > r.rho_min) || r.points < 2 {
        return Err(CmdError::Usage("need 0 < rho-min < rho-max and at least 2 points".into()));
    }
    let mut v = log_grid(r.rho_min, r.rho_max, r.points);
    v.reverse();
    Ok(v)
}

pub fn run(cmd: &Command, g: &Global) -> CmdResult {
    let spec = QuadratureSpec::default().with_rel_tol(g.rel_tol);
    spec.check().map_err(|e| CmdError::Usage(e.to_string()))?;
    match cmd {
        Command::Validate { params } => validate(params),
        Command::Bubble { params, range, lambda } => bubble(params, range, *lambda),
        Command::Residual { params, range } => residual(params, range),
        Command::Constant { params } => constant(params, &spec),
        Command::Spectrum { params, mode, neigs, grid, eigenfunctions } => {
            spectrum(params, *mode, *neigs, *grid, *eigenfunctions)
        }
        Command::Nondegeneracy { params, grid, k_max } => nondegeneracy(params, *grid, *k_max),
        Command::Gap { params, grid, k_max } => gap(params, *grid, *k_max),
        Command::Distance { params, input } => distance(params, input, &spec),
        Command::Scan { params, direction, eps_min, eps_max, points } => {
            scan(params, *direction, (*eps_min, *eps_max), *points, &spec)
        }
        Command::Expansion { params, c, lambda, d, kappa, direction, samples } => {
            expansion(params, (*c, *lambda, *d, *kappa), *direction, *samples, g.seed, &spec)
        }
        Command::Ineq { kind, exponent, kappa, samples, verify, dim } => {
            ineq_cmd(*kind, *exponent, *kappa, *samples, *verify, *dim, g.seed)
        }
        Command::Regions { n, p, map, a, b, a_min, a_max, b_min, b_max, grid } => {
            if *map {
                let ac = (*n as f64 - p) / p;
                let a_hi = a_max.unwrap_or(ac - 1e-3);
                let b_hi = b_max.unwrap_or(ac + 1.0);
                Ok(regions_map(region_map(*n, *p, (*a_min, a_hi), (*b_min, b_hi), *grid, *grid)))
            } else {
                let (Some(a), Some(b)) = (a, b) else {
                    return Err(CmdError::Usage("regions needs --a and --b, or --map".into()));
                };
                let v = classify(*n, *p, *a, *b);
                let results = to_value(&v)?;
                Ok(Report::new(Some(json!({"n": n, "p": p, "a": a, "b": b})), results.clone(), Table::from_object(&results)))
            }
        }
        Command::All { grid, ineq_samples, only } => all(*grid, *ineq_samples, only, g.seed, spec),
    }
}

fn validate(a: &ParamArgs) -> CmdResult {
    let params = params_of(a)?;
    let d = params.derive();
    let mut results = to_value(d)?;
    if let Value::Object(m) = &mut results {
        m.remove("params");
    }
    Ok(Report::new(Some(to_value(params)?), results.clone(), Table::from_object(&results)))
}

fn bubble(a: &ParamArgs, range: &RadiusRange, lambda: f64) -> CmdResult {
    let params = params_of(a)?;
    let u = bubble_scaled(&params, lambda).map_err(Error::from)?;
    let w = tangent_generator(&params);
    let mut t = Table::new(&["rho", "u", "du", "w0", "dw0"]);
    for rho in radii(range)? {
        t.push(vec![num(rho), num(u.value(rho)), num(u.deriv(rho)), num(w.value(rho)), num(w.deriv(rho))]);
    }
    let results = json!({"lambda": lambda, "columns": t.headers, "rows": t.rows});
    Ok(Report::new(Some(to_value(params)?), results, t))
}

fn residual(a: &ParamArgs, range: &RadiusRange) -> CmdResult {
    let params = params_of(a)?;
    let mut t = Table::new(&["rho", "lhs", "rhs", "relative"]);
    let mut worst: f64 = 0.0;
    for rho in radii(range)? {
        let (lhs, rhs) = extremals::el_sides(&params, rho);
        let rel = ((lhs - rhs) / rhs).abs();
        worst = worst.max(rel);
        t.push(vec![num(rho), num(lhs), num(rhs), num(rel)]);
    }
    let results = json!({"max_relative": worst, "rows": t.rows});
    Ok(Report::new(Some(to_value(params)?), results, t))
}

fn constant(a: &ParamArgs, spec: &QuadratureSpec) -> CmdResult {
    let params = params_of(a)?;
    let bc = functionals::best_constant_report(&params, spec)?;
    let mut results = to_value(bc)?;
    if let Value::Object(m) = &mut results {
        m.insert("relative_gap".into(), json!(bc.relative_gap()));
    }
    Ok(Report::new(Some(to_value(params)?), results.clone(), Table::from_object(&results)))
}

fn spectrum(a: &ParamArgs, mode: u32, neigs: usize, grid: usize, eigenfunctions: bool) -> CmdResult {
    let params = params_of(a)?;
    let sp = spectral::eigen_solve(&spectral::assemble(&params, mode), neigs, grid)?;
    let mut t = Table::new(&["index", "alpha", "xi", "error_estimate", "sign_changes"]);
    for i in 0..sp.xis.len() {
        t.push(vec![
            (i + 1).to_string(),
            num(sp.alphas[i]),
            num(sp.xis[i]),
            num(sp.error_estimates[i]),
            sp.sign_changes[i].to_string(),
        ]);
    }
    let mut results = json!({
        "k": sp.k,
        "alphas": sp.alphas,
        "xis": sp.xis,
        "raw": sp.raw,
        "error_estimates": sp.error_estimates,
        "sign_changes": sp.sign_changes,
        "solver": sp.config,
    });
    if eigenfunctions {
        results["tau"] = json!(sp.tau);
        results["eigenfunctions"] = json!(sp.eigenfunctions);
    }
    Ok(Report::new(Some(to_value(params)?), results, t))
}

fn nondegeneracy(a: &ParamArgs, grid: usize, k_max: u32) -> CmdResult {
    let params = params_of(a)?;
    let rep = spectral::verify_known_modes_with(&params, k_max, &SolverConfig::with_grid(grid))?;
    let mut t = Table::new(&["k", "multiplicity", "xi1", "margin"]);
    for m in &rep.modes {
        t.push(vec![m.k.to_string(), m.multiplicity.to_string(), num(m.xi1), num(m.margin)]);
    }
    let mut report = Report::new(Some(to_value(params)?), to_value(&rep)?, t);
    report.assertion_failed = !rep.nondegenerate;
    Ok(report)
}

fn gap(a: &ParamArgs, grid: usize, k_max: u32) -> CmdResult {
    let params = params_of(a)?;
    let rep = spectral::spectral_gap(&params, k_max, grid)?;
    let results = to_value(&rep)?;
    let t = Table::from_object(&json!({"tau_hat": rep.tau_hat, "mode": rep.mode, "xi3_mode0": rep.xi3_mode0}));
    Ok(Report::new(Some(to_value(params)?), results, t))
}

fn distance(a: &ParamArgs, input: &std::path::Path, spec: &QuadratureSpec) -> CmdResult {
    let params = params_of(a)?;
    let file = std::fs::File::open(input).map_err(|e| CmdError::Usage(format!("{}: {e}", input.display())))?;
    let sampled = Sampled::read_csv(file).map_err(Error::from)?;
    let u = RadialProfile::sampled(sampled);
    let rep = distance_to_manifold_with(&u, &params, spec, &DistanceOptions::default())?;
    let results = to_value(&rep)?;
    let t = Table::from_object(&json!({
        "distance": rep.distance,
        "c": rep.point.c,
        "lambda": rep.point.lambda,
        "norm_u": rep.norm_u,
        "foc_c": rep.foc_c,
        "foc_lambda": rep.foc_lambda,
    }));
    Ok(Report::new(Some(to_value(params)?), results, t))
}

fn direction_of(params: &CknParams, direction: usize, spec: &QuadratureSpec) -> Result<RadialProfile, CmdError> {
    let dirs = scan_directions(params, spec)?;
    let n = dirs.len();
    dirs.into_iter().nth(direction).ok_or_else(|| CmdError::Usage(format!("direction must be below {n}")))
}

fn scan(a: &ParamArgs, direction: usize, eps: (f64, f64), points: usize, spec: &QuadratureSpec) -> CmdResult {
    let params = params_of(a)?;
    if !(eps.0 > 0.0 && eps.1 > eps.0) {
        return Err(CmdError::Usage("need 0 < eps-min < eps-max".into()));
    }
    let w = direction_of(&params, direction, spec)?;
    let rep = stability_scan(&params, &w, &log_grid(eps.0, eps.1, points), spec)?;
    let mut t = Table::new(&["eps", "distance", "deficit", "ratio_gamma", "ratio_p"]);
    for i in 0..rep.eps_grid.len() {
        t.push(vec![
            num(rep.eps_grid[i]),
            num(rep.distances[i]),
            num(rep.deficits[i]),
            num(rep.ratio_gamma[i]),
            num(rep.ratio_p[i]),
        ]);
    }
    let mut report = Report::new(Some(to_value(params)?), to_value(&rep)?, t);
    report.assertion_failed = rep.lower_bound_b.is_nan() || rep.lower_bound_b <= 0.0;
    Ok(report)
}

fn expansion(
    a: &ParamArgs,
    (c, lambda, d, kappa): (f64, f64, f64, f64),
    direction: usize,
    samples: usize,
    seed: u64,
    spec: &QuadratureSpec,
) -> CmdResult {
    let params = params_of(a)?;
    let w = direction_of(&params, direction, spec)?;
    let c1 = ineq::search_constant(ConstantKind::C1, params.p(), kappa, samples, seed)?;
    let c2 = ineq::search_constant(ConstantKind::C2, params.r(), kappa, samples, seed)?;
    let rep = ckn_core::stability::expansion_check(&params, c, lambda, &w, d, kappa, c1.value, c2.value, spec)?;
    let holds = rep.holds(1e-10);
    let mut results = to_value(&rep)?;
    results["holds"] = json!(holds);
    let mut report = Report::new(Some(to_value(params)?), results.clone(), Table::from_object(&results));
    report.assertion_failed = !holds;
    Ok(report)
}

fn ineq_cmd(kind: ConstantArg, exponent: f64, kappa: f64, samples: usize, verify: usize, dim: usize, seed: u64) -> CmdResult {
    let kind = match kind {
        ConstantArg::C1 => ConstantKind::C1,
        ConstantArg::C2 => ConstantKind::C2,
    };
    if dim < 2 {
        return Err(CmdError::Usage("dim must be at least 2".into()));
    }
    let est = ineq::search_constant(kind, exponent, kappa, samples, seed)?;
    let check_seed = seed.wrapping_add(1);
    let ver = match kind {
        ConstantKind::C1 => ineq::verify_vector(exponent, kappa, est.value, dim, verify, check_seed)?,
        ConstantKind::C2 => ineq::verify_scalar(exponent, kappa, est.value, verify, check_seed)?,
    };
    let results = json!({"estimate": est, "verification": ver});
    let t = Table::from_object(&json!({
        "kind": format!("{kind:?}"),
        "exponent": exponent,
        "kappa": kappa,
        "value": est.value,
        "bracket_lo": est.bracket.0,
        "bracket_hi": est.bracket.1,
        "search_samples": est.samples,
        "verify_samples": ver.samples,
        "violations": ver.violations,
        "worst_margin": ver.worst_margin,
    }));
    let mut report = Report::new(None, results, t);
    report.assertion_failed = ver.violations > 0;
    Ok(report)
}

fn regions_map(map: RegionMap) -> Report {
    let mut t = Table::new(&["a", "b", "verdict", "provenance"]);
    for c in &map.cells {
        t.push(vec![num(c.a), num(c.b), c.verdict.verdict.as_str().into(), c.verdict.provenance.into()]);
    }
    let extra = map
        .curves
        .iter()
        .map(|curve| {
            let mut ct = Table::new(&["a", "b"]);
            for (a, b) in &curve.points {
                ct.push(vec![num(*a), num(*b)]);
            }
            (curve.name.to_string(), ct)
        })
        .collect();
    let results = json!({"cells": t.rows, "curves": map.curves});
    let mut report = Report::new(Some(json!({"n": map.n, "p": map.p})), results, t);
    report.extra = extra;
    report
}

fn all(grid: usize, ineq_samples: usize, only: &[u8], seed: u64, spec: QuadratureSpec) -> CmdResult {
    let cfg = AcceptanceConfig { grid_size: grid, seed, ineq_samples, spec };
    let ids: Vec<u8> = if only.is_empty() { (1..=10).collect() } else { only.to_vec() };
    let mut outcomes = Vec::new();
    for id in ids {
        let out = acceptance::run(id, &cfg).ok_or_else(|| CmdError::Usage(format!("no criterion {id}")))?;
        eprintln!("{}", out.line());
        outcomes.push(out);
    }
    let mut t = Table::new(&["id", "title", "passed", "detail"]);
    for o in &outcomes {
        t.push(vec![o.id.to_string(), o.title.into(), o.passed.to_string(), o.detail.clone()]);
    }
    // timings go to stderr only, so the artifact is reproducible
    let results: Vec<Value> = outcomes
        .iter()
        .map(|o| json!({"id": o.id, "title": o.title, "passed": o.passed, "non_convergence": o.non_convergence}))
        .collect();
    let mut report = Report::new(None, json!({"criteria": results}), t);
    report.assertion_failed = outcomes.iter().any(|o| !o.passed);
    report.non_convergence = outcomes.iter().any(|o| o.non_convergence);
    Ok(report)
}
