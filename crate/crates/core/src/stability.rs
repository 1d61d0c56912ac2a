//! Probes of the quantitative stability estimate: the `ω̄`/`ω̃` weights, the
//! improved spectral-gap forms, deficit-versus-distance scans and the
//! expansions of the two norms around `cU_λ`.

use crate::error::{Error, Result};
use crate::extremals::{bubble, bubble_scaled, bump, RadialProfile};
use crate::functionals::{grad_norm_p, perturbed_deficit};
use crate::ineq::{ConstantEstimate, PairShape, ScalarBranch};
use crate::manifold::{distance_to_manifold_with, project_tangent_orthogonal, DistanceOptions, ManifoldPoint};
use crate::params::CknParams;
use crate::quadrature::{QuadratureSpec, RadialIntegrator, RadialRule};
use rayon::prelude::*;
use serde::Serialize;

fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// `ω̄(x, x+y)`: `x` when `|x| < |x+y|`, else `(|x+y|/|x|)^{1/(p−2)}(x+y)`.
pub fn omega_bar(x: &[f64], xy: &[f64], p: f64) -> Result<Vec<f64>> {
    let (nx, nxy) = (norm(x), norm(xy));
    if p == 2.0 || nx < nxy {
        return Ok(x.to_vec());
    }
    if nx == 0.0 {
        return Err(Error::ZeroBase);
    }
    let f = (nxy / nx).powf(1.0 / (p - 2.0));
    Ok(xy.iter().map(|v| f * v).collect())
}

/// `ω̃(x, x+y)`: `(|x+y|/((2−p)|x+y| + (p−1)|x|))^{1/(p−2)} x` when
/// `|x| < |x+y|`, else `x`.
pub fn omega_tilde(x: &[f64], xy: &[f64], p: f64) -> Result<Vec<f64>> {
    let (nx, nxy) = (norm(x), norm(xy));
    if p == 2.0 || nxy <= nx {
        return Ok(x.to_vec());
    }
    let den = (2.0 - p) * nxy + (p - 1.0) * nx;
    if !(den > 0.0) {
        return Err(Error::Domain(format!("ω̃ needs (2−p)|x+y| + (p−1)|x| > 0, got {den}")));
    }
    let f = (nxy / den).powf(1.0 / (p - 2.0));
    Ok(x.iter().map(|v| f * v).collect())
}

/// `|ω̄|^{p−2}` from `|x|` and `|x+y|`.
pub fn omega_bar_pow(nx: f64, nxy: f64, p: f64) -> Result<f64> {
    if p == 2.0 {
        return Ok(1.0);
    }
    if nx < nxy {
        return Ok(nx.powf(p - 2.0));
    }
    if nx == 0.0 {
        return Err(Error::ZeroBase);
    }
    Ok(nxy.powf(p - 1.0) / nx)
}

/// `|ω̃|^{p−2}` from `|x|` and `|x+y|`.
pub fn omega_tilde_pow(nx: f64, nxy: f64, p: f64) -> Result<f64> {
    if p == 2.0 {
        return Ok(1.0);
    }
    if nxy <= nx {
        return Ok(nx.powf(p - 2.0));
    }
    let den = (2.0 - p) * nxy + (p - 1.0) * nx;
    if !(den > 0.0) {
        return Err(Error::Domain(format!("ω̃ needs (2−p)|x+y| + (p−1)|x| > 0, got {den}")));
    }
    Ok(nxy / den * nx.powf(p - 2.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum GapVariant {
    TwoSidedPGe2,
    PLt2SmallR,
    PLt2LargeR,
}

impl GapVariant {
    pub fn for_params(params: &CknParams) -> Self {
        match (params.p() >= 2.0, params.r() <= 2.0) {
            (true, _) => GapVariant::TwoSidedPGe2,
            (false, true) => GapVariant::PLt2SmallR,
            (false, false) => GapVariant::PLt2LargeR,
        }
    }

    fn name(self) -> &'static str {
        match self {
            GapVariant::TwoSidedPGe2 => "two_sided_p_ge_2",
            GapVariant::PLt2SmallR => "p_lt_2_small_r",
            GapVariant::PLt2LargeR => "p_lt_2_large_r",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GapForm {
    pub variant: GapVariant,
    pub lhs: f64,
    pub rhs: f64,
    pub tau_hat: f64,
    /// `‖v‖/‖U‖`, compared against the smallness threshold.
    pub norm_ratio: f64,
    pub small: bool,
}

impl GapForm {
    pub fn holds(&self) -> bool {
        self.lhs >= self.rhs
    }
}

/// Default smallness threshold `‖v‖ ≤ 0.1‖U‖`.
pub const SMALLNESS: f64 = 0.1;

/// Both sides of the improved spectral-gap inequality for an orthogonalized `v`.
pub fn gap_form(
    v: &RadialProfile,
    params: &CknParams,
    spec: &QuadratureSpec,
    variant: GapVariant,
    gamma0: f64,
    cal_c: f64,
    tau_hat: f64,
) -> Result<GapForm> {
    let (p, r) = (params.p(), params.r());
    let reason = match variant {
        GapVariant::TwoSidedPGe2 if p < 2.0 => Some("needs p ≥ 2"),
        GapVariant::PLt2SmallR if !(p < 2.0 && r <= 2.0) => Some("needs p < 2 and r ≤ 2"),
        GapVariant::PLt2LargeR if !(p < 2.0 && r > 2.0) => Some("needs p < 2 and r > 2"),
        _ => None,
    };
    if let Some(reason) = reason {
        return Err(Error::VariantMismatch { variant: variant.name(), reason: format!("{reason}; {params}") });
    }
    let u = bubble(params);
    let window = v.support();
    // fixed rule: kinks where |U′| = |U′ + v′|
    let quad = RadialRule::for_window(params.n(), window, spec);
    // |a|^{e}·b², in logs so far-field underflow gives 0 instead of ∞·0
    let pow_sq = |a: f64, e: f64, b: f64| if b == 0.0 { 0.0 } else { (e * a.abs().ln() + 2.0 * b.abs().ln()).exp() };
    let lhs_density = |rho: f64| {
        let (du, dv) = (u.deriv(rho), v.deriv(rho));
        if dv == 0.0 || du == 0.0 {
            return 0.0;
        }
        let (nx, nxy) = (du.abs(), (du + dv).abs());
        let w = if p >= 2.0 { omega_bar_pow(nx, nxy, p) } else { omega_tilde_pow(nx, nxy, p) };
        let w = w.unwrap_or(f64::NAN);
        let quad_term = pow_sq(nx, p - 2.0, dv);
        let base = quad_term + (p - 2.0) * w * (nxy - nx).powi(2);
        let extra = if p < 2.0 { gamma0 * dv.abs().powf(p).min(quad_term) } else { 0.0 };
        base + extra
    };
    let rhs_density = |rho: f64| {
        let (uu, vv) = (u.value(rho), v.value(rho));
        if vv == 0.0 {
            return 0.0;
        }
        match variant {
            GapVariant::PLt2SmallR => {
                let m = uu.abs().max(vv.abs());
                let (a, b) = (uu / m, vv / m);
                (a + cal_c * b.abs()).powf(r) / (a * a + b * b) * b * b * m.powf(r)
            }
            _ => pow_sq(uu, r - 2.0, vv),
        }
    };
    let lhs = quad.full_space(&lhs_density, params.mu(), window)?;
    let rhs = (r - 1.0 + tau_hat) * quad.full_space(&rhs_density, params.s(), window)?;
    let norm_ratio = if lhs == 0.0 && rhs == 0.0 {
        0.0
    } else {
        grad_norm_p(v, params, spec)? / grad_norm_p(&u, params, spec)?
    };
    Ok(GapForm { variant, lhs, rhs, tau_hat, norm_ratio, small: norm_ratio <= SMALLNESS })
}

/// Three bump directions `(1 + (ρ/scale)^{ie})^{−power}`, projected away from
/// the tangent space and normalized in `𝒟^{1,p}_μ`.
pub fn scan_directions(params: &CknParams, spec: &QuadratureSpec) -> Result<Vec<RadialProfile>> {
    let d = params.derive();
    // power de + 1 at scale 1 lies in span{U, W₀}
    let shapes = [(1.0, d.decay_exp + 2.0), (0.5, d.decay_exp + 1.0), (2.0, d.decay_exp + 3.0)];
    shapes
        .iter()
        .map(|&(scale, power)| {
            let b = bump(1.0, scale, d.inner_exp, power)?;
            let w = project_tangent_orthogonal(&b, params, spec)?;
            let n = grad_norm_p(&w, params, spec)?;
            if !(n > 1e-6 * grad_norm_p(&b, params, spec)?) {
                return Err(Error::DegenerateDenominator);
            }
            Ok(w.scaled(1.0 / n))
        })
        .collect()
}

/// `n` log-spaced values in `[lo, hi]`, descending.
pub fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| (hi.ln() + (lo.ln() - hi.ln()) * i as f64 / (n - 1).max(1) as f64).exp())
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScanReport {
    pub eps_grid: Vec<f64>,
    pub distances: Vec<f64>,
    pub deficits: Vec<f64>,
    pub points: Vec<ManifoldPoint>,
    pub gamma_used: f64,
    /// `δ/d^γ` and `δ/d^p` along the grid.
    pub ratio_gamma: Vec<f64>,
    pub ratio_p: Vec<f64>,
    pub fitted_exponent: f64,
    pub correlation: f64,
    pub lower_bound_b: f64,
    pub distances_monotone: bool,
    /// `δ/d^p` strictly decreasing as `ε` decreases.
    pub ratio_p_decreasing: bool,
}

impl ScanReport {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("eps,distance,deficit,ratio_gamma\n");
        for i in 0..self.eps_grid.len() {
            out.push_str(&format!(
                "{:e},{:e},{:e},{:e}\n",
                self.eps_grid[i], self.distances[i], self.deficits[i], self.ratio_gamma[i]
            ));
        }
        out
    }
}

/// Least-squares slope and correlation of `y` against `x`.
fn fit_line(x: &[f64], y: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let (mx, my) = (x.iter().sum::<f64>() / n, y.iter().sum::<f64>() / n);
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let syy: f64 = y.iter().map(|b| (b - my).powi(2)).sum();
    (sxy / sxx, sxy / (sxx * syy).sqrt())
}

/// Deficit and distance of `U + εw` along `eps_grid`.
pub fn stability_scan(params: &CknParams, w: &RadialProfile, eps_grid: &[f64], spec: &QuadratureSpec) -> Result<ScanReport> {
    if eps_grid.len() < 8 || eps_grid.iter().any(|e| !(*e > 0.0 && *e <= 0.3)) {
        return Err(Error::InvalidInput("eps_grid needs at least 8 points in (0, 0.3]".into()));
    }
    let u = bubble(params);
    let p = params.p();
    let opts = DistanceOptions::default();
    let results: Vec<(f64, f64, ManifoldPoint)> = eps_grid
        .par_iter()
        .map(|&eps| {
            let ue = u.plus(eps, w);
            let rule = RadialRule::for_window(params.n(), ue.support(), spec);
            let dist = distance_to_manifold_with(&ue, params, spec, &opts)?;
            let def = perturbed_deficit(w, eps, params, &rule)?;
            Ok((dist.distance, def, dist.point))
        })
        .collect::<Result<_>>()?;
    let gamma = p.max(2.0);
    let distances: Vec<f64> = results.iter().map(|r| r.0).collect();
    let deficits: Vec<f64> = results.iter().map(|r| r.1).collect();
    let ratio = |g: f64| -> Vec<f64> { deficits.iter().zip(&distances).map(|(d, x)| d / x.powf(g)).collect() };
    let (ratio_gamma, ratio_p) = (ratio(gamma), ratio(p));

    let mut order: Vec<usize> = (0..eps_grid.len()).collect();
    order.sort_by(|&a, &b| eps_grid[a].total_cmp(&eps_grid[b]));
    let half = &order[..order.len().div_ceil(2)];
    if half.iter().any(|&i| !(deficits[i] > 0.0 && distances[i] > 0.0)) {
        return Err(Error::DegenerateFit { correlation: f64::NAN });
    }
    let lx: Vec<f64> = half.iter().map(|&i| distances[i].ln()).collect();
    let ly: Vec<f64> = half.iter().map(|&i| deficits[i].ln()).collect();
    let (slope, corr) = fit_line(&lx, &ly);
    if !(corr >= 0.99) {
        return Err(Error::DegenerateFit { correlation: corr });
    }
    // along decreasing ε
    let rev: Vec<usize> = order.iter().rev().cloned().collect();
    let distances_monotone = rev.windows(2).all(|w| distances[w[1]] < distances[w[0]]);
    let ratio_p_decreasing = rev.windows(2).all(|w| ratio_p[w[1]] < ratio_p[w[0]]);
    Ok(ScanReport {
        eps_grid: eps_grid.to_vec(),
        lower_bound_b: ratio_gamma.iter().cloned().fold(f64::INFINITY, f64::min),
        distances,
        deficits,
        points: results.iter().map(|r| r.2).collect(),
        gamma_used: gamma,
        ratio_gamma,
        ratio_p,
        fitted_exponent: slope,
        correlation: corr,
        distances_monotone,
        ratio_p_decreasing,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExpansionReport {
    /// `‖cU_λ + dw‖^p` and the integrated lower expansion.
    pub grad_lhs: f64,
    pub grad_rhs: f64,
    /// `∫|x|^{−s}|cU_λ + dw|^r` and the integrated upper expansion.
    pub star_lhs: f64,
    pub star_rhs: f64,
    /// `‖·‖_*^p` against `A^{p/r} + (p/r)A^{p/r−1}B` with `A = ‖cU_λ‖_*^r`.
    pub star_p_lhs: f64,
    pub star_p_rhs: f64,
    pub lower_margin: f64,
    pub upper_margin: f64,
    pub concavity_margin: f64,
    pub c1: f64,
    pub c2: f64,
}

impl ExpansionReport {
    pub fn holds(&self, rel_tol: f64) -> bool {
        self.lower_margin >= -rel_tol * self.grad_lhs
            && self.upper_margin >= -rel_tol * self.star_lhs
            && self.concavity_margin >= -rel_tol * self.star_p_lhs
    }
}

/// Integrates the pointwise expansions with `x = cU_λ′, y = dw′` and
/// `a = cU_λ, b = dw`, using the constants `c1` (vector) and `c2` (scalar).
#[allow(clippy::too_many_arguments)]
pub fn expansion_check(
    params: &CknParams,
    c: f64,
    lambda: f64,
    w: &RadialProfile,
    d: f64,
    kappa: f64,
    c1: f64,
    c2: f64,
    spec: &QuadratureSpec,
) -> Result<ExpansionReport> {
    let (p, r) = (params.p(), params.r());
    let ul = bubble_scaled(params, lambda)?;
    let window = w.support();
    // fixed rule: the margins have kinks where |x| = |x+y|
    let quad = RadialRule::for_window(params.n(), window, spec);
    let branch = ScalarBranch::for_r(r);
    let pair = |rho: f64| PairShape {
        nx: (c * ul.deriv(rho)).abs(),
        ny: (d * w.deriv(rho)).abs(),
        xy: c * ul.deriv(rho) * d * w.deriv(rho),
    };
    let grad_lhs = quad.full_space(&|rho| pair(rho).nsum().powf(p), params.mu(), window)?;
    let grad_rhs = quad.full_space(
        &|rho| {
            let s = pair(rho);
            let lhs = s.nsum().powf(p);
            lhs - crate::ineq::check_vector_shape(p, kappa, &s, c1).unwrap_or(f64::NAN)
        },
        params.mu(),
        window,
    )?;
    let scalar = |rho: f64| (c * ul.value(rho), d * w.value(rho));
    let star_lhs = quad.full_space(&|rho| {
        let (a, b) = scalar(rho);
        (a + b).abs().powf(r)
    }, params.s(), window)?;
    let star_rhs = quad.full_space(
        &|rho| {
            let (a, b) = scalar(rho);
            (a + b).abs().powf(r) + crate::ineq::scalar_margin(r, kappa, a, b, c2, branch)
        },
        params.s(),
        window,
    )?;
    let big_a = quad.full_space(&|rho| scalar(rho).0.abs().powf(r), params.s(), window)?;
    let big_b = star_rhs - big_a;
    let e = p / r;
    let star_p_lhs = star_lhs.powf(e);
    let star_p_rhs = big_a.powf(e) + e * big_a.powf(e - 1.0) * big_b;
    Ok(ExpansionReport {
        grad_lhs,
        grad_rhs,
        star_lhs,
        star_rhs,
        star_p_lhs,
        star_p_rhs,
        lower_margin: grad_lhs - grad_rhs,
        upper_margin: star_rhs - star_lhs,
        concavity_margin: star_p_rhs - star_p_lhs,
        c1,
        c2,
    })
}

/// [`expansion_check`] with constants from [`crate::ineq::search_constant`].
#[allow(clippy::too_many_arguments)]
pub fn expansion_check_searched(
    params: &CknParams,
    point: ManifoldPoint,
    w: &RadialProfile,
    d: f64,
    kappa: f64,
    c1: &ConstantEstimate,
    c2: &ConstantEstimate,
    spec: &QuadratureSpec,
) -> Result<ExpansionReport> {
    expansion_check(params, point.c, point.lambda, w, d, kappa, c1.value, c2.value, spec)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::spectral_gap;
    use proptest::prelude::*;

    fn pstar() -> CknParams {
        CknParams::validate(5, 2.0, 1.0, 2.0).unwrap()
    }

    #[test]
    fn omega_at_zero_y_is_x() {
        let x = [0.3, -0.4];
        for p in [1.5, 3.0] {
            assert_eq!(omega_bar(&x, &x, p).unwrap(), x.to_vec());
            assert_eq!(omega_tilde(&x, &x, p).unwrap(), x.to_vec());
        }
        assert_eq!(omega_bar(&x, &[1.0, 1.0], 3.0).unwrap(), x.to_vec());
        assert_eq!(omega_bar(&[0.0, 0.0], &[0.0, 0.0], 3.0).unwrap_err(), Error::ZeroBase);
    }

    #[test]
    fn omega_norm_matches_pow() {
        let (x, xy) = ([1.0, 2.0], [0.5, 0.1]);
        let nx = norm(&x);
        let nxy = norm(&xy);
        let wb = norm(&omega_bar(&x, &xy, 3.0).unwrap());
        assert!((wb.powf(1.0) - omega_bar_pow(nx, nxy, 3.0).unwrap()).abs() < 1e-14);
        let (x, xy) = ([0.5, 0.1], [1.0, 2.0]);
        let wt = norm(&omega_tilde(&x, &xy, 1.5).unwrap());
        let want = omega_tilde_pow(norm(&x), norm(&xy), 1.5).unwrap();
        assert!((wt.powf(-0.5) - want).abs() < 1e-12 * want);
    }

    proptest! {
        #[test]
        fn omega_bounds(
            x in prop::collection::vec(-3.0f64..3.0, 4),
            y in prop::collection::vec(-3.0f64..3.0, 4),
        ) {
            let xy: Vec<f64> = x.iter().zip(&y).map(|(a, b)| a + b).collect();
            let (nx, nxy) = (norm(&x), norm(&xy));
            prop_assume!(nx > 1e-6);
            for p in [2.5, 3.0] {
                prop_assert!(omega_bar_pow(nx, nxy, p).unwrap() <= nx.powf(p - 2.0) * (1.0 + 1e-12));
            }
            for p in [1.25, 1.5] {
                prop_assert!(omega_tilde_pow(nx, nxy, p).unwrap() <= nx.powf(p - 2.0) / (2.0 - p) * (1.0 + 1e-12));
            }
        }
    }

    #[test]
    fn gap_form_zero_and_mismatch() {
        let spec = QuadratureSpec::default();
        let z = bubble(&pstar()).scaled(0.0);
        let g = gap_form(&z, &pstar(), &spec, GapVariant::TwoSidedPGe2, 1.0, 1.0, 0.5).unwrap();
        assert_eq!((g.lhs, g.rhs), (0.0, 0.0));
        assert!(matches!(
            gap_form(&z, &pstar(), &spec, GapVariant::PLt2SmallR, 1.0, 1.0, 0.5),
            Err(Error::VariantMismatch { .. })
        ));
    }

    #[test]
    fn gap_form_p2_reduces_to_the_spectral_bound() {
        let spec = QuadratureSpec::default();
        let params = pstar();
        let tau = spectral_gap(&params, 3, 1024).unwrap().tau_hat;
        for v in scan_directions(&params, &spec).unwrap() {
            let v = v.scaled(0.05);
            let g = gap_form(&v, &params, &spec, GapVariant::TwoSidedPGe2, 1.0, 1.0, tau).unwrap();
            let plain = grad_norm_p(&v, &params, &spec).unwrap().powi(2);
            assert!((g.lhs - plain).abs() < 1e-9 * plain);
            assert!(g.holds() && g.small, "{g:?}");
        }
    }

    #[test]
    fn expansion_is_exact_at_zero_and_even() {
        let spec = QuadratureSpec::default();
        let params = CknParams::validate(5, 3.0, 0.5, 2.0).unwrap();
        let w = &scan_directions(&params, &spec).unwrap()[0];
        let rep = expansion_check(&params, 1.0, 1.0, w, 0.0, 0.1, 0.05, 1.0, &spec).unwrap();
        assert!(rep.lower_margin.abs() < 1e-10 * rep.grad_lhs);
        assert!(rep.upper_margin.abs() < 1e-10 * rep.star_lhs);
        assert!(rep.concavity_margin.abs() < 1e-10 * rep.star_p_lhs);
        let a = expansion_check(&params, 1.2, 0.8, w, 0.01, 0.1, 0.05, 1.0, &spec).unwrap();
        let b = expansion_check(&params, -1.2, 0.8, w, -0.01, 0.1, 0.05, 1.0, &spec).unwrap();
        assert!((a.lower_margin - b.lower_margin).abs() < 1e-10 * a.grad_lhs);
        assert!((a.upper_margin - b.upper_margin).abs() < 1e-10 * a.star_lhs);
    }

    #[test]
    fn log_grid_endpoints() {
        let g = log_grid(1e-3, 1e-1, 9);
        assert!((g[0] - 1e-1).abs() < 1e-15 && (g[8] - 1e-3).abs() < 1e-15);
        assert!(g.windows(2).all(|w| w[1] < w[0]));
    }

    #[test]
    fn scan_rejects_short_grids() {
        let params = pstar();
        let w = bubble(&params);
        assert!(stability_scan(&params, &w, &[0.1, 0.01], &QuadratureSpec::default()).is_err());
    }
}
