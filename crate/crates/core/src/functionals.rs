//! Norms, the best constant, the deficit, the Poincaré quotient and the
//! Lam–Lu flattening transform.
//!
//! `‖u‖ = (∫|x|^{−μ}|∇u|^p)^{1/p}`, `‖u‖_* = (∫|x|^{−s}|u|^r)^{1/r}`,
//! deficit `‖u‖^p − 𝒮‖u‖_*^p`. Every integral is over ℝᴺ.

use crate::error::{Error, Result};
use crate::extremals::{bubble, bump, RadialProfile};
use crate::params::CknParams;
use crate::quadrature::{Adaptive, QuadratureSpec, RadialIntegrator};
use serde::Serialize;
use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

/// Relative tolerance between the two routes to 𝒮.
pub const CONSISTENCY_TOL: f64 = 1e-7;

fn adaptive(params: &CknParams, spec: &QuadratureSpec) -> Adaptive {
    Adaptive { dim: params.n(), spec: *spec }
}

/// `∫|x|^{−μ}|u′|^p` (no root taken).
pub fn grad_integral(u: &RadialProfile, params: &CknParams, quad: &dyn RadialIntegrator) -> Result<f64> {
    let p = params.p();
    let f = |r: f64| u.deriv(r).abs().powf(p);
    Ok(quad.full_space(&f, params.mu(), u.support())?)
}

/// `∫|x|^{−s}|u|^r` (no root taken).
pub fn star_integral(u: &RadialProfile, params: &CknParams, quad: &dyn RadialIntegrator) -> Result<f64> {
    let r = params.r();
    let f = |x: f64| u.value(x).abs().powf(r);
    Ok(quad.full_space(&f, params.s(), u.support())?)
}

pub fn grad_norm_p(u: &RadialProfile, params: &CknParams, spec: &QuadratureSpec) -> Result<f64> {
    Ok(grad_integral(u, params, &adaptive(params, spec))?.powf(1.0 / params.p()))
}

pub fn star_norm(u: &RadialProfile, params: &CknParams, spec: &QuadratureSpec) -> Result<f64> {
    Ok(star_integral(u, params, &adaptive(params, spec))?.powf(1.0 / params.r()))
}

/// 𝒮 computed two ways from the bubble.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BestConstant {
    /// `‖U‖^p / ‖U‖_*^p`.
    pub value: f64,
    /// `(∫|x|^{−s}U^r)^{(r−p)/r}`, from `∫|x|^{−s}U^r = 𝒮^{r/(r−p)}`.
    pub via_star: f64,
    pub grad_integral: f64,
    pub star_integral: f64,
}

impl BestConstant {
    pub fn relative_gap(&self) -> f64 {
        ((self.value - self.via_star) / self.value).abs()
    }
}

fn constant_cache() -> &'static Mutex<HashMap<String, BestConstant>> {
    static CACHE: OnceLock<Mutex<HashMap<String, BestConstant>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

pub fn best_constant_with(params: &CknParams, quad: &dyn RadialIntegrator) -> Result<BestConstant> {
    let key = format!("{}|{}", params.key(), quad.fingerprint());
    if let Some(hit) = constant_cache().lock().expect("cache poisoned").get(&key) {
        return Ok(*hit);
    }
    let u = bubble(params);
    let (p, r) = (params.p(), params.r());
    let g = grad_integral(&u, params, quad)?;
    let st = star_integral(&u, params, quad)?;
    let out = BestConstant {
        value: g / st.powf(p / r),
        via_star: st.powf((r - p) / r),
        grad_integral: g,
        star_integral: st,
    };
    if out.relative_gap() > CONSISTENCY_TOL {
        return Err(Error::ConsistencyFailure { direct: out.value, via_star: out.via_star });
    }
    constant_cache().lock().expect("cache poisoned").insert(key, out);
    Ok(out)
}

pub fn best_constant_report(params: &CknParams, spec: &QuadratureSpec) -> Result<BestConstant> {
    best_constant_with(params, &adaptive(params, spec))
}

/// 𝒮 for the parameter tuple.
pub fn best_constant(params: &CknParams, spec: &QuadratureSpec) -> Result<f64> {
    Ok(best_constant_report(params, spec)?.value)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DeficitReport {
    pub grad_norm: f64,
    pub star_norm: f64,
    pub ratio: f64,
    pub deficit: f64,
    pub quotient_vs_s: f64,
    /// The 𝒮 used for `deficit` and `quotient_vs_s`.
    pub best_constant: f64,
    pub params: CknParams,
    pub spec_fingerprint: String,
}

pub fn deficit_with(u: &RadialProfile, params: &CknParams, quad: &dyn RadialIntegrator) -> Result<DeficitReport> {
    let p = params.p();
    let g = grad_integral(u, params, quad)?;
    let st = star_integral(u, params, quad)?;
    if st == 0.0 || g == 0.0 {
        return Err(Error::ZeroFunction);
    }
    let s_const = best_constant_with(params, quad)?.value;
    let grad_norm = g.powf(1.0 / p);
    let star_norm = st.powf(1.0 / params.r());
    let ratio = grad_norm / star_norm;
    Ok(DeficitReport {
        grad_norm,
        star_norm,
        ratio,
        deficit: g - s_const * star_norm.powf(p),
        quotient_vs_s: ratio.powf(p) / s_const,
        best_constant: s_const,
        params: *params,
        spec_fingerprint: quad.fingerprint(),
    })
}

/// `|a+h|^q − |a|^q` without cancellation for small `h/a`.
fn pow_increment(a: f64, h: f64, q: f64) -> f64 {
    let t = h / a;
    if a != 0.0 && t.abs() < 0.5 {
        a.abs().powf(q) * (q * t.ln_1p()).exp_m1()
    } else {
        (a + h).abs().powf(q) - a.abs().powf(q)
    }
}

/// Deficit of `U + εw`, integrating the increments over `U` so the
/// first-order terms cancel in integrals of size `O(ε)` instead of `O(1)`.
pub fn perturbed_deficit(w: &RadialProfile, eps: f64, params: &CknParams, quad: &dyn RadialIntegrator) -> Result<f64> {
    let (p, r) = (params.p(), params.r());
    let u = bubble(params);
    let window = w.support();
    let dg = quad.full_space(&|x| pow_increment(u.deriv(x), eps * w.deriv(x), p), params.mu(), window)?;
    let dst = quad.full_space(&|x| pow_increment(u.value(x), eps * w.value(x), r), params.s(), window)?;
    let base = best_constant_with(params, quad)?;
    // 𝒮·st₀^{p/r} = g₀ on this rule
    Ok(dg - base.grad_integral * (p / r * (dst / base.star_integral).ln_1p()).exp_m1())
}

pub fn deficit(u: &RadialProfile, params: &CknParams, spec: &QuadratureSpec) -> Result<DeficitReport> {
    deficit_with(u, params, &adaptive(params, spec))
}

/// Numerator and denominator of the Poincaré quotient
/// `∫|x|^{−μ}|∇U|^{p−2}|∇φ|² / ∫|x|^{−s}U^{r−2}φ²`.
pub fn poincare_parts(phi: &RadialProfile, params: &CknParams, quad: &dyn RadialIntegrator) -> Result<(f64, f64)> {
    let u = bubble(params);
    let (p, r) = (params.p(), params.r());
    let num = |x: f64| {
        let d = phi.deriv(x);
        if d == 0.0 {
            0.0
        } else {
            u.deriv(x).abs().powf(p - 2.0) * d * d
        }
    };
    let den = |x: f64| {
        let v = phi.value(x);
        if v == 0.0 {
            0.0
        } else {
            u.value(x).powf(r - 2.0) * v * v
        }
    };
    let window = phi.support();
    let a = quad.full_space(&num, params.mu(), window)?;
    let b = quad.full_space(&den, params.s(), window)?;
    Ok((a, b))
}

pub fn poincare_ratio(phi: &RadialProfile, params: &CknParams, spec: &QuadratureSpec) -> Result<f64> {
    let (a, b) = poincare_parts(phi, params, &adaptive(params, spec))?;
    if !(b > f64::MIN_POSITIVE) {
        return Err(Error::DegenerateDenominator);
    }
    Ok(a / b)
}

/// Rayleigh quotient of the radial linearized operator,
/// `(p−1)∫|x|^{−μ}|U′|^{p−2}φ′² / ∫|x|^{−s}U^{r−2}φ²`, whose critical values
/// are the eigenvalues ξ (`p−1` at U, `r−1` at W₀).
pub fn linearized_quotient(phi: &RadialProfile, params: &CknParams, spec: &QuadratureSpec) -> Result<f64> {
    Ok((params.p() - 1.0) * poincare_ratio(phi, params, spec)?)
}

/// Lower bound `min(1, p−1)` for [`poincare_ratio`].
pub fn poincare_lower_bound(params: &CknParams) -> f64 {
    (params.p() - 1.0).min(1.0)
}

/// Random test functions for the Poincaré bound: sums of one to three bumps
/// `(1 + (ρ/scale)^{ie})^{−power}` with Gaussian coefficients, scales
/// log-uniform in `[0.1, 10]` and powers in `[de, 3de]`.
pub fn poincare_corpus(params: &CknParams, count: usize, seed: u64) -> Vec<RadialProfile> {
    use rand::{Rng, SeedableRng};
    let d = params.derive();
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let terms = rng.random_range(1..=3);
            let parts = (0..terms)
                .map(|_| {
                    let c: f64 = rng.sample(rand_distr::StandardNormal);
                    let scale = 10f64.powf(rng.random_range(-1.0..=1.0));
                    let power = d.decay_exp * rng.random_range(1.0..=3.0);
                    (c, bump(1.0, scale, d.inner_exp, power).expect("positive scale"))
                })
                .collect();
            RadialProfile::combination(parts)
        })
        .collect()
}

/// `𝒟u(ρ) = ϱ^{−(p−1)/p} u(ρ^ϱ)`.
pub fn lamlu_transform(u: &RadialProfile, params: &CknParams) -> RadialProfile {
    let d = params.derive();
    let p = params.p();
    RadialProfile::LamLu {
        inner: Arc::new(u.clone()),
        varrho: d.rho_var,
        factor: d.rho_var.powf(-(p - 1.0) / p),
    }
}

/// Integrals entering the flattening identities for one profile.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LamLuIntegrals {
    /// `∫|x|^{−μ}|∇u|^p`.
    pub grad_u: f64,
    /// `∫|∇v|^p`.
    pub grad_v: f64,
    /// `∫|x|^{−s}|u|^r`.
    pub star_u: f64,
    /// `∫|x|^{−s′}|v|^r`.
    pub star_v: f64,
    pub varrho: f64,
}

impl LamLuIntegrals {
    /// The exact star factor for radial profiles: `∫|x|^{−s}|u|^r = ϱ^{1+r(p−1)/p}∫|x|^{−s′}|v|^r`.
    pub fn star_factor(params: &CknParams) -> f64 {
        let d = params.derive();
        let p = params.p();
        d.rho_var.powf(1.0 + d.r * (p - 1.0) / p)
    }
}

/// Computes both sides of the flattening identities by independent quadrature:
/// `u` with weights `(μ, s)`, `v = 𝒟u` with weights `(0, s′)`.
pub fn lamlu_integrals(u: &RadialProfile, params: &CknParams, spec: &QuadratureSpec) -> Result<LamLuIntegrals> {
    let d = params.derive();
    let (p, r) = (params.p(), d.r);
    let v = lamlu_transform(u, params);
    let quad = adaptive(params, spec);
    let gv = |x: f64| v.deriv(x).abs().powf(p);
    let sv = |x: f64| v.value(x).abs().powf(r);
    Ok(LamLuIntegrals {
        grad_u: grad_integral(u, params, &quad)?,
        grad_v: quad.full_space(&gv, 0.0, v.support())?,
        star_u: star_integral(u, params, &quad)?,
        star_v: quad.full_space(&sv, d.s_prime, v.support())?,
        varrho: d.rho_var,
    })
}

/// Hardy–Sobolev quotient `∫|∇v|^p / (∫|x|^{−s′}|v|^r)^{p/r}` evaluated at
/// `v = 𝒟U`, which is the Hardy–Sobolev extremal; this is 𝒮′.
pub fn hardy_sobolev_constant(params: &CknParams, spec: &QuadratureSpec) -> Result<f64> {
    let ints = lamlu_integrals(&bubble(params), params, spec)?;
    Ok(ints.grad_v / ints.star_v.powf(params.p() / params.r()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::extremals::{bubble_scaled, bump, tangent_generator};
    use std::f64::consts::PI;

    fn pstar() -> CknParams {
        CknParams::validate(5, 2.0, 1.0, 2.0).unwrap()
    }

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    const ORACLE: f64 = 19.2 * PI * PI;

    #[test]
    fn closed_form_norms() {
        let spec = QuadratureSpec::default();
        let u = bubble(&pstar());
        assert!(rel(grad_norm_p(&u, &pstar(), &spec).unwrap(), ORACLE.sqrt()) < 1e-10);
        assert!(rel(star_norm(&u, &pstar(), &spec).unwrap(), ORACLE.powf(1.0 / 3.0)) < 1e-10);
        let s = best_constant_report(&pstar(), &spec).unwrap();
        assert!(rel(s.value, ORACLE.powf(1.0 / 3.0)) < 1e-9);
        assert!(rel(s.value.powi(3), s.star_integral) < 1e-9);
    }

    #[test]
    fn homogeneity_and_scaling() {
        let spec = QuadratureSpec::default();
        let p = CknParams::validate(5, 3.0, 0.5, 2.0).unwrap();
        let u = bubble(&p);
        let g = grad_norm_p(&u, &p, &spec).unwrap();
        assert!(rel(grad_norm_p(&u.scaled(-2.0), &p, &spec).unwrap(), 2.0 * g) < 1e-12);
        for lambda in [0.5, 2.0] {
            let ul = bubble_scaled(&p, lambda).unwrap();
            assert!(rel(grad_norm_p(&ul, &p, &spec).unwrap(), g) < 1e-9);
            let rep = deficit(&ul, &p, &spec).unwrap();
            assert!(rep.deficit.abs() < 1e-8 * rep.grad_norm.powf(3.0));
        }
    }

    #[test]
    fn deficit_vanishes_on_manifold_and_is_positive_off_it() {
        let spec = QuadratureSpec::default();
        let p = pstar();
        let on = bubble_scaled(&p, 0.5).unwrap().scaled(2.0);
        let rep = deficit(&on, &p, &spec).unwrap();
        assert!(rep.deficit.abs() < 1e-8 * rep.grad_norm.powi(2));
        assert!((rep.quotient_vs_s - 1.0).abs() < 1e-8);
        let d = p.derive();
        let w = bump(1.0, 1.0, d.inner_exp, 4.0).unwrap();
        let off = bubble(&p).plus(0.01, &w);
        let rep = deficit(&off, &p, &spec).unwrap();
        assert!(rep.deficit > 0.0);
        assert!(rep.quotient_vs_s > 1.0);
    }

    #[test]
    fn zero_function_rejected() {
        let z = bubble(&pstar()).scaled(0.0);
        assert_eq!(deficit(&z, &pstar(), &QuadratureSpec::default()).unwrap_err(), Error::ZeroFunction);
    }

    #[test]
    fn poincare_witnesses() {
        let spec = QuadratureSpec::default();
        for (n, p, mu, s) in [(5, 2.0, 1.0, 2.0), (5, 3.0, 0.5, 2.0), (4, 1.5, 0.5, 1.0)] {
            let params = CknParams::validate(n, p, mu, s).unwrap();
            let r = params.r();
            let qu = linearized_quotient(&bubble(&params), &params, &spec).unwrap();
            let qw = linearized_quotient(&tangent_generator(&params), &params, &spec).unwrap();
            assert!(rel(qu, p - 1.0) < 1e-8, "{params}: {qu}");
            assert!(rel(qw, r - 1.0) < 1e-8, "{params}: {qw}");
        }
    }

    #[test]
    fn degenerate_denominator() {
        let z = bubble(&pstar()).scaled(0.0);
        let err = poincare_ratio(&z, &pstar(), &QuadratureSpec::default()).unwrap_err();
        assert_eq!(err, Error::DegenerateDenominator);
    }

    #[test]
    fn lamlu_exact_identities() {
        let spec = QuadratureSpec::default();
        for (n, p, mu, s) in [(5, 2.0, 1.0, 2.0), (5, 3.0, 0.5, 2.0)] {
            let params = CknParams::validate(n, p, mu, s).unwrap();
            let ints = lamlu_integrals(&bubble(&params), &params, &spec).unwrap();
            assert!(rel(ints.grad_v, ints.grad_u) < 1e-9);
            let f = LamLuIntegrals::star_factor(&params);
            assert!(rel(ints.star_u, f * ints.star_v) < 1e-9);
            let d = params.derive();
            let s_hs = hardy_sobolev_constant(&params, &spec).unwrap();
            let s = best_constant(&params, &spec).unwrap();
            let expo = p / d.r + p - 1.0;
            assert!(rel(s, d.rho_var.powf(-expo) * s_hs) < 1e-8);
        }
    }

    #[test]
    fn lamlu_is_identity_without_weight() {
        let params = CknParams::from_ab(5, 2.0, 1e-14, 1e-14).unwrap();
        let u = bubble(&params);
        let v = lamlu_transform(&u, &params);
        for r in [0.1, 1.0, 7.0] {
            assert!(rel(v.value(r), u.value(r)) < 1e-12);
        }
    }
}
