//! Distance to the extremal manifold `ℳ = {cU_λ}` and projection away from
//! its tangent space.

use crate::error::{Error, Result};
use crate::extremals::{bubble, bubble_scale_derivative, bubble_scaled, tangent_generator, RadialProfile};
use crate::optim::{brent_min, brent_root};
use crate::params::CknParams;
use crate::quadrature::{Adaptive, QuadratureSpec, RadialIntegrator, RadialRule};
use serde::Serialize;

/// `cU_λ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ManifoldPoint {
    pub c: f64,
    pub lambda: f64,
}

impl ManifoldPoint {
    pub fn profile(&self, params: &CknParams) -> Result<RadialProfile> {
        Ok(bubble_scaled(params, self.lambda)?.scaled(self.c))
    }
}

/// Search window and starts for the outer minimization in `λ`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DistanceOptions {
    pub lambda_window: (f64, f64),
    pub starts: Vec<f64>,
    pub tol: f64,
}

impl Default for DistanceOptions {
    fn default() -> Self {
        DistanceOptions { lambda_window: (1e-4, 1e4), starts: vec![0.25, 1.0, 4.0], tol: 1e-10 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DistanceReport {
    pub distance: f64,
    pub point: ManifoldPoint,
    /// `‖u‖` on the same rule.
    pub norm_u: f64,
    /// First-order pairings against `∇U_λ` and `∇∂_λU_λ`, divided by their
    /// Hölder bounds.
    pub foc_c: f64,
    pub foc_lambda: f64,
}

/// Samples of `u′` on a fixed rule plus the weights `ρ^{−μ}` for the norm.
struct Fit<'a> {
    params: &'a CknParams,
    rule: RadialRule,
    weights: Vec<f64>,
    du: Vec<f64>,
}

impl<'a> Fit<'a> {
    fn new(u: &RadialProfile, params: &'a CknParams, spec: &QuadratureSpec) -> Result<Self> {
        let rule = RadialRule::for_window(params.n(), u.support(), spec);
        let weights = rule.weights(params.mu());
        let du: Vec<f64> = rule.nodes().iter().map(|&r| u.deriv(r)).collect();
        if let Some(i) = du.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidInput(format!("u′ is not finite at ρ = {:e}", rule.nodes()[i])));
        }
        Ok(Fit { params, rule, weights, du })
    }

    fn bubble_slopes(&self, lambda: f64) -> Result<Vec<f64>> {
        let ul = bubble_scaled(self.params, lambda)?;
        Ok(self.rule.nodes().iter().map(|&r| ul.deriv(r)).collect())
    }

    fn objective(&self, c: f64, g: &[f64]) -> f64 {
        let p = self.params.p();
        let e: Vec<f64> = self.du.iter().zip(g).map(|(u, g)| (u - c * g).abs().powf(p)).collect();
        RadialRule::apply(&self.weights, &e)
    }

    /// The `c` minimizing `∫|x|^{−μ}|u′ − cg|^p`.
    fn best_c(&self, g: &[f64]) -> Result<f64> {
        let p = self.params.p();
        let ug: Vec<f64> = self.du.iter().zip(g).map(|(u, g)| u * g).collect();
        let gg: Vec<f64> = g.iter().map(|g| g * g).collect();
        let c0 = RadialRule::apply(&self.weights, &ug) / RadialRule::apply(&self.weights, &gg);
        if p == 2.0 {
            return Ok(c0);
        }
        // φ′(c)/p, increasing in c
        let dphi = |c: f64| {
            let t: Vec<f64> = self
                .du
                .iter()
                .zip(g)
                .map(|(u, g)| {
                    let e = u - c * g;
                    -e.signum() * e.abs().powf(p - 1.0) * g
                })
                .collect();
            RadialRule::apply(&self.weights, &t)
        };
        let mut h = 0.1 * c0.abs().max(1e-8);
        let (mut lo, mut hi) = (c0 - h, c0 + h);
        for _ in 0..200 {
            if dphi(lo) <= 0.0 && dphi(hi) >= 0.0 {
                break;
            }
            h *= 2.0;
            lo = c0 - h;
            hi = c0 + h;
        }
        let tol = 1e-15 * c0.abs().max(1e-300);
        brent_root(dphi, lo, hi, tol, 200)
    }

    /// `min_c ‖u − cU_λ‖^p` and the minimizing `c`.
    fn profile_at(&self, lambda: f64) -> Result<(f64, f64)> {
        let g = self.bubble_slopes(lambda)?;
        let c = self.best_c(&g)?;
        Ok((self.objective(c, &g), c))
    }
}

/// Local minimizer of `t ↦ F(eᵗ)` started at `t0`, kept inside `[a, b]`.
fn local_min(f: &dyn Fn(f64) -> f64, t0: f64, (a, b): (f64, f64), tol: f64) -> Result<(f64, f64)> {
    let mut h = 0.5;
    let f0 = f(t0);
    let (fl, fr) = (f((t0 - h).max(a)), f((t0 + h).min(b)));
    let (lo, hi) = if fl >= f0 && fr >= f0 {
        ((t0 - h).max(a), (t0 + h).min(b))
    } else {
        let dir = if fl < fr { -1.0 } else { 1.0 };
        let mut prev = t0;
        let mut cur = (t0 + dir * h).clamp(a, b);
        let mut fcur = f(cur);
        loop {
            h *= 2.0;
            let next = (cur + dir * h).clamp(a, b);
            let fnext = f(next);
            if fnext >= fcur || next == cur {
                break;
            }
            prev = cur;
            cur = next;
            fcur = fnext;
        }
        let far = (cur + dir * h).clamp(a, b);
        if dir < 0.0 {
            (far, prev)
        } else {
            (prev, far)
        }
    };
    brent_min(f, lo, hi, tol, 500)
}

/// Minimizes `‖u − cU_λ‖` over `c ∈ ℝ` and `λ` in the option window.
pub fn distance_to_manifold_with(
    u: &RadialProfile,
    params: &CknParams,
    spec: &QuadratureSpec,
    opts: &DistanceOptions,
) -> Result<DistanceReport> {
    let fit = Fit::new(u, params, spec)?;
    let p = params.p();
    let norm_u_p = RadialRule::apply(&fit.weights, &fit.du.iter().map(|v| v.abs().powf(p)).collect::<Vec<_>>());
    if norm_u_p == 0.0 {
        return Err(Error::ZeroFunction);
    }
    let window = (opts.lambda_window.0.ln(), opts.lambda_window.1.ln());
    // F^{2/p} is quadratic at a zero-distance minimum whatever p is.
    let obj = |t: f64| fit.profile_at(t.exp()).map(|(f, _)| f.powf(2.0 / p)).unwrap_or(f64::INFINITY);
    let mut best: Option<(f64, f64)> = None;
    for &s in &opts.starts {
        let (t, ft) = local_min(&obj, s.ln().clamp(window.0, window.1), window, opts.tol)?;
        best = match best {
            None => Some((t, ft)),
            Some((bt, bf)) => {
                let tie = (ft - bf).abs() <= 1e-12 * bf.max(ft) + f64::MIN_POSITIVE;
                if ft < bf && !tie || tie && t < bt {
                    Some((t, ft))
                } else {
                    Some((bt, bf))
                }
            }
        };
    }
    let (t, _) = best.expect("at least one start");
    let lambda = t.exp();
    let (fmin, c) = fit.profile_at(lambda)?;
    let distance = fmin.max(0.0).powf(1.0 / p);
    let point = ManifoldPoint { c, lambda };
    if (t - window.0).abs() < 1e-6 || (window.1 - t).abs() < 1e-6 {
        return Err(Error::OptimizerStall { best_found: point, distance });
    }
    let (foc_c, foc_lambda) = foc_pairings(&fit, point, distance)?;
    Ok(DistanceReport { distance, point, norm_u: norm_u_p.powf(1.0 / p), foc_c, foc_lambda })
}

fn foc_pairings(fit: &Fit, pt: ManifoldPoint, distance: f64) -> Result<(f64, f64)> {
    let p = fit.params.p();
    let g = fit.bubble_slopes(pt.lambda)?;
    let dl = bubble_scale_derivative(fit.params, pt.lambda)?;
    let h: Vec<f64> = fit.rule.nodes().iter().map(|&r| dl.deriv(r)).collect();
    let e: Vec<f64> = fit.du.iter().zip(&g).map(|(u, g)| u - pt.c * g).collect();
    let flux: Vec<f64> = e.iter().map(|e| e.signum() * e.abs().powf(p - 1.0)).collect();
    let pair = |k: &[f64]| -> (f64, f64) {
        let prod: Vec<f64> = flux.iter().zip(k).map(|(a, b)| a * b).collect();
        let kp: Vec<f64> = k.iter().map(|v| v.abs().powf(p)).collect();
        (RadialRule::apply(&fit.weights, &prod), RadialRule::apply(&fit.weights, &kp).powf(1.0 / p))
    };
    if distance == 0.0 {
        return Ok((0.0, 0.0));
    }
    let scale = distance.powf(p - 1.0);
    let (a, na) = pair(&g);
    let (b, nb) = pair(&h);
    Ok((a / (scale * na), b / (scale * nb)))
}

/// Distance `d` and argmin `(c, λ)` with the default options.
pub fn distance_to_manifold(
    u: &RadialProfile,
    params: &CknParams,
    spec: &QuadratureSpec,
) -> Result<(f64, ManifoldPoint)> {
    let rep = distance_to_manifold_with(u, params, spec, &DistanceOptions::default())?;
    Ok((rep.distance, rep.point))
}

/// `∫|x|^{−s}U^{r−2}fg`.
pub fn star_pairing(f: &RadialProfile, g: &RadialProfile, params: &CknParams, quad: &dyn RadialIntegrator) -> Result<f64> {
    let u = bubble(params);
    let r = params.r();
    let window = match (f.support(), g.support()) {
        (Some((a0, b0)), Some((a1, b1))) => Some((a0.max(a1), b0.min(b1))),
        (w, None) | (None, w) => w,
    };
    let h = |x: f64| {
        let v = f.value(x) * g.value(x);
        if v == 0.0 {
            0.0
        } else {
            u.value(x).powf(r - 2.0) * v
        }
    };
    Ok(quad.full_space(&h, params.s(), window)?)
}

/// `(⟨w, U⟩, ⟨w, W₀⟩)` in the `U^{r−2}`-weighted pairing.
pub fn tangent_pairings(w: &RadialProfile, params: &CknParams, spec: &QuadratureSpec) -> Result<(f64, f64)> {
    let quad = Adaptive { dim: params.n(), spec: *spec };
    Ok((
        star_pairing(w, &bubble(params), params, &quad)?,
        star_pairing(w, &tangent_generator(params), params, &quad)?,
    ))
}

/// `w − αU − βW₀` with `(α, β)` from the 2×2 Gram system.
pub fn project_tangent_orthogonal(w: &RadialProfile, params: &CknParams, spec: &QuadratureSpec) -> Result<RadialProfile> {
    let quad = Adaptive { dim: params.n(), spec: *spec };
    let (u, w0) = (bubble(params), tangent_generator(params));
    let g11 = star_pairing(&u, &u, params, &quad)?;
    let g12 = star_pairing(&u, &w0, params, &quad)?;
    let g22 = star_pairing(&w0, &w0, params, &quad)?;
    let det = g11 * g22 - g12 * g12;
    if !(det > 1e-12 * g11 * g22) {
        return Err(Error::SingularGram { det });
    }
    let b1 = star_pairing(w, &u, params, &quad)?;
    let b2 = star_pairing(w, &w0, params, &quad)?;
    let alpha = (g22 * b1 - g12 * b2) / det;
    let beta = (g11 * b2 - g12 * b1) / det;
    Ok(RadialProfile::combination(vec![(1.0, w.clone()), (-alpha, u), (-beta, w0)]))
}
