//! Randomized testing of the second-order expansions of `|x+y|^p` and
//! `|a+b|^r`, and the search for their constants `𝒞₁(p, κ)`, `𝒞₂(r, κ)`.

use crate::error::{Error, Result};
use crate::stability::{omega_bar_pow, omega_tilde_pow};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

const ROUNDOFF: f64 = 64.0 * f64::EPSILON;
/// Bisection resolution of the constant search.
pub const SEARCH_RESOLUTION: f64 = 1e-3;

fn dot(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| a * b).sum()
}

fn norm(x: &[f64]) -> f64 {
    dot(x, x).sqrt()
}

/// The reduced data `(|x|, |y|, x·y)`; everything below depends only on it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PairShape {
    pub nx: f64,
    pub ny: f64,
    pub xy: f64,
}

impl PairShape {
    pub fn new(x: &[f64], y: &[f64]) -> Self {
        PairShape { nx: norm(x), ny: norm(y), xy: dot(x, y) }
    }

    /// `|x+y|`.
    pub fn nsum(&self) -> f64 {
        (self.nx * self.nx + 2.0 * self.xy + self.ny * self.ny).max(0.0).sqrt()
    }
}

/// `|x|^{p−2}|y|² + (p−2)|ω|^{p−2}(|x|−|x+y|)²` with `ω = ω̄` for `p ≥ 2` and
/// `ω̃` otherwise; `0` at `x = 0` for `p < 2` (its limit).
pub fn bracket(p: f64, s: &PairShape) -> Result<f64> {
    let nxy = s.nsum();
    if p == 2.0 {
        return Ok(s.ny * s.ny);
    }
    if s.nx == 0.0 {
        // ω̄ = x = 0 for p > 2; the p < 2 bracket vanishes in the limit
        return Ok(0.0);
    }
    let w = if p > 2.0 { omega_bar_pow(s.nx, nxy, p)? } else { omega_tilde_pow(s.nx, nxy, p)? };
    Ok(s.nx.powf(p - 2.0) * s.ny * s.ny + (p - 2.0) * w * (s.nx - nxy).powi(2))
}

/// Terms of the vector expansion: `(LHS, RHS without the 𝒞₁ term, 𝒞₁ multiplier, scale)`.
fn vector_terms(p: f64, kappa: f64, s: &PairShape) -> Result<(f64, f64, f64, f64)> {
    let lhs = s.nsum().powf(p);
    let xp = s.nx.powf(p);
    let lin = if s.nx == 0.0 { 0.0 } else { p * s.nx.powf(p - 2.0) * s.xy };
    let br = bracket(p, s)?;
    let quad = 0.5 * (1.0 - kappa) * p * br;
    let mult = if p >= 2.0 || s.nx == 0.0 {
        s.ny.powf(p)
    } else {
        s.ny.powf(p).min(s.nx.powf(p - 2.0) * s.ny * s.ny)
    };
    let scale = lhs + xp + lin.abs() + quad.abs() + s.nx.powf(p - 1.0) * s.ny;
    Ok((lhs, xp + lin + quad, mult, scale))
}

/// `LHS − RHS` of the vector expansion (the `p ≥ 2` or the `1 < p < 2` form).
pub fn check_vector_expansion(p: f64, kappa: f64, x: &[f64], y: &[f64], c1: f64) -> Result<f64> {
    check_vector_shape(p, kappa, &PairShape::new(x, y), c1)
}

/// [`check_vector_expansion`] from the reduced data.
pub fn check_vector_shape(p: f64, kappa: f64, s: &PairShape, c1: f64) -> Result<f64> {
    let (lhs, base, mult, _) = vector_terms(p, kappa, s)?;
    Ok(lhs - base - c1 * mult)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ScalarBranch {
    /// `r ≤ 2`: the `(|a|+𝒞₂|b|)^r/(a²+b²)·b²` remainder.
    SmallR,
    /// `r > 2`: the `|a|^{r−2}b² + 𝒞₂|b|^r` remainder.
    LargeR,
}

impl ScalarBranch {
    pub fn for_r(r: f64) -> Self {
        if r <= 2.0 {
            ScalarBranch::SmallR
        } else {
            ScalarBranch::LargeR
        }
    }

    fn name(self) -> &'static str {
        match self {
            ScalarBranch::SmallR => "small_r",
            ScalarBranch::LargeR => "large_r",
        }
    }
}

fn scalar_parts(r: f64, kappa: f64, a: f64, b: f64, c2: f64, branch: ScalarBranch) -> (f64, f64, f64) {
    let lhs = (a + b).abs().powf(r);
    let lin = if a == 0.0 { 0.0 } else { r * a.signum() * a.abs().powf(r - 1.0) * b };
    let coef = 0.5 * r * (r - 1.0) + kappa;
    let rem = if b == 0.0 {
        0.0
    } else {
        match branch {
            ScalarBranch::SmallR => coef * (a.abs() + c2 * b.abs()).powf(r) / (a * a + b * b) * b * b,
            ScalarBranch::LargeR => {
                let q = if a == 0.0 { 0.0 } else { coef * a.abs().powf(r - 2.0) * b * b };
                q + c2 * b.abs().powf(r)
            }
        }
    };
    let rhs = a.abs().powf(r) + lin + rem;
    let scale = lhs + a.abs().powf(r) + lin.abs() + rem;
    (rhs - lhs, scale, lhs)
}

/// `RHS − LHS` of the scalar upper expansion.
pub fn check_scalar_expansion(r: f64, kappa: f64, a: f64, b: f64, c2: f64, branch: ScalarBranch) -> Result<f64> {
    if !(r > 1.0) || ScalarBranch::for_r(r) != branch {
        return Err(Error::BranchMismatch { r, branch: branch.name() });
    }
    Ok(scalar_margin(r, kappa, a, b, c2, branch))
}

/// `RHS − LHS` without the branch guard.
pub fn scalar_margin(r: f64, kappa: f64, a: f64, b: f64, c2: f64, branch: ScalarBranch) -> f64 {
    scalar_parts(r, kappa, a, b, c2, branch).0
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ConstantKind {
    C1,
    C2,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConstantEstimate {
    pub kind: ConstantKind,
    /// `p` for `𝒞₁`, `r` for `𝒞₂`.
    pub exponent: f64,
    pub kappa: f64,
    /// The feasible end of the final bracket.
    pub value: f64,
    pub bracket: (f64, f64),
    pub samples: usize,
    /// Smallest margin over the search set at `value`.
    pub worst_margin: f64,
    pub seed: u64,
}

/// Pairs in `ℝᴺ`: Gaussian directions with log-uniform lengths in
/// `[10⁻³, 10³]`, every tenth pair on the ray `y = −tx` and every tenth
/// (offset by five) with `y ⟂ x`.
pub fn vector_samples(dim: usize, count: usize, seed: u64) -> Vec<(Vec<f64>, Vec<f64>)> {
    assert!(dim >= 2);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dir = |rng: &mut ChaCha8Rng| {
        let g: Vec<f64> = (0..dim).map(|_| rng.sample(StandardNormal)).collect();
        let n = norm(&g);
        g.into_iter().map(|v| v / n).collect::<Vec<f64>>()
    };
    let mag = |rng: &mut ChaCha8Rng| 10f64.powf(rng.random_range(-3.0..=3.0));
    (0..count)
        .map(|i| {
            let (mx, my) = (mag(&mut rng), mag(&mut rng));
            let x: Vec<f64> = dir(&mut rng).into_iter().map(|v| v * mx).collect();
            let y = match i % 10 {
                0 => {
                    let t = if i % 20 == 0 { 1.0 } else { my / mx };
                    x.iter().map(|v| -t * v).collect()
                }
                5 => {
                    let d = dir(&mut rng);
                    let ux: Vec<f64> = x.iter().map(|v| v / mx).collect();
                    let c = dot(&d, &ux);
                    let perp: Vec<f64> = d.iter().zip(&ux).map(|(d, u)| d - c * u).collect();
                    let n = norm(&perp);
                    perp.into_iter().map(|v| v / n * my).collect()
                }
                _ => dir(&mut rng).into_iter().map(|v| v * my).collect(),
            };
            (x, y)
        })
        .collect()
}

/// Scalar pairs: uniform on `[−10, 10]²` for half, signed log-uniform
/// magnitudes in `[10⁻³, 10³]` for the rest, plus `a = 0` and `b = −a` rays.
pub fn scalar_samples(count: usize, seed: u64) -> Vec<(f64, f64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|i| {
            let sgn = |rng: &mut ChaCha8Rng| if rng.random_bool(0.5) { 1.0 } else { -1.0 };
            match i % 10 {
                0 => (0.0, sgn(&mut rng) * 10f64.powf(rng.random_range(-3.0..=3.0))),
                5 => {
                    let a = sgn(&mut rng) * 10f64.powf(rng.random_range(-3.0..=3.0));
                    (a, -a)
                }
                i if i % 2 == 0 => (rng.random_range(-10.0..=10.0), rng.random_range(-10.0..=10.0)),
                _ => (
                    sgn(&mut rng) * 10f64.powf(rng.random_range(-3.0..=3.0)),
                    sgn(&mut rng) * 10f64.powf(rng.random_range(-3.0..=3.0)),
                ),
            }
        })
        .collect()
}

/// Planar representatives `x = (1, 0)`, `y = t(cos θ, sin θ)`, which cover
/// every shape by homogeneity and rotation invariance.
fn shape_grid(log_t: (f64, f64), theta: (f64, f64), n_t: usize, n_th: usize) -> Vec<PairShape> {
    let mut out = Vec::with_capacity(n_t * n_th);
    for i in 0..n_t {
        let t = (log_t.0 + (log_t.1 - log_t.0) * i as f64 / (n_t - 1) as f64).exp();
        for j in 0..n_th {
            let th = theta.0 + (theta.1 - theta.0) * j as f64 / (n_th - 1) as f64;
            out.push(PairShape { nx: 1.0, ny: t, xy: t * th.cos() });
        }
    }
    out
}

/// Ratio `(LHS − base)/mult`, the largest admissible 𝒞₁ at one shape.
fn c1_ratio(p: f64, kappa: f64, s: &PairShape) -> f64 {
    match vector_terms(p, kappa, s) {
        Ok((lhs, base, mult, scale)) if mult > 0.0 => (lhs - base + ROUNDOFF * scale) / mult,
        _ => f64::INFINITY,
    }
}

/// Shapes from a coarse `(ln t, θ)` grid refined around its worst cells.
fn c1_probe_shapes(p: f64, kappa: f64) -> Vec<PairShape> {
    let pi = std::f64::consts::PI;
    let mut shapes = shape_grid((-18.0, 18.0), (0.0, pi), 289, 181);
    let (mut dt, mut dth) = (36.0 / 288.0, pi / 180.0);
    for _ in 0..8 {
        let mut ranked: Vec<(f64, PairShape)> = shapes.iter().map(|s| (c1_ratio(p, kappa, s), *s)).collect();
        ranked.sort_by(|a, b| a.0.total_cmp(&b.0));
        let centers: Vec<PairShape> = ranked.iter().take(4).map(|r| r.1).collect();
        for c in centers {
            let lt = c.ny.ln();
            let th = (c.xy / c.ny).clamp(-1.0, 1.0).acos();
            shapes.extend(shape_grid((lt - dt, lt + dt), ((th - dth).max(0.0), (th + dth).min(pi)), 21, 21));
        }
        dt /= 8.0;
        dth /= 8.0;
    }
    shapes
}

fn needed_c2(r: f64, kappa: f64, a: f64, b: f64, branch: ScalarBranch) -> f64 {
    // smallest C₂ with nonnegative margin at (a, b), by bisection on the monotone margin
    let ok = |c: f64| {
        let (m, scale, _) = scalar_parts(r, kappa, a, b, c, branch);
        m >= -ROUNDOFF * scale
    };
    if b == 0.0 || ok(0.0) {
        return 0.0;
    }
    let mut hi = 1.0;
    while !ok(hi) {
        hi *= 2.0;
        if hi > 1e12 {
            return f64::INFINITY;
        }
    }
    let mut lo = 0.0;
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        if ok(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}

fn c2_probe_pairs(r: f64, kappa: f64, branch: ScalarBranch) -> Vec<(f64, f64)> {
    let mut pairs: Vec<(f64, f64)> = vec![(0.0, 1.0), (0.0, -1.0)];
    for i in 0..=4000 {
        let u = (-20.0 + 40.0 * i as f64 / 4000.0).exp();
        pairs.push((1.0, u));
        pairs.push((1.0, -u));
    }
    let mut width = 40.0 / 4000.0;
    for _ in 0..8 {
        let mut ranked: Vec<(f64, (f64, f64))> =
            pairs.iter().map(|&(a, b)| (needed_c2(r, kappa, a, b, branch), (a, b))).collect();
        ranked.sort_by(|x, y| y.0.total_cmp(&x.0));
        let centers: Vec<(f64, f64)> = ranked.iter().take(4).map(|x| x.1).filter(|x| x.0 != 0.0).collect();
        for (a, b) in centers {
            let lu = (b / a).abs().ln();
            let sg = (b / a).signum();
            for k in 0..=20 {
                let u = (lu - width + 2.0 * width * k as f64 / 20.0).exp();
                pairs.push((1.0, sg * u));
            }
        }
        width /= 8.0;
    }
    pairs
}

/// Bisection for the feasible constant over a finite set of margins.
fn bisect_feasible(feasible: impl Fn(f64) -> bool, increasing: bool) -> (f64, f64) {
    // `increasing`: feasibility holds above the threshold (𝒞₂); otherwise below (𝒞₁).
    let (mut lo, mut hi) = (0.0, 1.0);
    if increasing {
        while !feasible(hi) {
            lo = hi;
            hi *= 2.0;
            if hi > 1e12 {
                break;
            }
        }
    } else {
        if !feasible(0.0) {
            return (0.0, 0.0);
        }
        while feasible(hi) {
            lo = hi;
            hi *= 2.0;
            if hi > 1e12 {
                break;
            }
        }
    }
    while hi - lo > SEARCH_RESOLUTION {
        let mid = 0.5 * (lo + hi);
        let f = feasible(mid);
        if f == increasing {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    (lo, hi)
}

/// Largest feasible `𝒞₁` (resp. smallest feasible `𝒞₂`) over `samples`
/// random pairs plus a refined grid of shapes, to [`SEARCH_RESOLUTION`].
pub fn search_constant(kind: ConstantKind, exponent: f64, kappa: f64, samples: usize, seed: u64) -> Result<ConstantEstimate> {
    if !(exponent > 1.0) || !(kappa > 0.0) {
        return Err(Error::InvalidInput(format!("need exponent > 1 and κ > 0, got {exponent}, {kappa}")));
    }
    match kind {
        ConstantKind::C1 => {
            let mut shapes = c1_probe_shapes(exponent, kappa);
            shapes.extend(vector_samples(3, samples, seed).iter().map(|(x, y)| PairShape::new(x, y)));
            let ratios: Vec<f64> = shapes.iter().map(|s| c1_ratio(exponent, kappa, s)).collect();
            let feasible = |c: f64| ratios.iter().all(|r| c <= *r);
            let (lo, hi) = bisect_feasible(feasible, false);
            let worst = shapes
                .iter()
                .filter_map(|s| vector_terms(exponent, kappa, s).ok())
                .map(|(l, b, m, _)| l - b - lo * m)
                .fold(f64::INFINITY, f64::min);
            Ok(ConstantEstimate {
                kind,
                exponent,
                kappa,
                value: lo,
                bracket: (lo, hi),
                samples: shapes.len(),
                worst_margin: worst,
                seed,
            })
        }
        ConstantKind::C2 => {
            let branch = ScalarBranch::for_r(exponent);
            let mut pairs = c2_probe_pairs(exponent, kappa, branch);
            pairs.extend(scalar_samples(samples, seed));
            let need: Vec<f64> = pairs.iter().map(|&(a, b)| needed_c2(exponent, kappa, a, b, branch)).collect();
            let feasible = |c: f64| need.iter().all(|n| c >= *n);
            let (lo, hi) = bisect_feasible(feasible, true);
            let worst = pairs
                .iter()
                .map(|&(a, b)| scalar_parts(exponent, kappa, a, b, hi, branch).0)
                .fold(f64::INFINITY, f64::min);
            Ok(ConstantEstimate {
                kind,
                exponent,
                kappa,
                value: hi,
                bracket: (lo, hi),
                samples: pairs.len(),
                worst_margin: worst,
                seed,
            })
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Verification {
    pub samples: usize,
    pub violations: usize,
    pub worst_margin: f64,
}

/// Counts pairs where the vector margin falls below the roundoff allowance.
pub fn verify_vector(p: f64, kappa: f64, c1: f64, dim: usize, samples: usize, seed: u64) -> Result<Verification> {
    let mut out = Verification { samples, violations: 0, worst_margin: f64::INFINITY };
    for (x, y) in vector_samples(dim, samples, seed) {
        let s = PairShape::new(&x, &y);
        let (lhs, base, mult, scale) = vector_terms(p, kappa, &s)?;
        let m = lhs - base - c1 * mult;
        if m < -ROUNDOFF * scale {
            out.violations += 1;
        }
        out.worst_margin = out.worst_margin.min(m / scale.max(f64::MIN_POSITIVE));
    }
    Ok(out)
}

/// Counts pairs where the scalar margin falls below the roundoff allowance.
pub fn verify_scalar(r: f64, kappa: f64, c2: f64, samples: usize, seed: u64) -> Result<Verification> {
    let branch = ScalarBranch::for_r(r);
    let mut out = Verification { samples, violations: 0, worst_margin: f64::INFINITY };
    for (a, b) in scalar_samples(samples, seed) {
        let (m, scale, _) = scalar_parts(r, kappa, a, b, c2, branch);
        if m < -ROUNDOFF * scale {
            out.violations += 1;
        }
        out.worst_margin = out.worst_margin.min(m / scale.max(f64::MIN_POSITIVE));
    }
    Ok(out)
}
