//! Radial integrals `∫₀^∞ f(ρ) ρ^{N−1−w} dρ` with power-law weights.
//!
//! [`integrate_radial`] is the adaptive scheme: `(0, split]` is mapped by
//! `ρ = split·eᵗ` and `[split, ∞)` by `ρ = split/v`, both covered by graded
//! Gauss–Legendre panels that are bisected where the estimated error is
//! largest. [`RadialRule`] is a fixed log-uniform rule used where the same
//! nodes must be reused across many integrals (distance fits, scans).

use crate::params::CknParams;
use serde::Serialize;
use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashMap};
use std::f64::consts::PI;
use std::sync::{Arc, Mutex, OnceLock};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum QuadratureError {
    #[error("quadrature did not converge: value {value:.6e}, estimated error {achieved_error:.3e}")]
    NoConvergence { value: f64, achieved_error: f64 },
    #[error("integrand is not finite at rho = {at:.6e}")]
    SingularIntegrand { at: f64 },
    #[error("invalid quadrature setting: {0}")]
    InvalidSpec(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QuadratureSpec {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_panels: usize,
    pub split_point: f64,
    pub panel_order: usize,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        QuadratureSpec {
            rel_tol: 1e-10,
            abs_tol: 1e-14,
            max_panels: 4000,
            split_point: 1.0,
            panel_order: 32,
        }
    }
}

impl QuadratureSpec {
    pub fn with_rel_tol(mut self, rel_tol: f64) -> Self {
        self.rel_tol = rel_tol;
        self
    }

    pub fn with_split_point(mut self, split_point: f64) -> Self {
        self.split_point = split_point;
        self
    }

    pub fn check(&self) -> Result<(), QuadratureError> {
        let bad = |m: &str| Err(QuadratureError::InvalidSpec(m.to_string()));
        if !(self.rel_tol > 0.0) || !(self.abs_tol > 0.0) {
            return bad("tolerances must be positive");
        }
        if self.panel_order < 4 {
            return bad("panel_order must be at least 4");
        }
        if !(self.split_point > 0.0) || !self.split_point.is_finite() {
            return bad("split_point must be positive and finite");
        }
        if self.max_panels < 64 {
            return bad("max_panels must be at least 64");
        }
        Ok(())
    }

    pub fn fingerprint(&self) -> String {
        format!(
            "adaptive(rel={:e},abs={:e},panels={},split={},order={})",
            self.rel_tol, self.abs_tol, self.max_panels, self.split_point, self.panel_order
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Normalization {
    /// Plain one-dimensional radial integral.
    Radial,
    /// Multiplied by the area of the unit sphere, i.e. an integral over ℝᴺ.
    FullSpace,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Integral {
    pub value: f64,
    pub error: f64,
    pub panels: usize,
}

/// `|𝕊^{N−1}| = 2π^{N/2}/Γ(N/2)`.
pub fn sphere_area(n: u32) -> f64 {
    // Γ(N/2) by the half-integer recursion, exact to rounding.
    let mut gamma = if n.is_multiple_of(2) { 1.0 } else { PI.sqrt() };
    let mut x = if n.is_multiple_of(2) { 1.0 } else { 0.5 };
    while x + 1e-9 < f64::from(n) / 2.0 {
        gamma *= x;
        x += 1.0;
    }
    2.0 * PI.powf(f64::from(n) / 2.0) / gamma
}

/// Gauss–Legendre nodes and weights on [−1, 1], cached per order.
pub(crate) fn gauss_legendre(order: usize) -> Arc<Vec<(f64, f64)>> {
    type Nodes = Arc<Vec<(f64, f64)>>;
    static CACHE: OnceLock<Mutex<HashMap<usize, Nodes>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut guard = cache.lock().expect("gauss-legendre cache poisoned");
    guard
        .entry(order)
        .or_insert_with(|| {
            let rule = gauss_quad::GaussLegendre::new(order.max(2))
                .expect("order >= 2 is always accepted");
            let mut pairs = rule.as_node_weight_pairs().to_vec();
            pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
            Arc::new(pairs)
        })
        .clone()
}

/// Variable substitution of one side of the split.
#[derive(Debug, Clone, Copy)]
enum Map {
    /// `ρ = scale·e^z`, `dρ = ρ dz`.
    Log { scale: f64 },
    /// `ρ = scale/z`, `dρ = (ρ²/scale) dz` (orientation folded in).
    Inverse { scale: f64 },
}

impl Map {
    fn rho_and_log_jac(self, z: f64) -> (f64, f64) {
        match self {
            Map::Log { scale } => {
                let rho = scale * z.exp();
                (rho, rho.ln())
            }
            Map::Inverse { scale } => {
                let rho = scale / z;
                (rho, 2.0 * rho.ln() - scale.ln())
            }
        }
    }

    fn midpoint(self, lo: f64, hi: f64) -> f64 {
        match self {
            Map::Log { .. } => 0.5 * (lo + hi),
            // geometric bisection keeps the ρ-ratio of children balanced
            Map::Inverse { .. } => (lo * hi).sqrt(),
        }
    }
}

/// Evaluates `f(ρ)·ρ^e·jac` in log form so that huge weights times tiny
/// values neither overflow nor produce `inf·0`.
fn weighted(f: &dyn Fn(f64) -> f64, e: f64, rho: f64, log_jac: f64) -> Result<f64, QuadratureError> {
    let v = f(rho);
    if v == 0.0 {
        return Ok(0.0);
    }
    if !v.is_finite() {
        return Err(QuadratureError::SingularIntegrand { at: rho });
    }
    let out = v.signum() * (v.abs().ln() + e * rho.ln() + log_jac).exp();
    if out.is_finite() {
        Ok(out)
    } else {
        Err(QuadratureError::SingularIntegrand { at: rho })
    }
}

fn panel_sum(
    f: &dyn Fn(f64) -> f64,
    e: f64,
    map: Map,
    lo: f64,
    hi: f64,
    nodes: &[(f64, f64)],
) -> Result<f64, QuadratureError> {
    let half = 0.5 * (hi - lo);
    let mid = 0.5 * (hi + lo);
    let mut acc = 0.0;
    for &(x, w) in nodes {
        let (rho, lj) = map.rho_and_log_jac(mid + half * x);
        acc += w * weighted(f, e, rho, lj)?;
    }
    Ok(acc * half)
}

#[derive(Debug, Clone, Copy)]
struct Panel {
    map_id: usize,
    lo: f64,
    hi: f64,
    coarse: f64,
    left: f64,
    right: f64,
}

impl Panel {
    fn value(&self) -> f64 {
        self.left + self.right
    }
    fn error(&self) -> f64 {
        (self.coarse - self.value()).abs()
    }
}

#[derive(Debug, PartialEq)]
struct Queued {
    error: f64,
    id: usize,
}

impl Eq for Queued {}

impl Ord for Queued {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error
            .total_cmp(&other.error)
            .then_with(|| other.id.cmp(&self.id))
    }
}

impl PartialOrd for Queued {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

fn make_panel(
    f: &dyn Fn(f64) -> f64,
    e: f64,
    maps: &[Map],
    map_id: usize,
    lo: f64,
    hi: f64,
    coarse: Option<f64>,
    nodes: &[(f64, f64)],
) -> Result<Panel, QuadratureError> {
    let map = maps[map_id];
    let coarse = match coarse {
        Some(c) => c,
        None => panel_sum(f, e, map, lo, hi, nodes)?,
    };
    let mid = map.midpoint(lo, hi);
    Ok(Panel {
        map_id,
        lo,
        hi,
        coarse,
        left: panel_sum(f, e, map, lo, mid, nodes)?,
        right: panel_sum(f, e, map, mid, hi, nodes)?,
    })
}

/// Adaptive driver over an initial set of panels `(map, lo, hi)`.
fn adaptive(
    f: &dyn Fn(f64) -> f64,
    e: f64,
    maps: &[Map],
    initial: &[(usize, f64, f64)],
    spec: &QuadratureSpec,
) -> Result<Integral, QuadratureError> {
    spec.check()?;
    let nodes = gauss_legendre(spec.panel_order);
    let mut panels: Vec<Panel> = Vec::with_capacity(initial.len() * 4);
    let mut heap = BinaryHeap::new();
    for &(m, lo, hi) in initial {
        let pn = make_panel(f, e, maps, m, lo, hi, None, &nodes)?;
        heap.push(Queued { error: pn.error(), id: panels.len() });
        panels.push(pn);
    }
    let mut alive = vec![true; panels.len()];
    let mut total_err: f64 = panels.iter().map(Panel::error).sum();
    let mut total_val: f64 = panels.iter().map(Panel::value).sum();
    loop {
        let tol = (spec.rel_tol * total_val.abs()).max(spec.abs_tol);
        if total_err <= tol {
            break;
        }
        let active = alive.iter().filter(|a| **a).count();
        if active + 1 > spec.max_panels {
            return Err(QuadratureError::NoConvergence {
                value: total_val,
                achieved_error: total_err,
            });
        }
        let Some(Queued { id, .. }) = heap.pop() else { break };
        let pn = panels[id];
        alive[id] = false;
        total_err -= pn.error();
        total_val -= pn.value();
        let map = maps[pn.map_id];
        let mid = map.midpoint(pn.lo, pn.hi);
        let children = [
            make_panel(f, e, maps, pn.map_id, pn.lo, mid, Some(pn.left), &nodes)?,
            make_panel(f, e, maps, pn.map_id, mid, pn.hi, Some(pn.right), &nodes)?,
        ];
        for c in children {
            total_err += c.error();
            total_val += c.value();
            heap.push(Queued { error: c.error(), id: panels.len() });
            panels.push(c);
            alive.push(true);
        }
    }
    // Deterministic ordered reduction.
    let mut live: Vec<&Panel> = panels
        .iter()
        .zip(&alive)
        .filter_map(|(p, a)| a.then_some(p))
        .collect();
    live.sort_by(|a, b| a.map_id.cmp(&b.map_id).then(a.lo.total_cmp(&b.lo)));
    let value = live.iter().map(|p| p.value()).sum();
    let error = live.iter().map(|p| p.error()).sum();
    Ok(Integral { value, error, panels: live.len() })
}

/// `∫₀^∞ f(ρ)·ρ^e dρ` with the two-substitution scheme.
pub fn integrate_half_line(
    f: &dyn Fn(f64) -> f64,
    e: f64,
    spec: &QuadratureSpec,
) -> Result<Integral, QuadratureError> {
    let split = spec.split_point;
    let maps = [Map::Log { scale: split }, Map::Inverse { scale: split }];
    let mut initial = Vec::new();
    // (0, split]: t ∈ [−700, 0], graded toward −∞.
    let mut hi: f64 = 0.0;
    let mut width = 1.0;
    while hi > -700.0 {
        let lo = (hi - width).max(-700.0);
        initial.push((0, lo, hi));
        hi = lo;
        width *= 2.0;
    }
    // [split, ∞): v ∈ [2^-1000, 1], graded toward 0.
    let mut v_hi: f64 = 1.0;
    for k in [1, 2, 3, 4, 8, 16, 32, 64, 128, 256, 512, 1000] {
        let v_lo = 2f64.powi(-k);
        initial.push((1, v_lo, v_hi));
        v_hi = v_lo;
    }
    adaptive(f, e, &maps, &initial, spec)
}

/// `∫_lo^hi f(ρ)·ρ^e dρ` under `ρ = eᵗ`.
pub fn integrate_interval(
    f: &dyn Fn(f64) -> f64,
    e: f64,
    lo: f64,
    hi: f64,
    spec: &QuadratureSpec,
) -> Result<Integral, QuadratureError> {
    if !(lo > 0.0 && hi > lo && hi.is_finite()) {
        return Err(QuadratureError::InvalidSpec(format!(
            "integration window [{lo}, {hi}] must satisfy 0 < lo < hi < ∞"
        )));
    }
    let (t0, t1) = (lo.ln(), hi.ln());
    let n = ((t1 - t0).ceil() as usize).clamp(1, spec.max_panels / 2);
    let h = (t1 - t0) / n as f64;
    let initial: Vec<_> = (0..n)
        .map(|i| {
            let a = t0 + h * i as f64;
            let b = if i + 1 == n { t1 } else { a + h };
            (0, a, b)
        })
        .collect();
    adaptive(f, e, &[Map::Log { scale: 1.0 }], &initial, spec)
}

/// `∫₀^∞ f(ρ) ρ^{N−1−w} dρ`, optionally times `|𝕊^{N−1}|`.
pub fn integrate_radial(
    f: &dyn Fn(f64) -> f64,
    weight_exp: f64,
    params: &CknParams,
    spec: &QuadratureSpec,
    norm: Normalization,
) -> Result<Integral, QuadratureError> {
    integrate_radial_window(f, weight_exp, None, params.n(), spec, norm)
}

/// As [`integrate_radial`], restricted to `window` when given.
pub fn integrate_radial_window(
    f: &dyn Fn(f64) -> f64,
    weight_exp: f64,
    window: Option<(f64, f64)>,
    dim: u32,
    spec: &QuadratureSpec,
    norm: Normalization,
) -> Result<Integral, QuadratureError> {
    let e = f64::from(dim) - 1.0 - weight_exp;
    let mut out = match window {
        None => integrate_half_line(f, e, spec)?,
        Some((lo, hi)) => integrate_interval(f, e, lo, hi, spec)?,
    };
    if norm == Normalization::FullSpace {
        let area = sphere_area(dim);
        out.value *= area;
        out.error *= area;
    }
    Ok(out)
}

/// Full-space radial integration, either adaptive or by a fixed rule.
pub trait RadialIntegrator: Sync {
    /// `|𝕊^{N−1}| ∫ f(ρ) ρ^{N−1−w} dρ` over `window` (or `(0, ∞)`).
    fn full_space(
        &self,
        f: &dyn Fn(f64) -> f64,
        weight_exp: f64,
        window: Option<(f64, f64)>,
    ) -> Result<f64, QuadratureError>;

    fn dim(&self) -> u32;

    fn fingerprint(&self) -> String;
}

/// The adaptive scheme bound to a dimension.
#[derive(Debug, Clone, Copy)]
pub struct Adaptive {
    pub dim: u32,
    pub spec: QuadratureSpec,
}

impl RadialIntegrator for Adaptive {
    fn full_space(
        &self,
        f: &dyn Fn(f64) -> f64,
        weight_exp: f64,
        window: Option<(f64, f64)>,
    ) -> Result<f64, QuadratureError> {
        integrate_radial_window(f, weight_exp, window, self.dim, &self.spec, Normalization::FullSpace)
            .map(|i| i.value)
    }

    fn dim(&self) -> u32 {
        self.dim
    }

    fn fingerprint(&self) -> String {
        self.spec.fingerprint()
    }
}

/// Fixed composite Gauss–Legendre rule, uniform in `ln ρ`.
#[derive(Debug, Clone)]
pub struct RadialRule {
    dim: u32,
    lo: f64,
    hi: f64,
    rho: Vec<f64>,
    log_rho: Vec<f64>,
    /// `dρ` weights including the sphere area.
    base: Vec<f64>,
    label: String,
}

impl RadialRule {
    /// Panels of width `panel_width` in `ln ρ` over `[lo, hi]`, `order` nodes each.
    pub fn log_uniform(dim: u32, lo: f64, hi: f64, panel_width: f64, order: usize) -> Self {
        assert!(lo > 0.0 && hi > lo && panel_width > 0.0);
        let nodes = gauss_legendre(order);
        let (t0, t1) = (lo.ln(), hi.ln());
        let n = ((t1 - t0) / panel_width).ceil().max(1.0) as usize;
        let h = (t1 - t0) / n as f64;
        let area = sphere_area(dim);
        let mut rho = Vec::with_capacity(n * nodes.len());
        let mut log_rho = Vec::with_capacity(n * nodes.len());
        let mut base = Vec::with_capacity(n * nodes.len());
        for i in 0..n {
            let mid = t0 + h * (i as f64 + 0.5);
            for &(x, w) in nodes.iter() {
                let t = mid + 0.5 * h * x;
                let r = t.exp();
                rho.push(r);
                log_rho.push(t);
                base.push(area * 0.5 * h * w * r);
            }
        }
        RadialRule {
            dim,
            lo,
            hi,
            rho,
            log_rho,
            base,
            label: format!("rule(lo={lo:e},hi={hi:e},width={panel_width},order={order})"),
        }
    }

    /// The default rule for closed-form profiles: `[10⁻¹⁸, 10¹⁸]·split`.
    pub fn for_spec(dim: u32, spec: &QuadratureSpec) -> Self {
        let s = spec.split_point;
        Self::log_uniform(dim, 1e-18 * s, 1e18 * s, 1.0, (spec.panel_order / 2).max(8))
    }

    /// A rule covering `window` (or the default range when `None`).
    pub fn for_window(dim: u32, window: Option<(f64, f64)>, spec: &QuadratureSpec) -> Self {
        match window {
            None => Self::for_spec(dim, spec),
            Some((lo, hi)) => Self::log_uniform(dim, lo, hi, 0.25, (spec.panel_order / 2).max(8)),
        }
    }

    pub fn nodes(&self) -> &[f64] {
        &self.rho
    }

    pub fn len(&self) -> usize {
        self.rho.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rho.is_empty()
    }

    pub fn range(&self) -> (f64, f64) {
        (self.lo, self.hi)
    }

    /// Full weights `|𝕊^{N−1}|·dρ·ρ^{N−1−w}` for every node.
    pub fn weights(&self, weight_exp: f64) -> Vec<f64> {
        let e = f64::from(self.dim) - 1.0 - weight_exp;
        self.base
            .iter()
            .zip(&self.log_rho)
            .map(|(b, lr)| b * (e * lr).exp())
            .collect()
    }

    /// Sum of `weights[i]·values[i]`.
    pub fn apply(weights: &[f64], values: &[f64]) -> f64 {
        weights.iter().zip(values).map(|(w, v)| if *v == 0.0 { 0.0 } else { w * v }).sum()
    }
}

impl RadialIntegrator for RadialRule {
    fn full_space(
        &self,
        f: &dyn Fn(f64) -> f64,
        weight_exp: f64,
        window: Option<(f64, f64)>,
    ) -> Result<f64, QuadratureError> {
        if let Some((lo, hi)) = window {
            if lo > self.lo * (1.0 + 1e-12) || hi < self.hi * (1.0 - 1e-12) {
                return Err(QuadratureError::InvalidSpec(format!(
                    "rule range [{:e}, {:e}] exceeds the window [{lo:e}, {hi:e}]",
                    self.lo, self.hi
                )));
            }
        }
        let e = f64::from(self.dim) - 1.0 - weight_exp;
        let mut acc = 0.0;
        for ((r, lr), b) in self.rho.iter().zip(&self.log_rho).zip(&self.base) {
            let v = f(*r);
            if v == 0.0 {
                continue;
            }
            let term = b * v * (e * lr).exp();
            if !term.is_finite() {
                return Err(QuadratureError::SingularIntegrand { at: *r });
            }
            acc += term;
        }
        Ok(acc)
    }

    fn dim(&self) -> u32 {
        self.dim
    }

    fn fingerprint(&self) -> String {
        self.label.clone()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn beta(a: f64, b: f64) -> f64 {
        // B(a, b) for small integer arguments
        fn fact(n: u32) -> f64 {
            (1..=n).map(f64::from).product()
        }
        fact(a as u32 - 1) * fact(b as u32 - 1) / fact((a + b) as u32 - 1)
    }

    #[test]
    fn sphere_areas() {
        assert!((sphere_area(2) - 2.0 * PI).abs() < 1e-14);
        assert!((sphere_area(3) - 4.0 * PI).abs() < 1e-13);
        assert!((sphere_area(5) - 8.0 * PI * PI / 3.0).abs() < 1e-13);
        assert!((sphere_area(4) - 2.0 * PI * PI).abs() < 1e-13);
    }

    #[test]
    fn beta_function_integrals() {
        let spec = QuadratureSpec::default();
        // ∫ ρ^{a−1} (1+ρ)^{−(a+b)} dρ = B(a, b)
        for (a, b) in [(1.0, 1.0), (4.0, 2.0), (3.0, 3.0), (2.0, 5.0)] {
            let f = move |r: f64| (1.0 + r).powf(-(a + b));
            let got = integrate_half_line(&f, a - 1.0, &spec).unwrap();
            let want = beta(a, b);
            assert!(((got.value - want) / want).abs() < 1e-12, "{a} {b}: {} vs {want}", got.value);
            assert!(got.error <= 1e-10 * want);
        }
    }

    #[test]
    fn zero_integrand() {
        let got = integrate_half_line(&|_| 0.0, 2.0, &QuadratureSpec::default()).unwrap();
        assert_eq!(got.value, 0.0);
        assert_eq!(got.error, 0.0);
    }

    #[test]
    fn split_point_consistency() {
        let f = |r: f64| 144.0 * (1.0 + r).powi(-6);
        let vals: Vec<f64> = [0.5, 1.0, 2.0]
            .iter()
            .map(|&s| {
                integrate_half_line(&f, 3.0, &QuadratureSpec::default().with_split_point(s))
                    .unwrap()
                    .value
            })
            .collect();
        for v in &vals {
            assert!(((v - 7.2) / 7.2).abs() < 1e-9);
        }
    }

    #[test]
    fn slowly_decaying_tail() {
        // ∫ ρ^{1/2} (1+ρ)^{−2} dρ = B(3/2, 1/2) = π/2
        let f = |r: f64| (1.0 + r).powi(-2);
        let got = integrate_half_line(&f, 0.5, &QuadratureSpec::default()).unwrap();
        assert!((got.value - PI / 2.0).abs() < 1e-9, "{}", got.value);
    }

    #[test]
    fn singular_integrand_reported() {
        let f = |r: f64| if r > 2.0 && r < 3.0 { f64::NAN } else { 1.0 / (1.0 + r * r) };
        let err = integrate_half_line(&f, 0.0, &QuadratureSpec::default()).unwrap_err();
        assert!(matches!(err, QuadratureError::SingularIntegrand { .. }));
    }

    #[test]
    fn panel_budget_exhaustion() {
        let spec = QuadratureSpec { max_panels: 64, rel_tol: 1e-15, abs_tol: 1e-300, ..Default::default() };
        let f = |r: f64| (50.0 * r).sin().abs();
        let err = integrate_interval(&f, 0.0, 1.0, 100.0, &spec).unwrap_err();
        assert!(matches!(err, QuadratureError::NoConvergence { .. }));
    }

    #[test]
    fn window_integral() {
        let got = integrate_interval(&|r| 1.0 / r, 0.0, 1e-3, 1e3, &QuadratureSpec::default()).unwrap();
        assert!((got.value - 6.0 * 10f64.ln()).abs() < 1e-11);
    }

    #[test]
    fn fixed_rule_matches_adaptive() {
        let rule = RadialRule::for_spec(5, &QuadratureSpec::default());
        let f = |r: f64| 144.0 * (1.0 + r).powi(-6);
        let v = rule.full_space(&f, 1.0, None).unwrap();
        let want = 7.2 * sphere_area(5);
        assert!(((v - want) / want).abs() < 1e-12, "{v} vs {want}");
        let w = rule.weights(1.0);
        let vals: Vec<f64> = rule.nodes().iter().map(|&r| f(r)).collect();
        assert!(((RadialRule::apply(&w, &vals) - want) / want).abs() < 1e-12);
    }

    #[test]
    fn refinement_does_not_worsen() {
        let f = |r: f64| 216.0 * (1.0 + r).powi(-6);
        let want = 7.2;
        let mut prev = f64::INFINITY;
        for tol in [1e-6, 1e-8, 1e-10, 1e-12] {
            let spec = QuadratureSpec::default().with_rel_tol(tol);
            let got = integrate_half_line(&f, 2.0, &spec).unwrap().value;
            let err = (got - want).abs();
            assert!(err <= prev.max(1e-14 * want));
            prev = err;
        }
    }
}
