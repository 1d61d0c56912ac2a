//! Radial profiles: the extremal bubble and everything built from it.
//!
//! With `t = ρ^{ie}`, `ie = (p−s+μ)/(p−1)` and `de = (N−p−μ)/(p−s+μ)`:
//!
//! ```text
//! U(ρ)   = C (1 + t)^{−de}
//! U_λ(ρ) = λ^{(N−p−μ)/p} U(λρ)
//! W₀(ρ)  = ((p−1) − t)(1 + t)^{−(de+1)}      ∝ (N−p−μ)/p·U + ρU′
//! V(τ)   = U(τ^ς),   η₀(τ) = W₀(τ^ς)
//! ```
//!
//! Every closed form is evaluated through `ln(1 + x^k)` so that far tails
//! underflow gracefully instead of overflowing.

use crate::params::{CknParams, DerivedParams};
use serde::{Deserialize, Serialize};
use std::io::{Read, Write};
use std::sync::Arc;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ProfileError {
    #[error("rho = {rho:.6e} lies outside the sampled grid [{lo:.6e}, {hi:.6e}]")]
    OutOfGrid { rho: f64, lo: f64, hi: f64 },
    #[error("scale must be positive, got {0}")]
    NonPositiveScale(f64),
    #[error("invalid sampled profile: {0}")]
    InvalidGrid(String),
    #[error("radius must be finite and non-negative, got {0}")]
    Domain(f64),
    #[error("profile io: {0}")]
    Io(String),
}

/// Returns `(k ln x, ln(1 + x^k))`.
#[inline]
fn log_terms(x: f64, k: f64) -> (f64, f64) {
    if x == 0.0 {
        return (f64::NEG_INFINITY, 0.0);
    }
    let l = k * x.ln();
    let big = if l > 0.0 { l + (-l).exp().ln_1p() } else { l.exp().ln_1p() };
    (l, big)
}

/// `amp·(1 + (ρ/scale)^inner)^{−outer}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerLaw {
    pub amp: f64,
    pub scale: f64,
    pub inner: f64,
    pub outer: f64,
}

impl PowerLaw {
    #[inline]
    pub fn value(&self, rho: f64) -> f64 {
        let (_, big) = log_terms(rho / self.scale, self.inner);
        self.amp * (-self.outer * big).exp()
    }

    #[inline]
    pub fn deriv(&self, rho: f64) -> f64 {
        if rho == 0.0 {
            return origin_slope(self.inner, -self.amp * self.outer / self.scale);
        }
        let (l, big) = log_terms(rho / self.scale, self.inner);
        -self.amp * self.outer * self.inner * (l - (self.outer + 1.0) * big - rho.ln()).exp()
    }
}

/// `amp·(offset − ρ^inner)(1 + ρ^inner)^{−outer}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TangentShape {
    pub amp: f64,
    pub offset: f64,
    pub inner: f64,
    pub outer: f64,
}

impl TangentShape {
    #[inline]
    pub fn value(&self, rho: f64) -> f64 {
        let (l, big) = log_terms(rho, self.inner);
        self.amp * (self.offset * (-self.outer * big).exp() - (l - self.outer * big).exp())
    }

    #[inline]
    pub fn deriv(&self, rho: f64) -> f64 {
        let o = self.outer;
        if rho == 0.0 {
            return origin_slope(self.inner, self.amp * (-1.0 - o * self.offset));
        }
        let (l, big) = log_terms(rho, self.inner);
        let lr = rho.ln();
        let a = (l - (o + 1.0) * big - lr).exp();
        let b = (2.0 * l - (o + 1.0) * big - lr).exp();
        self.amp * self.inner * ((-1.0 - o * self.offset) * a + (o - 1.0) * b)
    }

    /// The single positive zero `offset^{1/inner}`.
    pub fn zero(&self) -> f64 {
        self.offset.powf(1.0 / self.inner)
    }
}

/// Slope at the origin of `g(ρ^k)` given `d/dt g` at 0 (`lead`).
fn origin_slope(k: f64, lead: f64) -> f64 {
    if k > 1.0 {
        0.0
    } else if k == 1.0 {
        lead
    } else {
        lead * f64::INFINITY
    }
}

/// A tabulated profile, interpolated by cubic Hermite splines.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Sampled {
    grid: Vec<f64>,
    values: Vec<f64>,
    slopes: Vec<f64>,
    has_derivative: bool,
}

impl Sampled {
    /// `grid` strictly increasing and positive. Without `derivs` the slopes
    /// are chosen by the Fritsch–Carlson monotone rule.
    pub fn new(grid: Vec<f64>, values: Vec<f64>, derivs: Option<Vec<f64>>) -> Result<Self, ProfileError> {
        let bad = |m: String| Err(ProfileError::InvalidGrid(m));
        if grid.len() < 2 {
            return bad("need at least two samples".into());
        }
        if values.len() != grid.len() || derivs.as_ref().is_some_and(|d| d.len() != grid.len()) {
            return bad("column lengths differ".into());
        }
        if !(grid[0] > 0.0) {
            return bad("radii must be positive".into());
        }
        if grid.windows(2).any(|w| !(w[1] > w[0])) {
            return bad("radii must be strictly increasing".into());
        }
        let all = grid.iter().chain(&values).chain(derivs.iter().flatten());
        if all.clone().any(|v| !v.is_finite()) {
            return bad("non-finite entry".into());
        }
        let has_derivative = derivs.is_some();
        let slopes = derivs.unwrap_or_else(|| fritsch_carlson(&grid, &values));
        Ok(Sampled { grid, values, slopes, has_derivative })
    }

    /// Samples `profile` (value and derivative) on `grid`.
    pub fn from_profile(profile: &RadialProfile, grid: Vec<f64>) -> Result<Self, ProfileError> {
        let values = grid.iter().map(|&r| profile.eval(r)).collect::<Result<Vec<_>, _>>()?;
        let derivs = grid.iter().map(|&r| profile.eval_deriv(r)).collect::<Result<Vec<_>, _>>()?;
        Sampled::new(grid, values, Some(derivs))
    }

    pub fn support(&self) -> (f64, f64) {
        (self.grid[0], *self.grid.last().expect("non-empty"))
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn has_derivative(&self) -> bool {
        self.has_derivative
    }

    fn locate(&self, rho: f64) -> Option<(usize, f64, f64)> {
        let (lo, hi) = self.support();
        if !(rho >= lo && rho <= hi) {
            return None;
        }
        let i = self.grid.partition_point(|&g| g <= rho).clamp(1, self.grid.len() - 1) - 1;
        let h = self.grid[i + 1] - self.grid[i];
        Some((i, h, (rho - self.grid[i]) / h))
    }

    fn value(&self, rho: f64) -> f64 {
        let Some((i, h, s)) = self.locate(rho) else { return f64::NAN };
        let (y0, y1, m0, m1) = (self.values[i], self.values[i + 1], self.slopes[i], self.slopes[i + 1]);
        let s2 = s * s;
        let s3 = s2 * s;
        (2.0 * s3 - 3.0 * s2 + 1.0) * y0
            + (s3 - 2.0 * s2 + s) * h * m0
            + (-2.0 * s3 + 3.0 * s2) * y1
            + (s3 - s2) * h * m1
    }

    fn deriv(&self, rho: f64) -> f64 {
        let Some((i, h, s)) = self.locate(rho) else { return f64::NAN };
        let (y0, y1, m0, m1) = (self.values[i], self.values[i + 1], self.slopes[i], self.slopes[i + 1]);
        let s2 = s * s;
        ((6.0 * s2 - 6.0 * s) * y0 + (-6.0 * s2 + 6.0 * s) * y1) / h
            + (3.0 * s2 - 4.0 * s + 1.0) * m0
            + (3.0 * s2 - 2.0 * s) * m1
    }

    /// Reads `radius,value[,derivative]` rows; `#` lines and a non-numeric
    /// header row are skipped.
    pub fn read_csv<R: Read>(reader: R) -> Result<Self, ProfileError> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(false)
            .comment(Some(b'#'))
            .trim(csv::Trim::All)
            .flexible(true)
            .from_reader(reader);
        let (mut grid, mut values, mut derivs) = (Vec::new(), Vec::new(), Vec::new());
        let mut columns = None;
        for (row, rec) in rdr.records().enumerate() {
            let rec = rec.map_err(|e| ProfileError::Io(e.to_string()))?;
            let parsed: Result<Vec<f64>, _> = rec.iter().map(str::parse::<f64>).collect();
            let fields = match parsed {
                Ok(f) => f,
                Err(_) if row == 0 => continue,
                Err(e) => return Err(ProfileError::Io(format!("row {}: {e}", row + 1))),
            };
            let n = *columns.get_or_insert(fields.len());
            if fields.len() != n || !(2..=3).contains(&n) {
                return Err(ProfileError::Io(format!("row {}: expected 2 or 3 columns", row + 1)));
            }
            grid.push(fields[0]);
            values.push(fields[1]);
            if n == 3 {
                derivs.push(fields[2]);
            }
        }
        let derivs = (columns == Some(3)).then_some(derivs);
        Sampled::new(grid, values, derivs)
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<(), ProfileError> {
        let io = |e: csv::Error| ProfileError::Io(e.to_string());
        let mut w = csv::Writer::from_writer(writer);
        if self.has_derivative {
            w.write_record(["rho", "value", "derivative"]).map_err(io)?;
        } else {
            w.write_record(["rho", "value"]).map_err(io)?;
        }
        for i in 0..self.grid.len() {
            let mut rec = vec![format!("{:e}", self.grid[i]), format!("{:e}", self.values[i])];
            if self.has_derivative {
                rec.push(format!("{:e}", self.slopes[i]));
            }
            w.write_record(&rec).map_err(io)?;
        }
        w.flush().map_err(|e| ProfileError::Io(e.to_string()))
    }
}

fn fritsch_carlson(x: &[f64], y: &[f64]) -> Vec<f64> {
    let n = x.len();
    let delta: Vec<f64> = (0..n - 1).map(|k| (y[k + 1] - y[k]) / (x[k + 1] - x[k])).collect();
    let mut m = vec![0.0; n];
    m[0] = delta[0];
    m[n - 1] = delta[n - 2];
    for k in 1..n - 1 {
        m[k] = if delta[k - 1] * delta[k] > 0.0 { 0.5 * (delta[k - 1] + delta[k]) } else { 0.0 };
    }
    for k in 0..n - 1 {
        if delta[k] == 0.0 {
            m[k] = 0.0;
            m[k + 1] = 0.0;
            continue;
        }
        let a = m[k] / delta[k];
        let b = m[k + 1] / delta[k];
        let h = a.hypot(b);
        if h > 3.0 {
            m[k] = 3.0 / h * a * delta[k];
            m[k + 1] = 3.0 / h * b * delta[k];
        }
    }
    m
}

/// A radial function with value and first derivative.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum RadialProfile {
    Bubble(PowerLaw),
    ScaledBubble { shape: PowerLaw, lambda: f64 },
    TangentGenerator(TangentShape),
    /// `V(τ) = U(τ^ς)`, a function of τ.
    TransformedBubble(PowerLaw),
    /// `η₀(τ)`, a function of τ.
    KernelEta0(TangentShape),
    Bump(PowerLaw),
    /// `factor·u(ρ^ϱ)`.
    LamLu { inner: Arc<RadialProfile>, varrho: f64, factor: f64 },
    /// `λ^w·u(λρ)`.
    Dilated { inner: Arc<RadialProfile>, lambda: f64, weight_exp: f64 },
    Sampled(Arc<Sampled>),
    Combination(Vec<(f64, RadialProfile)>),
}

/// `C_{N,p,μ,s} = [(N−s)((N−p−μ)/(p−1))^{p−1}]^{(N−p−μ)/(p(p−s+μ))}`.
pub fn normalization_constant(params: &CknParams) -> f64 {
    let (n, p, mu, s) = (params.nf(), params.p(), params.mu(), params.s());
    let base = (n - s) * ((n - p - mu) / (p - 1.0)).powf(p - 1.0);
    base.powf((n - p - mu) / (p * (p - s + mu)))
}

fn bubble_shape(d: &DerivedParams) -> PowerLaw {
    PowerLaw {
        amp: normalization_constant(&d.params),
        scale: 1.0,
        inner: d.inner_exp,
        outer: d.decay_exp,
    }
}

pub fn bubble(params: &CknParams) -> RadialProfile {
    RadialProfile::Bubble(bubble_shape(&params.derive()))
}

pub fn bubble_scaled(params: &CknParams, lambda: f64) -> Result<RadialProfile, ProfileError> {
    if !(lambda > 0.0) || !lambda.is_finite() {
        return Err(ProfileError::NonPositiveScale(lambda));
    }
    let d = params.derive();
    let base = bubble_shape(&d);
    Ok(RadialProfile::ScaledBubble {
        shape: PowerLaw { amp: base.amp * lambda.powf(d.scaling_exp), scale: 1.0 / lambda, ..base },
        lambda,
    })
}

/// `W₀(ρ) = ((p−1) − ρ^{ie})(1 + ρ^{ie})^{−(N−s)/(p−s+μ)}`.
pub fn tangent_generator(params: &CknParams) -> RadialProfile {
    RadialProfile::TangentGenerator(tangent_shape(&params.derive(), 1.0))
}

fn tangent_shape(d: &DerivedParams, amp: f64) -> TangentShape {
    TangentShape {
        amp,
        offset: d.params.p() - 1.0,
        inner: d.inner_exp,
        outer: d.decay_exp + 1.0,
    }
}

/// `κ` with `(N−p−μ)/p·U + ρU′ = κ·W₀`.
pub fn tangent_factor(params: &CknParams) -> f64 {
    let (n, p, mu) = (params.nf(), params.p(), params.mu());
    normalization_constant(params) * (n - p - mu) / (p * (p - 1.0))
}

/// `∂U_λ/∂λ = λ^{a−1}·κ·W₀(λρ)` with `a = (N−p−μ)/p`.
pub fn bubble_scale_derivative(params: &CknParams, lambda: f64) -> Result<RadialProfile, ProfileError> {
    if !(lambda > 0.0) || !lambda.is_finite() {
        return Err(ProfileError::NonPositiveScale(lambda));
    }
    let d = params.derive();
    let w0 = RadialProfile::TangentGenerator(tangent_shape(&d, tangent_factor(params)));
    Ok(RadialProfile::Dilated { inner: Arc::new(w0), lambda, weight_exp: d.scaling_exp - 1.0 })
}

/// `V(τ) = C(1 + τ^{p/(p−1)})^{−de}`.
pub fn transformed_bubble(params: &CknParams) -> RadialProfile {
    let d = params.derive();
    RadialProfile::TransformedBubble(PowerLaw { inner: d.inner_exp * d.sigma, ..bubble_shape(&d) })
}

/// `η₀(τ) = ((p−1) − τ^{p/(p−1)})(1 + τ^{p/(p−1)})^{−K/p}`.
pub fn kernel_eta0(params: &CknParams) -> RadialProfile {
    let d = params.derive();
    RadialProfile::KernelEta0(TangentShape { inner: d.inner_exp * d.sigma, ..tangent_shape(&d, 1.0) })
}

/// `amp·(1 + (ρ/scale)^{inner})^{−power}`.
pub fn bump(amp: f64, scale: f64, inner: f64, power: f64) -> Result<RadialProfile, ProfileError> {
    if !(scale > 0.0) {
        return Err(ProfileError::NonPositiveScale(scale));
    }
    Ok(RadialProfile::Bump(PowerLaw { amp, scale, inner, outer: power }))
}

impl RadialProfile {
    pub fn sampled(s: Sampled) -> Self {
        RadialProfile::Sampled(Arc::new(s))
    }

    pub fn combination(terms: Vec<(f64, RadialProfile)>) -> Self {
        RadialProfile::Combination(terms)
    }

    /// `c·self`, flattening nested scalings.
    pub fn scaled(&self, c: f64) -> Self {
        match self {
            RadialProfile::Combination(t) => {
                RadialProfile::Combination(t.iter().map(|(a, f)| (c * a, f.clone())).collect())
            }
            other => RadialProfile::Combination(vec![(c, other.clone())]),
        }
    }

    /// `self + c·other`.
    pub fn plus(&self, c: f64, other: &RadialProfile) -> Self {
        let mut terms = match self {
            RadialProfile::Combination(t) => t.clone(),
            s => vec![(1.0, s.clone())],
        };
        terms.push((c, other.clone()));
        RadialProfile::Combination(terms)
    }

    /// `λ^w·self(λρ)`.
    pub fn dilated(&self, lambda: f64, weight_exp: f64) -> Result<Self, ProfileError> {
        if !(lambda > 0.0) || !lambda.is_finite() {
            return Err(ProfileError::NonPositiveScale(lambda));
        }
        Ok(RadialProfile::Dilated { inner: Arc::new(self.clone()), lambda, weight_exp })
    }

    /// Value; `NaN` outside a sampled support.
    pub fn value(&self, rho: f64) -> f64 {
        match self {
            RadialProfile::Bubble(s)
            | RadialProfile::ScaledBubble { shape: s, .. }
            | RadialProfile::TransformedBubble(s)
            | RadialProfile::Bump(s) => s.value(rho),
            RadialProfile::TangentGenerator(t) | RadialProfile::KernelEta0(t) => t.value(rho),
            RadialProfile::LamLu { inner, varrho, factor } => {
                factor * inner.value(rho.powf(*varrho).clamp(1e-300, 1e300))
            }
            RadialProfile::Dilated { inner, lambda, weight_exp } => {
                lambda.powf(*weight_exp) * inner.value(lambda * rho)
            }
            RadialProfile::Sampled(s) => s.value(rho),
            RadialProfile::Combination(terms) => {
                terms.iter().map(|(c, f)| if *c == 0.0 { 0.0 } else { c * f.value(rho) }).sum()
            }
        }
    }

    /// First derivative; `NaN` outside a sampled support.
    pub fn deriv(&self, rho: f64) -> f64 {
        match self {
            RadialProfile::Bubble(s)
            | RadialProfile::ScaledBubble { shape: s, .. }
            | RadialProfile::TransformedBubble(s)
            | RadialProfile::Bump(s) => s.deriv(rho),
            RadialProfile::TangentGenerator(t) | RadialProfile::KernelEta0(t) => t.deriv(rho),
            RadialProfile::LamLu { inner, varrho, factor } => {
                if rho == 0.0 {
                    return if *varrho > 1.0 { 0.0 } else { factor * inner.deriv(0.0) };
                }
                // ρ^ϱ leaves the f64 range deep in the end panels.
                let x = rho.powf(*varrho).clamp(1e-300, 1e300);
                factor * inner.deriv(x) * varrho * x / rho
            }
            RadialProfile::Dilated { inner, lambda, weight_exp } => {
                lambda.powf(weight_exp + 1.0) * inner.deriv(lambda * rho)
            }
            RadialProfile::Sampled(s) => s.deriv(rho),
            RadialProfile::Combination(terms) => {
                terms.iter().map(|(c, f)| if *c == 0.0 { 0.0 } else { c * f.deriv(rho) }).sum()
            }
        }
    }

    fn check(&self, rho: f64) -> Result<(), ProfileError> {
        if !(rho >= 0.0) || !rho.is_finite() {
            return Err(ProfileError::Domain(rho));
        }
        if let Some((lo, hi)) = self.support() {
            if rho < lo || rho > hi {
                return Err(ProfileError::OutOfGrid { rho, lo, hi });
            }
        }
        Ok(())
    }

    pub fn eval(&self, rho: f64) -> Result<f64, ProfileError> {
        self.check(rho)?;
        Ok(self.value(rho))
    }

    pub fn eval_deriv(&self, rho: f64) -> Result<f64, ProfileError> {
        self.check(rho)?;
        Ok(self.deriv(rho))
    }

    /// Radii where the profile is defined; `None` means all of `[0, ∞)`.
    pub fn support(&self) -> Option<(f64, f64)> {
        match self {
            RadialProfile::Sampled(s) => Some(s.support()),
            RadialProfile::LamLu { inner, varrho, .. } => {
                inner.support().map(|(a, b)| (a.powf(1.0 / varrho), b.powf(1.0 / varrho)))
            }
            RadialProfile::Dilated { inner, lambda, .. } => {
                inner.support().map(|(a, b)| (a / lambda, b / lambda))
            }
            RadialProfile::Combination(terms) => terms
                .iter()
                .filter_map(|(_, f)| f.support())
                .reduce(|(a0, b0), (a1, b1)| (a0.max(a1), b0.min(b1))),
            _ => None,
        }
    }
}

/// Analytic `U′` and `ρU″` of the bubble.
fn bubble_derivatives(d: &DerivedParams, rho: f64) -> (f64, f64, f64) {
    let shape = bubble_shape(d);
    let u = shape.value(rho);
    let du = shape.deriv(rho);
    let (l, big) = log_terms(rho, d.inner_exp);
    let frac = (l - big).exp(); // t/(1+t)
    let rho_d2u = du * ((d.inner_exp - 1.0) - (d.decay_exp + 1.0) * d.inner_exp * frac);
    (u, du, rho_d2u)
}

/// Both sides of the Euler–Lagrange equation
/// `−ρ^{1−N}(ρ^{N−1−μ}|U′|^{p−2}U′)′ = ρ^{−s}U^{r−1}`.
pub fn el_sides(params: &CknParams, rho: f64) -> (f64, f64) {
    let d = params.derive();
    let (n, p, mu, s) = (params.nf(), params.p(), params.mu(), params.s());
    let (u, du, rho_d2u) = bubble_derivatives(&d, rho);
    let m = n - 1.0 - mu;
    // (ρ^m |U′|^{p−2} U′)′ = ρ^{m−1}|U′|^{p−2}[m U′ + (p−1) ρU″]
    let bracket = m * du + (p - 1.0) * rho_d2u;
    let lhs = -rho.powf(m - 1.0 - (n - 1.0)) * du.abs().powf(p - 2.0) * bracket;
    let rhs = rho.powf(-s) * u.powf(d.r - 1.0);
    (lhs, rhs)
}

pub fn el_residual(params: &CknParams, rho: f64) -> f64 {
    let (lhs, rhs) = el_sides(params, rho);
    lhs - rhs
}

/// `|residual| / |RHS|`.
pub fn el_residual_relative(params: &CknParams, rho: f64) -> f64 {
    let (lhs, rhs) = el_sides(params, rho);
    ((lhs - rhs) / rhs).abs()
}

/// Residual of the equation for an arbitrary profile, with the outer
/// derivative taken by central differences. Used for user-supplied data.
pub fn el_residual_numeric(u: &RadialProfile, params: &CknParams, rho: f64) -> Result<f64, ProfileError> {
    let (n, p, mu, s) = (params.nf(), params.p(), params.mu(), params.s());
    let r = params.r();
    let flux = |x: f64| -> Result<f64, ProfileError> {
        let du = u.eval_deriv(x)?;
        Ok(x.powf(n - 1.0 - mu) * du.abs().powf(p - 2.0) * du)
    };
    let h = 1e-4 * rho;
    let lhs = -rho.powf(1.0 - n) * (flux(rho + h)? - flux(rho - h)?) / (2.0 * h);
    let v = u.eval(rho)?;
    Ok(lhs - rho.powf(-s) * v.abs().powf(r - 2.0) * v)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pstar() -> CknParams {
        CknParams::validate(5, 2.0, 1.0, 2.0).unwrap()
    }

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    #[test]
    fn normalization_constants() {
        assert!(rel(normalization_constant(&pstar()), 6.0) < 1e-15);
        let p = CknParams::validate(5, 3.0, 0.5, 2.0).unwrap();
        assert!(rel(normalization_constant(&p), 1.6875f64.powf(1.0 / 3.0)) < 1e-15);
        assert!(rel(normalization_constant(&p), 1.190_550_788_976_149_6) < 1e-13);
    }

    #[test]
    fn sobolev_limit_of_constant() {
        let (n, p) = (5.0, 2.0);
        let params = CknParams::from_ab(5, p, 1e-13, 1e-13).unwrap();
        let classical = (n * ((n - p) / (p - 1.0)).powf(p - 1.0)).powf((n - p) / (p * p));
        assert!(rel(normalization_constant(&params), classical) < 1e-10);
    }

    #[test]
    fn bubble_closed_form_at_reference_tuple() {
        let u = bubble(&pstar());
        assert_eq!(u.eval(0.0).unwrap(), 6.0);
        assert!(rel(u.eval(1.0).unwrap(), 1.5) < 1e-15);
        assert!(rel(u.eval_deriv(1.0).unwrap(), -1.5) < 1e-15);
        for r in [1e-3, 0.3, 2.0, 1e4] {
            assert!(rel(u.value(r), 6.0 * (1.0 + r).powi(-2)) < 1e-14);
            assert!(rel(u.deriv(r), -12.0 * (1.0 + r).powi(-3)) < 1e-13);
        }
    }

    #[test]
    fn scaled_bubble() {
        let p = pstar();
        let u1 = bubble_scaled(&p, 1.0).unwrap();
        let u = bubble(&p);
        for r in [0.0, 0.1, 1.0, 30.0] {
            assert!(rel(u1.value(r), u.value(r)) < 1e-15);
        }
        let u2 = bubble_scaled(&p, 2.0).unwrap();
        assert!(rel(u2.value(0.5), 2f64.powf(1.0) * u.value(1.0)) < 1e-15);
        assert_eq!(bubble_scaled(&p, 0.0).unwrap_err(), ProfileError::NonPositiveScale(0.0));
        assert!(bubble_scaled(&p, -1.0).is_err());
    }

    #[test]
    fn tangent_generator_identity() {
        let p = pstar();
        let w0 = tangent_generator(&p);
        let u = bubble(&p);
        for r in [0.01f64, 0.5, 1.0, 3.0, 100.0] {
            let want = (1.0 - r) * (1.0 + r).powi(-3);
            assert!((w0.value(r) - want).abs() < 1e-14 * want.abs() + 1e-16);
            let combo = u.value(r) + r * u.deriv(r);
            assert!((combo - 6.0 * want).abs() <= 1e-13 * combo.abs() + 1e-15);
        }
        assert!(w0.value(1.0).abs() < 1e-16);
    }

    #[test]
    fn tangent_zero_location() {
        let p = CknParams::validate(5, 3.0, 0.5, 2.0).unwrap();
        let RadialProfile::TangentGenerator(t) = tangent_generator(&p) else { unreachable!() };
        let z = 2f64.powf(2.0 / 1.5);
        assert!(rel(t.zero(), z) < 1e-15);
        assert!(t.value(z).abs() < 1e-15);
        assert!(t.value(0.9 * z) > 0.0 && t.value(1.1 * z) < 0.0);
    }

    #[test]
    fn tangent_matches_scale_derivative() {
        for p in [pstar(), CknParams::validate(4, 1.5, 0.5, 1.0).unwrap()] {
            let h = 1e-4;
            let up = bubble_scaled(&p, 1.0 + h).unwrap();
            let um = bubble_scaled(&p, 1.0 - h).unwrap();
            let exact = bubble_scale_derivative(&p, 1.0).unwrap();
            let w0 = tangent_generator(&p);
            let rs: Vec<f64> = (0..40).map(|i| 10f64.powf(-2.0 + 0.1 * i as f64)).collect();
            let fd: Vec<f64> = rs.iter().map(|&r| (up.value(r) - um.value(r)) / (2.0 * h)).collect();
            let w: Vec<f64> = rs.iter().map(|&r| w0.value(r)).collect();
            let c = fd.iter().zip(&w).map(|(a, b)| a * b).sum::<f64>() / w.iter().map(|b| b * b).sum::<f64>();
            for ((r, f), g) in rs.iter().zip(&fd).zip(&w) {
                assert!((f - c * g).abs() <= 1e-5 * f.abs().max(1e-3 * c.abs()), "rho {r}");
                assert!((exact.value(*r) - f).abs() <= 1e-6 * f.abs().max(1e-2));
            }
            assert!(rel(c, tangent_factor(&p)) < 1e-6);
        }
    }

    #[test]
    fn transformed_objects() {
        let p = pstar();
        let v = transformed_bubble(&p);
        let eta = kernel_eta0(&p);
        for t in [0.1, 1.0, 3.0] {
            assert!(rel(v.value(t), 6.0 * (1.0 + t * t).powi(-2)) < 1e-14);
            let want = (1.0 - t * t) * (1.0 + t * t).powi(-3);
            assert!((eta.value(t) - want).abs() < 1e-14);
            assert!((eta.value(t) - tangent_generator(&p).value(t * t)).abs() < 1e-15);
        }
    }

    #[test]
    fn combination_linearity() {
        let u = bubble(&pstar());
        let c = RadialProfile::combination(vec![(2.0, u.clone()), (-1.0, u.clone())]);
        for r in [0.0, 0.2, 5.0] {
            assert!((c.value(r) - u.value(r)).abs() < 1e-15);
            assert!((c.deriv(r) - u.deriv(r)).abs() < 1e-14);
        }
    }

    #[test]
    fn residual_reference_identity() {
        let p = pstar();
        for i in 0..60 {
            let r = 10f64.powf(-3.0 + 6.0 * i as f64 / 59.0);
            let (lhs, rhs) = el_sides(&p, r);
            let want = 36.0 * r.powi(-2) * (1.0 + r).powi(-4);
            assert!(rel(rhs, want) < 1e-13);
            assert!(rel(lhs, want) < 1e-12, "rho {r}: {lhs} vs {want}");
        }
    }

    #[test]
    fn residual_small_for_suite() {
        for (n, p, mu, s) in [(5, 3.0, 0.5, 2.0), (4, 1.5, 0.5, 1.0), (4, 1.25, 0.5, 1.5)] {
            let params = CknParams::validate(n, p, mu, s).unwrap();
            for r in [1e-3, 0.1, 1.0, 10.0, 1e3] {
                assert!(el_residual_relative(&params, r) < 1e-10, "{params} rho {r}");
            }
        }
    }

    #[test]
    fn numeric_residual_of_zero_profile() {
        let zero = RadialProfile::combination(vec![(0.0, bubble(&pstar()))]);
        assert_eq!(el_residual_numeric(&zero, &pstar(), 1.0).unwrap(), 0.0);
    }

    #[test]
    fn sampled_interpolation_and_grid_errors() {
        let u = bubble(&pstar());
        let grid: Vec<f64> = (0..=400).map(|i| 10f64.powf(-2.0 + i as f64 / 100.0)).collect();
        let with_d = Sampled::from_profile(&u, grid.clone()).unwrap();
        let values: Vec<f64> = grid.iter().map(|&r| u.value(r)).collect();
        let no_d = Sampled::new(grid, values, None).unwrap();
        for s in [with_d, no_d] {
            let prof = RadialProfile::sampled(s);
            for r in [0.0123, 0.7, 1.0, 55.0] {
                assert!(rel(prof.eval(r).unwrap(), u.value(r)) < 1e-4);
                assert!(rel(prof.eval_deriv(r).unwrap(), u.deriv(r)) < 1e-2);
            }
            assert!(matches!(prof.eval(1e-3), Err(ProfileError::OutOfGrid { .. })));
            assert!(matches!(prof.eval(1e3), Err(ProfileError::OutOfGrid { .. })));
        }
    }

    #[test]
    fn sampled_rejects_bad_grids() {
        assert!(Sampled::new(vec![1.0, 1.0], vec![0.0, 0.0], None).is_err());
        assert!(Sampled::new(vec![0.0, 1.0], vec![0.0, 0.0], None).is_err());
        assert!(Sampled::new(vec![1.0, 2.0], vec![0.0], None).is_err());
        assert!(Sampled::new(vec![1.0, 2.0], vec![0.0, f64::NAN], None).is_err());
    }

    #[test]
    fn sampled_csv_round_trip() {
        let u = bubble(&pstar());
        let s = Sampled::from_profile(&u, vec![0.5, 1.0, 2.0, 4.0]).unwrap();
        let mut buf = Vec::new();
        s.write_csv(&mut buf).unwrap();
        let back = Sampled::read_csv(buf.as_slice()).unwrap();
        assert_eq!(back, s);
        let two = "# comment\n0.5,1\n1.0,2\n2.0,1.5\n";
        let t = Sampled::read_csv(two.as_bytes()).unwrap();
        assert!(!t.has_derivative());
        assert_eq!(t.grid(), &[0.5, 1.0, 2.0]);
        assert!(Sampled::read_csv("1,2\n3\n".as_bytes()).is_err());
    }

    #[test]
    fn lamlu_and_dilation_derivatives() {
        let u = bubble(&pstar());
        let l = RadialProfile::LamLu { inner: Arc::new(u.clone()), varrho: 1.5, factor: 0.7 };
        let d = u.dilated(3.0, 0.4).unwrap();
        for prof in [l, d] {
            for r in [0.2, 1.0, 4.0] {
                let h = 1e-6 * r;
                let fd = (prof.value(r + h) - prof.value(r - h)) / (2.0 * h);
                assert!(rel(prof.deriv(r), fd) < 1e-7);
            }
        }
    }

    #[test]
    fn far_tails_do_not_overflow() {
        let p = CknParams::validate(4, 1.25, 0.5, 1.5).unwrap();
        for prof in [bubble(&p), tangent_generator(&p), transformed_bubble(&p), kernel_eta0(&p)] {
            for r in [1e-300, 1e-20, 1e20, 1e300] {
                assert!(prof.value(r).is_finite());
                assert!(prof.deriv(r).is_finite());
            }
        }
    }
}
