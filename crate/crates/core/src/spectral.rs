//! Mode-by-mode Sturm–Liouville problems of the linearized operator in the
//! variable `τ` with `ρ = τ^ς`:
//!
//! `(𝔓η′)′ − 𝔔η + α𝔚η = 0`, `𝔓 = (p−1)|V′|^{p−2}τ^{K−1}`,
//! `𝔔 = ς²λ_k|V′|^{p−2}τ^{K−3}`, `𝔚 = V^{r−2}τ^{K−1}`,
//!
//! where `V(τ) = U(τ^ς)` and `λ_k = k(N−2+k)`. The eigenvalues relate to the
//! weighted eigenvalues `ξ` of the linearization by `α = ς^p ξ`.

use crate::error::{Error, Result};
use crate::extremals::{kernel_eta0, normalization_constant, transformed_bubble, RadialProfile};
use crate::params::{CknParams, DerivedParams};
use crate::quadrature::{integrate_half_line, integrate_interval, QuadratureSpec};
use rayon::prelude::*;
use serde::Serialize;

/// Relative separation below which two eigenvalues count as one.
pub const MULTIPLICITY_SEPARATION: f64 = 1e-4;
/// Largest tolerated Richardson error estimate, relative.
pub const RICHARDSON_TOL: f64 = 1e-3;

/// `λ_k = k(N−2+k)`.
pub fn sphere_eigenvalue(n: u32, k: u32) -> f64 {
    let (n, k) = (f64::from(n), f64::from(k));
    k * (n - 2.0 + k)
}

/// Dimension of the degree-`k` spherical harmonics on `𝕊^{N−1}`.
pub fn harmonic_multiplicity(n: u32, k: u32) -> u64 {
    fn binom(n: u64, k: u64) -> u64 {
        (0..k).fold(1u64, |acc, i| acc * (n - i) / (i + 1))
    }
    let (n, k) = (u64::from(n), u64::from(k));
    let lower = if k >= 2 { binom(n + k - 3, k - 2) } else { 0 };
    binom(n + k - 1, k) - lower
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SturmLiouvilleProblem {
    pub params: CknParams,
    pub k: u32,
    pub lambda_k: f64,
    pub k_dim: f64,
    pub sigma: f64,
    derived: DerivedParams,
    log_c: f64,
}

pub fn assemble(params: &CknParams, k: u32) -> SturmLiouvilleProblem {
    let d = params.derive();
    SturmLiouvilleProblem {
        params: *params,
        k,
        lambda_k: sphere_eigenvalue(params.n(), k),
        k_dim: d.k_dim,
        sigma: d.sigma,
        derived: d,
        log_c: normalization_constant(params).ln(),
    }
}

impl SturmLiouvilleProblem {
    fn q_exp(&self) -> f64 {
        self.derived.inner_exp * self.sigma
    }

    /// `ln(1 + τ^q)` for `t = ln τ`.
    fn log1p_pow(&self, t: f64) -> f64 {
        let l = self.q_exp() * t;
        if l > 0.0 {
            l + (-l).exp().ln_1p()
        } else {
            l.exp().ln_1p()
        }
    }

    pub fn log_v(&self, t: f64) -> f64 {
        self.log_c - self.derived.decay_exp * self.log1p_pow(t)
    }

    pub fn log_abs_dv(&self, t: f64) -> f64 {
        let (q, de) = (self.q_exp(), self.derived.decay_exp);
        self.log_c + (de * q).ln() + (q - 1.0) * t - (de + 1.0) * self.log1p_pow(t)
    }

    /// `ln(𝔓/τ)` at `t = ln τ`.
    fn log_flux(&self, t: f64) -> f64 {
        let p = self.params.p();
        (p - 1.0).ln() + (p - 2.0) * self.log_abs_dv(t) + (self.k_dim - 2.0) * t
    }

    /// `ln(𝔚τ)`.
    fn log_mass(&self, t: f64) -> f64 {
        (self.params.r() - 2.0) * self.log_v(t) + self.k_dim * t
    }

    /// `𝔔τ`, zero for `k = 0`.
    fn potential(&self, t: f64) -> f64 {
        if self.k == 0 {
            return 0.0;
        }
        let p = self.params.p();
        let coef = self.sigma * self.sigma * self.lambda_k;
        (coef.ln() + (p - 2.0) * self.log_abs_dv(t) + (self.k_dim - 2.0) * t).exp()
    }

    pub fn p_coef(&self, tau: f64) -> f64 {
        let t = tau.ln();
        (self.log_flux(t) + t).exp()
    }

    pub fn q_coef(&self, tau: f64) -> f64 {
        self.potential(tau.ln()) / tau
    }

    pub fn w_coef(&self, tau: f64) -> f64 {
        let t = tau.ln();
        (self.log_mass(t) - t).exp()
    }

    /// `ξ = α/ς^p`.
    pub fn xi_from_alpha(&self, alpha: f64) -> f64 {
        alpha / self.sigma.powf(self.params.p())
    }

    pub fn alpha_from_xi(&self, xi: f64) -> f64 {
        xi * self.sigma.powf(self.params.p())
    }

    fn discretize(&self, tau_min: f64, tau_max: f64, n: usize) -> Result<Discrete> {
        let (t0, t1) = (tau_min.ln(), tau_max.ln());
        let h = (t1 - t0) / (n - 1) as f64;
        let mut cond = Vec::with_capacity(n);
        let mut mass = Vec::with_capacity(n);
        let mut pot = Vec::with_capacity(n);
        for i in 0..n {
            let t = t0 + h * i as f64;
            let vol = if i == 0 || i == n - 1 { 0.5 * h } else { h };
            mass.push((self.log_mass(t)).exp() * vol);
            pot.push(self.potential(t) * vol);
            cond.push(if i + 1 < n { (self.log_flux(t + 0.5 * h)).exp() / h } else { 0.0 });
        }
        let ok = |v: &f64| v.is_finite() && *v >= 0.0;
        if !(cond.iter().all(ok) && mass.iter().all(|m| ok(m) && *m > 0.0) && pot.iter().all(ok)) {
            return Err(Error::NoConvergence {
                what: "spectral assembly",
                detail: format!("coefficients leave the f64 range on [{tau_min:e}, {tau_max:e}]"),
            });
        }
        let tau = (0..n).map(|i| (t0 + h * i as f64).exp()).collect();
        let mut disc = Discrete { tau, cond, mass, pot, dirichlet: self.k > 0 };
        // Decay at τ_max: the last node drops out and its conductance becomes
        // a tie to ground. A flux-free end would admit the constant vector,
        // which is not in L²(𝔚) on (0, ∞) and skews the spectrum when 𝔚 is
        // only just non-integrable.
        disc.tau.pop();
        disc.mass.pop();
        disc.pot.pop();
        disc.cond.pop();
        let last = disc.cond.len() - 1;
        disc.pot[last] += std::mem::take(&mut disc.cond[last]);
        if disc.dirichlet {
            // η(τ_min) = 0 for k ≥ 1.
            disc.tau.remove(0);
            disc.mass.remove(0);
            disc.pot.remove(0);
            let tie = disc.cond.remove(0);
            disc.pot[0] += tie;
        }
        Ok(disc)
    }
}

/// Three-point finite-volume form: stiffness `Σ c_i(x_{i+1}−x_i)² + Σ Q_i x_i²`,
/// mass `Σ M_i x_i²`.
struct Discrete {
    tau: Vec<f64>,
    cond: Vec<f64>,
    mass: Vec<f64>,
    pot: Vec<f64>,
    dirichlet: bool,
}

impl Discrete {
    fn len(&self) -> usize {
        self.mass.len()
    }

    /// Pivots of `S − σM` in the differential form `D_i = c_i + ε_i`, which
    /// avoids cancelling the tiny zero-row-sum remainders.
    fn pivots(&self, sigma: f64, mut visit: impl FnMut(usize, f64)) {
        let mut prev_c = 0.0;
        let mut prev_eps = 0.0;
        let mut prev_d = 1.0;
        for i in 0..self.len() {
            let carry = if i == 0 { 0.0 } else { prev_c * (prev_eps / prev_d) };
            let eps = carry + self.pot[i] - sigma * self.mass[i];
            let c = self.cond[i];
            let mut d = c + eps;
            if d == 0.0 {
                d = -f64::MIN_POSITIVE.max(1e-300 * (c.abs() + self.mass[i] * sigma.abs()));
            }
            visit(i, d);
            prev_c = c;
            prev_eps = eps;
            prev_d = d;
        }
    }

    /// Number of eigenvalues below `sigma`.
    fn count_below(&self, sigma: f64) -> usize {
        let mut count = 0;
        self.pivots(sigma, |_, d| {
            if d < 0.0 {
                count += 1;
            }
        });
        count
    }

    /// The `j`-th eigenvalue (0-based) by bisection on the Sturm count.
    fn eigenvalue(&self, j: usize) -> Result<f64> {
        let mut hi = 1.0;
        let mut guard = 0;
        while self.count_below(hi) <= j {
            hi *= 2.0;
            guard += 1;
            if guard > 200 {
                return Err(Error::NoConvergence { what: "eigenvalue bracket", detail: format!("index {j}") });
            }
        }
        let mut lo = 0.0;
        for _ in 0..300 {
            let mid = 0.5 * (lo + hi);
            if self.count_below(mid) > j {
                hi = mid;
            } else {
                lo = mid;
            }
            if hi - lo <= 4.0 * f64::EPSILON * hi || hi < 1e-300 {
                return Ok(0.5 * (lo + hi));
            }
        }
        Err(Error::NoConvergence { what: "eigenvalue bisection", detail: format!("index {j}") })
    }

    /// Solves `(S − σM)x = b`.
    fn solve(&self, sigma: f64, b: &[f64]) -> Vec<f64> {
        let n = self.len();
        let mut d = vec![0.0; n];
        self.pivots(sigma, |i, di| d[i] = di);
        let mut y = vec![0.0; n];
        for i in 0..n {
            y[i] = b[i] + if i == 0 { 0.0 } else { self.cond[i - 1] * (y[i - 1] / d[i - 1]) };
        }
        let mut x = vec![0.0; n];
        for i in (0..n).rev() {
            let next = if i + 1 < n { self.cond[i] * x[i + 1] } else { 0.0 };
            x[i] = (y[i] + next) / d[i];
        }
        x
    }

    fn mass_norm(&self, x: &[f64]) -> f64 {
        x.iter().zip(&self.mass).map(|(x, m)| m * x * x).sum::<f64>().sqrt()
    }

    /// Eigenvector for an (accurate) eigenvalue by inverse iteration, normalized
    /// in `L²(𝔚)` and signed so that the first significant entry is positive.
    fn eigenvector(&self, alpha: f64) -> Vec<f64> {
        let sigma = alpha * (1.0 - 1e-11);
        let mut x = vec![1.0; self.len()];
        for _ in 0..4 {
            let b: Vec<f64> = x.iter().zip(&self.mass).map(|(x, m)| x * m).collect();
            x = self.solve(sigma, &b);
            let nrm = self.mass_norm(&x);
            x.iter_mut().for_each(|v| *v /= nrm);
        }
        let big = significant(&x);
        if let Some(first) = x.iter().zip(&big).find(|(_, s)| **s).map(|(v, _)| *v) {
            if first < 0.0 {
                x.iter_mut().for_each(|v| *v = -*v);
            }
        }
        x
    }
}

/// Entries above the noise floor.
fn significant(x: &[f64]) -> Vec<bool> {
    let top = x.iter().fold(0.0, |m: f64, v| m.max(v.abs()));
    x.iter().map(|v| v.abs() > 1e-8 * top).collect()
}

/// Sign changes over the significant entries.
fn sign_changes(x: &[f64]) -> usize {
    let keep = significant(x);
    let signs: Vec<bool> = x.iter().zip(&keep).filter(|(_, k)| **k).map(|(v, _)| *v > 0.0).collect();
    signs.windows(2).filter(|w| w[0] != w[1]).count()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SolverConfig {
    pub tau_min: f64,
    pub tau_max: f64,
    /// Nodes on the coarsest grid; the refinements use `2n−1` and `4n−3`.
    pub grid_size: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig { tau_min: 1e-5, tau_max: 1e5, grid_size: 4096 }
    }
}

impl SolverConfig {
    pub fn with_grid(grid_size: usize) -> Self {
        SolverConfig { grid_size, ..Self::default() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Spectrum {
    pub k: u32,
    /// Richardson-extrapolated eigenvalues `α`.
    pub alphas: Vec<f64>,
    /// `ξ = α/ς^p`.
    pub xis: Vec<f64>,
    /// Raw eigenvalues on the three grids, coarse to fine.
    pub raw: Vec<[f64; 3]>,
    pub error_estimates: Vec<f64>,
    /// Finest-grid nodes and `L²(𝔚)`-normalized eigenvectors.
    pub tau: Vec<f64>,
    pub eigenfunctions: Vec<Vec<f64>>,
    /// `𝔚`-cell weights on the finest grid.
    #[serde(skip)]
    pub weights: Vec<f64>,
    pub sign_changes: Vec<usize>,
    pub config: SolverConfig,
}

impl Spectrum {
    /// Relative `L²(𝔚)` distance between eigenfunction `i` and `f` sampled on
    /// the grid, after normalizing `f` and matching signs.
    pub fn eigenfunction_error(&self, i: usize, f: impl Fn(f64) -> f64) -> f64 {
        let g: Vec<f64> = self.tau.iter().map(|&t| f(t)).collect();
        let gn: f64 = g.iter().zip(&self.weights).map(|(g, w)| w * g * g).sum::<f64>().sqrt();
        let x = &self.eigenfunctions[i];
        let dot: f64 = g.iter().zip(x).zip(&self.weights).map(|((g, x), w)| w * g * x).sum();
        let sgn = dot.signum();
        g.iter()
            .zip(x)
            .zip(&self.weights)
            .map(|((g, x), w)| w * (x - sgn * g / gn).powi(2))
            .sum::<f64>()
            .sqrt()
    }

    /// Whether eigenvalue `i` is separated from its neighbours.
    pub fn is_simple(&self, i: usize) -> bool {
        let a = self.alphas[i];
        let apart = |j: usize| ((self.alphas[j] - a) / a).abs() > MULTIPLICITY_SEPARATION;
        (i == 0 || apart(i - 1)) && (i + 1 >= self.alphas.len() || apart(i + 1))
    }
}

pub fn eigen_solve(problem: &SturmLiouvilleProblem, n_eigs: usize, grid_size: usize) -> Result<Spectrum> {
    eigen_solve_with(problem, n_eigs, &SolverConfig::with_grid(grid_size))
}

pub fn eigen_solve_with(problem: &SturmLiouvilleProblem, n_eigs: usize, cfg: &SolverConfig) -> Result<Spectrum> {
    if n_eigs == 0 {
        return Err(Error::InvalidInput("n_eigs must be at least 1".into()));
    }
    if cfg.grid_size < 256 {
        return Err(Error::InvalidInput(format!("grid_size {} is below 256", cfg.grid_size)));
    }
    if !(cfg.tau_min > 0.0 && cfg.tau_max > cfg.tau_min) {
        return Err(Error::InvalidInput(format!("bad τ window [{}, {}]", cfg.tau_min, cfg.tau_max)));
    }
    let sizes = [cfg.grid_size, 2 * cfg.grid_size - 1, 4 * cfg.grid_size - 3];
    let grids: Vec<Discrete> = sizes
        .iter()
        .map(|&n| problem.discretize(cfg.tau_min, cfg.tau_max, n))
        .collect::<Result<_>>()?;
    let mut raw = Vec::with_capacity(n_eigs);
    for j in 0..n_eigs {
        let vals = grids.iter().map(|g| g.eigenvalue(j)).collect::<Result<Vec<_>>>()?;
        raw.push([vals[0], vals[1], vals[2]]);
    }
    let mut alphas = Vec::with_capacity(n_eigs);
    let mut errors = Vec::with_capacity(n_eigs);
    for v in &raw {
        let r1_coarse = (4.0 * v[1] - v[0]) / 3.0;
        let r1_fine = (4.0 * v[2] - v[1]) / 3.0;
        let r2 = (16.0 * r1_fine - r1_coarse) / 15.0;
        let err = (r2 - r1_fine).abs();
        if err > RICHARDSON_TOL * r2.abs() {
            return Err(Error::GridTooCoarse { estimate: err / r2.abs() });
        }
        alphas.push(r2);
        errors.push(err);
    }
    let fine = &grids[2];
    let eigenfunctions: Vec<Vec<f64>> = raw.iter().map(|v| fine.eigenvector(v[2])).collect();
    let sign_changes = eigenfunctions.iter().map(|x| self::sign_changes(x)).collect();
    let (mut tau, mut efs, mut weights) = (fine.tau.clone(), eigenfunctions, fine.mass.clone());
    if fine.dirichlet {
        tau.insert(0, cfg.tau_min);
        weights.insert(0, 0.0);
        efs.iter_mut().for_each(|x| x.insert(0, 0.0));
    }
    tau.push(cfg.tau_max);
    weights.push(0.0);
    efs.iter_mut().for_each(|x| x.push(0.0));
    Ok(Spectrum {
        k: problem.k,
        xis: alphas.iter().map(|a| problem.xi_from_alpha(*a)).collect(),
        alphas,
        raw,
        error_estimates: errors,
        tau,
        eigenfunctions: efs,
        weights,
        sign_changes,
        config: *cfg,
    })
}

/// Continuous Rayleigh quotient `∫(𝔓η′² + 𝔔η²)/∫𝔚η²` over `(0, ∞)`.
pub fn rayleigh_quotient(problem: &SturmLiouvilleProblem, eta: &RadialProfile, spec: &QuadratureSpec) -> Result<f64> {
    let p = problem.params.p();
    let k1 = problem.k_dim - 1.0;
    let coef = problem.sigma * problem.sigma * problem.lambda_k;
    // integrands divided by τ^{K−1}
    let stiff = |tau: f64| {
        let t = tau.ln();
        let lw = (p - 2.0) * problem.log_abs_dv(t);
        let (d, v) = (eta.deriv(tau), eta.value(tau));
        let a = if d == 0.0 { 0.0 } else { (p - 1.0) * (lw + 2.0 * d.abs().ln()).exp() };
        let b = if v == 0.0 || coef == 0.0 { 0.0 } else { coef * (lw - 2.0 * t + 2.0 * v.abs().ln()).exp() };
        a + b
    };
    let mass = |tau: f64| {
        let v = eta.value(tau);
        if v == 0.0 {
            0.0
        } else {
            ((problem.params.r() - 2.0) * problem.log_v(tau.ln())).exp() * v * v
        }
    };
    let num = integrate_half_line(&stiff, k1, spec)?.value;
    let den = integrate_half_line(&mass, k1, spec)?.value;
    if !(den > 0.0) {
        return Err(Error::DegenerateDenominator);
    }
    Ok(num / den)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModeZeroCheck {
    pub xi1: f64,
    pub xi2: f64,
    pub xi3: f64,
    pub xi1_rel_error: f64,
    pub xi2_rel_error: f64,
    /// `L²(𝔚)` errors of the eigenfunctions against `V` and `η₀`.
    pub v_error: f64,
    pub eta0_error: f64,
    pub xi2_simple: bool,
    pub sign_changes: Vec<usize>,
    /// Rayleigh quotients of `V`, `η₀` against the matrix `α₁`, `α₂`.
    pub rayleigh_v_rel: f64,
    pub rayleigh_eta0_rel: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModeCheck {
    pub k: u32,
    pub multiplicity: u64,
    pub xi1: f64,
    /// `ξ₁^{(k)} − (r−1)`.
    pub margin: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KnownModesReport {
    pub params: CknParams,
    pub mode_zero: ModeZeroCheck,
    pub modes: Vec<ModeCheck>,
    pub min_margin: f64,
    /// `ς²(N−1) > K−1`.
    pub precondition: bool,
    pub nondegenerate: bool,
}

fn mode_zero(params: &CknParams, cfg: &SolverConfig, spec: &QuadratureSpec) -> Result<(ModeZeroCheck, Spectrum)> {
    let prob = assemble(params, 0);
    let sp = eigen_solve_with(&prob, 3, cfg)?;
    let (p, r) = (params.p(), params.r());
    let v = transformed_bubble(params);
    let eta = kernel_eta0(params);
    let rv = rayleigh_quotient(&prob, &v, spec)?;
    let re = rayleigh_quotient(&prob, &eta, spec)?;
    let check = ModeZeroCheck {
        xi1: sp.xis[0],
        xi2: sp.xis[1],
        xi3: sp.xis[2],
        xi1_rel_error: ((sp.xis[0] - (p - 1.0)) / (p - 1.0)).abs(),
        xi2_rel_error: ((sp.xis[1] - (r - 1.0)) / (r - 1.0)).abs(),
        v_error: sp.eigenfunction_error(0, |t| v.value(t)),
        eta0_error: sp.eigenfunction_error(1, |t| eta.value(t)),
        xi2_simple: sp.is_simple(1),
        sign_changes: sp.sign_changes.clone(),
        rayleigh_v_rel: ((rv - sp.alphas[0]) / sp.alphas[0]).abs(),
        rayleigh_eta0_rel: ((re - sp.alphas[1]) / sp.alphas[1]).abs(),
    };
    Ok((check, sp))
}

fn lowest_modes(params: &CknParams, k_max: u32, cfg: &SolverConfig) -> Result<Vec<ModeCheck>> {
    let r = params.r();
    (1..=k_max)
        .into_par_iter()
        .map(|k| {
            let prob = assemble(params, k);
            let sp = eigen_solve_with(&prob, 1, cfg)?;
            Ok(ModeCheck {
                k,
                multiplicity: harmonic_multiplicity(params.n(), k),
                xi1: sp.xis[0],
                margin: sp.xis[0] - (r - 1.0),
            })
        })
        .collect()
}

pub fn verify_known_modes_with(params: &CknParams, k_max: u32, cfg: &SolverConfig) -> Result<KnownModesReport> {
    let (mz, _) = mode_zero(params, cfg, &QuadratureSpec::default())?;
    let modes = lowest_modes(params, k_max, cfg)?;
    let min_margin = modes.iter().map(|m| m.margin).fold(f64::INFINITY, f64::min);
    let precondition = params.derive().gap_condition_holds();
    let nondegenerate = mz.xi2_simple && min_margin > 0.0;
    Ok(KnownModesReport { params: *params, mode_zero: mz, modes, min_margin, precondition, nondegenerate })
}

/// Mode-0 identities and the lowest eigenvalue of modes `1..=3`.
pub fn verify_known_modes(params: &CknParams, grid_size: usize) -> Result<KnownModesReport> {
    verify_known_modes_with(params, 3, &SolverConfig::with_grid(grid_size))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GapReport {
    pub tau_hat: f64,
    /// Mode attaining the minimum (0 means the third radial eigenvalue).
    pub mode: u32,
    pub xi3_mode0: f64,
    pub modes: Vec<ModeCheck>,
}

pub fn spectral_gap_with(params: &CknParams, k_max: u32, cfg: &SolverConfig) -> Result<GapReport> {
    if k_max == 0 {
        return Err(Error::InvalidInput("k_max must be at least 1".into()));
    }
    let r = params.r();
    let sp = eigen_solve_with(&assemble(params, 0), 3, cfg)?;
    let modes = lowest_modes(params, k_max, cfg)?;
    let mut best = (sp.xis[2] - (r - 1.0), 0u32);
    for m in &modes {
        if m.margin < best.0 {
            best = (m.margin, m.k);
        }
    }
    let tau_hat = 0.5 * best.0;
    if !(tau_hat > 0.0) {
        return Err(Error::NonPositiveGap { mode: best.1 as usize, gap: tau_hat });
    }
    Ok(GapReport { tau_hat, mode: best.1, xi3_mode0: sp.xis[2], modes })
}

/// `τ̂ = ½·min(ξ₃^{(0)} − (r−1), min_k ξ₁^{(k)} − (r−1))`.
pub fn spectral_gap(params: &CknParams, k_max: u32, grid_size: usize) -> Result<GapReport> {
    spectral_gap_with(params, k_max, &SolverConfig::with_grid(grid_size))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KernelReport {
    pub b: f64,
    /// Zero of `η₀` and the start `2τ₀` of the integration.
    pub tau0: f64,
    pub tau_start: f64,
    /// `(τ, w(τ))` over `[10², 10⁴]`.
    pub samples: Vec<(f64, f64)>,
    pub asymptote: f64,
    /// `−B(p−1)/(K−p)`.
    pub predicted_limit: f64,
    /// `(max w − min w)/|w(10⁴)|` on the sample window.
    pub flatness: f64,
    /// Log-log slope of `|η₀|` over `[10³, 10⁴]` and its closed form `(p−K)/(p−1)`.
    pub eta0_tail_slope: f64,
    pub eta0_predicted_slope: f64,
}

/// Builds the second radial solution `w = cη₀` with
/// `c′ = B(1+τ^q)^{K(p−2)/p}/(η₀²τ^{(K(p−2)+K−1)/(p−1)})` and checks that it
/// tends to a nonzero constant.
pub fn kernel_second_solution_checks(params: &CknParams, b: f64, spec: &QuadratureSpec) -> Result<KernelReport> {
    let d = params.derive();
    let (p, k) = (params.p(), d.k_dim);
    let q = p / (p - 1.0);
    let eta = kernel_eta0(params);
    let tau0 = (p - 1.0).powf(1.0 / q);
    let tau_start = 2.0 * tau0;
    let lead = k * (p - 2.0) / p;
    let expo = (k * (p - 2.0) + k - 1.0) / (p - 1.0);
    let dc = |tau: f64| {
        let e = eta.value(tau);
        let t = tau.ln();
        let l = q * t;
        let log1p = if l > 0.0 { l + (-l).exp().ln_1p() } else { l.exp().ln_1p() };
        (lead * log1p - expo * t).exp() / (e * e)
    };
    let points: Vec<f64> = (0..=20).map(|i| 10f64.powf(2.0 + 0.1 * i as f64)).collect();
    let mut acc = integrate_interval(&dc, 0.0, tau_start, points[0], spec)?.value;
    let mut samples = Vec::with_capacity(points.len());
    samples.push((points[0], b * acc * eta.value(points[0])));
    for w in points.windows(2) {
        acc += integrate_interval(&dc, 0.0, w[0], w[1], spec)?.value;
        samples.push((w[1], b * acc * eta.value(w[1])));
    }
    let asymptote = samples.last().map(|s| s.1).unwrap_or(0.0);
    let (lo, hi) = samples.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), s| (lo.min(s.1), hi.max(s.1)));
    let flatness = if asymptote == 0.0 { 0.0 } else { (hi - lo) / asymptote.abs() };
    let (e3, e4) = (eta.value(1e3).abs(), eta.value(1e4).abs());
    Ok(KernelReport {
        b,
        tau0,
        tau_start,
        samples,
        asymptote,
        predicted_limit: -b * (p - 1.0) / (k - p),
        flatness,
        eta0_tail_slope: (e4 / e3).log10(),
        eta0_predicted_slope: (p - k) / (p - 1.0),
    })
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
    fn coefficients_at_pstar() {
        let p0 = assemble(&pstar(), 0);
        let p1 = assemble(&pstar(), 1);
        for tau in [0.1f64, 1.0, 3.0] {
            let v = 6.0 / (1.0 + tau * tau).powi(2);
            assert!(rel(p0.p_coef(tau), tau.powi(5)) < 1e-13);
            assert!(rel(p0.w_coef(tau), v * tau.powi(5)) < 1e-13);
            assert_eq!(p0.q_coef(tau), 0.0);
            assert!(rel(p1.q_coef(tau), 16.0 * tau.powi(3)) < 1e-13);
        }
        assert_eq!(p1.lambda_k, 4.0);
    }

    #[test]
    fn multiplicities() {
        assert_eq!(harmonic_multiplicity(3, 0), 1);
        assert_eq!(harmonic_multiplicity(3, 1), 3);
        assert_eq!(harmonic_multiplicity(3, 2), 5);
        assert_eq!(harmonic_multiplicity(5, 2), 14);
    }

    #[test]
    fn pstar_mode_zero() {
        let sp = eigen_solve(&assemble(&pstar(), 0), 3, 1024).unwrap();
        assert!(rel(sp.alphas[0], 4.0) < 1e-6, "{:?}", sp.alphas);
        assert!(rel(sp.alphas[1], 8.0) < 1e-6, "{:?}", sp.alphas);
        assert_eq!(sp.sign_changes, vec![0, 1, 2]);
        let v = transformed_bubble(&pstar());
        assert!(sp.eigenfunction_error(0, |t| v.value(t)) < 1e-3);
    }

    #[test]
    fn higher_modes_increase() {
        let xs: Vec<f64> = (1..=3)
            .map(|k| eigen_solve(&assemble(&pstar(), k), 1, 512).unwrap().xis[0])
            .collect();
        assert!(xs[0] > 2.0 && xs[0] < xs[1] && xs[1] < xs[2], "{xs:?}");
    }

    #[test]
    fn rejects_bad_requests() {
        let prob = assemble(&pstar(), 0);
        assert!(eigen_solve(&prob, 0, 1024).is_err());
        assert!(eigen_solve(&prob, 1, 100).is_err());
    }

    #[test]
    fn kernel_tail() {
        let rep = kernel_second_solution_checks(&pstar(), 1.0, &QuadratureSpec::default()).unwrap();
        assert!(rep.flatness < 0.01, "{rep:?}");
        assert!(rel(rep.asymptote, -0.25) < 1e-3, "{rep:?}");
        assert!((rep.eta0_tail_slope - rep.eta0_predicted_slope).abs() < 1e-3);
        let zero = kernel_second_solution_checks(&pstar(), 0.0, &QuadratureSpec::default()).unwrap();
        assert!(zero.samples.iter().all(|s| s.1 == 0.0));
    }
}
