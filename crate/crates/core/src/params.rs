//! Exponent tuples `(N, p, μ, s)` of the weighted inequality and every
//! quantity derived from them.
//!
//! A [`CknParams`] can only be obtained through [`CknParams::validate`] (or
//! [`CknParams::from_ab`]), so holding one is proof that
//!
//! ```text
//! 1 < p < N,   0 < μ < N − p,   μ/p ≤ s/r < μ/p + 1,   r = p(N − s)/(N − p − μ).
//! ```

use serde::{Deserialize, Serialize};
use std::fmt;
use thiserror::Error;

/// Slack used for the closed left boundary `s/r = μ/p`, so inputs that sit on
/// the boundary analytically are not rejected because of rounding.
pub const BOUNDARY_SLACK: f64 = 1e-14;

/// The clause of the admissible region that a rejected tuple violates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Clause {
    DimensionAtLeastTwo,
    PGreaterThanOne,
    PLessThanN,
    MuPositive,
    MuBelowNMinusP,
    LowerWeightBound,
    UpperWeightBound,
}

impl fmt::Display for Clause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Clause::DimensionAtLeastTwo => "N ≥ 2",
            Clause::PGreaterThanOne => "p > 1",
            Clause::PLessThanN => "p < N",
            Clause::MuPositive => "μ > 0",
            Clause::MuBelowNMinusP => "μ < N−p",
            Clause::LowerWeightBound => "s/r ≥ μ/p",
            Clause::UpperWeightBound => "s/r < μ/p + 1",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParamError {
    #[error("parameter `{name}` is not finite")]
    NonFinite { name: &'static str },
    #[error("parameters outside the admissible region: {clause} is violated")]
    OutOfRegion { clause: Clause },
}

/// A validated exponent tuple.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CknParams {
    n: u32,
    p: f64,
    mu: f64,
    s: f64,
}

impl CknParams {
    pub fn validate(n: u32, p: f64, mu: f64, s: f64) -> Result<Self, ParamError> {
        for (name, v) in [("p", p), ("mu", mu), ("s", s)] {
            if !v.is_finite() {
                return Err(ParamError::NonFinite { name });
            }
        }
        let out = |clause| Err(ParamError::OutOfRegion { clause });
        let nf = f64::from(n);
        if n < 2 {
            return out(Clause::DimensionAtLeastTwo);
        }
        if p <= 1.0 {
            return out(Clause::PGreaterThanOne);
        }
        if p >= nf {
            return out(Clause::PLessThanN);
        }
        if mu <= 0.0 {
            return out(Clause::MuPositive);
        }
        if mu >= nf - p {
            return out(Clause::MuBelowNMinusP);
        }
        let r = p * (nf - s) / (nf - p - mu);
        let a = mu / p;
        if !(r > 0.0) || s / r < a - BOUNDARY_SLACK {
            return out(Clause::LowerWeightBound);
        }
        if s / r >= a + 1.0 - BOUNDARY_SLACK {
            return out(Clause::UpperWeightBound);
        }
        let params = CknParams { n, p, mu, s };
        assert!(params.r() > p, "admissible region must force r > p");
        Ok(params)
    }

    /// Builds the tuple from the classical exponents `a = μ/p`, `b = s/r`.
    pub fn from_ab(n: u32, p: f64, a: f64, b: f64) -> Result<Self, ParamError> {
        for (name, v) in [("p", p), ("a", a), ("b", b)] {
            if !v.is_finite() {
                return Err(ParamError::NonFinite { name });
            }
        }
        let nf = f64::from(n);
        let denom = nf - p * (1.0 + a - b);
        if !(denom > 0.0) {
            // r is not positive; report it against the clause that fails first.
            let clause = if a <= 0.0 {
                Clause::MuPositive
            } else if b < a {
                Clause::LowerWeightBound
            } else {
                Clause::MuBelowNMinusP
            };
            return Err(ParamError::OutOfRegion { clause });
        }
        let r = p * nf / denom;
        Self::validate(n, p, a * p, b * r)
    }

    pub fn n(&self) -> u32 {
        self.n
    }
    pub fn p(&self) -> f64 {
        self.p
    }
    pub fn mu(&self) -> f64 {
        self.mu
    }
    pub fn s(&self) -> f64 {
        self.s
    }

    /// Dimension as a float, for formulas.
    pub fn nf(&self) -> f64 {
        f64::from(self.n)
    }

    pub fn r(&self) -> f64 {
        self.p * (self.nf() - self.s) / (self.nf() - self.p - self.mu)
    }

    pub fn derive(&self) -> DerivedParams {
        DerivedParams::from(*self)
    }

    /// Stable textual key, used for caches and output file names.
    pub fn key(&self) -> String {
        format!("N{}_p{}_mu{}_s{}", self.n, self.p, self.mu, self.s)
    }
}

impl fmt::Display for CknParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(N={}, p={}, μ={}, s={})", self.n, self.p, self.mu, self.s)
    }
}

/// Secondary constants. Field names follow their role rather than the
/// Greek letters used in the literature; the mapping is given on each field.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DerivedParams {
    pub params: CknParams,
    /// Lebesgue exponent `r`.
    pub r: f64,
    /// `a = μ/p`.
    pub a: f64,
    /// `b = s/r`.
    pub b: f64,
    /// `a_c = (N − p)/p`.
    pub a_c: f64,
    /// `ϱ = (N − p)/(N − p − μ)`, the radial stretching of the flattening transform.
    pub rho_var: f64,
    /// `s′ = (s(N − p) − Nμ)/(N − p − μ)`, the weight exponent after flattening.
    pub s_prime: f64,
    /// Effective dimension `K = p(N − s)/(p − s + μ)` of the radial linearization.
    pub k_dim: f64,
    /// `ς = p/(p − s + μ)` of the substitution `ρ = τ^ς`.
    pub sigma: f64,
    /// Inner power of the bubble, `(p − s + μ)/(p − 1)`.
    pub inner_exp: f64,
    /// Outer (decay) power of the bubble, `(N − p − μ)/(p − s + μ)`.
    pub decay_exp: f64,
    /// Scaling exponent of dilations, `(N − p − μ)/p`.
    pub scaling_exp: f64,
}

impl From<CknParams> for DerivedParams {
    fn from(params: CknParams) -> Self {
        let CknParams { p, mu, s, .. } = params;
        let n = params.nf();
        let r = params.r();
        let gap = p - s + mu;
        let d = DerivedParams {
            params,
            r,
            a: mu / p,
            b: s / r,
            a_c: (n - p) / p,
            rho_var: (n - p) / (n - p - mu),
            s_prime: (s * (n - p) - n * mu) / (n - p - mu),
            k_dim: p * (n - s) / gap,
            sigma: p / gap,
            inner_exp: gap / (p - 1.0),
            decay_exp: (n - p - mu) / gap,
            scaling_exp: (n - p - mu) / p,
        };
        assert!(d.rho_var > 1.0);
        assert!(d.s_prime > -1e-12 && d.s_prime < p);
        assert!(d.k_dim > p);
        assert!(d.gap_condition_holds());
        d
    }
}

impl DerivedParams {
    /// `r` recomputed from the flattened weight: `p(N − s′)/(N − p)`.
    pub fn r_from_s_prime(&self) -> f64 {
        let n = self.params.nf();
        let p = self.params.p;
        p * (n - self.s_prime) / (n - p)
    }

    /// Non-degeneracy condition on the first nonradial mode, `ς²λ₁ > K − 1`
    /// with `λ₁ = N − 1`.
    pub fn gap_condition_holds(&self) -> bool {
        self.sigma * self.sigma * (self.params.nf() - 1.0) > self.k_dim - 1.0
    }

    /// Whether `r ≤ 2`, i.e. `p ≤ 2(N − μ)/(N + 2 − s)`.
    pub fn small_r(&self) -> bool {
        self.r <= 2.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * b.abs().max(1.0)
    }

    #[test]
    fn reference_tuple_is_valid() {
        let p = CknParams::validate(5, 2.0, 1.0, 2.0).unwrap();
        assert!(close(p.r(), 3.0, 1e-15));
        let d = p.derive();
        assert!(close(d.rho_var, 1.5, 1e-15));
        assert!(close(d.s_prime, 0.5, 1e-15));
        assert!(close(d.k_dim, 6.0, 1e-15));
        assert!(close(d.sigma, 2.0, 1e-15));
        assert!(close(d.r_from_s_prime(), 3.0, 1e-15));
    }

    #[test]
    fn cubic_tuple_derived_values() {
        let d = CknParams::validate(5, 3.0, 0.5, 2.0).unwrap().derive();
        assert!(close(d.r, 6.0, 1e-15));
        assert!(close(d.k_dim, 6.0, 1e-15));
        assert!(close(d.sigma, 2.0, 1e-15));
        assert!(close(d.inner_exp, 0.75, 1e-15));
        assert!(close(d.decay_exp, 1.0, 1e-15));
    }

    #[test]
    fn rejects_weight_below_lower_bound() {
        // r = 4, s/r = 0.25 < μ/p = 0.5
        let err = CknParams::validate(5, 2.0, 1.0, 1.0).unwrap_err();
        assert_eq!(err, ParamError::OutOfRegion { clause: Clause::LowerWeightBound });
    }

    #[test]
    fn rejects_large_mu() {
        let err = CknParams::validate(5, 2.0, 4.0, 1.0).unwrap_err();
        assert_eq!(err, ParamError::OutOfRegion { clause: Clause::MuBelowNMinusP });
    }

    #[test]
    fn rejects_non_finite() {
        assert!(matches!(
            CknParams::validate(5, f64::NAN, 1.0, 2.0),
            Err(ParamError::NonFinite { name: "p" })
        ));
        assert!(matches!(
            CknParams::validate(5, 2.0, 1.0, f64::INFINITY),
            Err(ParamError::NonFinite { name: "s" })
        ));
    }

    #[test]
    fn left_boundary_is_closed_right_boundary_open() {
        // b = a exactly: s/r = μ/p
        let p = CknParams::from_ab(5, 2.0, 0.5, 0.5).unwrap();
        assert!(close(p.derive().b, 0.5, 1e-14));
        // b = a + 1 is rejected
        let err = CknParams::from_ab(5, 2.0, 0.5, 1.5).unwrap_err();
        assert_eq!(err, ParamError::OutOfRegion { clause: Clause::UpperWeightBound });
    }

    #[test]
    fn from_ab_inverts_exponent_change() {
        let p = CknParams::from_ab(5, 2.0, 0.5, 2.0 / 3.0).unwrap();
        assert_eq!(p.n(), 5);
        assert!(close(p.mu(), 1.0, 1e-14));
        assert!(close(p.s(), 2.0, 1e-14));
    }

    #[test]
    fn from_ab_rejects_negative_a() {
        let err = CknParams::from_ab(5, 2.0, -0.1, 0.0).unwrap_err();
        assert_eq!(err, ParamError::OutOfRegion { clause: Clause::MuPositive });
    }

    #[test]
    fn sobolev_corner_limit() {
        let p = CknParams::from_ab(5, 2.0, 1e-10, 1e-10).unwrap();
        let d = p.derive();
        assert!((d.rho_var - 1.0).abs() < 1e-9);
        assert!(d.s_prime.abs() < 1e-9);
        assert!(close(d.r, 2.0 * 5.0 / 3.0, 1e-9));
    }

    mod props {
        use super::super::*;
        use proptest::prelude::*;

        fn admissible() -> impl Strategy<Value = CknParams> {
            (2u32..9, 0.01f64..0.99, 0.01f64..0.99, 0.0f64..0.999).prop_filter_map(
                "inadmissible",
                |(n, pf, af, bf)| {
                    let nf = f64::from(n);
                    let p = 1.0 + pf * (nf - 1.0);
                    let a_c = (nf - p) / p;
                    let a = af * a_c;
                    let b = a + bf;
                    CknParams::from_ab(n, p, a, b).ok()
                },
            )
        }

        proptest! {
            #[test]
            fn ab_round_trip(params in admissible()) {
                let d = params.derive();
                let back = CknParams::from_ab(params.n(), params.p(), d.a, d.b).unwrap();
                prop_assert!((back.mu() - params.mu()).abs() <= 1e-12 * params.mu().abs().max(1.0));
                prop_assert!((back.s() - params.s()).abs() <= 1e-12 * params.s().abs().max(1.0));
            }

            #[test]
            fn r_two_ways(params in admissible()) {
                let d = params.derive();
                prop_assert!((d.r - d.r_from_s_prime()).abs() <= 1e-12 * d.r);
            }

            #[test]
            fn gap_condition_for_every_admissible_tuple(params in admissible()) {
                let d = params.derive();
                let (p, mu, s, n) = (params.p(), params.mu(), params.s(), params.nf());
                let lhs = ((p - s + mu) / p).powi(2) * (p * (n - s) / (p - s + mu) - 1.0);
                prop_assert!(lhs > 0.0 && lhs < n - 1.0);
                prop_assert!(d.gap_condition_holds());
            }
        }
    }
}
