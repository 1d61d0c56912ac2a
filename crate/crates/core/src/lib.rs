//! Numerical laboratory for the weighted Caffarelli–Kohn–Nirenberg inequality
//! `∫|x|^{−μ}|∇u|^p ≥ 𝒮 (∫|x|^{−s}|u|^r)^{p/r}`.
//!
//! Modules follow the objects involved: exponent bookkeeping ([`params`]),
//! the extremal bubbles ([`extremals`]), radial quadrature, the functionals
//! and their deficit, the extremal manifold, the linearized spectrum, the
//! quantitative stability probes, the appendix inequalities and the
//! symmetry region classifier.

// NaN must fail every domain check, so `!(x > 0.0)` is intentional.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::too_many_arguments)]

pub mod acceptance;
pub mod error;
pub mod extremals;
pub mod functionals;
pub mod ineq;
pub mod manifold;
mod optim;
pub mod params;
pub mod quadrature;
pub mod regions;
pub mod spectral;
pub mod stability;

pub use error::{Error, Result};
pub use extremals::{RadialProfile, Sampled};
pub use params::{CknParams, DerivedParams, ParamError};
pub use quadrature::{Normalization, QuadratureSpec};
