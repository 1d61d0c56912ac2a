use ckn_core::acceptance::suite;
use ckn_core::extremals::{bubble, bubble_scaled, bump};
use ckn_core::functionals::deficit;
use ckn_core::manifold::distance_to_manifold;
use ckn_core::{CknParams, QuadratureSpec};
use proptest::prelude::*;

fn tuple() -> impl Strategy<Value = CknParams> {
    (0..suite().len()).prop_map(|i| suite()[i])
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    // Invariance of the manifold under c and dilations: cU_λ is found on it.
    #[test]
    fn manifold_points_have_zero_distance(params in tuple(), c in 0.2f64..5.0, log_l in -1.5f64..1.5) {
        let spec = QuadratureSpec::default();
        let lambda = 10f64.powf(log_l);
        let u = bubble_scaled(&params, lambda).unwrap().scaled(c);
        let (d, point) = distance_to_manifold(&u, &params, &spec).unwrap();
        let norm = c * deficit(&bubble(&params), &params, &spec).unwrap().grad_norm;
        prop_assert!(d <= 1e-5 * norm, "d = {d:e}, norm = {norm}");
        prop_assert!((point.c - c).abs() <= 1e-5 * c);
        prop_assert!((point.lambda / lambda - 1.0).abs() <= 1e-5);
    }

    // 𝒮 is the infimum: perturbed bubbles have nonnegative deficit and
    // lie no farther from the manifold than from the origin.
    #[test]
    fn perturbations_have_nonnegative_deficit(
        params in tuple(),
        amp in -0.5f64..0.5,
        log_scale in -0.7f64..0.7,
        extra in 0.5f64..2.0,
    ) {
        let spec = QuadratureSpec::default();
        let de = params.derive().decay_exp;
        let ie = params.derive().inner_exp;
        let w = bump(amp, 10f64.powf(log_scale), ie, de + extra).unwrap();
        let u = bubble(&params).plus(1.0, &w);
        let rep = deficit(&u, &params, &spec).unwrap();
        prop_assert!(rep.deficit >= -1e-9 * rep.grad_norm.powf(params.p()), "deficit {:e}", rep.deficit);
        let (d, _) = distance_to_manifold(&u, &params, &spec).unwrap();
        prop_assert!(d <= rep.grad_norm * (1.0 + 1e-9));
    }
}
