//! Structural properties of norms, exponents and the homeomorphism on
//! random inputs.

use std::sync::Arc;

use proptest::prelude::*;

use varexp_parabolic::exponent_spaces::{
    beta1_exponent, conjugate, critical_exponent, luxemburg_norm, modular,
};
use varexp_parabolic::pn_spaces::{phi_inverse, phi_map, pn_integral, pn_integral_exact, PnIndex};
use varexp_parabolic::solver::{assemble_diffusion_divergence, assemble_diffusion_transformed};
use varexp_parabolic::{ExponentField, GridFunction, Mesh, Sampled};

fn field_and_exponent() -> impl Strategy<Value = (Vec<f64>, Vec<f64>)> {
    (3usize..30).prop_flat_map(|n| {
        (
            prop::collection::vec(-50.0f64..50.0, n),
            prop::collection::vec(1.0f64..8.0, n),
        )
    })
}

fn grid(values: Vec<f64>) -> GridFunction {
    let mesh = Arc::new(Mesh::interval(1.0, values.len()).unwrap());
    GridFunction::new(mesh, values).unwrap()
}

proptest! {
    #[test]
    fn norm_is_absolutely_homogeneous((u, p) in field_and_exponent(), c in -20.0f64..20.0) {
        let pf = ExponentField::new(p).unwrap();
        let a = luxemburg_norm(&grid(u.clone()), &pf).unwrap();
        let b = luxemburg_norm(&grid(u.iter().map(|x| c * x).collect()), &pf).unwrap();
        prop_assert!((b - c.abs() * a).abs() <= 1e-10 * (b.abs() + 1e-300).max(c.abs() * a));
    }

    #[test]
    fn modular_of_normalized_field_is_one((u, p) in field_and_exponent()) {
        prop_assume!(u.iter().any(|&x| x != 0.0));
        let pf = ExponentField::new(p).unwrap();
        let f = grid(u.clone());
        let norm = luxemburg_norm(&f, &pf).unwrap();
        let m = modular(&grid(u.iter().map(|x| x / norm).collect()), &pf).unwrap();
        prop_assert!((m - 1.0).abs() <= 1e-9, "modular {}", m);
    }

    #[test]
    fn triangle_inequality((u, p) in field_and_exponent(), seed in 0u64..1000) {
        let pf = ExponentField::new(p).unwrap();
        let v: Vec<f64> = u.iter().enumerate().map(|(k, x)| x * ((k as u64 + seed) as f64).sin()).collect();
        let w: Vec<f64> = u.iter().zip(&v).map(|(a, b)| a + b).collect();
        let nu = luxemburg_norm(&grid(u), &pf).unwrap();
        let nv = luxemburg_norm(&grid(v), &pf).unwrap();
        let nw = luxemburg_norm(&grid(w), &pf).unwrap();
        prop_assert!(nw <= (nu + nv) * (1.0 + 1e-10) + 1e-300);
    }

    #[test]
    fn norm_is_monotone_in_magnitude((u, p) in field_and_exponent(), k in 0usize..30, bump in 0.0f64..5.0) {
        let pf = ExponentField::new(p).unwrap();
        let mut larger = u.clone();
        let k = k % u.len();
        larger[k] = larger[k].signum() * (larger[k].abs() + bump);
        let a = luxemburg_norm(&grid(u), &pf).unwrap();
        let b = luxemburg_norm(&grid(larger), &pf).unwrap();
        prop_assert!(a <= b * (1.0 + 1e-10));
    }

    #[test]
    fn conjugate_is_an_involution(p in prop::collection::vec(1.01f64..50.0, 1..20)) {
        let pf = ExponentField::new(p.clone()).unwrap();
        let back = conjugate(&conjugate(&pf).unwrap()).unwrap();
        for (a, b) in p.iter().zip(back.samples()) {
            prop_assert!((a - b).abs() <= 1e-9 * a);
        }
    }

    #[test]
    fn phi_inverse_undoes_phi(u in prop::collection::vec(-10.0f64..10.0, 3..20), alpha in 0.0f64..4.0, beta in 1.0f64..4.0) {
        let idx = PnIndex::new(alpha, beta).unwrap();
        let f = grid(u.clone());
        let back = phi_inverse(&phi_map(&f, idx), idx);
        for (a, b) in u.iter().zip(back.values()) {
            prop_assert!((a - b).abs() <= 1e-10 * a.abs().max(1.0));
        }
    }

    #[test]
    fn pn_integrals_scale_with_degree(u in prop::collection::vec(-3.0f64..3.0, 3..20), c in 0.1f64..4.0, alpha in 0.0f64..3.0, beta in 1.0f64..3.0) {
        let idx = PnIndex::new(alpha, beta).unwrap();
        let d = alpha + beta;
        for integral in [pn_integral, pn_integral_exact] {
            let a = integral(&grid(u.clone()), idx);
            let b = integral(&grid(u.iter().map(|x| c * x).collect()), idx);
            prop_assert!((b - c.powf(d) * a).abs() <= 1e-10 * b.max(c.powf(d) * a).max(1e-300));
        }
    }

    #[test]
    fn derived_exponents_are_ordered(n in 3usize..10, p0 in 2.0f64..10.0) {
        let c = critical_exponent(n, p0).unwrap();
        let q0 = p0 / (p0 - 1.0);
        prop_assert!((c.q0 - q0).abs() < 1e-12);
        prop_assert!(c.p_tilde >= 1.0 && c.p_tilde_conj >= 1.0);
        prop_assert!((1.0 / c.p_tilde + 1.0 / c.p_tilde_conj - 1.0).abs() < 1e-12);
    }

    #[test]
    fn beta1_finite_below_p0(alpha in prop::collection::vec(1.05f64..2.9, 1..10)) {
        let a = ExponentField::new(alpha).unwrap();
        let b = beta1_exponent(&a, 3.0).unwrap();
        prop_assert!(b.samples().iter().all(|v| v.is_finite() && *v > 1.0));
    }

    #[test]
    fn assembly_paths_coincide_at_p0_two(u in prop::collection::vec(-5.0f64..5.0, 3..40)) {
        let f = grid(u);
        let d = assemble_diffusion_divergence(&f, 2.0, 0.0);
        let t = assemble_diffusion_transformed(&f, 2.0);
        prop_assert_eq!(d.values(), t.values());
    }

    #[test]
    fn divergence_assembly_conserves_mass(u in prop::collection::vec(0.0f64..5.0, 4..40), p0 in 2.0f64..5.0) {
        // interior fluxes cancel: sum of V_i (-div)_i equals the boundary outflow,
        // which vanishes when the field is flat next to both ends
        let mut v = u;
        let n = v.len();
        v[1] = v[0];
        v[n - 2] = v[n - 1];
        let f = grid(v);
        let d = assemble_diffusion_divergence(&f, p0, 0.0);
        let total: f64 = d.values().iter().zip(f.weights()).map(|(a, w)| a * w).sum();
        let scale: f64 = d.values().iter().zip(f.weights()).map(|(a, w)| (a * w).abs()).sum();
        prop_assert!(total.abs() <= 1e-10 * scale.max(1.0));
    }
}
