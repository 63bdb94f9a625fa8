//! Randomized invariants of the numerical kernels, driven by proptest.

use hartree_lab::cartesian::{reflect, CartesianField, CartesianGrid, AXES};
use hartree_lab::functionals::{a_form, hminus1_norm_sq, l_omega};
use hartree_lab::radial::{
    integrate_radial, norms, Parity, RadialField, RadialGrid, SpacingKind,
};
use proptest::prelude::*;
use std::sync::Arc;

fn grid() -> Arc<RadialGrid> {
    RadialGrid::build(256, 40.0, SpacingKind::Uniform).unwrap()
}

fn log_grid() -> Arc<RadialGrid> {
    RadialGrid::build(256, 40.0, SpacingKind::LogUniform).unwrap()
}

/// Envelope profiles with decay, parameterized smoothly.
fn profile(g: &Arc<RadialGrid>, a: f64, b: f64, c: f64) -> RadialField {
    RadialField::sample(g, Parity::Even, move |r| (a + b * r) * (-c * r).exp())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn quadrature_integrates_decaying_polynomials(
        a in 0.1f64..2.0,
        c in 0.6f64..1.5,
    ) {
        // ∫_0^∞ a e^{−cr} r² dr = 2a/c³, with the R = 40 tail negligible.
        // The graded grid's moment-fitted trapezoid rule is lower order than
        // the uniform Euler–Maclaurin rule, hence the looser bound.
        let fine = RadialGrid::build(1024, 40.0, SpacingKind::Uniform).unwrap();
        for (g, tol) in [(fine, 1e-7), (log_grid(), 3e-4)] {
            let f = RadialField::sample(&g, Parity::Even, move |r| a * (-c * r).exp());
            let got = integrate_radial(&f, 2);
            let exact = 2.0 * a / (c * c * c);
            prop_assert!(((got - exact) / exact).abs() < tol,
                "{got} vs {exact}");
        }
    }

    #[test]
    fn a_form_is_symmetric_positive_and_bilinear(
        a1 in 0.1f64..1.0, b1 in -0.4f64..0.4, c1 in 0.4f64..1.2,
        a2 in 0.1f64..1.0, b2 in -0.4f64..0.4, c2 in 0.4f64..1.2,
        s in -2.0f64..2.0,
    ) {
        let g = grid();
        let d1 = profile(&g, a1, b1, c1);
        let d2 = profile(&g, a2, b2, c2);
        let a11 = a_form(&d1, &d1);
        let a22 = a_form(&d2, &d2);
        let a12 = a_form(&d1, &d2);
        let a21 = a_form(&d2, &d1);
        prop_assert!((a12 - a21).abs() <= 1e-12 * a12.abs().max(a21.abs()));
        prop_assert!(a11 > 0.0 && a22 > 0.0);
        // Cauchy–Schwarz for the positive form.
        prop_assert!(a12 * a12 <= a11 * a22 * (1.0 + 1e-9));
        // Bilinearity in the first slot.
        let mix = d1.zip_with(&d2, |x, y| x + s * y);
        let lhs = a_form(&mix, &d2);
        let rhs = a12 + s * a22;
        prop_assert!((lhs - rhs).abs() <= 1e-10 * lhs.abs().max(rhs.abs()).max(1e-12));
    }

    #[test]
    fn a_form_dilation_scaling(
        a in 0.2f64..1.0,
        c in 0.5f64..1.2,
        lam in 0.7f64..1.5,
    ) {
        // Densities d(λr) scale as A → λ^{−5} A.
        let g = RadialGrid::build(1024, 40.0, SpacingKind::Uniform).unwrap();
        let d = RadialField::sample(&g, Parity::Even, move |r| a * (-c * r * r).exp());
        let dl = RadialField::sample(&g, Parity::Even, move |r| {
            a * (-c * (lam * r) * (lam * r)).exp()
        });
        let lhs = a_form(&dl, &dl);
        let rhs = lam.powi(-5) * a_form(&d, &d);
        prop_assert!(((lhs - rhs) / rhs).abs() < 1e-6, "{lhs} vs {rhs}");
    }

    #[test]
    fn l_omega_parallelogram(
        a1 in 0.1f64..1.0, b1 in -0.4f64..0.4, c1 in 0.4f64..1.2,
        a2 in 0.1f64..1.0, b2 in -0.4f64..0.4, c2 in 0.4f64..1.2,
        omega in 0.05f64..0.4,
    ) {
        let g = grid();
        let f = profile(&g, a1, b1, c1);
        let h = profile(&g, a2, b2, c2);
        let plus = f.zip_with(&h, |x, y| x + y);
        let minus = f.zip_with(&h, |x, y| x - y);
        let lhs = l_omega(&plus, omega) + l_omega(&minus, omega);
        let rhs = 2.0 * (l_omega(&f, omega) + l_omega(&h, omega));
        prop_assert!((lhs - rhs).abs() <= 1e-10 * lhs.abs().max(rhs.abs()).max(1e-12));
    }

    #[test]
    fn norms_scale_quadratically(
        a in 0.2f64..1.5,
        c in 0.4f64..1.2,
        s in 0.3f64..3.0,
    ) {
        let g = grid();
        let f = RadialField::sample(&g, Parity::Even, move |r| a * (-c * r).exp());
        let (l2, h1) = norms(&f);
        let (l2s, h1s) = norms(&f.scaled(s));
        prop_assert!(((l2s - s * s * l2) / (s * s * l2)).abs() < 1e-12);
        prop_assert!(((h1s - s * s * h1) / (s * s * h1)).abs() < 1e-12);
        prop_assert!(((hminus1_norm_sq(&f.scaled(s)) - s * s * hminus1_norm_sq(&f))
            / (s * s * hminus1_norm_sq(&f))).abs() < 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn reflection_preserves_lattice_functionals(
        cx in -1.5f64..1.5,
        cy in -1.5f64..1.5,
        w in 2.0f64..5.0,
    ) {
        let g = CartesianGrid::build(16, 10.0).unwrap();
        let f = CartesianField::sample(&g, |x, y, z| {
            ((-(x - cx) * (x - cx) - (y - cy) * (y - cy) - z * z) / w).exp()
        });
        for axis in AXES {
            let hat = reflect(&f, axis);
            let twice = reflect(&hat, axis);
            prop_assert_eq!(twice.values(), f.values());
            prop_assert!((hat.l2_sq() - f.l2_sq()).abs() <= 1e-12 * f.l2_sq());
            let l_f = hartree_lab::cartesian::l_omega_3d(&f, 0.2);
            let l_h = hartree_lab::cartesian::l_omega_3d(&hat, 0.2);
            prop_assert!((l_f - l_h).abs() <= 1e-10 * l_f.abs().max(l_h.abs()));
        }
    }
}
