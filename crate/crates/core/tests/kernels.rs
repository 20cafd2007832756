use polyheat::bounds::sigma_m;
use polyheat::kernels::{
    self, eval_asymptotic, eval_contour, eval_quadrature, eval_series, find_sign_changes, normalization_constant,
    ode_residual, recurrence_residual, recurrence_residual_with, KernelProfile, KernelSpec, Method,
};
use proptest::prelude::*;
use statrs::function::gamma::gamma;
use std::f64::consts::PI;

/// Independent oracle for n = 1: `√(2/π) ∫_0^∞ e^{-s^{2m}} cos(ηs) ds` by
/// composite Simpson on a fine grid.
fn cosine_transform_oracle(m: u32, eta: f64) -> f64 {
    let s_max = 3.0;
    let n = 60_000;
    let h = s_max / n as f64;
    let g = |s: f64| (-s.powi(2 * m as i32)).exp() * (eta * s).cos();
    let mut acc = g(0.0) + g(s_max);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        acc += w * g(i as f64 * h);
    }
    (2.0 / PI).sqrt() * acc * h / 3.0
}

#[test]
fn values_at_the_origin() {
    let s2 = KernelSpec::new(2, 2).unwrap();
    let s1 = KernelSpec::new(2, 1).unwrap();
    assert!((eval_series(&s2, 0.0).unwrap() - PI.sqrt() / 4.0).abs() < 1e-12);
    assert!((eval_quadrature(&s2, 0.0).unwrap() - PI.sqrt() / 4.0).abs() < 1e-12);
    let f1 = gamma(0.25) / (8.0 * PI).sqrt();
    assert!((eval_series(&s1, 0.0).unwrap() - f1).abs() < 1e-12);
}

#[test]
fn series_matches_quadrature_on_its_range() {
    for n in 1..=4 {
        let spec = KernelSpec::new(2, n).unwrap();
        for i in 0..=40 {
            let eta = 0.1 * i as f64;
            let s = eval_series(&spec, eta).unwrap();
            let q = eval_quadrature(&spec, eta).unwrap();
            assert!((s - q).abs() < 1e-9, "n={n} eta={eta}: {s} vs {q}");
        }
    }
}

#[test]
fn quadrature_and_contour_match_the_cosine_oracle() {
    for m in [2u32, 3] {
        let spec = KernelSpec::new(m, 1).unwrap();
        for eta in [0.5, 1.0, 2.0, 4.0, 6.5, 9.0] {
            let exact = cosine_transform_oracle(m, eta);
            assert!(
                (eval_quadrature(&spec, eta).unwrap() - exact).abs() < 1e-10,
                "m={m} eta={eta}"
            );
            let c = eval_contour(&spec, eta).unwrap().value;
            assert!((c - exact).abs() < 1e-12, "m={m} eta={eta}: {c} vs {exact}");
        }
    }
}

#[test]
fn contour_matches_quadrature_in_every_dimension() {
    for m in [2u32, 3] {
        for n in 1..=5 {
            let spec = KernelSpec::new(m, n).unwrap();
            for eta in [1.5, 4.0, 7.0, 11.0] {
                let q = eval_quadrature(&spec, eta).unwrap();
                let c = eval_contour(&spec, eta).unwrap();
                assert!((q - c.value).abs() < 1e-10, "m={m} n={n} eta={eta}: {q} vs {c:?}");
            }
        }
    }
}

#[test]
fn gaussian_case_is_independent_of_the_method() {
    let spec = KernelSpec::new(1, 3).unwrap();
    let f0 = eval_quadrature(&spec, 0.0).unwrap();
    for eta in [1.0f64, 2.0] {
        let ratio = eval_quadrature(&spec, eta).unwrap() / f0;
        assert!((ratio - (-eta * eta / 4.0).exp()).abs() < 1e-8);
    }
}

#[test]
fn tail_sample_sign_and_envelope() {
    // η = 8 lies between the second and third roots, where the kernel is
    // positive; η = 10 lies beyond the third root.
    let spec = KernelSpec::new(2, 1).unwrap();
    let sigma = 3.0 * 2f64.cbrt() / 16.0;
    let v10 = eval_quadrature(&spec, 10.0).unwrap();
    assert!(v10 < 0.0 && v10.abs() < 10.0 * (-sigma * 10f64.powf(4.0 / 3.0)).exp());
    let v = eval_quadrature(&spec, 8.0).unwrap();
    assert!(v > 0.0);
    assert!(v.abs() < 10.0 * (-sigma * 8f64.powf(4.0 / 3.0)).exp());
}

#[test]
fn normalisation_constant_is_the_fourier_value() {
    // The kernel is the inverse Fourier transform of e^{-|ξ|^{2m}}, whose value
    // at ξ = 0 fixes α_{m,n} = (2π)^{-n/2} for every m.
    for m in 1..=3 {
        for n in 1..=3 {
            let spec = KernelSpec::new(m, n).unwrap();
            let alpha = normalization_constant(&spec).unwrap();
            let expected = (2.0 * PI).powf(-0.5 * n as f64);
            assert!((alpha / expected - 1.0).abs() < 1e-10, "m={m} n={n}: {alpha}");
        }
    }
}

#[test]
fn asymptotic_form_tracks_the_kernel() {
    assert!((sigma_m(2) / (3.0 * 2f64.cbrt() / 16.0) - 1.0).abs() < 4.0 * f64::EPSILON);
    let spec = KernelSpec::new(2, 1).unwrap();
    let a = eval_asymptotic(&spec, 10.0).unwrap();
    let q = eval_quadrature(&spec, 10.0).unwrap();
    assert!((q - a.value).abs() <= 0.3 * a.envelope);
    let mut prev = f64::INFINITY;
    for i in 0..=160 {
        let env = eval_asymptotic(&spec, 4.0 + 0.1 * i as f64).unwrap().envelope;
        assert!(env < prev);
        prev = env;
    }
    assert!(eval_asymptotic(&spec, 3.0).is_err());
}

#[test]
fn envelope_bounds_the_kernel_far_out() {
    for n in 1..=3 {
        let spec = KernelSpec::new(2, n).unwrap();
        for i in 0..=60 {
            let eta = 6.0 + 0.25 * i as f64;
            let f = kernels::value(&spec, eta).unwrap();
            let env = eval_asymptotic(&spec, eta).unwrap().envelope;
            assert!(f.abs() <= 2.0 * env, "n={n} eta={eta}");
        }
    }
}

#[test]
fn recurrence_holds() {
    assert!(recurrence_residual(1, 1.0, 2).unwrap().value.abs() < 1e-6);
    assert!(recurrence_residual(2, 0.5, 2).unwrap().value.abs() < 1e-6);
    assert!(recurrence_residual(1, 1.0, 1).unwrap().value.abs() < 1e-8);
    for m in [2, 3] {
        for n in 1..=3 {
            for eta in [0.7, 3.9, 4.0, 6.3, 9.0] {
                let r = recurrence_residual(n, eta, m).unwrap();
                assert!(r.value.abs() < 1e-6, "m={m} n={n} eta={eta}: {r:?}");
            }
        }
    }
}

#[test]
fn recurrence_residual_is_second_order_in_the_step() {
    let coarse = recurrence_residual_with(2, 1, 1.3, 0.1, 1, false).unwrap().value;
    let fine = recurrence_residual_with(2, 1, 1.3, 0.05, 1, false).unwrap().value;
    let ratio = coarse / fine;
    assert!((ratio - 4.0).abs() < 0.2, "ratio {ratio}");
}

#[test]
fn ode_holds() {
    let s = |m, n| KernelSpec::new(m, n).unwrap();
    assert!(ode_residual(&s(2, 1), 1.0).unwrap().value.abs() < 1e-4);
    assert!(ode_residual(&s(2, 3), 2.0).unwrap().value.abs() < 1e-4);
    for n in 1..=3 {
        assert!(ode_residual(&s(1, n), 1.0).unwrap().value.abs() < 1e-8);
        for eta in [1.0, 3.0, 4.1, 8.0] {
            let r = ode_residual(&s(3, n), eta).unwrap();
            assert!(r.value.abs() < 1e-4, "n={n} eta={eta}: {r:?}");
        }
    }
    assert!(ode_residual(&s(2, 1), 0.01).is_err());
}

#[test]
fn contour_values_are_smooth_enough_for_fifth_derivatives() {
    // A jump of 1e-13 relative in the evaluator shows up as a 1e-4 residual
    // under the eleven-point fifth-derivative stencil.
    let s = |m, n| KernelSpec::new(m, n).unwrap();
    for n in [1, 2] {
        for i in 0..=12 {
            let eta = 4.95 + 0.05 * i as f64;
            let r = ode_residual(&s(3, n), eta).unwrap();
            assert!(r.value.abs() < 1e-5, "n={n} eta={eta}: {r:?}");
        }
    }
}

#[test]
fn sign_changes() {
    let gauss = find_sign_changes(&KernelSpec::new(1, 1).unwrap(), 20.0).unwrap();
    assert!(gauss.roots.is_empty());
    let spec = KernelSpec::new(2, 1).unwrap();
    let roots = find_sign_changes(&spec, 30.0).unwrap();
    assert!(!roots.roots.is_empty() && roots.roots[0] < 10.0);
    for w in roots.roots.windows(3) {
        let mid = 0.5 * (w[0] + w[1]);
        let mid2 = 0.5 * (w[1] + w[2]);
        let a = kernels::value(&spec, mid).unwrap();
        let b = kernels::value(&spec, mid2).unwrap();
        assert!(a * b < 0.0);
    }
    let sigma = sigma_m(2);
    let target = PI / (3f64.sqrt() * sigma);
    let r = &roots.roots;
    let gap4 = r[4].powf(4.0 / 3.0) - r[3].powf(4.0 / 3.0);
    assert!((gap4 / target - 1.0).abs() < 0.05, "gap {gap4} vs {target}");
}

#[test]
fn roots_do_not_depend_on_the_method_switch() {
    let base = find_sign_changes(&KernelSpec::new(2, 2).unwrap(), 12.0).unwrap();
    for switch in [3.0, 5.0] {
        let spec = KernelSpec::with_controls(2, 2, 1e-10, switch).unwrap();
        let other = find_sign_changes(&spec, 12.0).unwrap();
        assert_eq!(base.roots.len(), other.roots.len());
        for (a, b) in base.roots.iter().zip(&other.roots) {
            assert!((a - b).abs() <= 2.0 * base.bracket_width + 1e-12);
        }
    }
}

#[test]
fn profile_records_methods() {
    let spec = KernelSpec::new(2, 1).unwrap();
    let p = KernelProfile::uniform(&spec, 6.0, 0.5).unwrap();
    assert_eq!(p.method[0], Method::Series);
    assert_eq!(*p.method.last().unwrap(), Method::Contour);
    assert!(p.values[0] > 0.0);
    let p3 = KernelProfile::uniform(&KernelSpec::new(3, 2).unwrap(), 6.0, 0.5).unwrap();
    assert_eq!(p3.method[1], Method::Quadrature);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn series_and_quadrature_agree(n in 1u32..=4, eta in 0.0f64..4.0) {
        let spec = KernelSpec::new(2, n).unwrap();
        let s = eval_series(&spec, eta).unwrap();
        let q = eval_quadrature(&spec, eta).unwrap();
        prop_assert!((s - q).abs() <= 10.0 * spec.abs_tol);
    }

    #[test]
    fn value_at_origin_is_positive(m in 1u32..=6, n in 1u32..=6) {
        let spec = KernelSpec::new(m, n).unwrap();
        prop_assert!(kernels::value(&spec, 0.0).unwrap() > 0.0);
        prop_assert!(eval_quadrature(&spec, 0.0).unwrap() > 0.0);
    }

    #[test]
    fn bessel_half_order_closed_form(z in 0.01f64..40.0) {
        let j = kernels::bessel_j(0.5, z).unwrap();
        prop_assert!((j - (2.0 / (PI * z)).sqrt() * z.sin()).abs() < 1e-12);
    }
}
