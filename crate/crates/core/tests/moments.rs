use polyheat::kernels::*;
use polyheat::moments::*;
use proptest::prelude::*;
use std::f64::consts::PI;

fn spec(m: u32, n: u32) -> KernelSpec {
    KernelSpec::new(m, n).unwrap()
}

#[test]
fn unit_mass() {
    for n in 1..=3 {
        let v = moment_b(&spec(2, n), 0.0).unwrap();
        assert!((v.value - 1.0).abs() < 1e-8, "n={n}: {v:?}");
    }
}

#[test]
fn quartic_moment_is_minus_two_n_n_plus_two() {
    for n in 1..=3u32 {
        let exact = -2.0 * n as f64 * (n as f64 + 2.0);
        let v = moment_b(&spec(2, n), 4.0).unwrap();
        assert!((v.value / exact - 1.0).abs() < 5e-3, "n={n}: {v:?}");
        assert!((v.value - exact).abs() <= v.error.max(1e-9), "n={n}: {v:?}");
    }
}

#[test]
fn moments_vanish_on_four_n_plus_two() {
    for n in 1..=3 {
        for b in [2.0, 6.0] {
            let v = moment_b(&spec(2, n), b).unwrap();
            assert!(v.value.abs() < 1e-6, "n={n} b={b}: {v:?}");
            assert!(v.value.abs() <= v.error, "n={n} b={b}: {v:?}");
        }
    }
}

#[test]
fn even_moments_follow_the_stationary_recursion() {
    // ℳ_{2k} = -(2k-2)(2k+n-2)(2k+n-4) ℳ_{2k-4} from the moment equation at
    // equilibrium, started from ℳ_0 = 1 and ℳ_2 = 0.
    for n in 1..=3u32 {
        let nf = n as f64;
        let mut exact = [0.0f64; 10];
        exact[0] = 1.0;
        for k in 2..10 {
            let b = 2.0 * k as f64;
            exact[k] = -(b - 2.0) * (b + nf - 2.0) * (b + nf - 4.0) * exact[k - 2];
        }
        for (k, &e) in exact.iter().enumerate() {
            let v = moment_b(&spec(2, n), 2.0 * k as f64).unwrap();
            assert!(
                (v.value - e).abs() <= v.error + 1e-12 * e.abs(),
                "n={n} k={k}: {v:?} vs {e}"
            );
        }
    }
}

fn families() -> Vec<(f64, f64)> {
    vec![(2.0, 6.0), (6.0, 10.0), (10.0, 14.0), (14.0, 18.0)]
}

#[test]
fn sign_pattern_on_sampled_orders() {
    for n in 1..=3u32 {
        let s = spec(2, n);
        let mut intervals = vec![(-(n as f64), 2.0)];
        intervals.extend(families());
        for (lo, hi) in intervals {
            for i in 1..=40 {
                let b = lo + (hi - lo) * i as f64 / 41.0;
                let v = moment_b(&s, b).unwrap();
                let predicted = classify_sign(&Weight::Radial { b, n });
                assert_eq!(observed_sign(&v), predicted, "n={n} b={b}: {v:?}");
            }
        }
    }
}

#[test]
fn moment_table_columns() {
    let rows = moment_table(&spec(2, 1), &[-0.5, 1.0, 4.0]).unwrap();
    let mut buf = Vec::new();
    write_moment_table(&rows, &mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    assert!(text.starts_with("b,value,err,sign_predicted,sign_observed\n"));
    assert!(text.lines().nth(3).unwrap().ends_with("negative,negative"));
}

#[test]
fn moment_rejects_non_integrable_orders() {
    assert!(moment_b(&spec(2, 2), -2.0).is_err());
}

#[test]
fn stationary_profile_matches_the_biharmonic_rescaling() {
    for n in 1..=3u32 {
        let s = spec(2, n);
        let p = StationaryProfile::new(&s, 20.0).unwrap();
        let alpha = normalization_constant(&s).unwrap();
        for r in [0.0, 0.37, 1.0, 2.5, 4.1, 7.3] {
            let direct = 2f64.powf(n as f64 / 2.0) * alpha * value(&s, 2f64.sqrt() * r).unwrap();
            assert!((p.value(r).unwrap() - direct).abs() < 1e-8, "n={n} r={r}");
        }
        assert!((p.mass_trapezoid() - 1.0).abs() < 1e-8, "n={n}: {}", p.mass_trapezoid());
    }
}

#[test]
fn stationary_profile_for_m1_is_the_standard_gaussian() {
    for n in 1..=3u32 {
        let s = spec(1, n);
        let p = StationaryProfile::new(&s, 6.0).unwrap();
        for r in [0.0f64, 0.5, 1.7, 3.0] {
            let exact = (2.0 * PI).powf(-(n as f64) / 2.0) * (-r * r / 2.0).exp();
            assert!((p.value(r).unwrap() - exact).abs() < 1e-10, "n={n} r={r}");
        }
        let m2 = moment_b(&s, 2.0).unwrap().value;
        let m4 = moment_b(&s, 4.0).unwrap().value;
        assert!((m2 - n as f64).abs() < 1e-9);
        assert!((m4 - (n * (n + 2)) as f64).abs() < 1e-9);
    }
}

#[test]
fn polynomial_moments() {
    let s = spec(2, 2);
    assert_eq!(moment_polynomial(&s, &MultiIndex::new([1, 0])).unwrap().value, 0.0);
    assert_eq!(moment_polynomial(&s, &MultiIndex::new([2, 0])).unwrap().value, 0.0);
    assert!(moment_polynomial(&s, &MultiIndex::new([2, 2])).unwrap().value < 0.0);
    assert!(moment_polynomial(&s, &MultiIndex::new([4, 4])).unwrap().value > 0.0);
    assert!(moment_polynomial(&s, &MultiIndex::new([3])).is_err());
}

#[test]
fn polynomial_moment_agrees_with_angular_quadrature() {
    // ∫ y_1^4 v dy = (∫ r^5 v dr)(∫ cos^4 θ dθ) with the angle integrated by
    // the trapezoid rule, exact for trigonometric polynomials.
    let s = spec(2, 2);
    let radial = moment_b(&s, 4.0).unwrap().value / (2.0 * PI);
    let steps = 64;
    let angular: f64 = (0..steps)
        .map(|i| (2.0 * PI * i as f64 / steps as f64).cos().powi(4))
        .sum::<f64>()
        * 2.0
        * PI
        / steps as f64;
    let v = moment_polynomial(&s, &MultiIndex::new([4, 0])).unwrap().value;
    assert!((v - radial * angular).abs() < 1e-10, "{v} vs {}", radial * angular);
}

#[test]
fn bilaplacian_moment_identity() {
    let s = spec(2, 2);
    for ell in [[4u32, 0], [2, 2], [4, 4], [6, 2]] {
        let ell = MultiIndex::new(ell);
        let lhs = moment_of_polynomial(&s, &Polynomial::monomial(ell.clone()).laplacian().laplacian()).unwrap();
        let rhs = moment_polynomial(&s, &ell).unwrap();
        let scale = rhs.value.abs().max(1.0);
        assert!(
            (lhs.value + ell.degree() as f64 * rhs.value).abs() < 1e-6 * scale,
            "{ell}: {lhs:?} {rhs:?}"
        );
    }
}

#[test]
fn cnm_values() {
    for m in [2, 3] {
        for n in 1..=3u32 {
            for frac in [0.0, 0.25, 0.5, 0.75] {
                let c = cnm(m, n, frac * n as f64).unwrap();
                assert!(c > 0.0, "m={m} n={n} beta={}", frac * n as f64);
            }
        }
    }
    let alpha = normalization_constant(&spec(2, 1)).unwrap();
    assert!((cnm(2, 1, 0.0).unwrap() * alpha - 1.0).abs() < 1e-12);
    assert!(cnm(3, 1, 0.5).unwrap() > 0.0);
}

#[test]
fn closed_form_and_ode_trajectories_agree() {
    let taus: Vec<f64> = (0..=40).map(|i| i as f64 * 0.25).collect();
    for n in 1..=3u32 {
        let m0 = [1.0, 0.9, 3.2, -1.5];
        for k in 0..=3 {
            let closed = trajectory_closed_form(&m0, k, n, &taus).unwrap();
            let ode = trajectory_ode_integrate(&m0, k, n, &taus).unwrap();
            for (a, b) in closed.values.iter().zip(&ode.values) {
                assert!((a - b).abs() < 1e-8 * a.abs().max(1.0), "n={n} k={k}: {a} vs {b}");
            }
        }
    }
}

#[test]
fn trajectories_approach_the_stationary_moments() {
    for n in 1..=3u32 {
        let m0 = [1.0, 0.4, 2.0, 5.0];
        for k in 0..=3u32 {
            let t = trajectory_closed_form(&m0, k, n, &[10.0]).unwrap();
            let limit = moment_b(&spec(2, n), 2.0 * k as f64).unwrap();
            let ak = t.coefficients[k as usize];
            assert!((t.values[0] - limit.value).abs() <= ak.abs() * (-20f64).exp() + 1e-9 + limit.error);
            assert!((t.coefficients[0] - limit.value).abs() <= limit.error + 1e-12);
        }
    }
    let t = trajectory_ode_integrate(&[1.0, 0.3, 1.0, 2.0], 3, 2, &[30.0]).unwrap();
    assert!(t.values[0].abs() < 1e-6);
}

#[test]
fn stationary_data_give_constant_trajectories() {
    for n in 1..=3u32 {
        let s = spec(2, n);
        let m0: Vec<f64> = (0..=4).map(|j| moment_b(&s, 2.0 * j as f64).unwrap().value).collect();
        for k in 0..=4u32 {
            let t = trajectory_closed_form(&m0, k, n, &[0.0]).unwrap();
            for (j, a) in t.coefficients.iter().enumerate().skip(1) {
                assert!(a.abs() < 1e-6, "n={n} k={k} j={j}: {a}");
            }
        }
    }
}

#[test]
fn fractional_order_equation() {
    // With M_1 = A + B e^{-cτ} the order-5 equation integrates in closed form.
    let (n, b) = (1u32, 5.0);
    let (a, bb, c, m0) = (0.7, 0.2, 1.3, 2.0);
    let k = b * (b - 2.0) * (b + n as f64 - 2.0) * (b + n as f64 - 4.0);
    let taus: Vec<f64> = (0..=30).map(|i| i as f64 * 0.1).collect();
    let t = trajectory_fractional(b, n, m0, |tau| a + bb * (-c * tau).exp(), &taus).unwrap();
    let p = -k * a / b;
    let q = -k * bb / (b - c);
    for (tau, v) in taus.iter().zip(&t.values) {
        let exact = p + q * (-c * tau).exp() + (m0 - p - q) * (-b * tau).exp();
        assert!((v - exact).abs() < 1e-8, "tau={tau}: {v} vs {exact}");
    }
    assert!(trajectory_fractional(3.0, 1, 1.0, |_| 0.0, &taus).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn polynomial_moment_is_permutation_invariant(a in 0u32..4, b in 0u32..4, c in 0u32..4) {
        let s = spec(2, 3);
        let ell = [2 * a, 2 * b, 2 * c];
        let base = moment_polynomial(&s, &MultiIndex::new(ell)).unwrap().value;
        for perm in [[1, 0, 2], [2, 1, 0], [0, 2, 1], [1, 2, 0]] {
            let p = MultiIndex::new([ell[perm[0]], ell[perm[1]], ell[perm[2]]]);
            let v = moment_polynomial(&s, &p).unwrap().value;
            prop_assert!((v - base).abs() <= 1e-12 * base.abs());
        }
    }

    #[test]
    fn closed_form_satisfies_the_moment_equation(
        n in 1u32..4, k in 2u32..6, tau in 0.0f64..3.0,
        m in prop::collection::vec(-3.0f64..3.0, 6),
    ) {
        let mut m0 = m.clone();
        m0[0] = 1.0;
        let h = 1e-4;
        let at = |k: u32, t: f64| trajectory_closed_form(&m0, k, n, &[t]).unwrap().values[0];
        let deriv = (at(k, tau + h) - at(k, tau - h)) / (2.0 * h);
        let bf = 2.0 * k as f64;
        let c = bf * (bf - 2.0) * (bf + n as f64 - 2.0) * (bf + n as f64 - 4.0);
        let residual = deriv + bf * at(k, tau) + c * at(k - 2, tau);
        let scale = c * at(k - 2, tau).abs() + bf * at(k, tau).abs() + 1.0;
        prop_assert!(residual.abs() < 1e-6 * scale, "residual {residual}");
    }
}
