use polyheat::bounds::sigma_m;
use polyheat::cauchy::solve_fourier;
use polyheat::fokker_planck::*;
use polyheat::kernels::KernelSpec;
use polyheat::moments::{trajectory_closed_form, MultiIndex};
use polyheat::Error;
use std::f64::consts::PI;

fn biharmonic(n: u32) -> KernelSpec {
    KernelSpec::new(2, n).unwrap()
}

/// `v_∞(y) = (1/π) ∫_0^∞ cos(ky) e^{-k⁴/4} dk` by composite Simpson on [0, 8].
fn fourier_oracle(y: f64) -> f64 {
    let steps = 4000;
    let h = 8.0 / steps as f64;
    let f = |k: f64| (k * y).cos() * (-k.powi(4) / 4.0).exp();
    let mut s = f(0.0) + f(8.0);
    for i in 1..steps {
        s += if i % 2 == 1 { 4.0 } else { 2.0 } * f(i as f64 * h);
    }
    s * h / 3.0 / PI
}

fn gaussian(n: u32, size: usize, half_width: f64, frame: Frame, time: f64) -> GridField {
    GridField::from_fn(n, size, half_width, frame, time, |x| {
        let r2: f64 = x.iter().map(|c| c * c).sum();
        (-r2 / 2.0).exp() / (2.0 * PI).powf(n as f64 / 2.0)
    })
    .unwrap()
}

fn max_diff(a: &GridField, b: &GridField) -> f64 {
    a.values
        .iter()
        .zip(&b.values)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

#[test]
fn stationary_field_matches_its_fourier_transform() {
    let v = stationary_field(&biharmonic(1), 256, 32.0).unwrap();
    let points = v.points();
    for i in (0..256).step_by(9) {
        let y = points[i][0];
        assert!((v.values[i] - fourier_oracle(y)).abs() < 1e-12, "y = {y}");
    }
    assert!((v.integral() - 1.0).abs() < 1e-12);
}

#[test]
fn stationary_profile_is_annihilated_by_l() {
    let p = GridParams::default_for(1);
    let v = stationary_field(&biharmonic(1), p.size, p.half_width).unwrap();
    let lv = apply_l(&v, 2).unwrap();
    assert!(lv.l2_norm() / v.l2_norm() <= 1e-5);
}

#[test]
fn first_two_derivatives_are_eigenfunctions() {
    let p = GridParams::default_for(1);
    let v = stationary_field(&biharmonic(1), p.size, p.half_width).unwrap();
    for order in [1u32, 2] {
        let w = v.with_values(v.grid().derivative(&v.values, &[order]));
        let lw = apply_l(&w, 2).unwrap();
        let diff = w.with_values(
            lw.values
                .iter()
                .zip(&w.values)
                .map(|(a, b)| a - order as f64 * b)
                .collect(),
        );
        assert!(diff.l2_norm() / w.l2_norm() <= 1e-4, "order {order}");
    }
}

#[test]
fn eigen_residuals_at_default_resolution() {
    let spec = biharmonic(1);
    let p = GridParams::default_for(1);
    let zero = eigen_residual(&MultiIndex::new([0]), &spec, &p).unwrap();
    assert!(zero.residual <= 1e-5);
    for a in 1..=4u32 {
        let r = eigen_residual(&MultiIndex::new([a]), &spec, &p).unwrap();
        assert!(r.residual <= 1e-4, "alpha = {a}: {}", r.residual);
    }
}

#[test]
fn eigen_residuals_in_two_dimensions() {
    let spec = biharmonic(2);
    let p = GridParams::default_for(2);
    for alpha in [[0u32, 0], [1, 0], [0, 1], [1, 1], [2, 0]] {
        let r = eigen_residual(&MultiIndex::new(alpha), &spec, &p).unwrap();
        assert!(r.residual <= 1e-4, "alpha = {:?}: {}", alpha, r.residual);
    }
}

#[test]
fn eigen_residual_shrinks_while_under_resolved() {
    let spec = biharmonic(1);
    for a in 0..=3u32 {
        let alpha = MultiIndex::new([a]);
        let coarse = eigen_residual(&alpha, &spec, &GridParams::new(64, 24.0)).unwrap();
        let fine = eigen_residual(&alpha, &spec, &GridParams::new(128, 24.0)).unwrap();
        assert!(fine.residual < coarse.residual / 4.0, "alpha = {a}");
    }
}

#[test]
fn eigen_residual_rejects_truncated_box_and_high_order() {
    let spec = biharmonic(1);
    let err = eigen_residual(&MultiIndex::new([1]), &spec, &GridParams::new(512, 12.0)).unwrap_err();
    assert!(matches!(err, Error::Truncation { .. }), "{err}");
    let err = eigen_residual(&MultiIndex::new([5]), &spec, &GridParams::default_for(1)).unwrap_err();
    assert!(matches!(err, Error::Domain(_)));
    let err = eigen_residual(&MultiIndex::new([1, 0]), &spec, &GridParams::default_for(1)).unwrap_err();
    assert!(matches!(err, Error::Domain(_)));
}

#[test]
fn eigen_table_csv() {
    let rows = vec![EigenResidual {
        alpha: MultiIndex::new([1]),
        residual: 2.5e-7,
        size: 512,
    }];
    let mut buf = Vec::new();
    write_eigen_table(&rows, &mut buf).unwrap();
    assert_eq!(String::from_utf8(buf).unwrap(), "alpha,residual,N\n(1),2.5e-7,512\n");
}

#[test]
fn frame_change_is_identity_at_time_zero() {
    let u = gaussian(1, 512, 32.0, Frame::Parabolic, 0.0);
    let v = to_fokker_planck(&u, 2).unwrap();
    assert_eq!(v.time, 0.0);
    assert!(max_diff(&u, &v) < 1e-15);
    let back = from_fokker_planck(&v, 2).unwrap();
    assert!(max_diff(&u, &back) < 1e-15);
}

#[test]
fn frame_change_preserves_mass_and_inverts() {
    for t in [0.5, 1.0, 3.0] {
        let u = gaussian(1, 1024, 32.0, Frame::Parabolic, t);
        let v = to_fokker_planck(&u, 2).unwrap();
        assert!((v.time - rescale_factor(t, 2).ln()).abs() < 1e-15);
        assert!((v.integral() - u.integral()).abs() < 1e-8, "t = {t}");
        let back = from_fokker_planck(&v, 2).unwrap();
        assert!((back.time - t).abs() < 1e-12);
        assert!(max_diff(&u, &back) < 1e-8, "t = {t}");
    }
}

#[test]
fn frame_change_in_two_dimensions_preserves_mass() {
    let u = gaussian(2, 128, 16.0, Frame::Parabolic, 1.0);
    let v = to_fokker_planck(&u, 2).unwrap();
    assert!((v.integral() - u.integral()).abs() < 1e-8);
}

#[test]
fn frame_change_rejects_wrong_frame_and_wide_fields() {
    let u = gaussian(1, 256, 32.0, Frame::Parabolic, 0.0);
    assert!(matches!(from_fokker_planck(&u, 2), Err(Error::Domain(_))));
    let wide = GridField::from_fn(1, 256, 8.0, Frame::FokkerPlanck, 1.0, |y| (-y[0] * y[0] / 8.0).exp()).unwrap();
    assert!(matches!(from_fokker_planck(&wide, 2), Err(Error::Truncation { .. })));
}

#[test]
fn solving_commutes_with_the_frame_change() {
    let u0 = gaussian(1, 1024, 32.0, Frame::Parabolic, 0.0);
    let tau = 0.3;
    let u = solve_fourier(&u0, time_of_tau(tau, 2), 2).unwrap();
    let direct = to_fokker_planck(&u, 2).unwrap();
    let v0 = to_fokker_planck(&u0, 2).unwrap();
    let evolved = evolve(&v0, 2, &[tau], 0.1).unwrap().pop().unwrap();
    assert!((evolved.time - tau).abs() < 1e-15);
    assert!(max_diff(&direct, &evolved) < 1e-8 * direct.max_abs());
}

#[test]
fn stationary_profile_pulls_back_to_a_spreading_solution() {
    let spec = biharmonic(1);
    let v1 = GridField {
        time: 0.15,
        ..stationary_field(&spec, 1024, 32.0).unwrap()
    };
    let v2 = GridField {
        time: 0.3,
        ..v1.clone()
    };
    let u1 = from_fokker_planck(&v1, 2).unwrap();
    let u2 = from_fokker_planck(&v2, 2).unwrap();
    let advanced = solve_fourier(&u1, u2.time - u1.time, 2).unwrap();
    assert!(max_diff(&advanced, &u2) < 1e-8 * u2.max_abs());
    // u(x, t) = R^{-1} v_∞(x / R) at the sample x = 0.
    let r = rescale_factor(u1.time, 2);
    let centre = 512;
    assert!((u1.values[centre] - v1.values[centre] / r).abs() < 1e-14);
}

#[test]
fn weighted_product_properties() {
    let spec = biharmonic(1);
    let v = stationary_field(&spec, 512, 32.0).unwrap();
    let w = gaussian(1, 512, 32.0, Frame::FokkerPlanck, 0.0);
    let plain: f64 = v.values.iter().zip(&w.values).map(|(a, b)| a * b).sum::<f64>() * v.grid().cell_volume();
    let zero = WeightSpec::new(0.0, 2).unwrap();
    assert!((weighted_inner_product(&v, &w, &zero).unwrap() - plain).abs() < 1e-15);
    let mut last = 0.0;
    for a in [0.0, 0.1, 0.2] {
        let weight = WeightSpec::new(a, 2).unwrap();
        let uw = weighted_inner_product(&v, &w, &weight).unwrap();
        assert_eq!(uw, weighted_inner_product(&w, &v, &weight).unwrap());
        let norm = weighted_inner_product(&v, &v, &weight).unwrap();
        assert!(norm.is_finite() && norm > last, "a = {a}");
        last = norm;
    }
    assert!(WeightSpec::new(sigma_m(2), 2).is_err());
    assert!(WeightSpec::new(-0.1, 2).is_err());
}

#[test]
fn weighted_product_flags_slowly_decaying_fields() {
    let w = GridField::from_fn(1, 256, 32.0, Frame::FokkerPlanck, 0.0, |y| 1.0 / (1.0 + y[0] * y[0])).unwrap();
    let weight = WeightSpec::new(0.1, 2).unwrap();
    assert!(matches!(
        weighted_inner_product(&w, &w, &weight),
        Err(Error::Truncation { .. })
    ));
}

#[test]
fn projection_properties() {
    let spec = biharmonic(1);
    let v = stationary_field(&spec, 512, 32.0).unwrap();
    let weight = WeightSpec::new(0.1, 2).unwrap();
    let pv = project_kernel(&v, &weight, &v).unwrap();
    assert!(max_diff(&pv, &v) < 1e-8);
    let w = GridField::from_fn(1, 512, 32.0, Frame::FokkerPlanck, 0.0, |y| {
        (1.0 + y[0] + 0.3 * y[0] * y[0]) * (-y[0] * y[0] / 3.0).exp()
    })
    .unwrap();
    let pw = project_kernel(&w, &weight, &v).unwrap();
    let ppw = project_kernel(&pw, &weight, &v).unwrap();
    assert!(max_diff(&pw, &ppw) < 1e-8);
    let odd = GridField::from_fn(1, 512, 32.0, Frame::FokkerPlanck, 0.0, |y| y[0] * (-y[0] * y[0]).exp()).unwrap();
    let p0 = project_kernel(&odd, &WeightSpec::new(0.0, 2).unwrap(), &v).unwrap();
    assert!(p0.max_abs() < 1e-8);
}

#[test]
fn evolution_conserves_mass() {
    let v0 = gaussian(1, 512, 32.0, Frame::FokkerPlanck, 0.0);
    let taus = [0.5, 1.0, 2.0];
    for v in evolve(&v0, 2, &taus, 0.25).unwrap() {
        assert!((v.integral() - 1.0).abs() < 1e-8, "tau = {}", v.time);
    }
}

#[test]
fn pde_moments_follow_the_closed_form() {
    // Standard Gaussian: M_0 = 1, M_2 = 1, M_4 = 3.
    let initial = [1.0, 1.0, 3.0];
    let taus: Vec<f64> = (1..=8).map(|i| 0.5 * i as f64).collect();
    let v0 = gaussian(1, 1024, 32.0, Frame::FokkerPlanck, 0.0);
    let fields = evolve(&v0, 2, &taus, 0.25).unwrap();
    for k in 0..=2u32 {
        let traj = trajectory_closed_form(&initial[..=k as usize], k, 1, &taus).unwrap();
        for (v, predicted) in fields.iter().zip(&traj.values) {
            let measured = v.radial_moment(2.0 * k as f64);
            let scale = predicted.abs().max(1.0);
            assert!(
                (measured - predicted).abs() <= 1e-4 * scale,
                "k = {k}, tau = {}: {measured} vs {predicted}",
                v.time
            );
        }
    }
}

#[test]
fn distance_to_kernel_span_decreases() {
    let spec = biharmonic(1);
    let stationary = stationary_field(&spec, 512, 32.0).unwrap();
    let zero = WeightSpec::new(0.0, 2).unwrap();
    let v0 = GridField::from_fn(1, 512, 32.0, Frame::FokkerPlanck, 0.0, |y| {
        let a = (-(y[0] - 1.0).powi(2)).exp();
        let b = 0.5 * (-(y[0] + 2.0).powi(2) / 0.5).exp();
        (a + b) / (PI.sqrt() * (1.0 + 0.5 * 0.5f64.sqrt()))
    })
    .unwrap();
    let taus: Vec<f64> = (0..=10).map(|i| 1.0 + 0.5 * i as f64).collect();
    let fields = evolve(&v0, 2, &taus, 0.25).unwrap();
    let distances: Vec<f64> = fields
        .iter()
        .map(|v| {
            let p = project_kernel(v, &zero, &stationary).unwrap();
            v.with_values(v.values.iter().zip(&p.values).map(|(a, b)| a - b).collect())
                .l2_norm()
        })
        .collect();
    for w in distances.windows(2) {
        assert!(w[1] < w[0], "{distances:?}");
    }
}
