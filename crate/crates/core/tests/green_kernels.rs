use std::f64::consts::PI;

use heatcontent::green::*;
use proptest::prelude::*;

fn simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, n: usize) -> f64 {
    let n = n + n % 2;
    let h = (b - a) / n as f64;
    let mut acc = f(a) + f(b);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        acc += w * f(a + i as f64 * h);
    }
    acc * h / 3.0
}

fn total_mass(m: &Medium, s1: f64, t: f64) -> f64 {
    let sp = (m.d_plus * t).sqrt();
    let sm = (m.d_minus * t).sqrt();
    let plus = simpson(
        |s| kernel_1d(m, s, s1, t).unwrap(),
        0.0,
        s1 + 40.0 * sp,
        200_000,
    );
    let reach = s1 * (m.d_minus / m.d_plus).sqrt() + 40.0 * sm;
    let minus = simpson(|s| kernel_1d(m, -s, s1, t).unwrap(), 0.0, reach, 200_000);
    plus + minus
}

#[test]
fn mass_is_one_for_perfect_contact() {
    let m = Medium::new(1.0, 4.0, Lambda::Infinite).unwrap();
    assert!((total_mass(&m, 0.7, 0.1) - 1.0).abs() < 1e-10);
}

#[test]
fn mass_is_one_for_finite_lambda() {
    let m = Medium::new(1.0, 1.0, Lambda::Finite(17.0)).unwrap();
    assert!((total_mass(&m, 0.5, 0.01) - 1.0).abs() < 1e-8);
}

#[test]
fn mass_is_one_on_random_draws() {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(42);
    for _ in 0..20 {
        let dp = rng.random_range(0.1..3.0);
        let dm = rng.random_range(0.1..3.0);
        let lambda = match rng.random_range(0..3) {
            0 => Lambda::Infinite,
            1 => Lambda::Zero,
            _ => Lambda::Finite(rng.random_range(0.1..50.0)),
        };
        let m = Medium::new(dp, dm, lambda).unwrap();
        let s1 = rng.random_range(0.0..1.0);
        let t = rng.random_range(1e-3..0.5);
        let mass = total_mass(&m, s1, t);
        assert!((mass - 1.0).abs() < 1e-8, "{m:?} s1={s1} t={t}: {mass}");
    }
}

/// The + side deficit of the λ = ∞ kernel equals erfc(s1/2√(D₊t))·√D₋/(√D₊+√D₋).
#[test]
fn perfect_contact_deficit_matches_erfc_reduction() {
    let m = Medium::new(1.0, 4.0, Lambda::Infinite).unwrap();
    let (s1, t) = (0.7, 0.1);
    let plus = simpson(|s| gamma_pp(&m, s, s1, t).unwrap(), 0.0, 20.0, 400_000);
    let xi = s1 / (2.0 * (m.d_plus * t).sqrt());
    let deficit = libm::erfc(xi) * m.d_minus.sqrt() / (m.d_plus.sqrt() + m.d_minus.sqrt());
    assert!((1.0 - plus - deficit).abs() < 1e-10);
}

fn fd_residual<F: Fn(f64, f64) -> f64>(u: F, d: f64, drift: f64, s: f64, t: f64, h: f64) -> f64 {
    let ht = h * h;
    let ut = (u(s, t + ht) - u(s, t - ht)) / (2.0 * ht);
    let us = (u(s + h, t) - u(s - h, t)) / (2.0 * h);
    let uss = (u(s + h, t) - 2.0 * u(s, t) + u(s - h, t)) / (h * h);
    ut - d * uss + d * drift * us
}

fn slope_two<F: Fn(f64) -> f64>(r: F) {
    let e: Vec<f64> = [2e-2, 1e-2, 5e-3].iter().map(|&h| r(h).abs()).collect();
    for w in e.windows(2) {
        let slope = (w[0] / w[1]).log2();
        assert!((slope - 2.0).abs() < 0.25, "slope {slope}, errors {e:?}");
    }
}

#[test]
fn kernels_satisfy_heat_equation_at_second_order() {
    let media = [
        Medium::new(1.0, 4.0, Lambda::Infinite).unwrap(),
        Medium::new(0.5, 2.0, Lambda::Finite(3.0)).unwrap(),
    ];
    for m in &media {
        let (s1, t) = (0.4, 0.2);
        slope_two(|h| {
            fd_residual(
                |s, t| kernel_1d(m, s, s1, t).unwrap(),
                m.d_plus,
                0.0,
                0.6,
                t,
                h,
            )
        });
        slope_two(|h| {
            fd_residual(
                |s, t| kernel_1d(m, s, s1, t).unwrap(),
                m.d_minus,
                0.0,
                -0.5,
                t,
                h,
            )
        });
    }
}

fn one_sided(f: impl Fn(f64) -> f64, h: f64) -> f64 {
    (-3.0 * f(0.0) + 4.0 * f(h) - f(2.0 * h)) / (2.0 * h)
}

#[test]
fn perfect_contact_interface_conditions() {
    let m = Medium::new(1.0, 4.0, Lambda::Infinite).unwrap();
    let (s1, t) = (0.5, 0.05);
    let up = gamma_pp(&m, 0.0, s1, t).unwrap();
    let um = gamma_mp(&m, 0.0, s1, t).unwrap();
    assert!((up - um).abs() < 1e-12 * up);
    let h = 1e-4;
    let fp = m.d_plus * one_sided(|x| gamma_pp(&m, x, s1, t).unwrap(), h);
    let fm = -m.d_minus * one_sided(|x| gamma_mp(&m, -x, s1, t).unwrap(), h);
    assert!((fp - fm).abs() < 1e-6 * fp.abs(), "{fp} vs {fm}");
}

#[test]
fn robin_interface_conditions() {
    for &(dp, dm, l) in &[(1.0, 1.0, 17.0), (0.3, 2.0, 1.5), (0.01, 1.0, 17.0)] {
        let m = Medium::new(dp, dm, Lambda::Finite(l)).unwrap();
        let (s1, t) = (0.2 * dp.sqrt(), 0.02);
        let h = 1e-5 * dp.sqrt();
        let up = g_pp_finite(&m, 0.0, s1, t).unwrap();
        let um = g_mp_finite(&m, 0.0, s1, t).unwrap();
        let dup = one_sided(|x| g_pp_finite(&m, x, s1, t).unwrap(), h);
        let dum = -one_sided(|x| g_mp_finite(&m, -x, s1, t).unwrap(), h);
        let scale = (dp * dup).abs().max(l * up.abs()).max(1e-300);
        assert!(
            (dp * dup - dm * dum).abs() < 1e-5 * scale,
            "flux: {} vs {}",
            dp * dup,
            dm * dum
        );
        assert!(
            (dm * dum - l * (up - um)).abs() < 1e-5 * scale,
            "robin: {} vs {}",
            dm * dum,
            l * (up - um)
        );
    }
}

#[test]
fn small_lambda_tends_to_neumann_kernel() {
    let m = Medium::new(1.0, 2.0, Lambda::Finite(1e-10)).unwrap();
    for &(s, s1, t) in &[(0.1, 0.3, 0.01), (0.5, 0.5, 0.2), (1.0, 0.2, 1.0)] {
        let dt = m.d_plus * t;
        let neumann = ((-(s - s1) * (s - s1) / (4.0 * dt)).exp()
            + (-(s + s1) * (s + s1) / (4.0 * dt)).exp())
            / (4.0 * PI * dt).sqrt();
        assert!((g_pp_finite(&m, s, s1, t).unwrap() - neumann).abs() < 1e-8);
        assert!(g_mp_finite(&m, -s, s1, t).unwrap().abs() < 1e-8);
    }
}

#[test]
fn large_lambda_tends_to_perfect_contact() {
    let fin = Medium::new(1.0, 4.0, Lambda::Finite(1e6)).unwrap();
    let inf = Medium::new(1.0, 4.0, Lambda::Infinite).unwrap();
    for &(s, s1, t) in &[(0.1, 0.3, 0.01), (0.5, 0.5, 0.2), (0.0, 0.2, 1.0)] {
        assert!(
            (g_pp_finite(&fin, s, s1, t).unwrap() - gamma_pp(&inf, s, s1, t).unwrap()).abs() < 1e-4
        );
        assert!(
            (g_mp_finite(&fin, -s, s1, t).unwrap() - gamma_mp(&inf, -s, s1, t).unwrap()).abs()
                < 1e-4
        );
    }
}

#[test]
fn short_time_limit_reproduces_test_function() {
    let bump = |x: f64| {
        let r = (x - 1.0) / 0.5;
        if r.abs() < 1.0 {
            (-1.0 / (1.0 - r * r)).exp()
        } else {
            0.0
        }
    };
    let media = [
        Medium::new(1.0, 4.0, Lambda::Infinite).unwrap(),
        Medium::new(1.0, 4.0, Lambda::Finite(2.0)).unwrap(),
    ];
    for m in &media {
        let s = 1.1;
        let mut prev = f64::INFINITY;
        for &t in &[1e-2, 1e-3, 1e-4] {
            let v = simpson(
                |y| kernel_1d(m, s, y, t).unwrap() * bump(y),
                0.5,
                1.5,
                40_000,
            );
            let err = (v - bump(s)).abs();
            // first-order convergence in t for smooth φ: error ≈ t·D₊φ''(s)
            assert!(err < 0.2 * prev, "t={t}: err {err} did not shrink");
            prev = err;
        }
        assert!(prev < 1e-3 * bump(s));
    }
}

#[test]
fn drift_kernel_reduces_at_zero_curvature() {
    let m = Medium::new(1.0, 4.0, Lambda::Infinite).unwrap();
    for &(s, s1, t) in &[(0.2, 0.3, 0.1), (-0.4, 0.3, 0.05)] {
        let base = kernel_1d(&m, s, s1, t).unwrap();
        assert_eq!(gamma_reg(&m, 0.0, s, s1, t).unwrap(), base);
    }
    let h = h_plus(&m, 0.2, 0.3, 0.1, 0.0).unwrap();
    assert_eq!(h, gamma_pp(&m, 0.2, 0.3, 0.1).unwrap());
}

#[test]
fn drift_kernel_satisfies_drift_equation() {
    let m = Medium::new(1.0, 4.0, Lambda::Infinite).unwrap();
    let k = 0.8;
    let (s1, t, h) = (0.4, 0.1, 1e-4);
    let rp = fd_residual(
        |s, t| gamma_reg(&m, k, s, s1, t).unwrap(),
        m.d_plus,
        k,
        0.5,
        t,
        h,
    );
    let rm = fd_residual(
        |s, t| gamma_reg(&m, k, s, s1, t).unwrap(),
        m.d_minus,
        k,
        -0.5,
        t,
        h,
    );
    assert!(rp.abs() < 1e-5 && rm.abs() < 1e-5, "{rp} {rm}");
}

#[test]
fn drift_kernel_interface_for_matched_media() {
    let m = Medium::new(1.3, 1.3, Lambda::Infinite).unwrap();
    let (s1, t, h) = (0.3, 0.05, 1e-4);
    for &k in &[-1.0, 0.5, 2.0] {
        let up = gamma_reg(&m, k, 0.0, s1, t).unwrap();
        let um = gamma_reg(&m, k, -1e-300, s1, t).unwrap();
        assert!((up - um).abs() < 1e-12);
        let fp = one_sided(|x| gamma_reg(&m, k, x, s1, t).unwrap(), h);
        let fm = -one_sided(|x| gamma_reg(&m, k, -x, s1, t).unwrap(), h);
        assert!((fp - fm).abs() < 1e-5, "k={k}: {fp} vs {fm}");
    }
}

#[test]
fn kernel_nd_free_gaussian_and_mass() {
    let m = Medium::new(1.0, 1.0, Lambda::Infinite).unwrap();
    let (x, y, t) = ([0.3, -0.2], [0.5, 0.4], 0.2);
    let r2 = (0.3f64 - 0.5).powi(2) + (-0.2f64 - 0.4).powi(2);
    let free = (-r2 / (4.0 * t)).exp() / (4.0 * PI * t);
    assert!((kernel_nd(&m, &x, &y, t).unwrap() - free).abs() < 1e-15);
    // mass = product of 1-D masses
    let m2 = Medium::new(1.0, 2.0, Lambda::Finite(4.0)).unwrap();
    let y = [0.3, 0.0];
    let t = 0.05;
    let normal = total_mass(&m2, y[0], t);
    let tangential_plus = simpson(
        |th| kernel_nd(&m2, &[0.2, th], &y, t).unwrap(),
        -5.0,
        5.0,
        20_000,
    ) / kernel_1d(&m2, 0.2, y[0], t).unwrap();
    let tangential_minus = simpson(
        |th| kernel_nd(&m2, &[-0.2, th], &y, t).unwrap(),
        -5.0,
        5.0,
        20_000,
    ) / kernel_1d(&m2, -0.2, y[0], t).unwrap();
    assert!((tangential_plus - 1.0).abs() < 1e-10);
    assert!((tangential_minus - 1.0).abs() < 1e-10);
    assert!((normal * tangential_plus - 1.0).abs() < 1e-8);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(10_000))]
    #[test]
    fn kernels_are_nonnegative(
        dp in 0.01f64..10.0, dm in 0.01f64..10.0, l in 1e-3f64..1e4,
        s in 0.0f64..3.0, s1 in 0.0f64..3.0, t in 1e-8f64..10.0,
    ) {
        let inf = Medium::new(dp, dm, Lambda::Infinite).unwrap();
        let fin = Medium::new(dp, dm, Lambda::Finite(l)).unwrap();
        prop_assert!(gamma_pp(&inf, s, s1, t).unwrap() >= 0.0);
        prop_assert!(gamma_mp(&inf, -s, s1, t).unwrap() >= 0.0);
        prop_assert!(g_pp_finite(&fin, s, s1, t).unwrap() >= -1e-12 * gamma_pp(&Medium::new(dp, dp, Lambda::Infinite).unwrap(), s, s1, t).unwrap().max(1.0));
        prop_assert!(g_mp_finite(&fin, -s, s1, t).unwrap() >= 0.0);
    }
}
