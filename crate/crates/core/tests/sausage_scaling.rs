use std::f64::consts::PI;

use heatcontent::geometry::*;
use heatcontent::sausage::*;
use rand::{Rng, SeedableRng};

fn square_oracle(l: f64) -> f64 {
    1.0 - (1.0 - 2.0 * l.min(0.5)).powi(2)
}

fn annulus_oracle(r: f64, l: f64) -> f64 {
    PI * r * r - PI * (r - l.min(r)).powi(2)
}

#[test]
fn grid_matches_closed_forms() {
    let sq = SausageProfile::new(
        make_square(1.0).unwrap(),
        SausageMode::Grid { resolution: 512 },
    )
    .unwrap();
    let m = sq.mu(0.1).unwrap();
    assert!((m.value - 0.36).abs() < 1e-3, "{m:?}");
    assert!((m.value - square_oracle(0.1)).abs() <= 3.0 * m.est_error.max(1e-6));
    let c = SausageProfile::new(
        make_circle(1.0).unwrap(),
        SausageMode::Grid { resolution: 512 },
    )
    .unwrap();
    let m = c.mu(0.25).unwrap();
    assert!((m.value - 1.3744).abs() < 1e-3, "{m:?}");
    assert!(
        (m.value - annulus_oracle(1.0, 0.25)).abs() <= 3.0 * m.est_error.max(1e-5),
        "{m:?}"
    );
}

#[test]
fn monte_carlo_agrees_within_three_standard_errors() {
    for (geom, oracle) in [
        (make_square(1.0).unwrap(), square_oracle(0.1)),
        (make_circle(1.0).unwrap(), annulus_oracle(1.0, 0.25)),
    ] {
        let w = if matches!(geom.kind(), DomainKind::Square { .. }) {
            0.1
        } else {
            0.25
        };
        let p = SausageProfile::new(
            geom,
            SausageMode::MonteCarlo {
                samples: 400_000,
                seed: 7,
            },
        )
        .unwrap();
        let m = p.mu(w).unwrap();
        assert!(
            (m.value - oracle).abs() < 3.0 * m.est_error,
            "{m:?} vs {oracle}"
        );
    }
}

#[test]
fn monotone_on_random_pairs() {
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
    let profiles = [
        SausageProfile::new(make_square(1.0).unwrap(), SausageMode::Analytic).unwrap(),
        SausageProfile::new(make_circle(1.0).unwrap(), SausageMode::Analytic).unwrap(),
        SausageProfile::new(
            make_minkowski_prefractal(2).unwrap(),
            SausageMode::Grid { resolution: 256 },
        )
        .unwrap(),
    ];
    for p in &profiles {
        let mut widths = Vec::new();
        for _ in 0..100 {
            let a: f64 = rng.random_range(0.0..0.6);
            let b: f64 = rng.random_range(0.0..0.6);
            widths.push(a.min(b));
            widths.push(a.max(b));
        }
        let mus = p.mu_many(&widths).unwrap();
        let vol = p.geometry().area();
        for pair in mus.chunks(2) {
            assert!(pair[0].value <= pair[1].value + 1e-15);
            assert!(pair[1].value <= vol * (1.0 + 1e-12));
        }
        assert_eq!(p.mu(0.0).unwrap().value, 0.0);
    }
}

#[test]
fn saturates_at_inradius() {
    let sq = SausageProfile::new(make_square(2.0).unwrap(), SausageMode::Analytic).unwrap();
    assert_eq!(sq.mu(1.0).unwrap().value, 4.0);
    assert_eq!(sq.mu(3.0).unwrap().value, 4.0);
    let c = SausageProfile::new(make_circle(0.5).unwrap(), SausageMode::Analytic).unwrap();
    assert!((c.mu(0.5).unwrap().value - PI / 4.0).abs() < 1e-15);
}

/// |μ(εz) − zμ(ε)| ≤ Cε² with the ε² order confirmed by successive halving.
#[test]
fn smooth_scaling_relation_is_second_order() {
    let profiles = [
        SausageProfile::new(make_square(1.0).unwrap(), SausageMode::Analytic).unwrap(),
        SausageProfile::new(make_circle(1.0).unwrap(), SausageMode::Analytic).unwrap(),
    ];
    for p in &profiles {
        for &z in &[0.5, 1.5, 2.0] {
            let defect = |e: f64| (p.mu(e * z).unwrap().value - z * p.mu(e).unwrap().value).abs();
            let d: Vec<f64> = [1e-2, 5e-3, 2.5e-3].iter().map(|&e| defect(e)).collect();
            for w in d.windows(2) {
                let slope = (w[0] / w[1]).log2();
                assert!((slope - 2.0).abs() < 0.02, "z={z}: slope {slope}");
            }
            let c = d[0] / 1e-4;
            assert!(c < 10.0);
        }
    }
}

#[test]
fn scaling_exponents_of_smooth_and_polygonal_domains() {
    let widths: Vec<f64> = (0..5).map(|i| 1e-3 * 10f64.powf(i as f64 / 4.0)).collect();
    for g in [make_square(1.0).unwrap(), make_circle(1.0).unwrap()] {
        let p = SausageProfile::auto(g);
        let slope = p.mu_scaling_exponent(&widths).unwrap();
        assert!((slope - 1.0).abs() < 0.05, "{slope}");
    }
}

#[test]
fn prefractal_scaling_exponent_is_near_one_half() {
    let p = SausageProfile::new(
        make_minkowski_prefractal(4).unwrap(),
        SausageMode::Grid { resolution: 2048 },
    )
    .unwrap();
    let widths: Vec<f64> = (0..5).map(|i| 4e-3 * 10f64.powf(i as f64 / 4.0)).collect();
    let slope = p.mu_scaling_exponent(&widths).unwrap();
    eprintln!("generation-4 sausage slope {slope}");
    assert!((slope - 0.5).abs() < 0.1, "{slope}");
}

#[test]
fn csv_has_header_and_rows() {
    let p = SausageProfile::new(make_square(1.0).unwrap(), SausageMode::Analytic).unwrap();
    let csv = p.to_csv(&[0.1, 0.2]).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "width,mu,mode,est_error");
    assert!(lines[1].starts_with("0.1,0.36"));
    assert_eq!(lines.len(), 3);
}
