mod common;

use billiard::sampler::{normal_component_cdf, sample_direction, sample_unit_ball};
use billiard::{BodySpec, DirectionLaw, RngStream};
use common::ks_distance;

fn normal_components(n: usize, law: DirectionLaw, samples: usize, seed: u64) -> Vec<f64> {
    let body = BodySpec::unit_ball(n).build().unwrap();
    let x = body.seed_point();
    let mut rng = RngStream::new(seed, 0);
    (0..samples)
        .map(|_| sample_direction(&x, law, &mut rng).dot(&x.normal).abs())
        .collect()
}

#[test]
fn cosine_law_matches_closed_form_cdf() {
    for n in [2, 3, 10, 100] {
        let mut t = normal_components(n, DirectionLaw::Cosine, 100_000, n as u64);
        let d = ks_distance(&mut t, |v| normal_component_cdf(v, n, DirectionLaw::Cosine).unwrap());
        assert!(d < 0.01, "n={n}: KS {d}");
    }
}

#[test]
fn uniform_laws_match_beta_cdf() {
    for law in [DirectionLaw::UniformHemisphere, DirectionLaw::UniformSphere] {
        for n in [2, 3, 7] {
            let mut t = normal_components(n, law, 50_000, 40 + n as u64);
            let d = ks_distance(&mut t, |v| normal_component_cdf(v, n, law).unwrap());
            assert!(d < 0.012, "{law:?} n={n}: KS {d}");
        }
    }
}

#[test]
fn uniform_sphere_coordinates_are_uniform_in_three_dimensions() {
    let body = BodySpec::unit_ball(3).build().unwrap();
    let x = body.seed_point();
    let mut rng = RngStream::new(3, 3);
    let ws: Vec<_> = (0..100_000)
        .map(|_| sample_direction(&x, DirectionLaw::UniformSphere, &mut rng))
        .collect();
    for i in 0..3 {
        let mut c: Vec<f64> = ws.iter().map(|w| w[i]).collect();
        let d = ks_distance(&mut c, |v| (v + 1.0) / 2.0);
        assert!(d < 0.01, "coordinate {i}: KS {d}");
    }
}

#[test]
fn scaled_median_approaches_rayleigh() {
    let n = 400;
    let mut t = normal_components(n, DirectionLaw::Cosine, 100_000, 17);
    t.sort_by(f64::total_cmp);
    let median = 0.5 * (t[49_999] + t[50_000]) * (n as f64).sqrt();
    assert!((median - 1.1774).abs() < 0.02, "{median}");
}

#[test]
fn ball_points_have_uniform_radius_law() {
    for d in [1, 2, 5] {
        let mut rng = RngStream::new(8, d as u64);
        let mut r: Vec<f64> = (0..50_000)
            .map(|_| sample_unit_ball(d, &mut rng).iter().map(|v| v * v).sum::<f64>().sqrt())
            .collect();
        let ks = ks_distance(&mut r, |v| v.powi(d as i32));
        assert!(ks < 0.01, "d={d}: KS {ks}");
    }
}

#[test]
fn streams_are_independent_of_each_other() {
    let mut a = RngStream::new(1, 0);
    let mut b = RngStream::new(1, 1);
    let xs: Vec<f64> = (0..1000).map(|_| a.uniform()).collect();
    let ys: Vec<f64> = (0..1000).map(|_| b.uniform()).collect();
    assert_ne!(xs, ys);
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    let (mx, my) = (mean(&xs), mean(&ys));
    let cov: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum::<f64>() / 1000.0;
    // Correlation of independent uniforms: sd ≈ 1/√1000.
    assert!((cov * 12.0).abs() < 0.12, "{cov}");
}
