mod common;

use std::f64::consts::{PI, TAU};

use billiard::chain::{kernel_density, resume_run, run, run_collect, single_step, Chain, KernelNormalization, StartRule};
use billiard::curve2d::PlanarCurve;
use billiard::diagnostics::{empirical_tv, Histogram, Partition};
use billiard::geometry::witness::random_boundary_points;
use billiard::{BodySpec, ChainConfig, ChainState, DirectionLaw, Error, Point, RngStream};
use common::{angle_between, chi_square_p, ks_distance, psi_cdf};
use proptest::prelude::*;

/// Angular separations and chord lengths of consecutive circle states.
fn circle_steps(steps: u64, seed: u64) -> (Vec<f64>, Vec<f64>) {
    let config = ChainConfig::new(BodySpec::unit_ball(2), steps, seed).with_burn_in(0);
    let body = config.body.build().unwrap();
    let mut prev = body.seed_point().position;
    let mut psi = Vec::with_capacity(steps as usize);
    let mut chords = Vec::with_capacity(steps as usize);
    run(&config, |rec| {
        psi.push(angle_between(prev.as_slice(), rec.position.as_slice()));
        chords.push(rec.chord);
        prev = rec.position.clone();
        Ok(())
    })
    .unwrap();
    (psi, chords)
}

#[test]
fn circle_angular_step_law() {
    let n = 100_000;
    let (psi, chords) = circle_steps(n, 21);
    let mut counts = vec![0u64; 64];
    for &p in &psi {
        counts[((p / TAU * 64.0) as usize).min(63)] += 1;
    }
    let probs: Vec<f64> = (0..64)
        .map(|b| psi_cdf(TAU * (b + 1) as f64 / 64.0) - psi_cdf(TAU * b as f64 / 64.0))
        .collect();
    let p = chi_square_p(&counts, &probs);
    assert!(p > 0.01, "chi-square p = {p}");

    let half = psi.iter().filter(|&&p| p <= PI).count() as f64 / n as f64;
    assert!((half - 0.5).abs() < 0.005, "{half}");

    let mut c = chords;
    let ks = ks_distance(&mut c, |l| 1.0 - (1.0 - l * l / 4.0).max(0.0).sqrt());
    assert!(ks < 0.01, "chord KS {ks}");
}

#[test]
fn circle_chain_is_uniform_in_the_long_run() {
    let config = ChainConfig::new(BodySpec::unit_ball(2), 1_000_000, 4);
    let body = config.body.build().unwrap();
    let partition = Partition::arclength(&body, 64).unwrap();
    let mut h = Histogram::empty(&partition);
    run(&config, |rec| {
        h.add(partition.bin_of(rec.position.as_slice()));
        Ok(())
    })
    .unwrap();
    let tv = empirical_tv(&h, &Histogram::reference(&partition)).unwrap();
    assert!(tv < 0.01, "{tv}");
}

#[test]
fn sphere_coordinates_are_uniform() {
    let config = ChainConfig::new(BodySpec::unit_ball(3), 1_000_000, 12).with_burn_in(1000);
    let (records, _) = run_collect(&config).unwrap();
    for i in 0..3 {
        let mut c: Vec<f64> = records.iter().map(|r| r.position[i]).collect();
        let ks = ks_distance(&mut c, |v| (v + 1.0) / 2.0);
        assert!(ks < 0.01, "coordinate {i}: KS {ks}");
    }
}

#[test]
fn sphere_kernel_is_constant() {
    // On S² the cosines are ‖u − v‖/2 each, so the density is 1/(4π).
    let body = BodySpec::unit_ball(3).build().unwrap();
    let mut rng = RngStream::new(2, 0);
    let pts = random_boundary_points(&body, 50, &mut rng).unwrap();
    for u in &pts {
        for v in &pts {
            if u.position == v.position {
                continue;
            }
            let k = kernel_density(&body, u, v, KernelNormalization::SurfaceMeasure).unwrap();
            assert!((k - 1.0 / (4.0 * PI)).abs() < 1e-12, "{k}");
        }
    }
}

#[test]
fn kernel_integrates_to_one_on_planar_bodies() {
    for spec in [BodySpec::ellipsoid(&[2.0, 1.0]), BodySpec::capsule(2, 3.0, 1.0)] {
        let body = spec.build().unwrap();
        let curve = PlanarCurve::new(&body).unwrap();
        let u = curve.point_at(0.37 * curve.length());
        let m = 200_000;
        let h = curve.length() / m as f64;
        let total: f64 = (0..m)
            .map(|i| {
                let v = curve.point_at((i as f64 + 0.5) * h);
                kernel_density(&body, &u, &v, KernelNormalization::SurfaceMeasure).unwrap_or(0.0) * h
            })
            .sum();
        assert!((total - 1.0).abs() < 1e-4, "{spec:?}: {total}");
    }
}

#[test]
fn records_are_consistent_with_geometry() {
    for spec in [
        BodySpec::ellipsoid(&[3.0, 1.0, 0.5]),
        BodySpec::capsule(4, 2.0, 1.0),
        BodySpec::unit_ball(6),
    ] {
        let body = spec.build().unwrap();
        let mut chain = Chain::new(&body, body.seed_point(), DirectionLaw::Cosine, RngStream::new(3, 0));
        for _ in 0..2000 {
            let x = chain.current().clone();
            let rec = chain.step().unwrap();
            let y = chain.current();
            let d = &y.position - &x.position;
            assert!((rec.chord - d.norm()).abs() < 1e-12);
            assert!((rec.cos_out - x.normal.dot(&d) / d.norm()).abs() < 1e-12);
            assert!((rec.cos_in + y.normal.dot(&d) / d.norm()).abs() < 1e-12);
            assert!(rec.cos_out > 0.0 && rec.cos_out <= 1.0 + 1e-15);
            assert!(rec.cos_in > 0.0 && rec.cos_in <= 1.0 + 1e-15);
            assert!(rec.chord > 0.0 && rec.chord <= body.diameter() + 1e-9);
            let mid: Point = (&x.position + &y.position) * 0.5;
            assert!(body.level(&mid).unwrap() < 0.0);
        }
    }
}

#[test]
fn runs_are_deterministic_and_resumable() {
    let config = ChainConfig::new(BodySpec::capsule(3, 2.0, 1.0), 500, 77).with_burn_in(10);
    let (a, state_a) = run_collect(&config).unwrap();
    let (b, _) = run_collect(&config).unwrap();
    assert_eq!(a, b);
    assert_eq!(a.len(), 500);
    assert_eq!(a[0].k, 11);

    let empty = ChainConfig { steps: 0, ..config.clone() };
    assert!(run_collect(&empty).unwrap().0.is_empty());

    // 200 steps, checkpoint through JSON, 300 more: same as 500 straight.
    let first = ChainConfig { steps: 200, ..config.clone() };
    let (head, state) = run_collect(&first).unwrap();
    let text = serde_json::to_string(&state).unwrap();
    let state: ChainState = serde_json::from_str(&text).unwrap();
    let body = config.body.build().unwrap();
    let mut tail = Vec::new();
    let end = resume_run(&body, &state, 300, 1, |r| {
        tail.push(r.clone());
        Ok(())
    })
    .unwrap();
    let joined: Vec<_> = head.into_iter().chain(tail).collect();
    assert_eq!(joined, a);
    assert_eq!(end, state_a);
}

#[test]
fn thinning_keeps_every_kth_record() {
    let config = ChainConfig::new(BodySpec::unit_ball(2), 100, 5).with_burn_in(0);
    let (all, _) = run_collect(&config).unwrap();
    let (thin, _) = run_collect(&config.clone().with_thin(7)).unwrap();
    assert_eq!(thin.len(), 14);
    for (i, r) in thin.iter().enumerate() {
        assert_eq!(r, &all[7 * (i + 1) - 1]);
    }
    assert!(matches!(run_collect(&config.with_thin(0)), Err(Error::Input(_))));
}

#[test]
fn explicit_start_must_lie_on_the_boundary() {
    let base = ChainConfig::new(BodySpec::unit_ball(2), 10, 1);
    let ok = base.clone().with_start(StartRule::At(vec![0.0, 1.0]));
    assert!(run_collect(&ok).is_ok());
    let bad = base.with_start(StartRule::At(vec![0.0, 0.5]));
    assert!(matches!(run_collect(&bad), Err(Error::Domain(_))));
}

#[test]
fn single_step_from_any_point() {
    let body = BodySpec::ellipsoid(&[2.0, 1.0]).build().unwrap();
    let mut rng = RngStream::new(0, 0);
    let x = body.seed_point();
    let (y, rec) = single_step(&body, &x, &mut rng).unwrap();
    assert_eq!(rec.position, y.position);
    assert!(body.level(&y.position).unwrap().abs() < 1e-9);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn kernel_is_symmetric(seed in any::<u64>(), which in 0usize..4) {
        let spec = [
            BodySpec::ellipsoid(&[2.0, 1.0, 0.7]),
            BodySpec::capsule(3, 1.5, 0.8),
            BodySpec::unit_ball(5),
            BodySpec::ellipsoid(&[1.0, 3.0]),
        ][which].clone();
        let body = spec.build().unwrap();
        let mut rng = RngStream::new(seed, 0);
        let pts = random_boundary_points(&body, 30, &mut rng).unwrap();
        for pair in pts.windows(2) {
            for norm in [KernelNormalization::Unnormalized, KernelNormalization::SurfaceMeasure] {
                let a = kernel_density(&body, &pair[0], &pair[1], norm).unwrap();
                let b = kernel_density(&body, &pair[1], &pair[0], norm).unwrap();
                prop_assert_eq!(a.to_bits(), b.to_bits());
                prop_assert!(a >= 0.0);
            }
        }
    }
}
