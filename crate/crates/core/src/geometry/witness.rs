//! Randomized self-checks of the derived constants `C` and `D`.

use serde::Serialize;

use super::{ConvexBody, Point};
use crate::error::Result;
use crate::sampler::{sample_cosine_with_tangent, sample_unit_ball, sample_unit_sphere, RngStream};

/// Outcome of a witness run.
#[derive(Clone, Debug, Serialize)]
pub struct WitnessReport {
    pub points: usize,
    pub checks: usize,
    pub failures: usize,
    /// Worst observed value of the checked quantity (level function for the
    /// curvature witness, chord length for the diameter witness).
    pub worst: f64,
}

impl WitnessReport {
    pub fn passed(&self) -> bool {
        self.failures == 0
    }
}

/// Random boundary points: radial shots from the interior point in uniform
/// directions.
pub fn random_boundary_points(
    body: &ConvexBody,
    count: usize,
    rng: &mut RngStream,
) -> Result<Vec<super::BoundaryPoint>> {
    (0..count)
        .map(|_| body.boundary_point_toward(&sample_unit_sphere(body.dim(), rng)))
        .collect()
}

/// For each boundary point `x`, the ball of radius `1/C − 1e−6` centered at
/// `x + n_x / C` must lie inside the body. Probes points drawn uniformly in
/// that ball and on its sphere.
pub fn curvature_witness(
    body: &ConvexBody,
    points: usize,
    probes_per_point: usize,
    rng: &mut RngStream,
) -> Result<WitnessReport> {
    let n = body.dim();
    let inv_c = 1.0 / body.curvature_bound();
    let radius = inv_c - 1e-6;
    let mut report = WitnessReport {
        points,
        checks: 0,
        failures: 0,
        worst: f64::NEG_INFINITY,
    };
    for x in random_boundary_points(body, points, rng)? {
        let center: Point = &x.position + &x.normal * inv_c;
        for k in 0..probes_per_point {
            let offset = if k % 2 == 0 {
                sample_unit_sphere(n, rng)
            } else {
                Point::from_vec(sample_unit_ball(n, rng))
            };
            let probe = &center + offset * radius;
            let g = body.level(&probe)?;
            report.checks += 1;
            report.worst = report.worst.max(g);
            if g > 0.0 {
                report.failures += 1;
            }
        }
    }
    Ok(report)
}

/// Chord lengths from random boundary points along cosine directions never
/// exceed `D + 1e−9`, and every chord midpoint is strictly interior.
pub fn diameter_witness(
    body: &ConvexBody,
    points: usize,
    rng: &mut RngStream,
) -> Result<WitnessReport> {
    let limit = body.diameter() + 1e-9;
    let mut report = WitnessReport {
        points,
        checks: 0,
        failures: 0,
        worst: 0.0,
    };
    for x in random_boundary_points(body, points, rng)? {
        let (w, _) = sample_cosine_with_tangent(&x, rng);
        if w.dot(&x.normal) < 1e-12 {
            continue;
        }
        let exit = body.ray_exit(&x, &w)?;
        let chord = (&exit.point.position - &x.position).norm();
        let mid = (&exit.point.position + &x.position) * 0.5;
        report.checks += 1;
        report.worst = report.worst.max(chord);
        if chord > limit || body.level(&mid)? >= 0.0 {
            report.failures += 1;
        }
    }
    Ok(report)
}
