//! First-coordinate increments and first-passage times on a long capsule.

use std::f64::consts::{FRAC_PI_2, PI};

use rayon::prelude::*;
use serde::Serialize;
use statrs::function::gamma::ln_gamma;

use super::{CHUNK, STREAM_SPLIT};
use crate::chain::{single_step, Chain};
use crate::error::{Error, Result};
use crate::geometry::{BodySpec, BoundaryPoint, ConvexBody, Point};
use crate::sampler::{sample_unit_sphere, DirectionLaw, RngStream};
use crate::spectral2d::gauss_legendre;

#[derive(Clone, Debug, Serialize)]
pub struct CapsuleConfig {
    pub dim: usize,
    pub half_length: f64,
    /// Independent single steps from the mid-plane `x_1 = 0`.
    pub replicas: usize,
    /// Chains run until `x_1 ≥ half_length/2`.
    pub tau_replicas: usize,
    /// Step cap for each first-passage chain.
    pub max_steps: u64,
    pub seed: u64,
}

impl CapsuleConfig {
    pub fn new(dim: usize, half_length: f64, replicas: usize, seed: u64) -> Self {
        Self {
            dim,
            half_length,
            replicas,
            tau_replicas: 0,
            max_steps: 1_000_000,
            seed,
        }
    }

    pub fn with_passage(mut self, tau_replicas: usize, max_steps: u64) -> Self {
        self.tau_replicas = tau_replicas;
        self.max_steps = max_steps;
        self
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct CapsuleReport {
    pub dim: usize,
    pub half_length: f64,
    pub replicas: usize,
    pub mean_z1: f64,
    pub mean_z1_se: f64,
    pub var_z1_hat: f64,
    pub var_z1_se: f64,
    pub var_z1_quad: f64,
    pub tau_level: f64,
    /// First-passage step counts; `None` when the cap was reached first.
    pub tau: Vec<Option<u64>>,
    pub tau_median: Option<f64>,
}

impl CapsuleReport {
    pub fn censored(&self) -> usize {
        self.tau.iter().filter(|t| t.is_none()).count()
    }
}

/// A uniformly random point of the mid-plane circle `{x_1 = 0}` of the tube.
fn midplane_point(body: &ConvexBody, rng: &mut RngStream) -> Result<BoundaryPoint> {
    let n = body.dim();
    let e = sample_unit_sphere(n - 1, rng);
    let mut x = Point::zeros(n);
    x.rows_mut(1, n - 1).copy_from(&e);
    body.boundary_point(x)
}

/// Increment variance and passage times on the capsule of radius 1 and
/// half-length `L`.
pub fn capsule_experiment(config: &CapsuleConfig) -> Result<CapsuleReport> {
    let n = config.dim;
    if n < 3 {
        return Err(Error::input("capsule experiment needs dimension ≥ 3"));
    }
    if config.replicas < 2 {
        return Err(Error::input("need at least two replicas"));
    }
    let body = BodySpec::capsule(n, config.half_length, 1.0).build()?;

    let chunks = config.replicas.div_ceil(CHUNK);
    let z: Vec<f64> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = RngStream::new(config.seed, c as u64);
            let len = CHUNK.min(config.replicas - c * CHUNK);
            (0..len)
                .map(|_| {
                    let x = midplane_point(&body, &mut rng)?;
                    let (y, _) = single_step(&body, &x, &mut rng)?;
                    Ok(y.position[0])
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .flatten()
        .collect();

    let count = z.len() as f64;
    let mean = z.iter().sum::<f64>() / count;
    let m2 = z.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / count;
    let m4 = z.iter().map(|v| (v - mean).powi(4)).sum::<f64>() / count;
    let var = m2 * count / (count - 1.0);

    let level = config.half_length / 2.0;
    let tau: Vec<Option<u64>> = (0..config.tau_replicas)
        .into_par_iter()
        .map(|i| {
            let mut rng = RngStream::new(config.seed, STREAM_SPLIT + i as u64);
            let start = midplane_point(&body, &mut rng)?;
            let mut chain = Chain::new(&body, start, DirectionLaw::Cosine, rng);
            for k in 1..=config.max_steps {
                if chain.step()?.position[0] >= level {
                    return Ok(Some(k));
                }
            }
            Ok(None)
        })
        .collect::<Result<_>>()?;

    Ok(CapsuleReport {
        dim: n,
        half_length: config.half_length,
        replicas: z.len(),
        mean_z1: mean,
        mean_z1_se: (var / count).sqrt(),
        var_z1_hat: var,
        var_z1_se: ((m4 - m2 * m2).max(0.0) / count).sqrt(),
        var_z1_quad: var_z1_quadrature(n)?,
        tau_level: level,
        tau_median: censored_median(&tau),
        tau,
    })
}

/// Median with censored values treated as larger than every observed one.
fn censored_median(values: &[Option<u64>]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut v: Vec<u64> = values.iter().map(|t| t.unwrap_or(u64::MAX)).collect();
    v.sort_unstable();
    let m = v.len();
    let (a, b) = (v[(m - 1) / 2], v[m / 2]);
    if b == u64::MAX {
        return None;
    }
    Some((a as f64 + b as f64) / 2.0)
}

fn ln_ball_volume(k: usize) -> f64 {
    let h = k as f64 / 2.0;
    h * PI.ln() - ln_gamma(h + 1.0)
}

/// `E[(1 − ‖X‖²) 4X_1²/(1 − X_1²)²]` for `X` uniform in `B^{n−1}`, by tensor
/// Gauss quadrature in `(x, r) = (X_1, ‖(X_2, ..)‖)`.
///
/// The joint density is `(n−2) vol(B^{n−2})/vol(B^{n−1}) r^{n−3}` on the half
/// disk `r² + x² ≤ 1`. With `x = sin θ` and `r = s cos θ` the integrand becomes
/// `4 sin²θ cos^{n−3}θ · s^{n−3}(1 − s²)` on a rectangle, smooth in both
/// variables. The node count doubles until successive values agree to 1e−13.
pub fn var_z1_quadrature(n: usize) -> Result<f64> {
    if n < 3 {
        return Err(Error::input("variance quadrature needs dimension ≥ 3"));
    }
    let c = (n as f64 - 2.0) * (ln_ball_volume(n - 2) - ln_ball_volume(n - 1)).exp();
    let integrate = |q: usize| {
        let (nodes, weights) = gauss_legendre(q);
        let mut acc = 0.0;
        for (ti, wi) in nodes.iter().zip(&weights) {
            let theta = -FRAC_PI_2 + PI * ti;
            let (sin, cos) = theta.sin_cos();
            for (s, ws) in nodes.iter().zip(&weights) {
                let radial = s.powi(n as i32 - 3) * (1.0 - s * s);
                acc += PI * wi * ws * 4.0 * sin * sin * cos.powi(n as i32 - 3) * radial;
            }
        }
        c * acc
    };
    let mut q = 8;
    let mut prev = integrate(q);
    while q < 4096 {
        q *= 2;
        let next = integrate(q);
        if (next - prev).abs() <= 1e-13 * next.abs() {
            return Ok(next);
        }
        prev = next;
    }
    Err(Error::numeric(format!("variance quadrature did not converge for n = {n}")))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn censored_median_rules() {
        assert_eq!(censored_median(&[Some(3), Some(1), Some(2)]), Some(2.0));
        assert_eq!(censored_median(&[Some(3), None, Some(1), Some(2)]), Some(2.5));
        assert_eq!(censored_median(&[Some(3), None, None]), None);
        assert_eq!(censored_median(&[]), None);
    }

    #[test]
    fn quadrature_rejects_low_dimension() {
        assert!(var_z1_quadrature(2).is_err());
    }
}
