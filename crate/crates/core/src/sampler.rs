//! Direction laws on the unit sphere at a boundary point, and the random
//! streams that drive them.

use std::ops::{Deref, DerefMut};

use nalgebra::DVector;
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{BoundaryPoint, Point};

/// Outgoing direction law.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DirectionLaw {
    /// Density proportional to `n_x·w` on the inward hemisphere.
    #[default]
    Cosine,
    UniformHemisphere,
    /// Cosine law with a fair random sign on the normal component.
    CosineTwoSided,
    UniformSphere,
}

impl DirectionLaw {
    pub fn is_two_sided(self) -> bool {
        matches!(self, Self::CosineTwoSided | Self::UniformSphere)
    }
}

impl std::str::FromStr for DirectionLaw {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "cosine" => Ok(Self::Cosine),
            "uniform_hemisphere" | "uniform-hemisphere" => Ok(Self::UniformHemisphere),
            "cosine_two_sided" | "cosine-two-sided" => Ok(Self::CosineTwoSided),
            "uniform_sphere" | "uniform-sphere" => Ok(Self::UniformSphere),
            other => Err(Error::input(format!("unknown direction law {other:?}"))),
        }
    }
}

/// Reproducible random stream addressed by `(seed, stream)`.
///
/// Backed by ChaCha8, whose 64-bit stream id selects an independent keystream
/// for the same key, and whose word position makes the state checkpointable.
#[derive(Clone, Debug)]
pub struct RngStream {
    seed: u64,
    stream: u64,
    rng: ChaCha8Rng,
}

impl RngStream {
    pub fn new(seed: u64, stream: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        Self { seed, stream, rng }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream(&self) -> u64 {
        self.stream
    }

    /// Number of 32-bit words consumed so far.
    pub fn word_pos(&self) -> u128 {
        self.rng.get_word_pos()
    }

    /// Stream positioned at an earlier checkpoint.
    pub fn resume(seed: u64, stream: u64, word_pos: u128) -> Self {
        let mut s = Self::new(seed, stream);
        s.rng.set_word_pos(word_pos);
        s
    }

    pub fn uniform(&mut self) -> f64 {
        self.rng.random::<f64>()
    }

    pub fn normal(&mut self) -> f64 {
        self.rng.sample(StandardNormal)
    }
}

impl Deref for RngStream {
    type Target = ChaCha8Rng;

    fn deref(&self) -> &ChaCha8Rng {
        &self.rng
    }
}

impl DerefMut for RngStream {
    fn deref_mut(&mut self) -> &mut ChaCha8Rng {
        &mut self.rng
    }
}

fn gaussian_vec(d: usize, rng: &mut RngStream) -> Vec<f64> {
    (0..d).map(|_| rng.normal()).collect()
}

/// Uniform direction on `S^{d−1}`.
pub fn sample_unit_sphere(d: usize, rng: &mut RngStream) -> Point {
    loop {
        let g = DVector::from_vec(gaussian_vec(d, rng));
        let norm = g.norm();
        if norm > 0.0 {
            return g / norm;
        }
    }
}

/// Uniform point in the `d`-dimensional unit ball: a Gaussian direction
/// scaled by `U^{1/d}`.
pub fn sample_unit_ball(d: usize, rng: &mut RngStream) -> Vec<f64> {
    assert!(d >= 1, "ball dimension must be ≥ 1");
    if d == 1 {
        return vec![2.0 * rng.uniform() - 1.0];
    }
    let dir = sample_unit_sphere(d, rng);
    let radius = rng.uniform().powf(1.0 / d as f64);
    dir.iter().map(|v| v * radius).collect()
}

/// Draws from the cosine law by lifting a uniform tangent-ball point onto the
/// inward hemisphere. Also returns the tangent component, which is orthogonal
/// to the normal by construction.
pub fn sample_cosine_with_tangent(x: &BoundaryPoint, rng: &mut RngStream) -> (Point, Point) {
    let n = x.dim();
    let frame = x.tangent_frame();
    let u = sample_unit_ball(n - 1, rng);
    let lift = (1.0 - u.iter().map(|v| v * v).sum::<f64>()).max(0.0).sqrt();
    let tangent = frame.embed(&u);
    let mut w = tangent.clone();
    w.axpy(lift, &x.normal, 1.0);
    // The lift keeps ‖w‖ = 1 up to rounding; renormalize to pin it at 1e-15.
    let w = w.normalize();
    (w, tangent)
}

/// Samples an outgoing unit direction at `x` under `law`.
pub fn sample_direction(x: &BoundaryPoint, law: DirectionLaw, rng: &mut RngStream) -> Point {
    match law {
        DirectionLaw::Cosine => sample_cosine_with_tangent(x, rng).0,
        DirectionLaw::CosineTwoSided => {
            let (w, tangent) = sample_cosine_with_tangent(x, rng);
            if rng.uniform() < 0.5 {
                w
            } else {
                // Reflect the normal component only.
                let lift = w.dot(&x.normal);
                let mut r = tangent;
                r.axpy(-lift, &x.normal, 1.0);
                r.normalize()
            }
        }
        DirectionLaw::UniformSphere => sample_unit_sphere(x.dim(), rng),
        DirectionLaw::UniformHemisphere => {
            let w = sample_unit_sphere(x.dim(), rng);
            if w.dot(&x.normal) < 0.0 {
                -w
            } else {
                w
            }
        }
    }
}

/// CDF of the normal component `t = |w·n_x|` in dimension `n`.
///
/// Cosine laws: the exact sphere slice measure `∝ t (1 − t²)^{(n−3)/2} dt`
/// integrates to `1 − (1 − t²)^{(n−1)/2}`. Uniform laws: `I_{t²}(1/2, (n−1)/2)`.
/// After scaling by `√n` the cosine law tends to the Rayleigh law
/// `1 − exp(−a²/2)`.
pub fn normal_component_cdf(t: f64, n: usize, law: DirectionLaw) -> Result<f64> {
    if !(0.0..=1.0).contains(&t) {
        return Err(Error::input(format!("normal component {t} outside [0, 1]")));
    }
    if n < 2 {
        return Err(Error::input("dimension must be ≥ 2"));
    }
    let half = (n as f64 - 1.0) / 2.0;
    Ok(match law {
        DirectionLaw::Cosine | DirectionLaw::CosineTwoSided => {
            1.0 - (1.0 - t * t).powf(half)
        }
        DirectionLaw::UniformHemisphere | DirectionLaw::UniformSphere => {
            statrs::function::beta::beta_reg(0.5, half, t * t)
        }
    })
}
