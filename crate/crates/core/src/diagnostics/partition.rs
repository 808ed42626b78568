//! Boundary partitions with exact reference masses, and histograms over them.

use std::f64::consts::PI;

use serde::Serialize;
use statrs::function::beta::beta_reg;
use statrs::function::gamma::ln_gamma;

use crate::curve2d::PlanarCurve;
use crate::error::{Error, Result};
use crate::geometry::{BodySpec, ConvexBody};

/// How boundary points are assigned to bins.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "scheme", rename_all = "snake_case")]
pub enum Scheme {
    /// Equal-arclength arcs of a planar boundary, starting at arclength 0.
    Arclength,
    /// Equal-width slabs of the first coordinate over `[lo, hi]`, each split
    /// further by the signs of the next `orthant_axes` coordinates.
    FirstCoordinate {
        lo: f64,
        hi: f64,
        center: Vec<f64>,
        orthant_axes: usize,
    },
}

/// Identity of a partition, compared before histograms are combined.
#[derive(Clone, Debug, PartialEq)]
pub struct PartitionKey {
    body: BodySpec,
    scheme: Scheme,
    slabs: usize,
}

/// A finite partition of `∂K` with the uniform surface mass of every bin.
#[derive(Clone, Debug)]
pub struct Partition {
    key: PartitionKey,
    masses: Vec<f64>,
    curve: Option<PlanarCurve>,
}

/// Surface area of the unit sphere `S^{k−1}` in `R^k`.
fn sphere_area(k: usize) -> f64 {
    let h = k as f64 / 2.0;
    2.0 * (h * PI.ln() - ln_gamma(h)).exp()
}

/// Fraction of `S^{n−1}` with first coordinate `≤ t`, for `t ∈ [−1, 1]`.
fn sphere_slab_cdf(t: f64, n: usize) -> f64 {
    let t = t.clamp(-1.0, 1.0);
    let a = (n as f64 - 1.0) / 2.0;
    beta_reg(a, a, (1.0 + t) / 2.0)
}

impl Partition {
    /// Arclength bins for planar bodies, first-coordinate slabs otherwise.
    pub fn for_body(body: &ConvexBody, bins: usize) -> Result<Self> {
        if body.dim() == 2 {
            Self::arclength(body, bins)
        } else {
            Self::first_coordinate(body, bins)
        }
    }

    /// `m` arcs of equal length; every bin has mass `1/m`.
    pub fn arclength(body: &ConvexBody, m: usize) -> Result<Self> {
        if m == 0 {
            return Err(Error::input("partition needs at least one bin"));
        }
        let curve = PlanarCurve::new(body)?;
        Ok(Self {
            key: PartitionKey {
                body: body.spec().clone(),
                scheme: Scheme::Arclength,
                slabs: m,
            },
            masses: vec![1.0 / m as f64; m],
            curve: Some(curve),
        })
    }

    /// `m` equal-width slabs of the first coordinate. Masses are exact for
    /// balls and capsules.
    pub fn first_coordinate(body: &ConvexBody, m: usize) -> Result<Self> {
        if m == 0 {
            return Err(Error::input("partition needs at least one bin"));
        }
        let n = body.dim();
        let (lo, hi, center, masses) = match body.spec() {
            BodySpec::Ball { center, radius, .. } => {
                let c = center.clone().unwrap_or_else(|| vec![0.0; n]);
                let (lo, hi) = (c[0] - radius, c[0] + radius);
                let edges = slab_edges(lo, hi, m);
                let cdf = |x: f64| sphere_slab_cdf((x - c[0]) / radius, n);
                let masses = edges.windows(2).map(|e| cdf(e[1]) - cdf(e[0])).collect();
                (lo, hi, c, masses)
            }
            BodySpec::Capsule {
                half_length,
                radius,
                ..
            } => {
                let (l, r) = (*half_length, *radius);
                let (lo, hi) = (-l - r, l + r);
                let tube = 2.0 * l * sphere_area(n - 1) * r.powi(n as i32 - 2);
                let caps = sphere_area(n) * r.powi(n as i32 - 1);
                // Cumulative surface area with first coordinate ≤ x.
                let area = |x: f64| {
                    let left = caps * sphere_slab_cdf(((x + l) / r).min(0.0), n);
                    let mid = tube * ((x.clamp(-l, l) + l) / (2.0 * l));
                    let right = caps * (sphere_slab_cdf(((x - l) / r).max(0.0), n) - 0.5);
                    left + mid + right
                };
                let total = tube + caps;
                let edges = slab_edges(lo, hi, m);
                let masses = edges.windows(2).map(|e| (area(e[1]) - area(e[0])) / total).collect();
                (lo, hi, vec![0.0; n], masses)
            }
            _ => {
                return Err(Error::input(
                    "first-coordinate partitions need a ball or a capsule",
                ))
            }
        };
        Ok(Self {
            key: PartitionKey {
                body: body.spec().clone(),
                scheme: Scheme::FirstCoordinate {
                    lo,
                    hi,
                    center,
                    orthant_axes: 0,
                },
                slabs: m,
            },
            masses,
            curve: None,
        })
    }

    /// Splits every slab by the signs of up to three further coordinates.
    /// Balls and capsules are symmetric under those reflections, so each
    /// piece gets an equal share of the slab mass.
    pub fn with_orthants(mut self, axes: usize) -> Result<Self> {
        let Scheme::FirstCoordinate {
            center,
            orthant_axes,
            ..
        } = &mut self.key.scheme
        else {
            return Err(Error::input("orthant refinement applies to first-coordinate slabs"));
        };
        let dim = center.len();
        if *orthant_axes != 0 || axes > 3 || axes + 1 > dim {
            return Err(Error::input(format!(
                "cannot refine by {axes} sign axes in dimension {dim}"
            )));
        }
        *orthant_axes = axes;
        let pieces = 1usize << axes;
        self.masses = self
            .masses
            .iter()
            .flat_map(|&m| std::iter::repeat_n(m / pieces as f64, pieces))
            .collect();
        Ok(self)
    }

    pub fn bins(&self) -> usize {
        self.masses.len()
    }

    /// Uniform surface mass of each bin; sums to 1.
    pub fn masses(&self) -> &[f64] {
        &self.masses
    }

    pub fn key(&self) -> &PartitionKey {
        &self.key
    }

    pub fn scheme(&self) -> &Scheme {
        &self.key.scheme
    }

    /// Bin index of a boundary point.
    pub fn bin_of(&self, x: &[f64]) -> usize {
        let m = self.key.slabs;
        match &self.key.scheme {
            Scheme::Arclength => {
                let curve = self.curve.as_ref().expect("arclength partitions carry their curve");
                let s = curve.arclength_of(x) / curve.length();
                ((s * m as f64) as usize).min(m - 1)
            }
            Scheme::FirstCoordinate {
                lo,
                hi,
                center,
                orthant_axes,
            } => {
                let u = ((x[0] - lo) / (hi - lo)).clamp(0.0, 1.0);
                let slab = ((u * m as f64) as usize).min(m - 1);
                let code = (0..*orthant_axes)
                    .filter(|&j| x[j + 1] >= center[j + 1])
                    .fold(0usize, |acc, j| acc | (1 << j));
                (slab << orthant_axes) | code
            }
        }
    }
}

fn slab_edges(lo: f64, hi: f64, m: usize) -> Vec<f64> {
    let mut e: Vec<f64> = (0..=m).map(|i| lo + (hi - lo) * i as f64 / m as f64).collect();
    e[m] = hi;
    e
}

/// Bin weights over a partition. Counts from disjoint sample sets merge by
/// addition.
#[derive(Clone, Debug)]
pub struct Histogram {
    key: PartitionKey,
    weights: Vec<f64>,
    samples: u64,
}

impl Histogram {
    pub fn empty(partition: &Partition) -> Self {
        Self {
            key: partition.key.clone(),
            weights: vec![0.0; partition.bins()],
            samples: 0,
        }
    }

    /// The uniform surface measure itself.
    pub fn reference(partition: &Partition) -> Self {
        Self {
            key: partition.key.clone(),
            weights: partition.masses.clone(),
            samples: 0,
        }
    }

    pub fn from_counts(partition: &Partition, counts: &[u64]) -> Result<Self> {
        if counts.len() != partition.bins() {
            return Err(Error::input(format!(
                "{} counts for a partition of {} bins",
                counts.len(),
                partition.bins()
            )));
        }
        Ok(Self {
            key: partition.key.clone(),
            weights: counts.iter().map(|&c| c as f64).collect(),
            samples: counts.iter().sum(),
        })
    }

    pub fn from_points<'a, I>(partition: &Partition, points: I) -> Self
    where
        I: IntoIterator<Item = &'a [f64]>,
    {
        let mut h = Self::empty(partition);
        for x in points {
            h.weights[partition.bin_of(x)] += 1.0;
            h.samples += 1;
        }
        h
    }

    pub fn add(&mut self, bin: usize) {
        self.weights[bin] += 1.0;
        self.samples += 1;
    }

    pub fn merge(&mut self, other: &Histogram) -> Result<()> {
        self.check_key(other)?;
        for (a, b) in self.weights.iter_mut().zip(&other.weights) {
            *a += b;
        }
        self.samples += other.samples;
        Ok(())
    }

    /// Number of samples behind the counts; 0 for a reference histogram.
    pub fn samples(&self) -> u64 {
        self.samples
    }

    pub fn bins(&self) -> usize {
        self.weights.len()
    }

    /// Normalized bin masses.
    pub fn masses(&self) -> Result<Vec<f64>> {
        let total: f64 = self.weights.iter().sum();
        if !(total > 0.0) {
            return Err(Error::input("histogram has no mass"));
        }
        Ok(self.weights.iter().map(|w| w / total).collect())
    }

    fn check_key(&self, other: &Histogram) -> Result<()> {
        if self.key != other.key || self.weights.len() != other.weights.len() {
            return Err(Error::input("histograms are over different partitions"));
        }
        Ok(())
    }
}

/// Total variation restricted to the partition: half the L1 distance of the
/// normalized bin masses. A lower bound for the unrestricted distance.
pub fn empirical_tv(p: &Histogram, q: &Histogram) -> Result<f64> {
    p.check_key(q)?;
    let (a, b) = (p.masses()?, q.masses()?);
    Ok(tv_of_masses(&a, &b))
}

pub(crate) fn tv_of_masses(a: &[f64], b: &[f64]) -> f64 {
    let s: f64 = a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum();
    (0.5 * s).clamp(0.0, 1.0)
}

/// Expected partition TV between two independent histograms of `n_p` and `n_q`
/// samples from the same law with bin masses `masses` (normal approximation).
pub fn tv_noise_floor(masses: &[f64], n_p: u64, n_q: u64) -> f64 {
    let scale = 1.0 / n_p as f64 + 1.0 / n_q as f64;
    let k = (2.0 / PI).sqrt();
    0.5 * masses.iter().map(|&p| k * (p * (1.0 - p) * scale).sqrt()).sum::<f64>()
}
