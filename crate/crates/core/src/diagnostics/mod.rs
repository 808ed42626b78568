//! Monte Carlo estimators built on the chain: step-length quantiles, local
//! volume fractions, one-step overlap, mixing curves, the capsule increment
//! experiment and boundary-subset fractions.

mod capsule;
mod partition;

use rayon::prelude::*;
use serde::Serialize;

pub use capsule::{capsule_experiment, var_z1_quadrature, CapsuleConfig, CapsuleReport};
pub use partition::{empirical_tv, tv_noise_floor, Histogram, Partition, PartitionKey, Scheme};

use crate::chain::{single_step, Chain, ChainConfig, StepRecord};
use crate::error::{Error, Result};
use crate::geometry::{BoundaryPoint, ConvexBody, Point};
use crate::sampler::{sample_unit_ball, RngStream};

/// Default level of the step-length quantile.
pub const F_LEVEL: f64 = 1.0 / 128.0;
/// Samples drawn from one RNG stream before moving to the next, so results
/// do not depend on the thread count.
pub const CHUNK: usize = 1 << 14;
/// Offset separating the stream ranges of independent sample sets.
pub const STREAM_SPLIT: u64 = 1 << 32;
pub const MIN_SAMPLES: usize = 10_000;
const Z95: f64 = 1.959_963_984_540_054;

/// Runs `samples` independent single steps from `x`, chunked over streams
/// `stream_base, stream_base + 1, ...`.
fn one_step_samples<T, F>(
    body: &ConvexBody,
    x: &BoundaryPoint,
    samples: usize,
    seed: u64,
    stream_base: u64,
    f: F,
) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(BoundaryPoint, StepRecord) -> T + Sync,
{
    let chunks = samples.div_ceil(CHUNK);
    let parts = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = RngStream::new(seed, stream_base + c as u64);
            let len = CHUNK.min(samples - c * CHUNK);
            (0..len)
                .map(|_| single_step(body, x, &mut rng).map(|(y, rec)| f(y, rec)))
                .collect::<Result<Vec<T>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(parts.into_iter().flatten().collect())
}

/// Order-statistic quantile estimate of the one-step chord length.
#[derive(Clone, Debug, Serialize)]
pub struct FEstimate {
    pub level: f64,
    pub samples: usize,
    pub f: f64,
    /// Approximate 95% confidence interval from binomial order statistics.
    pub ci_lo: f64,
    pub ci_hi: f64,
    #[serde(skip)]
    chords: Vec<f64>,
}

impl FEstimate {
    /// Empirical `level`-quantile of the same chord sample.
    pub fn quantile(&self, level: f64) -> f64 {
        order_stat(&self.chords, level)
    }

    pub fn chords(&self) -> &[f64] {
        &self.chords
    }
}

fn rank(n: usize, p: f64) -> usize {
    ((p * n as f64).ceil() as usize).clamp(1, n) - 1
}

fn order_stat(sorted: &[f64], p: f64) -> f64 {
    sorted[rank(sorted.len(), p)]
}

/// The `level`-quantile of `‖x − y‖` for one step from `x`.
pub fn estimate_f(
    body: &ConvexBody,
    x: &BoundaryPoint,
    samples: usize,
    level: f64,
    seed: u64,
) -> Result<FEstimate> {
    if samples < MIN_SAMPLES {
        return Err(Error::input(format!("need at least {MIN_SAMPLES} samples")));
    }
    if !(level > 0.0 && level < 1.0) {
        return Err(Error::input(format!("quantile level {level} outside (0, 1)")));
    }
    let mut chords = one_step_samples(body, x, samples, seed, 0, |_, rec| rec.chord)?;
    chords.sort_by(f64::total_cmp);
    let n = samples as f64;
    let half = Z95 * (n * level * (1.0 - level)).sqrt();
    let lo = ((n * level - half).floor().max(1.0) as usize).min(samples) - 1;
    let hi = ((n * level + half).ceil().max(1.0) as usize).min(samples) - 1;
    Ok(FEstimate {
        level,
        samples,
        f: order_stat(&chords, level),
        ci_lo: chords[lo],
        ci_hi: chords[hi],
        chords,
    })
}

/// Largest radius whose ball around `x` keeps a `gamma` share inside the body.
#[derive(Clone, Debug, Serialize)]
pub struct SGamma {
    pub gamma: f64,
    pub t: f64,
    /// Monte Carlo volume fraction at `t`.
    pub g_t: f64,
    pub se: f64,
    /// Set when `gamma ≥ 1/2`: near a smooth boundary point the fraction
    /// tends to 1/2, so no positive radius qualifies and `t = 0` is returned.
    pub degenerate: bool,
}

/// Volume fractions `g(t) = vol((x + tB) ∩ K)/vol(tB)` estimated with one fixed
/// set of uniform points of the unit ball. For convex `K` containing `x`, a
/// point `x + tz` inside `K` stays inside for all smaller `t`, so the estimate
/// is exactly nonincreasing in `t`.
pub struct VolumeFraction<'a> {
    body: &'a ConvexBody,
    x: Point,
    offsets: Vec<Point>,
}

impl<'a> VolumeFraction<'a> {
    pub fn new(body: &'a ConvexBody, x: &BoundaryPoint, points: usize, seed: u64) -> Self {
        let n = body.dim();
        let chunks = points.div_ceil(CHUNK);
        let offsets = (0..chunks)
            .into_par_iter()
            .flat_map_iter(|c| {
                let mut rng = RngStream::new(seed, c as u64);
                let len = CHUNK.min(points - c * CHUNK);
                (0..len)
                    .map(|_| Point::from_vec(sample_unit_ball(n, &mut rng)))
                    .collect::<Vec<_>>()
            })
            .collect();
        Self {
            body,
            x: x.position.clone(),
            offsets,
        }
    }

    pub fn points(&self) -> usize {
        self.offsets.len()
    }

    pub fn at(&self, t: f64) -> Result<f64> {
        let hits = self
            .offsets
            .par_iter()
            .map(|z| {
                let p = &self.x + z * t;
                self.body.contains(&p).map(usize::from)
            })
            .try_reduce(|| 0, |a, b| Ok(a + b))?;
        Ok(hits as f64 / self.offsets.len() as f64)
    }
}

/// `sup{t ≥ 0 : g(t) ≥ gamma}` by bisection on the common-random-number
/// fraction estimate.
pub fn s_gamma(
    body: &ConvexBody,
    x: &BoundaryPoint,
    gamma: f64,
    mc_points: usize,
    seed: u64,
) -> Result<SGamma> {
    if !(gamma > 0.0 && gamma < 1.0) {
        return Err(Error::input(format!("gamma {gamma} outside (0, 1)")));
    }
    if mc_points < MIN_SAMPLES {
        return Err(Error::input(format!("need at least {MIN_SAMPLES} points")));
    }
    if gamma >= 0.5 {
        return Ok(SGamma {
            gamma,
            t: 0.0,
            g_t: 0.5,
            se: 0.0,
            degenerate: true,
        });
    }
    let g = VolumeFraction::new(body, x, mc_points, seed);
    let mut hi = body.diameter();
    while g.at(hi)? >= gamma {
        hi *= 2.0;
        if !hi.is_finite() {
            return Err(Error::numeric("volume fraction does not fall below gamma"));
        }
    }
    let mut lo = 0.0;
    let mut g_lo = 0.5;
    for _ in 0..200 {
        if hi - lo <= 1e-12 * hi {
            break;
        }
        let mid = 0.5 * (lo + hi);
        let v = g.at(mid)?;
        if v >= gamma {
            lo = mid;
            g_lo = v;
        } else {
            hi = mid;
        }
    }
    if lo > 0.0 {
        g_lo = g.at(lo)?;
    }
    Ok(SGamma {
        gamma,
        t: lo,
        g_t: g_lo,
        se: (g_lo * (1.0 - g_lo) / mc_points as f64).sqrt(),
        degenerate: false,
    })
}

/// Upper bound on the one-step overlap of close pairs, fixed from calibration
/// runs on the unit circle (observed ≈ 0.013 at 10⁵ samples, 64 bins).
pub const OVERLAP_TV_MAX: f64 = 0.9;

/// Radius below which two boundary points count as close for the one-step
/// overlap: `max(F(u), F(v)) / (100 √n)`.
pub fn close_pair_radius(f_u: f64, f_v: f64, n: usize) -> f64 {
    f_u.max(f_v) / (100.0 * (n as f64).sqrt())
}

/// Partition TV between the one-step laws from `u` and from `v`, from
/// `samples` independent steps each.
pub fn overlap_tv(
    body: &ConvexBody,
    u: &BoundaryPoint,
    v: &BoundaryPoint,
    samples: usize,
    partition: &Partition,
    seed: u64,
) -> Result<f64> {
    if samples == 0 {
        return Err(Error::input("need at least one sample"));
    }
    let hist = |x: &BoundaryPoint, base: u64| -> Result<Histogram> {
        let bins = one_step_samples(body, x, samples, seed, base, |y, _| {
            partition.bin_of(y.position.as_slice())
        })?;
        let mut h = Histogram::empty(partition);
        for b in bins {
            h.add(b);
        }
        Ok(h)
    };
    empirical_tv(&hist(u, 0)?, &hist(v, STREAM_SPLIT)?)
}

/// Partition TV to the uniform law of fresh-start replicas at each checkpoint.
#[derive(Clone, Debug, Serialize)]
pub struct MixingCurve {
    pub ks: Vec<u64>,
    pub tv: Vec<f64>,
    /// Delta-method standard error of each TV estimate.
    pub se: Vec<f64>,
    /// `max_b Q̂_0(b)/π(b)`.
    pub warm_start: f64,
    pub replicas: usize,
}

impl MixingCurve {
    /// First checkpoint with TV below `eps`.
    pub fn first_below(&self, eps: f64) -> Option<u64> {
        self.ks.iter().zip(&self.tv).find(|(_, &t)| t < eps).map(|(&k, _)| k)
    }
}

pub const MIN_REPLICAS: usize = 1000;

/// Runs `replicas` independent chains from `config.start` (replica `r` on
/// stream `config.stream + r`, burn-in ignored) and compares the binned law
/// of `X_k` with the uniform masses at every checkpoint `k`.
pub fn mixing_curve(
    config: &ChainConfig,
    partition: &Partition,
    replicas: usize,
    checkpoints: &[u64],
) -> Result<MixingCurve> {
    if replicas < MIN_REPLICAS {
        return Err(Error::input(format!("need at least {MIN_REPLICAS} replicas")));
    }
    config.validate()?;
    let mut ks = checkpoints.to_vec();
    ks.sort_unstable();
    ks.dedup();
    let body = config.body.build()?;
    let start = config.start_point(&body)?;
    let kmax = ks.last().copied().unwrap_or(0);

    // Per replica: start bin, then the bin at each checkpoint.
    let rows = (0..replicas)
        .into_par_iter()
        .map(|r| {
            let rng = RngStream::new(config.seed, config.stream.wrapping_add(r as u64));
            let mut chain = Chain::new(&body, start.clone(), config.law, rng);
            let mut out = Vec::with_capacity(ks.len() + 1);
            out.push(partition.bin_of(start.position.as_slice()));
            let mut next = 0;
            for k in 0..=kmax {
                if k > 0 {
                    chain.step()?;
                }
                while next < ks.len() && ks[next] == k {
                    out.push(partition.bin_of(chain.current().position.as_slice()));
                    next += 1;
                }
            }
            Ok(out)
        })
        .collect::<Result<Vec<Vec<usize>>>>()?;

    let reference = partition.masses();
    let n = replicas as f64;
    let law_at = |col: usize| {
        let mut p = vec![0.0; partition.bins()];
        for row in &rows {
            p[row[col]] += 1.0 / n;
        }
        p
    };
    let q0 = law_at(0);
    let warm_start = q0
        .iter()
        .zip(reference)
        .filter(|(_, &pi)| pi > 0.0)
        .map(|(q, pi)| q / pi)
        .fold(1.0, f64::max);

    let mut tv = Vec::with_capacity(ks.len());
    let mut se = Vec::with_capacity(ks.len());
    for col in 1..=ks.len() {
        let p = law_at(col);
        tv.push(partition::tv_of_masses(&p, reference));
        // TV = Σ s_b p_b + const with s_b = sign(p_b − π_b)/2; multinomial variance.
        let s: Vec<f64> = p
            .iter()
            .zip(reference)
            .map(|(a, b)| 0.5 * (a - b).signum())
            .collect();
        let m1: f64 = s.iter().zip(&p).map(|(s, p)| s * p).sum();
        let m2: f64 = s.iter().zip(&p).map(|(s, p)| s * s * p).sum();
        se.push(((m2 - m1 * m1).max(0.0) / n).sqrt());
    }
    Ok(MixingCurve {
        ks,
        tv,
        se,
        warm_start,
        replicas,
    })
}

/// Long-run share of chain states in a region, with a batch-means error.
#[derive(Clone, Debug, Serialize)]
pub struct FractionEstimate {
    pub fraction: f64,
    pub se: f64,
    pub samples: usize,
    pub batches: usize,
}

pub const BATCHES: usize = 50;

/// Batch-means estimate from a sequence of region indicators.
pub fn fraction_from_hits(hits: &[bool]) -> Result<FractionEstimate> {
    if hits.is_empty() {
        return Err(Error::input("no chain states to average"));
    }
    let batches = BATCHES.min(hits.len());
    let size = hits.len() / batches;
    let means: Vec<f64> = (0..batches)
        .map(|b| {
            let chunk = &hits[b * size..(b + 1) * size];
            chunk.iter().filter(|&&h| h).count() as f64 / size as f64
        })
        .collect();
    let fraction = hits.iter().filter(|&&h| h).count() as f64 / hits.len() as f64;
    let se = if batches > 1 {
        let mean = means.iter().sum::<f64>() / batches as f64;
        let var = means.iter().map(|m| (m - mean).powi(2)).sum::<f64>() / (batches - 1) as f64;
        (var / batches as f64).sqrt()
    } else {
        f64::NAN
    };
    Ok(FractionEstimate {
        fraction,
        se,
        samples: hits.len(),
        batches,
    })
}

/// Fraction of recorded states satisfying `region`.
pub fn boundary_fraction<F>(records: &[StepRecord], region: F) -> Result<FractionEstimate>
where
    F: Fn(&Point) -> bool,
{
    let hits: Vec<bool> = records.iter().map(|r| region(&r.position)).collect();
    fraction_from_hits(&hits)
}

/// Runs `config` and estimates the fraction of its recorded states in `region`
/// without keeping the trajectory.
pub fn boundary_fraction_run<F>(config: &ChainConfig, region: F) -> Result<FractionEstimate>
where
    F: Fn(&Point) -> bool,
{
    let mut hits = Vec::with_capacity(config.record_count() as usize);
    crate::chain::run(config, |rec| {
        hits.push(region(&rec.position));
        Ok(())
    })?;
    fraction_from_hits(&hits)
}
