//! The stochastic billiard chain and its one-step kernel.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};
use crate::geometry::{BodySpec, BoundaryPoint, ConvexBody, Point};
use crate::sampler::{sample_direction, DirectionLaw, RngStream};

/// Directions with `w·n_x` below this are redrawn.
pub const GRAZING_COS: f64 = 1e-12;

/// Where a chain starts.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StartRule {
    /// The first-coordinate maximizer of the body.
    #[default]
    SeedPoint,
    /// An explicit boundary point.
    At(Vec<f64>),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChainConfig {
    pub body: BodySpec,
    #[serde(default)]
    pub start: StartRule,
    /// Recorded steps after burn-in (before thinning).
    pub steps: u64,
    #[serde(default = "default_burn_in")]
    pub burn_in: u64,
    #[serde(default = "default_thin")]
    pub thin: u64,
    pub seed: u64,
    #[serde(default)]
    pub stream: u64,
    #[serde(default)]
    pub law: DirectionLaw,
}

fn default_burn_in() -> u64 {
    1000
}

fn default_thin() -> u64 {
    1
}

impl ChainConfig {
    pub fn new(body: BodySpec, steps: u64, seed: u64) -> Self {
        Self {
            body,
            start: StartRule::SeedPoint,
            steps,
            burn_in: default_burn_in(),
            thin: default_thin(),
            seed,
            stream: 0,
            law: DirectionLaw::Cosine,
        }
    }

    pub fn with_burn_in(mut self, burn_in: u64) -> Self {
        self.burn_in = burn_in;
        self
    }

    pub fn with_thin(mut self, thin: u64) -> Self {
        self.thin = thin;
        self
    }

    pub fn with_stream(mut self, stream: u64) -> Self {
        self.stream = stream;
        self
    }

    pub fn with_start(mut self, start: StartRule) -> Self {
        self.start = start;
        self
    }

    pub fn with_law(mut self, law: DirectionLaw) -> Self {
        self.law = law;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.thin == 0 {
            return Err(Error::input("thin must be ≥ 1"));
        }
        Ok(())
    }

    /// Number of records `run` will emit.
    pub fn record_count(&self) -> u64 {
        self.steps / self.thin.max(1)
    }

    pub fn start_point(&self, body: &ConvexBody) -> Result<BoundaryPoint> {
        match &self.start {
            StartRule::SeedPoint => Ok(body.seed_point()),
            StartRule::At(x) => body.boundary_point(Point::from_column_slice(x)),
        }
    }
}

/// One transition `x → y`.
#[derive(Clone, Debug, PartialEq)]
pub struct StepRecord {
    /// Step index counted from the start state (burn-in included), 1-based.
    pub k: u64,
    pub position: Point,
    pub chord: f64,
    /// `cos φ_xy = n_x·(y − x)/‖y − x‖`.
    pub cos_out: f64,
    /// `cos φ_yx = n_y·(x − y)/‖x − y‖`.
    pub cos_in: f64,
}

/// Serializable chain state. Resuming from it continues the exact sequence.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChainState {
    pub position: Vec<f64>,
    pub k: u64,
    pub seed: u64,
    pub stream: u64,
    pub word_pos: u128,
    pub law: DirectionLaw,
}

/// A single replica, borrowing its body.
#[derive(Clone, Debug)]
pub struct Chain<'a> {
    body: &'a ConvexBody,
    current: BoundaryPoint,
    law: DirectionLaw,
    rng: RngStream,
    k: u64,
}

impl<'a> Chain<'a> {
    pub fn new(body: &'a ConvexBody, start: BoundaryPoint, law: DirectionLaw, rng: RngStream) -> Self {
        Self {
            body,
            current: start,
            law,
            rng,
            k: 0,
        }
    }

    pub fn resume(body: &'a ConvexBody, state: &ChainState) -> Result<Self> {
        let current = body.boundary_point(Point::from_column_slice(&state.position))?;
        Ok(Self {
            body,
            current,
            law: state.law,
            rng: RngStream::resume(state.seed, state.stream, state.word_pos),
            k: state.k,
        })
    }

    pub fn current(&self) -> &BoundaryPoint {
        &self.current
    }

    pub fn steps_taken(&self) -> u64 {
        self.k
    }

    pub fn state(&self) -> ChainState {
        ChainState {
            position: self.current.position.as_slice().to_vec(),
            k: self.k,
            seed: self.rng.seed(),
            stream: self.rng.stream(),
            word_pos: self.rng.word_pos(),
            law: self.law,
        }
    }

    /// Advances one step and reports the chord taken.
    pub fn step(&mut self) -> Result<StepRecord> {
        let record = step(self.body, &self.current, self.law, &mut self.rng)?;
        self.k += 1;
        let StepOutcome { next, mut record } = record;
        record.k = self.k;
        self.current = next;
        Ok(record)
    }
}

struct StepOutcome {
    next: BoundaryPoint,
    record: StepRecord,
}

fn step(
    body: &ConvexBody,
    x: &BoundaryPoint,
    law: DirectionLaw,
    rng: &mut RngStream,
) -> Result<StepOutcome> {
    let w = loop {
        let mut w = sample_direction(x, law, rng);
        let mut c = w.dot(&x.normal);
        if c < 0.0 && law.is_two_sided() {
            // The chord is the same line; travel along the inward half.
            w = -w;
            c = -c;
        }
        if c >= GRAZING_COS {
            break w;
        }
    };
    let exit = body.ray_exit(x, &w)?;
    let y = exit.point;
    let diff = &y.position - &x.position;
    let chord = diff.norm();
    let record = StepRecord {
        k: 0,
        position: y.position.clone(),
        chord,
        cos_out: x.normal.dot(&diff) / chord,
        cos_in: -y.normal.dot(&diff) / chord,
    };
    Ok(StepOutcome { next: y, record })
}

/// One transition from `x`, without chain bookkeeping.
pub fn single_step(body: &ConvexBody, x: &BoundaryPoint, rng: &mut RngStream) -> Result<(BoundaryPoint, StepRecord)> {
    let StepOutcome { next, mut record } = step(body, x, DirectionLaw::Cosine, rng)?;
    record.k = 1;
    Ok((next, record))
}

/// Runs `config`, passing each kept record to `sink`, and returns the final
/// state for checkpointing.
pub fn run<F>(config: &ChainConfig, mut sink: F) -> Result<ChainState>
where
    F: FnMut(&StepRecord) -> Result<()>,
{
    config.validate()?;
    let body = config.body.build()?;
    let start = config.start_point(&body)?;
    let mut chain = Chain::new(&body, start, config.law, RngStream::new(config.seed, config.stream));
    for _ in 0..config.burn_in {
        chain.step()?;
    }
    for i in 1..=config.steps {
        let rec = chain.step()?;
        if i % config.thin == 0 {
            sink(&rec)?;
        }
    }
    Ok(chain.state())
}

/// [`run`] collecting records into memory.
pub fn run_collect(config: &ChainConfig) -> Result<(Vec<StepRecord>, ChainState)> {
    let mut out = Vec::with_capacity(config.record_count() as usize);
    let state = run(config, |r| {
        out.push(r.clone());
        Ok(())
    })?;
    Ok((out, state))
}

/// Continues a checkpointed chain for `steps` more steps.
pub fn resume_run<F>(body: &ConvexBody, state: &ChainState, steps: u64, thin: u64, mut sink: F) -> Result<ChainState>
where
    F: FnMut(&StepRecord) -> Result<()>,
{
    if thin == 0 {
        return Err(Error::input("thin must be ≥ 1"));
    }
    let mut chain = Chain::resume(body, state)?;
    for i in 1..=steps {
        let rec = chain.step()?;
        if i % thin == 0 {
            sink(&rec)?;
        }
    }
    Ok(chain.state())
}

/// Scaling applied to the raw kernel.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum KernelNormalization {
    /// `cos φ_uv cos φ_vu / ‖u − v‖^{n−1}`.
    Unnormalized,
    /// Transition density with respect to surface measure `dv`: the raw
    /// kernel divided by `vol(B^{n−1}) = π^{(n−1)/2}/Γ((n+1)/2)`.
    SurfaceMeasure,
}

/// `1/vol(B^{n−1})`, the cosine-law normalizer.
pub fn kernel_constant(n: usize) -> f64 {
    let n = n as f64;
    (ln_gamma((n + 1.0) / 2.0) - (n - 1.0) / 2.0 * PI.ln()).exp()
}

/// One-step transition kernel between two boundary points. Symmetric in
/// `(u, v)` bit for bit.
pub fn kernel_density(
    body: &ConvexBody,
    u: &BoundaryPoint,
    v: &BoundaryPoint,
    normalization: KernelNormalization,
) -> Result<f64> {
    let n = body.dim();
    if u.dim() != n || v.dim() != n {
        return Err(Error::input("boundary point dimension does not match the body"));
    }
    let diff = &v.position - &u.position;
    let d = diff.norm();
    if !(d > 0.0) {
        return Err(Error::Singularity);
    }
    let cos_uv = (u.normal.dot(&diff) / d).max(0.0);
    let cos_vu = (-(v.normal.dot(&diff)) / d).max(0.0);
    let raw = cos_uv * cos_vu / d.powi(n as i32 - 1);
    Ok(match normalization {
        KernelNormalization::Unnormalized => raw,
        KernelNormalization::SurfaceMeasure => raw * kernel_constant(n),
    })
}
