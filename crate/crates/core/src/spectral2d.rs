//! Equal-arclength discretization of the planar one-step kernel, with
//! stationary vector, spectrum and conductance estimates.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rayon::prelude::*;
use serde::Serialize;

use crate::chain::kernel_constant;
use crate::curve2d::PlanarCurve;
use crate::error::{Error, Result};
use crate::geometry::{BodySpec, ConvexBody};

/// Gauss nodes per bin for bin pairs at most `NEAR_BAND` apart (cyclically).
pub const NEAR_DIAGONAL_NODES: usize = 16;
/// Close to a flat/arc junction the kernel varies on the scale of the
/// distance to the corner, so a single neighbour is not enough.
pub const NEAR_BAND: usize = 3;
pub const DEFAULT_QUAD_POINTS: usize = 4;
const MAX_POWER_ITERS: usize = 1_000_000;

/// Gauss–Legendre nodes and weights on `[0, 1]`.
pub fn gauss_legendre(q: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(q >= 1);
    let mut nodes = vec![0.0; q];
    let mut weights = vec![0.0; q];
    for i in 0..q {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (q as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            // Legendre recurrence for P_q and its derivative at x.
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=q {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            let pq = if q == 1 { x } else { p1 };
            let pm = if q == 1 { 1.0 } else { p0 };
            dp = q as f64 * (x * pq - pm) / (x * x - 1.0);
            let dx = pq / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        nodes[i] = 0.5 * (1.0 - x);
        weights[i] = 1.0 / ((1.0 - x * x) * dp * dp);
    }
    (nodes, weights)
}

/// Row-stochastic matrix of bin-to-bin transition probabilities.
#[derive(Clone, Debug)]
pub struct TransitionMatrix {
    pub body: BodySpec,
    pub bin_lengths: Vec<f64>,
    pub matrix: DMatrix<f64>,
}

type Node = (f64, [f64; 2], [f64; 2]);

/// Per-bin quadrature nodes `(weight, position, inward normal)`, weights
/// summing to 1 over each bin. Bins containing a piece junction are split
/// there, each part getting its own Gauss rule, so the kernel is smooth on
/// every sub-interval.
struct NodeSet {
    bins: Vec<Vec<Node>>,
}

impl NodeSet {
    fn new(curve: &PlanarCurve, m: usize, q: usize) -> Self {
        let (nodes, weights) = gauss_legendre(q);
        let width = curve.length() / m as f64;
        let breaks = curve.breakpoints();
        let bins = (0..m)
            .map(|i| {
                let (lo, hi) = (i as f64 * width, (i + 1) as f64 * width);
                let mut cuts = vec![lo];
                cuts.extend(breaks.iter().copied().filter(|&b| b > lo + 1e-12 * width && b < hi - 1e-12 * width));
                cuts.push(hi);
                let mut out = Vec::with_capacity(q * (cuts.len() - 1));
                for seg in cuts.windows(2) {
                    let len = seg[1] - seg[0];
                    for (t, w) in nodes.iter().zip(&weights) {
                        let (pos, normal) = curve.point_raw(seg[0] + t * len);
                        out.push((w * len / width, pos, normal));
                    }
                }
                out
            })
            .collect();
        Self { bins }
    }
}

fn kernel2d(u: &Node, v: &Node) -> f64 {
    let d = [v.1[0] - u.1[0], v.1[1] - u.1[1]];
    let len = (d[0] * d[0] + d[1] * d[1]).sqrt();
    if !(len > 0.0) {
        return 0.0;
    }
    let c_uv = ((u.2[0] * d[0] + u.2[1] * d[1]) / len).max(0.0);
    let c_vu = (-(v.2[0] * d[0] + v.2[1] * d[1]) / len).max(0.0);
    c_uv * c_vu / len
}

fn bin_pair_integral(set: &NodeSet, i: usize, j: usize) -> f64 {
    let mut acc = 0.0;
    for u in &set.bins[i] {
        for v in &set.bins[j] {
            acc += u.0 * v.0 * kernel2d(u, v);
        }
    }
    acc
}

/// Assembles `P_ij ≈ (1/ℓ_i) ∫_{bin i} ∫_{bin j} p(u, v) dv du`. Off-diagonal
/// entries are computed once per unordered pair, so `ℓ_i P_ij = ℓ_j P_ji`
/// holds exactly; the diagonal takes the complement of the row.
pub fn build_transition_matrix(body: &ConvexBody, m: usize, quad_points: usize) -> Result<TransitionMatrix> {
    if body.dim() != 2 {
        return Err(Error::input(format!(
            "transition matrices need a planar body, got dimension {}",
            body.dim()
        )));
    }
    if m < 8 {
        return Err(Error::input("need at least 8 bins"));
    }
    if quad_points == 0 {
        return Err(Error::input("need at least one quadrature point"));
    }
    let curve = PlanarCurve::new(body)?;
    let width = curve.length() / m as f64;
    let far = NodeSet::new(&curve, m, quad_points);
    let near = NodeSet::new(&curve, m, quad_points.max(NEAR_DIAGONAL_NODES));
    // P_ij = (1/ℓ) · ℓ² Σ w w p  with the 2D kernel constant 1/vol(B¹) = 1/2.
    let scale = width * kernel_constant(2);

    let upper: Vec<Vec<f64>> = (0..m)
        .into_par_iter()
        .map(|i| {
            ((i + 1)..m)
                .map(|j| {
                    let gap = j - i;
                    let set = if gap.min(m - gap) <= NEAR_BAND { &near } else { &far };
                    scale * bin_pair_integral(set, i, j)
                })
                .collect()
        })
        .collect();

    let mut matrix = DMatrix::zeros(m, m);
    for (i, row) in upper.iter().enumerate() {
        for (off, &v) in row.iter().enumerate() {
            let j = i + 1 + off;
            matrix[(i, j)] = v;
            matrix[(j, i)] = v;
        }
    }
    for i in 0..m {
        let off: f64 = (0..m).filter(|&j| j != i).map(|j| matrix[(i, j)]).sum();
        matrix[(i, i)] = (1.0 - off).max(0.0);
    }
    Ok(TransitionMatrix {
        body: body.spec().clone(),
        bin_lengths: vec![width; m],
        matrix,
    })
}

impl TransitionMatrix {
    pub fn bins(&self) -> usize {
        self.bin_lengths.len()
    }

    /// Bin measure normalized to a probability vector.
    pub fn bin_measure(&self) -> Vec<f64> {
        let total: f64 = self.bin_lengths.iter().sum();
        self.bin_lengths.iter().map(|l| l / total).collect()
    }

    pub fn max_row_sum_error(&self) -> f64 {
        self.matrix
            .row_iter()
            .map(|r| (r.sum() - 1.0).abs())
            .fold(0.0, f64::max)
    }

    pub fn max_detailed_balance_error(&self) -> f64 {
        let m = self.bins();
        let mut worst: f64 = 0.0;
        for i in 0..m {
            for j in (i + 1)..m {
                let e = self.bin_lengths[i] * self.matrix[(i, j)] - self.bin_lengths[j] * self.matrix[(j, i)];
                worst = worst.max(e.abs());
            }
        }
        worst
    }

    pub fn min_entry(&self) -> f64 {
        self.matrix.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Checks row-stochasticity, nonnegativity and detailed balance to `tol`.
    pub fn check_invariants(&self, tol: f64) -> Result<()> {
        if self.min_entry() < 0.0 {
            return Err(Error::numeric("negative transition probability"));
        }
        let rows = self.max_row_sum_error();
        if rows > tol {
            return Err(Error::numeric(format!("row sums off by {rows:e}")));
        }
        let db = self.max_detailed_balance_error();
        if db > tol {
            return Err(Error::numeric(format!("detailed balance off by {db:e}")));
        }
        Ok(())
    }
}

/// Left fixed point of `P` by power iteration on the lazy chain `(I + P)/2`,
/// which shares its stationary vector and has no eigenvalue near −1.
pub fn stationary_distribution(p: &TransitionMatrix) -> Result<Vec<f64>> {
    let m = p.bins();
    let pt = p.matrix.transpose();
    let mut pi = DVector::from_fn(m, |i, _| if i == 0 { 1.0 } else { 0.0 });
    for _ in 0..MAX_POWER_ITERS {
        let mut next = &pt * &pi;
        let total = next.sum();
        next /= total;
        if (&next - &pi).lp_norm(1) < 1e-12 {
            return Ok(next.iter().copied().collect());
        }
        pi = (next + &pi) * 0.5;
    }
    Err(Error::numeric(format!(
        "power iteration did not converge in {MAX_POWER_ITERS} iterations"
    )))
}

/// Spectrum and conductance summary.
#[derive(Clone, Debug, Serialize)]
pub struct SpectralSummary {
    /// `λ_1 = 1` first, then by decreasing modulus.
    pub eigenvalues: Vec<f64>,
    /// `1 − |λ_2|` with `λ_2` the second eigenvalue in the order above.
    pub spectral_gap: f64,
    /// `1 − λ_max`, `λ_max` the largest eigenvalue below 1 (the Cheeger gap).
    pub cheeger_gap: f64,
    /// `cheeger_gap / 2`.
    pub conductance_lower: f64,
    /// `√(2·cheeger_gap)`.
    pub conductance_upper: f64,
    /// Minimum conductance over contiguous arcs of stationary mass ≤ 1/2.
    pub sweep_conductance: f64,
    /// `(arc length in bins, min conductance over arcs of that length)`.
    pub sweep: Vec<(usize, f64)>,
}

impl SpectralSummary {
    pub fn cheeger_consistent(&self, slack: f64) -> bool {
        self.conductance_lower <= self.sweep_conductance + slack
            && self.sweep_conductance <= self.conductance_upper + slack
    }
}

pub fn spectral_summary(p: &TransitionMatrix) -> Result<SpectralSummary> {
    let m = p.bins();
    let measure = p.bin_measure();
    let root: Vec<f64> = measure.iter().map(|v| v.sqrt()).collect();
    let mut s = DMatrix::from_fn(m, m, |i, j| root[i] * p.matrix[(i, j)] / root[j]);
    s = (&s + s.transpose()) * 0.5;
    let eig = SymmetricEigen::try_new(s, 1e-14, 10_000)
        .ok_or_else(|| Error::numeric("symmetric eigen solver did not converge"))?;
    let mut values: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    values.sort_by(|a, b| b.total_cmp(a));
    let top = values[0];
    let mut rest: Vec<f64> = values[1..].to_vec();
    rest.sort_by(|a, b| b.abs().total_cmp(&a.abs()));
    let second_signed = values.get(1).copied().unwrap_or(0.0);
    let spectral_gap = 1.0 - rest.first().map_or(0.0, |v| v.abs());
    let cheeger_gap = 1.0 - second_signed;
    let mut eigenvalues = vec![top];
    eigenvalues.extend(rest);

    let sweep = sweep_cuts(p, &measure);
    let sweep_conductance = sweep.iter().map(|s| s.1).fold(f64::INFINITY, f64::min);
    Ok(SpectralSummary {
        eigenvalues,
        spectral_gap,
        cheeger_gap,
        conductance_lower: cheeger_gap / 2.0,
        conductance_upper: (2.0 * cheeger_gap).sqrt(),
        sweep_conductance,
        sweep,
    })
}

/// Conductance of every contiguous arc with stationary mass in `(0, 1/2]`,
/// grown bin by bin from each start. Uses reversibility:
/// `Q(A ∪ b) = Q(A) − π_b P(b, A) + π_b P(b, (A ∪ b)^c)`.
fn sweep_cuts(p: &TransitionMatrix, pi: &[f64]) -> Vec<(usize, f64)> {
    let m = p.bins();
    let prefix: Vec<Vec<f64>> = (0..m)
        .map(|b| {
            let mut acc = Vec::with_capacity(2 * m + 1);
            acc.push(0.0);
            let mut s = 0.0;
            for t in 0..2 * m {
                s += p.matrix[(b, t % m)];
                acc.push(s);
            }
            acc
        })
        .collect();
    let row_total: Vec<f64> = prefix.iter().map(|r| r[m]).collect();

    let per_start: Vec<Vec<(usize, f64)>> = (0..m)
        .into_par_iter()
        .map(|a| {
            let mut out = Vec::new();
            let mut flow = 0.0;
            let mut mass = 0.0;
            for len in 1..m {
                let b = (a + len - 1) % m;
                if mass + pi[b] > 0.5 + 1e-12 {
                    break;
                }
                // A = [a, a + len − 1) before adding b.
                let into_a = prefix[b][a + len - 1] - prefix[b][a];
                let self_loop = p.matrix[(b, b)];
                flow += -pi[b] * into_a + pi[b] * (row_total[b] - into_a - self_loop);
                mass += pi[b];
                out.push((len, flow / mass));
            }
            out
        })
        .collect();

    let mut best = vec![f64::INFINITY; m];
    for row in per_start {
        for (len, phi) in row {
            best[len] = best[len].min(phi);
        }
    }
    best.iter()
        .enumerate()
        .filter(|(_, v)| v.is_finite())
        .map(|(len, &v)| (len, v))
        .collect()
}
