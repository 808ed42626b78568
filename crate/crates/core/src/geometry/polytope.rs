//! Core polytope `{x : h_i·x ≤ b_i}` behind a rounded polytope.
//!
//! Euclidean projection is solved by enumerating candidate active sets (all
//! subsets of at most `dim` linearly independent facets) and returning the
//! first one that satisfies the KKT conditions. This is exact and cheap for
//! the small facet counts used in experiments; construction refuses
//! polytopes whose candidate count exceeds [`MAX_ACTIVE_SETS`].

use itertools::Itertools;
use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

pub(crate) const MAX_ACTIVE_SETS: usize = 200_000;

const FEAS_TOL: f64 = 1e-11;
const KKT_TOL: f64 = 1e-12;
const GRAM_DET_MIN: f64 = 1e-10;

#[derive(Clone, Debug)]
struct ActiveSet {
    idx: Vec<usize>,
    gram_inv: DMatrix<f64>,
}

#[derive(Clone, Debug)]
pub(crate) struct CorePolytope {
    normals: Vec<DVector<f64>>,
    offsets: Vec<f64>,
    active_sets: Vec<ActiveSet>,
    vertices: Vec<DVector<f64>>,
}

impl CorePolytope {
    /// Normalizes the facet normals, enumerates vertices and rejects empty or
    /// unbounded inputs.
    pub(crate) fn new(dim: usize, normals: &[Vec<f64>], offsets: &[f64]) -> Result<Self> {
        if normals.len() != offsets.len() {
            return Err(Error::input("halfspace normal/offset count mismatch"));
        }
        if normals.len() <= dim {
            return Err(Error::input(format!(
                "a bounded polytope in dimension {dim} needs more than {dim} halfspaces"
            )));
        }
        let mut unit = Vec::with_capacity(normals.len());
        let mut b = Vec::with_capacity(offsets.len());
        for (h, &off) in normals.iter().zip(offsets) {
            if h.len() != dim {
                return Err(Error::input(format!(
                    "halfspace normal has {} entries, expected {dim}",
                    h.len()
                )));
            }
            let v = DVector::from_column_slice(h);
            let norm = v.norm();
            if !(norm.is_finite() && norm > 0.0) || !off.is_finite() {
                return Err(Error::input("halfspace normal must be finite and nonzero"));
            }
            unit.push(v / norm);
            b.push(off / norm);
        }

        let m = unit.len();
        let candidates: usize = (1..=dim).map(|k| binomial(m, k)).sum();
        if candidates > MAX_ACTIVE_SETS {
            return Err(Error::input(format!(
                "{m} halfspaces in dimension {dim} give {candidates} active sets (limit {MAX_ACTIVE_SETS})"
            )));
        }

        let mut active_sets = Vec::new();
        for k in 1..=dim {
            for idx in (0..m).combinations(k) {
                let gram = DMatrix::from_fn(k, k, |i, j| unit[idx[i]].dot(&unit[idx[j]]));
                if gram.determinant() < GRAM_DET_MIN {
                    continue;
                }
                if let Some(gram_inv) = gram.try_inverse() {
                    active_sets.push(ActiveSet { idx, gram_inv });
                }
            }
        }

        let mut poly = Self {
            normals: unit,
            offsets: b,
            active_sets,
            vertices: Vec::new(),
        };
        poly.vertices = poly.enumerate_vertices(dim);
        if poly.vertices.is_empty() {
            return Err(Error::input("polytope is empty or contains a line"));
        }
        if poly.has_recession_direction(dim) {
            return Err(Error::input("polytope is unbounded"));
        }
        Ok(poly)
    }

    pub(crate) fn vertices(&self) -> &[DVector<f64>] {
        &self.vertices
    }

    fn feasible(&self, p: &DVector<f64>, tol: f64) -> bool {
        self.normals
            .iter()
            .zip(&self.offsets)
            .all(|(h, &b)| h.dot(p) <= b + tol)
    }

    /// Euclidean projection onto the polytope.
    pub(crate) fn project(&self, x: &DVector<f64>) -> Result<DVector<f64>> {
        if self.feasible(x, 0.0) {
            return Ok(x.clone());
        }
        let scale = 1.0 + x.amax();
        for set in &self.active_sets {
            let k = set.idx.len();
            let resid = DVector::from_fn(k, |i, _| {
                let j = set.idx[i];
                self.normals[j].dot(x) - self.offsets[j]
            });
            let lambda = &set.gram_inv * resid;
            if lambda.iter().any(|&l| l < -KKT_TOL * scale) {
                continue;
            }
            let mut p = x.clone();
            for (i, &j) in set.idx.iter().enumerate() {
                p.axpy(-lambda[i], &self.normals[j], 1.0);
            }
            if self.feasible(&p, FEAS_TOL * scale) {
                return Ok(p);
            }
        }
        Err(Error::numeric("no active set satisfies the projection KKT conditions"))
    }

    fn enumerate_vertices(&self, dim: usize) -> Vec<DVector<f64>> {
        let mut out: Vec<DVector<f64>> = Vec::new();
        for set in self.active_sets.iter().filter(|s| s.idx.len() == dim) {
            let a = DMatrix::from_fn(dim, dim, |i, j| self.normals[set.idx[i]][j]);
            let b = DVector::from_fn(dim, |i, _| self.offsets[set.idx[i]]);
            let Some(v) = a.lu().solve(&b) else { continue };
            let scale = 1.0 + v.amax();
            if self.feasible(&v, 1e-9 * scale) && !out.iter().any(|u| (u - &v).norm() < 1e-9 * scale)
            {
                out.push(v);
            }
        }
        out
    }

    /// True if some nonzero `u` has `h_i·u ≤ 0` for all facets. Extreme rays of
    /// the recession cone lie on `dim − 1` independent tight facets, so checking
    /// those null directions suffices once the polytope is known to be pointed.
    fn has_recession_direction(&self, dim: usize) -> bool {
        for set in self.active_sets.iter().filter(|s| s.idx.len() == dim - 1) {
            let u = DVector::from_fn(dim, |j, _| {
                let mut m = DMatrix::zeros(dim, dim);
                for (r, &f) in set.idx.iter().enumerate() {
                    m.set_row(r, &self.normals[f].transpose());
                }
                m[(dim - 1, j)] = 1.0;
                m.determinant()
            });
            let norm = u.norm();
            if norm < 1e-12 {
                continue;
            }
            let u = u / norm;
            for sign in [1.0, -1.0] {
                if self.normals.iter().all(|h| sign * h.dot(&u) <= 1e-12) {
                    return true;
                }
            }
        }
        false
    }
}

fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: usize = 1;
    for i in 0..k {
        acc = acc.saturating_mul(n - i) / (i + 1);
    }
    acc
}
