//! Arclength parametrization of planar convex boundaries.
//!
//! Disks, stadiums and rounded polygons are offset curves of a convex polygon
//! and are parametrized exactly, piece by piece (circular arcs at vertices,
//! translated edges between them). Ellipses use a composite Simpson table of
//! the arclength in the eccentric angle, inverted by bisection.

use std::f64::consts::TAU;

use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::geometry::{BoundaryPoint, ConvexBody, PlanarCore};

const ELLIPSE_PANELS: usize = 4096;

#[derive(Clone, Debug)]
enum Piece {
    Arc {
        center: [f64; 2],
        radius: f64,
        angle0: f64,
        sweep: f64,
    },
    Edge {
        start: [f64; 2],
        dir: [f64; 2],
        len: f64,
        normal_out: [f64; 2],
    },
}

impl Piece {
    fn len(&self) -> f64 {
        match self {
            Piece::Arc { radius, sweep, .. } => radius * sweep,
            Piece::Edge { len, .. } => *len,
        }
    }

    /// Position and inward normal at local arclength `s`.
    fn eval(&self, s: f64) -> ([f64; 2], [f64; 2]) {
        match self {
            Piece::Arc {
                center,
                radius,
                angle0,
                ..
            } => {
                let a = angle0 + s / radius;
                let (sin, cos) = a.sin_cos();
                ([center[0] + radius * cos, center[1] + radius * sin], [-cos, -sin])
            }
            Piece::Edge {
                start,
                dir,
                normal_out,
                ..
            } => (
                [start[0] + s * dir[0], start[1] + s * dir[1]],
                [-normal_out[0], -normal_out[1]],
            ),
        }
    }

    /// Local arclength of the closest point on this piece, and its distance.
    fn locate(&self, x: [f64; 2]) -> (f64, f64) {
        match self {
            Piece::Arc {
                center,
                radius,
                angle0,
                sweep,
            } => {
                let (dx, dy) = (x[0] - center[0], x[1] - center[1]);
                let rel = (dy.atan2(dx) - angle0).rem_euclid(TAU);
                let local = if rel <= *sweep {
                    rel
                } else if rel - sweep < TAU - rel {
                    *sweep
                } else {
                    0.0
                };
                let (p, _) = self.eval(local * radius);
                (local * radius, dist(p, x))
            }
            Piece::Edge { start, dir, len, .. } => {
                let t = ((x[0] - start[0]) * dir[0] + (x[1] - start[1]) * dir[1]).clamp(0.0, *len);
                let (p, _) = self.eval(t);
                (t, dist(p, x))
            }
        }
    }
}

fn dist(a: [f64; 2], b: [f64; 2]) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt()
}

#[derive(Clone, Debug)]
struct OffsetCurve {
    pieces: Vec<Piece>,
    starts: Vec<f64>,
}

impl OffsetCurve {
    fn new(core: &PlanarCore) -> Self {
        let v = &core.vertices;
        let r = core.radius;
        let k = v.len();
        let mut pieces = Vec::new();
        if k == 1 {
            pieces.push(Piece::Arc {
                center: v[0],
                radius: r,
                angle0: 0.0,
                sweep: TAU,
            });
        } else {
            let edge_normal = |i: usize| {
                let a = v[i];
                let b = v[(i + 1) % k];
                let len = dist(a, b);
                let dir = [(b[0] - a[0]) / len, (b[1] - a[1]) / len];
                (dir, [dir[1], -dir[0]], len)
            };
            for i in 0..k {
                let (_, n_in, _) = edge_normal((i + k - 1) % k);
                let (dir, n_out, len) = edge_normal(i);
                let a_in = n_in[1].atan2(n_in[0]);
                let a_out = n_out[1].atan2(n_out[0]);
                let mut sweep = (a_out - a_in).rem_euclid(TAU);
                if sweep == 0.0 {
                    sweep = TAU;
                }
                if sweep < TAU - 1e-15 && sweep > 1e-15 {
                    pieces.push(Piece::Arc {
                        center: v[i],
                        radius: r,
                        angle0: a_in,
                        sweep,
                    });
                }
                pieces.push(Piece::Edge {
                    start: [v[i][0] + r * n_out[0], v[i][1] + r * n_out[1]],
                    dir,
                    len,
                    normal_out: n_out,
                });
            }
        }
        let mut starts = Vec::with_capacity(pieces.len());
        let mut acc = 0.0;
        for p in &pieces {
            starts.push(acc);
            acc += p.len();
        }
        Self { pieces, starts }
    }

    fn length(&self) -> f64 {
        self.starts.last().copied().unwrap_or(0.0) + self.pieces.last().map_or(0.0, Piece::len)
    }

    fn eval(&self, s: f64) -> ([f64; 2], [f64; 2]) {
        let i = match self.starts.partition_point(|&st| st <= s) {
            0 => 0,
            j => j - 1,
        };
        let piece = &self.pieces[i];
        piece.eval((s - self.starts[i]).min(piece.len()))
    }

    fn locate(&self, x: [f64; 2]) -> f64 {
        let mut best = (f64::INFINITY, 0.0);
        for (piece, start) in self.pieces.iter().zip(&self.starts) {
            let (local, d) = piece.locate(x);
            if d < best.0 {
                best = (d, start + local);
            }
        }
        best.1
    }
}

#[derive(Clone, Debug)]
struct EllipseTable {
    a: f64,
    b: f64,
    cumulative: Vec<f64>,
}

fn ellipse_speed(a: f64, b: f64, theta: f64) -> f64 {
    let (s, c) = theta.sin_cos();
    (a * a * s * s + b * b * c * c).sqrt()
}

fn simpson(a: f64, b: f64, lo: f64, hi: f64) -> f64 {
    let mid = 0.5 * (lo + hi);
    (hi - lo) / 6.0
        * (ellipse_speed(a, b, lo) + 4.0 * ellipse_speed(a, b, mid) + ellipse_speed(a, b, hi))
}

impl EllipseTable {
    fn new(a: f64, b: f64) -> Self {
        let h = TAU / ELLIPSE_PANELS as f64;
        let mut cumulative = Vec::with_capacity(ELLIPSE_PANELS + 1);
        let mut acc = 0.0;
        cumulative.push(0.0);
        for j in 0..ELLIPSE_PANELS {
            acc += simpson(a, b, j as f64 * h, (j + 1) as f64 * h);
            cumulative.push(acc);
        }
        Self { a, b, cumulative }
    }

    fn length(&self) -> f64 {
        self.cumulative[ELLIPSE_PANELS]
    }

    fn arclength_at(&self, theta: f64) -> f64 {
        let h = TAU / ELLIPSE_PANELS as f64;
        let theta = theta.rem_euclid(TAU);
        let j = ((theta / h) as usize).min(ELLIPSE_PANELS - 1);
        self.cumulative[j] + simpson(self.a, self.b, j as f64 * h, theta)
    }

    fn theta_at(&self, s: f64) -> f64 {
        let h = TAU / ELLIPSE_PANELS as f64;
        let j = self.cumulative.partition_point(|&c| c <= s).clamp(1, ELLIPSE_PANELS) - 1;
        let (mut lo, mut hi) = (j as f64 * h, (j + 1) as f64 * h);
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            if self.arclength_at(mid) < s {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    fn eval(&self, s: f64) -> ([f64; 2], [f64; 2]) {
        let theta = self.theta_at(s);
        let (sin, cos) = theta.sin_cos();
        let p = [self.a * cos, self.b * sin];
        let g = [p[0] / (self.a * self.a), p[1] / (self.b * self.b)];
        let norm = (g[0] * g[0] + g[1] * g[1]).sqrt();
        (p, [-g[0] / norm, -g[1] / norm])
    }

    fn locate(&self, x: [f64; 2]) -> f64 {
        self.arclength_at((x[1] / self.b).atan2(x[0] / self.a))
    }
}

/// Perimeter of the ellipse with semi-axes `a`, `b`.
pub fn ellipse_perimeter(a: f64, b: f64) -> f64 {
    EllipseTable::new(a, b).length()
}

#[derive(Clone, Debug)]
enum Kind {
    Offset(OffsetCurve),
    Ellipse(EllipseTable),
}

/// Closed planar boundary parametrized by arclength `s ∈ [0, length)`,
/// counter-clockwise.
#[derive(Clone, Debug)]
pub struct PlanarCurve {
    kind: Kind,
    length: f64,
}

impl PlanarCurve {
    pub fn new(body: &ConvexBody) -> Result<Self> {
        if body.dim() != 2 {
            return Err(Error::input(format!(
                "arclength parametrization needs a planar body, got dimension {}",
                body.dim()
            )));
        }
        let kind = if let Some(core) = body.planar_core() {
            Kind::Offset(OffsetCurve::new(&core))
        } else if let Some((a, b)) = body.ellipse_axes() {
            Kind::Ellipse(EllipseTable::new(a, b))
        } else {
            return Err(Error::input("no planar parametrization for this body"));
        };
        let length = match &kind {
            Kind::Offset(c) => c.length(),
            Kind::Ellipse(e) => e.length(),
        };
        Ok(Self { kind, length })
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    fn eval(&self, s: f64) -> ([f64; 2], [f64; 2]) {
        let s = s.rem_euclid(self.length);
        match &self.kind {
            Kind::Offset(c) => c.eval(s),
            Kind::Ellipse(e) => e.eval(s),
        }
    }

    /// Boundary point at arclength `s` (taken modulo the length).
    pub fn point_at(&self, s: f64) -> BoundaryPoint {
        let (p, n) = self.eval(s);
        BoundaryPoint {
            position: DVector::from_vec(p.to_vec()),
            normal: DVector::from_vec(n.to_vec()),
        }
    }

    /// Arclengths where the parametrization switches pieces (curvature jumps).
    pub fn breakpoints(&self) -> Vec<f64> {
        match &self.kind {
            Kind::Offset(c) if c.pieces.len() > 1 => c.starts.clone(),
            _ => Vec::new(),
        }
    }

    pub(crate) fn point_raw(&self, s: f64) -> ([f64; 2], [f64; 2]) {
        self.eval(s)
    }

    /// Arclength coordinate of a boundary point, in `[0, length)`.
    pub fn arclength_of(&self, x: &[f64]) -> f64 {
        let p = [x[0], x[1]];
        let s = match &self.kind {
            Kind::Offset(c) => c.locate(p),
            Kind::Ellipse(e) => e.locate(p),
        };
        s.rem_euclid(self.length)
    }
}
