//! Curvature-bounded convex bodies and their exact geometric oracles.
//!
//! Every body carries a level function `g` that is convex along lines,
//! negative inside, zero on the boundary:
//!
//! * ball: `‖x − c‖ − r`
//! * ellipsoid: `√(Σ x_i²/a_i²) − 1`
//! * capsule and rounded polytope: `dist(x, core) − r`
//!
//! Ray exits use a closed form for quadrics and bracketed bisection otherwise.

mod frame;
mod polytope;
pub mod witness;

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use frame::TangentFrame;
use polytope::CorePolytope;

pub type Point = DVector<f64>;

/// Absolute tolerance on `|g(x)|` for a point to count as on the boundary.
pub const BOUNDARY_TOL: f64 = 1e-9;
/// Largest residual accepted by [`ConvexBody::project_to_boundary`].
pub const PROJECTION_REACH: f64 = 1e-6;

const BISECTION_TOL: f64 = 1e-13;

/// One halfspace `{x : normal·x ≤ offset}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Halfspace {
    pub normal: Vec<f64>,
    pub offset: f64,
}

/// Parametric description of a body, as read from a body file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum BodySpec {
    Ball {
        dim: usize,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        center: Option<Vec<f64>>,
        radius: f64,
    },
    /// Axis-aligned, centered at the origin.
    Ellipsoid { dim: usize, semi_axes: Vec<f64> },
    /// Segment `[−L, L] × {0}^{n−1}` plus a ball of radius `radius`.
    Capsule {
        dim: usize,
        half_length: f64,
        radius: f64,
    },
    /// Polytope `{x : h_i·x ≤ b_i}` plus a ball of radius `radius`.
    RoundedPolytope {
        dim: usize,
        halfspaces: Vec<Halfspace>,
        radius: f64,
    },
}

impl BodySpec {
    pub fn ball(dim: usize, radius: f64) -> Self {
        Self::Ball {
            dim,
            center: None,
            radius,
        }
    }

    pub fn unit_ball(dim: usize) -> Self {
        Self::ball(dim, 1.0)
    }

    pub fn ellipsoid(semi_axes: &[f64]) -> Self {
        Self::Ellipsoid {
            dim: semi_axes.len(),
            semi_axes: semi_axes.to_vec(),
        }
    }

    pub fn capsule(dim: usize, half_length: f64, radius: f64) -> Self {
        Self::Capsule {
            dim,
            half_length,
            radius,
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            Self::Ball { dim, .. }
            | Self::Ellipsoid { dim, .. }
            | Self::Capsule { dim, .. }
            | Self::RoundedPolytope { dim, .. } => *dim,
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::input(format!("body spec: {e}")))
    }

    pub fn build(&self) -> Result<ConvexBody> {
        ConvexBody::new(self.clone())
    }
}

#[derive(Clone, Debug)]
enum Shape {
    Ball { center: Point, radius: f64 },
    Ellipsoid { axes: Point },
    Capsule { half_length: f64, radius: f64 },
    Polytope { core: CorePolytope, radius: f64 },
}

/// A position on the boundary together with its inward unit normal.
#[derive(Clone, Debug, PartialEq)]
pub struct BoundaryPoint {
    pub position: Point,
    pub normal: Point,
}

impl BoundaryPoint {
    pub fn dim(&self) -> usize {
        self.position.len()
    }

    pub fn tangent_frame(&self) -> TangentFrame {
        TangentFrame::new(&self.normal)
    }
}

/// Result of shooting a chord from a boundary point.
#[derive(Clone, Debug)]
pub struct RayExit {
    pub point: BoundaryPoint,
    /// Distance travelled along the unit direction.
    pub t: f64,
}

/// Validated body with derived curvature bound `C` and diameter bound `D`.
/// Immutable; shareable across threads.
#[derive(Clone, Debug)]
pub struct ConvexBody {
    spec: BodySpec,
    dim: usize,
    shape: Shape,
    curvature: f64,
    diameter: f64,
}

fn positive(name: &str, v: f64) -> Result<f64> {
    if v.is_finite() && v > 0.0 {
        Ok(v)
    } else {
        Err(Error::input(format!("{name} must be finite and > 0, got {v}")))
    }
}

impl ConvexBody {
    pub fn new(spec: BodySpec) -> Result<Self> {
        let dim = spec.dim();
        if dim < 2 {
            return Err(Error::input(format!("dimension must be ≥ 2, got {dim}")));
        }
        let (shape, curvature, diameter) = match &spec {
            BodySpec::Ball {
                center, radius, ..
            } => {
                let radius = positive("radius", *radius)?;
                let center = match center {
                    Some(c) if c.len() != dim => {
                        return Err(Error::input(format!(
                            "center has {} entries, expected {dim}",
                            c.len()
                        )))
                    }
                    Some(c) if c.iter().any(|v| !v.is_finite()) => {
                        return Err(Error::input("center must be finite"))
                    }
                    Some(c) => DVector::from_column_slice(c),
                    None => DVector::zeros(dim),
                };
                (Shape::Ball { center, radius }, 1.0 / radius, 2.0 * radius)
            }
            BodySpec::Ellipsoid { semi_axes, .. } => {
                if semi_axes.len() != dim {
                    return Err(Error::input(format!(
                        "ellipsoid has {} semi-axes, expected {dim}",
                        semi_axes.len()
                    )));
                }
                for &a in semi_axes {
                    positive("semi-axis", a)?;
                }
                let max = semi_axes.iter().copied().fold(f64::MIN, f64::max);
                let min = semi_axes.iter().copied().fold(f64::MAX, f64::min);
                let axes = DVector::from_column_slice(semi_axes);
                (Shape::Ellipsoid { axes }, max / (min * min), 2.0 * max)
            }
            BodySpec::Capsule {
                half_length,
                radius,
                ..
            } => {
                let radius = positive("radius", *radius)?;
                if !(half_length.is_finite() && *half_length >= 0.0) {
                    return Err(Error::input("half_length must be finite and ≥ 0"));
                }
                (
                    Shape::Capsule {
                        half_length: *half_length,
                        radius,
                    },
                    1.0 / radius,
                    2.0 * half_length + 2.0 * radius,
                )
            }
            BodySpec::RoundedPolytope {
                halfspaces, radius, ..
            } => {
                let radius = positive("radius", *radius)?;
                let normals: Vec<Vec<f64>> = halfspaces.iter().map(|h| h.normal.clone()).collect();
                let offsets: Vec<f64> = halfspaces.iter().map(|h| h.offset).collect();
                let core = CorePolytope::new(dim, &normals, &offsets)?;
                let verts = core.vertices();
                let mut width: f64 = 0.0;
                for (i, a) in verts.iter().enumerate() {
                    for b in &verts[i + 1..] {
                        width = width.max((a - b).norm());
                    }
                }
                (Shape::Polytope { core, radius }, 1.0 / radius, width + 2.0 * radius)
            }
        };
        if !curvature.is_finite() || !diameter.is_finite() {
            return Err(Error::input("derived curvature bound or diameter is not finite"));
        }
        Ok(Self {
            spec,
            dim,
            shape,
            curvature,
            diameter,
        })
    }

    pub fn spec(&self) -> &BodySpec {
        &self.spec
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Upper bound `C` on the normal curvature of the boundary.
    pub fn curvature_bound(&self) -> f64 {
        self.curvature
    }

    /// Upper bound `D` on the diameter.
    pub fn diameter(&self) -> f64 {
        self.diameter
    }

    fn check_dim(&self, x: &Point) -> Result<()> {
        if x.len() != self.dim {
            return Err(Error::input(format!(
                "point has dimension {}, body has {}",
                x.len(),
                self.dim
            )));
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::input("point has non-finite coordinates"));
        }
        Ok(())
    }

    /// Nearest point of the capsule segment or core polytope.
    fn core_projection(&self, x: &Point) -> Result<Point> {
        match &self.shape {
            Shape::Capsule { half_length, .. } => {
                let mut p = DVector::zeros(self.dim);
                p[0] = x[0].clamp(-half_length, *half_length);
                Ok(p)
            }
            Shape::Polytope { core, .. } => core.project(x),
            _ => unreachable!("only swept bodies have a core"),
        }
    }

    /// Level function `g`; see the module docs.
    pub fn level(&self, x: &Point) -> Result<f64> {
        self.check_dim(x)?;
        self.level_unchecked(x)
    }

    fn level_unchecked(&self, x: &Point) -> Result<f64> {
        Ok(match &self.shape {
            Shape::Ball { center, radius } => (x - center).norm() - radius,
            Shape::Ellipsoid { axes } => quadric(x, axes).sqrt() - 1.0,
            Shape::Capsule { radius, .. } | Shape::Polytope { radius, .. } => {
                let p = self.core_projection(x)?;
                (x - p).norm() - radius
            }
        })
    }

    /// Membership in the closed body.
    pub fn contains(&self, x: &Point) -> Result<bool> {
        Ok(self.level(x)? <= 0.0)
    }

    /// Inward unit normal at a point within [`BOUNDARY_TOL`] of the boundary.
    pub fn inward_normal(&self, x: &Point) -> Result<Point> {
        let g = self.level(x)?;
        if g.abs() >= BOUNDARY_TOL {
            return Err(Error::domain(format!("level residual {g:e} exceeds {BOUNDARY_TOL:e}")));
        }
        self.normal_unchecked(x)
    }

    fn normal_unchecked(&self, x: &Point) -> Result<Point> {
        let v = match &self.shape {
            Shape::Ball { center, .. } => center - x,
            Shape::Ellipsoid { axes } => -x.component_div(axes).component_div(axes),
            Shape::Capsule { .. } | Shape::Polytope { .. } => self.core_projection(x)? - x,
        };
        let norm = v.norm();
        if !(norm > 0.0) {
            return Err(Error::domain("normal undefined at this point"));
        }
        Ok(v / norm)
    }

    /// Validates `x` as a boundary point and attaches its normal.
    pub fn boundary_point(&self, x: Point) -> Result<BoundaryPoint> {
        let normal = self.inward_normal(&x)?;
        Ok(BoundaryPoint {
            position: x,
            normal,
        })
    }

    /// Snaps a point within [`PROJECTION_REACH`] of the boundary onto it.
    pub fn project_to_boundary(&self, x: &Point) -> Result<BoundaryPoint> {
        let g = self.level(x)?;
        if g.abs() > PROJECTION_REACH {
            return Err(Error::domain(format!(
                "level residual {g:e} exceeds projection reach {PROJECTION_REACH:e}"
            )));
        }
        let y = match &self.shape {
            Shape::Ball { center, radius } => {
                let d = x - center;
                let scale = *radius / d.norm();
                center + d * scale
            }
            Shape::Ellipsoid { axes } => {
                // Newton steps along the gradient direction of g.
                let mut y = x.clone();
                for _ in 0..50 {
                    let q = quadric(&y, axes);
                    let g = q.sqrt() - 1.0;
                    if g.abs() < 1e-15 {
                        break;
                    }
                    let grad = y.component_div(axes).component_div(axes) / q.sqrt();
                    let step = g / grad.norm_squared();
                    y.axpy(-step, &grad, 1.0);
                }
                y
            }
            Shape::Capsule { radius, .. } | Shape::Polytope { radius, .. } => {
                let p = self.core_projection(x)?;
                let d = x - &p;
                let norm = d.norm();
                if !(norm > 0.0) {
                    return Err(Error::domain("point coincides with the core set"));
                }
                &p + d * (*radius / norm)
            }
        };
        let normal = self.normal_unchecked(&y)?;
        Ok(BoundaryPoint {
            position: y,
            normal,
        })
    }

    /// Other endpoint of the chord from `x` in the unit direction `w`.
    pub fn ray_exit(&self, x: &BoundaryPoint, w: &Point) -> Result<RayExit> {
        self.check_dim(w)?;
        if (w.norm() - 1.0).abs() > 1e-9 {
            return Err(Error::input("direction must be a unit vector"));
        }
        let cos = w.dot(&x.normal);
        if !(cos > 0.0) {
            return Err(Error::Direction(format!("w·n_x = {cos:e}")));
        }
        let p = &x.position;
        let t = match &self.shape {
            Shape::Ball { center, .. } => -2.0 * (p - center).dot(w),
            Shape::Ellipsoid { axes } => {
                let wa = w.component_div(axes);
                let pa = p.component_div(axes);
                -2.0 * pa.dot(&wa) / wa.norm_squared()
            }
            Shape::Capsule { half_length, radius } => capsule_exit(p, w, *half_length, *radius),
            Shape::Polytope { radius, .. } => self.bisect_exit(p, w, self.diameter + radius)?,
        };
        if !(t > 0.0) || t > self.diameter + BOUNDARY_TOL {
            return Err(Error::geometry(format!(
                "chord length {t} outside (0, {}]",
                self.diameter
            )));
        }
        let y = p + w * t;
        let point = self.project_to_boundary(&y)?;
        Ok(RayExit { point, t })
    }

    /// Positive root of `t ↦ g(x + t w)` for rounded polytopes. `g` is convex along
    /// the ray, zero at `t = 0`, negative just after it and positive beyond
    /// `reach`, so halving from `reach` finds an interior bracket.
    fn bisect_exit(&self, x: &Point, w: &Point, reach: f64) -> Result<f64> {
        let eps = 1e-12 * self.diameter;
        let h = |t: f64| self.level_unchecked(&(x + w * t));
        let mut hi = reach;
        let mut lo = reach / 2.0;
        loop {
            if h(lo)? < 0.0 {
                break;
            }
            hi = lo;
            lo /= 2.0;
            if lo < eps {
                return Err(Error::geometry("no interior point found along the chord"));
            }
        }
        if h(hi)? < 0.0 {
            return Err(Error::geometry("ray exit not bracketed within the diameter"));
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            let v = h(mid)?;
            if v.abs() < BISECTION_TOL {
                return Ok(mid);
            }
            if v < 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(if h(lo)?.abs() <= h(hi)?.abs() { lo } else { hi })
    }

    /// A fixed interior point: the center, or the vertex centroid of the core.
    pub fn interior_point(&self) -> Point {
        match &self.shape {
            Shape::Ball { center, .. } => center.clone(),
            Shape::Ellipsoid { .. } | Shape::Capsule { .. } => DVector::zeros(self.dim),
            Shape::Polytope { core, .. } => {
                let verts = core.vertices();
                verts.iter().fold(DVector::zeros(self.dim), |acc, v| acc + v) / verts.len() as f64
            }
        }
    }

    /// Boundary point hit by the ray from [`ConvexBody::interior_point`] in
    /// direction `dir` (need not be normalized).
    pub fn boundary_point_toward(&self, dir: &Point) -> Result<BoundaryPoint> {
        self.check_dim(dir)?;
        let norm = dir.norm();
        if !(norm > 0.0) {
            return Err(Error::input("direction must be nonzero"));
        }
        let u = dir / norm;
        let c = self.interior_point();
        let mut lo = 0.0;
        let mut hi = self.diameter + 1.0;
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.level_unchecked(&(&c + &u * mid))? <= 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        self.project_to_boundary(&(&c + &u * lo))
    }

    /// Deterministic start state: a maximizer of the first coordinate.
    pub fn seed_point(&self) -> BoundaryPoint {
        let mut e1 = DVector::zeros(self.dim);
        e1[0] = 1.0;
        let position = match &self.shape {
            Shape::Ball { center, radius } => center + &e1 * *radius,
            Shape::Ellipsoid { axes } => &e1 * axes[0],
            Shape::Capsule {
                half_length,
                radius,
            } => &e1 * (half_length + radius),
            Shape::Polytope { core, radius } => {
                let best = core
                    .vertices()
                    .iter()
                    .fold(None::<&Point>, |acc, v| match acc {
                        Some(a) if a[0] >= v[0] => Some(a),
                        _ => Some(v),
                    })
                    .expect("validated polytope has vertices");
                best + &e1 * *radius
            }
        };
        let normal = -e1;
        BoundaryPoint { position, normal }
    }

    /// Ordered core vertices for planar rounded polytopes and capsules.
    pub(crate) fn planar_core(&self) -> Option<PlanarCore> {
        if self.dim != 2 {
            return None;
        }
        match &self.shape {
            Shape::Ball { center, radius } => Some(PlanarCore {
                vertices: vec![[center[0], center[1]]],
                radius: *radius,
            }),
            Shape::Capsule {
                half_length,
                radius,
            } => {
                let vertices = if *half_length > 0.0 {
                    vec![[-half_length, 0.0], [*half_length, 0.0]]
                } else {
                    vec![[0.0, 0.0]]
                };
                Some(PlanarCore {
                    vertices,
                    radius: *radius,
                })
            }
            Shape::Polytope { core, radius } => {
                let c = self.interior_point();
                let mut verts: Vec<[f64; 2]> = core.vertices().iter().map(|v| [v[0], v[1]]).collect();
                verts.sort_by(|a, b| {
                    let ta = (a[1] - c[1]).atan2(a[0] - c[0]);
                    let tb = (b[1] - c[1]).atan2(b[0] - c[0]);
                    ta.total_cmp(&tb)
                });
                Some(PlanarCore {
                    vertices: verts,
                    radius: *radius,
                })
            }
            Shape::Ellipsoid { .. } => None,
        }
    }

    pub(crate) fn ellipse_axes(&self) -> Option<(f64, f64)> {
        match &self.shape {
            Shape::Ellipsoid { axes } if self.dim == 2 => Some((axes[0], axes[1])),
            _ => None,
        }
    }

    /// Closed-form perimeter or surface area where one is available.
    pub fn surface_area(&self) -> Option<f64> {
        use std::f64::consts::PI;
        let n = self.dim as f64;
        // |S^{n-1}| = 2 π^{n/2} / Γ(n/2)
        let sphere = |k: f64| 2.0 * PI.powf(k / 2.0) / statrs::function::gamma::gamma(k / 2.0);
        match &self.shape {
            Shape::Ball { radius, .. } => Some(sphere(n) * radius.powf(n - 1.0)),
            Shape::Capsule {
                half_length,
                radius,
            } => Some(
                sphere(n) * radius.powf(n - 1.0)
                    + 2.0 * half_length * sphere(n - 1.0) * radius.powf(n - 2.0),
            ),
            _ => self.planar_core().map(|c| c.perimeter()).or_else(|| {
                self.ellipse_axes()
                    .map(|(a, b)| crate::curve2d::ellipse_perimeter(a, b))
            }),
        }
    }
}

/// Planar core polygon (1 vertex for a disk, 2 for a stadium) in
/// counter-clockwise order, plus the rounding radius.
#[derive(Clone, Debug)]
pub(crate) struct PlanarCore {
    pub vertices: Vec<[f64; 2]>,
    pub radius: f64,
}

impl PlanarCore {
    pub fn perimeter(&self) -> f64 {
        let k = self.vertices.len();
        let mut edges = 0.0;
        if k > 1 {
            for i in 0..k {
                let a = self.vertices[i];
                let b = self.vertices[(i + 1) % k];
                edges += ((b[0] - a[0]).powi(2) + (b[1] - a[1]).powi(2)).sqrt();
            }
        }
        edges + 2.0 * std::f64::consts::PI * self.radius
    }
}

fn quadric(x: &Point, axes: &Point) -> f64 {
    x.component_div(axes).norm_squared()
}

/// Exit time of the ray `x + t w` from the capsule, the union of the two end
/// balls and the tube between them: the largest exit time among the pieces,
/// where a tube exit only counts inside the slab `|x_1| ≤ half_length`.
fn capsule_exit(x: &Point, w: &Point, half_length: f64, radius: f64) -> f64 {
    let r2 = radius * radius;
    let larger_root = |a: f64, b: f64, c: f64| {
        let disc = b * b - a * c;
        (a > 0.0 && disc >= 0.0).then(|| (-b + disc.sqrt()) / a)
    };
    let mut best = 0.0f64;
    for end in [-half_length, half_length] {
        // |x − e + t w|² = r² with e = end·e_1.
        let mut d = x.clone();
        d[0] -= end;
        if let Some(t) = larger_root(1.0, d.dot(w), d.norm_squared() - r2) {
            best = best.max(t);
        }
    }
    let (x0, w0) = (x[0], w[0]);
    let a = 1.0 - w0 * w0;
    let b = x.dot(w) - x0 * w0;
    let c = x.norm_squared() - x0 * x0 - r2;
    if let Some(t) = larger_root(a, b, c) {
        if (x0 + t * w0).abs() <= half_length {
            best = best.max(t);
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_1_SQRT_2;

    fn p(v: &[f64]) -> Point {
        DVector::from_column_slice(v)
    }

    fn capsule() -> ConvexBody {
        BodySpec::capsule(2, 1.0, 1.0).build().unwrap()
    }

    #[test]
    fn contains_examples() {
        let ball = BodySpec::unit_ball(2).build().unwrap();
        assert!(ball.contains(&p(&[0.0, 0.0])).unwrap());
        assert!(!ball.contains(&p(&[2.0, 0.0])).unwrap());
        assert!(capsule().contains(&p(&[1.5, 0.5])).unwrap());
        assert!(matches!(ball.contains(&p(&[0.0, 0.0, 0.0])), Err(Error::Input(_))));
    }

    #[test]
    fn normal_examples() {
        let ball = BodySpec::unit_ball(2).build().unwrap();
        let n = ball.inward_normal(&p(&[0.0, 1.0])).unwrap();
        assert!((n - p(&[0.0, -1.0])).norm() < 1e-15);

        let ell = BodySpec::ellipsoid(&[2.0, 1.0]).build().unwrap();
        let n = ell.inward_normal(&p(&[2.0, 0.0])).unwrap();
        assert!((n - p(&[-1.0, 0.0])).norm() < 1e-15);

        let x = p(&[1.0 + FRAC_1_SQRT_2, FRAC_1_SQRT_2]);
        let n = capsule().inward_normal(&x).unwrap();
        assert!((n - p(&[-FRAC_1_SQRT_2, -FRAC_1_SQRT_2])).norm() < 1e-12);

        assert!(matches!(ball.inward_normal(&p(&[0.5, 0.0])), Err(Error::Domain(_))));
    }

    #[test]
    fn ray_exit_examples() {
        let ball = BodySpec::unit_ball(2).build().unwrap();
        let x = ball.boundary_point(p(&[1.0, 0.0])).unwrap();
        let out = ball.ray_exit(&x, &p(&[-1.0, 0.0])).unwrap();
        assert!((out.t - 2.0).abs() < 1e-12);
        assert!((out.point.position - p(&[-1.0, 0.0])).norm() < 1e-12);

        let out = ball.ray_exit(&x, &p(&[-FRAC_1_SQRT_2, FRAC_1_SQRT_2])).unwrap();
        assert!((out.t - 2f64.sqrt()).abs() < 1e-12);
        assert!((out.point.position - p(&[0.0, 1.0])).norm() < 1e-12);

        let cap = capsule();
        let x = cap.boundary_point(p(&[0.0, -1.0])).unwrap();
        let out = cap.ray_exit(&x, &p(&[FRAC_1_SQRT_2, FRAC_1_SQRT_2])).unwrap();
        assert!((out.t - (1.0 + 2f64.sqrt())).abs() < 1e-9);
        let expect = p(&[1.0 + FRAC_1_SQRT_2, FRAC_1_SQRT_2]);
        assert!((out.point.position - expect).norm() < 1e-9);
    }

    #[test]
    fn ray_exit_rejects_outward_direction() {
        let ball = BodySpec::unit_ball(2).build().unwrap();
        let x = ball.boundary_point(p(&[1.0, 0.0])).unwrap();
        assert!(matches!(ball.ray_exit(&x, &p(&[1.0, 0.0])), Err(Error::Direction(_))));
        assert!(matches!(ball.ray_exit(&x, &p(&[0.0, 1.0])), Err(Error::Direction(_))));
    }

    #[test]
    fn projection_examples() {
        let ball = BodySpec::unit_ball(2).build().unwrap();
        let b = ball.project_to_boundary(&p(&[1.0 + 1e-8, 0.0])).unwrap();
        assert!((b.position - p(&[1.0, 0.0])).norm() < 1e-15);

        let ell = BodySpec::ellipsoid(&[2.0, 1.0]).build().unwrap();
        let b = ell.project_to_boundary(&p(&[0.0, 1.0 - 1e-9])).unwrap();
        assert!((b.position - p(&[0.0, 1.0])).norm() < 1e-12);

        let b = capsule().project_to_boundary(&p(&[0.0, 1.0 + 1e-8])).unwrap();
        assert!((b.position - p(&[0.0, 1.0])).norm() < 1e-15);

        assert!(matches!(ball.project_to_boundary(&p(&[0.5, 0.0])), Err(Error::Domain(_))));
    }

    #[test]
    fn derived_constants() {
        let b = BodySpec::ball(3, 2.0).build().unwrap();
        assert_eq!((b.curvature_bound(), b.diameter()), (0.5, 4.0));
        let c = BodySpec::capsule(8, 4.0, 1.0).build().unwrap();
        assert_eq!((c.curvature_bound(), c.diameter()), (1.0, 10.0));
        let e = BodySpec::ellipsoid(&[2.0, 1.0, 1.0]).build().unwrap();
        assert_eq!((e.curvature_bound(), e.diameter()), (2.0, 4.0));
    }

    #[test]
    fn invalid_specs_rejected() {
        assert!(BodySpec::ball(2, 0.0).build().is_err());
        assert!(BodySpec::ball(1, 1.0).build().is_err());
        assert!(BodySpec::ellipsoid(&[1.0, -1.0]).build().is_err());
        assert!(BodySpec::capsule(3, -1.0, 1.0).build().is_err());
        assert!(BodySpec::capsule(3, 1.0, f64::INFINITY).build().is_err());
    }

    #[test]
    fn rounded_square() {
        let spec = BodySpec::from_json(
            r#"{"type":"rounded_polytope","dim":2,"radius":0.5,"halfspaces":[
                {"normal":[1,0],"offset":1},{"normal":[-1,0],"offset":1},
                {"normal":[0,2],"offset":2},{"normal":[0,-1],"offset":1}]}"#,
        )
        .unwrap();
        let body = spec.build().unwrap();
        assert_eq!(body.curvature_bound(), 2.0);
        assert!((body.diameter() - (8f64.sqrt() + 1.0)).abs() < 1e-12);
        let x = body.boundary_point(p(&[1.5, 0.2])).unwrap();
        assert!((&x.normal - p(&[-1.0, 0.0])).norm() < 1e-12);
        let out = body.ray_exit(&x, &p(&[-1.0, 0.0])).unwrap();
        assert!((out.t - 3.0).abs() < 1e-9);
        let seed = body.seed_point();
        assert!(body.level(&seed.position).unwrap().abs() < 1e-12);
    }

    #[test]
    fn spec_json_round_trip() {
        let text = r#"{"type":"capsule","dim":3,"half_length":2.0,"radius":1.0}"#;
        let spec = BodySpec::from_json(text).unwrap();
        assert_eq!(spec, BodySpec::capsule(3, 2.0, 1.0));
        let again = BodySpec::from_json(&serde_json::to_string(&spec).unwrap()).unwrap();
        assert_eq!(again, spec);
        assert!(BodySpec::from_json(r#"{"type":"torus","dim":3}"#).is_err());
    }

    #[test]
    fn surface_areas() {
        use std::f64::consts::PI;
        let s2 = BodySpec::unit_ball(3).build().unwrap();
        assert!((s2.surface_area().unwrap() - 4.0 * PI).abs() < 1e-12);
        let stadium = BodySpec::capsule(2, 2.0, 1.0).build().unwrap();
        assert!((stadium.surface_area().unwrap() - (8.0 + 2.0 * PI)).abs() < 1e-12);
        let cap3 = BodySpec::capsule(3, 1.0, 1.0).build().unwrap();
        assert!((cap3.surface_area().unwrap() - (4.0 * PI + 4.0 * PI)).abs() < 1e-12);
    }
}

