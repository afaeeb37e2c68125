//! Convex bodies and their geometric functionals.
//!
//! Three kinds are supported: 2D convex polygons (exact), axis-aligned
//! boxes in any dimension, and the `l^p` unit balls for `p in {1, inf}`
//! in any dimension (exact polytopes). Balls with finite `p != 1` are
//! realized in 2D as inscribed polygon approximations.
//!
//! The functionals are the volume `V`, the anisotropic perimeter
//! `P_p = int rho_p dH`, the boundary momentum
//! `M_p = int |x|_p^p rho_p dH`, the `l^1` diameter, the limit eigenvalue
//! `sigma_inf = 2 / diam_1`, and the scale-invariant shape ratio
//! `I_p = M_p / (P_p V^{p/N})`.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use std::collections::HashMap;
use std::sync::{Mutex, OnceLock};

use crate::error::{Error, Result};
use crate::lp::{lp_norm, Exponent};
use crate::powint::{int_abs_pow, int_signed_pow};
use crate::quad::integrate_adaptive;

/// Directed polygon edge with derived outward data.
#[derive(Debug, Clone)]
pub struct Edge {
    pub from: usize,
    pub to: usize,
    /// Outward Euclidean unit normal.
    pub normal: [f64; 2],
    pub length: f64,
}

/// Strictly convex planar polygon, vertices in counterclockwise order.
#[derive(Debug, Clone)]
pub struct Polygon2d {
    vertices: Vec<[f64; 2]>,
    edges: Vec<Edge>,
    area: f64,
}

fn cross(o: [f64; 2], a: [f64; 2], b: [f64; 2]) -> f64 {
    (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])
}

impl Polygon2d {
    pub fn new(vertices: Vec<[f64; 2]>) -> Result<Self> {
        if vertices.len() < 3 {
            return Err(Error::Domain(format!(
                "polygon needs at least 3 vertices, got {}",
                vertices.len()
            )));
        }
        if vertices.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::Domain("non-finite polygon vertex".into()));
        }
        let n = vertices.len();
        for i in 0..n {
            let a = vertices[i];
            let b = vertices[(i + 1) % n];
            let c = vertices[(i + 2) % n];
            if a == b {
                return Err(Error::Domain(format!("repeated vertex at index {i}")));
            }
            if cross(a, b, c) <= 0.0 {
                return Err(Error::Domain(format!(
                    "vertices must be strictly convex in counterclockwise order \
                     (turn at index {} is not a strict left turn)",
                    (i + 1) % n
                )));
            }
        }
        let mut area = 0.0;
        let mut edges = Vec::with_capacity(n);
        for i in 0..n {
            let a = vertices[i];
            let b = vertices[(i + 1) % n];
            area += a[0] * b[1] - b[0] * a[1];
            let dx = b[0] - a[0];
            let dy = b[1] - a[1];
            let len = dx.hypot(dy);
            edges.push(Edge {
                from: i,
                to: (i + 1) % n,
                normal: [dy / len, -dx / len],
                length: len,
            });
        }
        area *= 0.5;
        if !(area > 0.0) {
            return Err(Error::Domain("polygon has non-positive area".into()));
        }
        Ok(Polygon2d {
            vertices,
            edges,
            area,
        })
    }

    pub fn vertices(&self) -> &[[f64; 2]] {
        &self.vertices
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn area(&self) -> f64 {
        self.area
    }

    /// Area centroid; strictly interior for a convex polygon.
    pub fn centroid(&self) -> [f64; 2] {
        let n = self.vertices.len();
        let mut cx = 0.0;
        let mut cy = 0.0;
        for i in 0..n {
            let a = self.vertices[i];
            let b = self.vertices[(i + 1) % n];
            let w = a[0] * b[1] - b[0] * a[1];
            cx += (a[0] + b[0]) * w;
            cy += (a[1] + b[1]) * w;
        }
        [cx / (6.0 * self.area), cy / (6.0 * self.area)]
    }

    /// Strict interior test (margin relative to the polygon scale).
    pub fn contains_strict(&self, pt: [f64; 2]) -> bool {
        self.edges.iter().all(|e| {
            let a = self.vertices[e.from];
            let d = (pt[0] - a[0]) * e.normal[0] + (pt[1] - a[1]) * e.normal[1];
            d < -1e-12 * (1.0 + e.length)
        })
    }

    pub fn translated(&self, t: [f64; 2]) -> Polygon2d {
        let verts = self
            .vertices
            .iter()
            .map(|v| [v[0] + t[0], v[1] + t[1]])
            .collect();
        Polygon2d::new(verts).expect("translation preserves validity")
    }

    pub fn scaled(&self, s: f64) -> Result<Polygon2d> {
        if !(s > 0.0) || !s.is_finite() {
            return Err(Error::Domain(format!("scale factor must be > 0, got {s}")));
        }
        Polygon2d::new(self.vertices.iter().map(|v| [v[0] * s, v[1] * s]).collect())
    }

    /// Support value `max_x <x, v>`.
    pub fn support(&self, v: [f64; 2]) -> f64 {
        self.vertices
            .iter()
            .map(|x| x[0] * v[0] + x[1] * v[1])
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Axis-aligned box given by per-axis half-widths and a center.
#[derive(Debug, Clone)]
pub struct BoxBody {
    pub half_widths: Vec<f64>,
    pub center: Vec<f64>,
}

/// Exact `l^p` ball for `p in {1, inf}`.
#[derive(Debug, Clone)]
pub struct BallBody {
    pub dim: usize,
    pub p: Exponent,
    pub radius: f64,
    pub center: Vec<f64>,
}

#[derive(Debug, Clone)]
pub enum ConvexBody {
    Polygon(Polygon2d),
    Box(BoxBody),
    Ball(BallBody),
}

/// Geometric functionals of a body at one exponent. Momentum and the
/// shape ratio need a finite `p > 1` and are `None` otherwise.
#[derive(Debug, Clone, serde::Serialize)]
pub struct GeometricSummary {
    pub volume: f64,
    pub perimeter_p: f64,
    pub momentum_p: Option<f64>,
    pub diam1: f64,
    pub shape_ip: Option<f64>,
    pub sigma_infty: f64,
}

/// Upper bounds on the first nontrivial Steklov eigenvalue obtained from
/// the coordinate functions of a p-centered body.
#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct CoordinateBound {
    /// `N V / M_p`, the summed form.
    pub bound: f64,
    /// `min_i V / int |x_i|^p rho_p dH`, the sharper per-coordinate form.
    pub per_coordinate: f64,
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

/// `rho_p` of an already-unit normal (skips the unit-length check).
fn rho_of_unit(normal: &[f64], p: Exponent) -> f64 {
    lp_norm(normal, p.dual()).expect("finite unit normal")
}

/// Default vertex count for inscribed approximations of smooth balls.
pub const DEFAULT_BALL_VERTICES: usize = 512;

impl ConvexBody {
    pub fn polygon(vertices: Vec<[f64; 2]>) -> Result<Self> {
        Ok(ConvexBody::Polygon(Polygon2d::new(vertices)?))
    }

    pub fn regular_polygon(sides: usize, circumradius: f64) -> Result<Self> {
        if sides < 3 {
            return Err(Error::Domain(format!(
                "regular polygon needs >= 3 sides, got {sides}"
            )));
        }
        if !(circumradius > 0.0) {
            return Err(Error::Domain("circumradius must be > 0".into()));
        }
        let verts = (0..sides)
            .map(|k| {
                let th = 2.0 * std::f64::consts::PI * k as f64 / sides as f64;
                [circumradius * th.cos(), circumradius * th.sin()]
            })
            .collect();
        Self::polygon(verts)
    }

    pub fn box_body(half_widths: Vec<f64>, center: Option<Vec<f64>>) -> Result<Self> {
        let n = half_widths.len();
        if n < 2 {
            return Err(Error::Domain("box needs dimension >= 2".into()));
        }
        if half_widths.iter().any(|&h| !(h > 0.0) || !h.is_finite()) {
            return Err(Error::Domain("box half-widths must be positive".into()));
        }
        let center = center.unwrap_or_else(|| vec![0.0; n]);
        if center.len() != n {
            return Err(Error::Domain("box center dimension mismatch".into()));
        }
        Ok(ConvexBody::Box(BoxBody {
            half_widths,
            center,
        }))
    }

    /// The ball `{ |x|_p <= radius }`. Exact for `p in {1, inf}` in any
    /// dimension; other exponents are realized in 2D as an inscribed
    /// polygon with `vertices` points (default 512), sampled by equal
    /// angles, and are unsupported in higher dimension.
    pub fn ball(p: Exponent, dim: usize, radius: f64, vertices: Option<usize>) -> Result<Self> {
        if dim < 2 {
            return Err(Error::Domain("ball needs dimension >= 2".into()));
        }
        if !(radius > 0.0) || !radius.is_finite() {
            return Err(Error::Domain("ball radius must be > 0".into()));
        }
        match p {
            Exponent::Infinity => Ok(ConvexBody::Ball(BallBody {
                dim,
                p,
                radius,
                center: vec![0.0; dim],
            })),
            Exponent::Finite(pf) if pf == 1.0 => Ok(ConvexBody::Ball(BallBody {
                dim,
                p,
                radius,
                center: vec![0.0; dim],
            })),
            Exponent::Finite(pf) => {
                if dim != 2 {
                    return Err(Error::Unsupported(format!(
                        "exact l^{pf} ball is only available in 2D (as a polygon approximation)"
                    )));
                }
                let n = vertices.unwrap_or(DEFAULT_BALL_VERTICES);
                if n < 8 {
                    return Err(Error::Domain("ball approximation needs >= 8 vertices".into()));
                }
                let verts: Vec<[f64; 2]> = (0..n)
                    .map(|k| {
                        let th = 2.0 * std::f64::consts::PI * k as f64 / n as f64;
                        let dir = [th.cos(), th.sin()];
                        let scale = radius / lp_norm(&dir, Exponent::Finite(pf)).unwrap();
                        [dir[0] * scale, dir[1] * scale]
                    })
                    .collect();
                // large p flattens the ball near the axes (small p near the
                // diagonals) to the point where consecutive samples are
                // collinear at f64 resolution; the hull drops those
                Self::polygon(convex_hull(&verts))
            }
        }
    }

    /// Convex hull of `k` points drawn uniformly from `[-1,1]^2`, with
    /// `k` itself drawn from `[6, 40]`. Deterministic in the seed; draws
    /// again from the same stream until the hull is strictly convex with
    /// area >= 1e-3.
    pub fn random_polygon(seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        loop {
            let k = rng.gen_range(6..=40);
            if let Some(body) = Self::try_random_hull(&mut rng, k) {
                return body;
            }
        }
    }

    /// Same generator with a fixed point count.
    pub fn random_polygon_with_points(seed: u64, k: usize) -> Result<Self> {
        if k < 3 {
            return Err(Error::Domain("need at least 3 sample points".into()));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        loop {
            if let Some(body) = Self::try_random_hull(&mut rng, k) {
                return Ok(body);
            }
        }
    }

    fn try_random_hull(rng: &mut ChaCha8Rng, k: usize) -> Option<Self> {
        let pts: Vec<[f64; 2]> = (0..k)
            .map(|_| [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)])
            .collect();
        let hull = convex_hull(&pts);
        if hull.len() < 3 {
            return None;
        }
        match Polygon2d::new(hull) {
            Ok(poly) if poly.area() >= 1e-3 => Some(ConvexBody::Polygon(poly)),
            _ => None,
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            ConvexBody::Polygon(_) => 2,
            ConvexBody::Box(b) => b.half_widths.len(),
            ConvexBody::Ball(b) => b.dim,
        }
    }

    /// Lebesgue volume.
    pub fn volume(&self) -> f64 {
        match self {
            ConvexBody::Polygon(p) => p.area(),
            ConvexBody::Box(b) => b.half_widths.iter().map(|h| 2.0 * h).product(),
            ConvexBody::Ball(b) => {
                let n = b.dim;
                let side = (2.0 * b.radius).powi(n as i32);
                match b.p {
                    Exponent::Infinity => side,
                    _ => side / factorial(n),
                }
            }
        }
    }

    /// Anisotropic perimeter `P_p = int_bdry rho_p dH^{N-1}`.
    pub fn anisotropic_perimeter(&self, p: Exponent) -> f64 {
        match self {
            ConvexBody::Polygon(poly) => poly
                .edges()
                .iter()
                .map(|e| e.length * rho_of_unit(&e.normal, p))
                .sum(),
            ConvexBody::Box(b) => {
                // axis facets have rho_p = 1 for every p
                let n = b.half_widths.len();
                (0..n)
                    .map(|i| {
                        2.0 * b
                            .half_widths
                            .iter()
                            .enumerate()
                            .filter(|&(j, _)| j != i)
                            .map(|(_, h)| 2.0 * h)
                            .product::<f64>()
                    })
                    .sum()
            }
            ConvexBody::Ball(b) => match b.p {
                Exponent::Infinity => {
                    let n = b.dim as f64;
                    2.0 * n * (2.0 * b.radius).powi(b.dim as i32 - 1)
                }
                _ => {
                    // cross-polytope: 2^N facets, area r^{N-1} sqrt(N) / (N-1)!,
                    // normal (+-1,...,+-1)/sqrt(N)
                    let n = b.dim as f64;
                    let nf = b.dim;
                    let rho = match p.dual() {
                        Exponent::Infinity => 1.0 / n.sqrt(),
                        Exponent::Finite(q) => n.powf(1.0 / q) / n.sqrt(),
                    };
                    2.0_f64.powi(nf as i32) * b.radius.powi(nf as i32 - 1) * n.sqrt()
                        / factorial(nf - 1)
                        * rho
                }
            },
        }
    }

    /// Boundary momentum `M_p = int_bdry |x|_p^p rho_p dH^{N-1}` for a
    /// finite `p > 1`. Position dependent: the value refers to the body
    /// as placed.
    pub fn boundary_momentum(&self, p: f64) -> Result<f64> {
        if !(p > 1.0) || !p.is_finite() {
            return Err(Error::Domain(format!(
                "boundary momentum needs finite p > 1, got {p}"
            )));
        }
        match self {
            ConvexBody::Polygon(poly) => Ok(polygon_momentum(poly, p)),
            ConvexBody::Box(b) => Ok((0..b.half_widths.len())
                .map(|i| box_coordinate_momentum(b, i, p))
                .sum()),
            ConvexBody::Ball(b) => {
                let centered = b.center.iter().all(|&c| c == 0.0);
                match b.p {
                    Exponent::Infinity => {
                        let cube = BoxBody {
                            half_widths: vec![b.radius; b.dim],
                            center: b.center.clone(),
                        };
                        Ok((0..b.dim)
                            .map(|i| box_coordinate_momentum(&cube, i, p))
                            .sum())
                    }
                    _ if centered => {
                        let n = b.dim as f64;
                        let nf = b.dim;
                        let denom: f64 = (1..nf).map(|k| p + k as f64).product();
                        let exp_dual = match Exponent::finite(p)?.dual() {
                            Exponent::Infinity => 1.0,
                            Exponent::Finite(q) => n.powf(1.0 / q),
                        };
                        Ok(2.0_f64.powi(nf as i32) * n * exp_dual
                            * b.radius.powf(p + n - 1.0)
                            / denom)
                    }
                    _ => {
                        if b.dim == 2 {
                            self.as_polygon(DEFAULT_BALL_VERTICES)
                                .map(|poly| polygon_momentum(&poly, p))
                        } else {
                            Err(Error::Unsupported(
                                "momentum of an off-center cross-polytope in dimension >= 3"
                                    .into(),
                            ))
                        }
                    }
                }
            }
        }
    }

    /// `diam_1 = sup |x - y|_1` over the body. For polytopes the sup of
    /// a convex function is attained at vertex pairs.
    pub fn l1_diameter(&self) -> f64 {
        match self {
            ConvexBody::Polygon(poly) => {
                let vs = poly.vertices();
                let mut best = 0.0_f64;
                for i in 0..vs.len() {
                    for j in (i + 1)..vs.len() {
                        let d = (vs[i][0] - vs[j][0]).abs() + (vs[i][1] - vs[j][1]).abs();
                        best = best.max(d);
                    }
                }
                best
            }
            ConvexBody::Box(b) => 2.0 * b.half_widths.iter().sum::<f64>(),
            ConvexBody::Ball(b) => match b.p {
                Exponent::Infinity => 2.0 * b.radius * b.dim as f64,
                _ => 2.0 * b.radius,
            },
        }
    }

    /// Limit eigenvalue `sigma_inf = 2 / diam_1`.
    pub fn sigma_infty(&self) -> f64 {
        2.0 / self.l1_diameter()
    }

    /// Scale-invariant shape ratio `I_p = M_p / (P_p V^{p/N})`.
    pub fn shape_functional(&self, p: f64) -> Result<f64> {
        let m = self.boundary_momentum(p)?;
        let perim = self.anisotropic_perimeter(Exponent::finite(p)?);
        let v = self.volume();
        Ok(m / (perim * v.powf(p / self.dim() as f64)))
    }

    /// The p-center: the point `t` such that after translating the body
    /// by `-t` every signed coordinate moment
    /// `int |x_i|^{p-2} x_i rho_p dH` vanishes. Each component is found
    /// by monotone bisection; symmetric analytic bodies return their
    /// center directly.
    pub fn boundary_p_center(&self, p: f64) -> Result<Vec<f64>> {
        if !(p > 1.0) || !p.is_finite() {
            return Err(Error::Domain(format!(
                "boundary p-center needs finite p > 1, got {p}"
            )));
        }
        match self {
            ConvexBody::Box(b) => Ok(b.center.clone()),
            ConvexBody::Ball(b) => Ok(b.center.clone()),
            ConvexBody::Polygon(poly) => polygon_p_center(poly, p),
        }
    }

    /// Coordinate-function upper bounds on the eigenvalue of a p-centered
    /// body: `N V / M_p` and the sharper `min_i V / int |x_i|^p rho_p`.
    pub fn coordinate_upper_bound(&self, p: f64) -> Result<CoordinateBound> {
        if !(p > 1.0) || !p.is_finite() {
            return Err(Error::Domain(format!(
                "coordinate bound needs finite p > 1, got {p}"
            )));
        }
        let v = self.volume();
        let n = self.dim();
        let coords: Vec<f64> = match self {
            ConvexBody::Polygon(poly) => (0..2).map(|i| polygon_coordinate_momentum(poly, i, p)).collect(),
            ConvexBody::Box(b) => (0..n).map(|i| box_coordinate_momentum(b, i, p)).collect(),
            ConvexBody::Ball(_) => {
                let m = self.boundary_momentum(p)?;
                vec![m / n as f64; n]
            }
        };
        let mp: f64 = coords.iter().sum();
        let per = coords
            .iter()
            .map(|&mi| v / mi)
            .fold(f64::INFINITY, f64::min);
        Ok(CoordinateBound {
            bound: n as f64 * v / mp,
            per_coordinate: per,
        })
    }

    pub fn translated(&self, shift: &[f64]) -> Result<ConvexBody> {
        if shift.len() != self.dim() {
            return Err(Error::Domain("translation dimension mismatch".into()));
        }
        Ok(match self {
            ConvexBody::Polygon(p) => ConvexBody::Polygon(p.translated([shift[0], shift[1]])),
            ConvexBody::Box(b) => ConvexBody::Box(BoxBody {
                half_widths: b.half_widths.clone(),
                center: b.center.iter().zip(shift).map(|(c, s)| c + s).collect(),
            }),
            ConvexBody::Ball(b) => ConvexBody::Ball(BallBody {
                center: b.center.iter().zip(shift).map(|(c, s)| c + s).collect(),
                ..b.clone()
            }),
        })
    }

    /// Dilation about the origin by `t > 0`.
    pub fn scaled(&self, t: f64) -> Result<ConvexBody> {
        if !(t > 0.0) || !t.is_finite() {
            return Err(Error::Domain(format!("scale factor must be > 0, got {t}")));
        }
        Ok(match self {
            ConvexBody::Polygon(p) => ConvexBody::Polygon(p.scaled(t)?),
            ConvexBody::Box(b) => ConvexBody::Box(BoxBody {
                half_widths: b.half_widths.iter().map(|h| h * t).collect(),
                center: b.center.iter().map(|c| c * t).collect(),
            }),
            ConvexBody::Ball(b) => ConvexBody::Ball(BallBody {
                radius: b.radius * t,
                center: b.center.iter().map(|c| c * t).collect(),
                ..b.clone()
            }),
        })
    }

    /// 2D bodies as an explicit polygon (exact for boxes and the
    /// `p in {1, inf}` balls; `smooth_vertices` is unused for those).
    pub fn as_polygon(&self, _smooth_vertices: usize) -> Result<Polygon2d> {
        if self.dim() != 2 {
            return Err(Error::Unsupported(
                "polygon form only exists in dimension 2".into(),
            ));
        }
        match self {
            ConvexBody::Polygon(p) => Ok(p.clone()),
            ConvexBody::Box(b) => {
                let (hx, hy) = (b.half_widths[0], b.half_widths[1]);
                let (cx, cy) = (b.center[0], b.center[1]);
                Polygon2d::new(vec![
                    [cx + hx, cy + hy],
                    [cx - hx, cy + hy],
                    [cx - hx, cy - hy],
                    [cx + hx, cy - hy],
                ])
            }
            ConvexBody::Ball(b) => {
                let r = b.radius;
                let (cx, cy) = (b.center[0], b.center[1]);
                match b.p {
                    Exponent::Infinity => Polygon2d::new(vec![
                        [cx + r, cy + r],
                        [cx - r, cy + r],
                        [cx - r, cy - r],
                        [cx + r, cy - r],
                    ]),
                    _ => Polygon2d::new(vec![
                        [cx + r, cy],
                        [cx, cy + r],
                        [cx - r, cy],
                        [cx, cy - r],
                    ]),
                }
            }
        }
    }

    /// Functionals at one exponent, bundled for reporting.
    pub fn describe(&self, p: Exponent) -> GeometricSummary {
        let volume = self.volume();
        let perimeter_p = self.anisotropic_perimeter(p);
        let diam1 = self.l1_diameter();
        let (momentum_p, shape_ip) = match p {
            Exponent::Finite(pf) if pf > 1.0 => {
                let m = self.boundary_momentum(pf).ok();
                let i = m.map(|m| m / (perimeter_p * volume.powf(pf / self.dim() as f64)));
                (m, i)
            }
            _ => (None, None),
        };
        GeometricSummary {
            volume,
            perimeter_p,
            momentum_p,
            diam1,
            shape_ip,
            sigma_infty: self.sigma_infty(),
        }
    }

    /// Min and max of the `l^1` width over a grid of Euclidean directions
    /// (2D only). The width in direction `v` is the `l^1` distance of the
    /// two supporting lines orthogonal to `v`.
    pub fn l1_width_extremes(&self, directions: usize) -> Result<(f64, f64)> {
        if self.dim() != 2 {
            return Err(Error::Unsupported("width scan is 2D only".into()));
        }
        let support = |v: [f64; 2]| -> f64 {
            match self {
                ConvexBody::Polygon(p) => p.support(v),
                ConvexBody::Box(b) => {
                    b.half_widths[0] * v[0].abs()
                        + b.half_widths[1] * v[1].abs()
                        + b.center[0] * v[0]
                        + b.center[1] * v[1]
                }
                ConvexBody::Ball(b) => {
                    let c = b.center[0] * v[0] + b.center[1] * v[1];
                    match b.p {
                        Exponent::Infinity => b.radius * (v[0].abs() + v[1].abs()) + c,
                        _ => b.radius * v[0].abs().max(v[1].abs()) + c,
                    }
                }
            }
        };
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for k in 0..directions {
            let th = std::f64::consts::PI * k as f64 / directions as f64;
            let v = [th.cos(), th.sin()];
            let extent = support(v) + support([-v[0], -v[1]]);
            let w = extent / v[0].abs().max(v[1].abs());
            lo = lo.min(w);
            hi = hi.max(w);
        }
        Ok((lo, hi))
    }
}

/// Momentum of a polygon by per-edge Gauss-Legendre of order
/// `ceil(p/2) + 2` (capped at 32), with edges split at coordinate sign
/// changes and refined adaptively until successive levels agree.
fn polygon_momentum(poly: &Polygon2d, p: f64) -> f64 {
    let order = ((p / 2.0).ceil() as usize + 2).min(32);
    let mut total = 0.0;
    for e in poly.edges() {
        let a = poly.vertices()[e.from];
        let b = poly.vertices()[e.to];
        let rho = rho_of_unit(&e.normal, Exponent::Finite(p));
        // breakpoints where a coordinate changes sign along the edge
        let mut cuts = vec![0.0, 1.0];
        for i in 0..2 {
            let d = b[i] - a[i];
            if d != 0.0 {
                let t = -a[i] / d;
                if t > 0.0 && t < 1.0 {
                    cuts.push(t);
                }
            }
        }
        cuts.sort_by(|x, y| x.partial_cmp(y).unwrap());
        let f = |t: f64| {
            let x = a[0] + (b[0] - a[0]) * t;
            let y = a[1] + (b[1] - a[1]) * t;
            x.abs().powf(p) + y.abs().powf(p)
        };
        let coarse: f64 = cuts
            .windows(2)
            .map(|w| crate::quad::integrate(&f, w[0], w[1], order))
            .sum();
        let abs_floor = 1e-16 * (1.0 + coarse.abs());
        let refined: f64 = cuts
            .windows(2)
            .map(|w| integrate_adaptive(&f, w[0], w[1], order, 1e-12, abs_floor, 12))
            .sum();
        total += e.length * rho * refined;
    }
    total
}

/// `int |x_i|^p rho_p dH` over a polygon boundary, in closed form.
fn polygon_coordinate_momentum(poly: &Polygon2d, i: usize, p: f64) -> f64 {
    let pexp = Exponent::Finite(p);
    poly.edges()
        .iter()
        .map(|e| {
            let a = poly.vertices()[e.from][i];
            let b = poly.vertices()[e.to][i];
            e.length * rho_of_unit(&e.normal, pexp) * int_abs_pow(a, b, p)
        })
        .sum()
}

/// `int |x_i|^p rho_p dH` over a box boundary (closed form, general
/// center).
fn box_coordinate_momentum(b: &BoxBody, i: usize, p: f64) -> f64 {
    let n = b.half_widths.len();
    let side = |j: usize| 2.0 * b.half_widths[j];
    // facets x_i = c_i +- h_i: |value|^p times facet area
    let facet_i_area: f64 = (0..n).filter(|&j| j != i).map(side).product();
    let hi = b.half_widths[i];
    let ci = b.center[i];
    let mut m = ((ci + hi).abs().powf(p) + (ci - hi).abs().powf(p)) * facet_i_area;
    // facets x_j = c_j +- h_j, j != i: x_i ranges over [c_i - h_i, c_i + h_i]
    let lo = ci - hi;
    let hi_c = ci + hi;
    let line = 2.0 * hi * int_abs_pow(lo, hi_c, p);
    for j in 0..n {
        if j == i {
            continue;
        }
        let rest: f64 = (0..n).filter(|&k| k != i && k != j).map(side).product();
        m += 2.0 * line * rest;
    }
    m
}

fn polygon_p_center(poly: &Polygon2d, p: f64) -> Result<Vec<f64>> {
    let pexp = Exponent::Finite(p);
    let perim = poly
        .edges()
        .iter()
        .map(|e| e.length * rho_of_unit(&e.normal, pexp))
        .sum::<f64>();
    let moment = |i: usize, c: f64| -> f64 {
        poly.edges()
            .iter()
            .map(|e| {
                let a = poly.vertices()[e.from][i] - c;
                let b = poly.vertices()[e.to][i] - c;
                e.length * rho_of_unit(&e.normal, pexp) * int_signed_pow(a, b, p)
            })
            .sum()
    };
    let mut center = vec![0.0; 2];
    for i in 0..2 {
        let mut lo = poly
            .vertices()
            .iter()
            .map(|v| v[i])
            .fold(f64::INFINITY, f64::min);
        let mut hi = poly
            .vertices()
            .iter()
            .map(|v| v[i])
            .fold(f64::NEG_INFINITY, f64::max);
        let ext = hi - lo;
        // moment(c) is strictly decreasing in c with a sign change inside
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if moment(i, mid) > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let c = 0.5 * (lo + hi);
        let residual = moment(i, c).abs();
        let scale = perim * ext.powf(p - 1.0);
        if residual > 1e-10 * scale.max(1.0) {
            return Err(Error::Numerical(format!(
                "p-center bisection stalled: coordinate {i} residual {residual:e}"
            )));
        }
        center[i] = c;
    }
    Ok(center)
}

/// Strict convex hull (Andrew's monotone chain), counterclockwise,
/// collinear points dropped.
pub fn convex_hull(points: &[[f64; 2]]) -> Vec<[f64; 2]> {
    let mut pts: Vec<[f64; 2]> = points.to_vec();
    pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    pts.dedup();
    if pts.len() < 3 {
        return pts;
    }
    let mut lower: Vec<[f64; 2]> = Vec::new();
    for &p in &pts {
        while lower.len() >= 2 && cross(lower[lower.len() - 2], lower[lower.len() - 1], p) <= 0.0 {
            lower.pop();
        }
        lower.push(p);
    }
    let mut upper: Vec<[f64; 2]> = Vec::new();
    for &p in pts.iter().rev() {
        while upper.len() >= 2 && cross(upper[upper.len() - 2], upper[upper.len() - 1], p) <= 0.0 {
            upper.pop();
        }
        upper.push(p);
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    lower
}

/// Reference quantities of the extremal ball `W_p` in 2D for finite
/// `p > 1`, from inscribed 1024/2048/4096-gons with Richardson
/// extrapolation of the O(n^-2) facet error.
#[derive(Debug, Clone, Copy)]
pub struct BallReference {
    pub p: f64,
    pub volume: f64,
    pub perimeter: f64,
    pub momentum: f64,
    pub shape: f64,
    /// Relative size of the final Richardson correction (error estimate).
    pub richardson_defect: f64,
    /// Observed convergence ratio between levels (4 means clean O(n^-2)).
    pub order_ratio: f64,
}

/// Extremal-ball reference for finite `p > 1` in 2D, cached by exponent.
pub fn ball_reference_2d(p: f64) -> Result<BallReference> {
    if !(p > 1.0) || !p.is_finite() {
        return Err(Error::Domain(format!(
            "ball reference needs finite p > 1, got {p}"
        )));
    }
    static CACHE: OnceLock<Mutex<HashMap<u64, BallReference>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(r) = cache.lock().unwrap().get(&p.to_bits()) {
        return Ok(*r);
    }

    let levels = [1024usize, 2048, 4096];
    let mut vols = [0.0; 3];
    let mut pers = [0.0; 3];
    let mut moms = [0.0; 3];
    for (k, &n) in levels.iter().enumerate() {
        let ball = ConvexBody::ball(Exponent::Finite(p), 2, 1.0, Some(n))?;
        vols[k] = ball.volume();
        pers[k] = ball.anisotropic_perimeter(Exponent::Finite(p));
        moms[k] = ball.boundary_momentum(p)?;
    }
    let extrap = |q: [f64; 3]| q[2] + (q[2] - q[1]) / 3.0;
    let ratio = |q: [f64; 3]| (q[1] - q[0]) / (q[2] - q[1]);
    let volume = extrap(vols);
    let perimeter = extrap(pers);
    let momentum = extrap(moms);
    let defect = [
        ((volume - vols[2]) / volume).abs(),
        ((perimeter - pers[2]) / perimeter).abs(),
        ((momentum - moms[2]) / momentum).abs(),
    ]
    .into_iter()
    .fold(0.0_f64, f64::max);
    let reference = BallReference {
        p,
        volume,
        perimeter,
        momentum,
        shape: momentum / (perimeter * volume.powf(p / 2.0)),
        richardson_defect: defect,
        order_ratio: ratio(vols),
    };
    cache.lock().unwrap().insert(p.to_bits(), reference);
    Ok(reference)
}
