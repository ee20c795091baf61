//! Catalog of metric spaces with exact intrinsic distance functions.
//!
//! Every space is described by a [`SpaceSpec`] and its points by a chart. All
//! distances are closed-form: Euclidean norms, great-circle arcs, the cone
//! law of cosines `d = sqrt(t^2 + s^2 - 2ts cos d_base)`, seam unfoldings for
//! the glued complexes, and orbit minima for the quotients. Operations are
//! pure; samplers are deterministic given a seed.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Unit-vector validation slack: charts must be normalized to this accuracy.
pub const UNIT_NORM_TOL: f64 = 1e-12;

/// Descriptor of a catalog metric space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SpaceSpec {
    /// Flat `R^n` with the chordal norm.
    Euclidean { dim: usize },
    /// Round 2-sphere of radius `rho` with the arc-length metric.
    RoundSphere { rho: f64 },
    /// Euclidean cone over a base space of diameter at most pi.
    Cone { base: Box<SpaceSpec> },
    /// Real projective plane: round sphere of radius `rho` with antipodes
    /// identified.
    ProjectivePlane { rho: f64 },
    /// Euclidean cone over the unit projective plane, realized as `R^3`
    /// modulo the sign involution.
    ConeOfProjectivePlane,
    /// Union of the full xy-plane and the closed half yz-plane (z >= 0),
    /// glued along the y-axis, with the induced intrinsic distance.
    GluedPlanes,
    /// Union of the xy-plane and the nonnegative z-axis joined at the
    /// origin, with the induced intrinsic distance.
    PlaneWithRay,
}

/// Sheet names for [`SpaceSpec::GluedPlanes`] charts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GluedSheet {
    Xy,
    YzPlus,
}

/// Chart coordinates, tagged per space kind.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Chart {
    /// `n` real coordinates.
    Euclidean(Vec<f64>),
    /// Unit direction vector.
    Sphere([f64; 3]),
    /// Base point plus radial coordinate `t >= 0`; `t = 0` is the vertex and
    /// its base coordinate is ignored (canonicalized away).
    ConePoint { base: Box<Chart>, t: f64 },
    /// Unit direction vector, `v` and `-v` identified.
    Projective([f64; 3]),
    /// Point of `R^3`, `x` and `-x` identified; the origin is the vertex.
    ConeProjective([f64; 3]),
    /// Sheet plus planar coordinates. On `Xy` they are `(x, y)`; on `YzPlus`
    /// they are `(y, z)` with `z >= 0`. Seam points (`x = 0` / `z = 0`) are
    /// identified and canonicalized onto the `Xy` sheet.
    Glued { sheet: GluedSheet, u: f64, v: f64 },
    /// Plane sheet of the plane-with-ray complex.
    Plane { x: f64, y: f64 },
    /// Ray sheet, `z >= 0`; `z = 0` is the origin shared with the plane.
    Ray { z: f64 },
}

/// A point of a catalog space: the space descriptor plus a canonicalized,
/// validated chart.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Point {
    space: SpaceSpec,
    chart: Chart,
}

/// Sampling region for [`SpaceSpec::sample_point`] and the packing helpers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Region {
    /// The whole space; valid only when the space is bounded.
    Whole,
    /// Metric ball around a point.
    Ball { center: Point, radius: f64 },
    /// Axis-aligned box (Euclidean spaces only).
    Box { center: Point, half_width: f64 },
    /// One sheet of a glued complex, restricted to coordinates in
    /// `[-half_width, half_width]` (clipped to the sheet constraints).
    Sheet { sheet: Chart, half_width: f64 },
}

impl SpaceSpec {
    /// Checks the catalog invariants: positive radii, and cone bases with
    /// analytic diameter at most pi.
    pub fn validate(&self) -> Result<()> {
        match self {
            SpaceSpec::Euclidean { dim } => {
                if *dim == 0 {
                    return Err(Error::InvalidSpace("euclidean dimension must be >= 1".into()));
                }
            }
            SpaceSpec::RoundSphere { rho } | SpaceSpec::ProjectivePlane { rho } => {
                if !(*rho > 0.0) || !rho.is_finite() {
                    return Err(Error::InvalidSpace("sphere radius must be positive".into()));
                }
            }
            SpaceSpec::Cone { base } => {
                base.validate()?;
                match base.diameter() {
                    Some(d) if d <= std::f64::consts::PI + 1e-12 => {}
                    Some(d) => {
                        return Err(Error::InvalidSpace(format!(
                            "cone base diameter {d} exceeds pi"
                        )))
                    }
                    None => {
                        return Err(Error::InvalidSpace(
                            "cone base must have finite diameter at most pi".into(),
                        ))
                    }
                }
            }
            SpaceSpec::ConeOfProjectivePlane
            | SpaceSpec::GluedPlanes
            | SpaceSpec::PlaneWithRay => {}
        }
        Ok(())
    }

    /// Exact analytic diameter; `None` means unbounded.
    pub fn diameter(&self) -> Option<f64> {
        match self {
            SpaceSpec::RoundSphere { rho } => Some(std::f64::consts::PI * rho),
            SpaceSpec::ProjectivePlane { rho } => Some(std::f64::consts::PI * rho / 2.0),
            SpaceSpec::Euclidean { .. }
            | SpaceSpec::Cone { .. }
            | SpaceSpec::ConeOfProjectivePlane
            | SpaceSpec::GluedPlanes
            | SpaceSpec::PlaneWithRay => None,
        }
    }

    /// Builds a point of this space, validating and canonicalizing the chart.
    pub fn point(&self, chart: Chart) -> Result<Point> {
        self.validate()?;
        let chart = canonicalize_chart(self, chart)?;
        Ok(Point { space: self.clone(), chart })
    }

    /// The vertex of a cone-like space.
    pub fn vertex(&self) -> Result<Point> {
        match self {
            SpaceSpec::Cone { base } => self.point(Chart::ConePoint {
                base: Box::new(canonical_base_chart(base)?),
                t: 0.0,
            }),
            SpaceSpec::ConeOfProjectivePlane => {
                self.point(Chart::ConeProjective([0.0, 0.0, 0.0]))
            }
            _ => Err(Error::InvalidInput(format!("space {self:?} has no vertex"))),
        }
    }

    /// Intrinsic distance between two points of this space.
    pub fn distance(&self, a: &Point, b: &Point) -> Result<f64> {
        if a.space != *self || b.space != *self {
            return Err(Error::MismatchedSpaces(
                "both points must belong to the queried space".into(),
            ));
        }
        Ok(chart_distance(self, &a.chart, &b.chart))
    }

    /// Deterministic pseudo-random point in `region`; identical seeds give
    /// bit-identical points.
    pub fn sample_point(&self, region: &Region, seed: u64) -> Result<Point> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        self.sample_with_rng(region, &mut rng)
    }

    /// Deterministic stream of `count` points in `region` from one seed.
    pub fn sample_points(&self, region: &Region, count: usize, seed: u64) -> Result<Vec<Point>> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..count).map(|_| self.sample_with_rng(region, &mut rng)).collect()
    }

    fn sample_with_rng(&self, region: &Region, rng: &mut ChaCha8Rng) -> Result<Point> {
        self.validate()?;
        match region {
            Region::Whole => match self {
                SpaceSpec::RoundSphere { .. } => {
                    self.point(Chart::Sphere(random_unit(rng)))
                }
                SpaceSpec::ProjectivePlane { .. } => {
                    self.point(Chart::Projective(random_unit(rng)))
                }
                _ => Err(Error::EmptyRegion(
                    "whole-space sampling needs a bounded space; use a ball region".into(),
                )),
            },
            Region::Ball { center, radius } => {
                if !(*radius > 0.0) {
                    return Err(Error::EmptyRegion("ball radius must be positive".into()));
                }
                if center.space != *self {
                    return Err(Error::MismatchedSpaces("ball center in a different space".into()));
                }
                self.sample_ball(center, *radius, rng)
            }
            Region::Box { center, half_width } => match (self, &center.chart) {
                (SpaceSpec::Euclidean { dim }, Chart::Euclidean(c)) => {
                    if !(*half_width > 0.0) {
                        return Err(Error::EmptyRegion("box half width must be positive".into()));
                    }
                    let coords = (0..*dim)
                        .map(|i| c[i] + rng.gen_range(-half_width..=*half_width))
                        .collect();
                    self.point(Chart::Euclidean(coords))
                }
                _ => Err(Error::InvalidInput("box regions are Euclidean-only".into())),
            },
            Region::Sheet { sheet, half_width } => self.sample_sheet(sheet, *half_width, rng),
        }
    }

    fn sample_ball(&self, center: &Point, radius: f64, rng: &mut ChaCha8Rng) -> Result<Point> {
        match (self, &center.chart) {
            (SpaceSpec::Euclidean { dim }, Chart::Euclidean(c)) => {
                let dir = random_unit_n(*dim, rng);
                let rad = radius * rng.gen::<f64>().powf(1.0 / *dim as f64);
                let coords = c.iter().zip(dir.iter()).map(|(ci, di)| ci + rad * di).collect();
                self.point(Chart::Euclidean(coords))
            }
            (SpaceSpec::RoundSphere { rho }, Chart::Sphere(c)) => {
                let theta_max = (radius / rho).min(std::f64::consts::PI);
                self.point(Chart::Sphere(random_cap(*c, theta_max, rng)))
            }
            (SpaceSpec::ProjectivePlane { rho }, Chart::Projective(c)) => {
                let theta_max = (radius / rho).min(std::f64::consts::PI / 2.0);
                self.point(Chart::Projective(random_cap(*c, theta_max, rng)))
            }
            (SpaceSpec::Cone { base }, Chart::ConePoint { base: cb, t: t0 }) => {
                // Radial band containing the ball; radial density t^dim(base).
                let lo = (t0 - radius).max(0.0);
                let hi = t0 + radius;
                let pow = base_dimension(base) as f64 + 1.0;
                for _ in 0..100_000 {
                    let u = rng.gen::<f64>();
                    let t = (lo.powf(pow) + u * (hi.powf(pow) - lo.powf(pow))).powf(1.0 / pow);
                    let bp = random_base_chart(base, rng);
                    let cand = Chart::ConePoint { base: Box::new(bp), t };
                    let d = chart_distance(self, &cand, &Chart::ConePoint { base: cb.clone(), t: *t0 });
                    if d <= radius {
                        return self.point(cand);
                    }
                }
                Err(Error::EmptyRegion("cone ball rejection sampling failed".into()))
            }
            (SpaceSpec::ConeOfProjectivePlane, Chart::ConeProjective(c)) => {
                let dir = random_unit(rng);
                let rad = radius * rng.gen::<f64>().cbrt();
                self.point(Chart::ConeProjective([
                    c[0] + rad * dir[0],
                    c[1] + rad * dir[1],
                    c[2] + rad * dir[2],
                ]))
            }
            (SpaceSpec::GluedPlanes, _) | (SpaceSpec::PlaneWithRay, _) => {
                // Rejection from per-sheet boxes around the center's shadow.
                for _ in 0..100_000 {
                    let cand = match self {
                        SpaceSpec::GluedPlanes => {
                            let (u, v) = (rng.gen_range(-1.0..=1.0), rng.gen_range(-1.0..=1.0));
                            let (cu, cv) = glued_shadow(&center.chart);
                            if rng.gen::<bool>() {
                                Chart::Glued { sheet: GluedSheet::Xy, u: cu + radius * u, v: cv + radius * v }
                            } else {
                                Chart::Glued {
                                    sheet: GluedSheet::YzPlus,
                                    u: cv + radius * u,
                                    v: (radius * v).abs(),
                                }
                            }
                        }
                        SpaceSpec::PlaneWithRay => {
                            if rng.gen::<f64>() < 0.25 {
                                Chart::Ray { z: rng.gen_range(0.0..=1.0) * 2.0 * radius }
                            } else {
                                let (cx, cy) = match &center.chart {
                                    Chart::Plane { x, y } => (*x, *y),
                                    _ => (0.0, 0.0),
                                };
                                Chart::Plane {
                                    x: cx + radius * rng.gen_range(-1.0..=1.0),
                                    y: cy + radius * rng.gen_range(-1.0..=1.0),
                                }
                            }
                        }
                        _ => unreachable!(),
                    };
                    let cand = canonicalize_chart(self, cand)?;
                    if chart_distance(self, &cand, &center.chart) <= radius {
                        return Ok(Point { space: self.clone(), chart: cand });
                    }
                }
                Err(Error::EmptyRegion("ball rejection sampling failed".into()))
            }
            _ => Err(Error::InvalidChart("center chart does not match the space".into())),
        }
    }

    fn sample_sheet(&self, sheet: &Chart, half_width: f64, rng: &mut ChaCha8Rng) -> Result<Point> {
        if !(half_width > 0.0) {
            return Err(Error::EmptyRegion("sheet half width must be positive".into()));
        }
        match (self, sheet) {
            (SpaceSpec::GluedPlanes, Chart::Glued { sheet, .. }) => {
                let u = rng.gen_range(-half_width..=half_width);
                let v = match sheet {
                    GluedSheet::Xy => rng.gen_range(-half_width..=half_width),
                    GluedSheet::YzPlus => rng.gen_range(0.0..=half_width),
                };
                self.point(Chart::Glued { sheet: *sheet, u, v })
            }
            (SpaceSpec::PlaneWithRay, Chart::Plane { .. }) => self.point(Chart::Plane {
                x: rng.gen_range(-half_width..=half_width),
                y: rng.gen_range(-half_width..=half_width),
            }),
            (SpaceSpec::PlaneWithRay, Chart::Ray { .. }) => {
                self.point(Chart::Ray { z: rng.gen_range(0.0..=half_width) })
            }
            _ => Err(Error::InvalidInput("sheet region does not match the space".into())),
        }
    }
}

impl Point {
    pub fn space(&self) -> &SpaceSpec {
        &self.space
    }

    pub fn chart(&self) -> &Chart {
        &self.chart
    }

    /// Distance to another point of the same space.
    pub fn distance_to(&self, other: &Point) -> Result<f64> {
        self.space.distance(self, other)
    }

    /// Re-validates a deserialized point (serde derives do not re-check chart
    /// constraints).
    pub fn revalidate(&self) -> Result<Point> {
        self.space.point(self.chart.clone())
    }
}

// ---------------------------------------------------------------------------
// Chart validation and canonical forms
// ---------------------------------------------------------------------------

fn scrub_zero(x: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        x
    }
}

fn canonical_sign(mut v: [f64; 3]) -> [f64; 3] {
    for c in &mut v {
        *c = scrub_zero(*c);
    }
    for c in v {
        if c != 0.0 {
            if c < 0.0 {
                return [-v[0], -v[1], -v[2]].map(scrub_zero);
            }
            break;
        }
    }
    v
}

fn canonical_base_chart(base: &SpaceSpec) -> Result<Chart> {
    match base {
        SpaceSpec::RoundSphere { .. } => Ok(Chart::Sphere([0.0, 0.0, 1.0])),
        SpaceSpec::ProjectivePlane { .. } => Ok(Chart::Projective([0.0, 0.0, 1.0])),
        _ => Err(Error::InvalidSpace("unsupported cone base".into())),
    }
}

fn check_unit(v: &[f64; 3]) -> Result<[f64; 3]> {
    let norm = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
    if !norm.is_finite() || (norm - 1.0).abs() > UNIT_NORM_TOL {
        return Err(Error::InvalidChart(format!(
            "direction vector norm {norm} deviates from 1 beyond {UNIT_NORM_TOL:e}"
        )));
    }
    Ok([v[0] / norm, v[1] / norm, v[2] / norm])
}

fn canonicalize_chart(space: &SpaceSpec, chart: Chart) -> Result<Chart> {
    match (space, chart) {
        (SpaceSpec::Euclidean { dim }, Chart::Euclidean(coords)) => {
            if coords.len() != *dim {
                return Err(Error::InvalidChart(format!(
                    "expected {dim} coordinates, got {}",
                    coords.len()
                )));
            }
            if coords.iter().any(|c| !c.is_finite()) {
                return Err(Error::InvalidChart("non-finite coordinate".into()));
            }
            Ok(Chart::Euclidean(coords.into_iter().map(scrub_zero).collect()))
        }
        (SpaceSpec::RoundSphere { .. }, Chart::Sphere(v)) => {
            Ok(Chart::Sphere(check_unit(&v)?.map(scrub_zero)))
        }
        (SpaceSpec::ProjectivePlane { .. }, Chart::Projective(v)) => {
            Ok(Chart::Projective(canonical_sign(check_unit(&v)?)))
        }
        (SpaceSpec::Cone { base }, Chart::ConePoint { base: bc, t }) => {
            if !(t >= 0.0) || !t.is_finite() {
                return Err(Error::InvalidChart(format!("radial coordinate {t} must be >= 0")));
            }
            if t == 0.0 {
                return Ok(Chart::ConePoint { base: Box::new(canonical_base_chart(base)?), t: 0.0 });
            }
            let canon = canonicalize_chart(base, *bc)?;
            Ok(Chart::ConePoint { base: Box::new(canon), t: scrub_zero(t) })
        }
        (SpaceSpec::ConeOfProjectivePlane, Chart::ConeProjective(v)) => {
            if v.iter().any(|c| !c.is_finite()) {
                return Err(Error::InvalidChart("non-finite coordinate".into()));
            }
            Ok(Chart::ConeProjective(canonical_sign(v)))
        }
        (SpaceSpec::GluedPlanes, Chart::Glued { sheet, u, v }) => {
            if !u.is_finite() || !v.is_finite() {
                return Err(Error::InvalidChart("non-finite coordinate".into()));
            }
            match sheet {
                GluedSheet::Xy => Ok(Chart::Glued { sheet, u: scrub_zero(u), v: scrub_zero(v) }),
                GluedSheet::YzPlus => {
                    if v < 0.0 {
                        return Err(Error::InvalidChart(format!(
                            "yz+ sheet requires z >= 0, got z = {v}"
                        )));
                    }
                    if v == 0.0 {
                        // Seam point, canonical on the xy sheet.
                        Ok(Chart::Glued { sheet: GluedSheet::Xy, u: 0.0, v: scrub_zero(u) })
                    } else {
                        Ok(Chart::Glued { sheet, u: scrub_zero(u), v: scrub_zero(v) })
                    }
                }
            }
        }
        (SpaceSpec::PlaneWithRay, Chart::Plane { x, y }) => {
            if !x.is_finite() || !y.is_finite() {
                return Err(Error::InvalidChart("non-finite coordinate".into()));
            }
            Ok(Chart::Plane { x: scrub_zero(x), y: scrub_zero(y) })
        }
        (SpaceSpec::PlaneWithRay, Chart::Ray { z }) => {
            if !(z >= 0.0) || !z.is_finite() {
                return Err(Error::InvalidChart(format!("ray requires z >= 0, got {z}")));
            }
            if z == 0.0 {
                Ok(Chart::Plane { x: 0.0, y: 0.0 })
            } else {
                Ok(Chart::Ray { z })
            }
        }
        (space, chart) => Err(Error::InvalidChart(format!(
            "chart {chart:?} does not belong to space {space:?}"
        ))),
    }
}

// ---------------------------------------------------------------------------
// Distances
// ---------------------------------------------------------------------------

fn clamp_cos(x: f64) -> f64 {
    x.clamp(-1.0, 1.0)
}

fn dot3(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn norm3(a: &[f64; 3]) -> f64 {
    dot3(a, a).sqrt()
}

fn euclid_norm(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// Cone law of cosines, clamped against negative round-off.
pub(crate) fn cone_law(t: f64, s: f64, d_base: f64) -> f64 {
    (t * t + s * s - 2.0 * t * s * d_base.cos()).max(0.0).sqrt()
}

pub(crate) fn chart_distance(space: &SpaceSpec, a: &Chart, b: &Chart) -> f64 {
    match (space, a, b) {
        (SpaceSpec::Euclidean { .. }, Chart::Euclidean(x), Chart::Euclidean(y)) => {
            euclid_norm(x, y)
        }
        (SpaceSpec::RoundSphere { rho }, Chart::Sphere(x), Chart::Sphere(y)) => {
            rho * clamp_cos(dot3(x, y)).acos()
        }
        (SpaceSpec::ProjectivePlane { rho }, Chart::Projective(x), Chart::Projective(y)) => {
            rho * clamp_cos(dot3(x, y).abs()).acos()
        }
        (
            SpaceSpec::Cone { base },
            Chart::ConePoint { base: x, t },
            Chart::ConePoint { base: y, t: s },
        ) => {
            if *t == 0.0 || *s == 0.0 {
                return t + s;
            }
            cone_law(*t, *s, chart_distance(base, x, y))
        }
        (SpaceSpec::ConeOfProjectivePlane, Chart::ConeProjective(x), Chart::ConeProjective(y)) => {
            let diff = [x[0] - y[0], x[1] - y[1], x[2] - y[2]];
            let sum = [x[0] + y[0], x[1] + y[1], x[2] + y[2]];
            norm3(&diff).min(norm3(&sum))
        }
        (SpaceSpec::GluedPlanes, Chart::Glued { sheet: sa, u: ua, v: va }, Chart::Glued { sheet: sb, u: ub, v: vb }) => {
            if sa == sb {
                ((ua - ub) * (ua - ub) + (va - vb) * (va - vb)).sqrt()
            } else {
                // Cross-sheet: unfold across the seam. On Xy the seam offset
                // is |x|; on YzPlus it is z.
                let (x, y_xy, yp, z) = if *sa == GluedSheet::Xy {
                    (*ua, *va, *ub, *vb)
                } else {
                    (*ub, *vb, *ua, *va)
                };
                let along = x.abs() + z;
                let dy = y_xy - yp;
                (along * along + dy * dy).sqrt()
            }
        }
        (SpaceSpec::PlaneWithRay, Chart::Plane { x: x1, y: y1 }, Chart::Plane { x: x2, y: y2 }) => {
            ((x1 - x2) * (x1 - x2) + (y1 - y2) * (y1 - y2)).sqrt()
        }
        (SpaceSpec::PlaneWithRay, Chart::Plane { x, y }, Chart::Ray { z })
        | (SpaceSpec::PlaneWithRay, Chart::Ray { z }, Chart::Plane { x, y }) => {
            (x * x + y * y).sqrt() + z
        }
        (SpaceSpec::PlaneWithRay, Chart::Ray { z: z1 }, Chart::Ray { z: z2 }) => (z1 - z2).abs(),
        _ => f64::NAN, // unreachable for validated points
    }
}

/// Projection of a glued-planes chart to (x-or-z offset, y) on its own sheet.
fn glued_shadow(chart: &Chart) -> (f64, f64) {
    match chart {
        Chart::Glued { sheet: GluedSheet::Xy, u, v } => (*u, *v),
        Chart::Glued { sheet: GluedSheet::YzPlus, u, v } => (*v, *u),
        _ => (0.0, 0.0),
    }
}

/// Hausdorff dimension of the space where it is homogeneous.
pub(crate) fn natural_dimension(space: &SpaceSpec) -> Option<usize> {
    match space {
        SpaceSpec::Euclidean { dim } => Some(*dim),
        SpaceSpec::RoundSphere { .. } | SpaceSpec::ProjectivePlane { .. } => Some(2),
        SpaceSpec::Cone { base } => natural_dimension(base).map(|d| d + 1),
        SpaceSpec::ConeOfProjectivePlane => Some(3),
        SpaceSpec::GluedPlanes => Some(2),
        SpaceSpec::PlaneWithRay => None, // 2-dimensional plane joined to a 1-dimensional ray
    }
}

fn base_dimension(base: &SpaceSpec) -> usize {
    natural_dimension(base).unwrap_or(2)
}

// ---------------------------------------------------------------------------
// Random primitives
// ---------------------------------------------------------------------------

fn random_gaussian(rng: &mut ChaCha8Rng) -> f64 {
    // Box-Muller; two uniforms per normal keeps the stream layout simple.
    let u1: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
    let u2: f64 = rng.gen::<f64>();
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

fn random_unit(rng: &mut ChaCha8Rng) -> [f64; 3] {
    loop {
        let v = [random_gaussian(rng), random_gaussian(rng), random_gaussian(rng)];
        let n = norm3(&v);
        if n > 1e-6 {
            return [v[0] / n, v[1] / n, v[2] / n];
        }
    }
}

fn random_unit_n(dim: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..dim).map(|_| random_gaussian(rng)).collect();
        let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if n > 1e-6 {
            return v.iter().map(|x| x / n).collect();
        }
    }
}

/// Orthonormal frame perpendicular to a unit vector.
fn tangent_frame(c: &[f64; 3]) -> ([f64; 3], [f64; 3]) {
    // Start from the axis least aligned with c.
    let pick = if c[0].abs() <= c[1].abs() && c[0].abs() <= c[2].abs() {
        [1.0, 0.0, 0.0]
    } else if c[1].abs() <= c[2].abs() {
        [0.0, 1.0, 0.0]
    } else {
        [0.0, 0.0, 1.0]
    };
    let d = dot3(&pick, c);
    let mut e1 = [pick[0] - d * c[0], pick[1] - d * c[1], pick[2] - d * c[2]];
    let n = norm3(&e1);
    e1 = [e1[0] / n, e1[1] / n, e1[2] / n];
    let e2 = [
        c[1] * e1[2] - c[2] * e1[1],
        c[2] * e1[0] - c[0] * e1[2],
        c[0] * e1[1] - c[1] * e1[0],
    ];
    (e1, e2)
}

/// Point at angle `theta` from `c` in direction `phi` of the tangent frame.
fn circle_point(c: &[f64; 3], theta: f64, phi: f64) -> [f64; 3] {
    let (e1, e2) = tangent_frame(c);
    let (st, ct) = theta.sin_cos();
    let (sp, cp) = phi.sin_cos();
    [
        ct * c[0] + st * (cp * e1[0] + sp * e2[0]),
        ct * c[1] + st * (cp * e1[1] + sp * e2[1]),
        ct * c[2] + st * (cp * e1[2] + sp * e2[2]),
    ]
}

fn random_cap(c: [f64; 3], theta_max: f64, rng: &mut ChaCha8Rng) -> [f64; 3] {
    // Uniform w.r.t. area: cos(theta) uniform on [cos(theta_max), 1].
    let ct = rng.gen_range(theta_max.cos()..=1.0);
    let theta = clamp_cos(ct).acos();
    let phi = rng.gen_range(0.0..std::f64::consts::TAU);
    circle_point(&c, theta, phi)
}

fn random_base_chart(base: &SpaceSpec, rng: &mut ChaCha8Rng) -> Chart {
    match base {
        SpaceSpec::RoundSphere { .. } => Chart::Sphere(random_unit(rng)),
        SpaceSpec::ProjectivePlane { .. } => Chart::Projective(canonical_sign(random_unit(rng))),
        _ => Chart::Sphere(random_unit(rng)),
    }
}

// ---------------------------------------------------------------------------
// Solver support: chart-aware sphere seeding and coordinate perturbation
// ---------------------------------------------------------------------------

/// Number of local descent axes for a chart.
pub(crate) fn descent_dims(space: &SpaceSpec, chart: &Chart) -> usize {
    match (space, chart) {
        (SpaceSpec::Euclidean { dim }, _) => *dim,
        (SpaceSpec::RoundSphere { .. }, _) | (SpaceSpec::ProjectivePlane { .. }, _) => 3,
        (SpaceSpec::Cone { base }, Chart::ConePoint { base: bc, .. }) => {
            descent_dims(base, bc) + 1
        }
        (SpaceSpec::ConeOfProjectivePlane, _) => 3,
        (SpaceSpec::GluedPlanes, _) => 2,
        (SpaceSpec::PlaneWithRay, Chart::Plane { .. }) => 2,
        (SpaceSpec::PlaneWithRay, Chart::Ray { .. }) => 1,
        _ => 0,
    }
}

/// Moves one chart coordinate by `delta`, clamping sheet constraints and
/// renormalizing direction vectors. The result is always a valid point.
pub(crate) fn perturb(space: &SpaceSpec, point: &Point, axis: usize, delta: f64) -> Point {
    let chart = perturb_chart(space, &point.chart, axis, delta);
    match canonicalize_chart(space, chart) {
        Ok(chart) => Point { space: space.clone(), chart },
        Err(_) => point.clone(),
    }
}

fn perturb_chart(space: &SpaceSpec, chart: &Chart, axis: usize, delta: f64) -> Chart {
    match (space, chart) {
        (SpaceSpec::Euclidean { .. }, Chart::Euclidean(coords)) => {
            let mut c = coords.clone();
            if axis < c.len() {
                c[axis] += delta;
            }
            Chart::Euclidean(c)
        }
        (SpaceSpec::RoundSphere { .. }, Chart::Sphere(v)) => {
            Chart::Sphere(perturb_unit(v, axis, delta))
        }
        (SpaceSpec::ProjectivePlane { .. }, Chart::Projective(v)) => {
            Chart::Projective(perturb_unit(v, axis, delta))
        }
        (SpaceSpec::Cone { base }, Chart::ConePoint { base: bc, t }) => {
            let base_dims = descent_dims(base, bc);
            if axis < base_dims {
                // Perturbing the base direction at the vertex is a no-op;
                // give it a tiny radial leg so descent can leave the tip.
                let t_eff = if *t == 0.0 { 0.0 } else { *t };
                Chart::ConePoint {
                    base: Box::new(perturb_chart(base, bc, axis, delta)),
                    t: t_eff,
                }
            } else {
                Chart::ConePoint { base: bc.clone(), t: (t + delta).max(0.0) }
            }
        }
        (SpaceSpec::ConeOfProjectivePlane, Chart::ConeProjective(v)) => {
            let mut c = *v;
            if axis < 3 {
                c[axis] += delta;
            }
            Chart::ConeProjective(c)
        }
        (SpaceSpec::GluedPlanes, Chart::Glued { sheet, u, v }) => match (sheet, axis) {
            (GluedSheet::Xy, 0) => Chart::Glued { sheet: *sheet, u: u + delta, v: *v },
            (GluedSheet::Xy, _) => Chart::Glued { sheet: *sheet, u: *u, v: v + delta },
            (GluedSheet::YzPlus, 0) => Chart::Glued { sheet: *sheet, u: u + delta, v: *v },
            (GluedSheet::YzPlus, _) => {
                Chart::Glued { sheet: *sheet, u: *u, v: (v + delta).max(0.0) }
            }
        },
        (SpaceSpec::PlaneWithRay, Chart::Plane { x, y }) => {
            if axis == 0 {
                Chart::Plane { x: x + delta, y: *y }
            } else {
                Chart::Plane { x: *x, y: y + delta }
            }
        }
        (SpaceSpec::PlaneWithRay, Chart::Ray { z }) => Chart::Ray { z: (z + delta).max(0.0) },
        _ => chart.clone(),
    }
}

fn perturb_unit(v: &[f64; 3], axis: usize, delta: f64) -> [f64; 3] {
    let mut c = *v;
    if axis < 3 {
        c[axis] += delta;
    }
    let n = norm3(&c);
    if n < 1e-9 {
        return *v;
    }
    [c[0] / n, c[1] / n, c[2] / n]
}

/// Chart-aware candidates lying exactly on the metric sphere `S(center;
/// radius)`. Quotient and glued charts seed every lift / sheet branch so no
/// solution component is missed. May return fewer than `count` points when
/// the sphere is empty or degenerate.
pub(crate) fn sphere_candidates(
    space: &SpaceSpec,
    center: &Point,
    radius: f64,
    count: usize,
    rng: &mut ChaCha8Rng,
) -> Vec<Point> {
    let mut out = Vec::with_capacity(count);
    let push = |chart: Chart, out: &mut Vec<Point>| {
        if let Ok(chart) = canonicalize_chart(space, chart) {
            out.push(Point { space: space.clone(), chart });
        }
    };
    match (space, &center.chart) {
        (SpaceSpec::Euclidean { dim }, Chart::Euclidean(c)) => {
            for _ in 0..count {
                let dir = random_unit_n(*dim, rng);
                let coords = c.iter().zip(dir.iter()).map(|(ci, di)| ci + radius * di).collect();
                push(Chart::Euclidean(coords), &mut out);
            }
        }
        (SpaceSpec::RoundSphere { rho }, Chart::Sphere(c)) => {
            let theta = radius / rho;
            if theta <= std::f64::consts::PI + 1e-9 {
                let theta = theta.min(std::f64::consts::PI);
                for _ in 0..count {
                    let phi = rng.gen_range(0.0..std::f64::consts::TAU);
                    push(Chart::Sphere(circle_point(c, theta, phi)), &mut out);
                }
            }
        }
        (SpaceSpec::ProjectivePlane { rho }, Chart::Projective(c)) => {
            let theta = radius / rho;
            if theta <= std::f64::consts::PI / 2.0 + 1e-9 {
                // Two lifts: angle theta and pi - theta around the chosen
                // representative.
                for i in 0..count {
                    let phi = rng.gen_range(0.0..std::f64::consts::TAU);
                    let th = if i % 2 == 0 { theta } else { std::f64::consts::PI - theta };
                    push(Chart::Projective(circle_point(c, th.min(std::f64::consts::PI), phi)), &mut out);
                }
            }
        }
        (SpaceSpec::Cone { base }, Chart::ConePoint { base: cb, t: s }) => {
            if *s == 0.0 {
                // Sphere around the vertex is the radial slice t = radius.
                for _ in 0..count {
                    push(
                        Chart::ConePoint { base: Box::new(random_base_chart(base, rng)), t: radius },
                        &mut out,
                    );
                }
            } else {
                if (s - radius).abs() <= 1e-12 * s.max(1.0) {
                    // The vertex itself lies on the sphere.
                    if let Ok(v) = space.vertex() {
                        out.push(v);
                    }
                }
                let mut attempts = 0;
                while out.len() < count && attempts < 8 * count {
                    attempts += 1;
                    let bp = random_base_chart(base, rng);
                    let d = chart_distance(base, &bp, cb);
                    let disc = radius * radius - s * s * d.sin() * d.sin();
                    if disc < 0.0 {
                        continue;
                    }
                    let root = disc.sqrt();
                    for t in [s * d.cos() + root, s * d.cos() - root] {
                        if t > 0.0 && out.len() < count {
                            push(Chart::ConePoint { base: Box::new(bp.clone()), t }, &mut out);
                        }
                    }
                }
            }
        }
        (SpaceSpec::ConeOfProjectivePlane, Chart::ConeProjective(c)) => {
            // Union of the spheres around both lifts, filtered back to the
            // quotient sphere.
            let mut attempts = 0;
            while out.len() < count && attempts < 8 * count {
                attempts += 1;
                let dir = random_unit(rng);
                let sign = if attempts % 2 == 0 { 1.0 } else { -1.0 };
                let cand = [
                    sign * c[0] + radius * dir[0],
                    sign * c[1] + radius * dir[1],
                    sign * c[2] + radius * dir[2],
                ];
                let diff = [cand[0] - c[0], cand[1] - c[1], cand[2] - c[2]];
                let sum = [cand[0] + c[0], cand[1] + c[1], cand[2] + c[2]];
                if (norm3(&diff).min(norm3(&sum)) - radius).abs() <= 1e-9 * radius.max(1.0) {
                    push(Chart::ConeProjective(cand), &mut out);
                }
            }
        }
        (SpaceSpec::GluedPlanes, Chart::Glued { sheet, u, v }) => {
            // (offset from seam, y) of the center on its own sheet.
            let (off, y0) = if *sheet == GluedSheet::Xy { (u.abs(), *v) } else { (*v, *u) };
            let cross = radius > off;
            let same_count = if cross { count / 2 } else { count };
            for _ in 0..same_count {
                let phi = rng.gen_range(0.0..std::f64::consts::TAU);
                let (du, dv) = (radius * phi.cos(), radius * phi.sin());
                let cand = Chart::Glued { sheet: *sheet, u: u + du, v: v + dv };
                if let Chart::Glued { sheet: GluedSheet::YzPlus, v: z, .. } = cand {
                    if z < 0.0 {
                        continue; // outside the half sheet
                    }
                }
                push(cand, &mut out);
            }
            if cross {
                // Unfolded circle on the other sheet: seam offset + other
                // offset = radius * cos(psi), |psi| <= acos(off / radius).
                let psi_max = clamp_cos(off / radius).acos();
                for i in 0..(count - same_count) {
                    let psi = rng.gen_range(-psi_max..=psi_max);
                    let other_off = radius * psi.cos() - off;
                    if other_off < 0.0 {
                        continue;
                    }
                    let y = y0 + radius * psi.sin();
                    let cand = match sheet {
                        GluedSheet::Xy => {
                            Chart::Glued { sheet: GluedSheet::YzPlus, u: y, v: other_off }
                        }
                        GluedSheet::YzPlus => {
                            let x = if i % 2 == 0 { other_off } else { -other_off };
                            Chart::Glued { sheet: GluedSheet::Xy, u: x, v: y }
                        }
                    };
                    push(cand, &mut out);
                }
            }
        }
        (SpaceSpec::PlaneWithRay, Chart::Plane { x, y }) => {
            let rho0 = (x * x + y * y).sqrt();
            let z = radius - rho0;
            if z >= 0.0 {
                push(Chart::Ray { z }, &mut out);
            }
            while out.len() < count {
                let phi = rng.gen_range(0.0..std::f64::consts::TAU);
                push(
                    Chart::Plane { x: x + radius * phi.cos(), y: y + radius * phi.sin() },
                    &mut out,
                );
            }
        }
        (SpaceSpec::PlaneWithRay, Chart::Ray { z: z0 }) => {
            push(Chart::Ray { z: z0 + radius }, &mut out);
            if z0 - radius >= 0.0 {
                push(Chart::Ray { z: z0 - radius }, &mut out);
            }
            let plane_r = radius - z0;
            if plane_r > 0.0 {
                while out.len() < count {
                    let phi = rng.gen_range(0.0..std::f64::consts::TAU);
                    push(Chart::Plane { x: plane_r * phi.cos(), y: plane_r * phi.sin() }, &mut out);
                }
            } else if plane_r == 0.0 {
                push(Chart::Plane { x: 0.0, y: 0.0 }, &mut out);
            }
        }
        _ => {}
    }
    out
}

/// Flattens a chart to a tag plus coordinate list; used for deterministic
/// ordering and seed derivation.
pub(crate) fn flatten_chart(chart: &Chart, out: &mut Vec<f64>) {
    match chart {
        Chart::Euclidean(c) => {
            out.push(0.0);
            out.extend_from_slice(c);
        }
        Chart::Sphere(v) => {
            out.push(1.0);
            out.extend_from_slice(v);
        }
        Chart::ConePoint { base, t } => {
            out.push(2.0);
            flatten_chart(base, out);
            out.push(*t);
        }
        Chart::Projective(v) => {
            out.push(3.0);
            out.extend_from_slice(v);
        }
        Chart::ConeProjective(v) => {
            out.push(4.0);
            out.extend_from_slice(v);
        }
        Chart::Glued { sheet, u, v } => {
            out.push(5.0);
            out.push(match sheet {
                GluedSheet::Xy => 0.0,
                GluedSheet::YzPlus => 1.0,
            });
            out.push(*u);
            out.push(*v);
        }
        Chart::Plane { x, y } => {
            out.push(6.0);
            out.push(*x);
            out.push(*y);
        }
        Chart::Ray { z } => {
            out.push(7.0);
            out.push(*z);
        }
    }
}

/// Total order on points of one space; used to make cluster output and seed
/// derivation independent of enumeration order.
pub(crate) fn cmp_points(a: &Point, b: &Point) -> std::cmp::Ordering {
    let mut fa = Vec::new();
    let mut fb = Vec::new();
    flatten_chart(&a.chart, &mut fa);
    flatten_chart(&b.chart, &mut fb);
    for (x, y) in fa.iter().zip(fb.iter()) {
        let ord = x.total_cmp(y);
        if ord != std::cmp::Ordering::Equal {
            return ord;
        }
    }
    fa.len().cmp(&fb.len())
}
