//! Ball volumes on the catalog spaces and the volume lower bound check.
//!
//! Analytic values exist for the flat, spherical, quotient, and glued cases;
//! Monte Carlo uses a dominating sampler per chart (sheet-area-weighted on
//! glued complexes) with deterministic batched streams, so worker count never
//! changes the result.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::spaces::{natural_dimension, Chart, GluedSheet, Point, Region, SpaceSpec};
use crate::{Error, Result};

use std::f64::consts::PI;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VolumeMethod {
    Analytic,
    MonteCarlo,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VolumeEstimate {
    pub value: f64,
    /// Standard error of the estimate; zero for analytic values.
    pub stderr: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VolumeBoundReport {
    pub volume: VolumeEstimate,
    pub bound: f64,
    /// `value / bound`.
    pub slack: f64,
    pub ok: bool,
    pub notes: Vec<String>,
}

/// Volume of the unit ball in `R^n`: recursion `V_n = 2 pi V_{n-2} / n`.
pub fn unit_ball_volume(n: usize) -> f64 {
    match n {
        0 => 1.0,
        1 => 2.0,
        _ => 2.0 * PI * unit_ball_volume(n - 2) / n as f64,
    }
}

#[derive(Clone, Copy, Default)]
struct Kahan {
    sum: f64,
    c: f64,
}

impl Kahan {
    fn add(&mut self, x: f64) {
        let y = x - self.c;
        let t = self.sum + y;
        self.c = (t - self.sum) - y;
        self.sum = t;
    }
}

const MC_BATCH: usize = 4096;

/// Deterministic batched Monte Carlo mean: batch `i` draws from stream `i`
/// of one seeded generator, and batches combine in index order.
fn mc_mean<F>(samples: usize, seed: u64, f: F) -> (f64, f64)
where
    F: Fn(&mut ChaCha8Rng) -> f64 + Sync,
{
    let batches = samples.div_ceil(MC_BATCH);
    let partials: Vec<(Kahan, Kahan, usize)> = (0..batches)
        .into_par_iter()
        .map(|b| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(b as u64 + 1);
            let count = MC_BATCH.min(samples - b * MC_BATCH);
            let mut s1 = Kahan::default();
            let mut s2 = Kahan::default();
            for _ in 0..count {
                let w = f(&mut rng);
                s1.add(w);
                s2.add(w * w);
            }
            (s1, s2, count)
        })
        .collect();
    let mut sum = Kahan::default();
    let mut sum_sq = Kahan::default();
    let mut n = 0usize;
    for (s1, s2, count) in partials {
        sum.add(s1.sum);
        sum_sq.add(s2.sum);
        n += count;
    }
    let mean = sum.sum / n as f64;
    let var = ((sum_sq.sum / n as f64 - mean * mean) * n as f64 / (n as f64 - 1.0)).max(0.0);
    (mean, (var / n as f64).sqrt())
}

fn mc_seed(space: &SpaceSpec, p: &Point, r: f64, user_seed: u64) -> u64 {
    // Seeds are fixed per (space, p, r) so repeated estimates agree.
    let mut h: u64 = 0xcbf2_9ce4_8422_2325 ^ user_seed;
    let mut mix = |w: u64| {
        for b in w.to_le_bytes() {
            h ^= b as u64;
            h = h.wrapping_mul(0x0000_0100_0000_01b3);
        }
    };
    if let Ok(json) = serde_json::to_vec(&(space, p)) {
        for chunk in json.chunks(8) {
            let mut w = [0u8; 8];
            w[..chunk.len()].copy_from_slice(chunk);
            mix(u64::from_le_bytes(w));
        }
    }
    mix(r.to_bits());
    h
}

fn base_area(base: &SpaceSpec) -> Result<f64> {
    match base {
        SpaceSpec::RoundSphere { rho } => Ok(4.0 * PI * rho * rho),
        SpaceSpec::ProjectivePlane { rho } => Ok(2.0 * PI * rho * rho),
        _ => Err(Error::MethodUnavailable("unsupported cone base".into())),
    }
}

/// Area of the part of a radius-`r` disk lying beyond distance `a >= 0` from
/// its center (a circular segment).
fn segment_area(r: f64, a: f64) -> f64 {
    if a >= r {
        return 0.0;
    }
    r * r * (a / r).acos() - a * (r * r - a * a).sqrt()
}

fn plane_with_ray_parts(p: &Point, r: f64) -> (f64, f64) {
    match p.chart() {
        Chart::Plane { x, y } => {
            let rho0 = (x * x + y * y).sqrt();
            (PI * r * r, (r - rho0).max(0.0))
        }
        Chart::Ray { z } => {
            let plane_r = (r - z).max(0.0);
            let ray_len = (z + r).min(2.0 * r);
            (PI * plane_r * plane_r, ray_len)
        }
        _ => (0.0, 0.0),
    }
}

fn analytic_ball_volume(space: &SpaceSpec, p: &Point, r: f64) -> Result<f64> {
    match (space, p.chart()) {
        (SpaceSpec::Euclidean { dim }, _) => Ok(unit_ball_volume(*dim) * r.powi(*dim as i32)),
        (SpaceSpec::RoundSphere { rho }, _) => {
            let theta = (r / rho).min(PI);
            Ok(2.0 * PI * rho * rho * (1.0 - theta.cos()))
        }
        (SpaceSpec::ProjectivePlane { rho }, _) => {
            let theta = (r / rho).min(PI / 2.0);
            Ok(2.0 * PI * rho * rho * (1.0 - theta.cos()))
        }
        (SpaceSpec::Cone { base }, Chart::ConePoint { t, .. }) => {
            if *t != 0.0 {
                return Err(Error::MethodUnavailable(
                    "analytic cone ball volume is available at the vertex only".into(),
                ));
            }
            Ok(base_area(base)? * r.powi(3) / 3.0)
        }
        (SpaceSpec::ConeOfProjectivePlane, Chart::ConeProjective(c)) => {
            // Quotient volume = Lebesgue(B(c) U B(-c)) / 2; the intersection
            // of the two balls is a lens at center distance 2|c|.
            let v_ball = 4.0 * PI * r.powi(3) / 3.0;
            let d = 2.0 * (c[0] * c[0] + c[1] * c[1] + c[2] * c[2]).sqrt();
            let lens = if d >= 2.0 * r {
                0.0
            } else {
                PI * (4.0 * r + d) * (2.0 * r - d) * (2.0 * r - d) / 12.0
            };
            Ok(v_ball - 0.5 * lens)
        }
        (SpaceSpec::GluedPlanes, Chart::Glued { sheet, u, v }) => {
            // Sum of per-sheet Lebesgue areas of the ball's intersections.
            let (own, other) = match sheet {
                GluedSheet::Xy => {
                    let off = u.abs();
                    (PI * r * r, segment_area(r, off))
                }
                GluedSheet::YzPlus => {
                    let z0 = *v;
                    let own = PI * r * r - segment_area(r, z0);
                    (own, 2.0 * segment_area(r, z0))
                }
            };
            Ok(own + other)
        }
        (SpaceSpec::PlaneWithRay, _) => {
            let (plane_area, ray_length) = plane_with_ray_parts(p, r);
            Err(Error::MixedDimension { plane_area, ray_length })
        }
        _ => Err(Error::MethodUnavailable(format!("no analytic volume for {space:?}"))),
    }
}

fn monte_carlo_ball_volume(
    space: &SpaceSpec,
    p: &Point,
    r: f64,
    samples: usize,
    seed: u64,
) -> Result<VolumeEstimate> {
    if samples < 2 {
        return Err(Error::InvalidInput("monte carlo needs at least 2 samples".into()));
    }
    let seed = mc_seed(space, p, r, seed);
    match (space, p.chart()) {
        (SpaceSpec::Euclidean { dim }, Chart::Euclidean(c)) => {
            let dim = *dim;
            let box_vol = (2.0 * r).powi(dim as i32);
            let center = c.clone();
            let (mean, se) = mc_mean(samples, seed, |rng| {
                let mut d2 = 0.0;
                for ci in &center {
                    let x = ci + r * rng.gen_range(-1.0..=1.0);
                    d2 += (x - ci) * (x - ci);
                }
                if d2 <= r * r {
                    1.0
                } else {
                    0.0
                }
            });
            Ok(VolumeEstimate { value: box_vol * mean, stderr: box_vol * se })
        }
        (SpaceSpec::RoundSphere { rho }, _) | (SpaceSpec::ProjectivePlane { rho }, _) => {
            let total = match space {
                SpaceSpec::RoundSphere { .. } => 4.0 * PI * rho * rho,
                _ => 2.0 * PI * rho * rho,
            };
            let space_c = space.clone();
            let center = p.clone();
            let (mean, se) = mc_mean(samples, seed, |rng| {
                let q = space_c
                    .sample_point(&Region::Whole, rng.gen::<u64>())
                    .expect("bounded space sampling");
                if space_c.distance(&q, &center).unwrap_or(f64::INFINITY) <= r {
                    1.0
                } else {
                    0.0
                }
            });
            Ok(VolumeEstimate { value: total * mean, stderr: total * se })
        }
        (SpaceSpec::Cone { base }, Chart::ConePoint { t: t0, .. }) => {
            // Dominating band: radial in [max(t0 - r, 0), t0 + r], base
            // uniform; the volume element is t^2 dA dt.
            let lo = (t0 - r).max(0.0);
            let hi = t0 + r;
            let area = base_area(base)?;
            let scale = area * (hi - lo);
            let space_c = space.clone();
            let base_c = (**base).clone();
            let center = p.clone();
            let (mean, se) = mc_mean(samples, seed, |rng| {
                let t = rng.gen_range(lo..=hi);
                let u = base_c
                    .sample_point(&Region::Whole, rng.gen::<u64>())
                    .expect("bounded base sampling");
                let q = space_c
                    .point(Chart::ConePoint { base: Box::new(u.chart().clone()), t })
                    .expect("cone chart");
                if space_c.distance(&q, &center).unwrap_or(f64::INFINITY) <= r {
                    t * t
                } else {
                    0.0
                }
            });
            Ok(VolumeEstimate { value: scale * mean, stderr: scale * se })
        }
        (SpaceSpec::ConeOfProjectivePlane, Chart::ConeProjective(c)) => {
            // Box covering B(c) U B(-c); each orbit is counted twice.
            let half = [c[0].abs() + r, c[1].abs() + r, c[2].abs() + r];
            let box_vol = 8.0 * half[0] * half[1] * half[2];
            let cc = *c;
            let (mean, se) = mc_mean(samples, seed, |rng| {
                let q = [
                    half[0] * rng.gen_range(-1.0..=1.0),
                    half[1] * rng.gen_range(-1.0..=1.0),
                    half[2] * rng.gen_range(-1.0..=1.0),
                ];
                let d2m = (q[0] - cc[0]).powi(2) + (q[1] - cc[1]).powi(2) + (q[2] - cc[2]).powi(2);
                let d2p = (q[0] + cc[0]).powi(2) + (q[1] + cc[1]).powi(2) + (q[2] + cc[2]).powi(2);
                if d2m.min(d2p) <= r * r {
                    1.0
                } else {
                    0.0
                }
            });
            Ok(VolumeEstimate { value: 0.5 * box_vol * mean, stderr: 0.5 * box_vol * se })
        }
        (SpaceSpec::GluedPlanes, _) => {
            // Sheet-area-weighted rejection: one bounding box per sheet.
            let space_c = space.clone();
            let center = p.clone();
            let (off, y0) = match p.chart() {
                Chart::Glued { sheet: GluedSheet::Xy, u, v } => (u.abs(), *v),
                Chart::Glued { sheet: GluedSheet::YzPlus, u, v } => (*v, *u),
                _ => return Err(Error::InvalidChart("expected glued chart".into())),
            };
            let own_sheet = match p.chart() {
                Chart::Glued { sheet, .. } => *sheet,
                _ => unreachable!(),
            };
            // Own-sheet box is the full disk box; other-sheet reach is
            // r - off along the seam-normal direction.
            let cross_reach = (r - off).max(0.0);
            let boxes: Vec<(GluedSheet, f64, f64, f64, f64)> = {
                let mut v = Vec::new();
                match own_sheet {
                    GluedSheet::Xy => {
                        let (x0, yy0) = match p.chart() {
                            Chart::Glued { u, v, .. } => (*u, *v),
                            _ => unreachable!(),
                        };
                        v.push((GluedSheet::Xy, x0 - r, x0 + r, yy0 - r, yy0 + r));
                        if cross_reach > 0.0 {
                            v.push((GluedSheet::YzPlus, y0 - r, y0 + r, 0.0, cross_reach));
                        }
                    }
                    GluedSheet::YzPlus => {
                        let (yy0, z0) = match p.chart() {
                            Chart::Glued { u, v, .. } => (*u, *v),
                            _ => unreachable!(),
                        };
                        v.push((GluedSheet::YzPlus, yy0 - r, yy0 + r, (z0 - r).max(0.0), z0 + r));
                        if cross_reach > 0.0 {
                            v.push((GluedSheet::Xy, -cross_reach, cross_reach, y0 - r, y0 + r));
                        }
                    }
                }
                v
            };
            let total_area: f64 =
                boxes.iter().map(|(_, ulo, uhi, vlo, vhi)| (uhi - ulo) * (vhi - vlo)).sum();
            let mut value = 0.0;
            let mut var = 0.0;
            for (i, (sheet, ulo, uhi, vlo, vhi)) in boxes.iter().enumerate() {
                let area = (uhi - ulo) * (vhi - vlo);
                let share = ((samples as f64) * area / total_area).round().max(2.0) as usize;
                let sheet = *sheet;
                let (ulo, uhi, vlo, vhi) = (*ulo, *uhi, *vlo, *vhi);
                let space_cc = space_c.clone();
                let center_c = center.clone();
                let (mean, se) = mc_mean(share, seed.wrapping_add(i as u64), move |rng| {
                    let u = rng.gen_range(ulo..=uhi);
                    let v = rng.gen_range(vlo..=vhi);
                    match space_cc.point(Chart::Glued { sheet, u, v }) {
                        Ok(q)
                            if space_cc.distance(&q, &center_c).unwrap_or(f64::INFINITY)
                                <= r =>
                        {
                            1.0
                        }
                        _ => 0.0,
                    }
                });
                value += area * mean;
                var += (area * se) * (area * se);
            }
            Ok(VolumeEstimate { value, stderr: var.sqrt() })
        }
        (SpaceSpec::PlaneWithRay, _) => {
            let (plane_area, ray_length) = plane_with_ray_parts(p, r);
            Err(Error::MixedDimension { plane_area, ray_length })
        }
        _ => Err(Error::InvalidChart("point chart does not match the space".into())),
    }
}

/// Hausdorff volume of the metric ball `B_r(p)`.
pub fn ball_volume(
    space: &SpaceSpec,
    p: &Point,
    r: f64,
    method: VolumeMethod,
    samples: usize,
    seed: u64,
) -> Result<VolumeEstimate> {
    space.validate()?;
    if p.space() != space {
        return Err(Error::MismatchedSpaces("ball center outside the space".into()));
    }
    if !(r > 0.0) || !r.is_finite() {
        return Err(Error::InvalidInput("ball radius must be positive".into()));
    }
    match method {
        VolumeMethod::Analytic => {
            Ok(VolumeEstimate { value: analytic_ball_volume(space, p, r)?, stderr: 0.0 })
        }
        VolumeMethod::MonteCarlo => monte_carlo_ball_volume(space, p, r, samples, seed),
    }
}

/// Checks `Vol(B_r(p)) >= C (beta - alpha)^(n-1) r^n` for a certified
/// `(C, alpha, beta)`. Callers attest the certificate through a checker
/// report chain; a failed bound falsifies either that certificate or the
/// volume computation.
#[allow(clippy::too_many_arguments)]
pub fn verify_volume_bound(
    space: &SpaceSpec,
    p: &Point,
    r: f64,
    c: f64,
    alpha: f64,
    beta: f64,
    method: VolumeMethod,
    samples: usize,
    seed: u64,
) -> Result<VolumeBoundReport> {
    if !(c > 0.0) {
        return Err(Error::InvalidInput("certified constant C must be positive".into()));
    }
    if !(0.0 < alpha && alpha < beta && beta < 2.0) {
        return Err(Error::InvalidInput("need 0 < alpha < beta < 2".into()));
    }
    let n = natural_dimension(space).ok_or_else(|| {
        let (plane_area, ray_length) = plane_with_ray_parts(p, r);
        Error::MixedDimension { plane_area, ray_length }
    })?;
    let volume = ball_volume(space, p, r, method, samples, seed)?;
    let bound = c * (beta - alpha).powi(n as i32 - 1) * r.powi(n as i32);
    let ok = volume.value + 3.0 * volume.stderr >= bound;
    let mut notes = vec![format!(
        "assumes (C={c}, alpha={alpha}, beta={beta}) certified at p for radii up to {r}"
    )];
    if !ok {
        notes.push(format!(
            "bound violated: volume {} + 3*stderr {} < bound {bound}; either the certificate \
             or the volume computation is wrong",
            volume.value, volume.stderr
        ));
    }
    Ok(VolumeBoundReport { volume, bound, slack: volume.value / bound, ok, notes })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn euclid(n: usize) -> SpaceSpec {
        SpaceSpec::Euclidean { dim: n }
    }

    fn epoint(space: &SpaceSpec, coords: &[f64]) -> Point {
        space.point(Chart::Euclidean(coords.to_vec())).unwrap()
    }

    #[test]
    fn euclidean_ball_volumes() {
        let s = euclid(3);
        let p = epoint(&s, &[0.0, 0.0, 0.0]);
        let v = ball_volume(&s, &p, 1.0, VolumeMethod::Analytic, 0, 0).unwrap();
        assert!((v.value - 4.0 * PI / 3.0).abs() < 1e-12);
        assert_eq!(v.stderr, 0.0);
        // Scaling r^n.
        for r in [0.5, 2.0, 7.0] {
            let vr = ball_volume(&s, &p, r, VolumeMethod::Analytic, 0, 0).unwrap();
            assert!((vr.value - v.value * r.powi(3)).abs() < 1e-6 * vr.value);
        }
    }

    #[test]
    fn glued_planes_seam_volume() {
        let s = SpaceSpec::GluedPlanes;
        let p = s.point(Chart::Glued { sheet: GluedSheet::Xy, u: 0.0, v: 0.0 }).unwrap();
        let v = ball_volume(&s, &p, 2.0, VolumeMethod::Analytic, 0, 0).unwrap();
        assert!((v.value - 1.5 * PI * 4.0).abs() < 1e-12);
    }

    #[test]
    fn flat_cone_vertex_volume() {
        let s = SpaceSpec::Cone { base: Box::new(SpaceSpec::RoundSphere { rho: 1.0 }) };
        let o = s.vertex().unwrap();
        let v = ball_volume(&s, &o, 1.5, VolumeMethod::Analytic, 0, 0).unwrap();
        assert!((v.value - 4.0 * PI * 1.5f64.powi(3) / 3.0).abs() < 1e-12);
    }

    #[test]
    fn monte_carlo_matches_analytic_within_three_sigma() {
        let cases: Vec<(SpaceSpec, Point, f64)> = vec![
            (euclid(3), epoint(&euclid(3), &[0.0, 0.0, 0.0]), 1.0),
            (euclid(2), epoint(&euclid(2), &[1.0, -2.0]), 0.7),
            (
                SpaceSpec::RoundSphere { rho: 1.0 },
                SpaceSpec::RoundSphere { rho: 1.0 }.point(Chart::Sphere([0.0, 0.0, 1.0])).unwrap(),
                1.0,
            ),
            (
                SpaceSpec::GluedPlanes,
                SpaceSpec::GluedPlanes
                    .point(Chart::Glued { sheet: GluedSheet::Xy, u: 0.0, v: 0.0 })
                    .unwrap(),
                1.0,
            ),
            (
                SpaceSpec::GluedPlanes,
                SpaceSpec::GluedPlanes
                    .point(Chart::Glued { sheet: GluedSheet::Xy, u: 0.4, v: 0.3 })
                    .unwrap(),
                1.0,
            ),
            (
                SpaceSpec::Cone { base: Box::new(SpaceSpec::RoundSphere { rho: 0.5 }) },
                SpaceSpec::Cone { base: Box::new(SpaceSpec::RoundSphere { rho: 0.5 }) }
                    .vertex()
                    .unwrap(),
                1.0,
            ),
            (
                SpaceSpec::ConeOfProjectivePlane,
                SpaceSpec::ConeOfProjectivePlane.vertex().unwrap(),
                1.0,
            ),
            (
                SpaceSpec::ConeOfProjectivePlane,
                SpaceSpec::ConeOfProjectivePlane
                    .point(Chart::ConeProjective([0.4, 0.1, -0.2]))
                    .unwrap(),
                1.0,
            ),
        ];
        for (space, p, r) in cases {
            let exact = ball_volume(&space, &p, r, VolumeMethod::Analytic, 0, 0).unwrap();
            let mc = ball_volume(&space, &p, r, VolumeMethod::MonteCarlo, 100_000, 17).unwrap();
            assert!(
                (mc.value - exact.value).abs() <= 3.0 * mc.stderr.max(1e-6),
                "{space:?}: mc {} vs exact {} (stderr {})",
                mc.value,
                exact.value,
                mc.stderr
            );
        }
    }

    #[test]
    fn monte_carlo_is_deterministic() {
        let s = euclid(3);
        let p = epoint(&s, &[0.0, 0.0, 0.0]);
        let a = ball_volume(&s, &p, 1.0, VolumeMethod::MonteCarlo, 50_000, 7).unwrap();
        let b = ball_volume(&s, &p, 1.0, VolumeMethod::MonteCarlo, 50_000, 7).unwrap();
        assert_eq!(a.value.to_bits(), b.value.to_bits());
        assert_eq!(a.stderr.to_bits(), b.stderr.to_bits());
    }

    #[test]
    fn volume_monotone_in_radius() {
        let s = SpaceSpec::GluedPlanes;
        let p = s.point(Chart::Glued { sheet: GluedSheet::Xy, u: 0.5, v: 0.0 }).unwrap();
        let mut last = 0.0;
        for k in 1..=20 {
            let r = 0.2 * k as f64;
            let v = ball_volume(&s, &p, r, VolumeMethod::Analytic, 0, 0).unwrap().value;
            assert!(v >= last);
            last = v;
        }
    }

    #[test]
    fn plane_with_ray_reports_mixed_dimensions() {
        let s = SpaceSpec::PlaneWithRay;
        let p = s.point(Chart::Ray { z: 1.0 }).unwrap();
        match ball_volume(&s, &p, 2.0, VolumeMethod::Analytic, 0, 0) {
            Err(Error::MixedDimension { plane_area, ray_length }) => {
                assert!((plane_area - PI).abs() < 1e-12);
                assert!((ray_length - 3.0).abs() < 1e-12);
            }
            other => panic!("expected mixed-dimension report, got {other:?}"),
        }
    }

    #[test]
    fn volume_bound_example() {
        let s = euclid(3);
        let p = epoint(&s, &[0.0, 0.0, 0.0]);
        let report =
            verify_volume_bound(&s, &p, 1.0, 0.5, 0.9, 1.1, VolumeMethod::Analytic, 0, 0).unwrap();
        assert!(report.ok);
        // 4.18879 / 0.02 = 209.44
        assert!((report.slack - 4.0 * PI / 3.0 / 0.02).abs() < 1e-6 * report.slack);
    }
}
