//! Certify or refute the tetrahedral property at a point.
//!
//! The infimum of h over the t-cube `[alpha r, beta r]^(n-1)` is estimated by
//! a tensor grid followed by pattern-search descent from the lowest cells.
//! The report keeps both the raw grid minimum and the refined value so
//! convergence is visible.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::slicer::{compass_search, h_value, Tolerances};
use crate::spaces::{perturb, sphere_candidates, Chart, Point, SpaceSpec};
use crate::{Error, Result};

/// Cost cap: grid evaluation grows as `grid_m^(n-1)`.
pub const DEFAULT_DIM_CAP: usize = 4;
/// Without an explicit target constant, `C_best` at or above this certifies
/// that some positive constant works.
pub const HOLDS_FLOOR: f64 = 1e-3;
/// Without an explicit target constant, `C_best` below this is
/// indistinguishable from zero.
pub const FAILS_CEILING: f64 = 1e-6;
/// Relative margin around a target constant inside which the verdict is
/// honest-inconclusive.
pub const TARGET_MARGIN: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    #[serde(rename = "HOLDS")]
    Holds,
    #[serde(rename = "FAILS")]
    Fails,
    #[serde(rename = "INCONCLUSIVE")]
    Inconclusive,
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Verdict::Holds => write!(f, "HOLDS"),
            Verdict::Fails => write!(f, "FAILS"),
            Verdict::Inconclusive => write!(f, "INCONCLUSIVE"),
        }
    }
}

/// A tetrahedral-property query at one point and radius.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TetraQuery {
    pub space: SpaceSpec,
    pub p: Point,
    pub r: f64,
    /// Dimension of the property; `n - 1` apexes are required.
    pub n: usize,
    pub alpha: f64,
    pub beta: f64,
    /// Target constant; when absent the checker reports whether *some*
    /// positive constant works.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c_target: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub apexes: Option<Vec<Point>>,
    pub tol: Tolerances,
}

impl TetraQuery {
    pub fn validate(&self) -> Result<()> {
        self.space.validate()?;
        self.tol.validate()?;
        if self.p.space() != &self.space {
            return Err(Error::MismatchedSpaces("query point outside the space".into()));
        }
        if !(self.r > 0.0) || !self.r.is_finite() {
            return Err(Error::InvalidInput("radius r must be positive".into()));
        }
        if self.n < 2 {
            return Err(Error::InvalidInput("dimension n must be at least 2".into()));
        }
        if !(0.0 < self.alpha && self.alpha < self.beta && self.beta < 2.0) {
            return Err(Error::InvalidInput(format!(
                "need 0 < alpha < beta < 2, got alpha={} beta={}",
                self.alpha, self.beta
            )));
        }
        if let Some(c) = self.c_target {
            if !(c > 0.0) {
                return Err(Error::InvalidInput("target constant C must be positive".into()));
            }
        }
        Ok(())
    }
}

/// Checker result: verdict, best constant estimate, witness, diagnostics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TetraReport {
    pub verdict: Verdict,
    /// `refined_min / r`, the estimated infimum of h over the cube in units
    /// of r.
    pub c_best: f64,
    pub t_witness: Vec<f64>,
    pub apexes_used: Vec<Point>,
    pub grid_min: f64,
    pub refined_min: f64,
    pub notes: Vec<String>,
}

fn grid_axis(alpha: f64, beta: f64, r: f64, m: usize) -> Vec<f64> {
    let lo = alpha * r;
    let hi = beta * r;
    (0..m).map(|i| lo + (hi - lo) * i as f64 / (m - 1) as f64).collect()
}

fn decode_index(mut flat: usize, m: usize, dims: usize) -> Vec<usize> {
    let mut idx = vec![0; dims];
    for d in (0..dims).rev() {
        idx[d] = flat % m;
        flat /= m;
    }
    idx
}

fn eval_h_grid(
    space: &SpaceSpec,
    p: &Point,
    apexes: &[Point],
    r: f64,
    axis: &[f64],
    dims: usize,
    tol: &Tolerances,
) -> Result<Vec<f64>> {
    let m = axis.len();
    let total = m.pow(dims as u32);
    (0..total)
        .into_par_iter()
        .map(|flat| {
            let idx = decode_index(flat, m, dims);
            let t: Vec<f64> = idx.iter().map(|&i| axis[i]).collect();
            h_value(space, p, apexes, r, &t, tol)
        })
        .collect()
}

/// Structural emptiness at cone vertices: when the base diameter is below
/// pi/3, every point of `S(o; r)` has `S(x; r) ∩ S(o; r)` empty, so h
/// vanishes at `t = r`. Applies whenever the t-cube contains r.
fn structural_cone_failure(q: &TetraQuery) -> Option<String> {
    let base = match &q.space {
        SpaceSpec::Cone { base } => base,
        _ => return None,
    };
    let diam = base.diameter()?;
    if diam >= std::f64::consts::PI / 3.0 {
        return None;
    }
    let is_vertex = matches!(q.p.chart(), Chart::ConePoint { t, .. } if *t == 0.0);
    if !is_vertex || !(q.alpha <= 1.0 && 1.0 <= q.beta) {
        return None;
    }
    Some(format!(
        "cone base diameter {diam:.6} < pi/3: points x, y of S(o; r) satisfy \
         d(x, y)^2 = 2r^2(1 - cos d_base) < r^2, so S(x; r) misses S(o; r) and \
         h = 0 at t = r, which lies in [alpha r, beta r]"
    ))
}

fn verdict_for(c_best: f64, c_target: Option<f64>, notes: &mut Vec<String>) -> Verdict {
    match c_target {
        Some(c) => {
            let margin = TARGET_MARGIN * c;
            if (c_best - c).abs() < margin {
                notes.push(format!(
                    "within {margin:e} of the target constant; verdict withheld"
                ));
                Verdict::Inconclusive
            } else if c_best >= c {
                Verdict::Holds
            } else {
                Verdict::Fails
            }
        }
        None => {
            if c_best >= HOLDS_FLOOR {
                notes.push(format!(
                    "no target constant given: HOLDS means some C >= {HOLDS_FLOOR:e} works"
                ));
                Verdict::Holds
            } else if c_best < FAILS_CEILING {
                notes.push(format!(
                    "no target constant given: estimated infimum below {FAILS_CEILING:e} of r"
                ));
                Verdict::Fails
            } else {
                notes.push("estimated infimum positive but tiny; verdict withheld".into());
                Verdict::Inconclusive
            }
        }
    }
}

/// Runs the property check with the default dimension cap.
pub fn check_tetrahedral(q: &TetraQuery) -> Result<TetraReport> {
    check_tetrahedral_with_cap(q, DEFAULT_DIM_CAP)
}

pub fn check_tetrahedral_with_cap(q: &TetraQuery, cap: usize) -> Result<TetraReport> {
    q.validate()?;
    if q.n > cap {
        return Err(Error::DimensionCap { n: q.n, cap });
    }
    let apexes = q.apexes.as_ref().ok_or(Error::MissingApexes)?;
    if apexes.len() != q.n - 1 {
        return Err(Error::InvalidInput(format!(
            "need {} apexes for an n = {} query, got {}",
            q.n - 1,
            q.n,
            apexes.len()
        )));
    }
    for apex in apexes {
        let deviation = (q.space.distance(&q.p, apex)? - q.r).abs();
        if deviation > q.tol.tau_sphere {
            return Err(Error::ApexOffSphere { deviation, tolerance: q.tol.tau_sphere });
        }
    }

    let mut notes = Vec::new();
    if let Some(reason) = structural_cone_failure(q) {
        notes.push(reason);
        return Ok(TetraReport {
            verdict: Verdict::Fails,
            c_best: 0.0,
            t_witness: vec![q.r; q.n - 1],
            apexes_used: apexes.clone(),
            grid_min: 0.0,
            refined_min: 0.0,
            notes,
        });
    }

    let dims = q.n - 1;
    let axis = grid_axis(q.alpha, q.beta, q.r, q.tol.grid_m);
    let values = eval_h_grid(&q.space, &q.p, apexes, q.r, &axis, dims, &q.tol)?;

    let mut grid_min = f64::INFINITY;
    let mut argmin = 0usize;
    for (i, v) in values.iter().enumerate() {
        if *v < grid_min {
            grid_min = *v;
            argmin = i;
        }
    }
    let m = axis.len();
    let witness_of = |flat: usize| -> Vec<f64> {
        decode_index(flat, m, dims).iter().map(|&i| axis[i]).collect()
    };

    // Local descent from the lowest cells. Skipped when the grid already
    // found (numerical) zero: h is nonnegative.
    let mut refined_min = grid_min;
    let mut t_witness = witness_of(argmin);
    if grid_min > 1e-9 * q.r {
        let mut order: Vec<usize> = (0..values.len()).collect();
        order.sort_by(|&a, &b| values[a].total_cmp(&values[b]).then(a.cmp(&b)));
        let spacing = (q.beta - q.alpha) * q.r / (m - 1) as f64;
        let lo = q.alpha * q.r;
        let hi = q.beta * q.r;
        for &start in order.iter().take(5) {
            let t0 = witness_of(start);
            let (t_ref, v_ref) = compass_search(
                t0,
                values[start],
                dims,
                spacing,
                1e-9 * q.r,
                25,
                0.0,
                f64::INFINITY,
                |t, axis_i, delta| {
                    let mut t2 = t.clone();
                    t2[axis_i] = (t2[axis_i] + delta).clamp(lo, hi);
                    t2
                },
                |t| {
                    h_value(&q.space, &q.p, apexes, q.r, t, &q.tol).unwrap_or(f64::INFINITY)
                },
            );
            if v_ref < refined_min {
                refined_min = v_ref;
                t_witness = t_ref;
            }
        }
    }

    let c_best = refined_min / q.r;
    let verdict = verdict_for(c_best, q.c_target, &mut notes);
    Ok(TetraReport {
        verdict,
        c_best,
        t_witness,
        apexes_used: apexes.clone(),
        grid_min,
        refined_min,
        notes,
    })
}

/// Property check on the symmetric interval `[(1 - beta) r, (1 + beta) r]`.
pub fn check_legacy(q: &TetraQuery, beta_legacy: f64) -> Result<TetraReport> {
    if !(0.0 < beta_legacy && beta_legacy < 1.0) {
        return Err(Error::InvalidInput(format!(
            "legacy beta must lie in (0, 1), got {beta_legacy}"
        )));
    }
    let mapped = TetraQuery { alpha: 1.0 - beta_legacy, beta: 1.0 + beta_legacy, ..q.clone() };
    let mut report = check_tetrahedral(&mapped)?;
    report.notes.insert(
        0,
        format!(
            "legacy beta = {beta_legacy}: interval [{}, {}] of r",
            1.0 - beta_legacy,
            1.0 + beta_legacy
        ),
    );
    Ok(report)
}

/// Cheap grid-only infimum estimate used inside the apex search.
fn quick_c_best(
    space: &SpaceSpec,
    p: &Point,
    apexes: &[Point],
    r: f64,
    alpha: f64,
    beta: f64,
    tol: &Tolerances,
) -> Result<f64> {
    let dims = apexes.len();
    let axis = grid_axis(alpha, beta, r, 7);
    let values = eval_h_grid(space, p, apexes, r, &axis, dims, tol)?;
    Ok(values.iter().fold(f64::INFINITY, |a, &b| a.min(b)) / r)
}

/// Searches apex tuples on `S(p; r)` maximizing `C_best`: seeded random
/// restarts followed by coordinate-wise perturbation descent. `budget`
/// counts tuple evaluations. Deterministic given `seed`.
#[allow(clippy::too_many_arguments)]
pub fn search_apexes(
    space: &SpaceSpec,
    p: &Point,
    r: f64,
    n: usize,
    alpha: f64,
    beta: f64,
    budget: usize,
    seed: u64,
    tol: &Tolerances,
) -> Result<(Vec<Point>, TetraReport)> {
    if budget == 0 {
        return Err(Error::InvalidInput("search budget must be at least 1".into()));
    }
    if n < 2 || n > DEFAULT_DIM_CAP {
        return Err(Error::DimensionCap { n, cap: DEFAULT_DIM_CAP });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pool = sphere_candidates(space, p, r, 256.max(4 * n), &mut rng);
    if pool.is_empty() {
        return Ok((
            Vec::new(),
            TetraReport {
                verdict: Verdict::Fails,
                c_best: 0.0,
                t_witness: vec![0.0; n - 1],
                apexes_used: Vec::new(),
                grid_min: 0.0,
                refined_min: 0.0,
                notes: vec![format!("sphere S(p; {r}) is empty within the solver's reach")],
            },
        ));
    }

    // Search with a light solver: a coarse grid and fewer candidates are
    // enough to rank tuples.
    let search_tol = Tolerances { samples: tol.samples.min(512), ..tol.clone() };
    let mut best_apexes: Vec<Point> = Vec::new();
    let mut best_c = f64::NEG_INFINITY;
    let mut spent = 0usize;

    let restarts = (budget * 3 / 5).max(1);
    while spent < restarts {
        let tuple: Vec<Point> =
            (0..n - 1).map(|_| pool[rng.gen_range(0..pool.len())].clone()).collect();
        spent += 1;
        let c = quick_c_best(space, p, &tuple, r, alpha, beta, &search_tol)?;
        if c > best_c {
            best_c = c;
            best_apexes = tuple;
        }
    }

    // Perturbation descent: move one apex along one chart axis, project back
    // onto the sphere by re-seeding from the perturbed direction.
    let mut step = 0.3 * r;
    'outer: while spent < budget && step > 1e-4 * r {
        let mut improved = false;
        for apex_i in 0..best_apexes.len() {
            let dims = crate::spaces::descent_dims(space, best_apexes[apex_i].chart());
            for axis in 0..dims {
                for dir in [step, -step] {
                    if spent >= budget {
                        break 'outer;
                    }
                    let moved = perturb(space, &best_apexes[apex_i], axis, dir);
                    let candidate = snap_to_sphere(space, p, r, &moved, tol)
                        .unwrap_or_else(|| moved.clone());
                    if (space.distance(p, &candidate).unwrap_or(f64::NAN) - r).abs()
                        > tol.tau_sphere
                    {
                        continue;
                    }
                    let mut tuple = best_apexes.clone();
                    tuple[apex_i] = candidate;
                    spent += 1;
                    let c = quick_c_best(space, p, &tuple, r, alpha, beta, &search_tol)?;
                    if c > best_c {
                        best_c = c;
                        best_apexes = tuple;
                        improved = true;
                    }
                }
            }
        }
        if !improved {
            step *= 0.5;
        }
    }

    let query = TetraQuery {
        space: space.clone(),
        p: p.clone(),
        r,
        n,
        alpha,
        beta,
        c_target: None,
        apexes: Some(best_apexes.clone()),
        tol: tol.clone(),
    };
    let mut report = check_tetrahedral(&query)?;
    report.notes.push(format!("apex search spent {spent} of {budget} tuple evaluations"));
    Ok((best_apexes, report))
}

/// Pulls a near-sphere point back onto `S(center; radius)` with a short
/// residual descent.
fn snap_to_sphere(
    space: &SpaceSpec,
    center: &Point,
    radius: f64,
    start: &Point,
    tol: &Tolerances,
) -> Option<Point> {
    let dims = crate::spaces::descent_dims(space, start.chart());
    let objective = |x: &Point| {
        let d = space.distance(x, center).unwrap_or(f64::NAN) - radius;
        d * d
    };
    let v0 = objective(start);
    let (snapped, v) = compass_search(
        start.clone(),
        v0,
        dims,
        0.1 * radius,
        0.01 * tol.tau_sphere,
        120,
        0.25 * tol.tau_sphere * tol.tau_sphere,
        f64::INFINITY,
        |x, axis, delta| perturb(space, x, axis, delta),
        objective,
    );
    if v.sqrt() <= tol.tau_sphere {
        Some(snapped)
    } else {
        None
    }
}
