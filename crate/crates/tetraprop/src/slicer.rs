//! Simultaneous metric-sphere solving and the h-function.
//!
//! `solve_intersection` finds the set `S(x_1..x_j; t_1..t_j)` numerically:
//! chart-aware candidates are seeded exactly on the first sphere, pushed onto
//! the remaining spheres by derivative-free descent on the squared residual,
//! then clustered. `h_value` evaluates the separation infimum of the
//! resulting set: the minimum pairwise distance between distinct solution
//! points, or 0 when the set is empty, a single point, or a continuum.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::spaces::{
    cmp_points, descent_dims, flatten_chart, perturb, sphere_candidates, Point, SpaceSpec,
};
use crate::{Error, Result};

/// One metric-sphere constraint `d(x, center) = radius`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SphereConstraint {
    pub center: Point,
    pub radius: f64,
}

/// Numerical policy of the solver.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// Accepted residual on each sphere constraint (a length).
    pub tau_sphere: f64,
    /// Cluster-merge radius (a length).
    pub delta_cluster: f64,
    /// A cluster of diameter above `kappa_continuum * delta_cluster` is a
    /// continuum.
    pub kappa_continuum: f64,
    /// Grid nodes per t-axis used by the property checker.
    pub grid_m: usize,
    /// Iteration budget of the per-candidate local descent.
    pub refine_iters: usize,
    /// Candidate count seeded on the first sphere.
    pub samples: usize,
    pub seed: u64,
}

impl Tolerances {
    /// Defaults scaled to a working radius: `tau = 1e-7 r`,
    /// `delta = 1e-3 r`, 4096 candidates, 200 descent iterations.
    pub fn for_radius(r: f64) -> Self {
        Tolerances {
            tau_sphere: 1e-7 * r,
            delta_cluster: 1e-3 * r,
            kappa_continuum: 10.0,
            grid_m: 17,
            refine_iters: 200,
            samples: 4096,
            seed: 0,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_samples(mut self, samples: usize) -> Self {
        self.samples = samples;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.tau_sphere > 0.0 && self.delta_cluster > 0.0 && self.kappa_continuum > 1.0) {
            return Err(Error::InvalidInput(
                "tolerances must satisfy 0 < tau_sphere, 0 < delta_cluster, kappa_continuum > 1"
                    .into(),
            ));
        }
        if self.tau_sphere >= self.delta_cluster {
            return Err(Error::InvalidInput(
                "tau_sphere must be below delta_cluster".into(),
            ));
        }
        if self.grid_m < 3 {
            return Err(Error::InvalidInput("grid_m must be at least 3".into()));
        }
        if self.samples == 0 || self.refine_iters == 0 {
            return Err(Error::InvalidInput("samples and refine_iters must be positive".into()));
        }
        Ok(())
    }
}

/// One connected group of accepted solver candidates.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Cluster {
    pub representative: Point,
    pub member_count: usize,
    pub cluster_diameter: f64,
}

/// Clustered numerical solution set of simultaneous sphere constraints.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct IntersectionSet {
    pub clusters: Vec<Cluster>,
    pub is_continuum: bool,
    pub residual_max: f64,
}

impl IntersectionSet {
    pub fn is_empty(&self) -> bool {
        self.clusters.is_empty()
    }
}

/// Greedy best-neighbor pattern search over chart axes. Returns the improved
/// state and its objective value; deterministic. `stall_floor` lets hopeless
/// candidates exit early: once the step is tiny relative to an objective
/// still above the floor, the walk is stuck on a plateau, not converging.
#[allow(clippy::too_many_arguments)]
pub(crate) fn compass_search<S, P, F>(
    mut state: S,
    mut value: f64,
    dims: usize,
    step0: f64,
    min_step: f64,
    max_iters: usize,
    target: f64,
    stall_floor: f64,
    perturb_fn: P,
    objective: F,
) -> (S, f64)
where
    S: Clone,
    P: Fn(&S, usize, f64) -> S,
    F: Fn(&S) -> f64,
{
    let mut step = step0;
    for _ in 0..max_iters {
        if value <= target || step < min_step {
            break;
        }
        if value > stall_floor && step * step < value * 1e-8 {
            break;
        }
        let mut best: Option<(S, f64)> = None;
        for axis in 0..dims {
            for dir in [step, -step] {
                let cand = perturb_fn(&state, axis, dir);
                let v = objective(&cand);
                if v < value && best.as_ref().is_none_or(|(_, bv)| v < *bv) {
                    best = Some((cand, v));
                }
            }
        }
        match best {
            Some((s, v)) => {
                state = s;
                value = v;
            }
            None => step *= 0.5,
        }
    }
    (state, value)
}

fn max_residual(space: &SpaceSpec, x: &Point, constraints: &[SphereConstraint]) -> f64 {
    constraints
        .iter()
        .map(|c| (space.distance(x, &c.center).unwrap_or(f64::NAN) - c.radius).abs())
        .fold(0.0, f64::max)
}

/// Gaussian elimination with partial pivoting for the tiny normal systems
/// of the polish step.
fn solve_linear(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for col in 0..n {
        let pivot = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[pivot][col].abs() < 1e-300 {
            return None;
        }
        a.swap(col, pivot);
        b.swap(col, pivot);
        for row in (col + 1)..n {
            let f = a[row][col] / a[col][col];
            for k in col..n {
                a[row][k] -= f * a[col][k];
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for col in (0..n).rev() {
        let mut s = b[col];
        for k in (col + 1)..n {
            s -= a[col][k] * x[k];
        }
        x[col] = s / a[col][col];
    }
    Some(x)
}

/// Damped Gauss-Newton polish on the residual system, with the Jacobian
/// taken by finite differences along the chart axes. Pattern search alone
/// stalls when two constraint gradients are nearly parallel (spheres close
/// to tangency); the quadratic local step does not.
fn polish_candidate(
    space: &SpaceSpec,
    start: Point,
    constraints: &[SphereConstraint],
    tau: f64,
    scale: f64,
) -> Point {
    let dims = descent_dims(space, start.chart());
    if dims == 0 {
        return start;
    }
    let m = constraints.len();
    let fd = (1e-7 * scale).max(1e-12);
    let mut x = start;
    let mut best_resid = max_residual(space, &x, constraints);
    let mut lambda = 1e-8;
    for _ in 0..25 {
        if best_resid <= 0.25 * tau {
            break;
        }
        let f: Vec<f64> = constraints
            .iter()
            .map(|c| space.distance(&x, &c.center).unwrap_or(f64::NAN) - c.radius)
            .collect();
        let mut jac = vec![vec![0.0; dims]; m];
        for a in 0..dims {
            let xp = perturb(space, &x, a, fd);
            for (i, c) in constraints.iter().enumerate() {
                let dp = space.distance(&xp, &c.center).unwrap_or(f64::NAN);
                jac[i][a] = (dp - (f[i] + c.radius)) / fd;
            }
        }
        // Normal equations J^T J + lambda I.
        let mut improved = false;
        for _ in 0..8 {
            let mut ata = vec![vec![0.0; dims]; dims];
            let mut atb = vec![0.0; dims];
            for (i, row) in jac.iter().enumerate() {
                for a in 0..dims {
                    atb[a] -= row[a] * f[i];
                    for b in 0..dims {
                        ata[a][b] += row[a] * row[b];
                    }
                }
            }
            for (a, row) in ata.iter_mut().enumerate() {
                row[a] += lambda;
            }
            let Some(delta) = solve_linear(ata, atb) else { break };
            let mut cand = x.clone();
            for (a, d) in delta.iter().enumerate() {
                if d.is_finite() {
                    cand = perturb(space, &cand, a, *d);
                }
            }
            let resid = max_residual(space, &cand, constraints);
            if resid < best_resid {
                x = cand;
                best_resid = resid;
                lambda = (lambda * 0.25).max(1e-12);
                improved = true;
                break;
            }
            lambda *= 10.0;
        }
        if !improved {
            break;
        }
    }
    x
}

fn squared_residual(space: &SpaceSpec, x: &Point, constraints: &[SphereConstraint]) -> f64 {
    constraints
        .iter()
        .map(|c| {
            let d = space.distance(x, &c.center).unwrap_or(f64::NAN) - c.radius;
            d * d
        })
        .sum()
}

/// Solves the simultaneous sphere constraints and clusters the solution set.
///
/// Every representative of the returned set satisfies each constraint within
/// `tol.tau_sphere`. Clusters are connected groups of accepted candidates
/// under `delta_cluster` linkage; an empty result is a valid outcome, not an
/// error. Deterministic given `tol.seed`.
pub fn solve_intersection(
    space: &SpaceSpec,
    constraints: &[SphereConstraint],
    tol: &Tolerances,
) -> Result<IntersectionSet> {
    tol.validate()?;
    space.validate()?;
    if constraints.is_empty() {
        return Err(Error::InvalidInput("at least one sphere constraint required".into()));
    }
    for c in constraints {
        if !(c.radius > 0.0) || !c.radius.is_finite() {
            return Err(Error::InvalidInput(format!("sphere radius {} must be positive", c.radius)));
        }
        if c.center.space() != space {
            return Err(Error::MismatchedSpaces("constraint center outside the space".into()));
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(tol.seed);
    let first = &constraints[0];
    let candidates = sphere_candidates(space, &first.center, first.radius, tol.samples, &mut rng);
    if candidates.is_empty() {
        return Ok(IntersectionSet { clusters: Vec::new(), is_continuum: false, residual_max: 0.0 });
    }

    let scale = constraints.iter().map(|c| c.radius).fold(0.0, f64::max);
    let min_step = 0.01 * tol.tau_sphere;
    let target = 0.25 * tol.tau_sphere * tol.tau_sphere;
    // Candidates whose residual is still three decades above the acceptance
    // threshold may abandon the walk once their step stalls; anything closer
    // must descend all the way so no solution component is lost.
    let stall_floor = (1e3 * tol.tau_sphere) * (1e3 * tol.tau_sphere);

    // Descent is independent per candidate; results are collected in
    // candidate order so the output is identical to a sequential run. The
    // initial step is tied to the candidate's own residual so descent stays
    // local and continua keep their coverage.
    let refined: Vec<(Point, f64)> = candidates
        .into_par_iter()
        .map(|cand| {
            let dims = descent_dims(space, cand.chart());
            let v0 = squared_residual(space, &cand, constraints);
            let step0 = v0.sqrt().clamp(1000.0 * min_step, 0.25 * scale);
            let (pt, value) = compass_search(
                cand,
                v0,
                dims,
                step0,
                min_step,
                tol.refine_iters,
                target,
                stall_floor,
                |p, axis, delta| perturb(space, p, axis, delta),
                |p| squared_residual(space, p, constraints),
            );
            // Quadratic polish for candidates that plausibly sit near a
            // solution but were left short by the pattern search.
            let pt = if value > target && value < stall_floor * 1e4 {
                polish_candidate(space, pt, constraints, tol.tau_sphere, scale)
            } else {
                pt
            };
            let resid = max_residual(space, &pt, constraints);
            (pt, resid)
        })
        .collect();

    // Leader net at radius delta/2: each entry keeps its anchor (net
    // geometry) and the best-residual member (output representative).
    struct NetEntry {
        anchor: Point,
        best: Point,
        best_residual: f64,
        count: usize,
    }
    let half = 0.5 * tol.delta_cluster;
    let mut net: Vec<NetEntry> = Vec::new();
    let mut residual_max: f64 = 0.0;
    for (pt, resid) in refined {
        if !(resid <= tol.tau_sphere) {
            continue;
        }
        residual_max = residual_max.max(resid);
        let mut merged = false;
        for entry in &mut net {
            if space.distance(&entry.anchor, &pt)? <= half {
                entry.count += 1;
                if resid < entry.best_residual
                    || (resid == entry.best_residual
                        && cmp_points(&pt, &entry.best) == std::cmp::Ordering::Less)
                {
                    entry.best = pt.clone();
                    entry.best_residual = resid;
                }
                merged = true;
                break;
            }
        }
        if !merged {
            net.push(NetEntry { anchor: pt.clone(), best: pt, best_residual: resid, count: 1 });
        }
    }
    if net.is_empty() {
        return Ok(IntersectionSet { clusters: Vec::new(), is_continuum: false, residual_max: 0.0 });
    }

    // Single linkage on net anchors.
    let m = net.len();
    let mut parent: Vec<usize> = (0..m).collect();
    fn find(parent: &mut Vec<usize>, i: usize) -> usize {
        let mut root = i;
        while parent[root] != root {
            root = parent[root];
        }
        let mut cur = i;
        while parent[cur] != root {
            let next = parent[cur];
            parent[cur] = root;
            cur = next;
        }
        root
    }
    for i in 0..m {
        for j in (i + 1)..m {
            if space.distance(&net[i].anchor, &net[j].anchor)? <= tol.delta_cluster {
                let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
                if ri != rj {
                    parent[ri] = rj;
                }
            }
        }
    }

    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut group_of: Vec<Option<usize>> = vec![None; m];
    for i in 0..m {
        let root = find(&mut parent, i);
        match group_of[root] {
            Some(g) => groups[g].push(i),
            None => {
                group_of[root] = Some(groups.len());
                groups.push(vec![i]);
            }
        }
    }

    let mut clusters = Vec::with_capacity(groups.len());
    for members in &groups {
        let mut best_idx = members[0];
        let mut count = 0;
        for &i in members {
            count += net[i].count;
            let better = net[i].best_residual < net[best_idx].best_residual
                || (net[i].best_residual == net[best_idx].best_residual
                    && cmp_points(&net[i].best, &net[best_idx].best) == std::cmp::Ordering::Less);
            if better {
                best_idx = i;
            }
        }
        let mut diameter: f64 = 0.0;
        for (a, &i) in members.iter().enumerate() {
            for &j in members.iter().skip(a + 1) {
                diameter = diameter.max(space.distance(&net[i].anchor, &net[j].anchor)?);
            }
        }
        clusters.push(Cluster {
            representative: net[best_idx].best.clone(),
            member_count: count,
            cluster_diameter: diameter,
        });
    }
    clusters.sort_by(|a, b| cmp_points(&a.representative, &b.representative));

    let is_continuum = clusters
        .iter()
        .any(|c| c.cluster_diameter > tol.kappa_continuum * tol.delta_cluster);
    Ok(IntersectionSet { clusters, is_continuum, residual_max })
}

fn fnv1a64(words: &[u64]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for w in words {
        for b in w.to_le_bytes() {
            h ^= b as u64;
            h = h.wrapping_mul(0x0000_0100_0000_01b3);
        }
    }
    h
}

fn constraint_words(c: &SphereConstraint) -> Vec<u64> {
    let mut flat = Vec::new();
    flatten_chart(c.center.chart(), &mut flat);
    let mut words: Vec<u64> = flat.iter().map(|x| x.to_bits()).collect();
    words.push(c.radius.to_bits());
    words
}

/// Solver seed derived from the sorted constraint data, so permuting apex
/// order cannot change the numerical path.
fn derived_seed(space: &SpaceSpec, constraints: &[SphereConstraint], base_seed: u64) -> u64 {
    let mut words = vec![base_seed];
    if let Ok(json) = serde_json::to_vec(space) {
        for chunk in json.chunks(8) {
            let mut w = [0u8; 8];
            w[..chunk.len()].copy_from_slice(chunk);
            words.push(u64::from_le_bytes(w));
        }
    }
    for c in constraints {
        words.extend(constraint_words(c));
    }
    fnv1a64(&words)
}

fn sort_constraints(constraints: &mut [SphereConstraint]) {
    constraints.sort_by(|a, b| {
        a.radius
            .total_cmp(&b.radius)
            .then_with(|| cmp_points(&a.center, &b.center))
    });
}

/// h evaluation without the on-sphere apex precondition; the sliced-filling
/// integral legitimately places apexes off `S(p; r)`.
pub(crate) fn h_value_unchecked(
    space: &SpaceSpec,
    p: &Point,
    apexes: &[Point],
    r: f64,
    t: &[f64],
    tol: &Tolerances,
) -> Result<f64> {
    if apexes.is_empty() || apexes.len() != t.len() {
        return Err(Error::InvalidInput(
            "h needs n-1 apexes and as many radii t_i".into(),
        ));
    }
    if !(r > 0.0) {
        return Err(Error::InvalidInput("radius r must be positive".into()));
    }
    if t.iter().any(|ti| !(*ti > 0.0)) {
        // Spheres of nonpositive radius are empty, so the intersection is too.
        return Ok(0.0);
    }
    let mut apex_constraints: Vec<SphereConstraint> = apexes
        .iter()
        .zip(t.iter())
        .map(|(a, ti)| SphereConstraint { center: a.clone(), radius: *ti })
        .collect();
    sort_constraints(&mut apex_constraints);
    let mut constraints = vec![SphereConstraint { center: p.clone(), radius: r }];
    constraints.extend(apex_constraints);
    let seed = derived_seed(space, &constraints, tol.seed);
    let tol = Tolerances { seed, ..tol.clone() };

    let set = solve_intersection(space, &constraints, &tol)?;
    if set.clusters.len() < 2 || set.is_continuum {
        return Ok(0.0);
    }
    let mut min_sep = f64::INFINITY;
    for i in 0..set.clusters.len() {
        for j in (i + 1)..set.clusters.len() {
            min_sep = min_sep.min(
                space.distance(&set.clusters[i].representative, &set.clusters[j].representative)?,
            );
        }
    }
    Ok(min_sep)
}

/// Separation infimum of `S(p, p_1..p_{n-1}; r, t_1..t_{n-1})`.
///
/// Returns 0 when the intersection is empty, a single cluster, or a
/// continuum; otherwise the minimum pairwise distance between cluster
/// representatives. Apexes must lie on `S(p; r)` within `tau_sphere`.
pub fn h_value(
    space: &SpaceSpec,
    p: &Point,
    apexes: &[Point],
    r: f64,
    t: &[f64],
    tol: &Tolerances,
) -> Result<f64> {
    tol.validate()?;
    for apex in apexes {
        let deviation = (space.distance(p, apex)? - r).abs();
        if deviation > tol.tau_sphere {
            return Err(Error::ApexOffSphere { deviation, tolerance: tol.tau_sphere });
        }
    }
    h_value_unchecked(space, p, apexes, r, t, tol)
}
