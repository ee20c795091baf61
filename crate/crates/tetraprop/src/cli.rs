//! Command-line surface: check, sweep, volume, bounds, examples, hmap.
//!
//! A JSON config file supplies defaults, flags override it, and the
//! `TETRAPROP_SEED` environment variable is the seed fallback. All outputs
//! are deterministic for identical invocations: sweep cells are evaluated in
//! parallel but emitted in grid order.

use std::io::Write;
use std::sync::OnceLock;

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;
use serde::Deserialize;

use crate::bounds::{diameter_bound, greedy_packing, packing_bound, BoundsReport};
use crate::checker::{
    check_legacy, check_tetrahedral, search_apexes, TetraQuery, TetraReport, Verdict,
};
use crate::gallery::{run_all, run_example, ExampleReport};
use crate::integrals::{QuadRule, QuadratureSpec};
use crate::slicer::Tolerances;
use crate::spaces::{Chart, GluedSheet, Point, Region, SpaceSpec};
use crate::volume::{ball_volume, verify_volume_bound, VolumeMethod};
use crate::{Error, Result};

pub const EXIT_HOLDS: i32 = 0;
pub const EXIT_FAILS: i32 = 1;
pub const EXIT_INCONCLUSIVE: i32 = 2;
pub const EXIT_USAGE: i32 = 64;

#[derive(Parser, Debug)]
#[command(
    name = "tetraprop",
    about = "Tetrahedral-property verification on a catalog of metric spaces",
    disable_help_subcommand = true
)]
struct Cli {
    /// JSON config file with defaults for the flags below.
    #[arg(long, global = true)]
    config: Option<String>,
    /// Seed for all randomized components (fallback: TETRAPROP_SEED, then 0).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads for grid and Monte Carlo evaluation.
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// Emit machine-readable JSON (default).
    #[arg(long, global = true)]
    json: bool,
    /// Emit human-readable text instead of JSON.
    #[arg(long, global = true, conflicts_with = "json")]
    text: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone, Default)]
struct QueryArgs {
    /// Space: euclideanN | sphere:RHO | rp2:RHO | cone:RHO | conerp2 |
    /// glued | planeray | inline JSON | @file.json
    #[arg(long)]
    space: Option<String>,
    /// Point in the space (syntax depends on the space; see README).
    #[arg(long)]
    p: Option<String>,
    #[arg(long)]
    r: Option<f64>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    beta: Option<f64>,
    /// Symmetric interval shorthand: alpha = 1 - B, beta = 1 + B.
    #[arg(long, value_name = "B", conflicts_with_all = ["alpha", "beta"])]
    legacy_beta: Option<f64>,
    /// Target constant; omit to estimate the best constant.
    #[arg(long = "C")]
    c: Option<f64>,
    /// Property dimension (n - 1 apexes).
    #[arg(long)]
    n: Option<usize>,
    /// Apex point; repeat n - 1 times. Same syntax as --p.
    #[arg(long = "apex")]
    apexes: Vec<String>,
    /// Search for apexes instead of supplying them.
    #[arg(long)]
    search: bool,
    /// Tuple-evaluation budget of the apex search.
    #[arg(long)]
    budget: Option<usize>,
    #[arg(long)]
    grid_m: Option<usize>,
    #[arg(long)]
    samples: Option<usize>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Certify or refute the property at a point.
    Check(QueryArgs),
    /// Run `check` over a parameter grid and emit CSV.
    Sweep {
        #[command(flatten)]
        query: QueryArgs,
        /// Axis spec `name=lo:hi:steps`; repeatable. Names: r, alpha, beta,
        /// rho, p0, p1, p2.
        #[arg(long = "grid", value_name = "AXIS")]
        axes: Vec<String>,
    },
    /// Ball volume, optionally against the certified lower bound.
    Volume {
        #[arg(long)]
        space: Option<String>,
        #[arg(long)]
        p: Option<String>,
        #[arg(long)]
        r: Option<f64>,
        /// analytic | monte_carlo
        #[arg(long, default_value = "analytic")]
        method: String,
        #[arg(long, default_value_t = 100_000)]
        samples: usize,
        #[arg(long = "C")]
        c: Option<f64>,
        #[arg(long)]
        alpha: Option<f64>,
        #[arg(long)]
        beta: Option<f64>,
        /// Radius sweep `lo:hi:steps`; emits CSV r,volume,stderr,bound,slack.
        #[arg(long, value_name = "RANGE")]
        r_grid: Option<String>,
    },
    /// Packing and diameter bounds from the volume estimate.
    Bounds {
        #[arg(long = "V0")]
        v0: f64,
        #[arg(long = "C")]
        c: f64,
        #[arg(long)]
        alpha: f64,
        #[arg(long)]
        beta: f64,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        eps: Option<f64>,
        #[arg(long)]
        r0: Option<f64>,
        /// Also run a greedy packing with this ball separation.
        #[arg(long)]
        greedy_eps: Option<f64>,
        #[arg(long)]
        space: Option<String>,
        /// Ball region radius for the greedy packing (around --p).
        #[arg(long)]
        region_radius: Option<f64>,
        #[arg(long)]
        p: Option<String>,
        #[arg(long, default_value_t = 512)]
        candidates: usize,
    },
    /// Reproduce the named verification scenarios.
    Examples {
        #[arg(long)]
        id: Option<String>,
    },
    /// Dump the h grid over the t-cube as CSV.
    Hmap(QueryArgs),
}

/// Config-file counterpart of the query flags.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    space: Option<String>,
    p: Option<String>,
    r: Option<f64>,
    alpha: Option<f64>,
    beta: Option<f64>,
    legacy_beta: Option<f64>,
    #[serde(rename = "C")]
    c: Option<f64>,
    n: Option<usize>,
    apexes: Option<Vec<String>>,
    seed: Option<u64>,
    workers: Option<usize>,
    grid_m: Option<usize>,
    samples: Option<usize>,
    budget: Option<usize>,
}

fn load_config(path: Option<&str>) -> Result<FileConfig> {
    match path {
        None => Ok(FileConfig::default()),
        Some(p) => {
            let text = std::fs::read_to_string(p)?;
            Ok(serde_json::from_str(&text)?)
        }
    }
}

// ---------------------------------------------------------------------------
// Space and point parsing
// ---------------------------------------------------------------------------

pub fn parse_space(input: &str) -> Result<SpaceSpec> {
    let s = input.trim();
    if let Some(path) = s.strip_prefix('@') {
        let text = std::fs::read_to_string(path)?;
        let spec: SpaceSpec = serde_json::from_str(&text)?;
        spec.validate()?;
        return Ok(spec);
    }
    if s.starts_with('{') {
        let spec: SpaceSpec = serde_json::from_str(s)?;
        spec.validate()?;
        return Ok(spec);
    }
    let lower = s.to_ascii_lowercase();
    let spec = if let Some(dim) = lower.strip_prefix("euclidean") {
        let dim: usize = dim
            .parse()
            .map_err(|_| Error::InvalidInput(format!("bad euclidean dimension in {s:?}")))?;
        SpaceSpec::Euclidean { dim }
    } else if let Some(rho) = lower.strip_prefix("sphere:") {
        SpaceSpec::RoundSphere { rho: parse_f64(rho)? }
    } else if let Some(rho) = lower.strip_prefix("rp2:") {
        SpaceSpec::ProjectivePlane { rho: parse_f64(rho)? }
    } else if let Some(rho) = lower.strip_prefix("cone:") {
        SpaceSpec::Cone { base: Box::new(SpaceSpec::RoundSphere { rho: parse_f64(rho)? }) }
    } else if lower == "conerp2" {
        SpaceSpec::ConeOfProjectivePlane
    } else if lower == "glued" || lower == "glued_planes" {
        SpaceSpec::GluedPlanes
    } else if lower == "planeray" || lower == "plane_with_ray" {
        SpaceSpec::PlaneWithRay
    } else {
        return Err(Error::InvalidInput(format!(
            "unknown space {s:?}; try euclidean2, sphere:1, rp2:1, cone:0.25, conerp2, glued, planeray, or JSON"
        )));
    };
    spec.validate()?;
    Ok(spec)
}

fn parse_f64(s: &str) -> Result<f64> {
    s.trim().parse().map_err(|_| Error::InvalidInput(format!("bad number {s:?}")))
}

fn parse_coords(s: &str) -> Result<Vec<f64>> {
    s.split(',').map(parse_f64).collect()
}

fn normalized3(v: &[f64]) -> Result<[f64; 3]> {
    if v.len() != 3 {
        return Err(Error::InvalidInput("need 3 coordinates for a direction".into()));
    }
    let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
    if n < 1e-12 {
        return Err(Error::InvalidInput("direction vector is numerically zero".into()));
    }
    Ok([v[0] / n, v[1] / n, v[2] / n])
}

pub fn parse_point(space: &SpaceSpec, input: &str) -> Result<Point> {
    let s = input.trim();
    match space {
        SpaceSpec::Euclidean { .. } => space.point(Chart::Euclidean(parse_coords(s)?)),
        SpaceSpec::RoundSphere { .. } => {
            space.point(Chart::Sphere(normalized3(&parse_coords(s)?)?))
        }
        SpaceSpec::ProjectivePlane { .. } => {
            space.point(Chart::Projective(normalized3(&parse_coords(s)?)?))
        }
        SpaceSpec::Cone { .. } => {
            if s.eq_ignore_ascii_case("vertex") {
                return space.vertex();
            }
            let (dir, t) = s
                .split_once('@')
                .ok_or_else(|| Error::InvalidInput("cone point syntax: ux,uy,uz@t".into()))?;
            space.point(Chart::ConePoint {
                base: Box::new(Chart::Sphere(normalized3(&parse_coords(dir)?)?)),
                t: parse_f64(t)?,
            })
        }
        SpaceSpec::ConeOfProjectivePlane => {
            if s.eq_ignore_ascii_case("vertex") {
                return space.vertex();
            }
            let c = parse_coords(s)?;
            if c.len() != 3 {
                return Err(Error::InvalidInput("need 3 coordinates".into()));
            }
            space.point(Chart::ConeProjective([c[0], c[1], c[2]]))
        }
        SpaceSpec::GluedPlanes => {
            let (sheet, rest) = s
                .split_once(':')
                .ok_or_else(|| Error::InvalidInput("glued point syntax: xy:x,y or yz:y,z".into()))?;
            let c = parse_coords(rest)?;
            if c.len() != 2 {
                return Err(Error::InvalidInput("need 2 coordinates".into()));
            }
            let sheet = match sheet.to_ascii_lowercase().as_str() {
                "xy" => GluedSheet::Xy,
                "yz" => GluedSheet::YzPlus,
                other => return Err(Error::InvalidInput(format!("unknown sheet {other:?}"))),
            };
            space.point(Chart::Glued { sheet, u: c[0], v: c[1] })
        }
        SpaceSpec::PlaneWithRay => {
            let (sheet, rest) = s.split_once(':').ok_or_else(|| {
                Error::InvalidInput("plane-with-ray point syntax: plane:x,y or ray:z".into())
            })?;
            match sheet.to_ascii_lowercase().as_str() {
                "plane" => {
                    let c = parse_coords(rest)?;
                    if c.len() != 2 {
                        return Err(Error::InvalidInput("need 2 coordinates".into()));
                    }
                    space.point(Chart::Plane { x: c[0], y: c[1] })
                }
                "ray" => space.point(Chart::Ray { z: parse_f64(rest)? }),
                other => Err(Error::InvalidInput(format!("unknown sheet {other:?}"))),
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Query assembly
// ---------------------------------------------------------------------------

#[derive(Debug, Clone)]
struct CheckSpec {
    space_str: String,
    p_str: String,
    r: f64,
    alpha: f64,
    beta: f64,
    legacy_beta: Option<f64>,
    c: Option<f64>,
    n: usize,
    apex_strs: Vec<String>,
    search: bool,
    budget: usize,
    grid_m: Option<usize>,
    samples: Option<usize>,
    seed: u64,
}

impl CheckSpec {
    fn from_args(args: &QueryArgs, cfg: &FileConfig, seed: u64) -> Result<CheckSpec> {
        let space_str = args
            .space
            .clone()
            .or_else(|| cfg.space.clone())
            .ok_or_else(|| Error::InvalidInput("--space is required".into()))?;
        let p_str = args
            .p
            .clone()
            .or_else(|| cfg.p.clone())
            .ok_or_else(|| Error::InvalidInput("--p is required".into()))?;
        let r = args
            .r
            .or(cfg.r)
            .ok_or_else(|| Error::InvalidInput("--r is required".into()))?;
        let legacy_beta = args.legacy_beta.or(cfg.legacy_beta);
        let (alpha, beta) = match legacy_beta {
            Some(b) => (1.0 - b, 1.0 + b),
            None => (
                args.alpha.or(cfg.alpha).unwrap_or(0.9),
                args.beta.or(cfg.beta).unwrap_or(1.1),
            ),
        };
        let apex_strs = if args.apexes.is_empty() {
            cfg.apexes.clone().unwrap_or_default()
        } else {
            args.apexes.clone()
        };
        let n = args.n.or(cfg.n).unwrap_or_else(|| {
            if apex_strs.is_empty() { 2 } else { apex_strs.len() + 1 }
        });
        Ok(CheckSpec {
            space_str,
            p_str,
            r,
            alpha,
            beta,
            legacy_beta,
            c: args.c.or(cfg.c),
            n,
            apex_strs,
            search: args.search,
            budget: args.budget.or(cfg.budget).unwrap_or(200),
            grid_m: args.grid_m.or(cfg.grid_m),
            samples: args.samples.or(cfg.samples),
            seed,
        })
    }

    fn tolerances(&self) -> Tolerances {
        let mut tol = Tolerances::for_radius(self.r).with_seed(self.seed);
        if let Some(m) = self.grid_m {
            tol.grid_m = m;
        }
        if let Some(s) = self.samples {
            tol.samples = s;
        }
        tol
    }

    fn build_query(&self) -> Result<TetraQuery> {
        let space = parse_space(&self.space_str)?;
        let p = parse_point(&space, &self.p_str)?;
        let apexes = if self.apex_strs.is_empty() {
            None
        } else {
            Some(
                self.apex_strs
                    .iter()
                    .map(|a| parse_point(&space, a))
                    .collect::<Result<Vec<_>>>()?,
            )
        };
        Ok(TetraQuery {
            space,
            p,
            r: self.r,
            n: self.n,
            alpha: self.alpha,
            beta: self.beta,
            c_target: self.c,
            apexes,
            tol: self.tolerances(),
        })
    }

    /// Runs the query, searching for apexes when requested or when none were
    /// given.
    fn run(&self) -> Result<TetraReport> {
        let mut query = self.build_query()?;
        if self.search || query.apexes.is_none() {
            let (apexes, report) = search_apexes(
                &query.space,
                &query.p,
                query.r,
                query.n,
                query.alpha,
                query.beta,
                self.budget,
                self.seed,
                &query.tol,
            )?;
            if apexes.is_empty() {
                return Ok(report);
            }
            query.apexes = Some(apexes);
        }
        match self.legacy_beta {
            Some(b) => check_legacy(&query, b),
            None => check_tetrahedral(&query),
        }
    }
}

fn verdict_exit(verdict: Verdict) -> i32 {
    match verdict {
        Verdict::Holds => EXIT_HOLDS,
        Verdict::Fails => EXIT_FAILS,
        Verdict::Inconclusive => EXIT_INCONCLUSIVE,
    }
}

// ---------------------------------------------------------------------------
// Sweep machinery
// ---------------------------------------------------------------------------

#[derive(Debug, Clone)]
struct SweepAxis {
    name: String,
    values: Vec<f64>,
}

fn parse_range(spec: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = spec.split(':').collect();
    if parts.len() != 3 {
        return Err(Error::InvalidInput(format!("range syntax lo:hi:steps, got {spec:?}")));
    }
    let lo = parse_f64(parts[0])?;
    let hi = parse_f64(parts[1])?;
    let steps: usize = parts[2]
        .parse()
        .map_err(|_| Error::InvalidInput(format!("bad step count in {spec:?}")))?;
    if steps == 0 {
        return Err(Error::InvalidInput("a sweep axis needs at least one step".into()));
    }
    if steps == 1 {
        return Ok(vec![lo]);
    }
    Ok((0..steps).map(|i| lo + (hi - lo) * i as f64 / (steps - 1) as f64).collect())
}

fn parse_axis(spec: &str) -> Result<SweepAxis> {
    let (name, range) = spec
        .split_once('=')
        .ok_or_else(|| Error::InvalidInput(format!("axis syntax name=lo:hi:steps, got {spec:?}")))?;
    let name = name.trim().to_ascii_lowercase();
    match name.as_str() {
        "r" | "alpha" | "beta" | "rho" | "p0" | "p1" | "p2" => {}
        other => {
            return Err(Error::InvalidInput(format!(
                "unknown sweep axis {other:?}; known: r, alpha, beta, rho, p0, p1, p2"
            )))
        }
    }
    Ok(SweepAxis { name, values: parse_range(range)? })
}

fn override_rho(space_str: &str, rho: f64) -> Result<String> {
    let space = parse_space(space_str)?;
    let replaced = match space {
        SpaceSpec::RoundSphere { .. } => SpaceSpec::RoundSphere { rho },
        SpaceSpec::ProjectivePlane { .. } => SpaceSpec::ProjectivePlane { rho },
        SpaceSpec::Cone { base } => match *base {
            SpaceSpec::RoundSphere { .. } => {
                SpaceSpec::Cone { base: Box::new(SpaceSpec::RoundSphere { rho }) }
            }
            SpaceSpec::ProjectivePlane { .. } => {
                SpaceSpec::Cone { base: Box::new(SpaceSpec::ProjectivePlane { rho }) }
            }
            other => {
                return Err(Error::InvalidInput(format!("space {other:?} has no rho parameter")))
            }
        },
        other => {
            return Err(Error::InvalidInput(format!("space {other:?} has no rho parameter")))
        }
    };
    Ok(serde_json::to_string(&replaced)?)
}

fn override_point_coord(p_str: &str, index: usize, value: f64) -> Result<String> {
    // Rewrites the index-th numeric field of the point syntax, leaving any
    // sheet prefix or radial suffix alone.
    let (prefix, coords_part, suffix) = split_point_syntax(p_str);
    let mut coords: Vec<String> = coords_part.split(',').map(|s| s.trim().to_string()).collect();
    if index >= coords.len() {
        return Err(Error::InvalidInput(format!(
            "point {p_str:?} has no coordinate index {index}"
        )));
    }
    coords[index] = format!("{value}");
    Ok(format!("{prefix}{}{suffix}", coords.join(",")))
}

fn split_point_syntax(p_str: &str) -> (String, String, String) {
    let (prefix, rest) = match p_str.split_once(':') {
        Some((sheet, rest)) => (format!("{sheet}:"), rest.to_string()),
        None => (String::new(), p_str.to_string()),
    };
    match rest.split_once('@') {
        Some((coords, t)) => (prefix, coords.to_string(), format!("@{t}")),
        None => (prefix, rest, String::new()),
    }
}

fn apply_axis(spec: &CheckSpec, name: &str, value: f64) -> Result<CheckSpec> {
    let mut s = spec.clone();
    match name {
        "r" => s.r = value,
        "alpha" => {
            s.alpha = value;
            s.legacy_beta = None;
        }
        "beta" => {
            s.beta = value;
            s.legacy_beta = None;
        }
        "rho" => s.space_str = override_rho(&s.space_str, value)?,
        "p0" | "p1" | "p2" => {
            let idx = name[1..].parse::<usize>().unwrap();
            s.p_str = override_point_coord(&s.p_str, idx, value)?;
        }
        other => return Err(Error::InvalidInput(format!("unknown axis {other:?}"))),
    }
    Ok(s)
}

// ---------------------------------------------------------------------------
// Command implementations
// ---------------------------------------------------------------------------

fn cmd_check<W: Write>(spec: &CheckSpec, text: bool, out: &mut W) -> Result<i32> {
    let report = spec.run()?;
    writeln!(out, "{} c_best={}", report.verdict, report.c_best)?;
    if text {
        writeln!(out, "  t_witness: {:?}", report.t_witness)?;
        writeln!(out, "  grid_min: {}  refined_min: {}", report.grid_min, report.refined_min)?;
        for note in &report.notes {
            writeln!(out, "  note: {note}")?;
        }
    } else {
        writeln!(out, "{}", serde_json::to_string_pretty(&report)?)?;
    }
    Ok(verdict_exit(report.verdict))
}

fn cmd_sweep<W: Write>(spec: &CheckSpec, axes: &[String], out: &mut W) -> Result<i32> {
    if axes.is_empty() {
        return Err(Error::InvalidInput("sweep needs at least one --grid axis".into()));
    }
    let axes: Vec<SweepAxis> = axes.iter().map(|a| parse_axis(a)).collect::<Result<_>>()?;
    let total: usize = axes.iter().map(|a| a.values.len()).product();
    if total == 0 {
        return Err(Error::InvalidInput("empty sweep grid".into()));
    }

    // Row-major cell enumeration in axis order.
    let cells: Vec<Vec<f64>> = (0..total)
        .map(|flat| {
            let mut idx = flat;
            let mut values = vec![0.0; axes.len()];
            for a in (0..axes.len()).rev() {
                values[a] = axes[a].values[idx % axes[a].values.len()];
                idx /= axes[a].values.len();
            }
            values
        })
        .collect();

    let results: Vec<Result<TetraReport>> = cells
        .par_iter()
        .map(|values| {
            let mut cell_spec = spec.clone();
            for (axis, value) in axes.iter().zip(values.iter()) {
                cell_spec = apply_axis(&cell_spec, &axis.name, *value)?;
            }
            cell_spec.run()
        })
        .collect();

    let header: Vec<String> = axes.iter().map(|a| a.name.clone()).collect();
    writeln!(out, "{},c_best,verdict,grid_min,refined_min", header.join(","))?;
    for (values, result) in cells.iter().zip(results) {
        let report = result?;
        let prefix: Vec<String> = values.iter().map(|v| format!("{v}")).collect();
        writeln!(
            out,
            "{},{},{},{},{}",
            prefix.join(","),
            report.c_best,
            report.verdict,
            report.grid_min,
            report.refined_min
        )?;
    }
    Ok(EXIT_HOLDS)
}

fn cmd_hmap<W: Write>(spec: &CheckSpec, out: &mut W) -> Result<i32> {
    let query = spec.build_query()?;
    let apexes = query.apexes.clone().ok_or(Error::MissingApexes)?;
    let dims = query.n - 1;
    let m = query.tol.grid_m;
    let axis: Vec<f64> = (0..m)
        .map(|i| {
            query.alpha * query.r
                + (query.beta - query.alpha) * query.r * i as f64 / (m - 1) as f64
        })
        .collect();
    let total = m.pow(dims as u32);
    let rows: Vec<(Vec<f64>, f64)> = (0..total)
        .into_par_iter()
        .map(|flat| {
            let mut idx = flat;
            let mut t = vec![0.0; dims];
            for d in (0..dims).rev() {
                t[d] = axis[idx % m];
                idx /= m;
            }
            let h = crate::slicer::h_value(&query.space, &query.p, &apexes, query.r, &t, &query.tol)
                .unwrap_or(f64::NAN);
            (t, h)
        })
        .collect();
    let header: Vec<String> = (1..=dims).map(|i| format!("t{i}")).collect();
    writeln!(out, "{},h", header.join(","))?;
    for (t, h) in rows {
        let cols: Vec<String> = t.iter().map(|v| format!("{v}")).collect();
        writeln!(out, "{},{h}", cols.join(","))?;
    }
    Ok(EXIT_HOLDS)
}

#[allow(clippy::too_many_arguments)]
fn cmd_volume<W: Write>(
    space_str: &str,
    p_str: &str,
    r: Option<f64>,
    method: &str,
    samples: usize,
    c: Option<f64>,
    alpha: Option<f64>,
    beta: Option<f64>,
    r_grid: Option<&str>,
    seed: u64,
    out: &mut W,
) -> Result<i32> {
    let space = parse_space(space_str)?;
    let p = parse_point(&space, p_str)?;
    let method = match method {
        "analytic" => VolumeMethod::Analytic,
        "monte_carlo" | "mc" => VolumeMethod::MonteCarlo,
        other => return Err(Error::InvalidInput(format!("unknown method {other:?}"))),
    };
    if let Some(range) = r_grid {
        let (c, alpha, beta) = match (c, alpha, beta) {
            (Some(c), Some(a), Some(b)) => (c, a, b),
            _ => {
                return Err(Error::InvalidInput(
                    "volume sweeps need --C, --alpha and --beta for the bound column".into(),
                ))
            }
        };
        writeln!(out, "r,volume,stderr,bound,slack")?;
        for r in parse_range(range)? {
            let report =
                verify_volume_bound(&space, &p, r, c, alpha, beta, method, samples, seed)?;
            writeln!(
                out,
                "{r},{},{},{},{}",
                report.volume.value, report.volume.stderr, report.bound, report.slack
            )?;
        }
        return Ok(EXIT_HOLDS);
    }
    let r = r.ok_or_else(|| Error::InvalidInput("--r is required".into()))?;
    match (c, alpha, beta) {
        (Some(c), Some(a), Some(b)) => {
            let report = verify_volume_bound(&space, &p, r, c, a, b, method, samples, seed)?;
            writeln!(out, "{}", serde_json::to_string_pretty(&report)?)?;
            Ok(if report.ok { EXIT_HOLDS } else { EXIT_FAILS })
        }
        _ => {
            let estimate = ball_volume(&space, &p, r, method, samples, seed)?;
            writeln!(out, "{}", serde_json::to_string_pretty(&estimate)?)?;
            Ok(EXIT_HOLDS)
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn cmd_bounds<W: Write>(
    v0: f64,
    c: f64,
    alpha: f64,
    beta: f64,
    n: usize,
    eps: Option<f64>,
    r0: Option<f64>,
    greedy_eps: Option<f64>,
    space: Option<&str>,
    p: Option<&str>,
    region_radius: Option<f64>,
    candidates: usize,
    seed: u64,
    out: &mut W,
) -> Result<i32> {
    let mut report = BoundsReport {
        packing_bound: None,
        diameter_bound: None,
        greedy_packing: None,
        notes: Vec::new(),
    };
    if let Some(eps) = eps {
        report.packing_bound = Some(packing_bound(v0, c, alpha, beta, n, eps)?);
    }
    if let Some(r0) = r0 {
        report.diameter_bound = Some(diameter_bound(v0, c, alpha, beta, n, r0)?);
        report.notes.push(
            "diameter bound uses this toolkit's explicit formula \
             r0 (V0 / (C (beta-alpha)^(n-1) (r0/2)^n) + 1)"
                .to_string(),
        );
    }
    if let Some(ge) = greedy_eps {
        let space = parse_space(
            space.ok_or_else(|| Error::InvalidInput("greedy packing needs --space".into()))?,
        )?;
        let center = parse_point(
            &space,
            p.ok_or_else(|| Error::InvalidInput("greedy packing needs --p".into()))?,
        )?;
        let radius = region_radius
            .ok_or_else(|| Error::InvalidInput("greedy packing needs --region-radius".into()))?;
        let count =
            greedy_packing(&space, &Region::Ball { center, radius }, ge, candidates, seed)?;
        report.greedy_packing = Some(count);
    }
    writeln!(out, "{}", serde_json::to_string_pretty(&report)?)?;
    Ok(EXIT_HOLDS)
}

fn cmd_examples<W: Write>(id: Option<&str>, seed: u64, text: bool, out: &mut W) -> Result<i32> {
    let reports: Vec<ExampleReport> = match id {
        Some(id) => vec![run_example(id, seed)?],
        None => run_all(seed)?,
    };
    if text {
        for r in &reports {
            writeln!(out, "[{}] {}", if r.overall { "pass" } else { "FAIL" }, r.example_id)?;
            for c in &r.claims {
                writeln!(
                    out,
                    "  [{}] {} (expected {}, computed {}, tol {})",
                    if c.pass { "pass" } else { "FAIL" },
                    c.description,
                    c.expected,
                    c.computed,
                    c.tolerance
                )?;
            }
        }
    } else {
        writeln!(out, "{}", serde_json::to_string_pretty(&reports)?)?;
    }
    Ok(if reports.iter().all(|r| r.overall) { EXIT_HOLDS } else { EXIT_FAILS })
}

// ---------------------------------------------------------------------------
// Entry points
// ---------------------------------------------------------------------------

static POOL_INIT: OnceLock<()> = OnceLock::new();

fn init_workers(workers: Option<usize>) {
    if let Some(n) = workers {
        POOL_INIT.get_or_init(|| {
            // Ignore failure: the global pool can only be set once per
            // process (relevant when run() is called repeatedly in tests).
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
        });
    }
}

fn resolve_seed(flag: Option<u64>, cfg: &FileConfig) -> u64 {
    flag.or(cfg.seed)
        .or_else(|| std::env::var("TETRAPROP_SEED").ok().and_then(|s| s.parse().ok()))
        .unwrap_or(0)
}

/// Runs the CLI against explicit arguments and writers; returns the exit
/// code. The binary wraps this.
pub fn run<W: Write, E: Write>(argv: &[String], out: &mut W, err: &mut E) -> i32 {
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            // clap renders its own help/usage text.
            let _ = write!(err, "{e}");
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_HOLDS };
        }
    };
    let cfg = match load_config(cli.config.as_deref()) {
        Ok(cfg) => cfg,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            return EXIT_USAGE;
        }
    };
    init_workers(cli.workers.or(cfg.workers));
    let seed = resolve_seed(cli.seed, &cfg);
    let text = cli.text;

    let outcome: Result<i32> = match &cli.command {
        Command::Check(args) => {
            CheckSpec::from_args(args, &cfg, seed).and_then(|spec| cmd_check(&spec, text, out))
        }
        Command::Sweep { query, axes } => CheckSpec::from_args(query, &cfg, seed)
            .and_then(|spec| cmd_sweep(&spec, axes, out)),
        Command::Hmap(args) => {
            CheckSpec::from_args(args, &cfg, seed).and_then(|spec| cmd_hmap(&spec, out))
        }
        Command::Volume { space, p, r, method, samples, c, alpha, beta, r_grid } => {
            let space_str = space.clone().or_else(|| cfg.space.clone());
            let p_str = p.clone().or_else(|| cfg.p.clone());
            match (space_str, p_str) {
                (Some(space), Some(p)) => cmd_volume(
                    &space,
                    &p,
                    r.or(cfg.r),
                    method,
                    *samples,
                    c.or(cfg.c),
                    alpha.or(cfg.alpha),
                    beta.or(cfg.beta),
                    r_grid.as_deref(),
                    seed,
                    out,
                ),
                _ => Err(Error::InvalidInput("--space and --p are required".into())),
            }
        }
        Command::Bounds {
            v0,
            c,
            alpha,
            beta,
            n,
            eps,
            r0,
            greedy_eps,
            space,
            region_radius,
            p,
            candidates,
        } => cmd_bounds(
            *v0,
            *c,
            *alpha,
            *beta,
            *n,
            *eps,
            *r0,
            *greedy_eps,
            space.as_deref().or(cfg.space.as_deref()),
            p.as_deref().or(cfg.p.as_deref()),
            *region_radius,
            *candidates,
            seed,
            out,
        ),
        Command::Examples { id } => cmd_examples(id.as_deref(), seed, text, out),
    };
    match outcome {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            EXIT_USAGE
        }
    }
}

/// Convenience wrapper used by the binary.
pub fn run_from_env() -> i32 {
    let argv: Vec<String> = std::env::args().collect();
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run(&argv, &mut stdout.lock(), &mut stderr.lock())
}

/// Helper for integration tests: capture stdout as a string.
pub fn run_captured(argv: &[&str]) -> (i32, String, String) {
    let argv: Vec<String> = argv.iter().map(|s| s.to_string()).collect();
    let mut out = Vec::new();
    let mut err = Vec::new();
    let code = run(&argv, &mut out, &mut err);
    (code, String::from_utf8_lossy(&out).into_owned(), String::from_utf8_lossy(&err).into_owned())
}

/// Quadrature spec shared by CLI consumers that embed integral results.
pub fn default_quadrature() -> QuadratureSpec {
    QuadratureSpec { m: 9, rule: QuadRule::Midpoint }
}
