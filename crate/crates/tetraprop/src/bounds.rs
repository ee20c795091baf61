//! Quantitative packing and diameter consequences of the volume bound.

use serde::{Deserialize, Serialize};

use crate::spaces::{Point, Region, SpaceSpec};
use crate::{Error, Result};

fn check_params(c: f64, alpha: f64, beta: f64, n: usize) -> Result<()> {
    if !(c > 0.0) {
        return Err(Error::InvalidInput("constant C must be positive".into()));
    }
    if !(0.0 < alpha && alpha < beta && beta < 2.0) {
        return Err(Error::InvalidInput("need 0 < alpha < beta < 2".into()));
    }
    if n == 0 {
        return Err(Error::InvalidInput("dimension n must be positive".into()));
    }
    Ok(())
}

/// Upper bound on the number of disjoint `eps`-balls a space of total volume
/// `V0` can carry when each ball's volume is at least
/// `C (beta - alpha)^(n-1) eps^n`: the floor of the ratio.
pub fn packing_bound(v0: f64, c: f64, alpha: f64, beta: f64, n: usize, eps: f64) -> Result<u64> {
    check_params(c, alpha, beta, n)?;
    if !(v0 > 0.0) || !(eps > 0.0) {
        return Err(Error::InvalidInput("V0 and eps must be positive".into()));
    }
    let per_ball = c * (beta - alpha).powi(n as i32 - 1) * eps.powi(n as i32);
    let ratio = v0 / per_ball;
    if !ratio.is_finite() {
        return Err(Error::InvalidInput("packing ratio overflowed".into()));
    }
    // Snap ratios a few ulps from an integer before flooring, so decimal
    // inputs like (1.1 - 0.9)^2 floor as intended.
    let snapped = ratio.round();
    let ratio = if (ratio - snapped).abs() <= 1e-9 * ratio.max(1.0) { snapped } else { ratio };
    Ok(ratio.floor().min(u64::MAX as f64) as u64)
}

/// Explicit diameter bound `D0 = r0 (V0 / (C (beta-alpha)^(n-1) (r0/2)^n) + 1)`.
///
/// Derivation: along a geodesic of a length space, centers spaced `r0` apart
/// give disjoint `r0/2`-balls, each of volume at least
/// `C (beta-alpha)^(n-1) (r0/2)^n`; a diameter above `D0` would therefore
/// need more total volume than `V0`. The formula is this toolkit's explicit
/// choice and is flagged as such in reports.
pub fn diameter_bound(v0: f64, c: f64, alpha: f64, beta: f64, n: usize, r0: f64) -> Result<f64> {
    check_params(c, alpha, beta, n)?;
    if !(v0 > 0.0) || !(r0 > 0.0) {
        return Err(Error::InvalidInput("V0 and r0 must be positive".into()));
    }
    let per_ball = c * (beta - alpha).powi(n as i32 - 1) * (r0 / 2.0).powi(n as i32);
    Ok(r0 * (v0 / per_ball + 1.0))
}

/// Size of a greedy maximal set of seeded sample points pairwise at least
/// `2 eps` apart. Deterministic given the seed; an empirical counterpart to
/// [`packing_bound`].
pub fn greedy_packing(
    space: &SpaceSpec,
    region: &Region,
    eps: f64,
    candidate_count: usize,
    seed: u64,
) -> Result<usize> {
    if !(eps > 0.0) {
        return Err(Error::InvalidInput("eps must be positive".into()));
    }
    if candidate_count == 0 {
        return Err(Error::InvalidInput("candidate_count must be positive".into()));
    }
    let candidates = space.sample_points(region, candidate_count, seed)?;
    let mut kept: Vec<Point> = Vec::new();
    'next: for cand in candidates {
        for k in &kept {
            if space.distance(&cand, k)? < 2.0 * eps {
                continue 'next;
            }
        }
        kept.push(cand);
    }
    Ok(kept.len())
}

/// Arguments and results of the bounds computations, for JSON emission.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundsReport {
    pub packing_bound: Option<u64>,
    pub diameter_bound: Option<f64>,
    pub greedy_packing: Option<usize>,
    pub notes: Vec<String>,
}
