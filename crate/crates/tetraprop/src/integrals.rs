//! Tensor quadrature of h: the integral form of the property and the
//! sliced-filling lower bound.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::checker::{check_tetrahedral, TetraQuery, Verdict};
use crate::slicer::{h_value_unchecked, Tolerances};
use crate::spaces::{Point, SpaceSpec};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QuadRule {
    /// Midpoint rule; robust when the integrand jumps with set cardinality.
    Midpoint,
    Trapezoid,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureSpec {
    /// Nodes per axis, at least 2.
    pub m: usize,
    pub rule: QuadRule,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        QuadratureSpec { m: 9, rule: QuadRule::Midpoint }
    }
}

impl QuadratureSpec {
    pub fn validate(&self) -> Result<()> {
        if self.m < 2 {
            return Err(Error::InvalidInput("quadrature needs at least 2 nodes per axis".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntegralTetraResult {
    pub integral_value: f64,
    pub bound: f64,
    pub error_estimate: f64,
    pub satisfied: bool,
}

fn axis_nodes(lo: f64, hi: f64, m: usize, rule: QuadRule) -> (Vec<f64>, Vec<f64>) {
    match rule {
        QuadRule::Midpoint => {
            let h = (hi - lo) / m as f64;
            let nodes = (0..m).map(|i| lo + (i as f64 + 0.5) * h).collect();
            (nodes, vec![h; m])
        }
        QuadRule::Trapezoid => {
            let h = (hi - lo) / (m - 1) as f64;
            let nodes: Vec<f64> =
                (0..m).map(|i| lo + h * i as f64).collect();
            let mut weights = vec![h; m];
            weights[0] = 0.5 * h;
            weights[m - 1] = 0.5 * h;
            (nodes, weights)
        }
    }
}

/// Kahan-compensated sum, applied in a fixed order so parallel evaluation
/// reproduces the sequential result bit for bit.
fn compensated_sum(values: impl IntoIterator<Item = f64>) -> f64 {
    let mut sum = 0.0;
    let mut c = 0.0;
    for x in values {
        let y = x - c;
        let t = sum + y;
        c = (t - sum) - y;
        sum = t;
    }
    sum
}

/// Tensor-product quadrature of `f` over the box `prod [lo_i, hi_i]`.
/// Evaluations run in parallel; the reduction order is fixed.
pub fn tensor_quadrature<F>(f: &F, lo: &[f64], hi: &[f64], m: usize, rule: QuadRule) -> f64
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    let dims = lo.len();
    assert_eq!(dims, hi.len());
    let axes: Vec<(Vec<f64>, Vec<f64>)> =
        lo.iter().zip(hi.iter()).map(|(&l, &h)| axis_nodes(l, h, m, rule)).collect();
    let total = m.pow(dims as u32);
    let terms: Vec<f64> = (0..total)
        .into_par_iter()
        .map(|flat| {
            let mut idx = flat;
            let mut t = vec![0.0; dims];
            let mut w = 1.0;
            for d in (0..dims).rev() {
                let i = idx % m;
                idx /= m;
                t[d] = axes[d].0[i];
                w *= axes[d].1[i];
            }
            w * f(&t)
        })
        .collect();
    compensated_sum(terms)
}

fn h_integrand<'a>(
    space: &'a SpaceSpec,
    p: &'a Point,
    apexes: &'a [Point],
    r: f64,
    tol: &'a Tolerances,
) -> impl Fn(&[f64]) -> f64 + Sync + 'a {
    move |t: &[f64]| h_value_unchecked(space, p, apexes, r, t, tol).unwrap_or(0.0)
}

/// Quadrature of h over `[alpha r, beta r]^(n-1)` against the bound
/// `C (beta - alpha)^(n-1) r^n`. The error estimate is the difference
/// between the `m`-node and `(2m - 1)`-node values.
pub fn integral_tetra(q: &TetraQuery, quad: &QuadratureSpec) -> Result<IntegralTetraResult> {
    q.validate()?;
    quad.validate()?;
    let c = q
        .c_target
        .ok_or_else(|| Error::InvalidInput("integral check needs a target constant C".into()))?;
    let apexes = q.apexes.as_ref().ok_or(Error::MissingApexes)?;
    for apex in apexes {
        let deviation = (q.space.distance(&q.p, apex)? - q.r).abs();
        if deviation > q.tol.tau_sphere {
            return Err(Error::ApexOffSphere { deviation, tolerance: q.tol.tau_sphere });
        }
    }
    let dims = q.n - 1;
    let lo = vec![q.alpha * q.r; dims];
    let hi = vec![q.beta * q.r; dims];
    let f = h_integrand(&q.space, &q.p, apexes, q.r, &q.tol);
    let coarse = tensor_quadrature(&f, &lo, &hi, quad.m, quad.rule);
    let fine = tensor_quadrature(&f, &lo, &hi, 2 * quad.m - 1, quad.rule);
    let error_estimate = (fine - coarse).abs();
    let bound = c * (q.beta - q.alpha).powi(dims as i32) * q.r.powi(q.n as i32);
    Ok(IntegralTetraResult {
        integral_value: fine,
        bound,
        error_estimate,
        satisfied: fine >= bound - error_estimate,
    })
}

/// Pointwise property implies the integral property: requires a HOLDS
/// verdict for `q`, then checks the integral bound with the same constant.
pub fn pointwise_implies_integral(q: &TetraQuery, quad: &QuadratureSpec) -> Result<bool> {
    let report = check_tetrahedral(q)?;
    if report.verdict != Verdict::Holds {
        return Err(Error::PreconditionViolated(format!(
            "pointwise check returned {}; the integral comparison needs HOLDS",
            report.verdict
        )));
    }
    let result = integral_tetra(q, quad)?;
    Ok(result.satisfied)
}

/// Quadrature of h over `prod [max(s_i - r, 0), s_i + r]` where
/// `s_i = d(p, q_i)`. This is a certified lower bound for the mass of the
/// ball slice; the apexes may sit anywhere in the space.
pub fn sliced_filling_lower_bound(
    space: &SpaceSpec,
    p: &Point,
    r: f64,
    apexes: &[Point],
    quad: &QuadratureSpec,
    tol: &Tolerances,
) -> Result<f64> {
    quad.validate()?;
    tol.validate()?;
    if apexes.is_empty() {
        return Err(Error::InvalidInput("at least one apex required".into()));
    }
    if !(r > 0.0) {
        return Err(Error::InvalidInput("radius r must be positive".into()));
    }
    let mut lo = Vec::with_capacity(apexes.len());
    let mut hi = Vec::with_capacity(apexes.len());
    for apex in apexes {
        let s = space.distance(p, apex)?;
        // Radii are nonnegative: clip the lower limit at 0.
        lo.push((s - r).max(0.0));
        hi.push(s + r);
    }
    let f = h_integrand(space, p, apexes, r, tol);
    Ok(tensor_quadrature(&f, &lo, &hi, quad.m, quad.rule))
}
