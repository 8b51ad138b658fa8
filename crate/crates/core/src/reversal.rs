//! Reversal points of the segment image: phases where the exit angle turns back, their geometric
//! ladder in the curve parameter and the statistics of the exit angles along it.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::{PI, TAU};

use crate::error::{Error, Result};
use crate::params::ModelParams;
use crate::sections::{angle_mod_tau, circular_distance, eta, eta_log, reversal_functional, WallPoint};
use crate::trace::segment_dxds_numeric;

/// Grid size of the bracketing scan over one half period.
pub const PHASE_GRID: usize = 10_000;
/// Absolute width at which phase brackets stop bisecting.
pub const PHASE_TOL: f64 = 1e-12;
/// Smallest curve parameter still represented directly.
pub const UNDERFLOW_LIMIT: f64 = 1e-300;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReversalKind {
    Maximum,
    Minimum,
}

impl std::fmt::Display for ReversalKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            ReversalKind::Maximum => "maximum",
            ReversalKind::Minimum => "minimum",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReversalEvent {
    pub n: usize,
    /// Zero when the parameter is below `f64` range; `ln_s_n` stays exact.
    pub s_n: f64,
    pub ln_s_n: f64,
    pub phi_n: f64,
    pub x_lift: f64,
    pub kind: ReversalKind,
}

impl ReversalEvent {
    pub fn x_mod_tau(&self) -> f64 {
        angle_mod_tau(self.x_lift)
    }
}

fn bisect_root(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    let mut flo = f(lo);
    while hi - lo > PHASE_TOL {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let fm = f(mid);
        if fm == 0.0 {
            return mid;
        }
        if (fm < 0.0) == (flo < 0.0) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Phases in `[0, pi)` at which the exit angle of a vertical segment reverses direction.
///
/// Every sign change of the analytic slope functional on the scan grid yields one root; each root is
/// kept only if the composed map's numerical slope changes sign across it as well.
pub fn find_reversal_phases(params: &ModelParams) -> Vec<f64> {
    let d = |phi: f64| reversal_functional(phi, params);
    let grid: Vec<f64> = (0..=PHASE_GRID).map(|i| PI * i as f64 / PHASE_GRID as f64).collect();
    let values: Vec<f64> = grid.iter().map(|&phi| d(phi)).collect();
    let scale = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if scale < 1e-14 {
        return Vec::new();
    }
    let mut roots = Vec::new();
    for i in 0..PHASE_GRID {
        let (a, b) = (values[i], values[i + 1]);
        if a == 0.0 {
            roots.push(grid[i]);
        } else if b != 0.0 && (a < 0.0) != (b < 0.0) {
            roots.push(bisect_root(d, grid[i], grid[i + 1]));
        }
    }
    roots.retain(|&phi| verify_phase(phi, params));
    roots
}

/// Numerical slope of the composed map on both sides of `phi`, using a segment whose
/// parameter at phase `phi` is well inside the domain.
fn verify_phase(phi: f64, params: &ModelParams) -> bool {
    let s_ref = 0.25 / (params.a() * params.a());
    let delta = 1e-4;
    let side = |p: f64| {
        let x0 = p + params.g1 * s_ref.ln();
        segment_dxds_numeric(x0, s_ref, params).ok()
    };
    match (side(phi - delta), side(phi + delta)) {
        (Some(l), Some(r)) => (l < 0.0) != (r < 0.0),
        _ => false,
    }
}

/// Concavity of the exit angle as a function of the curve parameter at phase `phi0`.
pub fn reversal_kind(phi0: f64, params: &ModelParams) -> ReversalKind {
    let h = 1e-6;
    let slope = reversal_functional(phi0 + h, params) - reversal_functional(phi0 - h, params);
    if slope < 0.0 {
        ReversalKind::Maximum
    } else {
        ReversalKind::Minimum
    }
}

/// Reversal events `n = 0..n_max` on the segment `x0 = 0` at `s_n = s0·exp(-n·pi/g1)`,
/// `s0 = exp(-phi0/g1)`. Exit angles come from the composed maps.
pub fn reversal_sequence(phi0: f64, n_max: usize, params: &ModelParams) -> Result<Vec<ReversalEvent>> {
    let g1 = params.g1;
    let kind = reversal_kind(phi0, params);
    let s0 = (-phi0 / g1).exp();
    let mut events = Vec::with_capacity(n_max);
    for n in 0..n_max {
        let s_n = s0 * (-(n as f64) * PI / g1).exp();
        if s_n < UNDERFLOW_LIMIT {
            return Err(Error::Underflow { n, truncated: events });
        }
        let image = eta(WallPoint::new(0.0, s_n), params)?;
        events.push(ReversalEvent {
            n,
            s_n,
            ln_s_n: s_n.ln(),
            phi_n: -g1 * s_n.ln(),
            x_lift: image.x,
            kind,
        });
    }
    Ok(events)
}

/// The same ladder evaluated in logarithmic height, valid for any `n_max`.
pub fn reversal_ladder(phi0: f64, n_max: usize, params: &ModelParams) -> Result<Vec<ReversalEvent>> {
    let g1 = params.g1;
    let kind = reversal_kind(phi0, params);
    (0..n_max)
        .into_par_iter()
        .map(|n| {
            let ln_s = -(phi0 + n as f64 * PI) / g1;
            let (x_lift, _) = eta_log(0.0, ln_s, params)?;
            Ok(ReversalEvent {
                n,
                s_n: ln_s.exp(),
                ln_s_n: ln_s,
                phi_n: phi0 + n as f64 * PI,
                x_lift,
                kind,
            })
        })
        .collect()
}

/// Merges phase families into one sequence ordered by decreasing curve parameter.
pub fn interleave(families: &[Vec<ReversalEvent>]) -> Vec<ReversalEvent> {
    let mut all: Vec<ReversalEvent> = families.iter().flatten().copied().collect();
    all.sort_by(|a, b| b.ln_s_n.total_cmp(&a.ln_s_n));
    all
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProgressionFit {
    pub slope_fit: f64,
    pub intercept: f64,
    pub max_abs_residual: f64,
}

/// Least-squares line through `(n, x_lift)`.
pub fn progression_check(events: &[ReversalEvent]) -> Result<ProgressionFit> {
    if events.len() < 3 {
        return Err(Error::InvalidInput("progression fit needs at least 3 events".into()));
    }
    let len = events.len() as f64;
    let mean_n = events.iter().map(|e| e.n as f64).sum::<f64>() / len;
    let mean_x = events.iter().map(|e| e.x_lift).sum::<f64>() / len;
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for e in events {
        let dn = e.n as f64 - mean_n;
        sxy += dn * (e.x_lift - mean_x);
        sxx += dn * dn;
    }
    if sxx == 0.0 {
        return Err(Error::InvalidInput("events share a single index".into()));
    }
    let slope = sxy / sxx;
    let intercept = mean_x - slope * mean_n;
    let max_abs_residual = events
        .iter()
        .map(|e| (e.x_lift - intercept - slope * e.n as f64).abs())
        .fold(0.0, f64::max);
    Ok(ProgressionFit {
        slope_fit: slope,
        intercept,
        max_abs_residual,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Equidistribution {
    pub star_discrepancy: f64,
    pub histogram: Vec<usize>,
    pub count: usize,
}

/// Exact star discrepancy of points in `[0, 1)`.
pub fn star_discrepancy(points: &[f64]) -> f64 {
    let mut sorted = points.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    sorted
        .iter()
        .enumerate()
        .map(|(i, &u)| ((i + 1) as f64 / n - u).max(u - i as f64 / n))
        .fold(0.0, f64::max)
}

/// Statistics of the exit angles reduced to the circle and scaled to `[0, 1)`.
pub fn equidistribution(events: &[ReversalEvent], bins: usize) -> Result<Equidistribution> {
    if events.len() < 10 {
        return Err(Error::InvalidInput("equidistribution needs at least 10 events".into()));
    }
    if bins == 0 {
        return Err(Error::InvalidInput("bins must be positive".into()));
    }
    let unit: Vec<f64> = events.iter().map(|e| e.x_mod_tau() / TAU).collect();
    let mut histogram = vec![0usize; bins];
    for &u in &unit {
        histogram[((u * bins as f64) as usize).min(bins - 1)] += 1;
    }
    Ok(Equidistribution {
        star_discrepancy: star_discrepancy(&unit),
        histogram,
        count: unit.len(),
    })
}

/// Number of clusters of the exit angles on the circle, joining angles closer than `tol`.
pub fn distinct_angles(events: &[ReversalEvent], tol: f64) -> usize {
    let mut reps: Vec<f64> = Vec::new();
    for e in events {
        let x = e.x_mod_tau();
        if !reps.iter().any(|&r| circular_distance(r, x) <= tol) {
            reps.push(x);
        }
    }
    reps.len()
}
