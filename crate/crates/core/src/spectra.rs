//! Fixed points of the return map and their linear stability.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::ModelParams;
use crate::reversal::find_reversal_phases;
use crate::sections::{jacobian, principal_angle, return_map, Jacobian2, MapId, SectionPoint, WallPoint};

/// Half-width of the parabolic band around `|trace| = 2`.
pub const CLASS_TOL: f64 = 1e-6;
/// Largest admissible `|det - 1|` for a reported point.
pub const DET_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StabilityClass {
    Elliptic,
    Hyperbolic,
    ParabolicWithinTol,
}

impl std::fmt::Display for StabilityClass {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            StabilityClass::Elliptic => "elliptic",
            StabilityClass::Hyperbolic => "hyperbolic",
            StabilityClass::ParabolicWithinTol => "parabolic-within-tol",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Classification {
    pub det: f64,
    pub trace: f64,
    pub eigenvalues: [Complex64; 2],
    pub class: StabilityClass,
}

pub fn eigenvalues(j: &Jacobian2) -> [Complex64; 2] {
    let tr = j.trace();
    let det = j.det();
    let disc = tr * tr - 4.0 * det;
    if disc >= 0.0 {
        let root = disc.sqrt();
        // Larger-magnitude root first, the other from the product to avoid cancellation.
        let big = 0.5 * (tr + if tr >= 0.0 { root } else { -root });
        let small = if big != 0.0 { det / big } else { 0.5 * (tr - root) };
        [Complex64::new(big, 0.0), Complex64::new(small, 0.0)]
    } else {
        let im = 0.5 * (-disc).sqrt();
        [Complex64::new(0.5 * tr, im), Complex64::new(0.5 * tr, -im)]
    }
}

pub fn class_of_trace(trace: f64, class_tol: f64) -> StabilityClass {
    if trace.abs() < 2.0 - class_tol {
        StabilityClass::Elliptic
    } else if trace.abs() > 2.0 + class_tol {
        StabilityClass::Hyperbolic
    } else {
        StabilityClass::ParabolicWithinTol
    }
}

pub fn classify_jacobian(j: &Jacobian2, class_tol: f64) -> Classification {
    Classification {
        det: j.det(),
        trace: j.trace(),
        eigenvalues: eigenvalues(j),
        class: class_of_trace(j.trace(), class_tol),
    }
}

/// Linear stability of the return map at `point`, from its chain-rule Jacobian.
pub fn classify(point: WallPoint, params: &ModelParams) -> Result<Classification> {
    let j = jacobian(MapId::ReturnMap, SectionPoint::Wall(point), params, 0.0)?;
    Ok(classify_jacobian(&j, CLASS_TOL))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SearchBox {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FixedPointReport {
    pub point: WallPoint,
    pub residual: f64,
    pub det: f64,
    pub trace: f64,
    pub eigenvalues: [Complex64; 2],
    pub class: StabilityClass,
    pub basin_seed: WallPoint,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FixedPointSearch {
    pub points: Vec<FixedPointReport>,
    pub seeds: usize,
    /// Seeds whose iteration left the domain of the return map.
    pub dropped: usize,
    /// Seeds that stayed in the domain without reaching the tolerance.
    pub unconverged: usize,
}

fn displacement(p: WallPoint, params: &ModelParams) -> Option<[f64; 2]> {
    let image = return_map(p, params).ok()?;
    Some([principal_angle(image.x - p.x), image.y - p.y])
}

fn norm(v: [f64; 2]) -> f64 {
    v[0].hypot(v[1])
}

enum Outcome {
    Converged(WallPoint, f64),
    Escaped,
    Stalled,
}

/// Damped Newton on `R(p) - p` with a forward-difference Jacobian.
fn newton(seed: WallPoint, tol: f64, params: &ModelParams) -> Outcome {
    let mut p = seed;
    let Some(mut f) = displacement(p, params) else {
        return Outcome::Escaped;
    };
    for _ in 0..100 {
        let r = norm(f);
        if r <= 1e-3 * tol {
            break;
        }
        let hx = 1e-8 * p.x.abs().max(1e-6);
        let hy = 1e-7 * p.y;
        let (Some(fx), Some(fy)) = (
            displacement(WallPoint::new(p.x + hx, p.y), params),
            displacement(WallPoint::new(p.x, p.y + hy), params),
        ) else {
            return Outcome::Escaped;
        };
        let j = Jacobian2::new(
            (fx[0] - f[0]) / hx,
            (fy[0] - f[0]) / hy,
            (fx[1] - f[1]) / hx,
            (fy[1] - f[1]) / hy,
        );
        let det = j.det();
        if !(det.is_finite() && det != 0.0) {
            return Outcome::Stalled;
        }
        let dx = -(j.m[1][1] * f[0] - j.m[0][1] * f[1]) / det;
        let dy = -(-j.m[1][0] * f[0] + j.m[0][0] * f[1]) / det;
        let mut lambda = 1.0;
        let mut accepted = None;
        while lambda > 1e-6 {
            let trial = WallPoint::new(p.x + lambda * dx, p.y + lambda * dy);
            if trial.y > 0.0 && trial.y <= 1.0 {
                if let Some(ft) = displacement(trial, params) {
                    if norm(ft) < r {
                        accepted = Some((trial, ft));
                        break;
                    }
                }
            }
            lambda *= 0.5;
        }
        match accepted {
            Some((trial, ft)) => {
                p = trial;
                f = ft;
            }
            None => break,
        }
    }
    let r = norm(f);
    if r <= tol {
        Outcome::Converged(p, r)
    } else {
        Outcome::Stalled
    }
}

/// Newton search for fixed points of the return map from an `n × n` seed grid, heights log-spaced.
/// Converged points closer than `10·tol` are merged, keeping the first seed in grid order.
pub fn find_fixed_points(search: SearchBox, grid_density: usize, tol: f64, params: &ModelParams) -> FixedPointSearch {
    let n = grid_density.max(1);
    let axis = |lo: f64, hi: f64, i: usize, log: bool| {
        let t = if n == 1 { 0.5 } else { i as f64 / (n - 1) as f64 };
        if log {
            (lo.ln() + (hi.ln() - lo.ln()) * t).exp()
        } else {
            lo + (hi - lo) * t
        }
    };
    let seeds: Vec<WallPoint> = (0..n)
        .flat_map(|i| {
            (0..n).map(move |j| {
                WallPoint::new(
                    axis(search.x_min, search.x_max, i, false),
                    axis(search.y_min, search.y_max, j, true),
                )
            })
        })
        .collect();
    let outcomes: Vec<Outcome> = seeds.par_iter().map(|&s| newton(s, tol, params)).collect();
    let mut points: Vec<FixedPointReport> = Vec::new();
    let (mut dropped, mut unconverged) = (0, 0);
    for (seed, outcome) in seeds.iter().zip(outcomes) {
        match outcome {
            Outcome::Escaped => dropped += 1,
            Outcome::Stalled => unconverged += 1,
            Outcome::Converged(p, residual) => {
                let duplicate = points
                    .iter()
                    .any(|q| principal_angle(q.point.x - p.x).hypot(q.point.y - p.y) <= 10.0 * tol);
                if duplicate {
                    continue;
                }
                let Ok(c) = classify(p, params) else {
                    unconverged += 1;
                    continue;
                };
                if (c.det - 1.0).abs() > DET_TOL {
                    unconverged += 1;
                    continue;
                }
                points.push(FixedPointReport {
                    point: p,
                    residual,
                    det: c.det,
                    trace: c.trace,
                    eigenvalues: c.eigenvalues,
                    class: c.class,
                    basin_seed: *seed,
                });
            }
        }
    }
    FixedPointSearch {
        points,
        seeds: seeds.len(),
        dropped,
        unconverged,
    }
}

/// Points sampled along the fiber at phase `phi0`, where `x = phi0 + g1·ln y`.
pub const STRIP_SAMPLES: usize = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HeightInterval {
    pub y_lo: f64,
    pub y_hi: f64,
}

/// Maximal height intervals along the fiber through phase `phi0` on which the return-map trace
/// lies in `(-2, 2)`, from `STRIP_SAMPLES` heights log-spaced over `[1e-12·y_max, y_max]`.
pub fn elliptic_strip(phi0: f64, y_max: f64, params: &ModelParams) -> Vec<HeightInterval> {
    if !(y_max > 0.0) {
        return Vec::new();
    }
    let y_max = y_max.min(1.0);
    let lo = (y_max * 1e-12).ln();
    let hi = y_max.ln();
    let flags: Vec<Option<(f64, bool)>> = (0..STRIP_SAMPLES)
        .into_par_iter()
        .map(|i| {
            let ln_y = lo + (hi - lo) * i as f64 / (STRIP_SAMPLES - 1) as f64;
            let y = ln_y.exp().min(y_max);
            if !(y > 0.0) {
                return None;
            }
            let p = WallPoint::new(phi0 + params.g1 * ln_y, y);
            let j = jacobian(MapId::ReturnMap, SectionPoint::Wall(p), params, 0.0).ok()?;
            Some((y, j.trace().abs() < 2.0))
        })
        .collect();
    let mut out = Vec::new();
    let mut open: Option<HeightInterval> = None;
    for f in flags {
        match f {
            Some((y, true)) => match open.as_mut() {
                Some(iv) => iv.y_hi = y,
                None => open = Some(HeightInterval { y_lo: y, y_hi: y }),
            },
            _ => {
                if let Some(iv) = open.take() {
                    out.push(iv);
                }
            }
        }
    }
    out.extend(open);
    out
}

/// [`elliptic_strip`] at every reversal phase of `params`.
pub fn elliptic_strips(y_max: f64, params: &ModelParams) -> Result<Vec<(f64, Vec<HeightInterval>)>> {
    let phases = find_reversal_phases(params);
    if phases.is_empty() {
        return Err(Error::NoReversals);
    }
    Ok(phases
        .into_iter()
        .map(|phi| (phi, elliptic_strip(phi, y_max, params)))
        .collect())
}
