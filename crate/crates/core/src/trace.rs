//! Sampled images of vertical segments `s -> (x0, s)` under the section maps.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::{FRAC_PI_2, PI, TAU};

use crate::error::{Error, Result};
use crate::params::ModelParams;
use crate::sections::{
    eta, eta_with_jacobian, phi1, phi2_inverse, psi12, psi21, reversal_functional, stretch, WallPoint,
};

/// Agreement required between the closed-form segment image and the composed maps.
pub const FORMULA_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurveSample {
    pub s: f64,
    pub point: WallPoint,
    pub dxds: f64,
    pub valid: bool,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct CurveTrace {
    pub samples: Vec<CurveSample>,
}

impl CurveTrace {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn valid_samples(&self) -> impl Iterator<Item = &CurveSample> {
        self.samples.iter().filter(|c| c.valid)
    }

    pub fn s_range(&self) -> Option<(f64, f64)> {
        let first = self.samples.first()?.s;
        let last = self.samples.last()?.s;
        Some((first.min(last), first.max(last)))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiskSample {
    pub s: f64,
    pub r: f64,
    pub phi_lift: f64,
    pub valid: bool,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct DiskCurve {
    pub samples: Vec<DiskSample>,
}

fn check_grid(s_grid: &[f64]) -> Result<()> {
    if s_grid.is_empty() {
        return Err(Error::InvalidInput("empty s grid".into()));
    }
    if let Some(bad) = s_grid.iter().find(|s| !(**s > 0.0 && **s <= 1.0)) {
        return Err(Error::InvalidInput(format!("s = {bad} outside (0, 1]")));
    }
    let increasing = s_grid.windows(2).all(|w| w[0] < w[1]);
    let decreasing = s_grid.windows(2).all(|w| w[0] > w[1]);
    if !(increasing || decreasing) {
        return Err(Error::InvalidInput("s grid must be strictly monotone".into()));
    }
    Ok(())
}

/// Shear angle evaluated through `atan(tan(phi)/a²)` on the half period of `phi`.
fn shear_angle_via_tangent(phi: f64, a: f64) -> f64 {
    let k = ((phi + FRAC_PI_2) / PI).floor();
    let reduced = phi - k * PI;
    k * PI + (reduced.tan() / (a * a)).atan()
}

/// Closed-form image of `(x0, s)`: `x2 = -(g2/2)·ln(s·C(phi)) + Phi(phi)`, `y2 = s·C(phi)`,
/// with `phi = x0 - g1·ln s`.
pub fn segment_closed_form(x0: f64, s: f64, params: &ModelParams) -> WallPoint {
    let phi = x0 - params.g1 * s.ln();
    let y2 = s * stretch(phi, params.a());
    WallPoint {
        x: -0.5 * params.g2 * y2.ln() + shear_angle_via_tangent(phi, params.a()),
        y: y2,
    }
}

/// Analytic slope of the lifted exit angle along the segment.
pub fn segment_dxds(x0: f64, s: f64, params: &ModelParams) -> f64 {
    let phi = x0 - params.g1 * s.ln();
    -reversal_functional(phi, params) / s
}

/// Central difference of the composed map's lifted exit angle, step `1e-7·s`.
pub fn segment_dxds_numeric(x0: f64, s: f64, params: &ModelParams) -> Result<f64> {
    let h = 1e-7 * s;
    let up = eta(WallPoint::new(x0, s + h), params)?;
    let down = eta(WallPoint::new(x0, s - h), params)?;
    Ok((up.x - down.x) / (2.0 * h))
}

/// Image of the vertical segment at `x0`, evaluated both in closed form and through the composed maps.
pub fn segment_trace(x0: f64, s_grid: &[f64], params: &ModelParams) -> Result<CurveTrace> {
    check_grid(s_grid)?;
    let samples = s_grid
        .par_iter()
        .map(|&s| {
            let closed = segment_closed_form(x0, s, params);
            let composed = eta(WallPoint::new(x0, s), params);
            let valid = match composed {
                Ok(p) => {
                    let delta = (p.x - closed.x).abs().max((p.y - closed.y).abs());
                    if !(delta <= FORMULA_TOL) {
                        return Err(Error::FormulaMismatch { s, delta });
                    }
                    true
                }
                Err(_) => false,
            };
            Ok(CurveSample {
                s,
                point: composed.unwrap_or(closed),
                dxds: segment_dxds(x0, s, params),
                valid,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(CurveTrace { samples })
}

/// The top-disk spiral traced by `phi1` on the segment.
pub fn phi1_image(x0: f64, s_grid: &[f64], params: &ModelParams) -> Result<DiskCurve> {
    check_grid(s_grid)?;
    let samples = s_grid
        .iter()
        .map(|&s| match phi1(WallPoint::new(x0, s), params) {
            Ok(q) => DiskSample {
                s,
                r: q.r,
                phi_lift: q.phi,
                valid: true,
            },
            Err(_) => DiskSample {
                s,
                r: f64::NAN,
                phi_lift: f64::NAN,
                valid: false,
            },
        })
        .collect();
    Ok(DiskCurve { samples })
}

/// The spiral in the top disk of the second saddle swept by `psi12 ∘ phi1` on the segment.
pub fn sheared_image(x0: f64, s_grid: &[f64], params: &ModelParams) -> Result<DiskCurve> {
    let mut curve = phi1_image(x0, s_grid, params)?;
    for sample in curve.samples.iter_mut().filter(|c| c.valid) {
        let q = psi12(crate::sections::DiskPoint::new(sample.r, sample.phi_lift), params)?;
        sample.r = q.r;
        sample.phi_lift = q.phi;
        sample.valid = q.r <= 1.0;
    }
    Ok(curve)
}

/// Pull-back of the vertical line `x = x_s` on the exit wall into the entry disk, `s` the wall height.
pub fn stable_line_preimage(x_s: f64, s_grid: &[f64], params: &ModelParams) -> Result<DiskCurve> {
    check_grid(s_grid)?;
    let samples = s_grid
        .iter()
        .map(|&s| {
            let q = phi2_inverse(WallPoint::new(x_s, s), params)?;
            Ok(DiskSample {
                s,
                r: q.r,
                phi_lift: q.phi,
                valid: true,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(DiskCurve { samples })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpiralDiagnostics {
    /// Signed number of turns between the first and last valid sample.
    pub winding: f64,
    pub monotone_fraction: f64,
    /// Radius at the smallest curve parameter.
    pub radius_limit: f64,
}

pub fn spiral_diagnostics(curve: &DiskCurve) -> Result<SpiralDiagnostics> {
    let valid: Vec<&DiskSample> = curve.samples.iter().filter(|c| c.valid).collect();
    let (first, last) = match (valid.first(), valid.last()) {
        (Some(f), Some(l)) => (f, l),
        _ => return Err(Error::InvalidInput("no valid samples".into())),
    };
    let steps = valid.len().saturating_sub(1);
    let monotone_fraction = if steps == 0 {
        1.0
    } else {
        let up = valid.windows(2).filter(|w| w[1].r >= w[0].r).count();
        let down = valid.windows(2).filter(|w| w[1].r <= w[0].r).count();
        up.max(down) as f64 / steps as f64
    };
    let innermost = valid
        .iter()
        .min_by(|a, b| a.s.total_cmp(&b.s))
        .expect("non-empty");
    Ok(SpiralDiagnostics {
        winding: (last.phi_lift - first.phi_lift) / TAU,
        monotone_fraction,
        radius_limit: innermost.r,
    })
}

/// A connected valid piece of the `order`-th iterate of the segment, in exit-wall coordinates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IteratedPiece {
    pub order: usize,
    pub trace: CurveTrace,
}

/// State after a number of passes of the segment point `(x0, s)` through the cycle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PassState {
    pub point: WallPoint,
    /// Derivative of `point` with respect to `s`.
    pub tangent: [f64; 2],
    /// Top-disk phase of the last pass.
    pub phase: f64,
}

/// `order` passes through the cycle starting at `(x0, s)`, carrying the curve tangent along.
/// `None` once any pass leaves the neighbourhood.
pub fn iterate_segment_point(x0: f64, s: f64, order: usize, params: &ModelParams) -> Option<PassState> {
    let mut point = WallPoint::new(x0, s);
    let mut tangent = [0.0, 1.0];
    let mut phase = f64::NAN;
    let rotation = crate::sections::jacobian(
        crate::sections::MapId::Psi21,
        crate::sections::SectionPoint::Wall(WallPoint::new(0.0, 0.5)),
        params,
        0.0,
    )
    .ok()?;
    for pass in 0..order {
        if pass > 0 {
            point = psi21(point, params);
            tangent = rotation.apply(tangent);
        }
        if !(point.y > 0.0 && point.y <= 1.0) {
            return None;
        }
        phase = point.x - params.g1 * point.y.ln();
        let (image, j) = eta_with_jacobian(point, params).ok()?;
        if !(image.y > 0.0 && image.y <= 1.0) || !j.is_finite() {
            return None;
        }
        point = image;
        tangent = j.apply(tangent);
    }
    Some(PassState { point, tangent, phase })
}

fn iterate_point(x0: f64, s: f64, order: usize, params: &ModelParams) -> Option<PassState> {
    iterate_segment_point(x0, s, order, params)
}

/// Relative resolution in `s` to which piece ends are located.
pub const BOUNDARY_RESOLUTION: f64 = 1e-12;

fn refine_boundary(x0: f64, mut inside: f64, mut outside: f64, order: usize, params: &ModelParams) -> f64 {
    while (inside - outside).abs() > BOUNDARY_RESOLUTION * inside.abs().max(outside.abs()) {
        let mid = 0.5 * (inside + outside);
        if mid == inside || mid == outside {
            break;
        }
        if iterate_point(x0, mid, order, params).is_some() {
            inside = mid;
        } else {
            outside = mid;
        }
    }
    inside
}

fn clustered_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n < 2 || lo == hi {
        return vec![lo];
    }
    let (llo, lhi) = (lo.ln(), hi.ln());
    let mut grid: Vec<f64> = (0..n)
        .map(|i| {
            let t = i as f64 / (n - 1) as f64;
            let u = 0.5 * (1.0 - (PI * t).cos());
            (llo + (lhi - llo) * u).exp()
        })
        .collect();
    grid[0] = lo;
    grid[n - 1] = hi;
    grid.dedup();
    grid
}

/// Splits `grid` into maximal runs surviving `order` passes and returns their refined end points.
fn surviving_intervals(x0: f64, grid: &[f64], order: usize, params: &ModelParams) -> Vec<(f64, f64)> {
    let alive: Vec<bool> = grid
        .par_iter()
        .map(|&s| iterate_point(x0, s, order, params).is_some())
        .collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < grid.len() {
        if !alive[i] {
            i += 1;
            continue;
        }
        let start = i;
        while i + 1 < grid.len() && alive[i + 1] {
            i += 1;
        }
        let mut lo = grid[start];
        let mut hi = grid[i];
        if start > 0 {
            lo = refine_boundary(x0, lo, grid[start - 1], order, params);
        }
        if i + 1 < grid.len() {
            hi = refine_boundary(x0, hi, grid[i + 1], order, params);
        }
        out.push((lo.min(hi), lo.max(hi)));
        i += 1;
    }
    out
}

fn piece_trace(x0: f64, grid: &[f64], order: usize, params: &ModelParams) -> CurveTrace {
    let samples = grid
        .par_iter()
        .filter_map(|&s| {
            iterate_point(x0, s, order, params).map(|t| CurveSample {
                s,
                point: t.point,
                dxds: t.tangent[0],
                valid: true,
            })
        })
        .collect();
    CurveTrace { samples }
}

/// Iterates the segment `k` times through the cycle, keeping only connected pieces that stay in the
/// neighbourhood. Each piece is resampled with `s_grid.len()` points clustered toward its ends.
///
/// When every grid point survives the first pass, the order-one piece is exactly [`segment_trace`].
pub fn iterated_segment_trace(x0: f64, s_grid: &[f64], k: usize, params: &ModelParams) -> Result<Vec<IteratedPiece>> {
    check_grid(s_grid)?;
    if k == 0 {
        return Err(Error::InvalidInput("iteration count must be at least 1".into()));
    }
    let n = s_grid.len().max(2);
    let mut out = Vec::new();
    let mut parents: Vec<Vec<f64>> = vec![s_grid.to_vec()];
    for order in 1..=k {
        let mut next = Vec::new();
        for grid in &parents {
            let intervals = surviving_intervals(x0, grid, order, params);
            if order == 1 && intervals.len() == 1 && grid.iter().all(|&s| iterate_point(x0, s, 1, params).is_some()) {
                let trace = segment_trace(x0, s_grid, params)?;
                out.push(IteratedPiece { order, trace });
                next.push(s_grid.to_vec());
                continue;
            }
            for (lo, hi) in intervals {
                let fine = clustered_grid(lo, hi, n);
                let trace = piece_trace(x0, &fine, order, params);
                if !trace.is_empty() {
                    out.push(IteratedPiece { order, trace });
                    next.push(fine);
                }
            }
        }
        if next.is_empty() {
            return Err(Error::Extinct(order));
        }
        parents = next;
    }
    Ok(out)
}
