//! Near-tangency search between the unstable curve and vertical stable lines on the exit wall,
//! the cascade of higher-order candidates and crossings of the two top-disk spirals.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::ModelParams;
use crate::reversal::{reversal_ladder, ReversalEvent, ReversalKind};
use crate::sections::{circular_distance, eta, phi1, phi2_inverse, psi12, psi21, DiskPoint, WallPoint};
use crate::trace::{iterate_segment_point, iterated_segment_trace, CurveTrace};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TangencyCandidate {
    pub order: usize,
    pub event: ReversalEvent,
    pub stable_line_x: f64,
    pub circular_distance: f64,
    pub contact_point: WallPoint,
    /// Length of the connecting orbit inside the two saddle neighbourhoods.
    pub arclen: f64,
}

/// First-order candidates: reversal points whose exit angle lies within `tol_angle` of the
/// stable line on the circle, sorted by distance.
pub fn tangency_search(
    stable_line_x: f64,
    phases: &[f64],
    n_max: usize,
    tol_angle: f64,
    params: &ModelParams,
) -> Result<Vec<TangencyCandidate>> {
    if phases.is_empty() {
        return Err(Error::NoReversals);
    }
    let mut out = Vec::new();
    for &phi0 in phases {
        for event in reversal_ladder(phi0, n_max, params)? {
            let distance = circular_distance(event.x_lift, stable_line_x);
            if distance <= tol_angle {
                out.push(TangencyCandidate {
                    order: 1,
                    event,
                    stable_line_x,
                    circular_distance: distance,
                    contact_point: WallPoint::new(event.x_lift, ln_exit_height(&event, params).exp()),
                    arclen: connection_arclength_log(0.0, event.ln_s_n, 1, params),
                });
            }
        }
    }
    sort_candidates(&mut out);
    Ok(out)
}

fn ln_exit_height(event: &ReversalEvent, params: &ModelParams) -> f64 {
    event.ln_s_n + crate::sections::stretch(event.phi_n, params.a()).ln()
}

fn sort_candidates(c: &mut [TangencyCandidate]) {
    c.sort_by(|a, b| {
        a.circular_distance
            .total_cmp(&b.circular_distance)
            .then(b.event.ln_s_n.total_cmp(&a.event.ln_s_n))
    });
}

const SIMPSON_INTERVALS: usize = 2000;

fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64) -> f64 {
    if b <= a {
        return 0.0;
    }
    let n = SIMPSON_INTERVALS;
    let h = (b - a) / n as f64;
    let mut acc = f(a) + f(b);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        acc += w * f(a + h * i as f64);
    }
    acc * h / 3.0
}

/// Euclidean length of one pass of the linear flows, from the entry wall at log-height `ln_y`
/// through the first neighbourhood, across the shear, and out of the second neighbourhood.
pub fn pass_arclength_log(x: f64, ln_y: f64, params: &ModelParams) -> f64 {
    let s = &params.saddle;
    let t1 = -ln_y / s.e1;
    let first = simpson(
        |t| {
            let radial = (s.c1 * s.c1 + s.alpha1 * s.alpha1) * (-2.0 * s.c1 * t).exp();
            let axial = s.e1 * s.e1 * (2.0 * (ln_y + s.e1 * t)).exp();
            (radial + axial).sqrt()
        },
        0.0,
        t1,
    );
    let phi = x - params.g1 * ln_y;
    let ln_r2 = 0.5 * ln_y + 0.5 * crate::sections::stretch(phi, params.a()).ln();
    let t2 = (-ln_r2 / s.e2).max(0.0);
    let second = simpson(
        |t| {
            let radial = (s.e2 * s.e2 + s.alpha2 * s.alpha2) * (2.0 * (ln_r2 + s.e2 * t)).exp();
            let axial = s.c2 * s.c2 * (-2.0 * s.c2 * t).exp();
            (radial + axial).sqrt()
        },
        0.0,
        t2,
    );
    first + second
}

/// Arc length of `order` passes of the segment point `(x0, exp(ln_s))`.
pub fn connection_arclength_log(x0: f64, ln_s: f64, order: usize, params: &ModelParams) -> f64 {
    let mut total = pass_arclength_log(x0, ln_s, params);
    if order <= 1 {
        return total;
    }
    let mut point = match eta(WallPoint::new(x0, ln_s.exp()), params) {
        Ok(p) => p,
        Err(_) => return total,
    };
    for _ in 1..order {
        let entry = psi21(point, params);
        if !(entry.y > 0.0 && entry.y <= 1.0) {
            break;
        }
        total += pass_arclength_log(entry.x, entry.y.ln(), params);
        point = match eta(entry, params) {
            Ok(p) => p,
            Err(_) => break,
        };
    }
    total
}

/// Relative step of the numerical slope used to locate reversals on iterated pieces.
const SLOPE_STEP: f64 = 1e-6;

fn lift_at(x0: f64, s: f64, order: usize, params: &ModelParams) -> Option<f64> {
    iterate_segment_point(x0, s, order, params).map(|p| p.point.x)
}

fn numeric_slope(x0: f64, s: f64, order: usize, params: &ModelParams) -> Option<f64> {
    let h = SLOPE_STEP * s;
    Some((lift_at(x0, s + h, order, params)? - lift_at(x0, s - h, order, params)?) / (2.0 * h))
}

/// Reversal points of one iterated piece, located by sign changes of the numerically
/// differentiated lift and refined by bisection on the numerical slope.
pub fn piece_reversals(x0: f64, trace: &CurveTrace, order: usize, params: &ModelParams) -> Vec<(f64, ReversalKind)> {
    let mut samples: Vec<(f64, f64)> = trace.valid_samples().map(|c| (c.s, c.point.x)).collect();
    samples.sort_by(|a, b| a.0.total_cmp(&b.0));
    if samples.len() < 3 {
        return Vec::new();
    }
    let slopes: Vec<f64> = samples
        .windows(2)
        .map(|w| (w[1].1 - w[0].1) / (w[1].0 - w[0].0))
        .collect();
    let mut out = Vec::new();
    for i in 0..slopes.len() - 1 {
        let (left, right) = (slopes[i], slopes[i + 1]);
        if left == 0.0 || (left < 0.0) == (right < 0.0) {
            continue;
        }
        let (mut lo, mut hi) = (samples[i].0, samples[i + 2].0);
        let mut lo_sign = match numeric_slope(x0, lo, order, params) {
            Some(v) => v < 0.0,
            None => left < 0.0,
        };
        for _ in 0..200 {
            if (hi - lo) <= 1e-13 * hi {
                break;
            }
            let mid = 0.5 * (lo + hi);
            match numeric_slope(x0, mid, order, params) {
                Some(v) if (v < 0.0) == lo_sign => {
                    lo = mid;
                    lo_sign = v < 0.0;
                }
                Some(_) => hi = mid,
                None => break,
            }
        }
        let kind = if left > 0.0 {
            ReversalKind::Maximum
        } else {
            ReversalKind::Minimum
        };
        out.push((0.5 * (lo + hi), kind));
    }
    out
}

/// Candidates of every order up to `k_max` on the segment at `x0`, one list per order.
pub fn cascade_scan(
    k_max: usize,
    x0: f64,
    s_grid: &[f64],
    stable_line_x: f64,
    tol_angle: f64,
    params: &ModelParams,
) -> Result<Vec<Vec<TangencyCandidate>>> {
    if !(1..=3).contains(&k_max) {
        return Err(Error::InvalidInput("cascade order must be between 1 and 3".into()));
    }
    let pieces = iterated_segment_trace(x0, s_grid, k_max, params)?;
    let mut per_order: Vec<Vec<TangencyCandidate>> = vec![Vec::new(); k_max];
    let found: Vec<(usize, f64, ReversalKind)> = pieces
        .par_iter()
        .flat_map_iter(|piece| {
            piece_reversals(x0, &piece.trace, piece.order, params)
                .into_iter()
                .map(move |(s, kind)| (piece.order, s, kind))
        })
        .collect();
    for (order, s, kind) in found {
        let Some(state) = iterate_segment_point(x0, s, order, params) else {
            continue;
        };
        let distance = circular_distance(state.point.x, stable_line_x);
        per_order[order - 1].push(TangencyCandidate {
            order,
            event: ReversalEvent {
                n: 0,
                s_n: s,
                ln_s_n: s.ln(),
                phi_n: state.phase,
                x_lift: state.point.x,
                kind,
            },
            stable_line_x,
            circular_distance: distance,
            contact_point: state.point,
            arclen: connection_arclength_log(x0, s.ln(), order, params),
        });
    }
    for list in per_order.iter_mut() {
        list.sort_by(|a, b| b.event.s_n.total_cmp(&a.event.s_n));
        for (n, c) in list.iter_mut().enumerate() {
            c.event.n = n;
        }
        list.retain(|c| c.circular_distance <= tol_angle);
        sort_candidates(list);
    }
    Ok(per_order)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SegmentSpec {
    /// Angular position of the vertical segment.
    pub x: f64,
    pub s_min: f64,
    pub s_max: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpiralIntersection {
    pub point: DiskPoint,
    /// Acute angle between the curves, in `[0, pi/2]`.
    pub angle_between: f64,
    pub tangential: bool,
    pub s_stable: f64,
    pub s_unstable: f64,
}

/// Angle below which a contact is flagged tangential.
pub const TANGENTIAL_ANGLE: f64 = 1e-3;
/// Residual to which crossings are refined.
pub const CROSSING_TOL: f64 = 1e-10;

/// Planar polyline crossing with its segment indices and local parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolylineHit {
    pub i: usize,
    pub j: usize,
    pub t: f64,
    pub u: f64,
    pub point: [f64; 2],
    pub angle: f64,
}

const CHUNK: usize = 32;

#[derive(Clone, Copy)]
struct Bbox {
    lo: [f64; 2],
    hi: [f64; 2],
}

impl Bbox {
    fn of(points: &[[f64; 2]]) -> Bbox {
        let mut b = Bbox {
            lo: [f64::INFINITY; 2],
            hi: [f64::NEG_INFINITY; 2],
        };
        for p in points {
            for k in 0..2 {
                b.lo[k] = b.lo[k].min(p[k]);
                b.hi[k] = b.hi[k].max(p[k]);
            }
        }
        b
    }

    fn overlaps(&self, other: &Bbox, pad: f64) -> bool {
        (0..2).all(|k| self.lo[k] <= other.hi[k] + pad && other.lo[k] <= self.hi[k] + pad)
    }
}

fn cross(a: [f64; 2], b: [f64; 2]) -> f64 {
    a[0] * b[1] - a[1] * b[0]
}

fn sub(a: [f64; 2], b: [f64; 2]) -> [f64; 2] {
    [a[0] - b[0], a[1] - b[1]]
}

fn norm(a: [f64; 2]) -> f64 {
    a[0].hypot(a[1])
}

fn line_angle(d1: [f64; 2], d2: [f64; 2]) -> f64 {
    let c = (d1[0] * d2[0] + d1[1] * d2[1]).abs() / (norm(d1) * norm(d2));
    let s = cross(d1, d2).abs() / (norm(d1) * norm(d2));
    s.atan2(c)
}

/// All crossings and collinear overlaps of two polylines, found by chunked bounding-box pruning.
/// Overlapping runs are merged into one contact with angle zero.
pub fn polyline_intersections(a: &[[f64; 2]], b: &[[f64; 2]]) -> Vec<PolylineHit> {
    if a.len() < 2 || b.len() < 2 {
        return Vec::new();
    }
    let scale = Bbox::of(a)
        .hi
        .iter()
        .chain(Bbox::of(b).hi.iter())
        .fold(1.0f64, |m, v| m.max(v.abs()));
    let eps = 1e-12 * scale;
    let chunks = |p: &[[f64; 2]]| -> Vec<(usize, Bbox)> {
        (0..p.len() - 1)
            .step_by(CHUNK)
            .map(|start| {
                let end = (start + CHUNK + 1).min(p.len());
                (start, Bbox::of(&p[start..end]))
            })
            .collect()
    };
    let ca = chunks(a);
    let cb = chunks(b);
    let mut hits: Vec<PolylineHit> = ca
        .par_iter()
        .flat_map_iter(|&(sa, ba)| {
            let mut local = Vec::new();
            for &(sb, bb) in &cb {
                if !ba.overlaps(&bb, eps) {
                    continue;
                }
                for i in sa..(sa + CHUNK).min(a.len() - 1) {
                    let seg_a = Bbox::of(&a[i..i + 2]);
                    for j in sb..(sb + CHUNK).min(b.len() - 1) {
                        if !seg_a.overlaps(&Bbox::of(&b[j..j + 2]), eps) {
                            continue;
                        }
                        if let Some(h) = segment_hit(a, b, i, j, eps) {
                            local.push(h);
                        }
                    }
                }
            }
            local
        })
        .collect();
    hits.sort_by(|x, y| (x.i, x.j).cmp(&(y.i, y.j)).then(x.t.total_cmp(&y.t)));
    merge_hits(hits, eps)
}

fn segment_hit(a: &[[f64; 2]], b: &[[f64; 2]], i: usize, j: usize, eps: f64) -> Option<PolylineHit> {
    let p = a[i];
    let r = sub(a[i + 1], p);
    let q = b[j];
    let s = sub(b[j + 1], q);
    let denom = cross(r, s);
    let qp = sub(q, p);
    if denom.abs() <= eps * norm(r) * norm(s).max(eps) {
        // Parallel: report an overlap when the segments are collinear and share a stretch.
        if cross(qp, r).abs() > eps * norm(r).max(eps) {
            return None;
        }
        let rr = r[0] * r[0] + r[1] * r[1];
        if rr == 0.0 {
            return None;
        }
        let t0 = (qp[0] * r[0] + qp[1] * r[1]) / rr;
        let t1 = t0 + (s[0] * r[0] + s[1] * r[1]) / rr;
        let (lo, hi) = (t0.min(t1).max(0.0), t0.max(t1).min(1.0));
        if lo > hi {
            return None;
        }
        let t = 0.5 * (lo + hi);
        let point = [p[0] + t * r[0], p[1] + t * r[1]];
        let u = {
            let ss = s[0] * s[0] + s[1] * s[1];
            let d = sub(point, q);
            if ss > 0.0 {
                (d[0] * s[0] + d[1] * s[1]) / ss
            } else {
                0.0
            }
        };
        return Some(PolylineHit {
            i,
            j,
            t,
            u,
            point,
            angle: 0.0,
        });
    }
    let t = cross(qp, s) / denom;
    let u = cross(qp, r) / denom;
    if !(-1e-12..=1.0 + 1e-12).contains(&t) || !(-1e-12..=1.0 + 1e-12).contains(&u) {
        return None;
    }
    Some(PolylineHit {
        i,
        j,
        t,
        u,
        point: [p[0] + t * r[0], p[1] + t * r[1]],
        angle: line_angle(r, s),
    })
}

fn merge_hits(hits: Vec<PolylineHit>, eps: f64) -> Vec<PolylineHit> {
    let (overlaps, crossings): (Vec<PolylineHit>, Vec<PolylineHit>) = hits.into_iter().partition(|h| h.angle == 0.0);
    let near = |a: &PolylineHit, b: &PolylineHit| a.i.abs_diff(b.i) <= 1 && a.j.abs_diff(b.j) <= 1;
    let mut out: Vec<PolylineHit> = Vec::new();
    // Vertex contacts of an overlapping stretch belong to that stretch.
    for h in crossings {
        if overlaps.iter().any(|o| near(o, &h)) {
            continue;
        }
        // A crossing through a shared vertex shows up in two neighbouring segment pairs.
        if out.iter().any(|o| near(o, &h) && norm(sub(o.point, h.point)) <= 1e3 * eps) {
            continue;
        }
        out.push(h);
    }
    let mut run: Vec<PolylineHit> = Vec::new();
    for h in overlaps {
        if let Some(last) = run.last() {
            if !near(last, &h) {
                out.push(run[run.len() / 2]);
                run.clear();
            }
        }
        run.push(h);
    }
    if !run.is_empty() {
        out.push(run[run.len() / 2]);
    }
    out.sort_by(|x, y| (x.i, x.j).cmp(&(y.i, y.j)));
    out
}

fn stable_curve(x_s: f64, ln_s: f64, params: &ModelParams) -> Option<[f64; 2]> {
    phi2_inverse(WallPoint::new(x_s, ln_s.exp()), params)
        .ok()
        .map(DiskPoint::to_cartesian)
}

fn unstable_curve(x0: f64, ln_s: f64, params: &ModelParams) -> Option<[f64; 2]> {
    let top = phi1(WallPoint::new(x0, ln_s.exp()), params).ok()?;
    let q = psi12(top, params).ok()?;
    (q.r <= 1.0).then(|| q.to_cartesian())
}

fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| lo.ln() + (hi.ln() - lo.ln()) * i as f64 / (n - 1) as f64)
        .collect()
}

/// Crossings of the pull-back of a stable vertical segment with the sheared image of an unstable
/// vertical segment, both drawn in the top disk of the second saddle.
pub fn spiral_intersections(
    stable: SegmentSpec,
    unstable: SegmentSpec,
    samples: usize,
    params: &ModelParams,
) -> Result<Vec<SpiralIntersection>> {
    for seg in [&stable, &unstable] {
        if !(seg.s_min > 0.0 && seg.s_min < seg.s_max && seg.s_max <= 1.0) {
            return Err(Error::InvalidInput(format!(
                "segment range [{}, {}] must satisfy 0 < s_min < s_max <= 1",
                seg.s_min, seg.s_max
            )));
        }
    }
    let n = samples.max(16);
    let ls = log_grid(stable.s_min, stable.s_max, n);
    let lu = log_grid(unstable.s_min, unstable.s_max, n);
    let a: Vec<[f64; 2]> = ls
        .iter()
        .map(|&l| stable_curve(stable.x, l, params).expect("stable segment heights lie in (0, 1]"))
        .collect();
    // Unstable points leaving the unit disk split the curve; keep each valid run.
    let mut runs: Vec<Vec<(f64, [f64; 2])>> = vec![Vec::new()];
    for &l in &lu {
        match unstable_curve(unstable.x, l, params) {
            Some(p) => runs.last_mut().expect("non-empty").push((l, p)),
            None => {
                if !runs.last().expect("non-empty").is_empty() {
                    runs.push(Vec::new());
                }
            }
        }
    }
    let mut out = Vec::new();
    for run in runs.iter().filter(|r| r.len() >= 2) {
        let b: Vec<[f64; 2]> = run.iter().map(|r| r.1).collect();
        for hit in polyline_intersections(&a, &b) {
            let ls0 = ls[hit.i] + hit.t * (ls[hit.i + 1] - ls[hit.i]);
            let lu0 = run[hit.j].0 + hit.u * (run[hit.j + 1].0 - run[hit.j].0);
            let refined = if hit.angle == 0.0 {
                None
            } else {
                refine_crossing(stable.x, unstable.x, ls0, lu0, params)
            };
            let (lsr, lur) = refined.unwrap_or((ls0, lu0));
            let p = stable_curve(stable.x, lsr, params).unwrap_or(hit.point);
            let angle = if hit.angle == 0.0 {
                0.0
            } else {
                tangent_angle(stable.x, unstable.x, lsr, lur, params).unwrap_or(hit.angle)
            };
            out.push(SpiralIntersection {
                point: DiskPoint::new(p[0].hypot(p[1]), p[1].atan2(p[0])),
                angle_between: angle,
                tangential: angle < TANGENTIAL_ANGLE,
                s_stable: lsr.exp(),
                s_unstable: lur.exp(),
            });
        }
    }
    out.sort_by(|x, y| y.s_stable.total_cmp(&x.s_stable));
    Ok(out)
}

fn curve_derivative(f: impl Fn(f64) -> Option<[f64; 2]>, l: f64) -> Option<[f64; 2]> {
    let h = 1e-7;
    let up = f(l + h)?;
    let down = f(l - h)?;
    Some([(up[0] - down[0]) / (2.0 * h), (up[1] - down[1]) / (2.0 * h)])
}

fn tangent_angle(xs: f64, xu: f64, ls: f64, lu: f64, params: &ModelParams) -> Option<f64> {
    let da = curve_derivative(|l| stable_curve(xs, l, params), ls)?;
    let db = curve_derivative(|l| unstable_curve(xu, l, params), lu)?;
    Some(line_angle(da, db))
}

/// Newton iteration on `stable(ls) - unstable(lu) = 0` in log-parameters.
fn refine_crossing(xs: f64, xu: f64, mut ls: f64, mut lu: f64, params: &ModelParams) -> Option<(f64, f64)> {
    for _ in 0..50 {
        let a = stable_curve(xs, ls, params)?;
        let b = unstable_curve(xu, lu, params)?;
        let g = sub(a, b);
        if norm(g) <= CROSSING_TOL * 1e-2 {
            return Some((ls, lu));
        }
        let da = curve_derivative(|l| stable_curve(xs, l, params), ls)?;
        let db = curve_derivative(|l| unstable_curve(xu, l, params), lu)?;
        // [da, -db] · (dls, dlu) = -g
        let det = -da[0] * db[1] + db[0] * da[1];
        if det == 0.0 {
            return None;
        }
        let dls = (-g[0] * -db[1] + db[0] * -g[1]) / det;
        let dlu = (da[0] * -g[1] - da[1] * -g[0]) / det;
        ls += dls;
        lu += dlu;
        if !(ls <= 0.0 && lu <= 0.0) {
            return None;
        }
    }
    let g = sub(stable_curve(xs, ls, params)?, unstable_curve(xu, lu, params)?);
    (norm(g) <= CROSSING_TOL).then_some((ls, lu))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::{GlobalParams, SaddleParams};
    use crate::reversal::find_reversal_phases;
    use std::f64::consts::PI;

    fn irrational() -> ModelParams {
        ModelParams::new(SaddleParams::resonant(1.0, 1.0, 1.0, 2f64.sqrt()), GlobalParams::default()).unwrap()
    }

    #[test]
    fn constant_reversal_angle_is_always_a_candidate() {
        let p = ModelParams::figure_caption();
        let phases = find_reversal_phases(&p);
        let target = reversal_ladder(phases[0], 1, &p).unwrap()[0].x_lift;
        let c = tangency_search(target, &phases[..1], 40, 1e-6, &p).unwrap();
        assert_eq!(c.len(), 40);
        assert!(c.iter().all(|c| c.circular_distance <= 1e-6 && c.order == 1));
        let opposite = tangency_search(target + PI, &phases[..1], 40, 0.05, &p).unwrap();
        assert!(opposite.is_empty());
    }

    #[test]
    fn irrational_rotation_comes_close_to_any_line() {
        let p = irrational();
        let phases = find_reversal_phases(&p);
        let c = tangency_search(0.0, &phases, 1000, 0.05, &p).unwrap();
        assert!(!c.is_empty());
        assert!(c[0].circular_distance < 0.05);
        assert!(c.windows(2).all(|w| w[0].circular_distance <= w[1].circular_distance));
    }

    #[test]
    fn no_phases_is_an_error() {
        let p = ModelParams::figure_caption();
        assert!(matches!(tangency_search(0.0, &[], 10, 0.1, &p), Err(Error::NoReversals)));
    }

    fn grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
        log_grid(lo, hi, n).into_iter().map(f64::exp).collect()
    }

    #[test]
    fn first_order_cascade_reproduces_ladder() {
        let p = irrational();
        let phases = find_reversal_phases(&p);
        let s = grid((-10.0 * PI).exp(), 1.0, 600);
        let cascade = cascade_scan(1, 0.0, &s, 0.0, PI, &p).unwrap();
        let ladder = tangency_search(0.0, &phases, 8, PI, &p).unwrap();
        let in_range: Vec<_> = ladder.iter().filter(|c| c.event.s_n >= s[0]).collect();
        assert!(!in_range.is_empty());
        for l in in_range {
            let m = cascade[0]
                .iter()
                .find(|c| (c.event.ln_s_n - l.event.ln_s_n).abs() < 1e-4)
                .expect("ladder point present in cascade");
            assert!((m.event.x_lift - l.event.x_lift).abs() <= 1e-8);
            assert!((m.circular_distance - l.circular_distance).abs() <= 1e-8);
            assert_eq!(m.event.kind, l.event.kind);
        }
    }

    #[test]
    fn second_order_reversals_exist_on_figure_parameters() {
        let p = ModelParams::figure_caption();
        let s = grid((-6.0 * PI).exp(), 1.0, 400);
        let cascade = cascade_scan(2, 0.0, &s, 0.0, PI, &p).unwrap();
        assert!(!cascade[1].is_empty());
        for c in &cascade[1] {
            let first = connection_arclength_log(0.0, c.event.ln_s_n, 1, &p);
            assert!(c.arclen >= first);
        }
    }

    #[test]
    fn figure_spirals_cross() {
        let p = ModelParams::figure_caption();
        let range = SegmentSpec {
            x: 0.0,
            s_min: (-6.0 * PI).exp(),
            s_max: 1.0,
        };
        let hits = spiral_intersections(range, range, 4000, &p).unwrap();
        assert!(hits.len() >= 2);
        for h in &hits {
            let a = phi2_inverse(WallPoint::new(0.0, h.s_stable), &p).unwrap().to_cartesian();
            let b = unstable_curve(0.0, h.s_unstable.ln(), &p).unwrap();
            assert!(norm(sub(a, b)) <= CROSSING_TOL);
        }
    }

    #[test]
    fn separated_annuli_do_not_cross() {
        let p = ModelParams::figure_caption();
        let stable = SegmentSpec {
            x: 0.0,
            s_min: 1e-2,
            s_max: 1.0,
        };
        let unstable = SegmentSpec {
            x: 0.0,
            s_min: 1e-8,
            s_max: 5e-4,
        };
        assert!(spiral_intersections(stable, unstable, 1000, &p).unwrap().is_empty());
    }

    #[test]
    fn coincident_arcs_give_one_tangential_contact() {
        let arc: Vec<[f64; 2]> = (0..100)
            .map(|i| {
                let t = i as f64 / 99.0;
                [t.cos(), t.sin()]
            })
            .collect();
        let mirrored: Vec<[f64; 2]> = arc[40..80].to_vec();
        let hits = polyline_intersections(&arc, &mirrored);
        assert_eq!(hits.len(), 1);
        assert!(hits[0].angle < TANGENTIAL_ANGLE);
    }

    #[test]
    fn transversal_polylines_cross_once() {
        let a = [[0.0, 0.0], [1.0, 1.0], [2.0, 2.0]];
        let b = [[0.0, 2.0], [2.0, 0.0]];
        let hits = polyline_intersections(&a, &b);
        assert_eq!(hits.len(), 1);
        assert!((hits[0].angle - PI / 2.0).abs() < 1e-12);
        assert!((hits[0].point[0] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn pass_length_grows_as_height_shrinks() {
        let p = ModelParams::figure_caption();
        let a = pass_arclength_log(0.0, -5.0, &p);
        let b = pass_arclength_log(0.0, -50.0, &p);
        assert!(b > a && a > 0.0);
    }
}
