//! Dormand–Prince 5(4) with PI step-size control and bisection-located stopping events.

use serde::{Deserialize, Serialize};

use super::field::{norm, FieldSpec, Vec3};

/// Width of the time bracket at which event bisection stops.
pub const EVENT_TIME_TOL: f64 = 1e-10;
/// Steps shorter than this fraction of `|t|` end the run.
pub const UNDERFLOW_RATIO: f64 = 1e-14;

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    ReachedTEnd,
    EscapedRadius,
    StepUnderflow,
    /// The user event changed sign from negative to non-negative.
    Event,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<Vec3>,
    pub termination: Termination,
    pub accepted_steps: usize,
    pub rejected_steps: usize,
}

impl Trajectory {
    pub fn final_time(&self) -> f64 {
        *self.times.last().expect("trajectory holds its initial time")
    }

    pub fn final_state(&self) -> Vec3 {
        *self.states.last().expect("trajectory holds its initial state")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntegrateOptions {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_radius: f64,
    /// Keep every accepted state; otherwise only the endpoints.
    pub record: bool,
}

impl Default for IntegrateOptions {
    fn default() -> Self {
        Self {
            rel_tol: 1e-10,
            abs_tol: 1e-12,
            max_radius: f64::INFINITY,
            record: true,
        }
    }
}

fn axpy(y: &Vec3, h: f64, terms: &[(f64, &Vec3)]) -> Vec3 {
    std::array::from_fn(|i| y[i] + h * terms.iter().map(|(c, k)| c * k[i]).sum::<f64>())
}

struct Step {
    y: Vec3,
    k_last: Vec3,
    err: Vec3,
}

fn dp_step(field: &FieldSpec, y: &Vec3, k1: &Vec3, h: f64) -> Step {
    let k2 = field.evaluate(&axpy(y, h, &[(A21, k1)]));
    let k3 = field.evaluate(&axpy(y, h, &[(A31, k1), (A32, &k2)]));
    let k4 = field.evaluate(&axpy(y, h, &[(A41, k1), (A42, &k2), (A43, &k3)]));
    let k5 = field.evaluate(&axpy(y, h, &[(A51, k1), (A52, &k2), (A53, &k3), (A54, &k4)]));
    let k6 = field.evaluate(&axpy(y, h, &[(A61, k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)]));
    let y_new = axpy(y, h, &[(B1, k1), (B3, &k3), (B4, &k4), (B5, &k5), (B6, &k6)]);
    let k7 = field.evaluate(&y_new);
    let err = std::array::from_fn(|i| {
        h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i])
    });
    Step { y: y_new, k_last: k7, err }
}

fn error_norm(err: &Vec3, y0: &Vec3, y1: &Vec3, opts: &IntegrateOptions) -> f64 {
    let sum: f64 = (0..3)
        .map(|i| {
            let sc = opts.abs_tol + opts.rel_tol * y0[i].abs().max(y1[i].abs());
            (err[i] / sc).powi(2)
        })
        .sum();
    (sum / 3.0).sqrt()
}

fn initial_step(field: &FieldSpec, y: &Vec3, f0: &Vec3, dir: f64, opts: &IntegrateOptions) -> f64 {
    let scaled = |v: &Vec3| {
        let s: f64 = (0..3)
            .map(|i| (v[i] / (opts.abs_tol + opts.rel_tol * y[i].abs())).powi(2))
            .sum();
        (s / 3.0).sqrt()
    };
    let (d0, d1) = (scaled(y), scaled(f0));
    let h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
    let y1 = axpy(y, dir * h0, &[(1.0, f0)]);
    let f1 = field.evaluate(&y1);
    let diff: Vec3 = std::array::from_fn(|i| f1[i] - f0[i]);
    let d2 = scaled(&diff) / h0;
    let h1 = if d1.max(d2) <= 1e-15 {
        (h0 * 1e-3).max(1e-6)
    } else {
        (0.01 / d1.max(d2)).powf(0.2)
    };
    (100.0 * h0).min(h1)
}

type Event<'a> = &'a (dyn Fn(&Vec3) -> f64 + Sync);

/// Integrates from `t = 0` to `t_end` (either sign), stopping early at `‖x‖ ≥ max_radius`,
/// at a sign change of `event` from negative to non-negative, or on step-size underflow.
pub fn integrate_with(
    field: &FieldSpec,
    x0: Vec3,
    t_end: f64,
    opts: &IntegrateOptions,
    event: Option<Event<'_>>,
) -> Trajectory {
    let mut traj = Trajectory {
        times: vec![0.0],
        states: vec![x0],
        termination: Termination::ReachedTEnd,
        accepted_steps: 0,
        rejected_steps: 0,
    };
    if norm(&x0) >= opts.max_radius {
        traj.termination = Termination::EscapedRadius;
        return traj;
    }
    if t_end == 0.0 {
        return traj;
    }
    let dir = t_end.signum();
    let radius = |x: &Vec3| norm(x) - opts.max_radius;
    let mut t: f64 = 0.0;
    let mut y = x0;
    let mut k1 = field.evaluate(&y);
    let mut h = initial_step(field, &y, &k1, dir, opts).min(t_end.abs());
    let mut err_prev: f64 = 1e-4;
    let (safety, alpha, beta) = (0.9, 0.7 / 5.0, 0.4 / 5.0);

    loop {
        if h < UNDERFLOW_RATIO * t.abs() || h <= 0.0 {
            traj.termination = Termination::StepUnderflow;
            break;
        }
        let last = h >= (t_end - t).abs();
        let h_try = if last { (t_end - t).abs() } else { h };
        let step = dp_step(field, &y, &k1, dir * h_try);
        let err = error_norm(&step.err, &y, &step.y, opts);
        if !(err <= 1.0) {
            traj.rejected_steps += 1;
            let factor = if err.is_finite() { (safety * err.powf(-alpha)).clamp(0.2, 1.0) } else { 0.2 };
            h = h_try * factor;
            continue;
        }

        let mut stop = None;
        if radius(&step.y) >= 0.0 {
            stop = Some((locate(field, &y, &k1, dir * h_try, &radius), Termination::EscapedRadius));
        }
        if let Some(g) = event {
            if g(&y) < 0.0 && g(&step.y) >= 0.0 {
                let tau = locate(field, &y, &k1, dir * h_try, g);
                if stop.as_ref().is_none_or(|(s, _)| tau.0.abs() < s.0.abs()) {
                    stop = Some((tau, Termination::Event));
                }
            }
        }
        traj.accepted_steps += 1;
        if let Some(((tau, state), reason)) = stop {
            push(&mut traj, t + tau, state, true);
            traj.termination = reason;
            return traj;
        }

        t = if last { t_end } else { t + dir * h_try };
        y = step.y;
        k1 = step.k_last;
        if last {
            push(&mut traj, t, y, true);
            traj.termination = Termination::ReachedTEnd;
            return traj;
        }
        push(&mut traj, t, y, opts.record);
        let factor = (safety * err.max(1e-10).powf(-alpha) * err_prev.powf(beta)).clamp(0.2, 5.0);
        err_prev = err.max(1e-4);
        h = h_try * factor;
    }
    if !opts.record {
        push(&mut traj, t, y, true);
    }
    traj
}

fn push(traj: &mut Trajectory, t: f64, y: Vec3, keep: bool) {
    if keep && traj.times.last() != Some(&t) {
        traj.times.push(t);
        traj.states.push(y);
    }
}

/// Bisects the signed step length inside an accepted step for the first non-negative value of `g`,
/// re-stepping from the start of the step; returns the offset and the state at the upper bracket.
fn locate(field: &FieldSpec, y: &Vec3, k1: &Vec3, h: f64, g: &dyn Fn(&Vec3) -> f64) -> (f64, Vec3) {
    let mut lo = 0.0;
    let mut hi = h.abs();
    let dir = h.signum();
    let mut hit = dp_step(field, y, k1, h).y;
    while hi - lo > EVENT_TIME_TOL {
        let mid = 0.5 * (lo + hi);
        let s = dp_step(field, y, k1, dir * mid).y;
        if g(&s) >= 0.0 {
            hi = mid;
            hit = s;
        } else {
            lo = mid;
        }
    }
    (dir * hi, hit)
}

/// Adaptive integration with the default bookkeeping; see [`integrate_with`].
pub fn integrate(field: &FieldSpec, x0: Vec3, t_end: f64, rel_tol: f64, abs_tol: f64, max_radius: f64) -> Trajectory {
    let opts = IntegrateOptions {
        rel_tol,
        abs_tol,
        max_radius,
        record: true,
    };
    integrate_with(field, x0, t_end, &opts, None)
}
