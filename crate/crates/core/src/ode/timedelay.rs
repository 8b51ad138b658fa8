//! Escape times from a ball, forward and backward, and their profiles along a segment.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::field::{norm, FieldSpec, Vec3};
use super::integrator::{integrate_with, IntegrateOptions, Termination};
use crate::error::{Error, Result};

/// Default escape radius for Michelson scans; it encloses both equilibria for `c ≤ 2`.
pub const DEFAULT_RADIUS: f64 = 4.0;
pub const DEFAULT_SPIKE_FACTOR: f64 = 2.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "kebab-case")]
pub enum EscapeTime {
    Escaped { t: f64 },
    /// Still inside the ball at `t_max`.
    Bounded,
    StepUnderflow { t: f64 },
}

impl EscapeTime {
    pub fn time(&self) -> Option<f64> {
        match *self {
            EscapeTime::Escaped { t } => Some(t),
            _ => None,
        }
    }

    pub fn is_bounded(&self) -> bool {
        matches!(self, EscapeTime::Bounded)
    }

    /// Elapsed time, with `t_max` standing in for bounded runs.
    fn clamped(&self, t_max: f64) -> f64 {
        match *self {
            EscapeTime::Escaped { t } | EscapeTime::StepUnderflow { t } => t,
            EscapeTime::Bounded => t_max,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeDelaySample {
    pub x0: Vec3,
    pub t_plus: EscapeTime,
    pub t_minus: EscapeTime,
    /// `‖x0‖`; recorded only, escape is keyed on `r`.
    pub r0: f64,
    pub r: f64,
}

fn escape(field: &FieldSpec, x0: Vec3, r: f64, t_end: f64, opts: &IntegrateOptions) -> EscapeTime {
    let opts = IntegrateOptions {
        max_radius: r,
        record: false,
        ..*opts
    };
    let tr = integrate_with(field, x0, t_end, &opts, None);
    let t = tr.final_time().abs();
    match tr.termination {
        Termination::EscapedRadius => EscapeTime::Escaped { t },
        Termination::StepUnderflow => EscapeTime::StepUnderflow { t },
        Termination::ReachedTEnd | Termination::Event => EscapeTime::Bounded,
    }
}

fn check(r: f64, t_max: f64) -> Result<()> {
    if !(r > 0.0 && r.is_finite()) {
        return Err(Error::InvalidInput(format!("escape radius must be positive, got {r}")));
    }
    if !(t_max > 0.0) {
        return Err(Error::InvalidInput(format!("t_max must be positive, got {t_max}")));
    }
    Ok(())
}

/// First exit times of the forward and backward orbits of `x0` from the ball of radius `r`.
pub fn time_delay(field: &FieldSpec, x0: Vec3, r: f64, t_max: f64, opts: &IntegrateOptions) -> Result<TimeDelaySample> {
    check(r, t_max)?;
    Ok(TimeDelaySample {
        x0,
        t_plus: escape(field, x0, r, t_max, opts),
        t_minus: escape(field, x0, r, -t_max, opts),
        r0: norm(&x0),
        r,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LineSpec {
    pub p0: Vec3,
    pub p1: Vec3,
    pub n: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeDelayProfile {
    pub samples: Vec<TimeDelaySample>,
    pub spikes: Vec<Spike>,
    pub spike_factor: f64,
    pub t_max: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Forward,
    Backward,
}

/// Interior sample whose delay in one direction exceeds both neighbours by the spike factor.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Spike {
    pub index: usize,
    pub direction: Direction,
}

impl TimeDelayProfile {
    /// Delays in one direction, bounded runs counted as `t_max`.
    pub fn delays(&self, direction: Direction) -> Vec<f64> {
        self.samples
            .iter()
            .map(|s| match direction {
                Direction::Forward => s.t_plus.clamped(self.t_max),
                Direction::Backward => s.t_minus.clamped(self.t_max),
            })
            .collect()
    }
}

pub fn find_spikes(values: &[f64], factor: f64) -> Vec<usize> {
    (1..values.len().saturating_sub(1))
        .filter(|&i| values[i] > factor * values[i - 1] && values[i] > factor * values[i + 1])
        .collect()
}

/// [`time_delay`] at `n` equally spaced points of the segment `[p0, p1]`, evaluated in parallel.
pub fn time_delay_scan(
    field: &FieldSpec,
    line: &LineSpec,
    r: f64,
    t_max: f64,
    spike_factor: f64,
    opts: &IntegrateOptions,
) -> Result<TimeDelayProfile> {
    check(r, t_max)?;
    if line.n < 2 {
        return Err(Error::InvalidInput(format!("a scan needs at least 2 samples, got {}", line.n)));
    }
    let samples = (0..line.n)
        .into_par_iter()
        .map(|i| {
            let t = i as f64 / (line.n - 1) as f64;
            let x0: Vec3 = std::array::from_fn(|k| line.p0[k] + (line.p1[k] - line.p0[k]) * t);
            time_delay(field, x0, r, t_max, opts)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut profile = TimeDelayProfile {
        samples,
        spikes: Vec::new(),
        spike_factor,
        t_max,
    };
    let mut spikes: Vec<Spike> = [Direction::Forward, Direction::Backward]
        .into_iter()
        .flat_map(|direction| {
            find_spikes(&profile.delays(direction), spike_factor)
                .into_iter()
                .map(move |index| Spike { index, direction })
        })
        .collect();
    spikes.sort_by_key(|s| (s.index, s.direction == Direction::Backward));
    profile.spikes = spikes;
    Ok(profile)
}
