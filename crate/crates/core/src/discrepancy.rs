//! Side-by-side evaluation of the published closed forms against the composed maps.
//!
//! Three comparisons are made: the slope of the exit angle along a vertical segment, the
//! reversal condition written through the periodic functional `A`, and the trace of the
//! return-map Jacobian.

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::params::{ModelParams, RawParams};
use crate::region::oracle_reversal_exists;
use crate::reversal::find_reversal_phases;
use crate::sections::{
    geometry_functions, jacobian, stretch, MapId, SectionPoint, WallPoint, JACOBIAN_EPS,
};
use crate::trace::{segment_dxds, segment_dxds_numeric};

/// Relative tolerance for declaring two formulas equal.
pub const MATCH_TOL: f64 = 1e-5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Matches,
    ConstantFactorOff,
    SignOff,
    Mismatch,
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Verdict::Matches => "matches",
            Verdict::ConstantFactorOff => "constant-factor-off",
            Verdict::SignOff => "sign-off",
            Verdict::Mismatch => "mismatch",
        })
    }
}

/// Classifies `candidate` against `reference` sample by sample.
pub fn compare_series(candidate: &[f64], reference: &[f64], tol: f64) -> (Verdict, f64, f64) {
    let pairs: Vec<(f64, f64)> = candidate
        .iter()
        .zip(reference)
        .filter(|(c, r)| c.is_finite() && r.is_finite())
        .map(|(c, r)| (*c, *r))
        .collect();
    let max_abs = pairs.iter().map(|(c, r)| (c - r).abs()).fold(0.0, f64::max);
    let rel = |c: f64, r: f64| (c - r).abs() / r.abs().max(f64::MIN_POSITIVE);
    let max_rel = pairs.iter().map(|&(c, r)| rel(c, r)).fold(0.0, f64::max);
    if pairs.is_empty() {
        return (Verdict::Mismatch, max_abs, max_rel);
    }
    if max_rel <= tol {
        return (Verdict::Matches, max_abs, max_rel);
    }
    if pairs.iter().all(|&(c, r)| rel(-c, r) <= tol) {
        return (Verdict::SignOff, max_abs, max_rel);
    }
    let ratios: Vec<f64> = pairs
        .iter()
        .filter(|(_, r)| r.abs() > 0.0)
        .map(|(c, r)| c / r)
        .collect();
    if let Some(&first) = ratios.first() {
        if first.abs() > 0.0 && ratios.iter().all(|q| (q - first).abs() <= tol * first.abs()) {
            return (Verdict::ConstantFactorOff, max_abs, max_rel);
        }
    }
    (Verdict::Mismatch, max_abs, max_rel)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SeriesComparison {
    pub formula: String,
    pub reference: String,
    pub samples: usize,
    pub max_abs_deviation: f64,
    pub max_rel_deviation: f64,
    pub verdict: Verdict,
}

impl SeriesComparison {
    fn new(formula: &str, reference: &str, candidate: &[f64], truth: &[f64]) -> Self {
        let (verdict, max_abs_deviation, max_rel_deviation) = compare_series(candidate, truth, MATCH_TOL);
        Self {
            formula: formula.into(),
            reference: reference.into(),
            samples: candidate.len(),
            max_abs_deviation,
            max_rel_deviation,
            verdict,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConditionComparison {
    pub formula: String,
    /// Right-hand side the functional is set equal to.
    pub level: f64,
    pub roots: Vec<f64>,
    pub functional_min: f64,
    pub functional_max: f64,
    pub verdict: Verdict,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DiscrepancyReport {
    pub params: RawParams,
    pub oracle_reversal_exists: bool,
    pub oracle_phases: Vec<f64>,
    pub slope: Vec<SeriesComparison>,
    pub reversal_condition: Vec<ConditionComparison>,
    pub trace: Vec<SeriesComparison>,
}

impl DiscrepancyReport {
    pub fn slope_comparison(&self, formula: &str) -> Option<&SeriesComparison> {
        self.slope.iter().find(|c| c.formula == formula)
    }

    pub fn condition(&self, formula: &str) -> Option<&ConditionComparison> {
        self.reversal_condition.iter().find(|c| c.formula == formula)
    }
}

/// Sample locations for the report.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SampleGrid {
    pub x0: f64,
    pub s: Vec<f64>,
    pub trace_points: Vec<WallPoint>,
}

impl SampleGrid {
    /// `n_s` log-spaced parameters in `[1e-8, 1e-2]` and a `10 × 10` grid of wall points with heights
    /// in `[1e-6, 1e-2]`.
    pub fn standard(n_s: usize) -> Self {
        let n_s = n_s.max(2);
        let s = (0..n_s)
            .map(|i| (-8.0 + 6.0 * i as f64 / (n_s - 1) as f64) * std::f64::consts::LN_10)
            .map(f64::exp)
            .collect();
        let mut trace_points = Vec::with_capacity(100);
        for i in 0..10 {
            for j in 0..10 {
                let x = -3.0 + 6.0 * i as f64 / 9.0;
                let y = 10f64.powf(-6.0 + 4.0 * j as f64 / 9.0);
                trace_points.push(WallPoint::new(x, y));
            }
        }
        Self {
            x0: 0.0,
            s,
            trace_points,
        }
    }
}

/// Slope along a vertical segment as printed, with the factor `2·g1·g2` on the cross term.
pub fn printed_dxds(x0: f64, s: f64, params: &ModelParams) -> f64 {
    let phi = x0 - params.g1 * s.ln();
    let (sn, cs) = phi.sin_cos();
    let c = stretch(phi, params.a());
    let cross = 2.0 * params.g1 * params.g2 * params.shear_spread() * sn * cs;
    -(params.g2 / 2.0 + (cross + params.g1) / c) / s
}

/// Trace of the return-map Jacobian as printed, with the chosen form of `A`.
pub fn printed_trace(p: WallPoint, params: &ModelParams, use_derived: bool) -> f64 {
    let s = &params.saddle;
    let phi = p.x - params.g1 * p.y.ln();
    let g = geometry_functions(phi, params);
    let a = if use_derived { g.a_derived } else { g.a_printed };
    let (sn, cs) = phi.sin_cos();
    2.0 * p.y * params.shear_spread() * sn * cs
        + (s.alpha2 / (s.e1 * s.e2 * g.stretch)) * (a - params.reversal_level()) / p.y
}

const CONDITION_GRID: usize = 10_000;

fn level_roots(f: impl Fn(f64) -> f64, level: f64) -> (Vec<f64>, f64, f64) {
    let values: Vec<f64> = (0..=CONDITION_GRID)
        .map(|i| f(PI * i as f64 / CONDITION_GRID as f64))
        .collect();
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut roots = Vec::new();
    for i in 0..CONDITION_GRID {
        let (a, b) = (values[i] - level, values[i + 1] - level);
        if a == 0.0 || (a < 0.0) != (b < 0.0) && b != 0.0 {
            let (mut lo, mut hi) = (PI * i as f64 / CONDITION_GRID as f64, PI * (i + 1) as f64 / CONDITION_GRID as f64);
            let lo_neg = a < 0.0;
            while hi - lo > 1e-12 {
                let mid = 0.5 * (lo + hi);
                if (f(mid) - level < 0.0) == lo_neg {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            roots.push(0.5 * (lo + hi));
        }
    }
    (roots, min, max)
}

fn roots_agree(a: &[f64], b: &[f64]) -> bool {
    a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() <= 1e-8)
}

fn condition(name: &str, f: impl Fn(f64) -> f64 + Copy, level: f64, oracle: &[f64]) -> ConditionComparison {
    let (roots, functional_min, functional_max) = level_roots(f, level);
    let verdict = if roots_agree(&roots, oracle) {
        Verdict::Matches
    } else if roots_agree(&level_roots(f, -level).0, oracle) {
        Verdict::SignOff
    } else {
        Verdict::Mismatch
    };
    ConditionComparison {
        formula: name.into(),
        level,
        roots,
        functional_min,
        functional_max,
        verdict,
    }
}

pub fn formula_discrepancy_report(params: &ModelParams, grid: &SampleGrid) -> DiscrepancyReport {
    let oracle_phases = find_reversal_phases(params);

    // Keep slope samples away from reversals, where the numerical slope loses relative accuracy.
    let x0 = grid.x0;
    let scale = grid
        .s
        .iter()
        .map(|&s| (segment_dxds(x0, s, params) * s).abs())
        .fold(0.0, f64::max);
    let mut numeric = Vec::new();
    let mut derived = Vec::new();
    let mut printed = Vec::new();
    for &s in &grid.s {
        let d = segment_dxds(x0, s, params);
        if (d * s).abs() < 1e-3 * scale {
            continue;
        }
        let Ok(n) = segment_dxds_numeric(x0, s, params) else {
            continue;
        };
        numeric.push(n);
        derived.push(d);
        printed.push(printed_dxds(x0, s, params));
    }
    let slope = vec![
        SeriesComparison::new("dxds_derived", "finite_difference", &derived, &numeric),
        SeriesComparison::new("dxds_printed", "finite_difference", &printed, &numeric),
    ];

    let level = params.reversal_level();
    let a_printed = |phi: f64| geometry_functions(phi, params).a_printed;
    let a_derived = |phi: f64| geometry_functions(phi, params).a_derived;
    let reversal_condition = vec![
        condition("A_printed=-level", a_printed, -level, &oracle_phases),
        condition("A_printed=+level", a_printed, level, &oracle_phases),
        condition("A_derived=+level", a_derived, level, &oracle_phases),
        condition("A_derived=-level", a_derived, -level, &oracle_phases),
    ];

    let mut chain = Vec::new();
    let mut with_printed = Vec::new();
    let mut with_derived = Vec::new();
    for &p in &grid.trace_points {
        let Ok(j) = jacobian(MapId::ReturnMap, SectionPoint::Wall(p), params, JACOBIAN_EPS) else {
            continue;
        };
        chain.push(j.trace());
        with_printed.push(printed_trace(p, params, false));
        with_derived.push(printed_trace(p, params, true));
    }
    let trace = vec![
        SeriesComparison::new("trace_printed_A", "chain_rule", &with_printed, &chain),
        SeriesComparison::new("trace_derived_A", "chain_rule", &with_derived, &chain),
    ];

    DiscrepancyReport {
        params: RawParams::from(params),
        oracle_reversal_exists: oracle_reversal_exists(params),
        oracle_phases,
        slope,
        reversal_condition,
        trace,
    }
}
