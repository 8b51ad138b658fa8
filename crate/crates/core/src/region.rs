//! Parameter-region classifiers: the shear/spectrum window that admits reversals and a
//! bounded rationality test on the rotation ratio `gamma`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::params::{GlobalParams, ModelParams, SaddleParams};
use crate::sections::eta_log;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegionMembership {
    pub inside: bool,
    pub lower: f64,
    pub middle: f64,
    pub upper: f64,
}

/// Evaluates the open window `lower < middle < upper` with
/// `lower, upper = (a² - 1/a²)·2alpha1 / (C1 ∓ sqrt(alpha1² + 4C1²))` and
/// `middle = E2/alpha2 - a²C1/alpha1`.
pub fn in_region_b(params: &ModelParams) -> RegionMembership {
    let s = &params.saddle;
    let spread = params.shear_spread();
    let root = (s.alpha1 * s.alpha1 + 4.0 * s.c1 * s.c1).sqrt();
    let lower = spread * 2.0 * s.alpha1 / (s.c1 - root);
    let upper = spread * 2.0 * s.alpha1 / (s.c1 + root);
    let a2 = params.a() * params.a();
    let middle = s.e2 / s.alpha2 - a2 * s.c1 / s.alpha1;
    RegionMembership {
        inside: lower < middle && middle < upper,
        lower,
        middle,
        upper,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Fraction {
    pub p: i64,
    pub q: i64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "kebab-case")]
pub enum RationalityVerdict {
    Rational { p: i64, q: i64 },
    NoRationalBelowBound,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RationalityReport {
    pub gamma: f64,
    #[serde(flatten)]
    pub verdict: RationalityVerdict,
    /// Last convergent with denominator within the bound.
    pub best: Fraction,
    /// `|q·gamma - p|` of `best`.
    pub residual: f64,
    pub max_denominator: i64,
    pub tol: f64,
    pub method: String,
}

/// Continued-fraction test of `gamma` against rationals with denominator at most `max_denominator`.
///
/// A convergent `p/q` is accepted when the integer-relation residual `|q·gamma - p|` is within `tol`.
pub fn gamma_rationality(params: &ModelParams, max_denominator: i64, tol: f64) -> RationalityReport {
    rationality_of(params.gamma, max_denominator, tol)
}

pub fn rationality_of(gamma: f64, max_denominator: i64, tol: f64) -> RationalityReport {
    let max_denominator = max_denominator.max(1);
    let (mut p_prev, mut q_prev) = (1i64, 0i64);
    let (mut p, mut q) = (gamma.floor() as i64, 1i64);
    let mut x = gamma;
    let mut verdict = RationalityVerdict::NoRationalBelowBound;
    loop {
        let residual = (q as f64).mul_add(gamma, -(p as f64)).abs();
        if residual <= tol {
            verdict = RationalityVerdict::Rational { p, q };
            break;
        }
        let frac = x - x.floor();
        if frac <= 0.0 {
            break;
        }
        x = 1.0 / frac;
        if !x.is_finite() || x > max_denominator as f64 * 2.0 {
            break;
        }
        let term = x.floor() as i64;
        let q_next = match term.checked_mul(q).and_then(|v| v.checked_add(q_prev)) {
            Some(v) if v <= max_denominator => v,
            _ => break,
        };
        let p_next = term * p + p_prev;
        (p_prev, q_prev, p, q) = (p, q, p_next, q_next);
    }
    let residual = (q as f64).mul_add(gamma, -(p as f64)).abs();
    RationalityReport {
        gamma,
        verdict,
        best: Fraction { p, q },
        residual,
        max_denominator,
        tol,
        method: "bounded test: continued-fraction convergents up to max_denominator".into(),
    }
}

/// Grid size of the brute-force reversal scan over one half period of the phase.
pub const ORACLE_GRID: usize = 10_000;

/// Brute-force reversal oracle: finite-differences the lifted exit angle of the composed map along a
/// vertical segment over one half period of the phase and reports whether its slope changes sign.
pub fn oracle_reversal_exists(params: &ModelParams) -> bool {
    let g1 = params.g1;
    // Keep y2 < 1 over the scan: y2 = s·C <= s·a².
    let ln_s_top = -2.0 * params.a().ln() - 1.0;
    let x0 = g1 * ln_s_top;
    let h = 1e-4 * g1.min(1.0);
    let mut slopes = Vec::with_capacity(ORACLE_GRID + 1);
    for i in 0..=ORACLE_GRID {
        let phi = std::f64::consts::PI * i as f64 / ORACLE_GRID as f64;
        let ln_s = ln_s_top - phi / g1;
        let forward = eta_log(x0, ln_s + h, params);
        let backward = eta_log(x0, ln_s - h, params);
        match (forward, backward) {
            (Ok((xf, _)), Ok((xb, _))) => slopes.push((xf - xb) / (2.0 * h)),
            _ => slopes.push(f64::NAN),
        }
    }
    let scale = slopes
        .iter()
        .filter(|v| v.is_finite())
        .fold(0.0f64, |m, v| m.max(v.abs()));
    let noise = 1e-7 * scale.max(1.0);
    let mut last_sign = 0.0;
    for v in slopes.iter().filter(|v| v.is_finite() && v.abs() > noise) {
        let sign = v.signum();
        if last_sign != 0.0 && sign != last_sign {
            return true;
        }
        last_sign = sign;
    }
    false
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RegionRow {
    pub draw: usize,
    pub alpha1: f64,
    #[serde(rename = "C1")]
    pub c1: f64,
    pub alpha2: f64,
    #[serde(rename = "E2")]
    pub e2: f64,
    pub a: f64,
    #[serde(rename = "inB")]
    pub in_b: bool,
    pub oracle_reversal: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RegionConsistencyReport {
    pub seed: u64,
    pub sample_count: usize,
    pub agreement_rate: f64,
    pub rows: Vec<RegionRow>,
}

/// Draws `sample_count` resonant parameter sets (ChaCha8 seeded with `seed`; per draw, in order:
/// alpha1, C1, alpha2, E2 log-uniform on [0.1, 10], then a uniform on [1, 4]) and pairs
/// [`in_region_b`] with [`oracle_reversal_exists`].
pub fn region_consistency_report(sample_count: usize, seed: u64) -> RegionConsistencyReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let lo = 0.1f64.ln();
    let hi = 10.0f64.ln();
    let draws: Vec<[f64; 5]> = (0..sample_count)
        .map(|_| {
            let mut log_uniform = || rng.gen_range(lo..hi).exp();
            let v = [log_uniform(), log_uniform(), log_uniform(), log_uniform()];
            [v[0], v[1], v[2], v[3], rng.gen_range(1.0..4.0)]
        })
        .collect();
    let rows: Vec<RegionRow> = draws
        .par_iter()
        .enumerate()
        .map(|(draw, &[alpha1, c1, alpha2, e2, a])| {
            let params = ModelParams::new(
                SaddleParams::resonant(alpha1, c1, alpha2, e2),
                GlobalParams {
                    a,
                    ..GlobalParams::default()
                },
            )
            .expect("draws are positive and resonant");
            RegionRow {
                draw,
                alpha1,
                c1,
                alpha2,
                e2,
                a,
                in_b: in_region_b(&params).inside,
                oracle_reversal: oracle_reversal_exists(&params),
            }
        })
        .collect();
    let agree = rows.iter().filter(|r| r.in_b == r.oracle_reversal).count();
    RegionConsistencyReport {
        seed,
        sample_count,
        agreement_rate: if rows.is_empty() {
            0.0
        } else {
            agree as f64 / rows.len() as f64
        },
        rows,
    }
}
