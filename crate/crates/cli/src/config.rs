//! JSON run configuration: the model parameter block plus optional per-command blocks.

use std::f64::consts::PI;

use bykov_core::ode::michelson_ck;
use bykov_core::tangency::SegmentSpec;
use bykov_core::RawParams;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct RunConfig {
    #[serde(flatten)]
    pub params: Option<RawParams>,
    #[serde(default)]
    pub region: RegionBlock,
    #[serde(default)]
    pub segment: SegmentBlock,
    #[serde(default)]
    pub reversals: ReversalsBlock,
    #[serde(default)]
    pub tangency: TangencyBlock,
    #[serde(default)]
    pub cascade: CascadeBlock,
    #[serde(default)]
    pub spirals: SpiralsBlock,
    #[serde(default)]
    pub fixed_points: FixedPointsBlock,
    #[serde(default)]
    pub elliptic_strip: EllipticStripBlock,
    #[serde(default)]
    pub horseshoe: HorseshoeBlock,
    #[serde(default)]
    pub timedelay: TimeDelayBlock,
    #[serde(default)]
    pub discrepancy: DiscrepancyBlock,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct RegionBlock {
    pub samples: usize,
    pub max_denominator: i64,
    pub rational_tol: f64,
}

impl Default for RegionBlock {
    fn default() -> Self {
        Self {
            samples: 100,
            max_denominator: 1000,
            rational_tol: 1e-12,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct SegmentBlock {
    pub x0: f64,
    pub s_min: f64,
    pub s_max: f64,
    pub n: usize,
}

impl Default for SegmentBlock {
    fn default() -> Self {
        Self {
            x0: 0.0,
            s_min: 1e-8,
            s_max: 0.45,
            n: 400,
        }
    }
}

impl SegmentBlock {
    /// `n` log-spaced parameters from `s_max` down to `s_min`.
    pub fn grid(&self) -> Vec<f64> {
        log_grid(self.s_min, self.s_max, self.n)
    }
}

pub fn log_grid(s_min: f64, s_max: f64, n: usize) -> Vec<f64> {
    let n = n.max(2);
    let (lo, hi) = (s_min.ln(), s_max.ln());
    (0..n)
        .map(|i| (hi + (lo - hi) * i as f64 / (n - 1) as f64).exp())
        .collect()
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct ReversalsBlock {
    pub n_max: usize,
}

impl Default for ReversalsBlock {
    fn default() -> Self {
        Self { n_max: 20 }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct TangencyBlock {
    pub stable_line_x: f64,
    pub n_max: usize,
    pub tol_angle: f64,
}

impl Default for TangencyBlock {
    fn default() -> Self {
        Self {
            stable_line_x: 0.0,
            n_max: 200,
            tol_angle: 0.05,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct CascadeBlock {
    pub k_max: usize,
    pub x0: f64,
    pub s_min: f64,
    pub s_max: f64,
    pub n: usize,
    pub stable_line_x: f64,
    pub tol_angle: f64,
}

impl Default for CascadeBlock {
    fn default() -> Self {
        Self {
            k_max: 2,
            x0: 0.0,
            s_min: 1e-6,
            s_max: 0.45,
            n: 2000,
            stable_line_x: 0.0,
            tol_angle: 0.05,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct SpiralsBlock {
    pub stable: SegmentSpec,
    pub unstable: SegmentSpec,
    pub samples: usize,
}

impl Default for SpiralsBlock {
    fn default() -> Self {
        let range = SegmentSpec {
            x: 0.0,
            s_min: (-6.0 * PI).exp(),
            s_max: 1.0,
        };
        Self {
            stable: range,
            unstable: range,
            samples: 4000,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct FixedPointsBlock {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
    pub grid: usize,
    pub tol: f64,
}

impl Default for FixedPointsBlock {
    fn default() -> Self {
        Self {
            x_min: -0.04,
            x_max: -1e-9,
            y_min: 1e-6,
            y_max: 1e-2,
            grid: 12,
            tol: 1e-10,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct EllipticStripBlock {
    pub y_max: f64,
    /// Fiber phase; every reversal phase when absent.
    pub phi0: Option<f64>,
}

impl Default for EllipticStripBlock {
    fn default() -> Self {
        Self { y_max: 1e-2, phi0: None }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct HorseshoeBlock {
    pub k: u32,
    pub y_ref: f64,
    pub x_min: f64,
    pub x_max: f64,
}

impl Default for HorseshoeBlock {
    fn default() -> Self {
        Self {
            k: 0,
            y_ref: 1e-4,
            x_min: -PI,
            x_max: PI,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct TimeDelayBlock {
    /// `michelson`, `linear-sigma1` or `linear-sigma2`.
    pub field: String,
    /// Michelson parameter; the cycle value when absent.
    pub c: Option<f64>,
    pub p0: Option<[f64; 3]>,
    pub p1: Option<[f64; 3]>,
    #[serde(rename = "N")]
    pub n: usize,
    pub r: f64,
    pub t_max: f64,
    pub spike_factor: f64,
    pub rel_tol: f64,
    pub abs_tol: f64,
}

impl Default for TimeDelayBlock {
    fn default() -> Self {
        Self {
            field: "michelson".into(),
            c: None,
            p0: None,
            p1: None,
            n: 101,
            r: 4.0,
            t_max: 1e3,
            spike_factor: 2.0,
            rel_tol: 1e-10,
            abs_tol: 1e-12,
        }
    }
}

impl TimeDelayBlock {
    pub fn michelson_c(&self) -> f64 {
        self.c.unwrap_or_else(michelson_ck)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct DiscrepancyBlock {
    pub n_s: usize,
}

impl Default for DiscrepancyBlock {
    fn default() -> Self {
        Self { n_s: 200 }
    }
}
