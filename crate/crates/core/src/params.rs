//! Eigenvalue parameters of the two saddle-foci and the global transition.
//!
//! At the saddle-focus of Morse index one the spectrum is `-C1 ± i·alpha1, E1`
//! and at the one of Morse index two it is `E2 ± i·alpha2, -C2`. Zero divergence
//! forces `E1 = 2·C1` and `C2 = 2·E2`.

use serde::{Deserialize, Serialize};
use std::f64::consts::FRAC_PI_2;

use crate::error::{Error, Result};

/// Relative resonance tolerance for spectra estimated from a flow.
pub const FLOW_RESONANCE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SaddleParams {
    pub alpha1: f64,
    #[serde(rename = "C1")]
    pub c1: f64,
    #[serde(rename = "E1")]
    pub e1: f64,
    pub alpha2: f64,
    #[serde(rename = "E2")]
    pub e2: f64,
    #[serde(rename = "C2")]
    pub c2: f64,
}

impl SaddleParams {
    /// Builds a resonant spectrum from the four free rates.
    pub fn resonant(alpha1: f64, c1: f64, alpha2: f64, e2: f64) -> Self {
        Self {
            alpha1,
            c1,
            e1: 2.0 * c1,
            alpha2,
            e2,
            c2: 2.0 * e2,
        }
    }

    /// Checks positivity and both resonances. `rel_tol = 0` demands exact equality.
    pub fn check(&self, rel_tol: f64) -> Result<()> {
        let named = [
            ("alpha1", self.alpha1),
            ("C1", self.c1),
            ("E1", self.e1),
            ("alpha2", self.alpha2),
            ("E2", self.e2),
            ("C2", self.c2),
        ];
        for (name, value) in named {
            if !(value > 0.0) || !value.is_finite() {
                return Err(Error::NonPositiveParameter(name));
            }
        }
        let r1 = self.e1 - 2.0 * self.c1;
        if r1.abs() > rel_tol * self.e1.abs() {
            return Err(Error::ResonanceViolated {
                relation: "E1=2C1",
                residual: r1.abs(),
            });
        }
        let r2 = self.c2 - 2.0 * self.e2;
        if r2.abs() > rel_tol * self.c2.abs() {
            return Err(Error::ResonanceViolated {
                relation: "C2=2E2",
                residual: r2.abs(),
            });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GlobalParams {
    /// Shear of the transition from the top of the first cylinder to the top of the second.
    pub a: f64,
    /// Angle of the planar rotation modelling the transition back to the first wall.
    pub rotation: f64,
}

impl Default for GlobalParams {
    fn default() -> Self {
        Self {
            a: 2.0,
            rotation: FRAC_PI_2,
        }
    }
}

/// Validated model parameters with the derived ratios.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ModelParams {
    pub saddle: SaddleParams,
    pub global: GlobalParams,
    /// `alpha1 / E1`
    pub g1: f64,
    /// `-alpha2 / E2`
    pub g2: f64,
    /// `(alpha2 · C1) / (alpha1 · E2)`
    pub gamma: f64,
}

impl ModelParams {
    pub fn new(saddle: SaddleParams, global: GlobalParams) -> Result<Self> {
        Self::with_tolerance(saddle, global, 0.0)
    }

    pub fn with_tolerance(saddle: SaddleParams, global: GlobalParams, rel_tol: f64) -> Result<Self> {
        saddle.check(rel_tol)?;
        if !(global.a >= 1.0) || !global.a.is_finite() {
            return Err(Error::ShearBelowOne(global.a));
        }
        if !global.rotation.is_finite() {
            return Err(Error::InvalidInput("rotation must be finite".into()));
        }
        Ok(Self {
            saddle,
            global,
            g1: saddle.alpha1 / saddle.e1,
            g2: -saddle.alpha2 / saddle.e2,
            gamma: (saddle.alpha2 * saddle.c1) / (saddle.alpha1 * saddle.e2),
        })
    }

    /// Reference set: `alpha1 = alpha2 = 1`, `a = E1 = 2`, `C1 = E2 = 1`.
    pub fn figure_caption() -> Self {
        Self::new(SaddleParams::resonant(1.0, 1.0, 1.0, 1.0), GlobalParams::default())
            .expect("figure parameters are valid")
    }

    pub fn with_shear(&self, a: f64) -> Result<Self> {
        Self::new(self.saddle, GlobalParams { a, ..self.global })
    }

    pub fn a(&self) -> f64 {
        self.global.a
    }

    /// `a² - 1/a²`, the shear anisotropy.
    pub fn shear_spread(&self) -> f64 {
        let a2 = self.global.a * self.global.a;
        a2 - 1.0 / a2
    }

    /// `alpha1 · E2 / alpha2`, the right-hand side of the reversal condition.
    pub fn reversal_level(&self) -> f64 {
        self.saddle.alpha1 * self.saddle.e2 / self.saddle.alpha2
    }
}

/// Raw parameter block as it appears in configuration files.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RawParams {
    pub alpha1: f64,
    #[serde(rename = "C1")]
    pub c1: f64,
    #[serde(rename = "E1", default, skip_serializing_if = "Option::is_none")]
    pub e1: Option<f64>,
    pub alpha2: f64,
    #[serde(rename = "E2")]
    pub e2: f64,
    #[serde(rename = "C2", default, skip_serializing_if = "Option::is_none")]
    pub c2: Option<f64>,
    pub a: f64,
    #[serde(default = "default_rotation")]
    pub rotation: f64,
}

fn default_rotation() -> f64 {
    FRAC_PI_2
}

impl RawParams {
    pub fn validate(&self) -> Result<ModelParams> {
        validate_params(
            [
                self.alpha1,
                self.c1,
                self.e1.unwrap_or(2.0 * self.c1),
                self.alpha2,
                self.e2,
                self.c2.unwrap_or(2.0 * self.e2),
            ],
            self.a,
            self.rotation,
            0.0,
        )
    }
}

impl From<&ModelParams> for RawParams {
    fn from(p: &ModelParams) -> Self {
        Self {
            alpha1: p.saddle.alpha1,
            c1: p.saddle.c1,
            e1: Some(p.saddle.e1),
            alpha2: p.saddle.alpha2,
            e2: p.saddle.e2,
            c2: Some(p.saddle.c2),
            a: p.global.a,
            rotation: p.global.rotation,
        }
    }
}

/// Validates raw values ordered `(alpha1, C1, E1, alpha2, E2, C2)`.
pub fn validate_params(raw: [f64; 6], a: f64, rotation: f64, rel_tol: f64) -> Result<ModelParams> {
    let [alpha1, c1, e1, alpha2, e2, c2] = raw;
    ModelParams::with_tolerance(
        SaddleParams {
            alpha1,
            c1,
            e1,
            alpha2,
            e2,
            c2,
        },
        GlobalParams { a, rotation },
        rel_tol,
    )
}
