use thiserror::Error;

/// Which map of the cycle model rejected a point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Stage {
    Phi1,
    Psi12,
    Phi2Exit,
    Psi21,
}

impl std::fmt::Display for Stage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let name = match self {
            Stage::Phi1 => "phi1",
            Stage::Psi12 => "psi12",
            Stage::Phi2Exit => "phi2-exit",
            Stage::Psi21 => "psi21",
        };
        f.write_str(name)
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("parameter `{0}` must be strictly positive")]
    NonPositiveParameter(&'static str),

    #[error("resonance {relation} violated (residual {residual:e})")]
    ResonanceViolated {
        relation: &'static str,
        residual: f64,
    },

    #[error("shear a = {0} must satisfy a >= 1")]
    ShearBelowOne(f64),

    #[error("point left the model neighbourhood at stage {0}")]
    DomainEscape(Stage),

    #[error("point within {eps:e} of a domain boundary at stage {stage}")]
    NearSingular { stage: Stage, eps: f64 },

    #[error("closed form and composition disagree at s = {s:e} (delta {delta:e})")]
    FormulaMismatch { s: f64, delta: f64 },

    #[error("no samples survive past iterate {0}")]
    Extinct(usize),

    #[error("no reversal phases available")]
    NoReversals,

    #[error("reversal parameter underflows below 1e-300 at n = {n}")]
    Underflow {
        n: usize,
        truncated: Vec<crate::reversal::ReversalEvent>,
    },

    #[error("invalid input: {0}")]
    InvalidInput(String),
}

pub type Result<T> = std::result::Result<T, Error>;
