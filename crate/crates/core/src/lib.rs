//! Numerics for conservative heteroclinic cycles between two saddle-foci of different Morse index.

pub mod discrepancy;
pub mod error;
pub mod horseshoe;
pub mod ode;
pub mod params;
pub mod region;
pub mod reversal;
pub mod sections;
pub mod spectra;
pub mod tangency;
pub mod trace;

pub use error::{Error, Result, Stage};
pub use params::{GlobalParams, ModelParams, RawParams, SaddleParams};
pub use sections::{DiskPoint, Jacobian2, MapId, SectionPoint, WallPoint};
