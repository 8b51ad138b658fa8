//! Direct integration of concrete three-dimensional divergence-free fields.

pub mod equilibria;
pub mod field;
pub mod integrator;
pub mod localflow;
pub mod timedelay;

pub use equilibria::{equilibria_with_spectrum, EquilibriumReport, EquilibriumSearch, SaddleEstimate};
pub use field::{divergence_max, linear_saddle_field, michelson, michelson_ck, FieldSpec, Saddle, SampleBox, Vec3};
pub use integrator::{integrate, integrate_with, IntegrateOptions, Termination, Trajectory};
pub use timedelay::{time_delay, time_delay_scan, Direction, EscapeTime, LineSpec, Spike, TimeDelayProfile, TimeDelaySample};
