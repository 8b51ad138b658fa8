use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::params::SaddleParams;

pub type Vec3 = [f64; 3];

type Velocity = dyn Fn(&Vec3) -> Vec3 + Send + Sync;

/// A named autonomous vector field on R³.
#[derive(Clone)]
pub struct FieldSpec {
    pub name: String,
    pub parameters: BTreeMap<String, f64>,
    velocity: Arc<Velocity>,
}

impl fmt::Debug for FieldSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FieldSpec")
            .field("name", &self.name)
            .field("parameters", &self.parameters)
            .finish_non_exhaustive()
    }
}

impl FieldSpec {
    pub fn new(
        name: impl Into<String>,
        parameters: BTreeMap<String, f64>,
        velocity: impl Fn(&Vec3) -> Vec3 + Send + Sync + 'static,
    ) -> Self {
        Self {
            name: name.into(),
            parameters,
            velocity: Arc::new(velocity),
        }
    }

    pub fn evaluate(&self, x: &Vec3) -> Vec3 {
        (self.velocity)(x)
    }

    pub fn parameter(&self, key: &str) -> Option<f64> {
        self.parameters.get(key).copied()
    }
}

/// `15·sqrt(22/19³)`, the parameter value at which the Michelson system carries the cycle.
pub fn michelson_ck() -> f64 {
    15.0 * (22.0f64 / 6859.0).sqrt()
}

/// `x' = y, y' = z, z' = c² - y - x²/2`.
pub fn michelson(c: f64) -> FieldSpec {
    let c2 = c * c;
    FieldSpec::new("michelson", BTreeMap::from([("c".to_string(), c)]), move |s: &Vec3| {
        [s[1], s[2], c2 - s[1] - 0.5 * s[0] * s[0]]
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Saddle {
    /// One-dimensional unstable manifold: contraction and rotation in the plane, expansion along z.
    Sigma1,
    /// Two-dimensional unstable manifold, rotating the opposite way.
    Sigma2,
}

/// Linear saddle-focus in cylindrical form `(ρ, θ, z)`, written in Cartesian `(ρ cos θ, ρ sin θ, z)`.
pub fn linear_saddle_field(saddle: &SaddleParams, which: Saddle) -> FieldSpec {
    let (radial, spin, axial, name) = match which {
        Saddle::Sigma1 => (-saddle.c1, saddle.alpha1, saddle.e1, "linear-sigma1"),
        Saddle::Sigma2 => (saddle.e2, -saddle.alpha2, -saddle.c2, "linear-sigma2"),
    };
    let parameters = BTreeMap::from([
        ("radial".to_string(), radial),
        ("spin".to_string(), spin),
        ("axial".to_string(), axial),
    ]);
    FieldSpec::new(name, parameters, move |s: &Vec3| {
        [radial * s[0] - spin * s[1], spin * s[0] + radial * s[1], axial * s[2]]
    })
}

/// Fourth-order central difference of the field along `axis`.
pub(crate) fn partial(field: &FieldSpec, x: &Vec3, axis: usize) -> Vec3 {
    let h = 1e-3 * x[axis].abs().max(1.0);
    let at = |k: f64| {
        let mut p = *x;
        p[axis] += k * h;
        field.evaluate(&p)
    };
    let (p1, m1, p2, m2) = (at(1.0), at(-1.0), at(2.0), at(-2.0));
    std::array::from_fn(|i| (8.0 * (p1[i] - m1[i]) - (p2[i] - m2[i])) / (12.0 * h))
}

pub(crate) fn jacobian3(field: &FieldSpec, x: &Vec3) -> [[f64; 3]; 3] {
    let cols = [partial(field, x, 0), partial(field, x, 1), partial(field, x, 2)];
    std::array::from_fn(|i| std::array::from_fn(|j| cols[j][i]))
}

pub fn divergence(field: &FieldSpec, x: &Vec3) -> f64 {
    (0..3).map(|k| partial(field, x, k)[k]).sum()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SampleBox {
    pub lo: Vec3,
    pub hi: Vec3,
}

/// Largest numerical divergence over `n_samples` uniform points of `sample_box`.
pub fn divergence_max(field: &FieldSpec, sample_box: &SampleBox, n_samples: usize, seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n_samples.max(1))
        .map(|_| {
            let x: Vec3 = std::array::from_fn(|i| rng.gen_range(sample_box.lo[i]..=sample_box.hi[i]));
            divergence(field, &x).abs()
        })
        .fold(0.0, f64::max)
}

pub(crate) fn norm(x: &Vec3) -> f64 {
    x[0].hypot(x[1]).hypot(x[2])
}
