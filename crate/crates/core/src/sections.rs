//! Cross-section geometry of the cycle: local maps near each saddle-focus,
//! the two global transitions, their composition and exact Jacobians.
//!
//! Wall sections are charted by `(x, y)` with `x` an angle in radians kept as an
//! unbounded lift and `y` the height. Disk sections use polar `(r, phi)`, again
//! with a lifted angle. Angles are only reduced for presentation, and where the
//! rotation back to the first wall acts on its local chart.

use serde::{Deserialize, Serialize};
use std::f64::consts::{FRAC_PI_2, PI, TAU};

use crate::error::{Error, Result, Stage};
use crate::params::ModelParams;

/// Default distance from a domain boundary below which Jacobians are refused.
pub const JACOBIAN_EPS: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WallPoint {
    pub x: f64,
    pub y: f64,
}

impl WallPoint {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiskPoint {
    pub r: f64,
    pub phi: f64,
}

impl DiskPoint {
    pub const fn new(r: f64, phi: f64) -> Self {
        Self { r, phi }
    }

    pub fn to_cartesian(self) -> [f64; 2] {
        [self.r * self.phi.cos(), self.r * self.phi.sin()]
    }
}

/// Reduces an angle to `(-pi, pi]`.
pub fn principal_angle(x: f64) -> f64 {
    let mut r = x.rem_euclid(TAU);
    if r > PI {
        r -= TAU;
    }
    r
}

/// Reduces an angle to `[0, 2pi)`.
pub fn angle_mod_tau(x: f64) -> f64 {
    let r = x.rem_euclid(TAU);
    if r >= TAU {
        0.0
    } else {
        r
    }
}

/// Distance between two angles on the circle, in `[0, pi]`.
pub fn circular_distance(a: f64, b: f64) -> f64 {
    principal_angle(a - b).abs()
}

/// `C(phi) = a² cos²phi + sin²phi / a²`, the squared stretch of the shear along direction `phi`.
pub fn stretch(phi: f64, a: f64) -> f64 {
    let (s, c) = phi.sin_cos();
    let a2 = a * a;
    a2 * c * c + s * s / a2
}

/// `dC/dphi`.
pub fn stretch_derivative(phi: f64, a: f64) -> f64 {
    let a2 = a * a;
    -(a2 - 1.0 / a2) * (2.0 * phi).sin()
}

/// Half-period index `k` with `phi - k·pi` in `[-pi/2, pi/2)`.
fn half_period(phi: f64) -> f64 {
    ((phi + FRAC_PI_2) / PI).floor()
}

/// Lifted angle of the sheared direction: `k·pi + atan2(sin/a, a·cos)` on the half period of `phi`.
///
/// Satisfies `shear_angle(phi + pi) = shear_angle(phi) + pi` and keeps quadrants.
pub fn shear_angle(phi: f64, a: f64) -> f64 {
    let k = half_period(phi);
    let reduced = phi - k * PI;
    let (s, c) = reduced.sin_cos();
    k * PI + (s / a).atan2(a * c)
}

/// The functional whose zeros are the reversal phases: `dx2/ds = -D(phi)/s` along a vertical segment.
pub fn reversal_functional(phi: f64, p: &ModelParams) -> f64 {
    let a = p.a();
    let c = stretch(phi, a);
    let (sn, cs) = phi.sin_cos();
    p.g2 / 2.0 + (p.g1 / c) * (1.0 + p.g2 * p.shear_spread() * sn * cs)
}

/// Local map near the first saddle-focus: wall `In(σ₁)` to top disk `Out(σ₁)`.
pub fn phi1(p: WallPoint, params: &ModelParams) -> Result<DiskPoint> {
    if !(p.y > 0.0 && p.y <= 1.0) {
        return Err(Error::DomainEscape(Stage::Phi1));
    }
    Ok(DiskPoint {
        r: p.y.sqrt(),
        phi: p.x - params.g1 * p.y.ln(),
    })
}

/// Local map near the second saddle-focus: top disk `In(σ₂)` to wall `Out(σ₂)`.
pub fn phi2(p: DiskPoint, params: &ModelParams) -> Result<WallPoint> {
    if !(p.r > 0.0 && p.r <= 1.0) {
        return Err(Error::DomainEscape(Stage::Phi2Exit));
    }
    Ok(WallPoint {
        x: p.phi - params.g2 * p.r.ln(),
        y: p.r * p.r,
    })
}

/// Inverse of [`phi2`], wall `Out(σ₂)` back to the disk `In(σ₂)`.
pub fn phi2_inverse(p: WallPoint, params: &ModelParams) -> Result<DiskPoint> {
    if !(p.y > 0.0 && p.y <= 1.0) {
        return Err(Error::DomainEscape(Stage::Phi2Exit));
    }
    let r = p.y.sqrt();
    Ok(DiskPoint {
        r,
        phi: p.x + params.g2 * r.ln(),
    })
}

/// Linear global transition `(u, v) -> (a·u, v/a)` written in polar form with a lifted angle.
pub fn psi12(p: DiskPoint, params: &ModelParams) -> Result<DiskPoint> {
    if !(p.r > 0.0) {
        return Err(Error::DomainEscape(Stage::Psi12));
    }
    let a = params.a();
    Ok(DiskPoint {
        r: p.r * stretch(p.phi, a).sqrt(),
        phi: shear_angle(p.phi, a),
    })
}

/// Rotation of the `Out(σ₂)` chart about the transverse connection back onto `In(σ₁)`.
pub fn psi21(p: WallPoint, params: &ModelParams) -> WallPoint {
    let theta = params.global.rotation;
    if theta == 0.0 {
        return p;
    }
    let x = principal_angle(p.x);
    let (s, c) = rotation_sin_cos(theta);
    WallPoint {
        x: c * x - s * p.y,
        y: s * x + c * p.y,
    }
}

fn rotation_sin_cos(theta: f64) -> (f64, f64) {
    if theta == FRAC_PI_2 {
        (1.0, 0.0)
    } else if theta == -FRAC_PI_2 {
        (-1.0, 0.0)
    } else if theta == PI {
        (0.0, -1.0)
    } else {
        theta.sin_cos()
    }
}

/// `phi2 ∘ psi12 ∘ phi1`, from `In(σ₁)` to `Out(σ₂)`.
pub fn eta(p: WallPoint, params: &ModelParams) -> Result<WallPoint> {
    let top = phi1(p, params)?;
    let sheared = psi12(top, params)?;
    phi2(sheared, params)
}

/// First return map to `In(σ₁)`.
pub fn return_map(p: WallPoint, params: &ModelParams) -> Result<WallPoint> {
    Ok(psi21(eta(p, params)?, params))
}

/// [`eta`] evaluated in logarithmic height charts, for heights far below `f64` range.
///
/// Takes `(x, ln y)` and returns `(x2, ln y2)`.
pub fn eta_log(x: f64, ln_y: f64, params: &ModelParams) -> Result<(f64, f64)> {
    if !(ln_y <= 0.0) || ln_y.is_infinite() {
        return Err(Error::DomainEscape(Stage::Phi1));
    }
    let phi = x - params.g1 * ln_y;
    let ln_r1 = 0.5 * ln_y;
    let a = params.a();
    let ln_r2 = ln_r1 + 0.5 * stretch(phi, a).ln();
    if ln_r2 > 0.0 {
        return Err(Error::DomainEscape(Stage::Phi2Exit));
    }
    let x2 = shear_angle(phi, a) - params.g2 * ln_r2;
    Ok((x2, 2.0 * ln_r2))
}

/// 2×2 matrix of partial derivatives; rows are outputs, columns inputs.
///
/// The determinant is carried alongside the entries and multiplied through [`Jacobian2::compose`]:
/// products of the section-map factors reach entries of order `1/y`, where `ad - bc` of the
/// rounded product would lose all significant digits.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Jacobian2 {
    pub m: [[f64; 2]; 2],
    det: f64,
}

impl Jacobian2 {
    pub fn new(a11: f64, a12: f64, a21: f64, a22: f64) -> Self {
        Self {
            m: [[a11, a12], [a21, a22]],
            det: a11.mul_add(a22, -a12 * a21),
        }
    }

    pub fn identity() -> Self {
        Self::new(1.0, 0.0, 0.0, 1.0)
    }

    pub fn det(&self) -> f64 {
        self.det
    }

    /// `ad - bc` of the stored entries.
    pub fn det_from_entries(&self) -> f64 {
        self.m[0][0].mul_add(self.m[1][1], -self.m[0][1] * self.m[1][0])
    }

    pub fn trace(&self) -> f64 {
        self.m[0][0] + self.m[1][1]
    }

    pub fn is_finite(&self) -> bool {
        self.m.iter().flatten().all(|v| v.is_finite())
    }

    /// `self · rhs`
    pub fn compose(&self, rhs: &Jacobian2) -> Jacobian2 {
        let a = &self.m;
        let b = &rhs.m;
        Jacobian2 {
            m: [
                [a[0][0] * b[0][0] + a[0][1] * b[1][0], a[0][0] * b[0][1] + a[0][1] * b[1][1]],
                [a[1][0] * b[0][0] + a[1][1] * b[1][0], a[1][0] * b[0][1] + a[1][1] * b[1][1]],
            ],
            det: self.det * rhs.det,
        }
    }

    pub fn apply(&self, v: [f64; 2]) -> [f64; 2] {
        [
            self.m[0][0] * v[0] + self.m[0][1] * v[1],
            self.m[1][0] * v[0] + self.m[1][1] * v[1],
        ]
    }

    /// Singular values, largest first.
    pub fn singular_values(&self) -> (f64, f64) {
        let [[a, b], [c, d]] = self.m;
        let s1 = a * a + b * b + c * c + d * d;
        let det = self.det.abs();
        let disc = (s1 * s1 - 4.0 * det * det).max(0.0).sqrt();
        let big = ((s1 + disc) / 2.0).sqrt();
        let small = if big > 0.0 { det / big } else { 0.0 };
        (big, small)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MapId {
    Phi1,
    Phi2,
    Psi12,
    Psi21,
    Eta,
    ReturnMap,
}

/// Argument of a section map: wall maps take wall points, disk maps take disk points.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SectionPoint {
    Wall(WallPoint),
    Disk(DiskPoint),
}

/// Exact chain-rule Jacobian of one of the section maps.
///
/// `psi12` is differentiated in the polar chart `(r, phi)`; see [`psi12_cartesian_jacobian`]
/// for the area-preserving Cartesian form.
pub fn jacobian(map: MapId, point: SectionPoint, params: &ModelParams, eps: f64) -> Result<Jacobian2> {
    match (map, point) {
        (MapId::Phi1, SectionPoint::Wall(p)) => {
            guard_height(p.y, eps)?;
            Ok(jac_phi1(p, params))
        }
        (MapId::Phi2, SectionPoint::Disk(q)) => {
            if !(q.r <= 1.0) {
                return Err(Error::DomainEscape(Stage::Phi2Exit));
            }
            if !(q.r >= eps) {
                return Err(Error::NearSingular {
                    stage: Stage::Phi2Exit,
                    eps,
                });
            }
            Ok(jac_phi2(q, params))
        }
        (MapId::Psi12, SectionPoint::Disk(q)) => {
            if !(q.r >= eps) {
                return Err(Error::NearSingular {
                    stage: Stage::Psi12,
                    eps,
                });
            }
            Ok(jac_psi12(q, params))
        }
        (MapId::Psi21, SectionPoint::Wall(p)) => {
            guard_rotation_cut(p.x, eps, params)?;
            Ok(jac_psi21(params))
        }
        (MapId::Eta, SectionPoint::Wall(p)) => eta_jacobian_checked(p, params, eps).map(|(_, j)| j),
        (MapId::ReturnMap, SectionPoint::Wall(p)) => {
            let (image, j) = eta_jacobian_checked(p, params, eps)?;
            guard_rotation_cut(image.x, eps, params)?;
            Ok(jac_psi21(params).compose(&j))
        }
        (map, _) => Err(Error::InvalidInput(format!(
            "{map:?} takes a {} point",
            match map {
                MapId::Phi2 | MapId::Psi12 => "disk",
                _ => "wall",
            }
        ))),
    }
}

/// `diag(a, 1/a)`
pub fn psi12_cartesian_jacobian(params: &ModelParams) -> Jacobian2 {
    let a = params.a();
    Jacobian2::new(a, 0.0, 0.0, 1.0 / a)
}

fn guard_height(y: f64, eps: f64) -> Result<()> {
    if !(y <= 1.0) {
        return Err(Error::DomainEscape(Stage::Phi1));
    }
    if !(y >= eps) {
        return Err(Error::NearSingular {
            stage: Stage::Phi1,
            eps,
        });
    }
    Ok(())
}

fn guard_rotation_cut(x: f64, eps: f64, params: &ModelParams) -> Result<()> {
    if params.global.rotation != 0.0 && PI - principal_angle(x).abs() < eps {
        return Err(Error::NearSingular {
            stage: Stage::Psi21,
            eps,
        });
    }
    Ok(())
}

fn eta_jacobian_checked(p: WallPoint, params: &ModelParams, eps: f64) -> Result<(WallPoint, Jacobian2)> {
    guard_height(p.y, eps)?;
    let top = phi1(p, params)?;
    let sheared = psi12(top, params)?;
    let image = phi2(sheared, params)?;
    if 1.0 - image.y < eps {
        return Err(Error::NearSingular {
            stage: Stage::Phi2Exit,
            eps,
        });
    }
    let j = jac_phi2(sheared, params)
        .compose(&jac_psi12(top, params))
        .compose(&jac_phi1(p, params));
    Ok((image, j))
}

fn jac_phi1(p: WallPoint, params: &ModelParams) -> Jacobian2 {
    Jacobian2::new(0.0, 0.5 / p.y.sqrt(), 1.0, -params.g1 / p.y)
}

fn jac_psi12(q: DiskPoint, params: &ModelParams) -> Jacobian2 {
    let a = params.a();
    let c = stretch(q.phi, a);
    let sc = c.sqrt();
    Jacobian2::new(sc, q.r * stretch_derivative(q.phi, a) / (2.0 * sc), 0.0, 1.0 / c)
}

fn jac_phi2(q: DiskPoint, params: &ModelParams) -> Jacobian2 {
    Jacobian2::new(-params.g2 / q.r, 1.0, 2.0 * q.r, 0.0)
}

fn jac_psi21(params: &ModelParams) -> Jacobian2 {
    let theta = params.global.rotation;
    if theta == 0.0 {
        return Jacobian2::identity();
    }
    let (s, c) = rotation_sin_cos(theta);
    Jacobian2::new(c, -s, s, c)
}

/// Image point and Jacobian of the return map without boundary guards, for scans that
/// classify points anywhere in the valid domain.
pub fn return_map_with_jacobian(p: WallPoint, params: &ModelParams) -> Result<(WallPoint, Jacobian2)> {
    let top = phi1(p, params)?;
    let sheared = psi12(top, params)?;
    let image = phi2(sheared, params)?;
    let j = jac_phi2(sheared, params)
        .compose(&jac_psi12(top, params))
        .compose(&jac_phi1(p, params));
    Ok((psi21(image, params), jac_psi21(params).compose(&j)))
}

/// `eta` together with its Jacobian, without boundary guards.
pub fn eta_with_jacobian(p: WallPoint, params: &ModelParams) -> Result<(WallPoint, Jacobian2)> {
    let top = phi1(p, params)?;
    let sheared = psi12(top, params)?;
    let image = phi2(sheared, params)?;
    let j = jac_phi2(sheared, params)
        .compose(&jac_psi12(top, params))
        .compose(&jac_phi1(p, params));
    Ok((image, j))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeometryValues {
    #[serde(rename = "C")]
    pub stretch: f64,
    #[serde(rename = "Phi_lift")]
    pub phi_lift: f64,
    #[serde(rename = "A_printed")]
    pub a_printed: f64,
    #[serde(rename = "A_derived")]
    pub a_derived: f64,
}

/// The stretch, the lifted shear angle and both forms of the pi-periodic reversal functional.
///
/// `a_printed = E1·a²cos² + (E1/a²)sin² + alpha1(a² - 1/a²) sin cos` is the published form;
/// `a_derived = (E1/2)·C + alpha1(a² - 1/a²) sin cos` is what differentiating the composition gives.
pub fn geometry_functions(phi: f64, params: &ModelParams) -> GeometryValues {
    let a = params.a();
    let c = stretch(phi, a);
    let (s, co) = phi.sin_cos();
    let a2 = a * a;
    let e1 = params.saddle.e1;
    let cross = params.saddle.alpha1 * params.shear_spread() * s * co;
    GeometryValues {
        stretch: c,
        phi_lift: shear_angle(phi, a),
        a_printed: e1 * a2 * co * co + e1 / a2 * s * s + cross,
        a_derived: 0.5 * e1 * c + cross,
    }
}
