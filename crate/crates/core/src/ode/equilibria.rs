//! Equilibria by damped Newton and their spectra from the characteristic cubic.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::field::{jacobian3, norm, FieldSpec, Vec3};

/// Rates of a saddle-focus read off its spectrum: one real eigenvalue and a complex pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum SaddleEstimate {
    /// Real eigenvalue `e > 0`, pair `-c ± i·alpha`.
    OneDimUnstable { alpha: f64, c: f64, e: f64 },
    /// Real eigenvalue `-c < 0`, pair `e ± i·alpha`.
    TwoDimUnstable { alpha: f64, c: f64, e: f64 },
    NotSaddleFocus,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EquilibriumReport {
    pub location: Vec3,
    pub residual: f64,
    pub eigenvalues: [Complex64; 3],
    pub morse_index: usize,
    pub divergence: f64,
    pub saddle_estimate: SaddleEstimate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EquilibriumSearch {
    pub equilibria: Vec<EquilibriumReport>,
    /// Seeds from which Newton did not converge.
    pub no_convergence: Vec<Vec3>,
}

fn solve3(a: [[f64; 3]; 3], b: Vec3) -> Option<Vec3> {
    let mut m = [[0.0; 4]; 3];
    for i in 0..3 {
        m[i][..3].copy_from_slice(&a[i]);
        m[i][3] = b[i];
    }
    for col in 0..3 {
        let piv = (col..3).max_by(|&i, &j| m[i][col].abs().total_cmp(&m[j][col].abs()))?;
        if m[piv][col].abs() < 1e-300 {
            return None;
        }
        m.swap(col, piv);
        for row in col + 1..3 {
            let f = m[row][col] / m[col][col];
            for k in col..4 {
                m[row][k] -= f * m[col][k];
            }
        }
    }
    let mut x = [0.0; 3];
    for i in (0..3).rev() {
        let s: f64 = (i + 1..3).map(|k| m[i][k] * x[k]).sum();
        x[i] = (m[i][3] - s) / m[i][i];
    }
    x.iter().all(|v| v.is_finite()).then_some(x)
}

/// Roots of `λ³ + b λ² + c λ + d`: one real root from the depressed form, Newton-polished, then
/// the deflated quadratic. The real root comes first.
pub fn cubic_roots(b: f64, c: f64, d: f64) -> [Complex64; 3] {
    let p = c - b * b / 3.0;
    let q = 2.0 * b * b * b / 27.0 - b * c / 3.0 + d;
    let disc = 0.25 * q * q + p * p * p / 27.0;
    let t = if disc > 0.0 {
        let u = (-0.5 * q - q.signum() * disc.sqrt()).cbrt();
        if u == 0.0 {
            0.0
        } else {
            u - p / (3.0 * u)
        }
    } else if p == 0.0 {
        0.0
    } else {
        let m = 2.0 * (-p / 3.0).sqrt();
        let arg = (3.0 * q / (p * m)).clamp(-1.0, 1.0);
        m * (arg.acos() / 3.0).cos()
    };
    let mut r = t - b / 3.0;
    for _ in 0..3 {
        let f = ((r + b) * r + c) * r + d;
        let df = (3.0 * r + 2.0 * b) * r + c;
        if df == 0.0 {
            break;
        }
        let next = r - f / df;
        if !next.is_finite() {
            break;
        }
        r = next;
    }
    let qb = b + r;
    let qc = c + r * qb;
    let qd = qb * qb - 4.0 * qc;
    let (z1, z2) = if qd >= 0.0 {
        let root = if qb >= 0.0 { qd.sqrt() } else { -qd.sqrt() };
        let s = -0.5 * (qb + root);
        let other = if s != 0.0 { qc / s } else { 0.0 };
        (Complex64::new(s, 0.0), Complex64::new(other, 0.0))
    } else {
        let im = 0.5 * (-qd).sqrt();
        (Complex64::new(-0.5 * qb, im), Complex64::new(-0.5 * qb, -im))
    };
    [Complex64::new(r, 0.0), z1, z2]
}

/// Spectrum of a 3×3 matrix; a trace below `1e-9` in magnitude is set to zero before solving.
pub fn spectrum(j: &[[f64; 3]; 3]) -> [Complex64; 3] {
    let mut tr = j[0][0] + j[1][1] + j[2][2];
    if tr.abs() <= 1e-9 {
        tr = 0.0;
    }
    let minors = j[0][0] * j[1][1] - j[0][1] * j[1][0] + j[0][0] * j[2][2] - j[0][2] * j[2][0] + j[1][1] * j[2][2]
        - j[1][2] * j[2][1];
    let det = j[0][0] * (j[1][1] * j[2][2] - j[1][2] * j[2][1]) - j[0][1] * (j[1][0] * j[2][2] - j[1][2] * j[2][0])
        + j[0][2] * (j[1][0] * j[2][1] - j[1][1] * j[2][0]);
    cubic_roots(-tr, minors, -det)
}

fn saddle_estimate(ev: &[Complex64; 3]) -> SaddleEstimate {
    let (real, pair) = (ev[0], ev[1]);
    if pair.im == 0.0 || real.re == 0.0 || pair.re == 0.0 || real.re.signum() == pair.re.signum() {
        return SaddleEstimate::NotSaddleFocus;
    }
    let alpha = pair.im.abs();
    if real.re > 0.0 {
        SaddleEstimate::OneDimUnstable {
            alpha,
            c: -pair.re,
            e: real.re,
        }
    } else {
        SaddleEstimate::TwoDimUnstable {
            alpha,
            c: -real.re,
            e: pair.re,
        }
    }
}

fn newton(field: &FieldSpec, seed: Vec3, tol: f64) -> Option<(Vec3, f64)> {
    let mut x = seed;
    let mut f = field.evaluate(&x);
    for _ in 0..100 {
        let r = norm(&f);
        if r <= tol {
            return Some((x, r));
        }
        let step = solve3(jacobian3(field, &x), f)?;
        let mut lambda = 1.0;
        loop {
            let trial: Vec3 = std::array::from_fn(|i| x[i] - lambda * step[i]);
            let ft = field.evaluate(&trial);
            if norm(&ft) < r || lambda < 1e-8 {
                x = trial;
                f = ft;
                break;
            }
            lambda *= 0.5;
        }
    }
    let r = norm(&f);
    (r <= tol).then_some((x, r))
}

/// Equilibria reached from `seeds`, merged within `max(1e-8, 10·tol)`, each with its spectrum.
pub fn equilibria_with_spectrum(field: &FieldSpec, seeds: &[Vec3], tol: f64) -> EquilibriumSearch {
    let mut out = EquilibriumSearch {
        equilibria: Vec::new(),
        no_convergence: Vec::new(),
    };
    let merge = (10.0 * tol).max(1e-8);
    for &seed in seeds {
        let Some((x, residual)) = newton(field, seed, tol) else {
            out.no_convergence.push(seed);
            continue;
        };
        let seen = out.equilibria.iter().any(|e| {
            let d: Vec3 = std::array::from_fn(|i| e.location[i] - x[i]);
            norm(&d) <= merge
        });
        if seen {
            continue;
        }
        let j = jacobian3(field, &x);
        let eigenvalues = spectrum(&j);
        out.equilibria.push(EquilibriumReport {
            location: x,
            residual,
            eigenvalues,
            morse_index: eigenvalues.iter().filter(|l| l.re > 0.0).count(),
            divergence: j[0][0] + j[1][1] + j[2][2],
            saddle_estimate: saddle_estimate(&eigenvalues),
        });
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ode::field::{michelson, michelson_ck};

    fn cubic(l: Complex64, b: f64, c: f64, d: f64) -> f64 {
        (((l + b) * l + c) * l + d).norm()
    }

    #[test]
    fn cubic_three_real_roots() {
        // (λ-1)(λ-2)(λ+3) = λ³ - 7λ + 6
        let mut r: Vec<f64> = cubic_roots(0.0, -7.0, 6.0).iter().map(|z| z.re).collect();
        r.sort_by(f64::total_cmp);
        for (got, want) in r.iter().zip([-3.0, 1.0, 2.0]) {
            assert!((got - want).abs() < 1e-12);
        }
    }

    #[test]
    fn michelson_unit_equilibria() {
        let f = michelson(1.0);
        let found = equilibria_with_spectrum(&f, &[[1.4, 0.0, 0.0], [-1.4, 0.0, 0.0]], 1e-13);
        assert_eq!(found.equilibria.len(), 2);
        for (e, sign) in found.equilibria.iter().zip([1.0, -1.0]) {
            assert!((e.location[0] - sign * 2f64.sqrt()).abs() < 1e-10);
            assert!(e.location[1].abs() < 1e-10 && e.location[2].abs() < 1e-10);
            for l in e.eigenvalues {
                assert!(cubic(l, 0.0, 1.0, sign * 2f64.sqrt()) < 1e-10);
            }
            let sum: Complex64 = e.eigenvalues.iter().sum();
            assert!(sum.norm() <= 1e-7);
        }
    }

    #[test]
    fn michelson_ck_spectrum() {
        let c = michelson_ck();
        let f = michelson(c);
        let found = equilibria_with_spectrum(&f, &[[1.2, 0.1, 0.0]], 1e-13);
        let e = &found.equilibria[0];
        assert!((e.location[0] - 2f64.sqrt() * c).abs() < 1e-10);
        let ev = e.eigenvalues;
        assert!((ev[0].re + 0.760885910252682).abs() < 1e-12);
        assert!((ev[1].re - 0.380442955126341).abs() < 1e-12);
        assert!((ev[1].im.abs() - 1.197585289787658).abs() < 1e-12);
        assert_eq!(e.morse_index, 2);
        match e.saddle_estimate {
            SaddleEstimate::TwoDimUnstable { c, e, .. } => assert!((c - 2.0 * e).abs() < 1e-9),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn unreachable_seed_is_collected() {
        let f = FieldSpec::new("no-zero", Default::default(), |_: &Vec3| [1.0, 0.0, 0.0]);
        let found = equilibria_with_spectrum(&f, &[[0.0; 3]], 1e-12);
        assert!(found.equilibria.is_empty());
        assert_eq!(found.no_convergence.len(), 1);
    }
}
