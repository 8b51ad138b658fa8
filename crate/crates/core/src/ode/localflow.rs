//! Local passages computed by integrating the linear saddle fields between their sections.

use super::field::{linear_saddle_field, Saddle, Vec3};
use super::integrator::{integrate_with, IntegrateOptions, Termination};
use crate::params::ModelParams;
use crate::sections::{DiskPoint, WallPoint};

pub fn passage_options() -> IntegrateOptions {
    IntegrateOptions {
        rel_tol: 1e-12,
        abs_tol: 1e-14,
        max_radius: f64::INFINITY,
        record: false,
    }
}

/// Flows a point of the cylinder wall `ρ = 1` around the first saddle until it reaches the disk `z = 1`.
pub fn flow_phi1(p: WallPoint, params: &ModelParams, opts: &IntegrateOptions) -> Option<DiskPoint> {
    if !(p.y > 0.0 && p.y < 1.0) {
        return None;
    }
    let field = linear_saddle_field(&params.saddle, Saddle::Sigma1);
    let t_end = 2.0 * (-p.y.ln() / params.saddle.e1) + 1.0;
    let event = |s: &Vec3| s[2] - 1.0;
    let tr = integrate_with(&field, [p.x.cos(), p.x.sin(), p.y], t_end, opts, Some(&event));
    (tr.termination == Termination::Event).then(|| {
        let s = tr.final_state();
        DiskPoint::new(s[0].hypot(s[1]), s[1].atan2(s[0]))
    })
}

/// Flows a point of the disk `z = 1` around the second saddle until it reaches the wall `ρ = 1`.
pub fn flow_phi2(d: DiskPoint, params: &ModelParams, opts: &IntegrateOptions) -> Option<WallPoint> {
    if !(d.r > 0.0 && d.r < 1.0) {
        return None;
    }
    let field = linear_saddle_field(&params.saddle, Saddle::Sigma2);
    let t_end = 2.0 * (-d.r.ln() / params.saddle.e2) + 1.0;
    let event = |s: &Vec3| s[0].hypot(s[1]) - 1.0;
    let tr = integrate_with(&field, [d.r * d.phi.cos(), d.r * d.phi.sin(), 1.0], t_end, opts, Some(&event));
    (tr.termination == Termination::Event).then(|| {
        let s = tr.final_state();
        WallPoint::new(s[1].atan2(s[0]), s[2])
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sections::{phi1, phi2, principal_angle};

    #[test]
    fn first_passage_matches_closed_form() {
        let p = ModelParams::figure_caption();
        for i in 0..20 {
            let w = WallPoint::new(-3.0 + 0.3 * i as f64, 10f64.powf(-0.25 * (i + 1) as f64));
            let flow = flow_phi1(w, &p, &passage_options()).unwrap();
            let map = phi1(w, &p).unwrap();
            assert!((flow.r - map.r).abs() < 1e-8);
            assert!(principal_angle(flow.phi - map.phi).abs() < 1e-8);
        }
    }

    #[test]
    fn second_passage_matches_closed_form() {
        let p = ModelParams::figure_caption();
        for i in 0..20 {
            let d = DiskPoint::new(0.04 * (i + 1) as f64, -3.0 + 0.3 * i as f64);
            let flow = flow_phi2(d, &p, &passage_options()).unwrap();
            let map = phi2(d, &p).unwrap();
            assert!((flow.y - map.y).abs() < 1e-8);
            assert!(principal_angle(flow.x - map.x).abs() < 1e-8);
        }
    }
}
