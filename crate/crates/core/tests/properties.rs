use std::f64::consts::{FRAC_PI_2, PI};

use bykov_core::horseshoe::StripSpec;
use bykov_core::ode::localflow::{flow_phi1, flow_phi2, passage_options};
use bykov_core::ode::{integrate, michelson, michelson_ck};
use bykov_core::region::{in_region_b, rationality_of, RationalityVerdict};
use bykov_core::reversal::{find_reversal_phases, interleave, reversal_ladder, ReversalKind};
use bykov_core::sections::{
    jacobian, phi1, phi2, principal_angle, return_map, shear_angle, stretch, MapId, SectionPoint,
};
use bykov_core::spectra::{classify, StabilityClass};
use bykov_core::trace::{segment_closed_form, segment_trace};
use bykov_core::{DiskPoint, GlobalParams, ModelParams, SaddleParams, WallPoint};
use proptest::prelude::*;

fn rate() -> impl Strategy<Value = f64> {
    (-1.0f64..1.0).prop_map(|e| 10f64.powf(e))
}

prop_compose! {
    fn model()(a1 in rate(), c1 in rate(), a2 in rate(), e2 in rate(), a in 1.0f64..4.0, rot in prop_oneof![Just(FRAC_PI_2), -3.0f64..3.0]) -> ModelParams {
        ModelParams::new(SaddleParams::resonant(a1, c1, a2, e2), GlobalParams { a, rotation: rot }).unwrap()
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn derived_constants(p in model()) {
        prop_assert!(p.g1 > 0.0 && p.g2 < 0.0 && p.gamma > 0.0);
        let s = p.saddle;
        prop_assert_eq!(p.gamma, (s.alpha2 * s.c1) / (s.alpha1 * s.e2));
    }

    #[test]
    fn region_bounds_are_ordered(p in model()) {
        prop_assume!(p.a() > 1.0);
        let m = in_region_b(&p);
        prop_assert!(m.lower < m.upper);
    }

    #[test]
    fn area_is_preserved(p in model(), x in -PI..PI, e in 0.0f64..1.0) {
        let y = (1.0 / (p.a() * p.a())) * 10f64.powf(-10.0 * e) * 0.999;
        let pt = SectionPoint::Wall(WallPoint::new(x, y));
        let d_eta = jacobian(MapId::Eta, pt, &p, 0.0).unwrap().det();
        prop_assert!((d_eta - 1.0).abs() <= 1e-9, "{}", d_eta);
        if let Ok(j) = jacobian(MapId::ReturnMap, pt, &p, 1e-9) {
            prop_assert!((j.det() - 1.0).abs() <= 1e-9);
        }
    }

    #[test]
    fn lift_laws(phi in -10.0f64..10.0, a in 1.0f64..4.0) {
        prop_assert!((shear_angle(phi + PI, a) - shear_angle(phi, a) - PI).abs() < 1e-12);
        prop_assert!((stretch(phi + PI, a) - stretch(phi, a)).abs() <= 1e-12 * stretch(phi, a));
        let c = stretch(phi, a);
        prop_assert!(c >= 1.0 / (a * a) * (1.0 - 1e-15) && c <= a * a * (1.0 + 1e-15));
    }

    #[test]
    fn closed_form_matches_composition(p in model(), x0 in -PI..PI, e in 0.0f64..1.0) {
        let s = (1.0 / p.a()) * 10f64.powf(-8.0 * e) * 0.999;
        let trace = segment_trace(x0, &[s], &p).unwrap();
        let direct = return_map(WallPoint::new(x0, s * s), &p).map(|_| ()).is_ok();
        prop_assert!(direct);
        let cf = segment_closed_form(x0, s, &p);
        prop_assert!((trace.samples[0].point.x - cf.x).abs() <= 1e-10 * cf.x.abs().max(1.0));
    }

    #[test]
    fn ratio_law_and_alternation(p in model()) {
        let phases = find_reversal_phases(&p);
        prop_assume!(!phases.is_empty());
        let q = (-PI / p.g1).exp();
        prop_assume!(q > 0.0);
        let families: Result<Vec<_>, _> = phases.iter().map(|&phi| reversal_ladder(phi, 20, &p)).collect();
        // Early rungs can lie outside the neighbourhood when g1 is large.
        prop_assume!(families.is_ok());
        let families = families.unwrap();
        for fam in &families {
            for w in fam.windows(2) {
                // Relative ratio error equals the log-step error, which carries the rounding of ln s.
                let log_step = w[1].ln_s_n - w[0].ln_s_n;
                prop_assert!((log_step - q.ln()).abs() <= 1e-12 * (1.0 + w[1].ln_s_n.abs()));
            }
        }
        let merged = interleave(&families);
        for w in merged.windows(2) {
            prop_assert!(w[0].kind != w[1].kind);
        }
        prop_assert!(merged.iter().any(|e| e.kind == ReversalKind::Maximum));
    }

    #[test]
    fn progression_law(p in model()) {
        let phases = find_reversal_phases(&p);
        prop_assume!(!phases.is_empty());
        let ladder = reversal_ladder(phases[0], 20, &p);
        prop_assume!(ladder.is_ok());
        let ladder = ladder.unwrap();
        let step = PI * (1.0 - p.gamma);
        for ev in &ladder {
            let r = ev.x_lift - ladder[0].x_lift - ev.n as f64 * step;
            prop_assert!(r.abs() <= 1e-6, "n={} residual {}", ev.n, r);
        }
    }

    #[test]
    fn exact_fractions_are_recovered(p in 1i64..=100, q in 1i64..=100) {
        let r = rationality_of(p as f64 / q as f64, 100, 1e-12);
        let g = gcd(p, q);
        prop_assert_eq!(r.verdict, RationalityVerdict::Rational { p: p / g, q: q / g });
    }

    #[test]
    fn classification_invariants(x in -PI..PI, e in 0.0f64..1.0) {
        let p = ModelParams::figure_caption();
        let pt = WallPoint::new(x, 10f64.powf(-1.0 - 9.0 * e));
        let c = classify(pt, &p).unwrap();
        prop_assert!((c.det - 1.0).abs() <= 1e-9);
        let prod = c.eigenvalues[0] * c.eigenvalues[1];
        let sum = c.eigenvalues[0] + c.eigenvalues[1];
        prop_assert!((prod.re - c.det).abs() <= 1e-9 * c.trace.abs().max(1.0) && prod.im.abs() <= 1e-9);
        prop_assert!((sum.re - c.trace).abs() <= 1e-9 * c.trace.abs().max(1.0));
        if c.class == StabilityClass::Elliptic {
            for l in c.eigenvalues {
                prop_assert!((l.norm() - 1.0).abs() <= 1e-9);
            }
            prop_assert_eq!(c.eigenvalues[0], c.eigenvalues[1].conj());
        }
    }

    #[test]
    fn strips_are_adjacent(k in 0u32..10, y_ref in 1e-6f64..1e-2) {
        let p = ModelParams::figure_caption();
        let a = StripSpec::new(k, y_ref, (-1.0, 1.0), &p);
        let b = StripSpec::new(k + 1, y_ref, (-1.0, 1.0), &p);
        prop_assert!((a.y_range.0 - b.y_range.1).abs() <= 1e-15 * a.y_range.0);
        let ratio = b.y_range.1 / a.y_range.1;
        prop_assert!((ratio / (-2.0 * PI / p.g1).exp() - 1.0).abs() < 1e-12);
    }
}

fn gcd(a: i64, b: i64) -> i64 {
    if b == 0 { a } else { gcd(b, a % b) }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn local_passages_match_flow(x in -PI..PI, e in 0.05f64..1.0, r in 0.01f64..0.99, phi in -PI..PI) {
        let p = ModelParams::figure_caption();
        let w = WallPoint::new(x, 10f64.powf(-6.0 * e));
        let (flow, map) = (flow_phi1(w, &p, &passage_options()).unwrap(), phi1(w, &p).unwrap());
        prop_assert!((flow.r - map.r).abs() < 1e-8);
        prop_assert!(principal_angle(flow.phi - map.phi).abs() < 1e-8);
        let d = DiskPoint::new(r, phi);
        let (flow, map) = (flow_phi2(d, &p, &passage_options()).unwrap(), phi2(d, &p).unwrap());
        prop_assert!((flow.y - map.y).abs() < 1e-8);
        prop_assert!(principal_angle(flow.x - map.x).abs() < 1e-8);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(20))]

    #[test]
    fn michelson_reversibility(x in -1.0f64..1.0, y in -1.0f64..1.0, z in -1.0f64..1.0, t in 0.5f64..5.0) {
        let f = michelson(michelson_ck());
        let fwd = integrate(&f, [x, y, z], t, 1e-12, 1e-14, 10.0);
        let back = integrate(&f, [-x, y, -z], -t, 1e-12, 1e-14, 10.0);
        prop_assert_eq!(fwd.termination, back.termination);
        prop_assert!((fwd.final_time() + back.final_time()).abs() <= 1e-9);
        let (fwd, back) = (fwd.final_state(), back.final_state());
        let mirrored = [-back[0], back[1], -back[2]];
        let d = (0..3).map(|i| (fwd[i] - mirrored[i]).powi(2)).sum::<f64>().sqrt();
        prop_assert!(d <= 1e-6 * fwd.iter().fold(1.0f64, |m, v| m.max(v.abs())), "{}", d);
    }
}
