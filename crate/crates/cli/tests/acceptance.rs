//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit when any criterion fails.
//!
//! Runs without the libtest harness so the report reads top to bottom in criterion order.

use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, PI, SQRT_2};
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use bykov_core::discrepancy::{formula_discrepancy_report, SampleGrid, Verdict};
use bykov_core::ode::localflow::{flow_phi1, flow_phi2, passage_options};
use bykov_core::ode::{divergence_max, equilibria_with_spectrum, integrate, michelson, michelson_ck, SampleBox};
use bykov_core::region::in_region_b;
use bykov_core::reversal::{
    distinct_angles, equidistribution, find_reversal_phases, progression_check, reversal_ladder, reversal_sequence,
};
use bykov_core::sections::{eta, jacobian, phi1, phi2, principal_angle, return_map, MapId, SectionPoint};
use bykov_core::spectra::{class_of_trace, classify, elliptic_strip, find_fixed_points, SearchBox, StabilityClass, CLASS_TOL};
use bykov_core::trace::{segment_closed_form, segment_trace};
use bykov_core::{DiskPoint, GlobalParams, ModelParams, SaddleParams, WallPoint};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

fn ensure(ok: bool, msg: impl Into<String>) -> Result<(), String> {
    if ok { Ok(()) } else { Err(msg.into()) }
}

fn within(elapsed: Duration, limit_s: f64) -> Result<(), String> {
    ensure(
        elapsed.as_secs_f64() < limit_s,
        format!("runtime {:.2}s exceeds {limit_s}s", elapsed.as_secs_f64()),
    )
}

fn params(a1: f64, c1: f64, a2: f64, e2: f64, a: f64) -> ModelParams {
    ModelParams::new(SaddleParams::resonant(a1, c1, a2, e2), GlobalParams { a, rotation: FRAC_PI_2 }).unwrap()
}

fn random_params(rng: &mut ChaCha8Rng) -> ModelParams {
    let mut rate = || 10f64.powf(rng.gen_range(-1.0..1.0));
    let (a1, c1, a2, e2) = (rate(), rate(), rate(), rate());
    let a = rng.gen_range(1.0..4.0);
    let rotation = rng.gen_range(-PI..PI);
    ModelParams::new(SaddleParams::resonant(a1, c1, a2, e2), GlobalParams { a, rotation }).unwrap()
}

fn area_preservation() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let (mut worst_eta, mut worst_r, mut evaluated) = (0.0f64, 0.0f64, 0usize);
    for _ in 0..10 {
        let p = random_params(&mut rng);
        let mut got = 0;
        while got < 1000 {
            let x = rng.gen_range(-PI..PI);
            let y = 10f64.powf(rng.gen_range(-10.0..0.0)) * 0.999 / (p.a() * p.a());
            let pt = SectionPoint::Wall(WallPoint::new(x, y));
            let Ok(jr) = jacobian(MapId::ReturnMap, pt, &p, 1e-9) else {
                continue;
            };
            let je = jacobian(MapId::Eta, pt, &p, 0.0).map_err(|e| e.to_string())?;
            worst_eta = worst_eta.max((je.det() - 1.0).abs());
            worst_r = worst_r.max((jr.det() - 1.0).abs());
            got += 1;
        }
        evaluated += got;
    }
    ensure(worst_eta <= 1e-9, format!("max |det D eta - 1| = {worst_eta:e}"))?;
    ensure(worst_r <= 1e-9, format!("max |det DR - 1| = {worst_r:e}"))?;
    within(start.elapsed(), 5.0)?;
    Ok(format!("{evaluated} points, max deviation eta {worst_eta:.1e}, R {worst_r:.1e}"))
}

fn closed_form_equivalence() -> Outcome {
    let start = Instant::now();
    let sets = [
        params(1.0, 1.0, 1.0, 1.0, 2.0),
        params(1.0, 1.0, 1.0, 1.0, 1.0),
        params(0.5, 2.0, 1.5, 0.7, 1.3),
        params(3.0, 0.4, 0.8, 2.0, 3.0),
        params(1.0, FRAC_1_SQRT_2, 1.0, 1.0, 2.5),
    ];
    let mut worst = 0.0f64;
    let mut count = 0;
    for p in &sets {
        for i in 0..200 {
            let s = (0.999 / (p.a() * p.a())) * 10f64.powf(-10.0 * i as f64 / 199.0);
            let x0 = -1.0 + 2.0 * (i % 7) as f64 / 6.0;
            let cf = segment_closed_form(x0, s, p);
            let direct = eta(WallPoint::new(x0, s), p).map_err(|e| format!("s = {s:e}: {e}"))?;
            worst = worst.max((cf.x - direct.x).abs()).max((cf.y - direct.y).abs());
            count += 1;
        }
    }
    ensure(worst <= 1e-10, format!("max lift distance {worst:e}"))?;
    within(start.elapsed(), 2.0)?;
    Ok(format!("{count} s-values over 5 sets (one with a = 1), max distance {worst:.1e}"))
}

fn local_maps_match_flow() -> Outcome {
    let start = Instant::now();
    let p = ModelParams::figure_caption();
    let opts = passage_options();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let (mut w1, mut w2) = (0.0f64, 0.0f64);
    for _ in 0..100 {
        let w = WallPoint::new(rng.gen_range(-PI..PI), 10f64.powf(rng.gen_range(-6.0..-0.3)));
        let flow = flow_phi1(w, &p, &opts).ok_or("phi1 flow missed the top disk")?;
        let map = phi1(w, &p).map_err(|e| e.to_string())?;
        w1 = w1.max((flow.r - map.r).abs()).max(principal_angle(flow.phi - map.phi).abs());
        let d = DiskPoint::new(rng.gen_range(0.01..0.99), rng.gen_range(-PI..PI));
        let flow = flow_phi2(d, &p, &opts).ok_or("phi2 flow missed the wall")?;
        let map = phi2(d, &p).map_err(|e| e.to_string())?;
        w2 = w2.max((flow.y - map.y).abs()).max(principal_angle(flow.x - map.x).abs());
    }
    ensure(w1 <= 1e-8 && w2 <= 1e-8, format!("phi1 {w1:e}, phi2 {w2:e}"))?;
    within(start.elapsed(), 5.0)?;
    Ok(format!("100 points each, max error phi1 {w1:.1e}, phi2 {w2:.1e}"))
}

fn ratio_law() -> Outcome {
    let sets = [
        params(1.0, 1.0, 1.0, 1.0, 2.0),
        params(1.0, 1.0, 1.5, 1.0, 2.0),
        params(1.0, FRAC_1_SQRT_2, 1.0, 1.0, 2.0),
    ];
    let mut worst = 0.0f64;
    for p in &sets {
        let q = (-PI / p.g1).exp();
        for phi0 in find_reversal_phases(p) {
            let seq = reversal_sequence(phi0, 21, p).map_err(|e| e.to_string())?;
            for w in seq.windows(2) {
                worst = worst.max(((w[1].s_n / w[0].s_n) / q - 1.0).abs());
            }
        }
    }
    ensure(worst <= 1e-12, format!("max relative ratio error {worst:e}"))?;
    Ok(format!("n <= 20 on 3 sets, max relative ratio error {worst:.1e}"))
}

fn progression_law() -> Outcome {
    let start = Instant::now();
    let sets = [
        ("1", params(1.0, 1.0, 1.0, 1.0, 2.0)),
        ("3/2", params(1.0, 1.0, 1.5, 1.0, 2.0)),
        ("1/sqrt2", params(1.0, FRAC_1_SQRT_2, 1.0, 1.0, 2.0)),
    ];
    let mut notes = Vec::new();
    for (name, p) in &sets {
        let phases = find_reversal_phases(p);
        ensure(!phases.is_empty(), format!("gamma = {name}: no reversal phases"))?;
        let step = PI * (1.0 - p.gamma);
        for phi0 in phases {
            let ladder = reversal_ladder(phi0, 21, p).map_err(|e| e.to_string())?;
            let residual = ladder
                .iter()
                .map(|e| (e.x_lift - ladder[0].x_lift - e.n as f64 * step).abs())
                .fold(0.0, f64::max);
            let fit = progression_check(&ladder).map_err(|e| e.to_string())?;
            let slope_err = (fit.slope_fit - step).abs();
            ensure(residual <= 1e-6, format!("gamma = {name}: residual {residual:e}"))?;
            ensure(slope_err <= 1e-8, format!("gamma = {name}: slope error {slope_err:e}"))?;
            notes.push(format!("{name}: {residual:.0e}/{slope_err:.0e}"));
        }
    }
    within(start.elapsed(), 2.0)?;
    Ok(format!("residual/slope error per family {}", notes.join(", ")))
}

fn degenerate_shear() -> Outcome {
    let p = params(1.0, 1.0, 1.0, 1.0, 1.0);
    ensure((p.g2 + 2.0 * p.g1).abs() < 1e-15, "g2 != -2 g1")?;
    let grid: Vec<f64> = (0..1000).map(|i| 0.999 * 10f64.powf(-10.0 * i as f64 / 999.0)).collect();
    let trace = segment_trace(0.3, &grid, &p).map_err(|e| e.to_string())?;
    let xs: Vec<f64> = trace.valid_samples().map(|c| c.point.x).collect();
    ensure(xs.len() == grid.len(), format!("only {} valid samples", xs.len()))?;
    let mean = xs.iter().sum::<f64>() / xs.len() as f64;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / xs.len() as f64;
    ensure(var < 1e-20, format!("variance {var:e}"))?;
    Ok(format!("variance of x along 1000 samples {var:.1e}"))
}

fn density_dichotomy() -> Outcome {
    let start = Instant::now();
    let irrational = params(1.0, FRAC_1_SQRT_2, 1.0, 1.0, 2.0);
    let phi0 = *find_reversal_phases(&irrational).first().ok_or("gamma = 1/sqrt2: no phases")?;
    let mut discrepancies = Vec::new();
    for n in [100, 1000, 10_000] {
        let ladder = reversal_ladder(phi0, n, &irrational).map_err(|e| e.to_string())?;
        discrepancies.push(equidistribution(&ladder, 64).map_err(|e| e.to_string())?.star_discrepancy);
    }
    let rational = params(1.0, 1.0, 1.5, 1.0, 2.0);
    let mut distinct = Vec::new();
    for phi in find_reversal_phases(&rational) {
        let ladder = reversal_ladder(phi, 1000, &rational).map_err(|e| e.to_string())?;
        distinct.push(distinct_angles(&ladder, 1e-8));
    }
    let detail = format!("D* = {:.2e}, {:.2e}, {:.2e}; gamma = 3/2 distinct angles per family {distinct:?}", discrepancies[0], discrepancies[1], discrepancies[2]);
    ensure(discrepancies[2] < 0.02, format!("D*(1e4) = {:e}; {detail}", discrepancies[2]))?;
    ensure(
        discrepancies.windows(2).all(|w| w[1] < w[0]),
        format!("discrepancy not decreasing; {detail}"),
    )?;
    ensure(!distinct.is_empty(), "gamma = 3/2: no reversal phases")?;
    ensure(distinct.iter().all(|&d| d <= 2), format!("gamma = 3/2 yields more than 2 angles; {detail}"))?;
    within(start.elapsed(), 10.0)?;
    Ok(detail)
}

fn region_b() -> Outcome {
    let m = in_region_b(&ModelParams::figure_caption());
    let expected = (-6.06762745781211, -3.0, 2.31762745781211);
    ensure((m.lower - expected.0).abs() <= 1e-5, format!("lower {}", m.lower))?;
    ensure((m.middle - expected.1).abs() <= 1e-5, format!("middle {}", m.middle))?;
    ensure((m.upper - expected.2).abs() <= 1e-5, format!("upper {}", m.upper))?;
    ensure(m.inside, "figure parameters not inside")?;
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for _ in 0..1000 {
        let p = random_params(&mut rng).with_shear(1.0).map_err(|e| e.to_string())?;
        ensure(!in_region_b(&p).inside, format!("a = 1 inside for {:?}", p.saddle))?;
    }
    Ok(format!("bounds ({}, {}, {}), inside; a = 1 outside on 1000 draws", m.lower, m.middle, m.upper))
}

/// Finite-difference oracle: fourth-order central differences of the return map. Returns the
/// trace and an error bound combining truncation, relative to the largest entry, with the
/// rounding of the map values divided by the step.
fn fd_trace(p: WallPoint, params: &ModelParams) -> Option<(f64, f64)> {
    let f = |x: f64, y: f64| return_map(WallPoint::new(x, y), params).ok();
    let d = |g: &dyn Fn(f64) -> Option<WallPoint>, h: f64| -> Option<[f64; 2]> {
        let (p2, p1, m1, m2) = (g(2.0 * h)?, g(h)?, g(-h)?, g(-2.0 * h)?);
        let k = |a: f64, b: f64, c: f64, e: f64| (-a + 8.0 * b - 8.0 * c + e) / (12.0 * h);
        Some([k(p2.x, p1.x, m1.x, m2.x), k(p2.y, p1.y, m1.y, m2.y)])
    };
    let (hx, hy) = (1e-4, 1e-3 * p.y);
    let dx = d(&|h| f(p.x + h, p.y), hx)?;
    let dy = d(&|h| f(p.x, p.y + h), hy)?;
    let image = f(p.x, p.y)?;
    let size = image.x.abs().max(image.y.abs()).max(1.0);
    let largest = dx.iter().chain(&dy).fold(0.0f64, |m, v| m.max(v.abs()));
    let bound = 1e-8 * largest.max(1.0) + 64.0 * f64::EPSILON * size * (1.0 / hx + 1.0 / hy);
    Some((dx[0] + dy[1], bound))
}

fn elliptic_ok(ev: [Complex64; 2]) -> bool {
    ev.iter().all(|l| (l.norm() - 1.0).abs() <= 1e-9) && ev[0] == ev[1].conj()
}

fn classification_soundness() -> Outcome {
    let p = ModelParams::figure_caption();
    let search = find_fixed_points(
        SearchBox { x_min: -PI, x_max: PI, y_min: 1e-6, y_max: 1e-2 },
        24,
        1e-10,
        &p,
    );
    ensure(!search.points.is_empty(), "no fixed points found")?;
    for f in &search.points {
        ensure((f.det - 1.0).abs() <= 1e-9, format!("fixed point det {}", f.det))?;
        if f.class == StabilityClass::Elliptic {
            ensure(elliptic_ok(f.eigenvalues), format!("elliptic fixed point eigenvalues {:?}", f.eigenvalues))?;
        }
    }
    let fixed_elliptic = search.points.iter().filter(|f| f.class == StabilityClass::Elliptic).count();

    // Oracle points: half along the reversal fibers, where the trace is small, half at random.
    let phases = find_reversal_phases(&p);
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut points = Vec::new();
    for i in 0..50 {
        let ln_y = rng.gen_range(-14.0f64..-4.0);
        points.push(WallPoint::new(phases[i % phases.len()] + p.g1 * ln_y, ln_y.exp()));
    }
    while points.len() < 100 {
        points.push(WallPoint::new(rng.gen_range(-PI..PI), 10f64.powf(rng.gen_range(-6.0..-1.0))));
    }
    let (mut agree, mut elliptic_points) = (0, 0);
    for pt in &points {
        let c = classify(*pt, &p).map_err(|e| e.to_string())?;
        ensure((c.det - 1.0).abs() <= 1e-9, format!("det {} at {pt:?}", c.det))?;
        if c.class == StabilityClass::Elliptic {
            elliptic_points += 1;
            ensure(elliptic_ok(c.eigenvalues), format!("elliptic eigenvalues {:?} at {pt:?}", c.eigenvalues))?;
        }
        let (oracle, scale) =
            fd_trace(*pt, &p).ok_or(format!("finite difference left the domain at {pt:?}"))?;
        ensure((oracle - c.trace).abs() <= scale, format!("trace {} vs oracle {oracle} at {pt:?}", c.trace))?;
        // Near the class boundaries the oracle's own error decides nothing.
        if class_of_trace(oracle, CLASS_TOL) == c.class || ((c.trace.abs() - 2.0).abs() <= scale) {
            agree += 1;
        }
    }
    ensure(agree == points.len(), format!("classification agrees at {agree}/100"))?;
    Ok(format!(
        "{} fixed points ({fixed_elliptic} elliptic), 100 oracle points ({elliptic_points} elliptic) agree",
        search.points.len()
    ))
}

fn elliptic_strip_lower_end() -> Outcome {
    let p = ModelParams::figure_caption();
    let phi0 = find_reversal_phases(&p)
        .into_iter()
        .find(|phi| (phi - 1.397).abs() < 1e-3)
        .ok_or("no reversal phase near 1.397")?;
    let strip = elliptic_strip(phi0, 1e-2, &p);
    let lowest = strip.iter().map(|iv| iv.y_lo).fold(f64::INFINITY, f64::min);
    ensure(lowest <= 1e-6, format!("lowest endpoint {lowest:e}; intervals {strip:?}"))?;
    Ok(format!("phi0 = {phi0:.12}, {} interval(s), lowest endpoint {lowest:.2e}", strip.len()))
}

fn michelson_suite() -> Outcome {
    let start = Instant::now();
    let c = michelson_ck();
    let f = michelson(c);
    let div = divergence_max(&f, &SampleBox { lo: [-3.0; 3], hi: [3.0; 3] }, 1000, 11);
    ensure(div <= 1e-9, format!("divergence {div:e}"))?;

    let x = SQRT_2 * c;
    let search = equilibria_with_spectrum(&f, &[[x + 0.2, 0.1, -0.1], [-x - 0.2, -0.1, 0.1]], 1e-13);
    ensure(search.equilibria.len() == 2, format!("{} equilibria", search.equilibria.len()))?;
    let mut c2_minus_2e2 = f64::NAN;
    let mut worst_res = 0.0f64;
    for eq in &search.equilibria {
        let target = if eq.location[0] > 0.0 { x } else { -x };
        let d = (eq.location[0] - target).abs().max(eq.location[1].abs()).max(eq.location[2].abs());
        ensure(d <= 1e-10, format!("equilibrium {:?} off by {d:e}", eq.location))?;
        if eq.location[0] > 0.0 {
            for l in eq.eigenvalues {
                worst_res = worst_res.max((l * l * l + l + SQRT_2 * c).norm());
            }
            let real = eq.eigenvalues.iter().find(|l| l.im == 0.0).ok_or("no real eigenvalue")?;
            let pair = eq.eigenvalues.iter().find(|l| l.im > 0.0).ok_or("no complex pair")?;
            c2_minus_2e2 = (-real.re - 2.0 * pair.re).abs();
        }
    }
    ensure(worst_res <= 1e-10, format!("characteristic residual {worst_res:e}"))?;
    ensure(c2_minus_2e2 <= 1e-9, format!("|C2 - 2 E2| = {c2_minus_2e2:e}"))?;

    let mut worst_closure = 0.0f64;
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for _ in 0..20 {
        let x0 = [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)];
        let fwd = integrate(&f, x0, 2.0, 1e-12, 1e-14, f64::INFINITY);
        let back = integrate(&f, fwd.final_state(), -2.0, 1e-12, 1e-14, f64::INFINITY);
        let end = back.final_state();
        let d = (0..3).map(|i| (end[i] - x0[i]).powi(2)).sum::<f64>().sqrt();
        worst_closure = worst_closure.max(d);
    }
    ensure(worst_closure <= 1e-6, format!("forward-backward closure {worst_closure:e}"))?;
    within(start.elapsed(), 10.0)?;
    Ok(format!(
        "div {div:.1e}, residual {worst_res:.1e}, |C2-2E2| {c2_minus_2e2:.1e}, closure {worst_closure:.1e}"
    ))
}

fn discrepancy_verdicts() -> Outcome {
    let p = ModelParams::figure_caption();
    let r = formula_discrepancy_report(&p, &SampleGrid::standard(200));
    let slope = r.slope_comparison("dxds_derived").ok_or("no derived slope comparison")?;
    ensure(
        slope.verdict == Verdict::Matches && slope.max_rel_deviation <= 1e-5,
        format!("derived slope {} (rel {:e})", slope.verdict, slope.max_rel_deviation),
    )?;
    let printed = r.condition("A_printed=-level").ok_or("no printed condition")?;
    ensure(printed.roots.is_empty(), format!("printed condition has roots {:?}", printed.roots))?;
    ensure(r.oracle_reversal_exists && !r.oracle_phases.is_empty(), "oracle finds no reversals")?;
    Ok(format!(
        "derived slope {} (rel {:.1e}); printed condition: no roots, verdict {}; oracle phases {:?}",
        slope.verdict, slope.max_rel_deviation, printed.verdict, r.oracle_phases
    ))
}

const COMMANDS: [&str; 11] = [
    "params-check",
    "segment-trace",
    "reversals",
    "tangency",
    "cascade",
    "spirals",
    "fixed-points",
    "elliptic-strip",
    "horseshoe",
    "timedelay",
    "discrepancy-report",
];

fn run_all(out: &Path, config: &Path, jobs: &str) -> Result<(), String> {
    for cmd in COMMANDS {
        let o = Command::new(env!("CARGO_BIN_EXE_bykov-atlas"))
            .args([cmd, "--seed", "42", "--jobs", jobs, "--format", "csv,json"])
            .arg("--config")
            .arg(config)
            .arg("--out")
            .arg(out)
            .output()
            .map_err(|e| e.to_string())?;
        ensure(o.status.success(), format!("{cmd} at --jobs {jobs}: {}", String::from_utf8_lossy(&o.stderr)))?;
    }
    Ok(())
}

fn reproducibility() -> Outcome {
    let root = tempfile::tempdir().map_err(|e| e.to_string())?;
    let config = root.path().join("cfg.json");
    std::fs::write(&config, r#"{"alpha1": 1, "C1": 1, "alpha2": 1, "E2": 1, "a": 2, "timedelay": {"N": 41}}"#)
        .map_err(|e| e.to_string())?;
    let dirs = ["j1", "j8", "j8-again"].map(|d| root.path().join(d));
    run_all(&dirs[0], &config, "1")?;
    run_all(&dirs[1], &config, "8")?;
    run_all(&dirs[2], &config, "8")?;
    let mut names: Vec<String> = std::fs::read_dir(&dirs[0])
        .map_err(|e| e.to_string())?
        .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
        .collect();
    names.sort();
    for name in &names {
        let a = std::fs::read(dirs[0].join(name)).map_err(|e| e.to_string())?;
        for other in &dirs[1..] {
            let b = std::fs::read(other.join(name)).map_err(|e| format!("{name}: {e}"))?;
            ensure(a == b, format!("{name} differs between runs"))?;
        }
    }
    ensure(names.len() >= 11, format!("only {} files written", names.len()))?;
    Ok(format!("{} CSV/JSON files identical at --jobs 1, 8, 8", names.len()))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 13] = [
        ("area preservation", area_preservation),
        ("closed-form trace equals composition", closed_form_equivalence),
        ("local maps match flow integration", local_maps_match_flow),
        ("reversal ratio law", ratio_law),
        ("progression law", progression_law),
        ("degenerate shear a = 1", degenerate_shear),
        ("density dichotomy", density_dichotomy),
        ("region B bounds and membership", region_b),
        ("classification soundness", classification_soundness),
        ("elliptic strip reaches y = 0", elliptic_strip_lower_end),
        ("Michelson suite", michelson_suite),
        ("discrepancy report verdicts", discrepancy_verdicts),
        ("reproducibility across worker counts", reproducibility),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = std::panic::catch_unwind(check).unwrap_or_else(|_| Err("panicked".into()));
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS {:>2} {name} ({secs:.2}s): {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL {:>2} {name} ({secs:.2}s): {why}", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
