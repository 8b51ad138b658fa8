//! One function per subcommand. Each builds its tables and documents, then hands them to the
//! context for atomic writing in the requested formats.

use std::collections::BTreeSet;
use std::path::PathBuf;

use anyhow::Result;
use bykov_core::discrepancy::{formula_discrepancy_report, SampleGrid};
use bykov_core::horseshoe::{horseshoe_crossing, StripSpec};
use bykov_core::ode::{
    equilibria_with_spectrum, linear_saddle_field, michelson, time_delay_scan, EscapeTime, FieldSpec, IntegrateOptions,
    LineSpec, Saddle, Vec3,
};
use bykov_core::region::{gamma_rationality, in_region_b, oracle_reversal_exists, region_consistency_report};
use bykov_core::reversal::{find_reversal_phases, reversal_ladder};
use bykov_core::spectra::{elliptic_strip, find_fixed_points, SearchBox};
use bykov_core::tangency::{cascade_scan, spiral_intersections, tangency_search, TangencyCandidate};
use bykov_core::trace::segment_trace;
use bykov_core::{Error, ModelParams, RawParams};
use serde::Serialize;

use crate::config::{log_grid, RunConfig};
use crate::output::{json_document, num, svg_provenance, write_atomic, Provenance, Table};
use crate::svg::{emit_svg, Dataset, PlotKind, Series};
use crate::Format;

pub struct Context {
    pub config: RunConfig,
    pub config_bytes: Vec<u8>,
    pub params: ModelParams,
    pub out: PathBuf,
    pub seed: u64,
    pub formats: BTreeSet<Format>,
}

impl Context {
    fn provenance(&self, command: &str) -> Provenance {
        Provenance::new(command, &self.config_bytes, self.seed)
    }

    fn csv(&self, name: &str, table: &Table, prov: &Provenance) -> Result<()> {
        if self.formats.contains(&Format::Csv) {
            write_atomic(&self.out, name, &table.render(prov)?)?;
        }
        Ok(())
    }

    fn json<T: Serialize>(&self, name: &str, data: &T, prov: &Provenance) -> Result<()> {
        if self.formats.contains(&Format::Json) {
            write_atomic(&self.out, name, &json_document(prov, data)?)?;
        }
        Ok(())
    }

    fn svg(&self, name: &str, dataset: &Dataset, kind: PlotKind, prov: &Provenance) -> Result<()> {
        if self.formats.contains(&Format::Svg) {
            // Render first so an empty dataset leaves no file behind.
            let body = emit_svg(dataset, kind)?;
            let (first, rest) = body.split_once('\n').unwrap_or((&body, ""));
            let doc = format!("{first}\n{}{rest}", svg_provenance(prov));
            write_atomic(&self.out, name, doc.as_bytes())?;
        }
        Ok(())
    }
}

fn b(v: bool) -> String {
    v.to_string()
}

#[derive(Serialize)]
struct ParamsCheck {
    params: RawParams,
    g1: f64,
    g2: f64,
    gamma: f64,
    region_b: bykov_core::region::RegionMembership,
    rationality: bykov_core::region::RationalityReport,
    oracle_reversal_exists: bool,
    reversal_phases: Vec<f64>,
}

pub fn params_check(ctx: &Context) -> Result<String> {
    let p = &ctx.params;
    let block = &ctx.config.region;
    let membership = in_region_b(p);
    let report = ParamsCheck {
        params: RawParams::from(p),
        g1: p.g1,
        g2: p.g2,
        gamma: p.gamma,
        region_b: membership,
        rationality: gamma_rationality(p, block.max_denominator, block.rational_tol),
        oracle_reversal_exists: oracle_reversal_exists(p),
        reversal_phases: find_reversal_phases(p),
    };
    let prov = ctx.provenance("params-check");
    ctx.json("params_check.json", &report, &prov)?;

    let consistency = region_consistency_report(block.samples, ctx.seed);
    let prov_rc = prov.clone().with("samples", block.samples).with("agreement_rate", num(consistency.agreement_rate));
    let mut t = Table::new(&["draw", "alpha1", "C1", "alpha2", "E2", "a", "inB", "oracle_reversal"]);
    for r in &consistency.rows {
        t.row(vec![
            r.draw.to_string(),
            num(r.alpha1),
            num(r.c1),
            num(r.alpha2),
            num(r.e2),
            num(r.a),
            b(r.in_b),
            b(r.oracle_reversal),
        ]);
    }
    ctx.csv("region_consistency.csv", &t, &prov_rc)?;

    Ok(format!(
        "region B bounds: lower {} middle {} upper {} inside {}\ngamma {} ({})\nreversals {}",
        num(membership.lower),
        num(membership.middle),
        num(membership.upper),
        membership.inside,
        num(p.gamma),
        match report.rationality.verdict {
            bykov_core::region::RationalityVerdict::Rational { p, q } => format!("rational {p}/{q}"),
            bykov_core::region::RationalityVerdict::NoRationalBelowBound => "no rational below bound".into(),
        },
        report.oracle_reversal_exists
    ))
}

pub fn segment_trace_cmd(ctx: &Context) -> Result<String> {
    let seg = &ctx.config.segment;
    let trace = segment_trace(seg.x0, &seg.grid(), &ctx.params)?;
    let prov = ctx
        .provenance("segment-trace")
        .with("x0", num(seg.x0))
        .with("s_range", format!("{} {}", num(seg.s_min), num(seg.s_max)))
        .with("n", seg.n);
    let mut t = Table::new(&["s", "x_lift", "y", "dxds", "valid"]);
    for c in &trace.samples {
        t.row(vec![num(c.s), num(c.point.x), num(c.point.y), num(c.dxds), b(c.valid)]);
    }
    ctx.csv("segment_trace.csv", &t, &prov)?;
    let curve = |name: &str, f: &dyn Fn(&bykov_core::trace::CurveSample) -> f64| Series {
        name: name.into(),
        points: trace.valid_samples().map(|c| [c.s, f(c)]).collect(),
    };
    ctx.svg(
        "segment_trace_y.svg",
        &Dataset {
            title: "exit height along the segment".into(),
            x_label: "s".into(),
            y_label: "y".into(),
            series: vec![curve("y(s)", &|c| c.point.y)],
        },
        PlotKind::Curve,
        &prov,
    )?;
    ctx.svg(
        "segment_trace_x.svg",
        &Dataset {
            title: "lifted exit angle along the segment".into(),
            x_label: "s".into(),
            y_label: "x_lift".into(),
            series: vec![curve("x(s)", &|c| c.point.x)],
        },
        PlotKind::Curve,
        &prov,
    )?;
    Ok(format!("{} samples, {} valid", trace.len(), trace.valid_samples().count()))
}

pub fn reversals(ctx: &Context, n_max: Option<usize>) -> Result<String> {
    let n_max = n_max.unwrap_or(ctx.config.reversals.n_max);
    let phases = find_reversal_phases(&ctx.params);
    if phases.is_empty() {
        return Err(Error::NoReversals.into());
    }
    let prov = ctx.provenance("reversals").with("n_max", n_max);
    let mut t = Table::new(&["n", "s_n", "phi_n", "x_lift", "x_mod2pi", "kind"]);
    let mut series = Vec::new();
    for (k, &phi0) in phases.iter().enumerate() {
        let ladder = reversal_ladder(phi0, n_max, &ctx.params)?;
        for e in &ladder {
            t.row(vec![
                e.n.to_string(),
                num(e.s_n),
                num(e.phi_n),
                num(e.x_lift),
                num(e.x_mod_tau()),
                e.kind.to_string(),
            ]);
        }
        series.push(Series {
            name: format!("family {k} ({})", ladder.first().map(|e| e.kind.to_string()).unwrap_or_default()),
            points: ladder.iter().map(|e| [e.n as f64, e.x_lift]).collect(),
        });
    }
    ctx.csv("reversals.csv", &t, &prov)?;
    ctx.svg(
        "reversals.svg",
        &Dataset {
            title: "reversal ladder".into(),
            x_label: "n".into(),
            y_label: "x_lift".into(),
            series,
        },
        PlotKind::Ladder,
        &prov,
    )?;
    Ok(format!("{} families, {} rows", phases.len(), t.len()))
}

fn candidate_table(lists: &[Vec<TangencyCandidate>]) -> Table {
    let mut t = Table::new(&["order", "n", "distance", "x", "y", "arclen"]);
    for c in lists.iter().flatten() {
        t.row(vec![
            c.order.to_string(),
            c.event.n.to_string(),
            num(c.circular_distance),
            num(c.contact_point.x),
            num(c.contact_point.y),
            num(c.arclen),
        ]);
    }
    t
}

pub fn tangency(ctx: &Context) -> Result<String> {
    let blk = &ctx.config.tangency;
    let phases = find_reversal_phases(&ctx.params);
    let found = tangency_search(blk.stable_line_x, &phases, blk.n_max, blk.tol_angle, &ctx.params)?;
    let prov = ctx
        .provenance("tangency")
        .with("stable_line_x", num(blk.stable_line_x))
        .with("n_max", blk.n_max)
        .with("tol_angle", num(blk.tol_angle));
    let t = candidate_table(&[found]);
    ctx.csv("candidates.csv", &t, &prov)?;
    Ok(format!("{} candidates", t.len()))
}

pub fn cascade(ctx: &Context) -> Result<String> {
    let blk = &ctx.config.cascade;
    let grid = log_grid(blk.s_min, blk.s_max, blk.n);
    let lists = cascade_scan(blk.k_max, blk.x0, &grid, blk.stable_line_x, blk.tol_angle, &ctx.params)?;
    let prov = ctx
        .provenance("cascade")
        .with("k_max", blk.k_max)
        .with("x0", num(blk.x0))
        .with("s_range", format!("{} {}", num(blk.s_min), num(blk.s_max)))
        .with("n", blk.n)
        .with("stable_line_x", num(blk.stable_line_x))
        .with("tol_angle", num(blk.tol_angle));
    let t = candidate_table(&lists);
    ctx.csv("candidates.csv", &t, &prov)?;
    let counts: Vec<String> = lists.iter().map(|l| l.len().to_string()).collect();
    Ok(format!("candidates per order: {}", counts.join(" ")))
}

pub fn spirals(ctx: &Context) -> Result<String> {
    let blk = &ctx.config.spirals;
    let hits = spiral_intersections(blk.stable, blk.unstable, blk.samples, &ctx.params)?;
    let prov = ctx.provenance("spirals").with("samples", blk.samples);
    let mut t = Table::new(&["r", "phi", "angle_between", "tangential", "s_stable", "s_unstable"]);
    for h in &hits {
        t.row(vec![
            num(h.point.r),
            num(h.point.phi),
            num(h.angle_between),
            b(h.tangential),
            num(h.s_stable),
            num(h.s_unstable),
        ]);
    }
    ctx.csv("spirals.csv", &t, &prov)?;
    Ok(format!("{} intersections", hits.len()))
}

pub fn fixed_points(ctx: &Context) -> Result<String> {
    let blk = &ctx.config.fixed_points;
    let search = find_fixed_points(
        SearchBox {
            x_min: blk.x_min,
            x_max: blk.x_max,
            y_min: blk.y_min,
            y_max: blk.y_max,
        },
        blk.grid,
        blk.tol,
        &ctx.params,
    );
    let prov = ctx
        .provenance("fixed-points")
        .with("grid", blk.grid)
        .with("tol", num(blk.tol))
        .with(
            "box",
            format!("{} {} {} {}", num(blk.x_min), num(blk.x_max), num(blk.y_min), num(blk.y_max)),
        );
    let mut t = Table::new(&["x", "y", "residual", "det", "trace", "class"]);
    for f in &search.points {
        t.row(vec![
            num(f.point.x),
            num(f.point.y),
            num(f.residual),
            num(f.det),
            num(f.trace),
            f.class.to_string(),
        ]);
    }
    ctx.csv("fixed_points.csv", &t, &prov)?;
    ctx.json("fixed_points.json", &search, &prov)?;
    Ok(format!(
        "{} fixed points from {} seeds ({} dropped, {} unconverged)",
        search.points.len(),
        search.seeds,
        search.dropped,
        search.unconverged
    ))
}

pub fn elliptic_strip_cmd(ctx: &Context) -> Result<String> {
    let blk = &ctx.config.elliptic_strip;
    let phases = match blk.phi0 {
        Some(phi) => vec![phi],
        None => {
            let found = find_reversal_phases(&ctx.params);
            if found.is_empty() {
                return Err(Error::NoReversals.into());
            }
            found
        }
    };
    let prov = ctx.provenance("elliptic-strip").with("y_max", num(blk.y_max));
    let mut t = Table::new(&["phi0", "y_lo", "y_hi"]);
    for phi in phases {
        for iv in elliptic_strip(phi, blk.y_max, &ctx.params) {
            t.row(vec![num(phi), num(iv.y_lo), num(iv.y_hi)]);
        }
    }
    ctx.csv("elliptic_strip.csv", &t, &prov)?;
    Ok(format!("{} intervals", t.len()))
}

pub fn horseshoe(ctx: &Context) -> Result<String> {
    let blk = &ctx.config.horseshoe;
    if !(blk.y_ref > 0.0 && blk.y_ref <= 1.0) {
        return Err(Error::InvalidInput(format!("y_ref = {} must lie in (0, 1]", blk.y_ref)).into());
    }
    let strip = StripSpec::new(blk.k, blk.y_ref, (blk.x_min, blk.x_max), &ctx.params);
    let report = horseshoe_crossing(strip, &ctx.params);
    let prov = ctx
        .provenance("horseshoe")
        .with("crossing", report.crossing)
        .with("escaped_fraction", num(report.escaped_fraction))
        .with("expansion_estimate", num(report.expansion_estimate))
        .with("heuristic", report.heuristic);
    let mut t = Table::new(&["arc", "s", "x_in", "y_in", "x_out", "y_out", "escaped"]);
    for e in &report.evidence {
        let (xo, yo) = e.image.map_or((f64::NAN, f64::NAN), |q| (q.x, q.y));
        t.row(vec![
            format!("{:?}", e.arc).to_lowercase(),
            num(e.t),
            num(e.source.x),
            num(e.source.y),
            num(xo),
            num(yo),
            b(e.image.is_none()),
        ]);
    }
    ctx.csv("strip_evidence.csv", &t, &prov)?;
    #[derive(Serialize)]
    struct Summary<'a> {
        strip: StripSpec,
        crossing: bool,
        reason: &'a Option<String>,
        escaped_fraction: f64,
        expansion_estimate: f64,
        heuristic: &'a str,
    }
    ctx.json(
        "horseshoe.json",
        &Summary {
            strip: report.strip,
            crossing: report.crossing,
            reason: &report.reason,
            escaped_fraction: report.escaped_fraction,
            expansion_estimate: report.expansion_estimate,
            heuristic: report.heuristic,
        },
        &prov,
    )?;
    Ok(match &report.reason {
        None => "strip crosses itself (heuristic)".into(),
        Some(r) => format!("no crossing: {r}"),
    })
}

fn field_for(ctx: &Context) -> Result<FieldSpec> {
    let blk = &ctx.config.timedelay;
    match blk.field.as_str() {
        "michelson" => Ok(michelson(blk.michelson_c())),
        "linear-sigma1" => Ok(linear_saddle_field(&ctx.params.saddle, Saddle::Sigma1)),
        "linear-sigma2" => Ok(linear_saddle_field(&ctx.params.saddle, Saddle::Sigma2)),
        other => Err(Error::InvalidInput(format!(
            "unknown field `{other}` (expected michelson, linear-sigma1 or linear-sigma2)"
        ))
        .into()),
    }
}

fn escape_fields(e: EscapeTime) -> (String, bool) {
    match e {
        EscapeTime::Escaped { t } | EscapeTime::StepUnderflow { t } => (num(t), false),
        EscapeTime::Bounded => (String::new(), true),
    }
}

pub fn timedelay(ctx: &Context) -> Result<String> {
    let blk = &ctx.config.timedelay;
    let field = field_for(ctx)?;
    let (p0, p1) = match blk.field.as_str() {
        "michelson" => {
            // Through the equilibrium at +sqrt(2)·c, where the delays blow up.
            let x = std::f64::consts::SQRT_2 * blk.michelson_c();
            (blk.p0.unwrap_or([x, -1.0, 0.0]), blk.p1.unwrap_or([x, 1.0, 0.0]))
        }
        _ => (blk.p0.unwrap_or([-0.5, 0.0, 0.5]), blk.p1.unwrap_or([0.5, 0.0, 0.5])),
    };
    let opts = IntegrateOptions {
        rel_tol: blk.rel_tol,
        abs_tol: blk.abs_tol,
        ..IntegrateOptions::default()
    };
    let line = LineSpec { p0, p1, n: blk.n };
    let profile = time_delay_scan(&field, &line, blk.r, blk.t_max, blk.spike_factor, &opts)?;

    let mut prov = ctx
        .provenance("timedelay")
        .with("field", &field.name)
        .with("r", num(blk.r))
        .with("t_max", num(blk.t_max))
        .with("rel_tol", num(blk.rel_tol))
        .with("abs_tol", num(blk.abs_tol))
        .with("spike_factor", num(blk.spike_factor));
    for (k, v) in &field.parameters {
        prov = prov.with(&format!("param.{k}"), num(*v));
    }

    let mut t = Table::new(&["index", "x0x", "x0y", "x0z", "Tplus", "Tminus", "bounded_plus", "bounded_minus"]);
    for (i, s) in profile.samples.iter().enumerate() {
        let (tp, bp) = escape_fields(s.t_plus);
        let (tm, bm) = escape_fields(s.t_minus);
        t.row(vec![i.to_string(), num(s.x0[0]), num(s.x0[1]), num(s.x0[2]), tp, tm, b(bp), b(bm)]);
    }
    ctx.csv("timedelay.csv", &t, &prov)?;

    let seeds: Vec<Vec3> = match blk.field.as_str() {
        "michelson" => {
            let x = std::f64::consts::SQRT_2 * blk.michelson_c();
            vec![[x + 0.1, 0.1, -0.1], [-x - 0.1, -0.1, 0.1]]
        }
        _ => vec![[0.1, 0.1, 0.1]],
    };
    let search = equilibria_with_spectrum(&field, &seeds, 1e-12);
    ctx.json("equilibria.json", &search, &prov)?;
    ctx.json("timedelay.json", &profile, &prov)?;

    let idx = |d| -> Vec<[f64; 2]> {
        profile
            .delays(d)
            .into_iter()
            .enumerate()
            .map(|(i, v)| [i as f64, v])
            .collect()
    };
    ctx.svg(
        "timedelay.svg",
        &Dataset {
            title: format!("time-delay profile ({})", field.name),
            x_label: "sample index".into(),
            y_label: "escape time".into(),
            series: vec![
                Series {
                    name: "T+".into(),
                    points: idx(bykov_core::ode::Direction::Forward),
                },
                Series {
                    name: "T-".into(),
                    points: idx(bykov_core::ode::Direction::Backward),
                },
            ],
        },
        PlotKind::Profile,
        &prov,
    )?;
    Ok(format!(
        "{} samples, {} spikes, {} equilibria",
        profile.samples.len(),
        profile.spikes.len(),
        search.equilibria.len()
    ))
}

pub fn discrepancy_report(ctx: &Context) -> Result<String> {
    let n_s = ctx.config.discrepancy.n_s;
    let report = formula_discrepancy_report(&ctx.params, &SampleGrid::standard(n_s));
    let prov = ctx.provenance("discrepancy-report").with("n_s", n_s);
    ctx.json("discrepancy_report.json", &report, &prov)?;
    let mut lines: Vec<String> = report
        .slope
        .iter()
        .chain(&report.trace)
        .map(|c| format!("{} vs {}: {}", c.formula, c.reference, c.verdict))
        .collect();
    lines.extend(
        report
            .reversal_condition
            .iter()
            .map(|c| format!("{}: {} roots, {}", c.formula, c.roots.len(), c.verdict)),
    );
    Ok(lines.join("\n"))
}
