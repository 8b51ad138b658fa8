//! Heuristic check that the return map folds a thin horizontal strip across itself.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::params::ModelParams;
use crate::sections::{jacobian, return_map, MapId, SectionPoint, WallPoint};

pub const ARC_SAMPLES: usize = 1000;
/// Escaping fraction above which the strip is declared unusable.
pub const MAX_ESCAPE_FRACTION: f64 = 0.1;

/// Strip `x_range × [y_lo, y_hi]` between consecutive fundamental heights
/// `y_ref·exp(-2πk/g1)` and `y_ref·exp(-2π(k+1)/g1)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StripSpec {
    pub k: u32,
    pub x_range: (f64, f64),
    pub y_range: (f64, f64),
}

impl StripSpec {
    pub fn new(k: u32, y_ref: f64, x_range: (f64, f64), params: &ModelParams) -> Self {
        let step = std::f64::consts::TAU / params.g1;
        let y_hi = y_ref * (-step * k as f64).exp();
        let y_lo = y_ref * (-step * (k as f64 + 1.0)).exp();
        Self {
            k,
            x_range,
            y_range: (y_lo, y_hi),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Arc {
    Bottom,
    Top,
    Left,
    Right,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundarySample {
    pub arc: Arc,
    pub t: f64,
    pub source: WallPoint,
    pub image: Option<WallPoint>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HorseshoeReport {
    pub strip: StripSpec,
    pub crossing: bool,
    pub reason: Option<String>,
    pub escaped_fraction: f64,
    /// Median of `σ_max/σ_min` of the return-map Jacobian over an interior grid.
    pub expansion_estimate: f64,
    pub heuristic: &'static str,
    pub evidence: Vec<BoundarySample>,
}

fn arc_point(strip: &StripSpec, arc: Arc, t: f64) -> WallPoint {
    let (x0, x1) = strip.x_range;
    let (y0, y1) = strip.y_range;
    let x = x0 + (x1 - x0) * t;
    let y = (y0.ln() + (y1.ln() - y0.ln()) * t).exp();
    match arc {
        Arc::Bottom => WallPoint::new(x, y0),
        Arc::Top => WallPoint::new(x, y1),
        Arc::Left => WallPoint::new(x0, y),
        Arc::Right => WallPoint::new(x1, y),
    }
}

fn median(mut v: Vec<f64>) -> f64 {
    if v.is_empty() {
        return f64::NAN;
    }
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Samples the four boundary arcs and tests whether the image of each horizontal arc passes through
/// the strip height while the whole boundary image stays inside the strip's `x_range`.
pub fn horseshoe_crossing(strip: StripSpec, params: &ModelParams) -> HorseshoeReport {
    let evidence: Vec<BoundarySample> = [Arc::Bottom, Arc::Top, Arc::Left, Arc::Right]
        .into_par_iter()
        .flat_map_iter(|arc| {
            (0..ARC_SAMPLES).map(move |i| {
                let t = i as f64 / (ARC_SAMPLES - 1) as f64;
                let source = arc_point(&strip, arc, t);
                BoundarySample {
                    arc,
                    t,
                    source,
                    image: return_map(source, params).ok(),
                }
            })
        })
        .collect();

    let escaped = evidence.iter().filter(|s| s.image.is_none()).count();
    let escaped_fraction = escaped as f64 / evidence.len() as f64;

    let grid = 32;
    let ratios: Vec<f64> = (0..grid * grid)
        .into_par_iter()
        .filter_map(|idx| {
            let (i, j) = (idx / grid, idx % grid);
            let tx = (i as f64 + 0.5) / grid as f64;
            let ty = (j as f64 + 0.5) / grid as f64;
            let p = WallPoint::new(arc_point(&strip, Arc::Bottom, tx).x, arc_point(&strip, Arc::Left, ty).y);
            let jac = jacobian(MapId::ReturnMap, SectionPoint::Wall(p), params, 0.0).ok()?;
            let (big, small) = jac.singular_values();
            (small > 0.0).then(|| big / small)
        })
        .collect();
    let expansion_estimate = median(ratios);

    let (crossing, reason) = if escaped_fraction > MAX_ESCAPE_FRACTION {
        (false, Some(format!("{:.1}% of boundary samples escape the section", 100.0 * escaped_fraction)))
    } else {
        judge(&strip, &evidence)
    };

    HorseshoeReport {
        strip,
        crossing,
        reason,
        escaped_fraction,
        expansion_estimate,
        heuristic: "boundary-sampling heuristic; not a proof of a horseshoe",
        evidence,
    }
}

fn judge(strip: &StripSpec, evidence: &[BoundarySample]) -> (bool, Option<String>) {
    let (x0, x1) = strip.x_range;
    let (y0, y1) = strip.y_range;
    for arc in [Arc::Bottom, Arc::Top] {
        let images: Vec<Option<WallPoint>> = evidence.iter().filter(|s| s.arc == arc).map(|s| s.image).collect();
        // A continuous pass through the strip height, not a jump across the ±π cut.
        let passes = images.windows(2).any(|w| match (w[0], w[1]) {
            (Some(a), Some(b)) => {
                let (lo, hi) = if a.y < b.y { (a.y, b.y) } else { (b.y, a.y) };
                lo < y0 && hi > y1 && hi - lo < std::f64::consts::PI
            }
            _ => false,
        });
        if !passes {
            return (false, Some(format!("image of the {arc:?} arc does not pass through the strip height").to_lowercase()));
        }
    }
    let inside = evidence
        .iter()
        .filter_map(|s| s.image)
        .all(|q| q.x >= x0.min(x1) && q.x <= x0.max(x1));
    if !inside {
        return (false, Some("boundary image leaves the strip's x-range".into()));
    }
    (true, None)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn strip_heights_are_one_winding_apart() {
        let p = ModelParams::figure_caption();
        let s = StripSpec::new(2, 1e-3, (-0.01, 0.0), &p);
        let ratio = s.y_range.1 / s.y_range.0;
        assert!((ratio.ln() - std::f64::consts::TAU / p.g1).abs() < 1e-12);
    }

    #[test]
    fn figure_strip_crosses() {
        let p = ModelParams::figure_caption();
        let s = StripSpec::new(0, 1e-4, (-std::f64::consts::PI, std::f64::consts::PI), &p);
        let r = horseshoe_crossing(s, &p);
        assert!(r.crossing, "{:?}", r.reason);
        assert_eq!(r.evidence.len(), 4 * ARC_SAMPLES);
        assert!(r.expansion_estimate > 1.0);
    }

    #[test]
    fn high_strip_escapes() {
        let p = ModelParams::figure_caption();
        let s = StripSpec {
            k: 0,
            x_range: (0.0, 1.0),
            y_range: (0.9, 1.0),
        };
        let r = horseshoe_crossing(s, &p);
        assert!(!r.crossing);
        assert!(r.reason.unwrap().contains("escape"));
    }

    #[test]
    fn misplaced_x_range_is_rejected() {
        let p = ModelParams::figure_caption();
        let s = StripSpec::new(0, 1e-4, (1.0, 2.0), &p);
        let r = horseshoe_crossing(s, &p);
        assert!(!r.crossing);
    }
}
