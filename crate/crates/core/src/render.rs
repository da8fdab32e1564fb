//! Sampling plots on a time grid, class envelope bands, and SVG/JSON/CSV
//! output. All output is byte-deterministic for identical input.

use std::fmt::Write as _;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::andrews::{AndrewsBasis, ObjectiveSummary};
use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::pca::PcaModel;

pub const DEFAULT_SAMPLES: usize = 512;

/// Categorical palette, assigned to labels in order of first appearance.
pub const PALETTE: [&str; 8] = ["#4e79a7", "#f28e2b", "#e15759", "#76b7b2", "#59a14f", "#edc948", "#b07aa1", "#ff9da7"];

/// Sampled plots: `curves[i][j]` is the plot of point `i` at `t[j]`.
#[derive(Debug, Clone, PartialEq)]
pub struct CurveSet {
    pub t: Vec<f64>,
    pub curves: Vec<Vec<f64>>,
    pub labels: Option<Vec<String>>,
    pub point_ids: Vec<String>,
}

/// Pointwise envelope of one class.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Band {
    pub label: String,
    pub upper: Vec<f64>,
    pub lower: Vec<f64>,
}

/// Inclusive uniform grid `i/(T−1)` on `[0, 1]`.
pub fn grid(samples: usize) -> Result<Vec<f64>> {
    if samples < 2 {
        return Err(Error::InvalidArgument(format!("need at least 2 samples, got {samples}")));
    }
    let last = (samples - 1) as f64;
    Ok((0..samples).map(|i| i as f64 / last).collect())
}

impl CurveSet {
    pub fn len(&self) -> usize {
        self.curves.len()
    }

    pub fn is_empty(&self) -> bool {
        self.curves.is_empty()
    }

    /// Distinct labels in order of first appearance.
    pub fn distinct_labels(&self) -> Vec<String> {
        let mut out: Vec<String> = Vec::new();
        for l in self.labels.iter().flatten() {
            if !out.contains(l) {
                out.push(l.clone());
            }
        }
        out
    }

    pub fn label(&self, i: usize) -> Option<&str> {
        self.labels.as_ref().map(|l| l[i].as_str())
    }
}

/// Samples the plot of every point of `ds` at `samples` grid points.
pub fn sample(basis: &AndrewsBasis, model: &PcaModel, ds: &Dataset, samples: usize) -> Result<CurveSet> {
    let t = grid(samples)?;
    let d = basis.dim();
    if model.dim() != d {
        return Err(Error::DimensionMismatch { expected: model.dim(), found: d });
    }
    if ds.dim() != d {
        return Err(Error::DimensionMismatch { expected: d, found: ds.dim() });
    }
    let values = DMatrix::from_fn(d, samples, |k, j| basis.functions()[k].eval_periodic(t[j]));
    let mut centered = ds.features().clone();
    for mut col in centered.column_iter_mut() {
        col -= model.mean();
    }
    // n × T
    let sampled = centered.tr_mul(model.u()) * values;
    let curves = sampled.row_iter().map(|r| r.iter().copied().collect()).collect();
    Ok(CurveSet { t, curves, labels: ds.labels().map(<[String]>::to_vec), point_ids: ds.point_ids().to_vec() })
}

/// Pointwise max/min over the curves carrying `label`.
pub fn envelope(cs: &CurveSet, label: &str) -> Result<Band> {
    let members: Vec<&Vec<f64>> = match &cs.labels {
        Some(labels) => cs.curves.iter().zip(labels).filter(|(_, l)| *l == label).map(|(c, _)| c).collect(),
        None => Vec::new(),
    };
    if members.is_empty() {
        return Err(Error::InvalidArgument(format!("no curve carries label {label:?}")));
    }
    let mut upper = members[0].clone();
    let mut lower = members[0].clone();
    for c in &members[1..] {
        for (j, v) in c.iter().enumerate() {
            upper[j] = upper[j].max(*v);
            lower[j] = lower[j].min(*v);
        }
    }
    Ok(Band { label: label.to_string(), upper, lower })
}

/// One band per label, in order of first appearance.
pub fn envelopes(cs: &CurveSet) -> Vec<Band> {
    cs.distinct_labels().iter().filter_map(|l| envelope(cs, l).ok()).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct StyleOptions {
    pub width: f64,
    pub height: f64,
    pub title: Option<String>,
    pub draw_curves: bool,
    pub stroke_width: f64,
    pub curve_opacity: f64,
    pub band_opacity: f64,
}

impl Default for StyleOptions {
    fn default() -> Self {
        StyleOptions {
            width: 800.0,
            height: 500.0,
            title: None,
            draw_curves: true,
            stroke_width: 1.0,
            curve_opacity: 0.6,
            band_opacity: 0.25,
        }
    }
}

const MARGIN_LEFT: f64 = 80.0;
const MARGIN_RIGHT: f64 = 130.0;
const MARGIN_TOP: f64 = 40.0;
const MARGIN_BOTTOM: f64 = 50.0;

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

/// Standalone SVG 1.1 document: bands as filled regions, curves as
/// polylines colored by label, axes with ticks and a legend.
pub fn emit_svg(cs: &CurveSet, bands: Option<&[Band]>, style: &StyleOptions) -> Vec<u8> {
    let bands = bands.unwrap_or(&[]);
    let mut order = cs.distinct_labels();
    for b in bands {
        if !order.contains(&b.label) {
            order.push(b.label.clone());
        }
    }
    let color = |label: Option<&str>| -> &'static str {
        label.and_then(|l| order.iter().position(|o| o == l)).map_or(PALETTE[0], |i| PALETTE[i % PALETTE.len()])
    };

    let values = cs.curves.iter().filter(|_| style.draw_curves).flatten();
    let band_values = bands.iter().flat_map(|b| b.upper.iter().chain(&b.lower));
    let (mut lo, mut hi) =
        values.chain(band_values).fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(*v), hi.max(*v)));
    if !lo.is_finite() || !hi.is_finite() {
        (lo, hi) = (-1.0, 1.0);
    } else if hi - lo <= f64::EPSILON * hi.abs().max(1.0) {
        (lo, hi) = (lo - 1.0, hi + 1.0);
    } else {
        let pad = 0.05 * (hi - lo);
        (lo, hi) = (lo - pad, hi + pad);
    }

    let plot_w = style.width - MARGIN_LEFT - MARGIN_RIGHT;
    let plot_h = style.height - MARGIN_TOP - MARGIN_BOTTOM;
    let px = |t: f64| MARGIN_LEFT + t * plot_w;
    let py = |v: f64| MARGIN_TOP + (hi - v) / (hi - lo) * plot_h;

    let mut out = String::new();
    out.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
    let _ = writeln!(
        out,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"{w:.6}\" height=\"{h:.6}\" viewBox=\"0.000000 0.000000 {w:.6} {h:.6}\">",
        w = style.width,
        h = style.height
    );
    out.push_str("<rect x=\"0.000000\" y=\"0.000000\" width=\"100%\" height=\"100%\" fill=\"white\"/>\n");
    if let Some(title) = &style.title {
        let _ = writeln!(
            out,
            "<text x=\"{:.6}\" y=\"{:.6}\" font-family=\"sans-serif\" font-size=\"16.000000\" text-anchor=\"middle\">{}</text>",
            MARGIN_LEFT + plot_w / 2.0,
            MARGIN_TOP / 2.0 + 6.0,
            escape(title)
        );
    }

    out.push_str("<g class=\"bands\" stroke=\"none\">\n");
    for b in bands {
        let mut d = String::new();
        for (j, (t, v)) in cs.t.iter().zip(&b.upper).enumerate() {
            let _ = write!(d, "{}{:.6},{:.6} ", if j == 0 { "M" } else { "L" }, px(*t), py(*v));
        }
        for (t, v) in cs.t.iter().zip(&b.lower).rev() {
            let _ = write!(d, "L{:.6},{:.6} ", px(*t), py(*v));
        }
        d.push('Z');
        let _ = writeln!(
            out,
            "<path data-label=\"{}\" fill=\"{}\" fill-opacity=\"{:.6}\" d=\"{}\"/>",
            escape(&b.label),
            color(Some(&b.label)),
            style.band_opacity,
            d
        );
    }
    out.push_str("</g>\n");

    if style.draw_curves {
        let _ = writeln!(
            out,
            "<g class=\"curves\" fill=\"none\" stroke-width=\"{:.6}\" stroke-opacity=\"{:.6}\">",
            style.stroke_width, style.curve_opacity
        );
        for (i, c) in cs.curves.iter().enumerate() {
            let mut pts = String::new();
            for (t, v) in cs.t.iter().zip(c) {
                if !pts.is_empty() {
                    pts.push(' ');
                }
                let _ = write!(pts, "{:.6},{:.6}", px(*t), py(*v));
            }
            let _ = writeln!(
                out,
                "<polyline data-id=\"{}\" stroke=\"{}\" points=\"{}\"/>",
                escape(&cs.point_ids[i]),
                color(cs.label(i)),
                pts
            );
        }
        out.push_str("</g>\n");
    }

    // axes
    let (x0, x1, y0, y1) = (px(0.0), px(1.0), py(lo), py(hi));
    out.push_str("<g class=\"axes\" stroke=\"black\" stroke-width=\"1.000000\" font-family=\"sans-serif\" font-size=\"11.000000\">\n");
    let _ = writeln!(out, "<line x1=\"{x0:.6}\" y1=\"{y0:.6}\" x2=\"{x1:.6}\" y2=\"{y0:.6}\"/>");
    let _ = writeln!(out, "<line x1=\"{x0:.6}\" y1=\"{y0:.6}\" x2=\"{x0:.6}\" y2=\"{y1:.6}\"/>");
    for i in 0..=4 {
        let t = i as f64 / 4.0;
        let x = px(t);
        let _ = writeln!(out, "<line x1=\"{x:.6}\" y1=\"{y0:.6}\" x2=\"{x:.6}\" y2=\"{:.6}\"/>", y0 + 5.0);
        let _ = writeln!(
            out,
            "<text stroke=\"none\" x=\"{x:.6}\" y=\"{:.6}\" text-anchor=\"middle\">{t:.6}</text>",
            y0 + 18.0
        );
    }
    for i in 0..=4 {
        let v = lo + (hi - lo) * i as f64 / 4.0;
        let y = py(v);
        let _ = writeln!(out, "<line x1=\"{:.6}\" y1=\"{y:.6}\" x2=\"{x0:.6}\" y2=\"{y:.6}\"/>", x0 - 5.0);
        let _ = writeln!(
            out,
            "<text stroke=\"none\" x=\"{:.6}\" y=\"{:.6}\" text-anchor=\"end\">{v:.6}</text>",
            x0 - 8.0,
            y + 4.0
        );
    }
    let _ = writeln!(
        out,
        "<text stroke=\"none\" x=\"{:.6}\" y=\"{:.6}\" text-anchor=\"middle\">t</text>",
        MARGIN_LEFT + plot_w / 2.0,
        y0 + 38.0
    );
    out.push_str("</g>\n");

    if !order.is_empty() {
        out.push_str("<g class=\"legend\" font-family=\"sans-serif\" font-size=\"12.000000\">\n");
        for (i, label) in order.iter().enumerate() {
            let y = MARGIN_TOP + 10.0 + 20.0 * i as f64;
            let x = x1 + 15.0;
            let _ = writeln!(
                out,
                "<rect x=\"{x:.6}\" y=\"{:.6}\" width=\"12.000000\" height=\"12.000000\" fill=\"{}\"/>",
                y - 10.0,
                color(Some(label))
            );
            let _ = writeln!(out, "<text x=\"{:.6}\" y=\"{y:.6}\">{}</text>", x + 18.0, escape(label));
        }
        out.push_str("</g>\n");
    }
    out.push_str("</svg>\n");
    out.into_bytes()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveRecord {
    pub id: String,
    pub label: Option<String>,
    pub values: Vec<f64>,
}

/// JSON form of a plot.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlotDocument {
    pub t: Vec<f64>,
    pub curves: Vec<CurveRecord>,
    pub bands: Vec<Band>,
    pub objective: Option<f64>,
    pub lower_bound: Option<f64>,
    pub eigenvalues: Vec<f64>,
}

impl PlotDocument {
    pub fn new(cs: &CurveSet, bands: &[Band], summary: Option<&ObjectiveSummary>, eigenvalues: &[f64]) -> Self {
        let curves = cs
            .curves
            .iter()
            .enumerate()
            .map(|(i, values)| CurveRecord {
                id: cs.point_ids[i].clone(),
                label: cs.label(i).map(str::to_string),
                values: values.clone(),
            })
            .collect();
        PlotDocument {
            t: cs.t.clone(),
            curves,
            bands: bands.to_vec(),
            objective: summary.map(|s| s.value),
            lower_bound: summary.map(|s| s.lower_bound),
            eigenvalues: eigenvalues.to_vec(),
        }
    }

    pub fn curve_set(&self) -> CurveSet {
        let labels = if self.curves.iter().all(|c| c.label.is_some()) && !self.curves.is_empty() {
            Some(self.curves.iter().map(|c| c.label.clone().unwrap_or_default()).collect())
        } else {
            None
        };
        CurveSet {
            t: self.t.clone(),
            curves: self.curves.iter().map(|c| c.values.clone()).collect(),
            labels,
            point_ids: self.curves.iter().map(|c| c.id.clone()).collect(),
        }
    }
}

pub fn emit_json(cs: &CurveSet, bands: &[Band], summary: Option<&ObjectiveSummary>, eigenvalues: &[f64]) -> Vec<u8> {
    serde_json::to_vec(&PlotDocument::new(cs, bands, summary, eigenvalues)).expect("plot document serializes")
}

/// Header `t,id_1,…,id_n`, then one row per grid point.
pub fn emit_csv(cs: &CurveSet) -> Vec<u8> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let header = std::iter::once("t".to_string()).chain(cs.point_ids.iter().cloned());
    w.write_record(header).expect("write to memory");
    for (j, t) in cs.t.iter().enumerate() {
        let row = std::iter::once(t.to_string()).chain(cs.curves.iter().map(|c| c[j].to_string()));
        w.write_record(row).expect("write to memory");
    }
    w.into_inner().expect("flush to memory")
}
