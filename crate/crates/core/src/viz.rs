//! Standalone SVG scatter plots of 2-D embeddings, coloured by class.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::gp::Embedding;

/// Twenty categorical colours (the "tab20" ordering, dark shades first).
pub const PALETTE: [&str; 20] = [
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
    "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf",
    "#aec7e8", "#ffbb78", "#98df8a", "#ff9896", "#c5b0d5",
    "#c49c94", "#f7b6d2", "#c7c7c7", "#dbdb8d", "#9edae5",
];

/// Smallest axis span; coincident points still get a usable range.
pub const MIN_SPAN: f64 = 1e-6;
const MARGIN: f64 = 0.05;

pub fn class_color(class: usize) -> &'static str {
    PALETTE[class % PALETTE.len()]
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScatterSpec {
    /// `(x, y, class id)` per point.
    pub points: Vec<(f64, f64, usize)>,
    pub class_names: Vec<String>,
    pub title: String,
    pub width: u32,
    pub height: u32,
}

impl ScatterSpec {
    /// Takes the first two embedding dimensions. Unlabelled points all get
    /// class 0.
    pub fn from_embedding(
        emb: &Embedding,
        labels: Option<&[usize]>,
        class_names: &[String],
    ) -> Result<ScatterSpec> {
        if emb.t() < 2 {
            return Err(Error::InvalidDataset(format!(
                "scatter plots need 2 dimensions, embedding has {}",
                emb.t()
            )));
        }
        if emb.t() > 2 {
            log::warn!("embedding has {} dimensions; plotting the first two", emb.t());
        }
        if !emb.is_finite() {
            return Err(Error::InvalidDataset("embedding has non-finite coordinates".into()));
        }
        let points = emb
            .rows()
            .enumerate()
            .map(|(i, r)| (r[0], r[1], labels.map_or(0, |l| l[i])))
            .collect();
        let class_names = if labels.is_some() {
            class_names.to_vec()
        } else {
            vec!["all".to_string()]
        };
        if class_names.len() > PALETTE.len() {
            log::warn!(
                "{} classes exceed the {}-colour palette; colours repeat",
                class_names.len(),
                PALETTE.len()
            );
        }
        Ok(ScatterSpec {
            points,
            class_names,
            title: String::new(),
            width: 640,
            height: 480,
        })
    }

    pub fn with_title(mut self, title: impl Into<String>) -> Self {
        self.title = title.into();
        self
    }

    /// Data ranges padded by 5% of the span on each side.
    pub fn axis_ranges(&self) -> ((f64, f64), (f64, f64)) {
        let range = |vals: &mut dyn Iterator<Item = f64>| {
            let (lo, hi) = vals.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
                (lo.min(v), hi.max(v))
            });
            let span = (hi - lo).max(MIN_SPAN);
            let mid = (lo + hi) / 2.0;
            let half = span / 2.0 * (1.0 + 2.0 * MARGIN);
            (mid - half, mid + half)
        };
        (
            range(&mut self.points.iter().map(|p| p.0)),
            range(&mut self.points.iter().map(|p| p.1)),
        )
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

/// Renders the plot as an SVG 1.1 document.
pub fn render_scatter(spec: &ScatterSpec) -> String {
    const LEFT: f64 = 60.0;
    const TOP: f64 = 40.0;
    const LEGEND: f64 = 140.0;
    const BOTTOM: f64 = 40.0;
    let (w, h) = (spec.width as f64, spec.height as f64);
    let plot_w = (w - LEFT - LEGEND).max(10.0);
    let plot_h = (h - TOP - BOTTOM).max(10.0);
    let ((x0, x1), (y0, y1)) = spec.axis_ranges();
    let sx = |x: f64| LEFT + (x - x0) / (x1 - x0) * plot_w;
    let sy = |y: f64| TOP + (y1 - y) / (y1 - y0) * plot_h;

    let mut s = String::new();
    let _ = writeln!(s, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{}" height="{}" viewBox="0 0 {} {}">"#,
        spec.width, spec.height, spec.width, spec.height
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    if !spec.title.is_empty() {
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="24" font-family="sans-serif" font-size="16" text-anchor="middle">{}</text>"#,
            LEFT + plot_w / 2.0,
            escape(&spec.title)
        );
    }
    let _ = writeln!(
        s,
        r#"<rect class="frame" x="{LEFT:.2}" y="{TOP:.2}" width="{plot_w:.2}" height="{plot_h:.2}" fill="none" stroke="black"/>"#
    );
    for (label, v, x, y, anchor) in [
        ("x0", x0, LEFT, TOP + plot_h + 16.0, "start"),
        ("x1", x1, LEFT + plot_w, TOP + plot_h + 16.0, "end"),
        ("y0", y0, LEFT - 6.0, TOP + plot_h, "end"),
        ("y1", y1, LEFT - 6.0, TOP + 10.0, "end"),
    ] {
        let _ = writeln!(
            s,
            r#"<text class="tick-{label}" x="{x:.2}" y="{y:.2}" font-family="sans-serif" font-size="10" text-anchor="{anchor}">{v:.3}</text>"#
        );
    }
    let _ = writeln!(s, r#"<g class="points">"#);
    for &(x, y, c) in &spec.points {
        let _ = writeln!(
            s,
            r#"<circle cx="{:.3}" cy="{:.3}" r="3" fill="{}" fill-opacity="0.8"/>"#,
            sx(x),
            sy(y),
            class_color(c)
        );
    }
    let _ = writeln!(s, "</g>");
    let _ = writeln!(s, r#"<g class="legend">"#);
    let lx = LEFT + plot_w + 16.0;
    for (c, name) in spec.class_names.iter().enumerate() {
        let ly = TOP + 8.0 + c as f64 * 18.0;
        let _ = writeln!(
            s,
            r#"<g class="legend-entry"><rect x="{lx:.2}" y="{:.2}" width="10" height="10" fill="{}"/><text x="{:.2}" y="{:.2}" font-family="sans-serif" font-size="12">{}</text></g>"#,
            ly - 9.0,
            class_color(c),
            lx + 16.0,
            ly,
            escape(name)
        );
    }
    let _ = writeln!(s, "</g>");
    s.push_str("</svg>\n");
    s
}

/// Companion `x,y,label` rows for the plotted points.
pub fn scatter_rows(spec: &ScatterSpec) -> Vec<Vec<String>> {
    spec.points
        .iter()
        .map(|&(x, y, c)| vec![x.to_string(), y.to_string(), spec.class_names[c].clone()])
        .collect()
}
