use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{FeatureSet, IoError};
use crate::geom::Bbox;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LayerStyle {
    pub fill: String,
    pub stroke: String,
    pub stroke_width: f64,
    pub opacity: f64,
}

impl Default for LayerStyle {
    fn default() -> Self {
        LayerStyle { fill: "#b0b0b0".into(), stroke: "#404040".into(), stroke_width: 0.5, opacity: 0.8 }
    }
}

impl LayerStyle {
    /// Distinct default styles for stacked layers.
    pub fn palette(i: usize) -> LayerStyle {
        const FILLS: [(&str, &str); 5] = [
            ("#d9d9d9", "#7f7f7f"),
            ("#e6550d", "#a63603"),
            ("#3182bd", "#08519c"),
            ("#31a354", "#006d2c"),
            ("#756bb1", "#54278f"),
        ];
        let (fill, stroke) = FILLS[i % FILLS.len()];
        LayerStyle { fill: fill.into(), stroke: stroke.into(), stroke_width: 0.5, opacity: if i == 0 { 1.0 } else { 0.6 } }
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

/// One `<g>` per layer in order, one `<path>` per feature. The y axis is
/// flipped so north is up; the view box pads the data envelope by 5%.
/// Layers without an explicit style take [`LayerStyle::palette`].
pub fn to_svg_string(layers: &[FeatureSet], styles: &[LayerStyle]) -> Result<String, IoError> {
    let mut bb = Bbox::empty();
    for l in layers {
        for f in &l.features {
            bb.merge(&f.geometry.bbox());
        }
    }
    if bb.is_empty() {
        return Err(IoError::EmptyEnvelope);
    }
    let pad = 0.05 * bb.width().max(bb.height()).max(1.0);
    let bb = bb.expanded(pad);
    let (w, h) = (bb.width(), bb.height());
    let px_w = 1000.0;
    let px_h = (px_w * h / w).round().max(1.0);
    let mut out = String::new();
    let _ = writeln!(
        out,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"{px_w:.0}\" height=\"{px_h:.0}\" viewBox=\"{:.3} {:.3} {:.3} {:.3}\">",
        bb.min.x, -bb.max.y, w, h
    );
    for (i, l) in layers.iter().enumerate() {
        let st = styles.get(i).cloned().unwrap_or_else(|| LayerStyle::palette(i));
        let _ = writeln!(
            out,
            "<g id=\"{}\" fill=\"{}\" stroke=\"{}\" stroke-width=\"{}\" opacity=\"{}\" fill-rule=\"evenodd\">",
            escape(&l.layer),
            escape(&st.fill),
            escape(&st.stroke),
            st.stroke_width,
            st.opacity
        );
        let mut feats: Vec<_> = l.features.iter().collect();
        feats.sort_by_key(|f| f.id);
        for f in feats {
            let mut d = String::new();
            for r in f.geometry.rings() {
                for (k, p) in r.vertices().iter().enumerate() {
                    let _ = write!(d, "{}{:.3} {:.3} ", if k == 0 { "M" } else { "L" }, p.x, -p.y);
                }
                d.push_str("Z ");
            }
            let _ = writeln!(out, "<path data-id=\"{}\" d=\"{}\"/>", f.id, d.trim_end());
        }
        out.push_str("</g>\n");
    }
    out.push_str("</svg>\n");
    Ok(out)
}

pub fn render_svg(layers: &[FeatureSet], styles: &[LayerStyle], path: impl AsRef<Path>) -> Result<(), IoError> {
    let path = path.as_ref();
    let s = to_svg_string(layers, styles)?;
    std::fs::write(path, s).map_err(|e| IoError::Write { path: path.into(), source: e })
}
