use serde::{Deserialize, Serialize};

use super::{FeatureSet, IoError};
use crate::geom::{boolean_union, intersection, multi_hausdorff_distance};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatchRow {
    pub out_id: u64,
    pub ref_id: u64,
    pub overlap_area: f64,
    pub hausdorff: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub areal_iou: f64,
    /// `None` when the reference is empty.
    pub count_ratio: Option<f64>,
    /// Mean over matched pairs; `None` when nothing matched.
    pub mean_hausdorff: Option<f64>,
    pub unmatched_out: usize,
    pub unmatched_ref: usize,
    pub matches: Vec<MatchRow>,
}

/// Areal IoU of the two layers, feature count ratio, and the mean boundary
/// Hausdorff distance over a greedy one-to-one matching by overlap area.
pub fn compare_metrics(out: &FeatureSet, reference: &FeatureSet) -> Result<MetricsReport, IoError> {
    if out.is_empty() && reference.is_empty() {
        return Err(IoError::UndefinedMetrics);
    }
    let a = boolean_union(&[out.geometry()])?;
    let b = boolean_union(&[reference.geometry()])?;
    let inter = intersection(&a, &b).area();
    let uni = a.area() + b.area() - inter;
    let areal_iou = if uni > 0.0 { (inter / uni).clamp(0.0, 1.0) } else { 0.0 };

    let mut cands: Vec<(f64, usize, usize)> = Vec::new();
    for (i, f) in out.features.iter().enumerate() {
        for (j, g) in reference.features.iter().enumerate() {
            if !f.geometry.bbox().intersects(&g.geometry.bbox()) {
                continue;
            }
            let ov = intersection(&f.geometry, &g.geometry).area();
            if ov > 0.0 {
                cands.push((ov, i, j));
            }
        }
    }
    cands.sort_by(|x, y| {
        y.0.total_cmp(&x.0)
            .then(out.features[x.1].id.cmp(&out.features[y.1].id))
            .then(reference.features[x.2].id.cmp(&reference.features[y.2].id))
    });
    let mut used_out = vec![false; out.len()];
    let mut used_ref = vec![false; reference.len()];
    let mut matches = Vec::new();
    for (ov, i, j) in cands {
        if used_out[i] || used_ref[j] {
            continue;
        }
        used_out[i] = true;
        used_ref[j] = true;
        let (f, g) = (&out.features[i], &reference.features[j]);
        matches.push(MatchRow {
            out_id: f.id,
            ref_id: g.id,
            overlap_area: ov,
            hausdorff: multi_hausdorff_distance(&f.geometry, &g.geometry),
        });
    }
    matches.sort_by_key(|m| (m.out_id, m.ref_id));
    let mean_hausdorff =
        (!matches.is_empty()).then(|| matches.iter().map(|m| m.hausdorff).sum::<f64>() / matches.len() as f64);
    Ok(MetricsReport {
        areal_iou,
        count_ratio: (!reference.is_empty()).then(|| out.len() as f64 / reference.len() as f64),
        mean_hausdorff,
        unmatched_out: used_out.iter().filter(|u| !**u).count(),
        unmatched_ref: used_ref.iter().filter(|u| !**u).count(),
        matches,
    })
}
