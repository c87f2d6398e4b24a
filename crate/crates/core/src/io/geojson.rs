use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::path::Path;

use ::geojson::{feature::Id, GeoJson, GeometryValue, Position};
use log::warn;
use serde_json::Map;

use super::{Feature, FeatureSet, IoError};
use crate::geom::{repair_ring, union_unchecked, MultiPolygon, Point, Polygon, Ring};

/// What ingestion had to skip or fix.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Ingest {
    pub features: FeatureSet,
    /// Features without polygonal geometry.
    pub skipped: usize,
    /// Polygons rebuilt from self-intersecting or inconsistent rings.
    pub repaired: usize,
    /// Ids were missing, non-numeric or repeated and were renumbered.
    pub renumbered: bool,
    /// Every coordinate fits in ±180/±90, so the data is probably lon/lat.
    pub suspected_geographic: bool,
}

fn ring_from(coords: &[Position]) -> Vec<Point> {
    coords.iter().filter(|c| c.len() >= 2).map(|c| Point::new(c[0], c[1])).collect()
}

/// Builds a polygon, falling back to an overlay-based repair of broken rings.
fn polygon_from(rings: &[Vec<Position>], repaired: &mut usize) -> MultiPolygon {
    let Some((ext, holes)) = rings.split_first() else {
        return MultiPolygon::empty();
    };
    let ext = ring_from(ext);
    let holes: Vec<Vec<Point>> = holes.iter().map(|h| ring_from(h)).collect();
    let strict = Ring::new(ext.clone()).and_then(|e| {
        let hs = holes.iter().map(|h| Ring::new(h.clone())).collect::<Result<Vec<_>, _>>()?;
        Polygon::new(e, hs)
    });
    if let Ok(p) = strict {
        return p.into();
    }
    if ext.iter().any(|p| !p.is_finite()) {
        return MultiPolygon::empty();
    }
    *repaired += 1;
    let fixed = repair_ring(&ext);
    let cut: Vec<Polygon> = holes
        .iter()
        .filter(|h| h.iter().all(|p| p.is_finite()))
        .flat_map(|h| repair_ring(h).into_parts())
        .collect();
    if cut.is_empty() {
        fixed
    } else {
        crate::geom::difference(&fixed, &union_unchecked(&cut))
    }
}

fn geometry_from(v: &GeometryValue, repaired: &mut usize) -> Option<MultiPolygon> {
    match v {
        GeometryValue::Polygon { coordinates: rings } => Some(polygon_from(rings, repaired)),
        GeometryValue::MultiPolygon { coordinates: polys } => {
            let parts: Vec<Polygon> = polys.iter().flat_map(|p| polygon_from(p, repaired).into_parts()).collect();
            // Parts of one feature may touch or overlap; fuse them.
            Some(if parts.len() > 1 { union_unchecked(&parts) } else { parts.into_iter().collect() })
        }
        _ => None,
    }
}

fn numeric_id(id: &Option<Id>) -> Option<u64> {
    match id {
        Some(Id::Number(n)) => n.as_u64(),
        Some(Id::String(s)) => s.parse().ok(),
        None => None,
    }
}

/// Reads a FeatureCollection of projected (metre) polygons.
pub fn read_geojson(path: impl AsRef<Path>) -> Result<Ingest, IoError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| IoError::Read { path: path.into(), source: e })?;
    let parse_err = |m: String| IoError::Parse { path: path.into(), message: m };
    let gj: GeoJson = text.parse().map_err(|e: ::geojson::Error| parse_err(e.to_string()))?;
    let GeoJson::FeatureCollection(fc) = gj else {
        return Err(parse_err("top level is not a FeatureCollection".into()));
    };
    let layer = fc
        .foreign_members
        .as_ref()
        .and_then(|m| m.get("name"))
        .and_then(|v| v.as_str())
        .unwrap_or_else(|| path.file_stem().and_then(|s| s.to_str()).unwrap_or("layer"))
        .to_string();

    let mut out = Ingest::default();
    let mut raw: Vec<(Option<u64>, MultiPolygon, Map<String, serde_json::Value>)> = Vec::new();
    for f in &fc.features {
        let geom = f.geometry.as_ref().and_then(|g| geometry_from(&g.value, &mut out.repaired));
        let Some(geom) = geom else {
            out.skipped += 1;
            continue;
        };
        if geom.is_empty() {
            out.skipped += 1;
            continue;
        }
        let id = numeric_id(&f.id).or_else(|| f.properties.as_ref()?.get("id")?.as_u64());
        raw.push((id, geom, f.properties.clone().unwrap_or_default()));
    }
    if raw.is_empty() && !fc.features.is_empty() {
        return Err(IoError::NoPolygons { path: path.into() });
    }

    let mut seen = BTreeSet::new();
    out.renumbered = raw.iter().any(|(id, _, _)| id.is_none_or(|i| !seen.insert(i)));
    let features: Vec<Feature> = raw
        .into_iter()
        .enumerate()
        .map(|(i, (id, geometry, properties))| Feature {
            id: if out.renumbered { i as u64 + 1 } else { id.unwrap() },
            geometry,
            properties,
        })
        .collect();

    let bb = features.iter().fold(crate::geom::Bbox::empty(), |mut b, f| {
        b.merge(&f.geometry.bbox());
        b
    });
    out.suspected_geographic =
        !bb.is_empty() && bb.min.x >= -180.0 && bb.max.x <= 180.0 && bb.min.y >= -90.0 && bb.max.y <= 90.0;

    if out.skipped > 0 {
        warn!("{}: skipped {} non-polygonal features", path.display(), out.skipped);
    }
    if out.repaired > 0 {
        warn!("{}: repaired {} invalid polygons", path.display(), out.repaired);
    }
    if out.renumbered {
        warn!("{}: feature ids missing or repeated, renumbered from 1", path.display());
    }
    if out.suspected_geographic {
        warn!("{}: coordinates look like longitude/latitude; distances are taken as metres", path.display());
    }
    out.features = FeatureSet { layer, features };
    Ok(out)
}

fn num(buf: &mut String, v: f64) {
    let s = format!("{v:.9}");
    buf.push_str(if s.trim_start_matches('-').trim_matches(|c| c == '0' || c == '.').is_empty() {
        "0.000000000"
    } else {
        &s
    });
}

fn ring_json(buf: &mut String, r: &Ring) {
    buf.push('[');
    let v = r.vertices();
    for p in v.iter().chain(std::iter::once(&v[0])) {
        if !buf.ends_with('[') {
            buf.push(',');
        }
        buf.push('[');
        num(buf, p.x);
        buf.push(',');
        num(buf, p.y);
        buf.push(']');
    }
    buf.push(']');
}

fn polygon_json(buf: &mut String, p: &Polygon) {
    buf.push('[');
    for (i, r) in p.rings().enumerate() {
        if i > 0 {
            buf.push(',');
        }
        ring_json(buf, r);
    }
    buf.push(']');
}

/// Serializes with fixed nine-decimal coordinates and features in id order,
/// so equal sets give equal bytes.
pub fn to_geojson_string(fs: &FeatureSet) -> String {
    let mut feats: Vec<&Feature> = fs.features.iter().collect();
    feats.sort_by_key(|f| f.id);
    let mut buf = String::new();
    let name = serde_json::to_string(&fs.layer).unwrap_or_else(|_| "\"\"".into());
    let _ = write!(buf, "{{\"type\":\"FeatureCollection\",\"name\":{name},\"features\":[");
    for (i, f) in feats.iter().enumerate() {
        buf.push_str(if i == 0 { "\n" } else { ",\n" });
        let _ = write!(buf, "{{\"type\":\"Feature\",\"id\":{},\"properties\":", f.id);
        buf.push_str(&serde_json::to_string(&f.properties).unwrap_or_else(|_| "{}".into()));
        buf.push_str(",\"geometry\":");
        match f.geometry.parts() {
            [] => buf.push_str("null"),
            [p] => {
                buf.push_str("{\"type\":\"Polygon\",\"coordinates\":");
                polygon_json(&mut buf, p);
                buf.push('}');
            }
            parts => {
                buf.push_str("{\"type\":\"MultiPolygon\",\"coordinates\":[");
                for (k, p) in parts.iter().enumerate() {
                    if k > 0 {
                        buf.push(',');
                    }
                    polygon_json(&mut buf, p);
                }
                buf.push_str("]}");
            }
        }
        buf.push('}');
    }
    buf.push_str("\n]}\n");
    buf
}

pub fn write_geojson(fs: &FeatureSet, path: impl AsRef<Path>) -> Result<(), IoError> {
    let path = path.as_ref();
    std::fs::write(path, to_geojson_string(fs)).map_err(|e| IoError::Write { path: path.into(), source: e })
}
