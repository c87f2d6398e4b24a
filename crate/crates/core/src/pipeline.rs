//! Config-driven runs from a source building layer to generalized layers.

use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};
use thiserror::Error;

use crate::agent::{block_lifecycle, Budgets, GeneralizedBlock, MemberFate, ScaleSpec};
use crate::building::Building;
use crate::enrichment::{build_blocks, delineate_urban_areas, UrbanParams, DEFAULT_JOIN_DIST};
use crate::io::{
    compare_metrics, read_geojson, render_svg, write_geojson, Feature, FeatureSet, IoError, LayerStyle, MetricsReport,
};
use crate::morphology::{merge_buildings, MergeParams};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("config: {0}")]
    Config(String),
    #[error("{stage}: {source}")]
    Io { stage: &'static str, source: IoError },
    #[error("{stage}: {message}")]
    Stage { stage: &'static str, message: String },
}

impl PipelineError {
    fn stage(stage: &'static str, e: impl std::fmt::Display) -> PipelineError {
        PipelineError::Stage { stage, message: e.to_string() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Target {
    #[serde(rename = "25K")]
    K25,
    #[serde(rename = "50K")]
    K50,
    #[serde(rename = "250K")]
    K250,
}

impl Target {
    pub fn scale_denominator(self) -> u32 {
        match self {
            Target::K25 => 25_000,
            Target::K50 => 50_000,
            Target::K250 => 250_000,
        }
    }
}

/// How buildings are generalized for the large-scale targets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    /// Block and building agents only.
    #[default]
    Agent,
    /// Morphological merge only.
    Merge,
    /// Merge first, then run the agents on the merged outlines.
    MergeThenAgent,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Outputs {
    pub buildings: Option<PathBuf>,
    pub blocks: Option<PathBuf>,
    pub urban: Option<PathBuf>,
    pub svg: Option<PathBuf>,
    pub metrics: Option<PathBuf>,
    pub summary: Option<PathBuf>,
}

/// Merge parameters by preset name or given in full.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MergeChoice {
    Preset(String),
    Params(MergeParams),
}

impl Default for MergeChoice {
    fn default() -> Self {
        MergeChoice::Preset("os10k".into())
    }
}

impl MergeChoice {
    pub fn resolve(&self) -> Result<MergeParams, PipelineError> {
        match self {
            MergeChoice::Preset(name) => MergeParams::preset(name)
                .ok_or_else(|| PipelineError::Config(format!("unknown merge preset {name:?}"))),
            MergeChoice::Params(p) => Ok(p.clone()),
        }
    }
}

/// A single JSON document. Relative paths are resolved against the
/// directory holding the config file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineConfig {
    pub schema_version: u32,
    pub source: PathBuf,
    pub target: Target,
    #[serde(default)]
    pub mode: Mode,
    #[serde(default)]
    pub merge: MergeChoice,
    #[serde(default)]
    pub urban: UrbanParams,
    /// Overrides of the legibility thresholds; the denominator always
    /// follows the target.
    #[serde(default)]
    pub scale: Option<ScaleSpec>,
    #[serde(default)]
    pub budgets: Budgets,
    #[serde(default = "default_join")]
    pub block_join_dist: f64,
    #[serde(default)]
    pub reference: Option<PathBuf>,
    #[serde(default)]
    pub outputs: Outputs,
    /// Worker threads for block agents; `None` uses all cores.
    #[serde(default)]
    pub threads: Option<usize>,
}

fn default_join() -> f64 {
    DEFAULT_JOIN_DIST
}

impl PipelineConfig {
    pub fn new(source: impl Into<PathBuf>, target: Target) -> PipelineConfig {
        PipelineConfig {
            schema_version: SCHEMA_VERSION,
            source: source.into(),
            target,
            mode: Mode::default(),
            merge: MergeChoice::default(),
            urban: UrbanParams::default(),
            scale: None,
            budgets: Budgets::default(),
            block_join_dist: DEFAULT_JOIN_DIST,
            reference: None,
            outputs: Outputs::default(),
            threads: None,
        }
    }

    /// Parses a config document and resolves its paths against `base`.
    pub fn from_json(text: &str, base: &Path) -> Result<PipelineConfig, PipelineError> {
        let v: Value = serde_json::from_str(text).map_err(|e| PipelineError::Config(e.to_string()))?;
        if let Some(t) = v.get("target").and_then(Value::as_str) {
            if !matches!(t, "25K" | "50K" | "250K") {
                return Err(PipelineError::Config(format!("unknown target {t:?}; expected 25K, 50K or 250K")));
            }
        }
        let mut cfg: PipelineConfig = serde_json::from_value(v).map_err(|e| PipelineError::Config(e.to_string()))?;
        cfg.resolve_paths(base);
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<PipelineConfig, PipelineError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| PipelineError::Config(format!("cannot read {}: {e}", path.display())))?;
        PipelineConfig::from_json(&text, path.parent().unwrap_or(Path::new(".")))
    }

    fn resolve_paths(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        fix(&mut self.source);
        if let Some(r) = &mut self.reference {
            fix(r);
        }
        let o = &mut self.outputs;
        for p in [&mut o.buildings, &mut o.blocks, &mut o.urban, &mut o.svg, &mut o.metrics, &mut o.summary]
            .into_iter()
            .flatten()
        {
            fix(p);
        }
    }

    pub fn scale_spec(&self) -> ScaleSpec {
        let mut s = self.scale.clone().unwrap_or_default();
        s.scale_denominator = self.target.scale_denominator();
        s
    }

    pub fn validate(&self) -> Result<(), PipelineError> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(PipelineError::Config(format!(
                "schema_version {} not supported (expected {SCHEMA_VERSION})",
                self.schema_version
            )));
        }
        self.merge.resolve()?.validate().map_err(|e| PipelineError::Config(e.to_string()))?;
        self.urban.validate().map_err(|e| PipelineError::Config(e.to_string()))?;
        self.scale_spec().validate().map_err(|e| PipelineError::Config(e.to_string()))?;
        if !(self.block_join_dist > 0.0) {
            return Err(PipelineError::Config("block_join_dist must be positive".into()));
        }
        if self.threads == Some(0) {
            return Err(PipelineError::Config("threads must be at least 1".into()));
        }
        let o = &self.outputs;
        let mut paths: Vec<&PathBuf> = [&o.buildings, &o.blocks, &o.urban, &o.svg, &o.metrics, &o.summary]
            .into_iter()
            .flatten()
            .collect();
        paths.push(&self.source);
        if let Some(r) = &self.reference {
            paths.push(r);
        }
        for (i, p) in paths.iter().enumerate() {
            if paths[..i].contains(p) {
                return Err(PipelineError::Config(format!("path {} is used twice", p.display())));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub target: Target,
    pub input_features: usize,
    pub input_buildings: usize,
    pub blocks: usize,
    pub output_features: usize,
    pub eliminated: usize,
    pub merged: usize,
    pub unresolved_conflicts: usize,
    pub urban_areas: usize,
    pub skipped_features: usize,
    pub metrics: Option<MetricsReport>,
    pub wall_time_s: f64,
}

/// Runs the block agents, in parallel across blocks, returning results in
/// block id order.
pub fn generalize_blocks(
    buildings: &[Building],
    join_dist: f64,
    s: &ScaleSpec,
    budgets: &Budgets,
) -> Result<Vec<GeneralizedBlock>, PipelineError> {
    let blocks = build_blocks(buildings, join_dist).map_err(|e| PipelineError::stage("blocks", e))?;
    let mut out: Vec<GeneralizedBlock> = blocks
        .par_iter()
        .map(|blk| {
            let members: Vec<Building> = blk.members(buildings).into_iter().cloned().collect();
            block_lifecycle(blk, &members, s, budgets)
        })
        .collect();
    out.sort_by_key(|g| g.block_id);
    Ok(out)
}

fn merged_as_buildings(bs: &[Building], params: &MergeParams) -> Result<Vec<Building>, PipelineError> {
    let merged = merge_buildings(bs, params).map_err(|e| PipelineError::stage("merge", e))?;
    merged
        .into_parts()
        .into_iter()
        .enumerate()
        .map(|(i, p)| Building::new(i as u64 + 1, p).map_err(|e| PipelineError::stage("merge", e)))
        .collect()
}

fn write_layer(fs: &FeatureSet, path: &Option<PathBuf>, stage: &'static str) -> Result<(), PipelineError> {
    if let Some(p) = path {
        write_geojson(fs, p).map_err(|e| PipelineError::Io { stage, source: e })?;
    }
    Ok(())
}

fn run_inner(cfg: &PipelineConfig) -> Result<RunSummary, PipelineError> {
    let t0 = Instant::now();
    let ingest = read_geojson(&cfg.source).map_err(|e| PipelineError::Io { stage: "read", source: e })?;
    let source = ingest.features;
    let buildings = source.to_buildings().map_err(|e| PipelineError::Io { stage: "read", source: e })?;
    let mut summary = RunSummary {
        target: cfg.target,
        input_features: source.len(),
        input_buildings: buildings.len(),
        blocks: 0,
        output_features: 0,
        eliminated: 0,
        merged: 0,
        unresolved_conflicts: 0,
        urban_areas: 0,
        skipped_features: ingest.skipped,
        metrics: None,
        wall_time_s: 0.0,
    };

    let output = match cfg.target {
        Target::K250 => {
            let areas = delineate_urban_areas(&buildings, &cfg.urban).map_err(|e| PipelineError::stage("urban", e))?;
            summary.urban_areas = areas.len();
            let features = areas
                .into_iter()
                .map(|a| {
                    let mut props = Map::new();
                    props.insert("area".into(), Value::from((a.area * 1e3).round() / 1e3));
                    props.insert("building_count".into(), Value::from(a.building_count));
                    Feature { id: a.id, geometry: a.footprint.into(), properties: props }
                })
                .collect();
            let fs = FeatureSet { layer: "urban".into(), features };
            write_layer(&fs, &cfg.outputs.urban, "write urban")?;
            fs
        }
        Target::K25 | Target::K50 => {
            let s = cfg.scale_spec();
            let params = cfg.merge.resolve()?;
            let kept = match cfg.mode {
                Mode::Merge => merged_as_buildings(&buildings, &params)?,
                Mode::Agent | Mode::MergeThenAgent => {
                    let input = if cfg.mode == Mode::MergeThenAgent {
                        merged_as_buildings(&buildings, &params)?
                    } else {
                        buildings.clone()
                    };
                    let run = || generalize_blocks(&input, cfg.block_join_dist, &s, &cfg.budgets);
                    let gens = match cfg.threads {
                        Some(n) => rayon::ThreadPoolBuilder::new()
                            .num_threads(n)
                            .build()
                            .map_err(|e| PipelineError::stage("agent", e))?
                            .install(run)?,
                        None => run()?,
                    };
                    summary.blocks = gens.len();
                    if cfg.outputs.blocks.is_some() {
                        let blocks =
                            build_blocks(&input, cfg.block_join_dist).map_err(|e| PipelineError::stage("blocks", e))?;
                        let features = blocks
                            .into_iter()
                            .map(|b| {
                                let mut props = Map::new();
                                props.insert("building_ids".into(), Value::from(b.building_ids.clone()));
                                Feature { id: b.id, geometry: b.footprint.into(), properties: props }
                            })
                            .collect();
                        write_layer(&FeatureSet { layer: "blocks".into(), features }, &cfg.outputs.blocks, "write blocks")?;
                    }
                    let mut kept = Vec::new();
                    for g in gens {
                        for f in g.fates.values() {
                            match f {
                                MemberFate::EliminatedMicro | MemberFate::EliminatedMeso => summary.eliminated += 1,
                                MemberFate::Merged { .. } => summary.merged += 1,
                                MemberFate::Kept => {}
                            }
                        }
                        summary.unresolved_conflicts += g.unresolved.len();
                        kept.extend(g.buildings);
                    }
                    kept.sort_by_key(Building::id);
                    kept
                }
            };
            let fs = FeatureSet::from_buildings("buildings", &kept);
            write_layer(&fs, &cfg.outputs.buildings, "write buildings")?;
            fs
        }
    };
    summary.output_features = output.len();

    if let Some(svg) = &cfg.outputs.svg {
        let layers = [FeatureSet { layer: "source".into(), ..source.clone() }, output.clone()];
        match render_svg(&layers, &[LayerStyle::palette(0), LayerStyle::palette(1)], svg) {
            Ok(()) | Err(IoError::EmptyEnvelope) => {}
            Err(e) => return Err(PipelineError::Io { stage: "render", source: e }),
        }
    }
    if let Some(r) = &cfg.reference {
        let reference = read_geojson(r).map_err(|e| PipelineError::Io { stage: "reference", source: e })?.features;
        match compare_metrics(&output, &reference) {
            Ok(m) => summary.metrics = Some(m),
            Err(IoError::UndefinedMetrics) => {}
            Err(e) => return Err(PipelineError::Io { stage: "metrics", source: e }),
        }
        if let (Some(p), Some(m)) = (&cfg.outputs.metrics, &summary.metrics) {
            write_json(p, m, "write metrics")?;
        }
    }
    summary.wall_time_s = t0.elapsed().as_secs_f64();
    if let Some(p) = &cfg.outputs.summary {
        write_json(p, &summary, "write summary")?;
    }
    Ok(summary)
}

fn write_json<T: Serialize>(path: &Path, v: &T, stage: &'static str) -> Result<(), PipelineError> {
    let text = serde_json::to_string_pretty(v).map_err(|e| PipelineError::stage(stage, e))?;
    std::fs::write(path, text + "\n").map_err(|e| PipelineError::Io {
        stage,
        source: IoError::Write { path: path.into(), source: e },
    })
}

/// Validates `cfg` and runs every stage it asks for.
pub fn run_pipeline(cfg: &PipelineConfig) -> Result<RunSummary, PipelineError> {
    cfg.validate()?;
    run_inner(cfg)
}
