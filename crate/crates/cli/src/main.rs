use std::path::{Path, PathBuf};
use std::process::ExitCode;

use bldgen::agent::{Budgets, ScaleSpec};
use bldgen::enrichment::{build_blocks, delineate_urban_areas, UrbanParams, DEFAULT_JOIN_DIST};
use bldgen::io::{
    compare_metrics, read_geojson, render_svg, write_geojson, Feature, FeatureSet, IoError, LayerStyle,
};
use bldgen::morphology::{merge_buildings, MergeParams};
use bldgen::pipeline::{generalize_blocks, run_pipeline, PipelineConfig, PipelineError};
use bldgen::Building;
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{Map, Value};

/// Building generalization: merging, urban areas, blocks and agents.
#[derive(Parser, Debug)]
#[command(name = "bldgen", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Merge nearby buildings by closure then opening, then drop short edges.
    Merge(MergeArgs),
    /// Delineate urban areas from building density.
    Urban(UrbanArgs),
    /// Group buildings into blocks.
    Blocks(BlocksArgs),
    /// Generalize buildings with block and building agents.
    Agent(AgentArgs),
    /// Run a full pipeline from a JSON config.
    Pipeline(PipelineArgs),
    /// Compare an output layer with a reference layer.
    Metrics(MetricsArgs),
    /// Render layers to SVG.
    Render(RenderArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Preset {
    Os10k,
    Soi10k,
}

#[derive(Args, Debug)]
struct InOut {
    /// Input GeoJSON FeatureCollection (projected metres).
    #[arg(long = "in", value_name = "FILE")]
    input: PathBuf,
    /// Output GeoJSON file.
    #[arg(long, value_name = "FILE")]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct MergeArgs {
    #[command(flatten)]
    io: InOut,
    /// Dilation/erosion radius in metres.
    #[arg(long, default_value_t = 7.0, conflicts_with = "preset", allow_negative_numbers = true)]
    buffer: f64,
    /// Minimum edge length in metres.
    #[arg(long, default_value_t = 1.0, conflicts_with = "preset", allow_negative_numbers = true)]
    edge: f64,
    /// Source-product preset: os10k = buffer 7, edge 1; soi10k = buffer 6, edge 1 [default: none].
    #[arg(long, value_enum)]
    preset: Option<Preset>,
    /// Vertices per quarter circle of the buffer disc.
    #[arg(long, default_value_t = 8)]
    arcs: usize,
    /// Keep closure components at least this large (m²) that the opening erases [default: off].
    #[arg(long, value_name = "M2", allow_negative_numbers = true)]
    keep_lost_min_area: Option<f64>,
}

#[derive(Args, Debug)]
struct UrbanArgs {
    #[command(flatten)]
    io: InOut,
    /// Smallest urban area kept, m².
    #[arg(long, default_value_t = 750_000.0, allow_negative_numbers = true)]
    min_town_area: f64,
    /// Dilation distance in metres.
    #[arg(long, default_value_t = 25.0, allow_negative_numbers = true)]
    dilate: f64,
    /// Erosion distance in metres.
    #[arg(long, default_value_t = 10.0, allow_negative_numbers = true)]
    erode: f64,
    /// Boundary simplification tolerance in metres.
    #[arg(long, default_value_t = 25.0, allow_negative_numbers = true)]
    simplify_tol: f64,
    /// Boundary smoothing iterations (0 to 5).
    #[arg(long, default_value_t = 1)]
    smooth: usize,
}

#[derive(Args, Debug)]
struct BlocksArgs {
    #[command(flatten)]
    io: InOut,
    /// Buildings closer than twice this distance share a block, metres.
    #[arg(long, default_value_t = DEFAULT_JOIN_DIST, allow_negative_numbers = true)]
    join_dist: f64,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Scale {
    #[value(name = "25000")]
    S25000,
    #[value(name = "50000")]
    S50000,
}

#[derive(Args, Debug)]
struct AgentArgs {
    #[command(flatten)]
    io: InOut,
    /// Target scale denominator.
    #[arg(long, value_enum, default_value = "25000")]
    scale: Scale,
    /// States each building agent may visit.
    #[arg(long, default_value_t = 30)]
    budget: usize,
    /// States each block agent may visit.
    #[arg(long, default_value_t = 50)]
    meso_budget: usize,
    /// Block join distance in metres.
    #[arg(long, default_value_t = DEFAULT_JOIN_DIST, allow_negative_numbers = true)]
    join_dist: f64,
    /// Worker threads; output does not depend on it [default: all cores].
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Args, Debug)]
struct PipelineArgs {
    /// Pipeline config (JSON, schema_version 1).
    #[arg(long, value_name = "FILE")]
    config: PathBuf,
    /// Worker threads, overriding the config [default: from config, else all cores].
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Args, Debug)]
struct MetricsArgs {
    /// Layer to assess.
    #[arg(long, value_name = "FILE")]
    out: PathBuf,
    /// Reference layer.
    #[arg(long = "ref", value_name = "FILE")]
    reference: PathBuf,
    /// JSON report file.
    #[arg(long, value_name = "FILE")]
    report: PathBuf,
}

#[derive(Args, Debug)]
struct RenderArgs {
    /// Layers in drawing order.
    #[arg(long, value_name = "FILE", num_args = 1.., required = true)]
    layers: Vec<PathBuf>,
    /// Output SVG file.
    #[arg(long, value_name = "FILE")]
    svg: PathBuf,
}

/// Error with the exit code it maps to: 1 usage or config, 2 data, 3 internal.
#[derive(Debug)]
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn usage(m: impl ToString) -> Failure {
        Failure { code: 1, message: m.to_string() }
    }
    fn data(m: impl ToString) -> Failure {
        Failure { code: 2, message: m.to_string() }
    }
    fn internal(m: impl ToString) -> Failure {
        Failure { code: 3, message: m.to_string() }
    }
}

impl From<IoError> for Failure {
    fn from(e: IoError) -> Failure {
        Failure::data(e)
    }
}

impl From<PipelineError> for Failure {
    fn from(e: PipelineError) -> Failure {
        match e {
            PipelineError::Config(_) => Failure::usage(e),
            _ => Failure::data(e),
        }
    }
}

fn load_buildings(path: &Path) -> Result<Vec<Building>, Failure> {
    let ing = read_geojson(path)?;
    Ok(ing.features.to_buildings()?)
}

fn numbered(layer: &str, parts: Vec<bldgen::geom::Polygon>) -> FeatureSet {
    let features = parts
        .into_iter()
        .enumerate()
        .map(|(i, p)| Feature { id: i as u64 + 1, geometry: p.into(), properties: Map::new() })
        .collect();
    FeatureSet { layer: layer.into(), features }
}

fn thread_pool(n: Option<usize>) -> Result<Option<rayon::ThreadPool>, Failure> {
    match n {
        Some(0) => Err(Failure::usage("--threads must be at least 1")),
        Some(n) => rayon::ThreadPoolBuilder::new().num_threads(n).build().map(Some).map_err(Failure::internal),
        None => Ok(None),
    }
}

fn merge(a: MergeArgs) -> Result<(), Failure> {
    let mut params = match a.preset {
        Some(Preset::Os10k) => MergeParams::os10k(),
        Some(Preset::Soi10k) => MergeParams::soi10k(),
        None => MergeParams::new(a.buffer, a.edge),
    };
    params.arc_segments = a.arcs;
    params.keep_lost_min_area = a.keep_lost_min_area;
    params.validate().map_err(Failure::usage)?;
    let bs = load_buildings(&a.io.input)?;
    let merged = merge_buildings(&bs, &params).map_err(Failure::data)?;
    log::info!("{} buildings merged into {} polygons", bs.len(), merged.len());
    write_geojson(&numbered("merged", merged.into_parts()), &a.io.out)?;
    Ok(())
}

fn urban(a: UrbanArgs) -> Result<(), Failure> {
    let params = UrbanParams {
        dilate_dist: a.dilate,
        erode_dist: a.erode,
        min_town_area: a.min_town_area,
        boundary_simplify_tol: a.simplify_tol,
        smooth_iterations: a.smooth,
        ..UrbanParams::default()
    };
    params.validate().map_err(Failure::usage)?;
    let bs = load_buildings(&a.io.input)?;
    let areas = delineate_urban_areas(&bs, &params).map_err(Failure::data)?;
    let features = areas
        .into_iter()
        .map(|u| {
            let mut props = Map::new();
            props.insert("area".into(), Value::from((u.area * 1e3).round() / 1e3));
            props.insert("building_count".into(), Value::from(u.building_count));
            Feature { id: u.id, geometry: u.footprint.into(), properties: props }
        })
        .collect();
    write_geojson(&FeatureSet { layer: "urban".into(), features }, &a.io.out)?;
    Ok(())
}

fn blocks(a: BlocksArgs) -> Result<(), Failure> {
    if !(a.join_dist > 0.0) {
        return Err(Failure::usage(format!("--join-dist must be positive, got {}", a.join_dist)));
    }
    let bs = load_buildings(&a.io.input)?;
    let blocks = build_blocks(&bs, a.join_dist).map_err(Failure::data)?;
    let features = blocks
        .into_iter()
        .map(|b| {
            let mut props = Map::new();
            props.insert("building_ids".into(), Value::from(b.building_ids));
            Feature { id: b.id, geometry: b.footprint.into(), properties: props }
        })
        .collect();
    write_geojson(&FeatureSet { layer: "blocks".into(), features }, &a.io.out)?;
    Ok(())
}

fn agent(a: AgentArgs) -> Result<(), Failure> {
    let s = ScaleSpec::new(match a.scale {
        Scale::S25000 => 25_000,
        Scale::S50000 => 50_000,
    });
    if a.budget == 0 || a.meso_budget == 0 {
        return Err(Failure::usage("budgets must be at least 1"));
    }
    if !(a.join_dist > 0.0) {
        return Err(Failure::usage(format!("--join-dist must be positive, got {}", a.join_dist)));
    }
    let budgets = Budgets { micro: a.budget, meso: a.meso_budget, ..Budgets::default() };
    let pool = thread_pool(a.threads)?;
    let bs = load_buildings(&a.io.input)?;
    let run = || generalize_blocks(&bs, a.join_dist, &s, &budgets);
    let gens = match &pool {
        Some(p) => p.install(run),
        None => run(),
    }?;
    let mut kept: Vec<Building> = gens.into_iter().flat_map(|g| g.buildings).collect();
    kept.sort_by_key(Building::id);
    log::info!("{} of {} buildings kept", kept.len(), bs.len());
    write_geojson(&FeatureSet::from_buildings("buildings", &kept), &a.io.out)?;
    Ok(())
}

fn pipeline(a: PipelineArgs) -> Result<(), Failure> {
    let mut cfg = PipelineConfig::load(&a.config)?;
    if a.threads.is_some() {
        cfg.threads = a.threads;
    }
    let summary = run_pipeline(&cfg)?;
    let text = serde_json::to_string_pretty(&summary).map_err(Failure::internal)?;
    println!("{text}");
    Ok(())
}

fn metrics(a: MetricsArgs) -> Result<(), Failure> {
    let out = read_geojson(&a.out)?.features;
    let reference = read_geojson(&a.reference)?.features;
    let report = compare_metrics(&out, &reference)?;
    let text = serde_json::to_string_pretty(&report).map_err(Failure::internal)?;
    std::fs::write(&a.report, text + "\n")
        .map_err(|e| Failure::data(format!("cannot write {}: {e}", a.report.display())))?;
    Ok(())
}

fn render(a: RenderArgs) -> Result<(), Failure> {
    let layers = a.layers.iter().map(|p| Ok(read_geojson(p)?.features)).collect::<Result<Vec<_>, Failure>>()?;
    let styles: Vec<LayerStyle> = (0..layers.len()).map(LayerStyle::palette).collect();
    render_svg(&layers, &styles, &a.svg)?;
    Ok(())
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Merge(a) => merge(a),
        Command::Urban(a) => urban(a),
        Command::Blocks(a) => blocks(a),
        Command::Agent(a) => agent(a),
        Command::Pipeline(a) => pipeline(a),
        Command::Metrics(a) => metrics(a),
        Command::Render(a) => render(a),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match std::panic::catch_unwind(|| run(cli)) {
        Ok(Ok(())) => ExitCode::SUCCESS,
        Ok(Err(f)) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
        Err(_) => {
            eprintln!("error: internal failure");
            ExitCode::from(3)
        }
    }
}
