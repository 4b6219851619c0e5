mod config;

use std::collections::HashMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use config::{resolve, ConfigFile};
use mvsk::dataset::{
    generate_dataset, load_dataset, make_splits, Dataset, DatasetSpec, SplitSet,
};
use mvsk::experiment::{
    export_qualitative, run_experiment, write_reports, ExperimentConfig, MetricKind,
    PredictorKind,
};
use mvsk::fusion::{
    carve_occupancy, fuse_point_cloud, fuse_tsdf, FuseMethod, DEFAULT_SILHOUETTE_THRESHOLD,
    DEFAULT_TSDF_TRUNCATION_VOXELS,
};
use mvsk::geom::{
    load_mesh, normalize_mesh, save_mesh, FrameMode, MeshFormat, RigSize, UnitVec3, Vec3, ViewRig,
};
use mvsk::image::MultiSurface;
use mvsk::mc::marching_cubes;
use mvsk::predict::{
    fit_retrieval, target_anchor, OraclePredictor, Predictor, Representation,
};
use mvsk::render::render_multisurface;
use mvsk::shapes::Category;
use mvsk::voxel::{object_voxel_target, viewer_voxel_target};
use mvsk::{Error, Result};

#[derive(Parser)]
#[command(name = "mvsk", version, about = "Multi-view surface shape kit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Render a mesh into per-branch silhouette and depth images.
    Render(RenderArgs),
    /// Voxelize a mesh into an occupancy grid file.
    Voxelize(VoxelizeArgs),
    /// Fuse a rendered branch directory into a point cloud or mesh.
    Fuse(FuseArgs),
    /// Generate or split a procedural dataset.
    #[command(subcommand)]
    Dataset(DatasetCmd),
    /// Run the frame-by-representation experiment sweep.
    #[command(subcommand)]
    Experiment(ExperimentCmd),
    /// Export one example's prediction for offline viewing.
    Export(ExportArgs),
}

#[derive(Subcommand)]
enum DatasetCmd {
    /// Generate a dataset directory from a seeded spec.
    Gen(DatasetGenArgs),
    /// Build NovelView/NovelModel/NovelClass splits for a dataset.
    Split(DatasetSplitArgs),
}

#[derive(Subcommand)]
enum ExperimentCmd {
    /// Evaluate a predictor over the test splits and write reports.
    Run(ExperimentRunArgs),
}

#[derive(Args)]
struct RenderArgs {
    /// Mesh file (OBJ or PLY); normalized to the unit sphere first.
    #[arg(long)]
    mesh: PathBuf,
    /// Rig size: 6 or 20 views.
    #[arg(long, default_value_t = 20)]
    views: usize,
    /// Frame mode: viewer or object.
    #[arg(long, default_value = "viewer")]
    frame: String,
    /// Input viewpoint direction as "x,y,z".
    #[arg(long, default_value = "1,1,1")]
    dir: String,
    /// Image resolution in pixels per side.
    #[arg(long, default_value_t = 128)]
    res: usize,
    /// Output directory for branch images plus rig.json.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct VoxelizeArgs {
    /// Mesh file (OBJ or PLY); normalized to the unit sphere first.
    #[arg(long)]
    mesh: PathBuf,
    /// Grid resolution per side.
    #[arg(long, default_value_t = 48)]
    grid: usize,
    /// Frame mode: viewer or object.
    #[arg(long, default_value = "viewer")]
    frame: String,
    /// Input viewpoint direction as "x,y,z" (viewer frame only).
    #[arg(long, default_value = "1,1,1")]
    dir: String,
    /// Rig size fixing the viewer camera basis: 6 or 20 views.
    #[arg(long, default_value_t = 20)]
    views: usize,
    /// Output voxel file.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct FuseArgs {
    /// Branch directory produced by `render` (must contain rig.json).
    #[arg(long = "in")]
    input: PathBuf,
    /// Fusion method: cloud, carve, or tsdf.
    #[arg(long, default_value = "tsdf")]
    method: String,
    /// Grid resolution per side for carve and tsdf.
    #[arg(long, default_value_t = 48)]
    grid: usize,
    /// Output file: .ply point cloud for cloud, .ply/.obj mesh otherwise.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct DatasetGenArgs {
    /// Config file with key = value settings.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output dataset directory (config key `out`).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Comma list of categories (config key `categories`).
    #[arg(long)]
    categories: Option<String>,
    /// Config key `instances_per_category`.
    #[arg(long)]
    instances_per_category: Option<usize>,
    /// Config key `views_per_instance`.
    #[arg(long)]
    views_per_instance: Option<usize>,
    /// Config key `seed`.
    #[arg(long)]
    seed: Option<u64>,
    /// Input image resolution (config key `resolution`).
    #[arg(long)]
    resolution: Option<usize>,
    /// Rig size: 6 or 20 (config key `rig_views`).
    #[arg(long)]
    rig_views: Option<usize>,
    /// Voxel target resolution (config key `grid_dim`).
    #[arg(long)]
    grid_dim: Option<usize>,
}

#[derive(Args)]
struct DatasetSplitArgs {
    /// Config file with key = value settings.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Dataset directory (config key `data`).
    #[arg(long)]
    data: Option<PathBuf>,
    /// Category held out entirely (config key `held_out_category`;
    /// defaults to the last category of the dataset).
    #[arg(long)]
    held_out_category: Option<String>,
    /// Fraction of views held out per instance (config key `view_fraction`).
    #[arg(long)]
    view_fraction: Option<f64>,
    /// Fraction of instances held out per category
    /// (config key `instance_fraction`).
    #[arg(long)]
    instance_fraction: Option<f64>,
    /// Output splits file (config key `out`; defaults to
    /// <data>/splits.json).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ExperimentRunArgs {
    /// Config file with key = value settings.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Dataset directory (config key `data`).
    #[arg(long)]
    data: Option<PathBuf>,
    /// Splits file from `dataset split` (config key `splits`).
    #[arg(long)]
    splits: Option<PathBuf>,
    /// Predictor: oracle or retrieval (config key `predictor`).
    #[arg(long)]
    predictor: Option<String>,
    /// Fusion for reconstruction metrics: cloud, carve, or tsdf
    /// (config key `fusion`).
    #[arg(long)]
    fusion: Option<String>,
    /// Comma list of frame modes (config key `frames`).
    #[arg(long)]
    frames: Option<String>,
    /// Comma list of representations (config key `representations`).
    #[arg(long)]
    representations: Option<String>,
    /// Comma list of metrics (config key `metrics`).
    #[arg(long)]
    metrics: Option<String>,
    /// Surface sampler seed (config key `sampler_seed`).
    #[arg(long)]
    sampler_seed: Option<u64>,
    /// JSON-lines records output path (config key `records`).
    #[arg(long)]
    records: Option<PathBuf>,
    /// CSV summary output path (config key `summary`).
    #[arg(long)]
    summary: Option<PathBuf>,
}

#[derive(Args)]
struct ExportArgs {
    /// Config file with key = value settings.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Dataset directory (config key `data`).
    #[arg(long)]
    data: Option<PathBuf>,
    /// Splits file, required for the retrieval predictor
    /// (config key `splits`).
    #[arg(long)]
    splits: Option<PathBuf>,
    /// Example id such as box-table-003-v02 (config key `example`).
    #[arg(long)]
    example: Option<String>,
    /// Frame mode: viewer or object (config key `frame`).
    #[arg(long)]
    frame: Option<String>,
    /// Representation: multi-surface or volumetric
    /// (config key `representation`).
    #[arg(long)]
    representation: Option<String>,
    /// Predictor: oracle or retrieval (config key `predictor`).
    #[arg(long)]
    predictor: Option<String>,
    /// Fusion used for the exported mesh (config key `fusion`).
    #[arg(long)]
    fusion: Option<String>,
    /// Output directory (config key `out`).
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Rig description written next to rendered branches so `fuse` can rebuild
/// the exact cameras.
#[derive(Serialize, Deserialize)]
struct RigMeta {
    views: usize,
    frame: String,
    anchor: [f64; 3],
}

/// Split assignment by example id; ids are resolved against the dataset
/// index order on load.
#[derive(Serialize, Deserialize)]
struct SplitsFile {
    held_out_category: String,
    view_fraction: f64,
    instance_fraction: f64,
    train: Vec<String>,
    novel_view: Vec<String>,
    novel_model: Vec<String>,
    novel_class: Vec<String>,
}

fn parse_dir(s: &str) -> Result<UnitVec3> {
    let parts: Vec<&str> = s.split(',').collect();
    if parts.len() != 3 {
        return Err(Error::Config(format!("direction '{s}' must be x,y,z")));
    }
    let mut v = [0.0f64; 3];
    for (slot, p) in v.iter_mut().zip(&parts) {
        *slot = p
            .trim()
            .parse()
            .map_err(|_| Error::Config(format!("direction component '{p}' is not a number")))?;
    }
    let vec = Vec3::new(v[0], v[1], v[2]);
    if vec.norm() == 0.0 {
        return Err(Error::Config("direction must be nonzero".into()));
    }
    Ok(UnitVec3::new_normalize(vec))
}

fn parse_list<T>(s: &str, parse: impl Fn(&str) -> Result<T>) -> Result<Vec<T>> {
    s.split(',').map(|p| parse(p.trim())).collect()
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io {
        path: path.to_path_buf(),
        source: e,
    })?;
    Ok(serde_json::from_str(&text)?)
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    std::fs::write(path, text).map_err(|e| Error::Io {
        path: path.to_path_buf(),
        source: e,
    })
}

fn mesh_format_for(path: &Path) -> MeshFormat {
    match path.extension().and_then(|e| e.to_str()) {
        Some("obj") => MeshFormat::Obj,
        _ => MeshFormat::PlyBinary,
    }
}

fn cmd_render(a: &RenderArgs) -> Result<()> {
    let mesh = normalize_mesh(&load_mesh(&a.mesh)?)?.0;
    let frame = FrameMode::parse(&a.frame)?;
    let anchor = target_anchor(frame, &parse_dir(&a.dir)?);
    let rig = ViewRig::build(anchor, RigSize::from_views(a.views)?, frame);
    let ms = render_multisurface(&mesh, &rig, a.res);
    ms.save_branches(&a.out)?;
    let meta = RigMeta {
        views: a.views,
        frame: frame.as_str().to_string(),
        anchor: [anchor.x, anchor.y, anchor.z],
    };
    write_json(&a.out.join("rig.json"), &meta)?;
    println!(
        "wrote {} branches at {}x{} to {}",
        ms.branches.len(),
        a.res,
        a.res,
        a.out.display()
    );
    Ok(())
}

fn cmd_voxelize(a: &VoxelizeArgs) -> Result<()> {
    let mesh = normalize_mesh(&load_mesh(&a.mesh)?)?.0;
    let grid = match FrameMode::parse(&a.frame)? {
        FrameMode::Viewer => {
            let rig = ViewRig::build(
                parse_dir(&a.dir)?,
                RigSize::from_views(a.views)?,
                FrameMode::Viewer,
            );
            viewer_voxel_target(&mesh, &rig.cameras[0], a.grid)?
        }
        FrameMode::Object => object_voxel_target(&mesh, a.grid)?,
    };
    grid.save(&a.out)?;
    println!("wrote {}^3 occupancy grid to {}", a.grid, a.out.display());
    Ok(())
}

fn cmd_fuse(a: &FuseArgs) -> Result<()> {
    let meta: RigMeta = read_json(&a.input.join("rig.json"))?;
    let anchor = Vec3::new(meta.anchor[0], meta.anchor[1], meta.anchor[2]);
    if anchor.norm() == 0.0 {
        return Err(Error::Config("rig.json anchor must be nonzero".into()));
    }
    let rig = ViewRig::build(
        UnitVec3::new_normalize(anchor),
        RigSize::from_views(meta.views)?,
        FrameMode::parse(&meta.frame)?,
    );
    let ms = MultiSurface::load_branches(&a.input, rig)?;
    match FuseMethod::parse(&a.method)? {
        FuseMethod::Cloud => {
            let cloud = fuse_point_cloud(&ms, DEFAULT_SILHOUETTE_THRESHOLD);
            cloud.save_ply(&a.out)?;
            println!("wrote {} oriented points to {}", cloud.points.len(), a.out.display());
        }
        FuseMethod::Carve => {
            let mesh = marching_cubes(&carve_occupancy(&ms, a.grid)?, 0.0)?;
            save_mesh(&mesh, &a.out, mesh_format_for(&a.out))?;
            println!("wrote carved mesh ({} triangles) to {}", mesh.triangles.len(), a.out.display());
        }
        FuseMethod::Tsdf => {
            let field = fuse_tsdf(&ms, a.grid, DEFAULT_TSDF_TRUNCATION_VOXELS)?;
            let mesh = marching_cubes(&field, 0.0)?;
            save_mesh(&mesh, &a.out, mesh_format_for(&a.out))?;
            println!("wrote fused mesh ({} triangles) to {}", mesh.triangles.len(), a.out.display());
        }
    }
    Ok(())
}

fn cmd_dataset_gen(a: &DatasetGenArgs) -> Result<()> {
    let cfg = ConfigFile::load_opt(a.config.as_ref())?;
    cfg.check_keys(&[
        "out",
        "categories",
        "instances_per_category",
        "views_per_instance",
        "seed",
        "resolution",
        "rig_views",
        "grid_dim",
    ])?;
    let defaults = DatasetSpec::default();
    let categories = match (a.categories.as_deref(), cfg.get("categories")) {
        (Some(s), _) | (None, Some(s)) => parse_list(s, Category::parse)?,
        (None, None) => defaults.categories,
    };
    let spec = DatasetSpec {
        categories,
        instances_per_category: resolve(
            a.instances_per_category,
            &cfg,
            "instances_per_category",
            Some(defaults.instances_per_category),
        )?,
        views_per_instance: resolve(
            a.views_per_instance,
            &cfg,
            "views_per_instance",
            Some(defaults.views_per_instance),
        )?,
        seed: resolve(a.seed, &cfg, "seed", Some(defaults.seed))?,
        resolution: resolve(a.resolution, &cfg, "resolution", Some(defaults.resolution))?,
        rig_size: RigSize::from_views(resolve(
            a.rig_views,
            &cfg,
            "rig_views",
            Some(defaults.rig_size.n_views()),
        )?)?,
        grid_dim: resolve(a.grid_dim, &cfg, "grid_dim", Some(defaults.grid_dim))?,
    };
    let out: PathBuf = resolve(a.out.clone(), &cfg, "out", None)?;
    log::info!("generating {} examples into {}", spec.n_examples(), out.display());
    let dataset = generate_dataset(&spec, &out)?;
    println!("wrote {} examples to {}", dataset.examples.len(), out.display());
    Ok(())
}

fn split_ids(dataset: &Dataset, indices: &[usize]) -> Vec<String> {
    indices.iter().map(|&i| dataset.examples[i].meta.example_id()).collect()
}

fn cmd_dataset_split(a: &DatasetSplitArgs) -> Result<()> {
    let cfg = ConfigFile::load_opt(a.config.as_ref())?;
    cfg.check_keys(&[
        "data",
        "held_out_category",
        "view_fraction",
        "instance_fraction",
        "out",
    ])?;
    let data: PathBuf = resolve(a.data.clone(), &cfg, "data", None)?;
    let dataset = load_dataset(&data)?;
    let held = match (a.held_out_category.as_deref(), cfg.get("held_out_category")) {
        (Some(s), _) | (None, Some(s)) => Category::parse(s)?,
        (None, None) => *dataset
            .spec
            .categories
            .last()
            .ok_or_else(|| Error::Config("dataset has no categories".into()))?,
    };
    let view_fraction = resolve(a.view_fraction, &cfg, "view_fraction", Some(0.25))?;
    let instance_fraction =
        resolve(a.instance_fraction, &cfg, "instance_fraction", Some(0.25))?;
    let out: PathBuf = resolve(a.out.clone(), &cfg, "out", Some(data.join("splits.json")))?;
    let set = make_splits(&dataset, held, view_fraction, instance_fraction)?;
    let file = SplitsFile {
        held_out_category: held.name().to_string(),
        view_fraction,
        instance_fraction,
        train: split_ids(&dataset, &set.train),
        novel_view: split_ids(&dataset, &set.novel_view),
        novel_model: split_ids(&dataset, &set.novel_model),
        novel_class: split_ids(&dataset, &set.novel_class),
    };
    write_json(&out, &file)?;
    println!(
        "wrote splits to {} (train {}, novel-view {}, novel-model {}, novel-class {})",
        out.display(),
        set.train.len(),
        set.novel_view.len(),
        set.novel_model.len(),
        set.novel_class.len()
    );
    Ok(())
}

fn load_splits(path: &Path, dataset: &Dataset) -> Result<SplitSet> {
    let file: SplitsFile = read_json(path)?;
    let mut by_id = HashMap::new();
    for (i, e) in dataset.examples.iter().enumerate() {
        by_id.insert(e.meta.example_id(), i);
    }
    let lookup = |ids: &[String]| -> Result<Vec<usize>> {
        ids.iter()
            .map(|id| {
                by_id
                    .get(id)
                    .copied()
                    .ok_or_else(|| Error::Config(format!("split example '{id}' not in dataset")))
            })
            .collect()
    };
    Ok(SplitSet {
        train: lookup(&file.train)?,
        novel_view: lookup(&file.novel_view)?,
        novel_model: lookup(&file.novel_model)?,
        novel_class: lookup(&file.novel_class)?,
    })
}

fn parse_quadrants(frames: &str, representations: &str) -> Result<Vec<(FrameMode, Representation)>> {
    let frames = parse_list(frames, FrameMode::parse)?;
    let representations = parse_list(representations, Representation::parse)?;
    let mut quadrants = Vec::new();
    for &f in &frames {
        for &r in &representations {
            quadrants.push((f, r));
        }
    }
    Ok(quadrants)
}

fn cmd_experiment_run(a: &ExperimentRunArgs) -> Result<()> {
    let cfg = ConfigFile::load_opt(a.config.as_ref())?;
    cfg.check_keys(&[
        "data",
        "splits",
        "predictor",
        "fusion",
        "frames",
        "representations",
        "metrics",
        "sampler_seed",
        "records",
        "summary",
    ])?;
    let data: PathBuf = resolve(a.data.clone(), &cfg, "data", None)?;
    let splits_path: PathBuf = resolve(a.splits.clone(), &cfg, "splits", None)?;
    let predictor = PredictorKind::parse(&resolve(
        a.predictor.clone(),
        &cfg,
        "predictor",
        Some("retrieval".to_string()),
    )?)?;
    let fusion = FuseMethod::parse(&resolve(
        a.fusion.clone(),
        &cfg,
        "fusion",
        Some("carve".to_string()),
    )?)?;
    let frames = resolve(a.frames.clone(), &cfg, "frames", Some("viewer,object".to_string()))?;
    let representations = resolve(
        a.representations.clone(),
        &cfg,
        "representations",
        Some("multi-surface,volumetric".to_string()),
    )?;
    let metrics = match (a.metrics.as_deref(), cfg.get("metrics")) {
        (Some(s), _) | (None, Some(s)) => parse_list(s, MetricKind::parse)?,
        (None, None) => MetricKind::ALL.to_vec(),
    };
    let sampler_seed = resolve(a.sampler_seed, &cfg, "sampler_seed", Some(0))?;
    let records_path: PathBuf = resolve(a.records.clone(), &cfg, "records", None)?;
    let summary_path: PathBuf = resolve(a.summary.clone(), &cfg, "summary", None)?;
    let config = ExperimentConfig {
        predictor,
        fusion,
        quadrants: parse_quadrants(&frames, &representations)?,
        metrics,
        sampler_seed,
    };
    log::info!("loading dataset from {}", data.display());
    let dataset = load_dataset(&data)?;
    let splits = load_splits(&splits_path, &dataset)?;
    let outcome = run_experiment(&dataset, &splits, &config)?;
    write_reports(&outcome, &records_path, &summary_path)?;
    println!(
        "wrote {} records to {} and {} summary rows to {}",
        outcome.records.len(),
        records_path.display(),
        outcome.summary.len(),
        summary_path.display()
    );
    Ok(())
}

fn cmd_export(a: &ExportArgs) -> Result<()> {
    let cfg = ConfigFile::load_opt(a.config.as_ref())?;
    cfg.check_keys(&[
        "data",
        "splits",
        "example",
        "frame",
        "representation",
        "predictor",
        "fusion",
        "out",
    ])?;
    let data: PathBuf = resolve(a.data.clone(), &cfg, "data", None)?;
    let example_id: String = resolve(a.example.clone(), &cfg, "example", None)?;
    let frame = FrameMode::parse(&resolve(
        a.frame.clone(),
        &cfg,
        "frame",
        Some("viewer".to_string()),
    )?)?;
    let representation = Representation::parse(&resolve(
        a.representation.clone(),
        &cfg,
        "representation",
        Some("multi-surface".to_string()),
    )?)?;
    let predictor_kind = PredictorKind::parse(&resolve(
        a.predictor.clone(),
        &cfg,
        "predictor",
        Some("retrieval".to_string()),
    )?)?;
    let fusion = FuseMethod::parse(&resolve(
        a.fusion.clone(),
        &cfg,
        "fusion",
        Some("tsdf".to_string()),
    )?)?;
    let out: PathBuf = resolve(a.out.clone(), &cfg, "out", None)?;

    let dataset = load_dataset(&data)?;
    let index = dataset
        .examples
        .iter()
        .position(|e| e.meta.example_id() == example_id)
        .ok_or_else(|| Error::Config(format!("example '{example_id}' not in dataset")))?;
    let params = dataset.spec.target_params(frame, representation);
    let predictor: Box<dyn Predictor> = match predictor_kind {
        PredictorKind::Oracle => {
            let all: Vec<usize> = (0..dataset.examples.len()).collect();
            let gallery = mvsk::dataset::gallery_from_dataset(&dataset, &all, &params)?;
            Box::new(OraclePredictor::from_gallery(gallery)?)
        }
        PredictorKind::Retrieval => {
            let splits_path: PathBuf = resolve(a.splits.clone(), &cfg, "splits", None)?;
            let splits = load_splits(&splits_path, &dataset)?;
            let gallery = mvsk::dataset::gallery_from_dataset(&dataset, &splits.train, &params)?;
            Box::new(fit_retrieval(gallery)?)
        }
    };
    let example = &dataset.examples[index];
    let prediction = predictor.predict(&example.input)?;
    export_qualitative(example, &prediction, fusion, dataset.spec.grid_dim, &out)?;
    println!("exported {example_id} to {}", out.display());
    Ok(())
}

fn run(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Render(a) => cmd_render(a),
        Command::Voxelize(a) => cmd_voxelize(a),
        Command::Fuse(a) => cmd_fuse(a),
        Command::Dataset(DatasetCmd::Gen(a)) => cmd_dataset_gen(a),
        Command::Dataset(DatasetCmd::Split(a)) => cmd_dataset_split(a),
        Command::Experiment(ExperimentCmd::Run(a)) => cmd_experiment_run(a),
        Command::Export(a) => cmd_export(a),
    }
}

/// Exit codes: 0 success, 2 configuration or input-file problems,
/// 3 geometry failures.
fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Config(_)
        | Error::InsufficientData(_)
        | Error::NotFitted
        | Error::EmptyGallery
        | Error::InconsistentGallery(_)
        | Error::OracleMiss
        | Error::Parse { .. }
        | Error::UnsupportedFeature { .. }
        | Error::Io { .. }
        | Error::Json(_) => 2,
        Error::EmptyMesh
        | Error::ZeroArea
        | Error::EmptySilhouette
        | Error::OutOfWindow
        | Error::NoObservations
        | Error::NoCrossing(_)
        | Error::FrameMismatch(..)
        | Error::DimMismatch(..)
        | Error::ResolutionMismatch(..)
        | Error::EmptyMask => 3,
    }
}

fn main() -> ExitCode {
    env_logger::init();
    let cli = Cli::parse();
    match mvsk::run_with_thread_cap(|| run(&cli)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
