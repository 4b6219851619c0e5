//! Frame-mode by representation experiment sweep: per-example evaluation
//! records plus per-(split, frame, representation, metric) mean summaries,
//! written as JSON lines and CSV.

use std::fmt::Write as _;
use std::path::Path;

use rayon::prelude::*;
use serde::Serialize;

use crate::dataset::{gallery_from_dataset, Dataset, Example, Split, SplitSet};
use crate::fusion::{
    carve_occupancy, fuse_point_cloud, fuse_tsdf, FuseMethod, DEFAULT_SILHOUETTE_THRESHOLD,
    DEFAULT_TSDF_TRUNCATION_VOXELS,
};
use crate::geom::{save_mesh, FrameMode, MeshFormat, TriMesh};
use crate::mc::marching_cubes;
use crate::metrics::{
    depth_error, multisurface_silhouette_iou, projection_loss, surface_distance, voxel_iou,
    EvalRecord, SurfaceSampler, DEFAULT_PROJECTION_K,
};
use crate::predict::{
    fit_retrieval, make_targets, OraclePredictor, Prediction, Predictor, Representation,
};
use crate::{Error, Result};

/// Frame label used in records and reports.
pub fn frame_label(frame: FrameMode) -> &'static str {
    match frame {
        FrameMode::Viewer => "View-centered",
        FrameMode::Object => "Obj-centered",
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PredictorKind {
    Oracle,
    Retrieval,
}

impl PredictorKind {
    pub fn parse(s: &str) -> Result<PredictorKind> {
        match s {
            "oracle" => Ok(PredictorKind::Oracle),
            "retrieval" => Ok(PredictorKind::Retrieval),
            other => Err(Error::Config(format!(
                "unknown predictor '{other}' (expected oracle or retrieval)"
            ))),
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            PredictorKind::Oracle => "oracle",
            PredictorKind::Retrieval => "retrieval",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MetricKind {
    VoxelIou,
    SurfaceDist,
    SilhouetteIou,
    DepthErr,
    ProjLoss,
}

impl MetricKind {
    pub const ALL: [MetricKind; 5] = [
        MetricKind::VoxelIou,
        MetricKind::SurfaceDist,
        MetricKind::SilhouetteIou,
        MetricKind::DepthErr,
        MetricKind::ProjLoss,
    ];

    pub fn parse(s: &str) -> Result<MetricKind> {
        match s {
            "voxel_iou" => Ok(MetricKind::VoxelIou),
            "surface_dist" => Ok(MetricKind::SurfaceDist),
            "silhouette_iou" => Ok(MetricKind::SilhouetteIou),
            "depth_err" => Ok(MetricKind::DepthErr),
            "proj_loss" => Ok(MetricKind::ProjLoss),
            other => Err(Error::Config(format!("unknown metric '{other}'"))),
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            MetricKind::VoxelIou => "voxel_iou",
            MetricKind::SurfaceDist => "surface_dist",
            MetricKind::SilhouetteIou => "silhouette_iou",
            MetricKind::DepthErr => "depth_err",
            MetricKind::ProjLoss => "proj_loss",
        }
    }
}

/// Experiment over the test splits of one dataset. Every requested
/// (frame, representation) quadrant fits its own predictor and is scored
/// with the requested metrics; fusion picks the mesh reconstruction used
/// for `surface_dist` on multi-surface predictions.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub predictor: PredictorKind,
    pub fusion: FuseMethod,
    pub quadrants: Vec<(FrameMode, Representation)>,
    pub metrics: Vec<MetricKind>,
    pub sampler_seed: u64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            predictor: PredictorKind::Retrieval,
            fusion: FuseMethod::Carve,
            quadrants: vec![
                (FrameMode::Viewer, Representation::MultiSurface),
                (FrameMode::Viewer, Representation::Volumetric),
                (FrameMode::Object, Representation::MultiSurface),
                (FrameMode::Object, Representation::Volumetric),
            ],
            metrics: MetricKind::ALL.to_vec(),
            sampler_seed: 0,
        }
    }
}

/// One row of the CSV summary.
#[derive(Debug, Clone, Serialize)]
pub struct SummaryRow {
    pub split: String,
    pub frame: String,
    pub representation: String,
    pub metric: String,
    pub mean: f64,
}

/// Records are ordered by quadrant, then split, then example; the summary
/// row order matches the record order with metrics in declaration order
/// (`depth_rmse` directly after `depth_err`).
#[derive(Debug, Clone)]
pub struct ExperimentOutcome {
    pub records: Vec<(Representation, EvalRecord)>,
    pub summary: Vec<SummaryRow>,
}

fn validate(dataset: &Dataset, splits: &SplitSet, config: &ExperimentConfig) -> Result<()> {
    if config.quadrants.is_empty() {
        return Err(Error::Config("experiment has no quadrants".into()));
    }
    if config.metrics.is_empty() {
        return Err(Error::Config("experiment has no metrics".into()));
    }
    for (i, q) in config.quadrants.iter().enumerate() {
        if config.quadrants[..i].contains(q) {
            return Err(Error::Config(format!(
                "duplicate quadrant {} {}",
                q.0.as_str(),
                q.1.as_str()
            )));
        }
    }
    if config.fusion == FuseMethod::Cloud && config.metrics.contains(&MetricKind::SurfaceDist) {
        return Err(Error::Config(
            "cloud fusion produces no mesh; surface_dist needs carve or tsdf".into(),
        ));
    }
    if config.predictor == PredictorKind::Retrieval && splits.train.is_empty() {
        return Err(Error::EmptyGallery);
    }
    crate::dataset::verify_splits(dataset, splits)
}

struct QuadrantCtx<'a> {
    config: &'a ExperimentConfig,
    params: crate::predict::TargetParams,
    frame: FrameMode,
    sampler: SurfaceSampler,
}

/// Extracts a mesh from a prediction: marching cubes on voxel grids, and on
/// the carved or TSDF-fused field for multi-surface sets. `None` when the
/// prediction yields no surface to extract.
fn reconstruct(pred: &Prediction, fusion: FuseMethod, dim: usize) -> Result<Option<TriMesh>> {
    let mesh = match pred {
        Prediction::Voxels(grid) => marching_cubes(grid, 0.0),
        Prediction::MultiSurface(ms) => match fusion {
            FuseMethod::Carve => match carve_occupancy(ms, dim) {
                Ok(grid) => marching_cubes(&grid, 0.0),
                Err(e) => Err(e),
            },
            FuseMethod::Tsdf => match fuse_tsdf(ms, dim, DEFAULT_TSDF_TRUNCATION_VOXELS) {
                Ok(field) => marching_cubes(&field, 0.0),
                Err(e) => Err(e),
            },
            FuseMethod::Cloud => {
                return Err(Error::Config("cloud fusion produces no mesh".into()))
            }
        },
    };
    match mesh {
        Ok(m) => Ok(Some(m)),
        Err(Error::NoCrossing(_)) | Err(Error::NoObservations) => Ok(None),
        Err(e) => Err(e),
    }
}

/// Surface distance between the reconstructions of two same-frame
/// predictions; `None` when either reconstruction is degenerate.
fn reconstruction_distance(
    gt: &Prediction,
    pred: &Prediction,
    fusion: FuseMethod,
    dim: usize,
    sampler: &SurfaceSampler,
) -> Result<Option<f64>> {
    let (Some(g), Some(p)) = (reconstruct(gt, fusion, dim)?, reconstruct(pred, fusion, dim)?)
    else {
        return Ok(None);
    };
    match surface_distance(&g, &p, sampler) {
        Ok(d) => Ok(Some(d)),
        Err(Error::ZeroArea) | Err(Error::EmptyMesh) => Ok(None),
        Err(e) => Err(e),
    }
}

fn evaluate_example(
    dataset: &Dataset,
    index: usize,
    split: Split,
    ctx: &QuadrantCtx,
    predictor: &dyn Predictor,
) -> Result<EvalRecord> {
    let e = &dataset.examples[index];
    let gt = make_targets(&e.mesh, &e.input_dir, &ctx.params)?;
    let pred = predictor.predict(&e.input)?;
    let want = |m: MetricKind| ctx.config.metrics.contains(&m);
    let mut record = EvalRecord {
        example_id: e.meta.example_id(),
        frame: frame_label(ctx.frame).to_string(),
        split: split.as_str().to_string(),
        voxel_iou: None,
        surface_dist: None,
        silhouette_iou: None,
        depth_err: None,
        proj_loss: None,
    };
    match (&gt, &pred) {
        (Prediction::MultiSurface(g), Prediction::MultiSurface(p)) => {
            if want(MetricKind::SilhouetteIou) {
                record.silhouette_iou =
                    Some(multisurface_silhouette_iou(p, g, DEFAULT_SILHOUETTE_THRESHOLD)?);
            }
            if want(MetricKind::DepthErr) {
                record.depth_err = Some(depth_error(p, g)?);
            }
            if want(MetricKind::ProjLoss) {
                record.proj_loss = Some(projection_loss(p, g, DEFAULT_PROJECTION_K)?);
            }
            if want(MetricKind::VoxelIou) {
                let gv = carve_occupancy(g, ctx.params.grid_dim)?;
                let pv = carve_occupancy(p, ctx.params.grid_dim)?;
                record.voxel_iou = Some(voxel_iou(&pv, &gv)?);
            }
        }
        (Prediction::Voxels(g), Prediction::Voxels(p)) => {
            if want(MetricKind::VoxelIou) {
                record.voxel_iou = Some(voxel_iou(p, g)?);
            }
        }
        _ => {
            return Err(Error::Config(
                "prediction and target disagree on representation".into(),
            ))
        }
    }
    if want(MetricKind::SurfaceDist) {
        record.surface_dist = reconstruction_distance(
            &gt,
            &pred,
            ctx.config.fusion,
            ctx.params.grid_dim,
            &ctx.sampler,
        )?;
    }
    Ok(record)
}

fn run_quadrant(
    dataset: &Dataset,
    splits: &SplitSet,
    config: &ExperimentConfig,
    frame: FrameMode,
    representation: Representation,
    out: &mut Vec<(Representation, EvalRecord)>,
) -> Result<()> {
    let params = dataset.spec.target_params(frame, representation);
    let predictor: Box<dyn Predictor + Sync> = match config.predictor {
        PredictorKind::Oracle => {
            let all: Vec<usize> = (0..dataset.examples.len()).collect();
            let gallery = gallery_from_dataset(dataset, &all, &params)?;
            Box::new(OraclePredictor::from_gallery(gallery)?)
        }
        PredictorKind::Retrieval => {
            let gallery = gallery_from_dataset(dataset, &splits.train, &params)?;
            Box::new(fit_retrieval(gallery)?)
        }
    };
    let ctx = QuadrantCtx {
        config,
        params,
        frame,
        sampler: SurfaceSampler {
            seed: config.sampler_seed,
            ..SurfaceSampler::default()
        },
    };
    for split in Split::TEST_SPLITS {
        let records = splits
            .indices(split)
            .par_iter()
            .map(|&i| evaluate_example(dataset, i, split, &ctx, predictor.as_ref()))
            .collect::<Result<Vec<_>>>()?;
        out.extend(records.into_iter().map(|r| (representation, r)));
    }
    Ok(())
}

fn metric_value(record: &EvalRecord, metric: MetricKind) -> Option<f64> {
    match metric {
        MetricKind::VoxelIou => record.voxel_iou,
        MetricKind::SurfaceDist => record.surface_dist,
        MetricKind::SilhouetteIou => record.silhouette_iou,
        MetricKind::DepthErr => record.depth_err,
        MetricKind::ProjLoss => record.proj_loss,
    }
}

/// Means are computed by serial summation in record order; `depth_rmse` is
/// the square root of the `depth_err` mean. Rows with no finite values are
/// omitted.
fn summarize(
    records: &[(Representation, EvalRecord)],
    config: &ExperimentConfig,
) -> Vec<SummaryRow> {
    let mut names: Vec<(MetricKind, &'static str)> = Vec::new();
    for m in MetricKind::ALL {
        if !config.metrics.contains(&m) {
            continue;
        }
        names.push((m, m.as_str()));
        if m == MetricKind::DepthErr {
            names.push((m, "depth_rmse"));
        }
    }
    let mut rows = Vec::new();
    for &(frame, representation) in &config.quadrants {
        let flabel = frame_label(frame);
        for &(metric, name) in &names {
            for split in Split::TEST_SPLITS {
                let values: Vec<f64> = records
                    .iter()
                    .filter(|(r, rec)| {
                        *r == representation && rec.frame == flabel && rec.split == split.as_str()
                    })
                    .filter_map(|(_, rec)| metric_value(rec, metric))
                    .collect();
                if values.is_empty() {
                    continue;
                }
                let mut mean = values.iter().sum::<f64>() / values.len() as f64;
                if name == "depth_rmse" {
                    mean = mean.sqrt();
                }
                rows.push(SummaryRow {
                    split: split.as_str().to_string(),
                    frame: flabel.to_string(),
                    representation: representation.as_str().to_string(),
                    metric: name.to_string(),
                    mean,
                });
            }
        }
    }
    rows
}

/// Runs every requested quadrant over the test splits. Configuration
/// problems fail here before any prediction runs.
pub fn run_experiment(
    dataset: &Dataset,
    splits: &SplitSet,
    config: &ExperimentConfig,
) -> Result<ExperimentOutcome> {
    validate(dataset, splits, config)?;
    let mut records = Vec::new();
    for &(frame, representation) in &config.quadrants {
        run_quadrant(dataset, splits, config, frame, representation, &mut records)?;
    }
    let summary = summarize(&records, config);
    Ok(ExperimentOutcome { records, summary })
}

#[derive(Serialize)]
struct RecordLine<'a> {
    representation: &'a str,
    #[serde(flatten)]
    record: &'a EvalRecord,
}

/// Writes per-example records as JSON lines and the summary as CSV with
/// header `split,frame,representation,metric,mean`.
pub fn write_reports(
    outcome: &ExperimentOutcome,
    records_path: &Path,
    summary_path: &Path,
) -> Result<()> {
    let mut lines = String::new();
    for (representation, record) in &outcome.records {
        lines.push_str(&serde_json::to_string(&RecordLine {
            representation: representation.as_str(),
            record,
        })?);
        lines.push('\n');
    }
    std::fs::write(records_path, lines).map_err(|e| Error::io(records_path, e))?;
    let mut csv = String::from("split,frame,representation,metric,mean\n");
    for row in &outcome.summary {
        let _ = writeln!(
            csv,
            "{},{},{},{},{}",
            row.split, row.frame, row.representation, row.metric, row.mean
        );
    }
    std::fs::write(summary_path, csv).map_err(|e| Error::io(summary_path, e))?;
    Ok(())
}

/// Dumps one prediction for inspection: the input images, and per
/// representation either branch images plus fused point cloud plus
/// reconstructed mesh, or the voxel grid plus reconstructed mesh. A cloud
/// fusion setting falls back to TSDF for the mesh.
pub fn export_qualitative(
    example: &Example,
    prediction: &Prediction,
    fusion: FuseMethod,
    grid_dim: usize,
    out_dir: &Path,
) -> Result<()> {
    std::fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    example.input.depth.save(&out_dir.join("input_depth.msdi"))?;
    example.input.silhouette.save(&out_dir.join("input_sil.pgm"))?;
    let mesh_method = if fusion == FuseMethod::Cloud {
        FuseMethod::Tsdf
    } else {
        fusion
    };
    match prediction {
        Prediction::MultiSurface(ms) => {
            ms.save_branches(&out_dir.join("branches"))?;
            fuse_point_cloud(ms, DEFAULT_SILHOUETTE_THRESHOLD)
                .save_ply(&out_dir.join("fused_cloud.ply"))?;
        }
        Prediction::Voxels(grid) => {
            grid.save(&out_dir.join("prediction.msvx"))?;
        }
    }
    if let Some(mesh) = reconstruct(prediction, mesh_method, grid_dim)? {
        save_mesh(&mesh, &out_dir.join("recon.obj"), MeshFormat::Obj)?;
    }
    Ok(())
}
