//! Shape predictors: the oracle (exact ground-truth lookup) and
//! nearest-neighbor retrieval, each in viewer- or object-centered mode.

use std::path::Path;

use rayon::prelude::*;

use crate::geom::{FrameMode, RigSize, TriMesh, UnitVec3, ViewRig};
use crate::image::{DepthImage, MultiSurface, Silhouette};
use crate::metrics::DEPTH_MISS_PENALTY;
use crate::render::render_multisurface;
use crate::voxel::{object_voxel_target, viewer_voxel_target, VoxelGrid};
use crate::{canonical_direction, Error, Result};

pub const RETRIEVAL_DEPTH_WEIGHT: f64 = 0.8;
pub const RETRIEVAL_SILHOUETTE_WEIGHT: f64 = 0.2;

/// Which 3D output a predictor produces.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Representation {
    MultiSurface,
    Volumetric,
}

impl Representation {
    pub fn as_str(self) -> &'static str {
        match self {
            Representation::MultiSurface => "multi-surface",
            Representation::Volumetric => "volumetric",
        }
    }

    pub fn parse(s: &str) -> Result<Representation> {
        match s {
            "multi-surface" => Ok(Representation::MultiSurface),
            "volumetric" => Ok(Representation::Volumetric),
            other => Err(Error::Config(format!("unknown representation '{other}'"))),
        }
    }
}

/// Normalized single-view observation: front depth plus silhouette.
#[derive(Debug, Clone, PartialEq)]
pub struct PredictorInput {
    pub depth: DepthImage,
    pub silhouette: Silhouette,
}

/// A predictor's 3D output, tagged with its coordinate frame.
#[derive(Debug, Clone, PartialEq)]
pub enum Prediction {
    MultiSurface(MultiSurface),
    Voxels(VoxelGrid),
}

impl Prediction {
    pub fn representation(&self) -> Representation {
        match self {
            Prediction::MultiSurface(_) => Representation::MultiSurface,
            Prediction::Voxels(_) => Representation::Volumetric,
        }
    }

    pub fn frame(&self) -> FrameMode {
        match self {
            Prediction::MultiSurface(ms) => ms.rig.frame_mode,
            Prediction::Voxels(grid) => grid.frame(),
        }
    }

    pub fn as_multi_surface(&self) -> Option<&MultiSurface> {
        match self {
            Prediction::MultiSurface(ms) => Some(ms),
            Prediction::Voxels(_) => None,
        }
    }

    pub fn as_voxels(&self) -> Option<&VoxelGrid> {
        match self {
            Prediction::Voxels(grid) => Some(grid),
            Prediction::MultiSurface(_) => None,
        }
    }
}

/// Identifies where a gallery entry came from.
#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct ExampleMeta {
    pub category_id: String,
    pub model_id: String,
    pub view_id: usize,
}

impl ExampleMeta {
    /// Stable per-example identifier used in records and split files.
    pub fn example_id(&self) -> String {
        format!("{}-v{:02}", self.model_id, self.view_id)
    }
}

#[derive(Debug, Clone)]
pub struct GalleryEntry {
    pub input: PredictorInput,
    pub target: Prediction,
    pub meta: ExampleMeta,
    /// Direction the target's rig or voxel window was anchored to.
    pub anchor_dir: UnitVec3,
}

/// Immutable (input, target) store shared by the oracle and retrieval
/// predictors. All targets share representation, frame, rig size, and
/// resolution.
#[derive(Debug, Clone, Default)]
pub struct Gallery {
    pub entries: Vec<GalleryEntry>,
}

impl Gallery {
    pub fn validate(&self) -> Result<()> {
        let first = self.entries.first().ok_or(Error::EmptyGallery)?;
        let kind = first.target.representation();
        let frame = first.target.frame();
        let input_res = (first.input.depth.width, first.input.depth.height);
        for (i, e) in self.entries.iter().enumerate() {
            let mismatch = |what: &str| {
                Err(Error::InconsistentGallery(format!("entry {i}: {what}")))
            };
            if e.target.representation() != kind {
                return mismatch("representation differs");
            }
            if e.target.frame() != frame {
                return mismatch("frame differs");
            }
            if (e.input.depth.width, e.input.depth.height) != input_res
                || (e.input.silhouette.width, e.input.silhouette.height) != input_res
            {
                return mismatch("input resolution differs");
            }
            match (&first.target, &e.target) {
                (Prediction::MultiSurface(a), Prediction::MultiSurface(b)) => {
                    if a.branches.len() != b.branches.len() || a.resolution() != b.resolution() {
                        return mismatch("rig size or resolution differs");
                    }
                }
                (Prediction::Voxels(a), Prediction::Voxels(b)) => {
                    if a.dim() != b.dim() {
                        return mismatch("grid dims differ");
                    }
                }
                _ => unreachable!("kind checked above"),
            }
        }
        Ok(())
    }
}

pub trait Predictor {
    /// Deterministic prediction for a normalized input.
    fn predict(&self, input: &PredictorInput) -> Result<Prediction>;
}

/// Returns the stored ground-truth target for inputs it has seen, errors on
/// anything else. Stands in for a perfectly trained network.
#[derive(Debug, Clone)]
pub struct OraclePredictor {
    gallery: Gallery,
}

impl OraclePredictor {
    pub fn from_gallery(gallery: Gallery) -> Result<OraclePredictor> {
        gallery.validate()?;
        Ok(OraclePredictor { gallery })
    }
}

impl Predictor for OraclePredictor {
    fn predict(&self, input: &PredictorInput) -> Result<Prediction> {
        self.gallery
            .entries
            .iter()
            .find(|e| e.input == *input)
            .map(|e| e.target.clone())
            .ok_or(Error::OracleMiss)
    }
}

/// Input dissimilarity: 0.8 * masked depth MSE + 0.2 * silhouette Hamming
/// fraction. Depth pixels count where either silhouette is set; a background
/// depth on a counted pixel costs DEPTH_MISS_PENALTY².
pub fn input_distance(a: &PredictorInput, b: &PredictorInput) -> f64 {
    let (w, h) = (a.silhouette.width, a.silhouette.height);
    let (mut hamming, mut masked, mut sq) = (0u64, 0u64, 0.0);
    for y in 0..h {
        for x in 0..w {
            let ia = a.silhouette.is_inside(x, y);
            let ib = b.silhouette.is_inside(x, y);
            hamming += (ia != ib) as u64;
            if !(ia || ib) {
                continue;
            }
            masked += 1;
            if a.depth.is_background(x, y) || b.depth.is_background(x, y) {
                sq += DEPTH_MISS_PENALTY * DEPTH_MISS_PENALTY;
            } else {
                let d = a.depth.get(x, y) - b.depth.get(x, y);
                sq += d * d;
            }
        }
    }
    let depth_term = if masked == 0 { 0.0 } else { sq / masked as f64 };
    RETRIEVAL_DEPTH_WEIGHT * depth_term
        + RETRIEVAL_SILHOUETTE_WEIGHT * hamming as f64 / (w * h) as f64
}

/// Nearest-neighbor lookup over a gallery; the nearest entry's target is
/// returned verbatim. Ties break to the smallest gallery index.
#[derive(Debug, Clone, Default)]
pub struct RetrievalPredictor {
    gallery: Option<Gallery>,
}

impl RetrievalPredictor {
    pub fn new() -> RetrievalPredictor {
        RetrievalPredictor::default()
    }

    pub fn fit(&mut self, gallery: Gallery) -> Result<()> {
        gallery.validate()?;
        self.gallery = Some(gallery);
        Ok(())
    }

    /// Index of the nearest gallery entry to `input`.
    pub fn nearest_index(&self, input: &PredictorInput) -> Result<usize> {
        let gallery = self.gallery.as_ref().ok_or(Error::NotFitted)?;
        let first = &gallery.entries[0].input;
        if input.depth.width != first.depth.width || input.depth.height != first.depth.height {
            return Err(Error::ResolutionMismatch(
                input.depth.width,
                input.depth.height,
                first.depth.width,
                first.depth.height,
            ));
        }
        let distances: Vec<f64> = gallery
            .entries
            .par_iter()
            .map(|e| input_distance(input, &e.input))
            .collect();
        let mut best = 0;
        for (i, &d) in distances.iter().enumerate() {
            if d < distances[best] {
                best = i;
            }
        }
        Ok(best)
    }

    pub fn entry(&self, index: usize) -> Option<&GalleryEntry> {
        self.gallery.as_ref().and_then(|g| g.entries.get(index))
    }
}

impl Predictor for RetrievalPredictor {
    fn predict(&self, input: &PredictorInput) -> Result<Prediction> {
        let best = self.nearest_index(input)?;
        Ok(self.gallery.as_ref().unwrap().entries[best].target.clone())
    }
}

pub fn fit_retrieval(gallery: Gallery) -> Result<RetrievalPredictor> {
    let mut predictor = RetrievalPredictor::new();
    predictor.fit(gallery)?;
    Ok(predictor)
}

/// Ground-truth target construction shared by dataset generation and tests.
#[derive(Debug, Clone, Copy)]
pub struct TargetParams {
    pub frame: FrameMode,
    pub representation: Representation,
    pub rig_size: RigSize,
    pub resolution: usize,
    pub grid_dim: usize,
}

/// Anchor direction a target is built around: the input view in viewer mode,
/// the canonical direction in object mode.
pub fn target_anchor(frame: FrameMode, input_dir: &UnitVec3) -> UnitVec3 {
    match frame {
        FrameMode::Viewer => *input_dir,
        FrameMode::Object => canonical_direction(),
    }
}

/// Builds the ground-truth target for one (mesh, view) example. Viewer mode
/// anchors the rig or voxel window to `input_dir` (camera 0 is the input
/// view); object mode anchors to the canonical direction regardless of view.
pub fn make_targets(mesh: &TriMesh, input_dir: &UnitVec3, params: &TargetParams) -> Result<Prediction> {
    let anchor = target_anchor(params.frame, input_dir);
    match params.representation {
        Representation::MultiSurface => {
            let rig = ViewRig::build(anchor, params.rig_size, params.frame);
            Ok(Prediction::MultiSurface(render_multisurface(
                mesh,
                &rig,
                params.resolution,
            )))
        }
        Representation::Volumetric => {
            let grid = match params.frame {
                FrameMode::Viewer => {
                    let rig = ViewRig::build(anchor, params.rig_size, params.frame);
                    viewer_voxel_target(mesh, &rig.cameras[0], params.grid_dim)?
                }
                FrameMode::Object => object_voxel_target(mesh, params.grid_dim)?,
            };
            Ok(Prediction::Voxels(grid))
        }
    }
}

#[derive(serde::Serialize, serde::Deserialize)]
struct GalleryManifest {
    representation: String,
    frame: String,
    rig_views: usize,
    entries: Vec<ManifestEntry>,
}

#[derive(serde::Serialize, serde::Deserialize)]
struct ManifestEntry {
    #[serde(flatten)]
    meta: ExampleMeta,
    anchor_dir: [f64; 3],
}

fn entry_dir(root: &Path, i: usize) -> std::path::PathBuf {
    root.join(format!("e{i:05}"))
}

/// Persists a gallery as a directory: gallery.json plus one subdirectory per
/// entry holding the input images and target files.
pub fn save_gallery(gallery: &Gallery, dir: &Path) -> Result<()> {
    gallery.validate()?;
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir.to_path_buf(), e))?;
    let first = &gallery.entries[0];
    let rig_views = match &first.target {
        Prediction::MultiSurface(ms) => ms.rig.cameras.len(),
        Prediction::Voxels(_) => 0,
    };
    let manifest = GalleryManifest {
        representation: first.target.representation().as_str().into(),
        frame: first.target.frame().as_str().into(),
        rig_views,
        entries: gallery
            .entries
            .iter()
            .map(|e| ManifestEntry {
                meta: e.meta.clone(),
                anchor_dir: [e.anchor_dir.x, e.anchor_dir.y, e.anchor_dir.z],
            })
            .collect(),
    };
    let json = serde_json::to_string_pretty(&manifest)?;
    let index_path = dir.join("gallery.json");
    std::fs::write(&index_path, json).map_err(|e| Error::io(index_path, e))?;
    for (i, e) in gallery.entries.iter().enumerate() {
        let edir = entry_dir(dir, i);
        std::fs::create_dir_all(&edir).map_err(|err| Error::io(edir.clone(), err))?;
        e.input.depth.save(&edir.join("input_depth.msdi"))?;
        e.input.silhouette.save(&edir.join("input_sil.pgm"))?;
        match &e.target {
            Prediction::MultiSurface(ms) => ms.save_branches(&edir)?,
            Prediction::Voxels(grid) => grid.save(&edir.join("target.msvx"))?,
        }
    }
    Ok(())
}

/// Loads a gallery written by [`save_gallery`]. Multi-surface rigs are
/// rebuilt from the stored anchor directions.
pub fn load_gallery(dir: &Path) -> Result<Gallery> {
    let index_path = dir.join("gallery.json");
    let json = std::fs::read_to_string(&index_path).map_err(|e| Error::io(index_path, e))?;
    let manifest: GalleryManifest = serde_json::from_str(&json)?;
    let representation = Representation::parse(&manifest.representation)?;
    let frame = FrameMode::parse(&manifest.frame)?;
    let entries = manifest
        .entries
        .iter()
        .enumerate()
        .map(|(i, m)| {
            let edir = entry_dir(dir, i);
            let anchor_dir = UnitVec3::new_normalize(crate::geom::Vec3::new(
                m.anchor_dir[0],
                m.anchor_dir[1],
                m.anchor_dir[2],
            ));
            let target = match representation {
                Representation::MultiSurface => {
                    let size = RigSize::from_views(manifest.rig_views)?;
                    let rig = ViewRig::build(anchor_dir, size, frame);
                    Prediction::MultiSurface(MultiSurface::load_branches(&edir, rig)?)
                }
                Representation::Volumetric => {
                    Prediction::Voxels(VoxelGrid::load(&edir.join("target.msvx"))?)
                }
            };
            Ok(GalleryEntry {
                input: PredictorInput {
                    depth: DepthImage::load(&edir.join("input_depth.msdi"))?,
                    silhouette: Silhouette::load(&edir.join("input_sil.pgm"))?,
                },
                target,
                meta: m.meta.clone(),
                anchor_dir,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let gallery = Gallery { entries };
    gallery.validate()?;
    Ok(gallery)
}
