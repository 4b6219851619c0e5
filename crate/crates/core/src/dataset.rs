//! Procedural dataset generation, on-disk layout, and train/test splits.

use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::geom::{
    load_mesh, normalize_mesh, save_mesh, FrameMode, MeshFormat, RigSize, TriMesh, UnitVec3, Vec3,
    ViewRig,
};
use crate::image::{DepthImage, MultiSurface, Silhouette};
use crate::predict::{
    make_targets, target_anchor, ExampleMeta, Gallery, GalleryEntry, Prediction, PredictorInput,
    Representation, TargetParams,
};
use crate::render::make_input;
use crate::shapes::{Category, ShapeSpec};
use crate::voxel::VoxelGrid;
use crate::{Error, Result};

/// Input elevation range in degrees, gravity pointing down the -z axis.
pub const ELEVATION_RANGE_DEG: (f64, f64) = (-20.0, 50.0);

#[derive(Debug, Clone, PartialEq)]
pub struct DatasetSpec {
    pub categories: Vec<Category>,
    pub instances_per_category: usize,
    pub views_per_instance: usize,
    pub seed: u64,
    pub resolution: usize,
    pub rig_size: RigSize,
    pub grid_dim: usize,
}

impl Default for DatasetSpec {
    fn default() -> Self {
        DatasetSpec {
            // Open-cup sits last so the default held-out class is the
            // concave stress case rather than an easy convex blob.
            categories: vec![
                Category::BoxTable,
                Category::SlatChair,
                Category::Superellipsoid,
                Category::OpenCup,
            ],
            instances_per_category: 12,
            views_per_instance: 8,
            seed: 1,
            resolution: 64,
            rig_size: RigSize::Twenty,
            grid_dim: 32,
        }
    }
}

impl DatasetSpec {
    pub fn n_examples(&self) -> usize {
        self.categories.len() * self.instances_per_category * self.views_per_instance
    }

    pub fn target_params(&self, frame: FrameMode, representation: Representation) -> TargetParams {
        TargetParams {
            frame,
            representation,
            rig_size: self.rig_size,
            resolution: self.resolution,
            grid_dim: self.grid_dim,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.categories.is_empty()
            || self.instances_per_category == 0
            || self.views_per_instance == 0
        {
            return Err(Error::Config("dataset spec has an empty axis".into()));
        }
        let mut seen = std::collections::HashSet::new();
        for &c in &self.categories {
            if !seen.insert(c) {
                return Err(Error::Config(format!("duplicate category {}", c.name())));
            }
        }
        Ok(())
    }
}

/// One generated (instance, view) pair with its normalized mesh and input.
#[derive(Debug, Clone)]
pub struct Example {
    pub meta: ExampleMeta,
    pub input_dir: UnitVec3,
    pub mesh: TriMesh,
    pub input: PredictorInput,
}

#[derive(Debug, Clone)]
pub struct Dataset {
    pub spec: DatasetSpec,
    pub examples: Vec<Example>,
}

fn view_direction(azimuth: f64, elevation: f64) -> UnitVec3 {
    UnitVec3::new_normalize(Vec3::new(
        elevation.cos() * azimuth.cos(),
        elevation.cos() * azimuth.sin(),
        elevation.sin(),
    ))
}

/// Samples every instance and view of `spec` and renders the inputs. One RNG
/// stream in category/instance/view order makes the seed fully determining.
pub fn generate_examples(spec: &DatasetSpec) -> Result<Dataset> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let (lo, hi) = (
        ELEVATION_RANGE_DEG.0.to_radians(),
        ELEVATION_RANGE_DEG.1.to_radians(),
    );
    let mut drafts = Vec::with_capacity(spec.n_examples());
    for &category in &spec.categories {
        for instance in 0..spec.instances_per_category {
            let shape = ShapeSpec::sample(category, &mut rng);
            let model_id = format!("{}-{instance:02}", category.name());
            for view in 0..spec.views_per_instance {
                let azimuth = rng.random_range(0.0..std::f64::consts::TAU);
                let elevation = rng.random_range(lo..hi);
                drafts.push((
                    ExampleMeta {
                        category_id: category.name().into(),
                        model_id: model_id.clone(),
                        view_id: view,
                    },
                    shape.clone(),
                    view_direction(azimuth, elevation),
                ));
            }
        }
    }
    let examples = drafts
        .par_iter()
        .map(|(meta, shape, dir)| {
            let build = || -> Result<Example> {
                let mesh = normalize_mesh(&shape.mesh())?.0;
                let (depth, silhouette) = make_input(&mesh, dir, spec.resolution)?;
                Ok(Example {
                    meta: meta.clone(),
                    input_dir: *dir,
                    mesh,
                    input: PredictorInput { depth, silhouette },
                })
            };
            build().map_err(|e| {
                Error::Config(format!("example {}-v{:02}: {e}", meta.model_id, meta.view_id))
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Dataset {
        spec: spec.clone(),
        examples,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Split {
    Train,
    NovelView,
    NovelModel,
    NovelClass,
}

impl Split {
    pub fn as_str(self) -> &'static str {
        match self {
            Split::Train => "Train",
            Split::NovelView => "NovelView",
            Split::NovelModel => "NovelModel",
            Split::NovelClass => "NovelClass",
        }
    }

    pub const TEST_SPLITS: [Split; 3] = [Split::NovelView, Split::NovelModel, Split::NovelClass];
}

/// Example indices per split. Test sets are pairwise disjoint and disjoint
/// from the train gallery.
#[derive(Debug, Clone, Default)]
pub struct SplitSet {
    pub train: Vec<usize>,
    pub novel_view: Vec<usize>,
    pub novel_model: Vec<usize>,
    pub novel_class: Vec<usize>,
}

impl SplitSet {
    pub fn indices(&self, split: Split) -> &[usize] {
        match split {
            Split::Train => &self.train,
            Split::NovelView => &self.novel_view,
            Split::NovelModel => &self.novel_model,
            Split::NovelClass => &self.novel_class,
        }
    }
}

fn holdout_count(fraction: f64, n: usize, what: &str) -> Result<usize> {
    if !(0.0..1.0).contains(&fraction) || fraction <= 0.0 {
        return Err(Error::Config(format!(
            "{what} holdout fraction {fraction} outside (0, 1)"
        )));
    }
    Ok(((fraction * n as f64).round() as usize).clamp(1, n - 1))
}

/// Splits by holding out one whole category (NovelClass), the last instances
/// of every other category (NovelModel, all views), and the last views of the
/// remaining instances (NovelView).
pub fn make_splits(
    dataset: &Dataset,
    held_out_category: Category,
    view_fraction: f64,
    instance_fraction: f64,
) -> Result<SplitSet> {
    let spec = &dataset.spec;
    if spec.categories.len() < 2 {
        return Err(Error::InsufficientData(
            "NovelClass needs at least two categories".into(),
        ));
    }
    if spec.instances_per_category < 2 || spec.views_per_instance < 2 {
        return Err(Error::InsufficientData(
            "holdouts need at least two instances and two views".into(),
        ));
    }
    if !spec.categories.contains(&held_out_category) {
        return Err(Error::Config(format!(
            "held-out category {} is not in the dataset",
            held_out_category.name()
        )));
    }
    let held_views = holdout_count(view_fraction, spec.views_per_instance, "view")?;
    let held_instances = holdout_count(instance_fraction, spec.instances_per_category, "instance")?;
    let first_held_view = spec.views_per_instance - held_views;
    let first_held_instance = spec.instances_per_category - held_instances;

    let mut instance_ordinals: std::collections::HashMap<&str, usize> =
        std::collections::HashMap::new();
    let mut next_in_category: std::collections::HashMap<&str, usize> =
        std::collections::HashMap::new();
    let mut set = SplitSet::default();
    for (i, e) in dataset.examples.iter().enumerate() {
        let ordinal = *instance_ordinals
            .entry(e.meta.model_id.as_str())
            .or_insert_with(|| {
                let slot = next_in_category.entry(e.meta.category_id.as_str()).or_insert(0);
                let v = *slot;
                *slot += 1;
                v
            });
        let split = if e.meta.category_id == held_out_category.name() {
            Split::NovelClass
        } else if ordinal >= first_held_instance {
            Split::NovelModel
        } else if e.meta.view_id >= first_held_view {
            Split::NovelView
        } else {
            Split::Train
        };
        match split {
            Split::Train => set.train.push(i),
            Split::NovelView => set.novel_view.push(i),
            Split::NovelModel => set.novel_model.push(i),
            Split::NovelClass => set.novel_class.push(i),
        }
    }
    verify_splits(dataset, &set)?;
    Ok(set)
}

/// Checks split soundness directly rather than trusting construction: every
/// index in range and in at most one split, no mesh id shared between train
/// and NovelModel/NovelClass, and no (mesh, view) pair shared between train
/// and NovelView.
pub fn verify_splits(dataset: &Dataset, set: &SplitSet) -> Result<()> {
    let mut seen = vec![false; dataset.examples.len()];
    let all = set
        .train
        .iter()
        .chain(&set.novel_view)
        .chain(&set.novel_model)
        .chain(&set.novel_class);
    for &i in all {
        let Some(slot) = seen.get_mut(i) else {
            return Err(Error::Config(format!(
                "split index {i} out of range for {} examples",
                dataset.examples.len()
            )));
        };
        if *slot {
            return Err(Error::Config(format!("example index {i} appears in two splits")));
        }
        *slot = true;
    }
    let meta = |i: usize| &dataset.examples[i].meta;
    let train_models: std::collections::HashSet<&str> =
        set.train.iter().map(|&i| meta(i).model_id.as_str()).collect();
    let train_pairs: std::collections::HashSet<(&str, usize)> = set
        .train
        .iter()
        .map(|&i| (meta(i).model_id.as_str(), meta(i).view_id))
        .collect();
    for &i in &set.novel_view {
        if train_pairs.contains(&(meta(i).model_id.as_str(), meta(i).view_id)) {
            return Err(Error::Config(format!(
                "NovelView example {}-v{:02} also sits in train",
                meta(i).model_id,
                meta(i).view_id
            )));
        }
    }
    for &i in set.novel_model.iter().chain(&set.novel_class) {
        if train_models.contains(meta(i).model_id.as_str()) {
            return Err(Error::Config(format!(
                "held-out instance {} has train views",
                meta(i).model_id
            )));
        }
    }
    Ok(())
}

/// Renders targets for the given examples into a gallery.
pub fn gallery_from_dataset(
    dataset: &Dataset,
    indices: &[usize],
    params: &TargetParams,
) -> Result<Gallery> {
    let entries = indices
        .par_iter()
        .map(|&i| {
            let e = &dataset.examples[i];
            Ok(GalleryEntry {
                input: e.input.clone(),
                target: make_targets(&e.mesh, &e.input_dir, params)?,
                meta: e.meta.clone(),
                anchor_dir: target_anchor(params.frame, &e.input_dir),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let gallery = Gallery { entries };
    gallery.validate()?;
    Ok(gallery)
}

#[derive(serde::Serialize, serde::Deserialize)]
struct DatasetManifest {
    categories: Vec<Category>,
    instances_per_category: usize,
    views_per_instance: usize,
    seed: u64,
    resolution: usize,
    rig_views: usize,
    grid_dim: usize,
    examples: Vec<ExampleRecord>,
}

#[derive(serde::Serialize, serde::Deserialize)]
struct ExampleRecord {
    #[serde(flatten)]
    meta: ExampleMeta,
    input_dir: [f64; 3],
}

/// Index of a dataset directory: the spec plus per-example metadata.
#[derive(Debug, Clone)]
pub struct DatasetIndex {
    pub spec: DatasetSpec,
    pub entries: Vec<(ExampleMeta, UnitVec3)>,
}

pub fn example_dir(root: &Path, meta: &ExampleMeta) -> PathBuf {
    root.join("examples")
        .join(format!("{}-v{:02}", meta.model_id, meta.view_id))
}

/// Generates the dataset and writes every example to `root`: the normalized
/// mesh, the predictor input, and ground-truth targets for both frames and
/// both representations.
pub fn generate_dataset(spec: &DatasetSpec, root: &Path) -> Result<Dataset> {
    let dataset = generate_examples(spec)?;
    save_dataset(&dataset, root)?;
    Ok(dataset)
}

pub fn save_dataset(dataset: &Dataset, root: &Path) -> Result<()> {
    std::fs::create_dir_all(root).map_err(|e| Error::io(root.to_path_buf(), e))?;
    let spec = &dataset.spec;
    let manifest = DatasetManifest {
        categories: spec.categories.clone(),
        instances_per_category: spec.instances_per_category,
        views_per_instance: spec.views_per_instance,
        seed: spec.seed,
        resolution: spec.resolution,
        rig_views: spec.rig_size.n_views(),
        grid_dim: spec.grid_dim,
        examples: dataset
            .examples
            .iter()
            .map(|e| ExampleRecord {
                meta: e.meta.clone(),
                input_dir: [e.input_dir.x, e.input_dir.y, e.input_dir.z],
            })
            .collect(),
    };
    let index_path = root.join("dataset.json");
    std::fs::write(&index_path, serde_json::to_string_pretty(&manifest)?)
        .map_err(|e| Error::io(index_path, e))?;
    dataset.examples.par_iter().try_for_each(|e| {
        let dir = example_dir(root, &e.meta);
        std::fs::create_dir_all(&dir).map_err(|err| Error::io(dir.clone(), err))?;
        save_mesh(&e.mesh, &dir.join("mesh.obj"), MeshFormat::Obj)?;
        e.input.depth.save(&dir.join("input_depth.msdi"))?;
        e.input.silhouette.save(&dir.join("input_sil.pgm"))?;
        for frame in [FrameMode::Viewer, FrameMode::Object] {
            let ms = make_targets(
                &e.mesh,
                &e.input_dir,
                &spec.target_params(frame, Representation::MultiSurface),
            )?;
            let ms_dir = dir.join(format!("ms_{}", frame.as_str()));
            ms.as_multi_surface().unwrap().save_branches(&ms_dir)?;
            let vox = make_targets(
                &e.mesh,
                &e.input_dir,
                &spec.target_params(frame, Representation::Volumetric),
            )?;
            vox.as_voxels()
                .unwrap()
                .save(&dir.join(format!("vox_{}.msvx", frame.as_str())))?;
        }
        Ok(())
    })
}

pub fn load_dataset_index(root: &Path) -> Result<DatasetIndex> {
    let index_path = root.join("dataset.json");
    let json = std::fs::read_to_string(&index_path).map_err(|e| Error::io(index_path, e))?;
    let manifest: DatasetManifest = serde_json::from_str(&json)?;
    let spec = DatasetSpec {
        categories: manifest.categories,
        instances_per_category: manifest.instances_per_category,
        views_per_instance: manifest.views_per_instance,
        seed: manifest.seed,
        resolution: manifest.resolution,
        rig_size: RigSize::from_views(manifest.rig_views)?,
        grid_dim: manifest.grid_dim,
    };
    let entries = manifest
        .examples
        .into_iter()
        .map(|r| {
            let dir = UnitVec3::new_normalize(Vec3::new(
                r.input_dir[0],
                r.input_dir[1],
                r.input_dir[2],
            ));
            (r.meta, dir)
        })
        .collect();
    Ok(DatasetIndex { spec, entries })
}

/// Loads every stored example back into memory.
pub fn load_dataset(root: &Path) -> Result<Dataset> {
    let index = load_dataset_index(root)?;
    let examples = index
        .entries
        .par_iter()
        .map(|(meta, input_dir)| {
            Ok(Example {
                meta: meta.clone(),
                input_dir: *input_dir,
                mesh: load_example_mesh(root, meta)?,
                input: load_example_input(root, meta)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Dataset {
        spec: index.spec,
        examples,
    })
}

pub fn load_example_input(root: &Path, meta: &ExampleMeta) -> Result<PredictorInput> {
    let dir = example_dir(root, meta);
    Ok(PredictorInput {
        depth: DepthImage::load(&dir.join("input_depth.msdi"))?,
        silhouette: Silhouette::load(&dir.join("input_sil.pgm"))?,
    })
}

pub fn load_example_mesh(root: &Path, meta: &ExampleMeta) -> Result<TriMesh> {
    load_mesh(&example_dir(root, meta).join("mesh.obj"))
}

/// Loads one stored ground-truth target, rebuilding multi-surface rigs from
/// the stored input direction.
pub fn load_example_target(
    root: &Path,
    index: &DatasetIndex,
    entry: usize,
    frame: FrameMode,
    representation: Representation,
) -> Result<Prediction> {
    let (meta, input_dir) = &index.entries[entry];
    let dir = example_dir(root, meta);
    match representation {
        Representation::MultiSurface => {
            let rig = ViewRig::build(target_anchor(frame, input_dir), index.spec.rig_size, frame);
            let ms = MultiSurface::load_branches(&dir.join(format!("ms_{}", frame.as_str())), rig)?;
            Ok(Prediction::MultiSurface(ms))
        }
        Representation::Volumetric => Ok(Prediction::Voxels(VoxelGrid::load(
            &dir.join(format!("vox_{}.msvx", frame.as_str())),
        )?)),
    }
}

/// Assembles a gallery from stored examples.
pub fn gallery_from_disk(
    root: &Path,
    index: &DatasetIndex,
    indices: &[usize],
    frame: FrameMode,
    representation: Representation,
) -> Result<Gallery> {
    let entries = indices
        .par_iter()
        .map(|&i| {
            let (meta, input_dir) = &index.entries[i];
            Ok(GalleryEntry {
                input: load_example_input(root, meta)?,
                target: load_example_target(root, index, i, frame, representation)?,
                meta: meta.clone(),
                anchor_dir: target_anchor(frame, input_dir),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let gallery = Gallery { entries };
    gallery.validate()?;
    Ok(gallery)
}
