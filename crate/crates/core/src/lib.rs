//! Multi-view shape kit.
//!
//! A 3D shape is represented as a set of *surface branches*: for each pair of
//! antipodal orthographic viewpoints tiling the viewing sphere, one silhouette
//! plus front and back depth images. The crate provides everything needed to
//! produce, consume, and score that representation:
//!
//! - [`geom`] — meshes, OBJ/PLY I/O, orthographic cameras, and view rigs
//!   anchored either to the input view (viewer-centered) or to the model's
//!   canonical frame (object-centered)
//! - [`render`] — a software orthographic rasterizer producing silhouettes
//!   and front/back depth maps
//! - [`voxel`] — surface/solid voxelization, ray-visibility hole filling, and
//!   viewer-/object-frame voxel targets
//! - [`fusion`] — back-projection to oriented point clouds, depth-interval
//!   carving, and truncated signed-distance fusion
//! - [`mc`] — isosurface extraction from scalar fields and binary grids
//! - [`metrics`] — voxel IoU, normalized surface distance, silhouette IoU,
//!   depth error, and the silhouette/depth projection loss
//! - [`predict`] — the pluggable shape-predictor contract with oracle and
//!   nearest-neighbor retrieval implementations
//! - [`shapes`], [`dataset`], [`experiment`] — procedural shape categories,
//!   dataset generation with NovelView/NovelModel/NovelClass splits, and the
//!   experiment harness that sweeps frame mode x representation

pub mod accel;
pub mod dataset;
mod error;
pub mod experiment;
pub mod field;
pub mod fusion;
pub mod geom;
pub mod image;
pub mod mc;
pub mod metrics;
pub mod predict;
pub mod render;
pub mod shapes;
mod threads;
pub mod voxel;

pub use error::{Error, Result};
pub use threads::{effective_threads, run_with_thread_cap};

/// Canonical anchor direction: object-centered rigs are built as if the input
/// view sat at this viewpoint, so viewer and object frames coincide there.
pub fn canonical_direction() -> geom::UnitVec3 {
    geom::UnitVec3::new_normalize(geom::Vec3::new(1.0, 1.0, 1.0))
}

/// √3: half-diagonal of the 2×2×2 working cube and the bound on |depth| for
/// meshes normalized to the unit sphere.
pub const SQRT3: f64 = 1.732_050_807_568_877_2;

/// Depth quantization step of the on-disk depth image format: 16-bit codes
/// over [-√3, √3] with one code reserved for background. Used as the depth
/// agreement tolerance throughout (e.g. in carving slack).
pub const DEPTH_QUANT_STEP: f64 = (2.0 * SQRT3) / 65534.0;
