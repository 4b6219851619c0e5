//! Fusing a MultiSurface into one 3D shape: oriented point cloud, carved
//! occupancy, or truncated signed-distance field.

use crate::field::ScalarField;
use crate::geom::{OrthoCamera, UnitVec3, Vec3};
use crate::image::{MultiSurface, SurfaceBranch};
use crate::render::pixel_center;
use crate::voxel::{GridSpec, VoxelGrid};
use crate::{Error, Result, DEPTH_QUANT_STEP};
use std::io::Write as _;
use std::path::Path;

pub const DEFAULT_SILHOUETTE_THRESHOLD: f64 = 0.5;
pub const DEFAULT_TSDF_TRUNCATION_VOXELS: f64 = 2.5;

#[derive(Debug, Clone)]
pub struct OrientedPoint {
    pub position: Vec3,
    pub normal: UnitVec3,
    /// Branch index the point was lifted from.
    pub view: usize,
}

#[derive(Debug, Clone, Default)]
pub struct OrientedPointCloud {
    pub points: Vec<OrientedPoint>,
}

impl OrientedPointCloud {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Writes an ASCII PLY with per-vertex normals.
    pub fn save_ply(&self, path: &Path) -> Result<()> {
        let mut out = String::new();
        out.push_str("ply\nformat ascii 1.0\n");
        out.push_str(&format!("element vertex {}\n", self.points.len()));
        for p in ["x", "y", "z", "nx", "ny", "nz"] {
            out.push_str(&format!("property double {p}\n"));
        }
        out.push_str("element face 0\nproperty list uchar uint vertex_indices\nend_header\n");
        for p in &self.points {
            out.push_str(&format!(
                "{} {} {} {} {} {}\n",
                p.position.x, p.position.y, p.position.z, p.normal.x, p.normal.y, p.normal.z
            ));
        }
        let mut file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        file.write_all(out.as_bytes()).map_err(|e| Error::io(path, e))?;
        Ok(())
    }
}

/// In-plane depth gradient at a pixel via central differences, one-sided at
/// silhouette borders and image edges; zero where no neighbor is usable.
fn depth_gradient(
    branch: &SurfaceBranch,
    depth: &crate::image::DepthImage,
    threshold: f64,
    i: usize,
    j: usize,
) -> (f64, f64) {
    let res = branch.silhouette.width;
    let pitch = 2.0 / res as f64;
    let valid = |x: isize, y: isize| {
        x >= 0
            && y >= 0
            && (x as usize) < res
            && (y as usize) < res
            && branch.silhouette.get(x as usize, y as usize) >= threshold
    };
    let d = |x: isize, y: isize| depth.get(x as usize, y as usize);
    let (xi, yj) = (i as isize, j as isize);

    let da = match (valid(xi - 1, yj), valid(xi + 1, yj)) {
        (true, true) => (d(xi + 1, yj) - d(xi - 1, yj)) / (2.0 * pitch),
        (true, false) => (d(xi, yj) - d(xi - 1, yj)) / pitch,
        (false, true) => (d(xi + 1, yj) - d(xi, yj)) / pitch,
        (false, false) => 0.0,
    };
    // Row index decreases along +up, so the sign flips.
    let db = match (valid(xi, yj - 1), valid(xi, yj + 1)) {
        (true, true) => (d(xi, yj - 1) - d(xi, yj + 1)) / (2.0 * pitch),
        (true, false) => (d(xi, yj - 1) - d(xi, yj)) / pitch,
        (false, true) => (d(xi, yj) - d(xi, yj + 1)) / pitch,
        (false, false) => 0.0,
    };
    (da, db)
}

/// Lifts one branch to oriented points: two per silhouette pixel (front then
/// back). Front normals face the -view_dir hemisphere, back normals away.
pub fn backproject(
    branch: &SurfaceBranch,
    camera: &OrthoCamera,
    threshold: f64,
    view: usize,
) -> OrientedPointCloud {
    let res = branch.silhouette.width;
    let mut cloud = OrientedPointCloud::default();
    for j in 0..res {
        for i in 0..res {
            if branch.silhouette.get(i, j) < threshold {
                continue;
            }
            let a = pixel_center(i, res);
            let b = -pixel_center(j, res);
            let base = camera.ray_origin(a, b);
            // The front surface a(a,b) -> base + d_f*view has tangents
            // right + (dd/da) view and up + (dd/db) view; their cross
            // product, oriented toward the camera, is
            // (dd/da) right + (dd/db) up - view_dir.
            let (fa, fb) = depth_gradient(branch, &branch.depth_front, threshold, i, j);
            let front_normal = UnitVec3::new_normalize(
                fa * camera.right.into_inner() + fb * camera.up.into_inner()
                    - camera.view_dir.into_inner(),
            );
            cloud.points.push(OrientedPoint {
                position: base + branch.depth_front.get(i, j) * camera.view_dir.into_inner(),
                normal: front_normal,
                view,
            });
            let (ba, bb) = depth_gradient(branch, &branch.depth_back, threshold, i, j);
            let back_normal = UnitVec3::new_normalize(
                camera.view_dir.into_inner()
                    - ba * camera.right.into_inner()
                    - bb * camera.up.into_inner(),
            );
            cloud.points.push(OrientedPoint {
                position: base + branch.depth_back.get(i, j) * camera.view_dir.into_inner(),
                normal: back_normal,
                view,
            });
        }
    }
    cloud
}

/// Concatenated backprojections of all branches, expressed in the rig frame
/// (camera 0 = input view) so fused shapes transfer between rigs by index;
/// points are ordered by (branch, pixel row-major, front-then-back).
pub fn fuse_point_cloud(ms: &MultiSurface, threshold: f64) -> OrientedPointCloud {
    let mut cloud = OrientedPointCloud::default();
    for (k, branch) in ms.branches.iter().enumerate() {
        let camera = ms.rig.rig_frame_camera(k);
        cloud
            .points
            .extend(backproject(branch, &camera, threshold, k).points);
    }
    cloud
}

/// In-plane support half-widths of a voxel cube's projected footprint along
/// the camera's right and up axes: (w/2) * L1 norm of each axis.
fn footprint_support(camera: &OrthoCamera, voxel_width: f64) -> (f64, f64) {
    let l1 = |v: &UnitVec3| v.x.abs() + v.y.abs() + v.z.abs();
    let half = voxel_width / 2.0;
    (half * l1(&camera.right), half * l1(&camera.up))
}

/// Whether the branch refutes a voxel cube centered at `p`. The cube's
/// in-plane footprint rectangle (half-widths `(ha, hb)`, plus half a pixel
/// so a lit center touching the cube edge counts, mirroring the closed-box
/// voxelization convention) must contain a lit pixel, and when `interval`
/// is given, some lit footprint pixel's [d_f - eps, d_b + eps] must contain
/// the cube center's depth. None when `p` projects outside the frustum (the
/// branch says nothing about it). Window bounds are closed under an fp
/// guard: voxel coordinates are not exactly representable, and grid-aligned
/// faces land exactly on the half-pixel boundary.
fn branch_allows(
    branch: &SurfaceBranch,
    camera: &OrthoCamera,
    p: &Vec3,
    (ha, hb): (f64, f64),
    interval: Option<f64>,
) -> Option<bool> {
    let res = branch.silhouette.width;
    let (a, b) = camera.plane_coords_of(p);
    if a.abs() > 1.0 || b.abs() > 1.0 {
        return None;
    }
    let pitch = 2.0 / res as f64;
    let (ha, hb) = (ha + pitch, hb + pitch);
    let lo = |v: f64, h: f64| (((v - h + 1.0) / pitch - 0.5).ceil().max(0.0)) as usize;
    let hi = |v: f64, h: f64| {
        ((((v + h + 1.0) / pitch - 0.5).floor()) as isize).min(res as isize - 1)
    };
    let depth = camera.depth_of(p);
    for j in lo(-b, hb) as isize..=hi(-b, hb) {
        for i in lo(a, ha) as isize..=hi(a, ha) {
            let (i, j) = (i as usize, j as usize);
            if !branch.silhouette.is_inside(i, j) {
                continue;
            }
            match interval {
                None => return Some(true),
                Some(eps) => {
                    if branch.depth_front.get(i, j) - eps <= depth
                        && depth <= branch.depth_back.get(i, j) + eps
                    {
                        return Some(true);
                    }
                }
            }
        }
    }
    Some(false)
}

fn carve_impl(ms: &MultiSurface, dim: usize, depth_test: bool) -> Result<VoxelGrid> {
    let spec = GridSpec {
        dim,
        center: Vec3::zeros(),
        side: 2.0,
        frame: ms.rig.frame_mode,
    };
    let mut grid = VoxelGrid::new(&spec)?;
    let epsilon = DEPTH_QUANT_STEP / 2.0 + grid.voxel_width() * 3f64.sqrt() / 2.0;
    let cameras: Vec<OrthoCamera> =
        (0..ms.branches.len()).map(|k| ms.rig.rig_frame_camera(k)).collect();
    let supports: Vec<(f64, f64)> = cameras
        .iter()
        .map(|c| footprint_support(c, grid.voxel_width()))
        .collect();
    let interval = depth_test.then_some(epsilon);
    for z in 0..dim {
        for y in 0..dim {
            for x in 0..dim {
                let p = grid.voxel_center(x, y, z);
                let occupied = ms
                    .branches
                    .iter()
                    .zip(cameras.iter().zip(&supports))
                    .all(|(branch, (camera, &support))| {
                        branch_allows(branch, camera, &p, support, interval).unwrap_or(true)
                    });
                if occupied {
                    grid.set(x, y, z, true);
                }
            }
        }
    }
    Ok(grid)
}

/// Visual hull tightened by per-view depth intervals, in the rig frame: a
/// voxel survives only when every branch that sees it places it inside the
/// silhouette and within [d_f - eps, d_b + eps], eps = half a quantization
/// step plus half a voxel diagonal.
pub fn carve_occupancy(ms: &MultiSurface, dim: usize) -> Result<VoxelGrid> {
    carve_impl(ms, dim, true)
}

/// Silhouette-only carving (no depth interval test), in the rig frame.
pub fn visual_hull(ms: &MultiSurface, dim: usize) -> Result<VoxelGrid> {
    carve_impl(ms, dim, false)
}

/// Averages per-branch projective truncated signed distances on a voxel grid
/// over the rig-frame window. Per branch a voxel observes
/// max(d_f - z, z - d_b) clamped to the truncation band (positive outside
/// the depth interval), with weight 1 inside the silhouette and 0 outside.
pub fn fuse_tsdf(ms: &MultiSurface, dim: usize, truncation_voxels: f64) -> Result<ScalarField> {
    let spec = GridSpec {
        dim,
        center: Vec3::zeros(),
        side: 2.0,
        frame: ms.rig.frame_mode,
    };
    let mut f = ScalarField::new(&spec, truncation_voxels * (spec.side / dim as f64))?;
    let tau = f.truncation();
    let cameras: Vec<OrthoCamera> =
        (0..ms.branches.len()).map(|k| ms.rig.rig_frame_camera(k)).collect();
    for z in 0..dim {
        for y in 0..dim {
            for x in 0..dim {
                let p = f.voxel_center(x, y, z);
                for (branch, camera) in ms.branches.iter().zip(&cameras) {
                    let res = branch.silhouette.width;
                    let (a, b) = camera.plane_coords_of(&p);
                    if a.abs() > 1.0 || b.abs() > 1.0 {
                        continue;
                    }
                    let to_pixel = |v: f64| {
                        let u = (v + 1.0) * res as f64 / 2.0 - 0.5;
                        (u.round() as isize).clamp(0, res as isize - 1) as usize
                    };
                    let (i, j) = (to_pixel(a), to_pixel(-b));
                    if !branch.silhouette.is_inside(i, j) {
                        continue;
                    }
                    let depth = camera.depth_of(&p);
                    let sd = (branch.depth_front.get(i, j) - depth)
                        .max(depth - branch.depth_back.get(i, j))
                        .clamp(-tau, tau);
                    f.accumulate(x, y, z, sd, 1.0);
                }
            }
        }
    }
    if !f.has_observations() {
        return Err(Error::NoObservations);
    }
    Ok(f)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FuseMethod {
    Cloud,
    Carve,
    Tsdf,
}

impl FuseMethod {
    pub fn parse(s: &str) -> Result<FuseMethod> {
        match s {
            "cloud" => Ok(FuseMethod::Cloud),
            "carve" => Ok(FuseMethod::Carve),
            "tsdf" => Ok(FuseMethod::Tsdf),
            other => Err(Error::Config(format!(
                "unknown fuse method '{other}' (expected cloud, carve, or tsdf)"
            ))),
        }
    }
}

/// Keeps `ms` restricted to its first `n` branches (with the matching rig
/// pairs); for ablation and tests.
pub fn truncate_branches(ms: &MultiSurface, n: usize) -> MultiSurface {
    let mut rig = ms.rig.clone();
    rig.pairs.truncate(n);
    MultiSurface {
        branches: ms.branches.iter().take(n).cloned().collect(),
        rig,
    }
}
