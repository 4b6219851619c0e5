//! Evaluation measures: voxel IoU, sampled surface distance, silhouette IoU,
//! masked depth error, and the projection training loss.

use crate::accel::TriBvh;
use crate::geom::{TriMesh, Vec3};
use crate::image::{DepthImage, MultiSurface, Silhouette, SurfaceBranch};
use crate::voxel::VoxelGrid;
use crate::{Error, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

pub const DEFAULT_SAMPLE_DENSITY: f64 = 300.0;
/// Penalty depth for GT-foreground pixels the prediction marks background;
/// squared in the error term.
pub const DEPTH_MISS_PENALTY: f64 = 0.5;
pub const DEFAULT_PROJECTION_K: f64 = 0.2;
const PROB_CLAMP: f64 = 1e-7;
const NORMALIZER_PAIRS: usize = 10_000;

/// Per-example evaluation result; metrics that do not apply to the
/// representation under test stay None.
#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct EvalRecord {
    pub example_id: String,
    pub frame: String,
    pub split: String,
    pub voxel_iou: Option<f64>,
    pub surface_dist: Option<f64>,
    pub silhouette_iou: Option<f64>,
    pub depth_err: Option<f64>,
    pub proj_loss: Option<f64>,
}

/// Occupancy intersection over union; 1 when both grids are empty.
pub fn voxel_iou(a: &VoxelGrid, b: &VoxelGrid) -> Result<f64> {
    if a.frame() != b.frame() {
        return Err(Error::FrameMismatch(
            a.frame().as_str().into(),
            b.frame().as_str().into(),
        ));
    }
    if a.dim() != b.dim() {
        return Err(Error::DimMismatch(a.dim(), b.dim()));
    }
    let (inter, union) = a.overlap_counts(b);
    if union == 0 {
        return Ok(1.0);
    }
    Ok(inter as f64 / union as f64)
}

/// Area-proportional surface sampling configuration.
#[derive(Debug, Clone, Copy)]
pub struct SurfaceSampler {
    /// Points per unit surface area.
    pub density: f64,
    pub seed: u64,
}

impl Default for SurfaceSampler {
    fn default() -> Self {
        SurfaceSampler {
            density: DEFAULT_SAMPLE_DENSITY,
            seed: 0,
        }
    }
}

/// Draws round(density * area) points, triangles chosen with probability
/// proportional to area, uniform within each triangle.
pub fn sample_surface(mesh: &TriMesh, sampler: &SurfaceSampler) -> Result<Vec<Vec3>> {
    let total = mesh.surface_area();
    if !(total > 0.0) {
        return Err(Error::ZeroArea);
    }
    let n = ((sampler.density * total).round() as usize).max(1);
    let mut cumulative = Vec::with_capacity(mesh.triangles.len());
    let mut acc = 0.0;
    for t in 0..mesh.triangles.len() {
        acc += mesh.triangle_area(t);
        cumulative.push(acc);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(sampler.seed);
    let mut points = Vec::with_capacity(n);
    for _ in 0..n {
        let r = rng.random_range(0.0..acc);
        let t = cumulative.partition_point(|&c| c <= r).min(cumulative.len() - 1);
        let [a, b, c] = mesh.triangle_vertices(t);
        let (mut u, mut v) = (rng.random::<f64>(), rng.random::<f64>());
        if u + v > 1.0 {
            u = 1.0 - u;
            v = 1.0 - v;
        }
        points.push(a + u * (b - a) + v * (c - a));
    }
    Ok(points)
}

fn mean_closest_distance(points: &[Vec3], bvh: &TriBvh) -> f64 {
    let distances: Vec<f64> = points.par_iter().map(|p| bvh.closest_distance(p)).collect();
    distances.iter().sum::<f64>() / distances.len() as f64
}

/// Mean pairwise distance among `points` from `NORMALIZER_PAIRS` seeded
/// index pairs (i != j).
fn mean_pairwise_distance(points: &[Vec3], seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut sum = 0.0;
    for _ in 0..NORMALIZER_PAIRS {
        let i = rng.random_range(0..points.len());
        let j = loop {
            let j = rng.random_range(0..points.len());
            if j != i {
                break j;
            }
        };
        sum += (points[i] - points[j]).norm();
    }
    sum / NORMALIZER_PAIRS as f64
}

/// Symmetric mean sampled point-to-surface distance, divided by the mean
/// pairwise distance of the GT samples so the value is scale-free.
pub fn surface_distance(gt: &TriMesh, rec: &TriMesh, sampler: &SurfaceSampler) -> Result<f64> {
    let gt_points = sample_surface(gt, sampler)?;
    let rec_sampler = SurfaceSampler {
        seed: sampler.seed.wrapping_add(1),
        ..*sampler
    };
    let rec_points = sample_surface(rec, &rec_sampler)?;
    let gt_bvh = TriBvh::build(gt)?;
    let rec_bvh = TriBvh::build(rec)?;
    let forward = mean_closest_distance(&gt_points, &rec_bvh);
    let backward = mean_closest_distance(&rec_points, &gt_bvh);
    let normalizer = mean_pairwise_distance(&gt_points, sampler.seed.wrapping_add(2));
    Ok(0.5 * (forward + backward) / normalizer)
}

/// Pixelwise IoU of the thresholded prediction against the binary GT;
/// 1 when both are empty.
pub fn silhouette_iou(pred: &Silhouette, gt: &Silhouette, threshold: f64) -> Result<f64> {
    if pred.width != gt.width || pred.height != gt.height {
        return Err(Error::ResolutionMismatch(
            pred.width,
            pred.height,
            gt.width,
            gt.height,
        ));
    }
    let (mut inter, mut union) = (0u64, 0u64);
    for y in 0..gt.height {
        for x in 0..gt.width {
            let p = pred.get(x, y) >= threshold;
            let g = gt.is_inside(x, y);
            inter += (p && g) as u64;
            union += (p || g) as u64;
        }
    }
    if union == 0 {
        return Ok(1.0);
    }
    Ok(inter as f64 / union as f64)
}

/// Mean branch silhouette IoU across two multi-surfaces of the same rig size.
pub fn multisurface_silhouette_iou(
    pred: &MultiSurface,
    gt: &MultiSurface,
    threshold: f64,
) -> Result<f64> {
    if pred.branches.len() != gt.branches.len() {
        return Err(Error::Config(format!(
            "branch count mismatch: {} vs {}",
            pred.branches.len(),
            gt.branches.len()
        )));
    }
    let mut sum = 0.0;
    for (p, g) in pred.branches.iter().zip(&gt.branches) {
        sum += silhouette_iou(&p.silhouette, &g.silhouette, threshold)?;
    }
    Ok(sum / gt.branches.len() as f64)
}

/// Masked mean squared depth error over GT-foreground pixels of one map.
/// Pixels the prediction marks background cost DEPTH_MISS_PENALTY².
pub fn depth_error_map(pred: &DepthImage, gt: &DepthImage, gt_sil: &Silhouette) -> Result<f64> {
    if pred.width != gt.width || pred.height != gt.height {
        return Err(Error::ResolutionMismatch(
            pred.width,
            pred.height,
            gt.width,
            gt.height,
        ));
    }
    let (mut sum, mut count) = (0.0, 0u64);
    for y in 0..gt.height {
        for x in 0..gt.width {
            if !gt_sil.is_inside(x, y) {
                continue;
            }
            count += 1;
            if pred.is_background(x, y) {
                sum += DEPTH_MISS_PENALTY * DEPTH_MISS_PENALTY;
            } else {
                let d = pred.get(x, y) - gt.get(x, y);
                sum += d * d;
            }
        }
    }
    if count == 0 {
        return Err(Error::EmptyMask);
    }
    Ok(sum / count as f64)
}

/// Depth error of one branch: mean of the front and back map errors.
pub fn depth_error_branch(pred: &SurfaceBranch, gt: &SurfaceBranch) -> Result<f64> {
    let front = depth_error_map(&pred.depth_front, &gt.depth_front, &gt.silhouette)?;
    let back = depth_error_map(&pred.depth_back, &gt.depth_back, &gt.silhouette)?;
    Ok(0.5 * (front + back))
}

/// Depth error averaged over branches; branches whose GT silhouette is empty
/// are skipped, and all-empty GT is an error.
pub fn depth_error(pred: &MultiSurface, gt: &MultiSurface) -> Result<f64> {
    if pred.branches.len() != gt.branches.len() {
        return Err(Error::Config(format!(
            "branch count mismatch: {} vs {}",
            pred.branches.len(),
            gt.branches.len()
        )));
    }
    let (mut sum, mut n) = (0.0, 0usize);
    for (p, g) in pred.branches.iter().zip(&gt.branches) {
        if g.silhouette.count_inside() == 0 {
            continue;
        }
        sum += depth_error_branch(p, g)?;
        n += 1;
    }
    if n == 0 {
        return Err(Error::EmptyMask);
    }
    Ok(sum / n as f64)
}

/// Weighted sum of silhouette cross-entropy and masked depth MSE:
/// k * L_s + (1 - k) * L_d. L_s pools every silhouette pixel of every
/// branch; L_d pools GT-foreground pixels where the prediction has depth
/// (no miss penalty). Log arguments are floored at 1e-7, so exact binary
/// predictions cost zero and out-of-range probabilities stay finite.
pub fn projection_loss(pred: &MultiSurface, gt: &MultiSurface, k: f64) -> Result<f64> {
    if pred.branches.len() != gt.branches.len() {
        return Err(Error::Config(format!(
            "branch count mismatch: {} vs {}",
            pred.branches.len(),
            gt.branches.len()
        )));
    }
    let (mut bce_sum, mut bce_n) = (0.0, 0u64);
    let (mut mse_sum, mut mse_n) = (0.0, 0u64);
    for (p, g) in pred.branches.iter().zip(&gt.branches) {
        if p.silhouette.width != g.silhouette.width
            || p.silhouette.height != g.silhouette.height
        {
            return Err(Error::ResolutionMismatch(
                p.silhouette.width,
                p.silhouette.height,
                g.silhouette.width,
                g.silhouette.height,
            ));
        }
        for y in 0..g.silhouette.height {
            for x in 0..g.silhouette.width {
                let prob = p.silhouette.get(x, y);
                let y_true = g.silhouette.is_inside(x, y);
                bce_sum -= if y_true {
                    prob.max(PROB_CLAMP).ln()
                } else {
                    (1.0 - prob).max(PROB_CLAMP).ln()
                };
                bce_n += 1;
                if !y_true {
                    continue;
                }
                for (pd, gd) in [(&p.depth_front, &g.depth_front), (&p.depth_back, &g.depth_back)]
                {
                    if pd.is_background(x, y) {
                        continue;
                    }
                    let d = pd.get(x, y) - gd.get(x, y);
                    mse_sum += d * d;
                    mse_n += 1;
                }
            }
        }
    }
    let l_s = bce_sum / bce_n as f64;
    let l_d = if mse_n == 0 { 0.0 } else { mse_sum / mse_n as f64 };
    Ok(k * l_s + (1.0 - k) * l_d)
}
