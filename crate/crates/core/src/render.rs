//! Orthographic software renderer for silhouettes and front/back depth maps.
//!
//! Pixel model: point sampling at pixel centers, no anti-aliasing. Column i
//! maps to a = -1 + 2(i+0.5)/res along camera right, row j to
//! b = 1 - 2(j+0.5)/res along camera up (row 0 at the top). Depth is the hit
//! parameter along view_dir measured from the plane through the origin.

use crate::accel::TriBvh;
use crate::geom::{camera_toward_origin, OrthoCamera, TriMesh, UnitVec3, ViewRig};
use crate::image::{DepthImage, MultiSurface, Silhouette, SurfaceBranch};
use crate::{Error, Result};
use rayon::prelude::*;

/// Normalized coordinate of a pixel center: index 0 -> -1 + 1/res,
/// index res-1 -> 1 - 1/res.
pub fn pixel_center(i: usize, res: usize) -> f64 {
    -1.0 + 2.0 * (i as f64 + 0.5) / res as f64
}

/// In-plane window a renderer samples: rays cover
/// center ± half_width in both plane axes.
#[derive(Debug, Clone, Copy)]
struct Window {
    center_a: f64,
    center_b: f64,
    half_width: f64,
}

const FULL_WINDOW: Window = Window {
    center_a: 0.0,
    center_b: 0.0,
    half_width: 1.0,
};

fn render_window(bvh: Option<&TriBvh>, camera: &OrthoCamera, res: usize, window: Window) -> SurfaceBranch {
    let mut silhouette = Silhouette::zeros(res, res);
    let mut depth_front = DepthImage::background(res, res);
    let mut depth_back = DepthImage::background(res, res);
    if let Some(bvh) = bvh {
        let hits: Vec<Option<(f64, f64)>> = (0..res * res)
            .into_par_iter()
            .map(|idx| {
                let (i, j) = (idx % res, idx / res);
                let a = window.center_a + window.half_width * pixel_center(i, res);
                let b = window.center_b - window.half_width * pixel_center(j, res);
                let origin = camera.ray_origin(a, b);
                bvh.line_depth_range(&origin, &camera.view_dir)
            })
            .collect();
        for (idx, hit) in hits.into_iter().enumerate() {
            if let Some((lo, hi)) = hit {
                let (i, j) = (idx % res, idx / res);
                silhouette.set(i, j, 1.0);
                depth_front.set(i, j, lo);
                depth_back.set(i, j, hi);
            }
        }
    }
    SurfaceBranch {
        silhouette,
        depth_front,
        depth_back,
    }
}

/// Renders one antipodal branch: silhouette plus front (minimum) and back
/// (maximum) hit depth per pixel. An empty mesh yields an all-background
/// branch.
pub fn render_branch(mesh: &TriMesh, camera: &OrthoCamera, res: usize) -> SurfaceBranch {
    let bvh = (!mesh.triangles.is_empty()).then(|| TriBvh::build(mesh).expect("non-empty mesh"));
    render_window(bvh.as_ref(), camera, res, FULL_WINDOW)
}

/// Renders one branch per antipodal pair of the rig, each from the first
/// camera of the pair.
pub fn render_multisurface(mesh: &TriMesh, rig: &ViewRig, res: usize) -> MultiSurface {
    let bvh = (!mesh.triangles.is_empty()).then(|| TriBvh::build(mesh).expect("non-empty mesh"));
    let branches = rig
        .pairs
        .iter()
        .map(|&(first, _)| render_window(bvh.as_ref(), &rig.cameras[first], res, FULL_WINDOW))
        .collect();
    MultiSurface {
        branches,
        rig: rig.clone(),
    }
}

/// In-plane shift/scale and depth offset applied to an input view so the
/// silhouette bounding box fills the image and the visible surface is
/// depth-centered.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InputNormalization {
    pub center_a: f64,
    pub center_b: f64,
    /// Uniform magnification; >= 1 for objects already inside the window.
    pub scale: f64,
    /// Mean front depth of the visible surface in the normalized render.
    pub depth_offset: f64,
}

/// Renders the predictor input from `input_dir`: front depth plus silhouette,
/// re-centered and uniformly scaled so the silhouette bounding box fits the
/// full image, with depths offset so the visible-surface centroid sits at 0.
pub fn make_input(mesh: &TriMesh, input_dir: &UnitVec3, res: usize) -> Result<(DepthImage, Silhouette)> {
    let (depth, silhouette, _) = make_input_normalized(mesh, input_dir, res)?;
    Ok((depth, silhouette))
}

/// [`make_input`] variant that also reports the normalization applied.
pub fn make_input_normalized(
    mesh: &TriMesh,
    input_dir: &UnitVec3,
    res: usize,
) -> Result<(DepthImage, Silhouette, InputNormalization)> {
    let camera = camera_toward_origin(input_dir);
    let bvh = (!mesh.triangles.is_empty()).then(|| TriBvh::build(mesh).expect("non-empty mesh"));
    let first = render_window(bvh.as_ref(), &camera, res, FULL_WINDOW);

    // Lit-pixel bounding box in plane coordinates, using outer pixel edges,
    // so an object spanning the full window gets scale exactly 1.
    let half_pixel = 1.0 / res as f64;
    let mut a_min = f64::INFINITY;
    let mut a_max = f64::NEG_INFINITY;
    let mut b_min = f64::INFINITY;
    let mut b_max = f64::NEG_INFINITY;
    for j in 0..res {
        for i in 0..res {
            if first.silhouette.is_inside(i, j) {
                let a = pixel_center(i, res);
                let b = -pixel_center(j, res);
                a_min = a_min.min(a - half_pixel);
                a_max = a_max.max(a + half_pixel);
                b_min = b_min.min(b - half_pixel);
                b_max = b_max.max(b + half_pixel);
            }
        }
    }
    if a_min > a_max {
        return Err(Error::EmptySilhouette);
    }

    let half_extent = 0.5 * (a_max - a_min).max(b_max - b_min).max(2.0 * half_pixel);
    let window = Window {
        center_a: 0.5 * (a_min + a_max),
        center_b: 0.5 * (b_min + b_max),
        half_width: half_extent,
    };
    let normalized = render_window(bvh.as_ref(), &camera, res, window);

    let mut sum = 0.0;
    let mut n = 0usize;
    for j in 0..res {
        for i in 0..res {
            if !normalized.depth_front.is_background(i, j) {
                sum += normalized.depth_front.get(i, j);
                n += 1;
            }
        }
    }
    if n == 0 {
        return Err(Error::EmptySilhouette);
    }
    let offset = sum / n as f64;

    let mut depth = normalized.depth_front;
    for j in 0..res {
        for i in 0..res {
            if !depth.is_background(i, j) {
                let v = depth.get(i, j) - offset;
                depth.set(i, j, v);
            }
        }
    }
    Ok((
        depth,
        normalized.silhouette,
        InputNormalization {
            center_a: window.center_a,
            center_b: window.center_b,
            scale: 1.0 / window.half_width,
            depth_offset: offset,
        },
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::{FrameMode, RigSize, Vec3};
    use crate::image::DEPTH_MIN;
    use crate::shapes;
    use crate::{canonical_direction, DEPTH_QUANT_STEP};
    use approx::assert_relative_eq;

    fn sphere_half() -> TriMesh {
        shapes::uv_sphere(0.5, 64, 128)
    }

    fn camera_minus_z() -> OrthoCamera {
        OrthoCamera::from_view_dir(UnitVec3::new_unchecked(Vec3::new(0.0, 0.0, -1.0)), &Vec3::y())
    }

    #[test]
    fn sphere_silhouette_is_centered_disk() {
        let branch = render_branch(&sphere_half(), &camera_minus_z(), 128);
        let fraction = branch.silhouette.count_inside() as f64 / (128.0 * 128.0);
        assert!((fraction - std::f64::consts::PI / 16.0).abs() < 0.01, "fraction {fraction}");
        let c = 64;
        assert_relative_eq!(branch.depth_front.get(c, c), -0.5, epsilon = 2e-3);
        assert_relative_eq!(branch.depth_back.get(c, c), 0.5, epsilon = 2e-3);
        branch.validate().unwrap();
    }

    #[test]
    fn empty_view_renders_all_background() {
        let mesh = shapes::cuboid(&Vec3::zeros(), &Vec3::new(0.1, 0.1, 0.1));
        // Camera window only covers [-1,1]^2 around the origin plane; shift
        // the mesh far off-axis so no ray can hit it.
        let mut far = mesh;
        for v in &mut far.vertices {
            v.x += 50.0;
        }
        let branch = render_branch(&far, &camera_minus_z(), 32);
        assert_eq!(branch.silhouette.count_inside(), 0);
        assert!((0..32).all(|j| (0..32).all(|i| branch.depth_front.is_background(i, j))));
    }

    #[test]
    fn cube_front_face_depth_is_constant() {
        let mesh = shapes::cuboid(&Vec3::zeros(), &Vec3::new(0.5, 0.5, 0.5));
        let branch = render_branch(&mesh, &camera_minus_z(), 64);
        let mut values = Vec::new();
        for j in 0..64 {
            for i in 0..64 {
                if branch.silhouette.is_inside(i, j) {
                    values.push(branch.depth_front.get(i, j));
                }
            }
        }
        assert!(!values.is_empty());
        let first = values[0];
        assert!(values.iter().all(|v| (v - first).abs() < 1e-6));
        // Looking along -z the front face is z = +0.5, at depth -0.5.
        assert_relative_eq!(first, -0.5, epsilon = 1e-9);
    }

    #[test]
    fn silhouette_and_depth_are_coherent() {
        let mesh = shapes::ShapeSpec::sample(
            shapes::Category::SlatChair,
            &mut rand_chacha::ChaCha8Rng::seed_from_u64(5),
        )
        .mesh();
        let branch = render_branch(&mesh, &camera_minus_z(), 96);
        for j in 0..96 {
            for i in 0..96 {
                let inside = branch.silhouette.is_inside(i, j);
                assert_eq!(inside, !branch.depth_front.is_background(i, j));
                assert_eq!(inside, !branch.depth_back.is_background(i, j));
                if inside {
                    assert!(branch.depth_front.get(i, j) <= branch.depth_back.get(i, j));
                    assert!(branch.depth_front.get(i, j) >= DEPTH_MIN);
                }
            }
        }
    }

    #[test]
    fn antipodal_render_mirrors_depth() {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for category in [shapes::Category::BoxTable, shapes::Category::OpenCup] {
            let mesh = shapes::ShapeSpec::sample(category, &mut rng).mesh();
            let (mesh, _) = crate::geom::normalize_mesh(&mesh).unwrap();
            let cam = OrthoCamera::from_view_dir(
                UnitVec3::new_normalize(Vec3::new(0.3, -0.8, 0.5)),
                &Vec3::z(),
            );
            let fwd = render_branch(&mesh, &cam, 64);
            let rev = render_branch(&mesh, &cam.antipode(), 64);
            let mirrored_back = rev.depth_back.mirrored_horizontal();
            let mirrored_sil = rev.silhouette.mirrored_horizontal();
            for j in 0..64 {
                for i in 0..64 {
                    assert_eq!(fwd.silhouette.is_inside(i, j), mirrored_sil.is_inside(i, j));
                    if fwd.silhouette.is_inside(i, j) {
                        let d = fwd.depth_front.get(i, j);
                        let m = -mirrored_back.get(i, j);
                        assert!((d - m).abs() <= DEPTH_QUANT_STEP, "{d} vs {m}");
                    }
                }
            }
        }
    }

    #[test]
    fn sphere_area_error_shrinks_with_resolution() {
        let mesh = sphere_half();
        let target = std::f64::consts::PI / 16.0;
        let errs: Vec<f64> = [64usize, 128, 256]
            .iter()
            .map(|&res| {
                let b = render_branch(&mesh, &camera_minus_z(), res);
                let frac = b.silhouette.count_inside() as f64 / (res * res) as f64;
                (frac - target).abs()
            })
            .collect();
        assert!(errs[0] > errs[1] && errs[1] > errs[2], "errors {errs:?}");
    }

    #[test]
    fn multisurface_sphere_branches_match_in_area() {
        let mesh = sphere_half();
        let rig = ViewRig::build(canonical_direction(), RigSize::Twenty, FrameMode::Viewer);
        let ms = render_multisurface(&mesh, &rig, 128);
        assert_eq!(ms.branches.len(), 10);
        let areas: Vec<usize> = ms.branches.iter().map(|b| b.silhouette.count_inside()).collect();
        let lo = *areas.iter().min().unwrap() as f64;
        let hi = *areas.iter().max().unwrap() as f64;
        assert!((hi - lo) / hi < 0.01, "areas {areas:?}");
    }

    #[test]
    fn frame_modes_coincide_at_canonical_direction() {
        let mesh = shapes::ShapeSpec::sample(
            shapes::Category::BarFrame,
            &mut rand_chacha::ChaCha8Rng::seed_from_u64(7),
        )
        .mesh();
        let (mesh, _) = crate::geom::normalize_mesh(&mesh).unwrap();
        let dir = canonical_direction();
        let viewer = render_multisurface(&mesh, &ViewRig::build(dir, RigSize::Twenty, FrameMode::Viewer), 64);
        let object = render_multisurface(&mesh, &ViewRig::build(dir, RigSize::Twenty, FrameMode::Object), 64);
        for (a, b) in viewer.branches.iter().zip(&object.branches) {
            assert_eq!(a.silhouette.raw(), b.silhouette.raw());
            assert_eq!(a.depth_front.raw(), b.depth_front.raw());
            assert_eq!(a.depth_back.raw(), b.depth_back.raw());
        }
    }

    #[test]
    fn input_of_half_sphere_scales_to_fill() {
        let (_, sil, norm) = make_input_normalized(
            &sphere_half(),
            &UnitVec3::new_normalize(Vec3::new(0.2, 0.4, 0.9)),
            128,
        )
        .unwrap();
        assert!((norm.scale - 2.0).abs() < 0.05, "scale {}", norm.scale);
        // The normalized disk touches all four image edges.
        assert!((0..128).any(|i| sil.is_inside(i, 0)));
        assert!((0..128).any(|i| sil.is_inside(i, 127)));
        assert!((0..128).any(|j| sil.is_inside(0, j)));
        assert!((0..128).any(|j| sil.is_inside(127, j)));
    }

    #[test]
    fn input_of_fitting_object_keeps_scale_near_one() {
        // Spans the window exactly: half-extent 1 in-plane.
        let mesh = shapes::cuboid(&Vec3::zeros(), &Vec3::new(1.0, 1.0, 0.4));
        let res = 128;
        let (_, _, norm) = make_input_normalized(
            &mesh,
            &UnitVec3::new_unchecked(Vec3::new(0.0, 0.0, 1.0)),
            res,
        )
        .unwrap();
        assert!(norm.scale >= 1.0 && norm.scale <= 1.0 + 2.0 / res as f64, "scale {}", norm.scale);
    }

    #[test]
    fn input_depth_is_centered_on_visible_surface() {
        let (depth, sil, _) = make_input_normalized(
            &sphere_half(),
            &UnitVec3::new_unchecked(Vec3::new(0.0, 0.0, 1.0)),
            64,
        )
        .unwrap();
        let mut sum = 0.0;
        let mut n = 0;
        for j in 0..64 {
            for i in 0..64 {
                if sil.is_inside(i, j) {
                    sum += depth.get(i, j);
                    n += 1;
                }
            }
        }
        assert!(n > 0);
        assert!((sum / n as f64).abs() < 1e-6);
    }

    #[test]
    fn empty_projection_is_an_error() {
        let mesh = TriMesh::new(vec![], vec![]);
        let err = make_input(&mesh, &UnitVec3::new_unchecked(Vec3::z()), 32).unwrap_err();
        assert!(matches!(err, Error::EmptySilhouette));
    }

    use rand::SeedableRng;
}
