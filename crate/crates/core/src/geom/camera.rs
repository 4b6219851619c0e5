use super::{rotation_between, Rotation, UnitVec3, Vec3};
use crate::{Error, Result};

/// Minimum pairwise angle between dodecahedron vertex directions,
/// arccos(√5/3) ≈ 41.81°.
pub const DODECAHEDRON_MIN_ANGLE: f64 = 0.729_727_656_226_966_3;

/// Orthographic camera with a square [-1,1]² frustum in the (right, up)
/// plane. Depth is measured along `view_dir` from the plane through the
/// world origin orthogonal to `view_dir`.
///
/// (right, up, view_dir) is a right-handed orthonormal triad:
/// right × up = view_dir.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrthoCamera {
    pub right: UnitVec3,
    pub up: UnitVec3,
    pub view_dir: UnitVec3,
}

impl OrthoCamera {
    /// Builds the camera looking along `view_dir` with `up_hint` projected
    /// onto the plane orthogonal to `view_dir` and renormalized.
    ///
    /// `up_hint` must not be parallel to `view_dir`.
    pub fn from_view_dir(view_dir: UnitVec3, up_hint: &Vec3) -> OrthoCamera {
        let up = UnitVec3::new_normalize(up_hint - view_dir.dot(up_hint) * view_dir.into_inner());
        let right = UnitVec3::new_unchecked(up.cross(&view_dir));
        OrthoCamera { right, up, view_dir }
    }

    /// The opposite-direction camera: same up, negated right and view_dir.
    pub fn antipode(&self) -> OrthoCamera {
        OrthoCamera {
            right: UnitVec3::new_unchecked(-self.right.into_inner()),
            up: self.up,
            view_dir: UnitVec3::new_unchecked(-self.view_dir.into_inner()),
        }
    }

    pub fn rotated_by(&self, r: &Rotation) -> OrthoCamera {
        OrthoCamera {
            right: UnitVec3::new_unchecked(r * self.right.into_inner()),
            up: UnitVec3::new_unchecked(r * self.up.into_inner()),
            view_dir: UnitVec3::new_unchecked(r * self.view_dir.into_inner()),
        }
    }

    /// Signed depth of a world point along the view direction.
    pub fn depth_of(&self, p: &Vec3) -> f64 {
        self.view_dir.dot(p)
    }

    /// In-plane frustum coordinates (a along right, b along up) of a point.
    pub fn plane_coords_of(&self, p: &Vec3) -> (f64, f64) {
        (self.right.dot(p), self.up.dot(p))
    }

    /// Origin of the ray through frustum coordinates (a, b), placed on the
    /// depth reference plane so that ray parameter t equals depth.
    pub fn ray_origin(&self, a: f64, b: f64) -> Vec3 {
        a * self.right.into_inner() + b * self.up.into_inner()
    }
}

/// Number of cameras in a view rig.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RigSize {
    Six,
    Twenty,
}

impl RigSize {
    pub fn n_views(self) -> usize {
        match self {
            RigSize::Six => 6,
            RigSize::Twenty => 20,
        }
    }

    pub fn n_pairs(self) -> usize {
        self.n_views() / 2
    }

    pub fn from_views(n: usize) -> Result<RigSize> {
        match n {
            6 => Ok(RigSize::Six),
            20 => Ok(RigSize::Twenty),
            _ => Err(Error::Config(format!("unsupported view count {n}; use 6 or 20"))),
        }
    }

    /// Unit direction the rig's slot 0 occupies before rotation.
    pub fn anchor(self) -> UnitVec3 {
        match self {
            RigSize::Six => UnitVec3::new_unchecked(Vec3::z()),
            RigSize::Twenty => UnitVec3::new_normalize(Vec3::new(1.0, 1.0, 1.0)),
        }
    }
}

/// Coordinate frame the rig's outputs are expressed in.
///
/// Viewer: anchored to the input view, so camera 0 is always the input view
/// and targets rotate with it. Object: anchored to the model's canonical
/// frame, so targets are identical for every input view of the same object.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FrameMode {
    Viewer,
    Object,
}

impl FrameMode {
    pub fn parse(s: &str) -> Result<FrameMode> {
        match s {
            "viewer" => Ok(FrameMode::Viewer),
            "object" => Ok(FrameMode::Object),
            _ => Err(Error::Config(format!("unknown frame mode {s:?}; use viewer or object"))),
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            FrameMode::Viewer => "viewer",
            FrameMode::Object => "object",
        }
    }
}

/// Ordered set of orthographic cameras looking at the origin from the rotated
/// dodecahedron (20) or octahedron (6) vertices.
///
/// Camera 0's view direction points from the input viewpoint toward the
/// object. `pairs` lists antipodal camera index pairs; paired cameras have
/// opposite view directions and shared up vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct ViewRig {
    pub cameras: Vec<OrthoCamera>,
    pub pairs: Vec<(usize, usize)>,
    pub frame_mode: FrameMode,
    /// Whole-rig rotation applied to the canonical cameras; maps rig-frame
    /// coordinates to world coordinates.
    pub rotation: Rotation,
}

/// Normalized dodecahedron vertices: (±1,±1,±1), (0,±1/φ,±φ), (±1/φ,±φ,0),
/// (±φ,0,±1/φ) with φ the golden ratio. Element 0 is normalize(1,1,1);
/// element i+10 is the antipode of element i.
pub fn dodecahedron_directions() -> Vec<UnitVec3> {
    let phi = (1.0 + 5.0f64.sqrt()) / 2.0;
    let inv = 1.0 / phi;
    let half: [Vec3; 10] = [
        Vec3::new(1.0, 1.0, 1.0),
        Vec3::new(1.0, 1.0, -1.0),
        Vec3::new(1.0, -1.0, 1.0),
        Vec3::new(1.0, -1.0, -1.0),
        Vec3::new(0.0, inv, phi),
        Vec3::new(0.0, inv, -phi),
        Vec3::new(inv, phi, 0.0),
        Vec3::new(inv, -phi, 0.0),
        Vec3::new(phi, 0.0, inv),
        Vec3::new(phi, 0.0, -inv),
    ];
    half.iter()
        .map(|v| UnitVec3::new_normalize(*v))
        .chain(half.iter().map(|v| UnitVec3::new_normalize(-v)))
        .collect()
}

/// Octahedron vertex directions [+z, +x, +y, -z, -x, -y]; element i+3 is the
/// antipode of element i. Slot 0 is +z so the rotated slot 0 is the input view.
pub fn octahedron_directions() -> Vec<UnitVec3> {
    [Vec3::z(), Vec3::x(), Vec3::y(), -Vec3::z(), -Vec3::x(), -Vec3::y()]
        .iter()
        .map(|v| UnitVec3::new_unchecked(*v))
        .collect()
}

fn canonical_positions(size: RigSize) -> Vec<UnitVec3> {
    match size {
        RigSize::Six => octahedron_directions(),
        RigSize::Twenty => dodecahedron_directions(),
    }
}

fn antipodal_pairs(size: RigSize) -> Vec<(usize, usize)> {
    let half = size.n_pairs();
    (0..half).map(|i| (i, i + half)).collect()
}

/// Camera looking toward the origin from unit position `pos`, with up taken
/// from world +z (or +y when the view direction is within 1e-6 of ±z).
pub fn camera_toward_origin(pos: &UnitVec3) -> OrthoCamera {
    let view_dir = UnitVec3::new_unchecked(-pos.into_inner());
    let hint = if view_dir.z.abs() > 1.0 - 1e-6 {
        Vec3::y()
    } else {
        Vec3::z()
    };
    OrthoCamera::from_view_dir(view_dir, &hint)
}

impl ViewRig {
    /// Builds the rig of `size` cameras with slot 0 placed at `input_dir`.
    ///
    /// Canonical cameras (up from world +z, +y at the poles) are rotated as a
    /// whole by the shortest-arc rotation taking the canonical anchor to
    /// `input_dir`, so every camera's relative transform from camera 0 is
    /// independent of the input view.
    pub fn build(input_dir: UnitVec3, size: RigSize, frame_mode: FrameMode) -> ViewRig {
        let rotation = rotation_between(&size.anchor(), &input_dir);
        ViewRig {
            cameras: canonical_positions(size)
                .iter()
                .map(|p| camera_toward_origin(p).rotated_by(&rotation))
                .collect(),
            pairs: antipodal_pairs(size),
            frame_mode,
            rotation,
        }
    }

    pub fn size(&self) -> RigSize {
        match self.cameras.len() {
            6 => RigSize::Six,
            _ => RigSize::Twenty,
        }
    }

    /// Rig with every camera rotated by `r`. Frame tag is preserved.
    pub fn transformed_by(&self, r: &Rotation) -> ViewRig {
        ViewRig {
            cameras: self.cameras.iter().map(|c| c.rotated_by(r)).collect(),
            pairs: self.pairs.clone(),
            frame_mode: self.frame_mode,
            rotation: r * self.rotation,
        }
    }

    /// Viewpoint direction of camera `i` (opposite its view direction).
    pub fn position_dir(&self, i: usize) -> UnitVec3 {
        UnitVec3::new_unchecked(-self.cameras[i].view_dir.into_inner())
    }

    /// First camera of pair `k` expressed in the rig's own frame: the
    /// canonical (unrotated) camera for that slot, bit-identical across rigs
    /// of the same size. Fusion runs in this frame so fused shapes transfer
    /// between rigs by index.
    pub fn rig_frame_camera(&self, k: usize) -> OrthoCamera {
        camera_toward_origin(&canonical_positions(self.size())[self.pairs[k].0])
    }
}

/// Builds a view rig; see [`ViewRig::build`].
pub fn build_view_rig(input_dir: UnitVec3, size: RigSize, frame_mode: FrameMode) -> ViewRig {
    ViewRig::build(input_dir, size, frame_mode)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::canonical_direction;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};

    #[test]
    fn dodecahedron_element_zero_and_pairs() {
        let dirs = dodecahedron_directions();
        assert_eq!(dirs.len(), 20);
        let expected = Vec3::new(1.0, 1.0, 1.0) / 3.0f64.sqrt();
        assert_relative_eq!((dirs[0].into_inner() - expected).norm(), 0.0, epsilon = 1e-15);
        for i in 0..10 {
            assert_relative_eq!(dirs[i].dot(&dirs[i + 10]), -1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn dodecahedron_min_pairwise_angle() {
        let dirs = dodecahedron_directions();
        let mut min_angle = f64::INFINITY;
        let mut count = 0;
        for i in 0..20 {
            for j in (i + 1)..20 {
                min_angle = min_angle.min(dirs[i].dot(&dirs[j]).clamp(-1.0, 1.0).acos());
                count += 1;
            }
        }
        assert_eq!(count, 190);
        assert_relative_eq!(min_angle, DODECAHEDRON_MIN_ANGLE, epsilon = 1e-12);
        assert_relative_eq!(min_angle, (5.0f64.sqrt() / 3.0).acos(), epsilon = 1e-12);
    }

    #[test]
    fn octahedron_layout() {
        let dirs = octahedron_directions();
        assert_eq!(dirs.len(), 6);
        assert_relative_eq!((dirs[0].into_inner() - Vec3::z()).norm(), 0.0);
        for i in 0..3 {
            assert_relative_eq!(dirs[i].dot(&dirs[i + 3]), -1.0);
        }
    }

    #[test]
    fn camera_triad_is_right_handed() {
        let cam = OrthoCamera::from_view_dir(
            UnitVec3::new_normalize(Vec3::new(0.2, -0.7, 0.4)),
            &Vec3::z(),
        );
        assert_relative_eq!(
            (cam.right.cross(&cam.up) - cam.view_dir.into_inner()).norm(),
            0.0,
            epsilon = 1e-12
        );
        assert_relative_eq!(cam.right.dot(&cam.up), 0.0, epsilon = 1e-12);
        assert_relative_eq!(cam.up.dot(&cam.view_dir), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn antipode_keeps_up_negates_right() {
        let cam = OrthoCamera::from_view_dir(
            UnitVec3::new_normalize(Vec3::new(1.0, 2.0, -0.5)),
            &Vec3::z(),
        );
        let anti = cam.antipode();
        assert_eq!(anti.up, cam.up);
        assert_relative_eq!((anti.right.into_inner() + cam.right.into_inner()).norm(), 0.0);
        assert_relative_eq!(anti.view_dir.dot(&cam.view_dir), -1.0);
        assert_relative_eq!(
            (anti.right.cross(&anti.up) - anti.view_dir.into_inner()).norm(),
            0.0,
            epsilon = 1e-12
        );
    }

    #[test]
    fn canonical_input_dir_gives_identity_rig() {
        // At the canonical anchor the rotation is the identity, so the rig
        // must equal the unrotated canonical rig bit-for-bit.
        let rig = ViewRig::build(canonical_direction(), RigSize::Twenty, FrameMode::Viewer);
        let dirs = dodecahedron_directions();
        for (cam, pos) in rig.cameras.iter().zip(&dirs) {
            assert_eq!(cam.view_dir.into_inner(), -pos.into_inner());
        }
    }

    #[test]
    fn camera_zero_faces_object_from_input_viewpoint() {
        let rig = ViewRig::build(
            UnitVec3::new_normalize(Vec3::x()),
            RigSize::Twenty,
            FrameMode::Viewer,
        );
        assert_relative_eq!(
            (rig.cameras[0].view_dir.into_inner() - Vec3::new(-1.0, 0.0, 0.0)).norm(),
            0.0,
            epsilon = 1e-12
        );
    }

    #[test]
    fn rig_preserves_pairwise_angles() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let canon = dodecahedron_directions();
        for _ in 0..20 {
            let v = UnitVec3::new_normalize(Vec3::new(
                rng.random_range(-1.0..1.0),
                rng.random_range(-1.0..1.0),
                rng.random_range(-1.0..1.0),
            ));
            let rig = ViewRig::build(v, RigSize::Twenty, FrameMode::Viewer);
            for i in 0..20 {
                for j in 0..20 {
                    let got = rig.position_dir(i).dot(&rig.position_dir(j));
                    let want = canon[i].dot(&canon[j]);
                    assert_relative_eq!(got, want, epsilon = 1e-9);
                }
            }
        }
    }

    #[test]
    fn relative_transforms_match_canonical_over_random_inputs() {
        // The camera-0-to-camera-i transform, expressed in camera 0's own
        // basis, must be independent of the input direction.
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(13);
        let canon = ViewRig::build(canonical_direction(), RigSize::Twenty, FrameMode::Object);
        let relative = |rig: &ViewRig, i: usize| -> [[f64; 3]; 3] {
            let c0 = &rig.cameras[0];
            let ci = &rig.cameras[i];
            let in_c0 = |v: Vec3| [c0.right.dot(&v), c0.up.dot(&v), c0.view_dir.dot(&v)];
            [
                in_c0(ci.right.into_inner()),
                in_c0(ci.up.into_inner()),
                in_c0(ci.view_dir.into_inner()),
            ]
        };
        for _ in 0..100 {
            let v = UnitVec3::new_normalize(Vec3::new(
                rng.random_range(-1.0..1.0),
                rng.random_range(-1.0..1.0),
                rng.random_range(-1.0..1.0),
            ));
            let rig = ViewRig::build(v, RigSize::Twenty, FrameMode::Viewer);
            for i in 0..20 {
                let got = relative(&rig, i);
                let want = relative(&canon, i);
                for (rg, rw) in got.iter().zip(want.iter()) {
                    for (g, w) in rg.iter().zip(rw.iter()) {
                        assert_relative_eq!(g, w, epsilon = 1e-9);
                    }
                }
            }
        }
    }

    #[test]
    fn viewer_rig_is_rotated_object_rig() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(29);
        for &size in &[RigSize::Six, RigSize::Twenty] {
            let object = ViewRig::build(size.anchor(), size, FrameMode::Object);
            for _ in 0..50 {
                let v = UnitVec3::new_normalize(Vec3::new(
                    rng.random_range(-1.0..1.0),
                    rng.random_range(-1.0..1.0),
                    rng.random_range(-1.0..1.0),
                ));
                let viewer = ViewRig::build(v, size, FrameMode::Viewer);
                let r_in = crate::geom::rotation_between(&size.anchor(), &v);
                let rotated = object.transformed_by(&r_in);
                for (a, b) in viewer.cameras.iter().zip(&rotated.cameras) {
                    assert_relative_eq!((a.right.into_inner() - b.right.into_inner()).norm(), 0.0, epsilon = 1e-9);
                    assert_relative_eq!((a.up.into_inner() - b.up.into_inner()).norm(), 0.0, epsilon = 1e-9);
                    assert_relative_eq!((a.view_dir.into_inner() - b.view_dir.into_inner()).norm(), 0.0, epsilon = 1e-9);
                }
            }
        }
    }

    #[test]
    fn pole_cameras_use_y_up() {
        let rig = ViewRig::build(
            UnitVec3::new_unchecked(Vec3::z()),
            RigSize::Six,
            FrameMode::Viewer,
        );
        assert_relative_eq!((rig.cameras[0].up.into_inner() - Vec3::y()).norm(), 0.0, epsilon = 1e-12);
        assert_relative_eq!((rig.cameras[3].up.into_inner() - Vec3::y()).norm(), 0.0, epsilon = 1e-12);
        for cam in &rig.cameras {
            assert_relative_eq!(
                (cam.right.cross(&cam.up) - cam.view_dir.into_inner()).norm(),
                0.0,
                epsilon = 1e-12
            );
        }
    }

    #[test]
    fn rig_size_parsing() {
        assert_eq!(RigSize::from_views(6).unwrap(), RigSize::Six);
        assert_eq!(RigSize::from_views(20).unwrap(), RigSize::Twenty);
        assert!(RigSize::from_views(12).is_err());
    }
}
