use super::{Rotation, TriMesh, UnitVec3, Vec3};
use crate::{Error, Result};

/// Rotation, translation, and uniform scale. Applies as `p -> scale * R * p + t`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RigidTransform {
    pub rotation: Rotation,
    pub translation: Vec3,
    pub scale: f64,
}

impl RigidTransform {
    pub fn identity() -> Self {
        RigidTransform {
            rotation: Rotation::identity(),
            translation: Vec3::zeros(),
            scale: 1.0,
        }
    }

    pub fn apply(&self, p: &Vec3) -> Vec3 {
        self.scale * (self.rotation * p) + self.translation
    }

    /// Composition: `(a.then(b)).apply(p) == b.apply(a.apply(p))`.
    pub fn then(&self, after: &RigidTransform) -> RigidTransform {
        RigidTransform {
            rotation: after.rotation * self.rotation,
            translation: after.scale * (after.rotation * self.translation) + after.translation,
            scale: after.scale * self.scale,
        }
    }

    pub fn inverse(&self) -> RigidTransform {
        let inv_rot = self.rotation.inverse();
        let inv_scale = 1.0 / self.scale;
        RigidTransform {
            rotation: inv_rot,
            translation: -inv_scale * (inv_rot * self.translation),
            scale: inv_scale,
        }
    }

    pub fn apply_mesh(&self, mesh: &TriMesh) -> TriMesh {
        TriMesh::new(
            mesh.vertices.iter().map(|v| self.apply(v)).collect(),
            mesh.triangles.clone(),
        )
    }
}

/// Shortest-arc rotation taking `from` to `to` (minimal twist).
///
/// Axis is the normalized cross product; near-parallel and near-antiparallel
/// inputs degrade gracefully to the identity / a half-turn about a stable
/// perpendicular axis.
pub fn rotation_between(from: &UnitVec3, to: &UnitVec3) -> Rotation {
    let dot = from.dot(to);
    if dot >= 1.0 - 1e-15 {
        return Rotation::identity();
    }
    if dot <= -1.0 + 1e-12 {
        // Half turn about any axis perpendicular to `from`.
        let axis = perpendicular(from);
        return Rotation::from_axis_angle(&axis, std::f64::consts::PI);
    }
    let axis = UnitVec3::new_normalize(from.cross(to));
    Rotation::from_axis_angle(&axis, dot.clamp(-1.0, 1.0).acos())
}

fn perpendicular(v: &UnitVec3) -> UnitVec3 {
    let candidate = if v.x.abs() < 0.9 {
        Vec3::x()
    } else {
        Vec3::y()
    };
    UnitVec3::new_normalize(v.cross(&candidate))
}

/// Translates the surface-area-weighted centroid to the origin and scales the
/// tight bounding sphere (centered at that centroid) to radius 1.
///
/// Returns the normalized mesh and the transform that was applied, so
/// predictions can be mapped back to original coordinates via its inverse.
pub fn normalize_mesh(mesh: &TriMesh) -> Result<(TriMesh, RigidTransform)> {
    if mesh.vertices.is_empty() {
        return Err(Error::EmptyMesh);
    }
    let centroid = mesh.area_weighted_centroid()?;
    let radius = mesh
        .vertices
        .iter()
        .map(|v| (v - centroid).norm())
        .fold(0.0f64, f64::max);
    let scale = if radius > 0.0 { 1.0 / radius } else { 1.0 };
    let transform = RigidTransform {
        rotation: Rotation::identity(),
        translation: -scale * centroid,
        scale,
    };
    Ok((transform.apply_mesh(mesh), transform))
}
