//! Meshes, rigid transforms, orthographic cameras, and view rigs.

mod camera;
mod mesh;
mod mesh_io;
mod transform;

pub use camera::{
    build_view_rig, camera_toward_origin, dodecahedron_directions, octahedron_directions,
    DODECAHEDRON_MIN_ANGLE, FrameMode, OrthoCamera, RigSize, ViewRig,
};
pub use mesh::TriMesh;
pub use mesh_io::{load_mesh, save_mesh, MeshFormat};
pub use transform::{normalize_mesh, rotation_between, RigidTransform};

/// 3D vector in model units.
pub type Vec3 = nalgebra::Vector3<f64>;
/// Unit-length 3D vector (directions, normals).
pub type UnitVec3 = nalgebra::Unit<Vec3>;
/// 3x3 rotation matrix.
pub type Rotation = nalgebra::Rotation3<f64>;
