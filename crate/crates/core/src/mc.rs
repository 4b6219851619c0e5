//! Marching cubes over a sampled scalar field.
//!
//! Per cube, crossed edges are paired face-by-face (ambiguous faces always
//! separate the inside corners, a rule both neighbors of a shared face
//! compute identically, so surfaces are crack-free) and the resulting loops
//! are fan-triangulated. Each crossing vertex is interpolated once per grid
//! edge and shared by every incident triangle.

use crate::field::ScalarField;
use crate::geom::{TriMesh, Vec3};
use crate::voxel::VoxelGrid;
use crate::{Error, Result};
use std::collections::HashMap;

/// A scalar field sampled on a dim³ lattice of voxel centers.
pub trait IsoField {
    fn dim(&self) -> usize;
    /// None marks an unobserved sample; cubes touching one are skipped.
    fn value(&self, x: usize, y: usize, z: usize) -> Option<f64>;
    fn position(&self, x: usize, y: usize, z: usize) -> Vec3;
}

impl IsoField for ScalarField {
    fn dim(&self) -> usize {
        self.dim()
    }

    fn value(&self, x: usize, y: usize, z: usize) -> Option<f64> {
        ScalarField::value(self, x, y, z)
    }

    fn position(&self, x: usize, y: usize, z: usize) -> Vec3 {
        self.voxel_center(x, y, z)
    }
}

/// Binary occupancy viewed as a field: +1 inside, -1 outside, isolevel 0.
impl IsoField for VoxelGrid {
    fn dim(&self) -> usize {
        self.dim()
    }

    fn value(&self, x: usize, y: usize, z: usize) -> Option<f64> {
        Some(if self.get(x, y, z) { 1.0 } else { -1.0 })
    }

    fn position(&self, x: usize, y: usize, z: usize) -> Vec3 {
        self.voxel_center(x, y, z)
    }
}

/// Corner offsets in the conventional marching-cubes order.
const CORNERS: [[usize; 3]; 8] = [
    [0, 0, 0],
    [1, 0, 0],
    [1, 1, 0],
    [0, 1, 0],
    [0, 0, 1],
    [1, 0, 1],
    [1, 1, 1],
    [0, 1, 1],
];

/// Cube edges as corner pairs.
const EDGES: [[usize; 2]; 12] = [
    [0, 1],
    [1, 2],
    [2, 3],
    [3, 0],
    [4, 5],
    [5, 6],
    [6, 7],
    [7, 4],
    [0, 4],
    [1, 5],
    [2, 6],
    [3, 7],
];

/// Faces as a corner cycle plus the edge between consecutive cycle corners.
const FACES: [([usize; 4], [usize; 4]); 6] = [
    ([0, 1, 2, 3], [0, 1, 2, 3]),
    ([4, 5, 6, 7], [4, 5, 6, 7]),
    ([0, 1, 5, 4], [0, 9, 4, 8]),
    ([1, 2, 6, 5], [1, 10, 5, 9]),
    ([2, 3, 7, 6], [2, 11, 6, 10]),
    ([3, 0, 4, 7], [3, 8, 7, 11]),
];

/// Extracts the isolevel surface as a triangle mesh. A sample is inside when
/// its value exceeds the isolevel; triangles are oriented with normals toward
/// decreasing values.
pub fn marching_cubes(field: &impl IsoField, isolevel: f64) -> Result<TriMesh> {
    let dim = field.dim();
    let mut vertices: Vec<Vec3> = Vec::new();
    let mut triangles: Vec<[u32; 3]> = Vec::new();
    // One welded vertex per crossed lattice edge, keyed by its sample pair.
    let mut edge_vertex: HashMap<(u32, u32), u32> = HashMap::new();
    let flat = |x: usize, y: usize, z: usize| (x + dim * (y + dim * z)) as u32;

    for z in 0..dim.saturating_sub(1) {
        for y in 0..dim - 1 {
            for x in 0..dim - 1 {
                let mut values = [0.0f64; 8];
                let mut defined = true;
                for (k, c) in CORNERS.iter().enumerate() {
                    match field.value(x + c[0], y + c[1], z + c[2]) {
                        Some(v) => values[k] = v,
                        None => {
                            defined = false;
                            break;
                        }
                    }
                }
                if !defined {
                    continue;
                }
                let inside: Vec<bool> = values.iter().map(|&v| v > isolevel).collect();
                if inside.iter().all(|&b| b) || inside.iter().all(|&b| !b) {
                    continue;
                }

                let crossed = |e: usize| inside[EDGES[e][0]] != inside[EDGES[e][1]];

                // Pair crossed edges within each face. Each crossed edge
                // borders exactly two faces, giving it exactly two links.
                let mut links: [Vec<(usize, usize)>; 12] = Default::default();
                for (face_id, (corners, edges)) in FACES.iter().enumerate() {
                    let face_crossed: Vec<usize> =
                        edges.iter().copied().filter(|&e| crossed(e)).collect();
                    match face_crossed.len() {
                        0 => {}
                        2 => {
                            links[face_crossed[0]].push((face_id, face_crossed[1]));
                            links[face_crossed[1]].push((face_id, face_crossed[0]));
                        }
                        4 => {
                            // Saddle face: corners alternate in/out around the
                            // cycle. Connect the edges flanking each inside
                            // corner, separating the two inside corners.
                            let pairs: [(usize, usize); 2] = if inside[corners[0]] {
                                [(edges[3], edges[0]), (edges[1], edges[2])]
                            } else {
                                [(edges[0], edges[1]), (edges[2], edges[3])]
                            };
                            for (a, b) in pairs {
                                links[a].push((face_id, b));
                                links[b].push((face_id, a));
                            }
                        }
                        _ => unreachable!("odd crossing count on a face"),
                    }
                }

                // Trace the loops formed by the links.
                let mut visited = [false; 12];
                for start in 0..12 {
                    if !crossed(start) || visited[start] {
                        continue;
                    }
                    let mut loop_edges = vec![start];
                    visited[start] = true;
                    let (mut via_face, mut current) = links[start][0];
                    while current != start {
                        visited[current] = true;
                        loop_edges.push(current);
                        let next = links[current]
                            .iter()
                            .copied()
                            .find(|&(f, _)| f != via_face)
                            .expect("crossed edge has two face links");
                        via_face = next.0;
                        current = next.1;
                    }

                    // Interpolated crossing point per loop edge, welded on
                    // the lattice edge so neighbors share bit-equal vertices.
                    let mut loop_vertices = Vec::with_capacity(loop_edges.len());
                    for &e in &loop_edges {
                        let [a, b] = EDGES[e];
                        let (ca, cb) = (CORNERS[a], CORNERS[b]);
                        let ka = flat(x + ca[0], y + ca[1], z + ca[2]);
                        let kb = flat(x + cb[0], y + cb[1], z + cb[2]);
                        let key = (ka.min(kb), ka.max(kb));
                        let idx = *edge_vertex.entry(key).or_insert_with(|| {
                            let (ka_pos, kb_pos, va, vb) = if ka < kb {
                                (
                                    field.position(x + ca[0], y + ca[1], z + ca[2]),
                                    field.position(x + cb[0], y + cb[1], z + cb[2]),
                                    values[a],
                                    values[b],
                                )
                            } else {
                                (
                                    field.position(x + cb[0], y + cb[1], z + cb[2]),
                                    field.position(x + ca[0], y + ca[1], z + ca[2]),
                                    values[b],
                                    values[a],
                                )
                            };
                            let t = (isolevel - va) / (vb - va);
                            vertices.push(ka_pos + t * (kb_pos - ka_pos));
                            (vertices.len() - 1) as u32
                        });
                        loop_vertices.push(idx);
                    }

                    // Orient the loop so its normal points inside -> outside
                    // (toward decreasing values), then fan-triangulate.
                    let newell = {
                        let mut n = Vec3::zeros();
                        for i in 0..loop_vertices.len() {
                            let p = vertices[loop_vertices[i] as usize];
                            let q = vertices[loop_vertices[(i + 1) % loop_vertices.len()] as usize];
                            n += p.cross(&q);
                        }
                        n
                    };
                    let mut outward = Vec3::zeros();
                    for &e in &loop_edges {
                        let [a, b] = EDGES[e];
                        let (pin, pout) = if inside[a] { (a, b) } else { (b, a) };
                        let (ci, co) = (CORNERS[pin], CORNERS[pout]);
                        outward += field.position(x + co[0], y + co[1], z + co[2])
                            - field.position(x + ci[0], y + ci[1], z + ci[2]);
                    }
                    if newell.dot(&outward) < 0.0 {
                        loop_vertices.reverse();
                    }
                    for i in 1..loop_vertices.len() - 1 {
                        triangles.push([loop_vertices[0], loop_vertices[i], loop_vertices[i + 1]]);
                    }
                }
            }
        }
    }

    if triangles.is_empty() {
        return Err(Error::NoCrossing(isolevel));
    }
    Ok(TriMesh::new(vertices, triangles))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::FrameMode;
    use crate::voxel::{voxelize_solid, GridSpec};
    use std::collections::HashSet;

    fn sphere_sdf(dim: usize, radius: f64) -> ScalarField {
        let spec = GridSpec {
            dim,
            center: Vec3::zeros(),
            side: 2.0,
            frame: FrameMode::Object,
        };
        let mut f = ScalarField::new(&spec, 10.0).unwrap();
        for z in 0..dim {
            for y in 0..dim {
                for x in 0..dim {
                    let p = f.voxel_center(x, y, z);
                    // Positive outside to match the fused-field convention.
                    f.set_exact(x, y, z, p.norm() - radius);
                }
            }
        }
        f
    }

    fn euler_characteristic(mesh: &TriMesh) -> i64 {
        let mut edges: HashSet<(u32, u32)> = HashSet::new();
        for t in &mesh.triangles {
            for (a, b) in [(t[0], t[1]), (t[1], t[2]), (t[2], t[0])] {
                edges.insert((a.min(b), a.max(b)));
            }
        }
        mesh.vertices.len() as i64 - edges.len() as i64 + mesh.triangles.len() as i64
    }

    #[test]
    fn sphere_sdf_mesh_has_correct_radius_and_topology() {
        let f = sphere_sdf(48, 0.5);
        let mesh = marching_cubes(&f, 0.0).unwrap();
        let w = f.voxel_width();
        for v in &mesh.vertices {
            assert!((v.norm() - 0.5).abs() < w, "radius {}", v.norm());
        }
        assert_eq!(euler_characteristic(&mesh), 2);
        assert!(mesh.is_closed());
    }

    #[test]
    fn uniform_field_has_no_crossing() {
        let spec = GridSpec {
            dim: 8,
            center: Vec3::zeros(),
            side: 2.0,
            frame: FrameMode::Object,
        };
        let mut f = ScalarField::new(&spec, 10.0).unwrap();
        for z in 0..8 {
            for y in 0..8 {
                for x in 0..8 {
                    f.set_exact(x, y, z, 1.0);
                }
            }
        }
        assert!(matches!(marching_cubes(&f, 0.0), Err(Error::NoCrossing(_))));
    }

    #[test]
    fn unobserved_cells_are_skipped_not_crossed() {
        let spec = GridSpec {
            dim: 8,
            center: Vec3::zeros(),
            side: 2.0,
            frame: FrameMode::Object,
        };
        // Only two observed cells and they straddle the isolevel, but no
        // complete cube is observed, so no surface exists.
        let mut f = ScalarField::new(&spec, 10.0).unwrap();
        f.set_exact(0, 0, 0, 1.0);
        f.set_exact(7, 7, 7, -1.0);
        assert!(matches!(marching_cubes(&f, 0.0), Err(Error::NoCrossing(_))));
    }

    #[test]
    fn solid_cube_grid_meshes_to_its_bounding_box() {
        let half = Vec3::new(0.5, 0.4, 0.6);
        let mesh = crate::shapes::cuboid(&Vec3::zeros(), &half);
        let grid = voxelize_solid(&mesh, &GridSpec::object(48)).unwrap();
        let out = marching_cubes(&grid, 0.0).unwrap();
        let (lo, hi) = out.bounds().unwrap();
        let w = grid.voxel_width();
        for k in 0..3 {
            assert!((lo[k] - (-half[k])).abs() < w + w, "lo[{k}] = {}", lo[k]);
            assert!((hi[k] - half[k]).abs() < w + w, "hi[{k}] = {}", hi[k]);
        }
        assert_eq!(euler_characteristic(&out), 2);
    }

    #[test]
    fn binary_sphere_grid_meshes_to_sphere() {
        let mesh = crate::shapes::uv_sphere(0.62, 32, 64);
        let grid = voxelize_solid(&mesh, &GridSpec::object(48)).unwrap();
        let out = marching_cubes(&grid, 0.0).unwrap();
        let w = grid.voxel_width();
        for v in &out.vertices {
            // Voxelization dilates by up to half a diagonal and the binary
            // field adds half a cell of interpolation offset.
            assert!((v.norm() - 0.62).abs() < 1.8 * w, "radius {}", v.norm());
        }
        assert_eq!(euler_characteristic(&out), 2);
    }

    #[test]
    fn saddle_faces_produce_closed_surfaces() {
        // Two diagonal occupied voxels share only an edge: the classic
        // ambiguous configuration. The fixed pairing rule must still give a
        // closed mesh.
        let spec = GridSpec {
            dim: 8,
            center: Vec3::zeros(),
            side: 2.0,
            frame: FrameMode::Object,
        };
        let mut grid = crate::voxel::VoxelGrid::new(&spec).unwrap();
        grid.set(3, 3, 3, true);
        grid.set(4, 4, 3, true);
        let out = marching_cubes(&grid, 0.0).unwrap();
        assert!(out.is_closed());
    }
}
