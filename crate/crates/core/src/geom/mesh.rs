use super::Vec3;
use crate::{Error, Result};

/// Indexed triangle mesh. Triangles are CCW when viewed from outside.
#[derive(Debug, Clone, PartialEq)]
pub struct TriMesh {
    pub vertices: Vec<Vec3>,
    pub triangles: Vec<[u32; 3]>,
}

impl TriMesh {
    pub fn new(vertices: Vec<Vec3>, triangles: Vec<[u32; 3]>) -> Self {
        TriMesh { vertices, triangles }
    }

    pub fn triangle_vertices(&self, t: usize) -> [Vec3; 3] {
        let [a, b, c] = self.triangles[t];
        [
            self.vertices[a as usize],
            self.vertices[b as usize],
            self.vertices[c as usize],
        ]
    }

    pub fn triangle_area(&self, t: usize) -> f64 {
        let [a, b, c] = self.triangle_vertices(t);
        0.5 * (b - a).cross(&(c - a)).norm()
    }

    pub fn surface_area(&self) -> f64 {
        (0..self.triangles.len()).map(|t| self.triangle_area(t)).sum()
    }

    /// Centroid weighted by triangle area (a surface integral, not a vertex
    /// average), so tessellation density does not shift it.
    pub fn area_weighted_centroid(&self) -> Result<Vec3> {
        let mut total = 0.0;
        let mut acc = Vec3::zeros();
        for t in 0..self.triangles.len() {
            let [a, b, c] = self.triangle_vertices(t);
            let area = 0.5 * (b - a).cross(&(c - a)).norm();
            acc += area * (a + b + c) / 3.0;
            total += area;
        }
        if total <= 0.0 {
            return Err(Error::ZeroArea);
        }
        Ok(acc / total)
    }

    /// Axis-aligned bounds as (min, max). Errors on an empty mesh.
    pub fn bounds(&self) -> Result<(Vec3, Vec3)> {
        if self.vertices.is_empty() {
            return Err(Error::EmptyMesh);
        }
        let mut lo = self.vertices[0];
        let mut hi = self.vertices[0];
        for v in &self.vertices[1..] {
            lo = lo.inf(v);
            hi = hi.sup(v);
        }
        Ok((lo, hi))
    }

    /// Drops triangles with area below `min_area` and any vertices that end up
    /// unreferenced. Indices are remapped; vertex order is otherwise preserved.
    pub fn without_degenerate_triangles(&self, min_area: f64) -> TriMesh {
        let kept: Vec<[u32; 3]> = (0..self.triangles.len())
            .filter(|&t| {
                let [a, b, c] = self.triangles[t];
                a != b && b != c && a != c && self.triangle_area(t) > min_area
            })
            .map(|t| self.triangles[t])
            .collect();
        let mut referenced = vec![false; self.vertices.len()];
        for tri in &kept {
            for &i in tri {
                referenced[i as usize] = true;
            }
        }
        // Keep referenced vertices in their original order so cleanup of an
        // already-clean mesh is the identity.
        let mut remap = vec![u32::MAX; self.vertices.len()];
        let mut vertices = Vec::new();
        for (i, &used) in referenced.iter().enumerate() {
            if used {
                remap[i] = vertices.len() as u32;
                vertices.push(self.vertices[i]);
            }
        }
        let triangles = kept.iter().map(|tri| tri.map(|i| remap[i as usize])).collect();
        TriMesh { vertices, triangles }
    }

    /// Signed volume of the enclosed region; positive when triangles are
    /// oriented outward (CCW from outside).
    pub fn signed_volume(&self) -> f64 {
        (0..self.triangles.len())
            .map(|t| {
                let [a, b, c] = self.triangle_vertices(t);
                a.dot(&b.cross(&c)) / 6.0
            })
            .sum()
    }

    /// True when every directed edge appears exactly once and is matched by
    /// its reverse, i.e. the mesh is a closed orientable surface (possibly
    /// with several connected components).
    pub fn is_closed(&self) -> bool {
        let mut edges = std::collections::HashMap::new();
        for tri in &self.triangles {
            for k in 0..3 {
                let e = (tri[k], tri[(k + 1) % 3]);
                if *edges.entry(e).and_modify(|c| *c += 1).or_insert(1u32) > 1 {
                    return false;
                }
            }
        }
        edges.keys().all(|&(a, b)| edges.contains_key(&(b, a)))
    }

    /// Appends another mesh, offsetting its indices.
    pub fn append(&mut self, other: &TriMesh) {
        let offset = self.vertices.len() as u32;
        self.vertices.extend_from_slice(&other.vertices);
        self.triangles
            .extend(other.triangles.iter().map(|t| t.map(|i| i + offset)));
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn unit_right_triangle() -> TriMesh {
        TriMesh::new(
            vec![
                Vec3::new(0.0, 0.0, 0.0),
                Vec3::new(1.0, 0.0, 0.0),
                Vec3::new(0.0, 1.0, 0.0),
            ],
            vec![[0, 1, 2]],
        )
    }

    #[test]
    fn area_of_right_triangle() {
        assert_relative_eq!(unit_right_triangle().surface_area(), 0.5);
    }

    #[test]
    fn centroid_is_area_weighted() {
        // Two triangles sharing an edge, one with 4x the area of the other:
        // the centroid must lean toward the big one by exactly the area ratio.
        let mesh = TriMesh::new(
            vec![
                Vec3::new(0.0, 0.0, 0.0),
                Vec3::new(1.0, 0.0, 0.0),
                Vec3::new(0.0, 1.0, 0.0),
                Vec3::new(1.0, 4.0, 0.0),
            ],
            vec![[0, 1, 2], [0, 1, 3]],
        );
        let c0 = Vec3::new(1.0 / 3.0, 1.0 / 3.0, 0.0);
        let c1 = Vec3::new(2.0 / 3.0, 4.0 / 3.0, 0.0);
        let expected = (0.5 * c0 + 2.0 * c1) / 2.5;
        let got = mesh.area_weighted_centroid().unwrap();
        assert_relative_eq!((got - expected).norm(), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn zero_area_mesh_has_no_centroid() {
        let mesh = TriMesh::new(
            vec![Vec3::zeros(), Vec3::new(1.0, 0.0, 0.0), Vec3::new(2.0, 0.0, 0.0)],
            vec![[0, 1, 2]],
        );
        assert!(matches!(mesh.area_weighted_centroid(), Err(Error::ZeroArea)));
    }

    #[test]
    fn degenerate_cleanup_drops_slivers_and_orphans() {
        let mesh = TriMesh::new(
            vec![
                Vec3::new(0.0, 0.0, 0.0),
                Vec3::new(1.0, 0.0, 0.0),
                Vec3::new(0.0, 1.0, 0.0),
                Vec3::new(2.0, 0.0, 0.0),
                Vec3::new(5.0, 5.0, 5.0), // never referenced after cleanup
            ],
            vec![[0, 1, 2], [0, 1, 3], [0, 1, 1], [1, 4, 4]],
        );
        let clean = mesh.without_degenerate_triangles(1e-12);
        assert_eq!(clean.triangles.len(), 1);
        assert_eq!(clean.vertices.len(), 3);
        assert_relative_eq!(clean.surface_area(), 0.5);
    }

    #[test]
    fn append_offsets_indices() {
        let mut a = unit_right_triangle();
        let b = unit_right_triangle();
        a.append(&b);
        assert_eq!(a.vertices.len(), 6);
        assert_eq!(a.triangles, vec![[0, 1, 2], [3, 4, 5]]);
    }
}
