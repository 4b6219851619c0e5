//! Bounding-volume hierarchy over mesh triangles.
//!
//! Serves the two hot queries of the pipeline: all-hits depth extent of an
//! orthographic pixel ray (minimum and maximum hit parameter over the full
//! line) and exact point-to-surface distance. Distance results are bit-equal
//! to a brute-force scan: the node bound never prunes a box that could
//! contain the minimizer.

use crate::geom::{TriMesh, Vec3};
use crate::{Error, Result};

const LEAF_SIZE: usize = 8;

#[derive(Debug, Clone, Copy)]
struct Aabb {
    min: Vec3,
    max: Vec3,
}

impl Aabb {
    fn empty() -> Aabb {
        Aabb {
            min: Vec3::repeat(f64::INFINITY),
            max: Vec3::repeat(f64::NEG_INFINITY),
        }
    }

    fn grow_point(&mut self, p: &Vec3) {
        self.min = self.min.inf(p);
        self.max = self.max.sup(p);
    }

    fn grow(&mut self, other: &Aabb) {
        self.min = self.min.inf(&other.min);
        self.max = self.max.sup(&other.max);
    }

    /// Squared distance from a point to the box (0 inside).
    fn dist2(&self, p: &Vec3) -> f64 {
        let mut d2 = 0.0;
        for k in 0..3 {
            let d = if p[k] < self.min[k] {
                self.min[k] - p[k]
            } else if p[k] > self.max[k] {
                p[k] - self.max[k]
            } else {
                0.0
            };
            d2 += d * d;
        }
        d2
    }

    /// True when the infinite line origin + t*dir meets the box for any t.
    fn hit_by_line(&self, origin: &Vec3, dir: &Vec3) -> bool {
        let mut t_lo = f64::NEG_INFINITY;
        let mut t_hi = f64::INFINITY;
        for k in 0..3 {
            if dir[k] == 0.0 {
                if origin[k] < self.min[k] || origin[k] > self.max[k] {
                    return false;
                }
            } else {
                let inv = 1.0 / dir[k];
                let (a, b) = ((self.min[k] - origin[k]) * inv, (self.max[k] - origin[k]) * inv);
                t_lo = t_lo.max(a.min(b));
                t_hi = t_hi.min(a.max(b));
            }
        }
        t_lo <= t_hi
    }
}

#[derive(Debug, Clone)]
struct Node {
    aabb: Aabb,
    /// Leaf: (start, count) into `order`. Internal: count = 0, start = index
    /// of the left child; right child is start + 1... stored explicitly.
    start: u32,
    count: u32,
    right: u32,
}

/// BVH over the triangles of one mesh. Triangle geometry is copied in, so
/// the source mesh may be dropped.
#[derive(Debug, Clone)]
pub struct TriBvh {
    nodes: Vec<Node>,
    order: Vec<u32>,
    tris: Vec<[Vec3; 3]>,
}

impl TriBvh {
    pub fn build(mesh: &TriMesh) -> Result<TriBvh> {
        if mesh.triangles.is_empty() {
            return Err(Error::EmptyMesh);
        }
        let tris: Vec<[Vec3; 3]> = (0..mesh.triangles.len())
            .map(|t| mesh.triangle_vertices(t))
            .collect();
        let boxes: Vec<Aabb> = tris
            .iter()
            .map(|t| {
                let mut b = Aabb::empty();
                for v in t {
                    b.grow_point(v);
                }
                b
            })
            .collect();
        let centroids: Vec<Vec3> = tris.iter().map(|t| (t[0] + t[1] + t[2]) / 3.0).collect();
        let mut order: Vec<u32> = (0..tris.len() as u32).collect();
        let mut nodes = Vec::new();
        build_node(&mut nodes, &mut order, &boxes, &centroids, 0, tris.len());
        Ok(TriBvh { nodes, order, tris })
    }

    pub fn n_triangles(&self) -> usize {
        self.tris.len()
    }

    /// Minimum and maximum hit parameter of the infinite line
    /// origin + t*dir against the surface, or None when it misses.
    /// Boundary hits (edges, vertices) are inclusive, so a shared edge may
    /// report twice; min/max extraction makes that harmless.
    pub fn line_depth_range(&self, origin: &Vec3, dir: &Vec3) -> Option<(f64, f64)> {
        let mut t_min = f64::INFINITY;
        let mut t_max = f64::NEG_INFINITY;
        let mut stack = vec![0usize];
        while let Some(n) = stack.pop() {
            let node = &self.nodes[n];
            if !node.aabb.hit_by_line(origin, dir) {
                continue;
            }
            if node.count > 0 {
                for &ti in &self.order[node.start as usize..(node.start + node.count) as usize] {
                    let [a, b, c] = &self.tris[ti as usize];
                    if let Some(t) = watertight_line_triangle(origin, dir, a, b, c) {
                        t_min = t_min.min(t);
                        t_max = t_max.max(t);
                    }
                }
            } else {
                stack.push(node.start as usize);
                stack.push(node.right as usize);
            }
        }
        (t_min <= t_max).then_some((t_min, t_max))
    }

    /// Exact squared distance from a point to the surface.
    pub fn closest_distance2(&self, p: &Vec3) -> f64 {
        let mut best = f64::INFINITY;
        // Depth-first, nearer child first; prune only boxes strictly farther
        // than the current best so the true minimizer is always visited.
        let mut stack = vec![0usize];
        while let Some(n) = stack.pop() {
            let node = &self.nodes[n];
            if node.aabb.dist2(p) > best {
                continue;
            }
            if node.count > 0 {
                for &ti in &self.order[node.start as usize..(node.start + node.count) as usize] {
                    let [a, b, c] = &self.tris[ti as usize];
                    best = best.min(dist2_point_triangle(p, a, b, c));
                }
            } else {
                let (l, r) = (node.start as usize, node.right as usize);
                let (dl, dr) = (self.nodes[l].aabb.dist2(p), self.nodes[r].aabb.dist2(p));
                if dl <= dr {
                    stack.push(r);
                    stack.push(l);
                } else {
                    stack.push(l);
                    stack.push(r);
                }
            }
        }
        best
    }

    pub fn closest_distance(&self, p: &Vec3) -> f64 {
        self.closest_distance2(p).sqrt()
    }
}

fn build_node(
    nodes: &mut Vec<Node>,
    order: &mut [u32],
    boxes: &[Aabb],
    centroids: &[Vec3],
    start: usize,
    count: usize,
) -> u32 {
    let mut aabb = Aabb::empty();
    for &t in &order[start..start + count] {
        aabb.grow(&boxes[t as usize]);
    }
    let index = nodes.len() as u32;
    nodes.push(Node {
        aabb,
        start: start as u32,
        count: count as u32,
        right: 0,
    });
    if count <= LEAF_SIZE {
        return index;
    }
    let extent = aabb.max - aabb.min;
    let axis = if extent.x >= extent.y && extent.x >= extent.z {
        0
    } else if extent.y >= extent.z {
        1
    } else {
        2
    };
    // Median split with a total order (coordinate, then index) so the tree
    // shape is deterministic.
    let slice = &mut order[start..start + count];
    let mid = count / 2;
    slice.select_nth_unstable_by(mid, |&a, &b| {
        centroids[a as usize][axis]
            .total_cmp(&centroids[b as usize][axis])
            .then(a.cmp(&b))
    });
    let left = build_node(nodes, order, boxes, centroids, start, mid);
    let right = build_node(nodes, order, boxes, centroids, start + mid, count - mid);
    nodes[index as usize].start = left;
    nodes[index as usize].count = 0;
    nodes[index as usize].right = right;
    index
}

/// Watertight ray/triangle intersection over the infinite line, returning
/// the hit parameter t. Boundary hits are inclusive on both orientations.
pub fn watertight_line_triangle(
    origin: &Vec3,
    dir: &Vec3,
    a: &Vec3,
    b: &Vec3,
    c: &Vec3,
) -> Option<f64> {
    // Shear the triangle into a coordinate system where the ray travels
    // along +z; the 2D signed areas U, V, W then classify containment.
    let abs = dir.abs();
    let kz = if abs.x > abs.y && abs.x > abs.z {
        0
    } else if abs.y > abs.z {
        1
    } else {
        2
    };
    let kx = (kz + 1) % 3;
    let ky = (kz + 2) % 3;
    let sz = 1.0 / dir[kz];
    let sx = dir[kx] * sz;
    let sy = dir[ky] * sz;

    let pa = a - origin;
    let pb = b - origin;
    let pc = c - origin;
    let ax = pa[kx] - sx * pa[kz];
    let ay = pa[ky] - sy * pa[kz];
    let bx = pb[kx] - sx * pb[kz];
    let by = pb[ky] - sy * pb[kz];
    let cx = pc[kx] - sx * pc[kz];
    let cy = pc[ky] - sy * pc[kz];

    let u = cx * by - cy * bx;
    let v = ax * cy - ay * cx;
    let w = bx * ay - by * ax;
    if !((u >= 0.0 && v >= 0.0 && w >= 0.0) || (u <= 0.0 && v <= 0.0 && w <= 0.0)) {
        return None;
    }
    let det = u + v + w;
    if det == 0.0 {
        return None;
    }
    let az = sz * pa[kz];
    let bz = sz * pb[kz];
    let cz = sz * pc[kz];
    Some((u * az + v * bz + w * cz) / det)
}

/// Exact closest-point squared distance from p to triangle abc
/// (region classification per Ericson, Real-Time Collision Detection §5.1.5).
pub fn dist2_point_triangle(p: &Vec3, a: &Vec3, b: &Vec3, c: &Vec3) -> f64 {
    let ab = b - a;
    let ac = c - a;
    let ap = p - a;
    let d1 = ab.dot(&ap);
    let d2 = ac.dot(&ap);
    if d1 <= 0.0 && d2 <= 0.0 {
        return ap.norm_squared();
    }

    let bp = p - b;
    let d3 = ab.dot(&bp);
    let d4 = ac.dot(&bp);
    if d3 >= 0.0 && d4 <= d3 {
        return bp.norm_squared();
    }

    let vc = d1 * d4 - d3 * d2;
    if vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0 {
        let t = d1 / (d1 - d3);
        return (ap - t * ab).norm_squared();
    }

    let cp = p - c;
    let d5 = ab.dot(&cp);
    let d6 = ac.dot(&cp);
    if d6 >= 0.0 && d5 <= d6 {
        return cp.norm_squared();
    }

    let vb = d5 * d2 - d1 * d6;
    if vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0 {
        let t = d2 / (d2 - d6);
        return (ap - t * ac).norm_squared();
    }

    let va = d3 * d6 - d5 * d4;
    if va <= 0.0 && (d4 - d3) >= 0.0 && (d5 - d6) >= 0.0 {
        let t = (d4 - d3) / ((d4 - d3) + (d5 - d6));
        return (bp - t * (c - b)).norm_squared();
    }

    let denom = 1.0 / (va + vb + vc);
    let v = vb * denom;
    let w = vc * denom;
    (ap - v * ab - w * ac).norm_squared()
}
