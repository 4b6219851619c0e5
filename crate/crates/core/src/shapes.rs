//! Procedural shape categories used as the dataset's model library.
//!
//! Every generator produces a watertight union of closed components in a
//! canonical upright pose (gravity along -z), with feature sizes that stay
//! above ~0.1 model units after normalization so they survive 128² rendering
//! and 48³ voxelization.

use crate::geom::{TriMesh, Vec3};
use crate::{Error, Result};
use rand::Rng;
use serde::{Deserialize, Serialize};

/// Shape category. The set mixes convex solids, thin supports, open
/// cavities, and through-holes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Category {
    BoxTable,
    SlatChair,
    OpenCup,
    Superellipsoid,
    BarFrame,
}

impl Category {
    pub const ALL: [Category; 5] = [
        Category::BoxTable,
        Category::SlatChair,
        Category::OpenCup,
        Category::Superellipsoid,
        Category::BarFrame,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Category::BoxTable => "box-table",
            Category::SlatChair => "slat-chair",
            Category::OpenCup => "open-cup",
            Category::Superellipsoid => "superellipsoid",
            Category::BarFrame => "bar-frame",
        }
    }

    pub fn parse(s: &str) -> Result<Category> {
        Category::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown category {s:?}")))
    }

    /// True for categories whose instances are convex solids.
    pub fn is_convex(self) -> bool {
        matches!(self, Category::Superellipsoid)
    }
}

/// Sampled parameters of one shape instance. Meshes are a pure function of
/// the spec; the canonical orientation is upright by construction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "category", rename_all = "kebab-case")]
pub enum ShapeSpec {
    BoxTable {
        half_width: f64,
        half_depth: f64,
        top_thickness: f64,
        leg_half: f64,
        height: f64,
    },
    SlatChair {
        half_width: f64,
        half_depth: f64,
        seat_thickness: f64,
        leg_half: f64,
        seat_height: f64,
        back_height: f64,
        back_thickness: f64,
        n_slats: u32,
    },
    OpenCup {
        bottom_radius: f64,
        taper: f64,
        wall: f64,
        height: f64,
    },
    Superellipsoid {
        a: f64,
        b: f64,
        c: f64,
        exponent: f64,
    },
    BarFrame {
        half_x: f64,
        half_y: f64,
        half_z: f64,
        bar_half: f64,
    },
}

impl ShapeSpec {
    pub fn category(&self) -> Category {
        match self {
            ShapeSpec::BoxTable { .. } => Category::BoxTable,
            ShapeSpec::SlatChair { .. } => Category::SlatChair,
            ShapeSpec::OpenCup { .. } => Category::OpenCup,
            ShapeSpec::Superellipsoid { .. } => Category::Superellipsoid,
            ShapeSpec::BarFrame { .. } => Category::BarFrame,
        }
    }

    /// Draws bounded instance parameters for a category.
    pub fn sample(category: Category, rng: &mut impl Rng) -> ShapeSpec {
        match category {
            Category::BoxTable => ShapeSpec::BoxTable {
                half_width: rng.random_range(0.55..0.75),
                half_depth: rng.random_range(0.5..0.7),
                top_thickness: rng.random_range(0.1..0.16),
                leg_half: rng.random_range(0.06..0.09),
                height: rng.random_range(0.9..1.3),
            },
            Category::SlatChair => ShapeSpec::SlatChair {
                half_width: rng.random_range(0.45..0.55),
                half_depth: rng.random_range(0.42..0.52),
                seat_thickness: rng.random_range(0.09..0.13),
                leg_half: rng.random_range(0.06..0.09),
                seat_height: rng.random_range(0.5..0.65),
                back_height: rng.random_range(0.55..0.75),
                back_thickness: rng.random_range(0.055..0.08),
                n_slats: rng.random_range(3..=4),
            },
            Category::OpenCup => ShapeSpec::OpenCup {
                bottom_radius: rng.random_range(0.38..0.5),
                taper: rng.random_range(1.0..1.2),
                wall: rng.random_range(0.1..0.14),
                height: rng.random_range(0.85..1.15),
            },
            Category::Superellipsoid => ShapeSpec::Superellipsoid {
                a: rng.random_range(0.5..0.95),
                b: rng.random_range(0.5..0.95),
                c: rng.random_range(0.5..0.95),
                exponent: rng.random_range(2.0..4.0),
            },
            Category::BarFrame => ShapeSpec::BarFrame {
                half_x: rng.random_range(0.55..0.8),
                half_y: rng.random_range(0.55..0.8),
                half_z: rng.random_range(0.55..0.8),
                bar_half: rng.random_range(0.06..0.085),
            },
        }
    }

    /// Builds the instance mesh in canonical pose (not yet normalized).
    pub fn mesh(&self) -> TriMesh {
        match *self {
            ShapeSpec::BoxTable {
                half_width: a,
                half_depth: b,
                top_thickness: t,
                leg_half: l,
                height: h,
            } => {
                let mut m = cuboid(&Vec3::new(0.0, 0.0, h / 2.0 - t / 2.0), &Vec3::new(a, b, t / 2.0));
                for &sx in &[-1.0, 1.0] {
                    for &sy in &[-1.0, 1.0] {
                        m.append(&cuboid(
                            &Vec3::new(sx * (a - l), sy * (b - l), -t / 2.0),
                            &Vec3::new(l, l, (h - t) / 2.0),
                        ));
                    }
                }
                m
            }
            ShapeSpec::SlatChair {
                half_width: a,
                half_depth: b,
                seat_thickness: t,
                leg_half: l,
                seat_height: hs,
                back_height: hb,
                back_thickness: bt,
                n_slats,
            } => {
                let mut m = cuboid(&Vec3::new(0.0, 0.0, hs - t / 2.0), &Vec3::new(a, b, t / 2.0));
                for &sx in &[-1.0, 1.0] {
                    for &sy in &[-1.0, 1.0] {
                        m.append(&cuboid(
                            &Vec3::new(sx * (a - l), sy * (b - l), (hs - t) / 2.0),
                            &Vec3::new(l, l, (hs - t) / 2.0),
                        ));
                    }
                }
                // Backrest at the -y side: n vertical slats tied by a top rail.
                let rail_h = 0.1;
                let back_y = -b + bt;
                let slat_top = hs + hb - rail_h;
                let n = n_slats as usize;
                let w = 2.0 * a / (2 * n - 1) as f64;
                for k in 0..n {
                    let x0 = -a + (2 * k) as f64 * w;
                    m.append(&cuboid(
                        &Vec3::new(x0 + w / 2.0, back_y, (hs + slat_top) / 2.0),
                        &Vec3::new(w / 2.0, bt, (slat_top - hs) / 2.0),
                    ));
                }
                m.append(&cuboid(
                    &Vec3::new(0.0, back_y, slat_top + rail_h / 2.0),
                    &Vec3::new(a, bt, rail_h / 2.0),
                ));
                m
            }
            ShapeSpec::OpenCup {
                bottom_radius,
                taper,
                wall,
                height,
            } => annular_frustum(bottom_radius, taper * bottom_radius, wall, height, 24),
            ShapeSpec::Superellipsoid { a, b, c, exponent } => {
                superellipsoid_mesh(a, b, c, exponent, 24, 36)
            }
            ShapeSpec::BarFrame {
                half_x: a,
                half_y: b,
                half_z: c,
                bar_half: t,
            } => {
                let mut m = TriMesh::new(vec![], vec![]);
                // Bars along x run the full edge; y- and z-bars are trimmed to
                // abut them so the union has no overlapping volume.
                for &sy in &[-1.0, 1.0] {
                    for &sz in &[-1.0, 1.0] {
                        m.append(&cuboid(
                            &Vec3::new(0.0, sy * (b - t), sz * (c - t)),
                            &Vec3::new(a, t, t),
                        ));
                    }
                }
                for &sx in &[-1.0, 1.0] {
                    for &sz in &[-1.0, 1.0] {
                        m.append(&cuboid(
                            &Vec3::new(sx * (a - t), 0.0, sz * (c - t)),
                            &Vec3::new(t, b - 2.0 * t, t),
                        ));
                    }
                }
                for &sx in &[-1.0, 1.0] {
                    for &sy in &[-1.0, 1.0] {
                        m.append(&cuboid(
                            &Vec3::new(sx * (a - t), sy * (b - t), 0.0),
                            &Vec3::new(t, t, c - 2.0 * t),
                        ));
                    }
                }
                m
            }
        }
    }
}

/// Axis-aligned box as a closed 12-triangle mesh.
pub fn cuboid(center: &Vec3, half: &Vec3) -> TriMesh {
    let v = |sx: f64, sy: f64, sz: f64| {
        Vec3::new(
            center.x + sx * half.x,
            center.y + sy * half.y,
            center.z + sz * half.z,
        )
    };
    let vertices = vec![
        v(-1.0, -1.0, -1.0),
        v(1.0, -1.0, -1.0),
        v(1.0, 1.0, -1.0),
        v(-1.0, 1.0, -1.0),
        v(-1.0, -1.0, 1.0),
        v(1.0, -1.0, 1.0),
        v(1.0, 1.0, 1.0),
        v(-1.0, 1.0, 1.0),
    ];
    let triangles = vec![
        [0, 3, 2],
        [0, 2, 1],
        [4, 5, 6],
        [4, 6, 7],
        [0, 1, 5],
        [0, 5, 4],
        [2, 3, 7],
        [2, 7, 6],
        [0, 4, 7],
        [0, 7, 3],
        [1, 2, 6],
        [1, 6, 5],
    ];
    TriMesh::new(vertices, triangles)
}

/// Latitude/longitude sphere of the given radius, closed with pole fans.
pub fn uv_sphere(radius: f64, rings: usize, segments: usize) -> TriMesh {
    superellipsoid_mesh(radius, radius, radius, 2.0, rings, segments)
}

fn sgnpow(u: f64, e: f64) -> f64 {
    u.signum() * u.abs().powf(e)
}

/// Superellipsoid |x/a|^p + |y/b|^p + |z/c|^p = 1, tessellated on a
/// latitude/longitude grid. p = 2 gives an ellipsoid; p in [2, 4] is convex.
pub fn superellipsoid_mesh(
    a: f64,
    b: f64,
    c: f64,
    p: f64,
    rings: usize,
    segments: usize,
) -> TriMesh {
    assert!(rings >= 2 && segments >= 3);
    let e = 2.0 / p;
    let point = |theta: f64, phi: f64| {
        // theta: colatitude from +z; phi: azimuth from +x.
        let (st, ct) = (theta.sin(), theta.cos());
        let (sp, cp) = (phi.sin(), phi.cos());
        Vec3::new(
            a * sgnpow(st, e) * sgnpow(cp, e),
            b * sgnpow(st, e) * sgnpow(sp, e),
            c * sgnpow(ct, e),
        )
    };
    let mut vertices = vec![Vec3::new(0.0, 0.0, c)];
    for i in 1..rings {
        let theta = std::f64::consts::PI * i as f64 / rings as f64;
        for j in 0..segments {
            let phi = std::f64::consts::TAU * j as f64 / segments as f64;
            vertices.push(point(theta, phi));
        }
    }
    vertices.push(Vec3::new(0.0, 0.0, -c));
    let south = vertices.len() as u32 - 1;
    let ring = |i: usize, j: usize| 1 + (i - 1) as u32 * segments as u32 + (j % segments) as u32;

    let mut triangles = Vec::new();
    for j in 0..segments {
        triangles.push([0, ring(1, j), ring(1, j + 1)]);
    }
    for i in 1..rings - 1 {
        for j in 0..segments {
            triangles.push([ring(i, j), ring(i + 1, j), ring(i + 1, j + 1)]);
            triangles.push([ring(i, j), ring(i + 1, j + 1), ring(i, j + 1)]);
        }
    }
    for j in 0..segments {
        triangles.push([south, ring(rings - 1, j + 1), ring(rings - 1, j)]);
    }
    TriMesh::new(vertices, triangles)
}

/// Watertight tube wall: an open vessel with no bottom disk, so the cavity is
/// a through-passage and the rig's top views see background inside the rim.
/// Outer radius tapers from `r_bottom` (z = 0) to `r_top` (z = height);
/// the inner surface is offset inward by `wall`.
pub fn annular_frustum(r_bottom: f64, r_top: f64, wall: f64, height: f64, segments: usize) -> TriMesh {
    assert!(wall < r_bottom && wall < r_top && segments >= 3);
    let mut vertices = Vec::with_capacity(segments * 4);
    for j in 0..segments {
        let phi = std::f64::consts::TAU * j as f64 / segments as f64;
        let (s, c) = (phi.sin(), phi.cos());
        vertices.push(Vec3::new(r_bottom * c, r_bottom * s, 0.0)); // outer bottom
        vertices.push(Vec3::new(r_top * c, r_top * s, height)); // outer top
        vertices.push(Vec3::new((r_top - wall) * c, (r_top - wall) * s, height)); // inner top
        vertices.push(Vec3::new((r_bottom - wall) * c, (r_bottom - wall) * s, 0.0)); // inner bottom
    }
    let idx = |j: usize, k: usize| (4 * (j % segments) + k) as u32;
    let mut triangles = Vec::new();
    for j in 0..segments {
        // Four quads per segment: outer wall, top rim, inner wall, bottom rim.
        for k in 0..4 {
            let (a, b, c, d) = (idx(j, k), idx(j, (k + 1) % 4), idx(j + 1, (k + 1) % 4), idx(j + 1, k));
            triangles.push([a, c, b]);
            triangles.push([a, d, c]);
        }
    }
    TriMesh::new(vertices, triangles)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::normalize_mesh;
    use approx::assert_relative_eq;
    use rand::SeedableRng;

    #[test]
    fn cuboid_is_closed_and_outward() {
        let m = cuboid(&Vec3::new(0.3, -0.2, 0.1), &Vec3::new(0.5, 0.4, 0.3));
        assert!(m.is_closed());
        assert_relative_eq!(m.signed_volume(), 8.0 * 0.5 * 0.4 * 0.3, epsilon = 1e-12);
        assert_relative_eq!(m.surface_area(), 2.0 * (0.8 * 0.6 + 0.8 * 1.0 + 0.6 * 1.0), epsilon = 1e-12);
    }

    #[test]
    fn sphere_is_closed_with_near_analytic_volume() {
        let m = uv_sphere(0.5, 48, 96);
        assert!(m.is_closed());
        let analytic = 4.0 / 3.0 * std::f64::consts::PI * 0.125;
        assert_relative_eq!(m.signed_volume(), analytic, max_relative = 0.01);
    }

    #[test]
    fn annular_frustum_is_closed_with_annular_volume() {
        let m = annular_frustum(0.4, 0.4, 0.1, 1.0, 64);
        assert!(m.is_closed());
        // Straight tube: pi (R^2 - r^2) h, minus polygonal chord error.
        let analytic = std::f64::consts::PI * (0.16 - 0.09);
        assert_relative_eq!(m.signed_volume(), analytic, max_relative = 0.01);
    }

    #[test]
    fn every_category_sample_is_watertight_and_normalizable() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(42);
        for category in Category::ALL {
            for _ in 0..5 {
                let spec = ShapeSpec::sample(category, &mut rng);
                let mesh = spec.mesh();
                assert!(mesh.is_closed(), "{category:?} not closed: {spec:?}");
                assert!(mesh.signed_volume() > 0.0, "{category:?} inverted: {spec:?}");
                let (normalized, _) = normalize_mesh(&mesh).unwrap();
                let radius = normalized.vertices.iter().map(|v| v.norm()).fold(0.0, f64::max);
                assert!(radius <= 1.0 + 1e-9, "{category:?} exceeds unit sphere");
            }
        }
    }

    #[test]
    fn convex_flag_marks_superellipsoid_only() {
        let convex: Vec<_> = Category::ALL.iter().filter(|c| c.is_convex()).collect();
        assert_eq!(convex, vec![&Category::Superellipsoid]);
    }

    #[test]
    fn shape_spec_serde_roundtrip() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for category in Category::ALL {
            let spec = ShapeSpec::sample(category, &mut rng);
            let json = serde_json::to_string(&spec).unwrap();
            let back: ShapeSpec = serde_json::from_str(&json).unwrap();
            assert_eq!(back, spec);
        }
    }
}
