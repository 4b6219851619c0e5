//! Truncated signed-distance accumulator on a voxel window.

use crate::geom::Vec3;
use crate::voxel::GridSpec;
use crate::{Error, Result};

/// Per-cell weighted mean of truncated signed distances. Values are positive
/// outside the surface (in front of the front depth / behind the back depth)
/// and negative inside; the zero level set is the fused surface.
#[derive(Debug, Clone)]
pub struct ScalarField {
    spec: GridSpec,
    truncation: f64,
    value_sum: Vec<f64>,
    weight: Vec<f64>,
}

impl ScalarField {
    pub fn new(spec: &GridSpec, truncation: f64) -> Result<ScalarField> {
        if truncation <= 0.0 {
            return Err(Error::Config(format!("truncation {truncation} must be positive")));
        }
        let n = spec.dim.pow(3);
        if spec.dim < 2 {
            return Err(Error::Config("scalar field needs dim >= 2".into()));
        }
        Ok(ScalarField {
            spec: *spec,
            truncation,
            value_sum: vec![0.0; n],
            weight: vec![0.0; n],
        })
    }

    pub fn spec(&self) -> GridSpec {
        self.spec
    }

    pub fn dim(&self) -> usize {
        self.spec.dim
    }

    pub fn truncation(&self) -> f64 {
        self.truncation
    }

    pub fn voxel_width(&self) -> f64 {
        self.spec.side / self.spec.dim as f64
    }

    pub fn voxel_center(&self, x: usize, y: usize, z: usize) -> Vec3 {
        let w = self.voxel_width();
        let corner = self.spec.center - Vec3::repeat(self.spec.side / 2.0);
        corner + Vec3::new((x as f64 + 0.5) * w, (y as f64 + 0.5) * w, (z as f64 + 0.5) * w)
    }

    fn index(&self, x: usize, y: usize, z: usize) -> usize {
        debug_assert!(x < self.spec.dim && y < self.spec.dim && z < self.spec.dim);
        x + self.spec.dim * (y + self.spec.dim * z)
    }

    /// Adds one observation. `signed_distance` must already be truncated.
    pub fn accumulate(&mut self, x: usize, y: usize, z: usize, signed_distance: f64, weight: f64) {
        debug_assert!(signed_distance.abs() <= self.truncation + 1e-12);
        debug_assert!(weight >= 0.0);
        if weight == 0.0 {
            return;
        }
        let i = self.index(x, y, z);
        self.value_sum[i] += weight * signed_distance;
        self.weight[i] += weight;
    }

    /// Weighted mean value, None for unobserved cells.
    pub fn value(&self, x: usize, y: usize, z: usize) -> Option<f64> {
        let i = self.index(x, y, z);
        (self.weight[i] > 0.0).then(|| self.value_sum[i] / self.weight[i])
    }

    pub fn weight(&self, x: usize, y: usize, z: usize) -> f64 {
        self.weight[self.index(x, y, z)]
    }

    pub fn has_observations(&self) -> bool {
        self.weight.iter().any(|&w| w > 0.0)
    }

    /// Overwrites a cell with an exact value (weight 1); for analytically
    /// sampled fields.
    pub fn set_exact(&mut self, x: usize, y: usize, z: usize, value: f64) {
        let i = self.index(x, y, z);
        self.value_sum[i] = value;
        self.weight[i] = 1.0;
    }
}
