//! Depth and silhouette images plus their on-disk formats.
//!
//! Depth values live in full precision in memory (f32 payload, f64 math) and
//! are 16-bit quantized on disk over [-√3, √3] with 0xFFFF reserved for
//! background. Silhouettes are PGM P5 files using 0/255.

use crate::geom::ViewRig;
use crate::{Error, Result, DEPTH_QUANT_STEP};
use std::io::Write;
use std::path::Path;

pub const DEPTH_MIN: f64 = -crate::SQRT3;
pub const DEPTH_MAX: f64 = crate::SQRT3;
const BACKGROUND_CODE: u16 = 0xFFFF;

/// Per-pixel depth along a camera's view direction, measured from the plane
/// through the world origin. Background pixels carry +∞.
#[derive(Debug, Clone, PartialEq)]
pub struct DepthImage {
    pub width: usize,
    pub height: usize,
    data: Vec<f32>,
}

impl DepthImage {
    pub fn background(width: usize, height: usize) -> DepthImage {
        DepthImage {
            width,
            height,
            data: vec![f32::INFINITY; width * height],
        }
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.data[y * self.width + x] as f64
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, v: f64) {
        self.data[y * self.width + x] = v as f32;
    }

    #[inline]
    pub fn is_background(&self, x: usize, y: usize) -> bool {
        !self.data[y * self.width + x].is_finite()
    }

    pub fn pixels(&self) -> impl Iterator<Item = f64> + '_ {
        self.data.iter().map(|&v| v as f64)
    }

    /// Raw row-major payload; background is +∞.
    pub fn raw(&self) -> &[f32] {
        &self.data
    }

    pub fn from_raw(width: usize, height: usize, data: Vec<f32>) -> DepthImage {
        assert_eq!(data.len(), width * height);
        DepthImage { width, height, data }
    }

    /// Mirrors left-right (used when comparing a view against its antipode,
    /// whose right axis is negated).
    pub fn mirrored_horizontal(&self) -> DepthImage {
        let mut out = self.clone();
        for y in 0..self.height {
            for x in 0..self.width {
                out.data[y * self.width + x] = self.data[y * self.width + (self.width - 1 - x)];
            }
        }
        out
    }

    /// Serializes as MSDI: magic, u32 width/height, f32 min/max of the
    /// quantization range, then one u16 code per pixel (row-major, 0xFFFF =
    /// background).
    pub fn save(&self, path: &Path) -> Result<()> {
        let mut out = Vec::with_capacity(20 + self.data.len() * 2);
        out.extend_from_slice(b"MSDI");
        out.extend_from_slice(&(self.width as u32).to_le_bytes());
        out.extend_from_slice(&(self.height as u32).to_le_bytes());
        out.extend_from_slice(&(DEPTH_MIN as f32).to_le_bytes());
        out.extend_from_slice(&(DEPTH_MAX as f32).to_le_bytes());
        for &v in &self.data {
            let code = if v.is_finite() {
                let q = ((v as f64 - DEPTH_MIN) / DEPTH_QUANT_STEP).round();
                q.clamp(0.0, 65534.0) as u16
            } else {
                BACKGROUND_CODE
            };
            out.extend_from_slice(&code.to_le_bytes());
        }
        std::fs::write(path, out).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<DepthImage> {
        let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
        let err = |msg: &str| Error::Parse {
            path: path.into(),
            line: 0,
            msg: msg.into(),
        };
        if bytes.len() < 20 || &bytes[0..4] != b"MSDI" {
            return Err(err("missing MSDI magic"));
        }
        let u32_at = |o: usize| u32::from_le_bytes(bytes[o..o + 4].try_into().unwrap());
        let f32_at = |o: usize| f32::from_le_bytes(bytes[o..o + 4].try_into().unwrap());
        let width = u32_at(4) as usize;
        let height = u32_at(8) as usize;
        let min = f32_at(12) as f64;
        let max = f32_at(16) as f64;
        if !(min < max) {
            return Err(err("invalid quantization range"));
        }
        let expected = 20 + width * height * 2;
        if bytes.len() != expected {
            return Err(err("payload size does not match dimensions"));
        }
        let step = (max - min) / 65534.0;
        let mut data = Vec::with_capacity(width * height);
        for k in 0..width * height {
            let code = u16::from_le_bytes([bytes[20 + 2 * k], bytes[21 + 2 * k]]);
            data.push(if code == BACKGROUND_CODE {
                f32::INFINITY
            } else {
                (min + code as f64 * step) as f32
            });
        }
        Ok(DepthImage { width, height, data })
    }
}

/// Per-pixel object occupancy: exact {0,1} for rendered ground truth,
/// probabilities in [0,1] for predictor outputs.
#[derive(Debug, Clone, PartialEq)]
pub struct Silhouette {
    pub width: usize,
    pub height: usize,
    data: Vec<f32>,
}

impl Silhouette {
    pub fn zeros(width: usize, height: usize) -> Silhouette {
        Silhouette {
            width,
            height,
            data: vec![0.0; width * height],
        }
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.data[y * self.width + x] as f64
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, v: f64) {
        self.data[y * self.width + x] = v as f32;
    }

    #[inline]
    pub fn is_inside(&self, x: usize, y: usize) -> bool {
        self.data[y * self.width + x] >= 0.5
    }

    pub fn pixels(&self) -> impl Iterator<Item = f64> + '_ {
        self.data.iter().map(|&v| v as f64)
    }

    pub fn raw(&self) -> &[f32] {
        &self.data
    }

    pub fn count_inside(&self) -> usize {
        self.data.iter().filter(|&&v| v >= 0.5).count()
    }

    pub fn is_binary(&self) -> bool {
        self.data.iter().all(|&v| v == 0.0 || v == 1.0)
    }

    pub fn mirrored_horizontal(&self) -> Silhouette {
        let mut out = self.clone();
        for y in 0..self.height {
            for x in 0..self.width {
                out.data[y * self.width + x] = self.data[y * self.width + (self.width - 1 - x)];
            }
        }
        out
    }

    /// Writes a binary PGM (P5, maxval 255); probability values are rounded
    /// to the nearest of 256 levels.
    pub fn save(&self, path: &Path) -> Result<()> {
        let mut out = Vec::new();
        write!(out, "P5\n{} {}\n255\n", self.width, self.height).unwrap();
        out.extend(self.data.iter().map(|&v| (v.clamp(0.0, 1.0) * 255.0).round() as u8));
        std::fs::write(path, out).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Silhouette> {
        let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
        let err = |msg: String| Error::Parse {
            path: path.into(),
            line: 0,
            msg,
        };
        // Header: "P5", whitespace/comment-separated width, height, maxval,
        // then a single whitespace byte before the payload.
        if !bytes.starts_with(b"P5") {
            return Err(err("missing P5 magic".into()));
        }
        let mut pos = 2;
        let mut fields = [0usize; 3];
        for field in fields.iter_mut() {
            while pos < bytes.len() && (bytes[pos].is_ascii_whitespace() || bytes[pos] == b'#') {
                if bytes[pos] == b'#' {
                    while pos < bytes.len() && bytes[pos] != b'\n' {
                        pos += 1;
                    }
                } else {
                    pos += 1;
                }
            }
            let start = pos;
            while pos < bytes.len() && bytes[pos].is_ascii_digit() {
                pos += 1;
            }
            *field = std::str::from_utf8(&bytes[start..pos])
                .unwrap()
                .parse()
                .map_err(|e| err(format!("bad PGM header field: {e}")))?;
        }
        pos += 1; // single whitespace after maxval
        let [width, height, maxval] = fields;
        if maxval == 0 || maxval > 255 {
            return Err(err(format!("unsupported PGM maxval {maxval}")));
        }
        if bytes.len() != pos + width * height {
            return Err(err("payload size does not match dimensions".into()));
        }
        let data = bytes[pos..]
            .iter()
            .map(|&b| b as f32 / maxval as f32)
            .collect();
        Ok(Silhouette { width, height, data })
    }
}

/// One antipodal view pair's images: silhouette plus front and back depth.
#[derive(Debug, Clone, PartialEq)]
pub struct SurfaceBranch {
    pub silhouette: Silhouette,
    pub depth_front: DepthImage,
    pub depth_back: DepthImage,
}

impl SurfaceBranch {
    /// Checks the branch invariants: inside the silhouette both depths are
    /// finite with front ≤ back (after disk quantization, within one step);
    /// outside, both are background.
    pub fn validate(&self) -> Result<()> {
        let (w, h) = (self.silhouette.width, self.silhouette.height);
        if self.depth_front.width != w
            || self.depth_front.height != h
            || self.depth_back.width != w
            || self.depth_back.height != h
        {
            return Err(Error::ResolutionMismatch(
                w,
                h,
                self.depth_front.width,
                self.depth_front.height,
            ));
        }
        for y in 0..h {
            for x in 0..w {
                let inside = self.silhouette.is_inside(x, y);
                let f = self.depth_front.get(x, y);
                let b = self.depth_back.get(x, y);
                if inside {
                    if !f.is_finite() || !b.is_finite() || f > b + DEPTH_QUANT_STEP {
                        return Err(Error::Config(format!(
                            "branch invariant broken at ({x},{y}): front {f}, back {b}"
                        )));
                    }
                } else if f.is_finite() || b.is_finite() {
                    return Err(Error::Config(format!(
                        "finite depth outside silhouette at ({x},{y})"
                    )));
                }
            }
        }
        Ok(())
    }
}

/// The multi-surface shape representation: one branch per antipodal view
/// pair of the rig.
#[derive(Debug, Clone, PartialEq)]
pub struct MultiSurface {
    pub branches: Vec<SurfaceBranch>,
    pub rig: ViewRig,
}

impl MultiSurface {
    pub fn resolution(&self) -> usize {
        self.branches.first().map_or(0, |b| b.silhouette.width)
    }

    /// Writes the branch images into `dir` as bNN_sil.pgm, bNN_front.msdi,
    /// bNN_back.msdi.
    pub fn save_branches(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir.to_path_buf(), e))?;
        for (k, b) in self.branches.iter().enumerate() {
            b.silhouette.save(&dir.join(format!("b{k:02}_sil.pgm")))?;
            b.depth_front.save(&dir.join(format!("b{k:02}_front.msdi")))?;
            b.depth_back.save(&dir.join(format!("b{k:02}_back.msdi")))?;
        }
        Ok(())
    }

    /// Loads the branches written by [`MultiSurface::save_branches`],
    /// one per antipodal pair of `rig`.
    pub fn load_branches(dir: &Path, rig: ViewRig) -> Result<MultiSurface> {
        let branches = (0..rig.pairs.len())
            .map(|k| {
                Ok(SurfaceBranch {
                    silhouette: Silhouette::load(&dir.join(format!("b{k:02}_sil.pgm")))?,
                    depth_front: DepthImage::load(&dir.join(format!("b{k:02}_front.msdi")))?,
                    depth_back: DepthImage::load(&dir.join(format!("b{k:02}_back.msdi")))?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(MultiSurface { branches, rig })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn tempdir() -> tempfile::TempDir {
        tempfile::tempdir().unwrap()
    }

    #[test]
    fn depth_quantization_roundtrip_within_half_step() {
        let dir = tempdir();
        let path = dir.path().join("d.msdi");
        let mut img = DepthImage::background(8, 4);
        let values = [-1.7, -0.33333, 0.0, 0.25, 1.0, 1.7320507];
        for (k, &v) in values.iter().enumerate() {
            img.set(k, 1, v);
        }
        img.save(&path).unwrap();
        let loaded = DepthImage::load(&path).unwrap();
        for (k, &v) in values.iter().enumerate() {
            assert!((loaded.get(k, 1) - v).abs() <= DEPTH_QUANT_STEP / 2.0 + 1e-9);
        }
        assert!(loaded.is_background(0, 0));
        assert!(loaded.is_background(7, 3));
    }

    #[test]
    fn depth_double_save_is_byte_identical() {
        let dir = tempdir();
        let p1 = dir.path().join("a.msdi");
        let p2 = dir.path().join("b.msdi");
        let mut img = DepthImage::background(16, 16);
        for y in 0..16 {
            for x in 0..8 {
                img.set(x, y, (x as f64 - 4.0) * 0.31 + y as f64 * 0.01);
            }
        }
        img.save(&p1).unwrap();
        DepthImage::load(&p1).unwrap().save(&p2).unwrap();
        assert_eq!(std::fs::read(&p1).unwrap(), std::fs::read(&p2).unwrap());
    }

    #[test]
    fn depth_bad_magic_is_parse_error() {
        let dir = tempdir();
        let path = dir.path().join("bad.msdi");
        std::fs::write(&path, b"NOPE").unwrap();
        assert!(matches!(DepthImage::load(&path), Err(Error::Parse { .. })));
    }

    #[test]
    fn silhouette_pgm_roundtrip_binary() {
        let dir = tempdir();
        let path = dir.path().join("s.pgm");
        let mut s = Silhouette::zeros(6, 3);
        s.set(1, 1, 1.0);
        s.set(5, 2, 1.0);
        s.save(&path).unwrap();
        let loaded = Silhouette::load(&path).unwrap();
        assert!(loaded.is_binary());
        assert_eq!(loaded, s);
    }

    #[test]
    fn silhouette_pgm_with_comment_parses() {
        let dir = tempdir();
        let path = dir.path().join("c.pgm");
        std::fs::write(&path, b"P5\n# made elsewhere\n2 2\n255\n\x00\xff\xff\x00").unwrap();
        let s = Silhouette::load(&path).unwrap();
        assert_eq!(s.count_inside(), 2);
        assert!(!s.is_inside(0, 0));
        assert!(s.is_inside(1, 0));
    }

    #[test]
    fn probability_silhouette_quantizes_to_256_levels() {
        let dir = tempdir();
        let path = dir.path().join("p.pgm");
        let mut s = Silhouette::zeros(4, 1);
        s.set(0, 0, 0.25);
        s.set(1, 0, 0.5);
        s.set(2, 0, 0.75);
        s.save(&path).unwrap();
        let loaded = Silhouette::load(&path).unwrap();
        assert_relative_eq!(loaded.get(0, 0), 0.25, epsilon = 1.0 / 255.0);
        assert!(loaded.is_inside(1, 0));
        assert!(!loaded.is_binary());
    }

    #[test]
    fn branch_validation_catches_depth_outside_silhouette() {
        let mut branch = SurfaceBranch {
            silhouette: Silhouette::zeros(2, 2),
            depth_front: DepthImage::background(2, 2),
            depth_back: DepthImage::background(2, 2),
        };
        assert!(branch.validate().is_ok());
        branch.depth_front.set(0, 0, 0.3);
        assert!(branch.validate().is_err());
        branch.silhouette.set(0, 0, 1.0);
        branch.depth_back.set(0, 0, 0.4);
        assert!(branch.validate().is_ok());
    }

    #[test]
    fn mirror_is_an_involution() {
        let mut img = DepthImage::background(5, 2);
        img.set(0, 0, 1.0);
        img.set(3, 1, -0.5);
        let twice = img.mirrored_horizontal().mirrored_horizontal();
        assert_eq!(twice, img);
        assert_relative_eq!(img.mirrored_horizontal().get(4, 0), 1.0);
    }
}
