//! Raster containers shared by every stage of the pipeline.
//!
//! All rasters are row-major [`Image<P>`] values with pixel centers at integer
//! coordinates. The pixel type tells the rasters apart:
//!
//! | alias        | pixel      | meaning                                    |
//! |--------------|------------|--------------------------------------------|
//! | [`DepthMap`] | `f32`      | range in meters, `0.0` marks no return     |
//! | [`GrayImage`]| `f64`      | intensity on the 0–255 scale               |
//! | [`RgbImage`] | `[u8; 3]`  | 8-bit color                                |
//! | [`EdgeMask`] | `bool`     | edge / non-edge                            |
//! | [`SoftMask`] | `f32`      | edge probability in `[0, 1]`               |

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::math;

/// Range value emitted for pixels without a depth return.
pub const INVALID_DEPTH: f32 = 0.0;
/// Nearest range the sensor reports reliably, meters.
pub const MIN_RELIABLE_DEPTH: f32 = 0.2;
/// Farthest range the sensor reports reliably, meters.
pub const MAX_RELIABLE_DEPTH: f32 = 10.0;

pub type DepthMap = Image<f32>;
pub type GrayImage = Image<f64>;
pub type RgbImage = Image<[u8; 3]>;
pub type EdgeMask = Image<bool>;
pub type SoftMask = Image<f32>;

#[derive(Debug, Clone, PartialEq)]
pub struct Image<P> {
    width: usize,
    height: usize,
    data: Vec<P>,
}

impl<P: Copy> Image<P> {
    pub fn new(width: usize, height: usize, data: Vec<P>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::EmptyRaster { width, height });
        }
        if data.len() != width * height {
            return Err(Error::DataLength {
                width,
                height,
                channels: 1,
                len: data.len(),
            });
        }
        Ok(Self { width, height, data })
    }

    pub fn filled(width: usize, height: usize, value: P) -> Result<Self> {
        Self::new(width, height, vec![value; width * height])
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> P) -> Result<Self> {
        let mut data = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                data.push(f(x, y));
            }
        }
        Self::new(width, height, data)
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    #[inline]
    pub fn data(&self) -> &[P] {
        &self.data
    }

    #[inline]
    pub fn data_mut(&mut self) -> &mut [P] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<P> {
        self.data
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> P {
        self.data[y * self.width + x]
    }

    /// Pixel at signed coordinates, `None` outside the raster.
    #[inline]
    pub fn get_checked(&self, x: isize, y: isize) -> Option<P> {
        if x < 0 || y < 0 || x as usize >= self.width || y as usize >= self.height {
            None
        } else {
            Some(self.data[y as usize * self.width + x as usize])
        }
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, value: P) {
        self.data[y * self.width + x] = value;
    }

    #[inline]
    pub fn row(&self, y: usize) -> &[P] {
        &self.data[y * self.width..(y + 1) * self.width]
    }

    pub fn map<Q: Copy>(&self, f: impl FnMut(P) -> Q) -> Image<Q> {
        Image {
            width: self.width,
            height: self.height,
            data: self.data.iter().copied().map(f).collect(),
        }
    }

    pub fn full_roi(&self) -> Roi {
        Roi {
            x_min: 0,
            x_max: self.width,
            y_min: 0,
            y_max: self.height,
        }
    }

    pub fn ensure_same_dims<Q>(&self, other: &Image<Q>) -> Result<()> {
        if self.dims() != (other.width, other.height) {
            return Err(Error::DimensionMismatch {
                expected: self.dims(),
                actual: (other.width, other.height),
            });
        }
        Ok(())
    }

    /// Copies the region `roi`; output pixel `(x, y)` is input `(x + x_min, y + y_min)`.
    pub fn crop(&self, roi: &Roi) -> Result<Self> {
        roi.check_within(self.width, self.height)?;
        let mut data = Vec::with_capacity(roi.width() * roi.height());
        for y in roi.y_min..roi.y_max {
            data.extend_from_slice(&self.row(y)[roi.x_min..roi.x_max]);
        }
        Self::new(roi.width(), roi.height(), data)
    }
}

impl Image<f32> {
    /// `true` when the pixel carries a depth return.
    #[inline]
    pub fn is_valid_depth(&self, x: usize, y: usize) -> bool {
        self.get(x, y) > INVALID_DEPTH
    }

    /// `true` when the pixel has a return inside the sensor's reliable range.
    #[inline]
    pub fn is_reliable_depth(&self, x: usize, y: usize) -> bool {
        let d = self.get(x, y);
        (MIN_RELIABLE_DEPTH..=MAX_RELIABLE_DEPTH).contains(&d)
    }

    pub fn valid_fraction(&self) -> f64 {
        let valid = self.data.iter().filter(|&&d| d > INVALID_DEPTH).count();
        valid as f64 / self.data.len() as f64
    }
}

impl Image<bool> {
    pub fn count(&self) -> usize {
        self.data.iter().filter(|&&b| b).count()
    }

    pub fn is_blank(&self) -> bool {
        !self.data.iter().any(|&b| b)
    }

    /// Coordinates of every edge pixel in row-major order.
    pub fn edge_pixels(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for y in 0..self.height {
            for (x, &b) in self.row(y).iter().enumerate() {
                if b {
                    out.push((x, y));
                }
            }
        }
        out
    }
}

impl Image<[u8; 3]> {
    /// Builds an RGB image from interleaved bytes.
    pub fn from_raw_rgb(width: usize, height: usize, raw: &[u8]) -> Result<Self> {
        if raw.len() != width * height * 3 {
            return Err(Error::DataLength {
                width,
                height,
                channels: 3,
                len: raw.len(),
            });
        }
        Self::new(width, height, raw.chunks_exact(3).map(|c| [c[0], c[1], c[2]]).collect())
    }

    pub fn to_raw_rgb(&self) -> Vec<u8> {
        self.data.iter().flat_map(|p| p.iter().copied()).collect()
    }
}

/// Rectangular region, half-open on the max side.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(deny_unknown_fields))]
pub struct Roi {
    pub x_min: usize,
    pub x_max: usize,
    pub y_min: usize,
    pub y_max: usize,
}

impl Roi {
    pub fn new(x_min: usize, x_max: usize, y_min: usize, y_max: usize) -> Result<Self> {
        if x_min >= x_max || y_min >= y_max {
            return Err(Error::InvalidParameter("roi must have positive extent"));
        }
        Ok(Self {
            x_min,
            x_max,
            y_min,
            y_max,
        })
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.x_max.saturating_sub(self.x_min)
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.y_max.saturating_sub(self.y_min)
    }

    pub fn check_within(&self, width: usize, height: usize) -> Result<()> {
        if self.x_min >= self.x_max || self.y_min >= self.y_max || self.x_max > width || self.y_max > height {
            return Err(Error::RoiOutOfBounds {
                x_min: self.x_min,
                x_max: self.x_max,
                y_min: self.y_min,
                y_max: self.y_max,
                width,
                height,
            });
        }
        Ok(())
    }

    /// The region `inner`, given relative to `self`, in `self`'s parent frame.
    pub fn compose(&self, inner: &Roi) -> Result<Roi> {
        inner.check_within(self.width(), self.height())?;
        Ok(Roi {
            x_min: self.x_min + inner.x_min,
            x_max: self.x_min + inner.x_max,
            y_min: self.y_min + inner.y_min,
            y_max: self.y_min + inner.y_max,
        })
    }
}

/// BT.601 luma on the 0–255 scale.
pub fn to_grayscale(img: &RgbImage) -> GrayImage {
    img.map(|[r, g, b]| 0.299 * f64::from(r) + 0.587 * f64::from(g) + 0.114 * f64::from(b))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Interpolation {
    #[default]
    Nearest,
    Bilinear,
}

/// Rotation about the image center followed by a horizontal translation.
///
/// Positive angles turn the content clockwise as displayed (y grows downward).
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct AffineWarp {
    pub angle: f64,
    pub shift_x: f64,
}

impl AffineWarp {
    pub fn new(angle: f64, shift_x: f64) -> Result<Self> {
        if !(angle.abs() <= core::f64::consts::FRAC_PI_2) || !shift_x.is_finite() {
            return Err(Error::InvalidParameter("warp angle must lie in [-pi/2, pi/2]"));
        }
        Ok(Self { angle, shift_x })
    }

    /// Maps an output position back to the source position it samples.
    #[inline]
    pub fn source_of(&self, width: usize, height: usize, x: f64, y: f64) -> (f64, f64) {
        let cx = (width as f64 - 1.0) * 0.5;
        let cy = (height as f64 - 1.0) * 0.5;
        let (s, c) = libm::sincos(self.angle);
        let dx = x - cx - self.shift_x;
        let dy = y - cy;
        (c * dx + s * dy + cx, -s * dx + c * dy + cy)
    }

    /// Forward map of a source position to its output position.
    #[inline]
    pub fn apply(&self, width: usize, height: usize, x: f64, y: f64) -> (f64, f64) {
        let cx = (width as f64 - 1.0) * 0.5;
        let cy = (height as f64 - 1.0) * 0.5;
        let (s, c) = libm::sincos(self.angle);
        let dx = x - cx;
        let dy = y - cy;
        (c * dx - s * dy + cx + self.shift_x, s * dx + c * dy + cy)
    }
}

/// Pixel types that can be resampled.
pub trait Sample: Copy {
    /// `false` forces nearest-neighbour sampling regardless of the request.
    const INTERPOLATES: bool = true;

    /// Blend of `[p00, p10, p01, p11]` at fractional offsets `(fx, fy)` in `[0, 1)`.
    fn bilinear(p: [Self; 4], fx: f64, fy: f64) -> Self;
}

#[inline]
fn blend(p: [f64; 4], fx: f64, fy: f64) -> f64 {
    let top = p[0] + (p[1] - p[0]) * fx;
    let bottom = p[2] + (p[3] - p[2]) * fx;
    top + (bottom - top) * fy
}

#[inline]
fn nearest_of<T: Copy>(p: [T; 4], fx: f64, fy: f64) -> T {
    let i = usize::from(fx >= 0.5) + 2 * usize::from(fy >= 0.5);
    p[i]
}

impl Sample for f64 {
    fn bilinear(p: [f64; 4], fx: f64, fy: f64) -> f64 {
        blend(p, fx, fy)
    }
}

/// Depth (and soft-mask) samples. A neighbourhood touching an invalid depth
/// falls back to the nearest sample so holes never bleed into fake ranges.
impl Sample for f32 {
    fn bilinear(p: [f32; 4], fx: f64, fy: f64) -> f32 {
        if p.iter().any(|&v| v <= INVALID_DEPTH) {
            return nearest_of(p, fx, fy);
        }
        blend(p.map(f64::from), fx, fy) as f32
    }
}

impl Sample for [u8; 3] {
    fn bilinear(p: [[u8; 3]; 4], fx: f64, fy: f64) -> [u8; 3] {
        let mut out = [0u8; 3];
        for (c, o) in out.iter_mut().enumerate() {
            let v = blend(p.map(|q| f64::from(q[c])), fx, fy);
            *o = math::round(v).clamp(0.0, 255.0) as u8;
        }
        out
    }
}

impl Sample for bool {
    const INTERPOLATES: bool = false;

    fn bilinear(p: [bool; 4], fx: f64, fy: f64) -> bool {
        nearest_of(p, fx, fy)
    }
}

impl<P: Sample> Image<P> {
    /// Warps the whole image; pixels with no source take `fill`.
    pub fn warp_affine(&self, warp: &AffineWarp, fill: P, interpolation: Interpolation) -> Self {
        self.warp_affine_region(warp, fill, interpolation, &self.full_roi())
            .expect("full roi always fits")
    }

    /// Computes only `roi` of the warped image; equal to warping then cropping.
    pub fn warp_affine_region(
        &self,
        warp: &AffineWarp,
        fill: P,
        interpolation: Interpolation,
        roi: &Roi,
    ) -> Result<Self> {
        roi.check_within(self.width, self.height)?;
        let bilinear = P::INTERPOLATES && interpolation == Interpolation::Bilinear;
        let (w, h) = (self.width as f64, self.height as f64);
        let mut data = Vec::with_capacity(roi.width() * roi.height());
        for y in roi.y_min..roi.y_max {
            for x in roi.x_min..roi.x_max {
                let (sx, sy) = warp.source_of(self.width, self.height, x as f64, y as f64);
                if !(sx >= -0.5 && sx < w - 0.5 && sy >= -0.5 && sy < h - 0.5) {
                    data.push(fill);
                    continue;
                }
                let v = if bilinear {
                    let x0 = math::floor(sx);
                    let y0 = math::floor(sy);
                    let (fx, fy) = (sx - x0, sy - y0);
                    let clamp_x = |v: f64| (v.max(0.0) as usize).min(self.width - 1);
                    let clamp_y = |v: f64| (v.max(0.0) as usize).min(self.height - 1);
                    let (xa, xb) = (clamp_x(x0), clamp_x(x0 + 1.0));
                    let (ya, yb) = (clamp_y(y0), clamp_y(y0 + 1.0));
                    P::bilinear(
                        [self.get(xa, ya), self.get(xb, ya), self.get(xa, yb), self.get(xb, yb)],
                        fx,
                        fy,
                    )
                } else {
                    let xi = (math::round(sx).max(0.0) as usize).min(self.width - 1);
                    let yi = (math::round(sy).max(0.0) as usize).min(self.height - 1);
                    self.get(xi, yi)
                };
                data.push(v);
            }
        }
        Self::new(roi.width(), roi.height(), data)
    }
}
