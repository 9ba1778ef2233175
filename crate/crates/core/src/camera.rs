//! Pinhole camera pitched toward a flat ground plane.
//!
//! World frame: `X` lateral (right), `Y` up, `Z` forward along the ground. The
//! camera sits at `(0, mount_height, 0)`. Camera frame: `x` right, `y` down,
//! `z` along the optical axis.

use crate::error::{Error, Result};

/// Horizontal depth field of view of the stereo module the defaults model, degrees.
pub const DEFAULT_HFOV_DEG: f64 = 87.0;

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(deny_unknown_fields, default))]
pub struct CameraModel {
    pub image_width: usize,
    pub image_height: usize,
    pub fx: f64,
    pub fy: f64,
    pub cx: f64,
    pub cy: f64,
    /// Radians; negative tilts the optical axis toward the ground.
    pub pitch: f64,
    /// Radians; only 0 is supported.
    pub roll: f64,
    /// Meters above the ground plane.
    pub mount_height: f64,
}

impl Default for CameraModel {
    fn default() -> Self {
        Self::defaults()
    }
}

impl CameraModel {
    /// 640x480 camera pitched 23° down at 0.56 m, intrinsics from an 87° HFOV.
    pub fn defaults() -> Self {
        Self {
            image_width: 640,
            image_height: 480,
            fx: 337.0,
            fy: 337.0,
            cx: 320.0,
            cy: 240.0,
            pitch: (-23.0f64).to_radians(),
            roll: 0.0,
            mount_height: 0.560,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.fx > 0.0 && self.fy > 0.0) {
            return Err(Error::InvalidParameter("focal lengths must be positive"));
        }
        if !(self.mount_height > 0.0) {
            return Err(Error::InvalidParameter("camera height must be positive"));
        }
        if self.roll != 0.0 {
            return Err(Error::InvalidParameter("camera roll must be 0"));
        }
        if self.image_width == 0 || self.image_height == 0 {
            return Err(Error::InvalidParameter("image size must be nonzero"));
        }
        Ok(())
    }

    #[inline]
    fn tilt(&self) -> (f64, f64) {
        // sin/cos of the downward tilt angle (-pitch)
        libm::sincos(-self.pitch)
    }

    /// World-frame direction of the ray through pixel `(u, v)`; its norm equals
    /// the norm of the normalized camera ray `(xn, yn, 1)`.
    #[inline]
    pub fn ray_direction(&self, u: f64, v: f64) -> [f64; 3] {
        let xn = (u - self.cx) / self.fx;
        let yn = (v - self.cy) / self.fy;
        let (s, c) = self.tilt();
        [xn, -yn * c - s, -yn * s + c]
    }

    /// Projects a world point to pixel coordinates; `None` behind the camera.
    #[inline]
    pub fn project(&self, point: [f64; 3]) -> Option<(f64, f64)> {
        let (s, c) = self.tilt();
        let dy = point[1] - self.mount_height;
        let xc = point[0];
        let yc = -dy * c - point[2] * s;
        let zc = -dy * s + point[2] * c;
        if !(zc > 1e-12) {
            return None;
        }
        Some((self.cx + self.fx * xc / zc, self.cy + self.fy * yc / zc))
    }

    /// Intersects the ray through `(u, v)` with the ground plane.
    pub fn pixel_to_ground(&self, u: f64, v: f64) -> Result<(f64, f64)> {
        let d = self.ray_direction(u, v);
        if !(d[1] < -1e-12) {
            return Err(Error::HorizonOrAbove);
        }
        let t = self.mount_height / -d[1];
        let z = t * d[2];
        if !(z > 0.0) {
            return Err(Error::HorizonOrAbove);
        }
        Ok((t * d[0], z))
    }

    /// Projects the ground point `(x, z)` into the image.
    pub fn ground_to_pixel(&self, x: f64, z: f64) -> Result<(f64, f64)> {
        if !(z > 0.0) {
            return Err(Error::BehindCamera);
        }
        self.project([x, 0.0, z]).ok_or(Error::BehindCamera)
    }

    /// Image row of the horizon (rays above it never reach the ground).
    pub fn horizon_row(&self) -> f64 {
        let (s, c) = self.tilt();
        self.cy - self.fy * s / c
    }

    /// `true` when at least the bottom image row looks at the ground.
    pub fn sees_ground(&self) -> bool {
        let bottom = self.image_height as f64 - 1.0;
        self.pixel_to_ground(self.cx, bottom).is_ok()
    }
}
