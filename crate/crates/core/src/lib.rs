#![no_std]
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]
//! Furrow edge detection on RGB-D frames.
//!
//! The crate is `no_std` + `alloc` and carries no IO. It contains:
//!
//! - [`image`]: raster containers (depth, gray, RGB, masks), crops and affine warps.
//! - [`classical`]: Gaussian blur, Otsu threshold and Canny, plus their composition
//!   as the RGB baseline detector.
//! - [`matcher`]: the depth-map detector. Horizontal bands are scanned upward from
//!   the row where the scene reaches a starting depth; a step template is matched
//!   with normalized cross-correlation in each band and a parabola `x = a·y² + b·y + c`
//!   is fitted to the best matches with RANSAC.
//! - [`camera`]: pinhole camera with pitch and mounting height, mapping between
//!   image pixels and the ground plane.
//! - [`synth`]: a ray-cast renderer of furrow scenes with exact ground truth and
//!   corruption models (range noise, dropout holes, soil piles).
//! - [`guidance`]: lane lines at wheel-width offsets and furrow departure status.
//! - [`datakit`]: auto-labels, quality gate, augmentation with negative samples,
//!   manifests and edge scoring (F1, ODS, OIS).
//!
//! File formats, configuration and the command line live in the `furrow` crate.

extern crate alloc;

pub mod camera;
pub mod classical;
pub mod datakit;
mod error;
pub mod guidance;
pub mod image;
pub mod matcher;
mod math;
mod rng;
pub mod synth;

pub use camera::CameraModel;
pub use error::{Error, Result};
pub use image::{DepthMap, EdgeMask, GrayImage, Image, RgbImage, Roi, SoftMask};
pub use matcher::{DetectorConfig, FurrowEdgeModel};
