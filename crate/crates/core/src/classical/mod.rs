//! RGB baseline: grayscale, Gaussian blur, Otsu threshold, Canny.

mod blur;
mod canny;
mod otsu;

pub use blur::{gaussian_blur, gaussian_kernel};
pub use canny::{canny, hysteresis, non_max_suppression, sobel_gradients, CannyParams, Direction, Gradients};
pub use otsu::{between_class_variance, histogram, otsu_threshold};

use crate::error::Result;
use crate::image::{to_grayscale, EdgeMask, RgbImage};

/// Parameters of the grayscale → blur → Otsu → Canny chain.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(deny_unknown_fields, default))]
pub struct OtsuCannyParams {
    pub blur_kernel: usize,
    pub blur_sigma: f64,
    /// Low hysteresis threshold as a fraction of the high one.
    pub low_ratio: f64,
    pub sobel_aperture: usize,
}

impl Default for OtsuCannyParams {
    fn default() -> Self {
        Self {
            blur_kernel: 11,
            blur_sigma: 22.0,
            low_ratio: 0.5,
            sobel_aperture: 5,
        }
    }
}

/// Canny on the blurred image with the Otsu threshold as the high threshold.
pub fn otsu_canny_pipeline(img: &RgbImage, params: &OtsuCannyParams) -> Result<EdgeMask> {
    let gray = to_grayscale(img);
    let blurred = gaussian_blur(&gray, params.blur_kernel, params.blur_sigma)?;
    let high = otsu_threshold(&blurred);
    let canny_params = CannyParams::new(high * params.low_ratio, high, params.sobel_aperture)?;
    Ok(canny(&blurred, &canny_params))
}
