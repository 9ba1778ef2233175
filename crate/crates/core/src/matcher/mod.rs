//! Furrow edge detection on a depth map.
//!
//! The detector never looks at color. It finds the bottom-most image row whose
//! median range reaches [`DetectorConfig::starting_depth`], then walks upward in
//! horizontal bands spaced [`DetectorConfig::band_shift`] rows apart. In every
//! band a zero-mean step template (near on the left, far on the right) is slid
//! across the region of interest and the column with the highest normalized
//! cross-correlation becomes a candidate edge point. A parabola
//! `x = a·y² + b·y + c` is fitted to the candidates with RANSAC.
//!
//! With `score_threshold = 0` and no rejection gate, the detector reports an edge
//! even on scenes that have none; callers decide whether to trust a model via
//! its inlier ratio and candidate count.

mod bands;
mod ncc;
mod ransac;
mod template;

pub use bands::{band_layout, scan_bands, start_row, Band, CandidatePoint};
pub use ncc::{ncc_score, ncc_score_with, DEFAULT_MAX_INVALID_FRACTION, INVALID_SCORE};
pub use ransac::{fit_parabola_ransac, least_squares_parabola, FurrowEdgeModel};
pub use template::{make_step_template, Template};

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::image::{DepthMap, Roi};

/// Upper bound on the number of bands scanned.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BandLimit {
    #[default]
    Unbounded,
    Count(usize),
}

impl BandLimit {
    #[inline]
    pub fn allows(&self, k: usize) -> bool {
        match *self {
            BandLimit::Unbounded => true,
            BandLimit::Count(n) => k < n,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(deny_unknown_fields, default))]
pub struct DetectorConfig {
    /// Range in meters that the first band's row must reach.
    pub starting_depth: f64,
    /// Vertical extent of a band, pixels.
    pub band_width: usize,
    /// Row spacing between consecutive bands, pixels.
    pub band_shift: usize,
    pub max_bands: BandLimit,
    /// Side of the square step template, pixels (even).
    pub template_size: usize,
    /// Minimum NCC score for a band to emit a candidate.
    pub score_threshold: f64,
    /// Inlier residual bound, pixels.
    pub ransac_threshold: f64,
    pub ransac_iterations: usize,
    pub roi: Roi,
    pub fit_degree: u32,
    pub rng_seed: u64,
    /// Refine the best column with a parabola through the neighbouring scores.
    pub subpixel: bool,
    /// Windows with a larger share of invalid pixels are skipped.
    pub max_invalid_fraction: f64,
}

impl Default for DetectorConfig {
    fn default() -> Self {
        Self {
            starting_depth: 0.92,
            band_width: 25,
            band_shift: 5,
            max_bands: BandLimit::Unbounded,
            template_size: 30,
            score_threshold: 0.0,
            ransac_threshold: 30.0,
            ransac_iterations: 500,
            roi: Roi {
                x_min: 250,
                x_max: 640,
                y_min: 0,
                y_max: 480,
            },
            fit_degree: 2,
            rng_seed: 0,
            subpixel: true,
            max_invalid_fraction: DEFAULT_MAX_INVALID_FRACTION,
        }
    }
}

impl DetectorConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.starting_depth > 0.0) {
            return Err(Error::InvalidParameter("starting_depth must be positive"));
        }
        if self.band_width == 0 || self.band_shift == 0 {
            return Err(Error::InvalidParameter("band width and shift must be positive"));
        }
        if self.template_size < 4 || !self.template_size.is_multiple_of(2) {
            return Err(Error::InvalidParameter("template size must be even and >= 4"));
        }
        if !(-1.0..=1.0).contains(&self.score_threshold) {
            return Err(Error::InvalidParameter("score threshold must lie in [-1, 1]"));
        }
        if !(self.ransac_threshold > 0.0) || self.ransac_iterations == 0 {
            return Err(Error::InvalidParameter(
                "ransac threshold and iterations must be positive",
            ));
        }
        if self.fit_degree != 2 {
            return Err(Error::InvalidParameter("only degree-2 fits are supported"));
        }
        if !(0.0..=1.0).contains(&self.max_invalid_fraction) {
            return Err(Error::InvalidParameter("max_invalid_fraction must lie in [0, 1]"));
        }
        if self.roi.x_min >= self.roi.x_max || self.roi.y_min >= self.roi.y_max {
            return Err(Error::InvalidParameter("roi must have positive extent"));
        }
        Ok(())
    }
}

/// Everything the detector produced for one frame.
#[derive(Debug, Clone, PartialEq)]
pub struct Detection {
    pub start_row: usize,
    pub candidates: Vec<CandidatePoint>,
    pub model: FurrowEdgeModel,
}

/// Runs the full detector and keeps the intermediate candidates.
pub fn detect(depth: &DepthMap, cfg: &DetectorConfig) -> Result<Detection> {
    cfg.validate()?;
    cfg.roi.check_within(depth.width(), depth.height())?;
    let template = make_step_template(cfg.template_size)?;
    let start = start_row(depth, cfg)?;
    let candidates = scan_bands(depth, cfg, &template)?;
    let model = fit_parabola_ransac(&candidates, cfg)?;
    Ok(Detection {
        start_row: start,
        candidates,
        model,
    })
}

/// Template → start row → band scan → RANSAC parabola.
pub fn detect_furrow(depth: &DepthMap, cfg: &DetectorConfig) -> Result<FurrowEdgeModel> {
    detect(depth, cfg).map(|d| d.model)
}

#[cfg(feature = "serde")]
mod band_limit_serde {
    use super::BandLimit;
    use core::fmt;
    use serde::de::{self, Visitor};
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    const UNBOUNDED: &str = "unbounded";

    impl Serialize for BandLimit {
        fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
            match *self {
                BandLimit::Unbounded => s.serialize_str(UNBOUNDED),
                BandLimit::Count(n) => s.serialize_u64(n as u64),
            }
        }
    }

    struct LimitVisitor;

    impl Visitor<'_> for LimitVisitor {
        type Value = BandLimit;

        fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
            f.write_str("a band count or \"unbounded\"")
        }

        fn visit_u64<E: de::Error>(self, v: u64) -> Result<BandLimit, E> {
            Ok(BandLimit::Count(v as usize))
        }

        fn visit_i64<E: de::Error>(self, v: i64) -> Result<BandLimit, E> {
            usize::try_from(v)
                .map(BandLimit::Count)
                .map_err(|_| E::custom("band count must be nonnegative"))
        }

        fn visit_str<E: de::Error>(self, v: &str) -> Result<BandLimit, E> {
            if v == UNBOUNDED {
                Ok(BandLimit::Unbounded)
            } else {
                Err(E::invalid_value(de::Unexpected::Str(v), &self))
            }
        }
    }

    impl<'de> Deserialize<'de> for BandLimit {
        fn deserialize<D: Deserializer<'de>>(d: D) -> Result<BandLimit, D::Error> {
            d.deserialize_any(LimitVisitor)
        }
    }
}
