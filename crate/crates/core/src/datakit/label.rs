use crate::error::{Error, Result};
use crate::image::EdgeMask;
use crate::matcher::FurrowEdgeModel;
use crate::math;

/// Thresholds standing in for a manual review of auto-labels.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(deny_unknown_fields, default))]
pub struct QualityGate {
    pub min_inlier_ratio: f64,
    pub min_candidates: usize,
}

impl Default for QualityGate {
    fn default() -> Self {
        Self {
            min_inlier_ratio: 0.6,
            min_candidates: 10,
        }
    }
}

impl QualityGate {
    pub fn accepts(&self, model: &FurrowEdgeModel) -> bool {
        quality_filter(model, self.min_inlier_ratio, self.min_candidates)
    }
}

pub fn quality_filter(model: &FurrowEdgeModel, min_inlier_ratio: f64, min_candidates: usize) -> bool {
    model.inlier_ratio >= min_inlier_ratio && model.candidate_count >= min_candidates
}

/// One pixel per row at `round(f(y))` wherever that column lies in the frame.
pub fn rasterize_label(model: &FurrowEdgeModel, width: usize, height: usize) -> Result<EdgeMask> {
    let mut mask = EdgeMask::filled(width, height, false)?;
    let mut any = false;
    for y in 0..height {
        let x = math::round(model.x_at(y as f64));
        if x >= 0.0 && x < width as f64 {
            mask.set(x as usize, y, true);
            any = true;
        }
    }
    if !any {
        return Err(Error::CurveOutOfFrame);
    }
    Ok(mask)
}
