//! One JSON object per processed frame:
//! `{"frame": …, "a": …, "b": …, "c": …, "inlier_ratio": …, "candidate_count": …, "status": "ok"}`.
//! Failed frames carry the error name as `status` and null coefficients.

use std::path::Path;

use serde::{Deserialize, Serialize};

use furrow_core::{Error as CoreError, FurrowEdgeModel};

use crate::error::{Error, Result};

pub const STATUS_OK: &str = "ok";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectionRecord {
    pub frame: String,
    pub a: Option<f64>,
    pub b: Option<f64>,
    pub c: Option<f64>,
    pub inlier_ratio: Option<f64>,
    pub candidate_count: Option<usize>,
    pub status: String,
}

impl DetectionRecord {
    pub fn ok(frame: impl Into<String>, model: &FurrowEdgeModel) -> Self {
        Self {
            frame: frame.into(),
            a: Some(model.a),
            b: Some(model.b),
            c: Some(model.c),
            inlier_ratio: Some(model.inlier_ratio),
            candidate_count: Some(model.candidate_count),
            status: STATUS_OK.into(),
        }
    }

    pub fn failed(frame: impl Into<String>, status: impl Into<String>) -> Self {
        Self {
            frame: frame.into(),
            a: None,
            b: None,
            c: None,
            inlier_ratio: None,
            candidate_count: None,
            status: status.into(),
        }
    }

    pub fn is_ok(&self) -> bool {
        self.status == STATUS_OK
    }

    /// The fitted curve, when the frame succeeded.
    pub fn model(&self) -> Option<FurrowEdgeModel> {
        if !self.is_ok() {
            return None;
        }
        let mut m = FurrowEdgeModel::from_coeffs(self.a?, self.b?, self.c?);
        m.inlier_ratio = self.inlier_ratio.unwrap_or(0.0);
        m.candidate_count = self.candidate_count.unwrap_or(0);
        Some(m)
    }

    pub fn to_json_line(&self) -> String {
        serde_json::to_string(self).expect("record serializes")
    }
}

/// Stable snake_case name of a core error, used as a record status.
pub fn status_name(err: &CoreError) -> &'static str {
    match err {
        CoreError::DataLength { .. } => "data_length",
        CoreError::EmptyRaster { .. } => "empty_raster",
        CoreError::DimensionMismatch { .. } => "dimension_mismatch",
        CoreError::RoiOutOfBounds { .. } => "roi_out_of_bounds",
        CoreError::InvalidParameter(_) => "invalid_parameter",
        CoreError::NoStartRow => "no_start_row",
        CoreError::InsufficientPoints(_) => "insufficient_points",
        CoreError::AllDegenerate => "all_degenerate",
        CoreError::HorizonOrAbove => "horizon_or_above",
        CoreError::BehindCamera => "behind_camera",
        CoreError::DegenerateCamera => "degenerate_camera",
        CoreError::CurveOutOfFrame => "curve_out_of_frame",
        CoreError::LookaheadNotVisible => "lookahead_not_visible",
        CoreError::SplitOverlap { .. } => "split_overlap",
        CoreError::EmptyDataset => "empty_dataset",
    }
}

pub fn read_records(path: &Path) -> Result<Vec<DetectionRecord>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    text.lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| serde_json::from_str(l).map_err(Error::from))
        .collect()
}
