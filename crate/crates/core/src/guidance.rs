//! Furrow departure warning: lane lines at wheel-width offsets from the
//! detected edge and a status computed at a lookahead distance.

use alloc::vec::Vec;
use core::fmt;

use crate::camera::CameraModel;
use crate::error::{Error, Result};
use crate::image::RgbImage;
use crate::matcher::FurrowEdgeModel;
use crate::math;

/// Width of the frame drawn around an overlay to show the status, pixels.
pub const BORDER_WIDTH: usize = 6;
/// Stroke width of overlay polylines, pixels.
pub const STROKE_WIDTH: f64 = 3.0;

pub const EDGE_COLOR: [u8; 3] = [255, 220, 0];
pub const LANE_COLOR: [u8; 3] = [0, 150, 255];

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(deny_unknown_fields, default))]
pub struct GuidanceConfig {
    /// Lateral ground offset of the lane lines from the edge, meters.
    pub wheel_width: f64,
    /// Forward ground distance at which the status is evaluated, meters.
    pub lookahead: f64,
    /// Largest |offset| still reported as OK, meters.
    pub warn_threshold: f64,
    /// Image column of the in-furrow wheel; `None` uses the camera's `cx`.
    #[cfg_attr(feature = "serde", serde(skip_serializing_if = "Option::is_none"))]
    pub wheel_column: Option<f64>,
}

impl Default for GuidanceConfig {
    fn default() -> Self {
        Self {
            wheel_width: 0.530,
            lookahead: 1.5,
            warn_threshold: 0.10,
            wheel_column: None,
        }
    }
}

impl GuidanceConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.wheel_width >= 0.0) {
            return Err(Error::InvalidParameter("wheel_width must be nonnegative"));
        }
        if !(self.lookahead > 0.0) {
            return Err(Error::InvalidParameter("lookahead must be positive"));
        }
        if !(self.warn_threshold >= 0.0) {
            return Err(Error::InvalidParameter("warn_threshold must be nonnegative"));
        }
        Ok(())
    }

    pub fn wheel_column_for(&self, camera: &CameraModel) -> f64 {
        self.wheel_column.unwrap_or(camera.cx)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DepartureState {
    Ok,
    WarnLeft,
    WarnRight,
    NoEdge,
}

impl DepartureState {
    pub fn as_str(self) -> &'static str {
        match self {
            DepartureState::Ok => "OK",
            DepartureState::WarnLeft => "WARN_LEFT",
            DepartureState::WarnRight => "WARN_RIGHT",
            DepartureState::NoEdge => "NO_EDGE",
        }
    }

    pub fn border_color(self) -> [u8; 3] {
        match self {
            DepartureState::Ok => [0, 200, 0],
            DepartureState::WarnLeft | DepartureState::WarnRight => [220, 0, 0],
            DepartureState::NoEdge => [128, 128, 128],
        }
    }
}

impl fmt::Display for DepartureState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DepartureStatus {
    pub state: DepartureState,
    /// `X_wheel − X_edge` in meters; positive means the wheel is right of the edge.
    pub lateral_offset: Option<f64>,
}

impl DepartureStatus {
    pub fn no_edge() -> Self {
        Self {
            state: DepartureState::NoEdge,
            lateral_offset: None,
        }
    }
}

/// Image polylines as `(x, y)` vertices, one per sampled row.
pub type Polyline = Vec<(f64, f64)>;

#[derive(Debug, Clone, PartialEq)]
pub struct LaneLines {
    /// The edge curve itself at the sampled rows.
    pub edge: Polyline,
    /// Edge shifted by `−wheel_width` along ground X.
    pub left: Polyline,
    /// Edge shifted by `+wheel_width` along ground X.
    pub right: Polyline,
}

/// Shifts the image point `(x, y)` by `dx` meters along ground X.
fn shift_on_ground(camera: &CameraModel, x: f64, y: f64, dx: f64) -> Result<(f64, f64)> {
    let (gx, gz) = camera.pixel_to_ground(x, y)?;
    camera.ground_to_pixel(gx + dx, gz)
}

/// Samples the edge curve on every image row that sees the ground and offsets
/// it laterally by `±wheel_width` on the ground plane.
pub fn lane_lines(model: &FurrowEdgeModel, camera: &CameraModel, cfg: &GuidanceConfig) -> Result<LaneLines> {
    cfg.validate()?;
    let first = math::floor(camera.horizon_row()) as i64 + 1;
    let first = first.max(0) as usize;
    let mut lanes = LaneLines {
        edge: Vec::new(),
        left: Vec::new(),
        right: Vec::new(),
    };
    for v in first..camera.image_height {
        let y = v as f64;
        let x = model.x_at(y);
        if !x.is_finite() {
            continue;
        }
        let (Ok(left), Ok(right)) = (
            shift_on_ground(camera, x, y, -cfg.wheel_width),
            shift_on_ground(camera, x, y, cfg.wheel_width),
        ) else {
            continue;
        };
        lanes.edge.push((x, y));
        lanes.left.push(left);
        lanes.right.push(right);
    }
    if lanes.edge.is_empty() {
        return Err(Error::HorizonOrAbove);
    }
    Ok(lanes)
}

/// Compares the wheel line with the edge at the lookahead distance.
pub fn departure_status(
    model: Option<&FurrowEdgeModel>,
    camera: &CameraModel,
    cfg: &GuidanceConfig,
) -> Result<DepartureStatus> {
    cfg.validate()?;
    let Some(model) = model else {
        return Ok(DepartureStatus::no_edge());
    };
    // On the ground plane the forward distance depends on the row only.
    let (_, row) = camera
        .ground_to_pixel(0.0, cfg.lookahead)
        .map_err(|_| Error::LookaheadNotVisible)?;
    if !(row >= 0.0 && row <= camera.image_height as f64 - 1.0) {
        return Err(Error::LookaheadNotVisible);
    }
    let (x_wheel, _) = camera
        .pixel_to_ground(cfg.wheel_column_for(camera), row)
        .map_err(|_| Error::LookaheadNotVisible)?;
    let (x_edge, _) = camera
        .pixel_to_ground(model.x_at(row), row)
        .map_err(|_| Error::LookaheadNotVisible)?;
    let offset = x_wheel - x_edge;
    if !offset.is_finite() {
        return Err(Error::LookaheadNotVisible);
    }
    let state = if offset.abs() <= cfg.warn_threshold {
        DepartureState::Ok
    } else if offset < 0.0 {
        DepartureState::WarnLeft
    } else {
        DepartureState::WarnRight
    };
    Ok(DepartureStatus {
        state,
        lateral_offset: Some(offset),
    })
}

/// Paints pixels whose centers fall inside the flat-capped stroke of each
/// segment. Vertices outside the image are fine; only in-bounds pixels change.
pub fn draw_polyline(img: &mut RgbImage, line: &[(f64, f64)], width: f64, color: [u8; 3]) {
    let half = 0.5 * width;
    let (w, h) = img.dims();
    for seg in line.windows(2) {
        let (x0, y0) = seg[0];
        let (x1, y1) = seg[1];
        let (dx, dy) = (x1 - x0, y1 - y0);
        let len2 = dx * dx + dy * dy;
        if !(len2 > 0.0) || !len2.is_finite() {
            continue;
        }
        let len = math::sqrt(len2);
        let xlo = math::floor(x0.min(x1) - half).max(0.0);
        let xhi = math::floor(x0.max(x1) + half + 1.0).min(w as f64);
        let ylo = math::floor(y0.min(y1) - half).max(0.0);
        let yhi = math::floor(y0.max(y1) + half + 1.0).min(h as f64);
        if xlo >= xhi || ylo >= yhi {
            continue;
        }
        for py in ylo as usize..yhi as usize {
            for px in xlo as usize..xhi as usize {
                let (rx, ry) = (px as f64 - x0, py as f64 - y0);
                let t = (rx * dx + ry * dy) / len2;
                if !(0.0..1.0).contains(&t) {
                    continue;
                }
                let dist = (rx * dy - ry * dx).abs() / len;
                if dist < half {
                    img.set(px, py, color);
                }
            }
        }
    }
}

/// Paints a frame of `BORDER_WIDTH` pixels along the image boundary.
pub fn draw_border(img: &mut RgbImage, color: [u8; 3]) {
    let (w, h) = img.dims();
    for y in 0..h {
        for x in 0..w {
            let inner = x >= BORDER_WIDTH && y >= BORDER_WIDTH && x + BORDER_WIDTH < w && y + BORDER_WIDTH < h;
            if !inner {
                img.set(x, y, color);
            }
        }
    }
}

/// Draws the lane lines and the edge curve, then the status border.
///
/// Without `lanes` the edge curve is drawn over every image row.
pub fn render_overlay(
    rgb: &RgbImage,
    model: Option<&FurrowEdgeModel>,
    lanes: Option<&LaneLines>,
    status: &DepartureStatus,
) -> RgbImage {
    let mut out = rgb.clone();
    if let Some(lanes) = lanes {
        draw_polyline(&mut out, &lanes.left, STROKE_WIDTH, LANE_COLOR);
        draw_polyline(&mut out, &lanes.right, STROKE_WIDTH, LANE_COLOR);
        draw_polyline(&mut out, &lanes.edge, STROKE_WIDTH, EDGE_COLOR);
    } else if let Some(model) = model {
        let edge: Polyline = (0..out.height()).map(|v| (model.x_at(v as f64), v as f64)).collect();
        draw_polyline(&mut out, &edge, STROKE_WIDTH, EDGE_COLOR);
    }
    draw_border(&mut out, status.state.border_color());
    out
}

/// Total Euclidean length of a polyline.
pub fn polyline_length(line: &[(f64, f64)]) -> f64 {
    line.windows(2)
        .map(|s| {
            let (dx, dy) = (s[1].0 - s[0].0, s[1].1 - s[0].1);
            math::sqrt(dx * dx + dy * dy)
        })
        .sum()
}
