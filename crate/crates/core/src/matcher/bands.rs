use alloc::vec::Vec;

use super::ncc::{window_score, INVALID_SCORE};
use super::template::Template;
use super::DetectorConfig;
use crate::error::{Error, Result};
use crate::image::DepthMap;
use crate::math;

/// Best template match within one band. `y` is the center row of the
/// matched window.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CandidatePoint {
    pub x: f64,
    pub y: f64,
    pub score: f64,
    pub band_index: usize,
}

/// Horizontal strip of rows `[top, bottom)` centered on `center_row`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Band {
    pub index: usize,
    pub center_row: usize,
    pub top: isize,
    pub bottom: isize,
}

/// Bottom-most ROI row whose median valid range reaches the starting depth.
pub fn start_row(depth: &DepthMap, cfg: &DetectorConfig) -> Result<usize> {
    let roi = cfg.roi;
    roi.check_within(depth.width(), depth.height())?;
    let mut values = Vec::with_capacity(roi.width());
    for y in (roi.y_min..roi.y_max).rev() {
        values.clear();
        values.extend(depth.row(y)[roi.x_min..roi.x_max].iter().copied().filter(|&d| d > 0.0));
        if let Some(m) = math::median(&mut values) {
            if m >= cfg.starting_depth {
                return Ok(y);
            }
        }
    }
    Err(Error::NoStartRow)
}

/// Bands going upward from `start`, `band_shift` rows apart, until the
/// template would poke above the ROI or the band limit is reached.
pub fn band_layout(start: usize, cfg: &DetectorConfig) -> Vec<Band> {
    let half_t = (cfg.template_size / 2) as isize;
    let half_b = (cfg.band_width / 2) as isize;
    let mut out = Vec::new();
    let mut k = 0usize;
    loop {
        let center = start as isize - (k * cfg.band_shift) as isize;
        if center - half_t < cfg.roi.y_min as isize || !cfg.max_bands.allows(k) {
            break;
        }
        out.push(Band {
            index: k,
            center_row: center as usize,
            top: center - half_b,
            bottom: center - half_b + cfg.band_width as isize,
        });
        k += 1;
    }
    out
}

/// Parabolic peak offset through three neighbouring scores, in `[-0.5, 0.5]`.
fn subpixel_offset(left: f64, mid: f64, right: f64) -> f64 {
    let denom = left - 2.0 * mid + right;
    if left <= INVALID_SCORE || right <= INVALID_SCORE || !(denom < 0.0) {
        return 0.0;
    }
    (0.5 * (left - right) / denom).clamp(-0.5, 0.5)
}

/// The template window spans rows `[center - n/2, center + n/2)`, so its
/// geometric center sits this far above the band's center row.
#[inline]
fn window_center_offset(tmpl: &Template) -> f64 {
    0.5 * ((tmpl.size() + 1) % 2) as f64
}

/// Scores every horizontal template position across the ROI in one band.
pub(crate) fn band_scores(depth: &DepthMap, cfg: &DetectorConfig, tmpl: &Template, center_row: usize) -> Vec<f64> {
    let n = tmpl.size();
    let roi = cfg.roi;
    if roi.width() < n {
        return Vec::new();
    }
    let y0 = center_row as isize - (n / 2) as isize;
    (roi.x_min..=roi.x_max - n)
        .map(|x0| window_score(depth, x0 as isize, y0, tmpl, cfg.max_invalid_fraction))
        .collect()
}

/// One candidate per band whose best NCC reaches `score_threshold`, ordered by
/// band index.
pub fn scan_bands(depth: &DepthMap, cfg: &DetectorConfig, tmpl: &Template) -> Result<Vec<CandidatePoint>> {
    let start = start_row(depth, cfg)?;
    let mut out = Vec::new();
    for band in band_layout(start, cfg) {
        let scores = band_scores(depth, cfg, tmpl, band.center_row);
        let mut best: Option<(usize, f64)> = None;
        for (i, &s) in scores.iter().enumerate() {
            if s > INVALID_SCORE && best.is_none_or(|(_, b)| s > b) {
                best = Some((i, s));
            }
        }
        let Some((i, score)) = best else { continue };
        if score < cfg.score_threshold {
            continue;
        }
        let mut x = (cfg.roi.x_min + i) as f64 + tmpl.anchor_x();
        if cfg.subpixel && i > 0 && i + 1 < scores.len() {
            x += subpixel_offset(scores[i - 1], score, scores[i + 1]);
        }
        out.push(CandidatePoint {
            x,
            y: band.center_row as f64 - window_center_offset(tmpl),
            score,
            band_index: band.index,
        });
    }
    Ok(out)
}
