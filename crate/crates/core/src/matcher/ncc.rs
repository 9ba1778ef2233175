use crate::error::{Error, Result};
use crate::image::DepthMap;

use super::template::Template;

/// Score returned for windows that cannot match (flat or hole-dominated).
pub const INVALID_SCORE: f64 = -2.0;
/// Largest share of invalid pixels a window may contain and still be scored.
pub const DEFAULT_MAX_INVALID_FRACTION: f64 = 0.3;
const MIN_VARIANCE: f64 = 1e-12;

/// Zero-mean NCC of a template-sized depth patch.
pub fn ncc_score(patch: &DepthMap, tmpl: &Template) -> Result<f64> {
    ncc_score_with(patch, tmpl, DEFAULT_MAX_INVALID_FRACTION)
}

pub fn ncc_score_with(patch: &DepthMap, tmpl: &Template, max_invalid_fraction: f64) -> Result<f64> {
    let n = tmpl.size();
    if patch.dims() != (n, n) {
        return Err(Error::DimensionMismatch {
            expected: (n, n),
            actual: patch.dims(),
        });
    }
    Ok(window_score(patch, 0, 0, tmpl, max_invalid_fraction))
}

/// NCC of the template placed with its top-left corner at `(x0, y0)`.
///
/// Only pixels with a valid depth take part; the template is re-centered and
/// re-normalized over them. Pixels outside the map count as invalid. With
/// every pixel valid this is `Σ(p − p̄)·t / ‖p − p̄‖`.
pub(crate) fn window_score(depth: &DepthMap, x0: isize, y0: isize, tmpl: &Template, max_invalid: f64) -> f64 {
    let n = tmpl.size();
    let t = tmpl.data();
    let (w, h) = (depth.width() as isize, depth.height() as isize);
    let data = depth.data();
    let total = (n * n) as f64;

    let (mut count, mut sp, mut st) = (0usize, 0.0f64, 0.0f64);
    for r in 0..n {
        let y = y0 + r as isize;
        if y < 0 || y >= h {
            continue;
        }
        let row = &data[(y * w) as usize..((y + 1) * w) as usize];
        for c in 0..n {
            let x = x0 + c as isize;
            if x < 0 || x >= w {
                continue;
            }
            let p = row[x as usize];
            if p > 0.0 {
                count += 1;
                sp += f64::from(p);
                st += t[r * n + c];
            }
        }
    }
    if count == 0 || (total - count as f64) > max_invalid * total {
        return INVALID_SCORE;
    }
    let pm = sp / count as f64;
    let tm = st / count as f64;

    let (mut cov, mut vp, mut vt) = (0.0f64, 0.0f64, 0.0f64);
    for r in 0..n {
        let y = y0 + r as isize;
        if y < 0 || y >= h {
            continue;
        }
        let row = &data[(y * w) as usize..((y + 1) * w) as usize];
        for c in 0..n {
            let x = x0 + c as isize;
            if x < 0 || x >= w {
                continue;
            }
            let p = row[x as usize];
            if p > 0.0 {
                let dp = f64::from(p) - pm;
                let dt = t[r * n + c] - tm;
                cov += dp * dt;
                vp += dp * dp;
                vt += dt * dt;
            }
        }
    }
    if vp / (count as f64) < MIN_VARIANCE || !(vt > 0.0) {
        return INVALID_SCORE;
    }
    (cov / libm::sqrt(vp * vt)).clamp(-1.0, 1.0)
}
