use alloc::vec::Vec;

use rand::seq::index;

use super::bands::CandidatePoint;
use super::DetectorConfig;
use crate::error::{Error, Result};
use crate::math;
use crate::rng;

/// Redraws allowed per iteration when a sample repeats a row.
const MAX_RESAMPLES: usize = 64;
/// Bound on consensus refit rounds after the best hypothesis is chosen.
const MAX_REFITS: usize = 20;

/// Fitted edge `x = a·y² + b·y + c` in image pixels.
#[derive(Debug, Clone, PartialEq)]
pub struct FurrowEdgeModel {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    /// Indices into the candidate list within `ransac_threshold` of the curve.
    pub inlier_indices: Vec<usize>,
    pub inlier_ratio: f64,
    pub candidate_count: usize,
}

impl FurrowEdgeModel {
    /// Model with only coefficients, e.g. read back from a detection record.
    pub fn from_coeffs(a: f64, b: f64, c: f64) -> Self {
        Self {
            a,
            b,
            c,
            inlier_indices: Vec::new(),
            inlier_ratio: 0.0,
            candidate_count: 0,
        }
    }

    #[inline]
    pub fn x_at(&self, y: f64) -> f64 {
        (self.a * y + self.b) * y + self.c
    }

    /// Same curve mirrored about the vertical line `x = axis`.
    pub fn mirrored(&self, axis: f64) -> Self {
        Self {
            a: -self.a,
            b: -self.b,
            c: 2.0 * axis - self.c,
            ..self.clone()
        }
    }
}

#[inline]
fn eval(coeffs: [f64; 3], y: f64) -> f64 {
    (coeffs[0] * y + coeffs[1]) * y + coeffs[2]
}

/// Exact parabola through three points with distinct `y`.
fn interpolate(p: [&CandidatePoint; 3]) -> Option<[f64; 3]> {
    let m = [
        [p[0].y * p[0].y, p[0].y, 1.0],
        [p[1].y * p[1].y, p[1].y, 1.0],
        [p[2].y * p[2].y, p[2].y, 1.0],
    ];
    math::solve3(m, [p[0].x, p[1].x, p[2].x])
}

/// Least-squares parabola `x = a·y² + b·y + c` through `(y, x)` pairs.
///
/// Rows are centered and scaled before solving the normal equations.
pub fn least_squares_parabola(points: impl Iterator<Item = (f64, f64)> + Clone) -> Option<[f64; 3]> {
    let (n, sum_y) = points.clone().fold((0usize, 0.0), |(n, s), (y, _)| (n + 1, s + y));
    if n < 3 {
        return None;
    }
    let mean = sum_y / n as f64;
    let spread = points.clone().fold(0.0f64, |m, (y, _)| m.max((y - mean).abs()));
    if !(spread > 0.0) {
        return None;
    }
    let mut ata = [[0.0; 3]; 3];
    let mut atb = [0.0; 3];
    for (y, x) in points {
        let t = (y - mean) / spread;
        let row = [t * t, t, 1.0];
        for i in 0..3 {
            for j in 0..3 {
                ata[i][j] += row[i] * row[j];
            }
            atb[i] += row[i] * x;
        }
    }
    let [p, q, r] = math::solve3(ata, atb)?;
    // x = p·t² + q·t + r with t = (y - mean) / spread
    let s2 = spread * spread;
    Some([
        p / s2,
        q / spread - 2.0 * p * mean / s2,
        p * mean * mean / s2 - q * mean / spread + r,
    ])
}

/// Robust parabola fit over the candidate points.
///
/// Each of `ransac_iterations` rounds draws three points with distinct rows,
/// interpolates them exactly and counts points within `ransac_threshold`. The
/// hypothesis with the most inliers wins, ties going to the smaller summed
/// inlier residual. The winning consensus set is then refit by least squares,
/// re-thresholded against the refit curve and refit again until it is stable.
pub fn fit_parabola_ransac(points: &[CandidatePoint], cfg: &DetectorConfig) -> Result<FurrowEdgeModel> {
    let mut rows: Vec<u64> = points.iter().map(|p| p.y.to_bits()).collect();
    rows.sort_unstable();
    rows.dedup();
    if rows.len() < 3 {
        return Err(Error::InsufficientPoints(rows.len()));
    }
    let n = points.len();
    let thr = cfg.ransac_threshold;
    let mut rng = rng::seeded(cfg.rng_seed);

    let mut best: Option<(usize, f64, [f64; 3])> = None;
    for _ in 0..cfg.ransac_iterations {
        let mut hypothesis = None;
        for _ in 0..MAX_RESAMPLES {
            let idx = index::sample(&mut rng, n, 3);
            let s = [&points[idx.index(0)], &points[idx.index(1)], &points[idx.index(2)]];
            if s[0].y == s[1].y || s[0].y == s[2].y || s[1].y == s[2].y {
                continue;
            }
            if let Some(coeffs) = interpolate(s) {
                hypothesis = Some(coeffs);
                break;
            }
        }
        let Some(coeffs) = hypothesis else { continue };
        let (mut count, mut residual) = (0usize, 0.0f64);
        for p in points {
            let r = (p.x - eval(coeffs, p.y)).abs();
            if r <= thr {
                count += 1;
                residual += r;
            }
        }
        let better = match best {
            None => true,
            Some((bc, br, _)) => count > bc || (count == bc && residual < br),
        };
        if better {
            best = Some((count, residual, coeffs));
        }
    }
    let (_, _, hypothesis) = best.ok_or(Error::AllDegenerate)?;

    // Refit on the consensus set until it stops changing; the reported
    // inliers are always those of the returned coefficients.
    let inliers_of = |coeffs: [f64; 3]| -> Vec<usize> {
        (0..n)
            .filter(|&i| (points[i].x - eval(coeffs, points[i].y)).abs() <= thr)
            .collect()
    };
    let mut inlier_indices = inliers_of(hypothesis);
    let mut coeffs = hypothesis;
    for _ in 0..MAX_REFITS {
        let Some(refit) = least_squares_parabola(inlier_indices.iter().map(|&i| (points[i].y, points[i].x))) else {
            break;
        };
        let next = inliers_of(refit);
        if next.len() < inlier_indices.len() && next.len() < 3 {
            break;
        }
        coeffs = refit;
        if next == inlier_indices {
            break;
        }
        inlier_indices = next;
    }
    let inlier_indices = inliers_of(coeffs);
    Ok(FurrowEdgeModel {
        a: coeffs[0],
        b: coeffs[1],
        c: coeffs[2],
        inlier_ratio: inlier_indices.len() as f64 / n as f64,
        inlier_indices,
        candidate_count: n,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn pt(x: f64, y: f64) -> CandidatePoint {
        CandidatePoint {
            x,
            y,
            score: 1.0,
            band_index: 0,
        }
    }

    #[test]
    fn noiseless_recovery() {
        let f = |y: f64| 0.01 * y * y + 0.5 * y + 100.0;
        let pts: Vec<_> = (0..20).map(|i| pt(f(i as f64 * 20.0), i as f64 * 20.0)).collect();
        let m = fit_parabola_ransac(&pts, &DetectorConfig::default()).unwrap();
        assert!((m.a - 0.01).abs() < 1e-6);
        assert!((m.b - 0.5).abs() < 1e-6);
        assert!((m.c - 100.0).abs() < 1e-6);
        assert_eq!(m.inlier_ratio, 1.0);
        assert_eq!(m.candidate_count, 20);
    }

    #[test]
    fn two_points_insufficient() {
        let pts = vec![pt(1.0, 1.0), pt(2.0, 2.0)];
        assert_eq!(
            fit_parabola_ransac(&pts, &DetectorConfig::default()),
            Err(Error::InsufficientPoints(2))
        );
    }

    #[test]
    fn repeated_rows_count_once() {
        let pts = vec![pt(1.0, 1.0), pt(2.0, 1.0), pt(3.0, 2.0), pt(4.0, 2.0)];
        assert_eq!(
            fit_parabola_ransac(&pts, &DetectorConfig::default()),
            Err(Error::InsufficientPoints(2))
        );
    }

    #[test]
    fn least_squares_exact_on_parabola() {
        let pts: Vec<(f64, f64)> = (0..10)
            .map(|i| {
                let y = 300.0 + i as f64 * 7.0;
                (y, -0.002 * y * y + 1.5 * y - 40.0)
            })
            .collect();
        let c = least_squares_parabola(pts.iter().copied()).unwrap();
        assert!((c[0] + 0.002).abs() < 1e-9);
        assert!((c[1] - 1.5).abs() < 1e-7);
        assert!((c[2] + 40.0).abs() < 1e-4);
    }

    #[test]
    fn mirrored_curve() {
        let m = FurrowEdgeModel::from_coeffs(0.001, 0.2, 400.0);
        let r = m.mirrored(320.0);
        for y in [0.0, 100.0, 479.0] {
            assert!((r.x_at(y) - (640.0 - m.x_at(y))).abs() < 1e-9);
        }
    }
}
