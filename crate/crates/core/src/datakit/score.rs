use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::image::{EdgeMask, SoftMask};
use crate::math;

/// Pixel counts behind a precision/recall pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct MatchCounts {
    /// One-to-one matched prediction/ground-truth pairs.
    pub matched: usize,
    pub predicted: usize,
    pub ground_truth: usize,
}

impl MatchCounts {
    pub fn precision(&self) -> f64 {
        ratio(self.matched, self.predicted)
    }

    pub fn recall(&self) -> f64 {
        ratio(self.matched, self.ground_truth)
    }

    pub fn f1(&self) -> f64 {
        f1(self.precision(), self.recall())
    }
}

impl core::ops::Add for MatchCounts {
    type Output = Self;

    fn add(self, o: Self) -> Self {
        Self {
            matched: self.matched + o.matched,
            predicted: self.predicted + o.predicted,
            ground_truth: self.ground_truth + o.ground_truth,
        }
    }
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

fn f1(p: f64, r: f64) -> f64 {
    if p + r == 0.0 {
        0.0
    } else {
        2.0 * p * r / (p + r)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EdgeScore {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub tolerance: f64,
    /// Binarization threshold when a soft mask was scored.
    pub threshold: Option<f64>,
    pub counts: MatchCounts,
}

impl EdgeScore {
    fn new(counts: MatchCounts, tolerance: f64, threshold: Option<f64>) -> Self {
        Self {
            precision: counts.precision(),
            recall: counts.recall(),
            f1: counts.f1(),
            tolerance,
            threshold,
            counts,
        }
    }
}

/// Greedy one-to-one matching of predicted to ground-truth pixels within
/// `tolerance`, taking pairs in increasing distance. Ties are broken by the
/// smaller then the larger raster index of the pair, which keeps the result
/// unchanged when the two masks swap roles.
fn match_counts(pred: &EdgeMask, gt: &EdgeMask, tolerance: f64) -> Result<MatchCounts> {
    pred.ensure_same_dims(gt)?;
    if !(tolerance >= 0.0) {
        return Err(Error::InvalidParameter("tolerance must be nonnegative"));
    }
    let (w, h) = pred.dims();
    let r = math::floor(tolerance) as isize;
    let tol2 = tolerance * tolerance;
    let mut pairs: Vec<(i64, usize, usize, usize, usize)> = Vec::new();
    let mut predicted = 0;
    for y in 0..h {
        for x in 0..w {
            if !pred.get(x, y) {
                continue;
            }
            predicted += 1;
            let pi = y * w + x;
            for dy in -r..=r {
                for dx in -r..=r {
                    let d2 = dx * dx + dy * dy;
                    if d2 as f64 > tol2 {
                        continue;
                    }
                    if gt.get_checked(x as isize + dx, y as isize + dy) == Some(true) {
                        let gi = (y as isize + dy) as usize * w + (x as isize + dx) as usize;
                        pairs.push((d2 as i64, pi.min(gi), pi.max(gi), pi, gi));
                    }
                }
            }
        }
    }
    pairs.sort_unstable();
    let mut pred_used = vec![false; w * h];
    let mut gt_used = vec![false; w * h];
    let mut matched = 0;
    for &(_, _, _, pi, gi) in &pairs {
        if !pred_used[pi] && !gt_used[gi] {
            pred_used[pi] = true;
            gt_used[gi] = true;
            matched += 1;
        }
    }
    Ok(MatchCounts {
        matched,
        predicted,
        ground_truth: gt.count(),
    })
}

/// Precision, recall and F1 of a hard edge mask against ground truth.
pub fn score_edges(pred: &EdgeMask, gt: &EdgeMask, tolerance: f64) -> Result<EdgeScore> {
    Ok(EdgeScore::new(match_counts(pred, gt, tolerance)?, tolerance, None))
}

/// Scores a probability mask binarized at `p >= threshold`.
pub fn score_soft(pred: &SoftMask, gt: &EdgeMask, tolerance: f64, threshold: f64) -> Result<EdgeScore> {
    let hard = pred.map(|p| f64::from(p) >= threshold);
    Ok(EdgeScore::new(
        match_counts(&hard, gt, tolerance)?,
        tolerance,
        Some(threshold),
    ))
}

/// The 99 binarization thresholds `0.01, 0.02, …, 0.99`.
pub fn threshold_grid() -> Vec<f64> {
    (1..=99).map(|i| i as f64 / 100.0).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct OdsOis {
    /// Best F1 of counts pooled over the dataset at one shared threshold.
    pub ods: f64,
    pub ods_threshold: f64,
    /// Mean over images of each image's best F1.
    pub ois: f64,
    pub image_thresholds: Vec<f64>,
    pub image_f1: Vec<f64>,
}

/// Optimal dataset scale and optimal image scale F1 over [`threshold_grid`].
/// Ties go to the smaller threshold.
pub fn ods_ois(preds: &[SoftMask], gts: &[EdgeMask], tolerance: f64) -> Result<OdsOis> {
    if preds.is_empty() {
        return Err(Error::EmptyDataset);
    }
    if preds.len() != gts.len() {
        return Err(Error::InvalidParameter(
            "prediction and ground-truth lists differ in length",
        ));
    }
    let grid = threshold_grid();
    let mut pooled = vec![MatchCounts::default(); grid.len()];
    let mut image_thresholds = Vec::with_capacity(preds.len());
    let mut image_f1 = Vec::with_capacity(preds.len());
    for (pred, gt) in preds.iter().zip(gts) {
        let mut best = (f64::NEG_INFINITY, 0.0);
        for (k, &t) in grid.iter().enumerate() {
            let counts = score_soft(pred, gt, tolerance, t)?.counts;
            pooled[k] = pooled[k] + counts;
            let f = counts.f1();
            if f > best.0 {
                best = (f, t);
            }
        }
        image_f1.push(best.0);
        image_thresholds.push(best.1);
    }
    let mut ods = (f64::NEG_INFINITY, 0.0);
    for (counts, &t) in pooled.iter().zip(&grid) {
        let f = counts.f1();
        if f > ods.0 {
            ods = (f, t);
        }
    }
    let ois = image_f1.iter().sum::<f64>() / image_f1.len() as f64;
    Ok(OdsOis {
        ods: ods.0,
        ods_threshold: ods.1,
        ois,
        image_thresholds,
        image_f1,
    })
}
