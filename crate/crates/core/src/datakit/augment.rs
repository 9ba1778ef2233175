use alloc::vec::Vec;

use rand::seq::index;
use rand::Rng;

use crate::error::{Error, Result};
use crate::image::{AffineWarp, EdgeMask, Image, Interpolation, Roi, Sample};
use crate::rng;

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(deny_unknown_fields, default))]
pub struct AugmentSpec {
    /// Rotations are drawn from `[-max_rotation, max_rotation]`, radians.
    pub max_rotation: f64,
    /// Horizontal shifts are drawn from `[-max_shift, max_shift]`, pixels.
    pub max_shift: usize,
    /// Side of the square output crop, pixels.
    pub crop_size: usize,
    /// Share of copies pushed far enough sideways that the crop holds no edge.
    pub negative_fraction: f64,
    pub copies_per_frame: usize,
    pub rng_seed: u64,
}

impl Default for AugmentSpec {
    fn default() -> Self {
        Self {
            max_rotation: 5f64.to_radians(),
            max_shift: 60,
            crop_size: 400,
            negative_fraction: 0.1,
            copies_per_frame: 10,
            rng_seed: 0,
        }
    }
}

impl AugmentSpec {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=core::f64::consts::FRAC_PI_2).contains(&self.max_rotation) {
            return Err(Error::InvalidParameter("max_rotation must lie in [0, pi/2]"));
        }
        if !(0.0..=1.0).contains(&self.negative_fraction) {
            return Err(Error::InvalidParameter("negative_fraction must lie in [0, 1]"));
        }
        if self.crop_size == 0 {
            return Err(Error::InvalidParameter("crop_size must be positive"));
        }
        Ok(())
    }

    /// Bottom-aligned, horizontally centered crop window.
    pub fn crop_roi(&self, width: usize, height: usize) -> Result<Roi> {
        if self.crop_size > width || self.crop_size > height {
            return Err(Error::InvalidParameter("crop_size exceeds the source dimensions"));
        }
        let x0 = (width - self.crop_size) / 2;
        let y0 = height - self.crop_size;
        Roi::new(x0, x0 + self.crop_size, y0, height)
    }
}

/// One copy's transform: rotate and shift the whole frame, then crop.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AugmentOp {
    pub warp: AffineWarp,
    pub crop: Roi,
    /// The shift was enlarged to push the edge out of the crop.
    pub forced_negative: bool,
}

impl AugmentOp {
    pub fn apply<P: Sample>(&self, img: &Image<P>, fill: P, interpolation: Interpolation) -> Result<Image<P>> {
        img.warp_affine_region(&self.warp, fill, interpolation, &self.crop)
    }

    pub fn apply_mask(&self, mask: &EdgeMask) -> Result<EdgeMask> {
        self.apply(mask, false, Interpolation::Nearest)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AugmentedSample<P> {
    pub image: Image<P>,
    pub mask: EdgeMask,
    pub has_edge: bool,
    pub op: AugmentOp,
}

/// Columns, in the rotated but unshifted frame, holding edge pixels inside the
/// crop rows. Virtual columns span `[-width, 2·width)` so every shift up to the
/// frame width is covered.
fn edge_column_span(mask: &EdgeMask, angle: f64, crop: &Roi) -> Option<(i64, i64)> {
    let (w, h) = mask.dims();
    let warp = AffineWarp { angle, shift_x: 0.0 };
    let (wf, hf) = (w as f64, h as f64);
    let pad = w as i64;
    let mut span: Option<(i64, i64)> = None;
    for y in crop.y_min..crop.y_max {
        for x in -pad..w as i64 + pad {
            let (sx, sy) = warp.source_of(w, h, x as f64, y as f64);
            if !(sx >= -0.5 && sx < wf - 0.5 && sy >= -0.5 && sy < hf - 0.5) {
                continue;
            }
            let xi = (libm::round(sx).max(0.0) as usize).min(w - 1);
            let yi = (libm::round(sy).max(0.0) as usize).min(h - 1);
            if mask.get(xi, yi) {
                span = Some(match span {
                    None => (x, x),
                    Some((lo, hi)) => (lo.min(x), hi.max(x)),
                });
            }
        }
    }
    span
}

/// Smallest shift with the sign of `drawn` (and at least its magnitude) that
/// leaves the crop free of edge pixels, or `None` past the frame width.
fn negative_shift(span: Option<(i64, i64)>, crop: &Roi, drawn: i64, positive: bool, width: usize) -> Option<i64> {
    let Some((lo, hi)) = span else {
        return Some(drawn);
    };
    let (x0, c) = (crop.x_min as i64, crop.width() as i64);
    let s = if positive {
        drawn.max(x0 + c - lo)
    } else {
        drawn.min(x0 - hi - 1)
    };
    (s.unsigned_abs() <= width as u64).then_some(s)
}

/// Draws the per-copy transforms for a frame with the given edge mask.
///
/// `floor(negative_fraction · copies)` copies, plus one more with probability
/// equal to the fractional part, are forced negative; those whose edge cannot be pushed
/// out of the crop within one frame width are dropped with a warning.
pub fn plan_augmentations(mask: &EdgeMask, spec: &AugmentSpec) -> Result<Vec<AugmentOp>> {
    spec.validate()?;
    let (w, h) = mask.dims();
    let crop = spec.crop_roi(w, h)?;
    let mut rng = rng::seeded(spec.rng_seed);

    let copies = spec.copies_per_frame;
    let expected = spec.negative_fraction * copies as f64;
    let mut n_neg = libm::floor(expected) as usize;
    if rng.random::<f64>() < expected - n_neg as f64 {
        n_neg += 1;
    }
    let n_neg = n_neg.min(copies);
    let mut negative = alloc::vec![false; copies];
    for i in index::sample(&mut rng, copies, n_neg) {
        negative[i] = true;
    }

    let max_shift = spec.max_shift as i64;
    let mut ops = Vec::with_capacity(copies);
    for (copy, &force) in negative.iter().enumerate() {
        let angle = if spec.max_rotation > 0.0 {
            rng.random_range(-spec.max_rotation..=spec.max_rotation)
        } else {
            0.0
        };
        let mut shift = rng.random_range(-max_shift..=max_shift);
        if force {
            let positive = if shift == 0 { rng.random::<bool>() } else { shift > 0 };
            let span = edge_column_span(mask, angle, &crop);
            let chosen = negative_shift(span, &crop, shift, positive, w)
                .or_else(|| negative_shift(span, &crop, -shift, !positive, w));
            match chosen {
                Some(s) => shift = s,
                None => {
                    log::warn!("augment copy {copy}: edge spans every reachable crop, negative skipped");
                    continue;
                }
            }
        }
        ops.push(AugmentOp {
            warp: AffineWarp::new(angle, shift as f64)?,
            crop,
            forced_negative: force,
        });
    }
    Ok(ops)
}

/// Applies [`plan_augmentations`] to an image and its mask. The image is
/// resampled bilinearly, the mask by nearest neighbour.
pub fn augment<P: Sample>(
    img: &Image<P>,
    mask: &EdgeMask,
    spec: &AugmentSpec,
    fill: P,
) -> Result<Vec<AugmentedSample<P>>> {
    img.ensure_same_dims(mask)?;
    plan_augmentations(mask, spec)?
        .into_iter()
        .map(|op| {
            let image = op.apply(img, fill, Interpolation::Bilinear)?;
            let mask = op.apply_mask(mask)?;
            let has_edge = !mask.is_blank();
            Ok(AugmentedSample {
                image,
                mask,
                has_edge,
                op,
            })
        })
        .collect()
}
