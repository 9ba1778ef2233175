use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::image::GrayImage;

/// Sampled Gaussian normalized to unit sum.
pub fn gaussian_kernel(size: usize, sigma: f64) -> Result<Vec<f64>> {
    if size == 0 || size.is_multiple_of(2) {
        return Err(Error::InvalidParameter("gaussian kernel size must be odd"));
    }
    if !(sigma > 0.0) {
        return Err(Error::InvalidParameter("gaussian sigma must be positive"));
    }
    let r = (size / 2) as f64;
    let mut k: Vec<f64> = (0..size)
        .map(|i| {
            let d = i as f64 - r;
            libm::exp(-d * d / (2.0 * sigma * sigma))
        })
        .collect();
    let sum: f64 = k.iter().sum();
    k.iter_mut().for_each(|w| *w /= sum);
    Ok(k)
}

/// Mirror index without repeating the border sample (`gfedcb|abcdefgh|gfedcba`).
#[inline]
pub(crate) fn reflect101(i: isize, n: usize) -> usize {
    if n == 1 {
        return 0;
    }
    let period = 2 * (n as isize - 1);
    let mut j = i.rem_euclid(period);
    if j >= n as isize {
        j = period - j;
    }
    j as usize
}

/// 1-D correlation along rows (`horizontal`) or columns with reflected borders.
pub(crate) fn correlate_1d(img: &GrayImage, kernel: &[f64], horizontal: bool) -> GrayImage {
    let (w, h) = img.dims();
    let r = (kernel.len() / 2) as isize;
    let src = img.data();
    let mut out = vec![0.0; w * h];
    for y in 0..h {
        for x in 0..w {
            let mut acc = 0.0;
            for (k, &wk) in kernel.iter().enumerate() {
                let off = k as isize - r;
                let v = if horizontal {
                    src[y * w + reflect101(x as isize + off, w)]
                } else {
                    src[reflect101(y as isize + off, h) * w + x]
                };
                acc += wk * v;
            }
            out[y * w + x] = acc;
        }
    }
    GrayImage::new(w, h, out).expect("same dims")
}

/// Separable Gaussian blur with reflected borders.
pub fn gaussian_blur(img: &GrayImage, kernel_size: usize, sigma: f64) -> Result<GrayImage> {
    let k = gaussian_kernel(kernel_size, sigma)?;
    Ok(correlate_1d(&correlate_1d(img, &k, true), &k, false))
}
