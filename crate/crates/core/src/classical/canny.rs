use alloc::vec;
use alloc::vec::Vec;

use super::blur::correlate_1d;
use crate::error::{Error, Result};
use crate::image::{EdgeMask, GrayImage, Image};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CannyParams {
    pub low_threshold: f64,
    pub high_threshold: f64,
    pub sobel_aperture: usize,
}

impl CannyParams {
    pub fn new(low_threshold: f64, high_threshold: f64, sobel_aperture: usize) -> Result<Self> {
        let p = Self {
            low_threshold,
            high_threshold,
            sobel_aperture,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0 <= self.low_threshold && self.low_threshold <= self.high_threshold) {
            return Err(Error::InvalidParameter(
                "canny thresholds must satisfy 0 <= low <= high",
            ));
        }
        if !matches!(self.sobel_aperture, 3 | 5 | 7) {
            return Err(Error::InvalidParameter("sobel aperture must be 3, 5 or 7"));
        }
        Ok(())
    }
}

/// Gradient orientation quantized to the four neighbour axes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    /// Gradient along x; compare left/right.
    Deg0,
    /// Gradient along (1, 1) in image coordinates.
    Deg45,
    /// Gradient along y; compare up/down.
    Deg90,
    /// Gradient along (1, -1) in image coordinates.
    Deg135,
}

impl Direction {
    pub fn from_gradient(gx: f64, gy: f64) -> Self {
        // tan(22.5°) and tan(67.5°)
        const T1: f64 = 0.414_213_562_373_095_1;
        const T2: f64 = 2.414_213_562_373_095;
        let (ax, ay) = (gx.abs(), gy.abs());
        if ay <= T1 * ax {
            Direction::Deg0
        } else if ay >= T2 * ax {
            Direction::Deg90
        } else if (gx > 0.0) == (gy > 0.0) {
            Direction::Deg45
        } else {
            Direction::Deg135
        }
    }

    #[inline]
    pub fn offset(self) -> (isize, isize) {
        match self {
            Direction::Deg0 => (1, 0),
            Direction::Deg45 => (1, 1),
            Direction::Deg90 => (0, 1),
            Direction::Deg135 => (1, -1),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Gradients {
    pub gx: GrayImage,
    pub gy: GrayImage,
    pub magnitude: GrayImage,
    pub direction: Image<Direction>,
}

fn binomial_row(n: usize) -> Vec<f64> {
    let mut row = vec![1.0];
    for _ in 0..n {
        let mut next = vec![1.0; row.len() + 1];
        for i in 1..row.len() {
            next[i] = row[i - 1] + row[i];
        }
        row = next;
    }
    row
}

/// Smoothing and derivative taps of the unnormalized Sobel operator.
pub(crate) fn sobel_kernels(aperture: usize) -> (Vec<f64>, Vec<f64>) {
    let smooth = binomial_row(aperture - 1);
    let base = binomial_row(aperture - 3);
    let mut deriv = vec![0.0; aperture];
    for (i, &b) in base.iter().enumerate() {
        deriv[i] -= b;
        deriv[i + 2] += b;
    }
    (smooth, deriv)
}

/// Sobel gradients with reflected borders and L2 magnitude.
pub fn sobel_gradients(img: &GrayImage, aperture: usize) -> Result<Gradients> {
    if !matches!(aperture, 3 | 5 | 7) {
        return Err(Error::InvalidParameter("sobel aperture must be 3, 5 or 7"));
    }
    let (smooth, deriv) = sobel_kernels(aperture);
    let gx = correlate_1d(&correlate_1d(img, &deriv, true), &smooth, false);
    let gy = correlate_1d(&correlate_1d(img, &smooth, true), &deriv, false);
    let mut mag = Vec::with_capacity(gx.data().len());
    let mut dir = Vec::with_capacity(gx.data().len());
    for (&a, &b) in gx.data().iter().zip(gy.data()) {
        mag.push(libm::sqrt(a * a + b * b));
        dir.push(Direction::from_gradient(a, b));
    }
    let (w, h) = img.dims();
    Ok(Gradients {
        gx,
        gy,
        magnitude: GrayImage::new(w, h, mag)?,
        direction: Image::new(w, h, dir)?,
    })
}

/// Keeps pixels that are maximal along their quantized gradient direction.
///
/// A pixel survives when its magnitude is positive, `>=` the neighbour behind
/// it and `>` the neighbour ahead, so two-pixel plateaus collapse to one pixel.
/// Suppressed pixels are 0 in the output.
pub fn non_max_suppression(grad: &Gradients) -> GrayImage {
    let mag = &grad.magnitude;
    let (w, h) = mag.dims();
    let at = |x: isize, y: isize| mag.get_checked(x, y).unwrap_or(0.0);
    let mut out = vec![0.0; w * h];
    for y in 0..h {
        for x in 0..w {
            let m = mag.get(x, y);
            if !(m > 0.0) {
                continue;
            }
            let (dx, dy) = grad.direction.get(x, y).offset();
            let (xi, yi) = (x as isize, y as isize);
            if m >= at(xi - dx, yi - dy) && m > at(xi + dx, yi + dy) {
                out[y * w + x] = m;
            }
        }
    }
    GrayImage::new(w, h, out).expect("same dims")
}

/// Double-threshold hysteresis on a suppressed magnitude map.
///
/// Pixels `>= high` seed edges; pixels `>= low` (and positive) join when
/// 8-connected to a seed through other such pixels.
pub fn hysteresis(suppressed: &GrayImage, low: f64, high: f64) -> EdgeMask {
    let (w, h) = suppressed.dims();
    let data = suppressed.data();
    let weak = |i: usize| data[i] > 0.0 && data[i] >= low;
    let mut edge = vec![false; w * h];
    let mut stack = Vec::new();
    for i in 0..w * h {
        if weak(i) && data[i] >= high && !edge[i] {
            edge[i] = true;
            stack.push(i);
            while let Some(j) = stack.pop() {
                let (x, y) = ((j % w) as isize, (j / w) as isize);
                for dy in -1..=1isize {
                    for dx in -1..=1isize {
                        let (nx, ny) = (x + dx, y + dy);
                        if nx < 0 || ny < 0 || nx as usize >= w || ny as usize >= h {
                            continue;
                        }
                        let k = ny as usize * w + nx as usize;
                        if !edge[k] && weak(k) {
                            edge[k] = true;
                            stack.push(k);
                        }
                    }
                }
            }
        }
    }
    EdgeMask::new(w, h, edge).expect("same dims")
}

/// Sobel → non-maximum suppression → hysteresis.
pub fn canny(img: &GrayImage, params: &CannyParams) -> EdgeMask {
    let grad = sobel_gradients(img, params.sobel_aperture).expect("aperture validated by CannyParams");
    hysteresis(&non_max_suppression(&grad), params.low_threshold, params.high_threshold)
}
