use alloc::vec::Vec;

use crate::error::{Error, Result};

/// Square matching template with zero mean and unit L2 norm.
#[derive(Debug, Clone, PartialEq)]
pub struct Template {
    size: usize,
    data: Vec<f64>,
}

impl Template {
    /// Normalizes a raw row-major `size x size` pattern.
    pub fn from_pattern(size: usize, raw: &[f64]) -> Result<Self> {
        if size == 0 || raw.len() != size * size {
            return Err(Error::InvalidParameter("template pattern must be size x size"));
        }
        let mean = raw.iter().sum::<f64>() / raw.len() as f64;
        let mut data: Vec<f64> = raw.iter().map(|v| v - mean).collect();
        let norm = libm::sqrt(data.iter().map(|v| v * v).sum::<f64>());
        if !(norm > 0.0) {
            return Err(Error::InvalidParameter("template pattern must not be constant"));
        }
        data.iter_mut().for_each(|v| *v /= norm);
        Ok(Self { size, data })
    }

    #[inline]
    pub fn size(&self) -> usize {
        self.size
    }

    #[inline]
    pub fn data(&self) -> &[f64] {
        &self.data
    }

    /// Column offset, within the template, of the feature the template locates.
    /// For the step template this is the boundary between its two halves.
    #[inline]
    pub fn anchor_x(&self) -> f64 {
        self.size as f64 * 0.5 - 0.5
    }
}

/// Vertical step: left half low (near), right half high (far).
pub fn make_step_template(size: usize) -> Result<Template> {
    if size < 4 || !size.is_multiple_of(2) {
        return Err(Error::InvalidParameter("step template size must be even and >= 4"));
    }
    let half = size / 2;
    let raw: Vec<f64> = (0..size * size)
        .map(|i| if i % size < half { -1.0 } else { 1.0 })
        .collect();
    Template::from_pattern(size, &raw)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn size_four_pattern() {
        let t = make_step_template(4).unwrap();
        let v = 1.0 / 4.0;
        for row in t.data().chunks(4) {
            assert_eq!(row, &[-v, -v, v, v]);
        }
        assert_eq!(t.data().iter().sum::<f64>(), 0.0);
    }

    #[test]
    fn default_size_is_normalized() {
        let t = make_step_template(30).unwrap();
        assert_eq!(t.size(), 30);
        assert_eq!(t.data().len(), 900);
        let mean = t.data().iter().sum::<f64>() / 900.0;
        let norm = libm::sqrt(t.data().iter().map(|v| v * v).sum::<f64>());
        assert!(mean.abs() < 1e-9);
        assert!((norm - 1.0).abs() < 1e-9);
    }

    #[test]
    fn rejects_odd_and_tiny() {
        assert!(make_step_template(5).is_err());
        assert!(make_step_template(2).is_err());
        assert!(make_step_template(0).is_err());
    }

    #[test]
    fn constant_pattern_rejected() {
        assert!(Template::from_pattern(2, &[1.0; 4]).is_err());
    }
}
