use crate::image::GrayImage;

/// 256-bin histogram of gray values rounded and clamped to `[0, 255]`.
pub fn histogram(img: &GrayImage) -> [u64; 256] {
    let mut hist = [0u64; 256];
    for &v in img.data() {
        let bin = if v.is_nan() {
            0
        } else {
            libm::round(v).clamp(0.0, 255.0) as usize
        };
        hist[bin] += 1;
    }
    hist
}

/// Between-class variance for every threshold `t`; class 0 holds bins `<= t`.
pub fn between_class_variance(hist: &[u64; 256]) -> [f64; 256] {
    let total: u64 = hist.iter().sum();
    let total_sum: f64 = hist.iter().enumerate().map(|(i, &c)| i as f64 * c as f64).sum();
    let n = total as f64;
    let mut out = [0.0; 256];
    let (mut w0, mut sum0) = (0u64, 0.0f64);
    for t in 0..256 {
        w0 += hist[t];
        sum0 += t as f64 * hist[t] as f64;
        let w1 = total - w0;
        if w0 == 0 || w1 == 0 {
            continue;
        }
        let mu0 = sum0 / w0 as f64;
        let mu1 = (total_sum - sum0) / w1 as f64;
        let d = mu0 - mu1;
        out[t] = (w0 as f64 / n) * (w1 as f64 / n) * d * d;
    }
    out
}

/// Otsu threshold on the 256-bin histogram; the smallest maximizer wins.
///
/// An image occupying a single bin has zero between-class variance everywhere
/// and returns that bin's value.
pub fn otsu_threshold(img: &GrayImage) -> f64 {
    let hist = histogram(img);
    let var = between_class_variance(&hist);
    let mut best_t = 0usize;
    let mut best = 0.0f64;
    for (t, &v) in var.iter().enumerate() {
        if v > best {
            best = v;
            best_t = t;
        }
    }
    if best == 0.0 {
        let bin = hist.iter().position(|&c| c > 0).unwrap_or(0);
        return bin as f64;
    }
    best_t as f64
}
