use furrow_core::classical::{
    between_class_variance, gaussian_blur, gaussian_kernel, histogram, hysteresis, otsu_canny_pipeline, otsu_threshold,
    OtsuCannyParams,
};
use furrow_core::synth::{render, CorruptionSpec, SceneSpec};
use furrow_core::{CameraModel, GrayImage};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_gray(w: usize, h: usize, seed: u64) -> GrayImage {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    GrayImage::from_fn(w, h, |_, _| rng.random_range(0.0..255.0)).unwrap()
}

fn reflect(i: isize, n: usize) -> usize {
    let n = n as isize;
    let mut i = i;
    while i < 0 || i >= n {
        if i < 0 {
            i = -i;
        }
        if i >= n {
            i = 2 * (n - 1) - i;
        }
    }
    i as usize
}

/// Full 2-D correlation with the outer-product kernel, one output pixel at a time.
fn dense_blur(img: &GrayImage, size: usize, sigma: f64) -> GrayImage {
    let k = gaussian_kernel(size, sigma).unwrap();
    let r = (size / 2) as isize;
    let (w, h) = img.dims();
    GrayImage::from_fn(w, h, |x, y| {
        let mut acc = 0.0;
        for (j, kj) in k.iter().enumerate() {
            for (i, ki) in k.iter().enumerate() {
                let sx = reflect(x as isize + i as isize - r, w);
                let sy = reflect(y as isize + j as isize - r, h);
                acc += ki * kj * img.get(sx, sy);
            }
        }
        acc
    })
    .unwrap()
}

#[test]
fn separable_blur_equals_dense_convolution() {
    let img = random_gray(32, 32, 7);
    for (size, sigma) in [(11, 22.0), (5, 1.0), (3, 0.5), (9, 2.5)] {
        let sep = gaussian_blur(&img, size, sigma).unwrap();
        let dense = dense_blur(&img, size, sigma);
        for (a, b) in sep.data().iter().zip(dense.data()) {
            assert!((a - b).abs() < 1e-6, "size {size}: {a} vs {b}");
        }
    }
}

/// Between-class variance recomputed from the pixel list for threshold `t`.
fn direct_variance(values: &[u8], t: usize) -> f64 {
    let (lo, hi): (Vec<f64>, Vec<f64>) = {
        let lo = values
            .iter()
            .filter(|&&v| (v as usize) <= t)
            .map(|&v| v as f64)
            .collect();
        let hi = values
            .iter()
            .filter(|&&v| (v as usize) > t)
            .map(|&v| v as f64)
            .collect();
        (lo, hi)
    };
    if lo.is_empty() || hi.is_empty() {
        return 0.0;
    }
    let n = values.len() as f64;
    let m0 = lo.iter().sum::<f64>() / lo.len() as f64;
    let m1 = hi.iter().sum::<f64>() / hi.len() as f64;
    (lo.len() as f64 / n) * (hi.len() as f64 / n) * (m0 - m1) * (m0 - m1)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn otsu_matches_exhaustive_scan(seed in any::<u64>(), lo in 0u8..128, span in 1u8..128) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let values: Vec<u8> = (0..64 * 64).map(|_| lo + rng.random_range(0..=span)).collect();
        let img = GrayImage::from_fn(64, 64, |x, y| values[y * 64 + x] as f64).unwrap();

        let scan: Vec<f64> = (0..256).map(|t| direct_variance(&values, t)).collect();
        let best = scan.iter().cloned().fold(f64::MIN, f64::max);
        // the smallest threshold within rounding of the maximum
        let oracle = scan.iter().position(|&v| v >= best - 1e-9 * best.max(1.0)).unwrap();

        let fast = between_class_variance(&histogram(&img));
        for t in 0..256 {
            prop_assert!((fast[t] - scan[t]).abs() <= 1e-9 * scan[t].max(1.0));
        }
        prop_assert_eq!(otsu_threshold(&img) as usize, oracle);
    }
}

/// Keeps the 8-connected components of `{v > 0, v >= low}` that contain a pixel `>= high`.
fn components_oracle(img: &GrayImage, low: f64, high: f64) -> Vec<bool> {
    let (w, h) = img.dims();
    let weak: Vec<bool> = img.data().iter().map(|&v| v > 0.0 && v >= low).collect();
    let mut label = vec![usize::MAX; w * h];
    let mut strong_label = Vec::new();
    let mut next = 0;
    for start in 0..w * h {
        if !weak[start] || label[start] != usize::MAX {
            continue;
        }
        let mut queue = std::collections::VecDeque::from([start]);
        label[start] = next;
        let mut has_strong = false;
        while let Some(i) = queue.pop_front() {
            has_strong |= img.data()[i] >= high;
            let (x, y) = ((i % w) as isize, (i / w) as isize);
            for dy in -1..=1 {
                for dx in -1..=1 {
                    let (nx, ny) = (x + dx, y + dy);
                    if nx < 0 || ny < 0 || nx >= w as isize || ny >= h as isize {
                        continue;
                    }
                    let j = ny as usize * w + nx as usize;
                    if weak[j] && label[j] == usize::MAX {
                        label[j] = next;
                        queue.push_back(j);
                    }
                }
            }
        }
        strong_label.push(has_strong);
        next += 1;
    }
    label.iter().map(|&l| l != usize::MAX && strong_label[l]).collect()
}

#[test]
fn hysteresis_crafted_field_matches_components() {
    let mut field = GrayImage::filled(16, 16, 0.0).unwrap();
    // strong segment on row 3, a weak tail continuing diagonally from its end
    for x in 2..8 {
        field.set(x, 3, 100.0);
    }
    for k in 1..5 {
        field.set(7 + k, 3 + k, 40.0);
    }
    // isolated weak segment
    for y in 10..15 {
        field.set(3, y, 40.0);
    }
    // sub-threshold pixel bridging nothing
    field.set(12, 12, 10.0);

    let mask = hysteresis(&field, 30.0, 80.0);
    let oracle = components_oracle(&field, 30.0, 80.0);
    assert_eq!(mask.data(), &oracle[..]);
    assert!(mask.get(11, 7), "weak tail touching the strong segment survives");
    assert!(!mask.get(3, 12), "isolated weak segment is dropped");
    assert!(!mask.get(12, 12));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn hysteresis_matches_components(seed in any::<u64>(), low in 1.0f64..50.0, gap in 0.0f64..50.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let field = GrayImage::from_fn(16, 16, |_, _| {
            if rng.random_bool(0.45) { rng.random_range(0.0..100.0) } else { 0.0 }
        }).unwrap();
        let high = low + gap;
        let mask = hysteresis(&field, low, high);
        prop_assert_eq!(mask.data(), &components_oracle(&field, low, high)[..]);
    }
}

#[test]
fn canny_finds_rendered_soil_boundary() {
    let camera = CameraModel::defaults();
    for (case, scene) in [SceneSpec::default(), SceneSpec::random(3), SceneSpec::random(11)]
        .into_iter()
        .enumerate()
    {
        let r = render(&camera, &scene, &CorruptionSpec::default()).unwrap();
        let pred = otsu_canny_pipeline(&r.rgb, &OtsuCannyParams::default()).unwrap();
        let gt = r.ground_truth.edge_pixels();
        assert!(!gt.is_empty());
        let hits = gt
            .iter()
            .filter(|&&(x, y)| {
                (-3i64..=3).any(|dy| {
                    (-3i64..=3).any(|dx| {
                        dx * dx + dy * dy <= 9
                            && pred.get_checked(x as isize + dx as isize, y as isize + dy as isize) == Some(true)
                    })
                })
            })
            .count();
        let recall = hits as f64 / gt.len() as f64;
        assert!(recall >= 0.8, "scene {case}: {recall:.3} of ground-truth pixels found");
    }
}
