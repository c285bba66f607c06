use crate::scalar::Scalar;

use super::FloatImage;

/// Keys cubic convolution parameter for Catmull-Rom.
pub const CATMULL_ROM_A: f64 = -0.5;

/// The Keys cubic kernel with parameter `a`.
pub fn cubic_weight<T: Scalar>(x: T, a: T) -> T {
    let one = T::one();
    let two = T::from_f64_lossy(2.0);
    let three = T::from_f64_lossy(3.0);
    let x = x.abs();
    if x <= one {
        ((a + two) * x - (a + three)) * x * x + one
    } else if x < two {
        let five = T::from_f64_lossy(5.0);
        let eight = T::from_f64_lossy(8.0);
        let four = T::from_f64_lossy(4.0);
        ((a * x - five * a) * x + eight * a) * x - four * a
    } else {
        T::zero()
    }
}

/// Source taps and weights for one output coordinate: pixel-centre aligned,
/// four taps with indices clamped to the source.
pub(crate) fn taps<T: Scalar>(i: usize, src: usize, dst: usize) -> [(usize, T); 4] {
    let half = T::from_f64_lossy(0.5);
    let scale = T::from_usize(src).unwrap() / T::from_usize(dst).unwrap();
    let pos = (T::from_usize(i).unwrap() + half) * scale - half;
    let base = pos.floor();
    let t = pos - base;
    let base = base.to_isize().unwrap();
    let a = T::from_f64_lossy(CATMULL_ROM_A);
    let last = src as isize - 1;
    let mut out = [(0usize, T::zero()); 4];
    for (j, slot) in out.iter_mut().enumerate() {
        let offset = j as isize - 1;
        let idx = (base + offset).clamp(0, last) as usize;
        let dist = t - T::from_isize(offset).unwrap();
        *slot = (idx, cubic_weight(dist, a));
    }
    out
}

/// Catmull-Rom bicubic resampling of a square image to `target`×`target`,
/// rows first then columns, with negative overshoot clamped to zero.
pub fn downsample_bicubic<T: Scalar>(img: &FloatImage<T>, target: usize) -> FloatImage<T> {
    assert_eq!(img.width(), img.height(), "bicubic resampling expects a square image");
    assert!(target >= 1, "target side must be positive");
    let side = img.width();
    let col_taps: Vec<_> = (0..target).map(|i| taps::<T>(i, side, target)).collect();

    let mut horizontal = FloatImage::new(target, side);
    for y in 0..side {
        for (x, tx) in col_taps.iter().enumerate() {
            let v = tx
                .iter()
                .fold(T::zero(), |acc, &(sx, w)| acc + w * img.get(sx, y));
            horizontal.set(x, y, v);
        }
    }

    let mut out = FloatImage::new(target, target);
    for (y, ty) in col_taps.iter().enumerate() {
        for x in 0..target {
            let v = ty
                .iter()
                .fold(T::zero(), |acc, &(sy, w)| acc + w * horizontal.get(x, sy));
            out.set(x, y, v.max(T::zero()));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kernel_interpolates() {
        let a = CATMULL_ROM_A;
        assert_eq!(cubic_weight(0.0, a), 1.0);
        assert_eq!(cubic_weight(1.0, a), 0.0);
        assert_eq!(cubic_weight(2.0, a), 0.0);
        assert_eq!(cubic_weight(-1.0, a), 0.0);
        // partition of unity at an arbitrary phase
        let t = 0.3;
        let s: f64 = (-1..3).map(|o| cubic_weight(t - o as f64, a)).sum();
        assert!((s - 1.0).abs() < 1e-15);
        assert!((cubic_weight(0.5, a) - 0.5625).abs() < 1e-15);
        assert!((cubic_weight(1.5, a) + 0.0625).abs() < 1e-15);
    }

    #[test]
    fn identity_scale() {
        let img = FloatImage::from_fn(28, 28, |x, y| ((x * 31 + y * 17) % 13) as f64 / 7.0);
        let out = downsample_bicubic(&img, 28);
        for (a, b) in img.values().iter().zip(out.values()) {
            assert!((a - b).abs() <= 1e-9);
        }
    }

    #[test]
    fn constant_stays_constant() {
        let img = FloatImage::from_fn(100, 100, |_, _| 0.37f64);
        let out = downsample_bicubic(&img, 28);
        assert!(out.values().iter().all(|&v| (v - 0.37).abs() < 1e-12));
    }

    #[test]
    fn overshoot_is_clamped() {
        // a sharp step rings negative next to the edge
        let img = FloatImage::from_fn(8, 8, |x, _| if x >= 4 { 1.0f64 } else { 0.0 });
        let out = downsample_bicubic(&img, 20);
        assert!(out.values().iter().all(|&v| v >= 0.0));
        assert!(out.values().iter().any(|&v| v > 1.0));
    }
}
