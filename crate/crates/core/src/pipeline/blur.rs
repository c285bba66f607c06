use crate::ingest::BitGrid;
use crate::scalar::Scalar;

use super::FloatImage;

/// Normalized 1-D Gaussian taps for offsets `-r..=r`, `r = ceil(3σ)`.
pub fn gaussian_kernel<T: Scalar>(sigma: T) -> Vec<T> {
    assert!(sigma > T::zero(), "sigma must be positive");
    let radius = (T::from_f64_lossy(3.0) * sigma).ceil().to_usize().unwrap_or(0);
    let two_var = T::from_f64_lossy(2.0) * sigma * sigma;
    let taps: Vec<T> = (0..=2 * radius)
        .map(|i| {
            let d = T::from_usize(i).unwrap() - T::from_usize(radius).unwrap();
            (-(d * d) / two_var).exp()
        })
        .collect();
    let total = taps.iter().fold(T::zero(), |acc, &w| acc + w);
    taps.into_iter().map(|w| w / total).collect()
}

/// Separable Gaussian blur of a binary grid with zero extension at the borders.
///
/// Each output value sums its taps in ascending offset order, so the result
/// at a pixel depends only on its neighbourhood and not on its position.
pub fn gaussian_blur<T: Scalar>(img: &BitGrid, sigma: T) -> FloatImage<T> {
    let kernel = gaussian_kernel(sigma);
    let radius = kernel.len() / 2;
    let (w, h) = (img.width(), img.height());

    let mut rows = FloatImage::new(w, h);
    for y in 0..h {
        for x in 0..w {
            let mut acc = T::zero();
            for (k, &wk) in kernel.iter().enumerate() {
                if let Some(sx) = (x + k).checked_sub(radius).filter(|&sx| sx < w) {
                    if img.get(sx, y) != 0 {
                        acc = acc + wk;
                    }
                }
            }
            rows.set(x, y, acc);
        }
    }

    let mut out = FloatImage::new(w, h);
    for y in 0..h {
        for x in 0..w {
            let mut acc = T::zero();
            for (k, &wk) in kernel.iter().enumerate() {
                if let Some(sy) = (y + k).checked_sub(radius).filter(|&sy| sy < h) {
                    acc = acc + wk * rows.get(x, sy);
                }
            }
            out.set(x, y, acc);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kernel_is_normalized_and_symmetric() {
        let k = gaussian_kernel(1.0f64);
        assert_eq!(k.len(), 7);
        assert!((k.iter().sum::<f64>() - 1.0).abs() < 1e-15);
        for i in 0..3 {
            assert_eq!(k[i], k[6 - i]);
        }
        assert_eq!(gaussian_kernel(0.5f64).len(), 5);
        assert_eq!(gaussian_kernel(1.2f64).len(), 9);
    }

    #[test]
    fn blank_stays_blank() {
        let out = gaussian_blur(&BitGrid::new(128, 128), 1.0f64);
        assert!(out.values().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn impulse_response_is_the_outer_product_kernel() {
        let mut grid = BitGrid::new(32, 32);
        grid.set(10, 20, true);
        let out = gaussian_blur(&grid, 1.0f64);
        let k = gaussian_kernel(1.0f64);
        for y in 0..32 {
            for x in 0..32 {
                let dx = x as isize - 10 + 3;
                let dy = y as isize - 20 + 3;
                let expected = if (0..7).contains(&dx) && (0..7).contains(&dy) {
                    k[dx as usize] * k[dy as usize]
                } else {
                    0.0
                };
                assert!((out.get(x, y) - expected).abs() < 1e-15, "({x},{y})");
            }
        }
    }

    #[test]
    fn border_mass_is_lost_not_reflected() {
        let mut grid = BitGrid::new(16, 16);
        grid.set(0, 0, true);
        let out = gaussian_blur(&grid, 1.0f64);
        let total: f64 = out.values().iter().sum();
        let k = gaussian_kernel(1.0f64);
        let half: f64 = k[3..].iter().sum();
        assert!((total - half * half).abs() < 1e-12);
    }
}
