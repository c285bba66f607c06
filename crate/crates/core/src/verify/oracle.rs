//! Reference computations used only to check the production code paths.
//! Each one takes the most direct route available, independent of the
//! optimized implementation it checks.

use nalgebra::DMatrix;

use crate::ingest::BitGrid;
use crate::pipeline::{cubic_weight, gaussian_kernel, FloatImage, CATMULL_ROM_A};

/// Dense 2-D convolution with the outer-product Gaussian, zero outside the grid.
pub fn dense_blur(grid: &BitGrid, sigma: f64) -> Vec<f64> {
    let k = gaussian_kernel(sigma);
    let r = (k.len() / 2) as isize;
    let (w, h) = (grid.width() as isize, grid.height() as isize);
    let mut out = vec![0.0; (w * h) as usize];
    for y in 0..h {
        for x in 0..w {
            let mut acc = 0.0;
            for dy in -r..=r {
                for dx in -r..=r {
                    let (sx, sy) = (x + dx, y + dy);
                    if sx >= 0 && sy >= 0 && sx < w && sy < h && grid.get(sx as usize, sy as usize) == 1 {
                        acc += k[(dx + r) as usize] * k[(dy + r) as usize];
                    }
                }
            }
            out[(y * w + x) as usize] = acc;
        }
    }
    out
}

/// Evaluates the bicubic resampling formula directly for every output
/// pixel as a 4×4 weighted sum.
pub fn direct_bicubic(img: &FloatImage<f64>, target: usize) -> Vec<f64> {
    let side = img.width();
    let map = |i: usize| (i as f64 + 0.5) * side as f64 / target as f64 - 0.5;
    let clamp = |v: isize| v.clamp(0, side as isize - 1) as usize;
    let mut out = Vec::with_capacity(target * target);
    for oy in 0..target {
        for ox in 0..target {
            let (sx, sy) = (map(ox), map(oy));
            let (bx, by) = (sx.floor() as isize, sy.floor() as isize);
            let mut acc = 0.0;
            for m in -1..=2isize {
                for n in -1..=2isize {
                    let wx = cubic_weight(sx - (bx + n) as f64, CATMULL_ROM_A);
                    let wy = cubic_weight(sy - (by + m) as f64, CATMULL_ROM_A);
                    acc += wx * wy * img.get(clamp(bx + n), clamp(by + m));
                }
            }
            out.push(acc.max(0.0));
        }
    }
    out
}

/// Batch ridge solution of `(H Hᵀ + λI) Wᵀ = H Yᵀ` by Cholesky factorization.
/// `features[i]` and `targets[i]` are the i-th sample. Returns `W` as
/// `classes × dim` row-major.
pub fn ridge_weights(features: &[Vec<f64>], targets: &[Vec<f64>], ridge: f64) -> Vec<f64> {
    let dim = features[0].len();
    let classes = targets[0].len();
    let h = DMatrix::from_fn(dim, features.len(), |r, c| features[c][r]);
    let y = DMatrix::from_fn(classes, targets.len(), |r, c| targets[c][r]);
    let gram = &h * h.transpose() + DMatrix::identity(dim, dim) * ridge;
    let rhs = &h * y.transpose();
    let wt = gram
        .cholesky()
        .expect("regularized Gram matrix is positive definite")
        .solve(&rhs);
    let w = wt.transpose();
    (0..classes)
        .flat_map(|r| (0..dim).map(move |c| (r, c)))
        .map(|(r, c)| w[(r, c)])
        .collect()
}

/// `(H Hᵀ + λI)⁻¹`, row-major.
pub fn inverse_correlation(features: &[Vec<f64>], ridge: f64) -> Vec<f64> {
    let dim = features[0].len();
    let h = DMatrix::from_fn(dim, features.len(), |r, c| features[c][r]);
    let gram = &h * h.transpose() + DMatrix::identity(dim, dim) * ridge;
    let inv = gram.try_inverse().expect("regularized Gram matrix is invertible");
    (0..dim)
        .flat_map(|r| (0..dim).map(move |c| (r, c)))
        .map(|(r, c)| inv[(r, c)])
        .collect()
}

/// `‖a − b‖_F / ‖b‖_F`.
pub fn relative_frobenius(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    let diff: f64 = a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum();
    let norm: f64 = b.iter().map(|y| y * y).sum();
    (diff / norm).sqrt()
}

/// True when every leading principal minor test passes (Cholesky succeeds).
pub fn is_positive_definite(matrix: &[f64], dim: usize) -> bool {
    let m = DMatrix::from_row_slice(dim, dim, matrix);
    let sym = (&m + m.transpose()) * 0.5;
    sym.cholesky().is_some()
}
