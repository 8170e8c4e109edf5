//! Quadrature, root finding and special functions shared by every module.

pub mod quad;
pub mod roots;
pub mod special;

pub use quad::{gauss_kronrod15, integrate, integrate_2d, QuadResult, Quadrature};
pub use roots::{bisect_root, golden_max, golden_min, last_true, first_true};

/// `n` equally spaced points from `lo` to `hi` inclusive.
pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => {
            let step = (hi - lo) / (n - 1) as f64;
            (0..n)
                .map(|i| if i + 1 == n { hi } else { lo + step * i as f64 })
                .collect()
        }
    }
}
