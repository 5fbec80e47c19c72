//! Separable Gaussian blur with symmetric (half-sample) boundary reflection.
//!
//! With the edge sample duplicated (`x_{-1} = x_0`, `x_N = x_{N-1}`) a
//! symmetric kernel gives a symmetric matrix whose rows sum to one, so the
//! operator is self-adjoint, preserves constants and has norm exactly 1.

use super::Image;
use crate::error::{Error, Result};
use crate::operators::LinearMap;

/// Normalized samples of `exp(−t²/(2σ²))` for `t = −size/2..=size/2`.
pub fn gaussian_kernel_1d(size: usize, sigma: f64) -> Result<Vec<f64>> {
    if size == 0 || size.is_multiple_of(2) {
        return Err(Error::InvalidParameter {
            name: "size",
            reason: format!("kernel size must be odd and positive, got {size}"),
        });
    }
    if !(sigma.is_finite() && sigma > 0.0) {
        return Err(Error::InvalidParameter {
            name: "sigma",
            reason: format!("must be positive, got {sigma}"),
        });
    }
    let radius = (size / 2) as f64;
    let raw: Vec<f64> = (0..size)
        .map(|k| {
            let t = k as f64 - radius;
            (-t * t / (2.0 * sigma * sigma)).exp()
        })
        .collect();
    let total: f64 = raw.iter().sum();
    Ok(raw.into_iter().map(|v| v / total).collect())
}

#[inline]
fn reflect(index: isize, len: usize) -> usize {
    let len = len as isize;
    let r = if index < 0 {
        -index - 1
    } else if index >= len {
        2 * len - 1 - index
    } else {
        index
    };
    r as usize
}

/// `size×size` Gaussian blur on an `height×width` plane.
#[derive(Debug, Clone)]
pub struct GaussianBlur {
    height: usize,
    width: usize,
    kernel: Vec<f64>,
}

impl GaussianBlur {
    pub fn new(height: usize, width: usize, size: usize, sigma: f64) -> Result<Self> {
        let kernel = gaussian_kernel_1d(size, sigma)?;
        let reach = size / 2;
        if height <= reach || width <= reach {
            return Err(Error::Shape(format!(
                "{height}x{width} image is too small for a {size}x{size} kernel (need sides > {reach})"
            )));
        }
        Ok(GaussianBlur {
            height,
            width,
            kernel,
        })
    }

    fn convolve(&self, x: &[f64]) -> Vec<f64> {
        let (m, n) = (self.height, self.width);
        let r = (self.kernel.len() / 2) as isize;
        let mut rows = vec![0.0; m * n];
        for i in 0..m {
            let line = &x[i * n..(i + 1) * n];
            for j in 0..n {
                rows[i * n + j] = self
                    .kernel
                    .iter()
                    .enumerate()
                    .map(|(t, w)| w * line[reflect(j as isize + t as isize - r, n)])
                    .sum();
            }
        }
        let mut out = vec![0.0; m * n];
        for i in 0..m {
            for j in 0..n {
                out[i * n + j] = self
                    .kernel
                    .iter()
                    .enumerate()
                    .map(|(t, w)| w * rows[reflect(i as isize + t as isize - r, m) * n + j])
                    .sum();
            }
        }
        out
    }
}

impl LinearMap for GaussianBlur {
    fn dim_in(&self) -> usize {
        self.height * self.width
    }

    fn dim_out(&self) -> usize {
        self.height * self.width
    }

    fn forward(&self, x: &[f64]) -> Vec<f64> {
        self.convolve(x)
    }

    fn adjoint(&self, y: &[f64]) -> Vec<f64> {
        self.convolve(y)
    }

    fn norm_bound(&self) -> f64 {
        1.0
    }
}

/// Blurs every channel of `img`.
pub fn gaussian_blur(img: &Image, size: usize, sigma: f64) -> Result<Image> {
    let blur = GaussianBlur::new(img.height(), img.width(), size, sigma)?;
    let planes: Vec<Vec<f64>> = img.planes().iter().map(|p| blur.forward(p)).collect();
    Image::from_planes(img.height(), img.width(), &planes)
}
