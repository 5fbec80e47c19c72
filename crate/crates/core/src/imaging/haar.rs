//! Orthonormal nonstandard 2-D Haar transform.
//!
//! Each level applies one averaging/differencing pass along rows and then
//! along columns of the current coarse block, in place (Mallat layout), and
//! recurses on the top-left quarter until it is 1×1. Rectangular sizes keep
//! halving the longer side once the shorter one has reached 1.

use std::f64::consts::FRAC_1_SQRT_2;

use super::Image;
use crate::error::{Error, Result};
use crate::operators::LinearMap;

#[derive(Debug, Clone)]
pub struct HaarTransform {
    height: usize,
    width: usize,
}

impl HaarTransform {
    /// Both sides must be powers of two.
    pub fn new(height: usize, width: usize) -> Result<Self> {
        for (name, side) in [("height", height), ("width", width)] {
            if side == 0 || !side.is_power_of_two() {
                return Err(Error::Shape(format!(
                    "Haar transform needs power-of-two sides, {name} is {side}"
                )));
            }
        }
        Ok(HaarTransform { height, width })
    }

    fn levels(&self) -> Vec<(usize, usize)> {
        let (mut h, mut w) = (self.height, self.width);
        let mut levels = Vec::new();
        while h > 1 || w > 1 {
            levels.push((h, w));
            h = (h / 2).max(1);
            w = (w / 2).max(1);
        }
        levels
    }

    fn analyze(&self, data: &mut [f64]) {
        let mut scratch = vec![0.0; self.height.max(self.width)];
        for (h, w) in self.levels() {
            if w > 1 {
                for r in 0..h {
                    let row = &mut data[r * self.width..r * self.width + w];
                    split_pass(row, &mut scratch[..w], 1);
                }
            }
            if h > 1 {
                for c in 0..w {
                    let col = &mut data[c..];
                    split_pass(col, &mut scratch[..h], self.width);
                }
            }
        }
    }

    fn synthesize(&self, data: &mut [f64]) {
        let mut scratch = vec![0.0; self.height.max(self.width)];
        for (h, w) in self.levels().into_iter().rev() {
            if h > 1 {
                for c in 0..w {
                    let col = &mut data[c..];
                    merge_pass(col, &mut scratch[..h], self.width);
                }
            }
            if w > 1 {
                for r in 0..h {
                    let row = &mut data[r * self.width..r * self.width + w];
                    merge_pass(row, &mut scratch[..w], 1);
                }
            }
        }
    }
}

/// One orthonormal Haar pass over `scratch.len()` samples spaced `stride` apart.
fn split_pass(data: &mut [f64], scratch: &mut [f64], stride: usize) {
    let len = scratch.len();
    let half = len / 2;
    for k in 0..half {
        let a = data[2 * k * stride];
        let b = data[(2 * k + 1) * stride];
        scratch[k] = (a + b) * FRAC_1_SQRT_2;
        scratch[half + k] = (a - b) * FRAC_1_SQRT_2;
    }
    for (k, value) in scratch.iter().enumerate() {
        data[k * stride] = *value;
    }
}

fn merge_pass(data: &mut [f64], scratch: &mut [f64], stride: usize) {
    let len = scratch.len();
    let half = len / 2;
    for k in 0..half {
        let s = data[k * stride];
        let d = data[(half + k) * stride];
        scratch[2 * k] = (s + d) * FRAC_1_SQRT_2;
        scratch[2 * k + 1] = (s - d) * FRAC_1_SQRT_2;
    }
    for (k, value) in scratch.iter().enumerate() {
        data[k * stride] = *value;
    }
}

impl LinearMap for HaarTransform {
    fn dim_in(&self) -> usize {
        self.height * self.width
    }

    fn dim_out(&self) -> usize {
        self.height * self.width
    }

    fn forward(&self, x: &[f64]) -> Vec<f64> {
        let mut out = x.to_vec();
        self.analyze(&mut out);
        out
    }

    fn adjoint(&self, y: &[f64]) -> Vec<f64> {
        let mut out = y.to_vec();
        self.synthesize(&mut out);
        out
    }

    fn norm_bound(&self) -> f64 {
        1.0
    }
}

/// Haar coefficients of every channel, plane after plane.
pub fn haar_forward(img: &Image) -> Result<Vec<f64>> {
    let w = HaarTransform::new(img.height(), img.width())?;
    Ok(img.planes().iter().flat_map(|p| w.forward(p)).collect())
}

/// Inverse of [`haar_forward`] for an image of the given shape.
pub fn haar_adjoint(coeffs: &[f64], height: usize, width: usize, channels: usize) -> Result<Image> {
    let w = HaarTransform::new(height, width)?;
    if coeffs.len() != height * width * channels {
        return Err(Error::Shape(format!(
            "expected {} coefficients, got {}",
            height * width * channels,
            coeffs.len()
        )));
    }
    let planes: Vec<Vec<f64>> = coeffs
        .chunks_exact(height * width)
        .map(|c| w.adjoint(c))
        .collect();
    Image::from_planes(height, width, &planes)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operators::adjoint_mismatch;
    use crate::vector::{dist_sq, norm};
    use rand::{Rng, SeedableRng};
    use rand_xoshiro::SplitMix64;

    #[test]
    fn constant_image_has_single_coarse_coefficient() {
        let c = 0.3;
        let img = Image::filled(4, 4, 1, c).unwrap();
        let coeffs = haar_forward(&img).unwrap();
        assert!((coeffs[0] - 4.0 * c).abs() < 1e-15);
        assert!(coeffs[1..].iter().all(|v| v.abs() < 1e-15));
    }

    #[test]
    fn two_by_two_block() {
        // rows then columns: [[a, b], [c, d]]
        let w = HaarTransform::new(2, 2).unwrap();
        let out = w.forward(&[1.0, 2.0, 3.0, 4.0]);
        let expected = [5.0, -1.0, -2.0, 0.0];
        for (o, e) in out.iter().zip(expected) {
            assert!((o - e).abs() < 1e-14, "{out:?}");
        }
    }

    #[test]
    fn isometry_and_inverse_up_to_256() {
        let mut rng = SplitMix64::seed_from_u64(3);
        for (h, w) in [(1, 1), (2, 1), (1, 8), (4, 4), (8, 32), (64, 16), (256, 256)] {
            let t = HaarTransform::new(h, w).unwrap();
            let x: Vec<f64> = (0..h * w).map(|_| rng.random_range(-1.0..1.0)).collect();
            let c = t.forward(&x);
            assert!((norm(&c) - norm(&x)).abs() <= 1e-12 * (1.0 + norm(&x)));
            assert!(dist_sq(&t.adjoint(&c), &x).sqrt() <= 1e-12 * (1.0 + norm(&x)));
            assert!(adjoint_mismatch(&t, 5, 1) <= 1e-12);
        }
    }

    #[test]
    fn image_round_trip() {
        let img = Image::new(4, 2, 3, (0..24).map(|k| k as f64 / 24.0).collect()).unwrap();
        let coeffs = haar_forward(&img).unwrap();
        let back = haar_adjoint(&coeffs, 4, 2, 3).unwrap();
        for (a, b) in back.data().iter().zip(img.data()) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn non_power_of_two_is_rejected() {
        assert!(HaarTransform::new(6, 8).is_err());
        assert!(haar_forward(&Image::filled(3, 4, 1, 0.0).unwrap()).is_err());
    }
}
