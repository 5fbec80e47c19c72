//! Synthetic test images and seeded degradation.

use rand::{Rng, SeedableRng};
use rand_xoshiro::SplitMix64;

use super::{gaussian_blur, Image};
use crate::error::Result;

/// Standard normal samples by Box–Muller on a SplitMix64 stream.
pub struct GaussianNoise {
    rng: SplitMix64,
    spare: Option<f64>,
}

impl GaussianNoise {
    pub fn new(seed: u64) -> Self {
        GaussianNoise {
            rng: SplitMix64::seed_from_u64(seed),
            spare: None,
        }
    }

    pub fn sample(&mut self) -> f64 {
        if let Some(v) = self.spare.take() {
            return v;
        }
        // u1 in (0, 1] keeps the logarithm finite.
        let u1 = 1.0 - self.rng.random::<f64>();
        let u2 = self.rng.random::<f64>();
        let radius = (-2.0 * u1.ln()).sqrt();
        let angle = std::f64::consts::TAU * u2;
        self.spare = Some(radius * angle.sin());
        radius * angle.cos()
    }
}

/// Adds zero-mean Gaussian noise of standard deviation `sigma`.
pub fn add_gaussian_noise(img: &Image, sigma: f64, seed: u64) -> Result<Image> {
    let mut noise = GaussianNoise::new(seed);
    let data = img.data().iter().map(|v| v + sigma * noise.sample()).collect();
    Image::new(img.height(), img.width(), img.channels(), data)
}

/// Blur followed by additive Gaussian noise.
pub fn degrade(truth: &Image, size: usize, blur_sigma: f64, noise_sigma: f64, seed: u64) -> Result<Image> {
    add_gaussian_noise(&gaussian_blur(truth, size, blur_sigma)?, noise_sigma, seed)
}

/// Piecewise-constant test scene: background, two rectangles, a disc and a
/// thin bar, all inside `[0, 1]`.
pub fn synthetic_phantom(height: usize, width: usize) -> Result<Image> {
    let mut data = Vec::with_capacity(height * width);
    for i in 0..height {
        for j in 0..width {
            let y = (i as f64 + 0.5) / height as f64;
            let x = (j as f64 + 0.5) / width as f64;
            let mut value = 0.1;
            if (0.15..0.55).contains(&y) && (0.1..0.45).contains(&x) {
                value = 0.8;
            }
            if (0.6..0.9).contains(&y) && (0.2..0.7).contains(&x) {
                value = 0.45;
            }
            let (dy, dx) = (y - 0.35, x - 0.7);
            if dy * dy + dx * dx < 0.18 * 0.18 {
                value = 0.95;
            }
            if (0.05..0.95).contains(&y) && (0.86..0.9).contains(&x) {
                value = 0.6;
            }
            data.push(value);
        }
    }
    Image::gray(height, width, data)
}
