//! Image operators and the TV/wavelet deblurring benchmark.
//!
//! Images are flattened row-major with interleaved channels. Every linear
//! operator here acts on one channel plane at a time.

mod blur;
mod deblur;
mod haar;
mod synth;
mod tv;

pub use blur::{gaussian_blur, gaussian_kernel_1d, GaussianBlur};
pub use deblur::{
    deblur_objective, deblur_problem, deblur_run, deblur_run_threaded, isnr, DeblurOutput,
    DeblurParams, DeblurRecord, BOX_TOLERANCE,
};
pub use haar::{haar_adjoint, haar_forward, HaarTransform};
pub use synth::{add_gaussian_noise, degrade, synthetic_phantom, GaussianNoise};
pub use tv::{tv_gradient, tv_gradient_adjoint, TvGradient};

use crate::error::{Error, Result};

/// A grid of intensities, nominally in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Image {
    height: usize,
    width: usize,
    channels: usize,
    data: Vec<f64>,
}

impl Image {
    pub fn new(height: usize, width: usize, channels: usize, data: Vec<f64>) -> Result<Self> {
        if height == 0 || width == 0 {
            return Err(Error::EmptyDimension("image"));
        }
        if channels != 1 && channels != 3 {
            return Err(Error::Shape(format!(
                "images have 1 or 3 channels, got {channels}"
            )));
        }
        if data.len() != height * width * channels {
            return Err(Error::Shape(format!(
                "{height}x{width}x{channels} image needs {} samples, got {}",
                height * width * channels,
                data.len()
            )));
        }
        if let Some(bad) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::Shape(format!("non-finite sample at index {bad}")));
        }
        Ok(Image {
            height,
            width,
            channels,
            data,
        })
    }

    /// Single-channel image from a row-major plane.
    pub fn gray(height: usize, width: usize, data: Vec<f64>) -> Result<Self> {
        Self::new(height, width, 1, data)
    }

    pub fn filled(height: usize, width: usize, channels: usize, value: f64) -> Result<Self> {
        Self::new(height, width, channels, vec![value; height * width * channels])
    }

    /// Interleaves equally sized planes into one image.
    pub fn from_planes(height: usize, width: usize, planes: &[Vec<f64>]) -> Result<Self> {
        let channels = planes.len();
        let pixels = height * width;
        if planes.iter().any(|p| p.len() != pixels) {
            return Err(Error::Shape("planes must all have height*width samples".into()));
        }
        let mut data = Vec::with_capacity(pixels * channels);
        for k in 0..pixels {
            data.extend(planes.iter().map(|p| p[k]));
        }
        Self::new(height, width, channels, data)
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn pixels(&self) -> usize {
        self.height * self.width
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    /// The row-major samples of one channel.
    pub fn plane(&self, channel: usize) -> Vec<f64> {
        assert!(channel < self.channels, "channel {channel} out of range");
        self.data
            .iter()
            .skip(channel)
            .step_by(self.channels)
            .copied()
            .collect()
    }

    pub fn planes(&self) -> Vec<Vec<f64>> {
        (0..self.channels).map(|c| self.plane(c)).collect()
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::new(
            self.height,
            self.width,
            self.channels,
            self.data.iter().map(|&v| f(v)).collect(),
        )
    }

    pub(crate) fn same_shape(&self, other: &Image) -> Result<()> {
        if (self.height, self.width, self.channels) == (other.height, other.width, other.channels)
        {
            Ok(())
        } else {
            Err(Error::Shape(format!(
                "shape mismatch: {}x{}x{} vs {}x{}x{}",
                self.height, self.width, self.channels, other.height, other.width, other.channels
            )))
        }
    }
}
