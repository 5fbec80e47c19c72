//! Scaled forward-difference gradient used by the isotropic TV term.

use crate::error::{Error, Result};
use crate::operators::LinearMap;

/// `x ↦ (p, q)` with
///
/// ```text
/// p_{i,j} = scale·(x_{i+1,j} − x_{i,j})   for i < M−1, else 0
/// q_{i,j} = scale·(x_{i,j+1} − x_{i,j})   for j < N−1, else 0
/// ```
///
/// The output is laid out `[p..., q...]`. `‖·‖ ≤ √8·|scale|`.
#[derive(Debug, Clone)]
pub struct TvGradient {
    height: usize,
    width: usize,
    scale: f64,
}

impl TvGradient {
    pub fn new(height: usize, width: usize, scale: f64) -> Result<Self> {
        if height == 0 || width == 0 {
            return Err(Error::EmptyDimension("gradient grid"));
        }
        if !(scale.is_finite() && scale > 0.0) {
            return Err(Error::InvalidParameter {
                name: "scale",
                reason: format!("must be positive, got {scale}"),
            });
        }
        Ok(TvGradient {
            height,
            width,
            scale,
        })
    }

    pub fn pixels(&self) -> usize {
        self.height * self.width
    }
}

impl LinearMap for TvGradient {
    fn dim_in(&self) -> usize {
        self.pixels()
    }

    fn dim_out(&self) -> usize {
        2 * self.pixels()
    }

    fn forward(&self, x: &[f64]) -> Vec<f64> {
        let (m, n, s) = (self.height, self.width, self.scale);
        let mut out = vec![0.0; 2 * m * n];
        let (p, q) = out.split_at_mut(m * n);
        for i in 0..m {
            for j in 0..n {
                let k = i * n + j;
                if i + 1 < m {
                    p[k] = s * (x[k + n] - x[k]);
                }
                if j + 1 < n {
                    q[k] = s * (x[k + 1] - x[k]);
                }
            }
        }
        out
    }

    fn adjoint(&self, y: &[f64]) -> Vec<f64> {
        let (m, n, s) = (self.height, self.width, self.scale);
        let (p, q) = y.split_at(m * n);
        let mut out = vec![0.0; m * n];
        for i in 0..m {
            for j in 0..n {
                let k = i * n + j;
                let mut acc = 0.0;
                if i + 1 < m {
                    acc -= p[k];
                }
                if i > 0 {
                    acc += p[k - n];
                }
                if j + 1 < n {
                    acc -= q[k];
                }
                if j > 0 {
                    acc += q[k - 1];
                }
                out[k] = s * acc;
            }
        }
        out
    }

    fn norm_bound(&self) -> f64 {
        8f64.sqrt() * self.scale
    }
}

/// Vertical and horizontal scaled differences of a single-channel plane.
pub fn tv_gradient(x: &[f64], height: usize, width: usize, scale: f64) -> Result<(Vec<f64>, Vec<f64>)> {
    if x.len() != height * width {
        return Err(Error::Shape(format!(
            "expected {} samples, got {}",
            height * width,
            x.len()
        )));
    }
    let mut pq = TvGradient::new(height, width, scale)?.forward(x);
    let q = pq.split_off(height * width);
    Ok((pq, q))
}

/// Transpose of [`tv_gradient`] (a scaled negative divergence).
pub fn tv_gradient_adjoint(
    p: &[f64],
    q: &[f64],
    height: usize,
    width: usize,
    scale: f64,
) -> Result<Vec<f64>> {
    if p.len() != height * width || q.len() != height * width {
        return Err(Error::Shape("p and q must both have height*width samples".into()));
    }
    let mut pq = p.to_vec();
    pq.extend_from_slice(q);
    Ok(TvGradient::new(height, width, scale)?.adjoint(&pq))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operators::{adjoint_mismatch, estimate_operator_norm};

    #[test]
    fn constant_image_has_zero_gradient() {
        let (p, q) = tv_gradient(&[0.7; 12], 3, 4, 2.0).unwrap();
        assert!(p.iter().chain(&q).all(|v| *v == 0.0));
    }

    #[test]
    fn hand_computed_two_by_two() {
        let (p, q) = tv_gradient(&[0.0, 1.0, 0.0, 1.0], 2, 2, 1.0).unwrap();
        assert_eq!(p, vec![0.0, 0.0, 0.0, 0.0]);
        assert_eq!(q, vec![1.0, 0.0, 1.0, 0.0]);
    }

    #[test]
    fn adjoint_identity() {
        for (h, w, s) in [(1, 1, 1.0), (3, 5, 1.0), (8, 8, 0.35), (16, 4, 2.0)] {
            let t = TvGradient::new(h, w, s).unwrap();
            assert!(adjoint_mismatch(&t, 100, 7) <= 1e-10);
        }
    }

    #[test]
    fn norm_is_below_sqrt_eight() {
        let t = TvGradient::new(32, 32, 1.0).unwrap();
        let est = estimate_operator_norm(&t, 2000, 1);
        assert!(est <= 8f64.sqrt() + 1e-3);
        assert!(est > 2.5, "estimate {est} should approach the bound");
    }

    #[test]
    fn adjoint_function_matches_map() {
        let p = [1.0, -2.0, 0.5, 3.0];
        let q = [0.0, 1.0, 2.0, -1.0];
        let direct = tv_gradient_adjoint(&p, &q, 2, 2, 0.5).unwrap();
        let mut pq = p.to_vec();
        pq.extend(q);
        assert_eq!(direct, TvGradient::new(2, 2, 0.5).unwrap().adjoint(&pq));
    }
}
