//! TV/wavelet regularized deblurring under L1 data fidelity.
//!
//! Working in the rescaled variable `x = s/μ ∈ [0, 1/μ]^n`, the problem
//!
//! ```text
//! min  μ‖Ax − b/μ‖₁ + α₁μ‖Wx‖₁ + α₂ Σ √(p² + q²) + ι_{[0,1/μ]}(x),   (p, q) = μ∇x
//! ```
//!
//! is cast as an inclusion with two primal operators (box normal cone and
//! `W*∂(α₁μ‖·‖₁)W`) and two composed ones (`∂(μ‖· − b/μ‖₁)` through the blur
//! `A`, the group norm through the scaled gradient). Since `A` has norm one and
//! the gradient has norm at most `√8·μ`, the step must satisfy
//! `γ ≤ 1/(1 + 8μ²)`.
//!
//! The objective equals `‖As − b‖₁ + α₁‖Ws‖₁ + α₂TV(s)` at `s = μx`, so values
//! from runs with different `μ` are directly comparable.

use std::sync::Arc;

use super::{GaussianBlur, HaarTransform, Image, TvGradient};
use crate::error::{Error, Result};
use crate::modeling::{validate_config, ProblemSpec, SolverConfig, GAMMA_BOUND_RTOL};
use crate::operators::{
    BoxBounds, BoxIndicator, GroupL1, LinearMap, LinearOp, OrthonormalL1, ResolventOp, WeightedL1,
};
use crate::splitting::{step, SolverState};
use crate::vector::dist_sq;

/// Slack allowed on the box constraint when evaluating the objective.
pub const BOX_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct DeblurParams {
    /// Wavelet sparsity weight.
    pub alpha1: f64,
    /// Total variation weight.
    pub alpha2: f64,
    /// Rescaling of the intensity variable.
    pub mu: f64,
    pub lambda: f64,
    pub gamma: f64,
    pub iterations: usize,
    /// Odd side of the square blur kernel; 1 means no blur.
    pub blur_size: usize,
    pub blur_sigma: f64,
    /// Only used when synthesizing observations.
    pub noise_sigma: f64,
    pub seed: u64,
}

impl Default for DeblurParams {
    fn default() -> Self {
        DeblurParams {
            alpha1: 0.005,
            alpha2: 0.009,
            mu: 1.0 / 8f64.sqrt(),
            lambda: 0.99,
            gamma: 0.5,
            iterations: 400,
            blur_size: 9,
            blur_sigma: 4.0,
            noise_sigma: 1e-3,
            seed: 1,
        }
    }
}

fn invalid(name: &'static str, reason: String) -> Error {
    Error::InvalidParameter { name, reason }
}

impl DeblurParams {
    /// Largest admissible step, `1/(‖A‖² + 8μ²)` with `‖A‖ = 1`.
    pub fn gamma_bound(&self) -> f64 {
        1.0 / (1.0 + 8.0 * self.mu * self.mu)
    }

    /// Default parameters with `μ` changed and `γ` set to its bound.
    pub fn with_mu(mu: f64) -> Self {
        let mut p = DeblurParams {
            mu,
            ..Default::default()
        };
        p.gamma = p.gamma_bound();
        p
    }

    pub fn validate(&self) -> Result<()> {
        for (name, value) in [("alpha1", self.alpha1), ("alpha2", self.alpha2)] {
            if !(value.is_finite() && value >= 0.0) {
                return Err(invalid(name, format!("must be nonnegative, got {value}")));
            }
        }
        if !(self.mu.is_finite() && self.mu > 0.0) {
            return Err(invalid("mu", format!("must be positive, got {}", self.mu)));
        }
        if !(self.lambda > 0.0 && self.lambda < 1.0) {
            return Err(invalid(
                "lambda",
                format!("must satisfy 0 < lambda < 1, got {}", self.lambda),
            ));
        }
        let bound = self.gamma_bound();
        if !(self.gamma > 0.0 && self.gamma <= bound * (1.0 + GAMMA_BOUND_RTOL)) {
            return Err(invalid(
                "gamma",
                format!(
                    "must satisfy 0 < gamma <= 1/(1 + 8 mu^2) = {bound}, got {}",
                    self.gamma
                ),
            ));
        }
        if self.iterations == 0 {
            return Err(invalid("iterations", "must be positive".into()));
        }
        if self.blur_size.is_multiple_of(2) {
            return Err(invalid(
                "blur_size",
                format!("must be odd, got {}", self.blur_size),
            ));
        }
        if !(self.blur_sigma.is_finite() && self.blur_sigma > 0.0) {
            return Err(invalid(
                "blur_sigma",
                format!("must be positive, got {}", self.blur_sigma),
            ));
        }
        if !(self.noise_sigma.is_finite() && self.noise_sigma >= 0.0) {
            return Err(invalid(
                "noise_sigma",
                format!("must be nonnegative, got {}", self.noise_sigma),
            ));
        }
        Ok(())
    }
}

/// Operators of one channel.
struct Plane {
    blur: Arc<GaussianBlur>,
    haar: Arc<HaarTransform>,
    grad: Arc<TvGradient>,
}

impl Plane {
    fn new(height: usize, width: usize, params: &DeblurParams) -> Result<Self> {
        Ok(Plane {
            blur: Arc::new(GaussianBlur::new(
                height,
                width,
                params.blur_size,
                params.blur_sigma,
            )?),
            haar: Arc::new(HaarTransform::new(height, width)?),
            grad: Arc::new(TvGradient::new(height, width, params.mu)?),
        })
    }

    fn problem(&self, b: &[f64], params: &DeblurParams) -> Result<ProblemSpec> {
        let dim = b.len();
        let mu = params.mu;
        let anchor: Vec<f64> = b.iter().map(|v| v / mu).collect();
        let box_op: ResolventOp = Arc::new(BoxIndicator::new(dim, BoxBounds::new(0.0, 1.0 / mu)?)?);
        let wavelet: ResolventOp = Arc::new(OrthonormalL1::new(
            self.haar.clone() as LinearOp,
            params.alpha1 * mu,
        )?);
        let fidelity: ResolventOp = Arc::new(WeightedL1::new(anchor, mu)?);
        let tv: ResolventOp = Arc::new(GroupL1::new(dim, params.alpha2)?);
        ProblemSpec::new(
            dim,
            vec![box_op, wavelet],
            vec![fidelity, tv],
            vec![self.blur.clone() as LinearOp, self.grad.clone() as LinearOp],
        )
    }

    fn objective(&self, x: &[f64], b: &[f64], params: &DeblurParams) -> f64 {
        let mu = params.mu;
        let hi = 1.0 / mu;
        if x.iter().any(|&v| v < -BOX_TOLERANCE || v > hi + BOX_TOLERANCE) {
            return f64::INFINITY;
        }
        let fidelity: f64 = self
            .blur
            .forward(x)
            .iter()
            .zip(b)
            .map(|(ax, bv)| (ax - bv / mu).abs())
            .sum();
        let wavelet: f64 = self.haar.forward(x).iter().map(|c| c.abs()).sum();
        let pq = self.grad.forward(x);
        let (p, q) = pq.split_at(x.len());
        let tv: f64 = p.iter().zip(q).map(|(a, c)| a.hypot(*c)).sum();
        mu * fidelity + params.alpha1 * mu * wavelet + params.alpha2 * tv
    }
}

/// The splitting problem for one channel plane `b` of an `height×width` image.
pub fn deblur_problem(
    b: &[f64],
    height: usize,
    width: usize,
    params: &DeblurParams,
) -> Result<ProblemSpec> {
    if b.len() != height * width {
        return Err(Error::Shape(format!(
            "expected {} samples, got {}",
            height * width,
            b.len()
        )));
    }
    Plane::new(height, width, params)?.problem(b, params)
}

/// Objective at `x` (rescaled variable, all channels summed); `+∞` if `x`
/// leaves `[0, 1/μ]` by more than [`BOX_TOLERANCE`].
pub fn deblur_objective(x: &Image, b: &Image, params: &DeblurParams) -> Result<f64> {
    x.same_shape(b)?;
    let plane = Plane::new(x.height(), x.width(), params)?;
    Ok(x
        .planes()
        .iter()
        .zip(b.planes())
        .map(|(xp, bp)| plane.objective(xp, &bp, params))
        .sum())
}

/// `10·log₁₀(‖x − b‖² / ‖x − xᵏ‖²)` in decibels; `+∞` when `current` equals
/// `original`.
pub fn isnr(original: &Image, observed: &Image, current: &Image) -> Result<f64> {
    original.same_shape(observed)?;
    original.same_shape(current)?;
    Ok(isnr_from_errors(
        dist_sq(original.data(), observed.data()),
        dist_sq(original.data(), current.data()),
    ))
}

fn isnr_from_errors(observed_sq: f64, current_sq: f64) -> f64 {
    if current_sq == 0.0 {
        f64::INFINITY
    } else {
        10.0 * (observed_sq / current_sq).log10()
    }
}

/// One iteration of a deblurring run, aggregated over channels.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeblurRecord {
    pub iteration: usize,
    pub residual_gamma: f64,
    pub residual_primal: f64,
    pub residual_dual: f64,
    /// Objective at the box-feasible iterate `x_1`.
    pub objective: f64,
    /// Present when the ground truth was supplied.
    pub isnr: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct DeblurOutput {
    /// `μ·x_1` after the last iteration, in intensity units.
    pub restored: Image,
    pub trace: Vec<DeblurRecord>,
}

struct ChannelRecord {
    residual_primal_sq: f64,
    residual_dual_sq: f64,
    objective: f64,
    error_sq: Option<f64>,
}

struct ChannelRun {
    restored: Vec<f64>,
    records: Vec<ChannelRecord>,
}

fn run_channel(
    b: &[f64],
    truth: Option<&[f64]>,
    height: usize,
    width: usize,
    params: &DeblurParams,
) -> Result<ChannelRun> {
    let plane = Plane::new(height, width, params)?;
    let spec = plane.problem(b, params)?;
    let config = validate_config(
        &spec,
        &SolverConfig {
            lambda: params.lambda,
            gamma: params.gamma,
            max_iterations: params.iterations,
            residual_tolerance: 0.0,
        },
    )?;
    let mu = params.mu;
    let z0: Vec<f64> = b.iter().map(|v| v / mu).collect();
    let v0 = spec.dims_dual().iter().map(|&d| vec![0.0; d]).collect();
    let mut state = SolverState::new(&spec, vec![z0], v0)?;
    let mut records = Vec::with_capacity(params.iterations);
    let mut restored = b.to_vec();
    for _ in 0..params.iterations {
        let (next, diag) = step(&state, &spec, &config)?;
        let x1 = &diag.x[0];
        restored = x1.iter().map(|v| mu * v).collect();
        records.push(ChannelRecord {
            residual_primal_sq: diag.residual_primal * diag.residual_primal,
            residual_dual_sq: diag.residual_dual * diag.residual_dual,
            objective: plane.objective(x1, b, params),
            error_sq: truth.map(|t| dist_sq(t, &restored)),
        });
        state = next;
    }
    Ok(ChannelRun { restored, records })
}

/// Runs the splitting iteration for `params.iterations` steps on every
/// channel of `b`, starting from `z = b/μ`, `v = 0`.
pub fn deblur_run(b: &Image, params: &DeblurParams, truth: Option<&Image>) -> Result<DeblurOutput> {
    deblur_run_threaded(b, params, truth, 1)
}

/// [`deblur_run`] processing up to `threads` channels concurrently. The
/// result does not depend on `threads`.
pub fn deblur_run_threaded(
    b: &Image,
    params: &DeblurParams,
    truth: Option<&Image>,
    threads: usize,
) -> Result<DeblurOutput> {
    params.validate()?;
    if let Some(t) = truth {
        t.same_shape(b)?;
    }
    let (h, w) = (b.height(), b.width());
    let b_planes = b.planes();
    let t_planes = truth.map(|t| t.planes());
    let job = |c: usize| {
        run_channel(
            &b_planes[c],
            t_planes.as_ref().map(|t| t[c].as_slice()),
            h,
            w,
            params,
        )
    };

    let channels = b.channels();
    let threads = threads.clamp(1, channels);
    let mut runs: Vec<Option<Result<ChannelRun>>> = (0..channels).map(|_| None).collect();
    if threads == 1 {
        for (c, slot) in runs.iter_mut().enumerate() {
            *slot = Some(job(c));
        }
    } else {
        std::thread::scope(|scope| {
            for chunk in (0..channels).collect::<Vec<_>>().chunks(threads) {
                let job = &job;
                let handles: Vec<_> = chunk
                    .iter()
                    .map(|&c| (c, scope.spawn(move || job(c))))
                    .collect();
                for (c, handle) in handles {
                    runs[c] = Some(handle.join().expect("channel worker panicked"));
                }
            }
        });
    }
    let runs: Vec<ChannelRun> = runs
        .into_iter()
        .map(|r| r.expect("every channel was run"))
        .collect::<Result<_>>()?;

    let observed_sq = truth.map(|t| dist_sq(t.data(), b.data()));
    let trace = (0..params.iterations)
        .map(|k| {
            let recs = runs.iter().map(|r| &r.records[k]);
            let primal: f64 = recs.clone().map(|r| r.residual_primal_sq).sum();
            let dual: f64 = recs.clone().map(|r| r.residual_dual_sq).sum();
            let objective = recs.clone().map(|r| r.objective).sum();
            let isnr = observed_sq.map(|obs| {
                isnr_from_errors(obs, recs.clone().filter_map(|r| r.error_sq).sum())
            });
            DeblurRecord {
                iteration: k + 1,
                residual_gamma: (primal + dual / params.gamma).sqrt(),
                residual_primal: primal.sqrt(),
                residual_dual: dual.sqrt(),
                objective,
                isnr,
            }
        })
        .collect();
    let planes: Vec<Vec<f64>> = runs.into_iter().map(|r| r.restored).collect();
    Ok(DeblurOutput {
        restored: Image::from_planes(h, w, &planes)?,
        trace,
    })
}
