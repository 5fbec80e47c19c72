//! Problem assembly and parameter validation.

use std::fmt;
use std::sync::Arc;

use crate::error::{check_len, Error, Result};
use crate::operators::{LinearMap, LinearOp, Resolvent, ResolventOp, ZeroOperator};

/// Relative slack allowed when comparing `γ` with `1 / Σ‖L_j‖²`, so that
/// analytically admissible boundary values survive rounding of the bound.
pub const GAMMA_BOUND_RTOL: f64 = 1e-12;

/// The data `(A_1..A_n, B_1..B_m, L_1..L_m)` of a composite inclusion
///
/// ```text
/// 0 ∈ Σ_i A_i(x) + Σ_j L_j^* B_j(L_j x)
/// ```
///
/// on `H = R^{dim_primal}`, with `B_j` acting on `G_j = R^{dims_dual[j]}`.
#[derive(Clone)]
pub struct ProblemSpec {
    primal_ops: Vec<ResolventOp>,
    composed_ops: Vec<ResolventOp>,
    linear_maps: Vec<LinearOp>,
    dim_primal: usize,
    dims_dual: Vec<usize>,
}

impl ProblemSpec {
    /// Checks every dimension. An empty `primal_ops` list is replaced by a
    /// single zero operator, whose resolvent is the identity.
    pub fn new(
        dim_primal: usize,
        primal_ops: Vec<ResolventOp>,
        composed_ops: Vec<ResolventOp>,
        linear_maps: Vec<LinearOp>,
    ) -> Result<Self> {
        if dim_primal == 0 {
            return Err(Error::EmptyDimension("primal space"));
        }
        let primal_ops = if primal_ops.is_empty() {
            vec![Arc::new(ZeroOperator::new(dim_primal)?) as ResolventOp]
        } else {
            primal_ops
        };
        for op in &primal_ops {
            check_len("primal operator dimension", dim_primal, op.dim())?;
        }
        check_len(
            "number of linear maps",
            composed_ops.len(),
            linear_maps.len(),
        )?;
        let mut dims_dual = Vec::with_capacity(linear_maps.len());
        for (op, map) in composed_ops.iter().zip(&linear_maps) {
            check_len("linear map input dimension", dim_primal, map.dim_in())?;
            check_len("composed operator dimension", map.dim_out(), op.dim())?;
            if op.dim() == 0 {
                return Err(Error::EmptyDimension("dual space"));
            }
            dims_dual.push(op.dim());
        }
        Ok(ProblemSpec {
            primal_ops,
            composed_ops,
            linear_maps,
            dim_primal,
            dims_dual,
        })
    }

    /// Number of primal operators `n` (at least one).
    pub fn n(&self) -> usize {
        self.primal_ops.len()
    }

    /// Number of linearly composed operators `m`.
    pub fn m(&self) -> usize {
        self.composed_ops.len()
    }

    pub fn dim_primal(&self) -> usize {
        self.dim_primal
    }

    pub fn dims_dual(&self) -> &[usize] {
        &self.dims_dual
    }

    pub fn primal_ops(&self) -> &[ResolventOp] {
        &self.primal_ops
    }

    pub fn composed_ops(&self) -> &[ResolventOp] {
        &self.composed_ops
    }

    pub fn linear_maps(&self) -> &[LinearOp] {
        &self.linear_maps
    }

    /// `Σ_j norm_bound(L_j)²`, the squared norm bound of the stacked map.
    pub fn stacked_norm_bound_sq(&self) -> f64 {
        self.linear_maps
            .iter()
            .map(|l| l.norm_bound() * l.norm_bound())
            .sum()
    }

    /// `Σ_j L_j^* w_j`.
    pub fn adjoint_sum(&self, blocks: &[Vec<f64>]) -> Vec<f64> {
        let mut out = vec![0.0; self.dim_primal];
        for (map, w) in self.linear_maps.iter().zip(blocks) {
            let back = map.adjoint(w);
            out.iter_mut().zip(&back).for_each(|(o, b)| *o += b);
        }
        out
    }
}

impl fmt::Debug for ProblemSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ProblemSpec")
            .field("n", &self.n())
            .field("m", &self.m())
            .field("dim_primal", &self.dim_primal)
            .field("dims_dual", &self.dims_dual)
            .finish()
    }
}

/// Cartesian product `B_1 × … × B_m`; resolves each block on its slice.
pub struct ProductResolvent {
    blocks: Vec<ResolventOp>,
    dim: usize,
}

impl ProductResolvent {
    pub fn new(blocks: Vec<ResolventOp>) -> Result<Self> {
        if blocks.is_empty() {
            return Err(Error::EmptyReformulation);
        }
        let dim = blocks.iter().map(|b| b.dim()).sum();
        Ok(ProductResolvent { blocks, dim })
    }
}

impl Resolvent for ProductResolvent {
    fn dim(&self) -> usize {
        self.dim
    }

    fn resolve(&self, point: &[f64], step: f64) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.dim);
        let mut rest = point;
        for block in &self.blocks {
            let (head, tail) = rest.split_at(block.dim());
            out.extend(block.resolve(head, step));
            rest = tail;
        }
        out
    }
}

/// `x ↦ (L_1 x, …, L_m x)` with adjoint `(v_1..v_m) ↦ Σ_j L_j^* v_j`.
pub struct StackedMap {
    maps: Vec<LinearOp>,
    dim_in: usize,
    dim_out: usize,
    bound: f64,
}

impl StackedMap {
    pub fn new(maps: Vec<LinearOp>) -> Result<Self> {
        let first = maps.first().ok_or(Error::EmptyReformulation)?;
        let dim_in = first.dim_in();
        for map in &maps {
            check_len("stacked map input dimension", dim_in, map.dim_in())?;
        }
        let dim_out = maps.iter().map(|l| l.dim_out()).sum();
        let bound = maps
            .iter()
            .map(|l| l.norm_bound() * l.norm_bound())
            .sum::<f64>()
            .sqrt();
        Ok(StackedMap {
            maps,
            dim_in,
            dim_out,
            bound,
        })
    }
}

impl LinearMap for StackedMap {
    fn dim_in(&self) -> usize {
        self.dim_in
    }

    fn dim_out(&self) -> usize {
        self.dim_out
    }

    fn forward(&self, x: &[f64]) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.dim_out);
        for map in &self.maps {
            out.extend(map.forward(x));
        }
        out
    }

    fn adjoint(&self, y: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.dim_in];
        let mut rest = y;
        for map in &self.maps {
            let (head, tail) = rest.split_at(map.dim_out());
            let back = map.adjoint(head);
            out.iter_mut().zip(&back).for_each(|(o, b)| *o += b);
            rest = tail;
        }
        out
    }

    fn norm_bound(&self) -> f64 {
        self.bound
    }
}

/// Collapses the `m` composed blocks into a single pair `(B, L)` on the
/// product space. A single block is returned as is.
pub fn build_product_reformulation(spec: &ProblemSpec) -> Result<(ResolventOp, LinearOp)> {
    match spec.m() {
        0 => Err(Error::EmptyReformulation),
        1 => Ok((
            Arc::clone(&spec.composed_ops[0]),
            Arc::clone(&spec.linear_maps[0]),
        )),
        _ => Ok((
            Arc::new(ProductResolvent::new(spec.composed_ops.clone())?),
            Arc::new(StackedMap::new(spec.linear_maps.clone())?),
        )),
    }
}

/// Iteration parameters before validation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverConfig {
    /// Relaxation `λ ∈ (0, 1)`.
    pub lambda: f64,
    /// Step `γ ∈ (0, 1/Σ‖L_j‖²]`.
    pub gamma: f64,
    pub max_iterations: usize,
    /// Stop once `‖Δ(z, v)‖_γ` falls to this value.
    pub residual_tolerance: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            lambda: 0.5,
            gamma: 1.0,
            max_iterations: 1000,
            residual_tolerance: 1e-10,
        }
    }
}

/// A [`SolverConfig`] that passed [`validate_config`] for a given problem.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ValidatedConfig {
    lambda: f64,
    gamma: f64,
    max_iterations: usize,
    residual_tolerance: f64,
    gamma_bound: f64,
}

impl ValidatedConfig {
    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn max_iterations(&self) -> usize {
        self.max_iterations
    }

    pub fn residual_tolerance(&self) -> f64 {
        self.residual_tolerance
    }

    /// `1 / Σ_j norm_bound(L_j)²`, or `+∞` when there is nothing to bound.
    pub fn gamma_bound(&self) -> f64 {
        self.gamma_bound
    }
}

/// Accepts iff `0 < λ < 1` and `0 < γ ≤ 1/Σ_j‖L_j‖²`.
///
/// Without composed blocks `γ` plays no role and is fixed to 1.
pub fn validate_config(spec: &ProblemSpec, config: &SolverConfig) -> Result<ValidatedConfig> {
    let SolverConfig {
        lambda,
        gamma,
        max_iterations,
        residual_tolerance,
    } = *config;
    if !(lambda > 0.0 && lambda < 1.0) {
        return Err(Error::Config(format!(
            "relaxation must satisfy 0 < lambda < 1, got lambda = {lambda}"
        )));
    }
    if max_iterations == 0 {
        return Err(Error::Config("max_iterations must be positive".into()));
    }
    if !(residual_tolerance >= 0.0) {
        return Err(Error::Config(format!(
            "residual_tolerance must be nonnegative, got {residual_tolerance}"
        )));
    }
    let bound_sq = spec.stacked_norm_bound_sq();
    if spec.m() == 0 {
        return Ok(ValidatedConfig {
            lambda,
            gamma: 1.0,
            max_iterations,
            residual_tolerance,
            gamma_bound: f64::INFINITY,
        });
    }
    if !(gamma > 0.0 && gamma.is_finite()) {
        return Err(Error::Config(format!(
            "step must satisfy gamma > 0, got gamma = {gamma}"
        )));
    }
    let gamma_bound = if bound_sq > 0.0 {
        1.0 / bound_sq
    } else {
        f64::INFINITY
    };
    if gamma * bound_sq > 1.0 + GAMMA_BOUND_RTOL {
        return Err(Error::Config(format!(
            "step must satisfy gamma <= 1/sum_j ||L_j||^2 = {gamma_bound}, got gamma = {gamma}"
        )));
    }
    Ok(ValidatedConfig {
        lambda,
        gamma,
        max_iterations,
        residual_tolerance,
        gamma_bound,
    })
}
