//! Seeded problem instances with known solutions.
//!
//! Used by the test suites and by the CLI's audit modes. Everything is
//! deterministic in the seed.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_xoshiro::SplitMix64;

use crate::error::{Error, Result};
use crate::modeling::ProblemSpec;
use crate::operators::{
    BoxBounds, BoxIndicator, DenseMatrix, LinearMap, LinearOp, ResolventOp, ScaledIdentity,
    ShiftedIdentity, WeightedL1, ZeroOperator,
};
use crate::splitting::SolverState;

/// `0 ∈ (x − 1) + (x − 3) + x` on the real line: `A₁ = · − 1`, `A₂ = · − 3`,
/// `B = Id`, `L = Id`. The solution is `x̄ = ū = 4/3`.
pub fn toy_inclusion() -> Result<ProblemSpec> {
    ProblemSpec::new(
        1,
        vec![
            Arc::new(ShiftedIdentity::new(vec![1.0])?),
            Arc::new(ShiftedIdentity::new(vec![3.0])?),
        ],
        vec![Arc::new(ShiftedIdentity::new(vec![0.0])?)],
        vec![Arc::new(ScaledIdentity::identity(1)?)],
    )
}

/// All-zero operators with identity couplings.
pub fn zero_problem(n: usize, m: usize, dim: usize) -> Result<ProblemSpec> {
    let zero = |d| -> Result<ResolventOp> { Ok(Arc::new(ZeroOperator::new(d)?)) };
    ProblemSpec::new(
        dim,
        (0..n).map(|_| zero(dim)).collect::<Result<_>>()?,
        (0..m).map(|_| zero(dim)).collect::<Result<_>>()?,
        (0..m)
            .map(|_| Ok(Arc::new(ScaledIdentity::identity(dim)?) as LinearOp))
            .collect::<Result<_>>()?,
    )
}

/// A problem with `A_i(x) = x − c_i`, `B_j(y) = y − d_j` and dense `L_j`,
/// built backwards from a chosen primal-dual solution.
#[derive(Debug, Clone)]
pub struct ShiftedInstance {
    pub spec: ProblemSpec,
    /// `c_1..c_n`.
    pub shifts: Vec<Vec<f64>>,
    /// `d_1..d_m`.
    pub targets: Vec<Vec<f64>>,
    pub matrices: Vec<Arc<DenseMatrix>>,
    pub x_bar: Vec<f64>,
    pub u_bar: Vec<Vec<f64>>,
    /// `a_i = x̄ − c_i ∈ A_i(x̄)`, summing to `−Σ_j L_j^* ū_j`.
    pub a: Vec<Vec<f64>>,
}

impl ShiftedInstance {
    /// `Σ_j ‖L_j‖²` using the exact spectral norms.
    pub fn norm_sq_sum(&self) -> f64 {
        self.matrices.iter().map(|m| m.norm_bound().powi(2)).sum()
    }
}

fn uniform_vec<R: Rng + ?Sized>(rng: &mut R, len: usize, scale: f64) -> Vec<f64> {
    (0..len).map(|_| rng.random_range(-scale..scale)).collect()
}

/// Householder reflection `I − 2vvᵀ/‖v‖²` as a row-major matrix.
fn householder<R: Rng + ?Sized>(rng: &mut R, size: usize) -> Vec<f64> {
    let mut v = uniform_vec(rng, size, 1.0);
    v[0] += 1.5_f64.copysign(v[0]);
    let nn: f64 = v.iter().map(|x| x * x).sum();
    let mut h = vec![0.0; size * size];
    for r in 0..size {
        for c in 0..size {
            h[r * size + c] = f64::from(u8::from(r == c)) - 2.0 * v[r] * v[c] / nn;
        }
    }
    h
}

/// `rows×cols` matrix `H_r Σ H_c` with orthogonal `H` and singular values
/// drawn from `[0.2, 2]`. The norm bound is the largest singular value.
pub fn random_dense_map<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> Result<DenseMatrix> {
    if rows == 0 || cols == 0 {
        return Err(Error::EmptyDimension("random dense map"));
    }
    let k = rows.min(cols);
    let sigma: Vec<f64> = (0..k).map(|_| rng.random_range(0.2..2.0)).collect();
    let left = householder(rng, rows);
    let right = householder(rng, cols);
    let mut data = vec![0.0; rows * cols];
    for r in 0..rows {
        for c in 0..cols {
            data[r * cols + c] = (0..k)
                .map(|t| left[r * rows + t] * sigma[t] * right[t * cols + c])
                .sum();
        }
    }
    let top = sigma.iter().copied().fold(0.0, f64::max);
    DenseMatrix::new(rows, cols, data)?.with_norm_bound(top)
}

/// Random instance with `n` primal operators on `R^dim` and `m` dual blocks
/// of dimension 1 to 4.
pub fn shifted_instance(n: usize, m: usize, dim: usize, seed: u64) -> Result<ShiftedInstance> {
    if n == 0 {
        return Err(Error::InvalidParameter {
            name: "n",
            reason: "need at least one primal operator".into(),
        });
    }
    let mut rng = SplitMix64::seed_from_u64(seed);
    let x_bar = uniform_vec(&mut rng, dim, 2.0);
    let mut matrices = Vec::with_capacity(m);
    let mut u_bar = Vec::with_capacity(m);
    let mut targets: Vec<Vec<f64>> = Vec::with_capacity(m);
    let mut pull = vec![0.0; dim];
    for _ in 0..m {
        let rows = rng.random_range(1..=4);
        let l = random_dense_map(&mut rng, rows, dim)?;
        let u = uniform_vec(&mut rng, rows, 1.0);
        let lx = l.forward(&x_bar);
        targets.push(lx.iter().zip(&u).map(|(a, b)| a - b).collect());
        l.adjoint(&u).iter().zip(pull.iter_mut()).for_each(|(a, p)| *p -= a);
        matrices.push(Arc::new(l));
        u_bar.push(u);
    }
    // a_1..a_{n-1} free, a_n closes the sum to −Σ L_j^* u_j.
    let mut a: Vec<Vec<f64>> = (0..n - 1).map(|_| uniform_vec(&mut rng, dim, 1.0)).collect();
    let mut last = pull;
    for ai in &a {
        last.iter_mut().zip(ai).for_each(|(l, v)| *l -= v);
    }
    a.push(last);
    let shifts: Vec<Vec<f64>> = a
        .iter()
        .map(|ai| x_bar.iter().zip(ai).map(|(x, v)| x - v).collect())
        .collect();
    let spec = ProblemSpec::new(
        dim,
        shifts
            .iter()
            .map(|c| Ok(Arc::new(ShiftedIdentity::new(c.clone())?) as ResolventOp))
            .collect::<Result<_>>()?,
        targets
            .iter()
            .map(|d| Ok(Arc::new(ShiftedIdentity::new(d.clone())?) as ResolventOp))
            .collect::<Result<_>>()?,
        matrices.iter().map(|l| l.clone() as LinearOp).collect(),
    )?;
    Ok(ShiftedInstance {
        spec,
        shifts,
        targets,
        matrices,
        x_bar,
        u_bar,
        a,
    })
}

/// A state with entries uniform in `[−scale, scale)`.
pub fn random_state<R: Rng + ?Sized>(spec: &ProblemSpec, rng: &mut R, scale: f64) -> SolverState {
    let mut state = SolverState::zeros(spec);
    for block in state.z.iter_mut().chain(state.v.iter_mut()) {
        block.iter_mut().for_each(|x| *x = rng.random_range(-scale..scale));
    }
    state
}

/// `count` assorted maximally monotone operators on `R^dim`: shifted
/// identities, box normal cones and weighted ℓ₁ subdifferentials.
pub fn random_resolvents(count: usize, dim: usize, seed: u64) -> Result<Vec<ResolventOp>> {
    let mut rng = SplitMix64::seed_from_u64(seed);
    (0..count)
        .map(|k| -> Result<ResolventOp> {
            Ok(match k % 3 {
                0 => Arc::new(ShiftedIdentity::new(uniform_vec(&mut rng, dim, 2.0))?),
                1 => {
                    let lo = rng.random_range(-1.5..0.0);
                    let hi = lo + rng.random_range(0.5..2.5);
                    Arc::new(BoxIndicator::new(dim, BoxBounds::new(lo, hi)?)?)
                }
                _ => Arc::new(WeightedL1::new(
                    uniform_vec(&mut rng, dim, 1.0),
                    rng.random_range(0.1..1.0),
                )?),
            })
        })
        .collect()
}

/// Nonlinear problem: primal and dual operators from [`random_resolvents`]
/// and dense couplings from [`random_dense_map`] with exact norm bounds.
pub fn random_nonlinear_problem(n: usize, m: usize, dim: usize, seed: u64) -> Result<ProblemSpec> {
    let mut rng = SplitMix64::seed_from_u64(seed);
    let primal = random_resolvents(n, dim, rng.random())?;
    let mut composed = Vec::with_capacity(m);
    let mut maps: Vec<LinearOp> = Vec::with_capacity(m);
    for j in 0..m {
        let rows = rng.random_range(1..=4);
        maps.push(Arc::new(random_dense_map(&mut rng, rows, dim)?));
        let mut ops = random_resolvents(j + 1, rows, rng.random())?;
        composed.push(ops.pop().expect("at least one operator"));
    }
    ProblemSpec::new(dim, primal, composed, maps)
}
