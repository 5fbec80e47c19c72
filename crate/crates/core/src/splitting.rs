//! The fixed-point engine.
//!
//! One application of the operator `T` on the lifted state
//! `(z_1..z_{n-1}, v_1..v_m)` evaluates every resolvent exactly once:
//!
//! ```text
//! x_1 = J_{A_1}(z_1)
//! x_i = J_{A_i}(z_i + x_{i-1} − z_{i-1})                       i = 2..n−1
//! x_n = J_{A_n}(x_1 + x_{n-1} − z_{n-1} − Σ_j L_j^*(γ L_j x_1 − v_j))
//! y_j = J_{B_j/γ}(L_j(x_1 + x_n) − v_j/γ)
//! z_i ← z_i + λ(x_{i+1} − x_i)
//! v_j ← v_j + λγ(y_j − L_j x_n)
//! ```
//!
//! For `n = 2` the middle chain is empty and `x_{n-1} = x_1`, `z_{n-1} = z_1`.
//! For `n = 1` a single primal block `z` is kept and
//! `x = J_{A_1}(z − Σ_j L_j^*(γ L_j z − v_j))`, `z ← z + λ(x − z)`.

use crate::error::{check_len, Error, Result};
use crate::modeling::{ProblemSpec, ValidatedConfig};
use crate::operators::ResolventOp;
use crate::vector::{all_finite, blocks_dist_sq, blocks_norm_sq, dist_sq};

/// The lifted iterate.
#[derive(Debug, Clone, PartialEq)]
pub struct SolverState {
    /// `max(n − 1, 1)` primal blocks.
    pub z: Vec<Vec<f64>>,
    /// One dual block per composed operator.
    pub v: Vec<Vec<f64>>,
    pub iteration: usize,
}

impl SolverState {
    /// The origin, the default starting point.
    pub fn zeros(spec: &ProblemSpec) -> Self {
        SolverState {
            z: vec![vec![0.0; spec.dim_primal()]; primal_blocks(spec)],
            v: spec.dims_dual().iter().map(|&d| vec![0.0; d]).collect(),
            iteration: 0,
        }
    }

    /// Builds a state after checking its shape against `spec`.
    pub fn new(spec: &ProblemSpec, z: Vec<Vec<f64>>, v: Vec<Vec<f64>>) -> Result<Self> {
        let state = SolverState { z, v, iteration: 0 };
        state.check_shape(spec)?;
        Ok(state)
    }

    pub fn check_shape(&self, spec: &ProblemSpec) -> Result<()> {
        check_len("number of primal blocks", primal_blocks(spec), self.z.len())?;
        for z in &self.z {
            check_len("primal block dimension", spec.dim_primal(), z.len())?;
        }
        check_len("number of dual blocks", spec.m(), self.v.len())?;
        for (v, &d) in self.v.iter().zip(spec.dims_dual()) {
            check_len("dual block dimension", d, v.len())?;
        }
        Ok(())
    }
}

fn primal_blocks(spec: &ProblemSpec) -> usize {
    spec.n().saturating_sub(1).max(1)
}

/// Intermediate quantities of one step.
#[derive(Debug, Clone, PartialEq)]
pub struct StepDiagnostics {
    /// `x_1..x_n` (a single entry when `n = 1`).
    pub x: Vec<Vec<f64>>,
    pub y: Vec<Vec<f64>>,
    /// `‖(z⁺, v⁺) − (z, v)‖_γ`.
    pub residual_gamma: f64,
    pub residual_primal: f64,
    pub residual_dual: f64,
}

/// Residuals of one iteration, as kept in a run trace.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResidualRecord {
    /// 1-based iteration count.
    pub iteration: usize,
    pub residual_gamma: f64,
    pub residual_primal: f64,
    pub residual_dual: f64,
}

/// `(x̄, ū_1..ū_m)` with `ū_j = γ L_j x̄ − v_j`.
#[derive(Debug, Clone, PartialEq)]
pub struct PrimalDualSolution {
    pub x_bar: Vec<f64>,
    pub u_bar: Vec<Vec<f64>>,
}

fn finite(stage: impl FnOnce() -> String, values: Vec<f64>) -> Result<Vec<f64>> {
    if all_finite(&values) {
        Ok(values)
    } else {
        Err(Error::NumericalFailure { stage: stage() })
    }
}

fn resolve_checked(
    op: &ResolventOp,
    point: &[f64],
    step: f64,
    stage: impl FnOnce() -> String,
) -> Result<Vec<f64>> {
    if !all_finite(point) {
        return Err(Error::NumericalFailure {
            stage: format!("{} (input)", stage()),
        });
    }
    finite(stage, op.resolve(point, step))
}

/// Argument of the last primal resolvent, `base − Σ_j L_j^*(γ L_j anchor − v_j)`.
/// Also returns `L_j anchor` for reuse.
fn coupled_argument(
    spec: &ProblemSpec,
    gamma: f64,
    base: Vec<f64>,
    anchor: &[f64],
    v: &[Vec<f64>],
) -> (Vec<f64>, Vec<Vec<f64>>) {
    let mut arg = base;
    let mut l_anchor = Vec::with_capacity(spec.m());
    for (map, vj) in spec.linear_maps().iter().zip(v) {
        let la = map.forward(anchor);
        let w: Vec<f64> = la.iter().zip(vj).map(|(a, b)| gamma * a - b).collect();
        let back = map.adjoint(&w);
        arg.iter_mut().zip(&back).for_each(|(a, b)| *a -= b);
        l_anchor.push(la);
    }
    (arg, l_anchor)
}

/// Dual resolvents and updates, shared by the `n = 1` and `n ≥ 2` paths.
/// `l_first` holds `L_j` applied to the first argument of the sum, `last`
/// is the point whose image enters the dual update.
fn dual_stage(
    spec: &ProblemSpec,
    config: &ValidatedConfig,
    v: &[Vec<f64>],
    l_first: &[Vec<f64>],
    last: &[f64],
) -> Result<(Vec<Vec<f64>>, Vec<Vec<f64>>)> {
    let gamma = config.gamma();
    let lambda = config.lambda();
    let mut ys = Vec::with_capacity(spec.m());
    let mut v_new = Vec::with_capacity(spec.m());
    for (j, ((op, map), vj)) in spec
        .composed_ops()
        .iter()
        .zip(spec.linear_maps())
        .zip(v)
        .enumerate()
    {
        let l_last = map.forward(last);
        let arg: Vec<f64> = l_first[j]
            .iter()
            .zip(&l_last)
            .zip(vj)
            .map(|((a, b), c)| a + b - c / gamma)
            .collect();
        let y = resolve_checked(op, &arg, 1.0 / gamma, || format!("y_{}", j + 1))?;
        let updated: Vec<f64> = vj
            .iter()
            .zip(&y)
            .zip(&l_last)
            .map(|((vv, yy), ll)| vv + lambda * gamma * (yy - ll))
            .collect();
        v_new.push(finite(|| format!("v_{} update", j + 1), updated)?);
        ys.push(y);
    }
    Ok((ys, v_new))
}

fn relaxed(z: &[f64], from: &[f64], to: &[f64], lambda: f64) -> Vec<f64> {
    z.iter()
        .zip(from.iter().zip(to))
        .map(|(zi, (a, b))| zi + lambda * (b - a))
        .collect()
}

/// One application of `T`.
pub fn step(
    state: &SolverState,
    spec: &ProblemSpec,
    config: &ValidatedConfig,
) -> Result<(SolverState, StepDiagnostics)> {
    state.check_shape(spec)?;
    let gamma = config.gamma();
    let lambda = config.lambda();
    let ops = spec.primal_ops();
    let n = spec.n();
    let z = &state.z;

    let (xs, z_new, ys, v_new) = if n == 1 {
        let zc = &z[0];
        let (arg, lz) = coupled_argument(spec, gamma, zc.clone(), zc, &state.v);
        let x = resolve_checked(&ops[0], &arg, 1.0, || "x_1".to_string())?;
        let (ys, v_new) = dual_stage(spec, config, &state.v, &lz, &x)?;
        let z_next = finite(|| "z update".into(), relaxed(zc, zc, &x, lambda))?;
        (vec![x], vec![z_next], ys, v_new)
    } else {
        let mut xs: Vec<Vec<f64>> = Vec::with_capacity(n);
        xs.push(resolve_checked(&ops[0], &z[0], 1.0, || "x_1".to_string())?);
        for i in 1..n - 1 {
            let arg: Vec<f64> = z[i]
                .iter()
                .zip(&xs[i - 1])
                .zip(&z[i - 1])
                .map(|((a, b), c)| a + b - c)
                .collect();
            xs.push(resolve_checked(&ops[i], &arg, 1.0, || format!("x_{}", i + 1))?);
        }
        let base: Vec<f64> = xs[0]
            .iter()
            .zip(&xs[n - 2])
            .zip(&z[n - 2])
            .map(|((a, b), c)| a + b - c)
            .collect();
        let (arg, lx1) = coupled_argument(spec, gamma, base, &xs[0], &state.v);
        xs.push(resolve_checked(&ops[n - 1], &arg, 1.0, || format!("x_{n}"))?);
        let (ys, v_new) = dual_stage(spec, config, &state.v, &lx1, &xs[n - 1])?;
        let z_new = (0..n - 1)
            .map(|i| {
                finite(
                    || format!("z_{} update", i + 1),
                    relaxed(&z[i], &xs[i], &xs[i + 1], lambda),
                )
            })
            .collect::<Result<Vec<_>>>()?;
        (xs, z_new, ys, v_new)
    };

    let primal_sq = blocks_dist_sq(&z_new, z);
    let dual_sq = blocks_dist_sq(&v_new, &state.v);
    let next = SolverState {
        z: z_new,
        v: v_new,
        iteration: state.iteration + 1,
    };
    let diagnostics = StepDiagnostics {
        x: xs,
        y: ys,
        residual_gamma: (primal_sq + dual_sq / gamma).sqrt(),
        residual_primal: primal_sq.sqrt(),
        residual_dual: dual_sq.sqrt(),
    };
    Ok((next, diagnostics))
}

/// `√(Σ_i‖Δz_i‖² + (1/γ) Σ_j‖Δv_j‖²)`.
pub fn residual_norm_gamma(old: &SolverState, new: &SolverState, gamma: f64) -> Result<f64> {
    if !(gamma > 0.0) {
        return Err(Error::InvalidParameter {
            name: "gamma",
            reason: format!("must be positive, got {gamma}"),
        });
    }
    check_len("number of primal blocks", old.z.len(), new.z.len())?;
    check_len("number of dual blocks", old.v.len(), new.v.len())?;
    for (a, b) in old.z.iter().zip(&new.z).chain(old.v.iter().zip(&new.v)) {
        check_len("block dimension", a.len(), b.len())?;
    }
    Ok((blocks_dist_sq(&old.z, &new.z) + blocks_dist_sq(&old.v, &new.v) / gamma).sqrt())
}

/// `x̄` and `ū_j = γ L_j x̄ − v_j` read off a state.
///
/// With `n ≥ 2`, `x̄ = J_{A_1}(z_1)`. With `n = 1` the single primal
/// resolvent of the step is used, which coincides with `z` at fixed points.
pub fn extract_solution(
    state: &SolverState,
    spec: &ProblemSpec,
    config: &ValidatedConfig,
) -> Result<PrimalDualSolution> {
    state.check_shape(spec)?;
    let gamma = config.gamma();
    let a1 = &spec.primal_ops()[0];
    let x_bar = if spec.n() == 1 {
        let z = &state.z[0];
        let (arg, _) = coupled_argument(spec, gamma, z.clone(), z, &state.v);
        a1.resolve(&arg, 1.0)
    } else {
        a1.resolve(&state.z[0], 1.0)
    };
    let u_bar = spec
        .linear_maps()
        .iter()
        .zip(&state.v)
        .map(|(map, vj)| {
            map.forward(&x_bar)
                .iter()
                .zip(vj)
                .map(|(a, b)| gamma * a - b)
                .collect()
        })
        .collect();
    Ok(PrimalDualSolution { x_bar, u_bar })
}

/// Builds the fixed point associated with a primal-dual solution.
///
/// `a_decomposition` must hold `a_i ∈ A_i(x̄)` with `Σ_i a_i = −Σ_j L_j^* ū_j`
/// and `ū_j ∈ B_j(L_j x̄)`; nothing is checked beyond shapes.
pub fn fixed_point_from_solution(
    x_bar: &[f64],
    u_bar: &[Vec<f64>],
    a_decomposition: &[Vec<f64>],
    spec: &ProblemSpec,
    config: &ValidatedConfig,
) -> Result<SolverState> {
    check_len("x_bar dimension", spec.dim_primal(), x_bar.len())?;
    check_len("number of dual solutions", spec.m(), u_bar.len())?;
    check_len("number of a_i", spec.n(), a_decomposition.len())?;
    let gamma = config.gamma();
    let z = if spec.n() == 1 {
        vec![x_bar.to_vec()]
    } else {
        let mut z: Vec<Vec<f64>> = Vec::with_capacity(spec.n() - 1);
        z.push(x_bar.iter().zip(&a_decomposition[0]).map(|(x, a)| x + a).collect());
        for i in 1..spec.n() - 1 {
            let next = a_decomposition[i]
                .iter()
                .zip(&z[i - 1])
                .map(|(a, p)| a + p)
                .collect();
            z.push(next);
        }
        z
    };
    let v = spec
        .linear_maps()
        .iter()
        .zip(u_bar)
        .map(|(map, u)| {
            map.forward(x_bar)
                .iter()
                .zip(u)
                .map(|(a, b)| gamma * a - b)
                .collect()
        })
        .collect();
    SolverState::new(spec, z, v)
}

/// Final state and residual history of a run.
#[derive(Debug, Clone)]
pub struct RunReport {
    pub solution: PrimalDualSolution,
    pub final_state: SolverState,
    pub trace: Vec<ResidualRecord>,
    /// Whether the residual tolerance was reached within the budget.
    pub converged: bool,
}

/// Iterates [`step`] until the weighted residual reaches the tolerance or
/// the iteration budget runs out.
pub fn run(
    spec: &ProblemSpec,
    config: &ValidatedConfig,
    initial: SolverState,
) -> Result<RunReport> {
    run_with_observer(spec, config, initial, |_, _| {})
}

/// [`run`] with a callback receiving each new state and its diagnostics.
pub fn run_with_observer<F>(
    spec: &ProblemSpec,
    config: &ValidatedConfig,
    initial: SolverState,
    mut observer: F,
) -> Result<RunReport>
where
    F: FnMut(&SolverState, &StepDiagnostics),
{
    initial.check_shape(spec)?;
    let mut state = initial;
    let mut trace = Vec::with_capacity(config.max_iterations().min(1 << 16));
    let mut converged = false;
    for _ in 0..config.max_iterations() {
        let (next, diag) = step(&state, spec, config)?;
        trace.push(ResidualRecord {
            iteration: next.iteration,
            residual_gamma: diag.residual_gamma,
            residual_primal: diag.residual_primal,
            residual_dual: diag.residual_dual,
        });
        observer(&next, &diag);
        state = next;
        if diag.residual_gamma <= config.residual_tolerance() {
            converged = true;
            break;
        }
    }
    let solution = extract_solution(&state, spec, config)?;
    Ok(RunReport {
        solution,
        final_state: state,
        trace,
        converged,
    })
}

/// Reference Malitsky–Tam iteration for `N = ops.len() ≥ 2` operators on a
/// state of `N − 1` blocks, all resolvents at parameter 1:
///
/// ```text
/// x_1 = J_1(w_1),  x_i = J_i(w_i + x_{i-1} − w_{i-1}),  x_N = J_N(x_1 + x_{N-1} − w_{N-1})
/// w_i ← w_i + λ(x_{i+1} − x_i)
/// ```
pub fn malitsky_tam_step(
    state: &[Vec<f64>],
    ops: &[ResolventOp],
    lambda: f64,
) -> Result<Vec<Vec<f64>>> {
    let count = ops.len();
    if count < 2 {
        return Err(Error::InvalidParameter {
            name: "ops",
            reason: format!("need at least two operators, got {count}"),
        });
    }
    check_len("Malitsky-Tam state blocks", count - 1, state.len())?;
    let dim = ops[0].dim();
    for (op, w) in ops.iter().zip(state) {
        check_len("Malitsky-Tam operator dimension", dim, op.dim())?;
        check_len("Malitsky-Tam block dimension", dim, w.len())?;
    }
    check_len("Malitsky-Tam operator dimension", dim, ops[count - 1].dim())?;

    let mut xs: Vec<Vec<f64>> = Vec::with_capacity(count);
    xs.push(resolve_checked(&ops[0], &state[0], 1.0, || "x_1".into())?);
    for i in 1..count - 1 {
        let arg: Vec<f64> = (0..dim)
            .map(|k| state[i][k] + xs[i - 1][k] - state[i - 1][k])
            .collect();
        xs.push(resolve_checked(&ops[i], &arg, 1.0, || format!("x_{}", i + 1))?);
    }
    let arg: Vec<f64> = (0..dim)
        .map(|k| xs[0][k] + xs[count - 2][k] - state[count - 2][k])
        .collect();
    xs.push(resolve_checked(&ops[count - 1], &arg, 1.0, || format!("x_{count}"))?);
    Ok((0..count - 1)
        .map(|i| relaxed(&state[i], &xs[i], &xs[i + 1], lambda))
        .collect())
}

/// Slack of the averagedness inequality of `T` in `‖·‖_γ`:
///
/// ```text
/// ‖p − q‖²_γ − ‖Tp − Tq‖²_γ − ((1−λ)/λ)‖(Id−T)p − (Id−T)q‖²_γ
///            − ((1 − γ‖L‖²)/λ)‖Σ_i (Id−T)(p)_{z_i} − Σ_i (Id−T)(q)_{z_i}‖²
/// ```
///
/// with `‖L‖² = Σ_j norm_bound(L_j)²`. Nonnegative whenever `T` is built
/// from maximally monotone operators and the config is valid; the last
/// term is only included for `n ≥ 2`.
pub fn check_averaged_inequality(
    spec: &ProblemSpec,
    config: &ValidatedConfig,
    point_a: &SolverState,
    point_b: &SolverState,
) -> Result<f64> {
    let gamma = config.gamma();
    let lambda = config.lambda();
    let (ta, _) = step(point_a, spec, config)?;
    let (tb, _) = step(point_b, spec, config)?;

    let weighted = |z: f64, v: f64| z + v / gamma;
    let before = weighted(
        blocks_dist_sq(&point_a.z, &point_b.z),
        blocks_dist_sq(&point_a.v, &point_b.v),
    );
    let after = weighted(blocks_dist_sq(&ta.z, &tb.z), blocks_dist_sq(&ta.v, &tb.v));

    // (Id − T)p − (Id − T)q, blockwise.
    let diff = |p: &[Vec<f64>], tp: &[Vec<f64>], q: &[Vec<f64>], tq: &[Vec<f64>]| {
        p.iter()
            .zip(tp)
            .zip(q.iter().zip(tq))
            .map(|((p, tp), (q, tq))| {
                (0..p.len())
                    .map(|k| (p[k] - tp[k]) - (q[k] - tq[k]))
                    .collect::<Vec<f64>>()
            })
            .collect::<Vec<_>>()
    };
    let dz = diff(&point_a.z, &ta.z, &point_b.z, &tb.z);
    let dv = diff(&point_a.v, &ta.v, &point_b.v, &tb.v);
    let residual = weighted(blocks_norm_sq(&dz), blocks_norm_sq(&dv));

    let lifting_term = if spec.n() >= 2 {
        let mut summed = vec![0.0; spec.dim_primal()];
        for block in &dz {
            summed.iter_mut().zip(block).for_each(|(s, b)| *s += b);
        }
        let coefficient = (1.0 - gamma * spec.stacked_norm_bound_sq()).max(0.0) / lambda;
        coefficient * summed.iter().map(|s| s * s).sum::<f64>()
    } else {
        0.0
    };

    Ok(before - after - (1.0 - lambda) / lambda * residual - lifting_term)
}

/// `max_i ‖x_i − x_1‖` over the primal chain of one step.
pub fn consensus_gap(diag: &StepDiagnostics) -> f64 {
    let first = &diag.x[0];
    diag.x
        .iter()
        .map(|x| dist_sq(x, first).sqrt())
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::modeling::{validate_config, SolverConfig};
    use crate::operators::{LinearOp, ScaledIdentity, ShiftedIdentity, ZeroOperator};
    use std::sync::Arc;

    fn shifted(c: f64) -> ResolventOp {
        Arc::new(ShiftedIdentity::new(vec![c]).unwrap())
    }

    /// A₁ = · − 1, A₂ = · − 3, B = Id, L = Id on R.
    fn toy() -> ProblemSpec {
        let id: LinearOp = Arc::new(ScaledIdentity::identity(1).unwrap());
        ProblemSpec::new(1, vec![shifted(1.0), shifted(3.0)], vec![shifted(0.0)], vec![id])
            .unwrap()
    }

    fn cfg(spec: &ProblemSpec, lambda: f64, gamma: f64) -> ValidatedConfig {
        validate_config(
            spec,
            &SolverConfig {
                lambda,
                gamma,
                max_iterations: 2000,
                residual_tolerance: 1e-12,
            },
        )
        .unwrap()
    }

    #[test]
    fn one_step_by_hand() {
        let spec = toy();
        let c = cfg(&spec, 0.5, 1.0);
        let (next, diag) = step(&SolverState::zeros(&spec), &spec, &c).unwrap();
        assert_eq!(diag.x, vec![vec![0.5], vec![1.75]]);
        assert_eq!(diag.y, vec![vec![1.125]]);
        assert_eq!(next.z, vec![vec![0.625]]);
        assert_eq!(next.v, vec![vec![-0.3125]]);
        assert_eq!(next.iteration, 1);
        let r = residual_norm_gamma(&SolverState::zeros(&spec), &next, 1.0).unwrap();
        assert!((r - diag.residual_gamma).abs() < 1e-15);
    }

    #[test]
    fn zero_operators_leave_origin_fixed() {
        let zero: ResolventOp = Arc::new(ZeroOperator::new(3).unwrap());
        let id: LinearOp = Arc::new(ScaledIdentity::identity(3).unwrap());
        let spec = ProblemSpec::new(
            3,
            vec![zero.clone(), zero.clone(), zero.clone()],
            vec![zero],
            vec![id],
        )
        .unwrap();
        let c = cfg(&spec, 0.5, 1.0);
        let start = SolverState::zeros(&spec);
        let (next, diag) = step(&start, &spec, &c).unwrap();
        assert_eq!(next.z, start.z);
        assert_eq!(next.v, start.v);
        assert_eq!(diag.residual_gamma, 0.0);
        let sol = extract_solution(&start, &spec, &c).unwrap();
        assert_eq!(sol.x_bar, vec![0.0; 3]);
        assert_eq!(sol.u_bar, vec![vec![0.0; 3]]);
    }

    #[test]
    fn toy_problem_converges_to_four_thirds() {
        let spec = toy();
        let c = cfg(&spec, 0.5, 1.0);
        let report = run(&spec, &c, SolverState::zeros(&spec)).unwrap();
        assert!(report.converged);
        assert!((report.solution.x_bar[0] - 4.0 / 3.0).abs() < 1e-9);
        assert!((report.solution.u_bar[0][0] - 4.0 / 3.0).abs() < 1e-9);
        for pair in report.trace.windows(2) {
            assert!(pair[1].residual_gamma <= pair[0].residual_gamma + 1e-12);
        }
    }

    #[test]
    fn fixed_point_of_toy_problem() {
        let spec = toy();
        let c = cfg(&spec, 0.5, 1.0);
        let x = 4.0 / 3.0;
        let state =
            fixed_point_from_solution(&[x], &[vec![x]], &[vec![x - 1.0], vec![x - 3.0]], &spec, &c)
                .unwrap();
        assert!((state.z[0][0] - 5.0 / 3.0).abs() < 1e-15);
        assert!((state.v[0][0] - (x - x)).abs() < 1e-15);
        let (_, diag) = step(&state, &spec, &c).unwrap();
        assert!(diag.residual_gamma < 1e-14);
        let sol = extract_solution(&state, &spec, &c).unwrap();
        assert!((sol.x_bar[0] - x).abs() < 1e-15);
    }

    #[test]
    fn huge_tolerance_stops_after_one_iteration() {
        let spec = toy();
        let c = validate_config(
            &spec,
            &SolverConfig {
                lambda: 0.5,
                gamma: 1.0,
                max_iterations: 100,
                residual_tolerance: 1e30,
            },
        )
        .unwrap();
        let report = run(&spec, &c, SolverState::zeros(&spec)).unwrap();
        assert_eq!(report.trace.len(), 1);
        assert!(report.converged);
    }

    #[test]
    fn budget_exhaustion_is_not_an_error() {
        let spec = toy();
        let c = validate_config(
            &spec,
            &SolverConfig {
                lambda: 0.5,
                gamma: 1.0,
                max_iterations: 3,
                residual_tolerance: 0.0,
            },
        )
        .unwrap();
        let report = run(&spec, &c, SolverState::zeros(&spec)).unwrap();
        assert_eq!(report.trace.len(), 3);
        assert!(!report.converged);
        assert_eq!(report.final_state.iteration, 3);
    }

    #[test]
    fn residual_norm_examples() {
        let a = SolverState {
            z: vec![vec![0.0, 0.0]],
            v: vec![vec![0.0]],
            iteration: 0,
        };
        assert_eq!(residual_norm_gamma(&a, &a, 1.0).unwrap(), 0.0);
        let b = SolverState {
            z: vec![vec![3.0, 0.0]],
            v: vec![vec![4.0]],
            iteration: 1,
        };
        assert_eq!(residual_norm_gamma(&a, &b, 1.0).unwrap(), 5.0);
        let c = SolverState {
            z: vec![vec![0.0, 0.0]],
            v: vec![vec![1.0]],
            iteration: 1,
        };
        assert_eq!(residual_norm_gamma(&a, &c, 0.25).unwrap(), 2.0);
        assert!(residual_norm_gamma(&a, &c, 0.0).is_err());
    }

    #[test]
    fn diagnostics_satisfy_weighted_identity() {
        let spec = toy();
        let c = cfg(&spec, 0.7, 0.3);
        let mut state = SolverState::zeros(&spec);
        for _ in 0..10 {
            let (next, d) = step(&state, &spec, &c).unwrap();
            let lhs = d.residual_gamma * d.residual_gamma;
            let rhs = d.residual_primal.powi(2) + d.residual_dual.powi(2) / 0.3;
            assert!((lhs - rhs).abs() <= 1e-12 * (1.0 + lhs));
            state = next;
        }
    }

    #[test]
    fn nan_is_reported_with_stage() {
        let bad: ResolventOp = Arc::new(
            crate::operators::FnResolvent::new(1, |p: &[f64], _| vec![p[0] / 0.0 * 0.0]).unwrap(),
        );
        let id: LinearOp = Arc::new(ScaledIdentity::identity(1).unwrap());
        let spec =
            ProblemSpec::new(1, vec![shifted(1.0), bad], vec![shifted(0.0)], vec![id]).unwrap();
        let c = cfg(&spec, 0.5, 1.0);
        match step(&SolverState::zeros(&spec), &spec, &c) {
            Err(Error::NumericalFailure { stage }) => assert_eq!(stage, "x_2"),
            other => panic!("expected numerical failure, got {other:?}"),
        }
    }

    #[test]
    fn state_shape_is_checked() {
        let spec = toy();
        let c = cfg(&spec, 0.5, 1.0);
        let bad = SolverState {
            z: vec![vec![0.0], vec![0.0]],
            v: vec![vec![0.0]],
            iteration: 0,
        };
        assert!(matches!(
            step(&bad, &spec, &c),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn single_primal_operator_scheme() {
        // n = 1: A = · − 1, B = · − 3, L = Id. Solution of 2x − 4 = 0 is x = 2, u = −1.
        let id: LinearOp = Arc::new(ScaledIdentity::identity(1).unwrap());
        let spec = ProblemSpec::new(1, vec![shifted(1.0)], vec![shifted(3.0)], vec![id]).unwrap();
        let c = cfg(&spec, 0.8, 1.0);
        let report = run(&spec, &c, SolverState::zeros(&spec)).unwrap();
        assert!(report.converged);
        assert!((report.solution.x_bar[0] - 2.0).abs() < 1e-9);
        assert!((report.solution.u_bar[0][0] + 1.0).abs() < 1e-9);
        let fp = fixed_point_from_solution(&[2.0], &[vec![-1.0]], &[vec![1.0]], &spec, &c).unwrap();
        let (_, d) = step(&fp, &spec, &c).unwrap();
        assert!(d.residual_gamma < 1e-14);
    }

    #[test]
    fn two_operator_malitsky_tam_is_douglas_rachford() {
        let ops = vec![shifted(1.0), shifted(5.0)];
        let mut w = vec![vec![0.0]];
        for _ in 0..200 {
            w = malitsky_tam_step(&w, &ops, 0.5).unwrap();
        }
        let x = ops[0].resolve(&w[0], 1.0);
        // zero of (x − 1) + (x − 5)
        assert!((x[0] - 3.0).abs() < 1e-10);
        assert!(malitsky_tam_step(&w, &ops[..1], 0.5).is_err());
    }

    #[test]
    fn averaged_slack_vanishes_for_identical_points() {
        let spec = toy();
        let c = cfg(&spec, 0.9, 1.0);
        let p = SolverState {
            z: vec![vec![0.3]],
            v: vec![vec![-1.2]],
            iteration: 0,
        };
        assert_eq!(check_averaged_inequality(&spec, &c, &p, &p).unwrap(), 0.0);
    }
}
