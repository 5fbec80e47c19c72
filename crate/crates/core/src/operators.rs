//! Operator algebra consumed by the splitting engine.
//!
//! Maximally monotone operators are only ever touched through their
//! resolvents `J_{σA} = (Id + σA)^{-1}`; the step `σ` is supplied on every
//! call so one operator object serves both `J_{A}` and `J_{B/γ}`.
//! Linear maps are matrix-free: a forward application, an adjoint
//! application and an upper bound on the operator norm.

use std::fmt;
use std::sync::Arc;

use rand::Rng;
use rand::SeedableRng;
use rand_xoshiro::SplitMix64;

use crate::error::{check_len, Error, Result};
use crate::vector::{dot, norm, norm_sq};

/// A maximally monotone operator exposed through its parametrized resolvent.
pub trait Resolvent: Send + Sync {
    /// Ambient dimension of the space the operator acts on.
    fn dim(&self) -> usize;

    /// Evaluates `(Id + step·A)^{-1}(point)`.
    ///
    /// Callers guarantee `point.len() == self.dim()` and `step > 0`.
    fn resolve(&self, point: &[f64], step: f64) -> Vec<f64>;
}

pub type ResolventOp = Arc<dyn Resolvent>;

/// A bounded linear operator `R^{dim_in} → R^{dim_out}` with its adjoint.
pub trait LinearMap: Send + Sync {
    fn dim_in(&self) -> usize;
    fn dim_out(&self) -> usize;
    fn forward(&self, x: &[f64]) -> Vec<f64>;
    fn adjoint(&self, y: &[f64]) -> Vec<f64>;
    /// Upper bound on `‖L‖`.
    fn norm_bound(&self) -> f64;
}

pub type LinearOp = Arc<dyn LinearMap>;

fn check_dim(what: &'static str, dim: usize) -> Result<()> {
    if dim == 0 {
        Err(Error::EmptyDimension(what))
    } else {
        Ok(())
    }
}

fn check_positive(name: &'static str, value: f64) -> Result<()> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            name,
            reason: format!("must be positive and finite, got {value}"),
        })
    }
}

fn check_nonnegative(name: &'static str, value: f64) -> Result<()> {
    if value.is_finite() && value >= 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            name,
            reason: format!("must be nonnegative and finite, got {value}"),
        })
    }
}

// ---------------------------------------------------------------------------
// Closed-form resolvents and proximal maps
// ---------------------------------------------------------------------------

/// Resolvent of `A(x) = x − c`: the unique `x` with `x + step·(x − c) = point`.
pub fn resolvent_shifted_identity(c: &[f64], point: &[f64], step: f64) -> Result<Vec<f64>> {
    check_len("resolvent_shifted_identity", c.len(), point.len())?;
    check_positive("step", step)?;
    let denom = 1.0 + step;
    Ok(point
        .iter()
        .zip(c)
        .map(|(p, ci)| (p + step * ci) / denom)
        .collect())
}

#[inline]
fn soft_threshold(value: f64, threshold: f64) -> f64 {
    let magnitude = value.abs() - threshold;
    if magnitude > 0.0 {
        magnitude.copysign(value)
    } else {
        0.0
    }
}

/// Soft thresholding, the proximal map of `threshold·‖·‖₁`.
pub fn prox_l1(x: &[f64], threshold: f64) -> Result<Vec<f64>> {
    check_nonnegative("threshold", threshold)?;
    Ok(x.iter().map(|&v| soft_threshold(v, threshold)).collect())
}

/// Proximal map of `threshold·‖· − anchor‖₁`.
pub fn prox_l1_shifted(x: &[f64], anchor: &[f64], threshold: f64) -> Result<Vec<f64>> {
    check_len("prox_l1_shifted", anchor.len(), x.len())?;
    check_nonnegative("threshold", threshold)?;
    Ok(x.iter()
        .zip(anchor)
        .map(|(&v, &a)| a + soft_threshold(v - a, threshold))
        .collect())
}

/// Closed interval `[lo, hi]` applied componentwise.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoxBounds {
    lo: f64,
    hi: f64,
}

impl BoxBounds {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if lo.is_nan() || hi.is_nan() || lo > hi {
            return Err(Error::InvalidParameter {
                name: "bounds",
                reason: format!("need lo <= hi, got [{lo}, {hi}]"),
            });
        }
        Ok(BoxBounds { lo, hi })
    }

    /// The symmetric interval `[-radius, radius]`.
    pub fn symmetric(radius: f64) -> Result<Self> {
        Self::new(-radius, radius)
    }

    pub fn lo(&self) -> f64 {
        self.lo
    }

    pub fn hi(&self) -> f64 {
        self.hi
    }

    pub fn contains(&self, value: f64, tolerance: f64) -> bool {
        value >= self.lo - tolerance && value <= self.hi + tolerance
    }
}

/// Componentwise clamp onto a box; the resolvent of its normal cone.
pub fn project_box(x: &[f64], bounds: BoxBounds) -> Vec<f64> {
    x.iter().map(|v| v.clamp(bounds.lo, bounds.hi)).collect()
}

/// Projects each pair `(p_k, q_k)` onto the Euclidean disc of `radius`.
pub fn project_dual_ball(p: &[f64], q: &[f64], radius: f64) -> Result<(Vec<f64>, Vec<f64>)> {
    check_len("project_dual_ball", p.len(), q.len())?;
    check_nonnegative("radius", radius)?;
    if radius == 0.0 {
        return Ok((vec![0.0; p.len()], vec![0.0; q.len()]));
    }
    let mut p_out = Vec::with_capacity(p.len());
    let mut q_out = Vec::with_capacity(q.len());
    for (&pk, &qk) in p.iter().zip(q) {
        let factor = radius / radius.max(pk.hypot(qk));
        p_out.push(pk * factor);
        q_out.push(qk * factor);
    }
    Ok((p_out, q_out))
}

/// Proximal map of the conjugate `g*` obtained from the proximal map of `g`
/// through the Moreau decomposition:
///
/// `prox_{σ g*}(x) = x − σ · prox_{g/σ}(x / σ)`.
///
/// `prox_g(point, param)` must evaluate `prox_{param·g}(point)`.
pub fn moreau_prox_conjugate<F>(x: &[f64], step: f64, prox_g: F) -> Result<Vec<f64>>
where
    F: Fn(&[f64], f64) -> Vec<f64>,
{
    check_positive("step", step)?;
    let scaled: Vec<f64> = x.iter().map(|v| v / step).collect();
    let inner = prox_g(&scaled, 1.0 / step);
    check_len("moreau_prox_conjugate", x.len(), inner.len())?;
    Ok(x.iter().zip(&inner).map(|(v, w)| v - step * w).collect())
}

// ---------------------------------------------------------------------------
// Resolvent operators
// ---------------------------------------------------------------------------

/// The zero operator; its resolvent is the identity for every step.
#[derive(Debug, Clone)]
pub struct ZeroOperator {
    dim: usize,
}

impl ZeroOperator {
    pub fn new(dim: usize) -> Result<Self> {
        check_dim("zero operator", dim)?;
        Ok(ZeroOperator { dim })
    }
}

impl Resolvent for ZeroOperator {
    fn dim(&self) -> usize {
        self.dim
    }

    fn resolve(&self, point: &[f64], _step: f64) -> Vec<f64> {
        point.to_vec()
    }
}

/// `A(x) = x − c`, the gradient of `½‖x − c‖²`.
#[derive(Debug, Clone)]
pub struct ShiftedIdentity {
    shift: Vec<f64>,
}

impl ShiftedIdentity {
    pub fn new(shift: Vec<f64>) -> Result<Self> {
        check_dim("shifted identity", shift.len())?;
        Ok(ShiftedIdentity { shift })
    }

    pub fn shift(&self) -> &[f64] {
        &self.shift
    }

    /// The single value `A(x) = x − c`.
    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        x.iter().zip(&self.shift).map(|(a, c)| a - c).collect()
    }
}

impl Resolvent for ShiftedIdentity {
    fn dim(&self) -> usize {
        self.shift.len()
    }

    fn resolve(&self, point: &[f64], step: f64) -> Vec<f64> {
        let denom = 1.0 + step;
        point
            .iter()
            .zip(&self.shift)
            .map(|(p, c)| (p + step * c) / denom)
            .collect()
    }
}

/// Normal cone of a box. The resolvent is the projection for every step.
#[derive(Debug, Clone)]
pub struct BoxIndicator {
    dim: usize,
    bounds: BoxBounds,
}

impl BoxIndicator {
    pub fn new(dim: usize, bounds: BoxBounds) -> Result<Self> {
        check_dim("box indicator", dim)?;
        Ok(BoxIndicator { dim, bounds })
    }

    pub fn bounds(&self) -> BoxBounds {
        self.bounds
    }
}

impl Resolvent for BoxIndicator {
    fn dim(&self) -> usize {
        self.dim
    }

    fn resolve(&self, point: &[f64], _step: f64) -> Vec<f64> {
        project_box(point, self.bounds)
    }
}

/// Subdifferential of `weight·‖· − anchor‖₁`.
#[derive(Debug, Clone)]
pub struct WeightedL1 {
    anchor: Vec<f64>,
    weight: f64,
}

impl WeightedL1 {
    pub fn new(anchor: Vec<f64>, weight: f64) -> Result<Self> {
        check_dim("weighted l1", anchor.len())?;
        check_nonnegative("weight", weight)?;
        Ok(WeightedL1 { anchor, weight })
    }

    /// `weight·‖·‖₁` without shift.
    pub fn centered(dim: usize, weight: f64) -> Result<Self> {
        Self::new(vec![0.0; dim], weight)
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        self.weight
            * x.iter()
                .zip(&self.anchor)
                .map(|(v, a)| (v - a).abs())
                .sum::<f64>()
    }
}

impl Resolvent for WeightedL1 {
    fn dim(&self) -> usize {
        self.anchor.len()
    }

    fn resolve(&self, point: &[f64], step: f64) -> Vec<f64> {
        let threshold = step * self.weight;
        point
            .iter()
            .zip(&self.anchor)
            .map(|(&v, &a)| a + soft_threshold(v - a, threshold))
            .collect()
    }
}

/// Subdifferential of the isotropic group norm `radius·Σ_k ‖(p_k, q_k)‖₂`
/// on vectors laid out as `[p_1..p_K, q_1..q_K]`.
///
/// The conjugate is the indicator of the set where every pair has norm at
/// most `radius`, so the proximal map is evaluated through the Moreau
/// decomposition with [`project_dual_ball`].
#[derive(Debug, Clone)]
pub struct GroupL1 {
    pairs: usize,
    radius: f64,
}

impl GroupL1 {
    pub fn new(pairs: usize, radius: f64) -> Result<Self> {
        check_dim("group l1", pairs)?;
        check_nonnegative("radius", radius)?;
        Ok(GroupL1 { pairs, radius })
    }

    pub fn value(&self, pq: &[f64]) -> f64 {
        let (p, q) = pq.split_at(self.pairs);
        self.radius * p.iter().zip(q).map(|(a, b)| a.hypot(*b)).sum::<f64>()
    }

    fn project(&self, pq: &[f64]) -> Vec<f64> {
        let (p, q) = pq.split_at(self.pairs);
        let (mut p_out, q_out) =
            project_dual_ball(p, q, self.radius).expect("pair blocks have equal length");
        p_out.extend(q_out);
        p_out
    }
}

impl Resolvent for GroupL1 {
    fn dim(&self) -> usize {
        2 * self.pairs
    }

    fn resolve(&self, point: &[f64], step: f64) -> Vec<f64> {
        // prox_{σg} = prox_{σ(g*)*}; the prox of g* is P_S for any parameter.
        moreau_prox_conjugate(point, step, |w, _| self.project(w))
            .expect("step is positive and dimensions agree")
    }
}

/// Subdifferential of `weight·‖W·‖₁` for an orthonormal map `W`
/// (`W*W = WW* = Id`). The resolvent is `Id − W* ∘ P_{[−σw, σw]} ∘ W`.
pub struct OrthonormalL1 {
    transform: LinearOp,
    weight: f64,
}

impl OrthonormalL1 {
    pub fn new(transform: LinearOp, weight: f64) -> Result<Self> {
        check_len(
            "orthonormal l1 (square transform)",
            transform.dim_in(),
            transform.dim_out(),
        )?;
        check_dim("orthonormal l1", transform.dim_in())?;
        check_nonnegative("weight", weight)?;
        Ok(OrthonormalL1 { transform, weight })
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        self.weight * self.transform.forward(x).iter().map(|c| c.abs()).sum::<f64>()
    }
}

impl fmt::Debug for OrthonormalL1 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("OrthonormalL1")
            .field("dim", &self.transform.dim_in())
            .field("weight", &self.weight)
            .finish()
    }
}

impl Resolvent for OrthonormalL1 {
    fn dim(&self) -> usize {
        self.transform.dim_in()
    }

    fn resolve(&self, point: &[f64], step: f64) -> Vec<f64> {
        let bounds = BoxBounds::symmetric(step * self.weight).expect("nonnegative radius");
        let clipped = project_box(&self.transform.forward(point), bounds);
        let back = self.transform.adjoint(&clipped);
        point.iter().zip(&back).map(|(p, b)| p - b).collect()
    }
}

/// Wraps a closure `(point, step) -> J_{step·A}(point)`.
pub struct FnResolvent<F> {
    dim: usize,
    eval: F,
}

impl<F> FnResolvent<F>
where
    F: Fn(&[f64], f64) -> Vec<f64> + Send + Sync,
{
    pub fn new(dim: usize, eval: F) -> Result<Self> {
        check_dim("closure resolvent", dim)?;
        Ok(FnResolvent { dim, eval })
    }
}

impl<F> Resolvent for FnResolvent<F>
where
    F: Fn(&[f64], f64) -> Vec<f64> + Send + Sync,
{
    fn dim(&self) -> usize {
        self.dim
    }

    fn resolve(&self, point: &[f64], step: f64) -> Vec<f64> {
        (self.eval)(point, step)
    }
}

// ---------------------------------------------------------------------------
// Linear maps
// ---------------------------------------------------------------------------

/// `x ↦ factor·x`. `factor = 1` is the identity.
#[derive(Debug, Clone)]
pub struct ScaledIdentity {
    dim: usize,
    factor: f64,
}

impl ScaledIdentity {
    pub fn new(dim: usize, factor: f64) -> Result<Self> {
        check_dim("scaled identity", dim)?;
        if !factor.is_finite() {
            return Err(Error::InvalidParameter {
                name: "factor",
                reason: format!("must be finite, got {factor}"),
            });
        }
        Ok(ScaledIdentity { dim, factor })
    }

    pub fn identity(dim: usize) -> Result<Self> {
        Self::new(dim, 1.0)
    }
}

impl LinearMap for ScaledIdentity {
    fn dim_in(&self) -> usize {
        self.dim
    }

    fn dim_out(&self) -> usize {
        self.dim
    }

    fn forward(&self, x: &[f64]) -> Vec<f64> {
        x.iter().map(|v| self.factor * v).collect()
    }

    fn adjoint(&self, y: &[f64]) -> Vec<f64> {
        self.forward(y)
    }

    fn norm_bound(&self) -> f64 {
        self.factor.abs()
    }
}

/// Diagonal map with the given entries.
#[derive(Debug, Clone)]
pub struct Diagonal {
    entries: Vec<f64>,
}

impl Diagonal {
    pub fn new(entries: Vec<f64>) -> Result<Self> {
        check_dim("diagonal map", entries.len())?;
        Ok(Diagonal { entries })
    }
}

impl LinearMap for Diagonal {
    fn dim_in(&self) -> usize {
        self.entries.len()
    }

    fn dim_out(&self) -> usize {
        self.entries.len()
    }

    fn forward(&self, x: &[f64]) -> Vec<f64> {
        x.iter().zip(&self.entries).map(|(v, d)| v * d).collect()
    }

    fn adjoint(&self, y: &[f64]) -> Vec<f64> {
        self.forward(y)
    }

    fn norm_bound(&self) -> f64 {
        self.entries.iter().fold(0.0, |acc, d| acc.max(d.abs()))
    }
}

/// The zero map between two spaces.
#[derive(Debug, Clone)]
pub struct ZeroMap {
    dim_in: usize,
    dim_out: usize,
}

impl ZeroMap {
    pub fn new(dim_in: usize, dim_out: usize) -> Result<Self> {
        check_dim("zero map input", dim_in)?;
        check_dim("zero map output", dim_out)?;
        Ok(ZeroMap { dim_in, dim_out })
    }
}

impl LinearMap for ZeroMap {
    fn dim_in(&self) -> usize {
        self.dim_in
    }

    fn dim_out(&self) -> usize {
        self.dim_out
    }

    fn forward(&self, _x: &[f64]) -> Vec<f64> {
        vec![0.0; self.dim_out]
    }

    fn adjoint(&self, _y: &[f64]) -> Vec<f64> {
        vec![0.0; self.dim_in]
    }

    fn norm_bound(&self) -> f64 {
        0.0
    }
}

/// Row-major dense matrix. The default norm bound is the Frobenius norm.
#[derive(Debug, Clone)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
    bound: f64,
}

impl DenseMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        check_dim("matrix rows", rows)?;
        check_dim("matrix cols", cols)?;
        check_len("dense matrix data", rows * cols, data.len())?;
        let bound = norm(&data);
        Ok(DenseMatrix {
            rows,
            cols,
            data,
            bound,
        })
    }

    /// Replaces the Frobenius bound with a caller-supplied (tighter) bound.
    pub fn with_norm_bound(mut self, bound: f64) -> Result<Self> {
        check_nonnegative("norm bound", bound)?;
        self.bound = bound;
        Ok(self)
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }
}

impl LinearMap for DenseMatrix {
    fn dim_in(&self) -> usize {
        self.cols
    }

    fn dim_out(&self) -> usize {
        self.rows
    }

    fn forward(&self, x: &[f64]) -> Vec<f64> {
        self.data.chunks_exact(self.cols).map(|row| dot(row, x)).collect()
    }

    fn adjoint(&self, y: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.cols];
        for (row, &yi) in self.data.chunks_exact(self.cols).zip(y) {
            for (o, a) in out.iter_mut().zip(row) {
                *o += a * yi;
            }
        }
        out
    }

    fn norm_bound(&self) -> f64 {
        self.bound
    }
}

// ---------------------------------------------------------------------------
// Norm estimation
// ---------------------------------------------------------------------------

const POWER_METHOD_RTOL: f64 = 1e-10;

/// Power iteration on `L*L` from a seeded random start.
///
/// Returns `‖L x‖` for the final unit iterate `x`, which never exceeds `‖L‖`.
/// Stops after `iterations` rounds or once the estimate changes by less than
/// `1e-10` relatively.
pub fn estimate_operator_norm(map: &dyn LinearMap, iterations: usize, seed: u64) -> f64 {
    let mut rng = SplitMix64::seed_from_u64(seed);
    let mut x: Vec<f64> = (0..map.dim_in())
        .map(|_| rng.random_range(-1.0..1.0))
        .collect();
    let start_norm = norm(&x);
    if start_norm == 0.0 {
        return 0.0;
    }
    x.iter_mut().for_each(|v| *v /= start_norm);

    let mut estimate = norm(&map.forward(&x));
    for _ in 0..iterations {
        let w = map.adjoint(&map.forward(&x));
        let w_norm = norm(&w);
        if w_norm == 0.0 || !w_norm.is_finite() {
            return 0.0;
        }
        x = w.into_iter().map(|v| v / w_norm).collect();
        let next = norm(&map.forward(&x));
        let change = (next - estimate).abs();
        estimate = next;
        if change <= POWER_METHOD_RTOL * estimate {
            break;
        }
    }
    estimate
}

/// Largest `|⟨Lx, y⟩ − ⟨x, L*y⟩| / (1 + ‖x‖‖y‖)` over seeded random pairs.
pub fn adjoint_mismatch(map: &dyn LinearMap, samples: usize, seed: u64) -> f64 {
    let mut rng = SplitMix64::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..samples {
        let x: Vec<f64> = (0..map.dim_in()).map(|_| rng.random_range(-1.0..1.0)).collect();
        let y: Vec<f64> = (0..map.dim_out()).map(|_| rng.random_range(-1.0..1.0)).collect();
        let lhs = dot(&map.forward(&x), &y);
        let rhs = dot(&x, &map.adjoint(&y));
        let rel = (lhs - rhs).abs() / (1.0 + (norm_sq(&x) * norm_sq(&y)).sqrt());
        worst = worst.max(rel);
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::vector::{dist_sq, sub};

    fn assert_close(a: &[f64], b: &[f64], tol: f64) {
        assert_eq!(a.len(), b.len());
        for (x, y) in a.iter().zip(b) {
            assert!((x - y).abs() <= tol, "{a:?} vs {b:?}");
        }
    }

    #[test]
    fn shifted_identity_examples() {
        let p = [0.4, -2.0, 7.0];
        let out = resolvent_shifted_identity(&[0.0; 3], &p, 1.0).unwrap();
        assert_close(&out, &[0.2, -1.0, 3.5], 1e-15);
        assert_eq!(resolvent_shifted_identity(&[1.0], &[1.0], 1.0).unwrap(), vec![1.0]);
        assert_eq!(resolvent_shifted_identity(&[3.0], &[0.0], 1.0).unwrap(), vec![1.5]);
        assert!(matches!(
            resolvent_shifted_identity(&[1.0, 2.0], &[1.0], 1.0),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn shifted_identity_operator_agrees_with_closed_form() {
        let op = ShiftedIdentity::new(vec![3.0, -1.0]).unwrap();
        let p = [0.5, 2.0];
        let got = op.resolve(&p, 0.7);
        let want = resolvent_shifted_identity(&[3.0, -1.0], &p, 0.7).unwrap();
        assert_close(&got, &want, 1e-15);
        // x + σ(x − c) = p
        let back: Vec<f64> = got
            .iter()
            .zip(op.apply(&got))
            .map(|(x, a)| x + 0.7 * a)
            .collect();
        assert_close(&back, &p, 1e-14);
    }

    #[test]
    fn prox_l1_examples() {
        assert_eq!(prox_l1(&[0.5], 1.0).unwrap(), vec![0.0]);
        assert_eq!(prox_l1(&[2.0, -2.0], 1.0).unwrap(), vec![1.0, -1.0]);
        assert_close(
            &prox_l1(&[0.3, -0.7, 1.2], 0.25).unwrap(),
            &[0.05, -0.45, 0.95],
            1e-15,
        );
        assert!(matches!(
            prox_l1(&[1.0], -0.1),
            Err(Error::InvalidParameter { .. })
        ));
    }

    #[test]
    fn prox_l1_shifted_examples() {
        let x = [0.3, -0.7, 1.2];
        assert_eq!(
            prox_l1_shifted(&x, &[0.0; 3], 0.25).unwrap(),
            prox_l1(&x, 0.25).unwrap()
        );
        assert_eq!(prox_l1_shifted(&x, &x, 5.0).unwrap(), x.to_vec());
        assert_eq!(prox_l1_shifted(&[3.0], &[1.0], 0.5).unwrap(), vec![2.5]);
        assert!(prox_l1_shifted(&[3.0], &[1.0, 2.0], 0.5).is_err());
    }

    #[test]
    fn project_box_examples() {
        let unit = BoxBounds::new(0.0, 1.0).unwrap();
        assert_eq!(project_box(&[0.2, 0.9], unit), vec![0.2, 0.9]);
        assert_eq!(project_box(&[-1.0, 2.0], unit), vec![0.0, 1.0]);
        let mu = 1.0 / 8f64.sqrt();
        let scaled = BoxBounds::new(0.0, 1.0 / mu).unwrap();
        assert_eq!(project_box(&[0.5, 1.7], scaled), vec![0.5, 1.7]);
        assert!(BoxBounds::new(1.0, 0.0).is_err());
    }

    #[test]
    fn project_dual_ball_examples() {
        let (p, q) = project_dual_ball(&[0.1, -0.2], &[0.3, 0.1], 1.0).unwrap();
        assert_eq!((p, q), (vec![0.1, -0.2], vec![0.3, 0.1]));
        let (p, q) = project_dual_ball(&[3.0], &[4.0], 1.0).unwrap();
        assert_close(&p, &[0.6], 1e-15);
        assert_close(&q, &[0.8], 1e-15);
        assert_eq!(
            project_dual_ball(&[0.0], &[0.0], 1.0).unwrap(),
            (vec![0.0], vec![0.0])
        );
        assert_eq!(project_dual_ball(&[1.0], &[1.0], 0.0).unwrap(), (vec![0.0], vec![0.0]));
        assert!(project_dual_ball(&[1.0], &[1.0], -1.0).is_err());
    }

    #[test]
    fn moreau_examples() {
        let x = [1.5, -2.0];
        // g = 0: prox_g = Id, the conjugate is the indicator of {0}.
        let out = moreau_prox_conjugate(&x, 0.7, |w, _| w.to_vec()).unwrap();
        assert_close(&out, &[0.0, 0.0], 1e-15);
        // g = indicator of {0}: prox_g ≡ 0, the conjugate is zero.
        let out = moreau_prox_conjugate(&x, 0.7, |w, _| vec![0.0; w.len()]).unwrap();
        assert_eq!(out, x.to_vec());
        // g = ‖·‖₁: the conjugate prox is the projection onto [-1, 1].
        let out = moreau_prox_conjugate(&[2.0], 1.0, |w, s| prox_l1(w, s).unwrap()).unwrap();
        assert_close(&out, &[1.0], 1e-15);
        assert!(moreau_prox_conjugate(&x, 0.0, |w, _| w.to_vec()).is_err());
    }

    #[test]
    fn moreau_consistency_for_shipped_pairs() {
        let mut rng = SplitMix64::seed_from_u64(11);
        let alpha = 0.3;
        for _ in 0..50 {
            let sigma: f64 = rng.random_range(0.05..5.0);
            let x: Vec<f64> = (0..8).map(|_| rng.random_range(-3.0..3.0)).collect();

            // g₁ = α‖·‖₁ with g₁* = indicator of [−α, α]^n.
            let prox = prox_l1(&x, sigma * alpha).unwrap();
            let conj = moreau_prox_conjugate(&x, sigma, |w, s| prox_l1(w, s * alpha).unwrap())
                .unwrap();
            let bounds = BoxBounds::symmetric(alpha).unwrap();
            let scaled: Vec<f64> = x.iter().map(|v| v / sigma).collect();
            let dual = project_box(&scaled, bounds);
            let sum: Vec<f64> = prox.iter().zip(&dual).map(|(a, b)| a + sigma * b).collect();
            assert_close(&sum, &x, 1e-12);
            // prox_{σ g₁*} is the projection onto [−α, α] whatever σ is.
            assert_close(&conj, &project_box(&x, bounds), 1e-12);

            // g₃ = α Σ‖(p,q)‖ with g₃* = indicator of the α-disc set.
            let group = GroupL1::new(4, alpha).unwrap();
            let prox3 = group.resolve(&x, sigma);
            let (p, q) = x.split_at(4);
            let (pp, qp) = project_dual_ball(
                &p.iter().map(|v| v / sigma).collect::<Vec<_>>(),
                &q.iter().map(|v| v / sigma).collect::<Vec<_>>(),
                alpha,
            )
            .unwrap();
            let mut proj = pp;
            proj.extend(qp);
            let sum: Vec<f64> = prox3.iter().zip(&proj).map(|(a, b)| a + sigma * b).collect();
            assert_close(&sum, &x, 1e-12);
        }
    }

    #[test]
    fn group_l1_prox_matches_closed_form_shrinkage() {
        // prox of σα‖(p,q)‖ shrinks each pair's norm by σα.
        let op = GroupL1::new(2, 0.5).unwrap();
        let out = op.resolve(&[3.0, 0.1, 4.0, 0.0], 2.0);
        // pair 1: norm 5 → 4, pair 2: norm 0.1 ≤ 1 → 0
        assert_close(&out, &[2.4, 0.0, 3.2, 0.0], 1e-14);
    }

    #[test]
    fn weighted_l1_resolvent_uses_scaled_threshold() {
        let op = WeightedL1::new(vec![1.0, 1.0], 0.5).unwrap();
        assert_close(&op.resolve(&[3.0, 1.2], 2.0), &[2.0, 1.0], 1e-15);
        assert_close(&[op.value(&[3.0, 0.0])], &[1.5], 1e-15);
    }

    fn sample(rng: &mut SplitMix64, dim: usize) -> Vec<f64> {
        (0..dim).map(|_| rng.random_range(-4.0..4.0)).collect()
    }

    #[test]
    fn shipped_resolvents_are_firmly_nonexpansive() {
        let dim = 6;
        let haar = Arc::new(crate::imaging::HaarTransform::new(2, 2).unwrap()) as LinearOp;
        let ops: Vec<(&str, ResolventOp)> = vec![
            ("zero", Arc::new(ZeroOperator::new(dim).unwrap())),
            (
                "shifted",
                Arc::new(ShiftedIdentity::new(vec![0.5, -1.0, 2.0, 0.0, 3.0, -2.0]).unwrap()),
            ),
            (
                "box",
                Arc::new(BoxIndicator::new(dim, BoxBounds::new(-0.5, 1.5).unwrap()).unwrap()),
            ),
            (
                "l1",
                Arc::new(WeightedL1::new(vec![1.0, 0.0, -1.0, 2.0, 0.5, 0.0], 0.8).unwrap()),
            ),
            ("group", Arc::new(GroupL1::new(3, 0.7).unwrap())),
        ];
        let mut rng = SplitMix64::seed_from_u64(5);
        for (name, op) in ops.iter() {
            for _ in 0..500 {
                let p = sample(&mut rng, dim);
                let q = sample(&mut rng, dim);
                let step = rng.random_range(0.01..10.0);
                let jp = op.resolve(&p, step);
                let jq = op.resolve(&q, step);
                let dj = sub(&jp, &jq);
                let lhs = norm_sq(&dj);
                let rhs = dot(&dj, &sub(&p, &q));
                assert!(lhs <= rhs + 1e-12, "{name}: {lhs} > {rhs}");
            }
        }
        let wl1 = OrthonormalL1::new(haar, 0.4).unwrap();
        for _ in 0..500 {
            let p = sample(&mut rng, 4);
            let q = sample(&mut rng, 4);
            let jp = wl1.resolve(&p, 1.3);
            let jq = wl1.resolve(&q, 1.3);
            let dj = sub(&jp, &jq);
            assert!(norm_sq(&dj) <= dot(&dj, &sub(&p, &q)) + 1e-12);
        }
    }

    #[test]
    fn projections_are_idempotent() {
        let mut rng = SplitMix64::seed_from_u64(9);
        let bounds = BoxBounds::new(-0.3, 0.8).unwrap();
        for _ in 0..100 {
            let x = sample(&mut rng, 10);
            let once = project_box(&x, bounds);
            assert_eq!(project_box(&once, bounds), once);
            let (p, q) = x.split_at(5);
            let (p1, q1) = project_dual_ball(p, q, 1.5).unwrap();
            let (p2, q2) = project_dual_ball(&p1, &q1, 1.5).unwrap();
            assert!(dist_sq(&p1, &p2) + dist_sq(&q1, &q2) <= 1e-30);
        }
    }

    #[test]
    fn power_method_examples() {
        let two_id = ScaledIdentity::new(5, 2.0).unwrap();
        assert!((estimate_operator_norm(&two_id, 200, 1) - 2.0).abs() <= 1e-8);
        let diag = Diagonal::new(vec![1.0, 3.0]).unwrap();
        assert!((estimate_operator_norm(&diag, 200, 1) - 3.0).abs() <= 1e-6);
        let zero = ZeroMap::new(3, 2).unwrap();
        assert_eq!(estimate_operator_norm(&zero, 200, 1), 0.0);
        // deterministic for a fixed seed
        let m = DenseMatrix::new(2, 3, vec![1.0, 2.0, 0.0, -1.0, 0.5, 3.0]).unwrap();
        assert_eq!(
            estimate_operator_norm(&m, 50, 42),
            estimate_operator_norm(&m, 50, 42)
        );
    }

    #[test]
    fn shipped_linear_maps_satisfy_adjoint_identity() {
        let maps: Vec<LinearOp> = vec![
            Arc::new(ScaledIdentity::new(4, -1.5).unwrap()),
            Arc::new(Diagonal::new(vec![1.0, -2.0, 0.5]).unwrap()),
            Arc::new(ZeroMap::new(3, 5).unwrap()),
            Arc::new(DenseMatrix::new(3, 2, vec![1.0, 2.0, -1.0, 0.0, 4.0, 0.5]).unwrap()),
        ];
        for map in &maps {
            assert!(adjoint_mismatch(map.as_ref(), 100, 3) <= 1e-10);
            assert!(
                estimate_operator_norm(map.as_ref(), 500, 4) <= map.norm_bound() + 1e-12,
                "norm bound must dominate the estimate"
            );
        }
    }

    #[test]
    fn zero_dimensions_are_rejected() {
        assert!(matches!(ZeroOperator::new(0), Err(Error::EmptyDimension(_))));
        assert!(ShiftedIdentity::new(vec![]).is_err());
        assert!(DenseMatrix::new(0, 2, vec![]).is_err());
        assert!(ScaledIdentity::identity(0).is_err());
    }
}
