//! Matrix-free primal-dual resolvent splitting with minimal lifting.
//!
//! The crate solves composite monotone inclusions
//!
//! ```text
//! find x such that 0 ∈ A_1(x) + … + A_n(x) + Σ_j L_j^* B_j(L_j x)
//! ```
//!
//! together with their dual, using only resolvent evaluations of the
//! `A_i` and `B_j`, forward/adjoint applications of the `L_j`, and vector
//! arithmetic. The lifted iterate lives in `H^{n-1} × G_1 × … × G_m`.
//!
//! Modules:
//!
//! * [`operators`]: resolvents, proximal maps, matrix-free linear maps and
//!   power-method norm estimation.
//! * [`modeling`]: problem assembly, product-space stacking and parameter
//!   validation.
//! * [`splitting`]: the fixed-point engine, residual bookkeeping, solution
//!   extraction and the reference Malitsky–Tam iteration.
//! * [`imaging`]: Haar wavelets, discrete TV, Gaussian blur and the
//!   TV/wavelet deblurring benchmark built on the engine.
//! * [`testbed`]: seeded problem instances shared by tests and the CLI.

pub mod error;
pub mod imaging;
pub mod modeling;
pub mod operators;
pub mod splitting;
pub mod testbed;
pub mod vector;

pub use error::{Error, Result};
pub use modeling::{ProblemSpec, SolverConfig, ValidatedConfig};
pub use operators::{BoxBounds, LinearMap, LinearOp, Resolvent, ResolventOp};
pub use splitting::{PrimalDualSolution, SolverState, StepDiagnostics};
