//! Whole-partial differentiation on constrained momentum space.
//!
//! A function `f(p, E(p))` depends on the momenta both explicitly and
//! through the energy on the mass shell. The whole-partial derivative
//! [`onshell::whole_partial`] adds the chain-rule terms through such derived
//! variables, with gradients kept in mixed form (`dE/dp_i = p_i/E`, `E`
//! literal) so that a later explicit `d/dE` sees them. Commutators of these
//! operators do not vanish, and the crate checks the resulting closed forms
//! against finite-difference and randomized-evaluation oracles.
//!
//! Modules:
//! - [`expr`]: expression trees, parser, printer, evaluation, explicit derivatives.
//! - [`onshell`]: charts of base/derived variables, whole-partial operators, commutators.
//! - [`helicity`]: helicity-basis polarization vectors, fields and the coordinate-commutator ansatz.
//! - [`shells`]: standard, de Sitter and deformed dispersion residuals; Dirac operators.
//! - [`ncalgebra`]: canonical and Lie-type coordinate algebras, Jacobi checks.
//! - [`verify`]: the verification suite behind `wholepartial verify`.

#![allow(clippy::needless_range_loop, clippy::neg_cmp_op_on_partial_ord, clippy::should_implement_trait)]

pub mod expr;
pub mod gen;
pub mod helicity;
pub mod ncalgebra;
pub mod numeric;
pub mod onshell;
pub mod shells;
pub mod verify;

pub use expr::{diff_explicit, equal_numeric, eval, parse, Bindings, Expr, ExprError, Sampler, C64};
pub use helicity::{FieldTriple, FourVector, Helicity, Kinematics};
pub use ncalgebra::{AlgebraElement, CoordAlgebra};
pub use onshell::{Chart, ChartError, DiffOp, OnShellSampler};
pub use shells::{DeformedMass, GammaSet, ShellDef};
pub use verify::{CheckResult, VerifyReport};
