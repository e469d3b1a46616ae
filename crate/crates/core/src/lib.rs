//! Real Clifford algebras Cl(p,q) with frame fields, flat connections and
//! covariantly constant Yang-Mills solutions.
//!
//! The layers, bottom to top:
//!
//! * [`algebra`] / [`multivector`] — dense 2^n-coefficient multivectors and
//!   the geometric product, generic over exact-rational or `f64` scalars.
//! * [`jet`] / [`expr`] — order-2 jets (value, gradient, Hessian) and a
//!   small expression language for multivector fields over R^m, evaluated
//!   with exact derivatives.
//! * [`frames`] — frame fields h^a satisfying the generator relations
//!   pointwise, with constant, orthogonal-matrix and conjugation fixtures.
//! * [`connection`] — the flat connection attached to a frame, computed by
//!   two independent formulas (eigenprojections of the frame contraction
//!   operator, and averaging over the extended frame basis).
//! * [`gauge`] — covariant derivatives, covariantly constant fields and
//!   the Yang-Mills solution family B = C + K with its current.
//!
//! Everything downstream of a seed is deterministic.

// Index loops here typically walk several parallel arrays (values, jets,
// signs) at once; iterator rewrites would obscure the arithmetic.
#![allow(clippy::needless_range_loop)]

pub mod algebra;
pub mod connection;
pub mod error;
pub mod expr;
pub mod fixture;
pub mod fixtures;
pub mod frames;
pub mod gauge;
pub mod jet;
pub mod linalg;
pub mod multivector;
pub mod scalar;

pub use algebra::{blade_mul, Blade, Signature};
pub use connection::{
    connection_averaged_at, connection_averaged_reduced_at, connection_grade1_at,
    connection_omega_at, connection_projection_at, contraction_f, Connection, ConnectionReport,
    EigenTable,
};
pub use error::{Error, Result};
pub use expr::{finite_difference_check, Expr, FdReport, FieldExpr, JetEvaluator};
pub use fixture::{CovectorSpec, ExprSpec, FrameFixture};
pub use fixtures::FrameRecipe;
pub use frames::{Frame, FrameKind, FrameReport, GaugeScalar};
pub use gauge::{CovConstCovector, CovDerivReport, YangMillsField, YmReport};
pub use jet::{BaseSpace, Jet2};
pub use multivector::{blade_inverse, Multivector};
pub use scalar::{ratio, Rational, Scalar};
