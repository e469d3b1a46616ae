//! Serializable scenario descriptions.
//!
//! A [`FrameFixture`] pins everything needed to rebuild a frame field:
//! the algebra signature, the base space, the frame kind, and either a
//! seeded random recipe or explicit generator expressions. Expressions
//! are stored as [`ExprSpec`] trees with `f64` constants; conversion to
//! exact scalars is lossless because every finite `f64` is a dyadic
//! rational.

use serde::{Deserialize, Serialize};

use crate::algebra::{Blade, Signature};
use crate::error::{Error, Result};
use crate::expr::{konst, Expr, FieldExpr, ScalarFn};
use crate::fixtures::{build_frame, FrameRecipe};
use crate::frames::{Frame, FrameKind, FrameSource, GaugeScalar};
use crate::jet::BaseSpace;
use crate::multivector::Multivector;
use crate::scalar::Scalar;

use rand_chacha::ChaCha8Rng;
use std::sync::Arc;

/// JSON form of a scalar function name.
#[derive(Copy, Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScalarFnSpec {
    Sin,
    Cos,
    Exp,
}

impl From<ScalarFnSpec> for ScalarFn {
    fn from(f: ScalarFnSpec) -> ScalarFn {
        match f {
            ScalarFnSpec::Sin => ScalarFn::Sin,
            ScalarFnSpec::Cos => ScalarFn::Cos,
            ScalarFnSpec::Exp => ScalarFn::Exp,
        }
    }
}

impl From<ScalarFn> for ScalarFnSpec {
    fn from(f: ScalarFn) -> ScalarFnSpec {
        match f {
            ScalarFn::Sin => ScalarFnSpec::Sin,
            ScalarFn::Cos => ScalarFnSpec::Cos,
            ScalarFn::Exp => ScalarFnSpec::Exp,
        }
    }
}

/// JSON form of a field expression. Constants list only their nonzero
/// blade coefficients as `[mask, value]` pairs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case")]
pub enum ExprSpec {
    Const { coeffs: Vec<(usize, f64)> },
    Coord { index: usize },
    Add { terms: Vec<ExprSpec> },
    Neg { arg: Box<ExprSpec> },
    Scale { factor: f64, arg: Box<ExprSpec> },
    Product { factors: Vec<ExprSpec> },
    Inverse { arg: Box<ExprSpec> },
    ExpSeries { arg: Box<ExprSpec> },
    Apply { function: ScalarFnSpec, arg: Box<ExprSpec> },
    Deriv { arg: Box<ExprSpec>, direction: usize },
}

impl ExprSpec {
    /// Build the runtime expression, validating masks and coordinate
    /// indices against the given algebra and base space.
    pub fn to_expr<S: Scalar>(&self, sig: Signature, base: BaseSpace) -> Result<Expr<S>> {
        let dim = sig.dim();
        Ok(match self {
            ExprSpec::Const { coeffs } => {
                let mut m = Multivector::zero(sig);
                for &(mask, value) in coeffs {
                    if mask >= dim {
                        return Err(Error::InvalidFixture(format!(
                            "blade mask {mask} out of range for a {dim}-dimensional algebra"
                        )));
                    }
                    m.set_coeff(Blade::from_mask(mask as u32), S::from_f64(value));
                }
                konst(m)
            }
            ExprSpec::Coord { index } => {
                if *index >= base.m() {
                    return Err(Error::InvalidFixture(format!(
                        "coordinate index {index} out of range for base dimension {}",
                        base.m()
                    )));
                }
                crate::expr::coord(*index)
            }
            ExprSpec::Add { terms } => {
                if terms.is_empty() {
                    return Err(Error::InvalidFixture("empty sum".into()));
                }
                let built: Vec<Expr<S>> = terms
                    .iter()
                    .map(|t| t.to_expr(sig, base))
                    .collect::<Result<_>>()?;
                crate::expr::add_all(&built)
            }
            ExprSpec::Neg { arg } => crate::expr::neg(&arg.to_expr(sig, base)?),
            ExprSpec::Scale { factor, arg } => {
                crate::expr::scale(S::from_f64(*factor), &arg.to_expr(sig, base)?)
            }
            ExprSpec::Product { factors } => {
                if factors.is_empty() {
                    return Err(Error::InvalidFixture("empty product".into()));
                }
                let built: Vec<Expr<S>> = factors
                    .iter()
                    .map(|t| t.to_expr(sig, base))
                    .collect::<Result<_>>()?;
                crate::expr::product_all(&built)
            }
            ExprSpec::Inverse { arg } => crate::expr::inverse(&arg.to_expr(sig, base)?),
            ExprSpec::ExpSeries { arg } => crate::expr::exp_series(&arg.to_expr(sig, base)?),
            ExprSpec::Apply { function, arg } => {
                crate::expr::apply((*function).into(), &arg.to_expr(sig, base)?)
            }
            ExprSpec::Deriv { arg, direction } => {
                if *direction >= base.m() {
                    return Err(Error::InvalidFixture(format!(
                        "derivative direction {direction} out of range for base dimension {}",
                        base.m()
                    )));
                }
                crate::expr::deriv(&arg.to_expr(sig, base)?, *direction)
            }
        })
    }

    /// Capture a runtime expression. Constants are stored as `f64`,
    /// which is exact for dyadic-rational coefficients.
    pub fn from_expr<S: Scalar>(expr: &Expr<S>) -> ExprSpec {
        match expr.as_ref() {
            FieldExpr::Const(m) => ExprSpec::Const {
                coeffs: m
                    .coeffs()
                    .iter()
                    .enumerate()
                    .filter(|(_, c)| !c.is_zero())
                    .map(|(mask, c)| (mask, c.to_f64()))
                    .collect(),
            },
            FieldExpr::Coord(index) => ExprSpec::Coord { index: *index },
            FieldExpr::Add(a, b) => {
                // Flatten nested sums for readable JSON.
                let mut terms = Vec::new();
                fn collect<S: Scalar>(e: &Expr<S>, out: &mut Vec<ExprSpec>) {
                    if let FieldExpr::Add(a, b) = e.as_ref() {
                        collect(a, out);
                        collect(b, out);
                    } else {
                        out.push(ExprSpec::from_expr(e));
                    }
                }
                collect(a, &mut terms);
                collect(b, &mut terms);
                ExprSpec::Add { terms }
            }
            FieldExpr::Neg(a) => ExprSpec::Neg {
                arg: Box::new(ExprSpec::from_expr(a)),
            },
            FieldExpr::Scale(s, a) => ExprSpec::Scale {
                factor: s.to_f64(),
                arg: Box::new(ExprSpec::from_expr(a)),
            },
            FieldExpr::Product(a, b) => ExprSpec::Product {
                factors: vec![ExprSpec::from_expr(a), ExprSpec::from_expr(b)],
            },
            FieldExpr::Inverse(a) => ExprSpec::Inverse {
                arg: Box::new(ExprSpec::from_expr(a)),
            },
            FieldExpr::ExpSeries(a) => ExprSpec::ExpSeries {
                arg: Box::new(ExprSpec::from_expr(a)),
            },
            FieldExpr::Apply(f, a) => ExprSpec::Apply {
                function: (*f).into(),
                arg: Box::new(ExprSpec::from_expr(a)),
            },
            FieldExpr::Deriv(a, direction) => ExprSpec::Deriv {
                arg: Box::new(ExprSpec::from_expr(a)),
                direction: *direction,
            },
        }
    }
}

/// A frame scenario: the algebra, the base space, and either a seeded
/// recipe or explicit generator expressions (exactly one of the two).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FrameFixture {
    /// (p, q): generators squaring to +1 and to -1.
    pub signature: (u8, u8),
    /// (k, l): base coordinates with rho = +1 and with rho = -1.
    pub base: (u8, u8),
    #[serde(default = "default_kind")]
    pub kind: FrameKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub recipe: Option<FrameRecipe>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generators: Option<Vec<ExprSpec>>,
}

fn default_kind() -> FrameKind {
    FrameKind::ScalarIndex
}

impl FrameFixture {
    pub fn seeded(signature: (u8, u8), base: (u8, u8), kind: FrameKind, recipe: FrameRecipe) -> Self {
        FrameFixture {
            signature,
            base,
            kind,
            recipe: Some(recipe),
            generators: None,
        }
    }

    pub fn signature(&self) -> Result<Signature> {
        Signature::new(self.signature.0, self.signature.1)
    }

    pub fn base_space(&self) -> Result<BaseSpace> {
        BaseSpace::new(self.base.0, self.base.1)
    }

    /// Build the frame. Random recipes draw from `rng`; explicit
    /// generators ignore it. Returns the conjugation scalar when the
    /// recipe has one, so callers can reuse it for gauge transforms.
    pub fn build<S: Scalar>(
        &self,
        rng: &mut ChaCha8Rng,
    ) -> Result<(Frame<S>, Option<GaugeScalar<S>>)> {
        let sig = self.signature()?;
        let base = self.base_space()?;
        match (&self.recipe, &self.generators) {
            (Some(recipe), None) => build_frame(*recipe, sig, base, self.kind, rng),
            (None, Some(specs)) => {
                if specs.len() != sig.n() as usize {
                    return Err(Error::InvalidFixture(format!(
                        "expected {} generator expressions, got {}",
                        sig.n(),
                        specs.len()
                    )));
                }
                let gens: Vec<Expr<S>> = specs
                    .iter()
                    .map(|s| s.to_expr(sig, base))
                    .collect::<Result<_>>()?;
                let frame = Frame::from_gens(sig, base, self.kind, FrameSource::Custom, gens)?;
                Ok((frame, None))
            }
            (Some(_), Some(_)) => Err(Error::InvalidFixture(
                "a fixture takes a recipe or explicit generators, not both".into(),
            )),
            (None, None) => Err(Error::InvalidFixture(
                "a fixture needs a recipe or explicit generators".into(),
            )),
        }
    }
}

/// Constant frame coefficients of a covector, row `mu`, column `mask`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CovectorSpec {
    pub coeffs: Vec<Vec<f64>>,
}

impl CovectorSpec {
    pub fn to_coeffs<S: Scalar>(&self, sig: Signature, base: BaseSpace) -> Result<Vec<Vec<S>>> {
        if self.coeffs.len() != base.m() {
            return Err(Error::InvalidFixture(format!(
                "expected {} covector rows, got {}",
                base.m(),
                self.coeffs.len()
            )));
        }
        for row in &self.coeffs {
            if row.len() != sig.dim() {
                return Err(Error::InvalidFixture(format!(
                    "expected {} covector coefficients per row, got {}",
                    sig.dim(),
                    row.len()
                )));
            }
        }
        Ok(self
            .coeffs
            .iter()
            .map(|row| row.iter().map(|&c| S::from_f64(c)).collect())
            .collect())
    }
}

/// Structural equality of expression trees, used to test that fixture
/// files reproduce the expressions they were captured from.
pub fn expr_structurally_eq<S: Scalar>(a: &Expr<S>, b: &Expr<S>) -> bool {
    if Arc::ptr_eq(a, b) {
        return true;
    }
    match (a.as_ref(), b.as_ref()) {
        (FieldExpr::Const(x), FieldExpr::Const(y)) => x == y,
        (FieldExpr::Coord(x), FieldExpr::Coord(y)) => x == y,
        (FieldExpr::Add(a1, a2), FieldExpr::Add(b1, b2))
        | (FieldExpr::Product(a1, a2), FieldExpr::Product(b1, b2)) => {
            expr_structurally_eq(a1, b1) && expr_structurally_eq(a2, b2)
        }
        (FieldExpr::Neg(x), FieldExpr::Neg(y))
        | (FieldExpr::Inverse(x), FieldExpr::Inverse(y))
        | (FieldExpr::ExpSeries(x), FieldExpr::ExpSeries(y)) => expr_structurally_eq(x, y),
        (FieldExpr::Scale(s, x), FieldExpr::Scale(t, y)) => s == t && expr_structurally_eq(x, y),
        (FieldExpr::Apply(f, x), FieldExpr::Apply(g, y)) => f == g && expr_structurally_eq(x, y),
        (FieldExpr::Deriv(x, mu), FieldExpr::Deriv(y, nu)) => {
            mu == nu && expr_structurally_eq(x, y)
        }
        _ => false,
    }
}
