//! Expression language for multivector fields over R^m.
//!
//! Fields are shared immutable trees ([`Expr`] = `Arc<FieldExpr>`); jet
//! evaluation walks the tree once per point with a memo keyed on node
//! identity, so heavily shared subtrees (a conjugation scalar appearing in
//! every frame generator, say) are evaluated once.
//!
//! `Deriv` is the one node with non-trivial order behaviour: the jet of
//! d_mu f trades one stored order of f, so expressions built from first
//! derivatives of order-2 leaves still expose exact values and gradients,
//! and a second nesting still exposes exact values. Requests past the
//! stored order fail with [`Error::JetOrderExceeded`] rather than ever
//! falling back to approximation.

use std::collections::HashMap;
use std::sync::Arc;

use crate::algebra::Signature;
use crate::error::{Error, Result};
use crate::jet::{sym_len, BaseSpace, Jet2};
use crate::multivector::{Multivector, EXP_SERIES_CAP, EXP_SERIES_TOL};
use crate::scalar::Scalar;

/// Scalar functions applicable to grade-0 subfields.
#[derive(Copy, Clone, PartialEq, Eq, Debug)]
pub enum ScalarFn {
    Sin,
    Cos,
    Exp,
}

#[derive(Debug)]
pub enum FieldExpr<S: Scalar> {
    /// Constant multivector.
    Const(Multivector<S>),
    /// Coordinate x^mu as a grade-0 field.
    Coord(usize),
    Add(Expr<S>, Expr<S>),
    Neg(Expr<S>),
    /// Constant scalar multiple.
    Scale(S, Expr<S>),
    /// Geometric product, order preserved.
    Product(Expr<S>, Expr<S>),
    /// Pointwise inverse.
    Inverse(Expr<S>),
    /// Pointwise exponential by power series.
    ExpSeries(Expr<S>),
    /// Scalar function of a grade-0 subfield.
    Apply(ScalarFn, Expr<S>),
    /// Partial derivative d/dx^mu.
    Deriv(Expr<S>, usize),
}

pub type Expr<S> = Arc<FieldExpr<S>>;

pub fn konst<S: Scalar>(m: Multivector<S>) -> Expr<S> {
    Arc::new(FieldExpr::Const(m))
}

pub fn scalar_const<S: Scalar>(sig: Signature, s: S) -> Expr<S> {
    konst(Multivector::scalar(sig, s))
}

pub fn coord<S: Scalar>(mu: usize) -> Expr<S> {
    Arc::new(FieldExpr::Coord(mu))
}

pub fn add<S: Scalar>(a: &Expr<S>, b: &Expr<S>) -> Expr<S> {
    Arc::new(FieldExpr::Add(a.clone(), b.clone()))
}

pub fn add_all<S: Scalar>(terms: &[Expr<S>]) -> Expr<S> {
    assert!(!terms.is_empty(), "empty sum needs a signature");
    terms[1..]
        .iter()
        .fold(terms[0].clone(), |acc, t| add(&acc, t))
}

pub fn neg<S: Scalar>(a: &Expr<S>) -> Expr<S> {
    Arc::new(FieldExpr::Neg(a.clone()))
}

pub fn sub<S: Scalar>(a: &Expr<S>, b: &Expr<S>) -> Expr<S> {
    add(a, &neg(b))
}

pub fn scale<S: Scalar>(s: S, a: &Expr<S>) -> Expr<S> {
    Arc::new(FieldExpr::Scale(s, a.clone()))
}

pub fn product<S: Scalar>(a: &Expr<S>, b: &Expr<S>) -> Expr<S> {
    Arc::new(FieldExpr::Product(a.clone(), b.clone()))
}

pub fn product_all<S: Scalar>(factors: &[Expr<S>]) -> Expr<S> {
    assert!(!factors.is_empty(), "empty product needs a signature");
    factors[1..]
        .iter()
        .fold(factors[0].clone(), |acc, f| product(&acc, f))
}

pub fn inverse<S: Scalar>(a: &Expr<S>) -> Expr<S> {
    Arc::new(FieldExpr::Inverse(a.clone()))
}

pub fn exp_series<S: Scalar>(a: &Expr<S>) -> Expr<S> {
    Arc::new(FieldExpr::ExpSeries(a.clone()))
}

pub fn apply<S: Scalar>(f: ScalarFn, a: &Expr<S>) -> Expr<S> {
    Arc::new(FieldExpr::Apply(f, a.clone()))
}

pub fn deriv<S: Scalar>(a: &Expr<S>, mu: usize) -> Expr<S> {
    Arc::new(FieldExpr::Deriv(a.clone(), mu))
}

/// a*b - b*a as an expression.
pub fn commutator<S: Scalar>(a: &Expr<S>, b: &Expr<S>) -> Expr<S> {
    sub(&product(a, b), &product(b, a))
}

/// coeff * x^powers[0] * ... (a monomial with a constant multivector
/// coefficient); `powers[mu]` is the exponent of x^mu.
pub fn monomial<S: Scalar>(coeff: Multivector<S>, powers: &[u32]) -> Expr<S> {
    let mut factors = vec![konst(coeff)];
    for (mu, &k) in powers.iter().enumerate() {
        for _ in 0..k {
            factors.push(coord(mu));
        }
    }
    product_all(&factors)
}

/// Jet evaluator at a fixed point; memoizes per node identity.
pub struct JetEvaluator<'a, S: Scalar> {
    sig: Signature,
    base: BaseSpace,
    x: &'a [S],
    memo: HashMap<*const FieldExpr<S>, Jet2<S>>,
    series_tol: f64,
    series_cap: usize,
}

impl<'a, S: Scalar> JetEvaluator<'a, S> {
    pub fn new(sig: Signature, base: BaseSpace, x: &'a [S]) -> Self {
        debug_assert_eq!(x.len(), base.m());
        JetEvaluator {
            sig,
            base,
            x,
            memo: HashMap::new(),
            series_tol: EXP_SERIES_TOL,
            series_cap: EXP_SERIES_CAP,
        }
    }

    pub fn eval(&mut self, expr: &Expr<S>) -> Result<Jet2<S>> {
        let key = Arc::as_ptr(expr);
        if let Some(hit) = self.memo.get(&key) {
            return Ok(hit.clone());
        }
        let jet = self.eval_uncached(expr)?;
        self.memo.insert(key, jet.clone());
        Ok(jet)
    }

    fn eval_uncached(&mut self, expr: &Expr<S>) -> Result<Jet2<S>> {
        let m = self.base.m();
        Ok(match expr.as_ref() {
            FieldExpr::Const(c) => Jet2::constant(m, c.clone()),
            FieldExpr::Coord(mu) => {
                if *mu >= m {
                    return Err(Error::CoordOutOfRange(*mu, m));
                }
                Jet2::coordinate(self.sig, m, *mu, &self.x[*mu])
            }
            FieldExpr::Add(a, b) => self.eval(a)?.add(&self.eval(b)?),
            FieldExpr::Neg(a) => self.eval(a)?.neg(),
            FieldExpr::Scale(s, a) => self.eval(a)?.scaled(s),
            FieldExpr::Product(a, b) => self.eval(a)?.mul(&self.eval(b)?),
            FieldExpr::Inverse(a) => self.eval(a)?.inverse()?,
            FieldExpr::ExpSeries(a) => self.eval(a)?.exp_series(self.series_tol, self.series_cap)?,
            FieldExpr::Apply(f, a) => scalar_chain(*f, &self.eval(a)?, self.sig)?,
            FieldExpr::Deriv(a, mu) => {
                if *mu >= m {
                    return Err(Error::CoordOutOfRange(*mu, m));
                }
                self.eval(a)?.derivative(*mu)?
            }
        })
    }
}

/// Chain rule for a scalar function of a grade-0 jet.
fn scalar_chain<S: Scalar>(f: ScalarFn, u: &Jet2<S>, sig: Signature) -> Result<Jet2<S>> {
    let m = u.m();
    let as_scalar = |mv: &Multivector<S>| -> Result<S> {
        if mv.coeffs().iter().skip(1).any(|c| !c.is_zero()) {
            return Err(Error::NonScalarOperand);
        }
        Ok(mv.trace_scalar())
    };
    let u0 = as_scalar(u.value())?;
    let (f0, f1, f2) = match f {
        ScalarFn::Sin => (
            u0.try_sin(),
            u0.try_cos(),
            u0.try_sin().map(|s| -s),
        ),
        ScalarFn::Cos => (
            u0.try_cos(),
            u0.try_sin().map(|s| -s),
            u0.try_cos().map(|c| -c),
        ),
        ScalarFn::Exp => (u0.try_exp(), u0.try_exp(), u0.try_exp()),
    };
    let (f0, f1, f2) = match (f0, f1, f2) {
        (Some(a), Some(b), Some(c)) => (a, b, c),
        _ => return Err(Error::ExactModeUnsupported("scalar sin/cos/exp")),
    };
    let value = Multivector::scalar(sig, f0);
    let grad = match u.grads() {
        Ok(g) => {
            let gs: Vec<S> = g.iter().map(as_scalar).collect::<Result<_>>()?;
            let grad = gs
                .iter()
                .map(|gmu| Multivector::scalar(sig, f1.clone() * gmu.clone()))
                .collect::<Vec<_>>();
            let hess = if u.order() >= 2 {
                let mut h = Vec::with_capacity(sym_len(m));
                for mu in 0..m {
                    for nu in mu..m {
                        let umn = as_scalar(u.hess(mu, nu)?)?;
                        let v = f2.clone() * gs[mu].clone() * gs[nu].clone()
                            + f1.clone() * umn;
                        h.push(Multivector::scalar(sig, v));
                    }
                }
                Some(h)
            } else {
                None
            };
            Some((grad, hess))
        }
        Err(_) => None,
    };
    Ok(match grad {
        Some((g, h)) => Jet2::new(m, value, Some(g), h),
        None => Jet2::new(m, value, None, None),
    })
}

/// Evaluate one expression at one point.
pub fn jet_eval<S: Scalar>(
    expr: &Expr<S>,
    sig: Signature,
    base: BaseSpace,
    x: &[S],
) -> Result<Jet2<S>> {
    JetEvaluator::new(sig, base, x).eval(expr)
}

/// Evaluate several expressions at one point with a shared memo.
pub fn jet_eval_many<S: Scalar>(
    exprs: &[Expr<S>],
    sig: Signature,
    base: BaseSpace,
    x: &[S],
) -> Result<Vec<Jet2<S>>> {
    let mut ev = JetEvaluator::new(sig, base, x);
    exprs.iter().map(|e| ev.eval(e)).collect()
}

pub fn value_at<S: Scalar>(
    expr: &Expr<S>,
    sig: Signature,
    base: BaseSpace,
    x: &[S],
) -> Result<Multivector<S>> {
    Ok(jet_eval(expr, sig, base, x)?.value().clone())
}

/// Jet-vs-finite-difference comparison at one point.
#[derive(Clone, Debug, serde::Serialize)]
pub struct FdReport {
    pub max_grad_rel: f64,
    pub max_hess_rel: f64,
}

/// Compare the jet's first and second derivatives against central finite
/// differences of the value channel. Relative errors are scaled by the
/// jet channel's own magnitude (floored at 1).
pub fn finite_difference_check<S: Scalar>(
    expr: &Expr<S>,
    sig: Signature,
    base: BaseSpace,
    x: &[S],
    grad_step: f64,
    hess_step: f64,
) -> Result<FdReport> {
    let m = base.m();
    let jet = jet_eval(expr, sig, base, x)?;
    if jet.order() < 2 {
        return Err(Error::JetOrderExceeded);
    }
    let value = |x: &[S]| -> Result<Multivector<S>> { value_at(expr, sig, base, x) };
    let shifted = |mu: usize, delta: f64| -> Vec<S> {
        let mut y = x.to_vec();
        y[mu] = y[mu].clone() + S::from_f64(delta);
        y
    };
    let mut max_grad_rel: f64 = 0.0;
    for mu in 0..m {
        let h = grad_step;
        let fd = (&value(&shifted(mu, h))? - &value(&shifted(mu, -h))?)
            .scaled(&S::from_f64(0.5 / h));
        let exact = jet.grad(mu)?;
        let rel = (&fd - exact).max_abs() / exact.max_abs().max(1.0);
        max_grad_rel = max_grad_rel.max(rel);
    }
    let mut max_hess_rel: f64 = 0.0;
    let h = hess_step;
    let f0 = value(x)?;
    for mu in 0..m {
        for nu in mu..m {
            let fd = if mu == nu {
                let plus = value(&shifted(mu, h))?;
                let minus = value(&shifted(mu, -h))?;
                (&(&plus + &minus) - &f0.scaled(&S::from_f64(2.0)))
                    .scaled(&S::from_f64(1.0 / (h * h)))
            } else {
                let shift2 = |da: f64, db: f64| -> Vec<S> {
                    let mut y = x.to_vec();
                    y[mu] = y[mu].clone() + S::from_f64(da);
                    y[nu] = y[nu].clone() + S::from_f64(db);
                    y
                };
                let pp = value(&shift2(h, h))?;
                let pm = value(&shift2(h, -h))?;
                let mp = value(&shift2(-h, h))?;
                let mm = value(&shift2(-h, -h))?;
                (&(&pp - &pm) - &(&mp - &mm)).scaled(&S::from_f64(0.25 / (h * h)))
            };
            let exact = jet.hess(mu, nu)?;
            let rel = (&fd - exact).max_abs() / exact.max_abs().max(1.0);
            max_hess_rel = max_hess_rel.max(rel);
        }
    }
    Ok(FdReport {
        max_grad_rel,
        max_hess_rel,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::Blade;
    use crate::scalar::{ratio, Rational};

    fn sig() -> Signature {
        Signature::new(2, 0).unwrap()
    }

    fn base2() -> BaseSpace {
        BaseSpace::new(2, 0).unwrap()
    }

    #[test]
    fn polynomial_jets_are_exact() {
        // f = 3 x0^2 x1 - x1: grad and hess by hand.
        let s = sig();
        let f = sub(
            &monomial(Multivector::scalar(s, 3.0), &[2, 1]),
            &coord(1),
        );
        let x = [0.4f64, -0.8];
        let j = jet_eval(&f, s, base2(), &x).unwrap();
        let (x0, x1) = (x[0], x[1]);
        assert!((j.value().trace_scalar() - (3.0 * x0 * x0 * x1 - x1)).abs() < 1e-15);
        assert!((j.grad(0).unwrap().trace_scalar() - 6.0 * x0 * x1).abs() < 1e-15);
        assert!((j.grad(1).unwrap().trace_scalar() - (3.0 * x0 * x0 - 1.0)).abs() < 1e-15);
        assert!((j.hess(0, 0).unwrap().trace_scalar() - 6.0 * x1).abs() < 1e-15);
        assert!((j.hess(0, 1).unwrap().trace_scalar() - 6.0 * x0).abs() < 1e-15);
        assert!(j.hess(1, 1).unwrap().trace_scalar().abs() < 1e-15);
    }

    #[test]
    fn scalar_chain_rule_matches_closed_form() {
        // g = sin(x0 * x1): dg/d0 = x1 cos, d2g/d0d1 = cos - x0 x1 sin.
        let s = sig();
        let u = product(&coord(0), &coord(1));
        let g = apply(ScalarFn::Sin, &u);
        let x = [0.7f64, -0.3];
        let j = jet_eval(&g, s, base2(), &x).unwrap();
        let (x0, x1) = (x[0], x[1]);
        let p = x0 * x1;
        assert!((j.value().trace_scalar() - p.sin()).abs() < 1e-15);
        assert!((j.grad(0).unwrap().trace_scalar() - x1 * p.cos()).abs() < 1e-15);
        assert!(
            (j.hess(0, 1).unwrap().trace_scalar() - (p.cos() - p * p.sin())).abs() < 1e-14
        );
        assert!(
            (j.hess(0, 0).unwrap().trace_scalar() - (-x1 * x1 * p.sin())).abs() < 1e-14
        );
    }

    #[test]
    fn scalar_functions_reject_nonscalar_operands() {
        let s = sig();
        let e1 = konst(Multivector::<f64>::generator(s, 0).unwrap());
        let bad = apply(ScalarFn::Cos, &e1);
        assert!(matches!(
            jet_eval(&bad, s, base2(), &[0.0, 0.0]),
            Err(Error::NonScalarOperand)
        ));
    }

    #[test]
    fn scalar_functions_are_refused_in_exact_mode() {
        let s = sig();
        let f = apply(ScalarFn::Exp, &coord::<Rational>(0));
        let x = [ratio::<Rational>(1, 2), ratio(0, 1)];
        assert!(matches!(
            jet_eval(&f, s, base2(), &x),
            Err(Error::ExactModeUnsupported(_))
        ));
    }

    #[test]
    fn rotor_field_derivatives_match_trig_identities() {
        // S(x) = exp(x0 * theta * e12): dS/dx0 = theta * e12 * S here
        // because the exponent commutes with itself.
        let s = sig();
        let theta = 0.6f64;
        let e12 = Multivector::<f64>::basis(s, Blade::from_gens(&[0, 1]).unwrap()).unwrap();
        let rotor = exp_series(&monomial(e12.scaled(&theta), &[1, 0]));
        let x = [0.35f64, 0.0];
        let j = jet_eval(&rotor, s, base2(), &x).unwrap();
        let angle = theta * x[0];
        let expect = &Multivector::scalar(s, angle.cos()) + &e12.scaled(&angle.sin());
        assert!(j.value().approx_eq(&expect, 1e-14));
        let dexpect = &e12.scaled(&(theta * angle.cos()))
            - &Multivector::scalar(s, theta * angle.sin());
        assert!(j.grad(0).unwrap().approx_eq(&dexpect, 1e-13));
    }

    #[test]
    fn deriv_node_trades_order() {
        let s = sig();
        // f = x0^3 -> Deriv once: order 1; twice: order 0; thrice: error.
        let f = monomial(Multivector::<f64>::scalar(s, 1.0), &[3, 0]);
        let d1 = deriv(&f, 0);
        let d2 = deriv(&d1, 0);
        let d3 = deriv(&d2, 0);
        let x = [0.5f64, 0.0];
        let j1 = jet_eval(&d1, s, base2(), &x).unwrap();
        assert_eq!(j1.order(), 1);
        assert!((j1.value().trace_scalar() - 0.75).abs() < 1e-15);
        let j2 = jet_eval(&d2, s, base2(), &x).unwrap();
        assert_eq!(j2.order(), 0);
        assert!((j2.value().trace_scalar() - 3.0).abs() < 1e-15);
        assert!(matches!(
            jet_eval(&d3, s, base2(), &x),
            Err(Error::JetOrderExceeded)
        ));
    }

    #[test]
    fn shared_subtrees_evaluate_consistently_via_memo() {
        let s = sig();
        let shared = exp_series(&monomial(
            Multivector::<f64>::generator(s, 0).unwrap().scaled(&0.3),
            &[1, 1],
        ));
        let tree = product(&shared, &add(&shared, &shared));
        let x = [0.2f64, 0.9];
        let whole = jet_eval(&tree, s, base2(), &x).unwrap();
        let part = jet_eval(&shared, s, base2(), &x).unwrap();
        let expect = part.mul(&part.add(&part));
        assert!(whole.value().approx_eq(expect.value(), 1e-15));
        assert!(whole
            .hess(0, 1)
            .unwrap()
            .approx_eq(expect.hess(0, 1).unwrap(), 1e-15));
    }

    #[test]
    fn inverse_node_satisfies_chain_identity_under_eval() {
        let s = sig();
        let e1 = Multivector::<f64>::generator(s, 0).unwrap();
        let v = add(
            &konst(Multivector::one(s)),
            &monomial(e1.scaled(&0.4), &[1, 0]),
        );
        let w = inverse(&v);
        let x = [0.3f64, 0.0];
        let jv = jet_eval(&v, s, base2(), &x).unwrap();
        let jw = jet_eval(&w, s, base2(), &x).unwrap();
        let prod = jv.mul(&jw);
        assert!(prod.value().approx_eq(&Multivector::one(s), 1e-14));
        assert!(prod.grad(0).unwrap().max_abs() < 1e-13);
    }

    #[test]
    fn finite_differences_agree_on_smooth_fields() {
        let s = sig();
        let e12 = Multivector::<f64>::basis(s, Blade::from_gens(&[0, 1]).unwrap()).unwrap();
        let f = product(
            &apply(ScalarFn::Sin, &coord(0)),
            &exp_series(&monomial(e12.scaled(&0.5), &[1, 1])),
        );
        let report =
            finite_difference_check(&f, s, base2(), &[0.3, -0.4], 1e-5, 1e-4).unwrap();
        assert!(report.max_grad_rel < 1e-9, "{report:?}");
        assert!(report.max_hess_rel < 1e-6, "{report:?}");
    }

    #[test]
    fn finite_difference_check_is_zero_for_constants_and_tiny_for_quadratics() {
        let s = sig();
        let c = konst(Multivector::<f64>::scalar(s, 2.5));
        let r = finite_difference_check(&c, s, base2(), &[0.1, 0.2], 1e-5, 1e-4).unwrap();
        assert_eq!(r.max_grad_rel, 0.0);
        assert_eq!(r.max_hess_rel, 0.0);
        let quad = monomial(Multivector::<f64>::scalar(s, 1.0), &[1, 1]);
        let r = finite_difference_check(&quad, s, base2(), &[0.1, 0.2], 1e-5, 1e-4).unwrap();
        assert!(r.max_grad_rel < 1e-8);
        assert!(r.max_hess_rel < 1e-8);
    }
}
