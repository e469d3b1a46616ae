//! Order-2 jets of multivector fields over R^m.
//!
//! A [`Jet2`] carries a value, an optional gradient (m entries) and an
//! optional Hessian stored as the upper triangle (symmetry is structural,
//! not checked). Arithmetic follows the Leibniz rule and propagates the
//! lowest available order: taking a derivative of an expression consumes
//! one order, so e.g. the jet of `Deriv(f)` has a gradient exactly when
//! `f` had a Hessian. Consumers that need a missing order get
//! [`Error::JetOrderExceeded`].

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::multivector::Multivector;
use crate::scalar::Scalar;

/// Base space R^(k,l): m = k + l coordinates, with the diagonal metric
/// rho = diag(+1 x k, -1 x l) used to raise Greek indices.
#[derive(Copy, Clone, PartialEq, Eq, Hash, Debug, Serialize, Deserialize)]
pub struct BaseSpace {
    k: u8,
    l: u8,
}

impl BaseSpace {
    pub fn new(k: u8, l: u8) -> Result<Self> {
        let m = k as u32 + l as u32;
        if m == 0 || m > 12 {
            return Err(Error::DimensionCap(m, 12));
        }
        Ok(BaseSpace { k, l })
    }

    pub fn k(&self) -> u32 {
        self.k as u32
    }

    pub fn l(&self) -> u32 {
        self.l as u32
    }

    pub fn m(&self) -> usize {
        (self.k + self.l) as usize
    }

    /// rho^{mu mu} (equal to rho_{mu mu}) for the 0-based index.
    pub fn rho(&self, mu: usize) -> i8 {
        debug_assert!(mu < self.m());
        if mu < self.k as usize {
            1
        } else {
            -1
        }
    }
}

impl std::fmt::Display for BaseSpace {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "R^({},{})", self.k, self.l)
    }
}

/// Index into the packed upper triangle of a symmetric m x m matrix,
/// for mu <= nu.
pub fn sym_index(m: usize, mu: usize, nu: usize) -> usize {
    debug_assert!(mu <= nu && nu < m);
    mu * m - mu * (mu + 1) / 2 + nu
}

pub fn sym_len(m: usize) -> usize {
    m * (m + 1) / 2
}

/// Index into the packed strict upper triangle of an m x m matrix, for
/// mu < nu: (0,1), (0,2), ..., (m-2,m-1) in row-major order.
pub fn strict_upper_index(m: usize, mu: usize, nu: usize) -> usize {
    debug_assert!(mu < nu && nu < m);
    mu * m - mu * (mu + 1) / 2 + (nu - mu - 1)
}

pub fn strict_upper_len(m: usize) -> usize {
    m * (m - 1) / 2
}

#[derive(Clone, Debug)]
pub struct Jet2<S: Scalar> {
    m: usize,
    value: Multivector<S>,
    grad: Option<Vec<Multivector<S>>>,
    hess: Option<Vec<Multivector<S>>>,
}

impl<S: Scalar> Jet2<S> {
    pub fn new(
        m: usize,
        value: Multivector<S>,
        grad: Option<Vec<Multivector<S>>>,
        hess: Option<Vec<Multivector<S>>>,
    ) -> Self {
        debug_assert!(grad.as_ref().map_or(true, |g| g.len() == m));
        debug_assert!(hess.as_ref().map_or(true, |h| h.len() == sym_len(m)));
        debug_assert!(hess.is_none() || grad.is_some(), "hess requires grad");
        Jet2 {
            m,
            value,
            grad,
            hess,
        }
    }

    /// Jet of a constant field: all derivatives vanish.
    pub fn constant(m: usize, value: Multivector<S>) -> Self {
        let zero = Multivector::zero(value.sig());
        Jet2 {
            m,
            value,
            grad: Some(vec![zero.clone(); m]),
            hess: Some(vec![zero; sym_len(m)]),
        }
    }

    /// Jet of the scalar coordinate field x^mu.
    pub fn coordinate(sig: crate::algebra::Signature, m: usize, mu: usize, x_mu: &S) -> Self {
        let zero = Multivector::zero(sig);
        let mut grad = vec![zero.clone(); m];
        grad[mu] = Multivector::one(sig);
        Jet2 {
            m,
            value: Multivector::scalar(sig, x_mu.clone()),
            grad: Some(grad),
            hess: Some(vec![zero; sym_len(m)]),
        }
    }

    pub fn m(&self) -> usize {
        self.m
    }

    /// Highest derivative order stored: 0, 1 or 2.
    pub fn order(&self) -> u8 {
        match (&self.grad, &self.hess) {
            (Some(_), Some(_)) => 2,
            (Some(_), None) => 1,
            _ => 0,
        }
    }

    pub fn value(&self) -> &Multivector<S> {
        &self.value
    }

    pub fn grads(&self) -> Result<&[Multivector<S>]> {
        self.grad.as_deref().ok_or(Error::JetOrderExceeded)
    }

    pub fn grad(&self, mu: usize) -> Result<&Multivector<S>> {
        Ok(&self.grads()?[mu])
    }

    pub fn hess(&self, mu: usize, nu: usize) -> Result<&Multivector<S>> {
        let h = self.hess.as_deref().ok_or(Error::JetOrderExceeded)?;
        let (a, b) = if mu <= nu { (mu, nu) } else { (nu, mu) };
        Ok(&h[sym_index(self.m, a, b)])
    }

    /// The jet of the partial derivative along mu: one order lower.
    pub fn derivative(&self, mu: usize) -> Result<Jet2<S>> {
        let grads = self.grads()?;
        if mu >= self.m {
            return Err(Error::CoordOutOfRange(mu, self.m));
        }
        let value = grads[mu].clone();
        let grad = match &self.hess {
            Some(_) => {
                let mut g = Vec::with_capacity(self.m);
                for nu in 0..self.m {
                    g.push(self.hess(mu, nu)?.clone());
                }
                Some(g)
            }
            None => None,
        };
        Ok(Jet2 {
            m: self.m,
            value,
            grad,
            hess: None,
        })
    }

    pub fn add(&self, rhs: &Self) -> Self {
        self.zip(rhs, |a, b| a + b)
    }

    pub fn sub(&self, rhs: &Self) -> Self {
        self.zip(rhs, |a, b| a - b)
    }

    fn zip(
        &self,
        rhs: &Self,
        f: impl Fn(&Multivector<S>, &Multivector<S>) -> Multivector<S>,
    ) -> Self {
        debug_assert_eq!(self.m, rhs.m);
        let grad = match (&self.grad, &rhs.grad) {
            (Some(a), Some(b)) => Some(a.iter().zip(b).map(|(a, b)| f(a, b)).collect()),
            _ => None,
        };
        let hess = match (&self.hess, &rhs.hess) {
            (Some(a), Some(b)) => Some(a.iter().zip(b).map(|(a, b)| f(a, b)).collect()),
            _ => None,
        };
        Jet2 {
            m: self.m,
            value: f(&self.value, &rhs.value),
            grad,
            hess,
        }
    }

    pub fn neg(&self) -> Self {
        self.map(|a| -a)
    }

    pub fn scaled(&self, s: &S) -> Self {
        self.map(|a| a.scaled(s))
    }

    fn map(&self, f: impl Fn(&Multivector<S>) -> Multivector<S>) -> Self {
        Jet2 {
            m: self.m,
            value: f(&self.value),
            grad: self.grad.as_ref().map(|g| g.iter().map(&f).collect()),
            hess: self.hess.as_ref().map(|h| h.iter().map(&f).collect()),
        }
    }

    /// Leibniz product. Operand order is preserved throughout; the result
    /// order is the minimum of the operand orders.
    pub fn mul(&self, rhs: &Self) -> Self {
        debug_assert_eq!(self.m, rhs.m);
        let m = self.m;
        let value = &self.value * &rhs.value;
        let grad = match (&self.grad, &rhs.grad) {
            (Some(ga), Some(gb)) => Some(
                (0..m)
                    .map(|mu| &(&ga[mu] * &rhs.value) + &(&self.value * &gb[mu]))
                    .collect::<Vec<_>>(),
            ),
            _ => None,
        };
        let hess = match (&self.hess, &rhs.hess, &self.grad, &rhs.grad) {
            (Some(_), Some(_), Some(ga), Some(gb)) => {
                let mut h = Vec::with_capacity(sym_len(m));
                for mu in 0..m {
                    for nu in mu..m {
                        let mut t = &(self.hess(mu, nu).unwrap() * &rhs.value)
                            + &(&ga[mu] * &gb[nu]);
                        t = &t + &(&ga[nu] * &gb[mu]);
                        t = &t + &(&self.value * rhs.hess(mu, nu).unwrap());
                        h.push(t);
                    }
                }
                Some(h)
            }
            _ => None,
        };
        Jet2 {
            m,
            value,
            grad,
            hess,
        }
    }

    pub fn commutator(&self, rhs: &Self) -> Self {
        self.mul(rhs).sub(&rhs.mul(self))
    }

    /// Jet of the pointwise inverse: w = v^-1, dw = -w dv w,
    /// ddw = -w ddv w + w dv w dv w + (symmetrized).
    pub fn inverse(&self) -> Result<Jet2<S>> {
        let m = self.m;
        let w = self.value.general_inverse()?;
        let grad = self.grad.as_ref().map(|g| {
            g.iter()
                .map(|gv| -&(&(&w * gv) * &w))
                .collect::<Vec<_>>()
        });
        let hess = match (&self.hess, &self.grad) {
            (Some(_), Some(g)) => {
                let mut h = Vec::with_capacity(sym_len(m));
                for mu in 0..m {
                    for nu in mu..m {
                        let wmu = &(&w * &g[mu]) * &w;
                        let wnu = &(&w * &g[nu]) * &w;
                        let mut t = -&(&(&w * self.hess(mu, nu)?) * &w);
                        t = &t + &(&wnu * &(&g[mu] * &w));
                        t = &t + &(&wmu * &(&g[nu] * &w));
                        h.push(t);
                    }
                }
                Some(h)
            }
            _ => None,
        };
        Ok(Jet2 {
            m,
            value: w,
            grad,
            hess,
        })
    }

    /// Exponential series with jet arithmetic; truncates when the term
    /// norm (over all stored channels) drops below `tol` times the sum's.
    pub fn exp_series(&self, tol: f64, cap: usize) -> Result<Jet2<S>> {
        let one = Multivector::one(self.value.sig());
        // The identity term at the operand's own order.
        let mut sum = Jet2::constant(self.m, one).truncated_to(self.order());
        let mut term = sum.clone();
        for k in 1..=cap {
            term = term.mul(self).scaled(&(S::one() / S::from_i64(k as i64)));
            sum = sum.add(&term);
            if term.max_abs() <= tol * sum.max_abs().max(1.0) {
                return Ok(sum);
            }
        }
        Err(Error::SeriesDiverged(cap))
    }

    /// Drop stored orders above `order` (used to align series terms).
    pub fn truncated_to(&self, order: u8) -> Self {
        Jet2 {
            m: self.m,
            value: self.value.clone(),
            grad: if order >= 1 { self.grad.clone() } else { None },
            hess: if order >= 2 { self.hess.clone() } else { None },
        }
    }

    /// Largest coefficient magnitude over every stored channel.
    pub fn max_abs(&self) -> f64 {
        let mut best = self.value.max_abs();
        if let Some(g) = &self.grad {
            for x in g {
                best = best.max(x.max_abs());
            }
        }
        if let Some(h) = &self.hess {
            for x in h {
                best = best.max(x.max_abs());
            }
        }
        best
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::Signature;

    fn sig2() -> Signature {
        Signature::new(2, 0).unwrap()
    }

    #[test]
    fn base_space_metric_and_caps() {
        let b = BaseSpace::new(1, 3).unwrap();
        assert_eq!(b.m(), 4);
        assert_eq!(
            (0..4).map(|mu| b.rho(mu)).collect::<Vec<_>>(),
            vec![1, -1, -1, -1]
        );
        assert!(BaseSpace::new(0, 0).is_err());
        assert!(BaseSpace::new(13, 0).is_err());
        assert_eq!(b.to_string(), "R^(1,3)");
    }

    #[test]
    fn sym_index_covers_upper_triangle() {
        let m = 4;
        let mut seen = vec![false; sym_len(m)];
        for mu in 0..m {
            for nu in mu..m {
                let i = sym_index(m, mu, nu);
                assert!(!seen[i]);
                seen[i] = true;
            }
        }
        assert!(seen.into_iter().all(|s| s));
    }

    #[test]
    fn product_of_coordinates_has_unit_mixed_hessian() {
        let s = sig2();
        let m = 2;
        let x = [0.3f64, -0.7];
        let j0 = Jet2::coordinate(s, m, 0, &x[0]);
        let j1 = Jet2::coordinate(s, m, 1, &x[1]);
        let p = j0.mul(&j1);
        assert_eq!(p.value().trace_scalar(), 0.3 * -0.7);
        assert_eq!(p.grad(0).unwrap().trace_scalar(), -0.7);
        assert_eq!(p.grad(1).unwrap().trace_scalar(), 0.3);
        assert_eq!(p.hess(0, 1).unwrap().trace_scalar(), 1.0);
        assert_eq!(p.hess(1, 0).unwrap().trace_scalar(), 1.0);
        assert_eq!(p.hess(0, 0).unwrap().trace_scalar(), 0.0);
    }

    #[test]
    fn derivative_consumes_one_order() {
        let s = sig2();
        let x = [0.5f64, 0.25];
        let j = Jet2::coordinate(s, 2, 0, &x[0]).mul(&Jet2::coordinate(s, 2, 0, &x[0]));
        assert_eq!(j.order(), 2);
        let d = j.derivative(0).unwrap();
        assert_eq!(d.order(), 1);
        assert_eq!(d.value().trace_scalar(), 1.0); // d(x^2)/dx = 2x = 1
        assert_eq!(d.grad(0).unwrap().trace_scalar(), 2.0);
        let dd = d.derivative(0).unwrap();
        assert_eq!(dd.order(), 0);
        assert!(matches!(dd.derivative(0), Err(Error::JetOrderExceeded)));
    }

    #[test]
    fn inverse_jet_satisfies_the_chain_identity() {
        // v * d(v^-1) + (dv) v^-1 = 0, channel by channel.
        let s = sig2();
        let m = 1;
        let e1 = Multivector::<f64>::generator(s, 0).unwrap();
        // v(x) = e + 0.4 x e1 at x = 0.3 (jet assembled by arithmetic).
        let x = Jet2::coordinate(s, m, 0, &0.3);
        let v = Jet2::constant(m, Multivector::one(s))
            .add(&x.mul(&Jet2::constant(m, e1.scaled(&0.4))));
        let w = v.inverse().unwrap();
        let lhs = v.mul(&w);
        assert!(lhs.value().approx_eq(&Multivector::one(s), 1e-14));
        assert!(lhs.grad(0).unwrap().max_abs() < 1e-13);
        assert!(lhs.hess(0, 0).unwrap().max_abs() < 1e-13);
    }

    #[test]
    fn exp_series_jet_matches_scalar_calculus() {
        // f(x) = exp(c x) on a 1-dim base: grad = c f, hess = c^2 f.
        let s = sig2();
        let c = 0.8f64;
        let x = Jet2::coordinate(s, 1, 0, &0.45);
        let e = x.scaled(&c).exp_series(1e-15, 100).unwrap();
        let f = (c * 0.45f64).exp();
        assert!((e.value().trace_scalar() - f).abs() < 1e-14);
        assert!((e.grad(0).unwrap().trace_scalar() - c * f).abs() < 1e-13);
        assert!((e.hess(0, 0).unwrap().trace_scalar() - c * c * f).abs() < 1e-13);
    }
}
