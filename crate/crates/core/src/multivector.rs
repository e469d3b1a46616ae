//! Dense multivectors over Cl(p,q).
//!
//! A multivector stores all 2^n blade coefficients; the geometric product
//! is the dense double loop over blade pairs driven by the precomputed
//! sign table (or on-the-fly signs past the table cap). Inverses go
//! through the 2^n x 2^n left-multiplication matrix, which also supplies
//! the condition estimate used to reject near-singular elements.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use crate::algebra::{blade_inverse_sign, blade_mul, product_table, Blade, Signature, DEFAULT_DIM_CAP};
use crate::error::{Error, Result};
use crate::linalg;
use crate::scalar::Scalar;

/// Condition-estimate threshold past which an inverse is rejected.
pub const INVERSE_COND_LIMIT: f64 = 1e12;
/// Term cap for the exponential series.
pub const EXP_SERIES_CAP: usize = 200;
/// Default relative tolerance for truncating the exponential series.
pub const EXP_SERIES_TOL: f64 = 1e-14;

#[derive(Clone, Debug, PartialEq)]
pub struct Multivector<S: Scalar> {
    sig: Signature,
    coeffs: Vec<S>,
}

impl<S: Scalar> Multivector<S> {
    pub fn zero(sig: Signature) -> Self {
        Multivector {
            sig,
            coeffs: vec![S::zero(); sig.dim()],
        }
    }

    /// The identity element e.
    pub fn one(sig: Signature) -> Self {
        Self::scalar(sig, S::one())
    }

    pub fn scalar(sig: Signature, value: S) -> Self {
        let mut m = Self::zero(sig);
        m.coeffs[0] = value;
        m
    }

    pub fn basis(sig: Signature, blade: Blade) -> Result<Self> {
        if blade.mask() as usize >= sig.dim() {
            return Err(Error::GradeOutOfRange(blade.grade(), sig.n()));
        }
        let mut m = Self::zero(sig);
        m.coeffs[blade.mask() as usize] = S::one();
        Ok(m)
    }

    /// Generator e^a (0-based index).
    pub fn generator(sig: Signature, a: usize) -> Result<Self> {
        if a >= sig.n() as usize {
            return Err(Error::GradeOutOfRange(1, sig.n()));
        }
        Self::basis(sig, Blade::from_mask(1 << a))
    }

    pub fn from_coeffs(sig: Signature, coeffs: Vec<S>) -> Result<Self> {
        if coeffs.len() != sig.dim() {
            return Err(Error::InvalidArgument(format!(
                "expected {} coefficients for {}, got {}",
                sig.dim(),
                sig,
                coeffs.len()
            )));
        }
        Ok(Multivector { sig, coeffs })
    }

    pub fn sig(&self) -> Signature {
        self.sig
    }

    pub fn coeffs(&self) -> &[S] {
        &self.coeffs
    }

    pub fn coeff(&self, blade: Blade) -> &S {
        &self.coeffs[blade.mask() as usize]
    }

    pub fn set_coeff(&mut self, blade: Blade, value: S) {
        self.coeffs[blade.mask() as usize] = value;
    }

    fn check_sig(&self, rhs: &Self) -> Result<()> {
        if self.sig != rhs.sig {
            return Err(Error::SignatureMismatch(
                self.sig.p() as u8,
                self.sig.q() as u8,
                rhs.sig.p() as u8,
                rhs.sig.q() as u8,
            ));
        }
        Ok(())
    }

    /// Geometric product; errors when the signatures differ.
    pub fn geometric_product(&self, rhs: &Self) -> Result<Self> {
        self.check_sig(rhs)?;
        Ok(self.gp_impl(rhs))
    }

    fn gp_impl(&self, rhs: &Self) -> Self {
        debug_assert_eq!(self.sig, rhs.sig);
        let dim = self.sig.dim();
        let mut out = vec![S::zero(); dim];
        if self.sig.n() <= DEFAULT_DIM_CAP {
            let table = product_table(self.sig);
            for a in 0..dim {
                let ca = &self.coeffs[a];
                if ca.is_zero() {
                    continue;
                }
                for b in 0..dim {
                    let cb = &rhs.coeffs[b];
                    if cb.is_zero() {
                        continue;
                    }
                    let idx = a ^ b;
                    let term = ca.clone() * cb.clone();
                    let cur = std::mem::replace(&mut out[idx], S::zero());
                    out[idx] = if table.sign(a, b) > 0 {
                        cur + term
                    } else {
                        cur - term
                    };
                }
            }
        } else {
            for a in 0..dim {
                let ca = &self.coeffs[a];
                if ca.is_zero() {
                    continue;
                }
                for b in 0..dim {
                    let cb = &rhs.coeffs[b];
                    if cb.is_zero() {
                        continue;
                    }
                    let (sign, idx) = blade_mul(self.sig, a as u32, b as u32);
                    let term = ca.clone() * cb.clone();
                    let cur = std::mem::replace(&mut out[idx as usize], S::zero());
                    out[idx as usize] = if sign > 0 { cur + term } else { cur - term };
                }
            }
        }
        Multivector {
            sig: self.sig,
            coeffs: out,
        }
    }

    /// a*b - b*a.
    pub fn commutator(&self, rhs: &Self) -> Result<Self> {
        self.check_sig(rhs)?;
        Ok(&self.gp_impl(rhs) - &rhs.gp_impl(self))
    }

    pub fn scaled(&self, s: &S) -> Self {
        Multivector {
            sig: self.sig,
            coeffs: self.coeffs.iter().map(|c| c.clone() * s.clone()).collect(),
        }
    }

    /// Projection onto grade k.
    pub fn grade_project(&self, k: u32) -> Result<Self> {
        if k > self.sig.n() {
            return Err(Error::GradeOutOfRange(k, self.sig.n()));
        }
        let mut out = Self::zero(self.sig);
        for (mask, c) in self.coeffs.iter().enumerate() {
            if (mask as u32).count_ones() == k {
                out.coeffs[mask] = c.clone();
            }
        }
        Ok(out)
    }

    /// Projection onto the center: grade 0 for even n, grades 0 and n for
    /// odd n (the pseudoscalar commutes with everything only in odd
    /// dimension).
    pub fn center_project(&self) -> Self {
        let mut out = Self::zero(self.sig);
        out.coeffs[0] = self.coeffs[0].clone();
        if self.sig.is_odd() {
            let top = self.sig.dim() - 1;
            out.coeffs[top] = self.coeffs[top].clone();
        }
        out
    }

    /// Coefficient of the identity blade.
    pub fn trace_scalar(&self) -> S {
        self.coeffs[0].clone()
    }

    /// Reversal anti-involution: sign (-1)^(k(k-1)/2) per grade-k blade.
    pub fn reverse(&self) -> Self {
        let mut out = self.clone();
        for (mask, c) in out.coeffs.iter_mut().enumerate() {
            if Blade::from_mask(mask as u32).reversal_sign() < 0 {
                let v = std::mem::replace(c, S::zero());
                *c = -v;
            }
        }
        out
    }

    /// Coefficients of u as the matrix of left multiplication in the blade
    /// basis: column B holds the coefficients of u * e^B.
    fn left_mul_matrix(&self) -> linalg::Matrix<S> {
        let dim = self.sig.dim();
        let mut mat = vec![vec![S::zero(); dim]; dim];
        for (a, ca) in self.coeffs.iter().enumerate() {
            if ca.is_zero() {
                continue;
            }
            for b in 0..dim {
                let (sign, idx) = blade_mul(self.sig, a as u32, b as u32);
                let term = if sign > 0 { ca.clone() } else { -ca.clone() };
                let cur = std::mem::replace(&mut mat[idx as usize][b], S::zero());
                mat[idx as usize][b] = cur + term;
            }
        }
        mat
    }

    /// Two-sided inverse via the left-multiplication matrix. Rejects
    /// singular elements, and in float mode also elements whose matrix has
    /// an infinity-norm condition estimate above [`INVERSE_COND_LIMIT`].
    pub fn general_inverse(&self) -> Result<Self> {
        let mat = self.left_mul_matrix();
        let inv = linalg::invert(&mat)?;
        if !S::EXACT {
            let cond = linalg::cond_inf(&mat, &inv);
            if !cond.is_finite() || cond > INVERSE_COND_LIMIT {
                return Err(Error::Singular { cond: Some(cond) });
            }
        }
        // u^-1 = L^-1 applied to the coefficients of e.
        let coeffs = inv.into_iter().map(|row| row[0].clone()).collect();
        Ok(Multivector {
            sig: self.sig,
            coeffs,
        })
    }

    /// Sum over all basis blades of e^A * u * (e^A)^-1.
    ///
    /// Each summand permutes blade coefficients up to sign, so the sum is
    /// computed per blade of u from product signs alone.
    pub fn average_over_basis(&self) -> Self {
        let sig = self.sig;
        let dim = sig.dim();
        let mut out = Self::zero(sig);
        for (b, cb) in self.coeffs.iter().enumerate() {
            if cb.is_zero() {
                continue;
            }
            let mut weight = 0i64;
            for a in 0..dim as u32 {
                let inv_sign = blade_inverse_sign(sig, Blade::from_mask(a));
                let (s1, ab) = blade_mul(sig, a, b as u32);
                let (s2, aba) = blade_mul(sig, ab, a);
                debug_assert_eq!(aba, b as u32);
                weight += (inv_sign * s1 * s2) as i64;
            }
            if weight != 0 {
                out.coeffs[b] = cb.clone() * S::from_i64(weight);
            }
        }
        out
    }

    /// Exponential by power series, truncated when the term norm falls
    /// below `tol` times the partial-sum norm; errors past
    /// [`EXP_SERIES_CAP`] terms.
    pub fn exp_series(&self, tol: f64) -> Result<Self> {
        let mut sum = Self::one(self.sig);
        let mut term = Self::one(self.sig);
        for k in 1..=EXP_SERIES_CAP {
            term = term.gp_impl(self).scaled(&(S::one() / S::from_i64(k as i64)));
            sum = &sum + &term;
            if term.max_abs() <= tol * sum.max_abs().max(1.0) {
                return Ok(sum);
            }
        }
        Err(Error::SeriesDiverged(EXP_SERIES_CAP))
    }

    /// Residual norm used throughout: largest |coefficient|.
    pub fn max_abs(&self) -> f64 {
        self.coeffs.iter().map(|c| c.abs_f64()).fold(0.0, f64::max)
    }

    /// Componentwise comparison with absolute tolerance scaled by the
    /// larger of the two magnitudes (and 1).
    pub fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        self.sig == other.sig && {
            let scale = self.max_abs().max(other.max_abs()).max(1.0);
            (self - other).max_abs() <= tol * scale
        }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_zero())
    }
}

/// (e^A)^-1 as a multivector: the inverse of a basis blade is the blade
/// itself up to the reversal and metric sign.
pub fn blade_inverse<S: Scalar>(sig: Signature, blade: Blade) -> Result<Multivector<S>> {
    let mut m = Multivector::basis(sig, blade)?;
    if blade_inverse_sign(sig, blade) < 0 {
        m = -&m;
    }
    Ok(m)
}

// Arithmetic operators for same-signature operands. These panic on a
// signature mismatch; use the checked methods when operands may disagree.

impl<S: Scalar> Add for &Multivector<S> {
    type Output = Multivector<S>;
    fn add(self, rhs: Self) -> Multivector<S> {
        assert_eq!(self.sig, rhs.sig, "signature mismatch in +");
        Multivector {
            sig: self.sig,
            coeffs: self
                .coeffs
                .iter()
                .zip(&rhs.coeffs)
                .map(|(a, b)| a.clone() + b.clone())
                .collect(),
        }
    }
}

impl<S: Scalar> Sub for &Multivector<S> {
    type Output = Multivector<S>;
    fn sub(self, rhs: Self) -> Multivector<S> {
        assert_eq!(self.sig, rhs.sig, "signature mismatch in -");
        Multivector {
            sig: self.sig,
            coeffs: self
                .coeffs
                .iter()
                .zip(&rhs.coeffs)
                .map(|(a, b)| a.clone() - b.clone())
                .collect(),
        }
    }
}

impl<S: Scalar> Neg for &Multivector<S> {
    type Output = Multivector<S>;
    fn neg(self) -> Multivector<S> {
        Multivector {
            sig: self.sig,
            coeffs: self.coeffs.iter().map(|a| -a.clone()).collect(),
        }
    }
}

impl<S: Scalar> Mul for &Multivector<S> {
    type Output = Multivector<S>;
    fn mul(self, rhs: Self) -> Multivector<S> {
        assert_eq!(self.sig, rhs.sig, "signature mismatch in *");
        self.gp_impl(rhs)
    }
}

impl<S: Scalar> fmt::Display for Multivector<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (mask, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write!(f, "{}*{}", c, Blade::from_mask(mask as u32))?;
        }
        if first {
            write!(f, "0")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{ratio, Rational};
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    fn sig(p: u8, q: u8) -> Signature {
        Signature::new(p, q).unwrap()
    }

    fn random_mv(s: Signature, rng: &mut StdRng) -> Multivector<f64> {
        Multivector::from_coeffs(s, (0..s.dim()).map(|_| rng.gen_range(-1.0..1.0)).collect())
            .unwrap()
    }

    #[test]
    fn generators_anticommute_with_metric_diagonal() {
        for s in [sig(2, 0), sig(1, 1), sig(1, 3), sig(3, 1), sig(0, 4), sig(2, 3)] {
            for a in 0..s.n() as usize {
                for b in 0..s.n() as usize {
                    let ea = Multivector::<f64>::generator(s, a).unwrap();
                    let eb = Multivector::<f64>::generator(s, b).unwrap();
                    let anti = &(&ea * &eb) + &(&eb * &ea);
                    let expected = if a == b {
                        Multivector::scalar(s, 2.0 * s.eta(a) as f64)
                    } else {
                        Multivector::zero(s)
                    };
                    assert_eq!(anti, expected, "{} a={} b={}", s, a, b);
                }
            }
        }
    }

    #[test]
    fn product_is_associative_exactly_in_rational_mode() {
        let mut rng = StdRng::seed_from_u64(11);
        for s in [sig(2, 0), sig(1, 1), sig(1, 2), sig(1, 3)] {
            for _ in 0..40 {
                let to_exact = |m: &Multivector<f64>| {
                    Multivector::<Rational>::from_coeffs(
                        s,
                        m.coeffs().iter().map(|c| Rational::from_f64(*c)).collect(),
                    )
                    .unwrap()
                };
                let (a, b, c) = (
                    to_exact(&random_mv(s, &mut rng)),
                    to_exact(&random_mv(s, &mut rng)),
                    to_exact(&random_mv(s, &mut rng)),
                );
                assert_eq!(&(&a * &b) * &c, &a * &(&b * &c));
            }
        }
    }

    #[test]
    fn known_blade_products() {
        // Cl(1,3): e12 * e12 = +e.
        let st = sig(1, 3);
        let e12 = Multivector::<f64>::basis(st, Blade::from_gens(&[0, 1]).unwrap()).unwrap();
        assert_eq!(&e12 * &e12, Multivector::one(st));
        // Cl(2,0): (e12)^-1 = -e12.
        let pl = sig(2, 0);
        let b = Blade::from_gens(&[0, 1]).unwrap();
        let inv = blade_inverse::<f64>(pl, b).unwrap();
        let e12 = Multivector::<f64>::basis(pl, b).unwrap();
        assert_eq!(inv, -&e12);
        assert_eq!(&e12 * &inv, Multivector::one(pl));
    }

    #[test]
    fn blade_inverse_holds_for_every_blade() {
        for s in [sig(2, 0), sig(1, 2), sig(1, 3), sig(2, 3)] {
            for mask in 0..s.dim() as u32 {
                let blade = Blade::from_mask(mask);
                let b = Multivector::<f64>::basis(s, blade).unwrap();
                let inv = blade_inverse::<f64>(s, blade).unwrap();
                assert_eq!(&b * &inv, Multivector::one(s), "{} {}", s, blade);
                assert_eq!(&inv * &b, Multivector::one(s), "{} {}", s, blade);
            }
        }
    }

    #[test]
    fn grade_projection_decomposes_and_bounds_checked() {
        let mut rng = StdRng::seed_from_u64(5);
        let s = sig(2, 1);
        let u = random_mv(s, &mut rng);
        let mut sum = Multivector::zero(s);
        for k in 0..=s.n() {
            sum = &sum + &u.grade_project(k).unwrap();
        }
        assert_eq!(sum, u);
        assert!(matches!(
            u.grade_project(4),
            Err(Error::GradeOutOfRange(4, 3))
        ));
    }

    #[test]
    fn center_projection_depends_on_parity() {
        let mut rng = StdRng::seed_from_u64(17);
        // Even n: scalar part only.
        let s4 = sig(1, 3);
        let u = random_mv(s4, &mut rng);
        let c = u.center_project();
        assert_eq!(c, u.grade_project(0).unwrap());
        // Odd n: scalar plus pseudoscalar.
        let s3 = sig(3, 0);
        let v = random_mv(s3, &mut rng);
        let c = v.center_project();
        assert_eq!(
            c,
            &v.grade_project(0).unwrap() + &v.grade_project(3).unwrap()
        );
        // The center commutes with random elements.
        let w = random_mv(s3, &mut rng);
        assert!(c.commutator(&w).unwrap().max_abs() < 1e-12);
    }

    #[test]
    fn averaging_over_basis_extracts_the_center() {
        let mut rng = StdRng::seed_from_u64(23);
        for n in 1..=6u8 {
            for p in 0..=n {
                let s = sig(p, n - p);
                for _ in 0..25 {
                    let u = random_mv(s, &mut rng);
                    let avg = u.average_over_basis();
                    let expected = u.center_project().scaled(&(s.dim() as f64));
                    assert!(
                        avg.approx_eq(&expected, 1e-12),
                        "{}: {} vs {}",
                        s,
                        avg,
                        expected
                    );
                }
            }
        }
    }

    #[test]
    fn averaging_spot_values() {
        let s2 = sig(2, 0);
        let e1 = Multivector::<f64>::generator(s2, 0).unwrap();
        assert!(e1.average_over_basis().is_zero());
        assert_eq!(
            Multivector::<f64>::one(s2).average_over_basis(),
            Multivector::scalar(s2, 4.0)
        );
        let s3 = sig(3, 0);
        let ps = Multivector::<f64>::basis(s3, Blade::pseudoscalar(3)).unwrap();
        assert_eq!(ps.average_over_basis(), ps.scaled(&8.0));
    }

    #[test]
    fn general_inverse_roundtrips_and_rejects_singular() {
        let mut rng = StdRng::seed_from_u64(31);
        for s in [sig(2, 0), sig(1, 1), sig(1, 3)] {
            for _ in 0..20 {
                // exp of a small element is comfortably invertible.
                let u = random_mv(s, &mut rng).scaled(&0.4).exp_series(1e-15).unwrap();
                let inv = u.general_inverse().unwrap();
                assert!((&u * &inv).approx_eq(&Multivector::one(s), 1e-12));
                assert!((&inv * &u).approx_eq(&Multivector::one(s), 1e-12));
            }
        }
        // Cl(1,0): e + e^1 squares to the zero divisor pattern (1-1)e.
        let s1 = sig(1, 0);
        let u = &Multivector::<f64>::one(s1) + &Multivector::generator(s1, 0).unwrap();
        assert!(matches!(u.general_inverse(), Err(Error::Singular { .. })));
        // Exact mode detects the same singularity structurally.
        let ue = &Multivector::<Rational>::one(s1)
            + &Multivector::<Rational>::generator(s1, 0).unwrap();
        assert!(matches!(ue.general_inverse(), Err(Error::Singular { .. })));
        // Near-singular float elements are rejected by the condition bound.
        let near = &u + &Multivector::scalar(s1, 1e-14);
        assert!(matches!(near.general_inverse(), Err(Error::Singular { .. })));
    }

    #[test]
    fn exact_inverse_of_rational_rotor_denominator() {
        // (e + a e12)^-1 = (e - a e12)/(1 + a^2) in Cl(2,0), exactly.
        let s = sig(2, 0);
        let a: Rational = ratio(3, 10);
        let e12 = Multivector::<Rational>::basis(s, Blade::from_gens(&[0, 1]).unwrap()).unwrap();
        let u = &Multivector::one(s) + &e12.scaled(&a);
        let inv = u.general_inverse().unwrap();
        let denom: Rational = Rational::from_f64(1.0) + a.clone() * a.clone();
        let expected = (&Multivector::one(s) - &e12.scaled(&a)).scaled(&(ratio::<Rational>(1, 1) / denom));
        assert_eq!(inv, expected);
    }

    #[test]
    fn exp_series_matches_rotor_closed_form() {
        let s = sig(2, 0);
        let theta = 0.3f64;
        let e12 = Multivector::<f64>::basis(s, Blade::from_gens(&[0, 1]).unwrap()).unwrap();
        let r = e12.scaled(&theta).exp_series(1e-15).unwrap();
        let expected = &Multivector::scalar(s, theta.cos()) + &e12.scaled(&theta.sin());
        assert!(r.approx_eq(&expected, 1e-15));
        // exp(u) * exp(-u) = e.
        let inv = e12.scaled(&-theta).exp_series(1e-15).unwrap();
        assert!((&r * &inv).approx_eq(&Multivector::one(s), 1e-14));
    }

    #[test]
    fn exp_series_diverges_past_cap() {
        let s = sig(1, 0);
        let u = Multivector::<f64>::scalar(s, 300.0);
        assert!(matches!(u.exp_series(1e-15), Err(Error::SeriesDiverged(_))));
    }

    #[test]
    fn reverse_is_an_antiautomorphism() {
        let mut rng = StdRng::seed_from_u64(41);
        let s = sig(1, 3);
        let a = random_mv(s, &mut rng);
        let b = random_mv(s, &mut rng);
        let lhs = (&a * &b).reverse();
        let rhs = &b.reverse() * &a.reverse();
        assert!(lhs.approx_eq(&rhs, 1e-13));
    }

    #[test]
    fn checked_ops_reject_signature_mismatch() {
        let a = Multivector::<f64>::one(sig(2, 0));
        let b = Multivector::<f64>::one(sig(1, 1));
        assert!(matches!(
            a.geometric_product(&b),
            Err(Error::SignatureMismatch(2, 0, 1, 1))
        ));
        assert!(a.commutator(&b).is_err());
    }

    #[test]
    fn display_is_readable() {
        let s = sig(2, 0);
        let u = &Multivector::<f64>::scalar(s, 1.5)
            + &Multivector::basis(s, Blade::from_gens(&[0, 1]).unwrap())
                .unwrap()
                .scaled(&-0.25);
        assert_eq!(u.to_string(), "1.5*e + -0.25*e12");
        assert_eq!(Multivector::<f64>::zero(s).to_string(), "0");
    }

    #[test]
    fn big_signature_products_skip_the_table() {
        // n = 9 exercises the on-the-fly path; check a known square.
        let s = Signature::with_cap(9, 0, 12).unwrap();
        let blade = Blade::from_gens(&[0, 4, 8]).unwrap();
        let b = Multivector::<f64>::basis(s, blade).unwrap();
        let sq = &b * &b;
        let expect = Multivector::scalar(s, blade.reversal_sign() as f64);
        assert_eq!(sq, expect);
    }
}
