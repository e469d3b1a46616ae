//! The flat connection attached to a frame: the unique center-free
//! solution C_mu of d_mu h^a = [C_mu, h^a], mu = 1..m, a = 1..n.
//!
//! Two independent routes are implemented. The averaging route sums over
//! the whole extended basis,
//!
//!   C_mu = 2^-n sum_A (d_mu h^A) h_A,
//!
//! and is what [`Connection`] uses internally (it stays differentiable,
//! so curvature and covariant derivatives come from the same expression).
//! The eigenprojection route expands the contraction F(U) = sum_a h_a U h^a,
//! whose eigenvalue on frame-grade-i elements is lambda_i = (-1)^i (n-2i),
//! and solves the defining system grade by grade:
//!
//!   C_mu = sum_i mu_i pi{h}_i((d_mu h^a) h_a),   mu_i = 1/(n - lambda_i),
//!
//! over single grades i = 1..n for even n and paired grades {i, n-i},
//! i = 1..(n-1)/2, for odd n (single frame grades are not separable by
//! polynomials in F when n is odd, because lambda_i = lambda_{n-i}).
//! The projection coefficients solve an exact rational Vandermonde system
//! and are cached per n in [`EigenTable`].

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use serde::Serialize;

use crate::algebra::{Blade, Signature};
use crate::error::{Error, Result};
use crate::expr::{add_all, deriv, neg, product, scale, sub, Expr, JetEvaluator};
use crate::frames::{Frame, GaugeScalar};
use crate::linalg;
use crate::multivector::Multivector;
use crate::scalar::{ratio, Rational, Scalar};

fn eigenvalue(n: u32, i: u32) -> i64 {
    let v = n as i64 - 2 * i as i64;
    if i % 2 == 0 {
        v
    } else {
        -v
    }
}

/// Exact projection and reconstruction coefficients for the contraction
/// operator at a given n.
pub struct EigenTable {
    n: u32,
    /// Distinct eigenvalues, lambda_0 = n first. Length n+1 for even n,
    /// (n+1)/2 for odd n.
    lambdas: Vec<i64>,
    /// Row j: the projection onto eigenvalue lambda_j as coefficients of
    /// F^0, F^1, ... (inverse of the Vandermonde matrix of lambdas).
    proj: Vec<Vec<Rational>>,
    /// 1/(n - lambda_j); None at j = 0 where lambda_0 = n.
    mu: Vec<Option<Rational>>,
    /// Column j: sum over rows i >= 1 of mu_i * proj[i][j]. Contracting
    /// these with F-powers of (d h^a) h_a yields the connection directly.
    connection: Vec<Rational>,
}

impl EigenTable {
    pub fn get(n: u32) -> Result<Arc<EigenTable>> {
        static TABLES: OnceLock<Mutex<HashMap<u32, Arc<EigenTable>>>> = OnceLock::new();
        if n == 0 {
            return Err(Error::InvalidArgument("n = 0 has no frame".into()));
        }
        let mut cache = TABLES
            .get_or_init(|| Mutex::new(HashMap::new()))
            .lock()
            .expect("eigen table cache poisoned");
        if let Some(t) = cache.get(&n) {
            return Ok(t.clone());
        }
        let t = Arc::new(Self::build(n));
        cache.insert(n, t.clone());
        Ok(t)
    }

    fn build(n: u32) -> EigenTable {
        let count = if n % 2 == 0 {
            n as usize + 1
        } else {
            (n as usize + 1).div_ceil(2)
        };
        let lambdas: Vec<i64> = (0..count as u32).map(|i| eigenvalue(n, i)).collect();
        let vander: Vec<Vec<Rational>> = (0..count)
            .map(|i| {
                lambdas
                    .iter()
                    .map(|&l| {
                        let mut p = ratio::<Rational>(1, 1);
                        for _ in 0..i {
                            p *= ratio::<Rational>(l, 1);
                        }
                        p
                    })
                    .collect()
            })
            .collect();
        let proj = linalg::invert(&vander).expect("distinct eigenvalues");
        let mu: Vec<Option<Rational>> = lambdas
            .iter()
            .map(|&l| {
                if l == n as i64 {
                    None
                } else {
                    Some(ratio::<Rational>(1, n as i64 - l))
                }
            })
            .collect();
        let mut connection = vec![ratio::<Rational>(0, 1); count];
        for (row, m) in proj.iter().zip(&mu) {
            if let Some(m) = m {
                for (c, p) in connection.iter_mut().zip(row) {
                    *c += m.clone() * p.clone();
                }
            }
        }
        EigenTable {
            n,
            lambdas,
            proj,
            mu,
            connection,
        }
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    /// Number of distinct eigenvalues (also the number of F-powers used).
    pub fn eigen_count(&self) -> usize {
        self.lambdas.len()
    }

    pub fn is_paired(&self) -> bool {
        self.n % 2 == 1
    }

    pub fn lambda(&self, j: usize) -> i64 {
        self.lambdas[j]
    }

    pub fn mu_coeff(&self, j: usize) -> Option<&Rational> {
        self.mu[j].as_ref()
    }

    pub fn proj_row(&self, j: usize) -> &[Rational] {
        &self.proj[j]
    }

    /// F-power coefficients that map (d_mu h^a) h_a straight to C_mu.
    pub fn connection_coeffs(&self) -> &[Rational] {
        &self.connection
    }

    /// Row index of the projection that keeps frame grade `grade`.
    pub fn grade_row(&self, grade: u32) -> usize {
        if self.is_paired() {
            grade.min(self.n - grade) as usize
        } else {
            grade as usize
        }
    }
}

fn lowered<S: Scalar>(sig: Signature, vals: &[Multivector<S>], a: usize) -> Multivector<S> {
    if sig.eta(a) < 0 {
        -&vals[a]
    } else {
        vals[a].clone()
    }
}

/// The contraction F(U) = sum_a h_a U h^a for given generator values.
pub fn contraction_f<S: Scalar>(
    sig: Signature,
    gen_vals: &[Multivector<S>],
    u: &Multivector<S>,
) -> Multivector<S> {
    let mut acc = Multivector::zero(sig);
    for a in 0..gen_vals.len() {
        let term = &(&lowered(sig, gen_vals, a) * u) * &gen_vals[a];
        acc = &acc + &term;
    }
    acc
}

fn project_with_row<S: Scalar>(
    sig: Signature,
    gen_vals: &[Multivector<S>],
    u: &Multivector<S>,
    row: &[Rational],
) -> Multivector<S> {
    let mut acc = Multivector::zero(sig);
    let mut power = u.clone();
    for c in row {
        acc = &acc + &power.scaled(&S::from_rational(c));
        power = contraction_f(sig, gen_vals, &power);
    }
    acc
}

/// pi{h}_i: the part of u of frame grade i. Even n only; odd n merges
/// grades i and n-i, see [`project_frame_grade_paired`].
pub fn project_frame_grade<S: Scalar>(
    sig: Signature,
    gen_vals: &[Multivector<S>],
    u: &Multivector<S>,
    grade: u32,
) -> Result<Multivector<S>> {
    if grade > sig.n() {
        return Err(Error::GradeOutOfRange(grade, sig.n()));
    }
    if sig.is_odd() {
        return Err(Error::OddPairedOnly);
    }
    let table = EigenTable::get(sig.n())?;
    Ok(project_with_row(
        sig,
        gen_vals,
        u,
        table.proj_row(grade as usize),
    ))
}

/// pi{h}_{i, n-i}: the part of u of frame grade i or n-i.
pub fn project_frame_grade_paired<S: Scalar>(
    sig: Signature,
    gen_vals: &[Multivector<S>],
    u: &Multivector<S>,
    grade: u32,
) -> Result<Multivector<S>> {
    if grade > sig.n() {
        return Err(Error::GradeOutOfRange(grade, sig.n()));
    }
    let table = EigenTable::get(sig.n())?;
    if table.is_paired() {
        Ok(project_with_row(
            sig,
            gen_vals,
            u,
            table.proj_row(table.grade_row(grade)),
        ))
    } else {
        let lo = grade.min(sig.n() - grade);
        let hi = grade.max(sig.n() - grade);
        let p = project_with_row(sig, gen_vals, u, table.proj_row(lo as usize));
        if lo == hi {
            Ok(p)
        } else {
            Ok(&p + &project_with_row(sig, gen_vals, u, table.proj_row(hi as usize)))
        }
    }
}

/// Connection values by the eigenprojection route.
pub fn connection_projection_at<S: Scalar>(
    frame: &Frame<S>,
    x: &[S],
) -> Result<Vec<Multivector<S>>> {
    let sig = frame.sig();
    let table = EigenTable::get(sig.n())?;
    let coeffs: Vec<S> = table
        .connection_coeffs()
        .iter()
        .map(|c| S::from_rational(c))
        .collect();
    let jets = frame.gen_jets(x)?;
    let vals: Vec<Multivector<S>> = jets.iter().map(|j| j.value().clone()).collect();
    (0..frame.base().m())
        .map(|mu| {
            let mut x_mu = Multivector::zero(sig);
            for (a, jet) in jets.iter().enumerate() {
                x_mu = &x_mu + &(jet.grad(mu)? * &lowered(sig, &vals, a));
            }
            let mut acc = Multivector::zero(sig);
            let mut power = x_mu;
            for c in &coeffs {
                acc = &acc + &power.scaled(c);
                power = contraction_f(sig, &vals, &power);
            }
            Ok(acc)
        })
        .collect()
}

/// Connection values by full-basis averaging.
pub fn connection_averaged_at<S: Scalar>(
    frame: &Frame<S>,
    x: &[S],
) -> Result<Vec<Multivector<S>>> {
    let sig = frame.sig();
    let basis = frame.extended_basis(x)?;
    let inv_dim = ratio::<S>(1, sig.dim() as i64);
    (0..frame.base().m())
        .map(|mu| {
            let mut acc = Multivector::zero(sig);
            for (mask, jet) in basis.iter().enumerate().skip(1) {
                let term = jet.grad(mu)? * jet.value();
                acc = if frame.basis_inverse_sign(Blade::from_mask(mask as u32)) > 0 {
                    &acc + &term
                } else {
                    &acc - &term
                };
            }
            Ok(acc.scaled(&inv_dim))
        })
        .collect()
}

/// For odd n the average collapses onto the lower half of the basis:
/// C_mu = 2^(1-n) sum over 1 <= |A| <= (n-1)/2 of (d_mu h^A) h_A.
pub fn connection_averaged_reduced_at<S: Scalar>(
    frame: &Frame<S>,
    x: &[S],
) -> Result<Vec<Multivector<S>>> {
    let sig = frame.sig();
    if !sig.is_odd() {
        return Err(Error::InvalidArgument(
            "the reduced average applies to odd n only".into(),
        ));
    }
    let max_grade = (sig.n() - 1) / 2;
    let basis = frame.extended_basis(x)?;
    let half = ratio::<S>(2, sig.dim() as i64);
    (0..frame.base().m())
        .map(|mu| {
            let mut acc = Multivector::zero(sig);
            for (mask, jet) in basis.iter().enumerate().skip(1) {
                let blade = Blade::from_mask(mask as u32);
                if blade.grade() > max_grade {
                    continue;
                }
                let term = jet.grad(mu)? * jet.value();
                acc = if frame.basis_inverse_sign(blade) > 0 {
                    &acc + &term
                } else {
                    &acc - &term
                };
            }
            Ok(acc.scaled(&half))
        })
        .collect()
}

/// For frames with grade-1 generators the connection reduces to
/// C_mu = 1/4 (d_mu h^a) h_a.
pub fn connection_grade1_at<S: Scalar>(frame: &Frame<S>, x: &[S]) -> Result<Vec<Multivector<S>>> {
    let sig = frame.sig();
    let jets = frame.gen_jets(x)?;
    let vals: Vec<Multivector<S>> = jets.iter().map(|j| j.value().clone()).collect();
    let quarter = ratio::<S>(1, 4);
    (0..frame.base().m())
        .map(|mu| {
            let mut acc = Multivector::zero(sig);
            for (a, jet) in jets.iter().enumerate() {
                acc = &acc + &(jet.grad(mu)? * &lowered(sig, &vals, a));
            }
            Ok(acc.scaled(&quarter))
        })
        .collect()
}

/// Grade-1 frames again, through the coefficient matrix y^a_b of
/// h^a = y^a_b e^b: C_mu = sum_{b<d} w_{mu b d} e^{bd} with
/// w_{mu b d} = 1/2 eta_aa d_mu(y^a_b) y^a_d.
pub fn connection_omega_at<S: Scalar>(frame: &Frame<S>, x: &[S]) -> Result<Vec<Multivector<S>>> {
    let sig = frame.sig();
    let n = sig.n() as usize;
    let jets = frame.gen_jets(x)?;
    let y: Vec<Vec<S>> = jets
        .iter()
        .map(|j| {
            (0..n)
                .map(|b| j.value().coeff(Blade::from_mask(1 << b)).clone())
                .collect()
        })
        .collect();
    let half = ratio::<S>(1, 2);
    (0..frame.base().m())
        .map(|mu| {
            let dy: Vec<Vec<S>> = jets
                .iter()
                .map(|j| {
                    (0..n)
                        .map(|b| j.grad(mu).map(|g| g.coeff(Blade::from_mask(1 << b)).clone()))
                        .collect::<Result<Vec<S>>>()
                })
                .collect::<Result<Vec<_>>>()?;
            let mut c = Multivector::zero(sig);
            for b in 0..n {
                for d in (b + 1)..n {
                    let mut w = S::zero();
                    for a in 0..n {
                        let term = dy[a][b].clone() * y[a][d].clone();
                        w = if sig.eta(a) > 0 { w + term } else { w - term };
                    }
                    let blade = Multivector::basis(sig, Blade::from_gens(&[b, d])?)?;
                    c = &c + &blade.scaled(&(half.clone() * w));
                }
            }
            Ok(c)
        })
        .collect()
}

/// The connection of a frame, kept as differentiable expressions built
/// from the averaging formula.
#[derive(Clone)]
pub struct Connection<S: Scalar> {
    frame: Frame<S>,
    comps: Vec<Expr<S>>,
}

impl<S: Scalar> Connection<S> {
    pub fn new(frame: Frame<S>) -> Self {
        let sig = frame.sig();
        let dim = sig.dim();
        let inv_dim = ratio::<S>(1, dim as i64);
        let comps = (0..frame.base().m())
            .map(|mu| {
                let mut terms = Vec::with_capacity(dim - 1);
                for mask in 1..dim {
                    let blade = Blade::from_mask(mask as u32);
                    let b = frame.basis_expr(blade);
                    let t = product(&deriv(b, mu), b);
                    terms.push(if frame.basis_inverse_sign(blade) > 0 {
                        t
                    } else {
                        neg(&t)
                    });
                }
                scale(inv_dim.clone(), &add_all(&terms))
            })
            .collect();
        Connection { frame, comps }
    }

    pub fn frame(&self) -> &Frame<S> {
        &self.frame
    }

    pub fn comps(&self) -> &[Expr<S>] {
        &self.comps
    }

    pub fn comp(&self, mu: usize) -> &Expr<S> {
        &self.comps[mu]
    }

    pub fn values_at(&self, x: &[S]) -> Result<Vec<Multivector<S>>> {
        let mut ev = JetEvaluator::new(self.frame.sig(), self.frame.base(), x);
        self.comps
            .iter()
            .map(|c| Ok(ev.eval(c)?.value().clone()))
            .collect()
    }

    /// All defining and consistency residuals over sample points.
    pub fn verify(&self, points: &[Vec<S>]) -> Result<ConnectionReport> {
        let sig = self.frame.sig();
        let base = self.frame.base();
        let m = base.m();
        let mut report = ConnectionReport::default();
        let grade1_frame = points.iter().take(1).try_fold(true, |_, x| {
            let jets = self.frame.gen_jets(x)?;
            Ok::<bool, Error>(jets.iter().all(|j| {
                let v = j.value();
                v.grade_project(1)
                    .map(|g| (&g - v).max_abs() < 1e-12)
                    .unwrap_or(false)
            }))
        })?;
        for x in points {
            let mut ev = JetEvaluator::new(sig, base, x);
            let c_jets = self
                .comps
                .iter()
                .map(|c| ev.eval(c))
                .collect::<Result<Vec<_>>>()?;
            let basis_jets = self
                .frame
                .basis_exprs()
                .iter()
                .map(|b| ev.eval(b))
                .collect::<Result<Vec<_>>>()?;
            for mu in 0..m {
                let c_mu = c_jets[mu].value();
                report.center_leak = report.center_leak.max(c_mu.center_project().max_abs());
                for jet in basis_jets.iter().skip(1) {
                    let resid = jet.grad(mu)? - &c_mu.commutator(jet.value())?;
                    report.defining_residual = report.defining_residual.max(resid.max_abs());
                }
                for nu in (mu + 1)..m {
                    let curv = &(c_jets[nu].grad(mu)? - c_jets[mu].grad(nu)?)
                        - &c_jets[mu].value().commutator(c_jets[nu].value())?;
                    report.curvature_residual = report.curvature_residual.max(curv.max_abs());
                }
            }
            let avg: Vec<Multivector<S>> = c_jets.iter().map(|j| j.value().clone()).collect();
            let proj = connection_projection_at(&self.frame, x)?;
            for (a, p) in avg.iter().zip(&proj) {
                report.formula_agreement = report.formula_agreement.max((a - p).max_abs());
            }
            if sig.is_odd() {
                let red = connection_averaged_reduced_at(&self.frame, x)?;
                let r = report.reduced_agreement.get_or_insert(0.0);
                for (a, p) in avg.iter().zip(&red) {
                    *r = r.max((a - p).max_abs());
                }
            }
            if grade1_frame {
                let quarter = connection_grade1_at(&self.frame, x)?;
                let omega = connection_omega_at(&self.frame, x)?;
                let g = report.grade1_agreement.get_or_insert(0.0);
                let o = report.omega_agreement.get_or_insert(0.0);
                for ((a, q), w) in avg.iter().zip(&quarter).zip(&omega) {
                    *g = g.max((a - q).max_abs());
                    *o = o.max((a - w).max_abs());
                }
            }
        }
        Ok(report)
    }
}

/// The transformed connection S^-1 C_mu S - S^-1 d_mu S; by uniqueness it
/// is the connection of the conjugated frame.
pub fn gauge_transform_connection<S: Scalar>(
    comps: &[Expr<S>],
    scalar: &GaugeScalar<S>,
) -> Vec<Expr<S>> {
    comps
        .iter()
        .enumerate()
        .map(|(mu, c)| sub(&scalar.conjugate(c), &scalar.log_derivative(mu)))
        .collect()
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct ConnectionReport {
    /// max |d_mu h^A - [C_mu, h^A]| over points, mu, and all A != 0.
    pub defining_residual: f64,
    /// max |center part of C_mu|.
    pub center_leak: f64,
    /// max |d_mu C_nu - d_nu C_mu - [C_mu, C_nu]|.
    pub curvature_residual: f64,
    /// max difference between the averaging and projection routes.
    pub formula_agreement: f64,
    /// Odd n: max difference between the full and half-basis averages.
    pub reduced_agreement: Option<f64>,
    /// Grade-1 frames: difference from 1/4 (d_mu h^a) h_a.
    pub grade1_agreement: Option<f64>,
    /// Grade-1 frames: difference from the coefficient-matrix route.
    pub omega_agreement: Option<f64>,
}

impl ConnectionReport {
    pub fn max_residual(&self) -> f64 {
        [
            Some(self.defining_residual),
            Some(self.center_leak),
            Some(self.curvature_residual),
            Some(self.formula_agreement),
            self.reduced_agreement,
            self.grade1_agreement,
            self.omega_agreement,
        ]
        .into_iter()
        .flatten()
        .fold(0.0, f64::max)
    }
}
