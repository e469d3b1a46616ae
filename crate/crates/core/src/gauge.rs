//! Covariant differentiation along a frame's connection, covariantly
//! constant covectors, and the Yang-Mills fields they generate.
//!
//! For a covector K_mu with D_nu K_mu = 0 (built from constant frame
//! coefficients), the potential B_mu = C_mu + K_mu solves
//!
//!   d_mu B_nu - d_nu B_mu - [B_mu, B_nu] = F_{mu nu} = -[K_mu, K_nu],
//!   d_mu F^{mu nu} - [B_mu, F^{mu nu}]   = J^nu = [K_mu, [K^mu, K^nu]],
//!
//! and the current obeys the conservation law d_nu J^nu - [B_nu, J^nu] = 0.
//! For vector frames the one-parameter family K_mu = sigma h_mu yields the
//! closed-form current J^nu = eps h^nu with eps = 4 (n-1) sigma^3.

use serde::Serialize;

use crate::algebra::Signature;
use crate::connection::Connection;
use crate::error::{Error, Result};
use crate::expr::{
    add, add_all, commutator, deriv, konst, product, scale, sub, Expr, JetEvaluator,
};
use crate::frames::{Frame, FrameKind, GaugeScalar};
use crate::jet::{strict_upper_index, strict_upper_len, BaseSpace, Jet2};
use crate::multivector::Multivector;
use crate::scalar::Scalar;

/// D_mu U = d_mu U - [C_mu, U] as an expression.
pub fn covariant_derivative<S: Scalar>(
    conn: &Connection<S>,
    u: &Expr<S>,
    mu: usize,
) -> Expr<S> {
    sub(&deriv(u, mu), &commutator(conn.comp(mu), u))
}

/// A covector K_mu = sum_A k_{mu A} h^A with constant coefficients, which
/// makes it covariantly constant for the frame's connection.
#[derive(Clone)]
pub struct CovConstCovector<S: Scalar> {
    coeffs: Vec<Vec<S>>,
    comps: Vec<Expr<S>>,
}

impl<S: Scalar> CovConstCovector<S> {
    /// `coeffs[mu][mask]` is the coefficient of h^mask in K_mu. The
    /// center slots (mask 0 and, for odd n, the full mask) must be zero
    /// so that K stays in the Lie algebra.
    pub fn from_frame_coeffs(frame: &Frame<S>, coeffs: Vec<Vec<S>>) -> Result<Self> {
        let sig = frame.sig();
        let dim = sig.dim();
        let m = frame.base().m();
        if coeffs.len() != m {
            return Err(Error::InvalidFixture(format!(
                "expected {} coefficient rows, got {}",
                m,
                coeffs.len()
            )));
        }
        let mut comps = Vec::with_capacity(m);
        for row in &coeffs {
            if row.len() != dim {
                return Err(Error::InvalidFixture(format!(
                    "expected {} coefficients per row, got {}",
                    dim,
                    row.len()
                )));
            }
            if !row[0].is_zero() || (sig.is_odd() && !row[dim - 1].is_zero()) {
                return Err(Error::InvalidFixture(
                    "covector coefficients must vanish on the center slots".into(),
                ));
            }
            let terms: Vec<Expr<S>> = row
                .iter()
                .enumerate()
                .filter(|(_, c)| !c.is_zero())
                .map(|(mask, c)| {
                    scale(
                        c.clone(),
                        &frame.basis_exprs()[mask],
                    )
                })
                .collect();
            comps.push(if terms.is_empty() {
                konst(Multivector::zero(sig))
            } else {
                add_all(&terms)
            });
        }
        Ok(CovConstCovector { coeffs, comps })
    }

    pub fn coeffs(&self) -> &[Vec<S>] {
        &self.coeffs
    }

    pub fn comps(&self) -> &[Expr<S>] {
        &self.comps
    }

    pub fn comp(&self, mu: usize) -> &Expr<S> {
        &self.comps[mu]
    }

    /// max |D_nu K_mu| over points and index pairs.
    pub fn covariance_residual(&self, conn: &Connection<S>, points: &[Vec<S>]) -> Result<f64> {
        let sig = conn.frame().sig();
        let base = conn.frame().base();
        let mut worst: f64 = 0.0;
        let d_exprs: Vec<Expr<S>> = (0..base.m())
            .flat_map(|nu| {
                self.comps
                    .iter()
                    .map(move |k| covariant_derivative(conn, k, nu))
            })
            .collect();
        for x in points {
            let mut ev = JetEvaluator::new(sig, base, x);
            for d in &d_exprs {
                worst = worst.max(ev.eval(d)?.value().max_abs());
            }
        }
        Ok(worst)
    }
}

/// A candidate Yang-Mills triple (potential, strength, current) kept as
/// expressions; `verify` measures how well it solves the equations.
#[derive(Clone)]
pub struct YangMillsField<S: Scalar> {
    sig: Signature,
    base: BaseSpace,
    b: Vec<Expr<S>>,
    /// F_{mu nu} for mu < nu in strict-upper-triangle order.
    f_upper: Vec<Expr<S>>,
    j: Vec<Expr<S>>,
    sigma_eps: Option<(S, S)>,
}

impl<S: Scalar> YangMillsField<S> {
    /// B = C + K for a covariantly constant K; the strength and current
    /// are the induced closed forms.
    pub fn covconst(conn: &Connection<S>, k: &CovConstCovector<S>) -> Result<Self> {
        let sig = conn.frame().sig();
        let base = conn.frame().base();
        let m = base.m();
        if k.comps.len() != m {
            return Err(Error::InvalidFixture(
                "covector length does not match the base".into(),
            ));
        }
        let b = (0..m)
            .map(|mu| add(conn.comp(mu), k.comp(mu)))
            .collect();
        let mut f_upper = Vec::with_capacity(strict_upper_len(m));
        for mu in 0..m {
            for nu in (mu + 1)..m {
                // F_{mu nu} = -[K_mu, K_nu].
                f_upper.push(commutator(k.comp(nu), k.comp(mu)));
            }
        }
        let j = (0..m)
            .map(|nu| {
                let terms: Vec<Expr<S>> = (0..m)
                    .map(|mu| {
                        let inner = commutator(k.comp(mu), &commutator(k.comp(mu), k.comp(nu)));
                        let sign = base.rho(mu) * base.rho(nu);
                        if sign < 0 {
                            crate::expr::neg(&inner)
                        } else {
                            inner
                        }
                    })
                    .collect();
                add_all(&terms)
            })
            .collect();
        Ok(YangMillsField {
            sig,
            base,
            b,
            f_upper,
            j,
            sigma_eps: None,
        })
    }

    /// The family K_mu = sigma h_mu over a vector frame, with current
    /// eps h^nu, eps = 4 (n-1) sigma^3.
    pub fn sigma_family(conn: &Connection<S>, sigma: S) -> Result<Self> {
        let frame = conn.frame();
        if frame.kind() != FrameKind::Vector {
            return Err(Error::InvalidArgument(
                "the sigma family needs a vector frame".into(),
            ));
        }
        let sig = frame.sig();
        let base = frame.base();
        let m = base.m();
        let dim = sig.dim();
        let mut coeffs = vec![vec![S::zero(); dim]; m];
        for (mu, row) in coeffs.iter_mut().enumerate() {
            // K_mu = sigma h_mu = sigma rho_mumu h^mu.
            row[1 << mu] = if base.rho(mu) < 0 {
                -sigma.clone()
            } else {
                sigma.clone()
            };
        }
        let k = CovConstCovector::from_frame_coeffs(frame, coeffs)?;
        let mut field = Self::covconst(conn, &k)?;
        let eps = S::from_i64(4 * (sig.n() as i64 - 1))
            * sigma.clone()
            * sigma.clone()
            * sigma.clone();
        field.j = (0..m)
            .map(|nu| scale(eps.clone(), frame.gen(nu)))
            .collect();
        field.sigma_eps = Some((sigma, eps));
        Ok(field)
    }

    /// The zero solution B = F = J = 0.
    pub fn zero(sig: Signature, base: BaseSpace) -> Self {
        let z = konst(Multivector::<S>::zero(sig));
        let m = base.m();
        YangMillsField {
            sig,
            base,
            b: vec![z.clone(); m],
            f_upper: vec![z.clone(); strict_upper_len(m)],
            j: vec![z; m],
            sigma_eps: None,
        }
    }

    /// B -> S^-1 B S - S^-1 dS, F -> S^-1 F S, J -> S^-1 J S.
    pub fn gauge_transformed(&self, g: &GaugeScalar<S>) -> YangMillsField<S> {
        YangMillsField {
            sig: self.sig,
            base: self.base,
            b: self
                .b
                .iter()
                .enumerate()
                .map(|(mu, b)| sub(&g.conjugate(b), &g.log_derivative(mu)))
                .collect(),
            f_upper: self.f_upper.iter().map(|f| g.conjugate(f)).collect(),
            j: self.j.iter().map(|j| g.conjugate(j)).collect(),
            sigma_eps: self.sigma_eps.clone(),
        }
    }

    pub fn sig(&self) -> Signature {
        self.sig
    }

    pub fn base(&self) -> BaseSpace {
        self.base
    }

    pub fn potential(&self) -> &[Expr<S>] {
        &self.b
    }

    pub fn current(&self) -> &[Expr<S>] {
        &self.j
    }

    /// F_{mu nu} with the antisymmetry folded in; None on the diagonal.
    pub fn strength(&self, mu: usize, nu: usize) -> Option<Expr<S>> {
        use std::cmp::Ordering::*;
        match mu.cmp(&nu) {
            Less => Some(self.f_upper[strict_upper_index(self.base.m(), mu, nu)].clone()),
            Equal => None,
            Greater => Some(crate::expr::neg(
                &self.f_upper[strict_upper_index(self.base.m(), nu, mu)],
            )),
        }
    }

    pub fn sigma_eps(&self) -> Option<&(S, S)> {
        self.sigma_eps.as_ref()
    }

    fn f_value(&self, f_jets: &[Jet2<S>], mu: usize, nu: usize) -> Multivector<S> {
        use std::cmp::Ordering::*;
        let m = self.base.m();
        match mu.cmp(&nu) {
            Less => f_jets[strict_upper_index(m, mu, nu)].value().clone(),
            Equal => Multivector::zero(self.sig),
            Greater => -f_jets[strict_upper_index(m, nu, mu)].value(),
        }
    }

    fn f_grad(
        &self,
        f_jets: &[Jet2<S>],
        mu: usize,
        nu: usize,
        wrt: usize,
    ) -> Result<Multivector<S>> {
        use std::cmp::Ordering::*;
        let m = self.base.m();
        Ok(match mu.cmp(&nu) {
            Less => f_jets[strict_upper_index(m, mu, nu)].grad(wrt)?.clone(),
            Equal => Multivector::zero(self.sig),
            Greater => {
                let g = f_jets[strict_upper_index(m, nu, mu)].grad(wrt)?;
                -g
            }
        })
    }

    /// Residuals of both equations and the conservation law at one point.
    pub fn residuals_at(&self, x: &[S]) -> Result<YmResiduals> {
        let m = self.base.m();
        let mut ev = JetEvaluator::new(self.sig, self.base, x);
        let b_jets = self
            .b
            .iter()
            .map(|e| ev.eval(e))
            .collect::<Result<Vec<_>>>()?;
        let f_jets = self
            .f_upper
            .iter()
            .map(|e| ev.eval(e))
            .collect::<Result<Vec<_>>>()?;
        let j_jets = self
            .j
            .iter()
            .map(|e| ev.eval(e))
            .collect::<Result<Vec<_>>>()?;

        let mut out = YmResiduals::default();
        for jet in &b_jets {
            out.center_leak = out.center_leak.max(jet.value().center_project().max_abs());
        }
        for jet in f_jets.iter().chain(&j_jets) {
            out.center_leak = out.center_leak.max(jet.value().center_project().max_abs());
        }
        for mu in 0..m {
            for nu in (mu + 1)..m {
                let lhs = &(b_jets[nu].grad(mu)? - b_jets[mu].grad(nu)?)
                    - &b_jets[mu].value().commutator(b_jets[nu].value())?;
                let resid = &lhs - &self.f_value(&f_jets, mu, nu);
                out.first = out.first.max(resid.max_abs());
            }
        }
        for nu in 0..m {
            let mut acc = Multivector::zero(self.sig);
            for mu in 0..m {
                if mu == nu {
                    continue;
                }
                let term = &self.f_grad(&f_jets, mu, nu, mu)?
                    - &b_jets[mu].value().commutator(&self.f_value(&f_jets, mu, nu))?;
                acc = if self.base.rho(mu) > 0 {
                    &acc + &term
                } else {
                    &acc - &term
                };
            }
            if self.base.rho(nu) < 0 {
                acc = -&acc;
            }
            out.second = out.second.max((&acc - j_jets[nu].value()).max_abs());
        }
        let mut cons = Multivector::zero(self.sig);
        for nu in 0..m {
            let term = j_jets[nu].grad(nu)? - &b_jets[nu].value().commutator(j_jets[nu].value())?;
            cons = &cons + &term;
        }
        out.conservation = cons.max_abs();
        Ok(out)
    }

    pub fn verify(&self, points: &[Vec<S>]) -> Result<YmReport> {
        let mut report = YmReport::default();
        for x in points {
            let r = self.residuals_at(x)?;
            report.first_equation = report.first_equation.max(r.first);
            report.second_equation = report.second_equation.max(r.second);
            report.conservation = report.conservation.max(r.conservation);
            report.center_leak = report.center_leak.max(r.center_leak);
        }
        Ok(report)
    }
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct YmResiduals {
    /// |d_mu B_nu - d_nu B_mu - [B_mu, B_nu] - F_{mu nu}|.
    pub first: f64,
    /// |d_mu F^{mu nu} - [B_mu, F^{mu nu}] - J^nu|.
    pub second: f64,
    /// |d_nu J^nu - [B_nu, J^nu]|.
    pub conservation: f64,
    /// Center component of B, F, J (all must stay in the Lie algebra).
    pub center_leak: f64,
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct YmReport {
    pub first_equation: f64,
    pub second_equation: f64,
    pub conservation: f64,
    pub center_leak: f64,
}

impl YmReport {
    pub fn max_residual(&self) -> f64 {
        self.first_equation
            .max(self.second_equation)
            .max(self.conservation)
            .max(self.center_leak)
    }
}

/// Residuals of the derivative rules: linearity, the Leibniz rule,
/// commuting second covariant derivatives, the coefficient rule for
/// frame-expanded fields, the cyclic commutator identities, the relation
/// D_mu C_rho = d_rho C_mu, and the witness identity
/// d_nu D_mu U - D_mu d_nu U = [U, d_nu C_mu].
#[derive(Clone, Debug, Default, Serialize)]
pub struct CovDerivReport {
    pub additivity: f64,
    pub leibniz: f64,
    pub commutation: f64,
    pub coefficient_rule: f64,
    pub cyclic_partial: f64,
    pub cyclic_covariant: f64,
    pub connection_derivative: f64,
    pub noncommutation_witness: f64,
}

impl CovDerivReport {
    pub fn max_residual(&self) -> f64 {
        [
            self.additivity,
            self.leibniz,
            self.commutation,
            self.coefficient_rule,
            self.cyclic_partial,
            self.cyclic_covariant,
            self.connection_derivative,
            self.noncommutation_witness,
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }
}

/// Check the covariant-derivative calculus on two sample fields and a
/// frame-coefficient expansion.
pub fn verify_covariant_derivative<S: Scalar>(
    conn: &Connection<S>,
    u: &Expr<S>,
    w: &Expr<S>,
    coeff_fields: &[Expr<S>],
    points: &[Vec<S>],
) -> Result<CovDerivReport> {
    let frame = conn.frame();
    let sig = frame.sig();
    let base = frame.base();
    let m = base.m();
    if coeff_fields.len() != sig.dim() {
        return Err(Error::InvalidArgument(format!(
            "need {} coefficient fields, got {}",
            sig.dim(),
            coeff_fields.len()
        )));
    }

    // Expression-level constructions, shared across points.
    let sum_uw = add(u, w);
    let prod_uw = product(u, w);
    let expanded = add_all(
        &coeff_fields
            .iter()
            .zip(frame.basis_exprs())
            .map(|(c, b)| product(c, b))
            .collect::<Vec<_>>(),
    );
    let d = |e: &Expr<S>, mu: usize| covariant_derivative(conn, e, mu);

    let mut additivity = Vec::new();
    let mut leibniz = Vec::new();
    let mut commutation = Vec::new();
    let mut coeff_rule = Vec::new();
    let mut noncomm = Vec::new();
    for mu in 0..m {
        additivity.push(sub(&d(&sum_uw, mu), &add(&d(u, mu), &d(w, mu))));
        leibniz.push(sub(
            &d(&prod_uw, mu),
            &add(&product(u, &d(w, mu)), &product(&d(u, mu), w)),
        ));
        coeff_rule.push(sub(
            &d(&expanded, mu),
            &add_all(
                &coeff_fields
                    .iter()
                    .zip(frame.basis_exprs())
                    .map(|(c, b)| product(&deriv(c, mu), b))
                    .collect::<Vec<_>>(),
            ),
        ));
        for nu in 0..m {
            if nu != mu {
                commutation.push(sub(&d(&d(u, nu), mu), &d(&d(u, mu), nu)));
            }
            // d_nu D_mu U - D_mu d_nu U = [U, d_nu C_mu].
            noncomm.push(sub(
                &sub(&deriv(&d(u, mu), nu), &d(&deriv(u, nu), mu)),
                &commutator(u, &deriv(conn.comp(mu), nu)),
            ));
        }
    }
    let mut cyc_partial = Vec::new();
    let mut cyc_cov = Vec::new();
    let mut conn_deriv = Vec::new();
    for lam in 0..m {
        for mu in 0..m {
            conn_deriv.push(sub(&d(conn.comp(mu), lam), &deriv(conn.comp(lam), mu)));
            for nu in 0..m {
                let c_mn = commutator(conn.comp(mu), conn.comp(nu));
                let c_nl = commutator(conn.comp(nu), conn.comp(lam));
                let c_lm = commutator(conn.comp(lam), conn.comp(mu));
                cyc_partial.push(add_all(&[
                    deriv(&c_mn, lam),
                    deriv(&c_nl, mu),
                    deriv(&c_lm, nu),
                ]));
                cyc_cov.push(add_all(&[d(&c_mn, lam), d(&c_nl, mu), d(&c_lm, nu)]));
            }
        }
    }

    let mut report = CovDerivReport::default();
    for x in points {
        let mut ev = JetEvaluator::new(sig, base, x);
        let fold = |exprs: &[Expr<S>], slot: &mut f64, ev: &mut JetEvaluator<S>| {
            for e in exprs {
                match ev.eval(e) {
                    Ok(j) => *slot = slot.max(j.value().max_abs()),
                    Err(err) => return Err(err),
                }
            }
            Ok(())
        };
        fold(&additivity, &mut report.additivity, &mut ev)?;
        fold(&leibniz, &mut report.leibniz, &mut ev)?;
        fold(&commutation, &mut report.commutation, &mut ev)?;
        fold(&coeff_rule, &mut report.coefficient_rule, &mut ev)?;
        fold(&cyc_partial, &mut report.cyclic_partial, &mut ev)?;
        fold(&cyc_cov, &mut report.cyclic_covariant, &mut ev)?;
        fold(&conn_deriv, &mut report.connection_derivative, &mut ev)?;
        fold(&noncomm, &mut report.noncommutation_witness, &mut ev)?;
    }
    Ok(report)
}
