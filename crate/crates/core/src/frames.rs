//! Frame fields: n multivector fields h^a satisfying the generator
//! relations h^a h^b + h^b h^a = 2 eta^{ab} e at every point.
//!
//! Two index conventions share the machinery. A scalar-index frame keeps
//! Latin indices a = 1..n independent of the base coordinates (m may
//! differ from n); a vector frame ties mu = 1..m to the base with
//! rho = eta, which forces m = n. For odd n frames must additionally have
//! Tr(h^{1..n}) = 0, which pins h^{1..n} = +/- e^{1..n} pointwise.
//!
//! Orthogonal fixtures come from a matrix field Y(x) = D exp(M(x)) with
//! M = eta * A, A pointwise antisymmetric and D a diagonal reflection
//! sign. Internally the identity-component part is realised as a rotor
//! conjugation: with G = -1/2 sum_{a<b} A_ab e^{ab} and S = exp(-G),
//! S^-1 e^a S reproduces exp(M)^a_b e^b; validation cross-checks the two
//! routes against each other.

use serde::{Deserialize, Serialize};

use crate::algebra::{blade_inverse_sign, Blade, Signature};
use crate::error::{Error, Result};
use crate::expr::{
    self, add_all, deriv, exp_series, inverse, jet_eval_many, konst, product, scale, Expr,
    JetEvaluator,
};
use crate::jet::{strict_upper_index as upper_index, strict_upper_len as upper_len, BaseSpace, Jet2};
use crate::linalg::{self, Matrix};
use crate::multivector::Multivector;
use crate::scalar::{ratio, Scalar};

#[derive(Copy, Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FrameKind {
    /// Latin frame index, independent of the base coordinates.
    ScalarIndex,
    /// Greek frame index tied to the base; requires (k,l) = (p,q).
    Vector,
}

#[derive(Copy, Clone, PartialEq, Eq, Debug, Serialize)]
pub enum FrameSource {
    Constant,
    Orthogonal,
    Gauge,
    Custom,
}

#[derive(Clone)]
pub struct Frame<S: Scalar> {
    sig: Signature,
    base: BaseSpace,
    kind: FrameKind,
    source: FrameSource,
    gens: Vec<Expr<S>>,
    /// Extended basis h^A for every blade mask, ascending factor order.
    basis: Vec<Expr<S>>,
}

impl<S: Scalar> Frame<S> {
    pub fn from_gens(
        sig: Signature,
        base: BaseSpace,
        kind: FrameKind,
        source: FrameSource,
        gens: Vec<Expr<S>>,
    ) -> Result<Self> {
        if gens.len() != sig.n() as usize {
            return Err(Error::InvalidFrame(format!(
                "{} needs {} generators, got {}",
                sig,
                sig.n(),
                gens.len()
            )));
        }
        if kind == FrameKind::Vector && (base.k() != sig.p() || base.l() != sig.q()) {
            return Err(Error::InvalidFrame(format!(
                "vector frame requires base {} to match {}",
                base, sig
            )));
        }
        let basis = build_extended_basis(sig, &gens);
        Ok(Frame {
            sig,
            base,
            kind,
            source,
            gens,
            basis,
        })
    }

    /// The constant frame h^a = e^a.
    pub fn constant(sig: Signature, base: BaseSpace, kind: FrameKind) -> Result<Self> {
        let gens = (0..sig.n() as usize)
            .map(|a| Ok(konst(Multivector::generator(sig, a)?)))
            .collect::<Result<Vec<_>>>()?;
        Self::from_gens(sig, base, kind, FrameSource::Constant, gens)
    }

    /// Frame h^a = y^a_b e^b from an orthogonal matrix field.
    pub fn from_orthogonal(field: &OrthoMatrixField<S>, kind: FrameKind) -> Result<Self> {
        let sig = field.sig;
        let rotor = field.rotor_scalar();
        let mut gens = Vec::with_capacity(sig.n() as usize);
        for a in 0..sig.n() as usize {
            let conj = rotor.conjugate(&konst(Multivector::generator(sig, a)?));
            gens.push(if field.reflections[a] < 0 {
                expr::neg(&conj)
            } else {
                conj
            });
        }
        Self::from_gens(sig, field.base, kind, FrameSource::Orthogonal, gens)
    }

    /// Conjugated frame S^-1 h^a S.
    pub fn conjugated(&self, scalar: &GaugeScalar<S>) -> Result<Self> {
        if scalar.sig != self.sig {
            return Err(Error::SignatureMismatch(
                scalar.sig.p() as u8,
                scalar.sig.q() as u8,
                self.sig.p() as u8,
                self.sig.q() as u8,
            ));
        }
        if scalar.base != self.base {
            return Err(Error::BaseMismatch(
                scalar.base.k() as u8,
                scalar.base.l() as u8,
                self.base.k() as u8,
                self.base.l() as u8,
            ));
        }
        let gens = self
            .gens
            .iter()
            .map(|g| scalar.conjugate(g))
            .collect::<Vec<_>>();
        Self::from_gens(self.sig, self.base, self.kind, FrameSource::Gauge, gens)
    }

    pub fn sig(&self) -> Signature {
        self.sig
    }

    pub fn base(&self) -> BaseSpace {
        self.base
    }

    pub fn kind(&self) -> FrameKind {
        self.kind
    }

    pub fn source(&self) -> FrameSource {
        self.source
    }

    pub fn n(&self) -> usize {
        self.sig.n() as usize
    }

    pub fn gens(&self) -> &[Expr<S>] {
        &self.gens
    }

    pub fn gen(&self, a: usize) -> &Expr<S> {
        &self.gens[a]
    }

    /// h_a = eta_aa h^a.
    pub fn gen_lower(&self, a: usize) -> Expr<S> {
        if self.sig.eta(a) < 0 {
            expr::neg(&self.gens[a])
        } else {
            self.gens[a].clone()
        }
    }

    /// Extended-basis expression h^A for a blade mask.
    pub fn basis_expr(&self, blade: Blade) -> &Expr<S> {
        &self.basis[blade.mask() as usize]
    }

    pub fn basis_exprs(&self) -> &[Expr<S>] {
        &self.basis
    }

    /// Sign s with h_A = s * h^A (same reversal/metric sign as for e^A).
    pub fn basis_inverse_sign(&self, blade: Blade) -> i8 {
        blade_inverse_sign(self.sig, blade)
    }

    /// Jets of the n generators at a point.
    pub fn gen_jets(&self, x: &[S]) -> Result<Vec<Jet2<S>>> {
        jet_eval_many(&self.gens, self.sig, self.base, x)
    }

    /// Jets of all 2^n extended-basis fields h^A at a point.
    pub fn extended_basis(&self, x: &[S]) -> Result<Vec<Jet2<S>>> {
        jet_eval_many(&self.basis, self.sig, self.base, x)
    }

    /// Coefficients of u in the frame basis: u = sum_B c_B h^B.
    pub fn expand_in_frame(&self, u: &Multivector<S>, x: &[S]) -> Result<Vec<S>> {
        if u.sig() != self.sig {
            return Err(Error::SignatureMismatch(
                u.sig().p() as u8,
                u.sig().q() as u8,
                self.sig.p() as u8,
                self.sig.q() as u8,
            ));
        }
        let basis = self.extended_basis(x)?;
        let dim = self.sig.dim();
        // Columns are the e-basis coefficients of h^B.
        let mut mat = vec![vec![S::zero(); dim]; dim];
        for (b, jet) in basis.iter().enumerate() {
            for (row, c) in jet.value().coeffs().iter().enumerate() {
                mat[row][b] = c.clone();
            }
        }
        linalg::solve(&mat, u.coeffs())
    }

    /// Relation and parity checks over sample points.
    pub fn validate(&self, points: &[Vec<S>]) -> Result<FrameReport> {
        let sig = self.sig;
        let n = self.n();
        let one = Multivector::one(sig);
        let mut report = FrameReport::default();
        let pseudo_blade = Blade::pseudoscalar(sig.n());
        let e_pseudo = Multivector::<S>::basis(sig, pseudo_blade)?;
        let mut pseudo_sign = 0i8;
        for x in points {
            let jets = self.gen_jets(x)?;
            let vals: Vec<&Multivector<S>> = jets.iter().map(|j| j.value()).collect();
            for a in 0..n {
                for b in a..n {
                    let anti = &(vals[a] * vals[b]) + &(vals[b] * vals[a]);
                    let target = if a == b {
                        one.scaled(&S::from_i64(2 * sig.eta(a) as i64))
                    } else {
                        Multivector::zero(sig)
                    };
                    report.max_anticommutation =
                        report.max_anticommutation.max((&anti - &target).max_abs());
                }
            }
            // Completeness of the extended basis: sum_A h^A h_A = 2^n e.
            let basis = self.extended_basis(x)?;
            let mut sum = Multivector::zero(sig);
            for (mask, jet) in basis.iter().enumerate() {
                let s = self.basis_inverse_sign(Blade::from_mask(mask as u32));
                let sq = jet.value() * jet.value();
                sum = if s > 0 { &sum + &sq } else { &sum - &sq };
            }
            let target = one.scaled(&S::from_i64(sig.dim() as i64));
            report.completeness_residual = report
                .completeness_residual
                .max((&sum - &target).max_abs());
            if sig.is_odd() {
                let pseudo = basis[pseudo_blade.mask() as usize].value().clone();
                let tr = pseudo.trace_scalar().abs_f64();
                if pseudo_sign == 0 {
                    pseudo_sign = if pseudo.coeff(pseudo_blade).to_f64() >= 0.0 {
                        1
                    } else {
                        -1
                    };
                }
                let target = if pseudo_sign > 0 {
                    e_pseudo.clone()
                } else {
                    -&e_pseudo
                };
                let dev = (&pseudo - &target).max_abs();
                let t = report.trace_residual.get_or_insert(0.0);
                *t = t.max(tr);
                let p = report.pseudoscalar_residual.get_or_insert(0.0);
                *p = p.max(dev);
            }
            if self.kind == FrameKind::Vector {
                // sum_mu h_mu h^mu = n e and h_mu h^nu h^mu = (2-n) h^nu.
                let mut sum = Multivector::zero(sig);
                for mu in 0..n {
                    let lower = vals[mu].scaled(&S::from_i64(sig.eta(mu) as i64));
                    sum = &sum + &(&lower * vals[mu]);
                }
                let target = one.scaled(&S::from_i64(n as i64));
                let sq = report.sum_squares_residual.get_or_insert(0.0);
                *sq = sq.max((&sum - &target).max_abs());
                for nu in 0..n {
                    let mut sand = Multivector::zero(sig);
                    for mu in 0..n {
                        let lower = vals[mu].scaled(&S::from_i64(sig.eta(mu) as i64));
                        sand = &sand + &(&(&lower * vals[nu]) * vals[mu]);
                    }
                    let target = vals[nu].scaled(&S::from_i64(2 - n as i64));
                    let sd = report.sandwich_residual.get_or_insert(0.0);
                    *sd = sd.max((&sand - &target).max_abs());
                }
            }
        }
        if sig.is_odd() {
            report.pseudoscalar_sign = Some(pseudo_sign);
        }
        Ok(report)
    }
}

fn build_extended_basis<S: Scalar>(sig: Signature, gens: &[Expr<S>]) -> Vec<Expr<S>> {
    let dim = sig.dim();
    let mut basis: Vec<Expr<S>> = Vec::with_capacity(dim);
    basis.push(konst(Multivector::one(sig)));
    for mask in 1..dim {
        let low = mask.trailing_zeros() as usize;
        let rest = mask & (mask - 1);
        if rest == 0 {
            basis.push(gens[low].clone());
        } else {
            basis.push(product(&gens[low], &basis[rest]));
        }
    }
    basis
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct FrameReport {
    pub max_anticommutation: f64,
    /// max |sum_A h^A h_A - 2^n e| over points.
    pub completeness_residual: f64,
    /// Odd n only: max |Tr(h^{1..n})|.
    pub trace_residual: Option<f64>,
    /// Odd n only: max deviation of h^{1..n} from its constant sign times
    /// e^{1..n}.
    pub pseudoscalar_residual: Option<f64>,
    pub pseudoscalar_sign: Option<i8>,
    /// Vector frames: residual of sum_mu h_mu h^mu = n e.
    pub sum_squares_residual: Option<f64>,
    /// Vector frames: residual of h_mu h^nu h^mu = (2-n) h^nu.
    pub sandwich_residual: Option<f64>,
}

impl FrameReport {
    pub fn max_residual(&self) -> f64 {
        [
            Some(self.max_anticommutation),
            Some(self.completeness_residual),
            self.trace_residual,
            self.pseudoscalar_residual,
            self.sum_squares_residual,
            self.sandwich_residual,
        ]
        .into_iter()
        .flatten()
        .fold(0.0, f64::max)
    }
}

/// Invertible scalar field used for conjugation, with its inverse kept as
/// an expression (either a generic `Inverse` node or a closed form).
#[derive(Clone)]
pub struct GaugeScalar<S: Scalar> {
    sig: Signature,
    base: BaseSpace,
    s: Expr<S>,
    s_inv: Expr<S>,
}

impl<S: Scalar> GaugeScalar<S> {
    pub fn new(sig: Signature, base: BaseSpace, s: Expr<S>) -> Self {
        let s_inv = inverse(&s);
        GaugeScalar { sig, base, s, s_inv }
    }

    /// For scalars whose inverse has a closed form.
    pub fn from_parts(sig: Signature, base: BaseSpace, s: Expr<S>, s_inv: Expr<S>) -> Self {
        GaugeScalar { sig, base, s, s_inv }
    }

    pub fn sig(&self) -> Signature {
        self.sig
    }

    pub fn base(&self) -> BaseSpace {
        self.base
    }

    pub fn expr(&self) -> &Expr<S> {
        &self.s
    }

    pub fn inv_expr(&self) -> &Expr<S> {
        &self.s_inv
    }

    /// The scalar for the inverse transformation.
    pub fn inverted(&self) -> GaugeScalar<S> {
        GaugeScalar {
            sig: self.sig,
            base: self.base,
            s: self.s_inv.clone(),
            s_inv: self.s.clone(),
        }
    }

    /// Scalar of the composite transformation: conjugating by the result
    /// equals conjugating by `first`, then by `second`.
    pub fn composed(first: &GaugeScalar<S>, second: &GaugeScalar<S>) -> Result<GaugeScalar<S>> {
        if first.sig != second.sig {
            return Err(Error::SignatureMismatch(
                first.sig.p() as u8,
                first.sig.q() as u8,
                second.sig.p() as u8,
                second.sig.q() as u8,
            ));
        }
        if first.base != second.base {
            return Err(Error::BaseMismatch(
                first.base.k() as u8,
                first.base.l() as u8,
                second.base.k() as u8,
                second.base.l() as u8,
            ));
        }
        Ok(GaugeScalar {
            sig: first.sig,
            base: first.base,
            s: product(&first.s, &second.s),
            s_inv: product(&second.s_inv, &first.s_inv),
        })
    }

    /// S^-1 u S.
    pub fn conjugate(&self, u: &Expr<S>) -> Expr<S> {
        product(&product(&self.s_inv, u), &self.s)
    }

    /// S^-1 dS along mu.
    pub fn log_derivative(&self, mu: usize) -> Expr<S> {
        product(&self.s_inv, &deriv(&self.s, mu))
    }

    /// Invertibility and center-freeness of S^-1 dS over sample points.
    pub fn validate(&self, points: &[Vec<S>]) -> Result<GaugeScalarReport> {
        let mut report = GaugeScalarReport::default();
        for x in points {
            let mut ev = JetEvaluator::new(self.sig, self.base, x);
            let s = ev.eval(&self.s)?;
            let s_inv = ev.eval(&self.s_inv)?; // errors if singular
            let inv_res = (&(s_inv.value() * s.value()) - &Multivector::one(self.sig)).max_abs();
            report.inverse_residual = report.inverse_residual.max(inv_res);
            for mu in 0..self.base.m() {
                let d = s_inv.value() * s.grad(mu)?;
                report.max_center_leak = report.max_center_leak.max(d.center_project().max_abs());
            }
        }
        Ok(report)
    }
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct GaugeScalarReport {
    /// max |S^-1 S - e| over points.
    pub inverse_residual: f64,
    /// max |center part of S^-1 dS| over points.
    pub max_center_leak: f64,
}

/// Pointwise-orthogonal matrix field Y(x) = D exp(eta * A(x)) with A
/// antisymmetric (entries are scalar field expressions) and D = diag(+-1).
#[derive(Clone)]
pub struct OrthoMatrixField<S: Scalar> {
    sig: Signature,
    base: BaseSpace,
    /// Strict upper triangle of A, row-major: (0,1), (0,2), ..., (n-2,n-1).
    upper: Vec<Expr<S>>,
    reflections: Vec<i8>,
}

impl<S: Scalar> OrthoMatrixField<S> {
    pub fn new(
        sig: Signature,
        base: BaseSpace,
        upper: Vec<Expr<S>>,
        reflections: Option<Vec<i8>>,
    ) -> Result<Self> {
        let n = sig.n() as usize;
        if upper.len() != upper_len(n) {
            return Err(Error::InvalidArgument(format!(
                "expected {} strict-upper entries for n = {}, got {}",
                upper_len(n),
                n,
                upper.len()
            )));
        }
        let reflections = reflections.unwrap_or_else(|| vec![1; n]);
        if reflections.len() != n || reflections.iter().any(|d| d.abs() != 1) {
            return Err(Error::InvalidArgument(
                "reflections must be n entries of +-1".into(),
            ));
        }
        Ok(OrthoMatrixField {
            sig,
            base,
            upper,
            reflections,
        })
    }

    pub fn sig(&self) -> Signature {
        self.sig
    }

    pub fn base(&self) -> BaseSpace {
        self.base
    }

    pub fn reflections(&self) -> &[i8] {
        &self.reflections
    }

    /// A(x): antisymmetric matrix of scalar values.
    pub fn a_at(&self, x: &[S]) -> Result<Matrix<S>> {
        let n = self.sig.n() as usize;
        let jets = jet_eval_many(&self.upper, self.sig, self.base, x)?;
        let mut a = vec![vec![S::zero(); n]; n];
        for i in 0..n {
            for j in (i + 1)..n {
                let mv = jets[upper_index(n, i, j)].value();
                if mv.coeffs().iter().skip(1).any(|c| !c.is_zero()) {
                    return Err(Error::NonScalarOperand);
                }
                let v = mv.trace_scalar();
                a[i][j] = v.clone();
                a[j][i] = -v;
            }
        }
        Ok(a)
    }

    /// Y(x) = D exp(eta A(x)).
    pub fn y_at(&self, x: &[S]) -> Result<Matrix<S>> {
        let a = self.a_at(x)?;
        let mut m = a;
        for (i, row) in m.iter_mut().enumerate() {
            if self.sig.eta(i) < 0 {
                for v in row.iter_mut() {
                    *v = -std::mem::replace(v, S::zero());
                }
            }
        }
        let mut y = linalg::mat_exp(&m, 1e-15, 300)?;
        for (i, row) in y.iter_mut().enumerate() {
            if self.reflections[i] < 0 {
                for v in row.iter_mut() {
                    *v = -std::mem::replace(v, S::zero());
                }
            }
        }
        Ok(y)
    }

    /// max |Y^T eta Y - eta| over points.
    pub fn orthogonality_residual(&self, points: &[Vec<S>]) -> Result<f64> {
        let n = self.sig.n() as usize;
        let mut worst: f64 = 0.0;
        for x in points {
            let y = self.y_at(x)?;
            let mut lhs = vec![vec![S::zero(); n]; n];
            for b in 0..n {
                for d in 0..n {
                    let mut acc = S::zero();
                    for a in 0..n {
                        let term = y[a][b].clone() * y[a][d].clone();
                        acc = if self.sig.eta(a) > 0 {
                            acc + term
                        } else {
                            acc - term
                        };
                    }
                    lhs[b][d] = acc;
                }
            }
            for b in 0..n {
                for d in 0..n {
                    let target = if b == d {
                        S::from_i64(self.sig.eta(b) as i64)
                    } else {
                        S::zero()
                    };
                    worst = worst.max((lhs[b][d].clone() - target).abs_f64());
                }
            }
        }
        Ok(worst)
    }

    /// The conjugation scalar realising exp(eta A) on grade 1:
    /// S = exp(-G) with G = -1/2 sum_{a<b} A_ab e^{ab}.
    pub fn rotor_scalar(&self) -> GaugeScalar<S> {
        let n = self.sig.n() as usize;
        let mut terms = Vec::new();
        for a in 0..n {
            for b in (a + 1)..n {
                let blade = Multivector::basis(self.sig, Blade::from_gens(&[a, b]).unwrap())
                    .expect("blade within signature");
                terms.push(product(
                    &scale(ratio::<S>(1, 2), &self.upper[upper_index(n, a, b)]),
                    &konst(blade),
                ));
            }
        }
        let exponent = if terms.is_empty() {
            konst(Multivector::zero(self.sig))
        } else {
            add_all(&terms)
        };
        let s = exp_series(&exponent);
        let s_inv = exp_series(&expr::neg(&exponent));
        GaugeScalar::from_parts(self.sig, self.base, s, s_inv)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::{apply, coord, monomial, ScalarFn};

    fn base(k: u8, l: u8) -> BaseSpace {
        BaseSpace::new(k, l).unwrap()
    }

    /// Rotation frame in Cl(2,0) by angle x^1: h^1 = cos x e1 + sin x e2.
    fn rotation_field() -> OrthoMatrixField<f64> {
        let sig = Signature::new(2, 0).unwrap();
        OrthoMatrixField::new(sig, base(2, 0), vec![coord(0)], None).unwrap()
    }

    #[test]
    fn rotation_frame_matches_trig_closed_form() {
        let field = rotation_field();
        let frame = Frame::from_orthogonal(&field, FrameKind::ScalarIndex).unwrap();
        let sig = frame.sig();
        let x = vec![0.7f64, -0.2];
        let jets = frame.gen_jets(&x).unwrap();
        let e1 = Multivector::<f64>::generator(sig, 0).unwrap();
        let e2 = Multivector::<f64>::generator(sig, 1).unwrap();
        let t = x[0];
        let h1 = &e1.scaled(&t.cos()) + &e2.scaled(&t.sin());
        let h2 = &e2.scaled(&t.cos()) - &e1.scaled(&t.sin());
        assert!(jets[0].value().approx_eq(&h1, 1e-13), "{}", jets[0].value());
        assert!(jets[1].value().approx_eq(&h2, 1e-13));
        // d h^1 / dx^1 = h^2 for this one-parameter rotation.
        assert!(jets[0].grad(0).unwrap().approx_eq(jets[1].value(), 1e-12));
    }

    #[test]
    fn rotor_route_matches_matrix_exponential_route() {
        // Generic 3-generator field with a reflection; h^a coefficients
        // must equal the rows of Y = D exp(eta A).
        let sig = Signature::new(1, 2).unwrap();
        let b = base(2, 0);
        let entries = vec![
            monomial(Multivector::scalar(sig, 0.4), &[1, 0]),
            apply(ScalarFn::Sin, &scale(0.3, &coord(1))),
            monomial(Multivector::scalar(sig, -0.2), &[1, 1]),
        ];
        let field = OrthoMatrixField::new(sig, b, entries, Some(vec![1, -1, 1])).unwrap();
        let frame = Frame::from_orthogonal(&field, FrameKind::ScalarIndex).unwrap();
        for x in [vec![0.3, -0.8], vec![-0.6, 0.5]] {
            let y = field.y_at(&x).unwrap();
            let jets = frame.gen_jets(&x).unwrap();
            for a in 0..3 {
                for bgen in 0..3 {
                    let coeff = jets[a]
                        .value()
                        .coeff(Blade::from_mask(1 << bgen))
                        .to_f64();
                    assert!(
                        (coeff - y[a][bgen]).abs() < 1e-12,
                        "a={a} b={bgen}: {} vs {}",
                        coeff,
                        y[a][bgen]
                    );
                }
            }
        }
        assert!(field
            .orthogonality_residual(&[vec![0.3, -0.8], vec![-0.6, 0.5]])
            .unwrap()
            < 1e-12);
    }

    #[test]
    fn constant_and_conjugated_frames_validate() {
        let sig = Signature::new(1, 2).unwrap();
        let b = base(2, 0);
        let frame = Frame::constant(sig, b, FrameKind::ScalarIndex).unwrap();
        let points = vec![vec![0.1, 0.4], vec![-0.9, 0.3]];
        let report = frame.validate(&points).unwrap();
        assert!(report.max_residual() < 1e-14, "{report:?}");
        assert_eq!(report.pseudoscalar_sign, Some(1));

        // Conjugate by S = exp(0.3 x0 e12 + 0.1 x1 e13).
        let e12 = Multivector::basis(sig, Blade::from_gens(&[0, 1]).unwrap()).unwrap();
        let e13 = Multivector::basis(sig, Blade::from_gens(&[0, 2]).unwrap()).unwrap();
        let p = add_all(&[
            monomial(e12.scaled(&0.3), &[1, 0]),
            monomial(e13.scaled(&0.1), &[0, 1]),
        ]);
        let s = GaugeScalar::new(sig, b, exp_series(&p));
        let conj = frame.conjugated(&s).unwrap();
        let report = conj.validate(&points).unwrap();
        assert!(report.max_residual() < 1e-12, "{report:?}");
        let sreport = s.validate(&points).unwrap();
        assert!(sreport.max_center_leak < 1e-12, "{sreport:?}");
        assert!(sreport.inverse_residual < 1e-12);
    }

    #[test]
    fn broken_frame_is_flagged_with_the_expected_residual() {
        // Scaling h^1 by 1.1 breaks h^1 h^1 = eta^{11} e by 0.21 * 2.
        let sig = Signature::new(1, 2).unwrap();
        let b = base(2, 0);
        let frame = Frame::constant(sig, b, FrameKind::ScalarIndex).unwrap();
        let mut gens = frame.gens().to_vec();
        gens[0] = scale(1.1f64, &gens[0]);
        let broken =
            Frame::from_gens(sig, b, FrameKind::ScalarIndex, FrameSource::Custom, gens).unwrap();
        let report = broken.validate(&[vec![0.0, 0.0]]).unwrap();
        assert!(
            (report.max_anticommutation - 0.42).abs() < 1e-12,
            "{report:?}"
        );
    }

    #[test]
    fn vector_frame_identities_hold_for_constant_frames() {
        let sig = Signature::new(1, 3).unwrap();
        let frame = Frame::constant(sig, base(1, 3), FrameKind::Vector).unwrap();
        let report = frame.validate(&[vec![0.0; 4]]).unwrap();
        assert_eq!(report.sum_squares_residual, Some(0.0));
        assert_eq!(report.sandwich_residual, Some(0.0));
        // Vector frames need a matching base.
        assert!(Frame::<f64>::constant(sig, base(2, 2), FrameKind::Vector).is_err());
    }

    #[test]
    fn expand_in_frame_roundtrips_random_elements() {
        use rand::rngs::StdRng;
        use rand::{Rng, SeedableRng};
        let sig = Signature::new(2, 0).unwrap();
        let field = rotation_field();
        let frame = Frame::from_orthogonal(&field, FrameKind::ScalarIndex).unwrap();
        let mut rng = StdRng::seed_from_u64(3);
        let x = vec![0.25, -0.75];
        let u = Multivector::from_coeffs(
            sig,
            (0..sig.dim()).map(|_| rng.gen_range(-1.0..1.0)).collect(),
        )
        .unwrap();
        let coeffs = frame.expand_in_frame(&u, &x).unwrap();
        // Reassemble sum c_B h^B and compare.
        let basis = frame.extended_basis(&x).unwrap();
        let mut back = Multivector::zero(sig);
        for (c, jet) in coeffs.iter().zip(&basis) {
            back = &back + &jet.value().scaled(c);
        }
        assert!(back.approx_eq(&u, 1e-12));
        // The scalar-index expansion of e.g. h^1 h^2 is the unit blade coeff.
        let h12 = basis[0b11].value().clone();
        let c = frame.expand_in_frame(&h12, &x).unwrap();
        for (mask, v) in c.iter().enumerate() {
            let expect = if mask == 0b11 { 1.0 } else { 0.0 };
            assert!((v - expect).abs() < 1e-12);
        }
    }

    #[test]
    fn odd_frame_pseudoscalar_tracks_reflection_sign() {
        let sig = Signature::new(3, 0).unwrap();
        let b = base(2, 0);
        let field = OrthoMatrixField::new(
            sig,
            b,
            vec![
                monomial(Multivector::scalar(sig, 0.5), &[1, 0]),
                konst(Multivector::zero(sig)),
                monomial(Multivector::scalar(sig, 0.25), &[0, 1]),
            ],
            Some(vec![-1, 1, 1]),
        )
        .unwrap();
        let frame = Frame::from_orthogonal(&field, FrameKind::ScalarIndex).unwrap();
        let report = frame.validate(&[vec![0.2, 0.3], vec![-0.4, 0.8]]).unwrap();
        assert!(report.max_anticommutation < 1e-12);
        assert!(report.trace_residual.unwrap() < 1e-12);
        assert!(report.pseudoscalar_residual.unwrap() < 1e-12);
        // det D = -1 flips the pseudoscalar.
        assert_eq!(report.pseudoscalar_sign, Some(-1));
    }
}
