//! Seeded random fixtures shared by the tests, the CLI and the benches.
//!
//! All draws land on a dyadic grid (multiples of 1/64), so the same seed
//! produces bit-identical fields in floating-point and exact-rational
//! runs, and rational coefficients stay small.

use rand::Rng;
use rand::SeedableRng;
/// The deterministic RNG used by every fixture constructor, re-exported so
/// downstream crates can name it without depending on `rand_chacha`.
pub use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::algebra::{Blade, Signature};
use crate::error::{Error, Result};
use crate::expr::{
    add_all, apply, coord, exp_series, inverse, konst, monomial, product, scale, sub, Expr,
    ScalarFn,
};
use crate::frames::{Frame, FrameKind, GaugeScalar, OrthoMatrixField};
use crate::jet::BaseSpace;
use crate::multivector::Multivector;
use crate::scalar::Scalar;

pub fn make_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Independent deterministic stream for the same seed, so concurrent or
/// reordered consumers (one per campaign case, say) never share state.
pub fn make_stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = make_rng(seed);
    rng.set_stream(stream);
    rng
}

/// One grid value in [-1, 1] (a multiple of 1/64, exact in every mode).
fn grid<S: Scalar>(rng: &mut ChaCha8Rng) -> S {
    S::from_f64(rng.gen_range(-64i32..=64) as f64 / 64.0)
}

/// Nonzero grid value, for coefficients that should not vanish.
fn grid_nonzero<S: Scalar>(rng: &mut ChaCha8Rng) -> S {
    loop {
        let k = rng.gen_range(-64i32..=64);
        if k != 0 {
            return S::from_f64(k as f64 / 64.0);
        }
    }
}

/// Sample points from the grid in [-1, 1]^m.
pub fn sample_points<S: Scalar>(
    base: BaseSpace,
    count: usize,
    rng: &mut ChaCha8Rng,
) -> Vec<Vec<S>> {
    (0..count)
        .map(|_| (0..base.m()).map(|_| grid::<S>(rng)).collect())
        .collect()
}

pub fn random_multivector<S: Scalar>(
    sig: Signature,
    magnitude: f64,
    rng: &mut ChaCha8Rng,
) -> Multivector<S> {
    let mag = S::from_f64(magnitude);
    let coeffs = (0..sig.dim())
        .map(|_| grid::<S>(rng) * mag.clone())
        .collect();
    Multivector::from_coeffs(sig, coeffs).expect("matching length")
}

fn random_powers(m: usize, degree: u32, rng: &mut ChaCha8Rng) -> Vec<u32> {
    let mut budget = rng.gen_range(0..=degree);
    let mut powers = vec![0u32; m];
    for p in powers.iter_mut() {
        let take = rng.gen_range(0..=budget);
        *p = take;
        budget -= take;
    }
    powers
}

/// Random scalar-valued polynomial field of bounded total degree.
pub fn random_poly_scalar<S: Scalar>(
    sig: Signature,
    base: BaseSpace,
    degree: u32,
    magnitude: f64,
    rng: &mut ChaCha8Rng,
) -> Expr<S> {
    let mag = S::from_f64(magnitude);
    let terms: Vec<Expr<S>> = (0..=base.m())
        .map(|_| {
            let c = grid_nonzero::<S>(rng) * mag.clone();
            monomial(
                Multivector::scalar(sig, c),
                &random_powers(base.m(), degree, rng),
            )
        })
        .collect();
    add_all(&terms)
}

/// Random multivector-valued polynomial field, optionally restricted to a
/// set of grades.
pub fn random_poly_field<S: Scalar>(
    sig: Signature,
    base: BaseSpace,
    degree: u32,
    magnitude: f64,
    grades: Option<&[u32]>,
    rng: &mut ChaCha8Rng,
) -> Expr<S> {
    let mag = S::from_f64(magnitude);
    let mut terms = Vec::new();
    for mask in 0..sig.dim() {
        let blade = Blade::from_mask(mask as u32);
        if let Some(gs) = grades {
            if !gs.contains(&blade.grade()) {
                continue;
            }
        }
        let c = grid::<S>(rng) * mag.clone();
        if c.is_zero() {
            continue;
        }
        let coeff = Multivector::basis(sig, blade)
            .expect("blade within signature")
            .scaled(&c);
        terms.push(monomial(coeff, &random_powers(base.m(), degree, rng)));
    }
    if terms.is_empty() {
        konst(Multivector::zero(sig))
    } else {
        add_all(&terms)
    }
}

/// Gauge scalar S = exp(P) with P a polynomial field valued in grades 1-2.
/// Uses the exponential series, so it is float-only.
pub fn random_gauge_scalar<S: Scalar>(
    sig: Signature,
    base: BaseSpace,
    degree: u32,
    magnitude: f64,
    rng: &mut ChaCha8Rng,
) -> Result<GaugeScalar<S>> {
    if S::EXACT {
        return Err(Error::ExactModeUnsupported(
            "exponential gauge scalars (use the rational-rotor recipe)",
        ));
    }
    let p = random_poly_field(sig, base, degree, magnitude, Some(&[1, 2]), rng);
    let s = exp_series(&p);
    let s_inv = exp_series(&crate::expr::neg(&p));
    Ok(GaugeScalar::from_parts(sig, base, s, s_inv))
}

/// Orthogonal matrix field with random polynomial angle entries (float
/// mode also mixes in a sine), and a random choice of reflection signs.
pub fn random_orthogonal_field<S: Scalar>(
    sig: Signature,
    base: BaseSpace,
    degree: u32,
    magnitude: f64,
    rng: &mut ChaCha8Rng,
) -> Result<OrthoMatrixField<S>> {
    if S::EXACT {
        return Err(Error::ExactModeUnsupported(
            "orthogonal frame recipe (matrix exponential)",
        ));
    }
    let n = sig.n() as usize;
    let mut upper = Vec::with_capacity(n * (n - 1) / 2);
    for _ in 0..n * (n - 1) / 2 {
        let mut entry = random_poly_scalar(sig, base, degree, magnitude, rng);
        if rng.gen_bool(0.3) {
            let freq = grid_nonzero::<S>(rng);
            let mu = rng.gen_range(0..base.m());
            let trig = scale(
                S::from_f64(magnitude),
                &apply(ScalarFn::Sin, &scale(freq, &coord(mu))),
            );
            entry = add_all(&[entry, trig]);
        }
        upper.push(entry);
    }
    let reflections = (0..n)
        .map(|_| if rng.gen_bool(0.25) { -1 } else { 1 })
        .collect();
    OrthoMatrixField::new(sig, base, upper, Some(reflections))
}

/// One rational rotor: S = ((1 -+ P^2) e + 2 P u) / (1 +- P^2) for a
/// grade-2 blade u with u^2 = -+e and P a linear polynomial. Both S and
/// S^-1 are closed forms, exact over the rationals.
fn rational_rotor<S: Scalar>(
    sig: Signature,
    base: BaseSpace,
    magnitude: f64,
    rng: &mut ChaCha8Rng,
) -> GaugeScalar<S> {
    let n = sig.n() as usize;
    let a = rng.gen_range(0..n);
    let b = loop {
        let b = rng.gen_range(0..n);
        if b != a {
            break b;
        }
    };
    let blade = Blade::from_gens(&[a.min(b), a.max(b)]).expect("distinct generators");
    let u = Multivector::<S>::basis(sig, blade).expect("blade within signature");
    let u_sq_positive = (&u * &u).trace_scalar().to_f64() > 0.0;

    // P linear with |c_0| + sum |c_mu| <= min(magnitude, 0.45) so that
    // |P| < 1 on [-1,1]^m (needed when u^2 = +e).
    let bound = magnitude.min(0.45);
    let m = base.m();
    let mut coeffs: Vec<S> = (0..=m).map(|_| grid::<S>(rng)).collect();
    let total: f64 = coeffs.iter().map(|c| c.abs_f64()).sum();
    if total > bound {
        let shrink = S::from_f64(64.0 * bound / total).to_f64(); // keep dyadic-ish
        let shrink = S::from_f64((shrink.floor() / 64.0).max(1.0 / 64.0));
        for c in coeffs.iter_mut() {
            *c = c.clone() * shrink.clone();
        }
    }
    let mut terms = vec![konst(Multivector::scalar(sig, coeffs[0].clone()))];
    for (mu, c) in coeffs.iter().enumerate().skip(1) {
        terms.push(scale(c.clone(), &coord(mu - 1)));
    }
    let p = add_all(&terms);

    let one = konst(Multivector::one(sig));
    let p_sq = product(&p, &p);
    let two_pu = scale(S::from_i64(2), &product(&p, &konst(u)));
    let (num, num_bar, den) = if u_sq_positive {
        // u^2 = +e: S = ((1 + P^2) e + 2 P u) / (1 - P^2), |P| < 1.
        (
            add_all(&[add_all(&[one.clone(), p_sq.clone()]), two_pu.clone()]),
            sub(&add_all(&[one.clone(), p_sq.clone()]), &two_pu),
            sub(&one, &p_sq),
        )
    } else {
        // u^2 = -e: S = ((1 - P^2) e + 2 P u) / (1 + P^2).
        (
            add_all(&[sub(&one, &p_sq), two_pu.clone()]),
            sub(&sub(&one, &p_sq), &two_pu),
            add_all(&[one, p_sq]),
        )
    };
    let den_inv = inverse(&den);
    let s = product(&num, &den_inv);
    let s_inv = product(&num_bar, &den_inv);
    GaugeScalar::from_parts(sig, base, s, s_inv)
}

/// Product of closed-form rotors; valid in both float and exact mode.
pub fn random_rational_gauge_scalar<S: Scalar>(
    sig: Signature,
    base: BaseSpace,
    rotors: u32,
    magnitude: f64,
    rng: &mut ChaCha8Rng,
) -> Result<GaugeScalar<S>> {
    if sig.n() < 2 {
        return Err(Error::InvalidArgument(
            "rational rotors need at least two generators".into(),
        ));
    }
    let rotors = rotors.max(1);
    let mut out = rational_rotor(sig, base, magnitude, rng);
    for _ in 1..rotors {
        let next = rational_rotor(sig, base, magnitude, rng);
        out = GaugeScalar::composed(&out, &next)?;
    }
    Ok(out)
}

/// Frame-basis coefficients for a covariantly constant covector: m rows
/// of 2^n constants with the center slots (scalar and, for odd n, the
/// pseudoscalar) zeroed.
pub fn random_covector_coeffs<S: Scalar>(
    sig: Signature,
    base: BaseSpace,
    magnitude: f64,
    rng: &mut ChaCha8Rng,
) -> Vec<Vec<S>> {
    let mag = S::from_f64(magnitude);
    let pseudo = sig.dim() - 1;
    (0..base.m())
        .map(|_| {
            (0..sig.dim())
                .map(|mask| {
                    if mask == 0 || (sig.is_odd() && mask == pseudo) {
                        S::zero()
                    } else {
                        grid::<S>(rng) * mag.clone()
                    }
                })
                .collect()
        })
        .collect()
}

/// How to build a frame fixture.
#[derive(Copy, Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FrameRecipe {
    /// h^a = e^a.
    Constant,
    /// Rows of Y = D exp(eta A) with random antisymmetric A(x).
    Orthogonal { degree: u32, magnitude: f64 },
    /// S^-1 e^a S with S = exp(grade-1/2 polynomial).
    Gauge { degree: u32, magnitude: f64 },
    /// S^-1 e^a S with S a product of closed-form rotors (exact-friendly).
    RationalGauge { rotors: u32, magnitude: f64 },
}

impl Default for FrameRecipe {
    fn default() -> Self {
        FrameRecipe::Gauge {
            degree: 2,
            magnitude: 0.4,
        }
    }
}

/// Build a frame from a recipe. Returns the gauge scalar when the recipe
/// is a conjugation, so callers can validate or invert it.
pub fn build_frame<S: Scalar>(
    recipe: FrameRecipe,
    sig: Signature,
    base: BaseSpace,
    kind: FrameKind,
    rng: &mut ChaCha8Rng,
) -> Result<(Frame<S>, Option<GaugeScalar<S>>)> {
    match recipe {
        FrameRecipe::Constant => Ok((Frame::constant(sig, base, kind)?, None)),
        FrameRecipe::Orthogonal { degree, magnitude } => {
            let field = random_orthogonal_field(sig, base, degree, magnitude, rng)?;
            Ok((Frame::from_orthogonal(&field, kind)?, None))
        }
        FrameRecipe::Gauge { degree, magnitude } => {
            let s = random_gauge_scalar(sig, base, degree, magnitude, rng)?;
            let frame = Frame::constant(sig, base, kind)?.conjugated(&s)?;
            Ok((frame, Some(s)))
        }
        FrameRecipe::RationalGauge { rotors, magnitude } => {
            let s = random_rational_gauge_scalar(sig, base, rotors, magnitude, rng)?;
            let frame = Frame::constant(sig, base, kind)?.conjugated(&s)?;
            Ok((frame, Some(s)))
        }
    }
}
