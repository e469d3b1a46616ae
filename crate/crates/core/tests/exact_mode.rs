//! Exact-rational arithmetic as an oracle for the floating path: the same
//! seed drives both scalar types through identical fixtures, so their
//! outputs must agree to rounding error, and the exact side must satisfy
//! every identity with literally zero residual.

use cliffym::connection::connection_averaged_at;
use cliffym::expr::value_at;
use cliffym::fixtures::{
    make_rng, random_covector_coeffs, random_rational_gauge_scalar, sample_points,
};
use cliffym::gauge::CovConstCovector;
use cliffym::{
    BaseSpace, Connection, Error, Frame, FrameKind, FrameRecipe, Multivector, Rational, Scalar,
    Signature, YangMillsField,
};

fn rational_frame(
    sig: Signature,
    base: BaseSpace,
    seed: u64,
) -> (Frame<Rational>, Frame<f64>) {
    let exact = {
        let mut rng = make_rng(seed);
        let scalar = random_rational_gauge_scalar::<Rational>(sig, base, 2, 0.4, &mut rng).unwrap();
        Frame::constant(sig, base, FrameKind::ScalarIndex)
            .unwrap()
            .conjugated(&scalar)
            .unwrap()
    };
    let float = {
        let mut rng = make_rng(seed);
        let scalar = random_rational_gauge_scalar::<f64>(sig, base, 2, 0.4, &mut rng).unwrap();
        Frame::constant(sig, base, FrameKind::ScalarIndex)
            .unwrap()
            .conjugated(&scalar)
            .unwrap()
    };
    (exact, float)
}

fn to_float(m: &Multivector<Rational>, sig: Signature) -> Multivector<f64> {
    Multivector::from_coeffs(sig, m.coeffs().iter().map(Scalar::to_f64).collect()).unwrap()
}

#[test]
fn both_scalar_types_compute_the_same_connection() {
    let sig = Signature::new(1, 2).unwrap();
    let base = BaseSpace::new(2, 0).unwrap();
    let (exact_frame, float_frame) = rational_frame(sig, base, 42);

    // Identical dyadic sample points for both modes.
    let exact_points = sample_points::<Rational>(base, 3, &mut make_rng(43));
    let float_points = sample_points::<f64>(base, 3, &mut make_rng(43));
    for (xe, xf) in exact_points.iter().zip(&float_points) {
        for (ce, cf) in xe.iter().zip(xf) {
            assert_eq!(Scalar::to_f64(ce), *cf, "sample grids diverged");
        }
        let exact_c = connection_averaged_at(&exact_frame, xe).unwrap();
        let float_c = connection_averaged_at(&float_frame, xf).unwrap();
        for (e, f) in exact_c.iter().zip(&float_c) {
            assert!(
                to_float(e, sig).approx_eq(f, 1e-12),
                "modes disagree: exact {e} vs float {f}"
            );
        }
    }
}

#[test]
fn exact_pipeline_has_literally_zero_residuals() {
    let sig = Signature::new(1, 1).unwrap();
    let base = BaseSpace::new(1, 1).unwrap();
    let (exact_frame, float_frame) = rational_frame(sig, base, 47);
    let exact_points = sample_points::<Rational>(base, 2, &mut make_rng(48));
    let float_points = sample_points::<f64>(base, 2, &mut make_rng(48));

    let frame_report = exact_frame.validate(&exact_points).unwrap();
    assert_eq!(frame_report.max_residual(), 0.0, "{frame_report:?}");

    let exact_conn = Connection::new(exact_frame);
    let conn_report = exact_conn.verify(&exact_points).unwrap();
    assert_eq!(conn_report.max_residual(), 0.0, "{conn_report:?}");

    let coeffs = random_covector_coeffs::<Rational>(sig, base, 0.5, &mut make_rng(49));
    let k = CovConstCovector::from_frame_coeffs(exact_conn.frame(), coeffs).unwrap();
    let ym = YangMillsField::covconst(&exact_conn, &k).unwrap();
    let ym_report = ym.verify(&exact_points).unwrap();
    assert_eq!(ym_report.max_residual(), 0.0, "{ym_report:?}");

    // The float twin of the same scenario is tiny but not exactly zero,
    // which is precisely the rounding the exact mode eliminates.
    let float_conn = Connection::new(float_frame);
    let float_report = float_conn.verify(&float_points).unwrap();
    assert!(float_report.max_residual() < 1e-12, "{float_report:?}");
}

#[test]
fn exact_mode_rejects_transcendental_recipes() {
    use cliffym::fixtures::build_frame;
    let sig = Signature::new(2, 0).unwrap();
    let base = BaseSpace::new(2, 0).unwrap();
    for recipe in [
        FrameRecipe::Gauge {
            degree: 2,
            magnitude: 0.4,
        },
        FrameRecipe::Orthogonal {
            degree: 1,
            magnitude: 0.4,
        },
    ] {
        let result = build_frame::<Rational>(
            recipe,
            sig,
            base,
            FrameKind::ScalarIndex,
            &mut make_rng(50),
        );
        assert!(
            matches!(result, Err(Error::ExactModeUnsupported(_))),
            "{recipe:?} should be float-only"
        );
    }
    // The rational-rotor recipe is the exact-mode counterpart and works.
    let (frame, scalar) = build_frame::<Rational>(
        FrameRecipe::RationalGauge {
            rotors: 2,
            magnitude: 0.4,
        },
        sig,
        base,
        FrameKind::ScalarIndex,
        &mut make_rng(50),
    )
    .unwrap();
    assert!(scalar.is_some());
    let report = frame
        .validate(&sample_points::<Rational>(base, 2, &mut make_rng(51)))
        .unwrap();
    assert_eq!(report.max_residual(), 0.0);
}

#[test]
fn float_and_exact_covector_fixtures_share_coefficients() {
    let sig = Signature::new(2, 1).unwrap();
    let base = BaseSpace::new(2, 1).unwrap();
    let exact = random_covector_coeffs::<Rational>(sig, base, 0.7, &mut make_rng(52));
    let float = random_covector_coeffs::<f64>(sig, base, 0.7, &mut make_rng(52));
    for (re, rf) in exact.iter().zip(&float) {
        for (ce, cf) in re.iter().zip(rf) {
            assert_eq!(Scalar::to_f64(ce), *cf);
        }
    }
}

#[test]
fn exact_gauge_transforms_preserve_zero_residuals() {
    let sig = Signature::new(2, 0).unwrap();
    let base = BaseSpace::new(2, 0).unwrap();
    let mut rng = make_rng(53);
    let scalar = random_rational_gauge_scalar::<Rational>(sig, base, 1, 0.3, &mut rng).unwrap();
    let ym = YangMillsField::<Rational>::zero(sig, base).gauge_transformed(&scalar);
    let points = sample_points::<Rational>(base, 2, &mut rng);
    let report = ym.verify(&points).unwrap();
    assert_eq!(report.max_residual(), 0.0, "{report:?}");
    // The vacuum potential is genuinely nonzero.
    let b0 = value_at(&ym.potential()[0], sig, base, &points[0]).unwrap();
    assert!(b0.max_abs() > 0.0);
}
