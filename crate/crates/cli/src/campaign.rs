//! Campaign execution: fixture construction, the verification stages,
//! and deterministic report assembly.
//!
//! Determinism contract: everything in the structured report is a pure
//! function of (command, config). Per-case RNGs are independent streams
//! of the campaign seed, so a stage produces the same numbers whether it
//! runs alone or inside `all`, and cases never leak entropy into each
//! other. Timings exist only in the human summary, never in the report.

use anyhow::{bail, Context, Result};
use serde::Serialize;

use cliffym::fixtures::{
    build_frame, make_stream_rng, random_covector_coeffs, random_gauge_scalar,
    random_rational_gauge_scalar, sample_points, ChaCha8Rng,
};
use cliffym::{
    Connection, CovConstCovector, Error, Frame, FrameFixture, FrameKind, GaugeScalar,
    JetEvaluator, Rational, Scalar, YangMillsField,
};

use crate::config::{CampaignConfig, FrameCase};

pub const STAGE_VALIDATE: &str = "validate_frame";
pub const STAGE_CONNECTION: &str = "connection";
pub const STAGE_YANGMILLS: &str = "yangmills";

pub fn stages_for(command: &str) -> Vec<&'static str> {
    match command {
        "validate-frame" => vec![STAGE_VALIDATE],
        "connection" => vec![STAGE_CONNECTION],
        "yangmills" => vec![STAGE_YANGMILLS],
        _ => vec![STAGE_VALIDATE, STAGE_CONNECTION, STAGE_YANGMILLS],
    }
}

fn stage_slot(stage: &str) -> u64 {
    match stage {
        STAGE_VALIDATE => 0,
        STAGE_CONNECTION => 1,
        _ => 2,
    }
}

#[derive(Serialize)]
pub struct Report {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: String,
    pub scalar: &'static str,
    pub config: CampaignConfig,
    pub stages: Vec<StageReport>,
    pub pass: bool,
}

#[derive(Serialize)]
pub struct StageReport {
    pub stage: String,
    pub cases: Vec<CaseReport>,
    pub pass: bool,
}

#[derive(Serialize)]
pub struct CaseReport {
    pub label: String,
    pub signature: (u8, u8),
    pub base: (u8, u8),
    pub kind: FrameKind,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sigma: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub skipped: Option<String>,
    pub checks: Vec<CheckReport>,
    pub pass: bool,
}

#[derive(Serialize)]
pub struct CheckReport {
    pub name: String,
    pub tolerance: f64,
    pub max_residual: f64,
    pub mean_residual: f64,
    /// Coordinates of the sample point with the largest residual.
    pub worst_point: Vec<f64>,
    pub pass: bool,
}

/// One per-point residual for the optional CSV dump.
pub struct CsvRow {
    pub stage: &'static str,
    pub case: String,
    pub check: &'static str,
    pub point: usize,
    pub coords: Vec<f64>,
    pub residual: f64,
}

impl CsvRow {
    pub const HEADER: &'static str = "stage,case,check,point,coords,residual";

    pub fn to_line(&self) -> String {
        let coords = self
            .coords
            .iter()
            .map(|c| c.to_string())
            .collect::<Vec<_>>()
            .join(" ");
        format!(
            "{},{},{},{},{},{}",
            self.stage, self.case, self.check, self.point, coords, self.residual
        )
    }
}

pub fn run(command: &str, config: &CampaignConfig) -> Result<(Report, Vec<CsvRow>)> {
    config.validate()?;
    if config.exact {
        run_typed::<Rational>(command, config)
    } else {
        run_typed::<f64>(command, config)
    }
}

fn run_typed<S: Scalar>(command: &str, config: &CampaignConfig) -> Result<(Report, Vec<CsvRow>)> {
    let mut stages = Vec::new();
    let mut csv = Vec::new();
    for stage in stages_for(command) {
        stages.push(run_stage::<S>(stage, config, &mut csv)?);
    }
    let pass = stages.iter().all(|s| s.pass);
    Ok((
        Report {
            tool: "cliffym",
            version: env!("CARGO_PKG_VERSION"),
            command: command.to_string(),
            scalar: if S::EXACT { "rational" } else { "f64" },
            config: config.clone(),
            stages,
            pass,
        },
        csv,
    ))
}

enum BuiltCase<S: Scalar> {
    Built {
        label: String,
        frame: Frame<S>,
        scalar: Option<GaugeScalar<S>>,
    },
    Skipped {
        label: String,
        signature: (u8, u8),
        base: (u8, u8),
        kind: FrameKind,
        reason: String,
    },
}

fn build_case<S: Scalar>(
    case: &FrameCase,
    config: &CampaignConfig,
    rng: &mut ChaCha8Rng,
) -> Result<BuiltCase<S>> {
    let label = case.label();
    if let FrameCase::File { path } = case {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading frame fixture {}", path.display()))?;
        let fixture: FrameFixture = serde_json::from_str(&text)
            .with_context(|| format!("parsing frame fixture {}", path.display()))?;
        return Ok(match fixture.build::<S>(rng) {
            Ok((frame, scalar)) => BuiltCase::Built {
                label,
                frame,
                scalar,
            },
            Err(Error::ExactModeUnsupported(what)) => BuiltCase::Skipped {
                label,
                signature: fixture.signature,
                base: fixture.base,
                kind: fixture.kind,
                reason: format!("exact mode: {what}"),
            },
            Err(e) => return Err(e).context(format!("building fixture {}", path.display())),
        });
    }
    let recipe = case.recipe().expect("non-file cases always carry a recipe");
    let sig = config.signature_checked()?;
    let base = config.base_checked()?;
    let kind = config.frame_kind();
    Ok(match build_frame::<S>(recipe, sig, base, kind, rng) {
        Ok((frame, scalar)) => BuiltCase::Built {
            label,
            frame,
            scalar,
        },
        Err(Error::ExactModeUnsupported(what)) => BuiltCase::Skipped {
            label,
            signature: config.signature,
            base: config.base,
            kind,
            reason: format!("exact mode: {what}"),
        },
        Err(e) => return Err(e).context(format!("building frame case `{label}`")),
    })
}

fn run_stage<S: Scalar>(
    stage: &'static str,
    config: &CampaignConfig,
    csv: &mut Vec<CsvRow>,
) -> Result<StageReport> {
    let mut cases = Vec::new();
    for (case_idx, fc) in config.frames.iter().enumerate() {
        let mut rng = make_stream_rng(config.seed, stage_slot(stage) * 1000 + case_idx as u64);
        match build_case::<S>(fc, config, &mut rng)? {
            BuiltCase::Skipped {
                label,
                signature,
                base,
                kind,
                reason,
            } => cases.push(CaseReport {
                label,
                signature,
                base,
                kind,
                sigma: None,
                epsilon: None,
                skipped: Some(reason),
                checks: Vec::new(),
                pass: true,
            }),
            BuiltCase::Built {
                label,
                frame,
                scalar,
            } => {
                let points = sample_points::<S>(frame.base(), config.points, &mut rng);
                match stage {
                    STAGE_VALIDATE => {
                        cases.push(case_validate(&label, &frame, scalar.as_ref(), &points, config, csv)?)
                    }
                    STAGE_CONNECTION => {
                        cases.push(case_connection(&label, frame, &points, config, csv)?)
                    }
                    _ => cases.extend(cases_yangmills(
                        &label, frame, &points, config, &mut rng, csv,
                    )?),
                }
            }
        }
    }
    let pass = cases.iter().all(|c| c.pass);
    Ok(StageReport {
        stage: stage.to_string(),
        cases,
        pass,
    })
}

/// Per-case accumulator: named checks gathering one value per point.
struct CaseAccum {
    stage: &'static str,
    label: String,
    coords: Vec<Vec<f64>>,
    checks: Vec<(&'static str, f64, Vec<f64>)>,
}

impl CaseAccum {
    fn new<S: Scalar>(stage: &'static str, label: &str, points: &[Vec<S>]) -> Self {
        CaseAccum {
            stage,
            label: label.to_string(),
            coords: points
                .iter()
                .map(|x| x.iter().map(Scalar::to_f64).collect())
                .collect(),
            checks: Vec::new(),
        }
    }

    fn put(&mut self, name: &'static str, tolerance: f64, value: f64) {
        if let Some(slot) = self.checks.iter_mut().find(|(n, _, _)| *n == name) {
            slot.2.push(value);
        } else {
            self.checks.push((name, tolerance, vec![value]));
        }
    }

    fn finish(
        self,
        signature: (u8, u8),
        base: (u8, u8),
        kind: FrameKind,
        sigma: Option<f64>,
        epsilon: Option<f64>,
        csv: &mut Vec<CsvRow>,
    ) -> CaseReport {
        let mut checks = Vec::new();
        for (name, tolerance, values) in self.checks {
            let mut max = 0.0f64;
            let mut worst = 0usize;
            let mut sum = 0.0f64;
            for (i, &v) in values.iter().enumerate() {
                sum += v;
                if v > max {
                    max = v;
                    worst = i;
                }
                csv.push(CsvRow {
                    stage: self.stage,
                    case: self.label.clone(),
                    check: name,
                    point: i,
                    coords: self.coords[i].clone(),
                    residual: v,
                });
            }
            checks.push(CheckReport {
                name: name.to_string(),
                tolerance,
                max_residual: max,
                mean_residual: sum / values.len() as f64,
                worst_point: self.coords[worst].clone(),
                pass: max <= tolerance,
            });
        }
        let pass = checks.iter().all(|c| c.pass);
        CaseReport {
            label: self.label,
            signature,
            base,
            kind,
            sigma,
            epsilon,
            skipped: None,
            checks,
            pass,
        }
    }
}

fn sig_pair<S: Scalar>(frame: &Frame<S>) -> ((u8, u8), (u8, u8)) {
    let sig = frame.sig();
    let base = frame.base();
    (
        (sig.p() as u8, sig.q() as u8),
        (base.k() as u8, base.l() as u8),
    )
}

fn case_validate<S: Scalar>(
    label: &str,
    frame: &Frame<S>,
    scalar: Option<&GaugeScalar<S>>,
    points: &[Vec<S>],
    config: &CampaignConfig,
    csv: &mut Vec<CsvRow>,
) -> Result<CaseReport> {
    let t = &config.tolerances;
    let mut acc = CaseAccum::new(STAGE_VALIDATE, label, points);
    for x in points {
        let one = std::slice::from_ref(x);
        let r = frame.validate(one)?;
        acc.put("anticommutation", t.frame, r.max_anticommutation);
        acc.put("completeness", t.frame, r.completeness_residual);
        if let Some(v) = r.trace_residual {
            acc.put("pseudoscalar_trace", t.frame, v);
        }
        if let Some(v) = r.pseudoscalar_residual {
            acc.put("pseudoscalar_constancy", t.frame, v);
        }
        if let Some(v) = r.sum_squares_residual {
            acc.put("sum_of_squares", t.frame, v);
        }
        if let Some(v) = r.sandwich_residual {
            acc.put("sandwich_identity", t.frame, v);
        }
        if let Some(g) = scalar {
            let gr = g.validate(one)?;
            acc.put("scalar_invertibility", t.frame, gr.inverse_residual);
            acc.put("scalar_log_derivative_center", t.frame, gr.max_center_leak);
        }
    }
    let (signature, base) = sig_pair(frame);
    Ok(acc.finish(signature, base, frame.kind(), None, None, csv))
}

fn case_connection<S: Scalar>(
    label: &str,
    frame: Frame<S>,
    points: &[Vec<S>],
    config: &CampaignConfig,
    csv: &mut Vec<CsvRow>,
) -> Result<CaseReport> {
    let t = &config.tolerances;
    let (signature, base) = sig_pair(&frame);
    let kind = frame.kind();
    let conn = Connection::new(frame);
    let mut acc = CaseAccum::new(STAGE_CONNECTION, label, points);
    for x in points {
        let r = conn.verify(std::slice::from_ref(x))?;
        acc.put("defining_equation", t.defining, r.defining_residual);
        acc.put("center_leak", t.center, r.center_leak);
        acc.put("zero_curvature", t.curvature, r.curvature_residual);
        acc.put("formula_agreement", t.formula_agreement, r.formula_agreement);
        if let Some(v) = r.reduced_agreement {
            acc.put("reduced_agreement", t.reduced_agreement, v);
        }
        if let Some(v) = r.grade1_agreement {
            acc.put("grade1_agreement", t.formula_agreement, v);
        }
        if let Some(v) = r.omega_agreement {
            acc.put("omega_agreement", t.formula_agreement, v);
        }
    }
    Ok(acc.finish(signature, base, kind, None, None, csv))
}

fn invariance_scalar<S: Scalar>(
    frame: &Frame<S>,
    rng: &mut ChaCha8Rng,
) -> Result<Option<GaugeScalar<S>>> {
    let sig = frame.sig();
    let base = frame.base();
    if S::EXACT {
        if sig.n() < 2 {
            return Ok(None);
        }
        Ok(Some(random_rational_gauge_scalar::<S>(
            sig, base, 2, 0.3, rng,
        )?))
    } else {
        Ok(Some(random_gauge_scalar::<S>(sig, base, 2, 0.3, rng)?))
    }
}

#[allow(clippy::too_many_arguments)]
fn ym_case<S: Scalar>(
    label: String,
    conn: &Connection<S>,
    k: Option<&CovConstCovector<S>>,
    ym: &YangMillsField<S>,
    sigma_eps: Option<(f64, f64)>,
    points: &[Vec<S>],
    config: &CampaignConfig,
    rng: &mut ChaCha8Rng,
    csv: &mut Vec<CsvRow>,
) -> Result<CaseReport> {
    let t = &config.tolerances;
    let frame = conn.frame();
    let sig = frame.sig();
    let base = frame.base();
    let gauge = invariance_scalar(frame, rng)?;
    let transformed = gauge.as_ref().map(|g| ym.gauge_transformed(g));
    let roundtrip = gauge
        .as_ref()
        .zip(transformed.as_ref())
        .map(|(g, tf)| tf.gauge_transformed(&g.inverted()));

    let mut acc = CaseAccum::new(STAGE_YANGMILLS, &label, points);
    for x in points {
        let r = ym.residuals_at(x)?;
        acc.put("ym_first", t.ym_first, r.first);
        acc.put("ym_second", t.ym_second, r.second);
        acc.put("conservation", t.conservation, r.conservation);
        acc.put("center_leak", t.center, r.center_leak);
        if let Some(k) = k {
            acc.put(
                "covector_covariance",
                t.covariance,
                k.covariance_residual(conn, std::slice::from_ref(x))?,
            );
        }
        if let Some(tf) = &transformed {
            let tr = tf.residuals_at(x)?;
            acc.put("transformed_first", t.ym_first * t.gauge_factor, tr.first);
            acc.put(
                "transformed_second",
                t.ym_second * t.gauge_factor,
                tr.second,
            );
            acc.put(
                "transformed_conservation",
                t.conservation * t.gauge_factor,
                tr.conservation,
            );
        }
        if let Some(rt) = &roundtrip {
            let mut ev = JetEvaluator::new(sig, base, x);
            let mut worst = 0.0f64;
            for mu in 0..base.m() {
                let b0 = ev.eval(&ym.potential()[mu])?.value().clone();
                let b2 = ev.eval(&rt.potential()[mu])?.value().clone();
                worst = worst.max((&b2 - &b0).max_abs());
            }
            acc.put("gauge_roundtrip", t.roundtrip, worst);
        }
    }
    let (signature, base_pair) = sig_pair(frame);
    Ok(acc.finish(
        signature,
        base_pair,
        frame.kind(),
        sigma_eps.map(|(s, _)| s),
        sigma_eps.map(|(_, e)| e),
        csv,
    ))
}

fn cases_yangmills<S: Scalar>(
    label: &str,
    frame: Frame<S>,
    points: &[Vec<S>],
    config: &CampaignConfig,
    rng: &mut ChaCha8Rng,
    csv: &mut Vec<CsvRow>,
) -> Result<Vec<CaseReport>> {
    let sig = frame.sig();
    let base = frame.base();
    let kind = frame.kind();
    let conn = Connection::new(frame);
    let mut out = Vec::new();
    for ci in 0..config.covectors {
        let coeffs = random_covector_coeffs::<S>(sig, base, config.covector_magnitude, rng);
        let k = CovConstCovector::from_frame_coeffs(conn.frame(), coeffs)?;
        let ym = YangMillsField::covconst(&conn, &k)?;
        out.push(ym_case(
            format!("{label} / covector {ci}"),
            &conn,
            Some(&k),
            &ym,
            None,
            points,
            config,
            rng,
            csv,
        )?);
    }
    if kind == FrameKind::Vector {
        for &sigma in &config.sigmas {
            let ym = YangMillsField::sigma_family(&conn, S::from_f64(sigma))?;
            let eps = ym
                .sigma_eps()
                .map(|(_, e)| e.to_f64())
                .expect("sigma families always carry their parameters");
            out.push(ym_case(
                format!("{label} / sigma {sigma}"),
                &conn,
                None,
                &ym,
                Some((sigma, eps)),
                points,
                config,
                rng,
                csv,
            )?);
        }
    }
    if out.is_empty() {
        bail!("yangmills stage produced no cases; set `covectors` > 0 or use a vector frame");
    }
    Ok(out)
}
