//! Campaign configuration: JSON file plus command-line overrides.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};

use cliffym::{BaseSpace, FrameKind, FrameRecipe, Signature};

/// Exact (rational) mode is limited to small algebras: its gauge scalars
/// are built from rational rotors whose cost grows steeply with n.
pub const EXACT_DIM_CAP: u8 = 4;

/// One frame scenario inside a campaign: a seeded recipe or a fixture
/// file with explicit generators.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum FrameCase {
    Constant,
    Orthogonal { degree: u32, magnitude: f64 },
    Gauge { degree: u32, magnitude: f64 },
    RationalGauge { rotors: u32, magnitude: f64 },
    File { path: PathBuf },
}

impl FrameCase {
    pub fn label(&self) -> String {
        match self {
            FrameCase::Constant => "constant".into(),
            FrameCase::Orthogonal { degree, magnitude } => {
                format!("orthogonal degree={degree} magnitude={magnitude}")
            }
            FrameCase::Gauge { degree, magnitude } => {
                format!("gauge degree={degree} magnitude={magnitude}")
            }
            FrameCase::RationalGauge { rotors, magnitude } => {
                format!("rational_gauge rotors={rotors} magnitude={magnitude}")
            }
            FrameCase::File { path } => format!("file {}", path.display()),
        }
    }

    /// The seeded recipe, if this case is one.
    pub fn recipe(&self) -> Option<FrameRecipe> {
        match *self {
            FrameCase::Constant => Some(FrameRecipe::Constant),
            FrameCase::Orthogonal { degree, magnitude } => {
                Some(FrameRecipe::Orthogonal { degree, magnitude })
            }
            FrameCase::Gauge { degree, magnitude } => {
                Some(FrameRecipe::Gauge { degree, magnitude })
            }
            FrameCase::RationalGauge { rotors, magnitude } => {
                Some(FrameRecipe::RationalGauge { rotors, magnitude })
            }
            FrameCase::File { .. } => None,
        }
    }
}

/// Per-check tolerances; every value is echoed into the report.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    /// Frame identities: anticommutation, completeness, trace,
    /// pseudoscalar constancy and the vector-frame identities.
    pub frame: f64,
    /// Defining equation of the connection.
    pub defining: f64,
    /// Zero-curvature residual of the connection.
    pub curvature: f64,
    /// Agreement between the averaging and eigenprojection formulas.
    pub formula_agreement: f64,
    /// Odd n: agreement of the half-basis reduction with the full average.
    pub reduced_agreement: f64,
    /// Center components of connections, potentials and currents.
    pub center: f64,
    /// Covariant constancy of the covector K.
    pub covariance: f64,
    /// First Yang-Mills equation.
    pub ym_first: f64,
    /// Second Yang-Mills equation.
    pub ym_second: f64,
    /// Conservation of the current.
    pub conservation: f64,
    /// Multiplier applied to the base tolerances for gauge-transformed
    /// residual checks.
    pub gauge_factor: f64,
    /// Round-trip gauge transform restoring the potential.
    pub roundtrip: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            frame: 1e-9,
            defining: 1e-8,
            curvature: 1e-8,
            formula_agreement: 1e-9,
            reduced_agreement: 1e-10,
            center: 1e-10,
            covariance: 1e-9,
            ym_first: 1e-8,
            ym_second: 1e-7,
            conservation: 1e-5,
            gauge_factor: 10.0,
            roundtrip: 1e-8,
        }
    }
}

impl Tolerances {
    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("frame", self.frame),
            ("defining", self.defining),
            ("curvature", self.curvature),
            ("formula_agreement", self.formula_agreement),
            ("reduced_agreement", self.reduced_agreement),
            ("center", self.center),
            ("covariance", self.covariance),
            ("ym_first", self.ym_first),
            ("ym_second", self.ym_second),
            ("conservation", self.conservation),
            ("gauge_factor", self.gauge_factor),
            ("roundtrip", self.roundtrip),
        ];
        for (name, value) in fields {
            // Zero is allowed: exact-rational campaigns really do demand
            // residuals of exactly zero. NaN and negatives are not.
            if value.is_nan() || value < 0.0 {
                bail!("tolerance `{name}` must be non-negative, got {value}");
            }
        }
        if self.gauge_factor.is_nan() || self.gauge_factor < 1.0 {
            bail!(
                "tolerance `gauge_factor` must be at least 1, got {}",
                self.gauge_factor
            );
        }
        Ok(())
    }
}

/// The full campaign description. Every field has a default, so `{}` is
/// a valid config file; the command line can override the scalar fields.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CampaignConfig {
    pub seed: u64,
    /// Sample points per case.
    pub points: usize,
    /// Algebra signature (p, q).
    pub signature: (u8, u8),
    /// Base-space signature (k, l); coordinates x^mu with rho = +1 / -1.
    pub base: (u8, u8),
    /// Rational arithmetic instead of f64 (restricted recipes, n <= 4).
    pub exact: bool,
    pub frames: Vec<FrameCase>,
    /// Sigma values for the one-parameter solution family (vector frames).
    pub sigmas: Vec<f64>,
    /// Number of random covariantly constant covectors per frame case.
    pub covectors: usize,
    pub covector_magnitude: f64,
    pub tolerances: Tolerances,
}

impl Default for CampaignConfig {
    fn default() -> Self {
        CampaignConfig {
            seed: 7,
            points: 4,
            signature: (3, 0),
            base: (3, 0),
            exact: false,
            frames: vec![
                FrameCase::Constant,
                FrameCase::Orthogonal {
                    degree: 1,
                    magnitude: 0.4,
                },
                FrameCase::Gauge {
                    degree: 2,
                    magnitude: 0.35,
                },
            ],
            sigmas: vec![0.3, 1.0],
            covectors: 2,
            covector_magnitude: 0.5,
            tolerances: Tolerances::default(),
        }
    }
}

impl CampaignConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        let config: CampaignConfig = serde_json::from_str(&text)
            .with_context(|| format!("parsing config {}", path.display()))?;
        Ok(config)
    }

    pub fn signature_checked(&self) -> Result<Signature> {
        Ok(Signature::new(self.signature.0, self.signature.1)?)
    }

    pub fn base_checked(&self) -> Result<BaseSpace> {
        Ok(BaseSpace::new(self.base.0, self.base.1)?)
    }

    /// Vector frames demand that the base metric mirror the algebra
    /// signature; otherwise frames carry a scalar index.
    pub fn frame_kind(&self) -> FrameKind {
        if self.signature == self.base {
            FrameKind::Vector
        } else {
            FrameKind::ScalarIndex
        }
    }

    pub fn validate(&self) -> Result<()> {
        let sig = self.signature_checked()?;
        self.base_checked()?;
        if self.points == 0 {
            bail!("point count must be at least 1");
        }
        if self.frames.is_empty() {
            bail!("at least one frame case is required");
        }
        if self.exact && sig.n() > u32::from(EXACT_DIM_CAP) {
            bail!(
                "exact mode supports up to {EXACT_DIM_CAP} generators, got {}",
                sig.n()
            );
        }
        if self.covector_magnitude.is_nan() || self.covector_magnitude <= 0.0 {
            bail!("covector magnitude must be positive");
        }
        self.tolerances.validate()?;
        Ok(())
    }
}
