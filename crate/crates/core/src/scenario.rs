//! Declarative scenario descriptions and named field presets.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dynamics::FeedbackKind;
use crate::eigen::DEFAULT_TOLERANCE;
use crate::spectral::{ControlShape, FourierField};
use crate::symbols::SymbolSpec;
use crate::{Error, Exec, Result};

/// Bump resolution used when a scenario leaves `M` unset: `max(8N, 4096)`.
pub fn default_resolution(n: usize) -> usize {
    (8 * n).max(4096)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BumpSpec {
    #[serde(default = "default_center")]
    pub center: f64,
    #[serde(default = "default_half_width")]
    pub half_width: f64,
    #[serde(rename = "M", default, skip_serializing_if = "Option::is_none")]
    pub resolution: Option<usize>,
}

fn default_center() -> f64 {
    PI
}

fn default_half_width() -> f64 {
    PI / 2.0
}

impl Default for BumpSpec {
    fn default() -> Self {
        BumpSpec {
            center: default_center(),
            half_width: default_half_width(),
            resolution: None,
        }
    }
}

/// Named initial/target field presets.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum FieldSpec {
    #[default]
    Zero,
    /// `amplitude·ψₖ`.
    SingleMode {
        k: i64,
        #[serde(default = "one")]
        amplitude: f64,
    },
    /// Periodized `A·exp(−d(x,x₀)²/(2w²))·e^{ik₀x}`.
    GaussianPacket {
        #[serde(default = "default_center")]
        center: f64,
        #[serde(default = "default_width")]
        width: f64,
        #[serde(default)]
        wavenumber: i64,
        #[serde(default = "one")]
        amplitude: f64,
        #[serde(default)]
        mean_free: bool,
    },
    /// Independent uniform coefficients scaled by `(1+|k|)^{−decay}`, then
    /// normalized to unit `L²` norm times `amplitude`.
    RandomSeeded {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        seed: Option<u64>,
        #[serde(default = "one")]
        amplitude: f64,
        #[serde(default = "one")]
        decay: f64,
        #[serde(default = "yes")]
        mean_free: bool,
    },
}

fn one() -> f64 {
    1.0
}

fn yes() -> bool {
    true
}

fn default_width() -> f64 {
    0.5
}

impl FieldSpec {
    /// Builds the field; `fallback_seed` is used by random presets without their own seed.
    pub fn build(&self, n: usize, fallback_seed: u64) -> Result<FourierField> {
        match *self {
            FieldSpec::Zero => Ok(FourierField::zeros(n)),
            FieldSpec::SingleMode { k, amplitude } => {
                if k.unsigned_abs() as usize > n {
                    return Err(Error::invalid("k", format!("mode {k} lies outside |k| <= {n}")));
                }
                Ok(FourierField::psi(n, k).scaled(Complex64::new(amplitude, 0.0)))
            }
            FieldSpec::GaussianPacket {
                center,
                width,
                wavenumber,
                amplitude,
                mean_free,
            } => {
                if !(width > 0.0 && width < PI) {
                    return Err(Error::invalid("width", format!("must lie in (0, π), got {width}")));
                }
                let mut field = FourierField::from_fn(n, |k| {
                    let q = (k - wavenumber) as f64;
                    Complex64::from_polar(
                        amplitude * width / (2.0 * PI).sqrt() * (-0.5 * width * width * q * q).exp(),
                        -q * center,
                    )
                });
                if mean_free {
                    field.set(0, Complex64::new(0.0, 0.0));
                }
                Ok(field)
            }
            FieldSpec::RandomSeeded {
                seed,
                amplitude,
                decay,
                mean_free,
            } => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed.unwrap_or(fallback_seed));
                let mut field = FourierField::from_fn(n, |k| {
                    let scale = (1.0 + k.unsigned_abs() as f64).powf(-decay);
                    Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)) * scale
                });
                if mean_free {
                    field.set(0, Complex64::new(0.0, 0.0));
                }
                let norm = field.sobolev_norm(0.0);
                Ok(if norm > 0.0 { &field * (amplitude / norm) } else { field })
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FeedbackChoice {
    GgStar,
    #[default]
    GramianInverse,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StabilizeSpec {
    #[serde(default)]
    pub feedback: FeedbackChoice,
    #[serde(default = "one")]
    pub lambda: f64,
    /// Gramian horizon; defaults to the scenario `T`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub horizon: Option<f64>,
    #[serde(default = "default_t_max")]
    pub t_max: f64,
    #[serde(default = "default_dt_out")]
    pub dt_out: f64,
}

fn default_t_max() -> f64 {
    20.0
}

fn default_dt_out() -> f64 {
    0.25
}

impl Default for StabilizeSpec {
    fn default() -> Self {
        StabilizeSpec {
            feedback: FeedbackChoice::default(),
            lambda: 1.0,
            horizon: None,
            t_max: default_t_max(),
            dt_out: default_dt_out(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateSpec {
    /// Output grid points on `[0, T]`.
    #[serde(default = "default_samples")]
    pub samples: usize,
}

fn default_samples() -> usize {
    101
}

impl Default for SimulateSpec {
    fn default() -> Self {
        SimulateSpec {
            samples: default_samples(),
        }
    }
}

/// One self-contained scenario.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(rename = "N")]
    pub n: usize,
    #[serde(default)]
    pub s: f64,
    #[serde(rename = "T")]
    pub horizon: f64,
    #[serde(default = "default_tolerance")]
    pub tolerance: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub symbol: SymbolSpec,
    #[serde(default)]
    pub bump: BumpSpec,
    #[serde(default)]
    pub initial: FieldSpec,
    #[serde(default)]
    pub target: FieldSpec,
    #[serde(default)]
    pub simulate: SimulateSpec,
    #[serde(default)]
    pub stabilize: StabilizeSpec,
}

fn default_tolerance() -> f64 {
    DEFAULT_TOLERANCE
}

impl Scenario {
    pub fn validate(&self) -> Result<()> {
        if self.n < 4 {
            return Err(Error::invalid("N", format!("need N >= 4, got {}", self.n)));
        }
        if !(self.horizon > 0.0 && self.horizon.is_finite()) {
            return Err(Error::invalid("T", format!("must be positive, got {}", self.horizon)));
        }
        if !self.s.is_finite() {
            return Err(Error::invalid("s", "must be finite"));
        }
        if !(self.tolerance > 0.0) {
            return Err(Error::invalid("tolerance", "must be positive"));
        }
        if !(self.stabilize.lambda > 0.0) {
            return Err(Error::invalid("stabilize.lambda", "must be positive"));
        }
        if !(self.stabilize.t_max > 0.0 && self.stabilize.dt_out > 0.0 && self.stabilize.dt_out <= self.stabilize.t_max)
        {
            return Err(Error::invalid("stabilize.dt_out", "need 0 < dt_out <= t_max"));
        }
        if self.simulate.samples < 2 {
            return Err(Error::invalid("simulate.samples", "need at least 2 samples"));
        }
        self.symbol.build()?;
        Ok(())
    }

    pub fn resolution(&self) -> usize {
        self.bump.resolution.unwrap_or_else(|| default_resolution(self.n))
    }

    pub fn shape(&self, exec: Exec) -> Result<ControlShape> {
        ControlShape::build_with(self.bump.center, self.bump.half_width, self.n, self.resolution(), exec)
    }

    /// Initial and target fields; random presets draw from `seed` and `seed + 1`.
    pub fn fields(&self, seed_override: Option<u64>) -> Result<(FourierField, FourierField)> {
        let seed = seed_override.or(self.seed).unwrap_or(0);
        Ok((
            self.initial.build(self.n, seed)?,
            self.target.build(self.n, seed.wrapping_add(1))?,
        ))
    }

    pub fn feedback_kind(&self) -> FeedbackKind {
        match self.stabilize.feedback {
            FeedbackChoice::GgStar => FeedbackKind::GgStar,
            FeedbackChoice::GramianInverse => FeedbackKind::GramianInverse {
                lambda: self.stabilize.lambda,
                horizon: self.stabilize.horizon.unwrap_or(self.horizon),
            },
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn base() -> Scenario {
        serde_json::from_str(
            r#"{"N": 8, "T": 1.0, "symbol": {"family": "smith"},
                "target": {"kind": "random_seeded"}}"#,
        )
        .unwrap()
    }

    #[test]
    fn defaults_fill_in() {
        let sc = base();
        assert_eq!(sc.s, 0.0);
        assert_eq!(sc.bump, BumpSpec::default());
        assert_eq!(sc.initial, FieldSpec::Zero);
        assert_eq!(sc.resolution(), 4096);
        assert_eq!(sc.stabilize.feedback, FeedbackChoice::GramianInverse);
        sc.validate().unwrap();
    }

    #[test]
    fn round_trips_through_json() {
        let sc = base();
        let back: Scenario = serde_json::from_str(&serde_json::to_string(&sc).unwrap()).unwrap();
        assert_eq!(back, sc);
    }

    #[test]
    fn validation_catches_bad_values() {
        let mut sc = base();
        sc.n = 3;
        assert!(sc.validate().is_err());
        let mut sc = base();
        sc.horizon = -1.0;
        assert!(sc.validate().is_err());
        let mut sc = base();
        sc.symbol.family = "nope".into();
        assert!(sc.validate().is_err());
        assert!(
            serde_json::from_str::<Scenario>(r#"{"N": 8, "T": 1, "symbol": {"family": "kdv"}, "extra": 1}"#).is_err()
        );
    }

    #[test]
    fn random_fields_are_reproducible_and_normalized() {
        let spec = FieldSpec::RandomSeeded {
            seed: None,
            amplitude: 2.0,
            decay: 1.0,
            mean_free: true,
        };
        let a = spec.build(10, 5).unwrap();
        assert_eq!(a, spec.build(10, 5).unwrap());
        assert_ne!(a, spec.build(10, 6).unwrap());
        assert!((a.sobolev_norm(0.0) - 2.0).abs() < 1e-12);
        assert_eq!(a.mean(), Complex64::new(0.0, 0.0));
        let (u0, u1) = base().fields(Some(9)).unwrap();
        assert_eq!(u0, FourierField::zeros(8));
        assert_eq!(
            u1,
            FieldSpec::RandomSeeded {
                seed: None,
                amplitude: 1.0,
                decay: 1.0,
                mean_free: true
            }
            .build(8, 10)
            .unwrap()
        );
    }

    #[test]
    fn gaussian_packet_matches_pointwise_profile() {
        let spec = FieldSpec::GaussianPacket {
            center: 2.0,
            width: 0.3,
            wavenumber: 3,
            amplitude: 1.5,
            mean_free: false,
        };
        let field = spec.build(40, 0).unwrap();
        for x in [2.0, 2.2, 1.5, 5.0] {
            let d: f64 = x - 2.0;
            let expect = Complex64::from_polar(1.5 * (-d * d / (2.0 * 0.09)).exp(), 3.0 * x);
            assert!((field.evaluate(x) - expect).norm() < 1e-9, "x = {x}");
        }
    }

    #[test]
    fn single_mode_checks_range() {
        assert!(FieldSpec::SingleMode { k: 9, amplitude: 1.0 }.build(8, 0).is_err());
        let f = FieldSpec::SingleMode { k: -2, amplitude: 3.0 }.build(8, 0).unwrap();
        assert!((f.sobolev_norm(0.0) - 3.0).abs() < 1e-14);
    }
}
