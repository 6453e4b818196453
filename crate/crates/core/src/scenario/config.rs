//! JSON form of a scenario.

use serde::{Deserialize, Serialize};

use super::{DomainMotion, Harmonic, InitialDatum, PeriodicCoefficient, Scenario};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub d: f64,
    pub r: f64,
    #[serde(rename = "T")]
    pub period: f64,
    pub horizon: f64,
    pub alpha: CoefficientConfig,
    pub beta: CoefficientConfig,
    pub motion: MotionConfig,
    #[serde(default)]
    pub initial: InitialConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c_shift: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoefficientConfig {
    pub mean: f64,
    #[serde(default)]
    pub harmonics: Vec<HarmonicConfig>,
    /// Optional; must equal the scenario period when present.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub period: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HarmonicConfig {
    pub amp: f64,
    pub k: u32,
    #[serde(default)]
    pub phase: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum MotionConfig {
    Fixed {
        #[serde(rename = "L0")]
        l0: f64,
    },
    PowerShift {
        c: f64,
        exponent: f64,
        #[serde(default = "one")]
        t0: f64,
        #[serde(default)]
        offset: f64,
        #[serde(rename = "L0")]
        l0: f64,
    },
    LinearGrowth {
        #[serde(rename = "L0")]
        l0: f64,
        slope: f64,
    },
    Custom {
        times: Vec<f64>,
        #[serde(rename = "A")]
        shift: Vec<f64>,
        #[serde(rename = "L")]
        length: Vec<f64>,
    },
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialConfig {
    #[default]
    Sine,
    Tabulated {
        values: Vec<f64>,
    },
}

impl CoefficientConfig {
    fn build(&self, period: f64, field: &str) -> Result<PeriodicCoefficient> {
        if let Some(p) = self.period {
            if (p - period).abs() > 1e-12 * period.abs().max(1.0) {
                return Err(Error::validation(
                    format!("{field}.period"),
                    format!("mismatched periods ({p} vs T = {period})"),
                ));
            }
        }
        Ok(PeriodicCoefficient {
            mean: self.mean,
            harmonics: self
                .harmonics
                .iter()
                .map(|h| Harmonic {
                    amp: h.amp,
                    k: h.k,
                    phase: h.phase,
                })
                .collect(),
            period,
        })
    }

    fn from_coefficient(c: &PeriodicCoefficient) -> Self {
        CoefficientConfig {
            mean: c.mean,
            harmonics: c
                .harmonics
                .iter()
                .map(|h| HarmonicConfig {
                    amp: h.amp,
                    k: h.k,
                    phase: h.phase,
                })
                .collect(),
            period: None,
        }
    }
}

impl ScenarioConfig {
    /// Converts into a scenario without running the invariant checks.
    pub fn build(&self) -> Result<Scenario> {
        let motion = match &self.motion {
            MotionConfig::Fixed { l0 } => DomainMotion::Fixed { length: *l0 },
            MotionConfig::PowerShift {
                c,
                exponent,
                t0,
                offset,
                l0,
            } => DomainMotion::PowerShift {
                c: *c,
                exponent: *exponent,
                t0: *t0,
                offset: *offset,
                length: *l0,
            },
            MotionConfig::LinearGrowth { l0, slope } => DomainMotion::LinearGrowth {
                length: *l0,
                slope: *slope,
            },
            MotionConfig::Custom { times, shift, length } => {
                let spline = |v: &Vec<f64>, name: &str| {
                    super::motion::CubicSpline::new(times.clone(), v.clone())
                        .map_err(|e| Error::validation(format!("motion.{name}"), e.to_string()))
                };
                DomainMotion::Custom {
                    shift: spline(shift, "A")?,
                    length: spline(length, "L")?,
                }
            }
        };
        let initial = match &self.initial {
            InitialConfig::Sine => InitialDatum::Sine,
            InitialConfig::Tabulated { values } => InitialDatum::Tabulated(values.clone()),
        };
        Ok(Scenario {
            d: self.d,
            r: self.r,
            period: self.period,
            horizon: self.horizon,
            alpha: self.alpha.build(self.period, "alpha")?,
            beta: self.beta.build(self.period, "beta")?,
            motion,
            initial,
            c_shift: self.c_shift.unwrap_or(self.r + 1.0),
        })
    }

    pub fn from_scenario(s: &Scenario) -> Result<Self> {
        let motion = match &s.motion {
            DomainMotion::Fixed { length } => MotionConfig::Fixed { l0: *length },
            DomainMotion::PowerShift {
                c,
                exponent,
                t0,
                offset,
                length,
            } => MotionConfig::PowerShift {
                c: *c,
                exponent: *exponent,
                t0: *t0,
                offset: *offset,
                l0: *length,
            },
            DomainMotion::LinearGrowth { length, slope } => MotionConfig::LinearGrowth {
                l0: *length,
                slope: *slope,
            },
            DomainMotion::Custom { shift, length } => {
                if shift.knots() != length.knots() {
                    return Err(Error::InvalidArgument("tabulated A and L must share their time grid".into()));
                }
                MotionConfig::Custom {
                    times: shift.knots().to_vec(),
                    shift: shift.values().to_vec(),
                    length: length.values().to_vec(),
                }
            }
        };
        Ok(ScenarioConfig {
            d: s.d,
            r: s.r,
            period: s.period,
            horizon: s.horizon,
            alpha: CoefficientConfig::from_coefficient(&s.alpha),
            beta: CoefficientConfig::from_coefficient(&s.beta),
            motion,
            initial: match &s.initial {
                InitialDatum::Sine => InitialConfig::Sine,
                InitialDatum::Tabulated(v) => InitialConfig::Tabulated { values: v.clone() },
            },
            c_shift: Some(s.c_shift),
        })
    }
}
