//! Problem instances: coefficients, habitat motion and derived quantities.

mod coefficient;
pub mod config;
mod motion;

use std::f64::consts::PI;

pub use coefficient::{Harmonic, PeriodicCoefficient};
pub use config::ScenarioConfig;
pub use motion::{CubicSpline, DomainMotion, Jet};

use crate::error::{Error, Result};
use crate::quadrature::UnitRule;

/// Initial population, given in moving coordinates `z = (x - A(0)) / L(0) ∈ [0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub enum InitialDatum {
    /// `sin(π z)`.
    Sine,
    /// Values on a uniform grid over `[0, 1]` (endpoints included), linearly interpolated.
    Tabulated(Vec<f64>),
}

impl InitialDatum {
    pub fn eval(&self, z: f64) -> f64 {
        if !(0.0..=1.0).contains(&z) {
            return 0.0;
        }
        match self {
            InitialDatum::Sine => (PI * z).sin(),
            InitialDatum::Tabulated(v) => {
                let n = v.len() - 1;
                let s = z * n as f64;
                let i = (s.floor() as usize).min(n.saturating_sub(1));
                let f = s - i as f64;
                v[i] * (1.0 - f) + v[(i + 1).min(n)] * f
            }
        }
    }
}

/// A full problem instance
/// `u_t = d u_xx + (r - α(t)/2 (x - x_opt(t))²) u` on `A(t) < x < A(t) + L(t)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub d: f64,
    pub r: f64,
    /// Common period of `alpha` and `beta`.
    pub period: f64,
    /// Final simulated time.
    pub horizon: f64,
    pub alpha: PeriodicCoefficient,
    pub beta: PeriodicCoefficient,
    pub motion: DomainMotion,
    pub initial: InitialDatum,
    /// Rate `c` of the change of unknown `U = u e^{-ct}` used by the FEM solver.
    pub c_shift: f64,
}

const POSITIVITY_SAMPLES: usize = 10_000;

impl Scenario {
    /// Fixed-domain scenario with the given coefficients.
    pub fn fixed(d: f64, r: f64, alpha: PeriodicCoefficient, beta: PeriodicCoefficient, length: f64, horizon: f64) -> Self {
        Scenario {
            d,
            r,
            period: alpha.period,
            horizon,
            alpha,
            beta,
            motion: DomainMotion::Fixed { length },
            initial: InitialDatum::Sine,
            c_shift: r + 1.0,
        }
    }

    /// Copy of this scenario posed on the fixed interval `(0, length)`.
    pub fn frozen(&self, length: f64) -> Self {
        Scenario {
            motion: DomainMotion::Fixed { length },
            ..self.clone()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |v: f64, field: &str| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(Error::validation(field, format!("must be positive and finite (got {v})")))
            }
        };
        positive(self.d, "d")?;
        positive(self.r, "r")?;
        positive(self.period, "T")?;
        positive(self.horizon, "horizon")?;
        if !(self.c_shift.is_finite() && self.c_shift >= 0.0) {
            return Err(Error::validation("c_shift", "must be nonnegative"));
        }
        for (name, c) in [("alpha", &self.alpha), ("beta", &self.beta)] {
            if (c.period - self.period).abs() > 1e-12 * self.period.max(1.0) {
                return Err(Error::validation(
                    format!("{name}.period"),
                    format!("mismatched periods ({} vs T = {})", c.period, self.period),
                ));
            }
            if let Some(h) = c.harmonics.iter().find(|h| h.k == 0) {
                return Err(Error::validation(
                    format!("{name}.harmonics"),
                    format!("harmonic multiple k must be >= 1 (amp {})", h.amp),
                ));
            }
            if !c.mean.is_finite() || c.harmonics.iter().any(|h| !h.amp.is_finite() || !h.phase.is_finite()) {
                return Err(Error::validation(name, "coefficients must be finite"));
            }
        }
        if self.alpha.sampled_min(POSITIVITY_SAMPLES) <= 0.0 {
            return Err(Error::validation("alpha", "alpha must be positive"));
        }
        if let Some((lo, hi)) = self.motion.table_range() {
            if lo > 0.0 || hi < self.horizon {
                return Err(Error::validation(
                    "motion.times",
                    format!("table covers [{lo}, {hi}] but [0, {}] is required", self.horizon),
                ));
            }
        }
        if let DomainMotion::PowerShift { c, t0, exponent, .. } = self.motion {
            if c < 0.0 {
                return Err(Error::validation("motion.c", "shift amplitude must be nonnegative"));
            }
            if t0 < 0.0 || (t0 == 0.0 && exponent < 0.0) {
                return Err(Error::validation("motion.t0", "shift base (t0 + t) must stay positive"));
            }
        }
        for i in 0..=POSITIVITY_SAMPLES {
            let t = self.horizon * i as f64 / POSITIVITY_SAMPLES as f64;
            let (l, _, _) = self.motion.length_jet(t);
            if !(l > 0.0) || !l.is_finite() {
                return Err(Error::validation("motion", format!("nonpositive length L({t}) = {l}")));
            }
        }
        if let InitialDatum::Tabulated(v) = &self.initial {
            if v.len() < 2 {
                return Err(Error::validation("initial.values", "need at least two samples"));
            }
            if v.iter().any(|x| !x.is_finite() || *x < 0.0) {
                return Err(Error::validation("initial.values", "values must be finite and nonnegative"));
            }
        }
        Ok(())
    }

    /// Position of the fitness optimum, `A(t) + β(t) L(t)`.
    pub fn x_opt(&self, t: f64) -> f64 {
        self.motion.shift(t) + self.beta.eval(t) * self.motion.length(t)
    }

    /// Growth rate `R(t, x) = r - α(t)/2 (x - x_opt(t))²` in the original frame.
    pub fn growth(&self, t: f64, x: f64) -> f64 {
        let dx = x - self.x_opt(t);
        self.r - 0.5 * self.alpha.eval(t) * dx * dx
    }

    /// Initial datum in original coordinates.
    pub fn initial_value(&self, x: f64) -> f64 {
        let (a, l) = (self.motion.shift(0.0), self.motion.length(0.0));
        self.initial.eval((x - a) / l)
    }

    /// Length of the fixed domain; error for moving habitats.
    pub fn fixed_length(&self) -> Result<f64> {
        match self.motion {
            DomainMotion::Fixed { length } => Ok(length),
            ref m => Err(Error::NonFixedMotion(m.kind().to_string())),
        }
    }

    pub fn require_fixed(&self) -> Result<()> {
        self.fixed_length().map(|_| ())
    }

    /// `⟨f⟩` over one period of this scenario.
    pub fn mean_of(&self, f: impl Fn(f64) -> f64) -> f64 {
        periodic_mean(f, self.period)
    }
}

/// Parses and validates a JSON scenario document.
pub fn parse_scenario(text: &str) -> Result<Scenario> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let config: ScenarioConfig = serde_path_to_error::deserialize(de).map_err(|e| Error::Config {
        path: e.path().to_string(),
        message: e.inner().to_string(),
    })?;
    let s = config.build()?;
    s.validate()?;
    Ok(s)
}

/// `(1/T) ∫₀ᵀ f`, by composite Gauss–Legendre (64 points to start), doubling
/// the panel count until successive estimates agree to 1e-11.
pub fn periodic_mean(f: impl Fn(f64) -> f64, period: f64) -> f64 {
    assert!(period > 0.0, "period must be positive");
    let rule = UnitRule::new(8);
    let mut panels = 8;
    let mut prev = rule.composite(0.0, period, panels, &f) / period;
    for _ in 0..12 {
        panels *= 2;
        let next = rule.composite(0.0, period, panels, &f) / period;
        if (next - prev).abs() < 1e-11 * prev.abs().max(1.0) {
            return next;
        }
        prev = next;
    }
    prev
}
