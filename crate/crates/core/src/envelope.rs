//! Sub- and supersolution envelopes for a moving habitat.
//!
//! In the fixed frame `y = (x − A)L0/L` the weight
//! `w = v (L/L0)^{1/2} exp(−rt + ∫Ȧ²/4d + y²L̇L/(4dL0²) + yȦL/(2dL0))`
//! removes the advection, leaving
//! `w_t = d(L0/L)² w_yy + (L̈L y²/(4dL0²) + ÄL y/(2dL0) − αL²/(2L0²)(y − βL0)²) w`.
//! Comparing `w` with the periodic eigenfunction of the fixed problem on
//! `(0, L0)`, run on the clock `τ(t) = ∫₀ᵗ L0²/L²`, gives explicit bounds
//! `a φ … ≤ v ≤ b φ …`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::quadrature::UnitRule;
use crate::scenario::Jet;
use crate::scenario::{DomainMotion, Scenario};
use crate::spectral::{floquet_lambda, Eigenfunction, FloquetOptions, Verdict};

/// Change of variables between the moving habitat and `(0, L0)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrameTransform {
    pub l0: f64,
}

impl FrameTransform {
    pub fn to_y(&self, s: &Scenario, t: f64, x: f64) -> f64 {
        (x - s.motion.shift(t)) * self.l0 / s.motion.length(t)
    }

    pub fn to_x(&self, s: &Scenario, t: f64, y: f64) -> f64 {
        s.motion.shift(t) + y * s.motion.length(t) / self.l0
    }

    /// `ln(w/v)` at `(t, y)`, given `drift = ∫₀ᵗ Ȧ²/(4d)`.
    pub fn log_weight(&self, s: &Scenario, t: f64, y: f64, drift: f64) -> f64 {
        let (_, da, _) = s.motion.shift_jet(t);
        let (l, dl, _) = s.motion.length_jet(t);
        let l0 = self.l0;
        0.5 * (l / l0).ln() - s.r * t + drift + y * y * dl * l / (4.0 * s.d * l0 * l0) + y * da * l / (2.0 * s.d * l0)
    }
}

/// Minimum and maximum of `c2 z² + c1 z + c0` over `[lo, hi]`.
pub fn quadratic_extremes(c2: f64, c1: f64, c0: f64, lo: f64, hi: f64) -> (f64, f64) {
    let f = |z: f64| (c2 * z + c1) * z + c0;
    let (mut min, mut max) = (f(lo).min(f(hi)), f(lo).max(f(hi)));
    if c2 != 0.0 {
        let z = -c1 / (2.0 * c2);
        if z > lo && z < hi {
            min = min.min(f(z));
            max = max.max(f(z));
        }
    }
    (min, max)
}

/// `(Q̲, Q̄)`: extremes over `z ∈ [0, 1]` of `(L̈L/4d) z² + (ÄL/2d) z`.
pub fn q_extremes(d: f64, shift: Jet, length: Jet) -> (f64, f64) {
    let (l, _, ddl) = length;
    let (_, _, dda) = shift;
    quadratic_extremes(ddl * l / (4.0 * d), dda * l / (2.0 * d), 0.0, 0.0, 1.0)
}

/// `(P̲, P̄)` at `t` given the clock value `tau = τ(t)`: half the extremes over
/// `y ∈ [0, L0]` of
/// `(L0²/L²) α(τ)(y − β(τ)L0)² − (L²/L0²) α(t)(y − β(t)L0)²`.
pub fn p_extremes(s: &Scenario, l0: f64, t: f64, tau: f64) -> (f64, f64) {
    let l = s.motion.length(t);
    let q = l0 * l0 / (l * l);
    let (a1, b1) = (q * s.alpha.eval(tau), s.beta.eval(tau) * l0);
    let (a2, b2) = (s.alpha.eval(t) / q, s.beta.eval(t) * l0);
    let c2 = a1 - a2;
    let c1 = -2.0 * (a1 * b1 - a2 * b2);
    let c0 = a1 * b1 * b1 - a2 * b2 * b2;
    let (min, max) = quadratic_extremes(c2, c1, c0, 0.0, l0);
    (0.5 * min, 0.5 * max)
}

/// `F(t) = ∫₀ᵗ f` tabulated on a uniform grid, with cubic Hermite
/// interpolation between nodes (the node slopes are `f` itself).
#[derive(Debug, Clone)]
pub struct Cumulative {
    step: f64,
    values: Vec<f64>,
    rates: Vec<f64>,
}

impl Cumulative {
    pub fn integrate(horizon: f64, intervals: usize, f: impl Fn(f64) -> f64) -> Result<Self> {
        if !(horizon > 0.0) || intervals == 0 {
            return Err(Error::InvalidArgument(format!(
                "cannot integrate over [0, {horizon}] with {intervals} intervals"
            )));
        }
        let rule = UnitRule::new(3);
        let step = horizon / intervals as f64;
        let mut values = Vec::with_capacity(intervals + 1);
        let mut rates = Vec::with_capacity(intervals + 1);
        let mut acc = 0.0;
        for k in 0..=intervals {
            let t = k as f64 * step;
            if k > 0 {
                acc += rule.integrate(t - step, t, &f);
            }
            let rate = f(t);
            if !acc.is_finite() || !rate.is_finite() {
                return Err(Error::Numerical(format!("integrand is not finite near t = {t}")));
            }
            values.push(acc);
            rates.push(rate);
        }
        Ok(Cumulative { step, values, rates })
    }

    pub fn horizon(&self) -> f64 {
        self.step * (self.values.len() - 1) as f64
    }

    /// `F(t)`; linear extrapolation outside the table.
    pub fn eval(&self, t: f64) -> f64 {
        let n = self.values.len() - 1;
        if t <= 0.0 {
            return self.rates[0] * t;
        }
        if t >= self.horizon() {
            return self.values[n] + self.rates[n] * (t - self.horizon());
        }
        let s = t / self.step;
        let k = (s.floor() as usize).min(n - 1);
        let u = s - k as f64;
        let h = self.step;
        let (p0, p1, m0, m1) = (self.values[k], self.values[k + 1], self.rates[k] * h, self.rates[k + 1] * h);
        let u2 = u * u;
        let u3 = u2 * u;
        (2.0 * u3 - 3.0 * u2 + 1.0) * p0 + (u3 - 2.0 * u2 + u) * m0 + (-2.0 * u3 + 3.0 * u2) * p1 + (u3 - u2) * m1
    }

    pub fn rate(&self, t: f64) -> f64 {
        let n = self.values.len() - 1;
        let s = (t / self.step).clamp(0.0, n as f64);
        let k = (s.floor() as usize).min(n - 1);
        let u = s - k as f64;
        self.rates[k] * (1.0 - u) + self.rates[k + 1] * u
    }

    /// Solves `F(t) = value` for increasing `F` by bisection on the table
    /// followed by Newton steps on the interpolant.
    pub fn inverse(&self, value: f64) -> Result<f64> {
        let n = self.values.len() - 1;
        let slack = 1e-12 * self.values[n].abs().max(1.0);
        if !(value >= -slack && value <= self.values[n] + slack) {
            return Err(Error::InvalidArgument(format!(
                "{value} is outside the tabulated range [0, {}]",
                self.values[n]
            )));
        }
        let value = value.clamp(0.0, self.values[n]);
        let k = self.values.partition_point(|&v| v <= value).clamp(1, n) - 1;
        let (mut lo, mut hi) = (k as f64 * self.step, (k + 1) as f64 * self.step);
        let mut t = 0.5 * (lo + hi);
        for _ in 0..100 {
            let g = self.eval(t) - value;
            if g.abs() <= 1e-15 * value.abs().max(1.0) {
                break;
            }
            if g > 0.0 {
                hi = t;
            } else {
                lo = t;
            }
            let r = self.rate(t);
            let next = t - g / r;
            t = if r > 0.0 && next > lo && next < hi { next } else { 0.5 * (lo + hi) };
        }
        Ok(t)
    }
}

/// Settings for [`build_envelope`].
#[derive(Debug, Clone)]
pub struct EnvelopeOptions {
    /// Reference length; defaults to `L(0)`.
    pub l0: Option<f64>,
    /// Eigenproblem grid on `(0, L0)`.
    pub floquet: FloquetOptions,
    /// Uniform intervals for the time integrals.
    pub intervals: usize,
    /// End of the integration window; defaults to the scenario horizon.
    pub horizon: Option<f64>,
    /// Relative floor below which `φ(0, y)` is not divided by.
    pub floor: f64,
}

impl Default for EnvelopeOptions {
    fn default() -> Self {
        EnvelopeOptions {
            l0: None,
            floquet: FloquetOptions {
                extrapolate: false,
                ..FloquetOptions::default()
            },
            intervals: 10_000,
            horizon: None,
            floor: 1e-8,
        }
    }
}

impl EnvelopeOptions {
    /// Eigenfunction nodes aligned with an oracle grid of `ny` interior nodes.
    pub fn matching_oracle(ny: usize) -> Self {
        let mut o = Self::default();
        o.floquet.nodes = ny + 2;
        o
    }
}

/// Bounds evaluated on the eigenfunction grid at one time.
#[derive(Debug, Clone, Serialize)]
pub struct EnvelopeSlice {
    pub t: f64,
    pub y: Vec<f64>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

/// Explicit two-sided bound on the fixed-frame population `v(t, y)`.
#[derive(Debug, Clone)]
pub struct EnvelopeBound {
    pub scenario: Scenario,
    pub transform: FrameTransform,
    pub lambda: f64,
    pub a: f64,
    pub b: f64,
    pub eigenfunction: Eigenfunction,
    pub clock: Cumulative,
    /// `∫₀ᵗ Ȧ²/(4d)`.
    pub drift: Cumulative,
    pub upper_exponent: Cumulative,
    pub lower_exponent: Cumulative,
}

impl EnvelopeBound {
    pub fn l0(&self) -> f64 {
        self.transform.l0
    }

    pub fn horizon(&self) -> f64 {
        self.clock.horizon()
    }

    /// `ln` of the common factor `(L0/L)^{1/2} e^{rt − L̇L y²/(4dL0²) − ȦL y/(2dL0)}`.
    fn log_common(&self, t: f64, y: f64) -> f64 {
        let s = &self.scenario;
        let (_, da, _) = s.motion.shift_jet(t);
        let (l, dl, _) = s.motion.length_jet(t);
        let l0 = self.l0();
        0.5 * (l0 / l).ln() + s.r * t - dl * l * y * y / (4.0 * s.d * l0 * l0) - da * l * y / (2.0 * s.d * l0)
    }

    /// `(ln(lower/φ), ln(upper/φ))` at `(t, y)`.
    pub fn log_factors(&self, t: f64, y: f64) -> (f64, f64) {
        let c = self.log_common(t, y);
        (
            self.a.ln() + c + self.lower_exponent.eval(t),
            self.b.ln() + c + self.upper_exponent.eval(t),
        )
    }

    pub fn upper(&self, t: f64, y: f64) -> f64 {
        let phi = self.eigenfunction.eval(self.clock.eval(t), y);
        phi * self.log_factors(t, y).1.exp()
    }

    pub fn lower(&self, t: f64, y: f64) -> f64 {
        let phi = self.eigenfunction.eval(self.clock.eval(t), y);
        phi * self.log_factors(t, y).0.exp()
    }

    /// Both bounds on the eigenfunction grid, divided by `e^{log_shift}`.
    pub fn slice(&self, t: f64, log_shift: f64) -> EnvelopeSlice {
        let phi = self.eigenfunction.slice_at(self.clock.eval(t));
        let h = self.eigenfunction.dy();
        let y: Vec<f64> = (0..phi.len()).map(|i| i as f64 * h).collect();
        let (lower, upper) = y
            .iter()
            .zip(&phi)
            .map(|(&y, &p)| {
                let (lo, hi) = self.log_factors(t, y);
                (p * (lo - log_shift).exp(), p * (hi - log_shift).exp())
            })
            .unzip();
        EnvelopeSlice { t, y, lower, upper }
    }

    /// Growth exponents `(lower, upper)` of the bounds at `t`, without the
    /// spatial factors: `rt + ∫(…)`.
    pub fn exponents(&self, t: f64) -> (f64, f64) {
        let rt = self.scenario.r * t;
        (rt + self.lower_exponent.eval(t), rt + self.upper_exponent.eval(t))
    }
}

/// Envelope for the scenario's own initial datum.
pub fn build_envelope(s: &Scenario, opts: &EnvelopeOptions) -> Result<EnvelopeBound> {
    let (a0, l_init) = (s.motion.shift(0.0), s.motion.length(0.0));
    let l0 = opts.l0.unwrap_or(l_init);
    build_envelope_with(s, opts, |y| s.initial_value(a0 + l_init * y / l0))
}

/// Envelope for an initial profile `v0(y)` on `(0, L0)`.
pub fn build_envelope_with(s: &Scenario, opts: &EnvelopeOptions, v0: impl Fn(f64) -> f64) -> Result<EnvelopeBound> {
    let l0 = opts.l0.unwrap_or_else(|| s.motion.length(0.0));
    if !(l0 > 0.0) {
        return Err(Error::InvalidArgument(format!("L0 must be positive (got {l0})")));
    }
    let horizon = opts.horizon.unwrap_or(s.horizon);
    let (sa, sl) = (s.motion.shift_jet(0.0), s.motion.length_jet(0.0));
    if ![sa.0, sa.1, sa.2, sl.0, sl.1, sl.2].iter().all(|v| v.is_finite()) {
        return Err(Error::InvalidArgument(
            "habitat motion must be twice differentiable at t = 0 for an envelope".into(),
        ));
    }
    let transform = FrameTransform { l0 };
    let d = s.d;

    let eig = floquet_lambda(s, l0, &opts.floquet)?;
    let lambda = eig.lambda_raw;
    let phi = eig.eigenfunction;

    // Sandwich constants from w0 / φ(0, ·) on the eigenfunction grid.
    let phi0 = &phi.values[0];
    let n = phi0.len();
    let h = phi.dy();
    let w0: Vec<f64> = (0..n)
        .map(|i| {
            let y = i as f64 * h;
            if i == 0 || i == n - 1 {
                0.0
            } else {
                v0(y) * transform.log_weight(s, 0.0, y, 0.0).exp()
            }
        })
        .collect();
    if w0.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numerical("initial weight is not finite".into()));
    }
    let floor = opts.floor * phi0.iter().fold(0.0f64, |m, &v| m.max(v));
    let mut ratios: Vec<f64> = (1..n - 1).filter(|&i| phi0[i] > floor).map(|i| w0[i] / phi0[i]).collect();
    // One-sided limits at the Dirichlet ends, where both vanish.
    for (f1, f2, p1, p2) in [(w0[1], w0[2], phi0[1], phi0[2]), (w0[n - 2], w0[n - 3], phi0[n - 2], phi0[n - 3])] {
        let den = 4.0 * p1 - p2;
        if den > floor {
            ratios.push((4.0 * f1 - f2) / den);
        }
    }
    let a = ratios.iter().copied().fold(f64::INFINITY, f64::min);
    let b = ratios.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !(a > 0.0) || !b.is_finite() || a > b {
        return Err(Error::Numerical(format!(
            "initial datum is not sandwiched by positive multiples of the eigenfunction (a = {a}, b = {b})"
        )));
    }

    let clock = Cumulative::integrate(horizon, opts.intervals, |t| {
        let l = s.motion.length(t);
        l0 * l0 / (l * l)
    })?;
    let drift = Cumulative::integrate(horizon, opts.intervals, |t| {
        let da = s.motion.shift_jet(t).1;
        da * da / (4.0 * d)
    })?;
    let common = |t: f64| {
        let da = s.motion.shift_jet(t).1;
        let l = s.motion.length(t);
        -da * da / (4.0 * d) - (lambda + s.r) * l0 * l0 / (l * l)
    };
    let extremes = |t: f64| {
        let (pl, pu) = p_extremes(s, l0, t, clock.eval(t));
        let (ql, qu) = q_extremes(d, s.motion.shift_jet(t), s.motion.length_jet(t));
        (pl + ql, pu + qu)
    };
    let upper_exponent = Cumulative::integrate(horizon, opts.intervals, |t| common(t) + extremes(t).1)?;
    let lower_exponent = Cumulative::integrate(horizon, opts.intervals, |t| common(t) + extremes(t).0)?;

    Ok(EnvelopeBound {
        scenario: s.clone(),
        transform,
        lambda,
        a,
        b,
        eigenfunction: phi,
        clock,
        drift,
        upper_exponent,
        lower_exponent,
    })
}

/// `Q − (α̃/2)(L²/L0²)(y − β̃L0)²` rewriting of the `w`-equation reaction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CompletedSquare {
    pub q: f64,
    pub alpha_tilde: f64,
    pub beta_tilde: f64,
}

impl CompletedSquare {
    pub fn reaction(&self, length: f64, l0: f64, y: f64) -> f64 {
        let k = length * length / (l0 * l0);
        self.q - 0.5 * self.alpha_tilde * k * (y - self.beta_tilde * l0).powi(2)
    }
}

/// Completes the square in the `w`-equation reaction; needs `2dαL − L̈ > 0`.
pub fn complete_square(d: f64, alpha: f64, beta: f64, shift: Jet, length: Jet) -> Result<CompletedSquare> {
    let (l, _, ddl) = length;
    let dda = shift.2;
    let den = 2.0 * d * alpha * l - ddl;
    if !(den > 0.0) {
        return Err(Error::validation(
            "motion",
            format!("2dαL − L̈ must be positive (got {den})"),
        ));
    }
    let num = dda + 2.0 * d * alpha * beta * l;
    Ok(CompletedSquare {
        q: l / (4.0 * d) * num * num / den - 0.5 * alpha * beta * beta * l * l,
        alpha_tilde: den / (2.0 * d * l),
        beta_tilde: num / den,
    })
}

/// [`complete_square`] for the scenario at time `t`.
pub fn complete_square_at(s: &Scenario, t: f64) -> Result<CompletedSquare> {
    complete_square(
        s.d,
        s.alpha.eval(t),
        s.beta.eval(t),
        s.motion.shift_jet(t),
        s.motion.length_jet(t),
    )
}

/// [`complete_square_at`] on `samples + 1` evenly spaced times of one
/// period, failing if the positivity condition breaks anywhere.
pub fn complete_square_on_grid(s: &Scenario, samples: usize) -> Result<Vec<(f64, CompletedSquare)>> {
    let n = samples.max(1);
    (0..=n)
        .map(|k| {
            let t = s.period * k as f64 / n as f64;
            complete_square_at(s, t).map(|c| (t, c))
        })
        .collect()
}

/// Mechanism behind a [`ShiftOutcome`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ShiftRegime {
    /// No shift: the fixed-domain eigenvalue decides.
    Stationary,
    /// Exponent above one: extinct like `exp(−C t^{2a−1})`.
    SuperLinear,
    /// Exponent one: the speed is compared with `2√(−λd)`.
    Linear,
    /// Exponent below one with `λ < 0`: growth like `e^{−λt}`.
    SubLinear,
    /// Exponent below one with `λ = 0`.
    SubLinearCritical,
    /// `λ > 0` and exponent at most one.
    FixedDomainExtinction,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ShiftOutcome {
    pub regime: ShiftRegime,
    pub verdict: Verdict,
    /// `2√(−λd)` in the linear regime.
    pub critical_speed: Option<f64>,
    /// `2a − 1` for super-linear shifts.
    pub decay_exponent: Option<f64>,
    /// Critical speed reached exactly, or the logarithmic case `a = 1/2`.
    pub borderline: bool,
}

/// Long-time outcome for the shift `A = c(t0 + t)^a` on a habitat of fixed
/// length whose fixed-domain eigenvalue is `lambda`; `|λ| ≤ tol` counts as zero.
pub fn classify_shift(c: f64, exponent: f64, d: f64, lambda: f64, tol: f64) -> ShiftOutcome {
    const EXACT: f64 = 1e-12;
    let sign = if lambda < -tol {
        -1
    } else if lambda > tol {
        1
    } else {
        0
    };
    let mut out = ShiftOutcome {
        regime: ShiftRegime::Stationary,
        verdict: Verdict::Unknown,
        critical_speed: None,
        decay_exponent: None,
        borderline: false,
    };
    if c == 0.0 || exponent == 0.0 {
        out.verdict = match sign {
            -1 => Verdict::Survive,
            1 => Verdict::Extinct,
            _ => Verdict::Unknown,
        };
        return out;
    }
    if exponent > 1.0 + EXACT {
        out.regime = ShiftRegime::SuperLinear;
        out.verdict = Verdict::Extinct;
        out.decay_exponent = Some(2.0 * exponent - 1.0);
        return out;
    }
    if sign > 0 {
        out.regime = ShiftRegime::FixedDomainExtinction;
        out.verdict = Verdict::Extinct;
        return out;
    }
    if (exponent - 1.0).abs() <= EXACT {
        let cs = 2.0 * (-lambda.min(0.0) * d).sqrt();
        let speed = c.abs();
        out.regime = ShiftRegime::Linear;
        out.critical_speed = Some(cs);
        out.borderline = (speed - cs).abs() <= 1e-9 * cs.max(f64::MIN_POSITIVE);
        out.verdict = if out.borderline || speed < cs { Verdict::Survive } else { Verdict::Extinct };
        return out;
    }
    if sign < 0 {
        out.regime = ShiftRegime::SubLinear;
        out.verdict = Verdict::Survive;
    } else {
        out.regime = ShiftRegime::SubLinearCritical;
        out.borderline = (exponent - 0.5).abs() <= EXACT;
        out.verdict = if exponent < 0.5 - EXACT { Verdict::Survive } else { Verdict::Extinct };
    }
    out
}

/// [`classify_shift`] for a scenario with a power-law shift.
pub fn classify_scenario_shift(s: &Scenario, lambda: f64, tol: f64) -> Result<ShiftOutcome> {
    match s.motion {
        DomainMotion::Fixed { .. } => Ok(classify_shift(0.0, 1.0, s.d, lambda, tol)),
        DomainMotion::PowerShift { c, exponent, .. } => Ok(classify_shift(c, exponent, s.d, lambda, tol)),
        _ => Err(Error::InvalidArgument(format!(
            "shift regimes need a power-law shift of fixed length (got {})",
            s.motion.kind()
        ))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::PeriodicCoefficient;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn grid_extremes(f: impl Fn(f64) -> f64, lo: f64, hi: f64) -> (f64, f64) {
        let n = 100_000;
        (0..=n)
            .map(|i| f(lo + (hi - lo) * i as f64 / n as f64))
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)))
    }

    fn close(x: f64, y: f64, scale: f64) -> bool {
        (x - y).abs() <= 1e-8 * scale.max(1.0)
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn q_extremes_match_grid_search(dda in -5.0..5.0f64, ddl in -5.0..5.0f64, l in 0.2..4.0f64, d in 0.1..3.0f64) {
            let (lo, hi) = q_extremes(d, (0.0, 0.0, dda), (l, 0.0, ddl));
            let (glo, ghi) = grid_extremes(|z| ddl * l / (4.0 * d) * z * z + dda * l / (2.0 * d) * z, 0.0, 1.0);
            let scale = (ddl.abs() + dda.abs()) * l / d;
            prop_assert!(lo <= glo + 1e-12 && hi >= ghi - 1e-12);
            prop_assert!(close(lo, glo, scale) && close(hi, ghi, scale));
        }

        #[test]
        fn p_extremes_match_grid_search(
            l in 0.5..3.0f64, l0 in 0.5..3.0f64, t in 0.0..5.0f64, tau in 0.0..5.0f64,
            amp in 0.0..0.9f64, bmean in -1.0..2.0f64,
        ) {
            let mut s = Scenario::fixed(
                1.0, 2.0,
                PeriodicCoefficient::sine(1.0, amp, 1, 2.0 * PI),
                PeriodicCoefficient::sine(bmean, 0.3, 2, 2.0 * PI),
                l, 10.0,
            );
            s.motion = DomainMotion::Fixed { length: l };
            let (lo, hi) = p_extremes(&s, l0, t, tau);
            let q = l0 * l0 / (l * l);
            let f = |y: f64| 0.5 * (q * s.alpha.eval(tau) * (y - s.beta.eval(tau) * l0).powi(2)
                - s.alpha.eval(t) / q * (y - s.beta.eval(t) * l0).powi(2));
            let (glo, ghi) = grid_extremes(f, 0.0, l0);
            let scale = 10.0 * (q + 1.0 / q) * l0 * l0;
            prop_assert!(lo <= glo + 1e-12 && hi >= ghi - 1e-12);
            prop_assert!(close(lo, glo, scale) && close(hi, ghi, scale));
        }

        #[test]
        fn completed_square_reproduces_reaction(
            d in 0.1..3.0f64, alpha in 0.5..5.0f64, beta in -1.0..2.0f64,
            dda in -3.0..3.0f64, l in 0.5..3.0f64, ddl in -1.0..1.0f64, l0 in 0.5..3.0f64, z in 0.0..1.0f64,
        ) {
            prop_assume!(2.0 * d * alpha * l - ddl > 1e-3);
            let cs = complete_square(d, alpha, beta, (0.0, 0.0, dda), (l, 0.0, ddl)).unwrap();
            let y = z * l0;
            let direct = ddl * l / (4.0 * d * l0 * l0) * y * y + dda * l / (2.0 * d * l0) * y
                - alpha * l * l / (2.0 * l0 * l0) * (y - beta * l0).powi(2);
            let got = cs.reaction(l, l0, y);
            prop_assert!((got - direct).abs() <= 1e-9 * (1.0 + direct.abs() + cs.q.abs()), "{got} vs {direct}");
        }
    }

    #[test]
    fn completed_square_needs_positive_denominator() {
        assert!(complete_square(1.0, 1.0, 0.5, (0.0, 0.0, 0.0), (1.0, 0.0, 2.0)).unwrap_err().is_validation());
    }

    #[test]
    fn static_habitat_square_is_trivial() {
        let s = Scenario::fixed(
            0.7,
            3.0,
            PeriodicCoefficient::sine(2.0, 0.5, 1, 1.0),
            PeriodicCoefficient::sine(0.3, 0.2, 2, 1.0),
            1.8,
            1.0,
        );
        for (t, c) in complete_square_on_grid(&s, 50).unwrap() {
            assert!(c.q.abs() < 1e-12 * (1.0 + s.alpha.eval(t)));
            assert!((c.alpha_tilde - s.alpha.eval(t)).abs() < 1e-12);
            assert!((c.beta_tilde - s.beta.eval(t)).abs() < 1e-12);
        }
        let big = complete_square(1e8, 2.0, 0.3, (0.0, 0.0, 0.5), (1.0, 0.0, 0.2)).unwrap();
        assert!((big.alpha_tilde - 2.0).abs() < 1e-6 && (big.beta_tilde - 0.3).abs() < 1e-6);
    }

    #[test]
    fn clock_of_linear_growth_and_inverse() {
        let (l0, k, horizon) = (1.5, 0.7, 4.0);
        let c = Cumulative::integrate(horizon, 2000, |t| l0 * l0 / (l0 + k * t).powi(2)).unwrap();
        for &t in &[0.0, 0.123, 1.0, 2.71, 4.0] {
            let exact = l0 * t / (l0 + k * t);
            assert!((c.eval(t) - exact).abs() < 1e-12, "{t}");
            let back = c.inverse(exact).unwrap();
            assert!((back - t).abs() < 1e-10, "{t} -> {back}");
        }
        assert!(c.inverse(10.0).is_err());
    }

    #[test]
    fn fixed_domain_bounds_are_eigenfunction_multiples() {
        let s = Scenario::fixed(
            1.0,
            4.0,
            PeriodicCoefficient::sine(2.0, 0.5, 1, 2.0 * PI),
            PeriodicCoefficient::constant(0.4, 2.0 * PI),
            2.0,
            3.0,
        );
        let mut opts = EnvelopeOptions::default();
        opts.floquet.nodes = 201;
        opts.floquet.steps = 400;
        opts.intervals = 500;
        let env = build_envelope(&s, &opts).unwrap();
        assert!(env.a > 0.0 && env.a < env.b);
        for &t in &[0.5, 1.7, 3.0] {
            let (lo, hi) = env.exponents(t);
            assert!((lo + env.lambda * t).abs() < 1e-10);
            assert!((hi + env.lambda * t).abs() < 1e-10);
            let y = 0.8;
            let phi = env.eigenfunction.eval(t, y);
            let expect = env.b * phi * (-env.lambda * t).exp();
            assert!((env.upper(t, y) - expect).abs() <= 1e-10 * expect);
        }
    }

    #[test]
    fn eigenfunction_datum_gives_equal_constants() {
        let s = Scenario::fixed(
            1.0,
            4.0,
            PeriodicCoefficient::constant(2.0, 1.0),
            PeriodicCoefficient::constant(0.5, 1.0),
            2.0,
            1.0,
        );
        let mut opts = EnvelopeOptions::default();
        opts.floquet.nodes = 101;
        opts.floquet.steps = 100;
        opts.intervals = 100;
        let phi = floquet_lambda(&s, 2.0, &opts.floquet).unwrap().eigenfunction;
        let env = build_envelope_with(&s, &opts, |y| 3.0 * phi.eval(0.0, y)).unwrap();
        assert!((env.a - 3.0).abs() < 1e-9 && (env.b - 3.0).abs() < 1e-9, "{} {}", env.a, env.b);
        assert!(build_envelope_with(&s, &opts, |_| 0.0).is_err());
    }

    #[test]
    fn singular_motion_is_rejected() {
        let mut s = crate::recipes::bundled("ex4-5-left").unwrap();
        s.horizon = 1.0;
        assert!(build_envelope(&s, &EnvelopeOptions::default()).is_err());
    }

    #[test]
    fn shift_regimes() {
        let d = 1.0;
        let lam = -1.0;
        let cs = 2.0;
        let v = |c: f64, a: f64, l: f64| classify_shift(c, a, d, l, 1e-4).verdict;
        assert_eq!(v(1.0, 1.35, lam), Verdict::Extinct);
        assert_eq!(v(1.0, 0.5, lam), Verdict::Survive);
        assert_eq!(v(0.5 * cs, 1.0, lam), Verdict::Survive);
        assert_eq!(v(1.5 * cs, 1.0, lam), Verdict::Extinct);
        let edge = classify_shift(cs, 1.0, d, lam, 1e-4);
        assert!(edge.borderline && edge.verdict == Verdict::Survive);
        assert_eq!(v(1.0, 0.3, 0.0), Verdict::Survive);
        assert_eq!(v(1.0, 0.5, 5e-5), Verdict::Extinct);
        assert!(classify_shift(1.0, 0.5, d, 0.0, 1e-4).borderline);
        assert_eq!(v(1.0, 0.7, 0.0), Verdict::Extinct);
        assert_eq!(classify_shift(1.0, 0.5, d, 0.3, 1e-4).regime, ShiftRegime::FixedDomainExtinction);
        assert_eq!(v(0.0, 2.0, -0.3), Verdict::Survive);
        assert_eq!(classify_shift(1.0, 2.0, d, -1.0, 1e-4).decay_exponent, Some(3.0));
    }

    #[test]
    fn linear_regime_is_monotone_in_speed() {
        let mut prev = Verdict::Survive;
        for i in 0..200 {
            let c = i as f64 * 0.02;
            let v = classify_shift(c, 1.0, 0.8, -0.5, 1e-4).verdict;
            if prev == Verdict::Extinct {
                assert_eq!(v, Verdict::Extinct, "c = {c}");
            }
            prev = v;
        }
        assert_eq!(prev, Verdict::Extinct);
    }

    #[test]
    fn frame_transform_round_trip() {
        let mut s = crate::recipes::bundled("ex4-8-slow").unwrap();
        s.horizon = 1.0;
        let tr = FrameTransform { l0: 2.0 };
        for &(t, x) in &[(0.3, 0.5), (0.9, 1.2)] {
            let y = tr.to_y(&s, t, x);
            assert!((tr.to_x(&s, t, y) - x).abs() < 1e-14);
        }
    }
}
