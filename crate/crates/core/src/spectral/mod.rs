//! Principal-eigenvalue analytics for the fixed-domain periodic problem:
//! closed-form bounds, the time-averaged elliptic problem, survival
//! criteria, fluctuation design and a numeric Floquet solver.

mod averaged;
mod floquet;
mod report;

use std::f64::consts::PI;

use serde::Serialize;

pub use averaged::smallest_eigenvalue;
pub use floquet::{floquet, Eigenfunction, FloquetOptions, FloquetSolution};
pub use report::{eig_report, EigenReport};

use crate::error::{Error, Result};
use crate::scenario::{periodic_mean, PeriodicCoefficient, Scenario};

/// `(2π² − 3)/(6π²)`: the mean of `(z − 1/2)²`-type terms against `sin²(πz)`.
pub const SINE_MOMENT: f64 = (2.0 * PI * PI - 3.0) / (6.0 * PI * PI);

/// Samples used to decide whether `β(t)` ever enters `(0, 1)`.
const BETA_SAMPLES: usize = 10_000;

/// Minimum over `x ∈ [0, L]` of `(α/2)(x − βL)²`.
pub fn r_minus(alpha: f64, beta: f64, length: f64) -> f64 {
    if (0.0..=1.0).contains(&beta) {
        0.0
    } else {
        let g = 0.5 - (0.5 - beta).abs();
        0.5 * alpha * g * g * length * length
    }
}

/// Maximum over `x ∈ [0, L]` of `(α/2)(x − βL)²`.
pub fn r_plus(alpha: f64, beta: f64, length: f64) -> f64 {
    let g = 0.5 + (0.5 - beta).abs();
    0.5 * alpha * g * g * length * length
}

/// Which estimate produced a pair of eigenvalue bounds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundSource {
    /// Lower bound from the pointwise minimum of the selection term, upper
    /// bound from the sine test function.
    SineTest,
    /// Both bounds from pointwise extrema of the selection term.
    Extremal,
    /// Bounds on the averaged elliptic eigenvalue.
    Averaged,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EigenBounds {
    pub lower: f64,
    pub upper: f64,
    pub source: BoundSource,
}

/// Period averages `⟨α⟩`, `⟨αβ⟩`, `⟨αβ²⟩`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Moments {
    pub alpha: f64,
    pub alpha_beta: f64,
    pub alpha_beta2: f64,
}

impl Moments {
    pub fn of(alpha: &PeriodicCoefficient, beta: &PeriodicCoefficient) -> Self {
        let t = alpha.period;
        Moments {
            alpha: periodic_mean(|s| alpha.eval(s), t),
            alpha_beta: periodic_mean(|s| alpha.eval(s) * beta.eval(s), t),
            alpha_beta2: periodic_mean(|s| alpha.eval(s) * beta.eval(s).powi(2), t),
        }
    }

    /// Weighted mean position of the optimum, `⟨αβ⟩/⟨α⟩`.
    pub fn centre(&self) -> f64 {
        self.alpha_beta / self.alpha
    }
}

fn dirichlet(d: f64, length: f64) -> f64 {
    d * PI * PI / (length * length)
}

fn check_length(length: f64) -> Result<()> {
    if length.is_finite() && length > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("length must be positive (got {length})")))
    }
}

/// Sharp bounds: `dπ²/L² − r + ⟨R⁻⟩` below, sine-test Rayleigh quotient above.
pub fn bounds_thm21(s: &Scenario, length: f64) -> Result<EigenBounds> {
    s.require_fixed()?;
    check_length(length)?;
    let base = dirichlet(s.d, length) - s.r;
    let m = Moments::of(&s.alpha, &s.beta);
    let lower = base + s.mean_of(|t| r_minus(s.alpha.eval(t), s.beta.eval(t), length));
    let upper = base + length * length * 0.5 * (SINE_MOMENT * m.alpha + m.alpha_beta2 - m.alpha_beta);
    Ok(EigenBounds {
        lower,
        upper,
        source: BoundSource::SineTest,
    })
}

/// Crude bounds from `⟨R⁻⟩` and `⟨R⁺⟩`.
pub fn bounds_prop24(s: &Scenario, length: f64) -> Result<EigenBounds> {
    s.require_fixed()?;
    check_length(length)?;
    let base = dirichlet(s.d, length) - s.r;
    Ok(EigenBounds {
        lower: base + s.mean_of(|t| r_minus(s.alpha.eval(t), s.beta.eval(t), length)),
        upper: base + s.mean_of(|t| r_plus(s.alpha.eval(t), s.beta.eval(t), length)),
        source: BoundSource::Extremal,
    })
}

/// Exact eigenvalue `dπ²/L² − ⟨R⟩` when the growth rate does not depend on space.
pub fn lambda_closed_form(growth: &PeriodicCoefficient, d: f64, length: f64) -> f64 {
    dirichlet(d, length) - periodic_mean(|t| growth.eval(t), growth.period)
}

/// The time-averaged elliptic problem.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AveragedProblem {
    pub moments: Moments,
    pub mu_hat: f64,
    pub lambda_hat: f64,
}

/// Solves the averaged problem and checks `μ̂` against its a-priori bracket.
pub fn mu_hat(s: &Scenario, length: f64) -> Result<AveragedProblem> {
    s.require_fixed()?;
    check_length(length)?;
    averaged_problem(s, length)
}

pub(crate) fn averaged_problem(s: &Scenario, length: f64) -> Result<AveragedProblem> {
    let m = Moments::of(&s.alpha, &s.beta);
    let c = m.centre();
    let half_alpha = 0.5 * m.alpha;
    let mu = smallest_eigenvalue(
        s.d,
        length,
        |y| half_alpha * (y - c * length).powi(2),
        averaged::DEFAULT_INTERVALS,
    )?;
    let lo = dirichlet(s.d, length);
    let hi = lo + length * length * half_alpha * (SINE_MOMENT + c * (c - 1.0));
    let slack = 1e-7 * hi.abs().max(1.0);
    if !(mu > lo - slack && mu < hi + slack) {
        return Err(Error::Numerical(format!(
            "averaged eigenvalue {mu} escapes its bracket ({lo}, {hi})"
        )));
    }
    let l2 = length * length;
    Ok(AveragedProblem {
        moments: m,
        mu_hat: mu,
        lambda_hat: mu - s.r - 0.5 * l2 * (m.alpha_beta * m.alpha_beta / m.alpha - m.alpha_beta2),
    })
}

/// Principal eigenpair of the scenario's coefficients posed on `(0, length)`
/// (the habitat motion is ignored).
pub fn floquet_lambda(s: &Scenario, length: f64, opts: &FloquetOptions) -> Result<FloquetSolution> {
    check_length(length)?;
    let growth = scenario_growth(s, length);
    floquet(s.d, length, s.period, &growth, opts)
}

/// `R(t, y) = r − (α(t)/2)(y − β(t) L)²` on the fixed interval `(0, L)`.
pub fn scenario_growth(s: &Scenario, length: f64) -> impl Fn(f64, &[f64], &mut [f64]) + Sync + '_ {
    move |t, y, out| {
        let a = 0.5 * s.alpha.eval(t);
        let c = s.beta.eval(t) * length;
        for (o, &yi) in out.iter_mut().zip(y) {
            *o = s.r - a * (yi - c) * (yi - c);
        }
    }
}

/// Extinction threshold `2dπ²⟨α(1/2 − |1/2 − β|)²⟩`.
pub fn delta_minus(s: &Scenario) -> f64 {
    2.0 * s.d
        * PI
        * PI
        * s.mean_of(|t| {
            let g = 0.5 - (0.5 - s.beta.eval(t)).abs();
            s.alpha.eval(t) * g * g
        })
}

/// Survival threshold `2dπ²((2π²−3)/(6π²)⟨α⟩ + ⟨αβ²⟩ − ⟨αβ⟩)`.
pub fn delta_plus(s: &Scenario) -> f64 {
    let m = Moments::of(&s.alpha, &s.beta);
    2.0 * s.d * PI * PI * (SINE_MOMENT * m.alpha + m.alpha_beta2 - m.alpha_beta)
}

/// True when the sampled `β(t)` never enters the open interval `(0, 1)`.
pub fn beta_outside_unit(beta: &PeriodicCoefficient) -> bool {
    (0..BETA_SAMPLES).all(|i| {
        let b = beta.eval(beta.period * i as f64 / BETA_SAMPLES as f64);
        b <= 0.0 || b >= 1.0
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Extinct,
    Survive,
    Unknown,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Extinct => "extinct",
            Verdict::Survive => "survive",
            Verdict::Unknown => "unknown",
        }
    }
}

/// Rule that decided a [`Classification`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Criterion {
    /// `L ≤ √(dπ²/r)`.
    SmallDomain,
    /// Positive lower bound (needs `β(t) ∉ (0, 1)`).
    ExtinctionBound,
    /// Negative upper bound.
    SurvivalBound,
    /// Sign of a computed eigenvalue.
    NumericEigenvalue,
    None,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Classification {
    pub verdict: Verdict,
    pub criterion: Criterion,
    /// Range of lengths certified to survive, when the survival bound applies.
    pub survival_interval: Option<(f64, f64)>,
    /// Extinction window `(L_lo, L_hi)`: extinct for `L ≤ L_lo` or `L ≥ L_hi`.
    pub extinction_window: Option<(f64, f64)>,
    pub delta_minus: f64,
    pub delta_plus: f64,
}

/// Roots in `L` of `δ X² /(4dπ²) − r X + dπ² = 0` with `X = L²`, computed
/// without cancellation. `None` when `r² < δ`.
fn length_roots(d: f64, r: f64, delta: f64) -> Option<(f64, f64)> {
    let disc = r * r - delta;
    if disc < 0.0 {
        return None;
    }
    let s = r + disc.sqrt();
    let c = 2.0 * d * PI * PI;
    let lo = (c / s).sqrt();
    let hi = if delta > 0.0 { (c * s / delta).sqrt() } else { f64::INFINITY };
    Some((lo, hi))
}

/// Survival/extinction verdict for the fixed domain `(0, L)` with growth
/// rate `r` from the closed-form bounds alone.
pub fn classify_fixed(s: &Scenario, length: f64, r: f64) -> Result<Classification> {
    s.require_fixed()?;
    check_length(length)?;
    if !(r > 0.0) {
        return Err(Error::InvalidArgument(format!("r must be positive (got {r})")));
    }
    let dm = delta_minus(s);
    let dp = delta_plus(s);
    let survival_interval = length_roots(s.d, r, dp);
    let outside = beta_outside_unit(&s.beta);
    let extinction_window = if outside {
        // r² ≤ δ⁻ makes every length extinct: an empty survival gap.
        Some(length_roots(s.d, r, dm).unwrap_or((f64::INFINITY, f64::INFINITY)))
    } else {
        None
    };
    let mut out = Classification {
        verdict: Verdict::Unknown,
        criterion: Criterion::None,
        survival_interval,
        extinction_window,
        delta_minus: dm,
        delta_plus: dp,
    };
    if length * length <= s.d * PI * PI / r {
        out.verdict = Verdict::Extinct;
        out.criterion = Criterion::SmallDomain;
    } else if let Some((lo, hi)) = extinction_window {
        if length <= lo || length >= hi {
            out.verdict = Verdict::Extinct;
            out.criterion = Criterion::ExtinctionBound;
        }
    }
    if out.verdict == Verdict::Unknown {
        if let Some((lo, hi)) = survival_interval {
            if length >= lo && length <= hi {
                out.verdict = Verdict::Survive;
                out.criterion = Criterion::SurvivalBound;
            }
        }
    }
    Ok(out)
}

/// Thresholds for periodic forcing `α + a sin ωt` around a constant fitness
/// optimum `β > 1` of strength `α`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FluctuationDesign {
    pub alpha: f64,
    pub a: f64,
    pub beta: f64,
    /// Smallest `β` for which anti-phase forcing can help.
    pub beta_tilde: f64,
    /// Helpful amplitudes `(b₁, b₂)` for `β(t) = β − b sin ωt`, when they exist.
    pub b1: Option<f64>,
    pub b2: Option<f64>,
    /// Harmful amplitudes start above `b₃` for `β(t) = β + b sin ωt`.
    pub b3: f64,
    /// Smallest `β` for which the harmful window `(b₃, β − 1)` is guaranteed nonempty.
    pub hurt_beta_threshold: f64,
}

pub fn fluctuation_thresholds(alpha: f64, a: f64, beta: f64) -> Result<FluctuationDesign> {
    if !(a > 0.0 && a < alpha) {
        return Err(Error::InvalidArgument(format!("need 0 < a < alpha (got a = {a}, alpha = {alpha})")));
    }
    let k = a / alpha;
    let beta_tilde = 0.5 + (1.0 + (k * k * (2.0 * SINE_MOMENT - 1.0) + 1.0).sqrt()) / (k * k);
    let c = beta + SINE_MOMENT - 1.0;
    let p = k * (beta - 0.5);
    let disc = p * p - 2.0 * c;
    let (b1, b2) = if disc >= 0.0 {
        (Some(p - disc.sqrt()), Some(p + disc.sqrt()))
    } else {
        (None, None)
    };
    let q = k * (beta - 1.0);
    let b3 = -q + (q * q + 2.0 * c).sqrt();
    let g = 1.0 + 2.0 * k;
    let hurt_beta_threshold = 1.0 + (1.0 + (1.0 + 2.0 * SINE_MOMENT * g).sqrt()) / g;
    Ok(FluctuationDesign {
        alpha,
        a,
        beta,
        beta_tilde,
        b1,
        b2,
        b3,
        hurt_beta_threshold,
    })
}

/// Anti-phase forcing with amplitude `b` is guaranteed to lower the eigenvalue.
pub fn fluctuations_help(design: &FluctuationDesign, b: f64) -> bool {
    match (design.b1, design.b2) {
        (Some(b1), Some(b2)) => design.beta > design.beta_tilde && b1 < b && b < b2,
        _ => false,
    }
}

/// In-phase forcing with amplitude `b` is guaranteed to raise the eigenvalue.
pub fn fluctuations_hurt(design: &FluctuationDesign, b: f64) -> bool {
    design.beta > design.hurt_beta_threshold && design.b3 < b && b < design.beta - 1.0
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn fixed(d: f64, r: f64, alpha: f64, beta: f64, length: f64) -> Scenario {
        Scenario::fixed(
            d,
            r,
            PeriodicCoefficient::constant(alpha, 1.0),
            PeriodicCoefficient::constant(beta, 1.0),
            length,
            1.0,
        )
    }

    fn grid_extrema(alpha: f64, beta: f64, length: f64) -> (f64, f64) {
        let n = 100_000;
        (0..=n).fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), i| {
            let x = length * i as f64 / n as f64;
            let v = 0.5 * alpha * (x - beta * length).powi(2);
            (lo.min(v), hi.max(v))
        })
    }

    #[test]
    fn r_pm_examples() {
        assert!((r_minus(4.0, 1.5, 1.0) - 0.5).abs() < 1e-15);
        assert!((r_plus(4.0, 1.5, 1.0) - 4.5).abs() < 1e-15);
        assert_eq!(r_minus(3.0, 0.5, 2.0), 0.0);
        assert!((r_plus(3.0, 0.5, 2.0) - 3.0 * 4.0 / 8.0).abs() < 1e-15);
    }

    proptest! {
        #[test]
        fn r_pm_match_grid_search(alpha in 0.1f64..10.0, beta in -2.0f64..3.0, length in 0.2f64..5.0) {
            let (lo, hi) = grid_extrema(alpha, beta, length);
            prop_assert!((r_minus(alpha, beta, length) - lo).abs() <= 1e-8 * (1.0 + hi));
            prop_assert!((r_plus(alpha, beta, length) - hi).abs() <= 1e-8 * (1.0 + hi));
        }
    }

    #[test]
    fn sine_test_bounds_example() {
        let b = bounds_thm21(&fixed(1.0, 0.0, 4.0, 1.5, 1.0), 1.0);
        // r = 0 is rejected by validation but the formula is still defined.
        let b = b.unwrap();
        assert!((b.lower - (PI * PI + 0.5)).abs() < 1e-10);
        assert!((b.upper - (PI * PI + 2.0 * (SINE_MOMENT + 0.75))).abs() < 1e-10);
        assert!((b.upper - 11.935).abs() < 1e-3);
        let p = bounds_prop24(&fixed(1.0, 0.0, 4.0, 1.5, 1.0), 1.0).unwrap();
        assert!((p.upper - (PI * PI + 4.5)).abs() < 1e-10);
    }

    #[test]
    fn interior_optimum_has_no_lower_penalty() {
        let b = bounds_thm21(&fixed(2.0, 3.0, 5.0, 0.5, 1.7), 1.7).unwrap();
        assert!((b.lower - (2.0 * PI * PI / 2.89 - 3.0)).abs() < 1e-12);
    }

    #[test]
    fn bounds_reject_moving_domain() {
        let mut s = fixed(1.0, 1.0, 1.0, 0.5, 1.0);
        s.motion = crate::scenario::DomainMotion::LinearGrowth { length: 1.0, slope: 1.0 };
        assert!(matches!(bounds_thm21(&s, 1.0), Err(Error::NonFixedMotion(_))));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(100))]
        #[test]
        fn sine_test_upper_is_below_extremal_upper(
            d in 0.1f64..5.0, alpha in 0.1f64..8.0, a in 0.0f64..0.9, beta in -1.0f64..2.0,
            b in 0.0f64..1.0, length in 0.3f64..5.0,
        ) {
            let t = 2.0 * PI;
            let s = Scenario::fixed(
                d, 1.0,
                PeriodicCoefficient::sine(alpha, a * alpha, 1, t),
                PeriodicCoefficient::sine(beta, b, 1, t).with_harmonic(0.2 * b, 2, 0.3),
                length, 1.0,
            );
            let sharp = bounds_thm21(&s, length).unwrap();
            let crude = bounds_prop24(&s, length).unwrap();
            prop_assert!(sharp.lower < sharp.upper);
            prop_assert!(sharp.upper < crude.upper);
            prop_assert_eq!(sharp.lower, crude.lower);
        }
    }

    #[test]
    fn closed_form_examples() {
        assert!((lambda_closed_form(&PeriodicCoefficient::constant(0.0, 1.0), 1.0, PI) - 1.0).abs() < 1e-14);
        let v = lambda_closed_form(&PeriodicCoefficient::constant(6.0, 1.0), 1.0, 1.5);
        assert!((v - (-1.61351)).abs() < 1e-5);
        let w = lambda_closed_form(&PeriodicCoefficient::sine(6.0, 1.0, 1, 1.0), 1.0, 1.5);
        assert!((v - w).abs() < 1e-10);
    }

    #[test]
    fn averaged_problem_limits() {
        // weak selection: Dirichlet Laplacian
        let weak = mu_hat(&fixed(1.0, 1.0, 1e-9, 0.3, 2.0), 2.0).unwrap();
        assert!((weak.mu_hat - PI * PI / 4.0).abs() < 1e-7);

        // concave increasing in d
        let mus: Vec<f64> = [0.5, 1.0, 2.0, 4.0]
            .iter()
            .map(|&d| mu_hat(&fixed(d, 1.0, 4.0, 1.5, 1.0), 1.0).unwrap().mu_hat)
            .collect();
        for w in mus.windows(2) {
            assert!(w[1] > w[0]);
        }
        // unequal spacing: compare slopes
        let slopes = [(mus[1] - mus[0]) / 0.5, (mus[2] - mus[1]) / 1.0, (mus[3] - mus[2]) / 2.0];
        assert!(slopes[1] <= slopes[0] && slopes[2] <= slopes[1]);

        // vanishing diffusion: potential minimum over the domain
        let s = fixed(1e-4, 1.0, 4.0, 4.0, 1.0);
        let limit = 0.5 * 4.0 * 9.0;
        let mu = mu_hat(&s, 1.0).unwrap().mu_hat;
        assert!((mu - limit).abs() < 0.05 * limit, "{mu}");
    }

    #[test]
    fn lambda_hat_identity() {
        let t = 2.0 * PI;
        let s = Scenario::fixed(
            1.3,
            4.0,
            PeriodicCoefficient::sine(3.0, 1.0, 1, t),
            PeriodicCoefficient::sine(1.2, 0.4, 1, t),
            2.0,
            1.0,
        );
        let avg = mu_hat(&s, 2.0).unwrap();
        let m = avg.moments;
        let expect = avg.mu_hat - 4.0 - 2.0 * (m.alpha_beta.powi(2) / m.alpha - m.alpha_beta2);
        assert!((avg.lambda_hat - expect).abs() < 1e-12);
    }

    #[test]
    fn deltas_for_phase_diagram_parameters() {
        let s = fixed(1.0, 15.0, 4.0, 1.5, 1.0);
        assert!((delta_minus(&s) - 2.0 * PI * PI).abs() < 1e-9);
        assert!((delta_plus(&s) - 81.55).abs() < 0.02);
        assert_eq!(delta_minus(&fixed(1.0, 1.0, 4.0, 0.0, 1.0)), 0.0);
        assert_eq!(delta_minus(&fixed(1.0, 1.0, 4.0, 1.0, 1.0)), 0.0);
    }

    proptest! {
        #[test]
        fn delta_gap_identity(d in 0.1f64..3.0, alpha in 0.1f64..6.0, beta in 1.0f64..4.0) {
            let s = fixed(d, 1.0, alpha, beta, 1.0);
            let gap = delta_plus(&s) - delta_minus(&s);
            let expect = 2.0 * d * PI * PI * (SINE_MOMENT * alpha - alpha * (1.0 - beta));
            prop_assert!((gap - expect).abs() <= 1e-9 * (1.0 + expect.abs()));
            prop_assert!(gap >= 0.0);
        }
    }

    #[test]
    fn classification_examples() {
        let s = fixed(1.0, 15.0, 4.0, 1.5, 1.0);
        let c = classify_fixed(&s, 1.5, 15.0).unwrap();
        assert_eq!(c.verdict, Verdict::Survive);
        let (lo, hi) = c.survival_interval.unwrap();
        assert!((lo - 0.855).abs() < 1e-3 && (hi - 2.5556).abs() < 1e-3, "{lo} {hi}");

        let low_r = classify_fixed(&s, 2.0, 5.0).unwrap();
        assert_eq!(low_r.verdict, Verdict::Unknown);
        assert_eq!(classify_fixed(&s, 3.0, 5.0).unwrap().criterion, Criterion::ExtinctionBound);
        assert_eq!(classify_fixed(&s, 1.6, 5.0).unwrap().verdict, Verdict::Extinct);

        let small = 0.9 * (PI * PI / 15.0f64).sqrt();
        assert_eq!(classify_fixed(&s, small, 15.0).unwrap().criterion, Criterion::SmallDomain);

        // r² ≤ δ⁻: extinct at every length
        let weak = classify_fixed(&s, 1.4, 4.0).unwrap();
        assert_eq!(weak.verdict, Verdict::Extinct);
    }

    #[test]
    fn seasonal_optimum_is_certified_to_survive() {
        let s = Scenario::fixed(
            10.0,
            17.5,
            PeriodicCoefficient::constant(5.0, PI),
            PeriodicCoefficient::sine(0.5, 0.5, 1, PI),
            3.0,
            6.0,
        );
        let c = classify_fixed(&s, 3.0, 17.5).unwrap();
        assert_eq!(c.verdict, Verdict::Survive);
        assert!(c.extinction_window.is_none());
    }

    #[test]
    fn fluctuation_examples() {
        let f = fluctuation_thresholds(2.0, 1.0, 4.0).unwrap();
        assert!((f.b3 - 1.469).abs() < 1e-3, "{}", f.b3);
        assert!((f.hurt_beta_threshold - 2.230).abs() < 1e-3);
        assert!(fluctuations_hurt(&f, 2.0));
        assert!(!fluctuations_hurt(&f, 1.4));
        assert!(!fluctuations_hurt(&f, 3.1));

        let tiny = fluctuation_thresholds(2.0, 1e-4, 4.0).unwrap();
        assert!(tiny.beta_tilde > 1e7);
        assert!(!fluctuations_help(&tiny, 0.1));
        assert!(fluctuation_thresholds(2.0, 2.5, 4.0).is_err());
    }

    proptest! {
        #[test]
        fn help_window_is_positive_and_ordered(alpha in 0.5f64..5.0, k in 0.3f64..0.99, extra in 0.01f64..5.0) {
            let a = k * alpha;
            let probe = fluctuation_thresholds(alpha, a, 2.0).unwrap();
            let f = fluctuation_thresholds(alpha, a, probe.beta_tilde + extra).unwrap();
            let (b1, b2) = (f.b1.unwrap(), f.b2.unwrap());
            prop_assert!(0.0 < b1 && b1 < b2);
            prop_assert!(f.b3 > 0.0);
            prop_assert!(fluctuations_help(&f, 0.5 * (b1 + b2)));
        }
    }
}
