use std::f64::consts::TAU;

/// One sine mode `amp · sin(k·ω·t + phase)` with `ω = 2π/T`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Harmonic {
    pub amp: f64,
    pub k: u32,
    pub phase: f64,
}

/// A `T`-periodic coefficient: a mean plus a finite sine series.
#[derive(Debug, Clone, PartialEq)]
pub struct PeriodicCoefficient {
    pub mean: f64,
    pub harmonics: Vec<Harmonic>,
    pub period: f64,
}

impl PeriodicCoefficient {
    pub fn constant(mean: f64, period: f64) -> Self {
        PeriodicCoefficient {
            mean,
            harmonics: Vec::new(),
            period,
        }
    }

    /// `mean + amp·sin(k·ω·t)`.
    pub fn sine(mean: f64, amp: f64, k: u32, period: f64) -> Self {
        Self::constant(mean, period).with_harmonic(amp, k, 0.0)
    }

    pub fn with_harmonic(mut self, amp: f64, k: u32, phase: f64) -> Self {
        self.harmonics.push(Harmonic { amp, k, phase });
        self
    }

    pub fn omega(&self) -> f64 {
        TAU / self.period
    }

    pub fn is_constant(&self) -> bool {
        self.harmonics.iter().all(|h| h.amp == 0.0)
    }

    pub fn eval(&self, t: f64) -> f64 {
        if self.harmonics.is_empty() {
            return self.mean;
        }
        // Reducing modulo the period first keeps eval(t + T) == eval(t)
        // to rounding even for large t.
        let s = t.rem_euclid(self.period);
        let w = self.omega();
        self.mean
            + self
                .harmonics
                .iter()
                .map(|h| h.amp * (h.k as f64 * w * s + h.phase).sin())
                .sum::<f64>()
    }

    pub fn derivative(&self, t: f64) -> f64 {
        let s = t.rem_euclid(self.period);
        let w = self.omega();
        self.harmonics
            .iter()
            .map(|h| h.amp * h.k as f64 * w * (h.k as f64 * w * s + h.phase).cos())
            .sum()
    }

    /// Sum of absolute amplitudes; `mean ± amplitude_bound` brackets every value.
    pub fn amplitude_bound(&self) -> f64 {
        self.harmonics.iter().map(|h| h.amp.abs()).sum()
    }

    /// Minimum over `samples` equally spaced points of one period.
    pub fn sampled_min(&self, samples: usize) -> f64 {
        (0..samples)
            .map(|i| self.eval(self.period * i as f64 / samples as f64))
            .fold(f64::INFINITY, f64::min)
    }

    pub fn sampled_max(&self, samples: usize) -> f64 {
        (0..samples)
            .map(|i| self.eval(self.period * i as f64 / samples as f64))
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn sample() -> PeriodicCoefficient {
        PeriodicCoefficient::sine(0.5, 0.5, 2, std::f64::consts::TAU).with_harmonic(-0.1, 3, 0.7)
    }

    proptest! {
        #[test]
        fn eval_is_periodic(t in -50.0f64..500.0) {
            let c = sample();
            let a = c.eval(t);
            let b = c.eval(t + c.period);
            prop_assert!((a - b).abs() <= 1e-12 * (1.0 + a.abs()));
        }
    }

    #[test]
    fn derivative_matches_central_difference() {
        let c = sample();
        for &t in &[0.1, 1.3, 4.0] {
            let h = 1e-5;
            let fd = (c.eval(t + h) - c.eval(t - h)) / (2.0 * h);
            assert!((fd - c.derivative(t)).abs() < 1e-8);
        }
    }

    #[test]
    fn sine_with_two_t_over_two_pi() {
        // 0.5 + 0.5 sin(2t)
        let c = PeriodicCoefficient::sine(0.5, 0.5, 2, std::f64::consts::TAU);
        assert!((c.eval(0.3) - (0.5 + 0.5 * (0.6f64).sin())).abs() < 1e-15);
    }
}
