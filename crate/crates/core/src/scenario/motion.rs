use crate::error::{Error, Result};
use crate::linalg::solve_tridiagonal;

/// Natural cubic spline through tabulated points (C² everywhere).
#[derive(Debug, Clone, PartialEq)]
pub struct CubicSpline {
    knots: Vec<f64>,
    values: Vec<f64>,
    /// Second derivatives at the knots.
    curvature: Vec<f64>,
}

impl CubicSpline {
    pub fn new(knots: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        let n = knots.len();
        if n < 3 || values.len() != n {
            return Err(Error::InvalidArgument(format!(
                "spline needs >= 3 knots with matching values (got {n} knots, {} values)",
                values.len()
            )));
        }
        if knots.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidArgument("spline knots must be strictly increasing".into()));
        }
        let m = n - 2;
        let mut lower = vec![0.0; m];
        let mut diag = vec![0.0; m];
        let mut upper = vec![0.0; m];
        let mut rhs = vec![0.0; m];
        for i in 0..m {
            let h0 = knots[i + 1] - knots[i];
            let h1 = knots[i + 2] - knots[i + 1];
            lower[i] = h0 / 6.0;
            diag[i] = (h0 + h1) / 3.0;
            upper[i] = h1 / 6.0;
            rhs[i] = (values[i + 2] - values[i + 1]) / h1 - (values[i + 1] - values[i]) / h0;
        }
        let mut scratch = Vec::new();
        if !solve_tridiagonal(&lower, &diag, &upper, &mut rhs, &mut scratch) {
            return Err(Error::Numerical("singular spline system".into()));
        }
        let mut curvature = vec![0.0; n];
        curvature[1..n - 1].copy_from_slice(&rhs);
        Ok(CubicSpline {
            knots,
            values,
            curvature,
        })
    }

    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn range(&self) -> (f64, f64) {
        (self.knots[0], *self.knots.last().unwrap())
    }

    fn interval(&self, t: f64) -> usize {
        let n = self.knots.len();
        match self.knots.partition_point(|&k| k <= t) {
            0 => 0,
            p if p >= n => n - 2,
            p => p - 1,
        }
    }

    /// Value, first and second derivative at `t`.
    pub fn eval3(&self, t: f64) -> (f64, f64, f64) {
        let i = self.interval(t);
        let (t0, t1) = (self.knots[i], self.knots[i + 1]);
        let h = t1 - t0;
        let (y0, y1) = (self.values[i], self.values[i + 1]);
        let (m0, m1) = (self.curvature[i], self.curvature[i + 1]);
        let a = (t1 - t) / h;
        let b = (t - t0) / h;
        let f = a * y0 + b * y1 + ((a * a * a - a) * m0 + (b * b * b - b) * m1) * h * h / 6.0;
        let df = (y1 - y0) / h + (-(3.0 * a * a - 1.0) * m0 + (3.0 * b * b - 1.0) * m1) * h / 6.0;
        let ddf = a * m0 + b * m1;
        (f, df, ddf)
    }
}

/// Motion of the habitat `(A(t), A(t) + L(t))`.
#[derive(Debug, Clone, PartialEq)]
pub enum DomainMotion {
    /// `A ≡ 0`, `L ≡ length`.
    Fixed { length: f64 },
    /// `A(t) = offset + c·(t0 + t)^exponent`, `L ≡ length`.
    PowerShift {
        c: f64,
        exponent: f64,
        t0: f64,
        offset: f64,
        length: f64,
    },
    /// `A ≡ 0`, `L(t) = length + slope·t`.
    LinearGrowth { length: f64, slope: f64 },
    /// Tabulated `A`, `L` interpolated by natural cubic splines.
    Custom { shift: CubicSpline, length: CubicSpline },
}

/// `(f, f', f'')` at one instant.
pub type Jet = (f64, f64, f64);

impl DomainMotion {
    pub fn kind(&self) -> &'static str {
        match self {
            DomainMotion::Fixed { .. } => "fixed",
            DomainMotion::PowerShift { .. } => "power_shift",
            DomainMotion::LinearGrowth { .. } => "linear_growth",
            DomainMotion::Custom { .. } => "custom",
        }
    }

    pub fn is_fixed(&self) -> bool {
        matches!(self, DomainMotion::Fixed { .. })
    }

    /// `A`, `Ȧ`, `Ä` at `t`.
    pub fn shift_jet(&self, t: f64) -> Jet {
        match *self {
            DomainMotion::Fixed { .. } | DomainMotion::LinearGrowth { .. } => (0.0, 0.0, 0.0),
            DomainMotion::PowerShift {
                c, exponent, t0, offset, ..
            } => {
                let s = t0 + t;
                let p = exponent;
                if p == 0.0 {
                    return (offset + c, 0.0, 0.0);
                }
                let a = offset + c * s.powf(p);
                let da = c * p * s.powf(p - 1.0);
                let dda = if p == 1.0 { 0.0 } else { c * p * (p - 1.0) * s.powf(p - 2.0) };
                (a, da, dda)
            }
            DomainMotion::Custom { ref shift, .. } => shift.eval3(t),
        }
    }

    /// `L`, `L̇`, `L̈` at `t`.
    pub fn length_jet(&self, t: f64) -> Jet {
        match *self {
            DomainMotion::Fixed { length } | DomainMotion::PowerShift { length, .. } => (length, 0.0, 0.0),
            DomainMotion::LinearGrowth { length, slope } => (length + slope * t, slope, 0.0),
            DomainMotion::Custom { ref length, .. } => length.eval3(t),
        }
    }

    pub fn shift(&self, t: f64) -> f64 {
        self.shift_jet(t).0
    }

    pub fn length(&self, t: f64) -> f64 {
        self.length_jet(t).0
    }

    /// Left and right habitat endpoints at `t`.
    pub fn bounds(&self, t: f64) -> (f64, f64) {
        let a = self.shift(t);
        (a, a + self.length(t))
    }

    /// Range of times covered by a tabulated motion, if any.
    pub fn table_range(&self) -> Option<(f64, f64)> {
        match self {
            DomainMotion::Custom { shift, length } => {
                let (a0, a1) = shift.range();
                let (l0, l1) = length.range();
                Some((a0.max(l0), a1.min(l1)))
            }
            _ => None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel_close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * (1.0 + b.abs())
    }

    #[test]
    fn power_shift_derivatives_match_central_differences() {
        let m = DomainMotion::PowerShift {
            c: 1.3,
            exponent: 1.35,
            t0: 1.0,
            offset: 0.0,
            length: 3.0,
        };
        for &t in &[0.2, 1.0, 3.7, 12.0] {
            let h = 1e-4 * (1.0 + t);
            let (_, da, dda) = m.shift_jet(t);
            let fd1 = (m.shift(t + h) - m.shift(t - h)) / (2.0 * h);
            let fd2 = (m.shift(t + h) - 2.0 * m.shift(t) + m.shift(t - h)) / (h * h);
            assert!(rel_close(fd1, da, 1e-6), "t={t}");
            assert!(rel_close(fd2, dda, 1e-6), "t={t}: {fd2} vs {dda}");
        }
    }

    #[test]
    fn linear_growth_jet() {
        let m = DomainMotion::LinearGrowth { length: 1.0, slope: 0.3 };
        assert_eq!(m.length_jet(2.0), (1.6, 0.3, 0.0));
        assert_eq!(m.shift_jet(2.0), (0.0, 0.0, 0.0));
    }

    #[test]
    fn spline_reproduces_cubic_free_data_and_derivatives() {
        // A natural spline through a straight line is the line itself.
        let knots: Vec<f64> = (0..8).map(|i| i as f64 * 0.5).collect();
        let values: Vec<f64> = knots.iter().map(|t| 2.0 + 0.25 * t).collect();
        let s = CubicSpline::new(knots, values).unwrap();
        let (f, df, ddf) = s.eval3(1.234);
        assert!((f - (2.0 + 0.25 * 1.234)).abs() < 1e-14);
        assert!((df - 0.25).abs() < 1e-13);
        assert!(ddf.abs() < 1e-13);
    }

    #[test]
    fn spline_is_twice_continuous_at_knots() {
        let knots: Vec<f64> = (0..12).map(|i| i as f64 * 0.4).collect();
        let values: Vec<f64> = knots.iter().map(|t| (t * 1.1f64).sin()).collect();
        let s = CubicSpline::new(knots.clone(), values).unwrap();
        for &k in &knots[1..11] {
            let (f0, d0, dd0) = s.eval3(k - 1e-12);
            let (f1, d1, dd1) = s.eval3(k + 1e-12);
            assert!((f0 - f1).abs() < 1e-10 && (d0 - d1).abs() < 1e-9 && (dd0 - dd1).abs() < 1e-8);
        }
    }
}
