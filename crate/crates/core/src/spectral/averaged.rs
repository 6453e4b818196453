//! Smallest eigenvalue of `-d Ψ'' + (⟨α⟩/2)(y - m L)² Ψ` on `(0, L)` with
//! Dirichlet conditions.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::linalg::solve_tridiagonal;

/// Intervals of the coarser of the two grids combined by extrapolation.
pub const DEFAULT_INTERVALS: usize = 2000;

/// Smallest Dirichlet eigenvalue of `-d u'' + V(y) u` on `(0, length)`,
/// second-order differences on `intervals` cells, Richardson-extrapolated
/// against the grid with twice as many cells.
pub fn smallest_eigenvalue(d: f64, length: f64, potential: impl Fn(f64) -> f64, intervals: usize) -> Result<f64> {
    let coarse = discrete_smallest(d, length, &potential, intervals)?;
    let fine = discrete_smallest(d, length, &potential, 2 * intervals)?;
    Ok((4.0 * fine - coarse) / 3.0)
}

fn discrete_smallest(d: f64, length: f64, potential: &impl Fn(f64) -> f64, intervals: usize) -> Result<f64> {
    let n = intervals - 1;
    let h = length / intervals as f64;
    let k = d / (h * h);
    let diag: Vec<f64> = (1..=n).map(|i| 2.0 * k + potential(i as f64 * h)).collect();
    let off = -k;

    // Bisection on the Sturm count isolates the lowest eigenvalue; Gershgorin
    // gives the initial bracket.
    let mut lo = diag.iter().fold(f64::INFINITY, |m, &a| m.min(a)) - 2.0 * k;
    let mut hi = diag[0].min(diag[n - 1]).max(lo) + 2.0 * k;
    while count_below(&diag, off, hi) == 0 {
        hi += (hi - lo).max(1.0);
    }
    let scale = hi.abs().max(lo.abs()).max(1.0);
    while hi - lo > 1e-9 * scale {
        let mid = 0.5 * (lo + hi);
        if count_below(&diag, off, mid) >= 1 {
            hi = mid;
        } else {
            lo = mid;
        }
    }

    // Inverse iteration just below the bracket, finished by the Rayleigh
    // quotient, which is second-order accurate in the eigenvector error.
    let shift = lo - 1e-6 * scale;
    let shifted: Vec<f64> = diag.iter().map(|a| a - shift).collect();
    let lower = vec![off; n];
    let upper = vec![off; n];
    let mut v: Vec<f64> = (1..=n).map(|i| (PI * i as f64 / intervals as f64).sin()).collect();
    let mut scratch = Vec::new();
    let mut prev = f64::INFINITY;
    for _ in 0..100 {
        let mut x = v.clone();
        if !solve_tridiagonal(&lower, &shifted, &upper, &mut x, &mut scratch) {
            return Err(Error::Numerical("singular shifted matrix in inverse iteration".into()));
        }
        let norm = x.iter().map(|a| a * a).sum::<f64>().sqrt();
        v = x.into_iter().map(|a| a / norm).collect();
        let rq = rayleigh(&diag, off, &v);
        if (rq - prev).abs() <= 1e-14 * scale {
            return Ok(rq);
        }
        prev = rq;
    }
    Err(Error::NoConvergence {
        what: "inverse iteration for the averaged eigenvalue",
        iterations: 100,
        residual: (rayleigh(&diag, off, &v) - prev).abs(),
    })
}

/// Number of eigenvalues of the symmetric tridiagonal matrix below `x`.
fn count_below(diag: &[f64], off: f64, x: f64) -> usize {
    let mut count = 0;
    let mut q = 1.0;
    for (i, &a) in diag.iter().enumerate() {
        q = a - x - if i > 0 { off * off / q } else { 0.0 };
        if q == 0.0 {
            q = -f64::EPSILON * (a.abs() + x.abs()).max(1.0);
        }
        if q < 0.0 {
            count += 1;
        }
    }
    count
}

fn rayleigh(diag: &[f64], off: f64, v: &[f64]) -> f64 {
    let n = v.len();
    let mut num = 0.0;
    for i in 0..n {
        let mut av = diag[i] * v[i];
        if i > 0 {
            av += off * v[i - 1];
        }
        if i + 1 < n {
            av += off * v[i + 1];
        }
        num += v[i] * av;
    }
    num / v.iter().map(|a| a * a).sum::<f64>()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_potential_gives_dirichlet_laplacian() {
        let mu = smallest_eigenvalue(2.0, 1.5, |_| 0.0, 500).unwrap();
        let exact = 2.0 * PI * PI / 2.25;
        assert!((mu - exact).abs() < 1e-8 * exact, "{mu} vs {exact}");
    }

    #[test]
    fn harmonic_oscillator_on_wide_interval() {
        // -u'' + c y² u on ℝ has ground energy √c; the box walls are negligible here.
        let mu = smallest_eigenvalue(1.0, 20.0, |y| 0.25 * (y - 10.0).powi(2), 2000).unwrap();
        assert!((mu - 0.5).abs() < 1e-8, "{mu}");
    }

    #[test]
    fn sturm_count_matches_known_spectrum() {
        // Dirichlet Laplacian stencil: eigenvalues 2 - 2cos(kπ/(n+1)).
        let n = 9;
        let diag = vec![2.0; n];
        let ev = |k: usize| 2.0 - 2.0 * (k as f64 * PI / (n + 1) as f64).cos();
        assert_eq!(count_below(&diag, -1.0, ev(1) - 1e-9), 0);
        assert_eq!(count_below(&diag, -1.0, ev(3) + 1e-9), 3);
        assert_eq!(count_below(&diag, -1.0, 4.1), n);
    }
}
