//! Gauss–Legendre rules on intervals and a degree-4 rule on triangles.

use std::f64::consts::PI;

/// Nodes and weights of the `n`-point Gauss–Legendre rule on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n > 0, "rule needs at least one node");
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        // Tricomi initial guess, then Newton on P_n.
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, x);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// A Gauss–Legendre rule mapped to `[0, 1]`.
#[derive(Debug, Clone)]
pub struct UnitRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl UnitRule {
    pub fn new(n: usize) -> Self {
        let (x, w) = gauss_legendre(n);
        UnitRule {
            nodes: x.iter().map(|&x| 0.5 * (x + 1.0)).collect(),
            weights: w.iter().map(|&w| 0.5 * w).collect(),
        }
    }

    /// Integral of `f` over `[a, b]` with this rule.
    pub fn integrate(&self, a: f64, b: f64, f: impl Fn(f64) -> f64) -> f64 {
        let len = b - a;
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&s, &w)| w * f(a + s * len))
            .sum::<f64>()
            * len
    }

    /// Composite rule with `panels` equal sub-intervals.
    pub fn composite(&self, a: f64, b: f64, panels: usize, f: impl Fn(f64) -> f64) -> f64 {
        let step = (b - a) / panels as f64;
        (0..panels)
            .map(|p| {
                let lo = a + p as f64 * step;
                self.integrate(lo, lo + step, &f)
            })
            .sum()
    }
}

/// Symmetric 6-point rule on the reference triangle, exact for degree 4.
/// Points are barycentric `(l0, l1, l2)`; weights sum to one.
pub const TRIANGLE_RULE: [([f64; 3], f64); 6] = {
    const A: f64 = 0.445_948_490_915_964_9;
    const WA: f64 = 0.223_381_589_678_011_47;
    const B: f64 = 0.091_576_213_509_770_74;
    const WB: f64 = 0.109_951_743_655_321_87;
    [
        ([1.0 - 2.0 * A, A, A], WA),
        ([A, 1.0 - 2.0 * A, A], WA),
        ([A, A, 1.0 - 2.0 * A], WA),
        ([1.0 - 2.0 * B, B, B], WB),
        ([B, 1.0 - 2.0 * B, B], WB),
        ([B, B, 1.0 - 2.0 * B], WB),
    ]
};
