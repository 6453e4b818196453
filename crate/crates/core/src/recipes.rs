//! Bundled scenarios for the worked examples and the figure settings.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::fem::{self, FemOptions, Jet, SolutionField};
use crate::oracle::{probe_verdict, step_solver, OracleOptions, OracleRun};
use crate::scenario::{parse_scenario, PeriodicCoefficient, Scenario};
use crate::spectral::Verdict;

const BUNDLED: [(&str, &str); 10] = [
    ("ex4-4", include_str!("../../../scenarios/ex4-4.json")),
    ("ex4-5-left", include_str!("../../../scenarios/ex4-5-left.json")),
    ("ex4-5-right", include_str!("../../../scenarios/ex4-5-right.json")),
    ("ex4-6", include_str!("../../../scenarios/ex4-6.json")),
    ("ex4-7-left", include_str!("../../../scenarios/ex4-7-left.json")),
    ("ex4-7-middle", include_str!("../../../scenarios/ex4-7-middle.json")),
    ("ex4-7-right", include_str!("../../../scenarios/ex4-7-right.json")),
    ("ex4-8-slow", include_str!("../../../scenarios/ex4-8-slow.json")),
    ("ex4-8-fast", include_str!("../../../scenarios/ex4-8-fast.json")),
    ("fig1", include_str!("../../../scenarios/fig1.json")),
];

pub fn bundled_names() -> impl Iterator<Item = &'static str> {
    BUNDLED.iter().map(|(n, _)| *n)
}

/// A bundled scenario by name (e.g. `ex4-6`).
pub fn bundled(name: &str) -> Result<Scenario> {
    let (_, text) = BUNDLED
        .iter()
        .find(|(n, _)| *n == name)
        .ok_or_else(|| Error::InvalidArgument(format!("no bundled scenario named {name:?}")))?;
    parse_scenario(text)
}

/// Selection-free benchmark `u_t = d u_xx + r u` on `(0, L)`, with
/// `d = 1`, `r = 6`, `L = 1.5`. Built directly because `α ≡ 0` is outside
/// the positivity required of parsed configs.
pub fn benchmark(horizon: f64) -> Scenario {
    Scenario::fixed(
        1.0,
        6.0,
        PeriodicCoefficient::constant(0.0, 1.0),
        PeriodicCoefficient::constant(0.5, 1.0),
        1.5,
        horizon,
    )
}

/// Exact solution `sin(πx/L) e^{(r − dπ²/L²)t}` of a selection-free fixed-domain scenario.
pub fn benchmark_exact(s: &Scenario) -> impl Fn(f64, f64) -> Jet + Sync + Send {
    let l = s.motion.length(0.0);
    let k = PI / l;
    let g = s.r - s.d * k * k;
    move |t, x| {
        let e = (g * t).exp();
        let (sn, cs) = (k * x).sin_cos();
        [sn * e, k * cs * e, g * sn * e]
    }
}

/// Phase-diagram setting: `d = 1`, `α ≡ 4`, `β ≡ 1.5`, probe at `t = 2`.
pub fn phase_template() -> Scenario {
    Scenario::fixed(
        1.0,
        10.0,
        PeriodicCoefficient::constant(4.0, 1.0),
        PeriodicCoefficient::constant(1.5, 1.0),
        1.0,
        2.0,
    )
}

/// One configuration of the worked examples with its expected outcome.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ExampleCase {
    pub name: &'static str,
    pub survives: bool,
}

pub const EXAMPLE_CASES: [ExampleCase; 9] = [
    ExampleCase { name: "ex4-4", survives: true },
    ExampleCase { name: "ex4-5-left", survives: true },
    ExampleCase { name: "ex4-5-right", survives: true },
    ExampleCase { name: "ex4-6", survives: false },
    ExampleCase { name: "ex4-7-left", survives: false },
    ExampleCase { name: "ex4-7-middle", survives: true },
    ExampleCase { name: "ex4-7-right", survives: false },
    ExampleCase { name: "ex4-8-slow", survives: true },
    ExampleCase { name: "ex4-8-fast", survives: false },
];

/// Default FEM mesh `(nt, nx)` for a bundled example.
pub fn example_mesh(name: &str) -> (usize, usize) {
    match name {
        "ex4-8-slow" => (220, 64),
        "ex4-8-fast" => (300, 128),
        "ex4-6" => (150, 96),
        _ => (120, 48),
    }
}

/// FEM and reference runs of one example, with the `L²` probe of `u(t, ·)`.
#[derive(Debug, Clone)]
pub struct ExampleRun {
    pub name: String,
    pub scenario: Scenario,
    pub field: SolutionField,
    pub oracle: OracleRun,
    pub times: Vec<f64>,
    pub fem_probe: Vec<f64>,
    pub oracle_probe: Vec<f64>,
    pub fem_verdict: Verdict,
    pub oracle_verdict: Verdict,
}

impl ExampleRun {
    /// Rows `t, probe_fem, probe_oracle`.
    pub fn write_probe_csv<W: std::io::Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["t", "probe_fem", "probe_oracle"])?;
        for ((t, f), o) in self.times.iter().zip(&self.fem_probe).zip(&self.oracle_probe) {
            w.write_record([format!("{t:.12e}"), format!("{f:.12e}"), format!("{o:.12e}")])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Solves `s` with both solvers and samples the probe at `samples + 1`
/// evenly spaced times.
pub fn run_example(
    name: &str,
    s: &Scenario,
    mesh: (usize, usize),
    fem_opts: &FemOptions,
    oracle_opts: &OracleOptions,
    samples: usize,
) -> Result<ExampleRun> {
    let samples = samples.max(1);
    let times: Vec<f64> = (0..=samples).map(|k| s.horizon * k as f64 / samples as f64).collect();
    let field = fem::run(s, mesh.0, mesh.1, fem_opts)?;
    let oracle = step_solver(s, oracle_opts)?;
    let fem_probe = times.iter().map(|&t| field.slice_l2(t)).collect::<Result<Vec<_>>>()?;
    let oracle_probe: Vec<f64> = times
        .iter()
        .map(|&t| {
            let p = oracle
                .trace
                .iter()
                .min_by(|a, b| (a.t - t).abs().total_cmp(&(b.t - t).abs()))
                .expect("trace is never empty");
            p.log_l2_u.exp()
        })
        .collect();
    let fem_verdict = probe_verdict((fem_probe[samples] / fem_probe[0]).ln());
    let oracle_verdict = probe_verdict(oracle.log_growth());
    Ok(ExampleRun {
        name: name.to_owned(),
        scenario: s.clone(),
        field,
        oracle,
        times,
        fem_probe,
        oracle_probe,
        fem_verdict,
        oracle_verdict,
    })
}

/// [`run_example`] for a bundled example at its default resolution.
pub fn run_bundled_example(name: &str) -> Result<ExampleRun> {
    let s = bundled(name)?;
    run_example(name, &s, example_mesh(name), &FemOptions::default(), &OracleOptions::default(), 40)
}
