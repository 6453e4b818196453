//! Finite-difference reference solver in the fixed frame `y = (x − A)L0/L`.
//!
//! There the population `v(t, y) = u(t, A + yL/L0)` obeys
//! `v_t = d(L0/L)² v_yy + ((ȦL0 + yL̇)/L) v_y + (r − αL²/(2L0²)(y − βL0)²) v`
//! on `(0, L0)` with homogeneous Dirichlet conditions.

use std::io::Write;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::solve_tridiagonal;
use crate::scenario::{DomainMotion, Scenario};
use crate::spectral::{classify_fixed, floquet_lambda, FloquetOptions, Verdict};

#[derive(Debug, Clone, PartialEq)]
pub struct OracleOptions {
    /// Interior grid nodes.
    pub ny: usize,
    /// Target time step; the actual step divides the horizon evenly.
    pub tau: f64,
    /// Reference length; defaults to `L(0)`.
    pub l0: Option<f64>,
    /// Keep every `k`-th time level (and the last); `None` keeps only checkpoints.
    pub store_every: Option<usize>,
    /// Additional times whose slices are kept (snapped to the time grid).
    pub checkpoints: Vec<f64>,
    /// Stop at this time instead of the scenario horizon.
    pub until: Option<f64>,
}

impl Default for OracleOptions {
    fn default() -> Self {
        OracleOptions {
            ny: 400,
            tau: 1e-3,
            l0: None,
            store_every: None,
            checkpoints: Vec::new(),
            until: None,
        }
    }
}

/// One stored time level; the actual profile is `e^{log_scale}·values`.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleSlice {
    pub t: f64,
    pub log_scale: f64,
    /// Includes the two boundary zeros.
    pub values: Vec<f64>,
}

impl OracleSlice {
    pub fn actual(&self) -> Vec<f64> {
        let s = self.log_scale.exp();
        self.values.iter().map(|v| v * s).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TracePoint {
    pub t: f64,
    /// `ln ‖v(t)‖_{L²(0, L0)}`.
    pub log_l2_v: f64,
    /// `ln ‖u(t)‖_{L²(A, A+L)} = ln ‖v‖ + ½ ln(L/L0)`.
    pub log_l2_u: f64,
    /// `ln ‖v(t)‖_∞`.
    pub log_linf: f64,
    /// Position of the maximum in `y`.
    pub argmax_y: f64,
}

#[derive(Debug, Clone)]
pub struct OracleRun {
    pub l0: f64,
    pub dy: f64,
    pub tau: f64,
    pub slices: Vec<OracleSlice>,
    pub trace: Vec<TracePoint>,
}

impl OracleRun {
    pub fn y(&self) -> Vec<f64> {
        let n = self.slices.first().map_or(0, |s| s.values.len());
        (0..n).map(|i| i as f64 * self.dy).collect()
    }

    /// Stored slice nearest to `t`.
    pub fn slice_near(&self, t: f64) -> Option<&OracleSlice> {
        self.slices
            .iter()
            .min_by(|a, b| (a.t - t).abs().total_cmp(&(b.t - t).abs()))
    }

    /// `ln(probe(T)/probe(0))` with the `L²` norm of `u` as probe.
    pub fn log_growth(&self) -> f64 {
        match (self.trace.first(), self.trace.last()) {
            (Some(a), Some(b)) => b.log_l2_u - a.log_l2_u,
            _ => 0.0,
        }
    }

    pub fn write_trace_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["t", "log_l2_v", "log_l2_u", "log_linf", "argmax_y"])?;
        for p in &self.trace {
            w.write_record([p.t, p.log_l2_v, p.log_l2_u, p.log_linf, p.argmax_y].map(fmt))?;
        }
        w.flush()?;
        Ok(())
    }
}

fn fmt(x: f64) -> String {
    format!("{x:.12e}")
}

/// Coefficients of the `v`-equation at time `t` on grid `y`.
struct Coefficients {
    diffusion: f64,
    advection: Vec<f64>,
    reaction: Vec<f64>,
}

fn coefficients(s: &Scenario, l0: f64, t: f64, y: &[f64]) -> Coefficients {
    let (_, da, _) = s.motion.shift_jet(t);
    let (l, dl, _) = s.motion.length_jet(t);
    let (alpha, beta) = (s.alpha.eval(t), s.beta.eval(t));
    let k = 0.5 * alpha * l * l / (l0 * l0);
    Coefficients {
        diffusion: s.d * l0 * l0 / (l * l),
        advection: y.iter().map(|&y| (da * l0 + y * dl) / l).collect(),
        reaction: y.iter().map(|&y| s.r - k * (y - beta * l0).powi(2)).collect(),
    }
}

/// Tridiagonal rows `(sub, diag, sup)` of the spatial operator on the interior nodes.
fn operator(c: &Coefficients, h: f64) -> Operator {
    let n = c.reaction.len();
    let mut sub = vec![0.0; n];
    let mut diag = vec![0.0; n];
    let mut sup = vec![0.0; n];
    let dd = c.diffusion / (h * h);
    for i in 0..n {
        let b = c.advection[i];
        let (mut lo, mut mid, mut hi) = (dd, -2.0 * dd + c.reaction[i], dd);
        if b.abs() * h / c.diffusion > 2.0 {
            // `+b v_y` carries information from the side b points to.
            if b > 0.0 {
                mid -= b / h;
                hi += b / h;
            } else {
                lo -= b / h;
                mid += b / h;
            }
        } else {
            lo -= 0.5 * b / h;
            hi += 0.5 * b / h;
        }
        sub[i] = lo;
        diag[i] = mid;
        sup[i] = hi;
    }
    (sub, diag, sup)
}

struct Workspace {
    lower: Vec<f64>,
    diag: Vec<f64>,
    upper: Vec<f64>,
    scratch: Vec<f64>,
}

impl Workspace {
    fn new(n: usize) -> Self {
        Workspace {
            lower: vec![0.0; n],
            diag: vec![0.0; n],
            upper: vec![0.0; n],
            scratch: Vec::new(),
        }
    }

    /// `(I − implicit·L) v_new = (I + explicit·L) v`.
    fn step(&mut self, op: &Operator, implicit: f64, explicit: f64, v: &mut [f64], t: f64) -> Result<()> {
        let (sub, mid, sup) = op;
        let n = v.len();
        let mut prev = 0.0;
        for i in 0..n {
            let right = if i + 1 < n { v[i + 1] } else { 0.0 };
            let cur = v[i];
            if explicit != 0.0 {
                v[i] = cur + explicit * (sub[i] * prev + mid[i] * cur + sup[i] * right);
            }
            prev = cur;
            self.lower[i] = -implicit * sub[i];
            self.diag[i] = 1.0 - implicit * mid[i];
            self.upper[i] = -implicit * sup[i];
        }
        if !solve_tridiagonal(&self.lower, &self.diag, &self.upper, v, &mut self.scratch) {
            return Err(Error::Numerical(format!("singular implicit step at t = {t}")));
        }
        Ok(())
    }
}

type Operator = (Vec<f64>, Vec<f64>, Vec<f64>);

/// Crank–Nicolson integration of the `v`-equation (two half-step implicit
/// Euler substeps start the run to damp the non-smooth modes).
pub fn step_solver(s: &Scenario, opts: &OracleOptions) -> Result<OracleRun> {
    if opts.ny < 16 {
        return Err(Error::InvalidArgument(format!("ny must be >= 16 (got {})", opts.ny)));
    }
    if !(opts.tau > 0.0) {
        return Err(Error::InvalidArgument(format!("tau must be positive (got {})", opts.tau)));
    }
    let horizon = opts.until.unwrap_or(s.horizon);
    if !(horizon > 0.0) {
        return Err(Error::InvalidArgument(format!("end time must be positive (got {horizon})")));
    }
    let l0 = opts.l0.unwrap_or_else(|| s.motion.length(0.0));
    if !(l0 > 0.0) {
        return Err(Error::InvalidArgument(format!("L0 must be positive (got {l0})")));
    }
    let n = opts.ny;
    let h = l0 / (n + 1) as f64;
    let y: Vec<f64> = (1..=n).map(|i| i as f64 * h).collect();
    let steps = (horizon / opts.tau).ceil().max(1.0) as usize;
    let tau = horizon / steps as f64;

    let keep: Vec<bool> = {
        let mut keep = vec![false; steps + 1];
        keep[0] = true;
        keep[steps] = true;
        if let Some(k) = opts.store_every {
            for (i, flag) in keep.iter_mut().enumerate() {
                if i % k.max(1) == 0 {
                    *flag = true;
                }
            }
        }
        for &t in &opts.checkpoints {
            if (0.0..=horizon).contains(&t) {
                keep[((t / tau).round() as usize).min(steps)] = true;
            }
        }
        keep
    };

    let (a0, l_init) = (s.motion.shift(0.0), s.motion.length(0.0));
    let mut v: Vec<f64> = y.iter().map(|&y| s.initial_value(a0 + l_init * y / l0)).collect();
    let mut log_scale = 0.0;
    if v.iter().all(|&x| x == 0.0) {
        return Err(Error::InvalidArgument("initial datum vanishes on the grid".into()));
    }

    let mut run = OracleRun {
        l0,
        dy: h,
        tau,
        slices: Vec::new(),
        trace: Vec::with_capacity(steps + 1),
    };
    let record = |run: &mut OracleRun, t: f64, v: &[f64], log_scale: f64, keep: bool| {
        let l2 = (v.iter().map(|x| x * x).sum::<f64>() * h).sqrt();
        let (imax, vmax) = v
            .iter()
            .copied()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |acc, (i, x)| if x > acc.1 { (i, x) } else { acc });
        let l = s.motion.length(t);
        run.trace.push(TracePoint {
            t,
            log_l2_v: log_scale + l2.ln(),
            log_l2_u: log_scale + l2.ln() + 0.5 * (l / l0).ln(),
            log_linf: log_scale + vmax.abs().ln(),
            argmax_y: y[imax],
        });
        if keep {
            let mut values = Vec::with_capacity(v.len() + 2);
            values.push(0.0);
            values.extend_from_slice(v);
            values.push(0.0);
            run.slices.push(OracleSlice { t, log_scale, values });
        }
    };
    record(&mut run, 0.0, &v, log_scale, true);

    let mut ws = Workspace::new(n);
    for step in 1..=steps {
        let t0 = (step - 1) as f64 * tau;
        let t1 = step as f64 * tau;
        if step <= 2 {
            for (t, dt) in [(t0 + 0.5 * tau, 0.5 * tau), (t1, 0.5 * tau)] {
                let op = operator(&coefficients(s, l0, t, &y), h);
                ws.step(&op, dt, 0.0, &mut v, t)?;
            }
        } else {
            let op = operator(&coefficients(s, l0, t0 + 0.5 * tau, &y), h);
            ws.step(&op, 0.5 * tau, 0.5 * tau, &mut v, t1)?;
        }
        let vmax = v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        if !vmax.is_finite() || vmax == 0.0 {
            return Err(Error::Numerical(format!("oracle solution degenerated at t = {t1}")));
        }
        if !(1e-100..=1e100).contains(&vmax) {
            v.iter_mut().for_each(|x| *x /= vmax);
            log_scale += vmax.ln();
        }
        record(&mut run, t1, &v, log_scale, keep[step]);
    }
    Ok(run)
}

/// Grid for [`sweep`]: every `(L, r)` pair is run on a fixed domain.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepAxes {
    pub lengths: Vec<f64>,
    pub rates: Vec<f64>,
}

impl SweepAxes {
    /// `n` evenly spaced values on `[lo, hi]`.
    pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
        if n <= 1 {
            return vec![lo];
        }
        (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepRow {
    pub length: f64,
    pub r: f64,
    pub probe0: f64,
    #[serde(rename = "probeT")]
    pub probe_t: f64,
    /// Growing probe ⇒ survive, shrinking ⇒ extinct, within 1e-9 of one ⇒ unknown.
    pub verdict_numeric: Verdict,
    pub verdict_analytic: Verdict,
    pub lambda_numeric: Option<f64>,
}

impl SweepRow {
    pub const CSV_HEADER: [&'static str; 7] =
        ["L", "r", "probe0", "probeT", "verdict_numeric", "verdict_analytic", "lambda_numeric"];

    pub fn csv_row(&self) -> Vec<String> {
        vec![
            fmt(self.length),
            fmt(self.r),
            fmt(self.probe0),
            fmt(self.probe_t),
            self.verdict_numeric.as_str().into(),
            self.verdict_analytic.as_str().into(),
            self.lambda_numeric.map(fmt).unwrap_or_default(),
        ]
    }
}

/// Verdict from the growth of the probe over the run.
pub fn probe_verdict(log_growth: f64) -> Verdict {
    if log_growth.abs() <= 1e-9 {
        Verdict::Unknown
    } else if log_growth > 0.0 {
        Verdict::Survive
    } else {
        Verdict::Extinct
    }
}

/// Runs the oracle on every `(L, r)` of the grid (fixed domain, probe at the
/// template horizon) in parallel; rows come back in `(L, r)` order.
pub fn sweep(
    template: &Scenario,
    axes: &SweepAxes,
    opts: &OracleOptions,
    eigen: Option<&FloquetOptions>,
) -> Result<Vec<SweepRow>> {
    let cells: Vec<(f64, f64)> = axes
        .lengths
        .iter()
        .flat_map(|&l| axes.rates.iter().map(move |&r| (l, r)))
        .collect();
    cells
        .par_iter()
        .map(|&(length, r)| {
            let mut s = template.clone();
            s.motion = DomainMotion::Fixed { length };
            s.r = r;
            s.c_shift = s.c_shift.max(r + 1.0);
            let mut o = opts.clone();
            o.l0 = None;
            o.store_every = None;
            o.checkpoints.clear();
            let run = step_solver(&s, &o)?;
            let (first, last) = (run.trace[0], *run.trace.last().expect("trace has the final level"));
            let lambda_numeric = match eigen {
                Some(fo) => Some(floquet_lambda(&s, length, fo)?.lambda),
                None => None,
            };
            Ok(SweepRow {
                length,
                r,
                probe0: first.log_l2_u.exp(),
                probe_t: last.log_l2_u.exp(),
                verdict_numeric: probe_verdict(last.log_l2_u - first.log_l2_u),
                verdict_analytic: classify_fixed(&s, length, r)?.verdict,
                lambda_numeric,
            })
        })
        .collect()
}

pub fn write_sweep_csv<W: Write>(rows: &[SweepRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(SweepRow::CSV_HEADER)?;
    for row in rows {
        w.write_record(row.csv_row())?;
    }
    w.flush()?;
    Ok(())
}
