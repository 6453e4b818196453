use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use habitat::envelope::{build_envelope, classify_scenario_shift, EnvelopeOptions};
use habitat::fem::{self, FemOptions};
use habitat::oracle::{step_solver, sweep, write_sweep_csv, OracleOptions, SweepAxes};
use habitat::recipes::{self, EXAMPLE_CASES};
use habitat::spectral::{
    bounds_prop24, bounds_thm21, classify_fixed, eig_report, mu_hat, FloquetOptions,
};
use habitat::{parse_scenario, Error, Result, Scenario};

#[derive(Parser, Debug)]
#[command(name = "habitat", version, about = "Populations on shifting, resizing habitats")]
struct Cli {
    #[command(subcommand)]
    verb: Verb,
    #[command(flatten)]
    common: Common,
}

#[derive(Args, Debug, Clone)]
struct Common {
    /// Scenario JSON file, or the name of a bundled scenario.
    #[arg(long, global = true)]
    scenario: Option<String>,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// FEM time cells.
    #[arg(long, global = true)]
    nt: Option<usize>,
    /// FEM space cells.
    #[arg(long, global = true)]
    nx: Option<usize>,
    /// Interior nodes of the finite-difference grid.
    #[arg(long, global = true)]
    ny: Option<usize>,
    /// Time step of the finite-difference solver and the eigen-solver.
    #[arg(long, global = true)]
    tau: Option<f64>,
    /// FEM streamline weight; the stabilization scale is theta·h.
    #[arg(long, global = true)]
    theta: Option<f64>,
    /// FEM penalty on facet jumps of the time derivative.
    #[arg(long, global = true)]
    delta: Option<f64>,
    /// Reference length of the fixed frame (also the length used by `bounds` and `eig`).
    #[arg(long = "L0", global = true)]
    l0: Option<f64>,
    /// Suppress progress messages.
    #[arg(long, global = true)]
    quiet: bool,
}

#[derive(Subcommand, Debug)]
enum Verb {
    /// Parse and check a scenario.
    Validate,
    /// Closed-form eigenvalue bounds and the survival verdict.
    Bounds,
    /// Periodic principal eigenvalue with all bounds.
    Eig,
    /// Space-time finite element solve.
    Solve,
    /// Sub/supersolution envelope against the finite-difference solution.
    Envelope,
    /// Fixed-domain probe sweep over lengths and growth rates.
    Sweep {
        /// `lo:hi:n`.
        #[arg(long, default_value = "0.2:6:60")]
        lengths: String,
        /// Comma-separated rates; defaults to the scenario's `r`.
        #[arg(long)]
        rates: Option<String>,
        /// Also compute the eigenvalue at every point.
        #[arg(long)]
        eigen: bool,
    },
    /// Regenerate the data behind a figure or worked example.
    Reproduce {
        #[arg(value_enum)]
        recipe: Recipe,
    },
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
enum Recipe {
    Fig1,
    Fig2conj,
    FigError,
    #[value(name = "ex4-4")]
    Ex44,
    #[value(name = "ex4-5")]
    Ex45,
    #[value(name = "ex4-6")]
    Ex46,
    #[value(name = "ex4-7")]
    Ex47,
    #[value(name = "ex4-8")]
    Ex48,
}

impl Recipe {
    fn name(self) -> &'static str {
        match self {
            Recipe::Fig1 => "fig1",
            Recipe::Fig2conj => "fig2conj",
            Recipe::FigError => "fig-error",
            Recipe::Ex44 => "ex4-4",
            Recipe::Ex45 => "ex4-5",
            Recipe::Ex46 => "ex4-6",
            Recipe::Ex47 => "ex4-7",
            Recipe::Ex48 => "ex4-8",
        }
    }
}

struct Context {
    common: Common,
    outputs: Vec<String>,
    resolved: serde_json::Map<String, Value>,
}

impl Context {
    fn say(&self, msg: impl AsRef<str>) {
        if !self.common.quiet {
            println!("{}", msg.as_ref());
        }
    }

    fn create(&mut self, name: &str) -> Result<BufWriter<File>> {
        self.outputs.push(name.to_owned());
        Ok(BufWriter::new(File::create(self.common.out.join(name))?))
    }

    fn resolve(&mut self, key: &str, v: Value) {
        self.resolved.insert(key.to_owned(), v);
    }

    fn scenario(&mut self) -> Result<Scenario> {
        let Some(spec) = self.common.scenario.clone() else {
            return Err(Error::InvalidArgument("--scenario is required for this verb".into()));
        };
        let path = Path::new(&spec);
        if path.exists() {
            let text = fs::read_to_string(path)?;
            return parse_scenario(&text);
        }
        if recipes::bundled_names().any(|n| n == spec) {
            return recipes::bundled(&spec);
        }
        Err(Error::InvalidArgument(format!("scenario file {spec:?} not found")))
    }

    fn fem_options(&mut self) -> FemOptions {
        let d = FemOptions::default();
        let o = FemOptions {
            theta: self.common.theta.unwrap_or(d.theta),
            delta: self.common.delta.unwrap_or(d.delta),
            ..d
        };
        self.resolve("theta", json!(o.theta));
        self.resolve("delta", json!(o.delta));
        o
    }

    fn oracle_options(&mut self) -> OracleOptions {
        let d = OracleOptions::default();
        let o = OracleOptions {
            ny: self.common.ny.unwrap_or(d.ny),
            tau: self.common.tau.unwrap_or(d.tau),
            l0: self.common.l0,
            ..d
        };
        self.resolve("ny", json!(o.ny));
        self.resolve("tau", json!(o.tau));
        o
    }

    fn floquet_options(&mut self, period: f64, base: FloquetOptions) -> FloquetOptions {
        let mut o = base;
        if let Some(ny) = self.common.ny {
            o.nodes = ny + 2;
        }
        if let Some(tau) = self.common.tau {
            o.steps = ((period / tau).ceil() as usize).max(1);
        }
        self.resolve("floquet_nodes", json!(o.nodes));
        self.resolve("floquet_steps", json!(o.steps));
        o
    }

    fn mesh(&mut self, default: (usize, usize)) -> (usize, usize) {
        let m = (self.common.nt.unwrap_or(default.0), self.common.nx.unwrap_or(default.1));
        self.resolve("nt", json!(m.0));
        self.resolve("nx", json!(m.1));
        m
    }

    fn length(&mut self, s: &Scenario) -> f64 {
        let l = self.common.l0.unwrap_or_else(|| s.motion.length(0.0));
        self.resolve("L0", json!(l));
        l
    }
}

fn f(x: f64) -> String {
    format!("{x:.12e}")
}

fn csv_writer<W: std::io::Write>(w: W) -> csv::Writer<W> {
    csv::Writer::from_writer(w)
}

fn validate(cx: &mut Context) -> Result<()> {
    let s = cx.scenario()?;
    cx.say(format!(
        "ok: d = {}, r = {}, T = {}, horizon = {}, motion = {}",
        s.d,
        s.r,
        s.period,
        s.horizon,
        s.motion.kind()
    ));
    Ok(())
}

fn bounds(cx: &mut Context) -> Result<()> {
    let s = cx.scenario()?;
    let length = cx.length(&s);
    let fixed = s.frozen(length);
    let b = bounds_thm21(&fixed, length)?;
    let e = bounds_prop24(&fixed, length)?;
    let avg = mu_hat(&fixed, length)?;
    let c = classify_fixed(&fixed, length, s.r)?;
    let mut w = csv_writer(cx.create("bounds.csv")?);
    w.write_record([
        "L",
        "lower",
        "upper",
        "lower_extremal",
        "upper_extremal",
        "mu_hat",
        "lambda_hat",
        "delta_minus",
        "delta_plus",
        "verdict",
    ])?;
    w.write_record([
        f(length),
        f(b.lower),
        f(b.upper),
        f(e.lower),
        f(e.upper),
        f(avg.mu_hat),
        f(avg.lambda_hat),
        f(c.delta_minus),
        f(c.delta_plus),
        c.verdict.as_str().to_owned(),
    ])?;
    w.flush()?;
    cx.say(format!(
        "L = {length}: {} < λ < {} (averaged {}), verdict {}",
        b.lower,
        b.upper,
        avg.lambda_hat,
        c.verdict.as_str()
    ));
    Ok(())
}

fn eig(cx: &mut Context) -> Result<()> {
    let s = cx.scenario()?;
    let length = cx.length(&s);
    let fixed = s.frozen(length);
    let opts = cx.floquet_options(s.period, FloquetOptions::default());
    let rep = eig_report(&fixed, length, &opts)?;
    let mut w = csv_writer(cx.create("eig.csv")?);
    w.write_record(habitat::spectral::EigenReport::CSV_HEADER)?;
    w.write_record(rep.csv_row())?;
    w.flush()?;
    let mut j = cx.create("eig.json")?;
    serde_json::to_writer_pretty(&mut j, &rep.to_json())?;
    std::io::Write::write_all(&mut j, b"\n")?;
    let phi = &rep.eigenfunction;
    let mut w = csv_writer(cx.create("eigenfunction.csv")?);
    w.write_record(["t", "y", "phi"])?;
    let levels = 10;
    for k in 0..=levels {
        let t = phi.period * k as f64 / levels as f64;
        for (i, v) in phi.slice_at(t).iter().enumerate() {
            w.write_record([f(t), f(i as f64 * phi.dy()), f(*v)])?;
        }
    }
    w.flush()?;
    cx.say(format!(
        "λ = {} (raw {}), bounds [{}, {}], verdict {}",
        rep.lambda,
        rep.lambda_raw,
        rep.bounds.lower,
        rep.bounds.upper,
        rep.classification.verdict.as_str()
    ));
    Ok(())
}

fn solve(cx: &mut Context) -> Result<()> {
    let s = cx.scenario()?;
    let mesh = cx.mesh((120, 48));
    let opts = cx.fem_options();
    let u = fem::run(&s, mesh.0, mesh.1, &opts)?;
    let levels = 40;
    let times: Vec<f64> = (0..=levels).map(|k| s.horizon * k as f64 / levels as f64).collect();
    u.write_slices_csv(cx.create("solution.csv")?, &times, 2)?;
    let mut w = csv_writer(cx.create("probe.csv")?);
    w.write_record(["t", "l2", "linf"])?;
    for &t in &times {
        w.write_record([f(t), f(u.slice_l2(t)?), f(u.slice_linf(t)?)])?;
    }
    w.flush()?;
    u.write_vtk(cx.create("solution.vtk")?)?;
    let growth = (u.slice_l2(s.horizon)? / u.slice_l2(0.0)?).ln();
    cx.resolve("residual", json!(u.residual));
    cx.say(format!(
        "solved {}x{} mesh, residual {:.1e}, ln(probe(T)/probe(0)) = {growth:.6}, verdict {}",
        mesh.0,
        mesh.1,
        u.residual,
        habitat::oracle::probe_verdict(growth).as_str()
    ));
    Ok(())
}

fn envelope(cx: &mut Context) -> Result<()> {
    let s = cx.scenario()?;
    let mut oo = cx.oracle_options();
    let mut eo = EnvelopeOptions::matching_oracle(oo.ny);
    eo.l0 = cx.common.l0;
    let env = build_envelope(&s, &eo)?;
    let levels = 20usize;
    let times: Vec<f64> = (0..=levels).map(|k| s.horizon * k as f64 / levels as f64).collect();
    oo.checkpoints = times.clone();
    let run = step_solver(&s, &oo)?;
    let nodes = env.eigenfunction.nodes();
    let stride = (nodes / 50).max(1);
    let mut w = csv_writer(cx.create("envelope.csv")?);
    w.write_record(["t", "y", "lower", "upper", "oracle_v"])?;
    for &t in &times {
        let Some(sl) = run.slice_near(t) else { continue };
        let e = env.slice(sl.t, 0.0);
        let v = sl.actual();
        for i in (0..nodes).step_by(stride) {
            w.write_record([f(sl.t), f(e.y[i]), f(e.lower[i]), f(e.upper[i]), f(v[i])])?;
        }
    }
    w.flush()?;
    cx.resolve("lambda", json!(env.lambda));
    cx.resolve("a", json!(env.a));
    cx.resolve("b", json!(env.b));
    let mut msg = format!("λ = {}, a = {}, b = {}", env.lambda, env.a, env.b);
    if let Ok(out) = classify_scenario_shift(&s, env.lambda, 1e-4) {
        msg += &format!(", shift regime {:?} ⇒ {}", out.regime, out.verdict.as_str());
    }
    cx.say(msg);
    Ok(())
}

fn parse_range(text: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = text.split(':').collect();
    let bad = || Error::InvalidArgument(format!("expected lo:hi:n, got {text:?}"));
    if parts.len() != 3 {
        return Err(bad());
    }
    let lo: f64 = parts[0].trim().parse().map_err(|_| bad())?;
    let hi: f64 = parts[1].trim().parse().map_err(|_| bad())?;
    let n: usize = parts[2].trim().parse().map_err(|_| bad())?;
    if n == 0 || !(lo > 0.0) || hi < lo {
        return Err(bad());
    }
    Ok(SweepAxes::linspace(lo, hi, n))
}

fn parse_list(text: &str) -> Result<Vec<f64>> {
    text.split(',')
        .map(|p| {
            p.trim()
                .parse::<f64>()
                .map_err(|_| Error::InvalidArgument(format!("bad number {p:?} in {text:?}")))
        })
        .collect()
}

fn run_sweep(cx: &mut Context, template: &Scenario, axes: &SweepAxes, eigen: bool, file: &str) -> Result<()> {
    let oo = cx.oracle_options();
    let fo = eigen.then(|| cx.floquet_options(template.period, FloquetOptions::coarse()));
    let rows = sweep(template, axes, &oo, fo.as_ref())?;
    write_sweep_csv(&rows, cx.create(file)?)?;
    let grow = rows.iter().filter(|r| r.probe_t > r.probe0).count();
    cx.say(format!("{} points, {grow} with a growing probe", rows.len()));
    Ok(())
}

fn sweep_verb(cx: &mut Context, lengths: &str, rates: Option<&str>, eigen: bool) -> Result<()> {
    let s = cx.scenario()?;
    let axes = SweepAxes {
        lengths: parse_range(lengths)?,
        rates: match rates {
            Some(r) => parse_list(r)?,
            None => vec![s.r],
        },
    };
    cx.resolve("lengths", json!(axes.lengths));
    cx.resolve("rates", json!(axes.rates));
    run_sweep(cx, &s, &axes, eigen, "sweep.csv")
}

fn reproduce(cx: &mut Context, recipe: Recipe) -> Result<()> {
    match recipe {
        Recipe::Fig1 => {
            let s = recipes::bundled("fig1")?;
            let axes = SweepAxes {
                lengths: SweepAxes::linspace(0.3, 4.0, 20),
                rates: SweepAxes::linspace(1.0, 25.0, 20),
            };
            run_sweep(cx, &s, &axes, true, "fig1.csv")?;
            let mut w = csv_writer(cx.create("fig1_curves.csv")?);
            w.write_record(["r", "survive_lo", "survive_hi", "extinct_lo", "extinct_hi"])?;
            let opt = |v: Option<f64>| v.filter(|x| x.is_finite()).map(f).unwrap_or_default();
            for r in SweepAxes::linspace(1.0, 25.0, 200) {
                let c = classify_fixed(&s, 1.0, r)?;
                w.write_record([
                    f(r),
                    opt(c.survival_interval.map(|p| p.0)),
                    opt(c.survival_interval.map(|p| p.1)),
                    opt(c.extinction_window.map(|p| p.0)),
                    opt(c.extinction_window.map(|p| p.1)),
                ])?;
            }
            w.flush()?;
        }
        Recipe::Fig2conj => {
            let s = recipes::bundled("fig1")?;
            let axes = SweepAxes {
                lengths: SweepAxes::linspace(0.2, 6.0, 60),
                rates: vec![15.0, 5.0],
            };
            run_sweep(cx, &s, &axes, false, "fig2conj.csv")?;
        }
        Recipe::FigError => {
            let s = recipes::benchmark(1.0);
            let exact = recipes::benchmark_exact(&s);
            let opts = cx.fem_options();
            let mut w = csv_writer(cx.create("fig_error.csv")?);
            w.write_record(["n", "h", "mesh_error", "l2_rel_error", "order"])?;
            let mut prev: Option<(f64, f64)> = None;
            for n in [4, 8, 16, 32] {
                let u = fem::run(&s, n, n, &opts)?;
                let err = u.mesh_norm_error(&exact);
                let (l2, norm) = u.l2_error(|t, x| exact(t, x)[0]);
                let h = u.mesh.h;
                let order = prev.map(|(ph, pe)| (pe / err).ln() / (ph / h).ln());
                w.write_record([n.to_string(), f(h), f(err), f(l2 / norm), order.map(f).unwrap_or_default()])?;
                cx.say(format!("n = {n}: h = {h:.4}, error {err:.4e}, relative L2 {:.3e}", l2 / norm));
                prev = Some((h, err));
            }
            w.flush()?;
        }
        _ => {
            let prefix = recipe.name();
            let fem_opts = cx.fem_options();
            let oo = cx.oracle_options();
            let mut summary = Vec::new();
            for case in EXAMPLE_CASES.iter().filter(|c| c.name.starts_with(prefix)) {
                let s = recipes::bundled(case.name)?;
                let mesh = cx.mesh(recipes::example_mesh(case.name));
                let run = recipes::run_example(case.name, &s, mesh, &fem_opts, &oo, 40)?;
                run.write_probe_csv(cx.create(&format!("{}_probe.csv", case.name))?)?;
                run.field
                    .write_slices_csv(cx.create(&format!("{}_solution.csv", case.name))?, &run.times, 1)?;
                let n = run.times.len() - 1;
                cx.say(format!(
                    "{}: FEM {}, reference {}, probe {:.4e} -> {:.4e}",
                    case.name,
                    run.fem_verdict.as_str(),
                    run.oracle_verdict.as_str(),
                    run.fem_probe[0],
                    run.fem_probe[n]
                ));
                summary.push([
                    case.name.to_owned(),
                    if case.survives { "survive" } else { "extinct" }.to_owned(),
                    run.fem_verdict.as_str().to_owned(),
                    run.oracle_verdict.as_str().to_owned(),
                    f(run.fem_probe[0]),
                    f(run.fem_probe[n]),
                    f(run.oracle_probe[n]),
                ]);
            }
            let mut w = csv_writer(cx.create(&format!("{prefix}_verdicts.csv"))?);
            w.write_record(["case", "expected", "fem", "reference", "probe0", "probeT_fem", "probeT_reference"])?;
            for row in summary {
                w.write_record(row)?;
            }
            w.flush()?;
        }
    }
    Ok(())
}

fn verb_name(v: &Verb) -> String {
    match v {
        Verb::Validate => "validate".into(),
        Verb::Bounds => "bounds".into(),
        Verb::Eig => "eig".into(),
        Verb::Solve => "solve".into(),
        Verb::Envelope => "envelope".into(),
        Verb::Sweep { .. } => "sweep".into(),
        Verb::Reproduce { recipe } => format!("reproduce {}", recipe.name()),
    }
}

fn write_manifest(cx: &Context, verb: &str) -> Result<()> {
    let c = &cx.common;
    let manifest = json!({
        "verb": verb,
        "scenario": c.scenario,
        "out": c.out.display().to_string(),
        "overrides": {
            "nt": c.nt, "nx": c.nx, "ny": c.ny, "tau": c.tau,
            "theta": c.theta, "delta": c.delta, "L0": c.l0,
        },
        "resolved": cx.resolved,
        "seed": Value::Null,
        "version": env!("CARGO_PKG_VERSION"),
        "outputs": cx.outputs,
    });
    let mut w = BufWriter::new(File::create(c.out.join("manifest.json"))?);
    serde_json::to_writer_pretty(&mut w, &manifest)?;
    std::io::Write::write_all(&mut w, b"\n")?;
    Ok(())
}

fn dispatch(cx: &mut Context, verb: &Verb) -> Result<()> {
    fs::create_dir_all(&cx.common.out)?;
    match verb {
        Verb::Validate => validate(cx),
        Verb::Bounds => bounds(cx),
        Verb::Eig => eig(cx),
        Verb::Solve => solve(cx),
        Verb::Envelope => envelope(cx),
        Verb::Sweep { lengths, rates, eigen } => sweep_verb(cx, lengths, rates.as_deref(), *eigen),
        Verb::Reproduce { recipe } => reproduce(cx, *recipe),
    }?;
    write_manifest(cx, &verb_name(verb))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let mut cx = Context {
        common: cli.common.clone(),
        outputs: Vec::new(),
        resolved: serde_json::Map::new(),
    };
    match dispatch(&mut cx, &cli.verb) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            let code = match e {
                ref e if e.is_validation() => 2,
                Error::Numerical(_) | Error::NoConvergence { .. } => 3,
                _ => 1,
            };
            ExitCode::from(code)
        }
    }
}
