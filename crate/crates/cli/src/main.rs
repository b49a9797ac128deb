use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rigidity_core::checks::{run_suite, CheckConfig, CheckReport, SUITES};
use rigidity_core::exact::Q;
use rigidity_core::grid::{Box, GridSection, GridSpec};
use rigidity_core::liealg::{constructed_perturbation, rigidity_solve, Bracket, LieInstance};
use rigidity_core::nashmoser::{write_ledger, ConstantsSchedule, InstanceConstants, LedgerRow, RunConfig, RunReport, Stopping};
use rigidity_core::symplectic::{darboux_solve, PolyIntegrableSystem};
use rigidity_core::williamson::classify;
use rigidity_core::{par, Error};
use serde::Serialize;
use serde_json::{json, Value};
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

/// Overrides the default output directory when `--out` is absent.
const OUT_ENV: &str = "RIGIDITY_OUT_DIR";

#[derive(Parser)]
#[command(name = "rigidity", version, about = "Nash–Moser rigidity experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one normalization and write its ledger and symmetry.
    Run(RunArgs),
    /// Run a property suite and write its ratio table.
    Check(CheckArgs),
    /// Williamson type of a polynomial integrable system at a fixed point.
    Classify(ClassifyArgs),
    /// Independent runs over seeds and perturbation sizes.
    Sweep(SweepArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Args, Clone)]
struct RunOpts {
    /// JSON or TOML run configuration; flags override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    /// darboux, liealg-su2, liealg-sl2, liealg-so4, liealg-heisenberg
    #[arg(long)]
    instance: Option<String>,
    #[arg(long)]
    t0: Option<f64>,
    #[arg(long)]
    b: Option<f64>,
    #[arg(long)]
    grid: Option<usize>,
    #[arg(long)]
    tolerance: Option<f64>,
    #[arg(long)]
    nu_max: Option<usize>,
    #[arg(long)]
    theta: Option<f64>,
    #[arg(long)]
    p: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Amplitude of the Darboux perturbation.
    #[arg(long)]
    amp: Option<f64>,
    /// Size of the Lie-algebra perturbation.
    #[arg(long)]
    perturb: Option<f64>,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    opts: RunOpts,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
}

#[derive(Args)]
struct CheckArgs {
    /// symbolic, williamson, smoothing, interpolation, dolbeault, lemmaA, flows, composition, schedule
    suite: String,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, default_value_t = 100)]
    corpus: usize,
    /// Smoothing scales.
    #[arg(long, value_delimiter = ',', default_value = "2,4,8,16")]
    t: Vec<f64>,
    /// Polydisk dimension for the Dolbeault suite; 0 runs both.
    #[arg(long, default_value_t = 0)]
    n: usize,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
}

#[derive(Args)]
struct ClassifyArgs {
    /// System JSON: {"omega": [[..]] (optional), "mu": [polynomial, ..]}.
    system: PathBuf,
    /// Fixed point as comma-separated rationals; the origin by default.
    #[arg(long, value_delimiter = ',')]
    point: Vec<String>,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    opts: RunOpts,
    /// Seeds to run, e.g. 1..=20 as `--seeds 1-20` or a list `1,4,9`.
    #[arg(long, default_value = "1-10")]
    seeds: String,
    /// Perturbation sizes (Lie) or amplitudes (Darboux); the configured one by default.
    #[arg(long, value_delimiter = ',')]
    sizes: Vec<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
}

/// Failure with its exit code: 2 for bad input, 1 for runs that fail.
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn input(message: impl Into<String>) -> Self {
        Self { code: 2, message: message.into() }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Parse(_) | Error::Schedule(_) | Error::Io(_) => 2,
            _ => 1,
        };
        Self { code, message: e.to_string() }
    }
}

fn out_dir(flag: Option<PathBuf>) -> Result<PathBuf, Failure> {
    let dir = flag.or_else(|| std::env::var_os(OUT_ENV).map(PathBuf::from)).unwrap_or_else(|| PathBuf::from("rigidity-out"));
    fs::create_dir_all(&dir).map_err(|e| Failure::input(format!("cannot create {}: {e}", dir.display())))?;
    Ok(dir)
}

fn write_file(path: &Path, text: &str) -> Result<(), Failure> {
    fs::write(path, text).map_err(|e| Failure { code: 1, message: format!("cannot write {}: {e}", path.display()) })
}

fn load_config(opts: &RunOpts) -> Result<RunConfig, Failure> {
    let mut c = match &opts.config {
        Some(p) => RunConfig::from_path(p).map_err(|e| Failure::input(format!("{}: {e}", p.display())))?,
        None => RunConfig::default(),
    };
    macro_rules! overlay {
        ($($f:ident),*) => { $( if let Some(v) = opts.$f.clone() { c.$f = v; } )* };
    }
    overlay!(instance, t0, b, grid, nu_max, seed, amp, perturb);
    if opts.tolerance.is_some() {
        c.tolerance = opts.tolerance;
    }
    if opts.theta.is_some() {
        c.theta = opts.theta;
    }
    if opts.p.is_some() {
        c.p = opts.p;
    }
    Ok(c)
}

fn schedule_of(c: &RunConfig) -> Result<ConstantsSchedule, Failure> {
    let mut s = ConstantsSchedule::new(c.t0, c.b, c.s, c.r, InstanceConstants { d: 1, l1: 0, l2: 0 }, c.nu_max)?;
    if let Some(p) = c.p {
        s = s.with_p(p);
    }
    s.validate_pairs(&c.pairs)?;
    Ok(s)
}

fn lie_algebra(name: &str) -> Option<Bracket> {
    match name {
        "su2" => Some(Bracket::su2()),
        "sl2" => Some(Bracket::sl2()),
        "so4" => Some(Bracket::su2().direct_sum(&Bracket::su2())),
        "heisenberg" => Some(Bracket::heisenberg()),
        _ => None,
    }
}

/// Everything one run produces.
struct Outcome {
    converged: bool,
    steps: usize,
    final_residual: f64,
    report: Option<RunReport>,
    symmetry: Value,
    ledger: Vec<LedgerRow>,
}

fn execute(c: &RunConfig) -> Result<Outcome, Error> {
    let sched = schedule_of(c).map_err(|f| Error::Schedule(f.message))?;
    if c.instance == "darboux" {
        if c.grid < 9 {
            return Err(Error::Parse(format!("grid of {} nodes per axis is too coarse", c.grid)));
        }
        let stop = Stopping { theta: c.theta, ..Stopping::new(c.tolerance.unwrap_or(1e-6)) };
        let base = GridSpec::uniform(Box::cube(2, 2.0), c.grid)?;
        let amp = c.amp;
        let omega = GridSection::from_scalar_fn(base, move |x| 1.0 + amp * x[0].sin() * x[1].sin());
        let sol = darboux_solve(&omega, &sched, &stop)?;
        let ledger = sol.run.as_ref().map(|r| r.ledger.clone()).unwrap_or_default();
        return Ok(Outcome {
            converged: sol.run.as_ref().is_none_or(|r| r.converged),
            steps: sol.run.as_ref().map_or(0, |r| r.steps),
            final_residual: sol.residual,
            symmetry: json!({ "near_identity_map": sol.map.disp }),
            report: sol.run,
            ledger,
        });
    }
    let name = c.instance.strip_prefix("liealg-").and_then(lie_algebra);
    let Some(mu) = name else {
        return Err(Error::Parse(format!("unknown instance `{}`", c.instance)));
    };
    let stop = Stopping { theta: c.theta, ..Stopping::new(c.tolerance.unwrap_or(1e-12)) };
    let mut rng = ChaCha8Rng::seed_from_u64(c.seed);
    // refuses non-rigid algebras before sampling
    LieInstance::new(&mu)?;
    let (nu, _) = constructed_perturbation(&mu, c.perturb, &mut rng)?;
    let rep = rigidity_solve(&mu, &nu, &sched, &stop, 1e-8)?;
    let rows: Vec<Vec<f64>> = (0..rep.g.nrows()).map(|i| rep.g.row(i).iter().cloned().collect()).collect();
    Ok(Outcome {
        converged: rep.run.as_ref().is_none_or(|r| r.converged) && rep.residual <= stop.tolerance.max(1e-10),
        steps: rep.run.as_ref().map_or(0, |r| r.steps),
        final_residual: rep.residual,
        symmetry: json!({ "matrix": rows }),
        ledger: rep.run.as_ref().map(|r| r.ledger.clone()).unwrap_or_default(),
        report: rep.run,
    })
}

fn ledger_text(rows: &[LedgerRow]) -> Result<String, Failure> {
    let mut buf = Vec::new();
    write_ledger(rows, &mut buf)?;
    Ok(String::from_utf8_lossy(&buf).into_owned())
}

fn cmd_run(args: RunArgs) -> Result<u8, Failure> {
    let config = load_config(&args.opts)?;
    let dir = out_dir(args.out)?;
    let outcome = match execute(&config) {
        Ok(o) => o,
        Err(Error::Divergence { message, ledger }) => {
            write_file(&dir.join("ledger.csv"), &ledger)?;
            return Err(Failure { code: 1, message: format!("iteration diverged: {message}") });
        }
        Err(e) => return Err(e.into()),
    };
    write_file(&dir.join("ledger.csv"), &ledger_text(&outcome.ledger)?)?;
    write_file(&dir.join("map.json"), &outcome.symmetry.to_string())?;
    let summary = json!({
        "instance": config.instance,
        "converged": outcome.converged,
        "steps": outcome.steps,
        "final_residual": outcome.final_residual,
        "report": outcome.report,
    });
    write_file(&dir.join("report.json"), &serde_json::to_string_pretty(&summary).expect("serializable"))?;
    match args.format {
        Format::Json => println!("{}", serde_json::to_string_pretty(&summary).expect("serializable")),
        Format::Csv => print!("{}", ledger_text(&outcome.ledger)?),
    }
    Ok(u8::from(!outcome.converged))
}

fn cmd_check(args: CheckArgs) -> Result<u8, Failure> {
    if !SUITES.contains(&args.suite.as_str()) {
        return Err(Failure::input(format!("unknown suite `{}`; expected one of {}", args.suite, SUITES.join(", "))));
    }
    let cfg = CheckConfig { seed: args.seed, corpus: args.corpus, t: args.t, n: args.n };
    let rep: CheckReport = run_suite(&args.suite, &cfg).map_err(|e| match e {
        Error::Domain(m) => Failure::input(m),
        other => other.into(),
    })?;
    let dir = out_dir(args.out)?;
    let mut buf = Vec::new();
    rep.write_csv(&mut buf)?;
    let table = String::from_utf8_lossy(&buf).into_owned();
    write_file(&dir.join(format!("{}.csv", rep.suite)), &table)?;
    match args.format {
        Format::Csv => print!("{table}"),
        Format::Json => println!("{}", serde_json::to_string_pretty(&rep).expect("serializable")),
    }
    eprintln!("{}: {} ({})", rep.suite, if rep.passed { "pass" } else { "FAIL" }, rep.summary);
    Ok(u8::from(!rep.passed))
}

fn cmd_classify(args: ClassifyArgs) -> Result<u8, Failure> {
    let text = fs::read_to_string(&args.system).map_err(|e| Failure::input(format!("{}: {e}", args.system.display())))?;
    let value: Value = serde_json::from_str(&text).map_err(|e| Failure::input(format!("{}: {e}", args.system.display())))?;
    let system = PolyIntegrableSystem::from_json(&value).map_err(|e| Failure::input(e.to_string()))?;
    let point: Vec<Q> = if args.point.is_empty() {
        vec![Q::from_integer(0.into()); system.dim()]
    } else {
        args.point.iter().map(|s| rigidity_core::exact::parse_q(s)).collect::<Result<_, _>>().map_err(|e| Failure::input(e.to_string()))?
    };
    let report = classify(&system, &point)?;
    println!("{}", serde_json::to_string(&report).expect("serializable"));
    Ok(0)
}

fn parse_seeds(s: &str) -> Result<Vec<u64>, Failure> {
    let bad = || Failure::input(format!("cannot read seeds `{s}`"));
    if let Some((a, b)) = s.split_once('-') {
        let (a, b): (u64, u64) = (a.trim().parse().map_err(|_| bad())?, b.trim().parse().map_err(|_| bad())?);
        return if a <= b { Ok((a..=b).collect()) } else { Err(bad()) };
    }
    s.split(',').map(|x| x.trim().parse().map_err(|_| bad())).collect()
}

#[derive(Serialize)]
struct SweepRow {
    seed: u64,
    size: f64,
    converged: bool,
    steps: usize,
    final_residual: f64,
    error: String,
}

fn cmd_sweep(args: SweepArgs) -> Result<u8, Failure> {
    let base = load_config(&args.opts)?;
    schedule_of(&base)?;
    let seeds = parse_seeds(&args.seeds)?;
    let darboux = base.instance == "darboux";
    let sizes = if args.sizes.is_empty() { vec![if darboux { base.amp } else { base.perturb }] } else { args.sizes.clone() };
    let jobs: Vec<(u64, f64)> = sizes.iter().flat_map(|&z| seeds.iter().map(move |&s| (s, z))).collect();
    let rows: Vec<SweepRow> = par::map_range(jobs.len(), |i| {
        let (seed, size) = jobs[i];
        let mut c = base.clone();
        c.seed = seed;
        if darboux {
            c.amp = size;
        } else {
            c.perturb = size;
        }
        match execute(&c) {
            Ok(o) => SweepRow { seed, size, converged: o.converged, steps: o.steps, final_residual: o.final_residual, error: String::new() },
            Err(e) => SweepRow { seed, size, converged: false, steps: 0, final_residual: f64::NAN, error: e.to_string() },
        }
    });
    let dir = out_dir(args.out)?;
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in &rows {
        w.serialize(r).map_err(Error::from)?;
    }
    let table = String::from_utf8(w.into_inner().map_err(|e| Failure { code: 1, message: e.to_string() })?).expect("utf-8 csv");
    write_file(&dir.join("sweep.csv"), &table)?;
    match args.format {
        Format::Csv => print!("{table}"),
        Format::Json => println!("{}", serde_json::to_string_pretty(&rows).expect("serializable")),
    }
    Ok(u8::from(rows.iter().any(|r| !r.converged)))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(a) => cmd_run(a),
        Command::Check(a) => cmd_check(a),
        Command::Classify(a) => cmd_classify(a),
        Command::Sweep(a) => cmd_sweep(a),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
