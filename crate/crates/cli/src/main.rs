//! `gathersim`: generate scenarios, run the gathering dynamics, tabulate the
//! decrease-rate bounds, cross-check the cosine-sum lemma, and plot runs.
//!
//! Exit codes: 0 success, 1 validation/verification failure, 2 usage error,
//! 3 I/O error.

mod svg;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use gathersim_core::analysis::{
    check_rate_bound_interval, connectivity_audit, default_rate_tol, default_step_tol,
    mu_bound, MetricsRecord,
};
use gathersim_core::dynamics::{simulate, RunResult, Termination};
use gathersim_core::error::Error;
use gathersim_core::output::write_run;
use gathersim_core::polygon_bounds::{brute_force_min, theorem1_bound};
use gathersim_core::scenario::{
    default_extent, gen_cone_near_minimum, gen_random_connected, gen_regular_polygon,
    load_scenario, save_scenario, Scenario, SpeedLawTag,
};

const EXIT_VERIFY: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_IO: u8 = 3;

#[derive(Parser)]
#[command(name = "gathersim", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a scenario file.
    Gen(GenArgs),
    /// Simulate a scenario and write run artifacts.
    Run(RunArgs),
    /// Print the C_K / mu(K) bound table as CSV.
    Bounds(BoundsArgs),
    /// Check the closed-form cosine-sum minimum against the brute-force oracle.
    VerifyLemma(VerifyLemmaArgs),
    /// Render a metrics series from a run directory as SVG.
    Plot(PlotArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Kind {
    Random,
    Regular,
    Cone,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Law {
    ConstantGain,
    ConstantSpeed,
}

impl From<Law> for SpeedLawTag {
    fn from(law: Law) -> Self {
        match law {
            Law::ConstantGain => SpeedLawTag::ConstantGain,
            Law::ConstantSpeed => SpeedLawTag::ConstantSpeed,
        }
    }
}

#[derive(Args)]
struct GenArgs {
    #[arg(long, value_enum)]
    kind: Kind,
    /// Number of agents.
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 200.0)]
    visibility: f64,
    /// Sampling box side for random scenarios [default: visibility*sqrt(n)/2].
    #[arg(long)]
    extent: Option<f64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Circumradius for regular polygons.
    #[arg(long)]
    circumradius: Option<f64>,
    /// Apex angle for cone scenarios.
    #[arg(long)]
    epsilon: Option<f64>,
    /// Apex-to-cluster distance for cone scenarios [default: 0.9*visibility].
    #[arg(long)]
    scale: Option<f64>,
    /// Output path [default: <out-dir>/scenario.json].
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct RunArgs {
    scenario: PathBuf,
    /// Override the scenario time step.
    #[arg(long)]
    dt: Option<f64>,
    /// Override the scenario time limit.
    #[arg(long)]
    t_max: Option<f64>,
    /// Override the scenario speed law.
    #[arg(long, value_enum)]
    law: Option<Law>,
    /// Output directory [default: $GATHERSIM_OUT or ./gathersim_out].
    #[arg(long)]
    out_dir: Option<PathBuf>,
    /// Fail (exit 1) if the connectivity audit or rate-bound check fails.
    #[arg(long)]
    verify: bool,
    /// Run a scenario whose initial visibility graph is disconnected.
    #[arg(long)]
    allow_disconnected: bool,
    /// Rerun the scenario's random family over seeds 0..N concurrently,
    /// writing to per-seed subdirectories.
    #[arg(long)]
    sweep: Option<u64>,
}

#[derive(Args)]
struct BoundsArgs {
    #[arg(long, default_value_t = 30)]
    k_max: usize,
    #[arg(long, default_value_t = 1.0)]
    v0: f64,
    /// Write the table to a file instead of stdout.
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyLemmaArgs {
    #[arg(long, default_value_t = 3)]
    n_min: usize,
    #[arg(long, default_value_t = 7)]
    n_max: usize,
    #[arg(long, default_value_t = 0.01)]
    resolution: f64,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum PlotSeries {
    Perimeter,
    K,
    Rate,
}

#[derive(Args)]
struct PlotArgs {
    run_dir: PathBuf,
    #[arg(long, value_enum)]
    series: PlotSeries,
    /// Output path [default: <run_dir>/<series>.svg].
    #[arg(short, long)]
    output: Option<PathBuf>,
}

fn out_dir(flag: Option<PathBuf>) -> PathBuf {
    flag.or_else(|| std::env::var_os("GATHERSIM_OUT").map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("gathersim_out"))
}

fn exit_for(err: &Error) -> u8 {
    match err {
        Error::Io { .. } | Error::Parse { .. } => EXIT_IO,
        Error::InvalidInput(_) => EXIT_USAGE,
        _ => EXIT_VERIFY,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Gen(args) => cmd_gen(args),
        Command::Run(args) => cmd_run(args),
        Command::Bounds(args) => cmd_bounds(args),
        Command::VerifyLemma(args) => cmd_verify_lemma(args),
        Command::Plot(args) => cmd_plot(args),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(exit_for(&err))
        }
    }
}

fn cmd_gen(args: GenArgs) -> Result<u8, Error> {
    let scenario = match args.kind {
        Kind::Random => {
            let extent = args
                .extent
                .unwrap_or_else(|| default_extent(args.visibility, args.n));
            gen_random_connected(args.n, args.visibility, extent, args.seed)?
        }
        Kind::Regular => {
            let r = args.circumradius.ok_or_else(|| {
                Error::InvalidInput("--circumradius is required for --kind regular".into())
            })?;
            let mut sc = gen_regular_polygon(args.n, r)?;
            sc.visibility = args.visibility;
            sc
        }
        Kind::Cone => {
            let eps = args.epsilon.ok_or_else(|| {
                Error::InvalidInput("--epsilon is required for --kind cone".into())
            })?;
            let scale = args.scale.unwrap_or(0.9 * args.visibility);
            let mut sc = gen_cone_near_minimum(args.n, eps, scale)?;
            sc.visibility = args.visibility;
            sc
        }
    };
    let path = args
        .output
        .unwrap_or_else(|| out_dir(None).join("scenario.json"));
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
        }
    }
    save_scenario(&scenario, &path)?;
    println!("{}", path.display());
    Ok(0)
}

/// Verification applied by `run --verify`: the connectivity audit plus the
/// interval rate check on every sample where K >= 3 held unchanged.
fn verify_run(run: &RunResult) -> Result<(), String> {
    let sc = &run.scenario;
    let tol_step = default_step_tol(sc.v0, sc.dt, sc.visibility);
    let violations = connectivity_audit(&run.ledger, tol_step);
    if let Some(v) = violations.first() {
        return Err(format!(
            "connectivity audit: edge {}-{} grew {} ({} beyond slack) at t={}",
            v.a, v.b, v.increase, v.excess, v.time
        ));
    }
    for w in run.metrics.windows(2) {
        let (prev, cur) = (&w[0], &w[1]);
        if prev.k_hull != cur.k_hull || cur.k_hull < 3 || cur.dldt_est.is_none() {
            continue;
        }
        let tol = default_rate_tol(cur.k_hull, sc.v0, sc.dt);
        if !check_rate_bound_interval(prev, cur, sc.v0, tol) {
            return Err(format!(
                "rate bound violated at t={}: dL/dt = {:?}, K = {}",
                cur.t, cur.dldt_est, cur.k_hull
            ));
        }
    }
    Ok(())
}

fn run_one(
    scenario: &Scenario,
    dir: &Path,
    verify: bool,
    allow_disconnected: bool,
) -> Result<u8, Error> {
    let run = simulate(scenario, allow_disconnected)?;
    let manifest = write_run(&run, dir)?;
    let t_ub = scenario.t_upper_bound()?;
    let termination = match run.termination {
        Termination::Gathered { t } => format!("gathered t_gathered={t:.6}"),
        Termination::TimedOut => "timed_out".to_string(),
    };
    println!(
        "{} {termination} T_ub={t_ub:.6} max_step_increase={:.3e} out={}",
        dir.display(),
        manifest.max_edge_step_increase,
        dir.join("manifest.json").display()
    );
    if verify {
        if let Err(msg) = verify_run(&run) {
            eprintln!("verification failed: {msg}");
            return Ok(EXIT_VERIFY);
        }
        println!("verification passed");
    }
    Ok(0)
}

fn cmd_run(args: RunArgs) -> Result<u8, Error> {
    let mut scenario = load_scenario(&args.scenario)?;
    if let Some(dt) = args.dt {
        scenario.dt = dt;
        scenario.merge_radius = 2.0 * scenario.v0 * dt;
    }
    if let Some(t_max) = args.t_max {
        scenario.t_max = t_max;
    }
    if let Some(law) = args.law {
        scenario.speed_law = law.into();
    }
    scenario.validate()?;
    let dir = out_dir(args.out_dir);

    let Some(sweep) = args.sweep else {
        return run_one(&scenario, &dir, args.verify, args.allow_disconnected);
    };

    // Seed sweep: regenerate the scenario's random family per seed and run
    // concurrently into per-seed subdirectories.
    let extent = default_extent(scenario.visibility, scenario.n);
    let workers = std::thread::available_parallelism().map_or(1, |p| p.get());
    let mut worst: u8 = 0;
    std::thread::scope(|scope| {
        let handles: Vec<_> = (0..workers)
            .map(|w| {
                let scenario = &scenario;
                let dir = &dir;
                scope.spawn(move || {
                    let mut worst: u8 = 0;
                    let mut seed = w as u64;
                    while seed < sweep {
                        let code = (|| {
                            let mut sc = gen_random_connected(
                                scenario.n,
                                scenario.visibility,
                                extent,
                                seed,
                            )?;
                            sc.speed_law = scenario.speed_law;
                            run_one(
                                &sc,
                                &dir.join(format!("seed-{seed}")),
                                args.verify,
                                args.allow_disconnected,
                            )
                        })();
                        worst = worst.max(match code {
                            Ok(c) => c,
                            Err(e) => {
                                eprintln!("seed {seed}: {e}");
                                exit_for(&e)
                            }
                        });
                        seed += workers as u64;
                    }
                    worst
                })
            })
            .collect();
        for h in handles {
            worst = worst.max(h.join().expect("sweep worker panicked"));
        }
    });
    Ok(worst)
}

fn cmd_bounds(args: BoundsArgs) -> Result<u8, Error> {
    if args.k_max < 2 {
        return Err(Error::InvalidInput("--k-max must be at least 2".into()));
    }
    let mut table = String::from("k,c_k,mu,branch\n");
    for k in 2..=args.k_max {
        // The extremal polygon switches from the one-zero cone to the regular
        // polygon between K=6 and K=7.
        let branch = if k <= 6 { "cone" } else { "regular" };
        table.push_str(&format!(
            "{k},{},{},{branch}\n",
            theorem1_bound(k)?,
            mu_bound(k, args.v0)?
        ));
    }
    match args.output {
        Some(path) => {
            gathersim_core::output::write_atomic(&path, table.as_bytes())?;
            println!("{}", path.display());
        }
        None => print!("{table}"),
    }
    Ok(0)
}

fn cmd_verify_lemma(args: VerifyLemmaArgs) -> Result<u8, Error> {
    if args.n_min < 3 || args.n_max > 8 || args.n_min > args.n_max {
        return Err(Error::InvalidInput(format!(
            "need 3 <= n_min <= n_max <= 8, got {}..{}",
            args.n_min, args.n_max
        )));
    }
    let tol = 5.0 * args.resolution;
    let mut failed = false;
    for n in args.n_min..=args.n_max {
        let oracle = brute_force_min(n, args.resolution)?;
        let closed = theorem1_bound(n)?;
        let gap = (oracle.min_cos_sum - closed).abs();
        let verdict = if gap <= tol { "ok" } else { "MISMATCH" };
        let warn = if oracle.resolution_warning {
            " (warning: resolution too coarse to be authoritative)"
        } else {
            ""
        };
        println!(
            "n={n}: oracle {:.6} vs closed form {closed:.6}, gap {gap:.2e} {verdict}{warn}",
            oracle.min_cos_sum
        );
        failed |= gap > tol;
    }
    Ok(if failed { EXIT_VERIFY } else { 0 })
}

fn read_metrics(dir: &Path) -> Result<Vec<MetricsRecord>, Error> {
    let path = dir.join("metrics.csv");
    let mut reader = csv::Reader::from_path(&path).map_err(|e| match e.kind() {
        csv::ErrorKind::Io(_) => Error::io(
            &path,
            std::io::Error::new(std::io::ErrorKind::NotFound, e.to_string()),
        ),
        _ => Error::Parse { path: path.clone(), detail: e.to_string() },
    })?;
    reader
        .deserialize()
        .collect::<Result<Vec<MetricsRecord>, _>>()
        .map_err(|e| Error::Parse { path, detail: e.to_string() })
}

fn cmd_plot(args: PlotArgs) -> Result<u8, Error> {
    let metrics = read_metrics(&args.run_dir)?;
    let (name, svg_text) = match args.series {
        PlotSeries::Perimeter => {
            let pts = metrics.iter().map(|m| (m.t, m.perimeter)).collect();
            (
                "perimeter",
                svg::line_plot(
                    "hull perimeter L(t)",
                    "t",
                    "L",
                    &[svg::Series { label: "perimeter", color: "blue", points: pts }],
                ),
            )
        }
        PlotSeries::K => {
            let pts: Vec<(f64, f64)> =
                metrics.iter().map(|m| (m.t, m.k_hull as f64)).collect();
            (
                "k",
                svg::line_plot(
                    "hull vertex count K(t)",
                    "t",
                    "K",
                    &[svg::Series {
                        label: "K",
                        color: "blue",
                        points: svg::to_steps(&pts),
                    }],
                ),
            )
        }
        PlotSeries::Rate => {
            let measured: Vec<(f64, f64)> = metrics
                .iter()
                .filter_map(|m| m.dldt_est.map(|d| (m.t, d)))
                .collect();
            let bound: Vec<(f64, f64)> =
                metrics.iter().map(|m| (m.t, m.bound_rate)).collect();
            (
                "rate",
                svg::line_plot(
                    "dL/dt vs bound -mu(K)",
                    "t",
                    "dL/dt",
                    &[
                        svg::Series { label: "measured dL/dt", color: "blue", points: measured },
                        svg::Series {
                            label: "bound -mu(K)",
                            color: "green",
                            points: svg::to_steps(&bound),
                        },
                    ],
                ),
            )
        }
    };
    let path = args
        .output
        .unwrap_or_else(|| args.run_dir.join(format!("{name}.svg")));
    gathersim_core::output::write_atomic(&path, svg_text.as_bytes())?;
    println!("{}", path.display());
    Ok(0)
}
