use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use doaloc::bench::{
    read_results_csv, render_summary, run_experiment, sweep, write_results_csv, write_sweep_csv, EstimatorKind,
    EstimatorSettings, ExperimentPlan, PlanFile, Scenario, SweepParameter,
};
use doaloc::datasets::{
    calibrate_model, load_scenario, snapshots_to_records, wide_to_canonical, write_canonical, PointOrdering,
    ScenarioDescriptor, Technology, WideColumns,
};
use doaloc::pf::ResidualMode;
use doaloc::radio::PathLossModel;
use doaloc::sim::{generate_trajectory, simulate_stream, TrajectoryKind, Workspace, DEFAULT_STEP_LENGTH};

/// stdout writes that tolerate a closed pipe (`doaloc report x.csv | head`).
macro_rules! out {
    ($($t:tt)*) => {{
        use std::io::Write as _;
        let _ = write!(std::io::stdout().lock(), $($t)*);
    }};
}

macro_rules! outln {
    ($($t:tt)*) => {{
        use std::io::Write as _;
        let _ = writeln!(std::io::stdout().lock(), $($t)*);
    }};
}

type CliResult<T> = Result<T, Box<dyn std::error::Error>>;

#[derive(Parser)]
#[command(name = "doaloc", version, about = "RSSI direction-of-arrival localization: simulator and benchmark")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate one trajectory and write it as canonical CSV plus a descriptor.
    Simulate(SimulateArgs),
    /// Run every estimator on every scenario and write a results CSV.
    Run(RunArgs),
    /// Repeat a run over a grid of one parameter.
    Sweep(SweepArgs),
    /// Print the summary table of a results CSV.
    Report(ReportArgs),
    /// Convert a wide-format CSV (one row per point) to canonical CSV.
    Convert(ConvertArgs),
}

#[derive(Args)]
struct SimulateArgs {
    #[arg(long, default_value = "diagonal")]
    trajectory: TrajectoryKind,
    #[arg(long, default_value_t = 6.0)]
    width: f64,
    #[arg(long, default_value_t = 6.0)]
    height: f64,
    #[arg(long, default_value_t = DEFAULT_STEP_LENGTH)]
    step: f64,
    #[arg(long, default_value_t = -40.0, allow_negative_numbers = true)]
    reference_power: f64,
    #[arg(long, default_value_t = 3.0)]
    path_loss_n: f64,
    #[arg(long, default_value_t = 2.0)]
    noise_std: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output directory; receives `<name>.csv` and `<name>.toml`.
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    name: Option<String>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Profile {
    /// Odometry on, σ = 0.3 rad, unsmoothed DOA, weighted-mean estimate.
    Calibrated,
    /// Component defaults: σ = 0.17 rad, K = 10 smoothing, max-weight estimate, no odometry.
    Default,
}

#[derive(Clone, Copy, ValueEnum)]
enum Toggle {
    On,
    Off,
}

#[derive(Clone, Copy, ValueEnum)]
enum Residual {
    Doa,
    Rss,
}

#[derive(Args)]
struct ExperimentArgs {
    /// Plan file (TOML); other flags override it.
    #[arg(long)]
    plan: Option<PathBuf>,
    /// `sim:<trajectory>` or a descriptor path; repeatable. Defaults to the three simulated trajectories.
    #[arg(long = "scenario")]
    scenarios: Vec<String>,
    /// Comma-separated estimator ids.
    #[arg(long, value_delimiter = ',')]
    estimators: Vec<EstimatorKind>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Estimator settings; defaults to `calibrated`, or to the plan's `[settings]` with --plan.
    #[arg(long, value_enum)]
    profile: Option<Profile>,
    #[arg(long, value_enum)]
    odometry: Option<Toggle>,
    #[arg(long, value_enum)]
    residual_mode: Option<Residual>,
    #[arg(long)]
    particles: Option<usize>,
    /// Likelihood spread for the particle filter and the Markov grid.
    #[arg(long)]
    sigma: Option<f64>,
    /// Measurement noise of simulated scenarios, dBm.
    #[arg(long)]
    noise_std: Option<f64>,
    #[arg(long)]
    path_loss_n: Option<f64>,
    /// Markov cell size, D-RSS template spacing and particle jitter, meters.
    #[arg(long)]
    resolution: Option<f64>,
    /// Run trials sequentially so per-iteration timings are not contended.
    #[arg(long)]
    precise_timing: bool,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    experiment: ExperimentArgs,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    experiment: ExperimentArgs,
    /// particles, path_loss_n, resolution or noise_std; taken from the plan when omitted.
    #[arg(long)]
    parameter: Option<SweepParameter>,
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    values: Vec<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ReportArgs {
    results: PathBuf,
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct ConvertArgs {
    input: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value = "x")]
    x: String,
    #[arg(long, default_value = "y")]
    y: String,
    /// Comma-separated anchor column names.
    #[arg(long, value_delimiter = ',', required = true)]
    anchors: Vec<String>,
    #[arg(long)]
    point_id: Option<String>,
    #[arg(long)]
    channel: Option<String>,
    #[arg(long)]
    technology: Technology,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if e.use_stderr() => {
            let msg = e.render().to_string();
            let first = msg.lines().next().unwrap_or("").trim_start_matches("error: ");
            eprintln!("{}", serde_json::json!({ "error": first, "usage": true }));
            return ExitCode::from(2);
        }
        Err(e) => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
    };
    let result = match cli.command {
        Command::Simulate(a) => simulate(a),
        Command::Run(a) => run(a),
        Command::Sweep(a) => run_sweep(a),
        Command::Report(a) => report(a),
        Command::Convert(a) => convert(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", serde_json::json!({ "error": e.to_string() }));
            ExitCode::FAILURE
        }
    }
}

fn simulate(a: SimulateArgs) -> CliResult<()> {
    let ws = Workspace::four_corner(a.width, a.height)?;
    let model = PathLossModel::new(a.reference_power, a.path_loss_n, a.noise_std)?;
    let trajectory = generate_trajectory(&ws, a.trajectory, a.step)?;
    let stream = simulate_stream(&ws, &trajectory, &model, a.seed)?;
    let name = a.name.unwrap_or_else(|| format!("sim-{}", a.trajectory.name()));
    std::fs::create_dir_all(&a.out)?;
    let csv = a.out.join(format!("{name}.csv"));
    write_canonical(&csv, &snapshots_to_records(&stream, ws.layout(), Technology::Simulated)?)?;
    let descriptor = ScenarioDescriptor {
        name: name.clone(),
        workspace: ws,
        technology: Technology::Simulated,
        channel: None,
        region: None,
        ordering: PointOrdering::PointId,
        model: Some(model),
        data: Some(PathBuf::from(format!("{name}.csv"))),
    };
    let toml = a.out.join(format!("{name}.toml"));
    std::fs::write(&toml, descriptor.to_toml_string())?;
    outln!(
        "{}",
        serde_json::json!({ "snapshots": stream.len(), "data": csv.display().to_string(), "descriptor": toml.display().to_string() })
    );
    Ok(())
}

fn run(a: RunArgs) -> CliResult<()> {
    let (plan, _) = build_plan(&a.experiment)?;
    let report = run_experiment(&plan)?;
    for f in &report.failures {
        eprintln!(
            "{}",
            serde_json::json!({ "trial_failure": { "estimator": f.estimator.id(), "scenario": f.scenario, "trial": f.trial, "error": f.error } })
        );
    }
    if report.records.is_empty() {
        return Err("every trial failed".into());
    }
    out!("{}", render_summary(&report.records));
    if let Some(out) = a.out {
        write_results_csv(&out, &report.records)?;
    }
    Ok(())
}

fn run_sweep(a: SweepArgs) -> CliResult<()> {
    let (plan, from_file) = build_plan(&a.experiment)?;
    let (parameter, values) = match (a.parameter, from_file) {
        (Some(p), _) => (p, a.values),
        (None, Some(s)) => (s.parameter, if a.values.is_empty() { s.values } else { a.values }),
        (None, None) => return Err("sweep needs --parameter or a plan with a [sweep] table".into()),
    };
    if values.is_empty() {
        return Err("sweep needs at least one value".into());
    }
    let points = sweep(&plan, parameter, &values)?;
    for p in &points {
        outln!("{} = {}", parameter.name(), p.value);
        out!("{}", render_summary(&p.report.records));
        outln!();
    }
    if let Some(out) = a.out {
        write_sweep_csv(&out, &points)?;
    }
    Ok(())
}

fn report(a: ReportArgs) -> CliResult<()> {
    let records = read_results_csv(&a.results).map_err(|e| format!("{}: {e}", a.results.display()))?;
    if a.json {
        outln!("{}", serde_json::to_string_pretty(&records)?);
    } else {
        out!("{}", render_summary(&records));
    }
    Ok(())
}

fn convert(a: ConvertArgs) -> CliResult<()> {
    let columns = WideColumns { x: a.x, y: a.y, anchors: a.anchors, point_id: a.point_id, channel: a.channel };
    let input = std::fs::File::open(&a.input).map_err(|e| format!("{}: {e}", a.input.display()))?;
    let records = wide_to_canonical(input, &columns, a.technology)?;
    write_canonical(&a.out, &records)?;
    outln!("{}", serde_json::json!({ "records": records.len(), "out": a.out.display().to_string() }));
    Ok(())
}

/// Assembles the plan from an optional plan file and the flag overrides.
fn build_plan(a: &ExperimentArgs) -> CliResult<(ExperimentPlan, Option<doaloc::bench::SweepEntry>)> {
    let (mut plan, sweep_entry) = match &a.plan {
        Some(path) => {
            let file = PlanFile::from_file(path).map_err(|e| format!("{}: {e}", path.display()))?;
            let base = path.parent().unwrap_or(Path::new("."));
            (file.resolve(base)?, file.sweep)
        }
        None => {
            let truth = PathLossModel::new(-40.0, 3.0, 2.0)?;
            let scenarios = if a.scenarios.is_empty() { Scenario::simulated_suite(truth)? } else { Vec::new() };
            let mut plan = ExperimentPlan::new(scenarios, EstimatorKind::STANDARD.to_vec());
            plan.settings = EstimatorSettings::calibrated();
            (plan, None)
        }
    };
    if !a.scenarios.is_empty() {
        let truth = PathLossModel::new(-40.0, 3.0, 2.0)?;
        plan.scenarios = a.scenarios.iter().map(|s| parse_scenario(s, truth)).collect::<CliResult<_>>()?;
    }
    if !a.estimators.is_empty() {
        plan.estimators = a.estimators.clone();
    }
    if let Some(t) = a.trials {
        plan.trials = t;
    }
    if let Some(s) = a.seed {
        plan.base_seed = s;
    }
    match a.profile {
        Some(Profile::Calibrated) => plan.settings = EstimatorSettings::calibrated(),
        Some(Profile::Default) => plan.settings = EstimatorSettings::default(),
        None => {}
    }
    if let Some(o) = a.odometry {
        plan.settings.odometry = matches!(o, Toggle::On);
    }
    if let Some(r) = a.residual_mode {
        let mode = match r {
            Residual::Doa => ResidualMode::Doa,
            Residual::Rss => ResidualMode::Rss,
        };
        plan.settings.pf.residual_mode = mode;
        plan.settings.markov.residual_mode = mode;
    }
    if let Some(s) = a.sigma {
        plan.settings.pf.sigma = s;
        plan.settings.markov.sigma = s;
    }
    if let Some(n) = a.particles {
        plan = SweepParameter::Particles.apply(&plan, n as f64)?;
    }
    if let Some(n) = a.noise_std {
        plan = SweepParameter::NoiseStd.apply(&plan, n)?;
    }
    if let Some(n) = a.path_loss_n {
        plan = SweepParameter::PathLossN.apply(&plan, n)?;
    }
    if let Some(r) = a.resolution {
        plan = SweepParameter::Resolution.apply(&plan, r)?;
    }
    plan.precise_timing |= a.precise_timing;
    plan.validate()?;
    Ok((plan, sweep_entry))
}

fn parse_scenario(spec: &str, truth: PathLossModel) -> CliResult<Scenario> {
    if let Some(kind) = spec.strip_prefix("sim:") {
        let kind: TrajectoryKind = kind.parse()?;
        return Ok(Scenario::simulated(Workspace::default(), kind, DEFAULT_STEP_LENGTH, truth)?);
    }
    let d = ScenarioDescriptor::from_file(Path::new(spec)).map_err(|e| format!("{spec}: {e}"))?;
    let data = d.data.clone().ok_or_else(|| format!("descriptor `{spec}` names no data file"))?;
    let loaded = load_scenario(&data, &d).map_err(|e| format!("{}: {e}", data.display()))?;
    let model = match d.model {
        Some(m) => m,
        None => calibrate_model(&loaded.snapshots, d.layout())?,
    };
    Ok(Scenario::recorded(d.name.clone(), d.workspace.clone(), loaded.snapshots, model))
}
