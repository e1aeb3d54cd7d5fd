use std::fs::{self, File};
use std::io::{BufReader, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use log::info;

use diffattack::baselines::{baseline_attack, BaselineKind};
use diffattack::certify::{certify_budget, impact_estimator};
use diffattack::config::KeyValues;
use diffattack::diffusion::{simulate_sis, InitialInfection, SisParams};
use diffattack::discretize::{normalize_weights, rescale_weighted, round_unweighted};
use diffattack::experiment::{run_experiment, ExperimentConfig};
use diffattack::generators::{barabasi_albert, percentile_target, watts_strogatz};
use diffattack::graph::{load_edge_list, load_target_set};
use diffattack::objective::ObjectiveWeights;
use diffattack::optimizer::{attack, AttackConfig, AttackResult, Budget, ScheduleKind, StepSchedule};
use diffattack::spectral::{max_eigenvalue_shift, PowerConfig};
use diffattack::structural::{average_degree_deviation, degree_sequence_deviation, triangle_deviation};
use diffattack::{Error, Graph, Result, TargetSet};

#[derive(Parser, Debug)]
#[command(name = "diffattack", version, about = "Spectrally budgeted diffusion attacks on graphs")]
struct Cli {
    /// Key-value configuration file (required by `experiment`).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Seed; overrides the configuration.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads for trials and budget sweeps.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run the gradient-ascent attack and discretize its output.
    Attack(AttackArgs),
    /// Run the `deg` or `gel` baseline attack.
    Baseline(BaselineArgs),
    /// Monte Carlo SIS simulation.
    Simulate(SimulateArgs),
    /// Certified budget and impact estimate for a target set.
    Certify(CertifyArgs),
    /// Check structural perturbation bounds between two graphs.
    Verify(VerifyArgs),
    /// Generate a synthetic graph.
    Generate(GenerateArgs),
    /// Budget sweep from a configuration file.
    Experiment,
}

#[derive(Args, Debug)]
struct GraphArgs {
    /// Edge list, one `u v [w]` per line.
    #[arg(long)]
    graph: PathBuf,
    /// Treat the third column as edge weights.
    #[arg(long)]
    weighted: bool,
}

#[derive(Args, Debug)]
struct TargetArgs {
    #[command(flatten)]
    graph: GraphArgs,
    /// Target node ids, one per line.
    #[arg(long)]
    target: PathBuf,
}

#[derive(Args, Debug)]
struct BudgetArgs {
    /// Budget as a fraction of the largest adjacency eigenvalue.
    #[arg(long, conflicts_with = "epsilon")]
    gamma: Option<f64>,
    /// Absolute spectral budget.
    #[arg(long)]
    epsilon: Option<f64>,
}

impl BudgetArgs {
    fn budget(&self) -> Budget {
        match (self.gamma, self.epsilon) {
            (_, Some(e)) => Budget::Absolute(e),
            (Some(g), None) => Budget::RelativeToLambda1(g),
            (None, None) => Budget::RelativeToLambda1(0.5),
        }
    }
}

#[derive(Args, Debug)]
struct AttackArgs {
    #[command(flatten)]
    input: TargetArgs,
    #[command(flatten)]
    budget: BudgetArgs,
    /// Objective weights `lambda,centrality,cut`.
    #[arg(long, value_delimiter = ',', num_args = 3, default_values_t = [1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0])]
    weights: Vec<f64>,
    #[arg(long, default_value_t = 0.1)]
    eta: f64,
    #[arg(long, value_enum, default_value_t = Schedule::Constant)]
    schedule: Schedule,
    #[arg(long, default_value_t = 500)]
    max_steps: usize,
    /// Round rescaled weights to integers (weighted graphs).
    #[arg(long)]
    integer_weights: bool,
}

#[derive(Copy, Clone, Debug, ValueEnum)]
enum Schedule {
    Constant,
    InverseSqrt,
}

#[derive(Args, Debug)]
struct BaselineArgs {
    #[command(flatten)]
    input: TargetArgs,
    #[command(flatten)]
    budget: BudgetArgs,
    #[arg(long, value_enum)]
    kind: Kind,
    /// Weight change per move on weighted graphs; defaults to the mean edge weight.
    #[arg(long)]
    weighted_step: Option<f64>,
}

#[derive(Copy, Clone, Debug, ValueEnum)]
enum Kind {
    Deg,
    Gel,
}

#[derive(Args, Debug)]
struct SimulateArgs {
    #[command(flatten)]
    input: TargetArgs,
    #[arg(long, default_value_t = 0.06)]
    beta: f64,
    #[arg(long, default_value_t = 0.24)]
    delta: f64,
    #[arg(long, default_value_t = 30)]
    steps: usize,
    #[arg(long, default_value_t = 2000)]
    trials: usize,
    /// Infect this node first instead of a uniformly random one.
    #[arg(long)]
    initial: Option<usize>,
}

#[derive(Args, Debug)]
struct CertifyArgs {
    #[command(flatten)]
    input: TargetArgs,
    #[arg(long, default_value_t = 0.06)]
    beta: f64,
    #[arg(long, default_value_t = 0.24)]
    delta: f64,
    /// Tolerated impact change, carried into the report.
    #[arg(long, default_value_t = 0.0)]
    tau: f64,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    #[command(flatten)]
    original: GraphArgs,
    /// The perturbed graph.
    #[arg(long)]
    modified: PathBuf,
    /// Also check that every eigenvalue moved by at most this much.
    #[arg(long)]
    epsilon: Option<f64>,
}

#[derive(Args, Debug)]
struct GenerateArgs {
    #[arg(value_enum)]
    model: Model,
    #[arg(long, default_value_t = 375)]
    n: usize,
    /// Edges per new node (Barabási-Albert).
    #[arg(long, default_value_t = 5)]
    attach: usize,
    /// Lattice degree (Watts-Strogatz).
    #[arg(long, default_value_t = 10)]
    k: usize,
    /// Rewiring probability (Watts-Strogatz).
    #[arg(long, default_value_t = 0.2)]
    p: f64,
    /// Also write the percentile target set (node plus neighbours).
    #[arg(long)]
    target_percentile: Option<f64>,
}

#[derive(Copy, Clone, Debug, ValueEnum)]
enum Model {
    Ba,
    Ws,
}

fn read_graph(args: &GraphArgs) -> Result<Graph> {
    load_edge_list(BufReader::new(File::open(&args.graph)?), args.weighted)
}

fn read_inputs(args: &TargetArgs) -> Result<(Graph, TargetSet)> {
    let g = read_graph(&args.graph)?;
    let s = load_target_set(BufReader::new(File::open(&args.target)?), g.node_count())?;
    Ok((g, s))
}

fn out_dir(cli: &Cli) -> Result<Option<&Path>> {
    match &cli.out {
        Some(dir) => {
            fs::create_dir_all(dir)?;
            Ok(Some(dir.as_path()))
        }
        None => Ok(None),
    }
}

fn write_file(dir: &Path, name: &str, contents: &str) -> Result<()> {
    let path = dir.join(name);
    fs::write(&path, contents)?;
    info!("wrote {}", path.display());
    Ok(())
}

fn power(cli: &Cli) -> PowerConfig {
    PowerConfig {
        seed: cli.seed.unwrap_or(0),
        ..PowerConfig::default()
    }
}

fn attack_summary(r: &AttackResult, modified: &Graph) -> String {
    format!(
        "epsilon,budgetUsed,iterations,termination,edges\n{},{},{},{},{}\n",
        r.epsilon,
        r.budget_used,
        r.iterations,
        r.termination.as_str(),
        modified.edge_count()
    )
}

fn emit(cli: &Cli, name: &str, csv: &str) -> Result<()> {
    print!("{csv}");
    if let Some(dir) = out_dir(cli)? {
        write_file(dir, name, csv)?;
    }
    Ok(())
}

fn cmd_attack(cli: &Cli, a: &AttackArgs) -> Result<()> {
    let (g, s) = read_inputs(&a.input)?;
    let schedule = match a.schedule {
        Schedule::Constant => ScheduleKind::Constant,
        Schedule::InverseSqrt => ScheduleKind::InverseSqrt,
    };
    let cfg = AttackConfig {
        budget: a.budget.budget(),
        max_steps: a.max_steps,
        schedule: StepSchedule::new(schedule, a.eta)?,
        weights: ObjectiveWeights::new(a.weights[0], a.weights[1], a.weights[2])?,
        power: power(cli),
    };
    let (result, modified) = if g.is_weighted() {
        let (normalized, _) = normalize_weights(&g);
        let r = attack(&normalized, &s, &cfg)?;
        let m = rescale_weighted(&g, &r, a.integer_weights)?;
        (r, m)
    } else {
        let r = attack(&g, &s, &cfg)?;
        let m = round_unweighted(&g, &r, r.epsilon, &cfg.power)?;
        (r, m)
    };
    if let Some(dir) = out_dir(cli)? {
        write_file(dir, "modified.edgelist", &modified.to_edge_list())?;
        let mut trace = String::from("iteration,objective,stepNorm\n");
        for (i, obj) in result.objective_trace.iter().enumerate() {
            let step = result.step_norms.get(i).map(|v| v.to_string()).unwrap_or_default();
            trace.push_str(&format!("{i},{obj},{step}\n"));
        }
        write_file(dir, "trace.csv", &trace)?;
    }
    emit(cli, "attack.csv", &attack_summary(&result, &modified))
}

fn cmd_baseline(cli: &Cli, b: &BaselineArgs) -> Result<()> {
    let (g, s) = read_inputs(&b.input)?;
    let kind = match b.kind {
        Kind::Deg => BaselineKind::Deg,
        Kind::Gel => BaselineKind::Gel,
    };
    let cfg = AttackConfig {
        budget: b.budget.budget(),
        power: power(cli),
        ..AttackConfig::default()
    };
    let (work, scale) = if g.is_weighted() { normalize_weights(&g) } else { (g.clone(), 1.0) };
    let epsilon = cfg.epsilon_for(&work.to_dense())?;
    let step = b.weighted_step.map(|st| st / scale);
    let result = baseline_attack(&work, &s, kind, epsilon, step, &cfg.power)?;
    let modified = if g.is_weighted() {
        rescale_weighted(&g, &result, false)?
    } else {
        Graph::from_dense(&result.adjacency, false)?
    };
    if let Some(dir) = out_dir(cli)? {
        write_file(dir, "modified.edgelist", &modified.to_edge_list())?;
    }
    emit(cli, "baseline.csv", &attack_summary(&result, &modified))
}

fn cmd_simulate(cli: &Cli, a: &SimulateArgs) -> Result<()> {
    let (g, s) = read_inputs(&a.input)?;
    let p = SisParams {
        beta: a.beta,
        delta: a.delta,
        steps: a.steps,
        trials: a.trials,
        seed: cli.seed.unwrap_or(0),
    };
    let initial = a.initial.map_or(InitialInfection::UniformRandom, InitialInfection::Fixed);
    let r = simulate_sis(&g, &s, &p, initial)?;
    let csv = format!(
        "fracS,fracSPrime,fracAll,stderrS,stderrSPrime\n{},{},{},{},{}\n",
        r.frac_s, r.frac_s_prime, r.frac_all, r.stderr_s, r.stderr_s_prime
    );
    emit(cli, "simulate.csv", &csv)
}

fn cmd_certify(cli: &Cli, a: &CertifyArgs) -> Result<()> {
    let (g, s) = read_inputs(&a.input)?;
    let bound = certify_budget(&g, &s, a.beta, a.delta, a.tau)?;
    let estimate = match impact_estimator(&g, &s, a.beta, a.delta) {
        Ok(e) => e.value.to_string(),
        Err(Error::UndefinedEstimator(_)) => String::from("NaN"),
        Err(e) => return Err(e),
    };
    let kind = if bound.weighted { "weighted-degree" } else { "degree" };
    let csv = format!(
        "epsilonMin,applicable,tau,certificate,impactEstimate\n{},{},{},{kind},{estimate}\n",
        bound.epsilon_min, bound.applicable, bound.tau
    );
    emit(cli, "certify.csv", &csv)
}

fn cmd_verify(cli: &Cli, a: &VerifyArgs) -> Result<()> {
    let g = read_graph(&a.original)?;
    let h = load_edge_list(BufReader::new(File::open(&a.modified)?), a.original.weighted)?;
    if g.node_count() != h.node_count() {
        return Err(Error::SizeMismatch(g.node_count(), h.node_count()));
    }
    let cfg = power(cli);
    let mut rows = vec![
        ("degreeSequence", degree_sequence_deviation(&g, &h, &cfg)?),
        ("averageDegree", average_degree_deviation(&g, &h, &cfg)?),
    ];
    if !g.is_weighted() {
        rows.push(("triangles", triangle_deviation(&g, &h, &cfg)?));
    }
    let mut csv = String::from("name,measured,bound,holds\n");
    for (name, c) in rows {
        csv.push_str(&format!("{name},{},{},{}\n", c.measured, c.bound, c.holds()));
    }
    if let Some(eps) = a.epsilon {
        let shift = max_eigenvalue_shift(&g.to_dense(), &h.to_dense())?;
        csv.push_str(&format!("eigenvalueShift,{shift},{eps},{}\n", shift <= eps + 1e-6));
    }
    emit(cli, "verify.csv", &csv)
}

fn cmd_generate(cli: &Cli, a: &GenerateArgs) -> Result<()> {
    let seed = cli.seed.unwrap_or(0);
    let g = match a.model {
        Model::Ba => barabasi_albert(a.n, a.attach, seed)?,
        Model::Ws => watts_strogatz(a.n, a.k, a.p, seed)?,
    };
    let target = a.target_percentile.map(|p| percentile_target(&g, p)).transpose()?;
    match out_dir(cli)? {
        Some(dir) => {
            write_file(dir, "graph.edgelist", &g.to_edge_list())?;
            if let Some(t) = target {
                write_file(dir, "target.txt", &t.to_lines())?;
            }
        }
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(g.to_edge_list().as_bytes())?;
        }
    }
    Ok(())
}

fn cmd_experiment(cli: &Cli) -> Result<()> {
    let path = cli.config.as_ref().ok_or_else(|| Error::Config {
        path: String::from("<none>"),
        message: String::from("`experiment` needs --config PATH"),
    })?;
    let kv = KeyValues::load(path)?;
    let base = path.parent().unwrap_or(Path::new("."));
    let mut cfg = ExperimentConfig::from_kv(&kv, base)?;
    if let Some(seed) = cli.seed {
        cfg = cfg.with_seed(seed);
    }
    let out = run_experiment(&cfg)?;
    let results = out.results_csv();
    match out_dir(cli)? {
        Some(dir) => {
            write_file(dir, "results.csv", &results)?;
            if let Some(walks) = out.walks_csv() {
                write_file(dir, "walks.csv", &walks)?;
            }
        }
        None => print!("{results}"),
    }
    Ok(())
}

fn run(cli: &Cli) -> Result<()> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Error::InvalidParameter(format!("thread pool: {e}")))?;
    }
    match &cli.command {
        Command::Attack(a) => cmd_attack(cli, a),
        Command::Baseline(b) => cmd_baseline(cli, b),
        Command::Simulate(a) => cmd_simulate(cli, a),
        Command::Certify(a) => cmd_certify(cli, a),
        Command::Verify(a) => cmd_verify(cli, a),
        Command::Generate(a) => cmd_generate(cli, a),
        Command::Experiment => cmd_experiment(cli),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_input_error() { 1 } else { 2 })
        }
    }
}
