//! The budget sweep: for each `γ`, attack, discretize, and compare SIS
//! outcomes on the original and modified graphs.

use std::fmt::Write as _;
use std::fs::File;
use std::io::BufReader;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::baselines::{baseline_attack, BaselineKind};
use crate::config::KeyValues;
use crate::diffusion::{page_rank, random_walk_restart, simulate_sis, InitialInfection, SimulationResult, SisParams, WalkResult};
use crate::discretize::{normalize_weights, rescale_weighted, round_unweighted};
use crate::error::{Error, Result};
use crate::generators::{barabasi_albert, percentile_target, watts_strogatz};
use crate::graph::{induced_subgraph, load_edge_list, load_target_set, Graph, TargetSet};
use crate::objective::ObjectiveWeights;
use crate::optimizer::{attack, AttackConfig, AttackResult, Budget, ScheduleKind, StepSchedule};
use crate::spectral::{perron_pair, PowerConfig};

#[derive(Debug, Clone, PartialEq)]
pub enum GraphSource {
    File { path: PathBuf, weighted: bool },
    BarabasiAlbert { n: usize, attach: usize },
    WattsStrogatz { n: usize, k: usize, p: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub enum TargetSource {
    File(PathBuf),
    Percentile(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub graph: GraphSource,
    pub target: TargetSource,
    pub gammas: Vec<f64>,
    pub attack: AttackConfig,
    pub sis: SisParams,
    pub baselines: Vec<BaselineKind>,
    pub walks: bool,
    pub rwr_restart: f64,
    pub pagerank_restart: f64,
    pub integer_weights: bool,
    pub weighted_step: Option<f64>,
    /// Seeds graph generation, SIS trials and walk starts.
    pub seed: u64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            graph: GraphSource::BarabasiAlbert { n: 375, attach: 5 },
            target: TargetSource::Percentile(90.0),
            gammas: vec![0.1, 0.2, 0.3, 0.4, 0.5],
            attack: AttackConfig::default(),
            sis: SisParams::default(),
            baselines: Vec::new(),
            walks: false,
            rwr_restart: 0.05,
            pagerank_restart: 0.1,
            integer_weights: false,
            weighted_step: None,
            seed: 0,
        }
    }
}

impl ExperimentConfig {
    /// Reads an experiment from key-value settings. Relative paths resolve
    /// against `base`.
    pub fn from_kv(kv: &KeyValues, base: &Path) -> Result<Self> {
        let d = Self::default();
        let weighted = kv.get_or("weighted", false)?;
        let graph = match (kv.get_str("graph"), kv.get_str("generator")) {
            (Some(p), None) => GraphSource::File {
                path: base.join(p),
                weighted,
            },
            (None, Some("ba")) => GraphSource::BarabasiAlbert {
                n: kv.get_or("n", 375)?,
                attach: kv.get_or("attach", 5)?,
            },
            (None, Some("ws")) => GraphSource::WattsStrogatz {
                n: kv.get_or("n", 375)?,
                k: kv.get_or("ws_k", 10)?,
                p: kv.get_or("ws_p", 0.2)?,
            },
            (None, Some(other)) => return Err(kv.error("generator", format!("unknown generator {other:?}"))),
            (Some(_), Some(_)) => return Err(kv.error("graph", "give either `graph` or `generator`, not both")),
            (None, None) => return Err(kv.error("graph", "missing (or set `generator`)")),
        };
        let target = match (kv.get_str("target"), kv.get::<f64>("target_percentile")?) {
            (Some(p), None) => TargetSource::File(base.join(p)),
            (None, Some(pct)) => TargetSource::Percentile(pct),
            (None, None) => d.target.clone(),
            (Some(_), Some(_)) => return Err(kv.error("target", "give either `target` or `target_percentile`")),
        };
        let gammas = kv.get_list::<f64>("gammas")?.unwrap_or(d.gammas);
        if let Some(g) = gammas.iter().find(|g| !(g.is_finite() && **g >= 0.0)) {
            return Err(kv.error("gammas", format!("budget fraction must be nonnegative, got {g}")));
        }

        let weights = match kv.get_list::<f64>("weights")? {
            None => ObjectiveWeights::equal(),
            Some(w) if w.len() == 3 => {
                ObjectiveWeights::new(w[0], w[1], w[2]).map_err(|e| kv.error("weights", e))?
            }
            Some(_) => return Err(kv.error("weights", "expected three comma-separated values")),
        };
        let schedule_kind: ScheduleKind = kv.get_or("schedule", ScheduleKind::Constant)?;
        let schedule =
            StepSchedule::new(schedule_kind, kv.get_or("eta", 0.1)?).map_err(|e| kv.error("eta", e))?;
        let power = PowerConfig {
            k: kv.get_or("power_iterations", d.attack.power.k)?,
            tol: kv.get_or("power_tol", d.attack.power.tol)?,
            seed: kv.get_or("power_seed", d.attack.power.seed)?,
        };
        let attack = AttackConfig {
            budget: Budget::RelativeToLambda1(0.0),
            max_steps: kv.get_or("max_steps", d.attack.max_steps)?,
            schedule,
            weights,
            power,
        };

        let seed = kv.get_or("seed", 0u64)?;
        let sis = SisParams {
            beta: kv.get_or("beta", if weighted { 0.2 } else { 0.06 })?,
            delta: kv.get_or("delta", 0.24)?,
            steps: kv.get_or("steps", d.sis.steps)?,
            trials: kv.get_or("trials", d.sis.trials)?,
            seed,
        };
        sis.validate().map_err(|e| kv.error("beta/delta/trials", e))?;

        Ok(Self {
            graph,
            target,
            gammas,
            attack,
            sis,
            baselines: kv.get_list("baselines")?.unwrap_or_default(),
            walks: kv.get_or("walks", false)?,
            rwr_restart: kv.get_or("rwr_restart", d.rwr_restart)?,
            pagerank_restart: kv.get_or("pagerank_restart", d.pagerank_restart)?,
            integer_weights: kv.get_or("integer_weights", false)?,
            weighted_step: kv.get("weighted_step")?,
            seed,
        })
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self.sis.seed = seed;
        self
    }
}

/// Loads or generates the graph and target set of an experiment.
pub fn prepare(cfg: &ExperimentConfig) -> Result<(Graph, TargetSet)> {
    let g = match &cfg.graph {
        GraphSource::File { path, weighted } => load_edge_list(BufReader::new(File::open(path)?), *weighted)?,
        GraphSource::BarabasiAlbert { n, attach } => barabasi_albert(*n, *attach, cfg.seed)?,
        GraphSource::WattsStrogatz { n, k, p } => watts_strogatz(*n, *k, *p, cfg.seed)?,
    };
    let s = match &cfg.target {
        TargetSource::File(path) => load_target_set(BufReader::new(File::open(path)?), g.node_count())?,
        TargetSource::Percentile(p) => percentile_target(&g, *p)?,
    };
    if s.complement().is_empty() {
        return Err(Error::InvalidTarget("target set covers every node".into()));
    }
    Ok((g, s))
}

/// `λ₁` of the subgraph induced by `S`, zero when it has no edges.
pub fn lambda1_of_target(g: &Graph, s: &TargetSet, cfg: &PowerConfig) -> Result<f64> {
    let sub = induced_subgraph(g, s);
    if sub.edge_count() == 0 {
        return Ok(0.0);
    }
    Ok(perron_pair(&sub, cfg)?.value)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Ascent,
    Baseline(BaselineKind),
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Ascent => "ascent",
            Self::Baseline(k) => k.as_str(),
        }
    }
}

/// Output of one attack method at one budget.
#[derive(Debug, Clone)]
pub struct MethodOutcome {
    pub gamma: f64,
    pub method: Method,
    pub epsilon: f64,
    pub attack: AttackResult,
    pub modified: Graph,
    pub sim_mod: SimulationResult,
    pub lambda1_s_mod: f64,
    pub wall_time: f64,
    /// `(rwr, pagerank)` on the modified graph, when walks are requested.
    pub walks_mod: Option<(WalkResult, WalkResult)>,
}

#[derive(Debug, Clone)]
pub struct ExperimentOutput {
    pub graph: Graph,
    pub target: TargetSet,
    pub sim_orig: SimulationResult,
    pub lambda1_s_orig: f64,
    pub walks_orig: Option<(WalkResult, WalkResult)>,
    pub rwr_start: Option<usize>,
    /// Grouped by `γ` in configuration order, ascent first, then baselines.
    pub outcomes: Vec<MethodOutcome>,
}

/// Seeded walk start drawn from the non-isolated nodes of `S′`.
pub fn pick_rwr_start(g: &Graph, s: &TargetSet, seed: u64) -> Option<usize> {
    let pool: Vec<usize> = s.complement().iter().copied().filter(|&i| !g.neighbors(i).is_empty()).collect();
    if pool.is_empty() {
        return None;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(u64::MAX);
    Some(pool[rng.random_range(0..pool.len())])
}

fn run_walks(g: &Graph, s: &TargetSet, cfg: &ExperimentConfig, start: usize) -> Result<(WalkResult, WalkResult)> {
    use crate::diffusion::WALK_TOL;
    let rwr = if g.neighbors(start).is_empty() {
        // A walker at an isolated start never leaves it.
        let mut rank = vec![0.0; g.node_count()];
        rank[start] = 1.0;
        WalkResult {
            rank,
            mass_s: 0.0,
            mass_s_prime: 1.0,
            iterations: 0,
        }
    } else {
        random_walk_restart(g, s, cfg.rwr_restart, start, WALK_TOL)?
    };
    Ok((rwr, page_rank(g, s, cfg.pagerank_restart, WALK_TOL)?))
}

/// Attacks, discretizes and simulates for one budget and method.
pub fn run_method(
    g: &Graph,
    s: &TargetSet,
    cfg: &ExperimentConfig,
    gamma: f64,
    method: Method,
    rwr_start: Option<usize>,
) -> Result<MethodOutcome> {
    let clock = Instant::now();
    let weighted = g.is_weighted();
    let (work, _) = if weighted { normalize_weights(g) } else { (g.clone(), 1.0) };
    let attack_cfg = AttackConfig {
        budget: Budget::RelativeToLambda1(gamma),
        ..cfg.attack.clone()
    };
    let epsilon = attack_cfg.epsilon_for(&work.to_dense())?;
    let result = match method {
        Method::Ascent => attack(&work, s, &attack_cfg)?,
        Method::Baseline(kind) => {
            let step = cfg.weighted_step.map(|st| st / g.max_weight());
            baseline_attack(&work, s, kind, epsilon, step, &attack_cfg.power)?
        }
    };
    let modified = if weighted {
        rescale_weighted(g, &result, cfg.integer_weights)?
    } else {
        match method {
            Method::Ascent => round_unweighted(g, &result, epsilon, &attack_cfg.power)?,
            Method::Baseline(_) => Graph::from_dense(&result.adjacency, false)?,
        }
    };
    let wall_time = clock.elapsed().as_secs_f64();

    let sim_mod = simulate_sis(&modified, s, &cfg.sis, InitialInfection::UniformRandom)?;
    let lambda1_s_mod = lambda1_of_target(&modified, s, &cfg.attack.power)?;
    let walks_mod = match rwr_start {
        Some(start) if cfg.walks => Some(run_walks(&modified, s, cfg, start)?),
        _ => None,
    };
    Ok(MethodOutcome {
        gamma,
        method,
        epsilon,
        attack: result,
        modified,
        sim_mod,
        lambda1_s_mod,
        wall_time,
        walks_mod,
    })
}

/// Runs the full sweep. Budgets run in parallel; results keep configuration
/// order.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentOutput> {
    let (g, s) = prepare(cfg)?;
    run_on(&g, &s, cfg)
}

/// Runs the sweep on an already prepared graph and target.
pub fn run_on(g: &Graph, s: &TargetSet, cfg: &ExperimentConfig) -> Result<ExperimentOutput> {
    if cfg.gammas.is_empty() {
        return Err(Error::InvalidParameter("no budget fractions given".into()));
    }
    let sim_orig = simulate_sis(g, s, &cfg.sis, InitialInfection::UniformRandom)?;
    let lambda1_s_orig = lambda1_of_target(g, s, &cfg.attack.power)?;
    let rwr_start = if cfg.walks { pick_rwr_start(g, s, cfg.seed) } else { None };
    let walks_orig = match rwr_start {
        Some(start) => Some(run_walks(g, s, cfg, start)?),
        None => None,
    };

    let mut jobs = Vec::new();
    for &gamma in &cfg.gammas {
        jobs.push((gamma, Method::Ascent));
        for &k in &cfg.baselines {
            jobs.push((gamma, Method::Baseline(k)));
        }
    }
    let outcomes = jobs
        .par_iter()
        .map(|&(gamma, method)| run_method(g, s, cfg, gamma, method, rwr_start))
        .collect::<Result<Vec<_>>>()?;

    Ok(ExperimentOutput {
        graph: g.clone(),
        target: s.clone(),
        sim_orig,
        lambda1_s_orig,
        walks_orig,
        rwr_start,
        outcomes,
    })
}

pub const RESULTS_HEADER: &str = "gamma,method,fracS_orig,fracS_mod,fracSPrime_orig,fracSPrime_mod,\
stderrS_orig,stderrS_mod,stderrSPrime_orig,stderrSPrime_mod,lambda1S_orig,lambda1S_mod,budgetUsed,wallTime";

pub const WALKS_HEADER: &str = "gamma,method,walk,massS_orig,massS_mod,massSPrime_orig,massSPrime_mod";

impl ExperimentOutput {
    /// Results CSV with LF line endings; `wallTime` is the last column.
    pub fn results_csv(&self) -> String {
        let mut out = String::new();
        out.push_str(RESULTS_HEADER);
        out.push('\n');
        let o = &self.sim_orig;
        for m in &self.outcomes {
            let r = &m.sim_mod;
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
                m.gamma,
                m.method.as_str(),
                o.frac_s,
                r.frac_s,
                o.frac_s_prime,
                r.frac_s_prime,
                o.stderr_s,
                r.stderr_s,
                o.stderr_s_prime,
                r.stderr_s_prime,
                self.lambda1_s_orig,
                m.lambda1_s_mod,
                m.attack.budget_used,
                m.wall_time
            );
        }
        out
    }

    /// Walk summaries CSV; empty when walks were not requested.
    pub fn walks_csv(&self) -> Option<String> {
        let (rwr_o, pr_o) = self.walks_orig.as_ref()?;
        let mut out = String::new();
        out.push_str(WALKS_HEADER);
        out.push('\n');
        for m in &self.outcomes {
            let (rwr_m, pr_m) = m.walks_mod.as_ref()?;
            for (name, a, b) in [("rwr", rwr_o, rwr_m), ("pagerank", pr_o, pr_m)] {
                let _ = writeln!(
                    out,
                    "{},{},{},{},{},{},{}",
                    m.gamma,
                    m.method.as_str(),
                    name,
                    a.mass_s,
                    b.mass_s,
                    a.mass_s_prime,
                    b.mass_s_prime
                );
            }
        }
        Some(out)
    }
}

/// Drops the trailing `wallTime` column of every line.
pub fn strip_wall_time(csv: &str) -> String {
    csv.lines()
        .map(|l| l.rsplit_once(',').map_or(l, |(head, _)| head))
        .collect::<Vec<_>>()
        .join("\n")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_config() -> ExperimentConfig {
        ExperimentConfig {
            graph: GraphSource::BarabasiAlbert { n: 40, attach: 3 },
            gammas: vec![0.0, 0.3],
            sis: SisParams {
                trials: 200,
                ..SisParams::default()
            },
            baselines: vec![BaselineKind::Deg],
            walks: true,
            ..ExperimentConfig::default()
        }
    }

    #[test]
    fn zero_budget_leaves_graph_unchanged() {
        let out = run_experiment(&small_config()).unwrap();
        let first = &out.outcomes[0];
        assert_eq!(first.gamma, 0.0);
        assert_eq!(first.modified, out.graph);
        assert_eq!(first.sim_mod.per_trial, out.sim_orig.per_trial);
    }

    #[test]
    fn csv_is_reproducible() {
        let cfg = small_config();
        let a = run_experiment(&cfg).unwrap();
        let b = run_experiment(&cfg).unwrap();
        assert_eq!(strip_wall_time(&a.results_csv()), strip_wall_time(&b.results_csv()));
        assert_eq!(a.walks_csv(), b.walks_csv());
        let csv = a.results_csv();
        assert!(csv.starts_with(RESULTS_HEADER));
        assert_eq!(csv.lines().count(), 1 + 4);
        assert!(!csv.contains('\r'));
        for line in a.walks_csv().unwrap().lines().skip(1) {
            let v: Vec<f64> = line.split(',').skip(3).map(|x| x.parse().unwrap()).collect();
            assert!((v[0] + v[2] - 1.0).abs() < 1e-10);
            assert!((v[1] + v[3] - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn config_from_key_values() {
        let kv = KeyValues::parse(
            "generator = ws\nn = 30\nws_k = 4\ngammas = 0.1,0.5\nweights = 1, 0, 0.5\nbaselines = deg,gel\n\
             beta = 0.1\nseed = 4\nschedule = inverse-sqrt\n",
            "t.conf",
        )
        .unwrap();
        let c = ExperimentConfig::from_kv(&kv, Path::new(".")).unwrap();
        assert_eq!(c.graph, GraphSource::WattsStrogatz { n: 30, k: 4, p: 0.2 });
        assert_eq!(c.gammas, vec![0.1, 0.5]);
        assert_eq!(c.baselines, vec![BaselineKind::Deg, BaselineKind::Gel]);
        assert_eq!(c.sis.seed, 4);
        assert_eq!(c.sis.beta, 0.1);
        assert_eq!(c.attack.weights, ObjectiveWeights::new(1.0, 0.0, 0.5).unwrap());

        let kv = KeyValues::parse("generator = ba\nweights = 1,2\n", "t.conf").unwrap();
        let e = ExperimentConfig::from_kv(&kv, Path::new(".")).unwrap_err();
        assert!(e.to_string().contains("weights"));
        assert!(e.is_input_error());
    }

    #[test]
    fn strip_wall_time_drops_last_column() {
        assert_eq!(strip_wall_time("a,b,c\n1,2,3\n"), "a,b\n1,2");
    }
}
