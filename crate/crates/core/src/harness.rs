//! Experiment orchestration: single runs, random baselines and the full
//! (state type × reward scheme × agent count) sweep.

use std::collections::HashMap;
use std::fs;
use std::path::PathBuf;
use std::time::{SystemTime, UNIX_EPOCH};

use log::{info, warn};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analysis::{
    alt_ratio_from_calt, episodes_for, pa_equivalent, ComparisonRecord, PAEquivalent,
    ScalingConfig,
};
use crate::error::{Error, Result};
use crate::game::{EpisodeOutcome, GameConfig, RewardScheme, StateType};
use crate::metrics::{alt_scores, AltVariant, MetricPanel};
use crate::policy::{random_run, train_run, QLearningConfig};
use crate::seed::derive_seed;
use crate::store::{
    load_run, write_csv, write_json, ComparisonRow, RunStore, SummaryRow, COMPARISONS_FILE,
    MANIFEST_FILE, SCHEMA_VERSION, SUMMARY_FILE,
};

pub const BASELINE_EPISODES: u64 = 10_000;
pub const CURVE_POINTS: u64 = 200;
pub const CURVE_WINDOW: usize = 500;

/// Variants compared against the baseline, in report order.
pub const COMPARED_VARIANTS: [AltVariant; 4] = [
    AltVariant::Calt,
    AltVariant::Ealt,
    AltVariant::Aalt,
    AltVariant::Falt,
];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum PolicySpec {
    Random,
    Qlearning(QLearningConfig),
}

impl PolicySpec {
    pub fn label(&self) -> &'static str {
        match self {
            PolicySpec::Random => "random",
            PolicySpec::Qlearning(_) => "qlearning",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSpec {
    pub run_id: String,
    pub game: GameConfig,
    pub policy: PolicySpec,
    pub episodes: u64,
    pub seed: u64,
}

impl ExperimentSpec {
    pub fn random(run_id: impl Into<String>, game: GameConfig, episodes: u64, seed: u64) -> Self {
        ExperimentSpec {
            run_id: run_id.into(),
            game,
            policy: PolicySpec::Random,
            episodes,
            seed,
        }
    }

    pub fn qlearning(
        run_id: impl Into<String>,
        game: GameConfig,
        qcfg: QLearningConfig,
        episodes: u64,
        seed: u64,
    ) -> Self {
        ExperimentSpec {
            run_id: run_id.into(),
            game,
            policy: PolicySpec::Qlearning(qcfg),
            episodes,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.game.validate()?;
        if let PolicySpec::Qlearning(q) = &self.policy {
            q.validate()?;
        }
        let valid_id = !self.run_id.is_empty()
            && self
                .run_id
                .chars()
                .all(|c| c.is_ascii_alphanumeric() || matches!(c, '-' | '_' | '.'))
            && !self.run_id.starts_with('.');
        if !valid_id {
            return Err(Error::Config(format!(
                "run id {:?} must be non-empty and use only [A-Za-z0-9._-]",
                self.run_id
            )));
        }
        if self.episodes < self.game.n_agents as u64 {
            return Err(Error::Config(format!(
                "{} episodes is fewer than the {} agents",
                self.episodes, self.game.n_agents
            )));
        }
        Ok(())
    }
}

/// One sample of the training curve.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub episode: u64,
    pub epsilon: f64,
    pub windowed_calt: f64,
    pub windowed_efficiency: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunResult {
    pub spec: ExperimentSpec,
    /// Metrics over the full log.
    pub panel: MetricPanel,
    /// Learners only: frozen tables, ε = ε_min, 10·n episodes.
    pub eval_panel: Option<MetricPanel>,
    pub comparisons: Vec<ComparisonRecord>,
    pub pa_equiv: PAEquivalent,
    pub training_curve: Option<Vec<CurvePoint>>,
}

impl RunResult {
    fn new(spec: &ExperimentSpec, panel: MetricPanel) -> Result<Self> {
        let pa_equiv = pa_equivalent(alt_ratio_from_calt(panel.calt), spec.game.n_agents)?;
        Ok(RunResult {
            spec: spec.clone(),
            panel,
            eval_panel: None,
            comparisons: Vec::new(),
            pa_equiv,
            training_curve: None,
        })
    }

    /// Attaches comparison records against a baseline panel. Variants whose
    /// baseline is zero (no defined comparison) are skipped with a warning.
    pub fn compare_with(&mut self, baseline: &MetricPanel) {
        let observed = self.panel.alt();
        let reference = baseline.alt();
        self.comparisons = COMPARED_VARIANTS
            .iter()
            .filter_map(|&v| {
                match ComparisonRecord::new(v, observed.get(v), reference.get(v)) {
                    Ok(c) => Some(c),
                    Err(e) => {
                        warn!("{}: {v} comparison skipped: {e}", self.spec.run_id);
                        None
                    }
                }
            })
            .collect();
    }
}

/// A finished run with its episode log still in memory.
#[derive(Clone, Debug)]
pub struct Simulated {
    pub result: RunResult,
    pub log: Vec<EpisodeOutcome>,
}

/// Runs a spec in memory without touching the filesystem.
pub fn simulate(spec: &ExperimentSpec) -> Result<Simulated> {
    spec.validate()?;
    let n = spec.game.n_agents;
    match &spec.policy {
        PolicySpec::Random => {
            let log = random_run(&spec.game, spec.episodes, spec.seed)?;
            let panel = MetricPanel::compute(&log, n, spec.game.r_high)?;
            Ok(Simulated {
                result: RunResult::new(spec, panel)?,
                log,
            })
        }
        PolicySpec::Qlearning(qcfg) => {
            let mut trained = train_run(&spec.game, qcfg, spec.episodes, spec.seed)?;
            let capped = trained.log.iter().filter(|o| o.capped).count();
            if capped > 0 {
                warn!("{}: {capped} capped episodes", spec.run_id);
            }
            let panel = MetricPanel::compute(&trained.log, n, spec.game.r_high)?;
            let curve = training_curve(&trained.log, &trained.epsilons, &spec.game)?;
            let eval_log = trained.evaluate(10 * n as u64, qcfg.epsilon_min)?;
            let eval_panel = MetricPanel::compute(&eval_log, n, spec.game.r_high)?;
            let mut result = RunResult::new(spec, panel)?;
            result.eval_panel = Some(eval_panel);
            result.training_curve = Some(curve);
            Ok(Simulated {
                result,
                log: trained.log,
            })
        }
    }
}

/// Samples every `max(1, ν/200)` episodes; each point scores the trailing
/// `min(500, ν)` episodes (fewer near the start of the run).
pub fn training_curve(
    log: &[EpisodeOutcome],
    epsilons: &[f64],
    game: &GameConfig,
) -> Result<Vec<CurvePoint>> {
    let nu = log.len();
    let n = game.n_agents;
    let every = (nu as u64 / CURVE_POINTS).max(1) as usize;
    let window = CURVE_WINDOW.min(nu);
    let mut points = Vec::new();
    for end in (every - 1..nu).step_by(every) {
        if end + 1 < n {
            continue;
        }
        let slice = &log[(end + 1).saturating_sub(window)..=end];
        let reward: f64 = slice.iter().map(|e| e.rewards.iter().sum::<f64>()).sum();
        points.push(CurvePoint {
            episode: end as u64,
            epsilon: epsilons[end],
            windowed_calt: alt_scores(slice, n)?.calt,
            windowed_efficiency: reward / (slice.len() as f64 * game.r_high),
        });
    }
    Ok(points)
}

fn run_and_store(spec: &ExperimentSpec, store: Option<&RunStore>) -> Result<RunResult> {
    if let Some(store) = store {
        store.check_free(&spec.run_id)?;
    }
    let sim = simulate(spec)?;
    if let Some(store) = store {
        store.persist(&sim.result, &sim.log)?;
    }
    Ok(sim.result)
}

/// Uniform-random null run over the whole log.
pub fn run_baseline(spec: &ExperimentSpec, store: Option<&RunStore>) -> Result<RunResult> {
    if spec.policy != PolicySpec::Random {
        return Err(Error::Config(format!("{} is not a random-policy spec", spec.run_id)));
    }
    run_and_store(spec, store)
}

/// Independent Q-learning run with curve and greedy-evaluation panel.
pub fn run_training(spec: &ExperimentSpec, store: Option<&RunStore>) -> Result<RunResult> {
    if !matches!(spec.policy, PolicySpec::Qlearning(_)) {
        return Err(Error::Config(format!("{} is not a Q-learning spec", spec.run_id)));
    }
    run_and_store(spec, store)
}

pub fn run(spec: &ExperimentSpec, store: Option<&RunStore>) -> Result<RunResult> {
    match spec.policy {
        PolicySpec::Random => run_baseline(spec, store),
        PolicySpec::Qlearning(_) => run_training(spec, store),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    pub agents: Vec<usize>,
    pub state_types: Vec<StateType>,
    pub reward_schemes: Vec<RewardScheme>,
    pub seeds: usize,
    pub scaling: ScalingConfig,
    /// Replaces the scaled episode count for every learner when set.
    pub episodes_override: Option<u64>,
    pub baseline_episodes: u64,
    pub qlearning: QLearningConfig,
    pub path_length: u32,
    pub step_cap: u32,
    pub seed_root: u64,
    pub parallelism: usize,
    pub out: PathBuf,
    pub overwrite: bool,
    pub reuse_baselines: bool,
}

impl SweepConfig {
    pub fn new(out: impl Into<PathBuf>) -> Self {
        SweepConfig {
            agents: vec![2, 3, 5, 8, 10],
            state_types: vec![StateType::TypeA, StateType::TypeB],
            reward_schemes: vec![RewardScheme::Ilf, RewardScheme::Iqf],
            seeds: 5,
            scaling: ScalingConfig::default(),
            episodes_override: None,
            baseline_episodes: BASELINE_EPISODES,
            qlearning: QLearningConfig::default(),
            path_length: GameConfig::DEFAULT_PATH_LENGTH,
            step_cap: GameConfig::DEFAULT_STEP_CAP,
            seed_root: 0,
            parallelism: std::thread::available_parallelism().map_or(1, |p| p.get()),
            out: out.into(),
            overwrite: false,
            reuse_baselines: false,
        }
    }

    fn game(&self, n: usize, st: StateType, rs: RewardScheme) -> Result<GameConfig> {
        GameConfig::new(n, st, rs)?
            .with_step_cap(self.step_cap)?
            .with_path_length(self.path_length)
    }
}

pub fn baseline_run_id(n: usize, st: StateType, rs: RewardScheme) -> String {
    format!("baseline-n{n:02}-{st}-{rs}")
}

pub fn training_run_id(n: usize, st: StateType, rs: RewardScheme, seed_index: usize) -> String {
    format!("ql-n{n:02}-{st}-{rs}-s{seed_index}")
}

/// Every spec a sweep executes: one baseline per configuration followed by
/// `seeds` learners per configuration.
///
/// ILF and IQF baselines for the same `(n, state type)` share one seed, so
/// they replay the same trajectory and differ only in payoffs.
pub fn plan(cfg: &SweepConfig) -> Result<Vec<ExperimentSpec>> {
    let mut specs = Vec::new();
    let configs = || {
        cfg.agents.iter().flat_map(move |&n| {
            cfg.state_types.iter().flat_map(move |&st| {
                cfg.reward_schemes.iter().map(move |&rs| (n, st, rs))
            })
        })
    };
    for (n, st, rs) in configs() {
        let seed = derive_seed(cfg.seed_root, &format!("baseline-n{n:02}-{st}"));
        specs.push(ExperimentSpec::random(
            baseline_run_id(n, st, rs),
            cfg.game(n, st, rs)?,
            cfg.baseline_episodes,
            seed,
        ));
    }
    for (n, st, rs) in configs() {
        let episodes = cfg
            .episodes_override
            .unwrap_or_else(|| episodes_for(n, &cfg.scaling));
        for s in 0..cfg.seeds {
            let run_id = training_run_id(n, st, rs, s);
            let seed = derive_seed(cfg.seed_root, &run_id);
            specs.push(ExperimentSpec::qlearning(
                run_id,
                cfg.game(n, st, rs)?,
                cfg.qlearning.clone(),
                episodes,
                seed,
            ));
        }
    }
    Ok(specs)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RunFailure {
    pub run_id: String,
    pub error: String,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SweepManifest {
    pub schema_version: String,
    pub config: SweepConfig,
    pub planned: Vec<String>,
    pub failures: Vec<RunFailure>,
}

#[derive(Clone, Debug)]
pub struct SweepOutcome {
    /// Successful runs in plan order.
    pub results: Vec<RunResult>,
    pub failures: Vec<RunFailure>,
    pub rows: Vec<SummaryRow>,
}

impl SweepOutcome {
    pub fn is_complete(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Reuses a persisted baseline when its stored spec matches exactly.
fn cached_baseline(spec: &ExperimentSpec, store: &RunStore) -> Option<RunResult> {
    let dir = store.run_dir(&spec.run_id);
    let loaded = load_run(&dir).ok()?;
    if loaded.spec != *spec {
        return None;
    }
    let panel = MetricPanel::compute(&loaded.log, spec.game.n_agents, spec.game.r_high).ok()?;
    RunResult::new(spec, panel).ok()
}

/// Runs the whole plan on a bounded worker pool, joins each learner to its
/// baseline and writes `summary.csv`, `comparisons.csv` and `sweep.json`.
pub fn sweep(cfg: &SweepConfig) -> Result<SweepOutcome> {
    let specs = plan(cfg)?;
    fs::create_dir_all(&cfg.out).map_err(|e| Error::io(&cfg.out, e))?;
    let store = RunStore::new(&cfg.out, cfg.overwrite);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.parallelism.max(1))
        .build()
        .map_err(|e| Error::Config(format!("worker pool: {e}")))?;

    let outcomes: Vec<Result<RunResult>> = pool.install(|| {
        specs
            .par_iter()
            .map(|spec| {
                if cfg.reuse_baselines && spec.policy == PolicySpec::Random {
                    if let Some(hit) = cached_baseline(spec, &store) {
                        info!("{}: reusing cached baseline", spec.run_id);
                        return Ok(hit);
                    }
                    let fresh = RunStore::new(&cfg.out, true);
                    return run(spec, Some(&fresh));
                }
                info!("{}: {} episodes", spec.run_id, spec.episodes);
                run(spec, Some(&store))
            })
            .collect()
    });

    let mut results = Vec::new();
    let mut failures = Vec::new();
    for (spec, outcome) in specs.iter().zip(outcomes) {
        match outcome {
            Ok(r) => results.push(r),
            Err(e) => {
                warn!("{} failed: {e}", spec.run_id);
                failures.push(RunFailure {
                    run_id: spec.run_id.clone(),
                    error: e.to_string(),
                });
            }
        }
    }

    let baselines: HashMap<String, MetricPanel> = results
        .iter()
        .filter(|r| r.spec.policy == PolicySpec::Random)
        .map(|r| (r.spec.run_id.clone(), r.panel.clone()))
        .collect();

    let stamp = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map_or(0, |d| d.as_secs());
    let mut rows = Vec::with_capacity(results.len());
    let mut comparison_rows = Vec::new();
    for result in &mut results {
        let mut metadata = format!("unix_time={stamp}");
        if matches!(result.spec.policy, PolicySpec::Qlearning(_)) {
            let g = &result.spec.game;
            let baseline_id = baseline_run_id(g.n_agents, g.state_type, g.reward_scheme);
            match baselines.get(&baseline_id) {
                Some(panel) => {
                    result.compare_with(panel);
                    comparison_rows.extend(
                        result
                            .comparisons
                            .iter()
                            .map(|c| ComparisonRow::new(result, &baseline_id, c)),
                    );
                }
                None => {
                    warn!("{}: no baseline {baseline_id}; comparisons omitted", result.spec.run_id);
                    metadata.push_str(";warning=missing-baseline");
                }
            }
        }
        rows.push(SummaryRow::new(result, metadata));
    }

    write_csv(&cfg.out.join(SUMMARY_FILE), &rows)?;
    write_csv(&cfg.out.join(COMPARISONS_FILE), &comparison_rows)?;
    write_json(
        &cfg.out.join(MANIFEST_FILE),
        &SweepManifest {
            schema_version: SCHEMA_VERSION.to_string(),
            config: cfg.clone(),
            planned: specs.iter().map(|s| s.run_id.clone()).collect(),
            failures: failures.clone(),
        },
    )?;

    Ok(SweepOutcome {
        results,
        failures,
        rows,
    })
}
