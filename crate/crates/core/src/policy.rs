//! Agent policies: the uniform-random null process and independent tabular
//! Q-learners with linearly decaying ε-greedy exploration.

use std::collections::HashMap;
use std::io::Write;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::game::{run_episode, Action, EpisodeOutcome, GameConfig, StateKey};
use crate::seed::{agent_streams, SimRng};

/// A single observed transition, as seen by one agent.
#[derive(Clone, Copy, Debug)]
pub struct Transition<'a> {
    pub state: &'a StateKey,
    pub action: Action,
    pub reward: f64,
    pub next: &'a StateKey,
    pub terminal: bool,
}

pub trait Policy {
    fn act(&mut self, key: &StateKey, epsilon: f64, rng: &mut SimRng) -> Action;

    fn observe(&mut self, _transition: &Transition<'_>) -> Result<()> {
        Ok(())
    }
}

impl<P: Policy + ?Sized> Policy for Box<P> {
    fn act(&mut self, key: &StateKey, epsilon: f64, rng: &mut SimRng) -> Action {
        (**self).act(key, epsilon, rng)
    }

    fn observe(&mut self, transition: &Transition<'_>) -> Result<()> {
        (**self).observe(transition)
    }
}

/// Move or stay with probability ½ each.
pub fn random_action(rng: &mut SimRng) -> Action {
    if rng.random_bool(0.5) {
        Action::Move
    } else {
        Action::Stay
    }
}

/// Uniform-random play; ignores state and ε.
#[derive(Clone, Copy, Debug, Default)]
pub struct RandomPolicy;

impl Policy for RandomPolicy {
    fn act(&mut self, _key: &StateKey, _epsilon: f64, rng: &mut SimRng) -> Action {
        random_action(rng)
    }
}

/// Always plays the same action. Handy for deterministic traces.
#[derive(Clone, Copy, Debug)]
pub struct FixedPolicy(pub Action);

impl Policy for FixedPolicy {
    fn act(&mut self, _key: &StateKey, _epsilon: f64, _rng: &mut SimRng) -> Action {
        self.0
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QLearningConfig {
    pub gamma: f64,
    pub alpha: f64,
    pub epsilon_initial: f64,
    pub epsilon_min: f64,
    /// Fraction of the run after which ε stays at `epsilon_min`.
    pub decay_end_fraction: f64,
}

impl Default for QLearningConfig {
    fn default() -> Self {
        QLearningConfig {
            gamma: 0.999,
            alpha: 0.3,
            epsilon_initial: 0.9,
            epsilon_min: 0.004,
            decay_end_fraction: 0.75,
        }
    }
}

impl QLearningConfig {
    /// Exploration pinned at a constant ε for the whole run.
    pub fn constant_epsilon(epsilon: f64) -> Self {
        QLearningConfig {
            epsilon_initial: epsilon,
            epsilon_min: epsilon,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let in_unit = |x: f64| (0.0..=1.0).contains(&x);
        if !(self.alpha > 0.0 && self.alpha <= 1.0) {
            return Err(Error::Config(format!("alpha must lie in (0, 1], got {}", self.alpha)));
        }
        if !in_unit(self.gamma) {
            return Err(Error::Config(format!("gamma must lie in [0, 1], got {}", self.gamma)));
        }
        if !in_unit(self.epsilon_initial) || !in_unit(self.epsilon_min) {
            return Err(Error::Config("epsilon values must lie in [0, 1]".into()));
        }
        if self.epsilon_min > self.epsilon_initial {
            return Err(Error::Config(format!(
                "epsilon_min ({}) exceeds epsilon_initial ({})",
                self.epsilon_min, self.epsilon_initial
            )));
        }
        if !(self.decay_end_fraction > 0.0 && self.decay_end_fraction <= 1.0) {
            return Err(Error::Config(format!(
                "decay_end_fraction must lie in (0, 1], got {}",
                self.decay_end_fraction
            )));
        }
        Ok(())
    }
}

/// Exploration rate for an episode. All agents share the same schedule.
pub fn epsilon_at(episode_index: u64, total_episodes: u64, cfg: &QLearningConfig) -> f64 {
    let end = (cfg.decay_end_fraction * total_episodes as f64).floor() as u64;
    if end == 0 || episode_index >= end {
        return cfg.epsilon_min;
    }
    let progress = episode_index as f64 / end as f64;
    cfg.epsilon_initial - (cfg.epsilon_initial - cfg.epsilon_min) * progress
}

/// Tabular action values; unseen pairs read as `default`.
#[derive(Clone, Debug)]
pub struct QTable {
    entries: HashMap<StateKey, [f64; 2]>,
    default: f64,
}

impl Default for QTable {
    fn default() -> Self {
        QTable::new(0.0)
    }
}

impl QTable {
    pub fn new(default: f64) -> Self {
        QTable {
            entries: HashMap::new(),
            default,
        }
    }

    pub fn get(&self, key: &StateKey, action: Action) -> f64 {
        self.entries
            .get(key)
            .map_or(self.default, |v| v[action.index()])
    }

    pub fn set(&mut self, key: &StateKey, action: Action, value: f64) {
        let default = self.default;
        let slot = match self.entries.get_mut(key) {
            Some(slot) => slot,
            None => self.entries.entry(key.clone()).or_insert([default; 2]),
        };
        slot[action.index()] = value;
    }

    pub fn max_value(&self, key: &StateKey) -> f64 {
        self.get(key, Action::Move).max(self.get(key, Action::Stay))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn max_abs(&self) -> f64 {
        self.entries
            .values()
            .flat_map(|v| v.iter())
            .fold(self.default.abs(), |m, q| m.max(q.abs()))
    }

    /// Writes one `key<TAB>q_move<TAB>q_stay` line per visited state, sorted by key.
    pub fn dump<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        let mut keys: Vec<&StateKey> = self.entries.keys().collect();
        keys.sort();
        writeln!(out, "key\tq_move\tq_stay")?;
        for key in keys {
            let v = self.entries[key];
            writeln!(out, "{key}\t{}\t{}", v[0], v[1])?;
        }
        Ok(())
    }
}

/// ε-greedy choice; greedy ties are broken uniformly at random.
///
/// No exploration draw is taken when ε is exactly 0 or 1, so ε = 1 consumes
/// the stream exactly like [`random_action`].
pub fn select_action(q: &QTable, key: &StateKey, epsilon: f64, rng: &mut SimRng) -> Action {
    let explore = epsilon >= 1.0 || (epsilon > 0.0 && rng.random::<f64>() < epsilon);
    if explore {
        return random_action(rng);
    }
    let q_move = q.get(key, Action::Move);
    let q_stay = q.get(key, Action::Stay);
    if q_move > q_stay {
        Action::Move
    } else if q_stay > q_move {
        Action::Stay
    } else {
        random_action(rng)
    }
}

/// One-step Q-learning backup. Terminal transitions bootstrap to zero.
pub fn q_update(
    q: &mut QTable,
    transition: &Transition<'_>,
    cfg: &QLearningConfig,
) -> Result<()> {
    if !transition.reward.is_finite() {
        return Err(Error::Data(format!(
            "non-finite reward {} in Q update",
            transition.reward
        )));
    }
    let bootstrap = if transition.terminal {
        0.0
    } else {
        q.max_value(transition.next)
    };
    let old = q.get(transition.state, transition.action);
    let target = transition.reward + cfg.gamma * bootstrap;
    q.set(transition.state, transition.action, old + cfg.alpha * (target - old));
    Ok(())
}

/// An independent tabular learner. Agents never see each other's tables.
#[derive(Clone, Debug)]
pub struct QLearner {
    pub table: QTable,
    pub cfg: QLearningConfig,
    /// When set, the learner acts but no longer updates its table.
    pub frozen: bool,
}

impl QLearner {
    pub fn new(cfg: QLearningConfig) -> Self {
        QLearner {
            table: QTable::default(),
            cfg,
            frozen: false,
        }
    }
}

impl Policy for QLearner {
    fn act(&mut self, key: &StateKey, epsilon: f64, rng: &mut SimRng) -> Action {
        select_action(&self.table, key, epsilon, rng)
    }

    fn observe(&mut self, transition: &Transition<'_>) -> Result<()> {
        if self.frozen {
            return Ok(());
        }
        q_update(&mut self.table, transition, &self.cfg)
    }
}

/// Plays `episodes` episodes of uniform-random play.
pub fn random_run(cfg: &GameConfig, episodes: u64, seed: u64) -> Result<Vec<EpisodeOutcome>> {
    cfg.validate()?;
    let n = cfg.n_agents;
    let mut rngs = agent_streams(seed, n);
    let mut policies = vec![RandomPolicy; n];
    let mut carry = vec![false; n];
    (0..episodes)
        .map(|e| run_episode(e, &mut policies, &mut rngs, &mut carry, 1.0, cfg))
        .collect()
}

/// State left behind by [`train_run`].
#[derive(Clone, Debug)]
pub struct TrainedRun {
    pub game: GameConfig,
    pub log: Vec<EpisodeOutcome>,
    /// ε used for each logged episode.
    pub epsilons: Vec<f64>,
    pub learners: Vec<QLearner>,
    carry: Vec<bool>,
    rngs: Vec<SimRng>,
}

impl TrainedRun {
    /// Plays further episodes with frozen tables at a fixed ε, continuing the
    /// run's random streams and memory carry.
    pub fn evaluate(&mut self, episodes: u64, epsilon: f64) -> Result<Vec<EpisodeOutcome>> {
        for learner in &mut self.learners {
            learner.frozen = true;
        }
        let result = (0..episodes)
            .map(|e| {
                run_episode(
                    e,
                    &mut self.learners,
                    &mut self.rngs,
                    &mut self.carry,
                    epsilon,
                    &self.game,
                )
            })
            .collect();
        for learner in &mut self.learners {
            learner.frozen = false;
        }
        result
    }

    pub fn max_abs_q(&self) -> f64 {
        self.learners
            .iter()
            .map(|l| l.table.max_abs())
            .fold(0.0, f64::max)
    }
}

/// Trains one independent Q-learner per agent for `total_episodes` episodes.
pub fn train_run(
    cfg: &GameConfig,
    qcfg: &QLearningConfig,
    total_episodes: u64,
    seed: u64,
) -> Result<TrainedRun> {
    cfg.validate()?;
    qcfg.validate()?;
    if total_episodes == 0 {
        return Err(Error::Config("total_episodes must be at least 1".into()));
    }
    let n = cfg.n_agents;
    let mut rngs = agent_streams(seed, n);
    let mut learners = vec![QLearner::new(qcfg.clone()); n];
    let mut carry = vec![false; n];
    let mut log = Vec::with_capacity(total_episodes as usize);
    let mut epsilons = Vec::with_capacity(total_episodes as usize);
    for e in 0..total_episodes {
        let epsilon = epsilon_at(e, total_episodes, qcfg);
        log.push(run_episode(e, &mut learners, &mut rngs, &mut carry, epsilon, cfg)?);
        epsilons.push(epsilon);
    }
    Ok(TrainedRun {
        game: cfg.clone(),
        log,
        epsilons,
        learners,
        carry,
        rngs,
    })
}
