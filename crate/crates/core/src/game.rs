//! The multi-agent Battle of the Exes as an episodic Markov game.
//!
//! Every agent walks its own path of `path_length` cells toward a single
//! contested terminal. At each decision step all agents simultaneously choose
//! to move one cell or stay put; the episode ends as soon as at least one
//! agent reaches the terminal. Rewards are paid only at termination and depend
//! on how many agents arrived together:
//!
//! * exactly one arrival: the winner receives `r_high`, everyone else 0;
//! * a partial tie (`1 < k < n`): each arrival receives `r_low`;
//! * a full tie (`k = n`) or no arrival at all: nobody receives anything.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::policy::{Policy, Transition};
use crate::seed::SimRng;

pub type AgentId = usize;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Action {
    Move,
    Stay,
}

impl Action {
    pub const ALL: [Action; 2] = [Action::Move, Action::Stay];

    pub(crate) fn index(self) -> usize {
        match self {
            Action::Move => 0,
            Action::Stay => 1,
        }
    }
}

/// How tie participants are paid relative to an exclusive winner.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum RewardScheme {
    /// Inverse linear fractional: `r_low = r_high / n`.
    #[serde(rename = "ilf")]
    Ilf,
    /// Inverse quadratic fractional: `r_low = r_high / n²`.
    #[serde(rename = "iqf")]
    Iqf,
}

impl RewardScheme {
    pub fn label(self) -> &'static str {
        match self {
            RewardScheme::Ilf => "ilf",
            RewardScheme::Iqf => "iqf",
        }
    }
}

impl fmt::Display for RewardScheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// What an agent observes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum StateType {
    /// Joint positions only.
    #[serde(rename = "A")]
    TypeA,
    /// Joint positions plus the previous episode's arrival bits.
    #[serde(rename = "B")]
    TypeB,
}

impl StateType {
    pub fn label(self) -> &'static str {
        match self {
            StateType::TypeA => "A",
            StateType::TypeB => "B",
        }
    }
}

impl fmt::Display for StateType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GameConfig {
    pub n_agents: usize,
    /// Number of moves needed to reach the terminal.
    pub path_length: u32,
    pub r_high: f64,
    pub reward_scheme: RewardScheme,
    pub state_type: StateType,
    /// Maximum decision steps per episode.
    pub step_cap: u32,
}

impl GameConfig {
    pub const DEFAULT_PATH_LENGTH: u32 = 2;
    pub const DEFAULT_R_HIGH: f64 = 100.0;
    pub const DEFAULT_STEP_CAP: u32 = 1000;

    pub fn new(n_agents: usize, state_type: StateType, reward_scheme: RewardScheme) -> Result<Self> {
        let cfg = GameConfig {
            n_agents,
            path_length: Self::DEFAULT_PATH_LENGTH,
            r_high: Self::DEFAULT_R_HIGH,
            reward_scheme,
            state_type,
            step_cap: Self::DEFAULT_STEP_CAP,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn with_path_length(mut self, path_length: u32) -> Result<Self> {
        self.path_length = path_length;
        self.validate()?;
        Ok(self)
    }

    pub fn with_step_cap(mut self, step_cap: u32) -> Result<Self> {
        self.step_cap = step_cap;
        self.validate()?;
        Ok(self)
    }

    pub fn with_r_high(mut self, r_high: f64) -> Result<Self> {
        self.r_high = r_high;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_agents < 2 {
            return Err(Error::Config(format!(
                "at least 2 agents required, got {}",
                self.n_agents
            )));
        }
        if self.path_length < 1 {
            return Err(Error::Config("path_length must be at least 1".into()));
        }
        if self.step_cap <= self.path_length {
            return Err(Error::Config(format!(
                "step_cap ({}) must exceed path_length ({})",
                self.step_cap, self.path_length
            )));
        }
        if !(self.r_high.is_finite() && self.r_high > 0.0) {
            return Err(Error::Config(format!("r_high must be positive, got {}", self.r_high)));
        }
        Ok(())
    }

    /// Reward paid to each participant of a partial tie.
    pub fn r_low(&self) -> f64 {
        let n = self.n_agents as f64;
        match self.reward_scheme {
            RewardScheme::Ilf => self.r_high / n,
            RewardScheme::Iqf => self.r_high / (n * n),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GameState {
    pub positions: Vec<u32>,
    /// Previous episode's arrival bits; only observed under Type-B.
    pub prev_winners: Vec<bool>,
    pub step: u32,
}

impl GameState {
    pub fn initial(cfg: &GameConfig, prev_winners: &[bool]) -> Result<Self> {
        if prev_winners.len() != cfg.n_agents {
            return Err(Error::Config(format!(
                "memory carry has {} entries for {} agents",
                prev_winners.len(),
                cfg.n_agents
            )));
        }
        Ok(GameState {
            positions: vec![0; cfg.n_agents],
            prev_winners: prev_winners.to_vec(),
            step: 0,
        })
    }

    /// Agents currently sitting on the terminal cell, in id order.
    pub fn arrivals(&self, cfg: &GameConfig) -> Vec<AgentId> {
        self.positions
            .iter()
            .enumerate()
            .filter(|(_, &p)| p == cfg.path_length)
            .map(|(i, _)| i)
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct JointAction(pub Vec<Action>);

impl JointAction {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl From<Vec<Action>> for JointAction {
    fn from(actions: Vec<Action>) -> Self {
        JointAction(actions)
    }
}

/// Advance every agent by one cell on `Move`; `Stay` leaves it in place.
pub fn step(state: &GameState, action: &JointAction, cfg: &GameConfig) -> Result<GameState> {
    if action.len() != cfg.n_agents || state.positions.len() != cfg.n_agents {
        return Err(Error::Config(format!(
            "joint action has {} entries for {} agents",
            action.len(),
            cfg.n_agents
        )));
    }
    if is_terminal(state, cfg) {
        return Err(Error::Config(format!(
            "step called on a terminal state (step {})",
            state.step
        )));
    }
    let positions = state
        .positions
        .iter()
        .zip(&action.0)
        .map(|(&p, a)| match a {
            Action::Move => p + 1,
            Action::Stay => p,
        })
        .collect();
    Ok(GameState {
        positions,
        prev_winners: state.prev_winners.clone(),
        step: state.step + 1,
    })
}

pub fn is_terminal(state: &GameState, cfg: &GameConfig) -> bool {
    state.step >= cfg.step_cap || state.positions.iter().any(|&p| p >= cfg.path_length)
}

/// Terminal payoff vector for the given set of arrivals.
pub fn assign_rewards(arrivals: &[AgentId], cfg: &GameConfig) -> Result<Vec<f64>> {
    let n = cfg.n_agents;
    let mut seen = vec![false; n];
    for &a in arrivals {
        if a >= n {
            return Err(Error::Config(format!("unknown agent id {a} (n = {n})")));
        }
        if std::mem::replace(&mut seen[a], true) {
            return Err(Error::Config(format!("agent {a} listed twice among arrivals")));
        }
    }
    let mut rewards = vec![0.0; n];
    let k = arrivals.len();
    if k == 1 {
        rewards[arrivals[0]] = cfg.r_high;
    } else if k > 1 && k < n {
        let r_low = cfg.r_low();
        for &a in arrivals {
            rewards[a] = r_low;
        }
    }
    Ok(rewards)
}

/// Observation key. Under full observability every agent sees the same key.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct StateKey {
    pub positions: Vec<u32>,
    /// Empty for Type-A keys.
    pub memory: Vec<bool>,
}

impl fmt::Display for StateKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let join = |it: &mut dyn Iterator<Item = String>| it.collect::<Vec<_>>().join(",");
        f.write_str(&join(&mut self.positions.iter().map(|p| p.to_string())))?;
        if !self.memory.is_empty() {
            f.write_str("|")?;
            f.write_str(&join(&mut self.memory.iter().map(|&b| u8::from(b).to_string())))?;
        }
        Ok(())
    }
}

pub fn encode_state(state: &GameState, cfg: &GameConfig) -> StateKey {
    StateKey {
        positions: state.positions.clone(),
        memory: match cfg.state_type {
            StateType::TypeA => Vec::new(),
            StateType::TypeB => state.prev_winners.clone(),
        },
    }
}

/// One completed episode; the unit every metric consumes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpisodeOutcome {
    #[serde(rename = "episode")]
    pub episode_index: u64,
    pub arrivals: Vec<AgentId>,
    pub exclusive_winner: Option<AgentId>,
    pub rewards: Vec<f64>,
    #[serde(rename = "steps")]
    pub steps_used: u32,
    pub capped: bool,
}

impl EpisodeOutcome {
    /// Builds an outcome from its arrival set, deriving the winner and payoffs.
    pub fn from_arrivals(
        episode_index: u64,
        mut arrivals: Vec<AgentId>,
        steps_used: u32,
        cfg: &GameConfig,
    ) -> Result<Self> {
        arrivals.sort_unstable();
        let rewards = assign_rewards(&arrivals, cfg)?;
        Ok(EpisodeOutcome {
            episode_index,
            exclusive_winner: (arrivals.len() == 1).then(|| arrivals[0]),
            capped: arrivals.is_empty(),
            arrivals,
            rewards,
            steps_used,
        })
    }

    pub fn k(&self) -> usize {
        self.arrivals.len()
    }

    /// Checks the record's internal consistency against an agent count.
    pub fn validate(&self, n_agents: usize) -> std::result::Result<(), String> {
        if self.rewards.len() != n_agents {
            return Err(format!(
                "rewards has {} entries, expected {}",
                self.rewards.len(),
                n_agents
            ));
        }
        let mut seen = vec![false; n_agents];
        for &a in &self.arrivals {
            if a >= n_agents {
                return Err(format!("arrival id {a} out of range for {n_agents} agents"));
            }
            if std::mem::replace(&mut seen[a], true) {
                return Err(format!("arrival id {a} repeated"));
            }
        }
        let expected_winner = (self.arrivals.len() == 1).then(|| self.arrivals[0]);
        if self.exclusive_winner != expected_winner {
            return Err(format!(
                "exclusive_winner {:?} inconsistent with arrivals {:?}",
                self.exclusive_winner, self.arrivals
            ));
        }
        if !self.capped && self.arrivals.is_empty() {
            return Err("episode has no arrivals but is not flagged capped".into());
        }
        if self.capped && !self.arrivals.is_empty() {
            return Err("capped episode lists arrivals".into());
        }
        if let Some((i, r)) = self
            .rewards
            .iter()
            .enumerate()
            .find(|(_, r)| !r.is_finite() || **r < 0.0)
        {
            return Err(format!("reward {r} for agent {i} is not a finite non-negative value"));
        }
        Ok(())
    }

    /// Arrival bits used as the next episode's Type-B memory.
    pub fn arrival_bits(&self, n_agents: usize) -> Vec<bool> {
        let mut bits = vec![false; n_agents];
        for &a in &self.arrivals {
            bits[a] = true;
        }
        bits
    }
}

/// Plays one episode to termination.
///
/// Each agent acts with its own policy and RNG stream; every transition is
/// reported back through [`Policy::observe`]. `carry` holds the previous
/// episode's arrival bits and is replaced by this episode's bits on return.
pub fn run_episode<P: Policy>(
    episode_index: u64,
    policies: &mut [P],
    rngs: &mut [SimRng],
    carry: &mut Vec<bool>,
    epsilon: f64,
    cfg: &GameConfig,
) -> Result<EpisodeOutcome> {
    let n = cfg.n_agents;
    if policies.len() != n || rngs.len() != n {
        return Err(Error::Config(format!(
            "{} policies and {} rng streams supplied for {} agents",
            policies.len(),
            rngs.len(),
            n
        )));
    }
    let mut state = GameState::initial(cfg, carry)?;
    let mut key = encode_state(&state, cfg);
    loop {
        let joint: JointAction = policies
            .iter_mut()
            .zip(rngs.iter_mut())
            .map(|(p, rng)| p.act(&key, epsilon, rng))
            .collect::<Vec<_>>()
            .into();
        state = step(&state, &joint, cfg)?;
        let terminal = is_terminal(&state, cfg);
        let arrivals = state.arrivals(cfg);
        let rewards = if terminal {
            assign_rewards(&arrivals, cfg)?
        } else {
            vec![0.0; n]
        };
        let next_key = encode_state(&state, cfg);
        for (i, policy) in policies.iter_mut().enumerate() {
            policy.observe(&Transition {
                state: &key,
                action: joint.0[i],
                reward: rewards[i],
                next: &next_key,
                terminal,
            })?;
        }
        if terminal {
            let outcome = EpisodeOutcome::from_arrivals(episode_index, arrivals, state.step, cfg)?;
            *carry = outcome.arrival_bits(n);
            return Ok(outcome);
        }
        key = next_key;
    }
}
