//! Multi-agent Battle of the Exes simulator with alternation (ALT) metrics.
//!
//! `n` agents walk a short path toward a shared terminal. Whoever arrives alone
//! takes the high reward; simultaneous arrivals split a smaller one. The ALT
//! family scores how well a population takes turns, which outcome-only
//! fairness and efficiency ratios cannot see.
//!
//! ```
//! use altlab::{random_run, GameConfig, MetricPanel, RewardScheme, StateType};
//!
//! let game = GameConfig::new(2, StateType::TypeA, RewardScheme::Ilf).unwrap();
//! let log = random_run(&game, 2000, 7).unwrap();
//! let panel = MetricPanel::compute(&log, 2, game.r_high).unwrap();
//! assert!(panel.calt > 0.4 && panel.calt < 0.56);
//! ```

pub mod analysis;
pub mod cli;
pub mod episode_log;
pub mod error;
pub mod game;
pub mod harness;
pub mod metrics;
pub mod policy;
pub mod report;
pub mod seed;
pub mod store;

pub use analysis::{
    alt_ratio_from_calt, coordination_score, episodes_for, fit_alt_ratio_regression,
    pa_equivalent, relative_change, synth_pa_mixture, AltRatioFit, ComparisonRecord,
    PAEquivalent, ScalingConfig,
};
pub use episode_log::{load_log, read_log, save_log, write_log};
pub use error::{Error, Result};
pub use game::{
    assign_rewards, encode_state, is_terminal, run_episode, step, Action, AgentId,
    EpisodeOutcome, GameConfig, GameState, JointAction, RewardScheme, StateKey, StateType,
};
pub use harness::{
    plan, run_baseline, run_training, simulate, sweep, CurvePoint, ExperimentSpec, PolicySpec,
    RunResult, SweepConfig,
};
pub use metrics::{alt_score, alt_scores, AltScores, AltVariant, MetricPanel, Ratio};
pub use policy::{
    epsilon_at, q_update, random_run, select_action, train_run, FixedPolicy, Policy, QLearner,
    QLearningConfig, QTable, RandomPolicy, TrainedRun, Transition,
};
pub use seed::{agent_streams, derive_seed, SimRng};
pub use store::RunStore;
