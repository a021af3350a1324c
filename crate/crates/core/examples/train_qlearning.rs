//! Trains independent Q-learners and prints the training curve next to the
//! random baseline.

use altlab::harness::training_curve;
use altlab::{
    episodes_for, random_run, train_run, alt_scores, GameConfig, MetricPanel, QLearningConfig,
    RewardScheme, ScalingConfig, StateType,
};

fn main() -> altlab::Result<()> {
    let n = 3;
    let cfg = GameConfig::new(n, StateType::TypeA, RewardScheme::Ilf)?;
    let episodes = episodes_for(n, &ScalingConfig::default());
    let qcfg = QLearningConfig::default();
    let mut run = train_run(&cfg, &qcfg, episodes, 2026)?;

    let curve = training_curve(&run.log, &run.epsilons, &cfg)?;
    println!("episode  epsilon  CALT    efficiency");
    for p in curve.iter().step_by(20) {
        println!(
            "{:>7}  {:.3}    {:.3}   {:.3}",
            p.episode, p.epsilon, p.windowed_calt, p.windowed_efficiency
        );
    }

    let panel = MetricPanel::compute(&run.log, n, cfg.r_high)?;
    let eval = run.evaluate(10 * n as u64, qcfg.epsilon_min)?;
    let eval_calt = alt_scores(&eval, n)?.calt;
    let baseline = alt_scores(&random_run(&cfg, 10_000, 2026)?, n)?.calt;
    println!(
        "\nfull log: CALT {:.3}, reward fairness {:?}; greedy eval CALT {eval_calt:.3}; random CALT {baseline:.3}",
        panel.calt,
        panel.reward_fairness.value()
    );
    println!("largest |Q| = {:.2}", run.max_abs_q());
    Ok(())
}
