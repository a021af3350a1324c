//! Relative Change and Coordination Score of a learner against random play.

use altlab::{
    random_run, train_run, AltVariant, ComparisonRecord, GameConfig, MetricPanel,
    QLearningConfig, RewardScheme, StateType,
};

fn main() -> altlab::Result<()> {
    let cfg = GameConfig::new(2, StateType::TypeA, RewardScheme::Ilf)?;
    let learner = train_run(&cfg, &QLearningConfig::default(), 1000, 5)?;
    let ql = MetricPanel::compute(&learner.log, 2, cfg.r_high)?.alt();
    let rnd = MetricPanel::compute(&random_run(&cfg, 10_000, 5)?, 2, cfg.r_high)?.alt();

    println!("metric  learner  random  rel.change  coord.score");
    for v in [AltVariant::Calt, AltVariant::Ealt, AltVariant::Aalt, AltVariant::Falt] {
        let c = ComparisonRecord::new(v, ql.get(v), rnd.get(v))?;
        println!(
            "{:<6}  {:.3}    {:.3}   {:>7.1}%    {:>7.1}%",
            v.name(),
            c.observed,
            c.random_ref,
            c.relative_change_pct,
            c.coordination_score_pct
        );
    }
    Ok(())
}
