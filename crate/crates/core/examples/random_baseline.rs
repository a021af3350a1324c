//! Uniform-random baselines for the standard agent counts.

use altlab::{random_run, GameConfig, MetricPanel, RewardScheme, StateType};

fn main() -> altlab::Result<()> {
    println!("agents  CALT   FALT   EALT   AALT   eff(ilf) eff(iqf) fairness");
    for n in [2, 3, 5, 8, 10] {
        let mut eff = Vec::new();
        let mut panel = None;
        for scheme in [RewardScheme::Ilf, RewardScheme::Iqf] {
            let cfg = GameConfig::new(n, StateType::TypeA, scheme)?;
            let log = random_run(&cfg, 10_000, 1)?;
            let p = MetricPanel::compute(&log, n, cfg.r_high)?;
            eff.push(p.efficiency);
            panel = Some(p);
        }
        let p = panel.unwrap();
        println!(
            "{n:>6}  {:.3}  {:.3}  {:.3}  {:.3}  {:.3}    {:.3}    {}",
            p.calt,
            p.falt,
            p.ealt,
            p.aalt,
            eff[0],
            eff[1],
            p.fairness.value().map_or("-".into(), |v| format!("{v:.3}"))
        );
    }
    Ok(())
}
