use altlab::{
    harness, random_run, run_baseline, run_training, sweep, train_run, AltVariant, ExperimentSpec,
    GameConfig, QLearningConfig, RewardScheme, StateType, SweepConfig,
};

fn game(n: usize, st: StateType, rs: RewardScheme) -> GameConfig {
    GameConfig::new(n, st, rs).unwrap()
}

#[test]
fn reward_scheme_only_changes_payoffs() {
    let ilf = ExperimentSpec::random("a", game(3, StateType::TypeA, RewardScheme::Ilf), 10_000, 5);
    let iqf = ExperimentSpec::random("b", game(3, StateType::TypeA, RewardScheme::Iqf), 10_000, 5);
    let (a, b) = (run_baseline(&ilf, None).unwrap(), run_baseline(&iqf, None).unwrap());
    assert_eq!(a.panel.calt, b.panel.calt);
    assert_eq!(a.panel.falt, b.panel.falt);
    assert_eq!(a.panel.ealt, b.panel.ealt);
    assert_eq!(a.panel.fairness, b.panel.fairness);
    assert!((a.panel.efficiency - 0.866).abs() < 0.02, "{}", a.panel.efficiency);
    assert!((b.panel.efficiency - 0.742).abs() < 0.02, "{}", b.panel.efficiency);
}

#[test]
fn ten_agent_baseline() {
    let spec = ExperimentSpec::random("b", game(10, StateType::TypeA, RewardScheme::Ilf), 10_000, 8);
    let r = run_baseline(&spec, None).unwrap();
    assert!((r.panel.calt - 0.111).abs() < 0.015, "{}", r.panel.calt);
    assert!((r.panel.falt - 0.363).abs() < 0.02, "{}", r.panel.falt);
    assert!(r.comparisons.is_empty());
}

#[test]
fn full_exploration_behaves_like_random_play() {
    let g = game(2, StateType::TypeB, RewardScheme::Ilf);
    let random = run_baseline(&ExperimentSpec::random("r", g.clone(), 10_000, 1), None).unwrap();
    let spec = ExperimentSpec::qlearning("q", g, QLearningConfig::constant_epsilon(1.0), 10_000, 1);
    let pinned = run_training(&spec, None).unwrap();
    for v in AltVariant::ALL {
        let (a, b) = (random.panel.alt().get(v), pinned.panel.alt().get(v));
        assert!((a - b).abs() <= 0.02, "{v}: {a} vs {b}");
    }
}

#[test]
fn equal_seeds_give_identical_logs() {
    let g = game(3, StateType::TypeB, RewardScheme::Iqf);
    assert_eq!(random_run(&g, 500, 9).unwrap(), random_run(&g, 500, 9).unwrap());
    let q = QLearningConfig::default();
    assert_eq!(train_run(&g, &q, 800, 9).unwrap().log, train_run(&g, &q, 800, 9).unwrap().log);
    assert_ne!(random_run(&g, 500, 9).unwrap(), random_run(&g, 500, 10).unwrap());
}

#[test]
fn two_agent_training_never_hits_the_cap() {
    let g = game(2, StateType::TypeA, RewardScheme::Ilf);
    let run = train_run(&g, &QLearningConfig::default(), 1000, 2).unwrap();
    assert_eq!(run.log.len(), 1000);
    assert!(run.log.iter().all(|e| !e.capped));
}

#[test]
fn greedy_learners_with_no_exploration_are_reproducible() {
    let g = game(2, StateType::TypeA, RewardScheme::Ilf);
    let q = QLearningConfig::constant_epsilon(0.0);
    let a = train_run(&g, &q, 300, 4).unwrap().log;
    let b = train_run(&g, &q, 300, 4).unwrap().log;
    assert_eq!(a, b);
}

#[test]
fn coordination_scores_are_negative_on_reduced_sweep() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = SweepConfig {
        agents: vec![2, 3],
        seeds: 3,
        seed_root: 77,
        ..SweepConfig::new(tmp.path())
    };
    let out = sweep(&cfg).unwrap();
    assert!(out.is_complete());
    let learners: Vec<_> = out
        .results
        .iter()
        .filter(|r| matches!(r.spec.policy, harness::PolicySpec::Qlearning(_)))
        .collect();
    assert_eq!(learners.len(), 24);
    for variant in [AltVariant::Calt, AltVariant::Aalt] {
        let negative = learners
            .iter()
            .filter(|r| {
                r.comparisons
                    .iter()
                    .any(|c| c.variant == variant && c.coordination_score_pct <= 0.0)
            })
            .count();
        assert!(negative * 2 > learners.len(), "{variant}: {negative}/24 negative");
    }
}

#[test]
fn cached_and_fresh_baselines_agree() {
    let tmp = tempfile::tempdir().unwrap();
    let mut cfg = SweepConfig {
        agents: vec![2],
        seeds: 1,
        episodes_override: Some(500),
        seed_root: 3,
        ..SweepConfig::new(tmp.path())
    };
    let fresh = sweep(&cfg).unwrap();
    cfg.reuse_baselines = true;
    cfg.overwrite = true;
    let cached = sweep(&cfg).unwrap();
    for (a, b) in fresh.results.iter().zip(&cached.results) {
        for (x, y) in a.comparisons.iter().zip(&b.comparisons) {
            assert!((x.random_ref - y.random_ref).abs() <= 0.02);
        }
    }
}
