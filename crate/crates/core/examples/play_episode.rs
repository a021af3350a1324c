//! Steps one episode by hand, then plays a few with random agents.

use altlab::{
    agent_streams, encode_state, is_terminal, run_episode, step, Action, GameConfig, GameState,
    JointAction, RandomPolicy, RewardScheme, StateType,
};

fn main() -> altlab::Result<()> {
    let cfg = GameConfig::new(3, StateType::TypeB, RewardScheme::Ilf)?;
    let mut state = GameState::initial(&cfg, &[false; 3])?;
    let plan = [
        [Action::Move, Action::Move, Action::Stay],
        [Action::Move, Action::Stay, Action::Move],
    ];
    for joint in plan {
        println!("{:<12} {:?}", encode_state(&state, &cfg).to_string(), joint);
        state = step(&state, &JointAction(joint.to_vec()), &cfg)?;
    }
    println!("terminal={} arrivals={:?}", is_terminal(&state, &cfg), state.arrivals(&cfg));

    let mut policies = vec![RandomPolicy; 3];
    let mut rngs = agent_streams(42, 3);
    let mut carry = vec![false; 3];
    for e in 0..5 {
        let out = run_episode(e, &mut policies, &mut rngs, &mut carry, 1.0, &cfg)?;
        println!(
            "episode {e}: arrivals {:?} winner {:?} rewards {:?} steps {}",
            out.arrivals, out.exclusive_winner, out.rewards, out.steps_used
        );
    }
    Ok(())
}
