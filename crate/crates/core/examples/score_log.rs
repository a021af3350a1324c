//! Scores an episode log from any simulator.
//!
//! `cargo run --example score_log -- path/to/log.jsonl 3`
//! Without arguments a small perfect-alternation log is scored instead.

use altlab::{load_log, read_log, MetricPanel};

const PA_LOG: &str = r#"{"episode":0,"arrivals":[0],"exclusive_winner":0,"rewards":[100.0,0.0],"steps":2,"capped":false}
{"episode":1,"arrivals":[1],"exclusive_winner":1,"rewards":[0.0,100.0],"steps":3,"capped":false}
{"episode":2,"arrivals":[0],"exclusive_winner":0,"rewards":[100.0,0.0],"steps":2,"capped":false}
{"episode":3,"arrivals":[0,1],"exclusive_winner":null,"rewards":[0.0,0.0],"steps":4,"capped":false}
"#;

fn main() -> altlab::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let (log, n) = match args.as_slice() {
        [path, n] => {
            let n: usize = n.parse().map_err(|_| altlab::Error::Config(format!("bad agent count {n}")))?;
            (load_log(path.as_ref(), Some(n))?, n)
        }
        _ => (read_log(PA_LOG.as_bytes(), Some(2))?, 2),
    };
    let p = MetricPanel::compute(&log, n, 100.0)?;
    println!("{} episodes, {} windows", p.nu, p.b);
    for (name, v) in [
        ("fairness", p.fairness.value()),
        ("tt_fairness", p.tt_fairness.value()),
        ("reward_fairness", p.reward_fairness.value()),
    ] {
        println!("{name:>16}: {}", v.map_or("undefined".into(), |v| format!("{v:.4}")));
    }
    println!("{:>16}: {:.4}", "efficiency", p.efficiency);
    for v in altlab::AltVariant::ALL {
        println!("{:>16}: {:.4}", v.name(), p.alt().get(v));
    }
    Ok(())
}
