//! A reduced sweep (two and three agents) followed by the table and figure
//! CSVs. Output goes to `$TMPDIR/altlab-sweep-example`.

use altlab::report::write_report;
use altlab::{sweep, SweepConfig};

fn main() -> altlab::Result<()> {
    let out = std::env::temp_dir().join("altlab-sweep-example");
    let cfg = SweepConfig {
        agents: vec![2, 3],
        seeds: 2,
        seed_root: 1,
        overwrite: true,
        ..SweepConfig::new(&out)
    };
    let outcome = sweep(&cfg)?;
    println!("{} runs, {} failures", outcome.results.len(), outcome.failures.len());
    for row in outcome.rows.iter().filter(|r| r.policy == "qlearning") {
        println!(
            "{:<18} CALT {:.3}  coord.score {:>6.1}%  PA-equiv {:.2}",
            row.run_id,
            row.calt,
            row.calt_coord_score_pct.unwrap_or(f64::NAN),
            row.pa_equiv_agents
        );
    }
    let report = write_report(&out, &out.join("report"))?;
    for f in report.files {
        println!("wrote {}", f.display());
    }
    Ok(())
}
