//! Line-delimited JSON episode logs.
//!
//! One record per line with exactly these fields:
//!
//! ```text
//! {"episode":0,"arrivals":[1],"exclusive_winner":1,"rewards":[0.0,100.0],"steps":3,"capped":false}
//! ```
//!
//! Agent ids are 0-based. Any simulator that writes this format can be scored
//! with `altlab metrics`.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::game::EpisodeOutcome;

pub fn write_log<W: Write>(log: &[EpisodeOutcome], mut out: W) -> Result<()> {
    for ep in log {
        serde_json::to_writer(&mut out, ep)?;
        out.write_all(b"\n").map_err(|e| Error::io("<log writer>", e))?;
    }
    Ok(())
}

pub fn save_log(log: &[EpisodeOutcome], path: &Path) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut out = BufWriter::new(file);
    write_log(log, &mut out)?;
    out.flush().map_err(|e| Error::io(path, e))
}

/// Parses a log; with `n_agents` every record is also checked for internal
/// consistency. Errors carry the 1-based line number. Blank lines are skipped.
pub fn read_log<R: BufRead>(input: R, n_agents: Option<usize>) -> Result<Vec<EpisodeOutcome>> {
    let mut log = Vec::new();
    for (i, line) in input.lines().enumerate() {
        let line_no = i + 1;
        let line = line.map_err(|e| Error::LogLine {
            line: line_no,
            message: e.to_string(),
        })?;
        if line.trim().is_empty() {
            continue;
        }
        let ep: EpisodeOutcome = serde_json::from_str(&line).map_err(|e| Error::LogLine {
            line: line_no,
            message: e.to_string(),
        })?;
        if let Some(n) = n_agents {
            ep.validate(n).map_err(|message| Error::LogLine {
                line: line_no,
                message,
            })?;
        }
        log.push(ep);
    }
    Ok(log)
}

pub fn load_log(path: &Path, n_agents: Option<usize>) -> Result<Vec<EpisodeOutcome>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_log(BufReader::new(file), n_agents)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::{GameConfig, RewardScheme, StateType};
    use crate::policy::random_run;
    use proptest::prelude::*;

    #[test]
    fn record_format_is_canonical() {
        let cfg = GameConfig::new(3, StateType::TypeA, RewardScheme::Ilf).unwrap();
        let ep = EpisodeOutcome::from_arrivals(4, vec![0, 2], 3, &cfg).unwrap();
        let mut buf = Vec::new();
        write_log(&[ep], &mut buf).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "{\"episode\":4,\"arrivals\":[0,2],\"exclusive_winner\":null,\
             \"rewards\":[33.333333333333336,0.0,33.333333333333336],\"steps\":3,\"capped\":false}\n"
        );
    }

    #[test]
    fn capped_flag_round_trips() {
        let line = r#"{"episode":0,"arrivals":[],"exclusive_winner":null,"rewards":[0.0,0.0],"steps":1000,"capped":true}"#;
        let log = read_log(line.as_bytes(), Some(2)).unwrap();
        assert!(log[0].capped);
        let mut buf = Vec::new();
        write_log(&log, &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap().trim_end(), line);
    }

    #[test]
    fn malformed_lines_are_located() {
        let good = r#"{"episode":0,"arrivals":[0],"exclusive_winner":0,"rewards":[100.0,0.0],"steps":2,"capped":false}"#;
        let text = format!("{good}\n{good}\nnot json\n");
        match read_log(text.as_bytes(), None) {
            Err(Error::LogLine { line, .. }) => assert_eq!(line, 3),
            other => panic!("unexpected {other:?}"),
        }
        let inconsistent = r#"{"episode":0,"arrivals":[0],"exclusive_winner":1,"rewards":[100.0,0.0],"steps":2,"capped":false}"#;
        let text = format!("{good}\n{inconsistent}\n");
        match read_log(text.as_bytes(), Some(2)) {
            Err(Error::LogLine { line, .. }) => assert_eq!(line, 2),
            other => panic!("unexpected {other:?}"),
        }
    }

    proptest! {
        #[test]
        fn simulated_logs_round_trip(seed in any::<u64>(), n in 2usize..6) {
            let cfg = GameConfig::new(n, StateType::TypeA, RewardScheme::Ilf).unwrap();
            let log = random_run(&cfg, 50, seed).unwrap();
            let mut buf = Vec::new();
            write_log(&log, &mut buf).unwrap();
            let back = read_log(buf.as_slice(), Some(n)).unwrap();
            prop_assert_eq!(back, log);
        }
    }
}
