//! On-disk layout of runs and sweeps.
//!
//! ```text
//! <root>/
//!   summary.csv          one row per run (fixed columns, see SummaryRow)
//!   comparisons.csv      Q-learning vs baseline comparison records
//!   sweep.json           plan, configuration and per-run failures
//!   runs/<run_id>/
//!     log.jsonl          episode log
//!     panel.csv          metric panel(s): `full`, plus `greedy_eval` for learners
//!     curve.csv          training curve (learners only)
//!     spec.snapshot      JSON experiment spec with schema version
//! ```

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::analysis::ComparisonRecord;
use crate::episode_log::{load_log, save_log};
use crate::error::{Error, Result};
use crate::game::EpisodeOutcome;
use crate::harness::{ExperimentSpec, RunResult};
use crate::metrics::{AltVariant, MetricPanel, Ratio};

pub const SCHEMA_VERSION: &str = "altlab-run/1";

pub const LOG_FILE: &str = "log.jsonl";
pub const PANEL_FILE: &str = "panel.csv";
pub const CURVE_FILE: &str = "curve.csv";
pub const SPEC_FILE: &str = "spec.snapshot";
pub const SUMMARY_FILE: &str = "summary.csv";
pub const COMPARISONS_FILE: &str = "comparisons.csv";
pub const MANIFEST_FILE: &str = "sweep.json";

/// Where runs are written and whether existing run directories may be replaced.
#[derive(Clone, Debug)]
pub struct RunStore {
    pub root: PathBuf,
    pub overwrite: bool,
}

impl RunStore {
    pub fn new(root: impl Into<PathBuf>, overwrite: bool) -> Self {
        RunStore {
            root: root.into(),
            overwrite,
        }
    }

    pub fn run_dir(&self, run_id: &str) -> PathBuf {
        self.root.join("runs").join(run_id)
    }

    /// Fails with [`Error::PathCollision`] when the run exists and overwriting is off.
    pub fn check_free(&self, run_id: &str) -> Result<()> {
        let dir = self.run_dir(run_id);
        if dir.exists() && !self.overwrite {
            return Err(Error::PathCollision(dir));
        }
        Ok(())
    }

    pub fn persist(
        &self,
        result: &RunResult,
        log: &[EpisodeOutcome],
    ) -> Result<PathBuf> {
        self.check_free(&result.spec.run_id)?;
        let dir = self.run_dir(&result.spec.run_id);
        if dir.exists() {
            fs::remove_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
        }
        fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;

        save_log(log, &dir.join(LOG_FILE))?;
        let mut rows = vec![PanelRow::new("full", &result.panel)];
        if let Some(eval) = &result.eval_panel {
            rows.push(PanelRow::new("greedy_eval", eval));
        }
        write_csv(&dir.join(PANEL_FILE), &rows)?;
        if let Some(curve) = &result.training_curve {
            write_csv(&dir.join(CURVE_FILE), curve)?;
        }
        write_json(&dir.join(SPEC_FILE), &SpecSnapshot::new(&result.spec))?;
        Ok(dir)
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SpecSnapshot {
    pub schema_version: String,
    pub spec: ExperimentSpec,
}

impl SpecSnapshot {
    pub fn new(spec: &ExperimentSpec) -> Self {
        SpecSnapshot {
            schema_version: SCHEMA_VERSION.to_string(),
            spec: spec.clone(),
        }
    }
}

pub fn check_schema(found: &str) -> Result<()> {
    if found != SCHEMA_VERSION {
        return Err(Error::SchemaVersion {
            found: found.to_string(),
            expected: SCHEMA_VERSION.to_string(),
        });
    }
    Ok(())
}

/// A persisted run read back from disk.
#[derive(Clone, Debug)]
pub struct LoadedRun {
    pub spec: ExperimentSpec,
    pub log: Vec<EpisodeOutcome>,
    pub panels: Vec<PanelRow>,
}

pub fn load_run(dir: &Path) -> Result<LoadedRun> {
    let snapshot: SpecSnapshot = read_json(&dir.join(SPEC_FILE))?;
    check_schema(&snapshot.schema_version)?;
    let log = load_log(&dir.join(LOG_FILE), Some(snapshot.spec.game.n_agents))?;
    let panels = read_csv(&dir.join(PANEL_FILE))?;
    Ok(LoadedRun {
        spec: snapshot.spec,
        log,
        panels,
    })
}

/// Flat panel record; column names are fixed.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PanelRow {
    pub label: String,
    pub nu: usize,
    pub b: usize,
    pub fairness: Option<f64>,
    pub efficiency: f64,
    pub tt_fairness: Option<f64>,
    pub reward_fairness: Option<f64>,
    pub falt: f64,
    pub qfalt: f64,
    pub ealt: f64,
    pub qealt: f64,
    pub calt: f64,
    pub aalt: f64,
}

impl PanelRow {
    pub fn new(label: &str, p: &MetricPanel) -> Self {
        PanelRow {
            label: label.to_string(),
            nu: p.nu,
            b: p.b,
            fairness: p.fairness.value(),
            efficiency: p.efficiency,
            tt_fairness: p.tt_fairness.value(),
            reward_fairness: p.reward_fairness.value(),
            falt: p.falt,
            qfalt: p.qfalt,
            ealt: p.ealt,
            qealt: p.qealt,
            calt: p.calt,
            aalt: p.aalt,
        }
    }

    pub fn panel(&self) -> MetricPanel {
        let ratio = |v: Option<f64>| v.map_or(Ratio::Undefined, Ratio::Value);
        MetricPanel {
            nu: self.nu,
            b: self.b,
            fairness: ratio(self.fairness),
            efficiency: self.efficiency,
            tt_fairness: ratio(self.tt_fairness),
            reward_fairness: ratio(self.reward_fairness),
            falt: self.falt,
            qfalt: self.qfalt,
            ealt: self.ealt,
            qealt: self.qealt,
            calt: self.calt,
            aalt: self.aalt,
        }
    }
}

/// One line of `summary.csv`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub run_id: String,
    pub n: usize,
    pub state_type: String,
    pub reward_scheme: String,
    pub policy: String,
    pub nu: usize,
    pub fairness: Option<f64>,
    pub efficiency: f64,
    pub tt_fairness: Option<f64>,
    pub reward_fairness: Option<f64>,
    pub falt: f64,
    pub qfalt: f64,
    pub ealt: f64,
    pub qealt: f64,
    pub calt: f64,
    pub aalt: f64,
    pub calt_rel_change_pct: Option<f64>,
    pub calt_coord_score_pct: Option<f64>,
    pub alt_ratio: f64,
    pub pa_equiv_agents: f64,
    /// Free-form `key=value;…` cell; the only column allowed to vary between
    /// identical sweeps.
    pub metadata: String,
}

impl SummaryRow {
    pub fn new(result: &RunResult, metadata: String) -> Self {
        let p = &result.panel;
        let g = &result.spec.game;
        let calt_cmp = result
            .comparisons
            .iter()
            .find(|c| c.variant == AltVariant::Calt);
        SummaryRow {
            run_id: result.spec.run_id.clone(),
            n: g.n_agents,
            state_type: g.state_type.label().to_string(),
            reward_scheme: g.reward_scheme.label().to_string(),
            policy: result.spec.policy.label().to_string(),
            nu: p.nu,
            fairness: p.fairness.value(),
            efficiency: p.efficiency,
            tt_fairness: p.tt_fairness.value(),
            reward_fairness: p.reward_fairness.value(),
            falt: p.falt,
            qfalt: p.qfalt,
            ealt: p.ealt,
            qealt: p.qealt,
            calt: p.calt,
            aalt: p.aalt,
            calt_rel_change_pct: calt_cmp.map(|c| c.relative_change_pct),
            calt_coord_score_pct: calt_cmp.map(|c| c.coordination_score_pct),
            alt_ratio: result.pa_equiv.alt_ratio,
            pa_equiv_agents: result.pa_equiv.pa_equiv_agents,
            metadata,
        }
    }
}

/// One line of `comparisons.csv`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub run_id: String,
    pub baseline_run_id: String,
    pub n: usize,
    pub state_type: String,
    pub reward_scheme: String,
    pub variant: String,
    pub observed: f64,
    pub random_ref: f64,
    pub relative_change_pct: f64,
    pub coordination_score_pct: f64,
}

impl ComparisonRow {
    pub fn new(result: &RunResult, baseline_run_id: &str, c: &ComparisonRecord) -> Self {
        let g = &result.spec.game;
        ComparisonRow {
            run_id: result.spec.run_id.clone(),
            baseline_run_id: baseline_run_id.to_string(),
            n: g.n_agents,
            state_type: g.state_type.label().to_string(),
            reward_scheme: g.reward_scheme.label().to_string(),
            variant: c.variant.name().to_string(),
            observed: c.observed,
            random_ref: c.random_ref,
            relative_change_pct: c.relative_change_pct,
            coordination_score_pct: c.coordination_score_pct,
        }
    }
}

pub fn write_csv<T: Serialize>(path: &Path, rows: &[T]) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = csv::Writer::from_writer(BufWriter::new(file));
    for row in rows {
        w.serialize(row)?;
    }
    w.flush().map_err(|e| Error::io(path, e))?;
    Ok(())
}

pub fn csv_string<T: Serialize>(rows: &[T]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for row in rows {
        w.serialize(row)?;
    }
    let bytes = w
        .into_inner()
        .map_err(|e| Error::Data(format!("csv buffer: {e}")))?;
    String::from_utf8(bytes).map_err(|e| Error::Data(e.to_string()))
}

pub fn read_csv<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<Vec<T>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut r = csv::Reader::from_reader(file);
    r.deserialize().map(|row| row.map_err(Error::from)).collect()
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut out = BufWriter::new(file);
    serde_json::to_writer_pretty(&mut out, value)?;
    out.write_all(b"\n").map_err(|e| Error::io(path, e))?;
    out.flush().map_err(|e| Error::io(path, e))
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(serde_json::from_str(&text)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::{GameConfig, RewardScheme, StateType};
    use crate::harness::{run_baseline, ExperimentSpec};

    fn spec(run_id: &str) -> ExperimentSpec {
        let game = GameConfig::new(2, StateType::TypeA, RewardScheme::Ilf).unwrap();
        ExperimentSpec::random(run_id, game, 500, 42)
    }

    #[test]
    fn persisted_run_recomputes_identically() {
        let tmp = tempfile::tempdir().unwrap();
        let store = RunStore::new(tmp.path(), false);
        let result = run_baseline(&spec("b"), Some(&store)).unwrap();
        let loaded = load_run(&store.run_dir("b")).unwrap();
        assert_eq!(loaded.spec, result.spec);
        let recomputed = MetricPanel::compute(&loaded.log, 2, 100.0).unwrap();
        assert_eq!(recomputed, result.panel);
        assert_eq!(loaded.panels[0].panel(), result.panel);
    }

    #[test]
    fn collisions_need_overwrite() {
        let tmp = tempfile::tempdir().unwrap();
        let store = RunStore::new(tmp.path(), false);
        run_baseline(&spec("b"), Some(&store)).unwrap();
        assert!(matches!(
            run_baseline(&spec("b"), Some(&store)),
            Err(Error::PathCollision(_))
        ));
        let store = RunStore::new(tmp.path(), true);
        run_baseline(&spec("b"), Some(&store)).unwrap();
    }

    #[test]
    fn schema_mismatch_is_reported() {
        let tmp = tempfile::tempdir().unwrap();
        let store = RunStore::new(tmp.path(), false);
        run_baseline(&spec("b"), Some(&store)).unwrap();
        let path = store.run_dir("b").join(SPEC_FILE);
        let text = fs::read_to_string(&path).unwrap().replace(SCHEMA_VERSION, "altlab-run/0");
        fs::write(&path, text).unwrap();
        match load_run(&store.run_dir("b")) {
            Err(Error::SchemaVersion { found, expected }) => {
                assert_eq!(found, "altlab-run/0");
                assert_eq!(expected, SCHEMA_VERSION);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn undefined_ratios_are_empty_cells() {
        let mut row = PanelRow::new("full", &MetricPanel {
            nu: 2,
            b: 1,
            fairness: Ratio::Undefined,
            efficiency: 0.0,
            tt_fairness: Ratio::Value(1.0),
            reward_fairness: Ratio::Undefined,
            falt: 0.5,
            qfalt: 0.25,
            ealt: 0.0,
            qealt: 0.0,
            calt: 0.0,
            aalt: 0.0,
        });
        let text = csv_string(std::slice::from_ref(&row)).unwrap();
        assert_eq!(
            text,
            "label,nu,b,fairness,efficiency,tt_fairness,reward_fairness,falt,qfalt,ealt,qealt,calt,aalt\n\
             full,2,1,,0.0,1.0,,0.5,0.25,0.0,0.0,0.0,0.0\n"
        );
        let back: Vec<PanelRow> = csv::Reader::from_reader(text.as_bytes())
            .deserialize()
            .collect::<std::result::Result<_, _>>()
            .unwrap();
        row.label = "full".into();
        assert_eq!(back, vec![row]);
    }
}
