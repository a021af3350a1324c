//! Table and figure-data CSVs built from a finished (or partial) sweep.
//!
//! Cells that have no data because runs failed or were never written hold the
//! literal `GAP`, and the row's `status` column says why.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use crate::analysis::{alt_ratio_from_calt, coordination_score, pa_equivalent, relative_change, ComparisonRecord};
use crate::error::{Error, Result};
use crate::harness::{CurvePoint, SweepManifest};
use crate::store::{check_schema, read_csv, read_json, SummaryRow, CURVE_FILE, MANIFEST_FILE, SUMMARY_FILE};

pub const GAP: &str = "GAP";

pub const REPORT_FILES: [&str; 7] = [
    "table2.csv",
    "table3.csv",
    "table5.csv",
    "fig1.csv",
    "fig2.csv",
    "fig3.csv",
    "fig5.csv",
];

#[derive(Clone, Debug, Default)]
pub struct ReportOutcome {
    pub files: Vec<PathBuf>,
    /// Human-readable description of every gap marker written.
    pub gaps: Vec<String>,
}

impl ReportOutcome {
    pub fn is_complete(&self) -> bool {
        self.gaps.is_empty()
    }
}

type Mode = (String, String);

/// Rows of one policy for one agent count, grouped by (state type, scheme).
fn by_mode<'a>(rows: &[&'a SummaryRow]) -> BTreeMap<Mode, Vec<&'a SummaryRow>> {
    let mut out: BTreeMap<Mode, Vec<&SummaryRow>> = BTreeMap::new();
    for r in rows {
        out.entry((r.state_type.clone(), r.reward_scheme.clone()))
            .or_default()
            .push(r);
    }
    out
}

fn mean(xs: &[f64]) -> Option<f64> {
    (!xs.is_empty()).then(|| xs.iter().sum::<f64>() / xs.len() as f64)
}

fn std_dev(xs: &[f64]) -> Option<f64> {
    let m = mean(xs)?;
    Some((xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / xs.len() as f64).sqrt())
}

/// Seeds are averaged within a mode first; the result is one value per mode.
fn mode_means(rows: &[&SummaryRow], get: impl Fn(&SummaryRow) -> Option<f64>) -> Vec<f64> {
    by_mode(rows)
        .values()
        .filter_map(|group| mean(&group.iter().filter_map(|r| get(r)).collect::<Vec<_>>()))
        .collect()
}

fn fmt(v: Option<f64>, places: usize) -> String {
    match v {
        Some(x) => format!("{x:.places$}"),
        None => GAP.to_string(),
    }
}

fn write_rows(path: &Path, header: &[&str], rows: &[Vec<String>]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(header)?;
    for row in rows {
        w.write_record(row)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

struct Sweep {
    manifest: SweepManifest,
    rows: Vec<SummaryRow>,
    dir: PathBuf,
}

impl Sweep {
    fn rows(&self, n: usize, policy: &str) -> Vec<&SummaryRow> {
        self.rows
            .iter()
            .filter(|r| r.n == n && r.policy == policy)
            .collect()
    }

    fn planned(&self, n: usize, prefix: &str) -> usize {
        let tag = format!("{prefix}-n{n:02}-");
        self.manifest
            .planned
            .iter()
            .filter(|id| id.starts_with(&tag))
            .count()
    }

    fn status(&self, n: usize, prefix: &str, found: usize, gaps: &mut Vec<String>, table: &str) -> String {
        let planned = self.planned(n, prefix);
        if found == 0 {
            gaps.push(format!("{table}: no {prefix} runs for n={n}"));
            "gap".to_string()
        } else if found < planned {
            gaps.push(format!("{table}: {found}/{planned} {prefix} runs for n={n}"));
            format!("partial {found}/{planned}")
        } else {
            "ok".to_string()
        }
    }
}

/// Reads `sweep.json` and `summary.csv` from `sweep_dir` and writes the seven
/// report files into `out_dir`.
pub fn write_report(sweep_dir: &Path, out_dir: &Path) -> Result<ReportOutcome> {
    let manifest: SweepManifest = read_json(&sweep_dir.join(MANIFEST_FILE))?;
    check_schema(&manifest.schema_version)?;
    let summary = sweep_dir.join(SUMMARY_FILE);
    let rows: Vec<SummaryRow> = if summary.exists() {
        read_csv(&summary)?
    } else {
        Vec::new()
    };
    std::fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let sweep = Sweep {
        manifest,
        rows,
        dir: sweep_dir.to_path_buf(),
    };
    let mut outcome = ReportOutcome::default();
    let gaps = &mut outcome.gaps;
    let path = |name: &str| out_dir.join(name);

    write_rows(&path("table2.csv"), &TABLE2_HEADER, &table2(&sweep, gaps))?;
    write_rows(&path("table3.csv"), &TABLE3_HEADER, &table3(&sweep, gaps))?;
    write_rows(&path("table5.csv"), &TABLE5_HEADER, &table5(&sweep, gaps))?;
    write_rows(&path("fig1.csv"), &FIG1_HEADER, &fig1(&sweep))?;
    write_rows(&path("fig2.csv"), &FIG2_HEADER, &fig2(&sweep))?;
    write_rows(&path("fig3.csv"), &FIG3_HEADER, &fig3(&sweep))?;
    write_rows(&path("fig5.csv"), &FIG5_HEADER, &fig5(&sweep, gaps)?)?;
    outcome.files = REPORT_FILES.iter().map(|f| path(f)).collect();
    Ok(outcome)
}

const TABLE2_HEADER: [&str; 8] = [
    "agents",
    "calt",
    "falt",
    "ealt",
    "efficiency_ilf",
    "efficiency_iqf",
    "fairness",
    "status",
];

/// Random baselines averaged across state types.
fn table2(sweep: &Sweep, gaps: &mut Vec<String>) -> Vec<Vec<String>> {
    sweep
        .manifest
        .config
        .agents
        .iter()
        .map(|&n| {
            let rows = sweep.rows(n, "random");
            let avg = |f: &dyn Fn(&SummaryRow) -> Option<f64>| {
                mean(&rows.iter().filter_map(|r| f(r)).collect::<Vec<_>>())
            };
            let eff = |scheme: &str| {
                mean(
                    &rows
                        .iter()
                        .filter(|r| r.reward_scheme == scheme)
                        .map(|r| r.efficiency)
                        .collect::<Vec<_>>(),
                )
            };
            vec![
                n.to_string(),
                fmt(avg(&|r| Some(r.calt)), 3),
                fmt(avg(&|r| Some(r.falt)), 3),
                fmt(avg(&|r| Some(r.ealt)), 3),
                fmt(eff("ilf"), 3),
                fmt(eff("iqf"), 3),
                fmt(avg(&|r| r.fairness), 3),
                sweep.status(n, "baseline", rows.len(), gaps, "table2"),
            ]
        })
        .collect()
}

const TABLE3_HEADER: [&str; 7] = [
    "agents",
    "metric",
    "q_learning",
    "random",
    "rel_change_pct",
    "coord_score_pct",
    "status",
];

/// Learner and baseline values are means over the available modes.
fn table3(sweep: &Sweep, gaps: &mut Vec<String>) -> Vec<Vec<String>> {
    type Getter = fn(&SummaryRow) -> Option<f64>;
    let metrics: [(&str, Getter); 4] = [
        ("CALT", |r| Some(r.calt)),
        ("EALT", |r| Some(r.ealt)),
        ("AALT", |r| Some(r.aalt)),
        ("FALT", |r| Some(r.falt)),
    ];
    let mut out = Vec::new();
    for &n in &sweep.manifest.config.agents {
        let ql = sweep.rows(n, "qlearning");
        let rnd = sweep.rows(n, "random");
        let status = {
            let a = sweep.status(n, "ql", ql.len(), gaps, "table3");
            let b = sweep.status(n, "baseline", rnd.len(), gaps, "table3");
            if a == "ok" { b } else { a }
        };
        for (name, get) in metrics {
            let obs = mean(&mode_means(&ql, get));
            let reference = mean(&mode_means(&rnd, get));
            let (rel, coord) = match (obs, reference) {
                (Some(o), Some(r)) => (
                    relative_change(o, r).ok(),
                    coordination_score(o, r, ComparisonRecord::PERFECT).ok(),
                ),
                _ => (None, None),
            };
            out.push(vec![
                n.to_string(),
                name.to_string(),
                fmt(obs, 3),
                fmt(reference, 3),
                fmt(rel, 1),
                fmt(coord, 1),
                status.clone(),
            ]);
        }
    }
    out
}

const TABLE5_HEADER: [&str; 7] = [
    "agents",
    "reward_type",
    "calt_ql",
    "alt_ratio",
    "pa_equiv_agents",
    "pct_of_perfect",
    "status",
];

/// Type-B learners only, one row per reward scheme.
fn table5(sweep: &Sweep, gaps: &mut Vec<String>) -> Vec<Vec<String>> {
    let mut out = Vec::new();
    for &n in &sweep.manifest.config.agents {
        for scheme in ["ilf", "iqf"] {
            let calts: Vec<f64> = sweep
                .rows(n, "qlearning")
                .iter()
                .filter(|r| r.state_type == "B" && r.reward_scheme == scheme)
                .map(|r| r.calt)
                .collect();
            let calt = mean(&calts);
            let pa = calt.and_then(|c| pa_equivalent(alt_ratio_from_calt(c), n).ok());
            let status = if calt.is_some() {
                "ok".to_string()
            } else {
                gaps.push(format!("table5: no Type-B {scheme} learners for n={n}"));
                "gap".to_string()
            };
            out.push(vec![
                n.to_string(),
                scheme.to_uppercase(),
                fmt(calt, 4),
                fmt(pa.as_ref().map(|p| p.alt_ratio), 3),
                fmt(pa.as_ref().map(|p| p.pa_equiv_agents), 2),
                fmt(pa.as_ref().map(|p| p.pct_of_perfect), 1),
                status,
            ]);
        }
    }
    out
}

const FIG1_HEADER: [&str; 5] = [
    "agents",
    "ql_calt_mean",
    "ql_calt_std",
    "random_calt_mean",
    "random_calt_std",
];

/// CALT bars with spread across modes.
fn fig1(sweep: &Sweep) -> Vec<Vec<String>> {
    sweep
        .manifest
        .config
        .agents
        .iter()
        .map(|&n| {
            let ql = mode_means(&sweep.rows(n, "qlearning"), |r| Some(r.calt));
            let rnd = mode_means(&sweep.rows(n, "random"), |r| Some(r.calt));
            vec![
                n.to_string(),
                fmt(mean(&ql), 6),
                fmt(std_dev(&ql), 6),
                fmt(mean(&rnd), 6),
                fmt(std_dev(&rnd), 6),
            ]
        })
        .collect()
}

const FIG2_HEADER: [&str; 7] = [
    "agents",
    "ql_pct_mean",
    "ql_pct_min",
    "ql_pct_max",
    "random_pct_mean",
    "random_pct_min",
    "random_pct_max",
];

/// Percent of perfect alternation per mode, summarised across modes.
fn fig2(sweep: &Sweep) -> Vec<Vec<String>> {
    let pct = |rows: Vec<&SummaryRow>| -> Vec<f64> {
        mode_means(&rows, |r| Some(r.calt))
            .into_iter()
            .map(|c| 100.0 * alt_ratio_from_calt(c))
            .collect()
    };
    let fold = |xs: &[f64], f: fn(f64, f64) -> f64| xs.iter().copied().reduce(f);
    sweep
        .manifest
        .config
        .agents
        .iter()
        .map(|&n| {
            let ql = pct(sweep.rows(n, "qlearning"));
            let rnd = pct(sweep.rows(n, "random"));
            vec![
                n.to_string(),
                fmt(mean(&ql), 3),
                fmt(fold(&ql, f64::min), 3),
                fmt(fold(&ql, f64::max), 3),
                fmt(mean(&rnd), 3),
                fmt(fold(&rnd, f64::min), 3),
                fmt(fold(&rnd, f64::max), 3),
            ]
        })
        .collect()
}

const FIG3_HEADER: [&str; 5] = ["agents", "policy", "efficiency", "reward_fairness", "calt"];

fn fig3(sweep: &Sweep) -> Vec<Vec<String>> {
    let mut out = Vec::new();
    for &n in &sweep.manifest.config.agents {
        for policy in ["qlearning", "random"] {
            let rows = sweep.rows(n, policy);
            out.push(vec![
                n.to_string(),
                policy.to_string(),
                fmt(mean(&mode_means(&rows, |r| Some(r.efficiency))), 6),
                fmt(mean(&mode_means(&rows, |r| r.reward_fairness)), 6),
                fmt(mean(&mode_means(&rows, |r| Some(r.calt))), 6),
            ]);
        }
    }
    out
}

const FIG5_HEADER: [&str; 5] = [
    "agents",
    "episode",
    "epsilon",
    "windowed_calt",
    "windowed_efficiency",
];

/// Training curves averaged point-wise over every learner of each agent count.
fn fig5(sweep: &Sweep, gaps: &mut Vec<String>) -> Result<Vec<Vec<String>>> {
    let mut out = Vec::new();
    for &n in &sweep.manifest.config.agents {
        let mut curves: Vec<Vec<CurvePoint>> = Vec::new();
        for r in sweep.rows(n, "qlearning") {
            let path = sweep.dir.join("runs").join(&r.run_id).join(CURVE_FILE);
            if path.exists() {
                curves.push(read_csv(&path)?);
            }
        }
        let len = curves.iter().map(Vec::len).min().unwrap_or(0);
        if len == 0 {
            gaps.push(format!("fig5: no training curves for n={n}"));
            out.push(vec![n.to_string(), GAP.into(), GAP.into(), GAP.into(), GAP.into()]);
            continue;
        }
        for i in 0..len {
            let avg = |f: fn(&CurvePoint) -> f64| {
                curves.iter().map(|c| f(&c[i])).sum::<f64>() / curves.len() as f64
            };
            out.push(vec![
                n.to_string(),
                curves[0][i].episode.to_string(),
                avg(|p| p.epsilon).to_string(),
                avg(|p| p.windowed_calt).to_string(),
                avg(|p| p.windowed_efficiency).to_string(),
            ]);
        }
    }
    Ok(out)
}
