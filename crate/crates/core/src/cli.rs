//! Command-line front end. Parallelism lives in the harness; everything here
//! is synchronous.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::analysis::{
    alt_ratio_from_calt, episodes_for, fit_alt_ratio_regression, pa_equivalent, ComparisonRecord,
    ScalingConfig,
};
use crate::episode_log::load_log;
use crate::error::{Error, Result};
use crate::game::{GameConfig, RewardScheme, StateType};
use crate::harness::{self, ExperimentSpec, SweepConfig, BASELINE_EPISODES};
use crate::metrics::{AltVariant, MetricPanel};
use crate::policy::QLearningConfig;
use crate::report::write_report;
use crate::store::{csv_string, PanelRow, RunStore};

pub const OUT_ENV: &str = "ALTLAB_OUT";
pub const DEFAULT_OUT: &str = "altlab-out";

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_DATA: i32 = 3;
pub const EXIT_PARTIAL: i32 = 4;

#[derive(Parser, Debug)]
#[command(name = "altlab", version, about = "Turn-taking metrics for the multi-agent Battle of the Exes")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Run one configuration and persist it.
    Simulate(SimulateArgs),
    /// Run one uniform-random baseline.
    Baseline(BaselineArgs),
    /// Run the full configuration matrix with baselines.
    Sweep(SweepArgs),
    /// Recompute the metric panel of an episode log.
    Metrics(MetricsArgs),
    /// Score formulas and PA-equivalent mapping.
    Analyze(AnalyzeArgs),
    /// Table and figure CSVs from a sweep directory.
    Report(ReportArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum StateArg {
    A,
    B,
}

impl From<StateArg> for StateType {
    fn from(s: StateArg) -> Self {
        match s {
            StateArg::A => StateType::TypeA,
            StateArg::B => StateType::TypeB,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum RewardArg {
    Ilf,
    Iqf,
}

impl From<RewardArg> for RewardScheme {
    fn from(r: RewardArg) -> Self {
        match r {
            RewardArg::Ilf => RewardScheme::Ilf,
            RewardArg::Iqf => RewardScheme::Iqf,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum PolicyArg {
    Random,
    Qlearning,
}

#[derive(Args, Debug, Clone)]
pub struct GameArgs {
    #[arg(long, default_value_t = 2)]
    pub agents: usize,
    #[arg(long, value_enum, default_value = "a", ignore_case = true)]
    pub state_type: StateArg,
    #[arg(long, value_enum, default_value = "ilf", ignore_case = true)]
    pub reward: RewardArg,
    #[arg(long, default_value_t = GameConfig::DEFAULT_PATH_LENGTH)]
    pub path_length: u32,
    #[arg(long, default_value_t = GameConfig::DEFAULT_STEP_CAP)]
    pub step_cap: u32,
}

impl GameArgs {
    fn config(&self) -> Result<GameConfig> {
        GameConfig::new(self.agents, self.state_type.into(), self.reward.into())?
            .with_path_length(self.path_length)?
            .with_step_cap(self.step_cap)
    }
}

#[derive(Args, Debug, Clone)]
pub struct OutputArgs {
    /// Output root [default: $ALTLAB_OUT or altlab-out].
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub run_id: Option<String>,
    #[arg(long)]
    pub overwrite: bool,
}

#[derive(Args, Debug)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub game: GameArgs,
    #[arg(long, value_enum, default_value = "random")]
    pub policy: PolicyArg,
    /// Defaults to the scaled schedule for learners and 10000 for random play.
    #[arg(long)]
    pub episodes: Option<u64>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Pin exploration at a constant rate instead of the decay schedule.
    #[arg(long)]
    pub epsilon: Option<f64>,
    #[arg(long, default_value_t = ScalingConfig::default().base)]
    pub base: u64,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Args, Debug)]
pub struct BaselineArgs {
    #[command(flatten)]
    pub game: GameArgs,
    #[arg(long, default_value_t = BASELINE_EPISODES)]
    pub episodes: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Args, Debug)]
pub struct SweepArgs {
    #[arg(long, value_delimiter = ',', default_values_t = [2usize, 3, 5, 8, 10])]
    pub agents: Vec<usize>,
    #[arg(long, value_enum, value_delimiter = ',', default_values = ["a", "b"], ignore_case = true)]
    pub state_types: Vec<StateArg>,
    #[arg(long, value_enum, value_delimiter = ',', default_values = ["ilf", "iqf"], ignore_case = true)]
    pub rewards: Vec<RewardArg>,
    /// Learner seeds per configuration.
    #[arg(long, default_value_t = 5)]
    pub seeds: usize,
    #[arg(long, default_value_t = ScalingConfig::default().base)]
    pub base: u64,
    /// Fixed learner episode count for every configuration.
    #[arg(long)]
    pub episodes: Option<u64>,
    #[arg(long, default_value_t = BASELINE_EPISODES)]
    pub baseline_episodes: u64,
    #[arg(long, default_value_t = 0)]
    pub seed_root: u64,
    /// Worker threads [default: available cores].
    #[arg(long)]
    pub jobs: Option<usize>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub overwrite: bool,
    #[arg(long)]
    pub reuse_baselines: bool,
}

#[derive(Args, Debug)]
pub struct MetricsArgs {
    #[arg(long)]
    pub log: PathBuf,
    #[arg(long)]
    pub agents: usize,
    #[arg(long, default_value_t = GameConfig::DEFAULT_R_HIGH)]
    pub r_high: f64,
    /// Also write the panel as CSV.
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct AnalyzeArgs {
    #[command(subcommand)]
    pub command: AnalyzeCommand,
}

#[derive(Subcommand, Debug)]
pub enum AnalyzeCommand {
    /// Relative Change and Coordination Score of an observed value.
    Compare {
        #[arg(long)]
        observed: f64,
        #[arg(long)]
        random: f64,
        #[arg(long, default_value = "CALT")]
        variant: AltVariant,
    },
    /// PA-equivalent agents from a CALT value or an ALT ratio.
    Pa {
        #[arg(long, required_unless_present = "ratio", conflicts_with = "ratio")]
        calt: Option<f64>,
        #[arg(long)]
        ratio: Option<f64>,
        #[arg(long)]
        agents: usize,
    },
    /// Fit the ALT-ratio mapping of a variant over PA mixtures.
    Fit {
        #[arg(long, default_value = "CALT")]
        variant: AltVariant,
        #[arg(long, default_value_t = 2)]
        n_min: usize,
        #[arg(long, default_value_t = 40)]
        n_max: usize,
    },
    /// Training episodes under the scaling schedule.
    Episodes {
        #[arg(long, value_delimiter = ',', default_values_t = [2usize, 3, 5, 8, 10])]
        agents: Vec<usize>,
        #[arg(long, default_value_t = ScalingConfig::default().base)]
        base: u64,
    },
}

#[derive(Args, Debug)]
pub struct ReportArgs {
    #[arg(long)]
    pub sweep_dir: PathBuf,
    /// Destination [default: <sweep-dir>/report].
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn out_root(flag: Option<PathBuf>) -> PathBuf {
    flag.or_else(|| std::env::var_os(OUT_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT))
}

fn print_panel(out: &mut dyn Write, label: &str, p: &MetricPanel) {
    let r = |x: crate::metrics::Ratio| x.value().map_or("undefined".to_string(), |v| format!("{v:.4}"));
    let _ = writeln!(out, "[{label}] nu={} windows={}", p.nu, p.b);
    let _ = writeln!(
        out,
        "  fairness={} efficiency={:.4} tt_fairness={} reward_fairness={}",
        r(p.fairness),
        p.efficiency,
        r(p.tt_fairness),
        r(p.reward_fairness)
    );
    let _ = writeln!(
        out,
        "  FALT={:.4} qFALT={:.4} EALT={:.4} qEALT={:.4} CALT={:.4} AALT={:.4}",
        p.falt, p.qfalt, p.ealt, p.qealt, p.calt, p.aalt
    );
}

fn finish_run(out: &mut dyn Write, spec: &ExperimentSpec, overwrite: bool, root: PathBuf) -> Result<i32> {
    let store = RunStore::new(root, overwrite);
    let result = harness::run(spec, Some(&store))?;
    let _ = writeln!(out, "{}", store.run_dir(&spec.run_id).display());
    print_panel(out, "full", &result.panel);
    if let Some(eval) = &result.eval_panel {
        print_panel(out, "greedy_eval", eval);
    }
    let _ = writeln!(
        out,
        "  alt_ratio={:.4} pa_equiv_agents={:.3}",
        result.pa_equiv.alt_ratio, result.pa_equiv.pa_equiv_agents
    );
    Ok(EXIT_OK)
}

fn simulate(args: SimulateArgs, out: &mut dyn Write) -> Result<i32> {
    let game = args.game.config()?;
    let n = game.n_agents;
    let run_id = args.output.run_id.clone().unwrap_or_else(|| {
        let policy = match args.policy {
            PolicyArg::Random => "random",
            PolicyArg::Qlearning => "ql",
        };
        format!("{policy}-n{n:02}-{}-{}-seed{}", game.state_type, game.reward_scheme, args.seed)
    });
    let spec = match args.policy {
        PolicyArg::Random => {
            if args.epsilon.is_some() {
                return Err(Error::Config("--epsilon applies to qlearning only".into()));
            }
            ExperimentSpec::random(run_id, game, args.episodes.unwrap_or(BASELINE_EPISODES), args.seed)
        }
        PolicyArg::Qlearning => {
            let episodes = args
                .episodes
                .unwrap_or_else(|| episodes_for(n, &ScalingConfig { base: args.base }));
            let qcfg = args
                .epsilon
                .map_or_else(QLearningConfig::default, QLearningConfig::constant_epsilon);
            ExperimentSpec::qlearning(run_id, game, qcfg, episodes, args.seed)
        }
    };
    finish_run(out, &spec, args.output.overwrite, out_root(args.output.out))
}

fn baseline(args: BaselineArgs, out: &mut dyn Write) -> Result<i32> {
    let game = args.game.config()?;
    let run_id = args.output.run_id.clone().unwrap_or_else(|| {
        harness::baseline_run_id(game.n_agents, game.state_type, game.reward_scheme)
    });
    let spec = ExperimentSpec::random(run_id, game, args.episodes, args.seed);
    finish_run(out, &spec, args.output.overwrite, out_root(args.output.out))
}

fn sweep(args: SweepArgs, out: &mut dyn Write) -> Result<i32> {
    let mut cfg = SweepConfig::new(out_root(args.out));
    cfg.agents = args.agents;
    cfg.state_types = args.state_types.into_iter().map(Into::into).collect();
    cfg.reward_schemes = args.rewards.into_iter().map(Into::into).collect();
    cfg.seeds = args.seeds;
    cfg.scaling = ScalingConfig { base: args.base };
    cfg.episodes_override = args.episodes;
    cfg.baseline_episodes = args.baseline_episodes;
    cfg.seed_root = args.seed_root;
    if let Some(jobs) = args.jobs {
        cfg.parallelism = jobs;
    }
    cfg.overwrite = args.overwrite;
    cfg.reuse_baselines = args.reuse_baselines;
    for &n in &cfg.agents {
        GameConfig::new(n, StateType::TypeA, RewardScheme::Ilf)?;
    }
    let outcome = harness::sweep(&cfg)?;
    let _ = writeln!(
        out,
        "{} runs ok, {} failed; summary in {}",
        outcome.results.len(),
        outcome.failures.len(),
        cfg.out.display()
    );
    for f in &outcome.failures {
        let _ = writeln!(out, "  FAILED {}: {}", f.run_id, f.error);
    }
    Ok(if outcome.is_complete() { EXIT_OK } else { EXIT_PARTIAL })
}

fn metrics(args: MetricsArgs, out: &mut dyn Write) -> Result<i32> {
    if args.agents < 2 {
        return Err(Error::Config(format!("need at least 2 agents, got {}", args.agents)));
    }
    let log = load_log(&args.log, Some(args.agents))?;
    let panel = MetricPanel::compute(&log, args.agents, args.r_high)?;
    print_panel(out, "full", &panel);
    if let Some(path) = args.csv {
        write_panel_csv(&path, &panel)?;
    }
    Ok(EXIT_OK)
}

fn write_panel_csv(path: &Path, panel: &MetricPanel) -> Result<()> {
    let text = csv_string(&[PanelRow::new("full", panel)])?;
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn analyze(args: AnalyzeArgs, out: &mut dyn Write) -> Result<i32> {
    match args.command {
        AnalyzeCommand::Compare {
            observed,
            random,
            variant,
        } => {
            let c = ComparisonRecord::new(variant, observed, random)?;
            let _ = writeln!(
                out,
                "{}: observed={} random={} rel_change={:.2}% coord_score={:.2}%",
                c.variant, c.observed, c.random_ref, c.relative_change_pct, c.coordination_score_pct
            );
        }
        AnalyzeCommand::Pa {
            calt,
            ratio,
            agents,
        } => {
            let ratio = match (calt, ratio) {
                (Some(c), _) => alt_ratio_from_calt(c),
                (None, Some(r)) => r,
                (None, None) => return Err(Error::Config("pass --calt or --ratio".into())),
            };
            let pa = pa_equivalent(ratio, agents)?;
            let _ = writeln!(
                out,
                "alt_ratio={:.4} pa_equiv_agents={:.3} pct_of_perfect={:.2}%",
                pa.alt_ratio, pa.pa_equiv_agents, pa.pct_of_perfect
            );
        }
        AnalyzeCommand::Fit {
            variant,
            n_min,
            n_max,
        } => {
            let fit = fit_alt_ratio_regression(variant, n_min..=n_max)?;
            let _ = writeln!(
                out,
                "{}: ratio = {:.6} + {:.6} * value^{:.4}  (rmse {:.2e}, {} samples, n in {}..={})",
                fit.variant, fit.intercept, fit.slope, fit.exponent, fit.rmse, fit.samples, fit.n_min, fit.n_max
            );
        }
        AnalyzeCommand::Episodes { agents, base } => {
            let cfg = ScalingConfig { base };
            for n in agents {
                let _ = writeln!(out, "{n}\t{}", episodes_for(n, &cfg));
            }
        }
    }
    Ok(EXIT_OK)
}

fn report(args: ReportArgs, out: &mut dyn Write) -> Result<i32> {
    let dest = args.out.unwrap_or_else(|| args.sweep_dir.join("report"));
    let outcome = write_report(&args.sweep_dir, &dest)?;
    for f in &outcome.files {
        let _ = writeln!(out, "{}", f.display());
    }
    for g in &outcome.gaps {
        let _ = writeln!(out, "  GAP {g}");
    }
    Ok(if outcome.is_complete() { EXIT_OK } else { EXIT_PARTIAL })
}

pub fn execute(cli: Cli, out: &mut dyn Write) -> Result<i32> {
    match cli.command {
        Command::Simulate(a) => simulate(a, out),
        Command::Baseline(a) => baseline(a, out),
        Command::Sweep(a) => sweep(a, out),
        Command::Metrics(a) => metrics(a, out),
        Command::Analyze(a) => analyze(a, out),
        Command::Report(a) => report(a, out),
    }
}

/// Parses arguments, runs the command and returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let stdout = std::io::stdout();
    let mut lock = stdout.lock();
    run_with(args, &mut lock)
}

pub fn run_with<I, T>(args: I, out: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    match execute(cli, out) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
