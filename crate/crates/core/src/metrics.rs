//! Outcome and alternation metrics over an episode log.
//!
//! The alternation (ALT) scores look at every window of `n` consecutive
//! episodes (windows overlap and slide by one, giving `b = ν − n + 1`
//! batches), assign each batch a weight in `[0, 1]` and average the weights.
//! A batch scores 1 exactly when each of the `n` agents wins alone once,
//! in any order.
//!
//! Batch counters:
//!
//! * `f`   distinct agents with at least one arrival (tie participants included)
//! * `tau` total arrivals
//! * `w`   episodes won exclusively
//! * `g`   agents with exactly one exclusive win
//! * `y`   arrivals per episode
//!
//! The traditional metrics (min/max ratios and efficiency) are computed from
//! per-agent tallies over the whole log and are blind to ordering.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::game::EpisodeOutcome;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AltVariant {
    Falt,
    Qfalt,
    Ealt,
    Qealt,
    Calt,
    Aalt,
}

impl AltVariant {
    pub const ALL: [AltVariant; 6] = [
        AltVariant::Falt,
        AltVariant::Qfalt,
        AltVariant::Ealt,
        AltVariant::Qealt,
        AltVariant::Calt,
        AltVariant::Aalt,
    ];

    pub fn name(self) -> &'static str {
        match self {
            AltVariant::Falt => "FALT",
            AltVariant::Qfalt => "qFALT",
            AltVariant::Ealt => "EALT",
            AltVariant::Qealt => "qEALT",
            AltVariant::Calt => "CALT",
            AltVariant::Aalt => "AALT",
        }
    }

    fn slot(self) -> usize {
        self as usize
    }
}

impl fmt::Display for AltVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for AltVariant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        AltVariant::ALL
            .into_iter()
            .find(|v| v.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::Config(format!("unknown ALT variant {s:?}")))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BatchStats {
    pub f: usize,
    pub tau: usize,
    pub w: usize,
    pub g: usize,
    pub y: Vec<usize>,
}

impl BatchStats {
    /// Σ (n − y_ℓ): agents missing the terminal, summed over the batch.
    pub fn tie_sum(&self, n: usize) -> usize {
        self.y.iter().map(|&y| n - y).sum()
    }

    pub fn beta(&self, variant: AltVariant, n: usize) -> f64 {
        Weights::new(self.f, self.tau, self.w, self.g, self.tie_sum(n), n).get(variant)
    }
}

/// Counters for one window of exactly `n` episodes.
pub fn batch_stats(slice: &[EpisodeOutcome], n: usize) -> Result<BatchStats> {
    if slice.len() != n {
        return Err(Error::Config(format!(
            "batch needs exactly {n} episodes, got {}",
            slice.len()
        )));
    }
    let mut arrived = vec![false; n];
    let mut exclusive = vec![0usize; n];
    let mut y = Vec::with_capacity(n);
    for ep in slice {
        for &a in &ep.arrivals {
            if a >= n {
                return Err(Error::Data(format!("agent id {a} out of range for {n} agents")));
            }
            arrived[a] = true;
        }
        if let Some(winner) = ep.exclusive_winner {
            exclusive[winner] += 1;
        }
        y.push(ep.arrivals.len());
    }
    Ok(BatchStats {
        f: arrived.iter().filter(|&&a| a).count(),
        tau: y.iter().sum(),
        w: exclusive.iter().sum(),
        g: exclusive.iter().filter(|&&c| c == 1).count(),
        y,
    })
}

pub fn beta_falt(s: &BatchStats) -> f64 {
    fraction(s.f, s.tau)
}

pub fn beta_qfalt(s: &BatchStats) -> f64 {
    beta_falt(s).powi(2)
}

pub fn beta_ealt(s: &BatchStats, n: usize) -> f64 {
    (s.w * s.f) as f64 / (n * n) as f64
}

pub fn beta_qealt(s: &BatchStats, n: usize) -> f64 {
    beta_ealt(s, n).powi(2)
}

pub fn beta_calt(s: &BatchStats, n: usize) -> f64 {
    s.beta(AltVariant::Calt, n)
}

pub fn beta_aalt(s: &BatchStats) -> f64 {
    fraction(s.g, s.tau)
}

fn fraction(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

/// All six batch weights, computed from the scalar counters.
#[derive(Clone, Copy, Debug, PartialEq)]
struct Weights([f64; 6]);

impl Weights {
    fn new(f: usize, tau: usize, w: usize, g: usize, tie_sum: usize, n: usize) -> Self {
        let falt = fraction(f, tau);
        let qfalt = falt * falt;
        let ealt = (w * f) as f64 / (n * n) as f64;
        // A batch with no arrivals carries no alternation at all.
        let calt = if tau == 0 {
            0.0
        } else {
            (tie_sum as f64 / (n * (n - 1)) as f64) * qfalt
        };
        Weights([falt, qfalt, ealt, ealt * ealt, calt, fraction(g, tau)])
    }

    fn get(&self, variant: AltVariant) -> f64 {
        self.0[variant.slot()]
    }
}

/// Incrementally maintained counters for a window sliding over the log.
struct SlidingBatch {
    n: usize,
    arrivals: Vec<usize>,
    exclusive: Vec<usize>,
    f: usize,
    tau: usize,
    w: usize,
    g: usize,
    tie_sum: usize,
}

impl SlidingBatch {
    fn new(n: usize) -> Self {
        SlidingBatch {
            n,
            arrivals: vec![0; n],
            exclusive: vec![0; n],
            f: 0,
            tau: 0,
            w: 0,
            g: 0,
            tie_sum: 0,
        }
    }

    fn push(&mut self, ep: &EpisodeOutcome) {
        for &a in &ep.arrivals {
            if self.arrivals[a] == 0 {
                self.f += 1;
            }
            self.arrivals[a] += 1;
        }
        self.tau += ep.arrivals.len();
        self.tie_sum += self.n - ep.arrivals.len();
        if let Some(winner) = ep.exclusive_winner {
            self.w += 1;
            let c = &mut self.exclusive[winner];
            match *c {
                0 => self.g += 1,
                1 => self.g -= 1,
                _ => {}
            }
            *c += 1;
        }
    }

    fn pop(&mut self, ep: &EpisodeOutcome) {
        for &a in &ep.arrivals {
            self.arrivals[a] -= 1;
            if self.arrivals[a] == 0 {
                self.f -= 1;
            }
        }
        self.tau -= ep.arrivals.len();
        self.tie_sum -= self.n - ep.arrivals.len();
        if let Some(winner) = ep.exclusive_winner {
            self.w -= 1;
            let c = &mut self.exclusive[winner];
            *c -= 1;
            match *c {
                0 => self.g -= 1,
                1 => self.g += 1,
                _ => {}
            }
        }
    }

    fn key(&self) -> WindowKey {
        (self.f, self.tau, self.w, self.g, self.tie_sum)
    }
}

/// `(f, tau, w, g, tie_sum)`; the weights depend on nothing else.
type WindowKey = (usize, usize, usize, usize, usize);

fn key_weights((f, tau, w, g, tie_sum): WindowKey, n: usize) -> Weights {
    Weights::new(f, tau, w, g, tie_sum, n)
}

fn check_log(log: &[EpisodeOutcome], n: usize) -> Result<()> {
    if n < 2 {
        return Err(Error::Config(format!("at least 2 agents required, got {n}")));
    }
    if log.len() < n {
        return Err(Error::InsufficientData {
            episodes: log.len(),
            required: n,
        });
    }
    for ep in log {
        ep.validate(n)
            .map_err(|m| Error::Data(format!("episode {}: {m}", ep.episode_index)))?;
    }
    Ok(())
}

/// Mean batch weights for all six variants.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AltScores {
    pub falt: f64,
    pub qfalt: f64,
    pub ealt: f64,
    pub qealt: f64,
    pub calt: f64,
    pub aalt: f64,
}

impl AltScores {
    pub fn get(&self, variant: AltVariant) -> f64 {
        match variant {
            AltVariant::Falt => self.falt,
            AltVariant::Qfalt => self.qfalt,
            AltVariant::Ealt => self.ealt,
            AltVariant::Qealt => self.qealt,
            AltVariant::Calt => self.calt,
            AltVariant::Aalt => self.aalt,
        }
    }

    fn from_array(v: [f64; 6]) -> Self {
        AltScores {
            falt: v[0],
            qfalt: v[1],
            ealt: v[2],
            qealt: v[3],
            calt: v[4],
            aalt: v[5],
        }
    }
}

pub fn alt_scores(log: &[EpisodeOutcome], n: usize) -> Result<AltScores> {
    check_log(log, n)?;
    Ok(alt_scores_unchecked(log, n))
}

/// Batch weights for every window, in order.
pub fn batch_weights(log: &[EpisodeOutcome], n: usize) -> Result<Vec<AltScores>> {
    check_log(log, n)?;
    let mut out = Vec::with_capacity(log.len() - n + 1);
    for_each_window(log, n, |k| out.push(AltScores::from_array(key_weights(k, n).0)));
    Ok(out)
}

fn for_each_window(log: &[EpisodeOutcome], n: usize, mut visit: impl FnMut(WindowKey)) {
    let mut window = SlidingBatch::new(n);
    for ep in &log[..n] {
        window.push(ep);
    }
    visit(window.key());
    for (old, new) in log.iter().zip(&log[n..]) {
        window.pop(old);
        window.push(new);
        visit(window.key());
    }
}

/// Windows are tallied by counter tuple and each distinct tuple is weighted by
/// its share of `b`, so a log whose windows all agree scores that weight exactly.
fn alt_scores_unchecked(log: &[EpisodeOutcome], n: usize) -> AltScores {
    let mut tally: BTreeMap<WindowKey, usize> = BTreeMap::new();
    let mut b = 0usize;
    for_each_window(log, n, |k| {
        *tally.entry(k).or_default() += 1;
        b += 1;
    });
    let mut sums = [0.0; 6];
    for (k, count) in tally {
        let share = count as f64 / b as f64;
        for (s, v) in sums.iter_mut().zip(key_weights(k, n).0) {
            *s += share * v;
        }
    }
    AltScores::from_array(sums)
}

/// Mean of one variant's batch weight over all `ν − n + 1` windows.
pub fn alt_score(log: &[EpisodeOutcome], n: usize, variant: AltVariant) -> Result<f64> {
    Ok(alt_scores(log, n)?.get(variant))
}

/// A min/max ratio that is undefined when the maximum is zero.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Ratio {
    Value(f64),
    Undefined,
}

impl Ratio {
    pub fn min_over_max<T: Copy + PartialOrd + Into<f64>>(values: &[T]) -> Ratio {
        let vals: Vec<f64> = values.iter().map(|&v| v.into()).collect();
        let max = vals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let min = vals.iter().copied().fold(f64::INFINITY, f64::min);
        if vals.is_empty() || max <= 0.0 {
            Ratio::Undefined
        } else {
            Ratio::Value(min / max)
        }
    }

    pub fn value(self) -> Option<f64> {
        match self {
            Ratio::Value(v) => Some(v),
            Ratio::Undefined => None,
        }
    }

    pub fn is_undefined(self) -> bool {
        matches!(self, Ratio::Undefined)
    }
}

impl fmt::Display for Ratio {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Ratio::Value(v) => write!(f, "{v}"),
            Ratio::Undefined => f.write_str("undefined"),
        }
    }
}

impl Serialize for Ratio {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.value().serialize(s)
    }
}

impl<'de> Deserialize<'de> for Ratio {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        Ok(Option::<f64>::deserialize(d)?.map_or(Ratio::Undefined, Ratio::Value))
    }
}

/// Per-agent totals behind the traditional metrics.
#[derive(Clone, Debug, PartialEq)]
pub struct AgentTallies {
    /// Exclusive wins.
    pub wins: Vec<u64>,
    /// Terminal arrivals, ties included.
    pub arrivals: Vec<u64>,
    /// Cumulative payoff.
    pub payoffs: Vec<f64>,
    /// Sum of all rewards paid, accumulated episode by episode.
    pub total_reward: f64,
}

impl AgentTallies {
    pub fn from_log(log: &[EpisodeOutcome], n: usize) -> Self {
        let mut t = AgentTallies {
            wins: vec![0; n],
            arrivals: vec![0; n],
            payoffs: vec![0.0; n],
            total_reward: 0.0,
        };
        for ep in log {
            if let Some(winner) = ep.exclusive_winner {
                t.wins[winner] += 1;
            }
            for &a in &ep.arrivals {
                t.arrivals[a] += 1;
            }
            for (p, r) in t.payoffs.iter_mut().zip(&ep.rewards) {
                *p += r;
            }
            t.total_reward += ep.rewards.iter().sum::<f64>();
        }
        t
    }
}

fn u64_ratio(values: &[u64]) -> Ratio {
    let as_f64: Vec<f64> = values.iter().map(|&v| v as f64).collect();
    Ratio::min_over_max(&as_f64)
}

/// min_i w_i / max_i w_i over exclusive wins.
pub fn fairness(log: &[EpisodeOutcome], n: usize) -> Ratio {
    u64_ratio(&AgentTallies::from_log(log, n).wins)
}

/// Total reward captured relative to one `r_high` per episode.
pub fn efficiency(log: &[EpisodeOutcome], n: usize, r_high: f64) -> f64 {
    if log.is_empty() {
        return 0.0;
    }
    AgentTallies::from_log(log, n).total_reward / (log.len() as f64 * r_high)
}

/// min_i t_i / max_i t_i over terminal arrivals.
pub fn tt_fairness(log: &[EpisodeOutcome], n: usize) -> Ratio {
    u64_ratio(&AgentTallies::from_log(log, n).arrivals)
}

/// min_i p_i / max_i p_i over cumulative payoffs.
pub fn reward_fairness(log: &[EpisodeOutcome], n: usize) -> Ratio {
    Ratio::min_over_max(&AgentTallies::from_log(log, n).payoffs)
}

/// Every metric for one log.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricPanel {
    pub nu: usize,
    pub b: usize,
    pub fairness: Ratio,
    pub efficiency: f64,
    pub tt_fairness: Ratio,
    pub reward_fairness: Ratio,
    pub falt: f64,
    pub qfalt: f64,
    pub ealt: f64,
    pub qealt: f64,
    pub calt: f64,
    pub aalt: f64,
}

impl MetricPanel {
    pub fn compute(log: &[EpisodeOutcome], n: usize, r_high: f64) -> Result<Self> {
        check_log(log, n)?;
        if !(r_high.is_finite() && r_high > 0.0) {
            return Err(Error::Config(format!("r_high must be positive, got {r_high}")));
        }
        let alt = alt_scores_unchecked(log, n);
        let tallies = AgentTallies::from_log(log, n);
        Ok(MetricPanel {
            nu: log.len(),
            b: log.len() - n + 1,
            fairness: u64_ratio(&tallies.wins),
            efficiency: tallies.total_reward / (log.len() as f64 * r_high),
            tt_fairness: u64_ratio(&tallies.arrivals),
            reward_fairness: Ratio::min_over_max(&tallies.payoffs),
            falt: alt.falt,
            qfalt: alt.qfalt,
            ealt: alt.ealt,
            qealt: alt.qealt,
            calt: alt.calt,
            aalt: alt.aalt,
        })
    }

    pub fn alt(&self) -> AltScores {
        AltScores {
            falt: self.falt,
            qfalt: self.qfalt,
            ealt: self.ealt,
            qealt: self.qealt,
            calt: self.calt,
            aalt: self.aalt,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::{GameConfig, RewardScheme, StateType};
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn cfg(n: usize) -> GameConfig {
        GameConfig::new(n, StateType::TypeA, RewardScheme::Ilf).unwrap()
    }

    fn ep(n: usize, arrivals: &[usize]) -> EpisodeOutcome {
        EpisodeOutcome::from_arrivals(0, arrivals.to_vec(), 2, &cfg(n)).unwrap()
    }

    fn log_of(n: usize, episodes: &[&[usize]]) -> Vec<EpisodeOutcome> {
        episodes
            .iter()
            .enumerate()
            .map(|(i, a)| {
                let mut e = ep(n, a);
                e.episode_index = i as u64;
                e
            })
            .collect()
    }

    #[test]
    fn batch_counters() {
        let s = batch_stats(&log_of(3, &[&[0], &[0, 1], &[2]]), 3).unwrap();
        assert_eq!((s.f, s.tau, s.w, s.g), (3, 4, 2, 2));
        assert_eq!(s.y, vec![1, 2, 1]);

        let s = batch_stats(&log_of(2, &[&[0], &[1]]), 2).unwrap();
        assert_eq!((s.f, s.tau, s.w, s.g, s.y.clone()), (2, 2, 2, 2, vec![1, 1]));

        let s = batch_stats(&log_of(2, &[&[0, 1], &[0, 1]]), 2).unwrap();
        assert_eq!((s.f, s.tau, s.w, s.g, s.y.clone()), (2, 4, 0, 0, vec![2, 2]));

        assert!(batch_stats(&log_of(2, &[&[0]]), 2).is_err());
    }

    #[test]
    fn batch_weights_by_hand() {
        let pa = batch_stats(&log_of(2, &[&[0], &[1]]), 2).unwrap();
        let mono = batch_stats(&log_of(2, &[&[0], &[0]]), 2).unwrap();
        let ties = batch_stats(&log_of(2, &[&[0, 1], &[0, 1]]), 2).unwrap();
        let three = batch_stats(&log_of(3, &[&[0], &[0, 1], &[2]]), 3).unwrap();

        assert_eq!(beta_falt(&pa), 1.0);
        assert_eq!(beta_falt(&mono), 0.5);
        assert_eq!(beta_falt(&ties), 0.5);

        assert_eq!(beta_qfalt(&pa), 1.0);
        assert_eq!(beta_qfalt(&mono), 0.25);
        assert_eq!(beta_qfalt(&three), 0.5625);

        assert_eq!(beta_ealt(&pa, 2), 1.0);
        assert_eq!(beta_ealt(&mono, 2), 0.5);
        assert_abs_diff_eq!(beta_ealt(&three, 3), 2.0 / 3.0, epsilon = 1e-12);

        assert_eq!(beta_qealt(&pa, 2), 1.0);
        assert_eq!(beta_qealt(&mono, 2), 0.25);
        assert_abs_diff_eq!(beta_qealt(&three, 3), 4.0 / 9.0, epsilon = 1e-12);

        assert_eq!(beta_calt(&pa, 2), 1.0);
        assert_eq!(beta_calt(&mono, 2), 0.25);
        assert_eq!(beta_calt(&ties, 2), 0.0);
        assert_abs_diff_eq!(beta_calt(&three, 3), 5.0 * 0.5625 / 6.0, epsilon = 1e-12);
        assert_abs_diff_eq!(beta_calt(&three, 3), 0.4688, epsilon = 1e-4);

        assert_eq!(beta_aalt(&pa), 1.0);
        assert_eq!(beta_aalt(&mono), 0.0);
        assert_eq!(beta_aalt(&three), 0.5);
    }

    #[test]
    fn empty_batches_weigh_zero() {
        let capped = EpisodeOutcome {
            episode_index: 0,
            arrivals: vec![],
            exclusive_winner: None,
            rewards: vec![0.0, 0.0],
            steps_used: 1000,
            capped: true,
        };
        let s = batch_stats(&[capped.clone(), capped], 2).unwrap();
        for v in AltVariant::ALL {
            assert_eq!(s.beta(v, 2), 0.0, "{v}");
        }
    }

    #[test]
    fn alternating_and_monopoly_logs() {
        let pa = log_of(2, &[&[0], &[1], &[0], &[1]]);
        let scores = alt_scores(&pa, 2).unwrap();
        for v in AltVariant::ALL {
            assert_eq!(scores.get(v), 1.0, "{v}");
        }
        let mono = log_of(2, &[&[0], &[0], &[0], &[0]]);
        let s = alt_scores(&mono, 2).unwrap();
        assert_eq!((s.calt, s.falt, s.ealt, s.aalt), (0.25, 0.5, 0.5, 0.0));
        assert!(matches!(
            alt_score(&pa[..1], 2, AltVariant::Calt),
            Err(Error::InsufficientData { episodes: 1, required: 2 })
        ));
    }

    #[test]
    fn traditional_metrics() {
        let pa = log_of(2, &[&[0], &[1], &[0], &[1]]);
        let mono = log_of(2, &[&[0], &[0], &[0], &[0]]);
        let ties = log_of(2, &[&[0, 1], &[0, 1]]);

        assert_eq!(fairness(&pa, 2), Ratio::Value(1.0));
        assert_eq!(fairness(&mono, 2), Ratio::Value(0.0));
        assert_eq!(fairness(&ties, 2), Ratio::Undefined);

        assert_eq!(efficiency(&pa, 2, 100.0), 1.0);
        assert_eq!(efficiency(&ties, 2, 100.0), 0.0);

        assert_eq!(tt_fairness(&pa, 2), Ratio::Value(1.0));
        assert_eq!(tt_fairness(&mono, 2), Ratio::Value(0.0));
        assert_eq!(tt_fairness(&log_of(2, &[&[0], &[0, 1]]), 2), Ratio::Value(0.5));

        assert_eq!(reward_fairness(&pa, 2), Ratio::Value(1.0));
        assert_eq!(reward_fairness(&mono, 2), Ratio::Value(0.0));
        assert_eq!(reward_fairness(&ties, 2), Ratio::Undefined);
    }

    #[test]
    fn pa_logs_score_one_for_larger_groups() {
        for n in 2..=10 {
            let rotation: Vec<Vec<usize>> = (0..5 * n).map(|e| vec![e % n]).collect();
            let refs: Vec<&[usize]> = rotation.iter().map(Vec::as_slice).collect();
            let panel = MetricPanel::compute(&log_of(n, &refs), n, 100.0).unwrap();
            assert_eq!(panel.efficiency, 1.0);
            assert_eq!(panel.b, 5 * n - n + 1);
            for v in AltVariant::ALL {
                assert_eq!(panel.alt().get(v), 1.0, "n={n} {v}");
            }
        }
    }

    #[test]
    fn undefined_ratios_serialize_as_null() {
        let json = serde_json::to_string(&Ratio::Undefined).unwrap();
        assert_eq!(json, "null");
        let back: Ratio = serde_json::from_str("0.5").unwrap();
        assert_eq!(back, Ratio::Value(0.5));
        let back: Ratio = serde_json::from_str("null").unwrap();
        assert!(back.is_undefined());
    }

    #[test]
    fn variant_names_parse() {
        for v in AltVariant::ALL {
            assert_eq!(v.name().parse::<AltVariant>().unwrap(), v);
        }
        assert_eq!("calt".parse::<AltVariant>().unwrap(), AltVariant::Calt);
        assert!("xalt".parse::<AltVariant>().is_err());
    }

    /// Arbitrary logs: each episode is an arrival subset (possibly empty = capped).
    fn arb_log(max_n: usize) -> impl Strategy<Value = (usize, Vec<EpisodeOutcome>)> {
        (2..=max_n).prop_flat_map(|n| {
            let episode = prop::collection::vec(any::<bool>(), n);
            (Just(n), prop::collection::vec(episode, n..4 * n + 8)).prop_map(|(n, masks)| {
                let c = cfg(n);
                let log = masks
                    .into_iter()
                    .enumerate()
                    .map(|(i, m)| {
                        let arrivals = (0..n).filter(|&a| m[a]).collect();
                        EpisodeOutcome::from_arrivals(i as u64, arrivals, 3, &c).unwrap()
                    })
                    .collect();
                (n, log)
            })
        })
    }

    proptest! {
        #[test]
        fn sliding_windows_match_direct_counts((n, log) in arb_log(6)) {
            let weights = batch_weights(&log, n).unwrap();
            prop_assert_eq!(weights.len(), log.len() - n + 1);
            for (j, w) in weights.iter().enumerate() {
                let s = batch_stats(&log[j..j + n], n).unwrap();
                prop_assert_eq!(w.falt, beta_falt(&s));
                prop_assert_eq!(w.qfalt, beta_qfalt(&s));
                prop_assert_eq!(w.ealt, beta_ealt(&s, n));
                prop_assert_eq!(w.qealt, beta_qealt(&s, n));
                prop_assert_eq!(w.calt, beta_calt(&s, n));
                prop_assert_eq!(w.aalt, beta_aalt(&s));
                prop_assert!(s.f <= n && s.w <= n && s.g <= s.f);
            }
        }

        #[test]
        fn weights_are_bounded_and_ordered((n, log) in arb_log(7)) {
            for (j, w) in batch_weights(&log, n).unwrap().into_iter().enumerate() {
                // an empty (capped) episode contributes n to the tie sum
                let capped = log[j..j + n].iter().any(|e| e.arrivals.is_empty());
                for v in AltVariant::ALL {
                    let x = w.get(v);
                    let hi = if capped && v == AltVariant::Calt { n as f64 / (n - 1) as f64 } else { 1.0 };
                    prop_assert!((0.0..=hi).contains(&x), "{} = {}", v, x);
                }
                prop_assert!(w.qfalt <= w.falt);
                prop_assert!(w.qealt <= w.ealt);
            }
        }

        #[test]
        fn relabeling_agents_changes_nothing((n, log) in arb_log(6), shift in 1usize..6) {
            let c = cfg(n);
            let relabeled: Vec<EpisodeOutcome> = log
                .iter()
                .map(|e| {
                    let arrivals = e.arrivals.iter().map(|a| (a + shift) % n).collect();
                    EpisodeOutcome::from_arrivals(e.episode_index, arrivals, e.steps_used, &c).unwrap()
                })
                .collect();
            let a = MetricPanel::compute(&log, n, 100.0).unwrap();
            let b = MetricPanel::compute(&relabeled, n, 100.0).unwrap();
            prop_assert_eq!(a, b);
        }

        #[test]
        fn a_tie_in_a_pa_log_degrades_scores(n in 2usize..8, blocks in 2usize..5, pick in any::<prop::sample::Index>()) {
            let c = cfg(n);
            let pa: Vec<EpisodeOutcome> = (0..n * blocks)
                .map(|e| EpisodeOutcome::from_arrivals(e as u64, vec![e % n], 2, &c).unwrap())
                .collect();
            let mut broken = pa.clone();
            let i = pick.index(broken.len());
            broken[i] = EpisodeOutcome::from_arrivals(i as u64, (0..n).collect(), 2, &c).unwrap();
            let before = alt_scores(&pa, n).unwrap();
            let after = alt_scores(&broken, n).unwrap();
            prop_assert!(after.calt < before.calt);
            prop_assert!(after.ealt < before.ealt);
            prop_assert!(after.aalt < before.aalt);
        }
    }
}
