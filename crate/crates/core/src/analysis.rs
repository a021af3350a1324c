//! Interpretation layer: comparisons against the random null process, the
//! AltRatio / PA-equivalent mapping and the episode-count schedule.

use std::ops::RangeInclusive;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::game::{EpisodeOutcome, GameConfig, RewardScheme, StateType};
use crate::metrics::{alt_scores, AltVariant};

/// Percent difference of an observed ALT value from its random baseline.
pub fn relative_change(observed: f64, random_ref: f64) -> Result<f64> {
    if !(random_ref.is_finite() && random_ref > 0.0) {
        return Err(Error::UndefinedComparison(random_ref));
    }
    Ok((observed - random_ref) / random_ref * 100.0)
}

/// Observed value placed on the random (0%) to perfect (100%) scale.
pub fn coordination_score(observed: f64, random_ref: f64, perfect: f64) -> Result<f64> {
    if perfect.partial_cmp(&random_ref) != Some(std::cmp::Ordering::Greater) {
        return Err(Error::DegenerateReference {
            perfect,
            random: random_ref,
        });
    }
    Ok((observed - random_ref) / (perfect - random_ref) * 100.0)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRecord {
    pub variant: AltVariant,
    pub observed: f64,
    pub random_ref: f64,
    pub relative_change_pct: f64,
    pub coordination_score_pct: f64,
}

impl ComparisonRecord {
    pub const PERFECT: f64 = 1.0;

    pub fn new(variant: AltVariant, observed: f64, random_ref: f64) -> Result<Self> {
        Ok(ComparisonRecord {
            variant,
            observed,
            random_ref,
            relative_change_pct: relative_change(observed, random_ref)?,
            coordination_score_pct: coordination_score(observed, random_ref, Self::PERFECT)?,
        })
    }
}

/// Intercept of the published CALT-to-AltRatio mapping.
pub const CALT_RATIO_OFFSET: f64 = 1.879e-10;

/// `√(CALT − offset)`, clamped at zero.
pub fn alt_ratio_from_calt(calt: f64) -> f64 {
    (calt - CALT_RATIO_OFFSET).max(0.0).sqrt()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PAEquivalent {
    pub alt_ratio: f64,
    pub pa_equiv_agents: f64,
    pub pct_of_perfect: f64,
}

/// "Coordinates as well as `x` of `n` perfectly alternating agents."
pub fn pa_equivalent(alt_ratio: f64, n: usize) -> Result<PAEquivalent> {
    if !(0.0..=1.0).contains(&alt_ratio) {
        return Err(Error::Data(format!("alt ratio {alt_ratio} outside [0, 1]")));
    }
    Ok(PAEquivalent {
        alt_ratio,
        pa_equiv_agents: n as f64 * alt_ratio,
        pct_of_perfect: 100.0 * alt_ratio,
    })
}

/// A log where agents `0..x` win alone in strict rotation and the other
/// `n − x` agents never arrive.
pub fn synth_pa_mixture(x: usize, n: usize, nu: usize) -> Result<Vec<EpisodeOutcome>> {
    if x == 0 || x > n {
        return Err(Error::Config(format!(
            "mixture needs 1 <= x <= n, got x = {x}, n = {n}"
        )));
    }
    if nu < n {
        return Err(Error::InsufficientData {
            episodes: nu,
            required: n,
        });
    }
    let cfg = GameConfig::new(n, StateType::TypeA, RewardScheme::Ilf)?;
    (0..nu)
        .map(|e| {
            EpisodeOutcome::from_arrivals(e as u64, vec![e % x], cfg.path_length, &cfg)
        })
        .collect()
}

/// Fitted mapping `alt_ratio ≈ intercept + slope · value^exponent`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AltRatioFit {
    pub variant: AltVariant,
    pub n_min: usize,
    pub n_max: usize,
    pub intercept: f64,
    pub slope: f64,
    pub exponent: f64,
    pub rmse: f64,
    pub samples: usize,
}

impl AltRatioFit {
    pub fn predict(&self, value: f64) -> f64 {
        (self.intercept + self.slope * value.max(0.0).powf(self.exponent)).clamp(0.0, 1.0)
    }
}

/// Ordinary least squares on one regressor; returns (intercept, slope, sse).
fn ols(xs: &[f64], ys: &[f64]) -> Option<(f64, f64, f64)> {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx <= f64::EPSILON * n {
        return None;
    }
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let sse = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| (y - intercept - slope * x).powi(2))
        .sum();
    Some((intercept, slope, sse))
}

/// Regresses `x/n` on a variant's score over PA mixtures for every
/// `1 <= x <= n`, `n` in `n_range`, each with `10·n` episodes.
///
/// The exponent is found by a grid scan over `[0.1, 4]` followed by golden
/// section refinement; intercept and slope are the OLS solution for it.
pub fn fit_alt_ratio_regression(
    variant: AltVariant,
    n_range: RangeInclusive<usize>,
) -> Result<AltRatioFit> {
    let (n_min, n_max) = (*n_range.start(), *n_range.end());
    if n_min < 2 || n_max > 40 || n_min > n_max {
        return Err(Error::Config(format!(
            "agent range {n_min}..={n_max} must lie within 2..=40"
        )));
    }
    let mut values = Vec::new();
    let mut ratios = Vec::new();
    for n in n_range {
        for x in 1..=n {
            let log = synth_pa_mixture(x, n, 10 * n)?;
            values.push(alt_scores(&log, n)?.get(variant));
            ratios.push(x as f64 / n as f64);
        }
    }
    if values.len() < 3 {
        return Err(Error::Fit(format!("{} samples, need at least 3", values.len())));
    }

    let sse_at = |p: f64| -> Option<(f64, f64, f64)> {
        let xs: Vec<f64> = values.iter().map(|v| v.max(0.0).powf(p)).collect();
        ols(&xs, &ratios)
    };
    let cost = |p: f64| sse_at(p).map_or(f64::INFINITY, |(_, _, sse)| sse);

    let grid: Vec<f64> = (0..=390).map(|i| 0.1 + 0.01 * i as f64).collect();
    let (best_i, _) = grid
        .iter()
        .map(|&p| cost(p))
        .enumerate()
        .fold((0, f64::INFINITY), |(bi, bc), (i, c)| if c < bc { (i, c) } else { (bi, bc) });
    if !cost(grid[best_i]).is_finite() {
        return Err(Error::Fit(format!("{variant} is constant over the mixtures")));
    }
    let mut lo = grid[best_i.saturating_sub(1)];
    let mut hi = grid[(best_i + 1).min(grid.len() - 1)];
    let phi = (5f64.sqrt() - 1.0) / 2.0;
    for _ in 0..80 {
        let a = hi - phi * (hi - lo);
        let b = lo + phi * (hi - lo);
        if cost(a) <= cost(b) {
            hi = b;
        } else {
            lo = a;
        }
    }
    let exponent = [lo, hi, grid[best_i]]
        .into_iter()
        .min_by(|a, b| cost(*a).total_cmp(&cost(*b)))
        .unwrap_or(grid[best_i]);
    let (intercept, slope, sse) = sse_at(exponent)
        .ok_or_else(|| Error::Fit(format!("degenerate design for {variant}")))?;
    Ok(AltRatioFit {
        variant,
        n_min,
        n_max,
        intercept,
        slope,
        exponent,
        rmse: (sse / values.len() as f64).sqrt(),
        samples: values.len(),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScalingConfig {
    pub base: u64,
}

impl Default for ScalingConfig {
    fn default() -> Self {
        ScalingConfig { base: 1000 }
    }
}

/// Training episodes for `n` agents: `⌊BASE · (n/2)² · (1 + ln(n!/2!))⌋`.
pub fn episodes_for(n: usize, cfg: &ScalingConfig) -> u64 {
    let ln_ratio: f64 = (3..=n).map(|k| (k as f64).ln()).sum();
    let half = n as f64 / 2.0;
    (cfg.base as f64 * half * half * (1.0 + ln_ratio)).floor() as u64
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn relative_change_examples() {
        assert_abs_diff_eq!(relative_change(0.322, 0.486).unwrap(), -33.7, epsilon = 0.3);
        assert_eq!(relative_change(0.4, 0.4).unwrap(), 0.0);
        assert_abs_diff_eq!(relative_change(0.048, 0.111).unwrap(), -56.6, epsilon = 0.3);
        assert!(matches!(relative_change(0.1, 0.0), Err(Error::UndefinedComparison(_))));
    }

    #[test]
    fn coordination_score_examples() {
        assert_abs_diff_eq!(coordination_score(0.322, 0.486, 1.0).unwrap(), -31.8, epsilon = 0.3);
        assert_eq!(coordination_score(1.0, 0.3, 1.0).unwrap(), 100.0);
        assert_eq!(coordination_score(0.3, 0.3, 1.0).unwrap(), 0.0);
        assert_abs_diff_eq!(coordination_score(0.062, 0.243, 1.0).unwrap(), -23.8, epsilon = 0.3);
        assert!(matches!(
            coordination_score(0.5, 1.0, 1.0),
            Err(Error::DegenerateReference { .. })
        ));
    }

    #[test]
    fn ratio_mapping() {
        assert_abs_diff_eq!(alt_ratio_from_calt(0.3222), 0.568, epsilon = 0.0005);
        assert_abs_diff_eq!(alt_ratio_from_calt(1.0), 1.0, epsilon = 1e-5);
        assert_abs_diff_eq!(alt_ratio_from_calt(0.16), 0.4, epsilon = 1e-9);
        assert_eq!(alt_ratio_from_calt(0.0), 0.0);
        assert_eq!(alt_ratio_from_calt(-1.0), 0.0);
    }

    #[test]
    fn pa_equivalents() {
        let p = pa_equivalent(0.219, 10).unwrap();
        assert_abs_diff_eq!(p.pa_equiv_agents, 2.19, epsilon = 1e-12);
        assert_abs_diff_eq!(p.pct_of_perfect, 21.9, epsilon = 1e-12);
        assert_eq!(pa_equivalent(1.0, 7).unwrap().pa_equiv_agents, 7.0);
        assert_abs_diff_eq!(pa_equivalent(0.4, 5).unwrap().pa_equiv_agents, 2.0, epsilon = 1e-12);
        assert!(pa_equivalent(1.5, 5).is_err());
    }

    #[test]
    fn mixtures() {
        let full = synth_pa_mixture(4, 4, 40).unwrap();
        let s = alt_scores(&full, 4).unwrap();
        assert_eq!((s.falt, s.calt, s.aalt), (1.0, 1.0, 1.0));

        for n in 2..=6 {
            let mono = synth_pa_mixture(1, n, 10 * n).unwrap();
            let calt = alt_scores(&mono, n).unwrap().calt;
            assert_abs_diff_eq!(calt, 1.0 / (n * n) as f64, epsilon = 1e-15);
        }

        let mix = synth_pa_mixture(2, 5, 50).unwrap();
        let s = alt_scores(&mix, 5).unwrap();
        assert_abs_diff_eq!(s.calt, 0.16, epsilon = 1e-15);
        assert_abs_diff_eq!(s.falt, 0.4, epsilon = 1e-15);
        assert_abs_diff_eq!(s.ealt, 0.4, epsilon = 1e-15);

        assert!(synth_pa_mixture(0, 3, 30).is_err());
        assert!(synth_pa_mixture(4, 3, 30).is_err());
        assert!(synth_pa_mixture(2, 3, 2).is_err());
    }

    #[test]
    fn rotation_order_is_immaterial() {
        let n = 5;
        let base = synth_pa_mixture(3, n, 50).unwrap();
        let cfg = GameConfig::new(n, StateType::TypeA, RewardScheme::Ilf).unwrap();
        // Rotate through agents 4, 2, 0 instead of 0, 1, 2.
        let order = [4, 2, 0];
        let other: Vec<EpisodeOutcome> = (0..50)
            .map(|e| EpisodeOutcome::from_arrivals(e as u64, vec![order[e % 3]], 2, &cfg).unwrap())
            .collect();
        assert_eq!(alt_scores(&base, n).unwrap(), alt_scores(&other, n).unwrap());
    }

    #[test]
    fn calt_fit_recovers_square_root() {
        let fit = fit_alt_ratio_regression(AltVariant::Calt, 2..=10).unwrap();
        assert_abs_diff_eq!(fit.exponent, 0.5, epsilon = 1e-3);
        for i in 0..=100 {
            let v = i as f64 / 100.0;
            assert!((fit.predict(v) - v.sqrt()).abs() < 1e-3, "at {v}");
        }
    }

    #[test]
    fn falt_and_ealt_fits_are_linear() {
        for variant in [AltVariant::Falt, AltVariant::Ealt] {
            let fit = fit_alt_ratio_regression(variant, 2..=10).unwrap();
            assert_abs_diff_eq!(fit.exponent, 1.0, epsilon = 1e-3);
            assert_abs_diff_eq!(fit.slope, 1.0, epsilon = 1e-3);
            assert_abs_diff_eq!(fit.intercept, 0.0, epsilon = 1e-3);
            assert!(fit.rmse < 1e-6);
        }
    }

    #[test]
    fn fit_rejects_bad_ranges() {
        assert!(fit_alt_ratio_regression(AltVariant::Calt, 1..=5).is_err());
        assert!(fit_alt_ratio_regression(AltVariant::Calt, 2..=41).is_err());
        // n = 2 alone yields only two samples
        assert!(matches!(
            fit_alt_ratio_regression(AltVariant::Calt, 2..=2),
            Err(Error::Fit(_))
        ));
    }

    #[test]
    fn episode_schedule() {
        let c = ScalingConfig::default();
        assert_eq!(episodes_for(2, &c), 1000);
        assert_eq!(episodes_for(3, &c), 4721);
        assert_eq!(episodes_for(5, &c), 31839);
        assert_eq!(episodes_for(8, &c), 174_583);
        assert_eq!(episodes_for(10, &c), 385_281);
        for n in 2..40 {
            assert!(episodes_for(n + 1, &c) > episodes_for(n, &c));
        }
    }
}
